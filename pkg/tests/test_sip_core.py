import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siplab.sip_core import (
    AuthParams,
    BadHexPayload,
    BodyLengthMismatch,
    DuplicateKey,
    MalformedAuthParams,
    MalformedHeader,
    MalformedStartLine,
    MissingMandatoryHeader,
    SipMessage,
    SipParseError,
    UnknownMethod,
    canonical,
    format_auth_params,
    parse_auth_params,
    parse_message,
    request,
    response,
    serialize_message,
)

from conftest import CORPUS

BASE = [
    ("Via", "SIP/2.0/SIM ua-alice;branch=z9hG4bK1"),
    ("From", "<sip:alice@siplab.test>;tag=1"),
    ("To", "<sip:alice@siplab.test>"),
    ("Call-ID", "abc@ua-alice"),
    ("CSeq", "1 REGISTER"),
]


def raw(start, headers, body=b""):
    head = "\r\n".join([start] + [f"{k}: {v}" for k, v in headers])
    return head.encode() + b"\r\n\r\n" + body


def test_request_round_trip():
    msg = request("REGISTER", "sip:siplab.test", BASE, b"hello")
    wire = serialize_message(msg)
    assert parse_message(wire) == msg
    assert msg.header("content-length") == "5"
    assert msg.cseq == (1, "REGISTER")


def test_response_round_trip_and_default_reason():
    msg = response(401, BASE)
    assert msg.reason == "Unauthorized"
    assert parse_message(serialize_message(msg)) == msg


def test_header_lookup_is_case_insensitive_and_values_stripped():
    msg = parse_message(raw("INVITE sip:bob@x SIP/2.0", [(k.lower(), f"  {v} ") for k, v in BASE]))
    assert msg.header("CALL-ID") == "abc@ua-alice"
    assert msg.call_id == "abc@ua-alice"


def test_unknown_headers_carried_through():
    wire = raw("BYE sip:bob@x SIP/2.0", BASE + [("X-Thing", "a, b;c")])
    assert parse_message(wire).header("x-thing") == "a, b;c"
    assert canonical(wire) == wire


@pytest.mark.parametrize(
    "data, error",
    [
        (b"REGISTER sip:x SIP/2.0\r\nCall-ID: a\r\n", MalformedStartLine),  # no terminator
        (raw("REGISTER sip:x SIP/3.0", BASE), MalformedStartLine),
        (raw("SIP/2.0 99 Low", BASE), MalformedStartLine),
        (raw("SIP/2.0 2000 OK", BASE), MalformedStartLine),
        (raw("OPTIONS sip:x SIP/2.0", BASE), UnknownMethod),
        (raw("REGISTER sip:x SIP/2.0", BASE[:3] + BASE[4:]), MissingMandatoryHeader),
        (raw("REGISTER sip:x SIP/2.0", BASE[:4]), MissingMandatoryHeader),
        (raw("REGISTER sip:x SIP/2.0", BASE + [("Content-Length", "9")], b"abc"), BodyLengthMismatch),
        (raw("REGISTER sip:x SIP/2.0", BASE + [("Content-Length", "x")]), MalformedHeader),
        (raw("REGISTER sip:x SIP/2.0", BASE[:4] + [("CSeq", "zero REGISTER")]), MalformedHeader),
        (raw("REGISTER sip:x SIP/2.0", BASE[:4] + [("CSeq", "0 REGISTER")]), MalformedHeader),
        (raw("REGISTER sip:x SIP/2.0", BASE) .replace(b"Via:", b"Via"), MalformedHeader),
        (b"\xff\xfe REGISTER\r\n\r\n", MalformedHeader),
    ],
)
def test_parse_errors_are_typed(data, error):
    with pytest.raises(error):
        parse_message(data)
    assert issubclass(error, SipParseError)


def test_serializer_recomputes_content_length():
    msg = SipMessage("request", tuple(BASE) + (("Content-Length", "99"),), b"abc", method="BYE", request_uri="sip:b")
    assert b"Content-Length: 3\r\n" in serialize_message(msg)


def test_with_and_without_header():
    msg = request("BYE", "sip:b", BASE)
    assert msg.with_header("To", "<sip:z>").header("to") == "<sip:z>"
    assert msg.without_header("Via").header("Via") is None
    assert msg.with_header("X-New", "1").headers[-1] == ("X-New", "1")


def test_auth_params_round_trip_and_hex():
    ap = AuthParams.build("YangDH", step="request", username="alice", masked=b"\x01\xab")
    text = format_auth_params(ap)
    assert text == 'YangDH step="request", username="alice", masked="01ab"'
    back = parse_auth_params(text)
    assert back == ap
    assert back.get_bytes("masked") == b"\x01\xab"
    assert "username" in back and "nonce" not in back


@pytest.mark.parametrize(
    "text, error",
    [
        ('Digest a="1", a="2"', DuplicateKey),
        ('Digest nonce="0g"', BadHexPayload),
        ('Digest nonce="abc"', BadHexPayload),
        ('Digest nonce="AB"', BadHexPayload),
        ('Digest a=1', MalformedAuthParams),
        ('', MalformedAuthParams),
        ('Digest a="1" b="2"', MalformedAuthParams),
    ],
)
def test_auth_param_errors(text, error):
    with pytest.raises(error):
        parse_auth_params(text)


def test_auth_params_rejects_duplicate_keys_at_construction():
    with pytest.raises(DuplicateKey):
        AuthParams("X", (("a", "1"), ("a", "2")))


def test_corpus_is_canonical():
    files = sorted(CORPUS.glob("*.sip"))
    assert len(files) >= 20
    for f in files:
        data = f.read_bytes()
        assert serialize_message(parse_message(data)) == data, f.name


tokens = st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-.", min_size=1, max_size=12)
values = st.text(alphabet=st.characters(min_codepoint=0x21, max_codepoint=0x7E), min_size=1, max_size=30)


@st.composite
def messages(draw):
    headers = [("Call-ID", draw(tokens)), ("CSeq", f"{draw(st.integers(1, 2**31))} {draw(st.sampled_from(['INVITE', 'ACK']))}")]
    headers += draw(st.lists(st.tuples(tokens, values), max_size=5))
    body = draw(st.binary(max_size=64))
    if draw(st.booleans()):
        return request(draw(st.sampled_from(["REGISTER", "INVITE", "ACK", "BYE"])), "sip:" + draw(tokens), headers, body)
    return response(draw(st.integers(100, 699)), headers, body, reason=draw(tokens))


@given(messages())
@settings(max_examples=300, deadline=None)
def test_parse_serialize_round_trip(msg):
    wire = serialize_message(msg)
    parsed = parse_message(wire)
    assert serialize_message(parsed) == wire
    assert parsed.body == msg.body


@given(st.binary(max_size=300))
@settings(max_examples=500, deadline=None)
def test_parse_any_bytes_is_typed(data):
    try:
        assert isinstance(parse_message(data), SipMessage)
    except SipParseError:
        pass


@given(st.text(max_size=80))
@settings(max_examples=500, deadline=None)
def test_auth_params_any_text_is_typed(text):
    try:
        parse_auth_params(text)
    except ValueError:
        pass
