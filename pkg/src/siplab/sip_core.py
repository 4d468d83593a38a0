"""Parser and serializer for the small SIP subset the handshakes travel over.

Only REGISTER, INVITE, ACK and BYE requests are understood. Header folding
and compact header names are not supported. Unknown headers are carried
through untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

SIP_VERSION = "SIP/2.0"
METHODS = frozenset({"REGISTER", "INVITE", "ACK", "BYE"})

# Header names the handshakes and the proxy understand. Anything else is opaque.
KNOWN_HEADERS = (
    "Via",
    "From",
    "To",
    "Call-ID",
    "CSeq",
    "Contact",
    "Content-Length",
    "WWW-Authenticate",
    "Authorization",
)

# Auth-param keys whose values are lowercase hex octet strings.
HEX_KEYS = frozenset({"nonce", "masked", "auth", "response", "s"})

REASONS = {
    100: "Trying",
    180: "Ringing",
    200: "OK",
    302: "Moved Temporarily",
    400: "Bad Request",
    401: "Unauthorized",
    403: "Forbidden",
    404: "Not Found",
    481: "Call/Transaction Does Not Exist",
}

_TOKEN = re.compile(r"^[A-Za-z0-9.!%*_+`'~-]+$")
_HEX = re.compile(r"^(?:[0-9a-f]{2})*$")


class SipParseError(ValueError):
    """Base class for every error the parser raises."""


class MalformedStartLine(SipParseError):
    pass


class MalformedHeader(SipParseError):
    pass


class UnknownMethod(SipParseError):
    pass


class MissingMandatoryHeader(SipParseError):
    pass


class BodyLengthMismatch(SipParseError):
    pass


class AuthParamsError(ValueError):
    pass


class DuplicateKey(AuthParamsError):
    pass


class BadHexPayload(AuthParamsError):
    pass


class MalformedAuthParams(AuthParamsError):
    pass


@dataclass(frozen=True)
class SipMessage:
    """A request (``method`` set) or a response (``status_code`` set)."""

    kind: str
    headers: tuple[tuple[str, str], ...]
    body: bytes = b""
    method: str | None = None
    request_uri: str | None = None
    status_code: int | None = None
    reason: str | None = None

    @property
    def is_request(self) -> bool:
        return self.kind == "request"

    def header(self, name: str) -> str | None:
        """First value of ``name``, compared case-insensitively."""
        lower = name.lower()
        for key, value in self.headers:
            if key.lower() == lower:
                return value
        return None

    def header_all(self, name: str) -> list[str]:
        lower = name.lower()
        return [v for k, v in self.headers if k.lower() == lower]

    @property
    def call_id(self) -> str:
        return self.header("Call-ID") or ""

    @property
    def cseq(self) -> tuple[int, str]:
        number, method = (self.header("CSeq") or "").split()
        return int(number), method

    def with_header(self, name: str, value: str) -> SipMessage:
        """Copy with ``name`` replaced in place, or appended if absent."""
        lower = name.lower()
        headers = list(self.headers)
        for i, (key, _) in enumerate(headers):
            if key.lower() == lower:
                headers[i] = (key, value)
                break
        else:
            headers.append((name, value))
        return replace(self, headers=tuple(headers))

    def without_header(self, name: str) -> SipMessage:
        lower = name.lower()
        return replace(self, headers=tuple(h for h in self.headers if h[0].lower() != lower))


def request(method: str, uri: str, headers, body: bytes = b"") -> SipMessage:
    """Build a request, appending Content-Length when it is missing."""
    if method not in METHODS:
        raise UnknownMethod(method)
    msg = SipMessage("request", tuple(headers), body, method=method, request_uri=uri)
    return _with_length(msg)


def response(status: int, headers, body: bytes = b"", reason: str | None = None) -> SipMessage:
    reason = reason or REASONS.get(status, "Unknown")
    msg = SipMessage("response", tuple(headers), body, status_code=status, reason=reason)
    return _with_length(msg)


def _with_length(msg: SipMessage) -> SipMessage:
    return msg.with_header("Content-Length", str(len(msg.body)))


def parse_message(data: bytes) -> SipMessage:
    """Parse one complete message. Raises a :class:`SipParseError` subclass."""
    if not isinstance(data, (bytes, bytearray)):
        raise TypeError("parse_message expects bytes")
    data = bytes(data)
    head, sep, body = data.partition(b"\r\n\r\n")
    if not sep:
        raise MalformedStartLine("missing CRLFCRLF header terminator")
    try:
        text = head.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedHeader(f"header block is not UTF-8: {exc}") from None
    lines = text.split("\r\n")
    start = lines[0]
    if "\n" in start or "\r" in start:
        raise MalformedStartLine("bare line ending in start line")

    fields: dict = {}
    parts = start.split(" ", 2)
    if start.startswith(SIP_VERSION + " "):
        if len(parts) != 3 or not parts[1].isdigit() or len(parts[1]) != 3:
            raise MalformedStartLine(f"bad status line {start!r}")
        status = int(parts[1])
        if not 100 <= status <= 699:
            raise MalformedStartLine(f"status {status} out of range")
        fields.update(kind="response", status_code=status, reason=parts[2])
    else:
        if len(parts) != 3 or parts[2] != SIP_VERSION or not parts[1] or not parts[0]:
            raise MalformedStartLine(f"bad request line {start!r}")
        if not _TOKEN.match(parts[0]):
            raise MalformedStartLine(f"bad method token {parts[0]!r}")
        if parts[0] not in METHODS:
            raise UnknownMethod(parts[0])
        if any(c in parts[1] for c in " \t"):
            raise MalformedStartLine("whitespace in request URI")
        fields.update(kind="request", method=parts[0], request_uri=parts[1])

    headers = []
    for line in lines[1:]:
        name, colon, value = line.partition(":")
        if not colon or not _TOKEN.match(name):
            raise MalformedHeader(f"bad header line {line!r}")
        if "\r" in value or "\n" in value:
            raise MalformedHeader("bare line ending in header value")
        headers.append((name, value.strip(" \t")))
    msg = SipMessage(headers=tuple(headers), body=body, **fields)
    _check(msg)
    return msg


def _check(msg: SipMessage) -> None:
    if not msg.header("Call-ID"):
        raise MissingMandatoryHeader("Call-ID")
    cseq = msg.header("CSeq")
    if cseq is None:
        raise MissingMandatoryHeader("CSeq")
    cparts = cseq.split()
    if len(cparts) != 2 or not cparts[0].isdigit() or int(cparts[0]) < 1:
        raise MalformedHeader(f"bad CSeq {cseq!r}")
    if not _TOKEN.match(cparts[1]):
        raise MalformedHeader(f"bad CSeq method {cseq!r}")
    length = msg.header("Content-Length")
    if length is not None:
        if not length.isdigit():
            raise MalformedHeader(f"bad Content-Length {length!r}")
        if int(length) != len(msg.body):
            raise BodyLengthMismatch(f"Content-Length {length} but body has {len(msg.body)} bytes")


def serialize_message(msg: SipMessage) -> bytes:
    """Wire bytes for ``msg``; Content-Length is always recomputed."""
    if msg.is_request:
        start = f"{msg.method} {msg.request_uri} {SIP_VERSION}"
    else:
        start = f"{SIP_VERSION} {msg.status_code} {msg.reason}"
    lines = [start]
    seen_length = False
    for name, value in msg.headers:
        if name.lower() == "content-length":
            value = str(len(msg.body))
            seen_length = True
        lines.append(f"{name}: {value}")
    if not seen_length and msg.body:
        lines.append(f"Content-Length: {len(msg.body)}")
    return ("\r\n".join(lines) + "\r\n\r\n").encode("utf-8") + msg.body


def canonical(data: bytes) -> bytes:
    """Canonical form of a raw message: what serialize(parse(data)) yields."""
    return serialize_message(parse_message(data))


@dataclass(frozen=True)
class AuthParams:
    """``scheme_tag key="value", ...`` as carried in auth headers."""

    scheme_tag: str
    params: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        keys = [k for k, _ in self.params]
        if len(keys) != len(set(keys)):
            raise DuplicateKey(f"duplicate key in {keys}")

    def get(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.params:
            if k == key:
                return v
        return default

    def __getitem__(self, key: str) -> str:
        value = self.get(key)
        if value is None:
            raise KeyError(key)
        return value

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def get_bytes(self, key: str) -> bytes:
        return bytes.fromhex(self[key])

    def keys(self) -> list[str]:
        return [k for k, _ in self.params]

    @classmethod
    def build(cls, scheme_tag: str, **values) -> AuthParams:
        """Keyword constructor; ``bytes`` values are hex-encoded."""
        params = []
        for key, value in values.items():
            if isinstance(value, (bytes, bytearray)):
                value = bytes(value).hex()
            params.append((key, str(value)))
        return cls(scheme_tag, tuple(params))


_PARAM = re.compile(r'\s*([A-Za-z0-9_-]+)\s*=\s*"([^"\\]*)"\s*(?:,|$)')


def parse_auth_params(header_value: str) -> AuthParams:
    scheme, _, rest = header_value.strip().partition(" ")
    if not scheme or not _TOKEN.match(scheme):
        raise MalformedAuthParams(f"bad scheme tag in {header_value!r}")
    params: list[tuple[str, str]] = []
    pos = 0
    rest = rest.strip()
    while pos < len(rest):
        m = _PARAM.match(rest, pos)
        if not m:
            raise MalformedAuthParams(f"cannot parse params at {rest[pos:]!r}")
        key, value = m.group(1), m.group(2)
        if any(k == key for k, _ in params):
            raise DuplicateKey(key)
        if key in HEX_KEYS and not _HEX.match(value):
            raise BadHexPayload(f"{key}={value!r}")
        params.append((key, value))
        pos = m.end()
    return AuthParams(scheme, tuple(params))


def format_auth_params(ap: AuthParams) -> str:
    if not ap.params:
        return ap.scheme_tag
    return ap.scheme_tag + " " + ", ".join(f'{k}="{v}"' for k, v in ap.params)
