import json

import pytest

from siplab.sim_net import (
    AdversaryHook,
    ConfigError,
    Disposition,
    HookMode,
    Network,
    Testbed,
    Transcript,
    UnknownEndpoint,
    default_dictionary,
    load_config,
    read_dictionary,
    run_scenario,
    validate_config,
)


def echo_pair(hook=None):
    net = Network(hook)
    got = []
    net.attach("a", lambda s, d: got.append(("a", d)) or [])
    net.attach("b", lambda s, d: got.append(("b", d)) or ([("a", b"re:" + d)] if not d.startswith(b"re:") else []))
    return net, got


def test_delivery_and_reply_order():
    net, got = echo_pair()
    net.send("a", "b", b"hello")
    assert got == [("b", b"hello"), ("a", b"re:hello")]
    assert [e.seq for e in net.events] == [1, 2]
    assert all(e.disposition is Disposition.DELIVERED for e in net.events)


def test_passive_hook_sees_but_does_not_touch():
    hook = AdversaryHook(HookMode.PASSIVE, mutate=lambda d: None)
    net, got = echo_pair(hook)
    net.send("a", "b", b"x")
    assert hook.seen == [b"x", b"re:x"]
    assert len(got) == 2


def test_drop_all_conserves_events():
    net, got = echo_pair(AdversaryHook.drop_all())
    net.send("a", "b", b"x")
    assert got == []
    assert [e.disposition for e in net.events] == [Disposition.DROPPED]
    assert net.events[0].data == b"x"


def test_modification_records_both_versions():
    net, got = echo_pair(AdversaryHook(HookMode.ACTIVE, predicate=lambda s, r, d: r == "b", mutate=lambda d: d.upper()))
    net.send("a", "b", b"x")
    first = net.events[0]
    assert first.disposition is Disposition.MODIFIED and first.data == b"X" and first.sent == b"x"
    assert got[0] == ("b", b"X")


def test_injection_bypasses_hook():
    net, got = echo_pair(AdversaryHook.drop_all())
    net.inject("a", "b", b"forged")
    assert net.events[0].disposition is Disposition.INJECTED
    assert got[0] == ("b", b"forged")


def test_unknown_endpoint():
    net, _ = echo_pair()
    with pytest.raises(UnknownEndpoint):
        net.send("a", "nowhere", b"x")
    with pytest.raises(UnknownEndpoint):
        net.send("ghost", "a", b"x")


def test_transcript_text_round_trip(tmp_path):
    bed = Testbed("NAKE", "TOY", 1)
    ua = bed.add_user()
    bed.handshake(ua)
    t = bed.network.transcript()
    path = t.export(tmp_path / "t.txt")
    back = Transcript.from_text(path.read_text())
    assert [(e.seq, e.sender, e.receiver, e.data, e.disposition) for e in back] == \
           [(e.seq, e.sender, e.receiver, e.data, e.disposition) for e in t]
    assert Transcript.from_text("").events == ()


def test_honest_yang_handshake_is_four_messages():
    bed = Testbed("YangDH", "STD", 0)
    session = bed.handshake(bed.add_user())
    assert session.accepted and session.client.sk == session.server.sk
    assert len(session.transcript) == 4
    statuses = [m.status_code for _, m in session.transcript.messages() if not m.is_request]
    assert statuses == [401, 200]


def test_same_seed_same_wire():
    def wire(seed):
        bed = Testbed("DurlanikECDH", "STD", seed)
        return bed.handshake(bed.add_user()).transcript.to_text()

    assert wire(11) == wire(11)
    assert wire(11) != wire(12)


@pytest.mark.parametrize("raw, path", [
    ({"scheme": "Kerberos"}, "scheme"),
    ({"scheme": "NAKE", "profile": "HUGE"}, "profile"),
    ({"scheme": "NAKE", "seed": -1}, "seed"),
    ({"scheme": "NAKE", "seed": 2**64}, "seed"),
    ({"scheme": "NAKE", "trials": 0}, "trials"),
    ({"scheme": "NAKE", "flow": "subscribe"}, "flow"),
    ({"scheme": "NAKE", "colour": "red"}, "colour"),
    ({"scheme": "NAKE", "adversary": {"mode": "loud"}}, "adversary.mode"),
    ({"scheme": "NAKE", "adversary": {"mode": "passive", "action": "drop-all"}}, "adversary.action"),
    ({"scheme": "NAKE", "adversary": {"mode": "passive", "attacks": ["replay", "teleport"]}}, "adversary.attacks[1]"),
    ({"scheme": "NAKE", "profile": "STD", "adversary": {"mode": "passive", "oracle": True}}, "adversary.oracle"),
])
def test_config_errors_name_the_field(raw, path):
    with pytest.raises(ConfigError) as err:
        validate_config(raw)
    assert err.value.path == path


def test_config_defaults_and_label():
    cfg = validate_config({"scheme": "YangDH"})
    assert (cfg.profile, cfg.seed, cfg.trials, cfg.flow) == ("TOY", 0, 1, "register")
    assert cfg.label == "YangDH-TOY-0"
    assert validate_config({"scheme": "YangDH", "name": "x"}).label == "x"


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"scheme": "NAKE", "seed": 4}))
    assert load_config(good).seed == 4


def test_dictionary_helpers(tmp_path):
    words = default_dictionary(50)
    assert len(words) == 50 and words == sorted(words) and "sunflower42" in words
    assert words == default_dictionary(50)
    p = tmp_path / "d.txt"
    p.write_text("a\nb\na\n\n")
    assert read_dictionary(p) == ["a", "b"]
    p.write_bytes(b"\xff\xfe\x00")
    with pytest.raises(ConfigError):
        read_dictionary(p)


def test_run_scenario_deterministic():
    cfg = validate_config({"scheme": "NAKE", "seed": 9, "adversary": {"mode": "passive", "attacks": ["replay"]}})
    t1, o1 = run_scenario(cfg)
    t2, o2 = run_scenario(cfg)
    assert t1.to_text() == t2.to_text()
    assert json.dumps(o1, sort_keys=True) == json.dumps(o2, sort_keys=True)
    assert o1["handshake"]["keys_agree"] is True


@pytest.mark.parametrize("scheme", ["Digest", "YangDH", "DurlanikECDH", "NAKE"])
def test_tampered_response_is_rejected(scheme):
    cfg = validate_config({"scheme": scheme, "profile": "STD", "adversary": {"mode": "active", "action": "tamper-response"}})
    transcript, outcomes = run_scenario(cfg)
    assert outcomes["handshake"]["server"] == "rejected" or outcomes["handshake"]["client"] == "rejected"
    assert any(e.disposition.value == "modified" for e in transcript)
