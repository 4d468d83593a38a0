"""Regenerate corpus/*.sip and data/dictionary.txt from seeded runs."""

from __future__ import annotations

from pathlib import Path

from siplab.entities import proxy_invite_flow, redirect_stub
from siplab.sim_net import Testbed, default_dictionary
from siplab.sip_core import parse_message, request, serialize_message

ROOT = Path(__file__).resolve().parent.parent


def _label(msg) -> str:
    if msg.is_request:
        return msg.method.lower()
    return str(msg.status_code)


def main():
    corpus = ROOT / "corpus"
    corpus.mkdir(exist_ok=True)
    for old in corpus.glob("*.sip"):
        old.unlink()
    n = 0

    def save(name, data: bytes):
        nonlocal n
        n += 1
        (corpus / f"{n:02d}-{name}.sip").write_bytes(data)

    for scheme in ("Digest", "YangDH", "DurlanikECDH", "NAKE"):
        bed = Testbed(scheme, "TOY", 11)
        alice = bed.add_user()
        bob = bed.add_user("bob", "bobspassword")
        if scheme == "Digest":
            for ev in bed.network.transcript():
                save(f"registration-{_label(ev.message())}", ev.data)
        session = bed.handshake(alice)
        for ev in session.transcript:
            save(f"{scheme.lower()}-{_label(ev.message())}", ev.data)
        if scheme == "YangDH":
            since = bed.network.seq
            proxy_invite_flow(alice, bob, bed.proxy)
            flow = bed.network.transcript(since)
            for ev in flow:
                save(f"invite-flow-{_label(ev.message())}", ev.data)
            invite = next(m for _, m in flow.messages() if m.is_request and m.method == "INVITE")
            save("redirect-302", serialize_message(redirect_stub(invite)))
    bye = request("BYE", "sip:bob@ua-bob", [
        ("Via", "SIP/2.0/SIM ua-alice;branch=z9hG4bKbye1"),
        ("From", "<sip:alice@siplab.test>;tag=1a2b"),
        ("To", "<sip:bob@siplab.test>;tag=9f8e"),
        ("Call-ID", "bye-example@ua-alice"),
        ("CSeq", "3 BYE"),
        ("X-Unknown-Header", "carried through untouched"),
    ])
    save("bye-with-unknown-header", serialize_message(bye))
    print(f"wrote {n} corpus messages")

    data = ROOT / "data"
    data.mkdir(exist_ok=True)
    (data / "dictionary.txt").write_text("\n".join(default_dictionary()) + "\n", encoding="utf-8")
    print("wrote data/dictionary.txt")


if __name__ == "__main__":
    main()
