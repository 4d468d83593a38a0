"""What an eavesdropper can pull out of a transcript, and the outcome record every attack returns."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..sim_net.network import Transcript
from ..sim_net.scenario import ScenarioError
from ..sip_core import AuthParams, AuthParamsError, SipMessage, parse_auth_params


class IncompleteTranscript(ScenarioError):
    """The transcript does not hold the complete handshake an attack needs."""


@dataclass(frozen=True)
class HandshakeRecord:
    """One handshake as seen on the wire: auth payloads plus the raw client messages."""

    call_id: str
    scheme: str
    client: str
    server: str
    method: str
    uri: str
    request: AuthParams | None
    challenge: AuthParams
    response: AuthParams
    final_status: int | None
    client_messages: tuple[bytes, ...]

    @property
    def accepted(self) -> bool:
        return self.final_status is not None and 200 <= self.final_status < 300


def _params(msg: SipMessage, header: str) -> AuthParams | None:
    value = msg.header(header)
    if not value:
        return None
    try:
        return parse_auth_params(value)
    except AuthParamsError:
        return None


def extract_handshake(transcript: Transcript, call_id: str | None = None) -> HandshakeRecord:
    """Find REQUEST, CHALLENGE, RESPONSE and the verdict of one handshake.

    Picks the first Call-ID that carries a challenge unless ``call_id`` is given.
    """
    msgs = transcript.messages()
    if not msgs:
        raise IncompleteTranscript("empty transcript")
    if call_id is None:
        for _, msg in msgs:
            if not msg.is_request and msg.status_code == 401 and msg.header("WWW-Authenticate"):
                call_id = msg.call_id
                break
        else:
            raise IncompleteTranscript("no challenge in transcript")
    call = [(ev, m) for ev, m in msgs if m.call_id == call_id]
    first = challenge = second = final = None
    for ev, msg in call:
        if msg.is_request and first is None:
            first = (ev, msg)
        elif not msg.is_request and msg.status_code == 401 and challenge is None:
            challenge = (ev, msg)
        elif msg.is_request and challenge is not None and second is None:
            second = (ev, msg)
        elif not msg.is_request and second is not None and final is None:
            final = (ev, msg)
    if first is None or challenge is None or second is None:
        raise IncompleteTranscript(f"call {call_id} lacks a complete request/challenge/response exchange")
    chal = _params(challenge[1], "WWW-Authenticate")
    resp = _params(second[1], "Authorization")
    if chal is None or resp is None:
        raise IncompleteTranscript(f"call {call_id} carries no auth payloads")
    return HandshakeRecord(
        call_id=call_id,
        scheme=chal.scheme_tag,
        client=first[0].sender,
        server=first[0].receiver,
        method=second[1].method,
        uri=second[1].request_uri,
        request=_params(first[1], "Authorization"),
        challenge=chal,
        response=resp,
        final_status=final[1].status_code if final else None,
        client_messages=(first[0].data, second[0].data),
    )


@dataclass
class AttackOutcome:
    """Result of one attack run.

    ``success`` is always computed from ``evidence`` by the attack itself;
    the rule is stated in ``rule``.
    """

    attack: str
    scheme: str
    success: bool
    evidence: dict = field(default_factory=dict)
    notes: str = ""
    applicable: bool = True
    rule: str = ""
    control: str | None = None  # label of the positive-control configuration, if this is one
    profile: str | None = None
    transcripts: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "attack": self.attack,
            "scheme": self.scheme,
            "profile": self.profile,
            "applicable": self.applicable,
            "success": self.success,
            "rule": self.rule,
            "evidence": {k: _jsonable(v) for k, v in self.evidence.items()},
            "control": self.control,
            "notes": self.notes,
            "transcripts": list(self.transcripts),
        }


def _jsonable(v):
    if isinstance(v, bytes):
        return v.hex()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def not_applicable(attack: str, scheme: str, reason: str, profile=None) -> AttackOutcome:
    return AttackOutcome(attack, scheme, False, {"reason": reason}, notes=reason, applicable=False,
                         rule="not applicable", profile=profile)
