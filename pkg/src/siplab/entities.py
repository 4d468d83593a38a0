"""SIP roles on the simulated network: user agents, registrar, proxy, location service.

Every entity is a network endpoint whose handler parses the incoming bytes,
acts, and returns the messages it wants sent. The handshakes ride inside
Authorization / WWW-Authenticate headers.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass, field, replace

from .auth_schemes import (
    DEFAULT_KDF,
    Credential,
    CredentialStore,
    HandshakeState,
    PhaseError,
    SchemeMessage,
    ServerContext,
    Step,
    Verdict,
    get_scheme,
    message_from_params,
)
from .sim_net.network import HookMode, Network, Transcript
from .sip_core import (
    AuthParams,
    AuthParamsError,
    SipMessage,
    SipParseError,
    format_auth_params,
    parse_auth_params,
    parse_message,
    request,
    response,
    serialize_message,
)


class NotFound(LookupError):
    pass


class CalleeNotFound(LookupError):
    def __init__(self, aor, flow=None):
        super().__init__(aor)
        self.flow = flow


class AuthenticationFailed(RuntimeError):
    def __init__(self, reason, flow=None):
        super().__init__(reason)
        self.flow = flow


def aor_of(header_value: str) -> str:
    m = re.search(r"<([^>]*)>", header_value)
    return m.group(1) if m else header_value.split(";")[0].strip()


def user_of(aor: str) -> str:
    return aor.removeprefix("sip:").split("@")[0]


def host_of(uri: str) -> str:
    return uri.removeprefix("sip:").split("@")[-1].split(";")[0]


def _reply(msg: SipMessage, status: int, extra=()) -> SipMessage:
    copied = [(k, v) for k, v in msg.headers if k.lower() in ("via", "from", "to", "call-id", "cseq")]
    return response(status, copied + list(extra))


def _auth_params(msg: SipMessage, header: str) -> AuthParams | None:
    value = msg.header(header)
    return parse_auth_params(value) if value else None


class LocationService:
    def __init__(self):
        self._bindings: dict[str, str] = {}

    def bind(self, aor: str, contact: str) -> bool:
        replaced = aor in self._bindings
        self._bindings[aor] = contact
        return replaced

    def lookup(self, aor: str) -> str:
        try:
            return self._bindings[aor]
        except KeyError:
            raise NotFound(aor) from None


class Authenticator:
    """Server side of one scheme: sessions keyed by Call-ID."""

    def __init__(self, scheme_tag: str, ctx: ServerContext):
        self.scheme = get_scheme(scheme_tag)
        self.ctx = ctx
        self.sessions: dict[str, HandshakeState] = {}
        self.finished: list[tuple[str, HandshakeState]] = []

    def handle(self, msg: SipMessage) -> tuple[SchemeMessage, HandshakeState]:
        params = _auth_params(msg, "Authorization")
        sm = message_from_params(params)
        call_id = msg.call_id
        if params is not None and params.scheme_tag != self.scheme.tag:
            state = self.scheme.new_server(self.ctx)
            state.reject(PhaseError(f"scheme {params.scheme_tag} not offered"))
            return self.scheme.server_on_response(state, sm), state
        if sm.step is Step.REQUEST:
            state = self.scheme.new_server(self.ctx)
            state.method = msg.method
            self.sessions[call_id] = state
            reply = self.scheme.server_on_request(state, sm)
            if state.verdict is not Verdict.PENDING:
                self._close(call_id)
            return reply, state
        state = self.sessions.get(call_id)
        if state is None:
            # Digest keeps its nonces in the context, so it can verify statelessly.
            state = self.scheme.new_server(self.ctx)
            state.method = msg.method
            if self.scheme.tag != "Digest":
                state.reject(PhaseError("response without an open session"))
                self.finished.append((call_id, state))
                return self.scheme.server_on_response(state, sm), state
            self.sessions[call_id] = state
        reply = self.scheme.server_on_response(state, sm)
        self._close(call_id)
        return reply, state

    def _close(self, call_id):
        state = self.sessions.pop(call_id, None)
        if state is not None:
            self.finished.append((call_id, state))


def challenge_response(msg: SipMessage, reply: SchemeMessage) -> SipMessage:
    if reply.step is Step.CHALLENGE:
        return _reply(msg, 401, [("WWW-Authenticate", format_auth_params(reply.payload))])
    return _reply(msg, 200 if reply.payload.get("verdict") == Verdict.ACCEPTED.value else 403)


def _registration_body(cred: Credential) -> bytes:
    return f"username={cred.username}\r\nrealm={cred.realm}\r\npassword={cred.password.hex()}\r\n".encode()


def _parse_registration_body(body: bytes) -> Credential:
    fields = dict(line.split("=", 1) for line in body.decode().split("\r\n") if line)
    return Credential(fields["username"], bytes.fromhex(fields["password"]), fields["realm"])


class Registrar:
    """Stores credentials at registration and runs the handshake on REGISTER."""

    def __init__(self, endpoint_id: str, network: Network, location: LocationService, authenticator: Authenticator):
        self.id = endpoint_id
        self.network = network
        self.location = location
        self.authenticator = authenticator
        self.authenticated: set[str] = set()
        network.attach(endpoint_id, self.handle)

    @property
    def store(self) -> CredentialStore:
        return self.authenticator.ctx.store

    def handle(self, sender: str, data: bytes):
        try:
            msg = parse_message(data)
        except SipParseError:
            return []
        if not msg.is_request:
            return []
        if msg.method != "REGISTER":
            return [(sender, serialize_message(_reply(msg, 400)))]
        if msg.body:
            try:
                cred = _parse_registration_body(msg.body)
            except (KeyError, ValueError):
                return [(sender, serialize_message(_reply(msg, 400)))]
            self.store.register(cred)
            self.location.bind(aor_of(msg.header("To") or ""), aor_of(msg.header("Contact") or ""))
            return [(sender, serialize_message(_reply(msg, 200)))]
        try:
            sm, state = self.authenticator.handle(msg)
        except (AuthParamsError, KeyError, ValueError):
            return [(sender, serialize_message(_reply(msg, 400)))]
        if state.verdict is Verdict.ACCEPTED:
            self.authenticated.add(aor_of(msg.header("From") or ""))
        return [(sender, serialize_message(challenge_response(msg, sm)))]


@dataclass
class ClientCall:
    method: str
    target: str  # endpoint the request goes to
    uri: str
    to_aor: str
    cseq: int
    state: HandshakeState | None = None
    final_status: int | None = None


class UserAgent:
    """A UAC and UAS in one: starts handshakes and calls, answers INVITEs."""

    def __init__(self, aor: str, credential: Credential, network: Network, scheme_tag: str, group, rng,
                 kdf=DEFAULT_KDF, endpoint_id: str | None = None):
        self.aor = aor
        self.credential = credential
        self.id = endpoint_id or f"ua-{user_of(aor)}"
        self.contact = f"sip:{user_of(aor)}@{self.id}"
        self.network = network
        self.scheme = get_scheme(scheme_tag)
        self.group = group
        self.rng = rng
        self.kdf = kdf
        self.calls: dict[str, ClientCall] = {}
        self.answered: list[str] = []
        network.attach(self.id, self.handle)

    def _new_call_id(self) -> str:
        return f"{self.rng.randbytes(8).hex()}@{self.id}"

    def _headers(self, call: ClientCall, call_id: str, method: str):
        tag = call_id.split("@")[0][:8]
        return [
            ("Via", f"SIP/2.0/SIM {self.id};branch=z9hG4bK{call_id[:6]}{call.cseq}"),
            ("From", f"<{self.aor}>;tag={tag}"),
            ("To", f"<{call.to_aor}>"),
            ("Call-ID", call_id),
            ("CSeq", f"{call.cseq} {method}"),
            ("Contact", f"<{self.contact}>"),
        ]

    def _build(self, call: ClientCall, call_id: str, auth: AuthParams | None = None, method=None, body=b""):
        method = method or call.method
        headers = self._headers(call, call_id, method)
        if auth is not None and auth.params:
            headers.append(("Authorization", format_auth_params(auth)))
        return request(method, call.uri, headers, body)

    def register(self, registrar_id: str, realm: str) -> Verdict:
        call = ClientCall("REGISTER", registrar_id, f"sip:{realm}", self.aor, 1)
        call_id = self._new_call_id()
        self.calls[call_id] = call
        msg = self._build(call, call_id, body=_registration_body(self.credential))
        self.network.send(self.id, registrar_id, serialize_message(msg))
        return Verdict.ACCEPTED if call.final_status == 200 else Verdict.REJECTED

    def start(self, method: str, target: str, uri: str, to_aor: str, authenticate: bool = True) -> str:
        """Send the first request of a transaction and let the network run. Returns the Call-ID."""
        call = ClientCall(method, target, uri, to_aor, 1)
        call_id = self._new_call_id()
        self.calls[call_id] = call
        auth = None
        if authenticate:
            session_rng = random.Random(self.rng.getrandbits(64))
            call.state = self.scheme.new_client(self.credential, self.group, session_rng, kdf=self.kdf,
                                                method=method, uri=uri)
            auth = self.scheme.client_start(call.state).payload
        self.network.send(self.id, target, serialize_message(self._build(call, call_id, auth)))
        return call_id

    def authenticate(self, registrar_id: str, realm: str) -> str:
        return self.start("REGISTER", registrar_id, f"sip:{realm}", self.aor)

    def handle(self, sender: str, data: bytes):
        try:
            msg = parse_message(data)
        except SipParseError:
            return []
        if msg.is_request:
            return self._serve(sender, msg)
        call = self.calls.get(msg.call_id)
        if call is None:
            return []
        status = msg.status_code
        if status == 401 and call.state is not None:
            try:
                params = _auth_params(msg, "WWW-Authenticate")
            except AuthParamsError:
                call.state.reject("unparseable challenge")
                return []
            if params is None:
                return []
            out = self.scheme.client_on_challenge(call.state, message_from_params(params))
            if out is None:
                call.final_status = status
                return []
            call.cseq += 1
            return [(call.target, serialize_message(self._build(call, msg.call_id, out.payload)))]
        call.final_status = status
        if call.state is not None and call.state.phase == 2:
            self.scheme.client_on_verdict(call.state, message_from_params(None, status))
        if call.method == "INVITE" and 200 <= status < 300:
            return [(call.target, serialize_message(self._build(call, msg.call_id, method="ACK")))]
        return []

    def _serve(self, sender: str, msg: SipMessage):
        if msg.method == "INVITE":
            self.network.note(self.id, sender, "alert", msg.call_id)
            self.answered.append(msg.call_id)
            ok = _reply(msg, 200, [("Contact", f"<{self.contact}>")])
            return [(sender, serialize_message(ok))]
        return []


class ProxyServer:
    """Authenticates callers, asks the location service, and relays the INVITE transaction."""

    def __init__(self, endpoint_id: str, network: Network, location: LocationService, authenticator: Authenticator):
        self.id = endpoint_id
        self.network = network
        self.location = location
        self.authenticator = authenticator
        self.authenticated: set[str] = set()
        self.transactions: dict[str, dict] = {}
        network.attach(endpoint_id, self.handle)

    def handle(self, sender: str, data: bytes):
        try:
            msg = parse_message(data)
        except SipParseError:
            return []
        if msg.is_request:
            if msg.method == "INVITE":
                return self._invite(sender, msg)
            if msg.method == "ACK":
                tx = self.transactions.get(msg.call_id)
                if tx and tx["caller"] == sender:
                    return [(tx["callee"], serialize_message(self._forwarded(msg)))]
            return []
        tx = self.transactions.get(msg.call_id)
        if tx is None or msg.cseq != tx["cseq"] or sender != tx["callee"]:
            return []
        relayed = msg.without_header("Via")
        via = [v for k, v in msg.headers if k.lower() == "via"][1:]
        for v in reversed(via):
            relayed = _prepend(relayed, "Via", v)
        return [(tx["caller"], serialize_message(relayed))]

    def _forwarded(self, msg: SipMessage) -> SipMessage:
        return _prepend(msg.without_header("Authorization"), "Via", f"SIP/2.0/SIM {self.id};branch=z9hG4bKp{msg.cseq[0]}")

    def _invite(self, sender: str, msg: SipMessage):
        caller = aor_of(msg.header("From") or "")
        if caller not in self.authenticated:
            try:
                sm, state = self.authenticator.handle(msg)
            except (AuthParamsError, KeyError, ValueError):
                return [(sender, serialize_message(_reply(msg, 400)))]
            if sm.step is Step.CHALLENGE or state.verdict is not Verdict.ACCEPTED:
                return [(sender, serialize_message(challenge_response(msg, sm)))]
            self.authenticated.add(caller)
        callee = aor_of(msg.header("To") or "")
        self.network.note(self.id, "location", "lookup", msg.call_id)
        try:
            contact = self.location.lookup(callee)
        except NotFound:
            self.network.note("location", self.id, "not-found", msg.call_id)
            return [(sender, serialize_message(_reply(msg, 404)))]
        self.network.note("location", self.id, "result", msg.call_id)
        target = host_of(contact)
        self.transactions[msg.call_id] = {"caller": sender, "callee": target, "cseq": msg.cseq}
        return [(target, serialize_message(self._forwarded(msg)))]


def _prepend(msg: SipMessage, name: str, value: str) -> SipMessage:
    return replace(msg, headers=((name, value),) + msg.headers)


def redirect_stub(req: SipMessage, alternate: str = "sip:alternate@redirect.invalid") -> SipMessage | None:
    """300-class answer naming an alternate contact. ACKs get nothing."""
    if not req.is_request or req.method == "ACK":
        return None
    return _reply(req, 302, [("Contact", f"<{alternate}>")])


def register_ua(ua: UserAgent, registrar: Registrar) -> Verdict:
    """Registration phase: credential sent in the clear with the adversary switched off."""
    hook = ua.network.hook
    saved = hook.mode
    hook.mode = HookMode.OFF
    try:
        return ua.register(registrar.id, registrar.authenticator.ctx.realm)
    finally:
        hook.mode = saved


class FlowStep(str, enum.Enum):
    AUTH_REQUEST = "auth-request"
    CHALLENGE = "challenge"
    REJECTED = "rejected"
    INVITE = "invite"
    LOOKUP = "lookup"
    LOOKUP_RESULT = "lookup-result"
    NOT_FOUND = "not-found"
    INVITE_FORWARDED = "invite-forwarded"
    ALERT = "alert"
    OK = "ok"
    OK_FORWARDED = "ok-forwarded"
    ACK = "ack"
    ACK_FORWARDED = "ack-forwarded"


PROXY_FLOW = (
    FlowStep.INVITE,
    FlowStep.LOOKUP,
    FlowStep.LOOKUP_RESULT,
    FlowStep.INVITE_FORWARDED,
    FlowStep.ALERT,
    FlowStep.OK,
    FlowStep.OK_FORWARDED,
    FlowStep.ACK,
    FlowStep.ACK_FORWARDED,
)


@dataclass(frozen=True)
class FlowEvent:
    seq: int
    step: FlowStep
    sender: str
    receiver: str
    call_id: str
    message: SipMessage | None = None


@dataclass
class CallFlow:
    call_id: str
    events: list[FlowEvent] = field(default_factory=list)
    wire: Transcript = field(default_factory=Transcript)
    caller_state: HandshakeState | None = None

    @property
    def steps(self) -> list[FlowStep]:
        return [e.step for e in self.events]


def _classify(ev, msg: SipMessage, caller: str, proxy: str) -> FlowStep | None:
    to_proxy = ev.receiver == proxy
    if msg.is_request:
        if msg.method == "INVITE":
            return FlowStep.INVITE if to_proxy else FlowStep.INVITE_FORWARDED
        if msg.method == "ACK":
            return FlowStep.ACK if to_proxy else FlowStep.ACK_FORWARDED
        return None
    status = msg.status_code
    if status == 401:
        return FlowStep.CHALLENGE
    if status in (403, 400):
        return FlowStep.REJECTED
    if 200 <= status < 300:
        return FlowStep.OK if to_proxy else FlowStep.OK_FORWARDED
    return None


_LOCAL = {"lookup": FlowStep.LOOKUP, "result": FlowStep.LOOKUP_RESULT, "not-found": FlowStep.NOT_FOUND,
          "alert": FlowStep.ALERT}


def collect_flow(network: Network, call_id: str, caller: str, proxy: str, since: int = 0) -> CallFlow:
    wire = network.transcript(since).filter(call_id)
    events = []
    for ev, msg in wire.messages():
        step = _classify(ev, msg, caller, proxy)
        if step is not None:
            events.append(FlowEvent(ev.seq, step, ev.sender, ev.receiver, call_id, msg))
    for le in network.local_events:
        if le.seq > since and le.call_id == call_id and le.label in _LOCAL:
            events.append(FlowEvent(le.seq, _LOCAL[le.label], le.actor, le.peer, call_id))
    events.sort(key=lambda e: e.seq)
    for i in range(len(events) - 1):
        if events[i].step is FlowStep.INVITE and events[i + 1].step is FlowStep.CHALLENGE:
            events[i] = FlowEvent(events[i].seq, FlowStep.AUTH_REQUEST, *(
                getattr(events[i], f) for f in ("sender", "receiver", "call_id", "message")))
    return CallFlow(call_id, events, wire)


def proxy_invite_flow(caller: UserAgent, callee: UserAgent | str, proxy: ProxyServer, location: LocationService | None = None,
                      auth_scheme: str | None = None) -> CallFlow:
    """Run one INVITE transaction through the proxy and return its event sequence.

    A caller the proxy has not authenticated goes through the scheme's
    challenge first; the INVITE is forwarded only after an accepted verdict.
    """
    if auth_scheme is not None and auth_scheme != proxy.authenticator.scheme.tag:
        raise ValueError(f"proxy runs {proxy.authenticator.scheme.tag}, not {auth_scheme}")
    if location is not None and location is not proxy.location:
        raise ValueError("proxy is bound to a different location service")
    callee_aor = callee if isinstance(callee, str) else callee.aor
    since = caller.network.seq
    needs_auth = caller.aor not in proxy.authenticated
    call_id = caller.start("INVITE", proxy.id, callee_aor, callee_aor, authenticate=needs_auth)
    flow = collect_flow(caller.network, call_id, caller.id, proxy.id, since)
    flow.caller_state = caller.calls[call_id].state
    steps = flow.steps
    if FlowStep.NOT_FOUND in steps:
        raise CalleeNotFound(callee_aor, flow)
    if FlowStep.REJECTED in steps or (needs_auth and flow.caller_state.verdict is Verdict.REJECTED):
        raise AuthenticationFailed(flow.caller_state.error if flow.caller_state else "rejected", flow)
    return flow
