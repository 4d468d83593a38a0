"""The attacks. Each one sees the wire (a Transcript, or its own endpoint on a live
network) plus whatever CK queries it is handed explicitly; none reads handshake state.
"""

from __future__ import annotations

import hmac
import random
from collections import Counter

from ..auth_schemes import DEFAULT_KDF, Credential, CredentialStore, Kdf, ServerContext, Verdict, get_scheme
from ..auth_schemes.digest import compute_response
from ..auth_schemes.nake import TAG as NAKE, server_authenticator
from ..crypto_group import NoSolution, NotAGroupElement, hash_f, power, unmask
from ..sim_net.network import Network, Transcript
from ..sip_core import (
    AuthParams,
    SipParseError,
    format_auth_params,
    parse_auth_params,
    parse_message,
    serialize_message,
)
from .record import AttackOutcome, HandshakeRecord, IncompleteTranscript, extract_handshake, not_applicable

REPLAY = "replay"
OFFLINE = "offline-guessing"
SPOOF = "server-spoofing"
DENNING_SACCO = "denning-sacco"
KNOWN_KEY = "known-key"
FORWARD_SECRECY = "forward-secrecy"

NO_KEY = "the scheme derives no session key"


def _pw(candidate) -> bytes:
    return candidate if isinstance(candidate, bytes) else candidate.encode("utf-8")


def _host(uri: str) -> str:
    return uri.removeprefix("sip:").split("@")[-1].split(";")[0]


def _record(transcript, call_id=None) -> HandshakeRecord:
    if isinstance(transcript, HandshakeRecord):
        return transcript
    return extract_handshake(transcript, call_id)


def _try_unmask(group, masked: bytes, key: bytes):
    try:
        return unmask(group, masked, key)
    except NotAGroupElement:
        return None


def candidate_publics(record: HandshakeRecord, group, password: bytes):
    """Unmask both public elements under a guessed password: (k1', k2') or (alpha', beta')."""
    key = hash_f([password])
    if record.request is None:
        raise IncompleteTranscript("no masked request in transcript")
    return (
        _try_unmask(group, record.request.get_bytes("masked"), key),
        _try_unmask(group, record.challenge.get_bytes("masked"), key),
    )


def server_auth_matches(record: HandshakeRecord, group, password: bytes, p1, p2, shared) -> bool:
    """Recompute the challenge authenticator for (password, publics, shared element)."""
    ch = record.challenge
    if record.scheme == NAKE:
        expected = server_authenticator(group, password, ch["ps"], ch.get_bytes("s"), p1, p2, record.request["pc"], shared)
    else:
        expected = hash_f([group.encode(p1), group.encode(shared)])
    return hmac.compare_digest(expected, ch.get_bytes("auth"))


def _oracle_shared(group, p1, p2, oracle):
    """k = k2^dlog(k1) (or K = dlog(alpha) * beta). None when the oracle finds nothing."""
    try:
        return power(group, p2, oracle(p1))
    except NoSolution:
        return None


def offline_guess(transcript, dictionary, group=None, dlp_oracle=None, *, partition: bool = False,
                  call_id: str | None = None) -> AttackOutcome:
    """Dictionary attack on one recorded handshake.

    A candidate is eliminated only when the attacker can recompute a value
    on the wire and it differs. Without a discrete-log oracle the masked DH
    schemes give nothing to recompute, so every candidate survives. With
    ``partition`` a failed unmask (bytes that are not a group element) also
    eliminates a candidate; that is a stronger attacker than the default one.

    success iff exactly one candidate is consistent.
    """
    record = _record(transcript, call_id)
    words = list(dict.fromkeys(dictionary))
    consistent = []
    decodable = 0
    oracle_calls_before = getattr(dlp_oracle, "calls", 0)
    if record.scheme == "Digest":
        resp = record.response
        nonce = resp.get_bytes("nonce")
        for word in words:
            digest = compute_response(resp["username"], resp["realm"], _pw(word), nonce, record.method, resp["uri"])
            decodable += 1
            if hmac.compare_digest(digest, resp.get_bytes("response")):
                consistent.append(word)
        checkable = True
    else:
        if group is None:
            raise ValueError(f"{record.scheme} needs its group")
        checkable = dlp_oracle is not None
        for word in words:
            pw = _pw(word)
            p1, p2 = candidate_publics(record, group, pw)
            decoded = p1 is not None and p2 is not None
            decodable += decoded
            if checkable:
                shared = _oracle_shared(group, p1, p2, dlp_oracle) if decoded else None
                ok = shared is not None and server_auth_matches(record, group, pw, p1, p2, shared)
            else:
                # Checking the authenticator needs k, which needs a discrete log.
                ok = decoded or not partition
            if ok:
                consistent.append(word)
    evidence = {
        "dictionary_size": len(words),
        "consistent": len(consistent),
        "decodable": decodable,
        "oracle": dlp_oracle is not None,
        "oracle_calls": getattr(dlp_oracle, "calls", 0) - oracle_calls_before,
        "partition": partition,
        "recovered": consistent[0] if len(consistent) == 1 else None,
    }
    if record.scheme == "Digest":
        notes = "response digest recomputed per candidate"
    elif checkable:
        notes = "authenticator recomputed per candidate using discrete logs from the oracle"
    else:
        notes = "no candidate can be checked against an authenticator without k"
    return AttackOutcome(OFFLINE, record.scheme, len(consistent) == 1, evidence, notes,
                         rule="success iff consistent == 1")


class _Listener:
    """Attacker-owned endpoint that records what it is sent."""

    def __init__(self, network: Network, base: str):
        name, n = base, 1
        while name in network:
            n += 1
            name = f"{base}{n}"
        self.id = name
        self.network = network
        self.inbox: list[bytes] = []
        network.attach(name, self._handle)

    def _handle(self, sender, data):
        self.inbox.append(data)
        return []

    def close(self):
        self.network.detach(self.id)


def _final_status(inbox, call_id: str, cseq: int) -> int | None:
    status = None
    for data in inbox:
        try:
            msg = parse_message(data)
        except SipParseError:
            continue
        if not msg.is_request and msg.call_id == call_id and msg.cseq[0] == cseq and msg.status_code != 401:
            status = msg.status_code
    return status


def replay_attack(transcript, network: Network, trials: int = 1, *, call_id: str | None = None,
                  attacker: str = "mallory") -> AttackOutcome:
    """Re-inject the recorded client messages; each trial starts a fresh server session.

    success iff the server answers 2xx to the replayed response in any trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    record = _record(transcript, call_id)
    if not record.accepted:
        raise IncompleteTranscript("replay needs a transcript of an accepted handshake")
    first, second = record.client_messages
    second_cseq = parse_message(second).cseq[0]
    listener = _Listener(network, attacker)
    statuses = Counter()
    accepted = 0
    try:
        for _ in range(trials):
            listener.inbox.clear()
            network.inject(listener.id, record.server, first)
            network.inject(listener.id, record.server, second)
            status = _final_status(listener.inbox, record.call_id, second_cseq)
            statuses[str(status)] += 1
            accepted += status is not None and 200 <= status < 300
    finally:
        listener.close()
    evidence = {"trials": trials, "accepted": accepted, "statuses": dict(sorted(statuses.items()))}
    return AttackOutcome(REPLAY, record.scheme, accepted > 0, evidence,
                         f"recorded client messages re-injected {trials} time(s)",
                         rule="success iff accepted > 0")


class RogueServer:
    """An endpoint posing as the registrar.

    Without a password it forges challenges from random bytes, which is the
    best it can do. Given the password (control run) it runs the real server
    code under the stolen credential.
    """

    def __init__(self, network: Network, scheme_tag: str, group, rng, realm: str, identity: str = "registrar",
                 credential: Credential | None = None, endpoint_id: str = "rogue"):
        from ..entities import Authenticator

        self.scheme = get_scheme(scheme_tag)
        self.group = group
        self.rng = rng
        self.realm = realm
        self.identity = identity
        self.responses_seen = 0
        self.authenticator = None
        if credential is not None:
            store = CredentialStore()
            store.register(credential)
            self.authenticator = Authenticator(scheme_tag, ServerContext(store, realm, identity, group, rng))
        name, n = endpoint_id, 1
        while name in network:
            n += 1
            name = f"{endpoint_id}{n}"
        self.id = name
        self.network = network
        network.attach(name, self.handle)

    def forged_challenge(self) -> AuthParams:
        tag = self.scheme.tag
        if tag == "Digest":
            return AuthParams.build(tag, step="challenge", realm=self.realm, nonce=self.rng.randbytes(16))
        masked = self.rng.randbytes(self.group.width)
        auth = self.rng.randbytes(32)
        if tag == NAKE:
            return AuthParams.build(tag, step="challenge", ps=self.identity, s=self.rng.randbytes(16), masked=masked,
                                    auth=auth)
        return AuthParams.build(tag, step="challenge", realm=self.realm, masked=masked, auth=auth)

    def handle(self, sender, data):
        from ..entities import _reply, challenge_response

        try:
            msg = parse_message(data)
        except SipParseError:
            return []
        if not msg.is_request:
            return []
        auth = msg.header("Authorization")
        try:
            step = parse_auth_params(auth).get("step") if auth else None
        except ValueError:
            return []
        if step == "response":
            self.responses_seen += 1
        if self.authenticator is not None:
            sm, _ = self.authenticator.handle(msg)
            return [(sender, serialize_message(challenge_response(msg, sm)))]
        if step == "response":
            return [(sender, serialize_message(_reply(msg, 200)))]
        www = format_auth_params(self.forged_challenge())
        return [(sender, serialize_message(_reply(msg, 401, [("WWW-Authenticate", www)])))]

    def close(self):
        self.network.detach(self.id)


def server_spoof(network: Network, client, trials: int = 1, rng=None, *, password: bytes | str | None = None,
                 realm: str | None = None) -> AttackOutcome:
    """Point ``client`` (a UserAgent) at a rogue server ``trials`` times.

    success iff the client reaches accepted in any trial. The client's
    verdict is read by this harness function, not by the rogue server.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng or random.Random(0)
    realm = realm or client.credential.realm
    cred = None
    if password is not None:
        cred = Credential(client.credential.username, password, realm)
    rogue = RogueServer(network, client.scheme.tag, client.group, rng, realm, credential=cred)
    accepted = 0
    errors = Counter()
    try:
        for _ in range(trials):
            call_id = client.authenticate(rogue.id, realm)
            state = client.calls[call_id].state
            if state.verdict is Verdict.ACCEPTED:
                accepted += 1
            else:
                errors[(state.error or "pending").split(":")[0]] += 1
    finally:
        rogue.close()
    evidence = {
        "trials": trials,
        "accepted": accepted,
        "responses_sent": rogue.responses_seen,
        "client_errors": dict(sorted(errors.items())),
        "attacker_has_password": password is not None,
    }
    if client.scheme.tag == "Digest":
        notes = "the client never authenticates the server and accepts the rogue's 200"
    elif password is None:
        notes = "challenges forged from random mask and authenticator bytes"
    else:
        notes = "rogue runs the genuine server steps with the stolen password"
    return AttackOutcome(SPOOF, client.scheme.tag, accepted > 0, evidence, notes, rule="success iff accepted > 0",
                         control="password-equipped rogue" if password is not None else None)


class UnknownSession(KeyError):
    pass


class CKOracle:
    """The three CK leak channels on a testbed: session-state reveal, session-key query, corruption."""

    def __init__(self, testbed):
        self.testbed = testbed
        self.log: list[tuple[str, str]] = []

    def _state(self, call_id: str, role: str):
        session = self.testbed.sessions.get(call_id)
        if session is None:
            raise UnknownSession(call_id)
        state = session.client if role == "client" else session.server
        if state is None:
            raise UnknownSession(f"{call_id} has no {role} side")
        return state

    def session_state(self, call_id: str, role: str = "client"):
        """The session's ephemeral scalar, or ERASED once the session completed."""
        self.log.append(("session_state", call_id))
        return self._state(call_id, role).ephemeral

    def session_key(self, call_id: str, role: str = "client") -> bytes | None:
        self.log.append(("session_key", call_id))
        return self._state(call_id, role).sk

    def corrupt(self, username: str) -> bytes:
        """Long-term secret of a party, as the registrar stores it."""
        self.log.append(("corrupt", username))
        return self.testbed.store.get(username).password


def ck_queries(testbed, call_id: str) -> dict:
    ck = CKOracle(testbed)
    session = testbed.sessions.get(call_id)
    if session is None:
        raise UnknownSession(call_id)
    return {
        "session_state": ck.session_state(call_id),
        "session_key": ck.session_key(call_id),
        "party_secrets": ck.corrupt(session.client.credential.username),
    }


def _impersonate(record: HandshakeRecord, network: Network, group, password: bytes | None, kdf: Kdf, rng) -> tuple[bool, str]:
    """Try to get a fresh session accepted, with the recovered password or by replay."""
    if password is None:
        outcome = replay_attack(record, network, 1)
        return outcome.success, "replay of recorded client messages"
    from ..entities import UserAgent, aor_of

    username = record.response.get("username") or record.request["pc"]
    realm = record.response.get("realm") or _host(record.uri)
    aor = aor_of(parse_message(record.client_messages[0]).header("From") or f"sip:{username}@{realm}")
    name, n = "mallory-ua", 1
    while name in network:
        n += 1
        name = f"mallory-ua{n}"
    ua = UserAgent(aor, Credential(username, password, realm), network, record.scheme, group, rng, kdf=kdf,
                   endpoint_id=name)
    try:
        call_id = ua.authenticate(record.server, realm)
        status = ua.calls[call_id].final_status
    finally:
        network.detach(name)
    return status is not None and 200 <= status < 300, "fresh session with the recovered password"


def denning_sacco_attack(old_session_key: bytes | None, transcript, *, group, dictionary, kdf: Kdf = DEFAULT_KDF,
                         network: Network | None = None, dlp_oracle=None, rng=None,
                         call_id: str | None = None) -> AttackOutcome:
    """Old session key plus its transcript: (a) dictionary search checked through
    the public KDF, (b) impersonation in a new session.

    success iff (a) leaves exactly one candidate or (b) gets accepted.
    """
    record = _record(transcript, call_id)
    if not get_scheme(record.scheme).derives_key or old_session_key is None:
        return not_applicable(DENNING_SACCO, record.scheme, NO_KEY)
    words = list(dict.fromkeys(dictionary))
    checkable = dlp_oracle is not None or not kdf.needs_shared
    consistent = []
    for word in words:
        pw = _pw(word)
        if not checkable:
            # sk binds k, and k needs a discrete log: nothing to compare against.
            consistent.append(word)
            continue
        p1, p2 = candidate_publics(record, group, pw)
        if p1 is None or p2 is None:
            continue
        shared = b""
        if kdf.needs_shared:
            element = _oracle_shared(group, p1, p2, dlp_oracle)
            if element is None:
                continue
            shared = group.encode(element)
        if hmac.compare_digest(kdf.derive(pw, (group.encode(p1), group.encode(p2)), shared), old_session_key):
            consistent.append(word)
    recovered = consistent[0] if len(consistent) == 1 else None
    impersonated, strategy = False, "no live network"
    if network is not None:
        impersonated, strategy = _impersonate(record, network, group, _pw(recovered) if recovered else None, kdf,
                                              rng or random.Random(0))
    evidence = {
        "dictionary_size": len(words),
        "consistent": len(consistent),
        "key_checkable": checkable,
        "oracle": dlp_oracle is not None,
        "kdf": kdf.name,
        "recovered": recovered,
        "impersonated": impersonated,
        "impersonation": strategy,
    }
    return AttackOutcome(DENNING_SACCO, record.scheme, recovered is not None or impersonated, evidence,
                         "old key checked through the public KDF, then a new session attempted",
                         rule="success iff consistent == 1 or impersonated")


def known_key_attack(old_session_key, transcript, **kwargs) -> AttackOutcome:
    """The impersonation half of the Denning-Sacco probe. success iff impersonated."""
    outcome = denning_sacco_attack(old_session_key, transcript, **kwargs)
    outcome.attack = KNOWN_KEY
    if outcome.applicable:
        outcome.success = bool(outcome.evidence["impersonated"])
        outcome.rule = "success iff impersonated"
        outcome.notes = "a new session attempted with what the old key yields"
    return outcome


def forward_secrecy_check(transcript, password, *, group, kdf: Kdf = DEFAULT_KDF, dlp_oracle=None,
                          session_key: bytes | None = None, call_id: str | None = None) -> AttackOutcome:
    """Password disclosed after the session: recover that session's key.

    Without an oracle the attacker tries every element it can form from the
    two unmasked publics; with one it computes k from a discrete log. A
    candidate counts only if it reproduces the challenge authenticator.

    success iff a key is recovered and (when ``session_key`` is given) equals it.
    """
    record = _record(transcript, call_id)
    if not get_scheme(record.scheme).derives_key:
        return not_applicable(FORWARD_SECRECY, record.scheme, NO_KEY)
    pw = _pw(password)
    p1, p2 = candidate_publics(record, group, pw)
    if p1 is None or p2 is None:
        return AttackOutcome(FORWARD_SECRECY, record.scheme, False, {"unmasked": False},
                             "disclosed password does not unmask the transcript", rule="success iff key recovered")
    if dlp_oracle is not None:
        shared = _oracle_shared(group, p1, p2, dlp_oracle)
        candidates = [("k2^dlog(k1)", shared)] if shared is not None else []
    else:
        candidates = [
            ("k1", p1),
            ("k2", p2),
            ("k1*k2", group.op(p1, p2)),
            ("k1/k2", group.op(p1, group.inverse(p2))),
            ("k2/k1", group.op(p2, group.inverse(p1))),
            ("generator", group.generator),
            ("identity", group.identity),
        ]
    matched, recovered = None, None
    for label, element in candidates:
        if server_auth_matches(record, group, pw, p1, p2, element):
            matched = label
            recovered = kdf.derive(pw, (group.encode(p1), group.encode(p2)), group.encode(element))
            break
    key_matches = recovered is not None and (session_key is None or hmac.compare_digest(recovered, session_key))
    evidence = {
        "candidates_tried": [label for label, _ in candidates],
        "matched": matched,
        "key_recovered": recovered is not None,
        "key_matches_session": key_matches if session_key is not None else None,
        "oracle": dlp_oracle is not None,
    }
    return AttackOutcome(FORWARD_SECRECY, record.scheme, key_matches, evidence,
                         "session key sought from the unmasked publics", rule="success iff recovered key matches")


def run_attack(attack: str, bed, session, *, dictionary, trials: int = 1, dlp_oracle=None, rng=None,
               username: str = "alice") -> AttackOutcome:
    """Run one named attack against a finished testbed session."""
    rng = rng or random.Random(0)
    ck = CKOracle(bed)
    transcript: Transcript = session.transcript
    if attack == REPLAY:
        return replay_attack(transcript, bed.network, trials)
    if attack == OFFLINE:
        return offline_guess(transcript, dictionary, bed.group, dlp_oracle)
    if attack == SPOOF:
        return server_spoof(bed.network, bed.users[username], trials, rng)
    if attack in (DENNING_SACCO, KNOWN_KEY):
        fn = denning_sacco_attack if attack == DENNING_SACCO else known_key_attack
        return fn(ck.session_key(session.call_id), transcript, group=bed.group, dictionary=dictionary, kdf=bed.kdf,
                  network=bed.network, dlp_oracle=dlp_oracle, rng=rng)
    if attack == FORWARD_SECRECY:
        return forward_secrecy_check(transcript, ck.corrupt(username), group=bed.group, kdf=bed.kdf,
                                     dlp_oracle=dlp_oracle, session_key=ck.session_key(session.call_id))
    raise ValueError(f"unknown attack {attack!r}")
