"""Password-masked Diffie-Hellman handshake, over Z_p^* (Yang) or a curve (Durlanik).

    client -> server  REQUEST    username, mask(k1, f(pw))            k1 = g^r1
    server -> client  CHALLENGE  realm, mask(k2, f(pw)), f(k1, k)     k2 = g^r2, k = k1^r2
    client -> server  RESPONSE   username, realm, f(username, realm, k)
    server -> client  VERDICT

Both variants share this code; only the group differs.
"""

from __future__ import annotations

import hmac

from ..crypto_group import NotAGroupElement, hash_f, mask, power, sample_scalar, unmask
from ..sip_core import AuthParams
from .base import (
    BadResponse,
    HandshakeState,
    SchemeMessage,
    ServerAuthFailed,
    Step,
    Verdict,
    verdict_message,
)

YANG = "YangDH"
DURLANIK = "DurlanikECDH"
GROUP_KIND = {YANG: "modp", DURLANIK: "ec"}


def _check_group(state: HandshakeState):
    kind = GROUP_KIND[state.scheme]
    if state.group is None or state.group.kind != kind:
        raise TypeError(f"{state.scheme} runs over a {kind} group")


def _session_key(state: HandshakeState, pw: bytes) -> bytes:
    g = state.group
    if state.role.value == "client":
        publics = (g.encode(state.own_public), g.encode(state.peer_public))
    else:
        publics = (g.encode(state.peer_public), g.encode(state.own_public))
    return state.kdf.derive(pw, publics, g.encode(state.shared))


def step1(client: HandshakeState, credential=None) -> SchemeMessage:
    """Client REQUEST: fresh r1, masked k1."""
    _check_group(client)
    client.expect(0)
    cred = credential or client.credential
    client.credential = cred
    g = client.group
    r1 = sample_scalar(g, client.rng)
    k1 = power(g, g.generator, r1)
    client.ephemeral = r1
    client.own_public = k1
    client.username = cred.username
    client.phase = 1
    masked = mask(g, k1, hash_f([cred.password]))
    return SchemeMessage(Step.REQUEST, AuthParams.build(client.scheme, step="request", username=cred.username, masked=masked))


def step2(server: HandshakeState, request: SchemeMessage, store=None) -> SchemeMessage:
    """Server CHALLENGE: unmask k1, fresh r2, authenticator f(k1, k)."""
    _check_group(server)
    server.expect(0, request, Step.REQUEST)
    ctx = server.ctx
    store = store or ctx.store
    cred = store.get(request.payload["username"])
    g = server.group
    pw_key = hash_f([cred.password])
    try:
        k1 = unmask(g, request.payload.get_bytes("masked"), pw_key)
    except NotAGroupElement:
        # Carry on with a random element so a bad mask is only noticed later.
        k1 = power(g, g.generator, sample_scalar(g, server.rng))
    r2 = sample_scalar(g, server.rng)
    k2 = power(g, g.generator, r2)
    k = power(g, k1, r2)
    server.username = cred.username
    server.ephemeral = r2
    server.own_public = k2
    server.peer_public = k1
    server.shared = k
    server.phase = 1
    auth = hash_f([g.encode(k1), g.encode(k)])
    return SchemeMessage(
        Step.CHALLENGE,
        AuthParams.build(server.scheme, step="challenge", realm=ctx.realm, masked=mask(g, k2, pw_key), auth=auth),
    )


def step3(client: HandshakeState, challenge: SchemeMessage) -> SchemeMessage:
    """Client RESPONSE after checking the server's authenticator."""
    _check_group(client)
    client.expect(1, challenge, Step.CHALLENGE)
    g = client.group
    cred = client.credential
    p = challenge.payload
    try:
        k2 = unmask(g, p.get_bytes("masked"), hash_f([cred.password]))
    except NotAGroupElement as exc:
        raise ServerAuthFailed(f"challenge does not unmask to a group element: {exc}") from None
    k = power(g, k2, client.ephemeral)
    if not hmac.compare_digest(hash_f([g.encode(client.own_public), g.encode(k)]), p.get_bytes("auth")):
        raise ServerAuthFailed("server authenticator mismatch")
    realm = p["realm"]
    client.peer_public = k2
    client.shared = k
    client.phase = 2
    client.accept(_session_key(client, cred.password))
    digest = hash_f([cred.username, realm, g.encode(k)])
    return SchemeMessage(
        Step.RESPONSE,
        AuthParams.build(client.scheme, step="response", username=cred.username, realm=realm, response=digest),
    )


def step4(server: HandshakeState, response: SchemeMessage) -> Verdict:
    """Server verdict on the client's RESPONSE."""
    _check_group(server)
    server.expect(1, response, Step.RESPONSE)
    g = server.group
    ctx = server.ctx
    p = response.payload
    server.phase = 2
    expected = hash_f([server.username, ctx.realm, g.encode(server.shared)])
    if p["username"] != server.username or p["realm"] != ctx.realm:
        raise BadResponse("response names a different user or realm")
    if not hmac.compare_digest(expected, p.get_bytes("response")):
        raise BadResponse("response digest mismatch")
    server.accept(_session_key(server, ctx.store.get(server.username).password))
    server.erase_ephemeral()
    return server.verdict


def finish(client: HandshakeState, verdict: SchemeMessage) -> Verdict:
    client.expect(2, verdict, Step.VERDICT)
    client.phase = 3
    client.erase_ephemeral()
    if verdict.payload["verdict"] != Verdict.ACCEPTED.value:
        client.reject("server rejected")
    return client.verdict


def server_verdict(server: HandshakeState) -> SchemeMessage:
    return verdict_message(server.scheme, server.verdict)


# Named entry points for the two variants.
yang_step1 = ecdh_step1 = step1
yang_step2 = ecdh_step2 = step2
yang_step3 = ecdh_step3 = step3
yang_step4 = ecdh_step4 = step4
