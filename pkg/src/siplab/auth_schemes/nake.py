"""Elliptic-curve authenticated key exchange with a session id chosen by the server.

    hello   C -> S   P_c, mask(alpha, f(k))                      alpha = x*P
    reply   S -> C   P_s, s, mask(beta, f(k)), f(k, P_s, s, alpha, beta, P_c, K)
    finish  C -> S   s, f(k, P_c, s, alpha, beta, P_s, K)
    verdict S -> C

k is the shared password, K = x*beta = y*alpha the Diffie-Hellman point.
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
    StaleSessionId,
    Step,
    UnknownIdentity,
    UnknownUser,
    Verdict,
    verdict_message,
)

TAG = "NAKE"
SESSION_ID_BYTES = 16


def server_authenticator(group, k: bytes, ps: str, s: bytes, alpha, beta, pc: str, shared) -> bytes:
    return hash_f([k, ps, s, group.encode(alpha), group.encode(beta), pc, group.encode(shared)])


def client_authenticator(group, k: bytes, pc: str, s: bytes, alpha, beta, ps: str, shared) -> bytes:
    return hash_f([k, pc, s, group.encode(alpha), group.encode(beta), ps, group.encode(shared)])


def _session_key(state: HandshakeState, k: bytes) -> bytes:
    g = state.group
    alpha, beta = (state.own_public, state.peer_public) if state.role.value == "client" else (state.peer_public, state.own_public)
    return state.kdf.derive(k, (g.encode(alpha), g.encode(beta)), g.encode(state.shared))


def nake_client_hello(client: HandshakeState, credential=None) -> SchemeMessage:
    client.expect(0)
    cred = credential or client.credential
    client.credential = cred
    g = client.group
    x = sample_scalar(g, client.rng)
    alpha = power(g, g.generator, x)
    client.ephemeral = x
    client.own_public = alpha
    client.username = cred.username
    client.phase = 1
    return SchemeMessage(
        Step.REQUEST,
        AuthParams.build(TAG, step="request", pc=cred.username, masked=mask(g, alpha, hash_f([cred.password]))),
    )


def nake_server_reply(server: HandshakeState, hello: SchemeMessage, store=None) -> SchemeMessage:
    server.expect(0, hello, Step.REQUEST)
    ctx = server.ctx
    store = store or ctx.store
    pc = hello.payload["pc"]
    try:
        cred = store.get(pc)
    except UnknownUser:
        raise UnknownIdentity(pc) from None
    g = server.group
    pw_key = hash_f([cred.password])
    try:
        alpha = unmask(g, hello.payload.get_bytes("masked"), pw_key)
    except NotAGroupElement:
        alpha = power(g, g.generator, sample_scalar(g, server.rng))
    s = server.rng.randbytes(SESSION_ID_BYTES)
    while s in ctx.session_ids:
        s = server.rng.randbytes(SESSION_ID_BYTES)
    ctx.session_ids[s] = False
    y = sample_scalar(g, server.rng)
    beta = power(g, g.generator, y)
    shared = power(g, alpha, y)
    server.username = pc
    server.peer_identity = pc
    server.session_id = s
    server.ephemeral = y
    server.own_public = beta
    server.peer_public = alpha
    server.shared = shared
    server.phase = 1
    auth = server_authenticator(g, cred.password, ctx.identity, s, alpha, beta, pc, shared)
    return SchemeMessage(
        Step.CHALLENGE,
        AuthParams.build(TAG, step="challenge", ps=ctx.identity, s=s, masked=mask(g, beta, pw_key), auth=auth),
    )


def nake_client_finish(client: HandshakeState, reply: SchemeMessage) -> SchemeMessage:
    client.expect(1, reply, Step.CHALLENGE)
    g = client.group
    cred = client.credential
    p = reply.payload
    ps = p["ps"]
    s = p.get_bytes("s")
    try:
        beta = unmask(g, p.get_bytes("masked"), hash_f([cred.password]))
    except NotAGroupElement as exc:
        raise ServerAuthFailed(f"reply does not unmask to a curve point: {exc}") from None
    shared = power(g, beta, client.ephemeral)
    expected = server_authenticator(g, cred.password, ps, s, client.own_public, beta, cred.username, shared)
    if not hmac.compare_digest(expected, p.get_bytes("auth")):
        raise ServerAuthFailed("server authenticator mismatch")
    client.peer_public = beta
    client.peer_identity = ps
    client.session_id = s
    client.shared = shared
    client.phase = 2
    client.accept(_session_key(client, cred.password))
    auth = client_authenticator(g, cred.password, cred.username, s, client.own_public, beta, ps, shared)
    return SchemeMessage(Step.RESPONSE, AuthParams.build(TAG, step="response", s=s, auth=auth))


def nake_server_verify(server: HandshakeState, finish: SchemeMessage) -> Verdict:
    server.expect(1, finish, Step.RESPONSE)
    ctx = server.ctx
    g = server.group
    p = finish.payload
    server.phase = 2
    s = p.get_bytes("s")
    if ctx.session_ids.get(s):
        raise StaleSessionId("session id already consumed")
    if s != server.session_id:
        raise StaleSessionId("finish carries a session id this session did not issue")
    ctx.session_ids[s] = True
    k = ctx.store.get(server.username).password
    expected = client_authenticator(
        g, k, server.username, s, server.peer_public, server.own_public, ctx.identity, server.shared
    )
    if not hmac.compare_digest(expected, p.get_bytes("auth")):
        raise BadResponse("client authenticator mismatch")
    server.accept(_session_key(server, k))
    server.erase_ephemeral()
    return server.verdict


def nake_finish(client: HandshakeState, verdict: SchemeMessage) -> Verdict:
    client.expect(2, verdict, Step.VERDICT)
    client.phase = 3
    client.erase_ephemeral()
    if verdict.payload["verdict"] != Verdict.ACCEPTED.value:
        client.reject("server rejected")
    return client.verdict


def server_verdict(server: HandshakeState) -> SchemeMessage:
    return verdict_message(TAG, server.verdict)
