"""Challenge-response Digest: HA1/HA2/response chaining over hash_f.

No key is derived and the server is never authenticated to the client.
"""

from __future__ import annotations

import hmac

from ..crypto_group import hash_f
from ..sip_core import AuthParams
from .base import (
    BadDigest,
    HandshakeState,
    PhaseError,
    SchemeMessage,
    StaleNonce,
    Step,
    Verdict,
    verdict_message,
)

TAG = "Digest"
NONCE_BYTES = 16


def compute_response(username, realm, password: bytes, nonce: bytes, method, uri) -> bytes:
    ha1 = hash_f([username, realm, password])
    ha2 = hash_f([method, uri])
    return hash_f([ha1, nonce, ha2])


def digest_request(client: HandshakeState) -> SchemeMessage:
    client.expect(0)
    client.phase = 1
    return SchemeMessage(Step.REQUEST, AuthParams(TAG))


def digest_challenge(server: HandshakeState, request: SchemeMessage | None = None) -> SchemeMessage:
    server.expect(0)
    ctx = server.ctx
    nonce = server.rng.randbytes(NONCE_BYTES)
    while nonce in ctx.nonces:
        nonce = server.rng.randbytes(NONCE_BYTES)
    ctx.nonces[nonce] = False
    server.session_id = nonce
    server.phase = 1
    return SchemeMessage(Step.CHALLENGE, AuthParams.build(TAG, step="challenge", realm=ctx.realm, nonce=nonce))


def digest_response(client: HandshakeState, challenge: SchemeMessage) -> SchemeMessage:
    client.expect(1, challenge, Step.CHALLENGE)
    cred = client.credential
    realm = challenge.payload["realm"]
    nonce = challenge.payload.get_bytes("nonce")
    digest = compute_response(cred.username, realm, cred.password, nonce, client.method, client.uri)
    client.session_id = nonce
    client.phase = 2
    return SchemeMessage(
        Step.RESPONSE,
        AuthParams.build(
            TAG, step="response", username=cred.username, realm=realm, nonce=nonce, uri=client.uri, response=digest
        ),
    )


def digest_verify(server: HandshakeState, response: SchemeMessage, method: str = "REGISTER") -> Verdict:
    """Check a response. Works on a fresh server state too: nonces live in the context."""
    if server.phase not in (0, 1):
        raise PhaseError("digest session already verified")
    if response.step is not Step.RESPONSE:
        raise PhaseError(f"expected response, got {response.step.value}")
    ctx = server.ctx
    p = response.payload
    cred = ctx.store.get(p["username"])
    nonce = p.get_bytes("nonce")
    if nonce not in ctx.nonces:
        raise StaleNonce("nonce was never issued")
    if ctx.nonces[nonce] and not ctx.nonce_reuse:
        raise StaleNonce("nonce already consumed")
    expected = compute_response(cred.username, ctx.realm, cred.password, nonce, method, p["uri"])
    ctx.nonces[nonce] = True
    server.phase = 2
    server.username = cred.username
    if p["realm"] != ctx.realm or not hmac.compare_digest(expected, p.get_bytes("response")):
        raise BadDigest(f"digest mismatch for {cred.username}")
    server.accept(None)
    return server.verdict


def digest_finish(client: HandshakeState, verdict: SchemeMessage) -> Verdict:
    client.expect(2, verdict, Step.VERDICT)
    client.phase = 3
    if verdict.payload["verdict"] == Verdict.ACCEPTED.value:
        client.accept(None)
    else:
        client.reject("server rejected")
    return client.verdict


def server_verdict(server: HandshakeState) -> SchemeMessage:
    return verdict_message(TAG, server.verdict)
