"""The four handshakes behind one driver interface.

Each :class:`Scheme` turns wire-level :class:`SchemeMessage` objects into
state transitions. Step functions raise :class:`AuthError`; the driver
records the rejection on the state and answers with a rejecting verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..sip_core import AuthParams
from . import dh, digest, nake
from .base import (
    DEFAULT_KDF,
    ERASED,
    AuthError,
    BadDigest,
    BadResponse,
    Credential,
    CredentialStore,
    HandshakeState,
    Kdf,
    PhaseError,
    Role,
    SchemeMessage,
    ServerAuthFailed,
    ServerContext,
    StaleNonce,
    StaleSessionId,
    Step,
    UnknownIdentity,
    UnknownUser,
    Verdict,
    verdict_message,
)
from .dh import ecdh_step1, ecdh_step2, ecdh_step3, ecdh_step4, yang_step1, yang_step2, yang_step3, yang_step4
from .digest import digest_challenge, digest_response, digest_verify
from .nake import nake_client_finish, nake_client_hello, nake_server_reply, nake_server_verify


@dataclass(frozen=True)
class Scheme:
    tag: str
    group_kind: str | None
    start: Callable
    challenge: Callable
    respond: Callable
    verify: Callable
    finish: Callable
    derives_key: bool = True

    def new_client(self, credential, group, rng, kdf=DEFAULT_KDF, method="REGISTER", uri="") -> HandshakeState:
        return HandshakeState(
            self.tag, Role.CLIENT, group=group, rng=rng, credential=credential, kdf=kdf, method=method, uri=uri
        )

    def new_server(self, ctx: ServerContext, rng=None) -> HandshakeState:
        return HandshakeState(self.tag, Role.SERVER, group=ctx.group, rng=rng or ctx.rng, ctx=ctx, kdf=ctx.kdf)

    # Driver steps. None means the session ended with a rejection.

    def client_start(self, client: HandshakeState) -> SchemeMessage:
        return self.start(client)

    def server_on_request(self, server: HandshakeState, msg: SchemeMessage) -> SchemeMessage:
        try:
            return self.challenge(server, msg)
        except AuthError as exc:
            server.reject(exc)
            return verdict_message(self.tag, server.verdict)

    def client_on_challenge(self, client: HandshakeState, msg: SchemeMessage) -> SchemeMessage | None:
        try:
            return self.respond(client, msg)
        except AuthError as exc:
            client.reject(exc)
            return None

    def server_on_response(self, server: HandshakeState, msg: SchemeMessage) -> SchemeMessage:
        try:
            self.verify(server, msg)
        except AuthError as exc:
            server.reject(exc)
        return verdict_message(self.tag, server.verdict)

    def client_on_verdict(self, client: HandshakeState, msg: SchemeMessage) -> Verdict:
        try:
            return self.finish(client, msg)
        except AuthError as exc:
            client.reject(exc)
            return client.verdict


def _digest_verify(server, msg):
    return digest_verify(server, msg, server.method)


SCHEMES: dict[str, Scheme] = {
    digest.TAG: Scheme(
        digest.TAG, None, digest.digest_request, digest_challenge, digest_response, _digest_verify,
        digest.digest_finish, derives_key=False,
    ),
    dh.YANG: Scheme(dh.YANG, "modp", dh.step1, dh.step2, dh.step3, dh.step4, dh.finish),
    dh.DURLANIK: Scheme(dh.DURLANIK, "ec", dh.step1, dh.step2, dh.step3, dh.step4, dh.finish),
    nake.TAG: Scheme(nake.TAG, "ec", nake_client_hello, nake_server_reply, nake_client_finish, nake_server_verify, nake.nake_finish),
}
SCHEME_TAGS = tuple(SCHEMES)
KEYED_SCHEMES = tuple(t for t, s in SCHEMES.items() if s.derives_key)


def get_scheme(tag: str) -> Scheme:
    try:
        return SCHEMES[tag]
    except KeyError:
        raise KeyError(f"unknown scheme {tag!r}; expected one of {list(SCHEMES)}") from None


def group_for(tag: str, profile):
    """The group a scheme runs over under ``profile`` (None for Digest)."""
    kind = get_scheme(tag).group_kind
    return profile.group_for(kind) if kind else None


def message_from_params(params: AuthParams | None, status: int | None = None) -> SchemeMessage:
    """Rebuild a SchemeMessage from what travelled in a SIP message."""
    if status is not None and status != 401:
        verdict = Verdict.ACCEPTED if 200 <= status < 300 else Verdict.REJECTED
        return SchemeMessage(Step.VERDICT, AuthParams.build(params.scheme_tag if params else "", verdict=verdict.value))
    if params is None:
        return SchemeMessage(Step.REQUEST, AuthParams(digest.TAG))
    return SchemeMessage(Step(params.get("step", "request")), params)


__all__ = [
    "DEFAULT_KDF", "ERASED", "KEYED_SCHEMES", "SCHEMES", "SCHEME_TAGS", "AuthError", "BadDigest", "BadResponse",
    "Credential", "CredentialStore", "HandshakeState", "Kdf", "PhaseError", "Role", "Scheme", "SchemeMessage",
    "ServerAuthFailed", "ServerContext", "StaleNonce", "StaleSessionId", "Step", "UnknownIdentity", "UnknownUser",
    "Verdict", "digest_challenge", "digest_response", "digest_verify", "ecdh_step1", "ecdh_step2", "ecdh_step3",
    "ecdh_step4", "get_scheme", "group_for", "message_from_params", "nake_client_finish", "nake_client_hello",
    "nake_server_reply", "nake_server_verify", "verdict_message", "yang_step1", "yang_step2", "yang_step3",
    "yang_step4",
]
