"""State, messages and errors shared by the four handshakes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from ..crypto_group import hash_f
from ..sip_core import AuthParams


class Step(str, enum.Enum):
    REQUEST = "request"
    CHALLENGE = "challenge"
    RESPONSE = "response"
    VERDICT = "verdict"


class Verdict(str, enum.Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class Role(str, enum.Enum):
    CLIENT = "client"
    SERVER = "server"


class _Erased:
    def __repr__(self):
        return "ERASED"


ERASED = _Erased()


class AuthError(Exception):
    """A handshake step refused its input. The session is rejected."""


class UnknownUser(AuthError):
    pass


class UnknownIdentity(UnknownUser):
    pass


class StaleNonce(AuthError):
    pass


class BadDigest(AuthError):
    pass


class ServerAuthFailed(AuthError):
    pass


class BadResponse(AuthError):
    pass


class StaleSessionId(AuthError):
    pass


class PhaseError(AuthError):
    """A message arrived out of order."""


@dataclass(frozen=True)
class Credential:
    username: str
    password: bytes
    realm: str

    def __post_init__(self):
        if not self.username or not self.realm:
            raise ValueError("username and realm must be nonempty")
        if isinstance(self.password, str):
            object.__setattr__(self, "password", self.password.encode("utf-8"))


class CredentialStore:
    """username -> Credential, exactly as submitted at registration."""

    def __init__(self):
        self._creds: dict[str, Credential] = {}

    def register(self, cred: Credential) -> bool:
        """Store ``cred``; returns True when it replaced an earlier binding."""
        replaced = cred.username in self._creds
        self._creds[cred.username] = cred
        return replaced

    def get(self, username: str) -> Credential:
        try:
            return self._creds[username]
        except KeyError:
            raise UnknownUser(username) from None

    def __contains__(self, username: str) -> bool:
        return username in self._creds


@dataclass(frozen=True)
class Kdf:
    """Session-key derivation. ``needs_shared`` is public knowledge about the scheme."""

    name: str
    derive: Callable[[bytes, tuple, bytes], bytes]
    needs_shared: bool = True


DEFAULT_KDF = Kdf("hash-of-shared", lambda pw, publics, shared: hash_f([shared]))


@dataclass
class ServerContext:
    """Long-lived registrar-side state shared by all server sessions."""

    store: CredentialStore
    realm: str
    identity: str
    group: object
    rng: object
    nonce_reuse: bool = False
    kdf: Kdf = DEFAULT_KDF
    nonces: dict = field(default_factory=dict)  # nonce -> consumed?
    session_ids: dict = field(default_factory=dict)  # s -> consumed?


@dataclass(frozen=True)
class SchemeMessage:
    step: Step
    payload: AuthParams


@dataclass(eq=False)
class HandshakeState:
    """One side of one session. Mutated only by that scheme's step functions."""

    scheme: str
    role: Role
    group: object = None
    rng: object = None
    credential: Credential | None = None
    ctx: ServerContext | None = None
    kdf: Kdf = DEFAULT_KDF
    method: str = "REGISTER"
    uri: str = ""
    phase: int = 0
    ephemeral: object = None
    own_public: object = None
    peer_public: object = None
    shared: object = None
    session_id: bytes | None = None
    username: str | None = None
    peer_identity: str | None = None
    sk: bytes | None = None
    verdict: Verdict = Verdict.PENDING
    error: str | None = None

    def expect(self, phase: int, msg: SchemeMessage | None = None, step: Step | None = None):
        if self.verdict is not Verdict.PENDING and self.role is Role.SERVER:
            raise PhaseError(f"{self.scheme} session already {self.verdict.value}")
        if self.phase != phase:
            raise PhaseError(f"{self.scheme}/{self.role.value}: at phase {self.phase}, step needs {phase}")
        if msg is not None and msg.step is not step:
            raise PhaseError(f"expected {step.value}, got {msg.step.value}")

    def accept(self, sk: bytes | None):
        self.verdict = Verdict.ACCEPTED
        self.sk = sk

    def reject(self, error: Exception | str):
        self.verdict = Verdict.REJECTED
        self.sk = None
        self.error = f"{type(error).__name__}: {error}" if isinstance(error, Exception) else error
        self.erase_ephemeral()

    def erase_ephemeral(self):
        self.ephemeral = ERASED


def verdict_message(scheme: str, verdict: Verdict) -> SchemeMessage:
    return SchemeMessage(Step.VERDICT, AuthParams.build(scheme, verdict=verdict.value))
