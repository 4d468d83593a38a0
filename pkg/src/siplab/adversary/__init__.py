"""Attacks on recorded and live handshakes, CK-style queries, and the security matrix."""

from ..crypto_group import DlogOracle, GroupTooLarge
from .attacks import (
    DENNING_SACCO,
    FORWARD_SECRECY,
    KNOWN_KEY,
    OFFLINE,
    REPLAY,
    SPOOF,
    CKOracle,
    RogueServer,
    UnknownSession,
    candidate_publics,
    ck_queries,
    denning_sacco_attack,
    forward_secrecy_check,
    known_key_attack,
    offline_guess,
    replay_attack,
    run_attack,
    server_spoof,
)
from .claims import PUBLISHED_CLAIMS, Claim, compare_claims
from .matrix import NOT_APPLICABLE, RESISTANT, VULNERABLE, WEAK_KDF, MatrixCell, SecurityMatrix, build_security_matrix
from .record import AttackOutcome, HandshakeRecord, IncompleteTranscript, extract_handshake

__all__ = [
    "DENNING_SACCO", "FORWARD_SECRECY", "KNOWN_KEY", "NOT_APPLICABLE", "OFFLINE", "PUBLISHED_CLAIMS", "REPLAY",
    "RESISTANT", "SPOOF", "VULNERABLE", "WEAK_KDF", "AttackOutcome", "CKOracle", "Claim", "DlogOracle",
    "GroupTooLarge", "HandshakeRecord", "IncompleteTranscript", "MatrixCell", "RogueServer", "SecurityMatrix",
    "UnknownSession", "build_security_matrix", "candidate_publics", "ck_queries", "compare_claims",
    "denning_sacco_attack", "extract_handshake", "forward_secrecy_check", "known_key_attack", "offline_guess",
    "replay_attack", "run_attack", "server_spoof",
]
