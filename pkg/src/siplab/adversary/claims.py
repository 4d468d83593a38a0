"""Security claims made for the schemes in the literature, recorded for comparison only.

The matrix is measured; these are what the scheme authors and a later
comparison assert. ``unambiguous`` is False wherever the source statement
is incomplete, contradicts itself, or is a remark about a missing feature
rather than an attack argument.
"""

from __future__ import annotations

from dataclasses import dataclass

from .attacks import DENNING_SACCO, FORWARD_SECRECY, KNOWN_KEY, OFFLINE, REPLAY, SPOOF


@dataclass(frozen=True)
class Claim:
    scheme: str
    attack: str
    claimed: str  # resistant | vulnerable | unstated
    unambiguous: bool
    remark: str = ""


PUBLISHED_CLAIMS: tuple[Claim, ...] = (
    Claim("Digest", OFFLINE, "vulnerable", True),
    Claim("Digest", SPOOF, "vulnerable", True),
    Claim("YangDH", OFFLINE, "resistant", True),
    Claim("YangDH", SPOOF, "resistant", True),
    Claim("YangDH", REPLAY, "resistant", True),
    Claim("YangDH", DENNING_SACCO, "unstated", False, "no policy stated for this scheme"),
    Claim("YangDH", KNOWN_KEY, "vulnerable", False, "listed as an absent feature, no attack given"),
    Claim("YangDH", FORWARD_SECRECY, "vulnerable", False, "listed as an absent feature, no attack given"),
    Claim("DurlanikECDH", OFFLINE, "resistant", True),
    Claim("DurlanikECDH", SPOOF, "resistant", False, "argument shared with the mod-p scheme"),
    Claim("DurlanikECDH", DENNING_SACCO, "resistant", False, "the statements on this point contradict each other"),
    Claim("DurlanikECDH", KNOWN_KEY, "resistant", False, "a countermeasure is mentioned without detail"),
    Claim("DurlanikECDH", FORWARD_SECRECY, "resistant", False, "a countermeasure is mentioned without detail"),
    Claim("NAKE", REPLAY, "resistant", True),
    Claim("NAKE", OFFLINE, "resistant", True),
    Claim("NAKE", SPOOF, "resistant", False, "the argument breaks off before its conclusion"),
)


def compare_claims(cells: dict, claims=PUBLISHED_CLAIMS) -> list[dict]:
    """One row per claim: claimed direction next to the measured cell status."""
    rows = []
    for c in claims:
        cell = cells.get(c.scheme, {}).get(c.attack)
        measured = cell.status if cell is not None else None
        agree = None if c.claimed == "unstated" or measured is None else c.claimed == measured
        rows.append({
            "scheme": c.scheme,
            "attack": c.attack,
            "claimed": c.claimed,
            "measured": measured,
            "agree": agree,
            "unambiguous": c.unambiguous,
            "remark": c.remark,
        })
    return rows
