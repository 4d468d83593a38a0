"""Run every (scheme, attack) pair and tabulate the outcomes."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..auth_schemes import SCHEME_TAGS, Kdf, get_scheme
from ..crypto_group import DlogOracle, hash_f
from ..sim_net.scenario import ATTACKS, DEFAULT_PASSWORD, DEFAULT_USER, Testbed, default_dictionary
from .attacks import (
    DENNING_SACCO,
    FORWARD_SECRECY,
    KNOWN_KEY,
    NO_KEY,
    OFFLINE,
    REPLAY,
    SPOOF,
    CKOracle,
    denning_sacco_attack,
    forward_secrecy_check,
    known_key_attack,
    offline_guess,
    replay_attack,
    server_spoof,
)
from .claims import PUBLISHED_CLAIMS, compare_claims
from .record import AttackOutcome, not_applicable

RESISTANT = "resistant"
VULNERABLE = "vulnerable"
NOT_APPLICABLE = "not-applicable"
TAXONOMY_NOTE = ("columns are a reconstructed attack taxonomy: the six attacks named in the threat analysis; "
                 "stolen-verifier and other classes are not covered")

# Positive control for the key-based probes: a session key the attacker can
# recompute from the password and the public values alone.
WEAK_KDF = Kdf("hash-of-password-and-publics", lambda pw, publics, shared: hash_f([pw, *publics]), needs_shared=False)


def cell_seed(seed: int, *labels) -> int:
    text = "/".join([str(seed), *map(str, labels)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass
class MatrixCell:
    scheme: str
    attack: str
    status: str
    outcomes: list[AttackOutcome]
    controls: list[AttackOutcome] = field(default_factory=list)

    @property
    def controls_ok(self) -> bool:
        return all(c.success for c in self.controls)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "controls_ok": self.controls_ok,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "controls": [c.to_dict() for c in self.controls],
        }


@dataclass
class SecurityMatrix:
    schemes: tuple[str, ...]
    attacks: tuple[str, ...]
    profile: str
    seed: int
    trials: int
    dictionary_size: int
    cells: dict[str, dict[str, MatrixCell]]

    def cell(self, scheme: str, attack: str) -> MatrixCell:
        return self.cells[scheme][attack]

    def status(self, scheme: str, attack: str) -> str:
        return self.cells[scheme][attack].status

    def claims(self) -> list[dict]:
        return compare_claims(self.cells, [c for c in PUBLISHED_CLAIMS if c.scheme in self.schemes])

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "seed": self.seed,
            "trials": self.trials,
            "dictionary_size": self.dictionary_size,
            "schemes": list(self.schemes),
            "attacks": list(self.attacks),
            "taxonomy": TAXONOMY_NOTE,
            "cells": {s: {a: self.cells[s][a].to_dict() for a in self.attacks} for s in self.schemes},
            "published_claims": self.claims(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        width = max(len("scheme"), *(len(s) for s in self.schemes)) + 2
        cols = [max(len(a), len(NOT_APPLICABLE)) + 2 for a in self.attacks]
        lines = [f"security matrix  profile={self.profile} seed={self.seed} trials={self.trials} "
                 f"dictionary={self.dictionary_size}", TAXONOMY_NOTE, ""]
        lines.append("scheme".ljust(width) + "".join(a.ljust(w) for a, w in zip(self.attacks, cols)).rstrip())
        for s in self.schemes:
            lines.append(s.ljust(width) + "".join(self.status(s, a).ljust(w) for a, w in zip(self.attacks, cols)).rstrip())
        lines += ["", "evidence"]
        for s in self.schemes:
            for a in self.attacks:
                cell = self.cells[s][a]
                lines.append(f"  {s}/{a}: {cell.status}")
                for o in cell.outcomes:
                    lines.append(f"    run      {_summary(o)}")
                for c in cell.controls:
                    lines.append(f"    control  {c.control}: {'success' if c.success else 'FAILED'}  {_summary(c)}")
        lines += ["", "published claims (compared, not used to fill cells)"]
        for row in self.claims():
            agree = {True: "agrees", False: "disagrees", None: "-"}[row["agree"]]
            tag = "" if row["unambiguous"] else "  [ambiguous: " + row["remark"] + "]"
            lines.append(f"  {row['scheme']}/{row['attack']}: claimed {row['claimed']}, measured {row['measured']}, "
                         f"{agree}{tag}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        j = out / f"matrix-{self.profile}-{self.seed}.json"
        t = out / f"matrix-{self.profile}-{self.seed}.txt"
        j.write_text(self.to_json())
        t.write_text(self.to_table())
        return j, t


def _summary(o: AttackOutcome) -> str:
    parts = [f"success={o.success}"]
    for k, v in o.evidence.items():
        if isinstance(v, (int, float, str, bool)) or v is None:
            parts.append(f"{k}={v}")
    if o.transcripts:
        parts.append("transcripts=" + ",".join(o.transcripts))
    return " ".join(parts)


class _Runner:
    def __init__(self, profile, seed, trials, dictionary, out_dir):
        self.profile = profile
        self.seed = seed
        self.trials = trials
        self.dictionary = dictionary
        self.out_dir = Path(out_dir) if out_dir is not None else None

    def bed(self, scheme, attack, label, profile=None, **kw):
        bed = Testbed(scheme, profile or self.profile, cell_seed(self.seed, scheme, attack, label), **kw)
        alice = bed.add_user(DEFAULT_USER, DEFAULT_PASSWORD)
        session = bed.handshake(alice)
        return bed, alice, session

    def record(self, outcome: AttackOutcome, bed, scheme, attack, label, profile=None, control=None) -> AttackOutcome:
        name = f"{scheme}-{attack}-{label}.txt"
        if self.out_dir is not None:
            bed.network.transcript().export(self.out_dir / "transcripts" / name)
        outcome.transcripts.append(name)
        outcome.profile = profile or self.profile
        if control is not None:
            outcome.control = control
        return outcome

    def replay(self, scheme):
        bed, _, session = self.bed(scheme, REPLAY, "run")
        run = self.record(replay_attack(session.transcript, bed.network, self.trials), bed, scheme, REPLAY, "run")
        controls = []
        if scheme == "Digest":
            bed2, _, s2 = self.bed(scheme, REPLAY, "nonce-reuse", nonce_reuse=True)
            controls.append(self.record(replay_attack(s2.transcript, bed2.network, 1), bed2, scheme, REPLAY,
                                        "nonce-reuse", control="server accepts reused nonces"))
        return [run], controls

    def offline(self, scheme):
        bed, _, session = self.bed(scheme, OFFLINE, "run")
        run = self.record(offline_guess(session.transcript, self.dictionary, bed.group), bed, scheme, OFFLINE, "run")
        controls = []
        if get_scheme(scheme).derives_key:
            bed2, _, s2 = self.bed(scheme, OFFLINE, "oracle", profile="TOY")
            out = offline_guess(s2.transcript, self.dictionary, bed2.group, DlogOracle(bed2.group))
            controls.append(self.record(out, bed2, scheme, OFFLINE, "oracle", "TOY", "discrete-log oracle on TOY"))
        return [run], controls

    def spoof(self, scheme):
        bed, alice, _ = self.bed(scheme, SPOOF, "run")
        rng = random.Random(cell_seed(self.seed, scheme, SPOOF, "rogue"))
        run = self.record(server_spoof(bed.network, alice, self.trials, rng), bed, scheme, SPOOF, "run")
        bed2, alice2, _ = self.bed(scheme, SPOOF, "password")
        ctl = server_spoof(bed2.network, alice2, 1, rng, password=DEFAULT_PASSWORD)
        return [run], [self.record(ctl, bed2, scheme, SPOOF, "password", control="rogue holds the password")]

    def _key_probe(self, scheme, attack, fn):
        if not get_scheme(scheme).derives_key:
            return [not_applicable(attack, scheme, NO_KEY, self.profile)], []
        bed, _, session = self.bed(scheme, attack, "run")
        ck = CKOracle(bed)
        rng = random.Random(cell_seed(self.seed, scheme, attack, "mallory"))
        run = fn(ck.session_key(session.call_id), session.transcript, group=bed.group, dictionary=self.dictionary,
                 kdf=bed.kdf, network=bed.network, rng=rng)
        run = self.record(run, bed, scheme, attack, "run")
        bed2, _, s2 = self.bed(scheme, attack, "weak-kdf", kdf=WEAK_KDF)
        weak = fn(CKOracle(bed2).session_key(s2.call_id), s2.transcript, group=bed2.group, dictionary=self.dictionary,
                  kdf=WEAK_KDF, network=bed2.network, rng=rng)
        controls = [self.record(weak, bed2, scheme, attack, "weak-kdf", control="session key without the DH secret")]
        bed3, _, s3 = self.bed(scheme, attack, "oracle", profile="TOY")
        orc = fn(CKOracle(bed3).session_key(s3.call_id), s3.transcript, group=bed3.group, dictionary=self.dictionary,
                 kdf=bed3.kdf, network=bed3.network, rng=rng, dlp_oracle=DlogOracle(bed3.group))
        controls.append(self.record(orc, bed3, scheme, attack, "oracle", "TOY", "discrete-log oracle on TOY"))
        return [run], controls

    def denning_sacco(self, scheme):
        return self._key_probe(scheme, DENNING_SACCO, denning_sacco_attack)

    def known_key(self, scheme):
        return self._key_probe(scheme, KNOWN_KEY, known_key_attack)

    def forward_secrecy(self, scheme):
        if not get_scheme(scheme).derives_key:
            return [not_applicable(FORWARD_SECRECY, scheme, NO_KEY, self.profile)], []
        bed, _, session = self.bed(scheme, FORWARD_SECRECY, "run")
        ck = CKOracle(bed)
        run = forward_secrecy_check(session.transcript, ck.corrupt(DEFAULT_USER), group=bed.group, kdf=bed.kdf,
                                    session_key=ck.session_key(session.call_id))
        run = self.record(run, bed, scheme, FORWARD_SECRECY, "run")
        bed2, _, s2 = self.bed(scheme, FORWARD_SECRECY, "oracle", profile="TOY")
        ck2 = CKOracle(bed2)
        ctl = forward_secrecy_check(s2.transcript, ck2.corrupt(DEFAULT_USER), group=bed2.group, kdf=bed2.kdf,
                                    session_key=ck2.session_key(s2.call_id), dlp_oracle=DlogOracle(bed2.group))
        return [run], [self.record(ctl, bed2, scheme, FORWARD_SECRECY, "oracle", "TOY", "discrete-log oracle on TOY")]


_CELLS = {
    REPLAY: _Runner.replay,
    OFFLINE: _Runner.offline,
    SPOOF: _Runner.spoof,
    DENNING_SACCO: _Runner.denning_sacco,
    KNOWN_KEY: _Runner.known_key,
    FORWARD_SECRECY: _Runner.forward_secrecy,
}


def build_security_matrix(schemes=SCHEME_TAGS, attacks=ATTACKS, profile: str = "STD", seed: int = 0,
                          trials: int = 20, dictionary=None, out_dir=None) -> SecurityMatrix:
    """Fill every cell from attack runs. Positive controls run next to each cell.

    A cell is vulnerable if any of its runs succeeded, not-applicable if the
    attack does not apply to the scheme, resistant otherwise.
    """
    dictionary = list(dictionary) if dictionary is not None else default_dictionary()
    runner = _Runner(profile, seed, trials, dictionary, out_dir)
    cells: dict[str, dict[str, MatrixCell]] = {}
    for scheme in schemes:
        get_scheme(scheme)
        row = {}
        for attack in attacks:
            if attack not in _CELLS:
                raise ValueError(f"unknown attack {attack!r}")
            outcomes, controls = _CELLS[attack](runner, scheme)
            if not all(o.applicable for o in outcomes):
                status = NOT_APPLICABLE
            elif any(o.success for o in outcomes):
                status = VULNERABLE
            else:
                status = RESISTANT
            row[attack] = MatrixCell(scheme, attack, status, outcomes, controls)
        cells[scheme] = row
    return SecurityMatrix(tuple(schemes), tuple(attacks), profile, seed, trials, len(dictionary), cells)
