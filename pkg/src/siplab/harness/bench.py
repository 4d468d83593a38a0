"""Handshake timing and exact group-operation counts per scheme."""

from __future__ import annotations

import json
import random
import statistics
import time
from dataclasses import asdict, dataclass, field

from ..auth_schemes import Credential, CredentialStore, ServerContext, Verdict, get_scheme, group_for
from ..crypto_group import CountingGroup, get_profile

BENCH_SCHEMES = ("YangDH", "DurlanikECDH", "NAKE")


@dataclass
class SchemeBench:
    scheme: str
    group: str
    parameter_bits: int
    element_bytes: int
    iterations: int
    median_seconds: float
    min_seconds: float
    max_seconds: float
    client_exponentiations: int
    server_exponentiations: int

    @property
    def exponentiations(self) -> int:
        return self.client_exponentiations + self.server_exponentiations


@dataclass
class BenchReport:
    profile: str
    iterations: int
    seed: int
    rows: list[SchemeBench] = field(default_factory=list)

    def row(self, scheme: str) -> SchemeBench:
        for r in self.rows:
            if r.scheme == scheme:
                return r
        raise KeyError(scheme)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "iterations": self.iterations,
            "seed": self.seed,
            "schemes": [dict(asdict(r), exponentiations=r.exponentiations) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        head = f"{'scheme':<14}{'group':<12}{'bits':>6}{'elem B':>8}{'median ms':>11}{'min ms':>9}{'max ms':>9}{'exps c/s':>10}"
        lines = [f"handshake benchmark  profile={self.profile} iterations={self.iterations}", head]
        for r in self.rows:
            lines.append(
                f"{r.scheme:<14}{r.group:<12}{r.parameter_bits:>6}{r.element_bytes:>8}{r.median_seconds * 1e3:>11.2f}"
                f"{r.min_seconds * 1e3:>9.2f}{r.max_seconds * 1e3:>9.2f}"
                f"{f'{r.client_exponentiations}/{r.server_exponentiations}':>10}"
            )
        return "\n".join(lines) + "\n"


def run_handshake(scheme_tag: str, group, rng, password=b"benchmark-pw", realm="bench.test"):
    """One direct client/server handshake (no SIP framing). Returns (client, server)."""
    scheme = get_scheme(scheme_tag)
    cred = Credential("bench", password, realm)
    store = CredentialStore()
    store.register(cred)
    ctx = ServerContext(store, realm, "registrar", group, rng)
    client = scheme.new_client(cred, group, rng)
    server = scheme.new_server(ctx)
    msg = scheme.client_start(client)
    msg = scheme.server_on_request(server, msg)
    msg = scheme.client_on_challenge(client, msg)
    verdict = scheme.server_on_response(server, msg)
    scheme.client_on_verdict(client, verdict)
    return client, server


def count_exponentiations(scheme_tag: str, group, rng) -> tuple[int, int]:
    """(client, server) exponentiation counts for one handshake, counted on separate proxies."""
    scheme = get_scheme(scheme_tag)
    cg, sg = CountingGroup(group), CountingGroup(group)
    cred = Credential("bench", b"benchmark-pw", "bench.test")
    store = CredentialStore()
    store.register(cred)
    ctx = ServerContext(store, "bench.test", "registrar", sg, rng)
    client = scheme.new_client(cred, cg, rng)
    server = scheme.new_server(ctx)
    msg = scheme.server_on_request(server, scheme.client_start(client))
    verdict = scheme.server_on_response(server, scheme.client_on_challenge(client, msg))
    scheme.client_on_verdict(client, verdict)
    if client.verdict is not Verdict.ACCEPTED or server.verdict is not Verdict.ACCEPTED:
        raise RuntimeError(f"{scheme_tag} benchmark handshake did not complete")
    return cg.exponentiations, sg.exponentiations


def bench(iterations: int = 50, profile: str = "STD", schemes=BENCH_SCHEMES, seed: int = 0) -> BenchReport:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    prof = get_profile(profile)
    report = BenchReport(prof.name, iterations, seed)
    for tag in schemes:
        group = group_for(tag, prof)
        rng = random.Random(f"{seed}/{tag}")
        times = []
        for _ in range(iterations):
            t0 = time.perf_counter()
            client, server = run_handshake(tag, group, rng)
            times.append(time.perf_counter() - t0)
            if client.sk is None or client.sk != server.sk:
                raise RuntimeError(f"{tag} benchmark handshake disagreed on the key")
        c_exp, s_exp = count_exponentiations(tag, group, rng)
        report.rows.append(SchemeBench(
            scheme=tag,
            group=group.name,
            parameter_bits=group.bits,
            element_bytes=group.width,
            iterations=iterations,
            median_seconds=statistics.median(times),
            min_seconds=min(times),
            max_seconds=max(times),
            client_exponentiations=c_exp,
            server_exponentiations=s_exp,
        ))
    return report
