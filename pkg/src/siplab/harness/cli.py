"""``siplab`` command line: run, matrix, bench, corpus-check."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ..auth_schemes import SCHEME_TAGS
from ..crypto_group import GroupTooLarge
from ..sim_net.scenario import (
    DEFAULT_PASSWORD,
    ConfigError,
    ScenarioError,
    load_config,
    read_dictionary,
    run_scenario,
    validate_config,
)
from ..sip_core import SipParseError, parse_message, serialize_message

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_SCENARIO = 3


def out_dir(args) -> Path:
    return Path(args.out or os.environ.get("SIPLAB_OUT") or "siplab-out")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="siplab", description="Simulated SIP authentication schemes under attack.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=_seed, default=None)
        sp.add_argument("--trials", type=_positive, default=None)
        sp.add_argument("--out", default=None, help="output directory (default: $SIPLAB_OUT or ./siplab-out)")

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", help="scenario JSON file")
    run.add_argument("--scheme", choices=SCHEME_TAGS)
    run.add_argument("--profile", type=str.upper, choices=("TOY", "STD"))
    run.add_argument("--dict", dest="dictionary")
    common(run)

    matrix = sub.add_parser("matrix", help="build the security matrix")
    matrix.add_argument("--profile", default="STD", help="TOY, STD, or a comma-separated list")
    matrix.add_argument("--scheme", action="append", choices=SCHEME_TAGS, help="restrict to a scheme (repeatable)")
    matrix.add_argument("--dict", dest="dictionary")
    common(matrix)

    bench = sub.add_parser("bench", help="time handshakes and count group operations")
    bench.add_argument("--profile", type=str.upper, default="STD", choices=("TOY", "STD"))
    bench.add_argument("--scheme", action="append", choices=SCHEME_TAGS[1:])
    common(bench)

    corpus = sub.add_parser("corpus-check", help="parse/serialize round trip over a message corpus")
    corpus.add_argument("path", nargs="?", default="corpus")
    corpus.add_argument("--out", default=None)
    return p


def cmd_run(args) -> int:
    if args.config:
        config = load_config(args.config)
        overrides = {}
        for key in ("scheme", "profile", "seed", "trials", "dictionary"):
            if getattr(args, key) is not None:
                overrides[key] = getattr(args, key)
        if overrides:
            raw = json.loads(Path(args.config).read_text())
            raw.update(overrides)
            config = validate_config(raw)
    else:
        if not args.scheme:
            raise ConfigError("scheme", "give --config or --scheme")
        raw = {"scheme": args.scheme}
        for key in ("profile", "seed", "trials", "dictionary"):
            if getattr(args, key) is not None:
                raw[key] = getattr(args, key)
        config = validate_config(raw)
    transcript, outcomes = run_scenario(config)
    out = out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    tpath = transcript.export(out / f"{config.label}.transcript")
    outcomes["transcript"] = tpath.name
    opath = out / f"{config.label}.outcome.json"
    opath.write_text(json.dumps(outcomes, indent=2, sort_keys=True) + "\n")
    print(f"scenario {config.label}: {len(transcript)} messages -> {tpath}")
    for name, result in outcomes.get("attacks", {}).items():
        print(f"  {name}: success={result['success']} applicable={result['applicable']}")
    if "handshake" in outcomes:
        h = outcomes["handshake"]
        print(f"  handshake: client={h['client']} server={h['server']} keys_agree={h['keys_agree']}")
    if "flow" in outcomes:
        print("  flow: " + " ".join(outcomes["flow"]))
    print(f"  outcome -> {opath}")
    return EXIT_OK


def cmd_matrix(args) -> int:
    from ..adversary import build_security_matrix
    from ..sim_net.scenario import default_dictionary

    profiles = [p.strip().upper() for p in args.profile.split(",") if p.strip()]
    for p in profiles:
        if p not in ("TOY", "STD"):
            raise ConfigError("profile", f"unknown profile {p!r}")
    if args.dictionary:
        dictionary = read_dictionary(args.dictionary)
        if DEFAULT_PASSWORD not in dictionary:
            raise ConfigError("dict", "dictionary does not contain the true password")
    else:
        dictionary = default_dictionary()
    schemes = tuple(args.scheme) if args.scheme else SCHEME_TAGS
    out = out_dir(args)
    seed = args.seed if args.seed is not None else 0
    for profile in profiles:
        m = build_security_matrix(schemes, profile=profile, seed=seed, trials=args.trials or 20,
                                  dictionary=dictionary, out_dir=out)
        jpath, tpath = m.write(out)
        sys.stdout.write(m.to_table())
        print(f"-> {jpath}\n-> {tpath}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import BENCH_SCHEMES, bench

    report = bench(args.trials or 50, args.profile, tuple(args.scheme) if args.scheme else BENCH_SCHEMES,
                   seed=args.seed or 0)
    out = out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"bench-{report.profile}.json").write_text(report.to_json())
    (out / f"bench-{report.profile}.txt").write_text(report.to_table())
    sys.stdout.write(report.to_table())
    return EXIT_OK


def corpus_check(path) -> list[tuple[str, bool, str]]:
    """(file, ok, detail) per corpus message: serialize(parse(x)) must be a fixed point."""
    path = Path(path)
    files = sorted(path.glob("*.sip")) if path.is_dir() else [path]
    results = []
    for f in files:
        data = f.read_bytes()
        try:
            msg = parse_message(data)
            wire = serialize_message(msg)
            ok = wire == data and parse_message(wire) == msg
            detail = "ok" if ok else "not canonical"
        except SipParseError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((f.name, ok, detail))
    return results


def cmd_corpus_check(args) -> int:
    results = corpus_check(args.path)
    if not results:
        print(f"no corpus messages under {args.path}", file=sys.stderr)
        return EXIT_FAIL
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
    passed = sum(ok for _, ok, _ in results)
    print(f"{passed}/{len(results)} messages round-trip")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


COMMANDS = {"run": cmd_run, "matrix": cmd_matrix, "bench": cmd_bench, "corpus-check": cmd_corpus_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScenarioError, GroupTooLarge) as exc:
        print(f"scenario error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SCENARIO


if __name__ == "__main__":
    sys.exit(main())
