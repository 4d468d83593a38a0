from .bench import BENCH_SCHEMES, BenchReport, SchemeBench, bench, count_exponentiations, run_handshake
from .cli import corpus_check, main

__all__ = ["BENCH_SCHEMES", "BenchReport", "SchemeBench", "bench", "corpus_check", "count_exponentiations", "main",
           "run_handshake"]
