"""Compare the compiled and pure-Python arithmetic kernels.

Times the four kernel entry points on workload shapes taken from the real
pipelines (cuspidal ranks 30 and 82, symbol-space sizes up to 480) and one
end-to-end ordinary decomposition, under each available backend. Run:

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""

import argparse
import random
import statistics
import time

from ordsym import _kernels
from ordsym._kernels import available_backends, force_backend


def _rand_rows(rng: random.Random, rows: int, cols: int, bound: int) -> list[list[int]]:
    return [[rng.randrange(-bound, bound) for _ in range(cols)] for _ in range(rows)]


def _time(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def _workloads(rng: random.Random):
    q = 3**28
    a82 = _rand_rows(rng, 82, 82, q)
    b82 = _rand_rows(rng, 82, 82, q)
    a480 = _rand_rows(rng, 480, 82, q)
    small = _rand_rows(rng, 40, 40, 50)
    tall = _rand_rows(rng, 82, 30, q)
    return [
        ("matmul_mod 82x82 mod 3^28", lambda: _kernels.matmul_mod(a82, b82, q)),
        ("matmul_mod 480x82 mod 3^28", lambda: _kernels.matmul_mod(a480, b82, q)),
        ("matmul_int 82x82", lambda: _kernels.matmul_int(a82, b82)),
        ("int_snf 40x40 small entries", lambda: _kernels.int_snf([row[:] for row in small])),
        (
            "local_snf 82x30 at (3, 20)",
            lambda: _kernels.local_snf([row[:] for row in tall], 3, 20, want_u=True, want_v=True),
        ),
        ("pipeline level 15 ordinary split", _level15_pipeline),
    ]


def _level15_pipeline():
    from ordsym.hecke import hecke_T, restrict_operator
    from ordsym.modsym import LevelParams, build_space, cuspidal_lattice
    from ordsym.ordinary import hida_idempotent, ordinary_summand

    space = build_space(LevelParams(5, 3, 1))
    lattice = cuspidal_lattice(space)
    u = restrict_operator(hecke_T(space, 3), lattice)
    e = hida_idempotent(u, 3, 20)
    dec = ordinary_summand(lattice, e, 3, 20, u=u)
    assert dec.rank == 2


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="samples per timing (median reported)")
    parser.add_argument("--seed", type=int, default=20260817)
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    results: dict[str, dict[str, float]] = {}
    for backend in backends:
        force_backend(backend)
        rng = random.Random(args.seed)
        results[backend] = {}
        for name, fn in _workloads(rng):
            results[backend][name] = _time(fn, args.repeat)
    force_backend(None)

    width = max(len(name) for name in next(iter(results.values())))
    header = f"{'workload'.ljust(width)}  " + "  ".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"  {'speedup':>8}"
    print(header)
    for name in results[backends[0]]:
        row = name.ljust(width) + "  "
        row += "  ".join(f"{results[b][name] * 1000:>10.2f}ms" for b in backends)
        if len(backends) > 1:
            ratio = results["python"][name] / results["compiled"][name]
            row += f"  {ratio:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
