"""Compare the numba and numpy kernel backends on the two hot paths:
pair-sector unitary application (network evolution) and sampled-count
lookup (shot generation).

Run from the repository root:

    python3 benchmarks/compare_backends.py --nmax 10 --shots 200000

The numba column is skipped when numba is not importable.
"""

import argparse
import time

import numpy as np

from amcov import FockBasis, TwelvePortConfig, coherent_state
from amcov._backend import HAS_NUMBA, set_backend
from amcov.measure import outcome_distribution, sample
from amcov.multiport import twelve_port_output_state


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nmax", type=int, default=10,
                        help="total-photon cutoff of the six-mode output basis")
    parser.add_argument("--shots", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    config = TwelvePortConfig(2.0 / 3.0)
    signal = coherent_state(FockBasis(2, args.nmax), [1.0, 0.3j],
                            warn_threshold=1.0)
    output = twelve_port_output_state(config, signal, args.nmax)
    distribution = outcome_distribution(output)
    print(f"six-mode basis dimension {output.basis.dimension} "
          f"(n_max={args.nmax}), {args.shots} shots, best of {args.repeats}")

    workloads = [
        ("network evolution",
         lambda: twelve_port_output_state(config, signal, args.nmax)),
        ("shot sampling",
         lambda: sample(distribution, args.shots, seed=7)),
    ]
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if not HAS_NUMBA:
        print("numba not importable; timing the numpy backend only")

    times = {}
    for backend in backends:
        previous = set_backend(backend)
        try:
            for label, fn in workloads:
                fn()  # warm up: JIT compile and page in
                times[backend, label] = best_of(args.repeats, fn)
        finally:
            set_backend(previous)

    for label, _ in workloads:
        line = f"{label:20s}"
        for backend in backends:
            line += f"  {backend} {times[backend, label] * 1e3:9.3f} ms"
        if HAS_NUMBA:
            ratio = times["numpy", label] / times["numba", label]
            line += f"  speedup x{ratio:.2f}"
        print(line)


if __name__ == "__main__":
    main()
