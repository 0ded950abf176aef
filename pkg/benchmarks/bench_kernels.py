"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--expand-depth K] [--quantize-depth K]

Inputs are real protocol data: the parents of an ADAPTIVE(0.5) level for the
expansion kernel, and the distinct Bob states of a level for the quantizer.
"""

import argparse
import timeit

import numpy as np

from seqbell import kernels
from seqbell.protocol import MuSchedule, distinct_bob_states, enumerate_tree


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--expand-depth", type=int, default=8)
    parser.add_argument("--quantize-depth", type=int, default=5)
    parser.add_argument("--slots", type=int, default=2)
    args = parser.parse_args()

    try:
        kernels.get_backend("cython")
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    schedule = MuSchedule.adaptive(0.5)
    tree = enumerate_tree(schedule, max(args.expand_depth, args.quantize_depth))
    parent = tree[args.expand_depth - 1]
    mu = schedule.mu_for(args.expand_depth, parent.theta)
    states = distinct_bob_states(tree[args.quantize_depth])

    cases = [
        (f"expand ({len(parent)} parents)",
         lambda name: (lambda: kernels.get_backend(name)(parent.theta, parent.bob_frame, mu))),
        (f"quantize ({states.distinct_count} states -> {args.slots})",
         lambda name: (lambda: kernels.get_quantizer(name)(states.bloch, states.probability, args.slots))),
    ]
    print(f"{'kernel':<34}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>10}")
    for label, make in cases:
        slow = best_time(make("numpy"), args.repeat)
        fast = best_time(make("cython"), args.repeat)
        print(f"{label:<34}{slow * 1e3:>12.2f}{fast * 1e3:>13.2f}{slow / fast:>9.1f}x")

    # the two backends must agree before their timings mean anything
    a = kernels.get_backend("cython")(parent.theta, parent.bob_frame, mu)
    b = kernels.get_backend("numpy")(parent.theta, parent.bob_frame, mu)
    assert all(np.allclose(x, y, rtol=1e-13, atol=1e-15) for x, y in zip(a, b))


if __name__ == "__main__":
    main()
