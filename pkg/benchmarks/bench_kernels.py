"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot primitives of the Fock oracle (the two-axis ladder update
and the compensated reductions) on joint-state tensors of realistic oracle
sizes, then times one full oracle evaluation under each backend. The numpy
path is what you get with BLODYNE_DISABLE_NUMBA=1; numerical agreement
between the paths is asserted as part of the run.

Run as:  python benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from blodyne import _kernels
from blodyne.detection import ImageBandCase
from blodyne.fock import (BeatPairing, TruncationPolicy, build_blo_signal_state,
                          build_coherent_product, oracle_difference_variance,
                          reference_plan)
from blodyne.gaussian import SqueezeParams


def _rand_state(shape, seed):
    rng = np.random.default_rng(seed)
    amp = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.ascontiguousarray(amp / np.linalg.norm(amp))


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_primitives():
    shapes = [
        (12, 12, 2, 2, 96, 96),
        (12, 12, 2, 2, 160, 160),
        (14, 14, 2, 2, 200, 200),
    ]
    print("pair_ladder_acc + reductions, numba vs numpy")
    print(f"{'shape':>28} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for shape in shapes:
        amp = _rand_state(shape, seed=1)

        def run_ladder(backend_numba):
            os.environ["BLODYNE_DISABLE_NUMBA"] = "" if backend_numba else "1"
            out = np.zeros_like(amp)
            _kernels.pair_ladder_acc(out, amp, axis_up=0, axis_dn=4, coeff=1j)
            _kernels.pair_ladder_acc(out, amp, axis_up=5, axis_dn=1, coeff=-1j)
            return _kernels.norm_sq(out), _kernels.vdot(amp, out)

        ref_nb = run_ladder(True)   # also triggers JIT before timing
        ref_np = run_ladder(False)
        assert abs(ref_nb[0] / ref_np[0] - 1.0) < 1e-12
        assert abs(ref_nb[1] - ref_np[1]) <= 1e-12 * (1.0 + abs(ref_np[1]))
        t_nb = time_call(lambda: run_ladder(True))
        t_np = time_call(lambda: run_ladder(False))
        print(f"{str(shape):>28} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.2f}x")
    os.environ.pop("BLODYNE_DISABLE_NUMBA", None)


def bench_oracle():
    p = SqueezeParams(s=0.5, theta=0.4)
    case = ImageBandCase.TWO_IMAGE_BANDS
    plan = reference_plan(case)
    policy = TruncationPolicy()
    signal = build_blo_signal_state(p, case, policy.tmss_cutoff(p.s))
    beta = 8.0
    lo = build_coherent_product([(beta, 0.3), (beta, 0.9)], policy.coherent_cutoff(beta))
    pairing = BeatPairing.for_blo(plan, case)

    def run(backend_numba):
        os.environ["BLODYNE_DISABLE_NUMBA"] = "" if backend_numba else "1"
        return oracle_difference_variance(signal, lo, pairing, plan, policy=policy)

    v_nb = run(True)
    v_np = run(False)
    assert abs(v_nb / v_np - 1.0) < 1e-12
    t_nb = time_call(lambda: run(True), repeats=2)
    t_np = time_call(lambda: run(False), repeats=2)
    print(f"\nfull oracle (two image bands, beta={beta}, dims "
          f"{tuple(d + 1 for d in signal.dims + lo.dims)}):")
    print(f"  numba {t_nb:.3f} s   numpy {t_np:.3f} s   speedup {t_np / t_nb:.2f}x")
    os.environ.pop("BLODYNE_DISABLE_NUMBA", None)


if __name__ == "__main__":
    if not _kernels.numba_enabled():
        print("warning: numba unavailable or disabled; both columns use numpy")
    bench_primitives()
    bench_oracle()
