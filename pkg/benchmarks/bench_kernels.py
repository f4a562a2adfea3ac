"""Benchmark: compiled trial kernels against the plain-Python path.

Runs the same closed-loop tracking trials through both compilations of the
kernel source and reports per-trial wall time.  Invoke from the repository
root:

    python3 benchmarks/bench_kernels.py --trials 200 --blocks 300
"""

import argparse
import math
import time

import numpy as np

from beamtrack import kernels
from beamtrack.baseline import ANGLE_NOISE_STD
from beamtrack.truth_sim import NoiseParams, make_trial_noise

H, DT, RHO, SIGMA_W, SIGMA_N2 = 3.0, 1e-3, 0.995, 0.28, 1.0
KAPPA = math.pi
NOISE = NoiseParams(sigma_w=SIGMA_W, sigma_n2=SIGMA_N2, rho=RHO)


def run_batch(fn, records, n_blocks, baseline=False):
    err_phi = np.empty(n_blocks)
    err_theta = np.empty(n_blocks)
    start = time.perf_counter()
    for rec in records:
        if baseline:
            fn(3.0, 16.667, H, DT, RHO, SIGMA_W, SIGMA_N2, KAPPA, 16, 16,
               ANGLE_NOISE_STD, rec.alpha_re0, rec.alpha_im0, rec.w, rec.xi1,
               rec.xi2, rec.n_re, rec.n_im, err_phi, err_theta)
        else:
            fn(3.0, 16.667, H, DT, RHO, SIGMA_W, SIGMA_N2, KAPPA, 16, 16,
               False, rec.alpha_re0, rec.alpha_im0, rec.w, rec.xi1, rec.xi2,
               rec.n_re, rec.n_im, err_phi, err_theta)
    return (time.perf_counter() - start) / len(records)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--blocks", type=int, default=300)
    parser.add_argument("--py-trials", type=int, default=None,
                        help="trial count for the plain path (defaults to "
                             "min(trials, 50); it is much slower)")
    args = parser.parse_args()

    records = [make_trial_noise(0, t, args.blocks, NOISE)
               for t in range(args.trials)]
    py_trials = args.py_trials or min(args.trials, 50)

    print(f"numba available: {kernels.HAS_NUMBA}, "
          f"compiled path active: {kernels.USE_NUMBA}")
    print(f"{args.blocks} blocks per trial, N=16, SNR 0 dB\n")

    if kernels.USE_NUMBA:
        # warm up compilation outside the timed section
        run_batch(kernels.run_trial_proposed, records[:1], args.blocks)
        run_batch(kernels.run_trial_baseline, records[:1], args.blocks,
                  baseline=True)

    rows = []
    for label, fn, baseline, count in (
            ("proposed, active path", kernels.run_trial_proposed, False,
             args.trials),
            ("proposed, plain python", kernels.run_trial_proposed_py, False,
             py_trials),
            ("baseline, active path", kernels.run_trial_baseline, True,
             args.trials),
            ("baseline, plain python", kernels.run_trial_baseline_py, True,
             py_trials)):
        per_trial = run_batch(fn, records[:count], args.blocks,
                              baseline=baseline)
        rows.append((label, count, per_trial))

    width = max(len(r[0]) for r in rows)
    for label, count, per_trial in rows:
        print(f"{label:<{width}}  {per_trial * 1e3:9.3f} ms/trial "
              f"({count} trials)")
    if kernels.USE_NUMBA:
        speed_prop = rows[1][2] / rows[0][2]
        speed_base = rows[3][2] / rows[2][2]
        print(f"\nspeedup: proposed {speed_prop:.1f}x, baseline {speed_base:.1f}x")
    else:
        print("\nset BEAMTRACK_DISABLE_NUMBA=0 (or unset it) to time the "
              "compiled path")


if __name__ == "__main__":
    main()
