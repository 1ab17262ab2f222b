#!/usr/bin/env python3
"""Second-order convergence of the finite-element eigenvalues under mesh refinement."""
import sys

import numpy as np

from slmorse.oracle import DiscretizationConfig, rough_spectrum
from slmorse.problems import poschl_teller


def main() -> int:
    p = poschl_teller(2, 2.0)  # eigenvalues -2 and 1 below the continuum at 2
    exact = np.array([-2.0, 1.0])
    prev = None
    print(f"{'N':>6} {'h':>8} {'err0':>10} {'err1':>10} {'ratio':>6}")
    for N in (250, 500, 1000, 2000, 4000):
        cfg = DiscretizationConfig(T_o=25, N=N)
        err = np.abs(rough_spectrum(p, cfg, 2) - exact)
        ratio = "" if prev is None else f"{prev / err[0]:.2f}"
        print(f"{N:6d} {cfg.h:8.4f} {err[0]:10.2e} {err[1]:10.2e} {ratio:>6}")
        prev = err[0]
    return 0


if __name__ == "__main__":
    sys.exit(main())
