#!/usr/bin/env python3
"""Index of reflectionless wells across a sweep of the shift κ.

Writes one CSV row per (m, κ): conjugate-point index, crossing-form route,
finite-element count and the closed-form count.
"""
import argparse
import csv
import sys

import numpy as np

from slmorse.flows import PropagationConfig
from slmorse.morse import morse_index
from slmorse.oracle import DiscretizationConfig
from slmorse.problems import poschl_teller, poschl_teller_index


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="poschl_teller_sweep.csv")
    ap.add_argument("--mmax", type=int, default=3)
    ap.add_argument("--points", type=int, default=12)
    args = ap.parse_args(argv)

    cfg = PropagationConfig(sample_dt=0.02)
    dcfg = DiscretizationConfig(N=2000, richardson_levels=2)
    bad = 0
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "kappa", "conjugate_points", "crossing_forms", "oracle", "closed_form"])
        for m in range(1, args.mmax + 1):
            # stay clear of the thresholds κ = k², where zero is an eigenvalue
            kappas = [k for k in np.linspace(0.2, m * m + 1.0, args.points)
                      if min(abs(k - j * j) for j in range(1, m + 1)) > 0.05]
            for kappa in kappas:
                res = morse_index(poschl_teller(m, kappa), cfg, oracle=dcfg, plateau=False)
                exact = poschl_teller_index(m, kappa)
                bad += not (res.index == res.maslov_crosscheck == res.oracle_crosscheck == exact)
                w.writerow([m, f"{kappa:.6g}", res.index, res.maslov_crosscheck, res.oracle_crosscheck, exact])
                print(f"m={m} kappa={kappa:7.4f}  index={res.index}  exact={exact}")
    print(f"wrote {args.out}; disagreements: {bad}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
