#!/usr/bin/env python3
"""Randomized check that conjugate points, crossing forms and the oracle agree."""
import argparse
import json
import sys
import time

import numpy as np

from slmorse.flows import PropagationConfig
from slmorse.morse import morse_index
from slmorse.oracle import DiscretizationConfig, rough_spectrum
from slmorse.problems import random_problem


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50, help="problems per dimension")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--margin", type=float, default=5e-3, help="reject problems with |eigenvalue| below this")
    ap.add_argument("--out", help="write a JSON summary here")
    args = ap.parse_args(argv)

    cfg = PropagationConfig(kernel_splice=False, sample_dt=0.05, rel_tol=1e-8, abs_tol=1e-10)
    dcfg = DiscretizationConfig(T_o=25, N=1000, richardson_levels=2)
    rng = np.random.default_rng(args.seed)
    rows, rejected = [], 0
    t0 = time.perf_counter()
    for n in (1, 2):
        done = 0
        while done < args.count:
            p = random_problem(rng, n)
            if np.min(np.abs(rough_spectrum(p, DiscretizationConfig(T_o=25, N=800), 6))) <= args.margin:
                rejected += 1
                continue
            res = morse_index(p, cfg, oracle=dcfg, plateau=False)
            rows.append({"n": n, "index": res.index, "maslov": res.maslov_crosscheck, "oracle": res.oracle_crosscheck,
                         "crossings": len(res.crossings)})
            done += 1
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if not r["index"] == r["maslov"] == r["oracle"]]
    hist = {}
    for r in rows:
        hist[(r["n"], r["index"])] = hist.get((r["n"], r["index"]), 0) + 1
    for (n, k), c in sorted(hist.items()):
        print(f"n={n} index={k}: {c}")
    print(f"{len(rows)} problems, {len(bad)} disagreements, {rejected} rejected, {elapsed:.1f}s")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"rows": rows, "rejected": rejected, "seconds": elapsed}, fh, indent=1)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
