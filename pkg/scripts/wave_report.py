#!/usr/bin/env python3
"""Verdicts and spectra for the Nagumo front and the standing pulse."""
import sys

import numpy as np

from slmorse.oracle import DiscretizationConfig, rough_spectrum
from slmorse.waves import (
    ReactionSystem,
    instability_verdict,
    rough_spectrum_L,
    solve_front,
    weighted_identity_error,
    weighted_problem,
)


def main() -> int:
    cases = {
        "nagumo a=0.25": (ReactionSystem.nagumo(0.25), dict(c_guess=0.3, u_minus=[1.0], u_plus=[0.0])),
        "pulse u^2-u": (ReactionSystem.kdv(), dict(c_guess=0.0, u_minus=[0.0], u_plus=[0.0], kind="pulse",
                                                   amplitude=1.5)),
        "coupled nagumo": (ReactionSystem.coupled_nagumo(0.25, 0.1),
                           dict(c_guess=0.3, u_minus=[1.0, 1.0], u_plus=[0.0, 0.0])),
    }
    dcfg = DiscretizationConfig(T_o=40, N=4000)
    for name, (sys_, kw) in cases.items():
        prof = solve_front(sys_, kw.pop("c_guess"), kw.pop("u_minus"), kw.pop("u_plus"), **kw)
        res = instability_verdict(sys_, prof, oracle=dcfg)
        ev = rough_spectrum(weighted_problem(sys_, prof), dcfg, 3)
        print(f"{name}: c={prof.c:.10f} residual={prof.residual:.1e}")
        print(f"  verdict {res.verdict}; critical points {np.round(res.critical_points, 8).tolist()}; "
              f"lower bound {res.morse_lower_bound}; index {res.morse_index.index}; "
              f"oracle {res.morse_index.oracle_crosscheck}; kernel dim {res.kernel_dim}")
        print(f"  smallest eigenvalues of the weighted operator: {np.round(ev, 6).tolist()}")
        if sys_.n == 1:
            print(f"  largest L eigenvalue {rough_spectrum_L(sys_, prof, k=1)[0]:.6f}; "
                  f"weighted identity error {weighted_identity_error(sys_, prof):.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
