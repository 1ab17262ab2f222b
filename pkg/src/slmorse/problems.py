"""Problem generators with known or checkable Morse indices."""
from __future__ import annotations

import numpy as np

from .sturm import (
    CompactBump,
    Constant,
    DirectSum,
    Rotated,
    Sech2Well,
    SturmLiouvilleProblem,
)

__all__ = [
    "poschl_teller",
    "poschl_teller_index",
    "constant_problem",
    "direct_sum",
    "random_problem",
]


def poschl_teller(m: int, kappa: float, rate: float = 1.0, shift: float = 0.0) -> SturmLiouvilleProblem:
    """``-w'' + (κ - m(m+1) b² sech²(b(t - s))) w``."""
    R = Sech2Well(kappa, m * (m + 1) * rate**2, rate, shift)
    return SturmLiouvilleProblem(Constant(1.0), Constant(0.0), R, name=f"poschl-teller m={m} kappa={kappa:g}")


def poschl_teller_index(m: int, kappa: float, rate: float = 1.0) -> int:
    """Bound states of the reflectionless well sit at ``κ - k² b²``, ``k = 1..m``."""
    return sum(1 for k in range(1, m + 1) if (k * rate) ** 2 > kappa)


def constant_problem(r: float, n: int = 1) -> SturmLiouvilleProblem:
    return SturmLiouvilleProblem(Constant(np.eye(n)), Constant(np.zeros((n, n))), Constant(r * np.eye(n)),
                                 name=f"constant r={r:g}")


def direct_sum(p1: SturmLiouvilleProblem, p2: SturmLiouvilleProblem) -> SturmLiouvilleProblem:
    """Block-diagonal problem ``p1 ⊕ p2``; its spectrum is the union of both."""
    return SturmLiouvilleProblem(DirectSum([p1.P, p2.P]), DirectSum([p1.Q, p2.Q]), DirectSum([p1.R, p2.R]),
                                 name=f"({p1.name}) + ({p2.name})")


def _pt_block(rng, kappa_lo=0.2):
    m = int(rng.integers(1, 4))
    b = float(rng.uniform(0.6, 1.4))
    # keep κ away from the thresholds k² b² so the index is robust
    while True:
        kappa = float(rng.uniform(kappa_lo, (m * b) ** 2 + 1.0))
        if min(abs(kappa - (k * b) ** 2) for k in range(1, m + 1)) > 0.15:
            break
    return Sech2Well(kappa, m * (m + 1) * b**2, b, float(rng.uniform(-1.0, 1.0)))


def _spd(rng, n, lo=0.6, hi=1.8):
    Qm, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Qm * rng.uniform(lo, hi, n)) @ Qm.T


def random_problem(rng: np.random.Generator, n: int) -> SturmLiouvilleProblem:
    """A random problem satisfying the asymptotic hypotheses.

    ``R`` is a Pöschl–Teller well (``n = 1``) or a smoothly rotated direct sum
    of two wells (``n = 2``); ``P`` is constant positive definite and ``Q`` a
    C² bump of compact support, so ``Q(±∞) = 0`` and ``R(±∞) > 0``.
    """
    if n == 1:
        R = _pt_block(rng)
        P = Constant(float(rng.uniform(0.6, 1.8)))
    elif n == 2:
        inner = DirectSum([_pt_block(rng), _pt_block(rng)])
        R = Rotated(inner, float(rng.uniform(0, np.pi)), float(rng.uniform(-0.8, 0.8)), float(rng.uniform(0.5, 1.5)))
        P = Constant(_spd(rng, 2))
    else:
        raise ValueError("random problems are generated for n = 1 or 2")
    Qm = rng.uniform(-0.5, 0.5, (n, n))
    Q = CompactBump(Qm, float(rng.uniform(1.0, 3.0)), float(rng.uniform(-1.0, 1.0)))
    return SturmLiouvilleProblem(P, Q, R, name=f"random n={n}")
