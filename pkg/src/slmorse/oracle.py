"""Independent negative-eigenvalue counts by finite elements and inertia.

The quadratic form

    a(v, w) = ∫ v'ᵀ P w' + v'ᵀ Q w + vᵀ Qᵀ w' + vᵀ R w

is discretized with piecewise-linear elements on a uniform mesh of
``[-T_o, T_o]`` with Dirichlet ends.  Unknowns are interleaved node by node,
so the stiffness and mass matrices are block tridiagonal with ``n x n``
blocks.  Negative eigenvalues of ``(K, M)`` below a threshold ``s`` are
counted by the inertia of ``K - s M`` (Sylvester), computed by a block
``LDLᵀ`` sweep.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import UnstableCount
from .sturm import SturmLiouvilleProblem

__all__ = [
    "DiscretizationConfig",
    "BlockTridiagonal",
    "assemble_discrete",
    "assemble_mass",
    "block_inertia",
    "banded_negative_count",
    "level_counts",
    "negative_count",
    "rough_spectrum",
]

_GX = np.array([-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)])
_GW = np.array([5 / 9, 8 / 9, 5 / 9])


@dataclass(frozen=True)
class DiscretizationConfig:
    """Mesh and counting settings.

    ``zero_margin`` flags eigenvalues that sit within that distance of the
    counting threshold; ``kernel_threshold`` is the deflated threshold used
    when a kernel is known to exist.
    """

    T_o: float = 30.0
    N: int = 3000
    richardson_levels: int = 3
    zero_margin: float = 1e-3
    kernel_threshold: float = -1e-6

    def __post_init__(self):
        if self.T_o <= 0:
            raise ValueError("T_o must be positive")
        if self.N < 1 or self.richardson_levels < 1:
            raise ValueError("N and richardson_levels must be positive")

    @property
    def h(self) -> float:
        return 2 * self.T_o / (self.N + 1)

    def level(self, k: int) -> "DiscretizationConfig":
        return DiscretizationConfig(self.T_o, self.N * 2**k, 1, self.zero_margin, self.kernel_threshold)


@dataclass(frozen=True, eq=False)
class BlockTridiagonal:
    """Symmetric block tridiagonal matrix: ``diag[i]`` and ``off[i] = A[i, i+1]``."""

    diag: np.ndarray  # (N, n, n)
    off: np.ndarray  # (N-1, n, n)

    @property
    def n(self) -> int:
        return self.diag.shape[1]

    @property
    def shape(self):
        m = self.diag.shape[0] * self.n
        return (m, m)

    def __add__(self, other):
        return BlockTridiagonal(self.diag + other.diag, self.off + other.off)

    def __rmul__(self, s):
        return BlockTridiagonal(s * self.diag, s * self.off)

    def __sub__(self, other):
        return self + (-1.0) * other

    def tosparse(self) -> sp.csr_matrix:
        N, n = self.diag.shape[0], self.n
        r, c = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        base = np.arange(N)[:, None, None] * n
        up = base[:-1]
        # diagonal blocks, upper blocks A[i, i+1], and their transposes
        rows = np.concatenate([(base + r).ravel(), (up + r).ravel(), (up + n + c).ravel()])
        cols = np.concatenate([(base + c).ravel(), (up + n + c).ravel(), (up + r).ravel()])
        vals = np.concatenate([self.diag.ravel(), self.off.ravel(), self.off.ravel()])
        return sp.csr_matrix((vals, (rows, cols)), shape=self.shape)

    def todense(self) -> np.ndarray:
        return self.tosparse().toarray()

    def banded_lower(self) -> np.ndarray:
        """LAPACK lower band storage ``ab[d, j] = A[j + d, j]``."""
        N, n = self.diag.shape[0], self.n
        m = N * n
        ab = np.zeros((2 * n, m))
        for r in range(n):
            for c in range(r + 1):
                ab[r - c, np.arange(N) * n + c] = self.diag[:, r, c]
        for r in range(n):
            for c in range(n):
                ab[n + r - c, np.arange(N - 1) * n + c] = self.off[:, c, r]
        return ab


def _nodes(cfg: DiscretizationConfig):
    h = cfg.h
    x = -cfg.T_o + h * np.arange(cfg.N + 2)
    return x, h


def _element_blocks(p: SturmLiouvilleProblem, cfg: DiscretizationConfig, mass: bool = False):
    x, h = _nodes(cfg)
    left = x[:-1]
    q = left[:, None] + 0.5 * h * (1.0 + _GX)[None, :]  # (E, 3)
    phi_a = 0.5 * (1.0 - _GX)
    phi_b = 0.5 * (1.0 + _GX)
    w = 0.5 * h * _GW
    n = p.n
    if mass:
        R = np.broadcast_to(np.eye(n), q.shape + (n, n))
        P = Q = np.zeros_like(R)
    else:
        P, Q, R = p.P.evaluate(q), p.Q.evaluate(q), p.R.evaluate(q)
    Qt = np.swapaxes(Q, -1, -2)
    d = np.array([-1.0 / h, 1.0 / h])
    phi = np.stack([phi_a, phi_b])  # (2, 3)
    loc = {}
    for a in range(2):
        for b in range(2):
            integrand = (d[a] * d[b]) * P + (d[a] * phi[b])[None, :, None, None] * Q \
                + (phi[a] * d[b])[None, :, None, None] * Qt + (phi[a] * phi[b])[None, :, None, None] * R
            loc[a, b] = np.einsum("q,eqij->eij", w, integrand)
    return loc


def _assemble(loc) -> BlockTridiagonal:
    # element k joins nodes k (local a) and k+1 (local b); drop boundary nodes
    diag = loc[1, 1][:-1] + loc[0, 0][1:]
    off = loc[0, 1][1:-1]
    return BlockTridiagonal(diag, off)


def assemble_discrete(p: SturmLiouvilleProblem, cfg: DiscretizationConfig | None = None) -> BlockTridiagonal:
    """Stiffness matrix of the form ``a`` (block tridiagonal, exactly symmetric)."""
    cfg = cfg or DiscretizationConfig()
    loc = _element_blocks(p, cfg)
    loc[0, 0] = 0.5 * (loc[0, 0] + np.swapaxes(loc[0, 0], 1, 2))
    loc[1, 1] = 0.5 * (loc[1, 1] + np.swapaxes(loc[1, 1], 1, 2))
    loc[0, 1] = 0.5 * (loc[0, 1] + np.swapaxes(loc[1, 0], 1, 2))
    return _assemble(loc)


def assemble_mass(p: SturmLiouvilleProblem, cfg: DiscretizationConfig | None = None) -> BlockTridiagonal:
    cfg = cfg or DiscretizationConfig()
    return _assemble(_element_blocks(p, cfg, mass=True))


def block_inertia(A: BlockTridiagonal) -> tuple[int, int, int]:
    """Inertia ``(positive, zero, negative)`` by a block ``LDLᵀ`` sweep.

    Schur complements ``S_i = D_i - E_{i-1}ᵀ S_{i-1}⁻¹ E_{i-1}`` carry the
    inertia (Haynsworth additivity).  Pivots smaller than ``pivmin`` are
    replaced by ``-pivmin``, the convention of LAPACK's bisection counts, so
    the result is the number of eigenvalues below a tiny positive shift.
    """
    D, E = A.diag, A.off
    N, n = D.shape[0], A.n
    pivmin = np.finfo(float).tiny ** 0.5 * max(1.0, float(np.max(np.abs(D))))
    neg = 0
    if n == 1:
        d = D[:, 0, 0].tolist()
        e = E[:, 0, 0].tolist()
        s = d[0]
        for i in range(N):
            if i:
                s = d[i] - e[i - 1] * e[i - 1] / s
            if abs(s) < pivmin:
                s = -pivmin
            if s < 0:
                neg += 1
        return N - neg, 0, neg
    if n == 2:
        d = D.reshape(N, 4).tolist()
        e = E.reshape(max(N - 1, 0), 4).tolist()
        a, b, c = d[0][0], d[0][1], d[0][3]
        for i in range(N):
            if i:
                # S = D_i - Eᵀ S⁻¹ E with S⁻¹ = [[c, -b], [-b, a]] / det
                e00, e01, e10, e11 = e[i - 1]
                det = a * c - b * b
                u00 = (c * e00 - b * e10) / det
                u01 = (c * e01 - b * e11) / det
                u10 = (a * e10 - b * e00) / det
                u11 = (a * e11 - b * e01) / det
                di = d[i]
                a = di[0] - (e00 * u00 + e10 * u10)
                b = 0.5 * (di[1] + di[2]) - 0.5 * (e00 * u01 + e10 * u11 + e01 * u00 + e11 * u10)
                c = di[3] - (e01 * u01 + e11 * u11)
            tr, det = a + c, a * c - b * b
            disc = np.sqrt(max(0.25 * (a - c) ** 2 + b * b, 0.0))
            l1, l2 = 0.5 * tr - disc, 0.5 * tr + disc
            if abs(l1) < pivmin or abs(l2) < pivmin:
                a, c = a - pivmin, c - pivmin
                l1, l2 = l1 - pivmin, l2 - pivmin
            neg += int(l1 < 0) + int(l2 < 0)
        return N * n - neg, 0, neg
    S = D[0].copy()
    for i in range(N):
        if i:
            S = D[i] - E[i - 1].T @ np.linalg.solve(S, E[i - 1])
            S = 0.5 * (S + S.T)
        ev, V = np.linalg.eigh(S)
        small = np.abs(ev) < pivmin
        if small.any():
            ev[small] = -pivmin
            S = (V * ev) @ V.T
        neg += int(np.sum(ev < 0))
    return N * n - neg, 0, neg


def banded_negative_count(A: BlockTridiagonal, threshold: float = 0.0) -> int:
    """Count of eigenvalues below ``threshold`` via LAPACK banded bisection (cross-check)."""
    ev = sla.eigvals_banded(A.banded_lower(), lower=True, select="v", select_range=(-np.inf, threshold))
    return int(ev.size)


def _count(p, cfg, threshold):
    K = assemble_discrete(p, cfg)
    if threshold != 0.0:
        K = K - threshold * assemble_mass(p, cfg)
    return block_inertia(K)[2]


def level_counts(p: SturmLiouvilleProblem, cfg: DiscretizationConfig | None = None, threshold: float = 0.0) -> list[int]:
    """Counts of generalized eigenvalues below ``threshold`` at each refinement level."""
    cfg = cfg or DiscretizationConfig()
    return [_count(p, cfg.level(k), threshold) for k in range(cfg.richardson_levels)]


def negative_count(p: SturmLiouvilleProblem, cfg: DiscretizationConfig | None = None, threshold: float = 0.0) -> int:
    """Number of eigenvalues below ``threshold`` (default: the Morse index).

    Raises
    ------
    UnstableCount
        If the refinement levels disagree, or (for ``threshold = 0``) an
        eigenvalue lies within ``zero_margin`` of zero on the finest level.
    """
    cfg = cfg or DiscretizationConfig()
    if cfg.N < 100:
        raise ValueError("counting requires N >= 100")
    counts = level_counts(p, cfg, threshold)
    if len(set(counts)) != 1:
        raise UnstableCount(counts, f"inertia changes under refinement: {counts}")
    if threshold == 0.0 and cfg.zero_margin > 0:
        fine = cfg.level(cfg.richardson_levels - 1)
        lo, hi = _count(p, fine, -cfg.zero_margin), _count(p, fine, cfg.zero_margin)
        if lo != hi:
            raise UnstableCount(counts, f"{hi - lo} eigenvalue(s) within {cfg.zero_margin:g} of zero")
    return counts[0]


def rough_spectrum(p: SturmLiouvilleProblem, cfg: DiscretizationConfig | None = None, k: int = 6) -> np.ndarray:
    """The ``k`` smallest generalized eigenvalues of ``(K, M)``; error ``O(h²)``."""
    cfg = cfg or DiscretizationConfig()
    if not 1 <= k <= 20:
        raise ValueError("k must lie in 1..20")
    K = assemble_discrete(p, cfg)
    M = assemble_mass(p, cfg)
    m = K.shape[0]
    if m <= 400:
        return sla.eigh(K.todense(), M.todense(), eigvals_only=True)[:k]
    # the form is bounded below by -(C2²/C1 + C3) times the mass
    x, _ = _nodes(cfg)
    C1 = float(np.min(np.linalg.eigvalsh(p.P.evaluate(x))))
    C2 = float(np.max(np.linalg.norm(p.Q.evaluate(x), 2, axis=(-2, -1))))
    C3 = float(np.max(np.linalg.norm(p.R.evaluate(x), 2, axis=(-2, -1))))
    sigma = -(2 * C2**2 / C1 + C3) - 1.0
    Ks, Ms = K.tosparse(), M.tosparse()
    vals = spla.eigsh(Ks, k=k, M=Ms, sigma=sigma, which="LM", return_eigenvectors=False)
    return np.sort(vals)
