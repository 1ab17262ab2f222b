"""Symplectic conventions and Lagrangian-subspace primitives.

State vectors are ordered ``z = (y, w)`` with the momentum ``y = P w' + Q w``
first and the position ``w`` second.  With this ordering the Dirichlet plane
``{(u, 0)}`` is the set of states whose position vanishes, and the structure
matrix is

    J = [[0, -I],
         [I,  0]],        omega(z1, z2) = <J z1, z2>.

Every routine accepts either a :class:`LagrangianFrame` or a bare ``(2n, k)``
array; subspaces are compared by their column spans only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NotIsotropic, RankDeficient

__all__ = [
    "SymplecticConvention",
    "LagrangianFrame",
    "InertiaTriple",
    "QuadraticForm",
    "standard_J",
    "omega",
    "frame_from_columns",
    "orthonormalize",
    "isotropy_residual",
    "subspace_intersection",
    "intersection_dim",
    "gap_distance",
    "inertia",
    "dirichlet_plane",
    "lagrangian_projection",
    "complex_frame",
]


@lru_cache(maxsize=None)
def _J_cached(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    J.setflags(write=False)
    return J


def standard_J(n: int) -> np.ndarray:
    """The ``2n x 2n`` structure matrix ``[[0, -I], [I, 0]]`` (read-only)."""
    if n < 1:
        raise ValueError("n must be positive")
    return _J_cached(int(n))


def omega(z1, z2) -> float | np.ndarray:
    """Symplectic form ``<J z1, z2>``; for matrices returns ``z1^T J^T z2``."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    n = z1.shape[0] // 2
    return (standard_J(n) @ z1).T @ z2


@dataclass(frozen=True)
class SymplecticConvention:
    n: int

    def __post_init__(self):
        J = self.J
        if not (np.allclose(J @ J, -np.eye(2 * self.n)) and np.allclose(J.T, -J)):
            raise AssertionError("structure matrix violates J^2 = -I or J^T = -J")

    @property
    def J(self) -> np.ndarray:
        return standard_J(self.n)

    def omega(self, z1, z2):
        return omega(z1, z2)


def _cols(F) -> np.ndarray:
    A = F.columns if isinstance(F, LagrangianFrame) else np.asarray(F, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    return A


def isotropy_residual(F) -> float:
    """``||Z^T J Z|| / ||Z||^2`` (spectral norms)."""
    Z = _cols(F)
    n = Z.shape[0] // 2
    scale = np.linalg.norm(Z, 2) ** 2
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(Z.T @ standard_J(n) @ Z, 2) / scale)


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """A ``2n x n`` column frame spanning a Lagrangian subspace.

    Construct through :func:`frame_from_columns` to get validation; the raw
    constructor trusts its input.
    """

    columns: np.ndarray
    tol_iso: float = 1e-8

    @property
    def n(self) -> int:
        return self.columns.shape[0] // 2

    @property
    def top(self) -> np.ndarray:
        """Momentum block (first ``n`` rows)."""
        return self.columns[: self.n]

    @property
    def bottom(self) -> np.ndarray:
        """Position block (last ``n`` rows); singular exactly at Dirichlet crossings."""
        return self.columns[self.n :]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.columns, dtype=dtype)


def frame_from_columns(M, tol: float = 1e-8) -> LagrangianFrame:
    """Validate ``M`` as a Lagrangian frame.

    Raises
    ------
    RankDeficient
        If ``sigma_min / sigma_max <= tol``.
    NotIsotropic
        If ``||M^T J M|| > tol ||M||^2``.
    """
    M = np.array(_cols(M), dtype=float)
    if M.shape[0] % 2 or M.shape[1] != M.shape[0] // 2:
        raise DimensionMismatch(f"expected a 2n x n matrix, got {M.shape}")
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0 or s[-1] / s[0] <= tol:
        raise RankDeficient(f"frame columns are rank deficient (sigma ratio {s[-1] / max(s[0], 1e-300):.3e})")
    res = isotropy_residual(M)
    if res > tol:
        raise NotIsotropic(f"isotropy residual {res:.3e} exceeds {tol:.1e}")
    M.setflags(write=False)
    return LagrangianFrame(M, tol)


def _orth(A: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(A)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def orthonormalize(F) -> LagrangianFrame:
    """Thin-QR orthonormal frame with the same span (positive-diagonal R)."""
    Q = _orth(_cols(F))
    Q.setflags(write=False)
    tol = F.tol_iso if isinstance(F, LagrangianFrame) else 1e-8
    return LagrangianFrame(Q, tol)


def _orth_basis(A: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of range(A) tolerant of rank deficiency."""
    if A.shape[1] == 0:
        return A
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return A[:, :0]
    r = int(np.sum(s > rtol * s[0]))
    return U[:, :r]


def subspace_intersection(A, B, tol: float = 1e-7) -> np.ndarray:
    """Orthonormal basis of ``span A ∩ span B``.

    Directions of ``span A`` whose distance to ``span B`` (sine of the principal
    angle) falls below ``tol`` are returned.
    """
    QA = _orth_basis(_cols(A))
    QB = _orth_basis(_cols(B))
    if QA.shape[0] != QB.shape[0]:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    if QA.shape[1] == 0 or QB.shape[1] == 0:
        return QA[:, :0]
    resid = QA - QB @ (QB.T @ QA)
    _, s, Vt = np.linalg.svd(resid, full_matrices=True)
    s_full = np.zeros(QA.shape[1])
    s_full[: s.size] = s
    keep = s_full < tol
    if not keep.any():
        return QA[:, :0]
    return _orth(QA @ Vt.T[:, keep])


def intersection_dim(A, B, tol: float = 1e-7) -> int:
    """``dim(span A ∩ span B)`` counted by principal-angle sines below ``tol``."""
    return subspace_intersection(A, B, tol).shape[1]


def gap_distance(A, B) -> float:
    """Spectral norm of the difference of orthogonal projectors."""
    QA = _orth_basis(_cols(A))
    QB = _orth_basis(_cols(B))
    if QA.shape[0] != QB.shape[0]:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    D = QA @ QA.T - QB @ QB.T
    return float(min(1.0, np.linalg.norm(D, 2)))


@dataclass(frozen=True)
class InertiaTriple:
    positive: int
    zero: int
    negative: int

    @property
    def dim(self) -> int:
        return self.positive + self.zero + self.negative

    @property
    def signature(self) -> int:
        return self.positive - self.negative

    def __iter__(self):
        return iter((self.positive, self.zero, self.negative))


def inertia(S, tol: float = 1e-10, atol: float = 0.0) -> InertiaTriple:
    """Count eigenvalues above, within and below ``±max(tol * ||S||, atol)``."""
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return InertiaTriple(0, 0, 0)
    S = 0.5 * (S + S.T)
    ev = np.linalg.eigvalsh(S)
    scale = np.max(np.abs(ev))
    thr = max(tol * scale, atol)
    pos = int(np.sum(ev > thr))
    neg = int(np.sum(ev < -thr))
    return InertiaTriple(pos, S.shape[0] - pos - neg, neg)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """A symmetric bilinear form restricted to ``span(basis)``."""

    basis: np.ndarray
    gram: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        if g.shape[0] != g.shape[1]:
            raise DimensionMismatch("gram matrix must be square")
        if g.size and np.max(np.abs(g - g.T)) > 1e-12 * max(np.max(np.abs(g)), 1.0):
            raise ValueError("gram matrix is not symmetric")

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def inertia(self, tol: float = 1e-10, atol: float = 0.0) -> InertiaTriple:
        return inertia(self.gram, tol, atol)


def dirichlet_plane(n: int) -> LagrangianFrame:
    """``{(u, 0)}``: identity on the momentum block, zero position block."""
    Z = np.zeros((2 * n, n))
    Z[:n] = np.eye(n)
    Z.setflags(write=False)
    return LagrangianFrame(Z)


def complex_frame(F) -> np.ndarray:
    """``X + iY`` for an orthonormal frame ``(X; Y)``; unitary iff Lagrangian."""
    Z = _cols(F)
    n = Z.shape[0] // 2
    return Z[:n] + 1j * Z[n:]


def lagrangian_projection(F) -> np.ndarray:
    """Nearest orthonormal Lagrangian frame, via the polar factor of ``X + iY``.

    Used to repair interpolated frames, which are only approximately isotropic.
    """
    Z = _cols(F)
    n = Z.shape[0] // 2
    U, _ = sla.polar(complex_frame(Z))
    return np.vstack([U.real, U.imag]).reshape(2 * n, n)
