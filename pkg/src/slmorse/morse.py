"""Morse index by counting conjugate points of the unstable bundle.

A conjugate point is an instant where ``E^u(τ)`` meets the Dirichlet plane,
i.e. where the position block ``W(τ)`` of any frame is singular.  Under the
Legendre condition every crossing form ``⟨B ξ, ξ⟩`` is positive, so the
Maslov index of ``E^u`` against the Dirichlet plane reduces to a count with
multiplicity, and that count equals the number of negative eigenvalues.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSolution,
    HypothesisViolation,
    NonRegularCrossing,
    NotInBundle,
    PlateauFailure,
)
from .flows import FramePath, PropagationConfig, select_truncation, unstable_path
from .indices import crossing_form_hamiltonian, locate_crossings, maslov_index
from .sturm import SturmLiouvilleProblem, hamiltonian_at, validate
from .symplectic import InertiaTriple, dirichlet_plane

__all__ = [
    "CrossingRecord",
    "MorseResult",
    "detect_conjugate_points",
    "morse_index",
    "kernel_hit_count",
    "diagnostics_table",
    "write_diagnostics_csv",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrossingRecord:
    tau: float
    multiplicity: int
    form_inertia: InertiaTriple
    width: float


@dataclass
class MorseResult:
    index: int
    crossings: list
    maslov_crosscheck: int
    oracle_crosscheck: int | None
    truncation: tuple
    plateau_verified: bool | None
    kernel_dim: int = 0
    plateau_index: int | None = None
    path: FramePath | None = field(default=None, repr=False)

    @property
    def consistent(self) -> bool:
        ok = self.maslov_crosscheck == self.index
        if self.oracle_crosscheck is not None:
            ok = ok and self.oracle_crosscheck == self.index
        return ok and self.plateau_verified is not False

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "crossings": [
                {"tau": c.tau, "multiplicity": c.multiplicity, "form_inertia": list(c.form_inertia), "width": c.width}
                for c in self.crossings
            ],
            "maslov_crosscheck": self.maslov_crosscheck,
            "oracle_crosscheck": self.oracle_crosscheck,
            "truncation": list(self.truncation),
            "plateau_verified": self.plateau_verified,
            "plateau_index": self.plateau_index,
            "kernel_dim": self.kernel_dim,
        }


def detect_conjugate_points(path: FramePath, p: SturmLiouvilleProblem | None = None,
                            cfg: PropagationConfig | None = None) -> list[CrossingRecord]:
    """Locate and certify every intersection of ``path`` with the Dirichlet plane.

    Each crossing is refined to a bracket of width ``1e-10 (T_pos - T_neg)``
    and its form ``⟨B(τ*) ξ, ξ⟩`` is evaluated on ``E^u(τ*) ∩ Λ_D``.

    Raises
    ------
    UnresolvedCluster
        If angle events and the intersection dimension disagree.
    NonRegularCrossing
        If a crossing form is degenerate or not positive.
    """
    p = p or path.problem
    D = dirichlet_plane(p.n)
    out = []
    for c in locate_crossings(path, D):
        cf = crossing_form_hamiltonian(hamiltonian_at(p, c.tau), c.frame, D, location=c.tau)
        inn = cf.inertia
        if inn.zero or inn.negative:
            raise NonRegularCrossing(c.tau, f"crossing form at tau={c.tau:.12g} has inertia {tuple(inn)}")
        out.append(CrossingRecord(c.tau, c.multiplicity, inn, c.width))
    return out


def _near_boundary(records, T, cfg):
    margin = 10 * max([r.width for r in records] + [0.0]) + cfg.sample_dt
    return any(r.tau - T[0] < margin or T[1] - r.tau < margin for r in records)


def _run(p, cfg, retries=2):
    T = select_truncation(p, cfg)
    for _ in range(retries + 1):
        path = unstable_path(p, cfg, truncation=T)
        records = detect_conjugate_points(path, p, cfg)
        if not _near_boundary(records, T, cfg):
            break
        log.info("crossing near the truncation boundary; enlarging %s", T)
        T = (1.5 * T[0], 1.5 * T[1])
    return path, records, T


def morse_index(p: SturmLiouvilleProblem, cfg: PropagationConfig | None = None, *, oracle=None,
                plateau: bool = True, strict_plateau: bool = False) -> MorseResult:
    """Number of negative eigenvalues of ``L`` from conjugate points.

    Parameters
    ----------
    oracle
        ``None`` to skip, ``True`` for the default discretization, or a
        :class:`~slmorse.oracle.DiscretizationConfig`.
    plateau
        Recompute with ``T`` doubled and ``ε_B / 100`` and compare.
    strict_plateau
        Raise :class:`PlateauFailure` instead of flagging the result.

    Raises
    ------
    HypothesisViolation
        If a limit block ``[[P, Q], [Q^T, R]]`` is not positive definite.
    """
    cfg = cfg or PropagationConfig()
    report = validate(p)
    if not report.ok:
        side = "-inf" if not report.L2_minus_ok else "+inf"
        raise HypothesisViolation(f"limit block matrix at {side} is not positive definite")
    path, records, T = _run(p, cfg)
    index = sum(r.multiplicity for r in records)
    D = dirichlet_plane(p.n)
    mas = maslov_index(path, D).index
    kdim = int(path.provenance.get("kernel_dim", 0))
    plateau_ok = plateau_index = None
    if plateau:
        _, rec2, _ = _run(p, cfg.refined())
        plateau_index = sum(r.multiplicity for r in rec2)
        plateau_ok = plateau_index == index
    ora = None
    if oracle is not None and oracle is not False:
        from .oracle import DiscretizationConfig, negative_count

        dcfg = oracle if isinstance(oracle, DiscretizationConfig) else DiscretizationConfig()
        # a known kernel is deflated: count eigenvalues strictly below a small negative threshold
        ora = negative_count(p, dcfg, dcfg.kernel_threshold if kdim else 0.0)
    res = MorseResult(index, records, mas, ora, T, plateau_ok, kdim, plateau_index, path)
    if strict_plateau and plateau_ok is False:
        exc = PlateauFailure(f"index changed under refinement: {index} -> {plateau_index}")
        exc.result = res
        raise exc
    return res


def kernel_hit_count(path: FramePath, z, *, member_tol: float = 1e-6, zero_tol: float = 1e-4) -> int:
    """Count isolated zeros of the position block of a solution path ``z``.

    ``z`` has shape ``(m, 2n)`` sampled on ``path.grid``.  Membership in the
    bundle is checked wherever ``|z| >= 1e-6 max |z|``.  A zero is an interval
    on which the linear interpolant of the position block comes within
    ``zero_tol`` (relative) of the origin, or changes sign when ``n = 1``.

    Raises
    ------
    NotInBundle
        If some sample of ``z`` leaves the span of the frame.
    DegenerateSolution
        If the position block vanishes on the whole path.
    """
    z = np.asarray(z, dtype=float)
    n = path.n
    if z.shape != (len(path.grid), 2 * n):
        raise ValueError(f"z must have shape {(len(path.grid), 2 * n)}")
    norms = np.linalg.norm(z, axis=1)
    big = norms >= 1e-6 * norms.max()
    F = path.frames[big]
    zb = z[big] / norms[big, None]
    resid = np.linalg.norm(zb - np.einsum("mij,mj->mi", F, np.einsum("mji,mj->mi", F, zb)), axis=1)
    if resid.size and resid.max() > member_tol:
        i = int(np.argmax(resid))
        raise NotInBundle(f"z leaves the bundle (residual {resid[i]:.2e} at tau={path.grid[big][i]:.6g})")
    b = z[:, n:]
    bn = np.linalg.norm(b, axis=1)
    scale = bn.max()
    if scale <= 1e-12 * max(norms.max(), 1e-300):
        raise DegenerateSolution("position block of z vanishes identically; crossings are not isolated")
    if n == 1:
        s = np.sign(b[:, 0])
        nz = np.nonzero(s)[0]
        return int(np.sum(s[nz][1:] != s[nz][:-1]))
    hits = np.zeros(len(b) - 1, dtype=bool)
    for i in range(len(b) - 1):
        d = b[i + 1] - b[i]
        dd = d @ d
        s = 0.0 if dd == 0 else float(np.clip(-(b[i] @ d) / dd, 0.0, 1.0))
        local = np.linalg.norm(z[i] + s * (z[i + 1] - z[i]))
        hits[i] = np.linalg.norm(b[i] + s * d) < zero_tol * local
    return int(np.sum(hits[1:] & ~hits[:-1]) + hits[0])


def diagnostics_table(path: FramePath, records=()) -> np.ndarray:
    """Rows ``(τ, σ_min(W), det(W), crossing_flag)`` on the path grid."""
    W = path.bottom_blocks
    smin = np.linalg.svd(W, compute_uv=False)[:, -1]
    det = np.linalg.det(W)
    flag = np.zeros(len(path.grid))
    for r in records:
        flag[int(np.argmin(np.abs(path.grid - r.tau)))] = 1
    return np.column_stack([path.grid, smin, det, flag])


def write_diagnostics_csv(fname, path: FramePath, records=()) -> None:
    rows = diagnostics_table(path, records)
    with open(fname, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "sigma_min_W", "det_W", "crossing_flag"])
        for r in rows:
            w.writerow([f"{r[0]:.10g}", f"{r[1]:.10e}", f"{r[2]:.10e}", int(r[3])])
