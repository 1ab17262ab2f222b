"""Sturm–Liouville problems, their Hamiltonian form and asymptotic splitting.

The operator is ``L w = -(P w' + Q w)' + Q^T w' + R w`` on the line.  Writing
``y = P w' + Q w`` turns ``L w = 0`` into ``z' = J B(t) z`` for ``z = (y, w)``
with

    B = [[ P^-1,        -P^-1 Q           ],
         [ -Q^T P^-1,   Q^T P^-1 Q - R    ]].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import CubicSpline

from .errors import NotHyperbolic, ProblemFileError, SingularP
from .symplectic import (
    InertiaTriple,
    LagrangianFrame,
    dirichlet_plane,
    frame_from_columns,
    inertia,
    intersection_dim,
    standard_J,
)

__all__ = [
    "Coefficient",
    "Constant",
    "Sech2Well",
    "TanhInterpolant",
    "GaussianBump",
    "CompactBump",
    "DirectSum",
    "Rotated",
    "Sum",
    "Tabulated",
    "coefficient_from_dict",
    "SturmLiouvilleProblem",
    "AsymptoticData",
    "ValidationReport",
    "hamiltonian_at",
    "hamiltonian_many",
    "hyperbolic_split",
    "validate",
    "problem_from_dict",
    "load_problem",
]


# --------------------------------------------------------------------------
# coefficient paths


class Coefficient:
    """A matrix-valued function of ``t`` with finite limits at ``±∞``.

    Subclasses implement :meth:`evaluate` for arrays of times, returning shape
    ``t.shape + (n, n)``.
    """

    n: int = 1

    def evaluate(self, t) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate(np.asarray([t], dtype=float))[0]

    @property
    def limit_minus(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def limit_plus(self) -> np.ndarray:
        raise NotImplementedError

    #: finite interval outside which the value equals its limit, if any
    support: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        raise NotImplementedError


def _scalar_eye(values: np.ndarray, n: int) -> np.ndarray:
    return values[..., None, None] * np.eye(n)


@dataclass(frozen=True, eq=False)
class Constant(Coefficient):
    value: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.value, dtype=float))
        object.__setattr__(self, "value", v)

    @property
    def n(self):
        return self.value.shape[0]

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.value, t.shape + self.value.shape).copy()

    @property
    def limit_minus(self):
        return self.value

    @property
    def limit_plus(self):
        return self.value

    def to_dict(self):
        return {"kind": "preset", "name": "constant", "params": self.value.ravel().tolist(), "n": self.n}


@dataclass(frozen=True, eq=False)
class Sech2Well(Coefficient):
    """``(κ − a sech²(b (t − s))) I_n``."""

    kappa: float
    amplitude: float
    rate: float = 1.0
    shift: float = 0.0
    n: int = 1

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        e = np.exp(-2.0 * np.abs(self.rate * (t - self.shift)))
        v = self.kappa - self.amplitude * 4.0 * e / (1.0 + e) ** 2
        return _scalar_eye(v, self.n)

    @property
    def limit_minus(self):
        return self.kappa * np.eye(self.n)

    limit_plus = limit_minus

    def to_dict(self):
        return {"kind": "preset", "name": "sech2", "params": [self.kappa, self.amplitude, self.rate, self.shift], "n": self.n}


@dataclass(frozen=True, eq=False)
class TanhInterpolant(Coefficient):
    """``(lo + (hi − lo)(1 + tanh(b (t − s)))/2) I_n``."""

    lo: float
    hi: float
    rate: float = 1.0
    shift: float = 0.0
    n: int = 1

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        v = self.lo + 0.5 * (self.hi - self.lo) * (1.0 + np.tanh(self.rate * (t - self.shift)))
        return _scalar_eye(v, self.n)

    @property
    def limit_minus(self):
        return (self.lo if self.rate > 0 else self.hi) * np.eye(self.n)

    @property
    def limit_plus(self):
        return (self.hi if self.rate > 0 else self.lo) * np.eye(self.n)

    def to_dict(self):
        return {"kind": "preset", "name": "tanh", "params": [self.lo, self.hi, self.rate, self.shift], "n": self.n}


@dataclass(frozen=True, eq=False)
class GaussianBump(Coefficient):
    """``(base + amp exp(−((t − c)/w)²)) I_n``."""

    base: float
    amp: float
    center: float = 0.0
    width: float = 1.0
    n: int = 1

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        v = self.base + self.amp * np.exp(-(((t - self.center) / self.width) ** 2))
        return _scalar_eye(v, self.n)

    @property
    def limit_minus(self):
        return self.base * np.eye(self.n)

    limit_plus = limit_minus

    def to_dict(self):
        return {"kind": "preset", "name": "gaussian", "params": [self.base, self.amp, self.center, self.width], "n": self.n}


@dataclass(frozen=True, eq=False)
class CompactBump(Coefficient):
    """``M (1 − ((t − c)/w)²)³`` on ``|t − c| < w`` and zero elsewhere (C²)."""

    matrix: np.ndarray
    half_width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.atleast_2d(np.asarray(self.matrix, dtype=float)))

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def support(self):
        return (self.center - self.half_width, self.center + self.half_width)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        s = (t - self.center) / self.half_width
        v = np.where(np.abs(s) < 1.0, (1.0 - s**2) ** 3, 0.0)
        return v[..., None, None] * self.matrix

    @property
    def limit_minus(self):
        return np.zeros_like(self.matrix)

    limit_plus = limit_minus

    def to_dict(self):
        return {"kind": "preset", "name": "bump", "params": [self.half_width, self.center, *self.matrix.ravel().tolist()],
                "n": self.n}


@dataclass(frozen=True, eq=False)
class DirectSum(Coefficient):
    """Block-diagonal combination of coefficient paths."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def n(self):
        return sum(b.n for b in self.blocks)

    def _assemble(self, mats):
        lead = mats[0].shape[:-2]
        out = np.zeros(lead + (self.n, self.n))
        i = 0
        for b, M in zip(self.blocks, mats):
            out[..., i : i + b.n, i : i + b.n] = M
            i += b.n
        return out

    def evaluate(self, t):
        return self._assemble([b.evaluate(t) for b in self.blocks])

    @property
    def limit_minus(self):
        return self._assemble([b.limit_minus for b in self.blocks])

    @property
    def limit_plus(self):
        return self._assemble([b.limit_plus for b in self.blocks])

    def to_dict(self):
        return {"kind": "direct_sum", "blocks": [b.to_dict() for b in self.blocks]}


@dataclass(frozen=True, eq=False)
class Sum(Coefficient):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def n(self):
        return self.terms[0].n

    def evaluate(self, t):
        return sum(c.evaluate(t) for c in self.terms)

    @property
    def limit_minus(self):
        return sum(c.limit_minus for c in self.terms)

    @property
    def limit_plus(self):
        return sum(c.limit_plus for c in self.terms)

    def to_dict(self):
        return {"kind": "sum", "terms": [c.to_dict() for c in self.terms]}


@dataclass(frozen=True, eq=False)
class Rotated(Coefficient):
    """``O(θ(t)) M(t) O(θ(t))^T`` for a 2x2 path, ``θ(t) = θ0 + θ1 tanh(b t)``."""

    inner: Coefficient
    theta0: float
    theta1: float
    rate: float = 1.0

    @property
    def n(self):
        return 2

    def _rot(self, th):
        c, s = np.cos(th), np.sin(th)
        O = np.empty(np.shape(th) + (2, 2))
        O[..., 0, 0], O[..., 0, 1], O[..., 1, 0], O[..., 1, 1] = c, -s, s, c
        return O

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        O = self._rot(self.theta0 + self.theta1 * np.tanh(self.rate * t))
        return O @ self.inner.evaluate(t) @ np.swapaxes(O, -1, -2)

    @property
    def limit_minus(self):
        O = self._rot(self.theta0 - self.theta1 * np.sign(self.rate))
        return O @ self.inner.limit_minus @ O.T

    @property
    def limit_plus(self):
        O = self._rot(self.theta0 + self.theta1 * np.sign(self.rate))
        return O @ self.inner.limit_plus @ O.T

    def to_dict(self):
        return {"kind": "rotated", "inner": self.inner.to_dict(), "params": [self.theta0, self.theta1, self.rate]}


class Tabulated(Coefficient):
    """Cubic interpolation of matrix samples; snaps to the declared limits outside the table."""

    def __init__(self, grid, values, limit_minus, limit_plus):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None, None]
        if grid.ndim != 1 or grid.size < 4 or np.any(np.diff(grid) <= 0):
            raise ValueError("table grid must be strictly increasing with at least 4 points")
        self.grid = grid
        self.values = values
        self._n = values.shape[1]
        self._lm = np.atleast_2d(np.asarray(limit_minus, dtype=float)) * (np.eye(self._n) if np.ndim(limit_minus) == 0 else 1)
        self._lp = np.atleast_2d(np.asarray(limit_plus, dtype=float)) * (np.eye(self._n) if np.ndim(limit_plus) == 0 else 1)
        self._spline = CubicSpline(grid, values, axis=0)

    @property
    def n(self):
        return self._n

    @property
    def support(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    @property
    def limit_minus(self):
        return self._lm

    @property
    def limit_plus(self):
        return self._lp

    def edge_mismatch(self) -> float:
        return float(max(np.max(np.abs(self.values[0] - self._lm)), np.max(np.abs(self.values[-1] - self._lp))))

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = self._spline(np.clip(t, self.grid[0], self.grid[-1]))
        out = np.where((t < self.grid[0])[..., None, None], self._lm, out)
        out = np.where((t > self.grid[-1])[..., None, None], self._lp, out)
        return out

    def to_dict(self):
        return {
            "kind": "tabulated",
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "limit_minus": self._lm.tolist(),
            "limit_plus": self._lp.tolist(),
        }


def _square(params, n):
    params = [float(x) for x in params]
    if len(params) == 1:
        return params[0] * np.eye(n or 1)
    k = int(round(np.sqrt(len(params))))
    if k * k != len(params):
        raise ProblemFileError(f"cannot reshape {len(params)} values into a square matrix")
    return np.array(params).reshape(k, k)


def coefficient_from_dict(d: dict, n: int | None = None) -> Coefficient:
    """Build a coefficient path from its JSON description."""
    try:
        kind = d["kind"]
        nn = int(d.get("n", n or 1))
        if kind == "preset":
            name, params = d["name"], list(d.get("params", []))
            if name == "constant":
                return Constant(_square(params, nn))
            if name == "sech2":
                return Sech2Well(*map(float, params), n=nn)
            if name == "tanh":
                return TanhInterpolant(*map(float, params), n=nn)
            if name == "gaussian":
                return GaussianBump(*map(float, params), n=nn)
            if name == "bump":
                return CompactBump(_square(params[2:], nn), float(params[0]), float(params[1]))
            raise ProblemFileError(f"unknown preset {name!r}")
        if kind == "direct_sum":
            return DirectSum([coefficient_from_dict(b, 1) for b in d["blocks"]])
        if kind == "sum":
            return Sum([coefficient_from_dict(b, n) for b in d["terms"]])
        if kind == "rotated":
            return Rotated(coefficient_from_dict(d["inner"], 2), *map(float, d["params"]))
        if kind == "tabulated":
            return Tabulated(d["grid"], d["values"], d["limit_minus"], d["limit_plus"])
    except ProblemFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError(f"malformed coefficient {d!r}: {exc}") from exc
    raise ProblemFileError(f"unknown coefficient kind {kind!r}")


# --------------------------------------------------------------------------
# problem and asymptotics


@dataclass(frozen=True, eq=False)
class AsymptoticData:
    B_minus: np.ndarray
    B_plus: np.ndarray
    Vp_minus: LagrangianFrame  # unstable subspace of J B(-inf)
    Vm_minus: LagrangianFrame
    Vp_plus: LagrangianFrame
    Vm_plus: LagrangianFrame  # stable subspace of J B(+inf)
    gap_minus: float
    gap_plus: float

    @property
    def spectral_gap(self) -> float:
        return min(self.gap_minus, self.gap_plus)


@dataclass(frozen=True, eq=False)
class SturmLiouvilleProblem:
    """``L w = -(P w' + Q w)' + Q^T w' + R w`` with coefficient paths ``P, Q, R``."""

    P: Coefficient
    Q: Coefficient
    R: Coefficient
    name: str = ""

    def __post_init__(self):
        if not (self.P.n == self.Q.n == self.R.n):
            raise ValueError("P, Q and R must have the same size")

    @property
    def n(self) -> int:
        return self.P.n

    @cached_property
    def asymptotics(self) -> AsymptoticData:
        n = self.n
        J = standard_J(n)
        Bm = _hamiltonian(self.P.limit_minus, self.Q.limit_minus, self.R.limit_minus)
        Bp = _hamiltonian(self.P.limit_plus, self.Q.limit_plus, self.R.limit_plus)
        vpm, vmm, gm = hyperbolic_split(J @ Bm)
        vpp, vmp, gp = hyperbolic_split(J @ Bp)
        return AsymptoticData(Bm, Bp, vpm, vmm, vpp, vmp, gm, gp)

    @property
    def support(self) -> tuple[float, float] | None:
        """Smallest interval containing every tabulated table, if any."""
        sup = [c.support for c in _leaves(self) if isinstance(c, Tabulated)]
        if not sup:
            return None
        return (min(s[0] for s in sup), max(s[1] for s in sup))

    def to_dict(self) -> dict:
        return {"n": self.n, "name": self.name, "P": self.P.to_dict(), "Q": self.Q.to_dict(), "R": self.R.to_dict()}


def _leaves(p: SturmLiouvilleProblem):
    stack = [p.P, p.Q, p.R]
    while stack:
        c = stack.pop()
        yield c
        if isinstance(c, DirectSum):
            stack.extend(c.blocks)
        elif isinstance(c, Sum):
            stack.extend(c.terms)
        elif isinstance(c, Rotated):
            stack.append(c.inner)


def _hamiltonian(P, Q, R) -> np.ndarray:
    """Batched assembly; leading axes of P, Q, R broadcast."""
    Pinv = np.linalg.inv(P)
    Qt = np.swapaxes(Q, -1, -2)
    PiQ = Pinv @ Q
    top = np.concatenate([Pinv, -PiQ], axis=-1)
    bot = np.concatenate([-Qt @ Pinv, Qt @ PiQ - R], axis=-1)
    B = np.concatenate([top, bot], axis=-2)
    return 0.5 * (B + np.swapaxes(B, -1, -2))


def hamiltonian_at(p: SturmLiouvilleProblem, t: float) -> np.ndarray:
    """``B(t)`` for the Hamiltonian system ``z' = J B(t) z``.

    Raises
    ------
    SingularP
        If ``sigma_min(P(t)) < 1e-12 sigma_max(P(t))``.
    """
    P = p.P(t)
    s = np.linalg.svd(P, compute_uv=False)
    if s[0] == 0.0 or s[-1] < 1e-12 * s[0]:
        raise SingularP(f"P({t}) is numerically singular")
    return _hamiltonian(P, p.Q(t), p.R(t))


def hamiltonian_many(p: SturmLiouvilleProblem, ts) -> np.ndarray:
    """Vectorized ``B`` at an array of times (no singularity check)."""
    ts = np.asarray(ts, dtype=float)
    return _hamiltonian(p.P.evaluate(ts), p.Q.evaluate(ts), p.R.evaluate(ts))


def hyperbolic_split(M, tol: float = 1e-8) -> tuple[LagrangianFrame, LagrangianFrame, float]:
    """Invariant subspaces of ``M`` for eigenvalues right and left of the imaginary axis.

    Uses ordered real Schur forms.  Returns ``(V_plus, V_minus, gap)`` where
    ``gap`` is the smallest ``|Re λ|``.

    Raises
    ------
    NotHyperbolic
        If some eigenvalue has ``|Re λ| <= tol * ||M||`` or the split is unbalanced.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    ev = np.linalg.eigvals(M)
    gap = float(np.min(np.abs(ev.real)))
    if gap <= tol * max(np.linalg.norm(M, 2), 1e-300):
        raise NotHyperbolic(f"eigenvalue on the imaginary axis (min |Re λ| = {gap:.3e})")
    _, Zp, kp = sla.schur(M, output="real", sort="rhp")
    _, Zm, km = sla.schur(M, output="real", sort="lhp")
    if kp != n or km != n:
        raise NotHyperbolic(f"unbalanced splitting: {kp} unstable vs {km} stable directions")
    return frame_from_columns(Zp[:, :n], 1e-6), frame_from_columns(Zm[:, :n], 1e-6), gap


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    C1: float
    C2: float
    C3: float
    L2_minus_ok: bool
    L2_plus_ok: bool
    hyperbolic: bool
    transversal_dirichlet: dict = field(default_factory=dict)
    graph_definiteness: dict = field(default_factory=dict)
    P_positive: bool = True
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.L2_minus_ok and self.L2_plus_ok

    def as_dict(self) -> dict:
        gd = {k: (None if v is None else list(v)) for k, v in self.graph_definiteness.items()}
        return {
            "C1": self.C1,
            "C2": self.C2,
            "C3": self.C3,
            "L2_minus_ok": self.L2_minus_ok,
            "L2_plus_ok": self.L2_plus_ok,
            "hyperbolic": self.hyperbolic,
            "P_positive": self.P_positive,
            "transversal_dirichlet": dict(self.transversal_dirichlet),
            "graph_definiteness": gd,
            "notes": list(self.notes),
            "ok": self.ok,
        }


def _block_pd(P, Q, R) -> bool:
    M = np.block([[P, Q], [Q.T, R]])
    return inertia(0.5 * (M + M.T), tol=1e-12).positive == M.shape[0]


def _graph_inertia(F: LagrangianFrame) -> InertiaTriple | None:
    X, Y = F.top, F.bottom
    if np.linalg.svd(Y, compute_uv=False)[-1] < 1e-10:
        return None
    M = X @ np.linalg.inv(Y)
    return inertia(0.5 * (M + M.T))


def validate(p: SturmLiouvilleProblem, probe_grid=None) -> ValidationReport:
    """Estimate the uniform bounds and check the asymptotic hypotheses.

    ``C1`` is the smallest eigenvalue of ``P`` over the probes (the Legendre
    bound), ``C2`` and ``C3`` the largest spectral norms of ``Q`` and ``R``.
    Nothing here aborts; failures are recorded in the report.
    """
    if probe_grid is None:
        probe_grid = np.linspace(-50.0, 50.0, 2001)
    ts = np.asarray(probe_grid, dtype=float)
    P = np.concatenate([p.P.evaluate(ts), [p.P.limit_minus, p.P.limit_plus]])
    Q = np.concatenate([p.Q.evaluate(ts), [p.Q.limit_minus, p.Q.limit_plus]])
    R = np.concatenate([p.R.evaluate(ts), [p.R.limit_minus, p.R.limit_plus]])
    notes = []
    C1 = float(np.min(np.linalg.eigvalsh(0.5 * (P + np.swapaxes(P, -1, -2)))))
    C2 = float(np.max(np.linalg.norm(Q, 2, axis=(-2, -1))))
    C3 = float(np.max(np.linalg.norm(R, 2, axis=(-2, -1))))
    asym_P = np.max(np.abs(P - np.swapaxes(P, -1, -2)))
    asym_R = np.max(np.abs(R - np.swapaxes(R, -1, -2)))
    if max(asym_P, asym_R) > 1e-12 * max(1.0, np.max(np.abs(P)), np.max(np.abs(R))):
        notes.append("P or R is not symmetric on the probe grid")
    P_pos = C1 > 0
    if not P_pos:
        notes.append("P fails to be positive definite on the probe grid")
    for c in _leaves(p):
        if isinstance(c, Tabulated) and c.edge_mismatch() > 1e-6:
            notes.append(f"tabulated coefficient differs from its declared limit by {c.edge_mismatch():.2e} at the table edge")

    L2m = _block_pd(p.P.limit_minus, p.Q.limit_minus, p.R.limit_minus)
    L2p = _block_pd(p.P.limit_plus, p.Q.limit_plus, p.R.limit_plus)
    transversal, graph = {}, {}
    hyperbolic = True
    try:
        a = p.asymptotics
    except NotHyperbolic as exc:
        hyperbolic = False
        notes.append(f"asymptotic Hamiltonian not hyperbolic: {exc}")
    else:
        D = dirichlet_plane(p.n)
        named = {
            "V+(-inf)": a.Vp_minus,
            "V-(-inf)": a.Vm_minus,
            "V+(+inf)": a.Vp_plus,
            "V-(+inf)": a.Vm_plus,
        }
        for k, F in named.items():
            transversal[k] = intersection_dim(F, D) == 0
            graph[k] = _graph_inertia(F)
            if graph[k] is None:
                notes.append(f"{k} has no graph form over the position plane; definiteness check skipped")
    return ValidationReport(C1, C2, C3, L2m, L2p, hyperbolic, transversal, graph, P_pos, notes)


# --------------------------------------------------------------------------
# files


def problem_from_dict(d: dict) -> SturmLiouvilleProblem:
    try:
        n = int(d["n"])
        P = coefficient_from_dict(d["P"], n)
        Q = coefficient_from_dict(d["Q"], n)
        R = coefficient_from_dict(d["R"], n)
    except KeyError as exc:
        raise ProblemFileError(f"problem file lacks field {exc}") from exc
    if not (P.n == Q.n == R.n == n):
        raise ProblemFileError(f"coefficient sizes {P.n}, {Q.n}, {R.n} do not match n={n}")
    return SturmLiouvilleProblem(P, Q, R, name=str(d.get("name", "")))


def load_problem(path) -> SturmLiouvilleProblem:
    import json

    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return problem_from_dict(d)
