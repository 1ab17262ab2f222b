"""Traveling waves of gradient reaction–diffusion systems.

Profiles solve ``w'' + c w' + ∇F(w) = 0`` with ``w → u_±`` as ``ξ → ±∞``.
Writing the linearization ``L = ∂² + c∂ + ∇²F(w*)`` in the weighted variable
``ψ = e^{cξ/2} φ`` gives the self-adjoint operator

    𝕃 = -∂² + (c²/4) I - ∇²F(w*),      L = -D⁻¹ 𝕃 D,  D = e^{cξ/2},

so eigenvalues ``λ`` of ``L`` correspond to eigenvalues ``-λ`` of ``𝕃``.
An interior zero of ``w*'`` is a conjugate point of ``𝕃`` (the weighted
translation mode vanishes there), so ``𝕃`` has a negative direction and the
wave is spectrally unstable.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_bvp
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import (
    HypothesisViolation,
    InconsistentIndex,
    NewtonDivergence,
    NotEquilibrium,
    PhaseConditionSingular,
    ProblemFileError,
    TangentialZero,
)
from .flows import PropagationConfig
from .sturm import Constant, SturmLiouvilleProblem, Tabulated

__all__ = [
    "ReactionSystem",
    "WaveProfile",
    "WaveSetup",
    "WaveAnalysis",
    "BVPConfig",
    "check_H",
    "solve_front",
    "nagumo_front_exact",
    "kdv_pulse_exact",
    "weighted_problem",
    "critical_points",
    "fd_operators",
    "weighted_identity_error",
    "rough_spectrum_L",
    "instability_verdict",
    "setup_from_dict",
    "load_setup",
]

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# reaction systems


def _nagumo_g(u, a):
    return u * (1 - u) * (u - a)


def _nagumo_dg(u, a):
    return -3 * u**2 + 2 * (1 + a) * u - a


@dataclass(frozen=True, eq=False)
class ReactionSystem:
    """Gradient nonlinearity ``∇F`` and its Hessian, vectorized over leading axes."""

    n: int
    grad_F: Callable[[np.ndarray], np.ndarray]
    hess_F: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    params: tuple = ()

    @classmethod
    def nagumo(cls, a: float = 0.25) -> "ReactionSystem":
        return cls(1, lambda u: _nagumo_g(u, a), lambda u: _nagumo_dg(u, a)[..., None], "nagumo", (a,))

    @classmethod
    def kdv(cls) -> "ReactionSystem":
        return cls(1, lambda u: u**2 - u, lambda u: (2 * u - 1)[..., None], "kdv", ())

    @classmethod
    def coupled_nagumo(cls, a: float = 0.25, gamma: float = 0.5) -> "ReactionSystem":
        """``F = f(u₁) + f(u₂) - (γ/2)(u₁ - u₂)²`` with ``f' = u(1-u)(u-a)``."""

        def grad(u):
            d = u[..., 0] - u[..., 1]
            return np.stack([_nagumo_g(u[..., 0], a) - gamma * d, _nagumo_g(u[..., 1], a) + gamma * d], axis=-1)

        def hess(u):
            H = np.empty(u.shape[:-1] + (2, 2))
            H[..., 0, 0] = _nagumo_dg(u[..., 0], a) - gamma
            H[..., 1, 1] = _nagumo_dg(u[..., 1], a) - gamma
            H[..., 0, 1] = H[..., 1, 0] = gamma
            return H

        return cls(2, grad, hess, "coupled_nagumo", (a, gamma))

    @classmethod
    def tabulated(cls, u_grid, grad_values) -> "ReactionSystem":
        """Scalar ``∇F`` given on a ``u`` grid, cubic interpolation."""
        cs = CubicSpline(np.asarray(u_grid, float), np.asarray(grad_values, float))
        d = cs.derivative()
        return cls(1, lambda u: cs(u[..., 0])[..., None] if np.ndim(u) and np.shape(u)[-1:] == (1,) else cs(u),
                   lambda u: d(u)[..., None], "tabulated", ())

    def grad(self, u) -> np.ndarray:
        """``∇F`` for states of shape ``(..., n)``."""
        u = np.asarray(u, dtype=float)
        if self.n == 1:
            return np.asarray(self.grad_F(u[..., 0]))[..., None]
        return np.asarray(self.grad_F(u))

    def hess(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.n == 1:
            return np.asarray(self.hess_F(u[..., 0]))[..., None]
        return np.asarray(self.hess_F(u))

    def to_dict(self) -> dict:
        return {"preset": self.name, "params": list(self.params)}


def _vec(u, n):
    return np.atleast_1d(np.asarray(u, dtype=float)).reshape(n)


def check_H(sys: ReactionSystem, u_minus, u_plus, tol: float = 1e-10) -> bool:
    """True iff ``∇²F(u_±)`` are both negative definite.

    Raises
    ------
    NotEquilibrium
        If ``|∇F(u_±)| >= tol``.
    """
    out = True
    for u in (_vec(u_minus, sys.n), _vec(u_plus, sys.n)):
        g = sys.grad(u)
        if np.linalg.norm(g) >= tol:
            raise NotEquilibrium(f"grad F({u.tolist()}) = {g.tolist()} is not zero")
        H = sys.hess(u)
        out &= bool(np.all(np.linalg.eigvalsh(0.5 * (H + H.T)) < -tol))
    return out


# --------------------------------------------------------------------------
# profiles


@dataclass(eq=False)
class WaveProfile:
    c: float
    grid: np.ndarray
    w: np.ndarray  # (m, n)
    w_prime: np.ndarray  # (m, n)
    kind: str
    u_minus: np.ndarray
    u_plus: np.ndarray
    system: ReactionSystem | None = None
    residual: float = float("nan")
    exact: Callable | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.w.shape[1]

    @property
    def w_second(self) -> np.ndarray:
        """``w'' = -c w' - ∇F(w)`` from the profile equation."""
        return -self.c * self.w_prime - self.system.grad(self.w)

    def derivative_at(self, xi):
        """``(w'(ξ), w''(ξ))`` from the exact profile or a cubic interpolant."""
        if self.exact is not None:
            _, wp, wpp = self.exact(np.asarray(xi, dtype=float))
            return wp, wpp
        cs = CubicSpline(self.grid, self.w_prime, axis=0)
        return cs(xi), cs(xi, 1)

    def check(self, tol_res: float = 1e-6, tol_lim: float = 1e-6) -> None:
        if self.residual > tol_res:
            raise NewtonDivergence(f"profile residual {self.residual:.2e} exceeds {tol_res:g}")
        e = max(np.max(np.abs(self.w[0] - self.u_minus)), np.max(np.abs(self.w[-1] - self.u_plus)))
        if e > tol_lim:
            raise NewtonDivergence(f"profile ends {e:.2e} away from the equilibria")


def _profile_residual(sys, c, grid, w, wp):
    # residual of the first-order system (w' = v, v' = -c v - ∇F) on the samples via spline derivatives
    cs = CubicSpline(grid, wp, axis=0)
    r = cs(grid, 1) + c * wp + sys.grad(w)
    interior = slice(2, -2)
    return float(np.max(np.abs(r[interior])))


def nagumo_front_exact(a: float = 0.25, L: float = 40.0, dx: float = 0.01) -> WaveProfile:
    """``w = 1/(1 + e^{ξ/√2})`` with ``c = √2 (1/2 - a)``, from ``u₋ = 1`` to ``u₊ = 0``."""
    sys = ReactionSystem.nagumo(a)
    c = np.sqrt(2) * (0.5 - a)
    s2 = np.sqrt(2)

    def exact(xi):
        e = 0.5 * (1 - np.tanh(xi / (2 * s2)))  # = 1/(1+e^{ξ/√2}) without overflow
        wp = -e * (1 - e) / s2
        wpp = -(1 - 2 * e) * wp / s2
        return e[..., None], wp[..., None], wpp[..., None]

    grid = np.linspace(-L, L, int(round(2 * L / dx)) + 1)
    w, wp, _ = exact(grid)
    prof = WaveProfile(c, grid, w, wp, "front", np.array([1.0]), np.array([0.0]), sys, exact=exact)
    prof.residual = float(np.max(np.abs(exact(grid)[2] + c * wp + sys.grad(w))))
    return prof


def kdv_pulse_exact(L: float = 40.0, dx: float = 0.01) -> WaveProfile:
    """Standing pulse ``w = (3/2) sech²(ξ/2)`` of ``w'' = w - w²``."""
    sys = ReactionSystem.kdv()

    def exact(xi):
        s = 1 / np.cosh(np.clip(xi / 2, -350, 350))
        t = np.tanh(xi / 2)
        w = 1.5 * s**2
        wp = -1.5 * s**2 * t
        wpp = -0.75 * s**2 * (1 - 3 * t**2)
        return w[..., None], wp[..., None], wpp[..., None]

    grid = np.linspace(-L, L, int(round(2 * L / dx)) + 1)
    w, wp, _ = exact(grid)
    prof = WaveProfile(0.0, grid, w, wp, "pulse", np.array([0.0]), np.array([0.0]), sys, exact=exact)
    prof.residual = float(np.max(np.abs(exact(grid)[2] + sys.grad(w))))
    return prof


@dataclass(frozen=True)
class BVPConfig:
    """Collocation settings for :func:`solve_front` (half-line length ``L``)."""

    L: float = 40.0
    tol: float = 1e-10
    max_nodes: int = 200000
    initial_nodes: int = 801
    output_dx: float = 0.01
    template_width: float = 2.0


def _spatial_rates(sys, u, c):
    """Eigen-directions and rates of the linearization ``v'' + c v' + ∇²F(u) v = 0``."""
    f, V = np.linalg.eigh(sys.hess(u))
    disc = np.sqrt(c**2 - 4 * f)
    return V, 0.5 * (-c + disc), 0.5 * (-c - disc)


def _template(kind, u_minus, u_plus, width, amplitude=None):
    if kind == "front":
        def tmpl(xi):
            s = 0.5 * (1 - np.tanh(xi[..., None] / width))
            return u_plus + (u_minus - u_plus) * s, -(u_minus - u_plus) * s * (1 - s) * 2 / width
    else:
        amp = np.ones_like(u_plus) if amplitude is None else np.asarray(amplitude, float)

        def tmpl(xi):
            s = 1 / np.cosh(xi[..., None] / width)
            t = np.tanh(xi[..., None] / width)
            return u_plus + amp * s**2, -2 * amp * s**2 * t / width
    return tmpl


def solve_front(sys: ReactionSystem, c_guess: float, u_minus, u_plus, bvp_cfg: BVPConfig | None = None, *,
                kind: str = "front", amplitude=None) -> WaveProfile:
    """Solve for a front (``c`` unknown) or a standing pulse (``c = 0``).

    Fronts use the folded variables ``y₁(s) = w(-s)``, ``y₂(s) = w(s)`` on
    ``s ∈ [0, L]``, continuity of ``w`` and ``w'`` at ``s = 0``, projective
    boundary conditions at ``s = L``, and a phase condition: ``w(0)`` at the
    midpoint for scalar fronts, ``∫⟨w - ŵ, ŵ'⟩ = 0`` against the template ``ŵ``
    for systems.  Pulses are even: ``w'(0) = 0`` on the half line.

    Raises
    ------
    HypothesisViolation
        If ``∇²F(u_±)`` is not negative definite.
    NewtonDivergence
        If collocation fails or the result misses the residual target.
    PhaseConditionSingular
        If the scalar midpoint is not between the end states.
    """
    cfg = bvp_cfg or BVPConfig()
    n = sys.n
    um, up = _vec(u_minus, n), _vec(u_plus, n)
    if not check_H(sys, um, up):
        raise HypothesisViolation("grad^2 F is not negative definite at both end states")
    L = cfg.L
    s = np.linspace(0.0, L, cfg.initial_nodes)
    tmpl = _template(kind, um, up, cfg.template_width, amplitude)
    if kind == "pulse":
        return _solve_pulse(sys, um, up, cfg, s, tmpl)
    mid = 0.5 * (um + up)
    if n == 1 and abs(um[0] - up[0]) < 1e-12:
        raise PhaseConditionSingular("midpoint phase condition needs distinct end states")

    def rhs(s, y, p):
        c = p[0]
        y1, v1, y2, v2 = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:4 * n]
        # y1(s) = w(-s): y1'' = c y1' - ∇F(y1)
        a1 = c * v1 - sys.grad(y1.T).T
        a2 = -c * v2 - sys.grad(y2.T).T
        out = [v1, a1, v2, a2]
        if n > 1:
            w1, d1 = tmpl(-s)
            w2, d2 = tmpl(s)
            out.append(np.sum((y1 - w1.T) * d1.T, axis=0) + np.sum((y2 - w2.T) * d2.T, axis=0))
        return np.vstack(out)

    def bc(ya, yb, p):
        c = p[0]
        y1a, v1a, y2a, v2a = ya[:n], ya[n:2 * n], ya[2 * n:3 * n], ya[3 * n:4 * n]
        y1b, v1b, y2b, v2b = yb[:n], yb[n:2 * n], yb[2 * n:3 * n], yb[3 * n:4 * n]
        Vm, mu_m, _ = _spatial_rates(sys, um, c)
        Vp, _, mu_p = _spatial_rates(sys, up, c)
        # w(-L) = y1(L), w'(-L) = -y1'(L)
        left = Vm.T @ (-v1b) - mu_m * (Vm.T @ (y1b - um))
        right = Vp.T @ v2b - mu_p * (Vp.T @ (y2b - up))
        res = [y1a - y2a, v1a + v2a, left, right]
        if n == 1:
            res.append(y2a - mid)
        else:
            res.append(ya[4 * n:4 * n + 1])
            res.append(yb[4 * n:4 * n + 1])
        return np.concatenate(res)

    w1, d1 = tmpl(-s)
    w2, d2 = tmpl(s)
    y0 = [w1.T, -d1.T, w2.T, d2.T]
    if n > 1:
        y0.append(np.zeros((1, s.size)))
    y0 = np.vstack(y0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_bvp(rhs, bc, s, y0, p=[c_guess], tol=cfg.tol, max_nodes=cfg.max_nodes)
    if not sol.success:
        raise NewtonDivergence(f"collocation failed: {sol.message}")
    c = float(sol.p[0])
    grid = np.linspace(-L, L, int(round(2 * L / cfg.output_dx)) + 1)
    neg, pos = grid[grid < 0], grid[grid >= 0]
    Yn, Yp = sol.sol(-neg), sol.sol(pos)
    w = np.vstack([Yn[:n].T, Yp[2 * n:3 * n].T])
    wp = np.vstack([-Yn[n:2 * n].T, Yp[3 * n:4 * n].T])
    prof = WaveProfile(c, grid, w, wp, "front", um, up, sys)
    prof.residual = _profile_residual(sys, c, grid, w, wp)
    return prof


def _solve_pulse(sys, um, up, cfg, s, tmpl):
    n = sys.n
    if np.max(np.abs(um - up)) > 1e-12:
        raise PhaseConditionSingular("standing pulses need u_minus = u_plus")

    def rhs(s, y):
        return np.vstack([y[n:], -sys.grad(y[:n].T).T])

    def bc(ya, yb):
        V, _, mu = _spatial_rates(sys, up, 0.0)
        return np.concatenate([ya[n:], V.T @ yb[n:] - mu * (V.T @ (yb[:n] - up))])

    w0, d0 = tmpl(s)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_bvp(rhs, bc, s, np.vstack([w0.T, d0.T]), tol=cfg.tol, max_nodes=cfg.max_nodes)
    if not sol.success:
        raise NewtonDivergence(f"collocation failed: {sol.message}")
    grid = np.linspace(-cfg.L, cfg.L, int(round(2 * cfg.L / cfg.output_dx)) + 1)
    Y = sol.sol(np.abs(grid))
    w = Y[:n].T
    wp = Y[n:].T * np.sign(grid)[:, None]
    if np.max(np.abs(w - up)) < 1e-6:
        raise NewtonDivergence("collocation collapsed onto the constant state")
    prof = WaveProfile(0.0, grid, w, wp, "pulse", um, up, sys)
    prof.residual = _profile_residual(sys, 0.0, grid, w, wp)
    return prof


# --------------------------------------------------------------------------
# weighted operator


def weighted_problem(sys: ReactionSystem, profile: WaveProfile) -> SturmLiouvilleProblem:
    """``𝕃 = -∂² + (c²/4) I - ∇²F(w*)`` as a problem with ``P = I``, ``Q = 0``."""
    n = sys.n
    c = profile.c
    R = (c**2 / 4) * np.eye(n) - sys.hess(profile.w)
    R = 0.5 * (R + np.swapaxes(R, 1, 2))
    lim_m = (c**2 / 4) * np.eye(n) - sys.hess(profile.u_minus)
    lim_p = (c**2 / 4) * np.eye(n) - sys.hess(profile.u_plus)
    return SturmLiouvilleProblem(Constant(np.eye(n)), Constant(np.zeros((n, n))),
                                 Tabulated(profile.grid, R, lim_m, lim_p), name=f"weighted {sys.name}")


def critical_points(profile: WaveProfile, tol: float = 1e-6) -> list[float]:
    """Interior isolated zeros of ``w*'``.

    Candidates are local minima of ``|w*'|`` inside the core of the profile,
    where ``|w*'| >= 1e-3 max |w*'|`` somewhere on either side.  Each is refined
    by minimizing ``|w*'|²`` and accepted when the minimum is below
    ``tol max |w*'|`` and a sign change (scalar) or Gauss–Newton convergence
    (systems) certifies an isolated zero.

    Raises
    ------
    TangentialZero
        For a constant profile, or a zero that cannot be certified.
    """
    g = np.linalg.norm(profile.w_prime, axis=1)
    gmax = float(g.max())
    if gmax < 1e-12:
        raise TangentialZero("profile is constant; every point is critical")
    core = np.nonzero(g >= 1e-3 * gmax)[0]
    lo, hi = core[0], core[-1]
    xi = profile.grid
    out = []
    for i in range(max(lo, 1), min(hi, len(g) - 2) + 1):
        if not (g[i] <= g[i - 1] and g[i] < g[i + 1]):
            continue
        a, b = xi[i - 1], xi[i + 1]

        def f(x):
            return float(np.sum(profile.derivative_at(np.array([x]))[0] ** 2))

        r = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        x0 = float(r.x)
        val = np.sqrt(r.fun)
        if val >= tol * gmax:
            if val < 1e-3 * gmax:
                log.warning("near-tangential minimum of |w'| = %.2e at xi=%.6g not counted", val, x0)
            continue
        if profile.n == 1:
            d = 10 * (b - a)
            wl, wr = profile.derivative_at(np.array([x0 - d, x0 + d]))[0][:, 0]
            if wl * wr >= 0:
                raise TangentialZero(f"w' touches zero at xi={x0:.6g} without changing sign")
        else:
            x0 = _gauss_newton_zero(profile, x0, gmax)
        out.append(x0)
    return out


def _gauss_newton_zero(profile, x0, gmax, iters=20):
    x = x0
    for _ in range(iters):
        wp, wpp = (v[0] for v in profile.derivative_at(np.array([x])))
        den = float(wpp @ wpp)
        if den < 1e-20 * gmax**2:
            break
        step = float(wpp @ wp) / den
        x -= step
        if abs(step) < 1e-13:
            wp, wpp = (v[0] for v in profile.derivative_at(np.array([x])))
            if np.linalg.norm(wp) < 1e-10 * gmax and np.linalg.norm(wpp) > 1e-8 * gmax:
                return float(x)
            break
    raise TangentialZero(f"no certified isolated zero of w' near xi={x0:.6g}")


def fd_operators(sys: ReactionSystem, profile: WaveProfile, grid=None):
    """Finite-difference ``(L_h, 𝕃_h, D)`` for a scalar profile on a uniform grid.

    ``𝕃_h`` uses the standard three-point Laplacian; ``L_h`` uses the
    exponentially fitted stencil ``e^{±ch/2}/h²`` that makes
    ``D (-L_h) D⁻¹ = 𝕃_h`` with ``D = diag(e^{cξ_i/2})``.
    """
    if sys.n != 1:
        raise ValueError("finite-difference operators are implemented for scalar profiles")
    xi = profile.grid if grid is None else np.asarray(grid, dtype=float)
    h = float(xi[1] - xi[0])
    if not np.allclose(np.diff(xi), h, rtol=1e-9, atol=0):
        raise ValueError("grid must be uniform")
    c = profile.c
    if grid is None:
        w = profile.w
    else:
        w = CubicSpline(profile.grid, profile.w, axis=0)(xi) if profile.exact is None else profile.exact(xi)[0]
    B = sys.hess(w)[:, 0, 0]
    m = xi.size
    one = np.ones(m - 1)
    Lw = sp.diags([-one / h**2, 2 / h**2 + c**2 / 4 - B, -one / h**2], [-1, 0, 1], format="csr")
    Lh = sp.diags([np.exp(-c * h / 2) * one / h**2, -2 / h**2 - c**2 / 4 + B, np.exp(c * h / 2) * one / h**2],
                  [-1, 0, 1], format="csr")
    D = np.exp(c * xi / 2)
    return Lh, Lw, D


def weighted_identity_error(sys: ReactionSystem, profile: WaveProfile, grid=None) -> float:
    """Relative max-entry error of ``D (-L_h) D⁻¹ - 𝕃_h`` on interior rows."""
    Lh, Lw, D = fd_operators(sys, profile, grid)
    T = sp.diags(D) @ (-Lh) @ sp.diags(1 / D)
    E = (T - Lw).tocsr()[1:-1]
    ref = abs(Lw.tocsr()[1:-1]).max()
    return float(abs(E).max() / ref) if E.nnz else 0.0


def rough_spectrum_L(sys: ReactionSystem, profile: WaveProfile, k: int = 4, T_o: float = 40.0, N: int = 4000):
    """Largest ``k`` eigenvalues of the finite-difference ``L_h`` on ``[-T_o, T_o]``.

    ``L_h`` is similar to the symmetric ``-𝕃_h``, so the spectrum is real.
    """
    xi = np.linspace(-T_o, T_o, N + 2)[1:-1]
    Lh, Lw, D = fd_operators(sys, profile, xi)
    top = float(np.max(sys.hess(profile.w))) + 1.0
    vals = spla.eigsh(-Lw, k=k, sigma=top, which="LM", return_eigenvectors=False)
    return np.sort(vals)[::-1]


# --------------------------------------------------------------------------
# verdict


@dataclass
class WaveAnalysis:
    critical_points: list
    morse_lower_bound: int
    morse_index: object | None
    verdict: str
    H_check: bool
    kernel_hits: int | None = None
    kernel_dim: int | None = None

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "critical_points": list(self.critical_points),
            "morse_lower_bound": self.morse_lower_bound,
            "morse_index": None if self.morse_index is None else self.morse_index.index,
            "kernel_hits": self.kernel_hits,
            "kernel_dim": self.kernel_dim,
            "H_check": self.H_check,
        }


def kernel_vector(profile: WaveProfile, grid) -> np.ndarray:
    """``e^{cτ/2} (w'' + (c/2) w', w')`` on ``grid``: the weighted translation mode in state form."""
    wp, wpp = profile.derivative_at(np.asarray(grid, dtype=float))
    e = np.exp(profile.c * np.asarray(grid) / 2)[:, None]
    return np.hstack([e * (wpp + 0.5 * profile.c * wp), e * wp])


def instability_verdict(sys: ReactionSystem, profile: WaveProfile, cfg: PropagationConfig | None = None, *,
                        compute_morse: bool = True, oracle=None, plateau: bool = False) -> WaveAnalysis:
    """Critical-point criterion plus, optionally, the Morse index of ``𝕃``.

    The verdict is ``"spectrally-unstable"`` iff ``w*'`` has an interior zero,
    and ``"stable-candidate"`` otherwise.  No stability claim is made.
    """
    from .morse import kernel_hit_count, morse_index

    H = check_H(sys, profile.u_minus, profile.u_plus)
    if not H:
        raise HypothesisViolation("grad^2 F is not negative definite at both end states")
    constant = float(np.max(np.abs(profile.w_prime))) < 1e-12
    crit = [] if constant else critical_points(profile)
    verdict = "spectrally-unstable" if crit else "stable-candidate"
    res = hits = kdim = None
    if compute_morse:
        p = weighted_problem(sys, profile)
        res = morse_index(p, cfg, oracle=oracle, plateau=plateau)
        kdim = res.kernel_dim
        if not constant and res.path is not None:
            hits = kernel_hit_count(res.path, kernel_vector(profile, res.path.grid))
        if len(crit) > res.index or (hits is not None and hits > res.index):
            raise InconsistentIndex(f"critical points {len(crit)} / kernel hits {hits} exceed Morse index {res.index}")
    return WaveAnalysis(crit, len(crit), res, verdict, H, hits, kdim)


# --------------------------------------------------------------------------
# files


@dataclass(frozen=True, eq=False)
class WaveSetup:
    system: ReactionSystem
    u_minus: np.ndarray
    u_plus: np.ndarray
    kind: str = "front"
    c_guess: float = 0.0
    amplitude: tuple | None = None


def _system_from_dict(d: dict) -> ReactionSystem:
    if "tabulated" in d:
        t = d["tabulated"]
        return ReactionSystem.tabulated(t["u"], t["grad_F"])
    name = d.get("preset")
    params = [float(x) for x in d.get("params", [])]
    if name == "nagumo":
        return ReactionSystem.nagumo(*params)
    if name == "kdv":
        return ReactionSystem.kdv()
    if name == "coupled_nagumo":
        return ReactionSystem.coupled_nagumo(*params)
    raise ProblemFileError(f"unknown reaction system {name!r}")


def setup_from_dict(d: dict) -> WaveSetup:
    try:
        sys = _system_from_dict(d)
        n = sys.n
        kind = d.get("kind", "front")
        if kind not in ("front", "pulse"):
            raise ProblemFileError(f"kind must be 'front' or 'pulse', not {kind!r}")
        amp = d.get("amplitude")
        return WaveSetup(sys, _vec(d["u_minus"], n), _vec(d["u_plus"], n), kind, float(d.get("c_guess", 0.0)),
                         None if amp is None else tuple(np.atleast_1d(amp).tolist()))
    except ProblemFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError(f"malformed system file: {exc}") from exc


def load_setup(path) -> WaveSetup:
    import json

    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return setup_from_dict(d)
