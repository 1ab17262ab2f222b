"""Propagation of Lagrangian frames along ``z' = J B(t) z``.

Frames are advanced with an embedded Dormand–Prince 5(4) pair and
re-orthonormalized by thin QR after every accepted step.  The triangular
factors are accumulated into per-interval *gauges* ``G_j`` with

    Φ(t_{j+1}, t_j) F_j = F_{j+1} G_j,

which lets callers transport coefficient vectors between stored samples
without re-integrating.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import IntegratorFailure, IsotropyLoss, NoDecay
from .symplectic import LagrangianFrame, _orth, standard_J
from .sturm import SturmLiouvilleProblem, Tabulated, hamiltonian_many, _leaves

__all__ = [
    "PropagationConfig",
    "FramePath",
    "select_truncation",
    "propagate_frame",
    "unstable_path",
    "stable_path",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationConfig:
    """Integrator and truncation settings.

    ``kernel_tol`` is the smallest singular value of ``[E^u E^s]`` below which
    the two bundles are treated as sharing a bounded solution.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    reortho_every: int = 1
    trunc_eps: float = 1e-8
    T_min: float = 20.0
    T_max: float = 400.0
    sample_dt: float = 0.01
    kernel_splice: bool = True
    kernel_tol: float = 1e-6
    isotropy_abort: float = 1e-6
    gauge_seed: int | None = None  # rotate initial frames by a random orthogonal matrix

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "trunc_eps", "T_min", "sample_dt", "kernel_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.T_min < self.T_max:
            raise ValueError("T_min must be smaller than T_max")
        if self.reortho_every < 1:
            raise ValueError("reortho_every must be at least 1")

    def refined(self) -> "PropagationConfig":
        """Tighter settings used by the plateau check: ``T`` doubled, ``ε_B / 100``."""
        return replace(self, trunc_eps=self.trunc_eps / 100, T_min=2 * self.T_min, T_max=max(2 * self.T_max, 4 * self.T_min))


# Dormand–Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = _A[6].copy()
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4
# continuous extension (order 4) of the 5th-order solution
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


def _qr_pos(Y):
    """Thin QR with positive diagonal; two-pass Gram–Schmidt for narrow frames."""
    k = Y.shape[1]
    if k > 3:
        Q, R = np.linalg.qr(Y)
        d = np.sign(np.diag(R))
        d[d == 0] = 1.0
        return Q * d, R * d[:, None]
    Q = np.empty_like(Y)
    R = np.zeros((k, k))
    for j in range(k):
        v = Y[:, j].copy()
        for _ in range(2):
            if j:
                c = Q[:, :j].T @ v
                v -= Q[:, :j] @ c
                R[:j, j] += c
        r = np.sqrt(v @ v)
        if r == 0.0:
            raise IntegratorFailure("frame columns became linearly dependent")
        R[j, j] = r
        Q[:, j] = v / r
    return Q, R


def _inv_upper(R):
    if R.shape[0] == 1:
        return np.array([[1.0 / R[0, 0]]])
    if R.shape[0] == 2:
        a, b, d = R[0, 0], R[0, 1], R[1, 1]
        return np.array([[1.0 / a, -b / (a * d)], [0.0, 1.0 / d]])
    return np.linalg.inv(R)


class _Stepper:
    """Adaptive DP54 integration of a frame with dense output at sample times."""

    def __init__(self, p: SturmLiouvilleProblem, cfg: PropagationConfig):
        self.p = p
        self.cfg = cfg
        self.J = standard_J(p.n)
        self.h = cfg.sample_dt
        self.steps = 0
        self.rejected = 0

    def _generator(self, ts):
        return self.J @ hamiltonian_many(self.p, ts)

    def _attempt(self, Y, t, hs):
        M = self._generator(t + hs * _C)
        shape = Y.shape
        K = np.empty((7, Y.size))
        K[0] = (M[0] @ Y).ravel()
        for i in range(1, 7):
            K[i] = (M[i] @ (Y + hs * (_A[i, :i] @ K[:i]).reshape(shape))).ravel()
        Y5 = Y + hs * (_B5 @ K).reshape(shape)
        err = hs * (_E @ K).reshape(shape)
        scale = self.cfg.abs_tol + self.cfg.rel_tol * np.maximum(np.abs(Y), np.abs(Y5))
        return Y5, K, float(np.sqrt(np.mean((err / scale) ** 2)))

    def run(self, Y, ts):
        """Integrate ``Y`` through the monotone times ``ts``.

        Returns frames at ``ts[1:]`` and gauges ``G_j`` with
        ``Φ(ts[j+1], ts[j]) F_j = F_{j+1} G_j`` (``F_0 = Y``).
        """
        cfg = self.cfg
        t0, t1 = float(ts[0]), float(ts[-1])
        sgn = 1.0 if t1 >= t0 else -1.0
        t = t0
        G = np.eye(Y.shape[1])  # Φ(t, last sample) F_last = Y G
        frames, gauges = [], []
        nxt = 1
        h = min(abs(self.h), abs(t1 - t0))
        since = 0
        while nxt < len(ts):
            h = min(h, abs(t1 - t))
            if h <= 1e-13 * max(1.0, abs(t)):
                raise IntegratorFailure(f"step size underflow at t={t:.6g}")
            hs = sgn * h
            Y5, K, en = self._attempt(Y, t, hs)
            if en > 1.0:
                self.rejected += 1
                h = h * max(0.2, 0.9 * en ** (-0.2))
                continue
            t_end = t1 if h == abs(t1 - t) else t + hs
            while nxt < len(ts) and sgn * (ts[nxt] - t_end) <= 0:
                th = (ts[nxt] - t) / hs
                Ys = Y + hs * ((_P @ (th ** np.arange(1, 5))) @ K).reshape(Y.shape)
                Q, R = _qr_pos(Ys)
                frames.append(Q)
                gauges.append(R @ G)
                G = _inv_upper(R)
                nxt += 1
            t, Y = t_end, Y5
            self.steps += 1
            since += 1
            if since >= cfg.reortho_every:
                Y, R = _qr_pos(Y)
                G = R @ G
                since = 0
            fac = 5.0 if en == 0 else min(5.0, 0.9 * en ** (-0.2))
            self.h = h * fac
            h = self.h
        return frames, gauges

    def advance(self, Y, t0, t1):
        """Frame at ``t1`` and gauge ``G`` with ``Φ(t1, t0) Y = Q G``."""
        frames, gauges = self.run(Y, [t0, t1])
        return frames[0], gauges[0]


@dataclass(eq=False)
class FramePath:
    """Sampled path of orthonormal frames with transport gauges.

    Attributes
    ----------
    grid : (m,) increasing sample times
    frames : (m, 2n, k) orthonormal frames
    gauges : (m-1, k, k) with ``Φ(t_{j+1}, t_j) F_j = F_{j+1} G_j``
    kind : "unstable", "stable" or "free"
    direction : +1 when integrated forward in ``t``
    provenance : initialization data and diagnostics
    """

    grid: np.ndarray
    frames: np.ndarray
    gauges: np.ndarray
    problem: SturmLiouvilleProblem
    config: PropagationConfig
    kind: str = "free"
    direction: int = 1
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.grid)

    @property
    def n(self) -> int:
        return self.frames.shape[1] // 2

    def frame(self, i: int) -> LagrangianFrame:
        return LagrangianFrame(self.frames[i])

    @property
    def bottom_blocks(self) -> np.ndarray:
        return self.frames[:, self.n :, :]

    def frame_at(self, tau: float) -> np.ndarray:
        """Frame at ``tau`` re-integrated from the nearest upstream sample."""
        g = self.grid
        if not (g[0] <= tau <= g[-1]):
            raise ValueError(f"tau={tau} outside the path")
        j = int(np.clip(np.searchsorted(g, tau, side="right") - 1, 0, len(g) - 2))
        src = j if self.direction > 0 else j + 1
        if tau == g[src]:
            return self.frames[src].copy()
        Y, _ = _Stepper(self.problem, self.config).advance(self.frames[src], float(g[src]), float(tau))
        return Y

    def isotropy_max(self) -> float:
        J = standard_J(self.n)
        S = np.swapaxes(self.frames, 1, 2) @ J @ self.frames
        return float(np.max(np.abs(S)))


def _sample_grid(t0, t1, dt):
    m = max(int(np.ceil(abs(t1 - t0) / dt - 1e-9)), 1) + 1
    return np.linspace(t0, t1, m)


def propagate_frame(p: SturmLiouvilleProblem, F0, t0: float, t1: float, cfg: PropagationConfig | None = None,
                    samples=None, kind: str = "free") -> FramePath:
    """Propagate the span of ``F0`` from ``t0`` to ``t1``.

    The returned path is stored on an increasing grid whatever the direction
    of integration.  ``samples`` overrides the default ``sample_dt`` grid and
    must start at ``t0`` and end at ``t1``.

    Raises
    ------
    IntegratorFailure
        On step-size underflow.
    IsotropyLoss
        If a sampled frame has ``||F^T J F|| > cfg.isotropy_abort``.
    """
    cfg = cfg or PropagationConfig()
    if t0 == t1:
        raise ValueError("t0 and t1 must differ")
    Z0 = np.asarray(F0.columns if isinstance(F0, LagrangianFrame) else F0, dtype=float)
    ts = _sample_grid(t0, t1, cfg.sample_dt) if samples is None else np.asarray(samples, dtype=float)
    stepper = _Stepper(p, cfg)
    J = standard_J(p.n)
    Y = _orth(Z0)
    if cfg.gauge_seed is not None:
        G, _ = np.linalg.qr(np.random.default_rng(cfg.gauge_seed).standard_normal((Y.shape[1],) * 2))
        Y = Y @ G
    frames, gauges = stepper.run(Y, ts)
    frames = np.array([Y] + frames)
    gauges = np.array(gauges)
    iso = np.max(np.abs(np.swapaxes(frames, 1, 2) @ J @ frames), axis=(1, 2))
    if iso.max() > cfg.isotropy_abort:
        i = int(np.argmax(iso > cfg.isotropy_abort))
        raise IsotropyLoss(f"isotropy residual {iso[i]:.2e} at t={ts[i]:.6g} after {stepper.steps} steps")
    direction = 1 if t1 > t0 else -1
    if direction < 0:
        # Φ(t_j, t_{j+1}) F_{j+1} = F_j H_j  ⇒  forward gauge is H_j^{-1}
        ts, frames = ts[::-1].copy(), frames[::-1].copy()
        gauges = np.linalg.inv(gauges[::-1])
    prov = {"t0": float(t0), "t1": float(t1), "steps": stepper.steps, "rejected": stepper.rejected}
    return FramePath(ts, frames, gauges, p, cfg, kind, direction, prov)


def _deviation(p, ts, B_lim):
    return np.linalg.norm(hamiltonian_many(p, ts) - B_lim, 2, axis=(-2, -1))


def select_truncation(p: SturmLiouvilleProblem, cfg: PropagationConfig | None = None, step: float = 0.05) -> tuple[float, float]:
    """Smallest ``T_neg <= 0 <= T_pos`` beyond which ``||B(t) - B(±∞)|| <= ε_B``.

    Probes every ``step`` up to ``T_max`` and clamps to ``[T_min, T_max]``.

    Raises
    ------
    NoDecay
        If the deviation still exceeds ``ε_B`` at ``T_max``, or a tabulated
        coefficient jumps onto its declared limit at the table edge.
    """
    cfg = cfg or PropagationConfig()
    a = p.asymptotics
    eps = cfg.trunc_eps
    probes = np.arange(0.0, cfg.T_max + step / 2, step)
    edges = [c.support for c in _leaves(p) if isinstance(c, Tabulated)]
    out = []
    for sign, B_lim in ((-1.0, a.B_minus), (1.0, a.B_plus)):
        ts = sign * probes
        dev = _deviation(p, ts, B_lim)
        for lo, hi in edges:
            edge = lo if sign < 0 else hi
            if abs(edge) <= cfg.T_max and _deviation(p, np.array([edge - sign * 1e-9]), B_lim)[0] > eps:
                raise NoDecay(f"tabulated coefficient is still {_deviation(p, np.array([edge]), B_lim)[0]:.2e} "
                              f"from its limit at the table edge t={edge:g}")
        bad = np.nonzero(dev > eps)[0]
        if bad.size and bad[-1] == len(probes) - 1:
            raise NoDecay(f"||B(t) - B({'+' if sign > 0 else '-'}inf)|| = {dev[-1]:.2e} > {eps:g} at |t| = T_max")
        T = probes[bad[-1] + 1] if bad.size else 0.0
        if T < cfg.T_min:
            log.debug("truncation %.3g clamped up to T_min=%g", T, cfg.T_min)
            T = cfg.T_min
        out.append(sign * float(T))
    return out[0], out[1]


def stable_path(p: SturmLiouvilleProblem, cfg: PropagationConfig | None = None, truncation=None) -> FramePath:
    """``E^s(τ)`` on ``[T_neg, T_pos]``, integrated backward from ``V⁻(JB(+∞))``."""
    cfg = cfg or PropagationConfig()
    T = truncation or select_truncation(p, cfg)
    a = p.asymptotics
    grid = _sample_grid(T[0], T[1], cfg.sample_dt)
    S = propagate_frame(p, a.Vm_plus, T[1], T[0], cfg, samples=grid[::-1], kind="stable")
    S.provenance.update(truncation=tuple(T), init_error=cfg.trunc_eps / a.spectral_gap)
    return S


def _bundle_kernel(U: FramePath, S: FramePath, tol: float):
    """Index and dimension of the closest approach of the two bundles."""
    M = np.concatenate([U.frames, S.frames], axis=2)
    sv = np.linalg.svd(M, compute_uv=False)
    j = int(np.argmin(sv[:, -1]))
    k = int(np.sum(sv[j] < tol))
    return j, k, float(sv[j, -1])


def unstable_path(p: SturmLiouvilleProblem, cfg: PropagationConfig | None = None, truncation=None,
                  stable: FramePath | None = None) -> FramePath:
    """``E^u(τ)`` on ``[T_neg, T_pos]``, integrated forward from ``V⁺(JB(−∞))``.

    When ``E^u`` and ``E^s`` share bounded solutions (a kernel of the
    operator), those directions decay forward and are lost to round-off in
    the forward frame.  With ``cfg.kernel_splice`` the shared directions are
    carried past the point of closest approach along the stable path
    instead, and the remaining directions are propagated forward.
    ``provenance["kernel_dim"]`` records the number of shared directions.
    """
    cfg = cfg or PropagationConfig()
    T = truncation or select_truncation(p, cfg)
    a = p.asymptotics
    grid = _sample_grid(T[0], T[1], cfg.sample_dt)
    U = propagate_frame(p, a.Vp_minus, T[0], T[1], cfg, samples=grid, kind="unstable")
    U.provenance.update(truncation=tuple(T), init_error=cfg.trunc_eps / a.spectral_gap, kernel_dim=0, spliced_at=None)
    if not cfg.kernel_splice:
        return U
    if stable is None:
        stable = stable_path(p, cfg, T)
    j, k, smin = _bundle_kernel(U, stable, cfg.kernel_tol)
    U.provenance["bundle_sigma_min"] = smin
    if k == 0:
        return U
    return _splice(U, stable, j, k)


def _splice(U: FramePath, S: FramePath, j: int, k: int) -> FramePath:
    n = U.n
    Uj, Sj = U.frames[j], S.frames[j]
    _, _, Vt = np.linalg.svd(np.concatenate([Uj, Sj], axis=1))
    coeff = Vt[-k:].T  # null directions of [U S]
    b = _orth(coeff[n:])
    K = _orth(Sj @ b)
    frames = U.frames.copy()
    gauges = U.gauges.copy()
    if k < n:
        Mc = Uj - K @ (K.T @ Uj)
        Uc, _, _ = np.linalg.svd(Mc, full_matrices=False)
        C = propagate_frame(U.problem, Uc[:, : n - k], float(U.grid[j]), float(U.grid[-1]), U.config,
                            samples=U.grid[j:])
    for i in range(j + 1, len(U.grid)):
        b, _ = _qr_pos(S.gauges[i - 1] @ b)
        Ki = S.frames[i] @ b
        cols = Ki if k == n else np.concatenate([Ki, C.frames[i - j]], axis=1)
        frames[i] = _orth(cols)
    gauges[j:] = np.nan  # not tracked across the spliced region
    prov = dict(U.provenance, kernel_dim=k, spliced_at=float(U.grid[j]))
    return FramePath(U.grid, frames, gauges, U.problem, U.config, "unstable", 1, prov)
