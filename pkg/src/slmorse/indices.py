"""Index calculus on the Lagrangian Grassmannian.

Crossing forms, the Maslov index of a path against a fixed Lagrangian
(computed from regular crossings), the triple and Hörmander indices, and the
spectral flow of finite symmetric matrix paths.

Crossings of a path ``Λ(τ)`` with a fixed ``V`` are located by tracking the
eigen-angles of ``W(τ) = Ũ Ũ^T`` where ``Ũ = U_V^* U_Λ`` and ``U = X + iY`` is
the unitary attached to an orthonormal frame ``(X; Y)``.  ``Λ(τ) ∩ V`` has
dimension equal to the multiplicity of the eigenvalue ``1`` of ``W(τ)``, so a
crossing is an angle track passing through a multiple of ``2π``.  Tracks give
brackets that are then refined by bisection; multiplicities and crossing forms
are computed at the refined instant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    DegenerateEndpoint,
    DimensionMismatch,
    EmptyKernel,
    InconsistentIndex,
    NonRegularCrossing,
    UndersampledPath,
    UnresolvedCluster,
)
from .symplectic import (
    InertiaTriple,
    QuadraticForm,
    _cols,
    _orth,
    _orth_basis,
    complex_frame,
    inertia,
    intersection_dim,
    lagrangian_projection,
    standard_J,
    subspace_intersection,
)

__all__ = [
    "CrossingForm",
    "MaslovResult",
    "LocatedCrossing",
    "pair_quadratic_form",
    "triple_index",
    "triple_index_witness",
    "random_lagrangian",
    "random_common_transversal",
    "hormander_routes",
    "hormander_index",
    "crossing_form_hamiltonian",
    "crossing_angles",
    "track_angles",
    "locate_crossings",
    "finite_difference_form",
    "maslov_index",
    "discrete_spectral_flow",
    "FunctionPath",
    "SampledPath",
    "rotating_line",
]

# absolute floor for the zero eigenvalues of forms built on orthonormal bases
FORM_ATOL = 1e-9
TWO_PI = 2.0 * np.pi


def _same_space(*frames):
    dims = {_cols(F).shape[0] for F in frames}
    if len(dims) != 1:
        raise DimensionMismatch("Lagrangians live in different symplectic spaces")


def pair_quadratic_form(alpha, beta, delta, tol: float = 1e-7) -> QuadraticForm:
    """The form ``Q(α, β; δ)(x1, x2) = ω(y1, z2)`` on ``α ∩ (β + δ)``.

    Each domain vector is split as ``x = y + z`` with ``y ∈ β``, ``z ∈ δ``
    using the minimum-norm coefficients, so the split is linear in ``x`` even
    when ``β ∩ δ ≠ 0``.  The returned gram is symmetrized.
    """
    _same_space(alpha, beta, delta)
    A = _orth_basis(_cols(alpha))
    B = _orth_basis(_cols(beta))
    D = _orth_basis(_cols(delta))
    BD = np.hstack([B, D])
    dom = subspace_intersection(A, BD, tol)
    if dom.shape[1] == 0:
        return QuadraticForm(dom, np.zeros((0, 0)))
    coef, *_ = np.linalg.lstsq(BD, dom, rcond=None)
    Y = B @ coef[: B.shape[1]]
    Z = D @ coef[B.shape[1] :]
    J = standard_J(A.shape[0] // 2)
    G = (J @ Y).T @ Z
    return QuadraticForm(dom, 0.5 * (G + G.T))


def _m_plus(form: QuadraticForm) -> int:
    return form.inertia(atol=FORM_ATOL).positive


def _m_minus(form: QuadraticForm) -> int:
    return form.inertia(atol=FORM_ATOL).negative


def triple_index(alpha, beta, kappa, tol: float = 1e-7) -> int:
    """``ι(α, β, κ) = m⁺(Q(α, β; κ)) + dim(α∩κ) − dim(α∩β∩κ)``."""
    q = pair_quadratic_form(alpha, beta, kappa, tol)
    ab = subspace_intersection(alpha, beta, tol)
    triple = intersection_dim(ab, kappa, tol) if ab.shape[1] else 0
    return _m_plus(q) + intersection_dim(alpha, kappa, tol) - triple


def triple_index_witness(alpha, beta, kappa, delta, tol: float = 1e-7) -> int:
    """Triple index through a common transversal ``δ``.

    ``ι = m⁻(Q(α, δ; β)) + m⁻(Q(β, δ; κ)) − m⁻(Q(α, δ; κ))``
    """
    for X in (alpha, beta, kappa):
        if intersection_dim(X, delta, tol):
            raise ValueError("witness is not transversal to all three Lagrangians")
    return (
        _m_minus(pair_quadratic_form(alpha, delta, beta, tol))
        + _m_minus(pair_quadratic_form(beta, delta, kappa, tol))
        - _m_minus(pair_quadratic_form(alpha, delta, kappa, tol))
    )


def random_lagrangian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthonormal Lagrangian frame (from a random unitary)."""
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return np.vstack([Q.real, Q.imag])


def random_common_transversal(frames: Sequence, rng: np.random.Generator, margin: float = 1e-3, tries: int = 100):
    n = _cols(frames[0]).shape[0] // 2
    for _ in range(tries):
        d = random_lagrangian(n, rng)
        if all(intersection_dim(F, d, margin) == 0 for F in frames):
            return d
    raise RuntimeError("could not find a common transversal")


def hormander_routes(l1, l2, k1, k2, tol: float = 1e-7) -> tuple[int, int]:
    """Both sides of the triple-index expression of ``s(λ1, λ2; κ1, κ2)``."""
    _same_space(l1, l2, k1, k2)
    first = triple_index(l1, l2, k2, tol) - triple_index(l1, l2, k1, tol)
    second = triple_index(l1, k1, k2, tol) - triple_index(l2, k1, k2, tol)
    return first, second


def hormander_index(l1, l2, k1, k2, tol: float = 1e-7) -> int:
    """Hörmander index ``s(λ1, λ2; κ1, κ2)``; raises if the two routes disagree."""
    first, second = hormander_routes(l1, l2, k1, k2, tol)
    if first != second:
        raise InconsistentIndex(f"Hörmander routes disagree: {first} != {second}")
    return first


# --------------------------------------------------------------------------
# crossing forms and Maslov index


@dataclass(frozen=True, eq=False)
class CrossingForm:
    location: float
    kernel_basis: np.ndarray
    form: QuadraticForm

    @property
    def inertia(self) -> InertiaTriple:
        return self.form.inertia(tol=1e-8, atol=1e-12)

    @property
    def regular(self) -> bool:
        return self.inertia.zero == 0


def crossing_form_hamiltonian(B_at, E, V, tol: float = 1e-7, location: float = float("nan")) -> CrossingForm:
    """Crossing form ``⟨B ξ_i, ξ_j⟩`` on a basis of ``E ∩ V``.

    For a frame path solving ``Z' = J B Z`` this is ``ω(ξ, Z' a)`` restricted
    to the intersection.
    """
    K = subspace_intersection(E, V, tol)
    if K.shape[1] == 0:
        raise EmptyKernel("subspaces are transversal; no crossing here")
    B = np.asarray(B_at, dtype=float)
    G = K.T @ B @ K
    return CrossingForm(location, K, QuadraticForm(K, 0.5 * (G + G.T)))


def _relative_unitaries(frames: np.ndarray, V) -> np.ndarray:
    Vo = _orth(_cols(V))
    Uv = complex_frame(Vo)
    n = Vo.shape[1]
    U = frames[..., :n, :] + 1j * frames[..., n:, :]
    return Uv.conj().T @ U


def crossing_angles(frames, V) -> np.ndarray:
    """Eigen-angles in ``(-π, π]`` of ``W = Ũ Ũ^T`` for one frame or a stack.

    Frames must be orthonormal.  A zero angle marks a direction of ``Λ ∩ V``.
    """
    F = np.asarray(frames, dtype=float)
    single = F.ndim == 2
    if single:
        F = F[None]
    Ut = _relative_unitaries(F, V)
    W = Ut @ np.swapaxes(Ut, -1, -2)
    ang = np.angle(np.linalg.eigvals(W))
    return ang[0] if single else ang


def _wrap(x):
    return (x + np.pi) % TWO_PI - np.pi


def _match(prev: np.ndarray, raw: np.ndarray) -> np.ndarray:
    """Unwrapped continuation of ``prev`` using the closest eigen-angles ``raw``."""
    if prev.size == 1:
        return prev + _wrap(raw - prev)
    cost = np.abs(np.exp(1j * prev)[:, None] - np.exp(1j * raw)[None, :])
    r, c = linear_sum_assignment(cost)
    out = np.empty_like(prev)
    out[r] = prev[r] + _wrap(raw[c] - prev[r])
    return out


def track_angles(frames, V, max_step: float = np.pi / 2) -> np.ndarray:
    """Continuous (unwrapped) eigen-angle tracks along a sampled path.

    Raises
    ------
    UndersampledPath
        If an angle moves more than ``max_step`` between samples.
    """
    raw = crossing_angles(frames, V)
    tracks = np.empty_like(raw)
    tracks[0] = raw[0]
    for i in range(1, raw.shape[0]):
        tracks[i] = _match(tracks[i - 1], raw[i])
        if np.max(np.abs(tracks[i] - tracks[i - 1])) > max_step:
            raise UndersampledPath(f"eigen-angle jump above {max_step:.3g} between samples {i - 1} and {i}")
    return tracks


def _dense_tracks(path, V, max_step: float = np.pi / 4, min_width: float = 1e-9):
    """Angle tracks with extra samples wherever an angle moves more than ``max_step``.

    Inserted frames come from ``path.frame_at``.  Returns the augmented
    ``(grid, frames, tracks)``.
    """
    grid = [float(t) for t in path.grid]
    frames = list(np.asarray(path.frames, dtype=float))
    raw = list(crossing_angles(np.asarray(frames), V))
    tracks = [raw[0]]
    i = 1
    while i < len(grid):
        th = _match(tracks[-1], raw[i])
        if np.max(np.abs(th - tracks[-1])) <= max_step:
            tracks.append(th)
            i += 1
            continue
        a, b = grid[i - 1], grid[i]
        if b - a < min_width:
            raise UndersampledPath(f"eigen-angle jump above {max_step:.3g} within {b - a:.1e} of tau={a:.12g}")
        m = 0.5 * (a + b)
        F = np.asarray(path.frame_at(m), dtype=float)
        grid.insert(i, m)
        frames.insert(i, F)
        raw.insert(i, crossing_angles(F, V))
    return np.array(grid), np.array(frames), np.array(tracks)


@dataclass(frozen=True, eq=False)
class LocatedCrossing:
    """A refined instant where the path meets ``V``."""

    tau: float
    width: float
    multiplicity: int
    events: int
    direction: int
    endpoint: str | None
    frame: np.ndarray
    kernel_basis: np.ndarray


@dataclass
class _Event:
    tau: float
    width: float
    direction: int
    endpoint: str | None = None


def _bisect_event(path, V, a, b, track, target, direction, angles_a, width_tol):
    th_a = angles_a.copy()
    while b - a > width_tol:
        m = 0.5 * (a + b)
        th_m = _match(th_a, crossing_angles(path.frame_at(m), V))
        if (th_m[track] / TWO_PI - target) * direction < 0:
            a, th_a = m, th_m
        else:
            b = m
    return _Event(0.5 * (a + b), b - a, direction)


def locate_crossings(
    path,
    V,
    *,
    tol: float = 1e-7,
    width_tol: float | None = None,
    snap: float = 1e-10,
) -> list[LocatedCrossing]:
    """Find and refine every instant where ``path`` meets ``V``.

    ``path`` needs ``grid`` (increasing), ``frames`` (orthonormal, shape
    ``(m, 2n, n)``) and ``frame_at(τ)``.

    Parameters
    ----------
    tol
        Principal-angle sine below which directions count as intersecting.
    width_tol
        Final bracket width; defaults to ``1e-10`` times the path length.
    snap
        Angles within ``snap`` of ``2πk`` at an interior sample are treated as
        exact hits on that sample.
    """
    if width_tol is None:
        width_tol = 1e-10 * max(float(path.grid[-1] - path.grid[0]), 1.0)
    grid, frames, tracks = _dense_tracks(path, V)
    phi = tracks / TWO_PI
    m = len(grid)
    events: list[_Event] = []

    # a sample "hits" V on track k when its angle sits on a multiple of 2π;
    # endpoint hits use the intersection tolerance, interior ones `snap`
    nearest = np.round(phi)
    dist = np.abs(phi - nearest) * TWO_PI
    hit = dist < snap
    hit[0] = dist[0] < 4.0 * tol
    hit[-1] = dist[-1] < 4.0 * tol
    q = np.where(hit, nearest, phi)

    for idx, tag in ((0, "left"), (m - 1, "right")):
        for _ in range(int(hit[idx].sum())):
            events.append(_Event(float(grid[idx]), 0.0, 0, tag))

    for k in range(phi.shape[1]):
        p = q[:, k]
        i = 1
        while i < m - 1:
            if not hit[i, k]:
                i += 1
                continue
            lo, hi = i - 1, i
            while hi < m - 1 and hit[hi, k]:
                hi += 1
            run_start, i = lo + 1, hi
            if hit[lo, k] or hit[hi, k]:
                continue  # run attached to an endpoint crossing
            j = nearest[run_start, k]
            before, after = np.sign(p[lo] - j), np.sign(p[hi] - j)
            if before == after:
                raise NonRegularCrossing(float(grid[run_start]), f"tangential contact with V at tau={grid[run_start]:.12g}")
            events.append(_Event(float(grid[run_start]), 0.0, int(after)))
        for i in range(m - 1):
            a, b = p[i], p[i + 1]
            lo_v, hi_v = min(a, b), max(a, b)
            ints = [j for j in range(int(np.floor(lo_v)), int(np.ceil(hi_v)) + 1) if lo_v < j < hi_v]
            if not ints:
                continue
            if len(ints) > 1:
                raise UndersampledPath("an angle track passed two crossings between consecutive samples")
            d = 1 if b > a else -1
            events.append(_bisect_event(path, V, grid[i], grid[i + 1], k, ints[0], d, tracks[i], width_tol))

    return _merge(events, path, V, tol, width_tol)


def _merge(events, path, V, tol, width_tol) -> list[LocatedCrossing]:
    events = sorted(events, key=lambda e: (e.tau, e.endpoint or ""))
    groups: list[list[_Event]] = []
    for ev in events:
        if groups and ev.endpoint == groups[-1][0].endpoint and abs(ev.tau - groups[-1][-1].tau) <= 4 * width_tol:
            groups[-1].append(ev)
        else:
            groups.append([ev])
    out = []
    for g in groups:
        tau = float(np.mean([e.tau for e in g]))
        Z = np.asarray(path.frame_at(tau), dtype=float)
        K = subspace_intersection(Z, V, tol)
        mult = K.shape[1]
        if mult != len(g):
            raise UnresolvedCluster(
                f"crossing near tau={tau:.12g}: {len(g)} angle events but intersection dimension {mult}"
            )
        out.append(
            LocatedCrossing(
                tau=tau,
                width=max(e.width for e in g),
                multiplicity=mult,
                events=len(g),
                direction=int(sum(e.direction for e in g)),
                endpoint=g[0].endpoint,
                frame=Z,
                kernel_basis=K,
            )
        )
    return out


FormProvider = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


def finite_difference_form(path, h: float = 1e-6) -> FormProvider:
    """Crossing form ``ω(ξ, Λ'(τ) ξ)`` from central differences of ``path.frame_at``."""
    lo, hi = float(path.grid[0]), float(path.grid[-1])

    def aligned(Z0, tau):
        Z = np.asarray(path.frame_at(tau), dtype=float)
        return Z @ np.linalg.inv(Z0.T @ Z)

    def provider(tau, Z0, K):
        Z0 = np.asarray(Z0, dtype=float)
        tp, tm = min(tau + h, hi), max(tau - h, lo)
        D = (aligned(Z0, tp) - aligned(Z0, tm)) / (tp - tm)
        c = Z0.T @ K
        J = standard_J(Z0.shape[0] // 2)
        return (J @ K).T @ (D @ c)

    return provider


@dataclass(frozen=True, eq=False)
class MaslovResult:
    index: int
    crossings: list = field(default_factory=list)
    regular: bool = True
    winding: int = 0


def maslov_index(path, V, form_eval: FormProvider | None = None, *, tol: float = 1e-7, strict: bool = True,
                 crossings: list[LocatedCrossing] | None = None) -> MaslovResult:
    """Maslov index of ``(V, Λ(τ))`` from regular crossings.

    ``m⁺(Γ) at the left end + Σ sign(Γ) over interior crossings − m⁻(Γ) at the
    right end``.  ``form_eval(τ, frame, kernel_basis)`` returns the gram of
    the crossing form; the default differentiates the path numerically.

    With ``strict`` a degenerate crossing form raises
    :class:`NonRegularCrossing`; otherwise the result is flagged irregular and
    degenerate directions contribute nothing.
    """
    if form_eval is None:
        form_eval = finite_difference_form(path)
    if crossings is None:
        crossings = locate_crossings(path, V, tol=tol)
    forms = []
    index = 0
    regular = True
    for c in crossings:
        G = np.asarray(form_eval(c.tau, c.frame, c.kernel_basis), dtype=float)
        cf = CrossingForm(c.tau, c.kernel_basis, QuadraticForm(c.kernel_basis, 0.5 * (G + G.T)))
        forms.append(cf)
        inn = cf.inertia
        if inn.zero:
            regular = False
            if strict:
                raise NonRegularCrossing(c.tau)
        if c.endpoint == "left":
            index += inn.positive
        elif c.endpoint == "right":
            index -= inn.negative
        else:
            index += inn.signature
    winding = sum(c.direction for c in crossings if c.endpoint is None)
    return MaslovResult(index, forms, regular, winding)


def discrete_spectral_flow(path: Sequence, tol: float = 1e-10) -> int:
    """Spectral flow of a sampled path of symmetric matrices.

    Accumulates ``m⁻(A_i) − m⁻(A_{i+1})`` along the grid; with nondegenerate
    endpoints this telescopes to ``m⁻(first) − m⁻(last)``.
    """
    mats = [np.asarray(A, dtype=float) for A in path]
    if len(mats) < 2:
        raise ValueError("need at least two samples")
    for end in (mats[0], mats[-1]):
        if inertia(end, tol).zero:
            raise DegenerateEndpoint("spectral flow endpoints must be invertible")
    neg = [inertia(A, tol).negative for A in mats]
    return int(sum(neg[i] - neg[i + 1] for i in range(len(neg) - 1)))


# --------------------------------------------------------------------------
# path containers


class FunctionPath:
    """A path given by a callable ``τ ↦ frame``, sampled on ``grid``."""

    def __init__(self, func: Callable[[float], np.ndarray], grid):
        self.func = func
        self.grid = np.asarray(grid, dtype=float)
        self.frames = np.array([_orth(np.asarray(func(t), dtype=float)) for t in self.grid])

    def frame_at(self, tau: float) -> np.ndarray:
        return _orth(np.asarray(self.func(tau), dtype=float))


class SampledPath:
    """A path known only at samples.

    Between samples the frames are gauge-aligned (orthogonal Procrustes),
    blended linearly and projected back onto the Lagrangian Grassmannian.
    """

    def __init__(self, grid, frames):
        self.grid = np.asarray(grid, dtype=float)
        if self.grid.ndim != 1 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        self.frames = np.array([_orth(np.asarray(F, dtype=float)) for F in frames])
        if len(self.frames) != len(self.grid):
            raise DimensionMismatch("one frame per grid point is required")

    def frame_at(self, tau: float) -> np.ndarray:
        g = self.grid
        j = int(np.clip(np.searchsorted(g, tau, side="right") - 1, 0, len(g) - 2))
        th = (tau - g[j]) / (g[j + 1] - g[j])
        Za, Zb = self.frames[j], self.frames[j + 1]
        U, _, Vt = np.linalg.svd(Zb.T @ Za)
        Z = (1 - th) * Za + th * (Zb @ U @ Vt)
        return _orth(lagrangian_projection(Z))


def rotating_line(a: float, b: float, m: int = 101, reverse: bool = False) -> FunctionPath:
    """``Λ(t) = span(cos t, sin t)`` on ``[a, b]``; meets ``span(0, 1)`` at ``t ∈ π/2 + πℤ``.

    With ``reverse`` the path is ``t ↦ Λ(-t)``, the same curve run backwards.
    """
    s = -1.0 if reverse else 1.0
    return FunctionPath(lambda t: np.array([[np.cos(s * t)], [np.sin(s * t)]]), np.linspace(a, b, m))
