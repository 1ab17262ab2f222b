import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slmorse.errors import NoDecay
from slmorse.indices import random_lagrangian
from slmorse.flows import PropagationConfig, propagate_frame, select_truncation, stable_path, unstable_path
from slmorse.problems import constant_problem, direct_sum, poschl_teller, random_problem
from slmorse.sturm import Constant, Sech2Well, SturmLiouvilleProblem, Tabulated
from slmorse.symplectic import gap_distance, intersection_dim

FAST = PropagationConfig(sample_dt=0.05)


def pathwise_gap(A, B):
    return max(gap_distance(a, b) for a, b in zip(A, B))


def test_truncation_constant_is_T_min():
    assert select_truncation(constant_problem(1.0)) == (-20.0, 20.0)


def test_truncation_sech2_decay():
    # 6 sech²(t) <= 1e-8  <=>  t >= acosh(sqrt(6e8)); the probe grid rounds up by at most one step
    p = SturmLiouvilleProblem(Constant(1.0), Constant(0.0), Sech2Well(1.0, 6.0))
    T = select_truncation(p, PropagationConfig(T_min=1.0), step=0.01)
    t_exact = np.arccosh(np.sqrt(6e8))
    assert t_exact <= T[1] <= t_exact + 0.01
    assert T[0] == -T[1]


def test_truncation_no_decay():
    g = np.linspace(-30, 30, 601)
    vals = (1.0 + 0.5 * np.sin(g))[:, None, None]
    p = SturmLiouvilleProblem(Constant(1.0), Constant(0.0), Tabulated(g, vals, [[1.0]], [[1.0]]))
    with pytest.raises(NoDecay):
        select_truncation(p)


def test_invariant_subspace_is_fixed():
    p = constant_problem(1.0)
    a = p.asymptotics
    path = propagate_frame(p, a.Vp_minus, -5.0, 5.0, FAST)
    assert max(gap_distance(F, a.Vp_minus) for F in path.frames) < 1e-8
    assert gap_distance(a.Vp_minus, [[1.0], [1.0]]) < 1e-12


def test_explicit_exponential_line():
    p = constant_problem(1.0)
    path = propagate_frame(p, [[1.0], [1.0]], 0.0, 3.0, FAST)
    assert gap_distance(path.frames[-1], [[1.0], [1.0]]) < 1e-10
    Z = propagate_frame(p, [[1.0], [0.0]], 0.0, 1.0, FAST).frames[-1]
    # J B = [[0, 1], [1, 0]], so exp(t J B) e1 = (cosh t, sinh t)
    assert gap_distance(Z, [[np.cosh(1.0)], [np.sinh(1.0)]]) < 1e-10


@settings(max_examples=10)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_round_trip(seed, n):
    # backward integration repels from the forward-attracting subspace, so keep the interval short
    rng = np.random.default_rng(seed)
    p = random_problem(rng, n)
    F0 = random_lagrangian(n, rng)
    fwd = propagate_frame(p, F0, -1.0, 1.0, FAST)
    back = propagate_frame(p, fwd.frames[-1], 1.0, -1.0, FAST)
    assert gap_distance(back.frames[0], F0) < 1e-6


@settings(max_examples=10)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.integers(0, 1000))
def test_gauge_invariance(seed, n, gseed):
    p = random_problem(np.random.default_rng(seed), n)
    F0 = p.asymptotics.Vp_minus.columns
    G = np.random.default_rng(gseed).standard_normal((n, n)) + 2 * np.eye(n)
    a = propagate_frame(p, F0, -5.0, 5.0, FAST)
    b = propagate_frame(p, F0 @ G, -5.0, 5.0, FAST)
    assert pathwise_gap(a.frames, b.frames) < 1e-8


def test_gauges_transport_frames():
    p = random_problem(np.random.default_rng(8), 2)
    path = propagate_frame(p, p.asymptotics.Vp_minus, -3.0, 3.0, FAST)
    # Φ(t_{j+1}, t_j) F_j = F_{j+1} G_j, checked by re-integrating one interval
    for j in (0, 40, 100):
        Y = propagate_frame(p, path.frames[j], path.grid[j], path.grid[j + 1], FAST)
        direct = path.frames[j + 1] @ path.gauges[j]
        assert gap_distance(Y.frames[-1], direct) < 1e-9


def test_unstable_and_stable_constant():
    p = constant_problem(1.0)
    U, S = unstable_path(p, FAST), stable_path(p, FAST)
    assert max(gap_distance(F, [[1.0], [1.0]]) for F in U.frames) < 1e-8
    assert max(gap_distance(F, [[1.0], [-1.0]]) for F in S.frames) < 1e-8
    assert U.provenance["kernel_dim"] == 0


def test_isotropy_along_paths():
    p = random_problem(np.random.default_rng(2), 2)
    assert unstable_path(p).isotropy_max() < 1e-8
    assert stable_path(p).isotropy_max() < 1e-8


def test_unstable_limits():
    p = poschl_teller(2, 0.5)
    U = unstable_path(p, FAST)
    a = p.asymptotics
    assert gap_distance(U.frames[0], a.Vp_minus) < 1e-12
    assert gap_distance(U.frames[-1], a.Vp_plus) < 1e-6


def test_direct_sum_paths_decouple():
    p1, p2 = poschl_teller(2, 0.5), poschl_teller(1, 0.3, rate=0.8)
    T = (-20.0, 20.0)
    U = unstable_path(direct_sum(p1, p2), FAST, truncation=T)
    U1, U2 = unstable_path(p1, FAST, truncation=T), unstable_path(p2, FAST, truncation=T)
    Z = np.zeros((len(U.grid), 4, 2))
    Z[:, [0, 2], 0] = U1.frames[:, :, 0]
    Z[:, [1, 3], 1] = U2.frames[:, :, 0]
    assert pathwise_gap(U.frames, Z) < 1e-6


def test_reversal_symmetry_even_well():
    p = poschl_teller(2, 0.7)
    T = (-20.0, 20.0)
    U, S = unstable_path(p, FAST, truncation=T), stable_path(p, FAST, truncation=T)
    flip = np.diag([-1.0, 1.0])
    assert pathwise_gap(S.frames, [flip @ F for F in U.frames[::-1]]) < 1e-6


def test_bundles_transversal_without_kernel():
    p = poschl_teller(2, 0.5)
    U, S = unstable_path(p, FAST), stable_path(p, FAST)
    i = int(np.argmin(np.abs(U.grid)))
    assert intersection_dim(U.frames[i], S.frames[i], 1e-6) == 0


def test_kernel_is_detected_and_spliced():
    p = poschl_teller(2, 4.0)  # eigenvalues κ - 4 and κ - 1, so zero is simple
    U = unstable_path(p, FAST)
    S = stable_path(p, FAST)
    assert U.provenance["kernel_dim"] == 1
    i = int(np.argmin(np.abs(U.grid)))
    assert intersection_dim(U.frames[i], S.frames[i], 1e-6) == 1
    assert U.isotropy_max() < 1e-8


def test_gauge_seed_changes_frames_not_spans():
    p = random_problem(np.random.default_rng(5), 2)
    a = unstable_path(p, FAST)
    b = unstable_path(p, PropagationConfig(sample_dt=0.05, gauge_seed=3))
    assert not np.allclose(a.frames, b.frames)
    assert pathwise_gap(a.frames, b.frames) < 1e-8


def test_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(T_min=50.0, T_max=40.0)
    with pytest.raises(ValueError):
        PropagationConfig(rel_tol=0.0)
    r = PropagationConfig().refined()
    assert r.trunc_eps == pytest.approx(1e-10) and r.T_min == 40.0
