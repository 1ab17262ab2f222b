import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slmorse.errors import UnstableCount
from slmorse.oracle import (
    BlockTridiagonal,
    DiscretizationConfig,
    assemble_discrete,
    assemble_mass,
    banded_negative_count,
    block_inertia,
    level_counts,
    negative_count,
    rough_spectrum,
)
from slmorse.problems import constant_problem, direct_sum, poschl_teller, random_problem
from slmorse.sturm import Constant, Sum, SturmLiouvilleProblem


def test_hand_assembly():
    p = SturmLiouvilleProblem(Constant(1.0), Constant(0.0), Constant(0.0))
    K = assemble_discrete(p, DiscretizationConfig(T_o=1.5, N=2)).todense()
    assert np.allclose(K, [[2.0, -1.0], [-1.0, 2.0]])


def test_mass_matrix_hand_values():
    p = constant_problem(1.0)
    M = assemble_mass(p, DiscretizationConfig(T_o=1.5, N=2)).todense()
    assert np.allclose(M, np.array([[4.0, 1.0], [1.0, 4.0]]) / 6)


@settings(max_examples=10)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_assembly_is_symmetric(seed, n):
    p = random_problem(np.random.default_rng(seed), n)
    K = assemble_discrete(p, DiscretizationConfig(T_o=10, N=200)).todense()
    assert np.array_equal(K, K.T)


def test_direct_sum_is_block_diagonal():
    p1, p2 = poschl_teller(2, 0.5), constant_problem(1.0)
    K = assemble_discrete(direct_sum(p1, p2), DiscretizationConfig(T_o=10, N=100)).todense()
    K1 = assemble_discrete(p1, DiscretizationConfig(T_o=10, N=100)).todense()
    assert np.allclose(K[0::2, 0::2], K1)
    assert np.allclose(K[0::2, 1::2], 0.0)


def test_shift_monotonicity():
    cfg = DiscretizationConfig(T_o=15, N=600, richardson_levels=1)
    counts = []
    for c in (-1.0, 0.0, 1.0, 3.0, 6.0):
        p = SturmLiouvilleProblem(Constant(1.0), Constant(0.0), Sum([poschl_teller(2, 0.5).R, Constant(c)]))
        counts.append(level_counts(p, cfg)[0])
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] == 0


@settings(max_examples=10)
@given(st.integers(0, 10**6), st.sampled_from([1, 2, 3]))
def test_block_inertia_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    N = 30
    D = rng.standard_normal((N, n, n))
    D = D + np.swapaxes(D, 1, 2)
    E = rng.standard_normal((N - 1, n, n))
    A = BlockTridiagonal(D, E)
    ev = np.linalg.eigvalsh(A.todense())
    pos, zero, neg = block_inertia(A)
    assert (pos, neg) == (int(np.sum(ev > 0)), int(np.sum(ev < 0))) and zero == 0
    assert banded_negative_count(A) == neg


def test_negative_count_examples():
    assert negative_count(constant_problem(1.0)) == 0
    assert negative_count(poschl_teller(2, 0.5)) == 2
    assert negative_count(poschl_teller(2, 2.0)) == 1


def test_zero_eigenvalue_is_unstable():
    with pytest.raises(UnstableCount):
        negative_count(poschl_teller(2, 1.0))
    # deflated threshold counts only the strictly negative one
    assert negative_count(poschl_teller(2, 1.0), threshold=-1e-6) == 1


def test_negative_count_requires_resolution():
    with pytest.raises(ValueError):
        negative_count(constant_problem(1.0), DiscretizationConfig(N=50))


def test_rough_spectrum_examples():
    for T_o in (10.0, 30.0):
        ev = rough_spectrum(constant_problem(1.0), DiscretizationConfig(T_o=T_o, N=2000), 1)
        assert ev[0] == pytest.approx(1 + (np.pi / (2 * T_o)) ** 2, abs=1e-4)
    ev = rough_spectrum(poschl_teller(2, 2.0), DiscretizationConfig(T_o=30, N=4000), 2)
    assert ev[0] == pytest.approx(-2.0, abs=1e-3)
    assert ev[1] == pytest.approx(1.0, abs=1e-3)


def test_rough_spectrum_converges_second_order():
    p = poschl_teller(2, 2.0)
    errs = [abs(rough_spectrum(p, DiscretizationConfig(T_o=20, N=N), 1)[0] + 2.0) for N in (400, 800)]
    assert 3.0 < errs[0] / errs[1] < 5.0
