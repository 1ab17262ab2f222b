import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slmorse.errors import DegenerateSolution, HypothesisViolation, NotInBundle, PlateauFailure
from slmorse.flows import PropagationConfig, unstable_path
from slmorse.morse import (
    detect_conjugate_points,
    diagnostics_table,
    kernel_hit_count,
    morse_index,
    write_diagnostics_csv,
)
from slmorse.problems import constant_problem, direct_sum, poschl_teller, poschl_teller_index, random_problem
from slmorse.sturm import Constant, Sech2Well, SturmLiouvilleProblem

FAST = PropagationConfig(sample_dt=0.05)


def test_no_crossings_for_positive_problem():
    assert detect_conjugate_points(unstable_path(constant_problem(1.0), FAST)) == []
    assert morse_index(constant_problem(1.0), FAST).index == 0


def test_sech2_well_two_crossings():
    recs = detect_conjugate_points(unstable_path(poschl_teller(2, 0.5)))
    assert [r.multiplicity for r in recs] == [1, 1]
    assert all(tuple(r.form_inertia) == (1, 0, 0) for r in recs)
    assert all(r.width <= 1e-10 * 40 for r in recs)


def test_direct_sum_with_trivial_problem():
    recs = detect_conjugate_points(unstable_path(direct_sum(poschl_teller(2, 0.5), constant_problem(1.0)), FAST))
    base = detect_conjugate_points(unstable_path(poschl_teller(2, 0.5), FAST))
    assert [r.multiplicity for r in recs] == [1, 1]
    assert np.allclose([r.tau for r in recs], [r.tau for r in base], atol=1e-6)


@pytest.mark.parametrize("kappa, expected", [(2.0, 1), (0.5, 2)])
def test_morse_index_examples(kappa, expected):
    res = morse_index(poschl_teller(2, kappa), oracle=True)
    assert res.index == res.maslov_crosscheck == res.oracle_crosscheck == expected
    assert res.plateau_verified and res.consistent


def test_double_crossing_multiplicity():
    # two identical blocks cross the Dirichlet plane simultaneously
    p = direct_sum(poschl_teller(1, 0.3), poschl_teller(1, 0.3))
    res = morse_index(p, FAST, plateau=False)
    assert [r.multiplicity for r in res.crossings] == [2]
    assert res.index == res.maslov_crosscheck == 2


def test_hypothesis_violation():
    with pytest.raises(HypothesisViolation):
        morse_index(constant_problem(-1.0))


def test_strict_plateau_failure_carries_result(monkeypatch):
    import slmorse.morse as m

    real = m._run
    calls = []

    def fake(p, cfg, retries=2):
        path, recs, T = real(p, cfg, retries)
        calls.append(1)
        return (path, recs if len(calls) == 1 else recs[:1], T)

    monkeypatch.setattr(m, "_run", fake)
    with pytest.raises(PlateauFailure) as ei:
        m.morse_index(poschl_teller(2, 0.5), FAST, strict_plateau=True)
    assert ei.value.result.index == 2 and ei.value.result.plateau_index == 1


@settings(max_examples=6)
@given(st.integers(0, 10**6))
def test_random_index_matches_oracle_and_crossings_positive(seed):
    p = random_problem(np.random.default_rng(seed), 1)
    res = morse_index(p, FAST, plateau=False, oracle=True)
    assert res.index == res.maslov_crosscheck == res.oracle_crosscheck
    assert all(r.form_inertia.negative == 0 and r.form_inertia.zero == 0 for r in res.crossings)


@settings(max_examples=4)
@given(st.integers(1, 3), st.floats(0.6, 1.4))
def test_poschl_teller_family(m, b):
    kappa = 0.5 * b**2
    assert morse_index(poschl_teller(m, kappa, rate=b), FAST, plateau=False).index == poschl_teller_index(m, kappa, b)


def _bound_state(path):
    # sech²t spans the kernel of -w'' + (4 - 6 sech²t) w
    t = path.grid
    w = 1 / np.cosh(t) ** 2
    wp = -2 * np.tanh(t) / np.cosh(t) ** 2
    return np.column_stack([wp, w])


def test_kernel_hit_count_monotone_is_zero():
    p = poschl_teller(2, 4.0)  # kernel sech²t, which never vanishes
    path = unstable_path(p, FAST)
    assert kernel_hit_count(path, _bound_state(path)) == 0


def test_kernel_hit_count_single_zero():
    # tanh t sech t spans the kernel at κ = 1 and vanishes once
    p = poschl_teller(2, 1.0)
    path = unstable_path(p, FAST)
    t = path.grid
    w = np.tanh(t) / np.cosh(t)
    wp = (1 / np.cosh(t) ** 3) - np.tanh(t) ** 2 / np.cosh(t)
    assert kernel_hit_count(path, np.column_stack([wp, w])) == 1


def test_kernel_hit_count_errors():
    p = poschl_teller(2, 4.0)
    path = unstable_path(p, FAST)
    t = path.grid
    with pytest.raises(NotInBundle):
        kernel_hit_count(path, np.column_stack([np.ones_like(t), np.ones_like(t)]))
    # a position block that vanishes identically is rejected one way or the other
    with pytest.raises((NotInBundle, DegenerateSolution)):
        kernel_hit_count(path, np.column_stack([np.ones_like(t), np.zeros_like(t)]))


def test_diagnostics_csv(tmp_path):
    res = morse_index(poschl_teller(2, 0.5), FAST, plateau=False)
    rows = diagnostics_table(res.path, res.crossings)
    assert rows.shape == (len(res.path.grid), 4) and rows[:, 3].sum() == 2
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_diagnostics_csv(f1, res.path, res.crossings)
    write_diagnostics_csv(f2, morse_index(poschl_teller(2, 0.5), FAST, plateau=False).path, res.crossings)
    assert f1.read_bytes() == f2.read_bytes()
    assert f1.read_text().splitlines()[0] == "tau,sigma_min_W,det_W,crossing_flag"


def test_gauge_and_sampling_invariance():
    p = random_problem(np.random.default_rng(12), 2)
    base = morse_index(p, FAST, plateau=False).index
    for cfg in (PropagationConfig(sample_dt=0.025), PropagationConfig(sample_dt=0.05, gauge_seed=9)):
        assert morse_index(p, cfg, plateau=False).index == base


def test_constant_P_rescales_time():
    # with s = t / √2, -(2 w')' + (κ - 6 sech²(s)) w becomes the m=2 well in s
    b = 1 / np.sqrt(2)
    p = SturmLiouvilleProblem(Constant(2.0), Constant(0.0), Sech2Well(0.5, 12 * b**2, b))
    res = morse_index(p, FAST, plateau=False, oracle=True)
    assert res.index == res.oracle_crosscheck == poschl_teller_index(2, 0.5)
