import numpy as np
import pytest
import scipy.sparse.linalg as spla

from slmorse.errors import HypothesisViolation, NotEquilibrium, ProblemFileError, TangentialZero
from slmorse.flows import PropagationConfig, propagate_frame
from slmorse.oracle import DiscretizationConfig, negative_count, rough_spectrum
from slmorse.symplectic import gap_distance
from slmorse.waves import (
    BVPConfig,
    ReactionSystem,
    WaveProfile,
    check_H,
    critical_points,
    fd_operators,
    instability_verdict,
    kernel_vector,
    rough_spectrum_L,
    setup_from_dict,
    solve_front,
    weighted_identity_error,
    weighted_problem,
)

FAST = PropagationConfig(sample_dt=0.05)
C_NAGUMO = np.sqrt(2) * (0.5 - 0.25)


def test_check_H_examples():
    assert check_H(ReactionSystem.nagumo(0.25), [0.0], [1.0])
    assert check_H(ReactionSystem.kdv(), [0.0], [0.0])
    lin = ReactionSystem.tabulated(np.linspace(-1, 1, 41), np.linspace(-1, 1, 41))  # ∇F(u) = u
    assert not check_H(lin, [0.0], [0.0])
    with pytest.raises(NotEquilibrium):
        check_H(ReactionSystem.nagumo(0.25), [0.5], [1.0])


def test_hessian_matches_gradient():
    sys = ReactionSystem.coupled_nagumo(0.25, 0.1)
    u = np.array([0.3, 0.7])
    h = 1e-6
    num = np.column_stack([(sys.grad(u + h * e) - sys.grad(u - h * e)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(sys.hess(u), num, atol=1e-8)
    assert np.allclose(sys.hess(u), sys.hess(u).T)


def test_nagumo_front_recovered(nagumo):
    sys, exact = nagumo
    prof = solve_front(sys, 0.3, [1.0], [0.0])
    assert abs(prof.c - C_NAGUMO) < 1e-6
    ref = 1 / (1 + np.exp(prof.grid / np.sqrt(2)))
    assert np.max(np.abs(prof.w[:, 0] - ref)) < 1e-6
    assert prof.residual < 1e-8
    prof.check()


def test_pulse_recovered():
    prof = solve_front(ReactionSystem.kdv(), 0.0, [0.0], [0.0], kind="pulse", amplitude=1.5)
    assert prof.c == 0.0
    assert np.max(np.abs(prof.w[:, 0] - 1.5 / np.cosh(prof.grid / 2) ** 2)) < 1e-6
    assert prof.residual < 1e-8


def test_coupled_system_front():
    sys = ReactionSystem.coupled_nagumo(0.25, 0.0)  # decoupled copies: same speed as the scalar front
    prof = solve_front(sys, 0.3, [1.0, 1.0], [0.0, 0.0])
    assert abs(prof.c - C_NAGUMO) < 1e-6
    assert prof.residual < 1e-8


def test_coupled_front_verdict():
    # tail decay of the translation mode must not register as a zero when n = 2
    sys = ReactionSystem.coupled_nagumo(0.25, 0.1)
    prof = solve_front(sys, 0.3, [1.0, 1.0], [0.0, 0.0])
    a = instability_verdict(sys, prof, FAST)
    assert a.verdict == "stable-candidate"
    assert a.kernel_hits == 0 and a.morse_index.index == 0


def test_front_requires_H():
    lin = ReactionSystem.tabulated(np.linspace(-1, 1, 41), np.linspace(-1, 1, 41))
    with pytest.raises(HypothesisViolation):
        solve_front(lin, 0.0, [0.0], [0.0], kind="pulse", amplitude=0.5)


def test_weighted_problem_limits(nagumo, pulse):
    sys, prof = nagumo
    p = weighted_problem(sys, prof)
    assert p.R.limit_minus[0, 0] == pytest.approx(C_NAGUMO**2 / 4 + 0.75)
    assert p.R.limit_plus[0, 0] == pytest.approx(C_NAGUMO**2 / 4 + 0.25)
    sys, prof = pulse
    p = weighted_problem(sys, prof)
    for x in (0.0, 1.3, -4.0):
        assert p.R(x)[0, 0] == pytest.approx(1 - 3 / np.cosh(x / 2) ** 2, abs=1e-9)


def test_critical_points_examples(nagumo, pulse):
    assert critical_points(nagumo[1]) == []
    cps = critical_points(pulse[1])
    assert len(cps) == 1 and abs(cps[0]) < 1e-8
    grid = np.linspace(-5, 5, 101)
    const = WaveProfile(0.0, grid, np.zeros((101, 1)), np.zeros((101, 1)), "constant", np.zeros(1), np.zeros(1),
                        ReactionSystem.kdv())
    with pytest.raises(TangentialZero):
        critical_points(const)


def test_verdicts(nagumo, pulse):
    a = instability_verdict(*nagumo, FAST)
    assert a.verdict == "stable-candidate" and a.morse_lower_bound == 0 and a.morse_index.index == 0
    b = instability_verdict(*pulse, FAST)
    assert b.verdict == "spectrally-unstable" and b.morse_lower_bound == 1 and b.morse_index.index == 1
    assert b.kernel_hits == 1
    assert b.morse_lower_bound <= b.morse_index.index


def test_constant_profile_verdict():
    sys = ReactionSystem.kdv()
    grid = np.linspace(-20, 20, 401)
    const = WaveProfile(0.0, grid, np.zeros((401, 1)), np.zeros((401, 1)), "constant", np.zeros(1), np.zeros(1), sys)
    a = instability_verdict(sys, const, FAST)
    assert a.verdict == "stable-candidate" and a.morse_index.index == 0


def test_kernel_vector_solves_weighted_system(nagumo):
    sys, prof = nagumo
    grid = np.linspace(-5, 5, 201)
    z = kernel_vector(prof, grid)
    path = propagate_frame(weighted_problem(sys, prof), z[0][:, None], -5.0, 5.0, FAST, samples=grid)
    assert max(gap_distance(z[i][:, None], F) for i, F in enumerate(path.frames)) < 1e-6


def test_pulse_spectrum(pulse):
    sys, prof = pulse
    ev = rough_spectrum(weighted_problem(sys, prof), DiscretizationConfig(T_o=40, N=4000), 3)
    assert np.allclose(ev, [-1.25, 0.0, 0.75], atol=1e-3)
    top = rough_spectrum_L(sys, prof, k=1)
    assert top[0] == pytest.approx(1.25, abs=1e-3)


@pytest.mark.parametrize("which", ["nagumo", "pulse"])
def test_L_and_weighted_spectra_agree(which, request):
    # L_h is non-symmetric when c != 0; its eigenvalues must be those of -𝕃_h
    sys, prof = request.getfixturevalue(which)
    xi = np.linspace(-20, 20, 802)[1:-1]
    Lh, Lw, _ = fd_operators(sys, prof, xi)
    a = np.sort(spla.eigs(Lh.tocsc(), k=3, sigma=1.5, return_eigenvectors=False).real)
    b = np.sort(-spla.eigsh(Lw.tocsc(), k=3, sigma=-1.5, return_eigenvectors=False))
    assert np.allclose(a, b, atol=1e-6)


def test_weighted_identity(nagumo):
    assert weighted_identity_error(*nagumo) < 1e-8
    xi = np.linspace(-30, 30, 3001)
    assert weighted_identity_error(*nagumo, grid=xi) < 1e-8


def test_nagumo_oracle_ground_state(nagumo):
    sys, prof = nagumo
    p = weighted_problem(sys, prof)
    cfg = DiscretizationConfig(T_o=40, N=4000)
    assert negative_count(p, cfg, threshold=-1e-6) == 0
    assert abs(rough_spectrum(p, cfg, 1)[0]) < 1e-4


def test_setup_parsing():
    s = setup_from_dict({"preset": "nagumo", "params": [0.25], "u_minus": [1], "u_plus": [0], "c_guess": 0.3})
    assert s.kind == "front" and s.system.n == 1
    with pytest.raises(ProblemFileError):
        setup_from_dict({"preset": "unknown", "u_minus": [0], "u_plus": [0]})
    with pytest.raises(ProblemFileError):
        setup_from_dict({"preset": "kdv", "u_minus": [0], "u_plus": [0], "kind": "spiral"})


def test_bvp_config_is_used():
    prof = solve_front(ReactionSystem.nagumo(0.25), 0.3, [1.0], [0.0], BVPConfig(L=25, output_dx=0.05))
    assert prof.grid[0] == pytest.approx(-25) and prof.grid[1] - prof.grid[0] == pytest.approx(0.05)
