from __future__ import annotations

import numpy as np
import pytest

from conftest import random_hermitian
from ptgain.errors import ConfigError
from ptgain.feedback_sme import FeedbackConfig
from ptgain.lindblad import NonHermitianModel, integrate_nonhermitian, max_abs_difference
from ptgain.pt_models import (
    LambdaParams,
    PTParams,
    PTPhase,
    balanced_models,
    effective_feedback_hamiltonian,
    effective_jump,
    exact_nonhermitian_state,
    feedback_gain_for_balance,
    gamma_eff,
    ideal_pt_hamiltonian,
    is_pt_symmetric,
    lambda_effective_model,
    light_shift,
    natural_feedback_hamiltonian,
    no_ground_gain_witness,
    original_lambda_hamiltonian,
    pt_hamiltonian,
    pt_spectrum,
)
from ptgain.quantum_core import LOWER, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, restrict, transition

P0 = transition(2, 0, 0)
P1 = transition(2, 1, 1)
PANEL_A = LambdaParams(0.5, 0.0, 2.5, 0.1)


def natural(F, G, gamma_1=1.0) -> FeedbackConfig:
    return FeedbackConfig(gamma_1, LOWER, F, G)

# --------------------------- Rates and gains ---------------------------

def test_gamma_eff_examples():
    assert gamma_eff(PANEL_A) == pytest.approx(0.1)
    assert gamma_eff(LambdaParams(2.0, 0.0, 40.0, 0.1)) == pytest.approx(0.1)
    assert gamma_eff(LambdaParams(0.0, 0.0, 3.0, 0.1)) == 0.0


def test_lambda_params_validation():
    with pytest.raises(ValueError):
        LambdaParams(0.5, 0.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        LambdaParams(0.5, 0.0, 2.5, -0.1)
    with pytest.raises(ValueError):
        LambdaParams(-0.5, 0.0, 2.5, 0.1)
    with pytest.raises(ValueError):
        PTParams(-1.0, 0.5)
    with pytest.raises(ConfigError) as excinfo:
        LambdaParams(0.5, 0.0, -2.5, 0.1)
    assert excinfo.value.field == 'gamma_a'


def test_feedback_gain_for_balance_examples():
    assert feedback_gain_for_balance(0.1, 0.1) == pytest.approx(np.sqrt(0.1))
    assert feedback_gain_for_balance(0.1, 0.0) == pytest.approx(np.sqrt(0.1) / 2)
    assert feedback_gain_for_balance(4.0, 0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        feedback_gain_for_balance(0.0, 0.1)


def test_balance_gain_solves_balance_condition():
    for g_eff, g_10 in ((0.1, 0.1), (0.3, 0.05), (2.0, 1.0)):
        G = feedback_gain_for_balance(g_eff, g_10)
        assert G * np.sqrt(g_eff) - g_eff / 2 == pytest.approx(g_10 / 2, abs=1e-15)

# --------------------------- No ground-state gain ---------------------------

def test_natural_feedback_examples():
    for G in (0.0, 1.0, 3.7):
        assert np.allclose(natural_feedback_hamiltonian(natural(SIGMA_X, G), np.zeros((2, 2))), -0.5j * P1)
    H = natural_feedback_hamiltonian(natural(SIGMA_Y, 1.0), np.zeros((2, 2)))
    assert np.allclose(H - (-0.5j * P1), 1j * P1, atol=1e-15)
    H_sys = 0.3 * SIGMA_Z
    assert np.allclose(natural_feedback_hamiltonian(natural(SIGMA_Y, 0.0), H_sys), H_sys - 0.5j * P1)


@pytest.mark.parametrize("F, G", [(SIGMA_X, 3.7), (SIGMA_Y, -2.0), (SIGMA_Z, 1.0)])
def test_no_ground_gain_witness_examples(F, G):
    assert no_ground_gain_witness(natural(F, G)) == 0.0
    assert no_ground_gain_witness(natural(F, G), exact=True) == 0.0


def test_no_ground_gain_for_any_hermitian_feedback(rng):
    for _ in range(200):
        cfg = natural(random_hermitian(rng, 2), float(rng.uniform(-5, 5)), float(rng.uniform(0.1, 2)))
        assert no_ground_gain_witness(cfg) <= 1e-12
        assert no_ground_gain_witness(cfg, exact=True) <= 1e-12

# --------------------------- Lambda-system gain ---------------------------

def test_effective_jump_matches_reduction():
    assert np.allclose(effective_jump(PANEL_A), 1j * np.sqrt(0.1) * transition(2, 1, 0))
    detuned = LambdaParams(0.3, 0.7, 2.0, 0.1)
    (L_reduced,) = lambda_effective_model(detuned).ground_jumps()
    assert np.allclose(effective_jump(detuned), L_reduced, atol=1e-14)


def test_effective_feedback_hamiltonian_examples():
    G = feedback_gain_for_balance(gamma_eff(PANEL_A), PANEL_A.gamma_10)
    H = effective_feedback_hamiltonian(PANEL_A, G)
    assert np.allclose(H, 0.05j * P0 - 0.05j * P1, atol=1e-15)
    lossy = effective_feedback_hamiltonian(PANEL_A, 0.0)
    assert np.allclose(lossy, -0.05j * P1 - 0.05j * P0, atol=1e-15)


def test_feedback_term_on_effective_jump():
    L_eff = effective_jump(PANEL_A)
    term = L_eff.conj().T @ SIGMA_X - SIGMA_X @ L_eff
    assert np.allclose(term, -2j * np.sqrt(0.1) * P0, atol=1e-15)


def test_ideal_pt_hamiltonian_examples():
    assert np.allclose(ideal_pt_hamiltonian(0.1), np.diag([0.05j, -0.05j]))
    H_sys = 0.2 * SIGMA_X
    assert np.array_equal(ideal_pt_hamiltonian(0.0, H_sys), H_sys)


def test_balance_identity(rng):
    for _ in range(100):
        p = LambdaParams(float(rng.uniform(0.1, 2.0)), 0.0, float(rng.uniform(1.0, 40.0)), float(rng.uniform(0.0, 1.0)))
        H_sys = random_hermitian(rng, 2, 0.2)
        G = feedback_gain_for_balance(gamma_eff(p), p.gamma_10)
        H_eff = effective_feedback_hamiltonian(p, G, H_sys=H_sys)
        assert np.max(np.abs(H_eff - ideal_pt_hamiltonian(p.gamma_10, H_sys))) <= 1e-14


def test_ideal_hamiltonian_is_pt_symmetric():
    assert is_pt_symmetric(ideal_pt_hamiltonian(0.1, 0.1 * SIGMA_X))
    assert is_pt_symmetric(pt_hamiltonian(PTParams(1.0, 0.5)))
    assert not is_pt_symmetric(ideal_pt_hamiltonian(0.1, 0.1 * SIGMA_Z))


def test_balanced_models_require_resonant_drive():
    with pytest.raises(ConfigError) as excinfo:
        balanced_models(LambdaParams(0.5, 1.0, 2.5, 0.1))
    assert excinfo.value.field == 'delta_a'


def test_original_hamiltonian_without_drive_or_feedback():
    p = LambdaParams(0.0, 0.0, 2.5, 0.1)
    H = original_lambda_hamiltonian(p, 0.0)
    assert np.allclose(H, np.diag([0.0, -0.05j, -1.25j]), atol=0)


def test_original_hamiltonian_eliminates_to_effective():
    for omega, gamma_a in ((0.5, 2.5), (1.0, 10.0), (2.0, 40.0)):
        p = LambdaParams(omega, 0.0, gamma_a, 0.1)
        G = feedback_gain_for_balance(gamma_eff(p), p.gamma_10)
        H = original_lambda_hamiltonian(p, G)
        eliminated = restrict(H, (0, 1)) - np.outer(H[[0, 1], 2], H[2, [0, 1]]) / H[2, 2]
        assert np.allclose(eliminated, effective_feedback_hamiltonian(p, G), atol=1e-14)


def test_original_dynamics_approach_effective_dynamics():
    def discrepancy(omega, gamma_a):
        p = LambdaParams(omega, 0.0, gamma_a, 0.1)
        _, _, H_eff, H_orig = balanced_models(p, 0.1 * SIGMA_X)
        eff = integrate_nonhermitian(NonHermitianModel(H_eff), DensityMatrix.from_diagonal([0.5, 0.5]), 1e-3, 20.0, 10)
        orig = integrate_nonhermitian(NonHermitianModel(H_orig), DensityMatrix.from_diagonal([0.5, 0.5, 0.0]), 1e-3, 20.0, 10)
        return max_abs_difference(orig.populations()[:, 1], eff.populations()[:, 1])

    assert discrepancy(2.0, 40.0) <= discrepancy(0.5, 2.5)


def test_light_shift_off_resonance():
    p = LambdaParams(0.2, 1.0, 2.0, 0.1)
    assert light_shift(p) == pytest.approx(-0.005)
    assert light_shift(PANEL_A) == 0.0
    H = effective_feedback_hamiltonian(p, 0.0)
    assert H[0, 0].real == pytest.approx(-0.005, abs=1e-15)

# --------------------------- PT spectrum ---------------------------

@pytest.mark.parametrize("omega, gamma, expected, phase", [
    (1.0, 0.5, [-np.sqrt(0.75), np.sqrt(0.75)], PTPhase.UNBROKEN),
    (0.5, 0.5, [0.0, 0.0], PTPhase.EXCEPTIONAL_POINT),
    (0.3, 0.5, [-0.4j, 0.4j], PTPhase.BROKEN),
])
def test_pt_spectrum_examples(omega, gamma, expected, phase):
    spectrum = pt_spectrum(PTParams(omega, gamma))
    assert np.allclose(spectrum.eigenvalues, expected, atol=1e-12)
    assert spectrum.phase is phase


def test_spectrum_is_real_exactly_when_unbroken():
    gamma = 0.5
    for omega in np.linspace(0.0, 1.0, 50):
        spectrum = pt_spectrum(PTParams(float(omega), gamma))
        real = np.max(np.abs(spectrum.eigenvalues.imag)) <= 1e-12
        assert real == (omega >= gamma)
        assert (spectrum.phase is PTPhase.BROKEN) == (omega < gamma)


def test_trace_grows_as_cosh_under_balanced_gain():
    H = ideal_pt_hamiltonian(0.1)
    rho0 = DensityMatrix.from_diagonal([0.5, 0.5])
    for t in (0.5, 5.0, 20.0):
        assert np.trace(exact_nonhermitian_state(H, rho0, t)).real == pytest.approx(np.cosh(0.1 * t), abs=1e-6)
        assert np.trace(exact_nonhermitian_state(H, rho0, t)).real > 1.0


def test_exact_state_matches_integrator():
    H = ideal_pt_hamiltonian(0.1, 0.1 * SIGMA_X)
    rho0 = DensityMatrix.from_diagonal([0.5, 0.5])
    result = integrate_nonhermitian(NonHermitianModel(H), rho0, 1e-3, 5.0)
    assert np.allclose(result.states[-1], exact_nonhermitian_state(H, rho0, 5.0), atol=1e-9)
