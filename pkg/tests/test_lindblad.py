from __future__ import annotations

import numpy as np
import pytest

from conftest import random_hermitian, random_operator, random_state
from ptgain.errors import ConfigError, DimensionError, GainBlowUpError, NumericsError
from ptgain.lindblad import (
    LindbladModel,
    NonHermitianModel,
    dissipator,
    integrate_master,
    integrate_nonhermitian,
    liouvillian_apply,
    max_abs_difference,
    nonhermitian_apply,
    populations,
    recorded_steps,
    renormalize,
    time_grid,
)
from ptgain.quantum_core import LOWER, SIGMA_X, DensityMatrix, commutator, transition

P0 = transition(2, 0, 0)
P1 = transition(2, 1, 1)


def decay_model(gamma: float = 1.0) -> LindbladModel:
    return LindbladModel(np.zeros((2, 2)), [(gamma, LOWER)])

# --------------------------- Superoperators ---------------------------

def test_dissipator_examples():
    assert np.allclose(dissipator(LOWER, P1), P0 - P1, atol=0)
    assert not np.any(dissipator(LOWER, P0))
    assert np.allclose(dissipator(SIGMA_X, np.eye(2) / 2), 0, atol=1e-15)


def test_dissipator_dimension_mismatch():
    with pytest.raises(DimensionError):
        dissipator(LOWER, np.eye(3) / 3)


def test_liouvillian_examples():
    assert np.allclose(liouvillian_apply(decay_model(), P1), P0 - P1)
    unitary = LindbladModel(SIGMA_X)
    assert np.allclose(liouvillian_apply(unitary, P0), -1j * commutator(SIGMA_X, P0))


def test_liouvillian_is_traceless(rng):
    for _ in range(50):
        dim = int(rng.integers(2, 5))
        channels = [(float(rng.uniform(0, 2)), random_operator(rng, dim)) for _ in range(int(rng.integers(0, 4)))]
        model = LindbladModel(random_hermitian(rng, dim), channels)
        assert abs(np.trace(liouvillian_apply(model, random_state(rng, dim)))) <= 1e-12


def test_model_rejects_negative_rates_and_mismatched_channels():
    with pytest.raises(ConfigError) as excinfo:
        LindbladModel(np.zeros((2, 2)), [(-0.1, LOWER)])
    assert excinfo.value.field == 'channels'
    with pytest.raises(DimensionError):
        LindbladModel(np.zeros((2, 2)), [(1.0, np.eye(3))])


def test_nonhermitian_apply_with_and_without_jump():
    model = NonHermitianModel(-0.5j * P1, jump=LOWER, include_jump=True)
    out = nonhermitian_apply(model, P1)
    assert np.allclose(out, P0 - P1)
    assert np.allclose(nonhermitian_apply(NonHermitianModel(-0.5j * P1), P1), -P1)

# --------------------------- Grids ---------------------------

def test_time_grid_and_recorded_steps():
    assert np.allclose(time_grid(0.1, 0.5), [0, 0.1, 0.2, 0.3, 0.4, 0.5])
    assert len(time_grid(1e-3, 1.0)) == 1001
    assert np.array_equal(time_grid(0.1, 0.05), [0.0])
    assert recorded_steps(10, 4) == [0, 4, 8, 10]
    assert recorded_steps(8, 4) == [0, 4, 8]
    with pytest.raises(ValueError):
        time_grid(0.0, 1.0)

# --------------------------- Master equation ---------------------------

def test_exponential_decay_oracle():
    result = integrate_master(decay_model(), DensityMatrix.pure(2, 1), dt=1e-3, T=1.0)
    assert result.times[-1] == pytest.approx(1.0)
    assert result.populations()[-1, 1] == pytest.approx(np.exp(-1.0), abs=1e-6)


def test_rabi_oscillation_oracle():
    T = np.pi / 2
    result = integrate_master(LindbladModel(SIGMA_X), DensityMatrix.pure(2, 0), dt=T / 2000, T=T)
    assert result.times[-1] == pytest.approx(T)
    assert result.populations()[-1, 1] == pytest.approx(1.0, abs=1e-6)
    assert np.allclose(result.populations()[:, 1], np.sin(result.times) ** 2, atol=1e-6)


def test_zero_horizon_returns_initial_state():
    rho0 = DensityMatrix.pure(2, 1)
    result = integrate_master(decay_model(), rho0, dt=1e-3, T=0.0)
    assert len(result) == 1
    assert np.array_equal(result.states[0], rho0.op)


def test_requires_normalized_initial_state():
    with pytest.raises(NumericsError):
        integrate_master(decay_model(), 2 * P1)


def test_trace_positivity_and_hermiticity_on_random_models(rng):
    for _ in range(3):
        dim = int(rng.integers(2, 5))
        channels = [(float(rng.uniform(0, 1)), random_operator(rng, dim, 0.5)) for _ in range(int(rng.integers(1, 4)))]
        model = LindbladModel(random_hermitian(rng, dim, 0.5), channels)
        result = integrate_master(model, random_state(rng, dim), dt=1e-3, T=10.0, record_every=50)
        assert abs(result.traces[-1] - 1.0) <= 1e-7
        assert result.min_eigenvalue >= -1e-7
        skew = np.linalg.norm(result.states - np.conj(np.swapaxes(result.states, 1, 2)), axis=(1, 2))
        assert np.max(skew) <= 1e-10


def test_rk4_order():
    errors = []
    for dt in (0.1, 0.05):
        result = integrate_master(decay_model(), DensityMatrix.pure(2, 1), dt=dt, T=1.0)
        errors.append(np.max(np.abs(result.populations()[:, 1] - np.exp(-result.times))))
    assert 8.0 <= errors[0] / errors[1] <= 32.0


def test_non_finite_state_reports_step():
    model = LindbladModel(np.array([[np.inf, 0], [0, 0]]))
    with pytest.raises(NumericsError) as excinfo:
        integrate_master(model, DensityMatrix.pure(2, 0), dt=0.1, T=1.0)
    assert excinfo.value.step == 1

# --------------------------- No-jump dynamics ---------------------------

def test_nonhermitian_decay_oracle():
    result = integrate_nonhermitian(NonHermitianModel(-0.5j * P1), DensityMatrix.pure(2, 1), dt=1e-3, T=1.0)
    assert result.traces[-1] == pytest.approx(np.exp(-1.0), abs=1e-6)


def test_balanced_gain_loss_trace_grows_as_cosh():
    H = 0.05j * P0 - 0.05j * P1
    rho0 = DensityMatrix.from_diagonal([0.5, 0.5])
    result = integrate_nonhermitian(NonHermitianModel(H), rho0, dt=1e-3, T=20.0, record_every=100)
    assert np.allclose(result.traces, np.cosh(0.1 * result.times), atol=1e-6)
    assert np.all(result.traces[1:] > 1.0)
    expected_P0 = np.exp(0.1 * result.times) / (2 * np.cosh(0.1 * result.times))
    assert np.allclose(result.populations()[:, 0], expected_P0, atol=1e-9)


def test_hermitian_no_jump_flow_preserves_trace():
    result = integrate_nonhermitian(NonHermitianModel(SIGMA_X), DensityMatrix.pure(2, 0), dt=1e-3, T=2.0)
    assert np.max(np.abs(result.traces - 1.0)) <= 1e-8


def test_gain_blow_up_is_flagged():
    with pytest.raises(GainBlowUpError) as excinfo:
        integrate_nonhermitian(NonHermitianModel(10j * P0), DensityMatrix.pure(2, 0), dt=1e-2, T=2.0)
    assert excinfo.value.step is not None


def test_include_jump_requires_operator():
    with pytest.raises(ValueError):
        NonHermitianModel(P0, include_jump=True)

# --------------------------- Reporting ---------------------------

def test_renormalize_and_populations():
    assert np.allclose(renormalize(2 * P0).op, P0)
    assert np.allclose(populations(np.diag([0.3, 0.7])), [0.3, 0.7])
    with pytest.raises(NumericsError):
        renormalize(np.zeros((2, 2)))


def test_max_abs_difference():
    assert max_abs_difference([0.0, 1.0], [0.5, 0.75]) == pytest.approx(0.5)
    assert max_abs_difference([], []) == 0.0
