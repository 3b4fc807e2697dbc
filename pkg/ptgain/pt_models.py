# ptgain/pt_models.py

"""
Concrete models: natural-decay feedback (no ground-state gain), the Lambda-system
gain construction, the balanced gain/loss Hamiltonian and its spectrum.

Levels: |0> = 0, |1> = 1, auxiliary |a> = 2.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from ptgain.effective_operators import (
    EffectiveModel,
    SubspaceSplit,
    reduce_model,
    split_hamiltonian,
    validity_metric,
)
from ptgain.errors import ConfigError
from ptgain.feedback_sme import FeedbackConfig, feedback_hamiltonian_correction, effective_collapse
from ptgain.lindblad import LindbladModel
from ptgain.quantum_core import (
    LOWER,
    SIGMA_X,
    Operator,
    StateLike,
    as_operator,
    eig,
    embed,
    matrix_of,
    transition,
)

EP_TOL = 1e-12
PT_TOL = 1e-12
LAMBDA_SPLIT = SubspaceSplit(ground=(0, 1), excited=(2,))
DEFAULT_F = SIGMA_X  # |0><1| + |1><0|


@dataclass(frozen=True)
class LambdaParams:
    omega_a: float
    delta_a: float
    gamma_a: float
    gamma_10: float

    def __post_init__(self):
        for name in ('omega_a', 'delta_a', 'gamma_a', 'gamma_10'):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ConfigError(f"must be finite, got {value}", name)
            object.__setattr__(self, name, value)
        if self.omega_a < 0:
            raise ConfigError(f"must be >= 0, got {self.omega_a}", 'omega_a')
        if self.gamma_a <= 0:
            raise ConfigError(f"must be > 0, got {self.gamma_a}", 'gamma_a')
        if self.gamma_10 < 0:
            raise ConfigError(f"must be >= 0, got {self.gamma_10}", 'gamma_10')


@dataclass(frozen=True)
class PTParams:
    omega_sys: float
    gamma: float

    def __post_init__(self):
        if self.omega_sys < 0 or self.gamma < 0:
            raise ConfigError(f"omega_sys and gamma must be >= 0, got {self.omega_sys}, {self.gamma}")


class PTPhase(Enum):
    UNBROKEN = "unbroken"
    EXCEPTIONAL_POINT = "exceptional-point"
    BROKEN = "broken"


@dataclass
class PTSpectrum:
    eigenvalues: np.ndarray
    phase: PTPhase

# --------------------------- Rates and gains ---------------------------

def gamma_eff(p: LambdaParams) -> float:
    """Omega_a^2 / gamma_a, the resonant pumping rate |0> -> |1> through |a>."""
    if p.gamma_a <= 0:
        raise ConfigError("gamma_eff needs gamma_a > 0", 'gamma_a')
    return p.omega_a ** 2 / p.gamma_a


def feedback_gain_for_balance(gamma_eff: float, gamma_10: float) -> float:
    """G with G sqrt(gamma_eff) - gamma_eff/2 = gamma_10/2."""
    if not gamma_eff > 0:
        raise ConfigError(f"balanced gain needs gamma_eff > 0, got {gamma_eff}", 'omega_a')
    return (gamma_10 + gamma_eff) / (2.0 * np.sqrt(gamma_eff))

# --------------------------- Natural decay with feedback ---------------------------

def natural_feedback_hamiltonian(cfg: FeedbackConfig, H_sys) -> Operator:
    """
    H_sys - (i gamma_1/2) L^dag L - (G sqrt(gamma_1)/2)[L^dag F - F L].

    The G^2 F^2 term only shifts energies and is left out.
    """
    H_sys = as_operator(H_sys, cfg.dim)
    L, Ld = cfg.L, cfg.L.conj().T
    H = H_sys - 0.5j * cfg.gamma_1 * (Ld @ L)
    return H - 0.5 * cfg.G * np.sqrt(cfg.gamma_1) * (Ld @ cfg.F - cfg.F @ L)


def no_jump_hamiltonian(cfg: FeedbackConfig, H_sys) -> Operator:
    """Drift of the unravelling with the single jump c = sqrt(gamma_1) L - i G F."""
    c = effective_collapse(cfg)
    H = as_operator(H_sys, cfg.dim) + feedback_hamiltonian_correction(cfg)
    return H - 0.5j * (c.conj().T @ c)


def no_ground_gain_witness(cfg: FeedbackConfig, exact: bool = False) -> float:
    """
    Ground-state gain left by feedback on the natural decay channel.

    Default: |<0|(H - H_sys)|0>| for the natural feedback Hamiltonian. With
    `exact=True` the full no-jump drift is used and the witness is the positive part
    of Im <0|(H - H_sys)|0>, since the F^2 term contributes loss there.
    """
    zero = np.zeros((cfg.dim, cfg.dim), dtype=np.complex128)
    if exact:
        coefficient = no_jump_hamiltonian(cfg, zero)[0, 0]
        return max(0.0, float(coefficient.imag))
    return float(abs(natural_feedback_hamiltonian(cfg, zero)[0, 0]))

# --------------------------- Lambda system ---------------------------

def _lambda_coherent(p: LambdaParams, H_sys) -> Operator:
    H = 0.5 * p.omega_a * (transition(3, 2, 0) + transition(3, 0, 2)) + p.delta_a * transition(3, 2, 2)
    if H_sys is not None:
        H = H + embed(H_sys, 3, (0, 1))
    return H


def lambda_effective_model(p: LambdaParams, H_sys=None) -> EffectiveModel:
    """Adiabatic elimination of |a> with decay sqrt(gamma_a)|1><a|, any detuning."""
    model = split_hamiltonian(_lambda_coherent(p, H_sys), LAMBDA_SPLIT, [(p.gamma_a, transition(3, 1, 2))])
    return reduce_model(model)


def lambda_validity(p: LambdaParams) -> float:
    model = split_hamiltonian(_lambda_coherent(p, None), LAMBDA_SPLIT, [(p.gamma_a, transition(3, 1, 2))])
    return validity_metric(model)


def lambda_full_lindblad(p: LambdaParams, H_sys=None) -> LindbladModel:
    """Three-level model with pumping through |a> and natural decay |1> -> |0>."""
    return LindbladModel(
        _lambda_coherent(p, H_sys),
        [(p.gamma_a, transition(3, 1, 2)), (p.gamma_10, transition(3, 0, 1))],
    )


def lambda_reduced_lindblad(p: LambdaParams, H_sys=None) -> LindbladModel:
    return lambda_effective_model(p, H_sys).to_lindblad([(p.gamma_10, LOWER)])


def effective_jump(p: LambdaParams) -> Operator:
    """L_eff on the qubit: i sqrt(gamma_eff)|1><0| on resonance, the reduced amplitude otherwise."""
    if p.delta_a == 0.0:
        return 1j * np.sqrt(gamma_eff(p)) * transition(2, 1, 0)
    amplitude = np.sqrt(p.gamma_a) * (0.5 * p.omega_a) / (p.delta_a - 0.5j * p.gamma_a)
    return amplitude * transition(2, 1, 0)


def _gain_feedback_term(L_eff: Operator, G: float, F: Operator) -> Operator:
    return -0.5 * G * (L_eff.conj().T @ F - F @ L_eff)


def effective_feedback_hamiltonian(p: LambdaParams, G: float, F=None, H_sys=None) -> Operator:
    """
    H_sys - (i gamma_10/2)|1><1| - (i/2) L_eff^dag L_eff - (G/2)[L_eff^dag F - F L_eff].

    Off resonance the reduction also contributes its light shift on |0>.
    """
    F = as_operator(DEFAULT_F if F is None else F, 2)
    H = np.zeros((2, 2), dtype=np.complex128) if H_sys is None else as_operator(H_sys, 2).copy()
    L_eff = effective_jump(p)
    if p.delta_a != 0.0:
        H = H + lambda_effective_model(p).ground_hamiltonian()
    H = H - 0.5j * p.gamma_10 * transition(2, 1, 1)
    H = H - 0.5j * (L_eff.conj().T @ L_eff)
    return H + _gain_feedback_term(L_eff, G, F)


def ideal_pt_hamiltonian(gamma_10: float, H_sys=None) -> Operator:
    """Balanced gain on |0> and loss on |1>, both at rate gamma_10/2."""
    H = np.zeros((2, 2), dtype=np.complex128) if H_sys is None else as_operator(H_sys, 2).copy()
    return H + 0.5j * gamma_10 * (transition(2, 0, 0) - transition(2, 1, 1))


def original_lambda_hamiltonian(p: LambdaParams, G: float, F=None, H_sys=None) -> Operator:
    """
    No-jump Hamiltonian of the three-level system with the qubit-level feedback term.

    The feedback term is the one built on L_eff, placed on the ground block, so
    eliminating |a> gives back effective_feedback_hamiltonian.
    """
    F = as_operator(DEFAULT_F if F is None else F, 2)
    H = _lambda_coherent(p, H_sys)
    H = H - 0.5j * p.gamma_a * transition(3, 2, 2) - 0.5j * p.gamma_10 * transition(3, 1, 1)
    return H + embed(_gain_feedback_term(effective_jump(p), G, F), 3, (0, 1))

# --------------------------- PT analysis ---------------------------

def pt_hamiltonian(p: PTParams) -> Operator:
    """Omega sigma_x + i gamma (|0><0| - |1><1|)."""
    return p.omega_sys * SIGMA_X + 1j * p.gamma * (transition(2, 0, 0) - transition(2, 1, 1))


def pt_spectrum(p: PTParams) -> PTSpectrum:
    values, _ = eig(pt_hamiltonian(p))
    if abs(p.omega_sys - p.gamma) <= EP_TOL:
        phase = PTPhase.EXCEPTIONAL_POINT
    elif p.omega_sys > p.gamma:
        phase = PTPhase.UNBROKEN
    else:
        phase = PTPhase.BROKEN
    return PTSpectrum(values, phase)


def is_pt_symmetric(H, tol: float = PT_TOL) -> bool:
    """(PT) H (PT)^-1 = H with P = sigma_x and T complex conjugation."""
    H = as_operator(H, 2)
    return float(np.linalg.norm(SIGMA_X @ H.conj() @ SIGMA_X - H, 'fro')) <= tol


def exact_nonhermitian_state(H, rho0: StateLike, t: float) -> Operator:
    """exp(-iHt) rho0 exp(iH^dag t), unnormalized."""
    U = expm(-1j * as_operator(H) * t)
    R = matrix_of(rho0)
    return U @ R @ U.conj().T


def balanced_models(p: LambdaParams, H_sys=None) -> Tuple[float, Operator, Operator, Operator]:
    """
    Balance gain G and the ideal, effective and three-level Hamiltonians for one parameter set.

    The effective Hamiltonian equals the ideal one only on resonance; a detuned drive
    adds a light shift to |0> and is rejected.
    """
    if p.delta_a != 0.0:
        raise ConfigError(f"balanced gain needs a resonant drive, got delta_a={p.delta_a}", 'delta_a')
    G = feedback_gain_for_balance(gamma_eff(p), p.gamma_10)
    return (
        G,
        ideal_pt_hamiltonian(p.gamma_10, H_sys),
        effective_feedback_hamiltonian(p, G, None, H_sys),
        original_lambda_hamiltonian(p, G, None, H_sys),
    )


def light_shift(p: LambdaParams) -> float:
    """Energy shift of |0> from the reduction, -(Omega_a^2/4) Delta_a / (Delta_a^2 + gamma_a^2/4)."""
    return -(p.omega_a ** 2 / 4.0) * p.delta_a / (p.delta_a ** 2 + p.gamma_a ** 2 / 4.0)
