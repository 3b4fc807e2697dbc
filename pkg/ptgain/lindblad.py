# ptgain/lindblad.py

"""
Fixed-step RK4 propagation of Lindblad master equations and of no-jump
(non-Hermitian) dynamics.

States are re-Hermitized after every step. Traces are stored raw; renormalization
happens only when populations are reported.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ptgain.errors import ConfigError, DimensionError, GainBlowUpError, NumericsError
from ptgain.logs import log_info, log_warning
from ptgain.quantum_core import (
    DensityMatrix,
    Operator,
    StateLike,
    as_operator,
    matrix_of,
)

DEFAULT_DT = 1e-3
GAIN_BLOWUP_TRACE = 1e6
POSITIVITY_WARN = -1e-7
VANISHING_TRACE = 1e-12

Channel = Tuple[float, Operator]

# --------------------------- Models ---------------------------

@dataclass
class LindbladModel:
    H: Operator
    channels: List[Channel] = field(default_factory=list)

    def __post_init__(self):
        self.H = as_operator(self.H)
        checked = []
        for k, (rate, L) in enumerate(self.channels):
            rate = float(rate)
            if not np.isfinite(rate) or rate < 0:
                raise ConfigError(f"channel {k} has invalid rate {rate}", 'channels')
            checked.append((rate, as_operator(L, self.dim)))
        self.channels = checked

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass
class NonHermitianModel:
    """Drift H (non-Hermitian allowed) with an optional recycling jump c."""
    H: Operator
    jump: Optional[Operator] = None
    include_jump: bool = False

    def __post_init__(self):
        self.H = as_operator(self.H)
        if self.jump is not None:
            self.jump = as_operator(self.jump, self.dim)
        elif self.include_jump:
            raise ConfigError("include_jump is set but no jump operator was given", 'jump')

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray
    traces: np.ndarray
    min_eigenvalue: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> DensityMatrix:
        return DensityMatrix(self.states[k], normalized=False)

    @property
    def final(self) -> DensityMatrix:
        return self.state(-1)

    def populations(self, renormalized: bool = True) -> np.ndarray:
        """Populations per grid point, shape (n_points, dim)."""
        diag = np.real(np.diagonal(self.states, axis1=1, axis2=2))
        if renormalized:
            if np.any(np.abs(self.traces) <= VANISHING_TRACE):
                raise NumericsError("Cannot renormalize a state with vanishing trace")
            diag = diag / self.traces[:, None]
        return diag

# --------------------------- Superoperators ---------------------------

def _check(A: Operator, R: np.ndarray):
    if A.shape != R.shape[-2:]:
        raise DimensionError(f"Dimension mismatch: operator {A.shape} vs state {R.shape[-2:]}")


def dissipator(A, rho: StateLike) -> Operator:
    """D[A]rho = A rho A^dag - 1/2 {A^dag A, rho}."""
    A = as_operator(A)
    R = matrix_of(rho)
    _check(A, R)
    Ad = A.conj().T
    AdA = Ad @ A
    return A @ R @ Ad - 0.5 * (AdA @ R + R @ AdA)


def liouvillian_apply(model: LindbladModel, rho: StateLike) -> Operator:
    R = matrix_of(rho)
    _check(model.H, R)
    out = -1j * (model.H @ R - R @ model.H)
    for rate, L in model.channels:
        if rate:
            out = out + rate * dissipator(L, R)
    return out


def nonhermitian_apply(model: NonHermitianModel, rho: StateLike) -> Operator:
    """-i(H rho - rho H^dag), plus c rho c^dag when the jump term is included."""
    R = matrix_of(rho)
    _check(model.H, R)
    out = -1j * (model.H @ R - R @ model.H.conj().T)
    if model.include_jump and model.jump is not None:
        out = out + model.jump @ R @ model.jump.conj().T
    return out

# --------------------------- Integrators ---------------------------

def time_grid(dt: float, T: float) -> np.ndarray:
    """Uniform grid 0, dt, ..., n*dt with n = floor(T/dt); only t=0 when T < dt."""
    if not dt > 0:
        raise ConfigError(f"must be positive, got {dt}", 'dt')
    if T < 0:
        raise ConfigError(f"must be non-negative, got {T}", 'T')
    n_steps = int(np.floor(T / dt + 1e-9))
    return np.arange(n_steps + 1) * dt


def recorded_steps(n_steps: int, record_every: int) -> List[int]:
    """Step indices kept in a result: every `record_every`-th step plus the last one."""
    if record_every < 1:
        raise ConfigError(f"must be >= 1, got {record_every}", 'record_every')
    recorded = list(range(0, n_steps + 1, record_every))
    if recorded[-1] != n_steps:
        recorded.append(n_steps)
    return recorded


def _rk4_step(rhs: Callable[[np.ndarray], np.ndarray], R: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(R)
    k2 = rhs(R + 0.5 * dt * k1)
    k3 = rhs(R + 0.5 * dt * k2)
    k4 = rhs(R + dt * k3)
    R = R + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return 0.5 * (R + R.conj().T)


def _propagate(
    rhs: Callable[[np.ndarray], np.ndarray],
    rho0: np.ndarray,
    dt: float,
    T: float,
    record_every: int,
    blowup_trace: Optional[float],
    monitor_positivity: bool,
) -> EvolutionResult:
    grid = time_grid(dt, T)
    n_steps = len(grid) - 1
    recorded = recorded_steps(n_steps, record_every)

    dim = rho0.shape[0]
    states = np.empty((len(recorded), dim, dim), dtype=np.complex128)
    traces = np.empty(len(recorded))
    R = 0.5 * (rho0 + rho0.conj().T)
    min_eig = float(np.linalg.eigvalsh(R)[0]) if monitor_positivity else 0.0
    slot = 0
    states[slot] = R
    traces[slot] = np.trace(R).real
    slot += 1

    for step in range(1, n_steps + 1):
        R = _rk4_step(rhs, R, dt)
        if not np.all(np.isfinite(R)):
            raise NumericsError("Non-finite state during integration", step)
        if blowup_trace is not None and np.trace(R).real > blowup_trace:
            raise GainBlowUpError(
                f"Trace exceeded {blowup_trace:g} under non-Hermitian flow (gain blow-up)", step
            )
        if slot < len(recorded) and recorded[slot] == step:
            states[slot] = R
            traces[slot] = np.trace(R).real
            if monitor_positivity:
                min_eig = min(min_eig, float(np.linalg.eigvalsh(R)[0]))
            slot += 1

    if monitor_positivity and min_eig < POSITIVITY_WARN:
        log_warning(f"Positivity violated along the trajectory: minimum eigenvalue {min_eig:.3e}")
    return EvolutionResult(grid[recorded], states, traces, min_eig)


def integrate_master(
    model: LindbladModel,
    rho0: StateLike,
    dt: float = DEFAULT_DT,
    T: float = 1.0,
    record_every: int = 1,
) -> EvolutionResult:
    """
    RK4 integration of d(rho)/dt = -i[H, rho] + sum_k gamma_k D[L_k] rho.

    rho0 must be normalized. When T < dt the result holds rho0 only.
    """
    R0 = matrix_of(rho0)
    _check(model.H, R0)
    if abs(np.trace(R0).real - 1.0) > 1e-9:
        raise NumericsError(f"Initial state must be normalized, trace is {np.trace(R0).real:.12g}")
    log_info(
        f"Integrating master equation: dim={model.dim}, channels={len(model.channels)}, dt={dt:g}, T={T:g}"
    )
    return _propagate(lambda R: liouvillian_apply(model, R), R0, dt, T, record_every, None, True)


def integrate_nonhermitian(
    model: NonHermitianModel,
    rho0: StateLike,
    dt: float = DEFAULT_DT,
    T: float = 1.0,
    record_every: int = 1,
) -> EvolutionResult:
    """
    RK4 integration of d(rho)/dt = -i(H rho - rho H^dag) [+ c rho c^dag].

    The trace is not preserved; it is recorded per grid point. Aborts with
    GainBlowUpError once the trace exceeds 1e6.
    """
    R0 = matrix_of(rho0)
    _check(model.H, R0)
    log_info(
        f"Integrating no-jump dynamics: dim={model.dim}, jump term {'on' if model.include_jump else 'off'}, "
        f"dt={dt:g}, T={T:g}"
    )
    return _propagate(
        lambda R: nonhermitian_apply(model, R), R0, dt, T, record_every, GAIN_BLOWUP_TRACE, False
    )

# --------------------------- Reporting ---------------------------

def renormalize(rho: StateLike) -> DensityMatrix:
    R = matrix_of(rho)
    tr = np.trace(R).real
    if abs(tr) <= VANISHING_TRACE:
        raise NumericsError(f"Cannot renormalize a state with vanishing trace ({tr:.3e})")
    return DensityMatrix(R / tr)


def populations(rho: StateLike) -> np.ndarray:
    return np.diag(matrix_of(rho)).real.copy()


def max_abs_difference(a: Sequence[float], b: Sequence[float]) -> float:
    """L-infinity distance between two sampled curves."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if len(a) else 0.0
