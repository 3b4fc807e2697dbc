# ptgain/feedback_sme.py

"""
Homodyne-monitored stochastic master equation with instantaneous feedback.

One step of a trajectory is an Euler-Maruyama update of the conditional state
followed by the exact feedback unitary exp(-i G F dy), where
dy = sqrt(gamma_1) <X>_c dt + dW is the photocurrent increment. X is L + L^dag for
homodyne detection of channel L (the default) or F itself (`signal="feedback"`).
Conditional states are re-Hermitized and renormalized after every step.

Trajectories are vectorized in fixed-size chunks of trajectory indices. Each
trajectory draws from its own counter-based stream keyed by (master_seed, index),
so ensemble statistics do not depend on the number of worker processes.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ptgain.errors import ConfigError, DimensionError, NumericsError, TrajectoryError
from ptgain.lindblad import (
    EvolutionResult,
    LindbladModel,
    dissipator,
    integrate_master,
    recorded_steps,
    time_grid,
)
from ptgain.logs import log_info, log_warning
from ptgain.quantum_core import (
    DensityMatrix,
    Operator,
    StateLike,
    as_operator,
    commutator,
    matrix_of,
)

SIGNALS = ("homodyne", "feedback")
DEFAULT_CHUNK = 500
NOISE_BLOCK = 1024

# --------------------------- Configuration ---------------------------

@dataclass
class FeedbackConfig:
    """Monitored channel sqrt(gamma_1) L, Hermitian feedback operator F and strength G."""
    gamma_1: float
    L: Operator
    F: Operator
    G: float
    signal: str = "homodyne"

    def __post_init__(self):
        self.gamma_1 = float(self.gamma_1)
        self.G = float(self.G)
        if not np.isfinite(self.gamma_1) or self.gamma_1 < 0:
            raise ConfigError(f"must be >= 0, got {self.gamma_1}", 'gamma_1')
        if not np.isfinite(self.G):
            raise ConfigError(f"must be finite, got {self.G}", 'G')
        self.L = as_operator(self.L)
        self.F = as_operator(self.F, self.L.shape[0])
        if np.linalg.norm(self.F - self.F.conj().T, 'fro') > 1e-12:
            raise ConfigError("the feedback operator must be Hermitian", 'F')
        if self.signal not in SIGNALS:
            raise ConfigError(f"must be one of {SIGNALS}, got '{self.signal}'", 'signal')
        self.F = 0.5 * (self.F + self.F.conj().T)
        self._F_values, self._F_vectors = np.linalg.eigh(self.F)

    @property
    def dim(self) -> int:
        return self.L.shape[0]

    @property
    def x_operator(self) -> Operator:
        return self.L + self.L.conj().T

    @property
    def signal_operator(self) -> Operator:
        if self.signal == "feedback":
            return self.F
        return self.x_operator

    def feedback_unitaries(self, dy: np.ndarray) -> np.ndarray:
        """exp(-i G F dy) for each entry of dy, via the spectral decomposition of F."""
        phases = np.exp(-1j * self.G * np.multiply.outer(dy, self._F_values))
        V = self._F_vectors
        return (V[None, :, :] * phases[:, None, :]) @ V.conj().T[None, :, :]

# --------------------------- Noise ---------------------------

class NoiseStream:
    """
    Gaussian stream for one trajectory.

    Bit generator: Philox4x64 seeded with SeedSequence([master_seed, index]).
    Normals come from Generator.standard_normal (ziggurat) in fixed blocks, so the
    sequence is the same however callers slice it.
    """

    def __init__(self, master_seed: int, index: int):
        if not 0 <= int(master_seed) < 2 ** 64:
            raise ConfigError(f"must be an unsigned 64-bit integer, got {master_seed}", 'master_seed')
        if int(index) < 0:
            raise ConfigError(f"trajectory index must be >= 0, got {index}")
        self.master_seed = int(master_seed)
        self.index = int(index)
        self.step = 0
        self._rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([self.master_seed, self.index])))
        self._block = np.empty(0)
        self._pos = 0

    def standard_normals(self, n: int) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            if self._pos >= len(self._block):
                self._block = self._rng.standard_normal(NOISE_BLOCK)
                self._pos = 0
            take = min(n - filled, len(self._block) - self._pos)
            out[filled:filled + take] = self._block[self._pos:self._pos + take]
            self._pos += take
            filled += take
        self.step += n
        return out


def wiener_increment(stream: NoiseStream, dt: float) -> float:
    if not dt > 0:
        raise ConfigError(f"must be positive, got {dt}", 'dt')
    return float(np.sqrt(dt) * stream.standard_normals(1)[0])


def photocurrent_increment(rho_c: StateLike, cfg: FeedbackConfig, dW: float, dt: float) -> float:
    """I(t) dt = sqrt(gamma_1) <X>_c dt + dW."""
    R = matrix_of(rho_c)
    signal = np.trace(cfg.signal_operator @ R).real
    return float(np.sqrt(cfg.gamma_1) * signal * dt + dW)

# --------------------------- Stepping ---------------------------

class _FeedbackStepper:
    """
    Batched steps on flattened states of shape (n, d*d).

    With G != 0 the states are held in the eigenbasis of F, where the feedback
    unitary is diagonal and acts as an element-wise phase. The linear part of the
    SME step, both expectation values included, is one product with a
    precomputed (d*d, 2*d*d + 2) superoperator block.
    """

    def __init__(self, cfg: FeedbackConfig, H_sys: Operator):
        H_sys = as_operator(H_sys)
        if H_sys.shape != cfg.L.shape:
            raise DimensionError(f"H_sys {H_sys.shape} does not match the channel dimension {cfg.L.shape}")
        self.cfg = cfg
        d = cfg.dim
        self.dim = d
        self.size = d * d
        self.sqrt_g1 = np.sqrt(cfg.gamma_1)
        self.rotated = cfg.G != 0.0
        if self.rotated:
            values, self.V = cfg._F_values, cfg._F_vectors
        else:
            values, self.V = np.zeros(d), np.eye(d, dtype=np.complex128)
        self.Vd = self.V.conj().T

        H, L, x_op, signal_op = (self._into_frame(A) for A in (H_sys, cfg.L, cfg.x_operator, cfg.signal_operator))
        Ld = L.conj().T
        LdL = Ld @ L
        eye = np.eye(d)
        # row-major vec(A R B) = kron(A, B^T) vec(R); tr(A R) = vec(A^T) . vec(R)
        drift = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
        drift = drift + cfg.gamma_1 * (np.kron(L, Ld.T) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T))
        backaction = np.kron(L, eye) + np.kron(eye, Ld.T)
        self._linear = np.column_stack([drift.T, backaction.T, x_op.T.reshape(-1), signal_op.T.reshape(-1)])

        self._transpose = np.arange(self.size).reshape(d, d).T.reshape(-1)
        self._diagonal = np.arange(d) * (d + 1)
        self._level_gaps = np.subtract.outer(values, values).reshape(-1)

    def _into_frame(self, A: Operator) -> Operator:
        return self.Vd @ A @ self.V if self.rotated else A

    def to_frame(self, R: np.ndarray) -> np.ndarray:
        """(n, d, d) density matrices to flattened frame states."""
        if self.rotated:
            R = self.Vd[None, :, :] @ R @ self.V[None, :, :]
        return np.ascontiguousarray(R, dtype=np.complex128).reshape(len(R), self.size)

    def from_frame(self, R: np.ndarray) -> np.ndarray:
        M = R.reshape(len(R), self.dim, self.dim)
        if self.rotated:
            return self.V[None, :, :] @ M @ self.Vd[None, :, :]
        return M.copy()

    def finite(self, R: np.ndarray) -> np.ndarray:
        return np.isfinite(R.sum(axis=1))

    def _clean(self, R: np.ndarray) -> np.ndarray:
        R = 0.5 * (R + np.conj(R[:, self._transpose]))
        tr = R[:, self._diagonal].real.sum(axis=1)
        return R / tr[:, None]

    def sme(self, R: np.ndarray, dW: np.ndarray, dt: float, products: Optional[np.ndarray] = None) -> np.ndarray:
        P = R @ self._linear if products is None else products
        n = self.size
        x = P[:, 2 * n].real
        kick = (self.sqrt_g1 * dW)[:, None] * (P[:, n:2 * n] - x[:, None] * R)
        return self._clean(R + dt * P[:, :n] + kick)

    def feedback(self, R: np.ndarray, dW: np.ndarray, dt: float) -> np.ndarray:
        P = R @ self._linear
        dy = self.sqrt_g1 * P[:, 2 * self.size + 1].real * dt + dW
        R = self.sme(R, dW, dt, P)
        if not self.rotated:
            return R
        R = R * np.exp(-1j * self.cfg.G * np.multiply.outer(dy, self._level_gaps))
        return self._clean(R)


def _single_step(rho_c: StateLike, cfg: FeedbackConfig, H_sys: Operator, dW: float, dt: float,
                 with_feedback: bool, step: int) -> DensityMatrix:
    R = matrix_of(rho_c)
    if R.shape != cfg.L.shape:
        raise DimensionError(f"State {R.shape} does not match the channel dimension {cfg.L.shape}")
    stepper = _FeedbackStepper(cfg, H_sys)
    batch = stepper.to_frame(R[None, :, :])
    dWs = np.array([dW], dtype=float)
    out = stepper.feedback(batch, dWs, dt) if with_feedback else stepper.sme(batch, dWs, dt)
    if not np.all(stepper.finite(out)):
        raise NumericsError("Non-finite conditional state", step)
    return DensityMatrix(stepper.from_frame(out)[0])


def sme_step(rho_c: StateLike, cfg: FeedbackConfig, H_sys: Operator, dW: float, dt: float,
             step: int = 1) -> DensityMatrix:
    """One conditional Euler-Maruyama step without feedback. `step` labels failures."""
    return _single_step(rho_c, cfg, H_sys, dW, dt, False, step)


def feedback_step(rho_c: StateLike, cfg: FeedbackConfig, H_sys: Operator, dW: float, dt: float,
                  step: int = 1) -> DensityMatrix:
    """sme_step followed by conjugation with exp(-i G F dy)."""
    return _single_step(rho_c, cfg, H_sys, dW, dt, True, step)


def _run_batch(
    stepper: _FeedbackStepper,
    rho0: np.ndarray,
    dt: float,
    n_steps: int,
    streams: Sequence[NoiseStream],
    recorded: List[int],
    keep_states: bool,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Propagates len(streams) trajectories from rho0.

    Returns populations at the recorded steps, shape (n_traj, n_recorded, d), and
    the recorded states of the first trajectory when keep_states is set.
    """
    n = len(streams)
    d = rho0.shape[0]
    pops = np.empty((n, len(recorded), d))
    states = np.empty((len(recorded), d, d), dtype=np.complex128) if keep_states else None
    sqrt_dt = np.sqrt(dt)

    pops[:, 0, :] = np.real(np.diagonal(rho0))[None, :]
    if keep_states:
        states[0] = rho0
    R = stepper.to_frame(np.repeat(rho0[None, :, :], n, axis=0))
    slot = 1
    step = 0
    while step < n_steps:
        block = min(NOISE_BLOCK, n_steps - step)
        noise = np.stack([s.standard_normals(block) for s in streams]) * sqrt_dt
        for j in range(block):
            step += 1
            R = stepper.feedback(R, noise[:, j], dt)
            ok = stepper.finite(R)
            if not ok.all():
                first = int(np.argmin(ok))
                raise TrajectoryError("Non-finite conditional state", streams[first].index, step)
            if slot < len(recorded) and recorded[slot] == step:
                full = stepper.from_frame(R)
                pops[:, slot, :] = np.real(np.diagonal(full, axis1=1, axis2=2))
                if keep_states:
                    states[slot] = full[0]
                slot += 1
    return pops, states


def run_trajectory(
    cfg: FeedbackConfig,
    H_sys: Operator,
    rho0: StateLike,
    dt: float,
    T: float,
    stream: NoiseStream,
    record_every: int = 1,
) -> EvolutionResult:
    """One feedback trajectory on the uniform grid; every recorded state has unit trace."""
    R0 = matrix_of(rho0)
    stepper = _FeedbackStepper(cfg, H_sys)
    grid = time_grid(dt, T)
    recorded = recorded_steps(len(grid) - 1, record_every)
    _, states = _run_batch(stepper, R0, dt, len(grid) - 1, [stream], recorded, keep_states=True)
    traces = np.real(np.trace(states, axis1=1, axis2=2))
    return EvolutionResult(grid[recorded], states, traces)

# --------------------------- Ensembles ---------------------------

@dataclass
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_traj: int

    def population(self, level: int) -> np.ndarray:
        return self.mean[:, level]

    def population_stderr(self, level: int) -> np.ndarray:
        return self.stderr[:, level]


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count: `requested` (default: CPU count), capped by PTGAIN_THREADS when set."""
    workers = requested if requested else (os.cpu_count() or 1)
    cap = os.environ.get("PTGAIN_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            log_warning(f"Ignoring PTGAIN_THREADS='{cap}': not an integer")
    return max(1, int(workers))


def _simulate_chunk(task) -> Tuple[int, np.ndarray, np.ndarray]:
    cfg, H_sys, rho0, dt, n_steps, master_seed, start, stop, recorded = task
    stepper = _FeedbackStepper(cfg, H_sys)
    streams = [NoiseStream(master_seed, k) for k in range(start, stop)]
    pops, _ = _run_batch(stepper, rho0, dt, n_steps, streams, recorded, keep_states=False)
    return start, pops.sum(axis=0), (pops * pops).sum(axis=0)


def ensemble_average(
    cfg: FeedbackConfig,
    H_sys: Operator,
    rho0: StateLike,
    dt: float,
    T: float,
    n_traj: int,
    master_seed: int,
    record_every: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    workers: Optional[int] = None,
) -> EnsembleResult:
    """
    Mean populations and standard errors over trajectories 0..n_traj-1.

    Chunks of `chunk_size` consecutive indices are the units of work; their sums are
    merged in index order, so the result is independent of `workers`.
    """
    if n_traj < 1:
        raise ConfigError(f"must be >= 1, got {n_traj}", 'N_traj')
    if chunk_size < 1:
        raise ConfigError(f"must be >= 1, got {chunk_size}", 'chunk_size')
    R0 = matrix_of(rho0)
    _FeedbackStepper(cfg, H_sys)
    grid = time_grid(dt, T)
    n_steps = len(grid) - 1
    recorded = recorded_steps(n_steps, record_every)

    tasks = [
        (cfg, as_operator(H_sys), R0, dt, n_steps, master_seed, start, min(start + chunk_size, n_traj), recorded)
        for start in range(0, n_traj, chunk_size)
    ]
    workers = min(resolve_workers(workers), len(tasks))
    log_info(
        f"Running ensemble: N_traj={n_traj}, steps={n_steps}, chunks={len(tasks)}, workers={workers}, seed={master_seed}"
    )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_simulate_chunk, tasks))
    else:
        results = [_simulate_chunk(task) for task in tasks]

    results.sort(key=lambda item: item[0])
    total = np.zeros_like(results[0][1])
    total_sq = np.zeros_like(results[0][2])
    for _, chunk_sum, chunk_sq in results:
        total = total + chunk_sum
        total_sq = total_sq + chunk_sq

    mean = total / n_traj
    if n_traj > 1:
        var = np.clip((total_sq - n_traj * mean * mean) / (n_traj - 1), 0.0, None)
        stderr = np.sqrt(var / n_traj)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleResult(grid[recorded], mean, stderr, n_traj)

# --------------------------- Unconditional dynamics ---------------------------

def effective_collapse(cfg: FeedbackConfig) -> Operator:
    """c = sqrt(gamma_1) L - i G F."""
    return np.sqrt(cfg.gamma_1) * cfg.L - 1j * cfg.G * cfg.F


def feedback_hamiltonian_correction(cfg: FeedbackConfig) -> Operator:
    """
    H_fb = (G sqrt(gamma_1) / 2)(L^dag F + F L).

    The measurement and feedback terms equal D[c] - i[H_fb, .]; H_fb vanishes
    exactly when L^dag F = -F L.
    """
    Ld = cfg.L.conj().T
    return 0.5 * cfg.G * np.sqrt(cfg.gamma_1) * (Ld @ cfg.F + cfg.F @ cfg.L)


def unconditional_feedback_rhs(rho: StateLike, cfg: FeedbackConfig, H_sys: Operator) -> Operator:
    """-i[H_sys, rho] + gamma_1 D[L]rho - i G sqrt(gamma_1)[F, L rho + rho L^dag] + G^2 D[F]rho."""
    R = matrix_of(rho)
    H_sys = as_operator(H_sys)
    if R.shape != cfg.L.shape or H_sys.shape != cfg.L.shape:
        raise DimensionError(f"Dimension mismatch: state {R.shape}, H_sys {H_sys.shape}, L {cfg.L.shape}")
    L, Ld = cfg.L, cfg.L.conj().T
    out = -1j * commutator(H_sys, R) + cfg.gamma_1 * dissipator(L, R)
    if cfg.G:
        out = out - 1j * cfg.G * np.sqrt(cfg.gamma_1) * commutator(cfg.F, L @ R + R @ Ld)
        out = out + cfg.G ** 2 * dissipator(cfg.F, R)
    return out


def feedback_lindblad_model(cfg: FeedbackConfig, H_sys: Operator) -> LindbladModel:
    """Single-channel Lindblad form of the unconditional feedback master equation."""
    H = as_operator(H_sys, cfg.dim) + feedback_hamiltonian_correction(cfg)
    return LindbladModel(H, [(1.0, effective_collapse(cfg))])


def integrate_unconditional(
    cfg: FeedbackConfig,
    H_sys: Operator,
    rho0: StateLike,
    dt: float,
    T: float,
    record_every: int = 1,
) -> EvolutionResult:
    return integrate_master(feedback_lindblad_model(cfg, H_sys), rho0, dt, T, record_every)
