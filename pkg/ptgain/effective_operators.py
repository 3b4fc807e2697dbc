# ptgain/effective_operators.py

"""
Effective-operator reduction of a weakly driven open system.

The basis is split into a ground manifold and a rapidly decaying excited manifold.
Jump operators carry their rates (L_k stored as sqrt(gamma_k) L_k) and must map
excited states to ground states. To second order in the coupling V = V_+ + V_-:

    H_NH     = H_e - (i/2) sum_k L_k^dag L_k
    H_eff    = H_g - (1/2) V_- (H_NH^-1 + H_NH^-dag) V_+
    L_eff^k  = L_k H_NH^-1 V_+
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ptgain.errors import ConfigError, DimensionError, StructureError
from ptgain.lindblad import Channel, LindbladModel
from ptgain.logs import log_warning
from ptgain.quantum_core import (
    Operator,
    as_operator,
    inverse_small,
    operator_norm,
    projector,
    restrict,
)

STRUCTURE_TOL = 1e-12
VALIDITY_WARN = 0.1


@dataclass(frozen=True)
class SubspaceSplit:
    ground: Tuple[int, ...]
    excited: Tuple[int, ...]

    def __post_init__(self):
        ground = tuple(sorted(int(i) for i in self.ground))
        excited = tuple(sorted(int(i) for i in self.excited))
        object.__setattr__(self, 'ground', ground)
        object.__setattr__(self, 'excited', excited)
        if set(ground) & set(excited):
            raise DimensionError(f"Ground {ground} and excited {excited} indices overlap")
        if sorted(ground + excited) != list(range(len(ground) + len(excited))):
            raise DimensionError(f"Split {ground} + {excited} does not cover 0..{len(ground) + len(excited) - 1}")
        if not ground or not excited:
            raise DimensionError("Both manifolds must be non-empty")

    @property
    def dim(self) -> int:
        return len(self.ground) + len(self.excited)

    def projectors(self) -> Tuple[Operator, Operator]:
        return projector(self.dim, self.ground), projector(self.dim, self.excited)


@dataclass
class PerturbativeModel:
    split: SubspaceSplit
    H_g: Operator
    H_e: Operator
    V_plus: Operator
    V_minus: Operator
    jumps: List[Operator] = field(default_factory=list)


@dataclass
class EffectiveModel:
    """H_eff and L_eff on the full space, supported on the ground block."""
    split: SubspaceSplit
    H_eff: Operator
    jumps: List[Operator]

    def ground_hamiltonian(self) -> Operator:
        return restrict(self.H_eff, self.split.ground)

    def ground_jumps(self) -> List[Operator]:
        return [restrict(L, self.split.ground) for L in self.jumps]

    def to_lindblad(self, extra_channels: Sequence[Channel] = ()) -> LindbladModel:
        """Ground-manifold Lindblad model; extra channels are given on the ground block."""
        channels = [(1.0, L) for L in self.ground_jumps()] + list(extra_channels)
        return LindbladModel(self.ground_hamiltonian(), channels)

# --------------------------- Reduction ---------------------------

def split_hamiltonian(H, split: SubspaceSplit, channels: Sequence[Channel] = ()) -> PerturbativeModel:
    """Projector sandwiches of H; channel rates are folded into the jump amplitudes."""
    H = as_operator(H, split.dim)
    P_g, P_e = split.projectors()
    jumps = []
    for k, (rate, L) in enumerate(channels):
        if rate < 0:
            raise ConfigError(f"channel {k} has negative rate {rate}", 'channels')
        L = as_operator(L, split.dim)
        for name, block in (("P_e L P_e", P_e @ L @ P_e), ("P_g L P_g", P_g @ L @ P_g), ("P_e L P_g", P_e @ L @ P_g)):
            if np.linalg.norm(block, 'fro') > STRUCTURE_TOL:
                raise StructureError(f"Channel {k} must map excited to ground states, but {name} != 0")
        jumps.append(np.sqrt(rate) * L)
    return PerturbativeModel(
        split=split,
        H_g=P_g @ H @ P_g,
        H_e=P_e @ H @ P_e,
        V_plus=P_e @ H @ P_g,
        V_minus=P_g @ H @ P_e,
        jumps=jumps,
    )


def nonhermitian_excited(model: PerturbativeModel) -> Operator:
    H_nh = model.H_e.astype(np.complex128).copy()
    for L in model.jumps:
        H_nh = H_nh - 0.5j * (L.conj().T @ L)
    _, P_e = model.split.projectors()
    return P_e @ H_nh @ P_e


def _inverse_excited(model: PerturbativeModel) -> Operator:
    return inverse_small(nonhermitian_excited(model), model.split.excited)


def effective_hamiltonian(model: PerturbativeModel) -> Operator:
    if not np.any(model.V_plus):
        return model.H_g.copy()
    inv = _inverse_excited(model)
    H_eff = model.H_g - 0.5 * model.V_minus @ (inv + inv.conj().T) @ model.V_plus
    return H_eff


def effective_jumps(model: PerturbativeModel) -> List[Operator]:
    if not np.any(model.V_plus):
        return [np.zeros_like(L) for L in model.jumps]
    inv = _inverse_excited(model)
    return [L @ inv @ model.V_plus for L in model.jumps]


def reduce_model(model: PerturbativeModel) -> EffectiveModel:
    return EffectiveModel(model.split, effective_hamiltonian(model), effective_jumps(model))


def validity_metric(model: PerturbativeModel) -> float:
    """
    ||V_+||_op divided by the slowest total decay rate out of the excited manifold.

    Values above 0.1 mean the weak-drive assumption is doubtful; zero decay gives inf.
    """
    coupling = operator_norm(model.V_plus)
    if coupling == 0.0:
        return 0.0
    decay = np.zeros((model.split.dim, model.split.dim), dtype=np.complex128)
    for L in model.jumps:
        decay = decay + L.conj().T @ L
    rates = np.linalg.eigvalsh(restrict(decay, model.split.excited))
    slowest = float(rates[0])
    if slowest <= 0.0:
        return float('inf')
    metric = coupling / slowest
    if metric > VALIDITY_WARN:
        log_warning(f"Effective-operator validity metric {metric:.3g} exceeds {VALIDITY_WARN}")
    return metric
