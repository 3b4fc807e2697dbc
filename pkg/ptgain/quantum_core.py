# ptgain/quantum_core.py

"""
Dense operators and density matrices for small open systems.

Basis convention: |0> (ground) is index 0, |1> (excited) is index 1 and the
auxiliary level |a> of the Lambda-system is index 2. sigma_z = |0><0| - |1><1|,
so gain on |0> is gain on the +1 eigenstate of sigma_z.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from ptgain.errors import DimensionError, SingularBlockError, StateError

Operator = np.ndarray

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
MAX_CONDITION = 1e8

# --------------------------- Constructors ---------------------------

def as_operator(A, dim: int = None) -> Operator:
    """Coerces A to a square complex128 matrix, optionally of a required dimension."""
    if isinstance(A, DensityMatrix):
        A = A.op
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"Operator must be a non-empty square matrix, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        raise DimensionError(f"Operator has dimension {M.shape[0]}, expected {dim}")
    return M


def basis(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise DimensionError(f"Basis index {index} outside dimension {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def ketbra(u: np.ndarray, v: np.ndarray) -> Operator:
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"ketbra needs two vectors of equal length, got {u.shape} and {v.shape}")
    return np.outer(u, v.conj())


def transition(dim: int, i: int, j: int) -> Operator:
    """|i><j| in a dim-dimensional space."""
    return ketbra(basis(dim, i), basis(dim, j))


def projector(dim: int, indices: Iterable[int]) -> Operator:
    P = np.zeros((dim, dim), dtype=np.complex128)
    for i in indices:
        if not 0 <= i < dim:
            raise DimensionError(f"Projector index {i} outside dimension {dim}")
        P[i, i] = 1.0
    return P


def embed(A, dim: int, indices: Sequence[int]) -> Operator:
    """Places a small operator on the given basis indices of a larger space."""
    A = as_operator(A, len(indices))
    M = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.asarray(indices)
    M[np.ix_(idx, idx)] = A
    return M


def restrict(A, indices: Sequence[int]) -> Operator:
    A = as_operator(A)
    idx = np.asarray(indices)
    return A[np.ix_(idx, idx)].copy()


def _frozen(M: np.ndarray) -> np.ndarray:
    M.setflags(write=False)
    return M


IDENTITY = _frozen(np.eye(2, dtype=np.complex128))
SIGMA_X = _frozen(np.array([[0, 1], [1, 0]], dtype=np.complex128))
SIGMA_Y = _frozen(np.array([[0, -1j], [1j, 0]], dtype=np.complex128))
SIGMA_Z = _frozen(np.array([[1, 0], [0, -1]], dtype=np.complex128))
LOWER = _frozen(transition(2, 0, 1))  # |0><1|
RAISE = _frozen(transition(2, 1, 0))  # |1><0|

# --------------------------- Algebra ---------------------------

def dagger(A) -> Operator:
    return as_operator(A).conj().T


def _pair(A, B) -> Tuple[Operator, Operator]:
    A = as_operator(A)
    B = as_operator(B)
    if A.shape != B.shape:
        raise DimensionError(f"Dimension mismatch: {A.shape} vs {B.shape}")
    return A, B


def commutator(A, B) -> Operator:
    A, B = _pair(A, B)
    return A @ B - B @ A


def anticommutator(A, B) -> Operator:
    A, B = _pair(A, B)
    return A @ B + B @ A


def expectation(A, rho) -> complex:
    A, R = _pair(A, rho)
    return complex(np.trace(A @ R))


def frobenius_distance(A, B) -> float:
    A, B = _pair(A, B)
    return float(np.linalg.norm(A - B, 'fro'))


def hermitian_part(A) -> Operator:
    A = as_operator(A)
    return 0.5 * (A + A.conj().T)


def is_hermitian(A, tol: float = HERMITIAN_TOL) -> bool:
    A = as_operator(A)
    return float(np.linalg.norm(A - A.conj().T, 'fro')) <= tol


def operator_norm(A) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_operator(A), 2))

# --------------------------- Spectra and inverses ---------------------------

def _eig_2x2(A: Operator) -> Tuple[np.ndarray, np.ndarray]:
    a, b = A[0, 0], A[0, 1]
    c, d = A[1, 0], A[1, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    root = np.sqrt(complex(half * half + b * c))
    values = np.array([mean + root, mean - root], dtype=np.complex128)
    if b == 0 and c == 0:
        # diagonal: values come out as (a, d) or (d, a)
        if abs(values[0] - a) <= abs(values[0] - d):
            return values, np.eye(2, dtype=np.complex128)
        return values, np.eye(2, dtype=np.complex128)[:, ::-1].copy()
    vectors = np.zeros((2, 2), dtype=np.complex128)
    for k, lam in enumerate(values):
        v = np.array([b, lam - a]) if abs(b) > 0.0 else np.array([lam - d, c])
        vectors[:, k] = v / np.linalg.norm(v)
    return values, vectors


def eig(A) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues and right eigenvectors (as columns) of a generally non-Hermitian matrix.

    Closed form for 2x2, LAPACK otherwise. Output is ordered by (real part, imaginary part).
    At an exceptional point the 2x2 closed form returns coalesced eigenvectors.
    """
    A = as_operator(A)
    if A.shape[0] > 8:
        raise DimensionError(f"eig supports dimensions up to 8, got {A.shape[0]}")
    if A.shape[0] == 1:
        return A[0].copy(), np.ones((1, 1), dtype=np.complex128)
    if A.shape[0] == 2:
        values, vectors = _eig_2x2(A)
    else:
        values, vectors = np.linalg.eig(A)
    order = np.lexsort((values.imag, values.real))
    return values[order], vectors[:, order]


def eigvals(A) -> np.ndarray:
    return eig(A)[0]


def inverse_small(A, indices: Sequence[int] = None, max_condition: float = MAX_CONDITION) -> Operator:
    """
    Inverts A on the subblock spanned by `indices` (all indices when omitted).

    The inverse is returned embedded in the full space, zero outside the block.
    Raises SingularBlockError if the block's condition number exceeds `max_condition`.
    """
    A = as_operator(A)
    dim = A.shape[0]
    if indices is None:
        indices = list(range(dim))
    block = restrict(A, indices)
    if not np.all(np.isfinite(block)):
        raise SingularBlockError("Block contains non-finite entries")
    cond = np.linalg.cond(block) if np.any(block) else np.inf
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularBlockError(
            f"Block on indices {list(indices)} is singular to tolerance (condition number {cond:.3e})"
        )
    return embed(np.linalg.inv(block), dim, indices)

# --------------------------- States ---------------------------

@dataclass(frozen=True)
class DensityMatrix:
    """
    A (possibly unnormalized) density matrix.

    Construction Hermitizes the input; inputs further than `1e-8` from Hermitian are
    rejected. With `normalized=True` the trace must be 1 within 1e-9.
    """
    op: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        M = as_operator(self.op)
        skew = float(np.linalg.norm(M - M.conj().T, 'fro'))
        if skew > 1e-8 * max(1.0, float(np.linalg.norm(M, 'fro'))):
            raise StateError(f"Density matrix is not Hermitian (|rho - rho^dag|_F = {skew:.3e})")
        M = hermitian_part(M)
        if self.normalized and abs(np.trace(M).real - 1.0) > TRACE_TOL:
            raise StateError(f"Density matrix flagged normalized has trace {np.trace(M).real:.12g}")
        M.setflags(write=False)
        object.__setattr__(self, 'op', M)

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.op).real)

    def populations(self) -> np.ndarray:
        return np.diag(self.op).real.copy()

    @classmethod
    def from_ket(cls, v: np.ndarray) -> "DensityMatrix":
        v = np.asarray(v, dtype=np.complex128)
        norm = np.vdot(v, v).real
        return cls(ketbra(v, v) / norm)

    @classmethod
    def pure(cls, dim: int, index: int) -> "DensityMatrix":
        return cls(transition(dim, index, index))

    @classmethod
    def from_diagonal(cls, values: Sequence[float]) -> "DensityMatrix":
        values = np.asarray(values, dtype=float)
        return cls(np.diag(values).astype(np.complex128), normalized=abs(values.sum() - 1.0) <= TRACE_TOL)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)


StateLike = Union[DensityMatrix, np.ndarray]


def matrix_of(rho: StateLike) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.op
    return as_operator(rho)
