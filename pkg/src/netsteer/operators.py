"""Dense complex-operator kernel: tensor algebra, partial operations, spectra.

Convention: tensor factors are combined with a row-major Kronecker product,
so the *first* factor occupies the most significant index block.  This is
the numpy ``np.kron`` convention and is used consistently everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Tolerances.  All identities implemented here are exact algebra, so double
# precision leaves ample headroom.
TOL_EQ = 1e-10       # operator equality (max absolute entry)
TOL_HERM = 1e-9      # Hermiticity defect
NEG_CUTOFF = 1e-12   # eigenvalue cutoff below which we call something negative

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class DimensionError(ValueError):
    """Raised on mismatched or invalid tensor-factor dimensions."""


class NotHermitianError(ValueError):
    """Raised when an operation requires a Hermitian input."""


class NotPositiveError(ValueError):
    """Raised when an operation requires a positive semidefinite input."""


@dataclass(frozen=True)
class QOperator:
    """A square complex matrix tagged with its tensor-factor dimensions.

    Hermiticity, positivity and normalisation are checkable predicates, not
    construction-time requirements: sub-normalised assemblage elements and
    POVM effects are first-class citizens.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, matrix, dims: Sequence[int]):
        matrix = np.asarray(matrix, dtype=complex)
        dims = tuple(int(d) for d in dims)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {matrix.shape}")
        if any(d < 1 for d in dims):
            raise DimensionError(f"dimensions must be >= 1, got {dims}")
        if int(np.prod(dims)) != matrix.shape[0]:
            raise DimensionError(
                f"product of dims {dims} != matrix side {matrix.shape[0]}"
            )
        matrix = matrix.copy()
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nfactors(self) -> int:
        return len(self.dims)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def dagger(self) -> "QOperator":
        return QOperator(self.matrix.conj().T, self.dims)

    def regroup(self, groups: Sequence[Sequence[int]]) -> "QOperator":
        """Reinterpret contiguous factor groups as single factors.

        ``groups`` must partition ``range(nfactors)`` into contiguous,
        increasing runs.  The matrix is untouched; only the dimension
        bookkeeping changes (local tomography makes this a free operation).
        """
        flat = [i for g in groups for i in g]
        if flat != list(range(self.nfactors)):
            raise DimensionError(f"groups {groups} do not partition factors in order")
        new_dims = [int(np.prod([self.dims[i] for i in g])) for g in groups]
        return QOperator(self.matrix, new_dims)

    def __repr__(self):
        return f"QOperator(dim={self.dim}, dims={list(self.dims)})"


def identity(dims: Sequence[int]) -> QOperator:
    d = int(np.prod(list(dims)))
    return QOperator(np.eye(d, dtype=complex), dims)


def basis_ket(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def projector(vec: np.ndarray, dims: Sequence[int]) -> QOperator:
    vec = np.asarray(vec, dtype=complex)
    return QOperator(np.outer(vec, vec.conj()), dims)


def tensor(a: QOperator, b: QOperator, *rest: QOperator) -> QOperator:
    """Kronecker product; dims are concatenated."""
    out = QOperator(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    for r in rest:
        out = QOperator(np.kron(out.matrix, r.matrix), out.dims + r.dims)
    return out


def _check_factors(op: QOperator, factors: Iterable[int]) -> list[int]:
    factors = sorted(set(int(f) for f in factors))
    for f in factors:
        if f < 0 or f >= op.nfactors:
            raise DimensionError(f"factor index {f} out of range for dims {op.dims}")
    return factors


def partial_trace(op: QOperator, keep: Iterable[int]) -> QOperator:
    """Trace out every factor not in ``keep``, preserving factor order."""
    keep = _check_factors(op, keep)
    k = op.nfactors
    t = op.matrix.reshape(op.dims + op.dims)
    row = list(range(k))
    col = [i if i not in keep else k + i for i in range(k)]
    out = [i for i in keep] + [k + i for i in keep]
    mat = np.einsum(t, row + col, out)
    new_dims = [op.dims[i] for i in keep]
    side = int(np.prod(new_dims)) if new_dims else 1
    return QOperator(mat.reshape(side, side), new_dims or [1])


def partial_transpose(op: QOperator, factors: Iterable[int]) -> QOperator:
    """Transpose the listed factors in place."""
    factors = _check_factors(op, factors)
    k = op.nfactors
    t = op.matrix.reshape(op.dims + op.dims)
    axes = list(range(2 * k))
    for f in factors:
        axes[f], axes[k + f] = axes[k + f], axes[f]
    return QOperator(t.transpose(axes).reshape(op.dim, op.dim), op.dims)


def hermitian_eigenvalues(op: QOperator, tol: float = TOL_HERM) -> np.ndarray:
    """Real eigenvalues in ascending order.

    The input is checked Hermitian to ``tol`` and then explicitly
    symmetrised, which stabilises the solver without masking real errors.
    """
    defect = np.max(np.abs(op.matrix - op.matrix.conj().T))
    if defect > tol:
        raise NotHermitianError(f"Hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    herm = (op.matrix + op.matrix.conj().T) / 2
    return np.linalg.eigvalsh(herm)


def negativity(op: QOperator, transpose_factors: Iterable[int]) -> float:
    """Sum of |negative eigenvalues| of the partial transpose.

    A strictly positive value certifies entanglement across the bipartition
    (NPT implies entangled in any dimension); zero is inconclusive.
    """
    evs = hermitian_eigenvalues(op)
    if evs[0] < -NEG_CUTOFF * max(1.0, abs(evs[-1])):
        raise NotPositiveError(f"input has negative eigenvalue {evs[0]:.3e}")
    pt = partial_transpose(op, transpose_factors)
    pt_evs = hermitian_eigenvalues(pt)
    return float(-np.sum(pt_evs[pt_evs < -NEG_CUTOFF]))


def is_psd(op: QOperator, tol: float = TOL_EQ) -> bool:
    try:
        evs = hermitian_eigenvalues(op)
    except NotHermitianError:
        return False
    return bool(evs[0] >= -tol)


def is_density(op: QOperator, tol: float = TOL_EQ) -> bool:
    return is_psd(op, tol) and abs(np.trace(op.matrix) - 1.0) <= tol


def op_equal(a: QOperator, b: QOperator, tol: float = TOL_EQ) -> bool:
    """Max-absolute-entry comparison.  Dims must match exactly."""
    if a.dims != b.dims:
        raise DimensionError(f"dims mismatch: {a.dims} vs {b.dims}")
    return bool(np.max(np.abs(a.matrix - b.matrix)) <= tol)


def max_entry_distance(a: QOperator, b: QOperator) -> float:
    if a.dims != b.dims:
        raise DimensionError(f"dims mismatch: {a.dims} vs {b.dims}")
    return float(np.max(np.abs(a.matrix - b.matrix)))
