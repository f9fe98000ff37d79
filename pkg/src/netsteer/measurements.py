"""POVM construction and validation.

Outcome labels are explicit rather than positional, so that multi-party
outcome tuples in network assemblages stay unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .operators import (
    DimensionError,
    PAULIS,
    QOperator,
    TOL_EQ,
    basis_ket,
    identity,
    is_psd,
    partial_trace,
    projector,
    tensor,
)
from .states import psi_minus


class InvalidPOVMError(ValueError):
    """Raised when effects are not PSD or do not sum to the identity."""


@dataclass(frozen=True)
class POVM:
    """Ordered list of PSD effects summing to the identity."""

    effects: tuple[QOperator, ...]
    outcome_labels: tuple[Hashable, ...]

    def __init__(self, effects: Sequence[QOperator], outcome_labels=None):
        effects = tuple(effects)
        if not effects:
            raise InvalidPOVMError("POVM needs at least one effect")
        dims = effects[0].dims
        if any(e.dims != dims for e in effects):
            raise DimensionError("all effects must share one DimList")
        for e in effects:
            if not is_psd(e, tol=1e-9):
                raise InvalidPOVMError("effect is not positive semidefinite")
        total = sum(e.matrix for e in effects)
        if np.max(np.abs(total - np.eye(effects[0].dim))) > TOL_EQ:
            raise InvalidPOVMError("effects do not sum to the identity")
        if outcome_labels is None:
            outcome_labels = tuple(range(len(effects)))
        else:
            outcome_labels = tuple(outcome_labels)
            if len(outcome_labels) != len(effects):
                raise InvalidPOVMError("one label per effect required")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "outcome_labels", outcome_labels)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.effects[0].dims

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def effect(self, label) -> QOperator:
        return self.effects[self.outcome_labels.index(label)]


@dataclass(frozen=True)
class SeparableMeasurement:
    """A POVM together with an explicit tensor-decomposition certificate.

    Each effect carries a list of (left, right) PSD factor pairs whose
    tensor sum reproduces it.  Separability detection being hard in
    general, the certificate is stored, never searched for.
    """

    povm: POVM
    terms: tuple[tuple[tuple[QOperator, QOperator], ...], ...]

    def __init__(self, povm: POVM, terms):
        terms = tuple(tuple(pairs) for pairs in terms)
        if len(terms) != povm.n_outcomes:
            raise InvalidPOVMError("one term list per effect required")
        for effect, pairs in zip(povm.effects, terms):
            acc = np.zeros_like(effect.matrix)
            for left, right in pairs:
                if not (is_psd(left, tol=1e-9) and is_psd(right, tol=1e-9)):
                    raise InvalidPOVMError("decomposition factor not PSD")
                acc += np.kron(left.matrix, right.matrix)
            if np.max(np.abs(acc - effect.matrix)) > TOL_EQ:
                raise InvalidPOVMError("decomposition does not reproduce effect")
        object.__setattr__(self, "povm", povm)
        object.__setattr__(self, "terms", terms)


def bell_swap_povm(local_dim: int = 3) -> POVM:
    """Two-outcome swap measurement {singlet projector, complement}.

    For ``local_dim`` > 2 the singlet lives in the {|0>, |1>} x {|0>, |1>}
    qubit block; the default qutrit pair is the erasure-channel setting.
    """
    if local_dim < 2:
        raise DimensionError("local_dim must be >= 2")
    d = local_dim
    v = np.zeros(d * d, dtype=complex)
    v[0 * d + 1] = 1 / np.sqrt(2)
    v[1 * d + 0] = -1 / np.sqrt(2)
    m0 = projector(v, [d, d])
    m1 = QOperator(np.eye(d * d) - m0.matrix, [d, d])
    return POVM([m0, m1], outcome_labels=(0, 1))


def input_encoded_measurement(sub_povms: Sequence[POVM], d: int) -> POVM:
    """Block-diagonal POVM sum_x |x><x| (x) M_{b|x} over ``d`` sub-POVMs."""
    sub_povms = list(sub_povms)
    if len(sub_povms) != d:
        raise InvalidPOVMError(f"expected {d} sub-POVMs, got {len(sub_povms)}")
    n_out = sub_povms[0].n_outcomes
    labels = sub_povms[0].outcome_labels
    target = sub_povms[0].dims
    if any(p.n_outcomes != n_out or p.dims != target for p in sub_povms):
        raise InvalidPOVMError("sub-POVMs must share outcome count and dims")
    d_t = sub_povms[0].effects[0].dim
    effects = []
    for b in range(n_out):
        mat = np.zeros((d * d_t, d * d_t), dtype=complex)
        for x in range(d):
            block = sub_povms[x].effects[b].matrix
            mat[x * d_t:(x + 1) * d_t, x * d_t:(x + 1) * d_t] = block
        effects.append(QOperator(mat, (d,) + tuple(target)))
    return POVM(effects, outcome_labels=labels)


def pauli_projective(axis) -> POVM:
    """Dichotomic qubit measurement (I +/- axis . sigma)/2 along a unit axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError(f"axis must be a unit 3-vector, got {axis}")
    obs = sum(a * s for a, s in zip(axis, PAULIS))
    plus = QOperator((np.eye(2) + obs) / 2, [2])
    minus = QOperator((np.eye(2) - obs) / 2, [2])
    return POVM([plus, minus], outcome_labels=(0, 1))


def computational_basis_povm(d: int) -> POVM:
    return POVM(
        [projector(basis_ket(i, d), [d]) for i in range(d)],
        outcome_labels=tuple(range(d)),
    )


def induced_measurement(m: POVM, hidden_state: QOperator, side: str) -> POVM:
    """Plug a hidden state into one factor of a two-factor POVM.

    side="left" traces the hidden state against the left factor, leaving a
    POVM on the right factor (and vice versa).  Completeness is inherited.
    """
    if m.effects[0].nfactors != 2:
        raise DimensionError("induced_measurement needs a two-factor POVM")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    plugged = 0 if side == "left" else 1
    kept = 1 - plugged
    if hidden_state.dim != m.dims[plugged]:
        raise DimensionError(
            f"hidden state dim {hidden_state.dim} != factor dim {m.dims[plugged]}"
        )
    eye = identity([m.dims[kept]])
    effects = []
    for e in m.effects:
        if side == "left":
            full = tensor(hidden_state, eye)
        else:
            full = tensor(eye, hidden_state)
        prod = QOperator(e.matrix @ full.matrix, e.dims)
        effects.append(partial_trace(prod, keep=[kept]))
    return POVM(effects, outcome_labels=m.outcome_labels)
