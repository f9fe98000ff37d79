"""Steering verdicts: entanglement certificates, the erased-state
unsteerability criterion, a linear steering witness, and the separable
input-encoding pipeline that promotes ordinary steering to network steering.

A positive verdict is only ever issued from a sound certificate (NPT
negativity, or witness violation); failure of a sufficient unsteerability
condition is always reported as Inconclusive, never as "steerable".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .operators import (
    DimensionError,
    NEG_CUTOFF,
    PAULIS,
    QOperator,
    max_entry_distance,
    negativity,
)
from .measurements import POVM, computational_basis_povm, pauli_projective
from .network import (
    NetworkAssemblage,
    bilocal_assemblage,
    condition_on_trusted_measurement,
    lift_inputless_to_conditional,
    standard_assemblage,
    untrusted_input_to_outcome,
)
from .states import DEWParams, classical_correlated
from . import kernels

TOL_OPT = 1e-6

CERTIFIED = "NetworkSteeringCertified"
NLHS_EXHIBITED = "NLHSModelExhibited"
INCONCLUSIVE = "Inconclusive"


class PipelinePreconditionError(ValueError):
    """Raised when the input state does not violate the steering witness."""


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[dict] = None

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED


@dataclass(frozen=True)
class BlochData:
    """Local Bloch vector of the measuring party and correlation matrix
    T_ij = Tr(rho sigma_i (x) sigma_j) of a two-qubit state."""

    a: np.ndarray
    t: np.ndarray

    def __init__(self, a, t):
        a = np.asarray(a, dtype=float)
        t = np.asarray(t, dtype=float)
        if a.shape != (3,) or t.shape != (3, 3):
            raise ValueError("need a 3-vector and a 3x3 matrix")
        if np.linalg.norm(a) > 1 + 1e-9 or np.max(np.abs(t)) > 1 + 1e-9:
            raise ValueError("Bloch data out of physical range")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "t", t)


def certify_network_steering(asm: NetworkAssemblage) -> Verdict:
    """Entanglement of any single element rules out an NLHS model.

    Negativity is sufficient but not necessary, so the only negative answer
    is Inconclusive.
    """
    best_val = 0.0
    best_outcome = None
    for outcome, op in asm.elements.items():
        if op.trace() < NEG_CUTOFF:
            continue
        val = negativity(op, transpose_factors=[1])
        if val > best_val:
            best_val = val
            best_outcome = outcome
    if best_val > NEG_CUTOFF:
        return Verdict(CERTIFIED, {"negativity": best_val, "outcome": best_outcome})
    return Verdict(INCONCLUSIVE)


def bloch_data(rho: QOperator) -> BlochData:
    """Extract Bloch data from a two-qubit state.

    A qutrit pair produced by erasing both sides is accepted too: the
    {|0>,|1>} x {|0>,|1>} block is extracted and renormalised (the erasure
    weight is carried separately by the criterion's eta argument).
    """
    if rho.dims == (2, 2):
        mat = rho.matrix
    elif rho.dims == (3, 3):
        idx = [0, 1, 3, 4]
        block = rho.matrix[np.ix_(idx, idx)]
        tr = np.trace(block).real
        if tr < 1e-14:
            raise DimensionError("qubit block has zero weight")
        mat = block / tr
    else:
        raise DimensionError(f"unsupported dims {rho.dims}")
    a = np.array(
        [np.trace(np.kron(s, np.eye(2)) @ mat).real for s in PAULIS]
    )
    t = np.array(
        [[np.trace(np.kron(si, sj) @ mat).real for sj in PAULIS] for si in PAULIS]
    )
    return BlochData(a, t)


def erased_unsteerable(b: BlochData, eta: float, n_points: int = 2000) -> tuple[bool, float]:
    """Sufficient unsteerability condition after one-sided erasure.

    Maximises (1-3 eta)|a.x| + (3 eta/2)(1 + (a.x)^2) + ||Tx|| over unit
    vectors x; a value <= 1 certifies unsteerability of the erased state
    (from the erased side) for arbitrary measurements.  When a = 0 the
    direction dependence collapses and the maximum is 3 eta/2 plus the
    largest singular value of T, evaluated in closed form.
    """
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"eta must be in [0,1], got {eta}")
    if np.linalg.norm(b.a) < 1e-12:
        value = 1.5 * eta + float(np.linalg.svd(b.t, compute_uv=False)[0])
    else:
        value, _ = kernels.sphere_maximize(b.a, b.t, eta, n_points=n_points)
    return value <= 1.0 + TOL_OPT, float(value)


def dew_unsteerable_both_ways(p: DEWParams) -> bool:
    """Two-way unsteerability of the doubly-erased Werner state.

    One direction comes from the erased-state criterion on the underlying
    Werner state; the second erasure is absorbed by channel monotonicity
    of unsteerability, and swap symmetry of the state covers the reverse
    direction with the same computation.
    """
    if p.eta <= 1e-14:
        return True
    werner_bloch = BlochData(np.zeros(3), -p.omega * np.eye(3))
    ok, _ = erased_unsteerable(werner_bloch, p.eta)
    return ok


def linear_steering_witness(asm: dict, axes: Sequence) -> tuple[float, float, bool]:
    """Linear witness for a standard assemblage from dichotomic axes.

    value = (1/m) |sum_k tr((sigma_{0|k} - sigma_{1|k}) v_k . sigma)|;
    the LHS bound is the exact maximum over deterministic sign patterns,
    max_s ||sum_k s_k v_k|| / m.  Violation certifies steerability.
    """
    axes = [np.asarray(v, dtype=float) for v in axes]
    m = len(axes)
    acc = 0.0
    for k, v in enumerate(axes):
        if (0, k) not in asm or (1, k) not in asm:
            raise ValueError(f"assemblage missing dichotomic outcomes for input {k}")
        diff = asm[(0, k)].matrix - asm[(1, k)].matrix
        if diff.shape != (2, 2):
            raise DimensionError("witness needs qubit steered states")
        obs = sum(c * s for c, s in zip(v, PAULIS))
        acc += np.trace(diff @ obs).real
    value = abs(acc) / m
    bound = max(
        np.linalg.norm(sum(s * v for s, v in zip(signs, axes)))
        for signs in itertools.product((1, -1), repeat=m)
    ) / m
    return float(value), float(bound), value > bound + TOL_OPT


def claims_pipeline(rho_steerable: QOperator, axes: Sequence) -> tuple[Verdict, dict]:
    """Promote a steerable two-qubit state to certified network steering.

    The input-choice is encoded into a perfectly correlated classical
    source and a block-diagonal fixed measurement; every resulting
    assemblage element is separable by construction, yet conditioning the
    flag endpoint and renormalising recovers the original steered
    assemblage, whose witness violation contradicts any NLHS model.
    """
    if rho_steerable.dims != (2, 2):
        raise DimensionError("pipeline expects a two-qubit state")
    axes = [np.asarray(v, dtype=float) for v in axes]
    d = len(axes)
    sub_povms = [pauli_projective(v) for v in axes]

    direct = standard_assemblage(rho_steerable, sub_povms, side="left")
    value, bound, violated = linear_steering_witness(direct, axes)
    if not violated:
        raise PipelinePreconditionError(
            f"witness value {value:.6f} does not exceed LHS bound {bound:.6f}"
        )

    net = untrusted_input_to_outcome(rho_steerable, sub_povms)
    asm = bilocal_assemblage(net.sources[0], net.sources[1], net.central_measurements[0])

    # block identity: sigma_b = sum_x (1/d) |x><x| (x) sigma_{b|x}
    block_dev = 0.0
    for b in asm.elements:
        expected = np.zeros((2 * d, 2 * d), dtype=complex)
        for x in range(d):
            expected[2 * x:2 * x + 2, 2 * x:2 * x + 2] = direct[(b, x)].matrix / d
        block_dev = max(block_dev, float(np.max(np.abs(asm.elements[b].matrix - expected))))

    separable_elements = all(
        negativity(op, [1]) <= NEG_CUTOFF for op in asm.elements.values() if op.trace() > NEG_CUTOFF
    )

    conditioned = condition_on_trusted_measurement(asm, computational_basis_povm(d), "left")
    flat = {(b, x): op for ((b, x), op) in conditioned.items()}
    p, cond = lift_inputless_to_conditional(flat)
    round_trip_dev = max(
        max_entry_distance(cond[(b, x)], direct[(b, x)]) for (b, x) in direct
    )
    p_dev = max(abs(px - 1.0 / d) for px in p.values())
    value2, bound2, violated2 = linear_steering_witness(cond, axes)

    transcript = {
        "witness_value": value,
        "witness_bound": bound,
        "block_identity_deviation": block_dev,
        "elements_separable": separable_elements,
        "input_probability_deviation": p_dev,
        "round_trip_deviation": round_trip_dev,
        "recovered_witness_value": value2,
        "recovered_witness_violated": violated2,
    }
    status = CERTIFIED if violated2 else INCONCLUSIVE
    return Verdict(status, {"witness_value": value2, "bound": bound2}), transcript
