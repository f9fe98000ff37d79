"""Explicit network-local-hidden-state models: constructors, reconstruction,
providers, and the separable-realisation transforms.

Hidden variables are finite and explicitly enumerated throughout.  Provider
failure is always reported as "model not found" and never as a steering
verdict: absence of a found model is not evidence of network steering.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import nnls

from .operators import (
    DimensionError,
    QOperator,
    TOL_EQ,
    basis_ket,
    is_density,
    is_psd,
    partial_trace,
    projector,
    tensor,
)
from .measurements import (
    POVM,
    SeparableMeasurement,
    computational_basis_povm,
    induced_measurement,
)
from .network import (
    LinearNetwork,
    NetworkAssemblage,
    standard_assemblage,
)
from .states import psi_minus, werner

RECONSTRUCTION_TOL = 1e-10


class ModelNotFoundError(RuntimeError):
    """A provider could not exhibit the required local model.

    This is not a steering claim; it only means this toolkit's finite
    search failed.
    """


class PatternError(ValueError):
    """The requested slot pattern cannot be resolved (direction conflict,
    unresolvable dependency, or an untagged endpoint)."""


# --------------------------------------------------------------------------
# model and reconstruction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NLHSModel:
    """Per-source hidden distributions, per-party response tables, and
    hidden endpoint states.

    responses[j][b, lam_j, lam_{j+1}] is the response of the central party
    sitting between sources j and j+1; outcome axis b is indexed by
    ``outcome_labels[j]``.
    """

    source_dists: tuple[np.ndarray, ...]
    responses: tuple[np.ndarray, ...]
    left_states: tuple[QOperator, ...]
    right_states: tuple[QOperator, ...]
    outcome_labels: tuple[tuple, ...]

    def __init__(self, source_dists, responses, left_states, right_states, outcome_labels=None):
        source_dists = tuple(np.asarray(p, dtype=float) for p in source_dists)
        responses = tuple(np.asarray(r, dtype=float) for r in responses)
        left_states = tuple(left_states)
        right_states = tuple(right_states)
        if len(responses) != len(source_dists) - 1:
            raise ValueError("need one response table per central party")
        for p in source_dists:
            if p.ndim != 1 or np.any(p < -1e-12) or abs(p.sum() - 1) > TOL_EQ:
                raise ValueError("hidden distributions must be normalised")
        for j, r in enumerate(responses):
            if r.shape[1:] != (len(source_dists[j]), len(source_dists[j + 1])):
                raise ValueError(f"response table {j} has wrong hidden-variable shape")
            norm = r.sum(axis=0)
            if np.any(np.abs(norm - 1) > 1e-8) or np.any(r < -1e-10):
                raise ValueError(f"response table {j} is not a conditional distribution")
        if len(left_states) != len(source_dists[0]):
            raise ValueError("one left endpoint state per first hidden value")
        if len(right_states) != len(source_dists[-1]):
            raise ValueError("one right endpoint state per last hidden value")
        for s in left_states + right_states:
            if not is_density(s, tol=1e-8):
                raise ValueError("endpoint hidden states must be densities")
        if outcome_labels is None:
            outcome_labels = tuple(tuple(range(r.shape[0])) for r in responses)
        else:
            outcome_labels = tuple(tuple(l) for l in outcome_labels)
        object.__setattr__(self, "source_dists", source_dists)
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "left_states", left_states)
        object.__setattr__(self, "right_states", right_states)
        object.__setattr__(self, "outcome_labels", outcome_labels)

    @property
    def n_parties(self) -> int:
        return len(self.source_dists) + 1


def reconstruct(model: NLHSModel) -> NetworkAssemblage:
    """Assemble the (separable-by-construction) network assemblage."""
    dims = (model.left_states[0].dims[0], model.right_states[0].dims[0])
    d_l, d_r = model.left_states[0].dim, model.right_states[0].dim
    elements = {}
    outcome_ranges = [range(r.shape[0]) for r in model.responses]
    for bs in itertools.product(*outcome_ranges):
        w = np.diag(model.source_dists[0])
        for j, b in enumerate(bs):
            w = w @ model.responses[j][b] @ np.diag(model.source_dists[j + 1])
        mat = np.zeros((d_l * d_r, d_l * d_r), dtype=complex)
        for i, left in enumerate(model.left_states):
            for k, right in enumerate(model.right_states):
                if w[i, k] != 0.0:
                    mat += w[i, k] * np.kron(left.matrix, right.matrix)
        label = tuple(model.outcome_labels[j][b] for j, b in enumerate(bs))
        elements[label] = QOperator(mat, (model.left_states[0].dims[0],
                                          model.right_states[0].dims[0]))
    return NetworkAssemblage(elements, n_parties=model.n_parties)


# --------------------------------------------------------------------------
# separable decompositions and providers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparableDecomposition:
    """Explicit convex decomposition sum_g p(g) L_g (x) R_g of a source."""

    weights: np.ndarray
    left_states: tuple[QOperator, ...]
    right_states: tuple[QOperator, ...]

    def __init__(self, weights, left_states, right_states):
        weights = np.asarray(weights, dtype=float)
        left_states = tuple(left_states)
        right_states = tuple(right_states)
        if not (len(weights) == len(left_states) == len(right_states)):
            raise ValueError("one (left, right) pair per weight required")
        if np.any(weights < -1e-12) or abs(weights.sum() - 1) > TOL_EQ:
            raise ValueError("weights must be a probability distribution")
        for s in left_states + right_states:
            if not is_density(s, tol=1e-8):
                raise ValueError("decomposition states must be densities")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "left_states", left_states)
        object.__setattr__(self, "right_states", right_states)

    def state(self) -> QOperator:
        acc = sum(
            w * np.kron(l.matrix, r.matrix)
            for w, l, r in zip(self.weights, self.left_states, self.right_states)
        )
        return QOperator(acc, self.left_states[0].dims + self.right_states[0].dims)


def product_decomposition(left: QOperator, right: QOperator) -> SeparableDecomposition:
    return SeparableDecomposition([1.0], [left], [right])


def classical_correlated_decomposition(d: int) -> SeparableDecomposition:
    kets = [projector(basis_ket(x, d), [d]) for x in range(d)]
    return SeparableDecomposition(np.full(d, 1.0 / d), kets, kets)


def werner_separable_decomposition(omega: float) -> SeparableDecomposition:
    """Explicit separable form of the Werner state for omega <= 1/3.

    Mixes the six antipodal Pauli eigenstate pairs (which reproduce the
    omega = 1/3 state) with the four computational products for the
    remaining white noise.
    """
    if omega > 1.0 / 3.0 + 1e-12:
        raise ValueError("Werner state is entangled for omega > 1/3")
    weights = []
    lefts = []
    rights = []
    eye = np.eye(2, dtype=complex)
    from .operators import PAULIS

    for s in PAULIS:
        plus = QOperator((eye + s) / 2, [2])
        minus = QOperator((eye - s) / 2, [2])
        for l, r in ((plus, minus), (minus, plus)):
            weights.append(3 * omega / 6)
            lefts.append(l)
            rights.append(r)
    for i in range(2):
        for j in range(2):
            weights.append((1 - 3 * omega) / 4)
            lefts.append(projector(basis_ket(i, 2), [2]))
            rights.append(projector(basis_ket(j, 2), [2]))
    return SeparableDecomposition(weights, lefts, rights)


@dataclass(frozen=True)
class LHSData:
    """A concrete LHS model: sigma_{b|x} = sum_l p(l) resp[b, x, l] state_l."""

    dist: np.ndarray
    response: np.ndarray          # shape (n_outcomes, n_inputs, n_lambda)
    states: tuple[QOperator, ...]


def _assemblage_from(rho: QOperator, povms: Sequence[POVM], direction: str) -> dict:
    side = "left" if direction == "right" else "right"
    return standard_assemblage(rho, povms, side=side)


class SeparableLHSProvider:
    """Trivial provider for sources handed over with an explicit separable
    decomposition: the decomposition index is the hidden variable."""

    def __init__(self, decomposition: SeparableDecomposition):
        self.decomposition = decomposition

    def find(self, rho: QOperator, povms: Sequence[POVM], direction: str) -> LHSData:
        dec = self.decomposition
        if np.max(np.abs(dec.state().matrix - rho.matrix)) > 1e-9:
            raise ModelNotFoundError("decomposition does not reproduce the source")
        measured = dec.left_states if direction == "right" else dec.right_states
        kept = dec.right_states if direction == "right" else dec.left_states
        n_out = povms[0].n_outcomes
        resp = np.zeros((n_out, len(povms), len(dec.weights)))
        for x, povm in enumerate(povms):
            for b, effect in enumerate(povm.effects):
                for g, s in enumerate(measured):
                    resp[b, x, g] = np.trace(effect.matrix @ s.matrix).real
        return LHSData(dec.weights, resp, kept)


class BruteForceLHSProvider:
    """Finite-behaviour search: deterministic response functions paired with
    hidden states drawn from the steered states plus a coarse Bloch grid,
    weights solved by nonnegative least squares.  Only reconstructions
    within ``tol`` are accepted."""

    def __init__(self, n_bloch: int = 26, tol: float = RECONSTRUCTION_TOL):
        self.n_bloch = n_bloch
        self.tol = tol

    def _candidates(self, rho, povms, direction):
        asm = _assemblage_from(rho, povms, direction)
        cands = []
        for op in asm.values():
            tr = op.trace()
            if tr > 1e-9:
                cands.append(QOperator(op.matrix / tr, op.dims))
        kept_dim = cands[0].dim if cands else rho.dims[1 if direction == "right" else 0]
        if kept_dim == 2:
            from .kernels import fibonacci_sphere
            from .operators import PAULIS

            for u in fibonacci_sphere(self.n_bloch):
                obs = sum(c * s for c, s in zip(u, PAULIS))
                cands.append(QOperator((np.eye(2) + obs) / 2, [2]))
        return cands

    def find(self, rho: QOperator, povms: Sequence[POVM], direction: str) -> LHSData:
        asm = _assemblage_from(rho, povms, direction)
        n_out = povms[0].n_outcomes
        n_in = len(povms)
        cands = self._candidates(rho, povms, direction)
        strategies = list(itertools.product(range(n_out), repeat=n_in))
        # unknowns: c[strategy, candidate] >= 0 with
        #   sum_{D: D(x)=b} sum_j c[D,j] tau_j = sigma_{b|x}
        d = cands[0].dim
        n_eq_block = d * d * 2
        rows = []
        target = []
        for x in range(n_in):
            for b in range(n_out):
                sig = asm[(povms[x].outcome_labels[b], x)].matrix
                target.append(np.concatenate([sig.real.ravel(), sig.imag.ravel()]))
                row = np.zeros((n_eq_block, len(strategies) * len(cands)))
                for si, strat in enumerate(strategies):
                    if strat[x] != b:
                        continue
                    for j, tau in enumerate(cands):
                        col = si * len(cands) + j
                        row[:, col] = np.concatenate(
                            [tau.matrix.real.ravel(), tau.matrix.imag.ravel()]
                        )
                rows.append(row)
        a_mat = np.vstack(rows)
        b_vec = np.concatenate(target)
        c, _ = nnls(a_mat, b_vec, maxiter=10 * a_mat.shape[1])
        resid = np.max(np.abs(a_mat @ c - b_vec))
        if resid > self.tol:
            raise ModelNotFoundError(f"NNLS residual {resid:.3e} exceeds {self.tol:.1e}")
        weights = c.reshape(len(strategies), len(cands))
        keep = np.argwhere(weights > 1e-14)
        dist = np.array([weights[si, j] for si, j in keep])
        states = tuple(cands[j] for _, j in keep)
        resp = np.zeros((n_out, n_in, len(dist)))
        for li, (si, _) in enumerate(keep):
            for x in range(n_in):
                resp[strategies[si][x], x, li] = 1.0
        total = dist.sum()
        if abs(total - 1.0) > 1e-8:
            raise ModelNotFoundError(f"weights sum to {total}, expected 1")
        return LHSData(dist / total, resp, states)


def solve_lhv(behavior: np.ndarray, tol: float = RECONSTRUCTION_TOL):
    """Local-hidden-variable decomposition of p(b, c | x, y).

    ``behavior`` has shape (n_b, n_c, n_x, n_y).  Returns (dist over
    deterministic strategy pairs, left responses resp_b[b, x, l],
    right responses resp_c[c, y, l]).  Deterministic-vertex weights are
    found by nonnegative least squares; first-feasible tie-break is the
    lowest lexicographic strategy index (nnls is deterministic).
    """
    n_b, n_c, n_x, n_y = behavior.shape
    left = list(itertools.product(range(n_b), repeat=n_x))
    right = list(itertools.product(range(n_c), repeat=n_y))
    n_vert = len(left) * len(right)
    a_mat = np.zeros((n_b * n_c * n_x * n_y, n_vert))
    for vi, (dl, dr) in enumerate(itertools.product(left, right)):
        for x in range(n_x):
            for y in range(n_y):
                idx = ((dl[x] * n_c + dr[y]) * n_x + x) * n_y + y
                a_mat[idx, vi] = 1.0
    # index layout matches a_mat: ((b * n_c + c) * n_x + x) * n_y + y
    b_vec = behavior.reshape(-1)
    q, _ = nnls(a_mat, b_vec, maxiter=10 * n_vert)
    resid = np.max(np.abs(a_mat @ q - b_vec))
    if resid > tol:
        raise ModelNotFoundError(f"LHV residual {resid:.3e} exceeds {tol:.1e}")
    keep = np.argwhere(q > 1e-14).ravel()
    dist = q[keep]
    dist = dist / dist.sum()
    resp_b = np.zeros((n_b, n_x, len(keep)))
    resp_c = np.zeros((n_c, n_y, len(keep)))
    pairs = list(itertools.product(left, right))
    for li, vi in enumerate(keep):
        dl, dr = pairs[vi]
        for x in range(n_x):
            resp_b[dl[x], x, li] = 1.0
        for y in range(n_y):
            resp_c[dr[y], y, li] = 1.0
    return dist, resp_b, resp_c


# --------------------------------------------------------------------------
# pattern constructors
# --------------------------------------------------------------------------

SEP = "SEP"
UNS_RIGHT = "UNS_RIGHT"
UNS_LEFT = "UNS_LEFT"
LOC = "LOC"
SLOT_KINDS = (SEP, UNS_RIGHT, UNS_LEFT, LOC)


@dataclass
class SourceSlot:
    """A source tagged with the structural assumption used to resolve it.

    SEP slots require an explicit decomposition.  UNS slots use the given
    LHS provider, defaulting to the trivial separable provider when a
    decomposition is supplied and the brute-force one otherwise.  LOC slots
    are resolved through the deterministic-strategy LHV solver.
    """

    kind: str
    state: QOperator
    decomposition: Optional[SeparableDecomposition] = None
    provider: object = None

    def __post_init__(self):
        if self.kind not in SLOT_KINDS:
            raise PatternError(f"unknown slot kind {self.kind!r}")
        if self.kind == SEP and self.decomposition is None:
            raise PatternError("SEP slot needs a SeparableDecomposition")
        if self.kind in (UNS_RIGHT, UNS_LEFT) and self.provider is None:
            if self.decomposition is not None:
                self.provider = SeparableLHSProvider(self.decomposition)
            else:
                self.provider = BruteForceLHSProvider()


def build_sep_unsteer_bilocal(
    sep: SeparableDecomposition, rho_bc: QOperator, m: POVM, lhs
) -> NLHSModel:
    """NLHS model for a separable first source and a second source that is
    unsteerable toward the trusted right endpoint, for any fixed central
    measurement."""
    if sep.state().dims[1] != m.dims[0] or rho_bc.dims[0] != m.dims[1]:
        raise DimensionError("measurement dims do not match the two sources")
    povms = [induced_measurement(m, g, side="left") for g in sep.right_states]
    data = lhs.find(rho_bc, povms, direction="right")
    return NLHSModel(
        source_dists=[sep.weights, data.dist],
        responses=[data.response],          # resp[b, gamma, lambda]
        left_states=sep.left_states,
        right_states=data.states,
        outcome_labels=[m.outcome_labels],
    )


def _lhv_behavior(rho: QOperator, left_povms, right_povms) -> np.ndarray:
    n_b = left_povms[0].n_outcomes
    n_c = right_povms[0].n_outcomes
    behavior = np.zeros((n_b, n_c, len(left_povms), len(right_povms)))
    for x, pl in enumerate(left_povms):
        for y, pr in enumerate(right_povms):
            for b, el in enumerate(pl.effects):
                for c, er in enumerate(pr.effects):
                    behavior[b, c, x, y] = np.trace(
                        np.kron(el.matrix, er.matrix) @ rho.matrix
                    ).real
    return behavior


def build_triangle_patterns(pattern: str, slots, measurements) -> NLHSModel:
    """Explicit NLHS constructions for the four-party line (unwrapped
    triangle): SEP-LOC-SEP, UNS-SEP-UNS, SEP-UNS-UNS, UNS-UNS-SEP.

    Each branch follows its own derivation chain (induced measurements,
    then provider extraction, then assembly); the generic percolation
    constructor provides an independent route for cross-checks.
    """
    slots = list(slots)
    measurements = list(measurements)
    if len(slots) != 3 or len(measurements) != 2:
        raise PatternError("triangle patterns need three sources, two measurements")
    m0, m1 = measurements
    s0, s1, s2 = slots

    if pattern == "SEP-LOC-SEP":
        d0, d2 = s0.decomposition, s2.decomposition
        if d0 is None or d2 is None:
            raise PatternError("end slots need separable decompositions")
        left_povms = [induced_measurement(m0, r, "left") for r in d0.right_states]
        right_povms = [induced_measurement(m1, l, "right") for l in d2.left_states]
        behavior = _lhv_behavior(s1.state, left_povms, right_povms)
        try:
            dist, resp_b, resp_c = solve_lhv(behavior)
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"LOC slot 1: {exc}") from exc
        return NLHSModel(
            [d0.weights, dist, d2.weights],
            [np.transpose(resp_b, (0, 1, 2)),              # [b, alpha, lam]
             np.transpose(resp_c, (0, 2, 1))],             # [c, lam, beta]
            d0.left_states,
            d2.right_states,
            outcome_labels=[m0.outcome_labels, m1.outcome_labels],
        )

    if pattern == "UNS-SEP-UNS":
        d1 = s1.decomposition
        if d1 is None:
            raise PatternError("central slot needs a separable decomposition")
        povms_left = [induced_measurement(m0, l, "right") for l in d1.left_states]
        povms_right = [induced_measurement(m1, r, "left") for r in d1.right_states]
        try:
            data0 = s0.provider.find(s0.state, povms_left, direction="left")
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"UNS slot 0: {exc}") from exc
        try:
            data2 = s2.provider.find(s2.state, povms_right, direction="right")
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"UNS slot 2: {exc}") from exc
        return NLHSModel(
            [data0.dist, d1.weights, data2.dist],
            [np.transpose(data0.response, (0, 2, 1)),      # [b, alpha, gamma]
             data2.response],                              # [c, gamma, beta]
            data0.states,
            data2.states,
            outcome_labels=[m0.outcome_labels, m1.outcome_labels],
        )

    if pattern == "SEP-UNS-UNS":
        d0 = s0.decomposition
        if d0 is None:
            raise PatternError("first slot needs a separable decomposition")
        povms0 = [induced_measurement(m0, r, "left") for r in d0.right_states]
        try:
            data1 = s1.provider.find(s1.state, povms0, direction="right")
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"UNS slot 1: {exc}") from exc
        povms1 = [induced_measurement(m1, g, "left") for g in data1.states]
        try:
            data2 = s2.provider.find(s2.state, povms1, direction="right")
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"UNS slot 2: {exc}") from exc
        return NLHSModel(
            [d0.weights, data1.dist, data2.dist],
            [data1.response, data2.response],
            d0.left_states,
            data2.states,
            outcome_labels=[m0.outcome_labels, m1.outcome_labels],
        )

    if pattern == "UNS-UNS-SEP":
        d2 = s2.decomposition
        if d2 is None:
            raise PatternError("last slot needs a separable decomposition")
        povms1 = [induced_measurement(m1, l, "right") for l in d2.left_states]
        try:
            data1 = s1.provider.find(s1.state, povms1, direction="left")
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"UNS slot 1: {exc}") from exc
        povms0 = [induced_measurement(m0, g, "right") for g in data1.states]
        try:
            data0 = s0.provider.find(s0.state, povms0, direction="left")
        except ModelNotFoundError as exc:
            raise ModelNotFoundError(f"UNS slot 0: {exc}") from exc
        return NLHSModel(
            [data0.dist, data1.dist, d2.weights],
            [np.transpose(data0.response, (0, 2, 1)),
             np.transpose(data1.response, (0, 2, 1))],
            data0.states,
            d2.right_states,
            outcome_labels=[m0.outcome_labels, m1.outcome_labels],
        )

    raise PatternError(f"unknown triangle pattern {pattern!r}")


def build_percolation_line(slots, measurements) -> tuple[NLHSModel, list[str]]:
    """Resolve a tagged line of arbitrary length into an NLHS model.

    Separable slots resolve immediately and feed effective inputs to their
    neighbours; unsteerable slots consume the measurement on their input
    side and pass hidden states onward; local slots consume both adjacent
    measurements.  Returns the model and the resolution transcript.
    """
    slots = list(slots)
    measurements = list(measurements)
    n_src = len(slots)
    if len(measurements) != n_src - 1:
        raise PatternError(f"{n_src} sources need {n_src - 1} measurements")
    if slots[0].kind not in (SEP, UNS_LEFT):
        raise PatternError("leftmost slot must be SEP or UNS_LEFT (endpoint states)")
    if slots[-1].kind not in (SEP, UNS_RIGHT):
        raise PatternError("rightmost slot must be SEP or UNS_RIGHT (endpoint states)")

    # each measurement j is consumed by exactly one resolver
    consumer = []
    for j in range(n_src - 1):
        left_claims = slots[j].kind in (UNS_LEFT, LOC)
        right_claims = slots[j + 1].kind in (UNS_RIGHT, LOC)
        if left_claims and right_claims:
            raise PatternError(
                f"measurement {j} claimed from both sides "
                f"({slots[j].kind} vs {slots[j + 1].kind})"
            )
        if left_claims:
            consumer.append(("left", j))
        elif right_claims:
            consumer.append(("right", j + 1))
        else:
            consumer.append(("direct", None))

    dists: list = [None] * n_src
    left_states: list = [None] * n_src    # states provided on the slot's left factor
    right_states: list = [None] * n_src
    responses: list = [None] * (n_src - 1)
    transcript: list[str] = []

    for i, slot in enumerate(slots):
        if slot.kind == SEP:
            dec = slot.decomposition
            dists[i] = dec.weights
            left_states[i] = dec.left_states
            right_states[i] = dec.right_states
            transcript.append(f"slot {i}: SEP resolved from decomposition")

    def try_resolve(i: int) -> bool:
        slot = slots[i]
        if slot.kind == UNS_RIGHT:
            if i == 0 or right_states[i - 1] is None:
                return False
            povms = [
                induced_measurement(measurements[i - 1], r, "left")
                for r in right_states[i - 1]
            ]
            try:
                data = slot.provider.find(slot.state, povms, direction="right")
            except ModelNotFoundError as exc:
                raise ModelNotFoundError(f"UNS slot {i}: {exc}") from exc
            dists[i] = data.dist
            right_states[i] = data.states
            responses[i - 1] = data.response          # [b, lam_{i-1}, lam_i]
            transcript.append(f"slot {i}: UNS_RIGHT resolved via measurement {i - 1}")
            return True
        if slot.kind == UNS_LEFT:
            if i == n_src - 1 or left_states[i + 1] is None:
                return False
            povms = [
                induced_measurement(measurements[i], l, "right")
                for l in left_states[i + 1]
            ]
            try:
                data = slot.provider.find(slot.state, povms, direction="left")
            except ModelNotFoundError as exc:
                raise ModelNotFoundError(f"UNS slot {i}: {exc}") from exc
            dists[i] = data.dist
            left_states[i] = data.states
            responses[i] = np.transpose(data.response, (0, 2, 1))
            transcript.append(f"slot {i}: UNS_LEFT resolved via measurement {i}")
            return True
        if slot.kind == LOC:
            if i == 0 or i == n_src - 1:
                raise PatternError("LOC slot cannot sit at an endpoint")
            if right_states[i - 1] is None or left_states[i + 1] is None:
                return False
            lp = [
                induced_measurement(measurements[i - 1], r, "left")
                for r in right_states[i - 1]
            ]
            rp = [
                induced_measurement(measurements[i], l, "right")
                for l in left_states[i + 1]
            ]
            behavior = _lhv_behavior(slot.state, lp, rp)
            try:
                dist, resp_b, resp_c = solve_lhv(behavior)
            except ModelNotFoundError as exc:
                raise ModelNotFoundError(f"LOC slot {i}: {exc}") from exc
            dists[i] = dist
            responses[i - 1] = np.transpose(resp_b, (0, 1, 2))
            responses[i] = np.transpose(resp_c, (0, 2, 1))
            transcript.append(
                f"slot {i}: LOC resolved via measurements {i - 1} and {i}"
            )
            return True
        return False

    pending = [i for i in range(n_src) if slots[i].kind != SEP]
    while pending:
        progressed = False
        for i in list(pending):
            if try_resolve(i):
                pending.remove(i)
                progressed = True
        if not progressed:
            raise PatternError(
                f"pattern not resolvable; stuck at slots {pending} "
                "(direction conflict or missing input)"
            )

    for j, (mode, _) in enumerate(consumer):
        if mode == "direct":
            rs = right_states[j]
            ls = left_states[j + 1]
            if rs is None or ls is None:
                raise PatternError(f"measurement {j} has no resolved neighbour states")
            m = measurements[j]
            resp = np.zeros((m.n_outcomes, len(rs), len(ls)))
            for b, effect in enumerate(m.effects):
                for a, r in enumerate(rs):
                    for c, l in enumerate(ls):
                        resp[b, a, c] = np.trace(
                            effect.matrix @ np.kron(r.matrix, l.matrix)
                        ).real
            responses[j] = resp
            transcript.append(f"measurement {j}: direct response from neighbour states")

    model = NLHSModel(
        dists,
        responses,
        left_states[0],
        right_states[-1],
        outcome_labels=[m.outcome_labels for m in measurements],
    )
    return model, transcript


# --------------------------------------------------------------------------
# separabilisation transforms
# --------------------------------------------------------------------------

def separabilize_endpoint(rho_ab: QOperator, m_a: POVM) -> tuple[QOperator, POVM]:
    """Replace an inputless untrusted endpoint's source by a separable one.

    The new source is the classical-flag state sum_a |a><a| (x) Tr_A(M_a rho)
    and the party now measures in the flag basis; every downstream behaviour
    is unchanged.
    """
    if m_a.effects[0].dim != rho_ab.dims[0]:
        raise DimensionError(
            f"measurement dim {m_a.effects[0].dim} != left factor {rho_ab.dims[0]}"
        )
    n = m_a.n_outcomes
    d_b = rho_ab.dims[1]
    mat = np.zeros((n * d_b, n * d_b), dtype=complex)
    for a, effect in enumerate(m_a.effects):
        full = np.kron(effect.matrix, np.eye(d_b))
        steered = partial_trace(QOperator(full @ rho_ab.matrix, rho_ab.dims), keep=[1])
        mat[a * d_b:(a + 1) * d_b, a * d_b:(a + 1) * d_b] = steered.matrix
    rho_sep = QOperator(mat, (n, d_b))
    return rho_sep, computational_basis_povm(n)


@dataclass(frozen=True)
class SeparableRealization:
    """A linear network realising an NLHS model with separable sources and
    separable central measurements, certificates included."""

    network: LinearNetwork
    source_decompositions: tuple[SeparableDecomposition, ...]
    measurement_certificates: tuple[SeparableMeasurement, ...]


def nlhs_to_separable_realization(model: NLHSModel) -> SeparableRealization:
    """Realise an NLHS model physically with separable states/measurements.

    Endpoint sources use the classical-flag construction (hidden state
    tensored with a flag ket); interior sources are perfectly correlated
    flags; every central measurement is diagonal in the flag basis with
    the model's response weights.
    """
    dists = model.source_dists
    n_src = len(dists)
    sizes = [len(p) for p in dists]

    def flag(i, size):
        return projector(basis_ket(i, size), [size])

    sources = []
    decompositions = []

    # left endpoint source: sigma_{lam} (x) |lam><lam|
    w0 = dists[0]
    lefts0 = model.left_states
    rights0 = tuple(flag(i, sizes[0]) for i in range(sizes[0]))
    dec0 = SeparableDecomposition(w0, lefts0, rights0)
    sources.append(dec0.state())
    decompositions.append(dec0)

    for i in range(1, n_src - 1):
        kets = tuple(flag(k, sizes[i]) for k in range(sizes[i]))
        dec = SeparableDecomposition(dists[i], kets, kets)
        sources.append(dec.state())
        decompositions.append(dec)

    wl = dists[-1]
    leftsl = tuple(flag(i, sizes[-1]) for i in range(sizes[-1]))
    decl = SeparableDecomposition(wl, leftsl, model.right_states)
    sources.append(decl.state())
    decompositions.append(decl)

    measurements = []
    certificates = []
    for j, resp in enumerate(model.responses):
        dl, dr = sizes[j], sizes[j + 1]
        effects = []
        terms = []
        for b in range(resp.shape[0]):
            mat = np.zeros((dl * dr, dl * dr), dtype=complex)
            pairs = []
            for a in range(dl):
                for c in range(dr):
                    p = resp[b, a, c]
                    if p <= 0.0:
                        continue
                    mat[a * dr + c, a * dr + c] = p
                    pairs.append(
                        (QOperator(p * flag(a, dl).matrix, [dl]), flag(c, dr))
                    )
            effects.append(QOperator(mat, (dl, dr)))
            terms.append(pairs)
        povm = POVM(effects, outcome_labels=model.outcome_labels[j])
        measurements.append(povm)
        certificates.append(SeparableMeasurement(povm, terms))

    network = LinearNetwork(sources, measurements)
    return SeparableRealization(network, tuple(decompositions), tuple(certificates))


def random_model(
    rng: np.random.Generator,
    n_parties: int = 4,
    max_hidden: int = 3,
    n_outcomes: int = 2,
    endpoint_dim: int = 2,
) -> NLHSModel:
    """Random finite NLHS model for fuzzing soundness and round-trips."""

    def rand_dist(k):
        p = rng.random(k) + 0.1
        return p / p.sum()

    def rand_density(d):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        mat = g @ g.conj().T
        return QOperator(mat / np.trace(mat), [d])

    n_src = n_parties - 1
    sizes = [int(rng.integers(1, max_hidden + 1)) for _ in range(n_src)]
    dists = [rand_dist(k) for k in sizes]
    responses = []
    for j in range(n_src - 1):
        r = rng.random((n_outcomes, sizes[j], sizes[j + 1])) + 0.05
        responses.append(r / r.sum(axis=0, keepdims=True))
    lefts = [rand_density(endpoint_dim) for _ in range(sizes[0])]
    rights = [rand_density(endpoint_dim) for _ in range(sizes[-1])]
    return NLHSModel(dists, responses, lefts, rights)
