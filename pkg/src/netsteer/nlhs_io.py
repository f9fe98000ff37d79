"""JSON serialisation for NLHS models and the CLI fixture format.

A fixture names a slot pattern, a source per slot (from the built-in state
families), and one central measurement per adjacent pair:

    {
      "name": "sep-loc-sep",
      "pattern": ["SEP", "LOC", "SEP"],
      "sources": [
        {"kind": "classical_correlated", "d": 2},
        {"kind": "werner", "omega": 0.5},
        {"kind": "classical_correlated", "d": 2}
      ],
      "measurements": [
        {"kind": "bell_swap", "local_dim": 2},
        {"kind": "bell_swap", "local_dim": 2}
      ]
    }

Separable decompositions are attached automatically where the family
provides one (classical_correlated always, werner for omega <= 1/3).
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .operators import QOperator
from .measurements import POVM, bell_swap_povm, computational_basis_povm
from .states import classical_correlated, dew, DEWParams, werner
from .nlhs import (
    NLHSModel,
    PatternError,
    SourceSlot,
    classical_correlated_decomposition,
    werner_separable_decomposition,
)


class FixtureError(ValueError):
    """Raised on a malformed fixture document."""


def _matrix_to_json(mat: np.ndarray) -> dict:
    return {"re": mat.real.tolist(), "im": mat.imag.tolist()}


def _matrix_from_json(doc: dict) -> np.ndarray:
    return np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)


def _state_to_json(op: QOperator) -> dict:
    doc = _matrix_to_json(op.matrix)
    doc["dims"] = list(op.dims)
    return doc


def _state_from_json(doc: dict) -> QOperator:
    return QOperator(_matrix_from_json(doc), doc["dims"])


def model_to_json(model: NLHSModel) -> dict:
    return {
        "n_parties": model.n_parties,
        "source_dists": [p.tolist() for p in model.source_dists],
        "responses": [r.tolist() for r in model.responses],
        "outcome_labels": [list(l) for l in model.outcome_labels],
        "left_states": [_state_to_json(s) for s in model.left_states],
        "right_states": [_state_to_json(s) for s in model.right_states],
    }


def model_from_json(doc: dict) -> NLHSModel:
    return NLHSModel(
        source_dists=[np.asarray(p) for p in doc["source_dists"]],
        responses=[np.asarray(r) for r in doc["responses"]],
        left_states=[_state_from_json(s) for s in doc["left_states"]],
        right_states=[_state_from_json(s) for s in doc["right_states"]],
        outcome_labels=[tuple(l) for l in doc["outcome_labels"]],
    )


def save_model(model: NLHSModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_json(model), fh, indent=1)


def load_model(path) -> NLHSModel:
    with open(path) as fh:
        return model_from_json(json.load(fh))


def _build_source(doc: dict):
    """Return (state, decomposition-or-None) for a fixture source entry."""
    kind = doc.get("kind")
    if kind == "classical_correlated":
        d = int(doc["d"])
        return classical_correlated(d), classical_correlated_decomposition(d)
    if kind == "werner":
        omega = float(doc["omega"])
        state = werner(omega)
        if omega <= 1.0 / 3.0 + 1e-12:
            return state, werner_separable_decomposition(omega)
        return state, None
    if kind == "dew":
        return dew(DEWParams(float(doc["eta"]), float(doc["omega"]))), None
    if kind == "explicit":
        return _state_from_json(doc["state"]), None
    raise FixtureError(f"unknown source kind {kind!r}")


def _build_measurement(doc: dict) -> POVM:
    kind = doc.get("kind")
    if kind == "bell_swap":
        return bell_swap_povm(int(doc.get("local_dim", 3)))
    if kind == "computational":
        d = int(doc["d"])
        base = computational_basis_povm(d * d)
        effects = [QOperator(e.matrix, [d, d]) for e in base.effects]
        return POVM(effects, outcome_labels=base.outcome_labels)
    raise FixtureError(f"unknown measurement kind {kind!r}")


def load_fixture(path) -> tuple[str, list[SourceSlot], list[POVM]]:
    """Parse a fixture document into slots and measurements."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"invalid JSON in {path}: {exc}") from exc
    for key in ("pattern", "sources", "measurements"):
        if key not in doc:
            raise FixtureError(f"fixture missing {key!r}")
    pattern = list(doc["pattern"])
    if len(pattern) != len(doc["sources"]):
        raise FixtureError("one pattern tag per source required")
    slots = []
    for tag, src in zip(pattern, doc["sources"]):
        state, dec = _build_source(src)
        try:
            slots.append(SourceSlot(tag, state, decomposition=dec))
        except PatternError as exc:
            raise FixtureError(str(exc)) from exc
    measurements = [_build_measurement(m) for m in doc["measurements"]]
    return doc.get("name", "fixture"), slots, measurements
