"""Shared helpers for the test suite: random operators with reproducible
generators and a brute-force assemblage oracle that never uses the
sequential contraction under test."""

import numpy as np
import pytest

from netsteer.operators import QOperator, identity, partial_trace, tensor


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rand_density(rng, dims):
    """Random full-rank density matrix with the given factor dims."""
    d = int(np.prod(dims))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    mat = g @ g.conj().T
    return QOperator(mat / np.trace(mat), dims)


def rand_psd(rng, dims):
    d = int(np.prod(dims))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return QOperator(g @ g.conj().T, dims)


def rand_unit_vector(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def brute_force_assemblage(net):
    """Oracle for line_assemblage: materialise the full tensor product of
    all sources and hit it with one big effect per outcome tuple.

    Exponential in the line length, which is fine at test scale, and
    structurally independent of the pairwise contraction it checks.
    """
    import itertools

    sources = net.sources
    measurements = net.central_measurements
    big = sources[0]
    for s in sources[1:]:
        big = tensor(big, s)
    n_src = len(sources)
    out = {}
    ranges = [m.outcome_labels for m in measurements]
    for labels in itertools.product(*ranges):
        ops = [identity([sources[0].dims[0]])]
        for m, lab in zip(measurements, labels):
            ops.append(m.effect(lab))
        ops.append(identity([sources[-1].dims[1]]))
        full = tensor(*ops)
        prod = QOperator(full.matrix @ big.matrix, big.dims)
        out[labels] = partial_trace(prod, keep=[0, 2 * n_src - 1])
    return out
