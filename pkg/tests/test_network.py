import numpy as np
import pytest

from netsteer.measurements import (
    bell_swap_povm,
    computational_basis_povm,
    pauli_projective,
)
from netsteer.network import (
    LinearNetwork,
    NetworkAssemblage,
    assemblage_element,
    bilocal_assemblage,
    condition_on_trusted_measurement,
    lift_inputless_to_conditional,
    line_assemblage,
    random_linear_network,
    standard_assemblage,
    untrusted_input_to_outcome,
)
from netsteer.operators import (
    PAULI_Z,
    QOperator,
    identity,
    max_entry_distance,
    tensor,
)
from netsteer.states import classical_correlated, psi_minus, werner

from conftest import brute_force_assemblage, rand_density


class TestLinearNetworkValidation:
    def test_needs_two_sources(self):
        with pytest.raises(ValueError):
            LinearNetwork([werner(0.5)], [])

    def test_measurement_count(self):
        with pytest.raises(ValueError):
            LinearNetwork([werner(0.5), werner(0.5)], [])

    def test_measurement_dims_must_match(self):
        with pytest.raises(ValueError):
            LinearNetwork([werner(0.5), werner(0.5)], [bell_swap_povm(3)])

    def test_sources_must_be_densities(self):
        bad = QOperator(np.eye(4), [2, 2])
        with pytest.raises(ValueError):
            LinearNetwork([bad, werner(0.5)], [bell_swap_povm(2)])

    def test_properties(self):
        net = LinearNetwork([werner(0.5)] * 3, [bell_swap_povm(2)] * 2)
        assert net.n_parties == 4
        assert net.endpoint_dims == (2, 2)


class TestLineAssemblage:
    def test_two_singlets_swap_oracle(self):
        # frozen oracle: perfect entanglement swapping projects the
        # endpoints onto the singlet with probability 1/4
        net = LinearNetwork([werner(1.0), werner(1.0)], [bell_swap_povm(2)])
        asm = line_assemblage(net)
        elem = asm.elements[(0,)]
        assert abs(elem.trace() - 0.25) < 1e-12
        assert max_entry_distance(
            elem, QOperator(psi_minus().matrix / 4, (2, 2))
        ) < 1e-12

    def test_matches_brute_force_oracle(self, rng):
        for n in (3, 4, 5):
            net = random_linear_network(rng, n, max_dim=3)
            asm = line_assemblage(net)
            oracle = brute_force_assemblage(net)
            assert asm.elements.keys() == oracle.keys()
            for k in oracle:
                assert max_entry_distance(asm.elements[k], oracle[k]) < 1e-11

    def test_direction_independent(self, rng):
        for n in (3, 4, 5):
            net = random_linear_network(rng, n, max_dim=3)
            left = line_assemblage(net, direction="left")
            right = line_assemblage(net, direction="right")
            for k in left.elements:
                assert max_entry_distance(left.elements[k], right.elements[k]) < 1e-11

    def test_rejects_bad_direction(self, rng):
        net = random_linear_network(rng, 3)
        with pytest.raises(ValueError):
            line_assemblage(net, direction="up")

    def test_assemblage_element_matches_full(self, rng):
        net = random_linear_network(rng, 4, max_dim=3)
        asm = line_assemblage(net)
        for k, op in asm.elements.items():
            assert max_entry_distance(assemblage_element(net, k), op) < 1e-11

    def test_assemblage_element_outcome_length(self, rng):
        net = random_linear_network(rng, 3)
        with pytest.raises(ValueError):
            assemblage_element(net, (0, 0))

    def test_trace_sums_to_one(self, rng):
        net = random_linear_network(rng, 4)
        asm = line_assemblage(net)
        total = sum(op.trace() for op in asm.elements.values())
        assert abs(total - 1.0) < 1e-10

    def test_product_marginal(self, rng):
        from netsteer.operators import partial_trace

        net = random_linear_network(rng, 4, max_dim=3)
        asm = line_assemblage(net)
        expected = tensor(
            partial_trace(net.sources[0], keep=[0]),
            partial_trace(net.sources[-1], keep=[1]),
        )
        assert max_entry_distance(asm.total(), expected) < 1e-10


class TestNetworkAssemblage:
    def test_rejects_unnormalised(self):
        op = QOperator(np.eye(4) / 2, (2, 2))
        with pytest.raises(ValueError):
            NetworkAssemblage({(0,): op, (1,): op}, n_parties=3)

    def test_rejects_non_psd_element(self):
        good = QOperator(np.eye(4) / 8, (2, 2))
        bad = QOperator(np.diag([1.0, -0.5, 0.0, 0.0]), (2, 2))
        with pytest.raises(ValueError):
            NetworkAssemblage({(0,): good, (1,): bad}, n_parties=3)


class TestBilocal:
    def test_matches_line(self, rng):
        a = rand_density(rng, (2, 2))
        b = rand_density(rng, (2, 2))
        m = bell_swap_povm(2)
        asm = bilocal_assemblage(a, b, m)
        line = line_assemblage(LinearNetwork([a, b], [m]))
        for lab in (0, 1):
            assert max_entry_distance(asm.elements[lab], line.elements[(lab,)]) == 0


class TestStandardAssemblage:
    def test_werner_z_oracle(self):
        # frozen oracle: sigma_{0|z} of the Werner state is (I - omega Z)/4
        omega = 0.7
        asm = standard_assemblage(
            werner(omega), [pauli_projective((0, 0, 1))], side="left"
        )
        expected = (np.eye(2) - omega * PAULI_Z) / 4
        assert np.max(np.abs(asm[(0, 0)].matrix - expected)) < 1e-12
        assert np.max(np.abs(asm[(1, 0)].matrix - (np.eye(2) + omega * PAULI_Z) / 4)) < 1e-12

    def test_sides_agree_for_symmetric_state(self):
        asm_l = standard_assemblage(werner(0.6), [pauli_projective((0, 0, 1))], "left")
        asm_r = standard_assemblage(werner(0.6), [pauli_projective((0, 0, 1))], "right")
        for k in asm_l:
            assert max_entry_distance(asm_l[k], asm_r[k]) < 1e-12

    def test_rejects_bad_side(self):
        with pytest.raises(ValueError):
            standard_assemblage(werner(0.5), [pauli_projective((0, 0, 1))], "middle")

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError):
            standard_assemblage(werner(0.5), [computational_basis_povm(3)], "left")


class TestConditioningAndLifting:
    def test_conditioning_traces_correctly(self, rng):
        net = random_linear_network(rng, 3, max_dim=2)
        asm = line_assemblage(net)
        d = asm.elements[next(iter(asm.elements))].dims[0]
        cond = condition_on_trusted_measurement(
            asm, computational_basis_povm(d), "left"
        )
        total = sum(op.trace() for op in cond.values())
        assert abs(total - 1.0) < 1e-10

    def test_lift_recovers_uniform_inputs(self):
        subs = [pauli_projective((0, 0, 1)), pauli_projective((1, 0, 0))]
        net = untrusted_input_to_outcome(werner(0.8), subs)
        asm = line_assemblage(net)
        flat_asm = NetworkAssemblage(
            {b[0]: op for b, op in asm.elements.items()}, n_parties=3
        )
        cond = condition_on_trusted_measurement(
            flat_asm, computational_basis_povm(2), "left"
        )
        p, lifted = lift_inputless_to_conditional(
            {(b, x): op for ((b, x), op) in cond.items()}
        )
        direct = standard_assemblage(werner(0.8), subs, side="left")
        for x, px in p.items():
            assert abs(px - 0.5) < 1e-12
        for k in direct:
            assert max_entry_distance(lifted[k], direct[k]) < 1e-12

    def test_lift_rejects_zero_probability_input(self):
        zero = QOperator(np.zeros((2, 2)), [2])
        full = QOperator(np.eye(2) / 2, [2])
        with pytest.raises(ValueError):
            lift_inputless_to_conditional(
                {(0, 0): full, (1, 0): full, (0, 1): zero, (1, 1): zero}
            )

    def test_untrusted_input_single_povm(self):
        net = untrusted_input_to_outcome(werner(0.8), [pauli_projective((0, 0, 1))])
        assert net.sources[0].dims == (1, 1)
        asm = line_assemblage(net)
        total = sum(op.trace() for op in asm.elements.values())
        assert abs(total - 1.0) < 1e-10
