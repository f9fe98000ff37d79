import numpy as np
import pytest

from netsteer.measurements import POVM, bell_swap_povm, pauli_projective
from netsteer.network import LinearNetwork, line_assemblage
from netsteer.nlhs import (
    BruteForceLHSProvider,
    LOC,
    ModelNotFoundError,
    NLHSModel,
    PatternError,
    SEP,
    SeparableLHSProvider,
    SourceSlot,
    UNS_LEFT,
    UNS_RIGHT,
    build_percolation_line,
    build_sep_unsteer_bilocal,
    build_triangle_patterns,
    classical_correlated_decomposition,
    nlhs_to_separable_realization,
    product_decomposition,
    random_model,
    reconstruct,
    separabilize_endpoint,
    solve_lhv,
    werner_separable_decomposition,
)
from netsteer.operators import (
    QOperator,
    max_entry_distance,
    negativity,
    partial_trace,
    tensor,
)
from netsteer.states import classical_correlated, werner

from conftest import rand_density, rand_psd

Z = (0.0, 0.0, 1.0)
X = (1.0, 0.0, 0.0)


def _assemblage_deviation(model, net):
    quantum = line_assemblage(net)
    rebuilt = reconstruct(model)
    assert rebuilt.elements.keys() == quantum.elements.keys()
    return max(
        max_entry_distance(rebuilt.elements[k], quantum.elements[k])
        for k in quantum.elements
    )


def _slots(pattern, omega_uns=0.3, omega_loc=0.5):
    cc = classical_correlated_decomposition(2)
    w = werner_separable_decomposition(omega_uns)
    out = []
    for kind in pattern:
        if kind == SEP:
            out.append(SourceSlot(SEP, cc.state(), decomposition=cc))
        elif kind == LOC:
            out.append(SourceSlot(LOC, werner(omega_loc)))
        else:
            out.append(SourceSlot(kind, werner(omega_uns), decomposition=w))
    return out


class TestNLHSModelValidation:
    def test_trivial_model_reconstructs_product(self, rng):
        left = rand_density(rng, [2])
        right = rand_density(rng, [2])
        model = NLHSModel(
            [np.array([1.0]), np.array([1.0])],
            [np.ones((1, 1, 1))],
            [left],
            [right],
        )
        asm = reconstruct(model)
        assert max_entry_distance(asm.elements[(0,)], tensor(left, right)) < 1e-12

    def test_hand_weighted_model(self, rng):
        # two hidden values per source, deterministic response b = lam_0
        lefts = [rand_density(rng, [2]) for _ in range(2)]
        rights = [rand_density(rng, [2]) for _ in range(2)]
        p = np.array([0.25, 0.75])
        q = np.array([0.6, 0.4])
        resp = np.zeros((2, 2, 2))
        resp[0, 0, :] = 1.0
        resp[1, 1, :] = 1.0
        model = NLHSModel([p, q], [resp], lefts, rights)
        asm = reconstruct(model)
        for b in range(2):
            expected = sum(
                p[b] * q[k] * np.kron(lefts[b].matrix, rights[k].matrix)
                for k in range(2)
            )
            assert np.max(np.abs(asm.elements[(b,)].matrix - expected)) < 1e-12

    def test_rejects_unnormalised_dist(self, rng):
        s = rand_density(rng, [2])
        with pytest.raises(ValueError):
            NLHSModel(
                [np.array([0.5]), np.array([1.0])],
                [np.ones((1, 1, 1))],
                [s],
                [s],
            )

    def test_rejects_bad_response_shape(self, rng):
        s = rand_density(rng, [2])
        with pytest.raises(ValueError):
            NLHSModel(
                [np.array([1.0]), np.array([1.0])],
                [np.ones((1, 2, 1))],
                [s],
                [s],
            )

    def test_rejects_non_conditional_response(self, rng):
        s = rand_density(rng, [2])
        with pytest.raises(ValueError):
            NLHSModel(
                [np.array([1.0]), np.array([1.0])],
                [np.full((2, 1, 1), 0.7)],
                [s],
                [s],
            )

    def test_rejects_endpoint_count_mismatch(self, rng):
        s = rand_density(rng, [2])
        with pytest.raises(ValueError):
            NLHSModel(
                [np.array([0.5, 0.5]), np.array([1.0])],
                [np.ones((1, 2, 1))],
                [s],
                [s],
            )


class TestDecompositions:
    @pytest.mark.parametrize("omega", [0.0, 0.2, 1 / 3])
    def test_werner_decomposition_reproduces_state(self, omega):
        dec = werner_separable_decomposition(omega)
        assert max_entry_distance(dec.state(), werner(omega)) < 1e-12

    def test_werner_decomposition_rejects_entangled(self):
        with pytest.raises(ValueError):
            werner_separable_decomposition(0.5)

    def test_classical_correlated_decomposition(self):
        dec = classical_correlated_decomposition(3)
        assert max_entry_distance(dec.state(), classical_correlated(3)) < 1e-12

    def test_product_decomposition(self, rng):
        a = rand_density(rng, [2])
        b = rand_density(rng, [3])
        dec = product_decomposition(a, b)
        assert max_entry_distance(dec.state(), tensor(a, b)) < 1e-12


class TestProviders:
    def _check_lhs(self, data, rho, povms, direction):
        side = "left" if direction == "right" else "right"
        from netsteer.network import standard_assemblage

        asm = standard_assemblage(rho, povms, side=side)
        for x, povm in enumerate(povms):
            for b, label in enumerate(povm.outcome_labels):
                rebuilt = sum(
                    data.dist[l] * data.response[b, x, l] * data.states[l].matrix
                    for l in range(len(data.dist))
                )
                assert np.max(np.abs(rebuilt - asm[(label, x)].matrix)) < 1e-9

    def test_separable_provider(self):
        dec = werner_separable_decomposition(0.3)
        povms = [pauli_projective(Z), pauli_projective(X)]
        data = SeparableLHSProvider(dec).find(werner(0.3), povms, "right")
        self._check_lhs(data, werner(0.3), povms, "right")

    def test_separable_provider_rejects_wrong_state(self):
        dec = werner_separable_decomposition(0.3)
        with pytest.raises(ModelNotFoundError):
            SeparableLHSProvider(dec).find(werner(0.2), [pauli_projective(Z)], "right")

    def test_brute_force_finds_unsteerable_model(self):
        povms = [pauli_projective(Z), pauli_projective(X)]
        data = BruteForceLHSProvider().find(werner(0.5), povms, "right")
        self._check_lhs(data, werner(0.5), povms, "right")

    def test_brute_force_fails_on_steerable_behaviour(self):
        # omega = 0.9 violates the two-axis witness, so no LHS model exists
        povms = [pauli_projective(Z), pauli_projective(X)]
        with pytest.raises(ModelNotFoundError):
            BruteForceLHSProvider().find(werner(0.9), povms, "right")


class TestSolveLHV:
    def _behavior(self, rho, left_povms, right_povms):
        n_b = left_povms[0].n_outcomes
        n_c = right_povms[0].n_outcomes
        out = np.zeros((n_b, n_c, len(left_povms), len(right_povms)))
        for x, pl in enumerate(left_povms):
            for y, pr in enumerate(right_povms):
                for b, el in enumerate(pl.effects):
                    for c, er in enumerate(pr.effects):
                        out[b, c, x, y] = np.trace(
                            np.kron(el.matrix, er.matrix) @ rho.matrix
                        ).real
        return out

    def test_local_behaviour_decomposes(self):
        povms = [pauli_projective(Z), pauli_projective(X)]
        behavior = self._behavior(werner(0.5), povms, povms)
        dist, resp_b, resp_c = solve_lhv(behavior)
        rebuilt = np.einsum("l,bxl,cyl->bcxy", dist, resp_b, resp_c)
        assert np.max(np.abs(rebuilt - behavior)) < 1e-10
        assert abs(dist.sum() - 1.0) < 1e-10

    def test_nonlocal_behaviour_rejected(self):
        # the PR box sits outside the local polytope
        pr = np.zeros((2, 2, 2, 2))
        for x in range(2):
            for y in range(2):
                for b in range(2):
                    for c in range(2):
                        if (b + c) % 2 == (x * y):
                            pr[b, c, x, y] = 0.5
        with pytest.raises(ModelNotFoundError):
            solve_lhv(pr)


class TestConstructors:
    def test_sep_unsteer_bilocal(self):
        cc = classical_correlated_decomposition(2)
        m = bell_swap_povm(2)
        model = build_sep_unsteer_bilocal(
            cc, werner(0.3), m, BruteForceLHSProvider()
        )
        net = LinearNetwork([cc.state(), werner(0.3)], [m])
        assert _assemblage_deviation(model, net) < 1e-10

    @pytest.mark.parametrize(
        "pattern,kinds",
        [
            ("SEP-LOC-SEP", (SEP, LOC, SEP)),
            ("UNS-SEP-UNS", (UNS_LEFT, SEP, UNS_RIGHT)),
            ("SEP-UNS-UNS", (SEP, UNS_RIGHT, UNS_RIGHT)),
            ("UNS-UNS-SEP", (UNS_LEFT, UNS_LEFT, SEP)),
        ],
    )
    def test_triangle_patterns_match_quantum(self, pattern, kinds):
        slots = _slots(kinds)
        ms = [bell_swap_povm(2), bell_swap_povm(2)]
        model = build_triangle_patterns(pattern, slots, ms)
        net = LinearNetwork([s.state for s in slots], ms)
        assert _assemblage_deviation(model, net) < 1e-10

    def test_triangle_rejects_unknown_pattern(self):
        slots = _slots((SEP, LOC, SEP))
        ms = [bell_swap_povm(2), bell_swap_povm(2)]
        with pytest.raises(PatternError):
            build_triangle_patterns("LOC-LOC-LOC", slots, ms)

    def test_triangle_rejects_wrong_arity(self):
        slots = _slots((SEP, SEP))
        with pytest.raises(PatternError):
            build_triangle_patterns("SEP-LOC-SEP", slots, [bell_swap_povm(2)])

    @pytest.mark.parametrize(
        "pattern,kinds",
        [
            ("SEP-LOC-SEP", (SEP, LOC, SEP)),
            ("UNS-SEP-UNS", (UNS_LEFT, SEP, UNS_RIGHT)),
            ("SEP-UNS-UNS", (SEP, UNS_RIGHT, UNS_RIGHT)),
            ("UNS-UNS-SEP", (UNS_LEFT, UNS_LEFT, SEP)),
        ],
    )
    def test_percolation_agrees_with_triangle_route(self, pattern, kinds):
        # two structurally independent constructions of the same model class
        # must reproduce the same assemblage
        slots = _slots(kinds)
        ms = [bell_swap_povm(2), bell_swap_povm(2)]
        triangle = reconstruct(build_triangle_patterns(pattern, slots, ms))
        generic, _ = build_percolation_line(slots, ms)
        generic = reconstruct(generic)
        for k in triangle.elements:
            assert max_entry_distance(triangle.elements[k], generic.elements[k]) < 1e-10

    def test_percolation_longer_line(self):
        kinds = (UNS_LEFT, SEP, UNS_RIGHT, LOC, SEP)
        slots = _slots(kinds)
        ms = [bell_swap_povm(2)] * 4
        model, transcript = build_percolation_line(slots, ms)
        net = LinearNetwork([s.state for s in slots], ms)
        assert _assemblage_deviation(model, net) < 1e-10
        assert len(transcript) >= len(kinds)

    def test_percolation_rejects_measurement_conflict(self):
        slots = _slots((UNS_LEFT, UNS_RIGHT))
        with pytest.raises(PatternError):
            build_percolation_line(slots, [bell_swap_povm(2)])

    def test_percolation_rejects_bad_endpoints(self):
        with pytest.raises(PatternError):
            build_percolation_line(
                _slots((UNS_RIGHT, SEP)), [bell_swap_povm(2)]
            )
        with pytest.raises(PatternError):
            build_percolation_line(
                _slots((SEP, UNS_LEFT)), [bell_swap_povm(2)]
            )


class TestSoundness:
    def test_fuzzed_models_never_certified(self):
        from netsteer.certificates import certify_network_steering

        rng = np.random.default_rng(2024)
        for _ in range(30):
            model = random_model(rng, n_parties=int(rng.integers(3, 6)))
            verdict = certify_network_steering(reconstruct(model))
            assert not verdict.certified


class TestSeparabilize:
    def test_endpoint_probabilities_preserved(self, rng):
        for _ in range(20):
            rho = rand_density(rng, (2, 3))
            m_a = pauli_projective(Z)
            rho_sep, flag_povm = separabilize_endpoint(rho, m_a)
            for a in range(m_a.n_outcomes):
                for _ in range(5):
                    eff = rand_psd(rng, [3])
                    p_orig = np.trace(
                        np.kron(m_a.effects[a].matrix, eff.matrix) @ rho.matrix
                    ).real
                    p_new = np.trace(
                        np.kron(flag_povm.effects[a].matrix, eff.matrix)
                        @ rho_sep.matrix
                    ).real
                    assert abs(p_orig - p_new) < 1e-12

    def test_flag_state_is_block_diagonal(self, rng):
        rho = rand_density(rng, (2, 2))
        rho_sep, _ = separabilize_endpoint(rho, pauli_projective(Z))
        assert rho_sep.dims == (2, 2)
        assert np.allclose(rho_sep.matrix[0:2, 2:4], 0)
        assert abs(rho_sep.trace() - 1.0) < 1e-12
        assert negativity(rho_sep, [1]) == 0.0

    def test_rejects_dim_mismatch(self, rng):
        with pytest.raises(ValueError):
            separabilize_endpoint(rand_density(rng, (3, 2)), pauli_projective(Z))


class TestRealization:
    def test_round_trip_random_models(self):
        rng = np.random.default_rng(77)
        for _ in range(10):
            model = random_model(rng, n_parties=int(rng.integers(3, 6)))
            real = nlhs_to_separable_realization(model)
            realized = line_assemblage(real.network)
            target = reconstruct(model)
            for k in target.elements:
                assert max_entry_distance(
                    realized.elements[k], target.elements[k]
                ) < 1e-10

    def test_sources_carry_zero_negativity(self):
        rng = np.random.default_rng(78)
        model = random_model(rng, n_parties=4)
        real = nlhs_to_separable_realization(model)
        for src in real.network.sources:
            assert negativity(src, [1]) == 0.0

    def test_certificates_cover_all_measurements(self):
        rng = np.random.default_rng(79)
        model = random_model(rng, n_parties=4)
        real = nlhs_to_separable_realization(model)
        assert len(real.measurement_certificates) == len(
            real.network.central_measurements
        )
        assert len(real.source_decompositions) == len(real.network.sources)
