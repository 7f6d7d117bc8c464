"""Naimark dilation and local-dilation search/verification."""

import numpy as np
import pytest

from bellkit.dilations import (
    NotDilatable,
    compose_witnesses,
    find_local_dilation,
    naimark_dilate,
    trivial_witness,
    verify_local_dilation,
)
from bellkit.linalg import Tolerance, mat_norm, structural_predicates
from bellkit.models import QuantumModel, Scenario, validate_quantum_model
from bellkit.presets import (
    chsh_ideal_model,
    doubled_model,
    example_pair,
    random_povm,
    random_quantum_model,
    tensor_with_auxiliary,
)
from bellkit.schmidt import schmidt_decompose
from bellkit.support import support_of


class TestNaimark:
    def test_pvm_input_reproduced_exactly(self):
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        nd = naimark_dilate([p0, p1])
        for proj, effect in zip(nd.P, [p0, p1]):
            np.testing.assert_allclose(nd.V.conj().T @ proj @ nd.V, effect, atol=1e-14)

    def test_trine_povm(self):
        # three symmetric rank-one effects (2/3)|phi_j><phi_j| on the qubit
        effects = []
        for j in range(3):
            t = 2 * np.pi * j / 3
            phi = np.array([np.cos(t / 2), np.sin(t / 2)])
            effects.append(2 / 3 * np.outer(phi, phi))
        nd = naimark_dilate(effects)
        assert nd.dilated_dim == 6
        assert structural_predicates(nd.V).isometry
        for proj, effect in zip(nd.P, effects):
            assert structural_predicates(proj).projection
            assert mat_norm(nd.V.conj().T @ proj @ nd.V - effect) < 1e-12

    def test_uniform_povm(self):
        half = np.eye(2) / 2
        nd = naimark_dilate([half, half])
        expected_v = (np.kron(np.eye(2), [[1], [0]]) + np.kron(np.eye(2), [[0], [1]])) / np.sqrt(2)
        np.testing.assert_allclose(nd.V, expected_v, atol=1e-12)

    def test_property_suite_random_povms(self):
        rng = np.random.default_rng(55)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            k = int(rng.integers(2, 5))
            povm = random_povm(rng, d, k)
            nd = naimark_dilate(povm)
            assert mat_norm(nd.V.conj().T @ nd.V - np.eye(d)) < 1e-10
            for proj, effect in zip(nd.P, povm):
                assert mat_norm(proj @ proj - proj) < 1e-12
                assert mat_norm(nd.V.conj().T @ proj @ nd.V - effect) < 1e-10

    def test_non_povm_rejected(self):
        with pytest.raises(ValueError):
            naimark_dilate([np.eye(2), np.eye(2)])


class TestVerifyLocalDilation:
    def test_reflexivity(self):
        m = chsh_ideal_model()
        rep = verify_local_dilation(m, m, trivial_witness(m))
        assert rep.passed and rep.max_residual < 1e-12
        assert rep.schmidt_ranks == {"psi": 2, "psi_tilde": 2, "aux": 1}

    def test_auxiliary_junk_canonical_embedding(self):
        m = chsh_ideal_model()
        aux = np.kron([0.6, 0.8], [1.0, 0.0])
        big = tensor_with_auxiliary(m, aux, 2, 2)
        # canonical embedding: IA is the identity on H_A (x) C^2 reshaped
        w = find_local_dilation(big, m, seed=0)
        rep = verify_local_dilation(big, m, w, Tolerance(1e-8))
        assert rep.passed
        assert rep.moment_residual is not None and rep.moment_residual < 1e-9

    def test_example_pair_no_witness_can_pass(self):
        """Natural candidates between the rank-3 and rank-2 models all fail,
        and the report carries the rank obstruction."""
        s3, s2 = example_pair()
        candidates = []
        # embed-and-forget: route the 3-dim space into (2-dim) x (2-dim aux)
        ia = np.zeros((4, 3), dtype=complex)
        ia[0, 0] = 1  # |0> -> |0>|0>
        ia[1, 1] = 1  # |1> -> |0>|1>
        ia[3, 2] = 1  # |2> -> |1>|1>
        candidates.append((ia.copy(), ia.copy(), np.array([1, 0, 0, 0], dtype=complex)))
        ia2 = np.zeros((4, 3), dtype=complex)
        ia2[0, 0] = 1
        ia2[2, 1] = 1  # |1> -> |1>|0>
        ia2[3, 2] = 1  # |2> -> |1>|1>
        candidates.append((ia2.copy(), ia2.copy(), np.array([1, 0, 0, 0], dtype=complex)))
        for ia_c, ib_c, aux in candidates:
            from bellkit.dilations import DilationWitness
            w = DilationWitness(IA=ia_c, IB=ib_c, aux=aux, dimAuxA=2, dimAuxB=2)
            rep = verify_local_dilation(s3, s2, w)
            assert not rep.passed
            assert not rep.rank_consistent  # 3 != 2 * rank(aux)

    def test_dimension_mismatch_rejected(self):
        m = chsh_ideal_model()
        w = trivial_witness(m)
        s3, _ = example_pair()
        with pytest.raises(ValueError):
            verify_local_dilation(s3, m, w)


class TestFindLocalDilation:
    def test_self_dilation_unitary_witness(self):
        m = chsh_ideal_model()
        w = find_local_dilation(m, m, seed=0)
        assert w.dimAuxA == w.dimAuxB == 1
        assert structural_predicates(w.IA).unitary
        np.testing.assert_allclose(w.aux, [1.0], atol=1e-10)
        rep = verify_local_dilation(m, m, w, Tolerance(1e-8))
        assert rep.passed

    def test_entangled_auxiliary(self):
        m = chsh_ideal_model()
        aux = np.array([0.8, 0.0, 0.0, 0.6])  # entangled across the aux split
        big = tensor_with_auxiliary(m, aux, 2, 2)
        assert validate_quantum_model(big).valid
        w = find_local_dilation(big, m, seed=1)
        rep = verify_local_dilation(big, m, w, Tolerance(1e-8))
        assert rep.passed and rep.max_residual < 1e-8
        assert rep.schmidt_ranks == {"psi": 4, "psi_tilde": 2, "aux": 2}

    def test_direct_sum_spread_state(self):
        m = chsh_ideal_model()
        dbl = doubled_model(m, weights=(0.8, 0.6))
        w = find_local_dilation(dbl, m, seed=2)
        rep = verify_local_dilation(dbl, m, w, Tolerance(1e-8))
        assert rep.passed
        aux_rank = schmidt_decompose(w.aux, w.dimAuxA, w.dimAuxB).rank
        assert aux_rank == 2

    def test_example_pair_schmidt_obstruction(self):
        s3, s2 = example_pair()
        with pytest.raises(NotDilatable) as exc_info:
            find_local_dilation(s3, s2, seed=0)
        assert exc_info.value.obstruction["kind"] == "schmidt-rank"
        # and the reverse direction is obstructed the same way (2 % 3 != 0)
        with pytest.raises(NotDilatable) as exc_info:
            find_local_dilation(s2, s3, seed=0)
        assert exc_info.value.obstruction["kind"] == "schmidt-rank"

    def test_reducible_ideal_rejected(self):
        _, s2 = example_pair()
        with pytest.raises(NotDilatable) as exc_info:
            find_local_dilation(s2, s2, seed=0)
        assert exc_info.value.obstruction["kind"] == "reducible-ideal"

    def test_correlation_mismatch_rejected(self):
        m = chsh_ideal_model()
        rng = np.random.default_rng(60)
        other = random_quantum_model(rng, Scenario(2, 2, 2, 2), 2, 2)
        with pytest.raises(NotDilatable) as exc_info:
            find_local_dilation(other, m, seed=0)
        assert exc_info.value.obstruction["kind"] == "correlation"

    def test_complex_phases_and_local_rotation(self):
        """Complex auxiliary amplitudes and generic local unitaries on top:
        the assembled witness must still verify exactly."""
        rng = np.random.default_rng(99)
        m = chsh_ideal_model()
        aux = np.array([0.8 * np.exp(1j * 0.7), 0, 0, 0.6 * np.exp(-1j * 1.2)])
        big = tensor_with_auxiliary(m, aux, 2, 2)
        from bellkit.linalg import dagger
        ua, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        ub, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        rotated = QuantumModel(
            scenario=big.scenario, dimA=4, dimB=4,
            M=[[ua @ op @ dagger(ua) for op in povm] for povm in big.M],
            N=[[ub @ op @ dagger(ub) for op in povm] for povm in big.N],
            psi=np.kron(ua, ub) @ big.psi,
        )
        w = find_local_dilation(rotated, m, seed=17)
        rep = verify_local_dilation(rotated, m, w, Tolerance(1e-8))
        assert rep.passed and rep.max_residual < 1e-10

    def test_centrally_supported_propagates(self):
        """When verify passes and S is centrally supported, so is the target."""
        m = chsh_ideal_model()
        aux = np.array([1.0, 0, 0, 1.0]) / np.sqrt(2)
        big = tensor_with_auxiliary(m, aux, 2, 2)
        assert support_of(big).centrally_supported
        w = find_local_dilation(big, m, seed=4)
        assert verify_local_dilation(big, m, w, Tolerance(1e-8)).passed
        assert support_of(m).centrally_supported


class TestWitnessComposition:
    def test_transitivity_of_composed_witnesses(self):
        m = chsh_ideal_model()
        aux1 = np.kron([0.6, 0.8], [1.0, 0.0])
        mid = tensor_with_auxiliary(m, aux1, 2, 2)
        aux2 = np.array([1.0, 0, 0, 1.0]) / np.sqrt(2)
        top = tensor_with_auxiliary(mid, aux2, 2, 2)

        # attaching a register has the canonical identity-isometry witness
        # (the constructive search would refuse mid, whose representation is
        # reducible, so the witness is written down directly)
        from bellkit.dilations import DilationWitness
        w1 = DilationWitness(IA=np.eye(top.dimA), IB=np.eye(top.dimB),
                             aux=aux2, dimAuxA=2, dimAuxB=2)
        assert verify_local_dilation(top, mid, w1, Tolerance(1e-8)).passed
        w2 = find_local_dilation(mid, m, seed=8)
        assert verify_local_dilation(mid, m, w2, Tolerance(1e-8)).passed

        w = compose_witnesses(w1, w2, midA=mid.dimA, midB=mid.dimB)
        rep = verify_local_dilation(top, m, w, Tolerance(1e-8))
        assert rep.passed, f"composed witness fails: {rep.max_residual}"

    def test_rank_multiplicativity_across_fixtures(self):
        m = chsh_ideal_model()
        for aux, da, db in [
            (np.array([0.8, 0.0, 0.0, 0.6]), 2, 2),
            (np.kron([1.0, 0.0], [0.6, 0.8]), 2, 2),
            (np.array([0.5, 0.5, 0.5, 0.5]), 2, 2),
        ]:
            big = tensor_with_auxiliary(m, aux, da, db)
            w = find_local_dilation(big, m, seed=11)
            rep = verify_local_dilation(big, m, w, Tolerance(1e-8))
            assert rep.passed
            r = rep.schmidt_ranks
            assert r["psi"] == r["psi_tilde"] * r["aux"]
