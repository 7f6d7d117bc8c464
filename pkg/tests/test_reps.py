"""Commutant, irrep decomposition, cyclic restriction, state equality."""

import numpy as np
import pytest

from bellkit.linalg import dagger, mat_norm
from bellkit.models import CommutingModel, Scenario, QuantumModel, correlation_of, evaluate_moment, Word
from bellkit.presets import (
    chsh_ideal_model,
    commuting_from_tensor,
    example_pair,
    random_quantum_model,
    random_state,
    tensor_with_auxiliary,
)
from bellkit.reps import (
    commutant_basis,
    cyclic_restrict,
    irrep_decompose,
    states_equal,
)


def rand_herm(rng, d):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (x + x.conj().T) / 2


def rand_unitary(rng, d):
    q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q


def constructed_rep(rng, structure, n_gens=2):
    """Generators realizing (+)_i M_{n_i} (x) Id_{m_i}, conjugated by a random unitary.

    Returns (generators, total_dim).  Uses random Hermitians per block, so the
    blocks are generically irreducible and mutually inequivalent.
    """
    d = sum(n * m for n, m in structure)
    u = rand_unitary(rng, d)
    gens = []
    for _ in range(n_gens):
        blocks = []
        for n, m in structure:
            blocks.append(np.kron(rand_herm(rng, n), np.eye(m)))
        full = np.zeros((d, d), dtype=complex)
        off = 0
        for b in blocks:
            k = b.shape[0]
            full[off:off + k, off:off + k] = b
            off += k
        gens.append(u @ full @ dagger(u))
    return gens, d


class TestCommutant:
    def test_identity_generator_full_commutant(self):
        basis = commutant_basis([np.eye(3)])
        assert len(basis) == 9

    def test_matrix_units_scalar_commutant(self):
        d = 3
        units = [np.zeros((d, d)) for _ in range(d * d)]
        for i in range(d):
            for j in range(d):
                units[i * d + j][i, j] = 1.0
        basis = commutant_basis(units)
        assert len(basis) == 1
        t = basis[0]
        np.testing.assert_allclose(t, t[0, 0] * np.eye(d), atol=1e-10)

    def test_multiplicity_two_block(self):
        rng = np.random.default_rng(15)
        gens, _ = constructed_rep(rng, [(2, 2)])
        assert len(commutant_basis(gens)) == 4

    def test_dimension_matches_sum_of_squares(self):
        rng = np.random.default_rng(16)
        structures = [
            [(2, 1)], [(1, 2)], [(2, 2)], [(2, 1), (1, 1)],
            [(2, 1), (2, 1)], [(3, 1), (1, 2)], [(2, 2), (1, 1)],
        ]
        for st in structures:
            gens, _ = constructed_rep(rng, st)
            expected = sum(m * m for _, m in st)
            assert len(commutant_basis(gens)) == expected, st

    def test_basis_is_hs_orthonormal(self):
        rng = np.random.default_rng(19)
        gens, _ = constructed_rep(rng, [(2, 2), (1, 1)])
        basis = commutant_basis(gens)
        gram = np.array([[np.trace(dagger(a) @ b) for b in basis] for a in basis])
        np.testing.assert_allclose(gram, np.eye(len(basis)), atol=1e-10)


class TestIrrepDecompose:
    def test_chsh_alice_irreducible(self):
        m = chsh_ideal_model()
        gens = [op for povm in m.M for op in povm]
        dec = irrep_decompose(gens, seed=0)
        assert dec.irreducible
        assert dec.blocks[0].n == 2 and dec.blocks[0].m == 1

    def test_doubled_generator_multiplicity_two(self):
        rng = np.random.default_rng(20)
        g = rand_herm(rng, 3)
        h = rand_herm(rng, 3)
        gens = [np.kron(x, np.eye(2)).reshape(6, 6) for x in (g, h)]
        # kron(g, I2) realizes multiplicity 2 directly
        dec = irrep_decompose(gens, seed=1)
        assert [(b.n, b.m) for b in dec.blocks] == [(3, 2)]

    def test_inequivalent_blocks_stay_split(self):
        rng = np.random.default_rng(22)
        gens, _ = constructed_rep(rng, [(2, 1), (2, 1)])
        dec = irrep_decompose(gens, seed=2)
        assert sorted((b.n, b.m) for b in dec.blocks) == [(2, 1), (2, 1)]
        assert dec.commutant_dim == 2 == len(commutant_basis(gens))

    def test_thirty_constructed_reps_recovered(self):
        rng = np.random.default_rng(24)
        for trial in range(30):
            n_blocks = int(rng.integers(1, 4))
            structure = []
            total = 0
            for _ in range(n_blocks):
                n = int(rng.integers(1, 4))
                m = int(rng.integers(1, 3))
                if total + n * m > 12:
                    break
                structure.append((n, m))
                total += n * m
            if not structure:
                structure = [(2, 1)]
            gens, d = constructed_rep(rng, structure)
            dec = irrep_decompose(gens, seed=trial)
            got = sorted((b.n, b.m) for b in dec.blocks)
            # random same-dimension irreps are a.s. inequivalent, so the
            # multiset of (n, m) pairs must match exactly
            assert got == sorted(structure), f"trial {trial}: {got} != {structure}"
            assert dec.commutant_dim == len(commutant_basis(gens))
            defect = max(mat_norm(dec.reassemble(t) - gens[t]) for t in range(len(gens)))
            assert defect < 1e-8
            u = dec.change_of_basis()
            assert mat_norm(dagger(u) @ u - np.eye(d)) < 1e-10

    def test_povm_family_blocks(self):
        # diag(a, b, b) algebra: two inequivalent characters, multiplicities 1 and 2
        s3, _ = example_pair()
        gens = [op for povm in s3.M for op in povm]
        dec = irrep_decompose(gens, seed=0)
        assert sorted((b.n, b.m) for b in dec.blocks) == [(1, 1), (1, 2)]


class TestCyclicRestrict:
    def test_already_cyclic_identity(self):
        m = chsh_ideal_model()
        cm = cyclic_restrict(m)
        assert not cm.restricted
        assert cm.dim == 4
        assert cm.model is m

    def test_unreachable_block_stripped(self):
        rng = np.random.default_rng(26)
        base = random_quantum_model(rng, Scenario(1, 1, 2, 2), 2, 2)
        cext = commuting_from_tensor(base)

        def double(op):
            out = np.zeros((8, 8), dtype=complex)
            out[:4, :4] = op
            out[4:, 4:] = op
            return out

        doubled = CommutingModel(
            scenario=base.scenario, dim=8,
            M=[[double(op) for op in povm] for povm in cext.M],
            N=[[double(op) for op in povm] for povm in cext.N],
            psi=np.concatenate([cext.psi, np.zeros(4)]),
        )
        cm = cyclic_restrict(doubled)
        assert cm.restricted
        assert cm.dim <= 4  # the mirror block is never reached

    def test_example_commuting_cyclic_dim_two(self):
        _, s2 = example_pair()
        cm = cyclic_restrict(commuting_from_tensor(s2))
        assert cm.dim == 2
        # spanned by {psi, (M0 x Id) psi}: the identity word plus one letter
        keys = [w.key() for w in cm.basis_words]
        assert keys[0] == (0, ())
        assert keys[1] == (1, ((0, 0, 0),))

    def test_preserves_correlation_and_moments(self):
        rng = np.random.default_rng(28)
        m = random_quantum_model(rng, Scenario(2, 2, 2, 2), 2, 3)
        cm = cyclic_restrict(m)
        np.testing.assert_allclose(correlation_of(cm.model).p, correlation_of(m).p,
                                   atol=1e-10)
        letters = [(x, a) for x in range(2) for a in range(2)]
        words = [(), *[(l,) for l in letters]]
        words += [w1 + w2 for w1 in words[1:] for w2 in words[1:]]
        for wa in words:
            for wb in words:
                if len(wa) + len(wb) > 4:
                    continue
                v1 = evaluate_moment(m, Word("A", wa), Word("B", wb))
                v2 = evaluate_moment(cm.model, Word("A", wa), Word("B", wb))
                assert abs(v1 - v2) < 1e-10

    def test_cyclic_model_commutant_stabilizer_trivial(self):
        """No commutant element other than Id fixes the state of a cyclic model."""
        _, s2 = example_pair()
        cm = cyclic_restrict(commuting_from_tensor(s2))
        gens = [op for fam in (cm.model.M, cm.model.N) for povm in fam for op in povm]
        basis = commutant_basis(gens)
        # solve (sum_k c_k B_k) psi = psi; the affine solution set must be {Id}
        design = np.column_stack([b @ cm.model.psi for b in basis])
        sol, *_ = np.linalg.lstsq(design, cm.model.psi, rcond=None)
        t = sum(c * b for c, b in zip(sol, basis))
        np.testing.assert_allclose(t, np.eye(cm.dim), atol=1e-9)
        null_dim = design.shape[1] - np.linalg.matrix_rank(design, tol=1e-9)
        assert null_dim == 0


class TestStatesEqual:
    def test_reflexive(self):
        m = chsh_ideal_model()
        equal, w = states_equal(m, m)
        assert equal
        assert w.state_residual < 1e-9
        assert w.intertwiner_residual < 1e-8

    def test_auxiliary_invisible(self):
        rng = np.random.default_rng(32)
        m = random_quantum_model(rng, Scenario(2, 2, 2, 2), 2, 2)
        aux = np.kron([0.6, 0.8], [0.0, 1.0])
        big = tensor_with_auxiliary(m, aux, 2, 2)
        equal, _ = states_equal(m, big)
        assert equal

    def test_example_pair_equal(self):
        s3, s2 = example_pair()
        equal, w = states_equal(s3, s2)
        assert equal
        assert w.state_residual < 1e-9

    def test_different_correlations_distinguished(self):
        m1 = chsh_ideal_model()
        rng = np.random.default_rng(33)
        m2 = random_quantum_model(rng, Scenario(2, 2, 2, 2), 2, 2)
        equal, witness = states_equal(m1, m2)
        assert not equal
        # a degree-(1,1) moment already differs for generic models
        assert len(witness.wordA) + len(witness.wordB) <= 4
        assert abs(witness.value1 - witness.value2) > 1e-6

    def test_symmetric_on_fixtures(self):
        s3, s2 = example_pair()
        assert states_equal(s3, s2)[0] == states_equal(s2, s3)[0]
        m = chsh_ideal_model()
        rng = np.random.default_rng(34)
        other = random_quantum_model(rng, Scenario(2, 2, 2, 2), 2, 2)
        assert states_equal(m, other)[0] == states_equal(other, m)[0] is False

    def test_invariant_under_local_unitaries(self):
        rng = np.random.default_rng(36)
        m = random_quantum_model(rng, Scenario(2, 2, 2, 2), 2, 3)
        ua = rand_unitary(rng, 2)
        ub = rand_unitary(rng, 3)
        rotated = QuantumModel(
            scenario=m.scenario, dimA=2, dimB=3,
            M=[[ua @ op @ dagger(ua) for op in povm] for povm in m.M],
            N=[[ub @ op @ dagger(ub) for op in povm] for povm in m.N],
            psi=np.kron(ua, ub) @ m.psi,
        )
        equal, _ = states_equal(m, rotated)
        assert equal

    def test_projective_vs_uniform_povm_same_correlation(self):
        """Same correlation, different abstract state: a longer word separates."""
        sc = Scenario(1, 1, 2, 2)
        half = np.eye(2) / 2
        proj = np.diag([1.0, 0.0])
        uniform = QuantumModel(scenario=sc, dimA=2, dimB=2,
                               M=[[half, half]], N=[[half, half]],
                               psi=np.array([1, 0, 0, 1]) / np.sqrt(2))
        seesaw = QuantumModel(scenario=sc, dimA=2, dimB=2,
                              M=[[proj, np.eye(2) - proj]],
                              N=[[half, half]],
                              psi=np.array([1, 0, 0, 1]) / np.sqrt(2))
        np.testing.assert_allclose(correlation_of(uniform).p, correlation_of(seesaw).p,
                                   atol=1e-12)
        equal, witness = states_equal(uniform, seesaw)
        assert not equal
        assert len(witness.wordA) >= 2  # degree-(1,1) moments all agree

    def test_scenario_mismatch_rejected(self):
        m1 = chsh_ideal_model()
        _, s2 = example_pair()
        with pytest.raises(ValueError):
            states_equal(m1, s2)

    def test_tensor_vs_commuting_carrier(self):
        _, s2 = example_pair()
        equal, w = states_equal(s2, commuting_from_tensor(s2))
        assert equal and w.state_residual < 1e-10

    def test_single_space_commuting_model(self):
        """A commuting model with no tensor structure at all still restricts
        and compares against itself."""
        z = np.diag([1.0, 0.0, 0.0])
        q = np.diag([1.0, 1.0, 0.0])
        m = CommutingModel(scenario=Scenario(1, 1, 2, 2), dim=3,
                           M=[[z, np.eye(3) - z]], N=[[q, np.eye(3) - q]],
                           psi=np.ones(3) / np.sqrt(3))
        cm = cyclic_restrict(m)
        assert cm.dim == 3
        equal, _ = states_equal(m, m)
        assert equal

    def test_moment_precheck_consistent_with_decision(self):
        from bellkit.models import moments_agree_up_to

        s3, s2 = example_pair()
        agree, gap = moments_agree_up_to(s3, s2, max_length=4)
        assert agree and gap < 1e-10
        rng = np.random.default_rng(38)
        other = random_quantum_model(rng, Scenario(1, 1, 2, 2), 2, 2)
        agree, gap = moments_agree_up_to(s3, other, max_length=2)
        assert not agree and gap > 1e-3
