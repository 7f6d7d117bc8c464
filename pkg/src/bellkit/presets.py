"""Named reference models and seeded fixture generators.

The named constructions (the rank-2/rank-3 pair realizing the same abstract
state, the ideal CHSH model) are used by the shipped fixture files and the
acceptance suite; the random generators back the property tests.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger
from .models import CommutingModel, QuantumModel, Scenario

__all__ = [
    "example_pair",
    "chsh_ideal_model",
    "commuting_from_tensor",
    "tensor_with_auxiliary",
    "doubled_model",
    "random_state",
    "random_povm",
    "random_pvm",
    "random_quantum_model",
    "synchronous_model",
    "block_padded_model",
    "support_mixing_model",
]


def example_pair() -> tuple[QuantumModel, QuantumModel]:
    """Two models of the half-half single-input correlation.

    Returns ``(S3, S2)``: a 3-dimensional model with state
    |00>/sqrt(2) + (|11> + |22>)/2 (Schmidt rank 3) and a 2-dimensional model
    on the maximally entangled pair (Schmidt rank 2).  Both induce the same
    abstract state, yet neither locally dilates to a common ideal model: the
    Schmidt ranks 2 and 3 have no common nontrivial divisor.
    """
    sc = Scenario(nX=1, nY=1, nA=2, nB=2)
    e = np.eye(3)
    m0 = np.outer(e[0], e[0])
    m1 = np.outer(e[1], e[1]) + np.outer(e[2], e[2])
    psi3 = np.zeros(9)
    psi3[0] = 1 / np.sqrt(2)   # |00>
    psi3[4] = 1 / 2            # |11>
    psi3[8] = 1 / 2            # |22>
    s3 = QuantumModel(scenario=sc, dimA=3, dimB=3, M=[[m0, m1]], N=[[m0, m1]], psi=psi3)

    f = np.eye(2)
    n0 = np.outer(f[0], f[0])
    n1 = np.outer(f[1], f[1])
    psi2 = np.array([1, 0, 0, 1]) / np.sqrt(2)
    s2 = QuantumModel(scenario=sc, dimA=2, dimB=2, M=[[n0, n1]], N=[[n0, n1]], psi=psi2)
    return s3, s2


_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def _binary_povm(observable: np.ndarray) -> list[np.ndarray]:
    eye = np.eye(observable.shape[0])
    return [(eye + observable) / 2, (eye - observable) / 2]


def chsh_ideal_model() -> QuantumModel:
    """EPR pair with Z/X on one side and the diagonal bases on the other.

    Its correlation is p(a,b|x,y) = (1 + (-1)^(a+b+xy)/sqrt(2)) / 4, the
    optimal CHSH behaviour.
    """
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return QuantumModel(
        scenario=Scenario(2, 2, 2, 2), dimA=2, dimB=2,
        M=[_binary_povm(_Z), _binary_povm(_X)],
        N=[_binary_povm((_Z + _X) / np.sqrt(2)), _binary_povm((_Z - _X) / np.sqrt(2))],
        psi=psi,
    )


def commuting_from_tensor(m: QuantumModel) -> CommutingModel:
    """Kron-extend a tensor model to a commuting model on the product space."""
    eyeA, eyeB = np.eye(m.dimA), np.eye(m.dimB)
    return CommutingModel(
        scenario=m.scenario,
        dim=m.dimA * m.dimB,
        M=[[np.kron(op, eyeB) for op in povm] for povm in m.M],
        N=[[np.kron(eyeA, op) for op in povm] for povm in m.N],
        psi=m.psi,
    )


def tensor_with_auxiliary(m: QuantumModel, aux: np.ndarray,
                          dimAuxA: int, dimAuxB: int) -> QuantumModel:
    """Tensor an auxiliary register with identity measurements onto a model.

    ``aux`` lives on C^dimAuxA (x) C^dimAuxB; the new local spaces are
    H_A (x) C^dimAuxA and H_B (x) C^dimAuxB and the observable content is
    unchanged.
    """
    aux = np.asarray(aux, dtype=complex).reshape(dimAuxA, dimAuxB)
    psi = np.einsum("ab,kl->akbl", m.psi.reshape(m.dimA, m.dimB), aux).reshape(-1)
    return QuantumModel(
        scenario=m.scenario,
        dimA=m.dimA * dimAuxA,
        dimB=m.dimB * dimAuxB,
        M=[[np.kron(op, np.eye(dimAuxA)) for op in povm] for povm in m.M],
        N=[[np.kron(op, np.eye(dimAuxB)) for op in povm] for povm in m.N],
        psi=psi,
    )


def doubled_model(m: QuantumModel, weights=(0.8, 0.6)) -> QuantumModel:
    """Direct sum of two copies of a model with the state spread across both.

    The measurement operators are block-diagonal copies; the state sits in
    the two diagonal blocks with the given (normalized) amplitudes.
    """
    w = np.asarray(weights, dtype=float)
    w = w / np.linalg.norm(w)
    dA, dB = m.dimA, m.dimB

    def double(op):
        out = np.zeros((2 * op.shape[0], 2 * op.shape[1]), dtype=complex)
        out[: op.shape[0], : op.shape[1]] = op
        out[op.shape[0]:, op.shape[1]:] = op
        return out

    psi = np.zeros((2 * dA, 2 * dB), dtype=complex)
    psi[:dA, :dB] = w[0] * m.psi.reshape(dA, dB)
    psi[dA:, dB:] = w[1] * m.psi.reshape(dA, dB)
    return QuantumModel(
        scenario=m.scenario, dimA=2 * dA, dimB=2 * dB,
        M=[[double(op) for op in povm] for povm in m.M],
        N=[[double(op) for op in povm] for povm in m.N],
        psi=psi.reshape(-1),
    )


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_povm(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Generic full-support POVM from normalized random Gram factors."""
    gs = []
    for _ in range(outcomes):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        gs.append(x @ dagger(x))
    total = sum(gs)
    vals, vecs = np.linalg.eigh(total)
    inv_root = vecs @ np.diag(1.0 / np.sqrt(vals)) @ dagger(vecs)
    return [inv_root @ g @ inv_root for g in gs]


def random_pvm(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Random projective measurement: Haar-ish unitary columns split in groups."""
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(x)
    splits = np.array_split(np.arange(dim), outcomes)
    return [q[:, idx] @ dagger(q[:, idx]) if len(idx) else np.zeros((dim, dim), dtype=complex)
            for idx in splits]


def random_quantum_model(rng: np.random.Generator, scenario: Scenario,
                         dimA: int, dimB: int, projective: bool = False) -> QuantumModel:
    make = random_pvm if projective else random_povm
    return QuantumModel(
        scenario=scenario, dimA=dimA, dimB=dimB,
        M=[make(rng, dimA, scenario.nA) for _ in range(scenario.nX)],
        N=[make(rng, dimB, scenario.nB) for _ in range(scenario.nY)],
        psi=random_state(rng, dimA * dimB),
    )


def synchronous_model(rng: np.random.Generator, dim: int, n_inputs: int,
                      n_outputs: int) -> QuantumModel:
    """Standard synchronous construction: maximally entangled state, N = M^T."""
    psi = np.eye(dim).reshape(-1) / np.sqrt(dim)
    M = [random_pvm(rng, dim, n_outputs) for _ in range(n_inputs)]
    N = [[op.T.copy() for op in povm] for povm in M]
    return QuantumModel(scenario=Scenario(n_inputs, n_inputs, n_outputs, n_outputs),
                        dimA=dim, dimB=dim, M=M, N=N, psi=psi)


def block_padded_model(m: QuantumModel, rng: np.random.Generator,
                       junkA: int, junkB: int) -> QuantumModel:
    """Pad a model with junk blocks orthogonal to the state.

    Measurements become block-diagonal (original (+) random junk POVM), the
    state is zero on the junk block, so the padded model is centrally
    supported with the original as its support model.
    """
    def pad_family(family, d, junk, outcomes):
        out = []
        for povm in family:
            junk_povm = random_povm(rng, junk, outcomes) if junk else None
            block = []
            for a, op in enumerate(povm):
                big = np.zeros((d + junk, d + junk), dtype=complex)
                big[:d, :d] = op
                if junk:
                    big[d:, d:] = junk_povm[a]
                block.append(big)
            out.append(block)
        return out

    psi = np.zeros(((m.dimA + junkA), (m.dimB + junkB)), dtype=complex)
    psi[: m.dimA, : m.dimB] = m.psi.reshape(m.dimA, m.dimB)
    return QuantumModel(
        scenario=m.scenario, dimA=m.dimA + junkA, dimB=m.dimB + junkB,
        M=pad_family(m.M, m.dimA, junkA, m.scenario.nA),
        N=pad_family(m.N, m.dimB, junkB, m.scenario.nB),
        psi=psi.reshape(-1),
    )


def support_mixing_model(rng: np.random.Generator, dim: int, rank: int,
                         scenario: Scenario) -> QuantumModel:
    """Rank-deficient state plus a measurement mixing support and complement.

    The first A-measurement contains a projector onto a vector straddling the
    support of psi and its orthogonal complement, so the support projection
    cannot commute with it: the model is not centrally supported.
    """
    if not 1 <= rank < dim:
        raise ValueError("need 1 <= rank < dim for a support-mixing fixture")
    if scenario.nA != 2:
        raise ValueError("the mixing measurement is binary; scenario needs nA == 2")
    coeffs = rng.uniform(0.5, 1.0, size=rank)
    coeffs = coeffs / np.linalg.norm(coeffs)
    psi = np.zeros((dim, dim), dtype=complex)
    for i, c in enumerate(coeffs):
        psi[i, i] = c
    mixing = np.zeros(dim, dtype=complex)
    mixing[0] = 1 / np.sqrt(2)
    mixing[rank] = 1 / np.sqrt(2)  # strictly outside the support
    proj = np.outer(mixing, mixing.conj())
    M0 = [proj, np.eye(dim) - proj]
    other = [random_povm(rng, dim, scenario.nA) for _ in range(scenario.nX - 1)]
    N = [random_povm(rng, dim, scenario.nB) for _ in range(scenario.nY)]
    return QuantumModel(scenario=scenario, dimA=dim, dimB=dim,
                        M=[M0] + other, N=N, psi=psi.reshape(-1))
