"""Associated representations: commutants, irrep decomposition, cyclic models.

The decomposition machinery realizes, numerically, the standard structure
theory of a *-closed operator family on a finite-dimensional space: the space
splits as a direct sum of (irrep (x) multiplicity) blocks, the family acts as
``g_i (x) Id_{m_i}`` on each, and the commutant has dimension ``sum m_i^2``.
State equality between two models is decided through their cyclic
restrictions: two cyclic models induce the same abstract state exactly when
the Gram matrices of their word frames coincide, in which case the forced
linear map between the frames is the intertwining unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    EIG_CLUSTER_GAP,
    Tolerance,
    as_matrix,
    cluster_eigenvalues,
    dagger,
    hermitian_eig,
    mat_norm,
)
from .models import CommutingModel, QuantumModel, Scenario, Word, _apply_word_vec

__all__ = [
    "AlgebraNotSemisimpleNumerically",
    "RepBlock",
    "RepDecomposition",
    "CyclicModel",
    "CombinedWord",
    "commutant_basis",
    "irrep_decompose",
    "cyclic_restrict",
    "states_equal",
    "EquivalenceWitness",
    "DistinguishingMoment",
    "scenario_letters",
]

# Intertwiner residuals below tol merge two irreps, above AMBIGUOUS_FACTOR*tol
# split them; the band in between is reported as ambiguous (and split).
AMBIGUOUS_FACTOR = 100.0


class AlgebraNotSemisimpleNumerically(RuntimeError):
    """Block structure could not be resolved within tolerance."""


@dataclass(frozen=True)
class CombinedWord:
    """Product word pi_A(wordA) * pi_B(wordB), stored in canonical A-then-B form."""

    lettersA: tuple[tuple[int, int], ...] = ()
    lettersB: tuple[tuple[int, int], ...] = ()

    @property
    def length(self) -> int:
        return len(self.lettersA) + len(self.lettersB)

    def key(self):
        flat = tuple((0, x, a) for x, a in self.lettersA)
        flat += tuple((1, y, b) for y, b in self.lettersB)
        return (self.length, flat)

    def word_pair(self) -> tuple[Word, Word]:
        return Word("A", self.lettersA), Word("B", self.lettersB)

    def prepend(self, letter) -> "CombinedWord":
        side, x, a = letter
        if side == 0:
            return CombinedWord(((x, a),) + self.lettersA, self.lettersB)
        return CombinedWord(self.lettersA, ((x, a),) + self.lettersB)

    def adjoint_times(self, other: "CombinedWord") -> "CombinedWord":
        """Canonical form of (self)^dagger * other for self-adjoint letters."""
        return CombinedWord(
            tuple(reversed(self.lettersA)) + other.lettersA,
            tuple(reversed(self.lettersB)) + other.lettersB,
        )


def scenario_letters(sc: Scenario) -> list[tuple[int, int, int]]:
    """All generator letters, ordered (side A before B, input, output)."""
    out = [(0, x, a) for x in range(sc.nX) for a in range(sc.nA)]
    out += [(1, y, b) for y in range(sc.nY) for b in range(sc.nB)]
    return out


def _apply_letter(model, letter, vec: np.ndarray) -> np.ndarray:
    side, x, a = letter
    return _apply_word_vec(model, Word("A" if side == 0 else "B", ((x, a),)), vec)


def commutant_basis(generators, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Hilbert-Schmidt-orthonormal basis of {T : [T, G] = 0 for all G}.

    Computed as the joint null space of the stacked linear maps
    ``T -> G T - T G``; for a family realizing ``(+) M_{n_i} (x) Id_{m_i}``
    the dimension is ``sum m_i^2``.
    """
    gens = [as_matrix(g) for g in generators]
    if not gens:
        raise ValueError("commutant_basis needs at least one generator")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise ValueError("generators must be square with a common dimension")
    eye = np.eye(d)
    rows = [np.kron(g, eye) - np.kron(eye, g.T) for g in gens]
    stacked = np.vstack(rows)
    _, svals, vh = np.linalg.svd(stacked)
    # scale by the generators, not svals[0]: for near-central families the
    # whole map is fp noise and a relative cutoff would see rank everywhere
    scale = max(1.0, max(mat_norm(g) for g in gens))
    cutoff = max(tol.eps, 1e-12) * scale
    null_dim = d * d - int(np.sum(svals > cutoff))
    return [vh[-(k + 1), :].conj().reshape(d, d) for k in range(null_dim)][::-1]


@dataclass(frozen=True)
class RepBlock:
    """One isotypic block: irrep of dimension n with multiplicity m.

    ``basis`` is a d x (n*m) isometry whose columns (indexed r*m + j) carry
    the conjugated generators to ``kron(g, Id_m)``; ``generators`` are the
    n x n irrep images of the input generators.
    """

    n: int
    m: int
    basis: np.ndarray
    generators: list[np.ndarray]


@dataclass
class RepDecomposition:
    blocks: list[RepBlock]
    dim: int
    ambiguous_pairs: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def irreducible(self) -> bool:
        return len(self.blocks) == 1 and self.blocks[0].m == 1

    @property
    def commutant_dim(self) -> int:
        return sum(b.m * b.m for b in self.blocks)

    def change_of_basis(self) -> np.ndarray:
        return np.hstack([b.basis for b in self.blocks])

    def reassemble(self, index: int) -> np.ndarray:
        """The generator rebuilt from its block images, in the original basis."""
        u = self.change_of_basis()
        parts = [np.kron(b.generators[index], np.eye(b.m)) for b in self.blocks]
        full = np.zeros((self.dim, self.dim), dtype=complex)
        off = 0
        for part in parts:
            k = part.shape[0]
            full[off:off + k, off:off + k] = part
            off += k
        return u @ full @ dagger(u)


def _random_commutant_element(com_basis, rng) -> np.ndarray:
    t = sum(rng.normal() * b for b in com_basis)
    return (t + dagger(t)) / 2


def _split_invariant(basis: np.ndarray, work_gens, rng, tol) -> list[np.ndarray]:
    """Recursively split an invariant subspace into irreducible pieces.

    ``basis`` is a d x s isometry; ``work_gens`` the *-closed family on the
    full space.  A random Hermitian element of the restricted commutant is
    eigendecomposed and its eigenspace clusters are invariant; recursion
    bottoms out when the restricted commutant is scalar.
    """
    restricted = [dagger(basis) @ g @ basis for g in work_gens]
    com = commutant_basis(restricted, tol)
    if len(com) == 1:
        return [basis]
    for _ in range(8):
        t = _random_commutant_element(com, rng)
        if mat_norm(t) < 1e-8:
            continue
        vals, vecs = hermitian_eig(t, Tolerance(1e-6))
        clusters = cluster_eigenvalues(vals, EIG_CLUSTER_GAP)
        if len(clusters) > 1:
            out = []
            for block in clusters:
                out.extend(_split_invariant(basis @ vecs[:, block], work_gens, rng, tol))
            return out
    raise AlgebraNotSemisimpleNumerically(
        "commutant is non-scalar but produced no splitting element"
    )


def _intertwiner(gens1, gens2, tol: Tolerance):
    """Unitary U with U g1 U* = g2 for irreducible families, else None.

    Returns ``(U, residual)``; by Schur's lemma the solution space of
    ``X g1 = g2 X`` is at most one-dimensional, and any nonzero solution is
    proportional to a unitary, recovered here by polar correction.
    """
    n = gens1[0].shape[0]
    if gens2[0].shape[0] != n:
        return None, np.inf
    eye = np.eye(n)
    rows = [np.kron(eye, g1.T) - np.kron(g2, eye) for g1, g2 in zip(gens1, gens2)]
    _, svals, vh = np.linalg.svd(np.vstack(rows))
    x = vh[-1, :].conj().reshape(n, n)
    u_svd, s_x, vh_x = np.linalg.svd(x)
    if s_x[-1] < 1e-6 * s_x[0]:
        return None, np.inf  # solution not invertible: inequivalent
    u = u_svd @ vh_x
    # deterministic global phase
    flat = u.reshape(-1)
    pivot = flat[np.argmax(np.abs(flat))]
    u = u * (abs(pivot) / pivot)
    residual = max(mat_norm(u @ g1 @ dagger(u) - g2) for g1, g2 in zip(gens1, gens2))
    return u, residual


def _trace_signature(gens) -> tuple:
    sig = []
    for g in gens:
        t = complex(np.trace(g))
        sig.append((round(t.real, 6), round(t.imag, 6)))
    return tuple(sig)


def irrep_decompose(generators, seed: int = 0,
                    tol: Tolerance = DEFAULT_TOL) -> RepDecomposition:
    """Double-commutant decomposition of the algebra generated by ``generators``.

    Adjoints are adjoined so the family is *-closed, the space is split into
    irreducible invariant subspaces with a seeded random commutant element,
    and unitarily equivalent pieces are merged into (irrep (x) multiplicity)
    blocks.  Blocks are sorted by (irrep dimension, trace signature) so the
    output is deterministic given the seed.  Intertwiner residuals falling in
    the gray band [eps, 100*eps] are reported in ``ambiguous_pairs`` (those
    pieces stay split rather than guessing).
    """
    gens = [as_matrix(g) for g in generators]
    if not gens:
        raise ValueError("irrep_decompose needs at least one generator")
    d = gens[0].shape[0]
    work = list(gens) + [dagger(g) for g in gens]
    rng = np.random.default_rng(seed)
    leaves = _split_invariant(np.eye(d), work, rng, tol)

    leaf_gens = [[dagger(v) @ g @ v for g in gens] for v in leaves]
    # group unitarily equivalent leaves; classes[i] = (member leaf indices, U list)
    classes: list[dict] = []
    ambiguous: list[tuple[int, int, float]] = []
    for k, lg in enumerate(leaf_gens):
        placed = False
        for c in classes:
            rep_gens = leaf_gens[c["members"][0]]
            u, res = _intertwiner(lg, rep_gens, tol)
            if u is not None and res < tol.eps * AMBIGUOUS_FACTOR:
                if res < tol.eps:
                    c["members"].append(k)
                    c["intertwiners"].append(u)
                    placed = True
                    break
                ambiguous.append((c["members"][0], k, res))
        if not placed:
            classes.append({"members": [k], "intertwiners": [np.eye(lg[0].shape[0])]})

    blocks = []
    for c in classes:
        rep_idx = c["members"][0]
        n = leaves[rep_idx].shape[1]
        m = len(c["members"])
        cols = np.zeros((d, n * m), dtype=complex)
        for j, (k, u) in enumerate(zip(c["members"], c["intertwiners"])):
            mapped = leaves[k] @ dagger(u)  # columns r: carrier of the rep basis
            for r in range(n):
                cols[:, r * m + j] = mapped[:, r]
        blocks.append(RepBlock(n=n, m=m, basis=cols, generators=leaf_gens[rep_idx]))

    blocks.sort(key=lambda b: (b.n, _trace_signature(b.generators)))
    dec = RepDecomposition(blocks=blocks, dim=d, ambiguous_pairs=ambiguous)

    defect = max(mat_norm(dec.reassemble(t) - gens[t]) for t in range(len(gens)))
    if defect > max(tol.eps * AMBIGUOUS_FACTOR, 1e-8):
        raise AlgebraNotSemisimpleNumerically(
            f"reassembly defect {defect:.3e} exceeds tolerance; input too ill-conditioned"
        )
    return dec


@dataclass(frozen=True)
class CyclicModel:
    """A model whose state is cyclic, plus the words that span its space.

    ``model`` is the original input when the state was already cyclic there
    (and, for tensor inputs, the cyclic subspace is the whole product space);
    otherwise it is the compression onto the cyclic subspace, carried by a
    CommutingModel since that subspace need not factorize.
    """

    model: QuantumModel | CommutingModel
    basis_words: list[CombinedWord]
    dim: int
    restricted: bool


def _cyclic_frame(model, tol: Tolerance):
    """BFS over canonical words: returns (words, raw vectors, orthonormal basis).

    Level L+1 candidates are letters prepended to the retained level-L words,
    processed in length-lex order; a candidate is retained when its residual
    after projection on the basis so far is at least eps * (1 + max norm).
    Two consecutive empty levels terminate (with this scheme the level after
    an empty one is vacuously empty, so a single empty level suffices).
    """
    letters = scenario_letters(model.scenario)
    psi = model.psi
    cutoff = tol.eps * 2.0  # word vectors have norm <= 1
    words = [CombinedWord()]
    raws = [psi.copy()]
    basis = [psi / np.linalg.norm(psi)]
    level = [(CombinedWord(), psi.copy())]
    total_dim = len(psi)
    while level and len(basis) < total_dim:
        candidates: dict = {}
        for letter in letters:
            for w, raw in level:
                cw = w.prepend(letter)
                if cw.key() not in candidates:
                    candidates[cw.key()] = (cw, _apply_letter(model, letter, raw))
        next_level = []
        for key in sorted(candidates):
            cw, vec = candidates[key]
            resid = vec.copy()
            for _ in range(2):
                for b in basis:
                    resid = resid - b * np.vdot(b, resid)
            norm = float(np.linalg.norm(resid))
            if norm >= cutoff:
                basis.append(resid / norm)
                words.append(cw)
                raws.append(vec)
                next_level.append((cw, vec))
                if len(basis) == total_dim:
                    break
        level = next_level
    return words, raws, basis


def cyclic_restrict(model, tol: Tolerance = DEFAULT_TOL) -> CyclicModel:
    """Restriction of a model to the cyclic subspace generated by its state.

    For a tensor-product model the enumeration runs over the product algebra
    (words on both sides); when the cyclic subspace is proper the compressed
    carrier is a CommutingModel.  Correlations and word moments are preserved
    exactly.
    """
    words, _, basis = _cyclic_frame(model, tol)
    full_dim = len(model.psi)
    r = len(basis)
    if r == full_dim:
        return CyclicModel(model=model, basis_words=words, dim=r, restricted=False)
    q = np.column_stack(basis)

    def compress(side: str, x: int, a: int) -> np.ndarray:
        word = Word(side, ((x, a),))
        acted = np.column_stack([_apply_word_vec(model, word, q[:, j]) for j in range(r)])
        t = dagger(q) @ acted
        return (t + dagger(t)) / 2

    sc = model.scenario
    small = CommutingModel(
        scenario=sc,
        dim=r,
        M=[[compress("A", x, a) for a in range(sc.nA)] for x in range(sc.nX)],
        N=[[compress("B", y, b) for b in range(sc.nB)] for y in range(sc.nY)],
        psi=dagger(q) @ model.psi,
    )
    return CyclicModel(model=small, basis_words=words, dim=r, restricted=True)


@dataclass(frozen=True)
class EquivalenceWitness:
    """Unitary between the cyclic spaces carrying state 1 onto state 2."""

    unitary: np.ndarray
    state_residual: float
    intertwiner_residual: float
    gram_residual: float
    words_checked: int


@dataclass(frozen=True)
class DistinguishingMoment:
    wordA: Word
    wordB: Word
    value1: complex
    value2: complex

    def __str__(self):
        return (f"f1(wA={self.wordA.letters}, wB={self.wordB.letters}) = {self.value1:.6g}, "
                f"f2 = {self.value2:.6g}")


def _frame_vectors(model, words) -> np.ndarray:
    cols = []
    for cw in words:
        wa, wb = cw.word_pair()
        v = _apply_word_vec(model, wb, model.psi)
        v = _apply_word_vec(model, wa, v)
        cols.append(v)
    return np.column_stack(cols)


def states_equal(m1, m2, tol: Tolerance = DEFAULT_TOL):
    """Whether two models induce the same abstract state.

    Both models are cyclically restricted, a shared word frame spanning both
    cyclic spaces is built, and the frames' Gram matrices (extended by one
    letter so the induced map is forced to intertwine) are compared.  Returns
    ``(True, EquivalenceWitness)`` with the unitary between the cyclic spaces,
    or ``(False, DistinguishingMoment)`` with a word pair and both values.
    """
    if m1.scenario != m2.scenario:
        raise ValueError("states_equal requires a common scenario")
    c1 = cyclic_restrict(m1, tol)
    c2 = cyclic_restrict(m2, tol)
    letters = scenario_letters(m1.scenario)

    merged = {w.key(): w for w in c1.basis_words}
    merged.update({w.key(): w for w in c2.basis_words})
    base_words = [merged[k] for k in sorted(merged)]
    extended = dict(merged)
    for w in base_words:
        for letter in letters:
            cw = w.prepend(letter)
            extended.setdefault(cw.key(), cw)
    frame_words = [extended[k] for k in sorted(extended)]

    v1 = _frame_vectors(c1.model, frame_words)
    v2 = _frame_vectors(c2.model, frame_words)
    g1 = dagger(v1) @ v1
    g2 = dagger(v2) @ v2
    diff = np.abs(g1 - g2)
    gram_residual = float(diff.max())
    if gram_residual > tol.eps * 2.0:
        i, j = np.unravel_index(int(diff.argmax()), diff.shape)
        moment_word = frame_words[i].adjoint_times(frame_words[j])
        wa, wb = moment_word.word_pair()
        return False, DistinguishingMoment(
            wordA=wa, wordB=wb, value1=complex(g1[i, j]), value2=complex(g2[i, j])
        )

    # shared Gram -> common orthonormalization -> forced unitary
    g = (g1 + g2) / 2
    vals, vecs = np.linalg.eigh((g + dagger(g)) / 2)
    keep = vals > max(vals.max(initial=0.0), 1.0) * 1e-12
    coeff = vecs[:, keep] @ np.diag(1.0 / np.sqrt(vals[keep]))
    q1 = v1 @ coeff
    q2 = v2 @ coeff
    u = q2 @ dagger(q1)
    state_res = float(np.linalg.norm(u @ c1.model.psi - c2.model.psi))
    inter_res = 0.0
    for letter in letters:
        lhs = np.column_stack(
            [u @ _apply_letter(c1.model, letter, q1[:, j]) for j in range(q1.shape[1])]
        )
        rhs = np.column_stack(
            [_apply_letter(c2.model, letter, u @ q1[:, j]) for j in range(q1.shape[1])]
        )
        inter_res = max(inter_res, float(np.linalg.norm(lhs - rhs, 2)))
    witness = EquivalenceWitness(
        unitary=u,
        state_residual=state_res,
        intertwiner_residual=inter_res,
        gram_residual=gram_residual,
        words_checked=len(frame_words),
    )
    return True, witness
