"""Naimark dilation and local dilations between quantum models.

A local dilation of a model T by a model S is a pair of local isometries and
an auxiliary state transporting every measured state of S onto the measured
states of T tensored with the auxiliary.  ``verify_local_dilation`` checks
the defining equation index by index; ``find_local_dilation`` constructs a
witness by decomposing both sides of S into irreducibles, matching every
state-supported component against the ideal model, and assembling the
isometries block by block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    as_vector,
    dagger,
    mat_norm,
    psd_sqrt,
    structural_predicates,
)
from .models import QuantumModel, Word, correlation_of, evaluate_moment
from .reps import _intertwiner, irrep_decompose
from .schmidt import schmidt_decompose
from .support import support_of

__all__ = [
    "NaimarkDilation",
    "naimark_dilate",
    "DilationWitness",
    "DilationReport",
    "verify_local_dilation",
    "NotDilatable",
    "find_local_dilation",
    "compose_witnesses",
    "trivial_witness",
]


@dataclass(frozen=True)
class NaimarkDilation:
    """Isometry V : H -> H (x) C^k and PVM P with V* P_i V = M_i."""

    V: np.ndarray
    P: list[np.ndarray]

    @property
    def dilated_dim(self) -> int:
        return self.V.shape[0]


def naimark_dilate(povm, tol: Tolerance = DEFAULT_TOL) -> NaimarkDilation:
    """Canonical Naimark dilation of a POVM.

    On K = H (x) C^k the projections are P_i = Id (x) |i><i| and the isometry
    sends |h> to sum_i M_i^{1/2} |h> (x) |i>.
    """
    ops = [as_matrix(m) for m in povm]
    k = len(ops)
    d = ops[0].shape[0]
    total = np.zeros((d, d), dtype=complex)
    for m in ops:
        if m.shape != (d, d):
            raise ValueError("POVM elements must be square with a common dimension")
        if mat_norm(m - dagger(m)) > tol.eps * (1 + mat_norm(m)):
            raise ValueError("POVM element is not Hermitian")
        total = total + m
    if mat_norm(total - np.eye(d)) > tol.eps * (1 + mat_norm(total)):
        raise ValueError("POVM does not sum to the identity")

    v = np.zeros((d * k, d), dtype=complex)
    basis_k = np.eye(k)
    for i, m in enumerate(ops):
        root = psd_sqrt(m, tol)
        v += np.kron(root, basis_k[:, [i]])
    projections = [np.kron(np.eye(d), np.outer(basis_k[:, i], basis_k[:, i])) for i in range(k)]
    return NaimarkDilation(V=v, P=projections)


@dataclass(frozen=True)
class DilationWitness:
    """Local isometries and auxiliary state certifying S >= T.

    ``IA`` maps H_A into H~_A (x) H_A^aux (composite row index
    ``i_tilde * dimAuxA + i_aux``), likewise ``IB``; ``aux`` lives on
    H_A^aux (x) H_B^aux.
    """

    IA: np.ndarray
    IB: np.ndarray
    aux: np.ndarray
    dimAuxA: int
    dimAuxB: int

    def __post_init__(self):
        object.__setattr__(self, "IA", as_matrix(self.IA))
        object.__setattr__(self, "IB", as_matrix(self.IB))
        object.__setattr__(self, "aux", as_vector(self.aux))


def trivial_witness(m: QuantumModel) -> DilationWitness:
    """Identity-isometry witness with a scalar auxiliary state."""
    return DilationWitness(
        IA=np.eye(m.dimA), IB=np.eye(m.dimB), aux=np.array([1.0 + 0j]),
        dimAuxA=1, dimAuxB=1,
    )


@dataclass
class DilationReport:
    passed: bool
    max_residual: float
    residuals: dict[str, float]
    isometry_ok: bool
    aux_norm_residual: float
    schmidt_ranks: dict[str, int]
    rank_consistent: bool
    moment_residual: float | None = None
    details: dict = field(default_factory=dict)


def _regroup(vec: np.ndarray, dT_A: int, dAuxA: int, dT_B: int, dAuxB: int) -> np.ndarray:
    """(H~_A (x) auxA) (x) (H~_B (x) auxB)  ->  (H~_A (x) H~_B) (x) (auxA (x) auxB)."""
    t = vec.reshape(dT_A, dAuxA, dT_B, dAuxB)
    return t.transpose(0, 2, 1, 3).reshape(-1)


def _apply_local(IA: np.ndarray, IB: np.ndarray, vec: np.ndarray,
                 dimA: int, dimB: int) -> np.ndarray:
    return (IA @ vec.reshape(dimA, dimB) @ IB.T).reshape(-1)


def verify_local_dilation(S: QuantumModel, T: QuantumModel, w: DilationWitness,
                          tol: Tolerance = DEFAULT_TOL) -> DilationReport:
    """Check that ``w`` certifies T as a local dilation of S.

    The defining equation
    ``(IA (x) IB)(M^x_a (x) N^y_b)|psi> = (M~^x_a (x) N~^y_b |psi~>) (x) |aux>``
    is evaluated for every index and for the implied identity case, with the
    tensor-factor regrouping between the two sides recomputed explicitly.
    Schmidt ranks of psi, psi~, and aux are reported along with the
    multiplicativity constraint (isometries preserve Schmidt rank, so
    rank(psi) must equal rank(psi~) * rank(aux)).  When T is centrally
    supported the abstract states must agree; moments are compared on all
    word pairs of total length up to 3.
    """
    if S.scenario != T.scenario:
        raise ValueError("models live in different scenarios")
    sc = S.scenario
    if w.IA.shape != (T.dimA * w.dimAuxA, S.dimA):
        raise ValueError(
            f"IA has shape {w.IA.shape}, expected ({T.dimA * w.dimAuxA}, {S.dimA})")
    if w.IB.shape != (T.dimB * w.dimAuxB, S.dimB):
        raise ValueError(
            f"IB has shape {w.IB.shape}, expected ({T.dimB * w.dimAuxB}, {S.dimB})")
    if len(w.aux) != w.dimAuxA * w.dimAuxB:
        raise ValueError("aux vector does not match the declared auxiliary dimensions")

    isometry_ok = (structural_predicates(w.IA, tol).isometry
                   and structural_predicates(w.IB, tol).isometry)
    aux_norm_residual = abs(float(np.linalg.norm(w.aux)) - 1.0)

    residuals: dict[str, float] = {}
    pairs = [(None, None)] + [
        ((x, a), (y, b))
        for x in range(sc.nX) for a in range(sc.nA)
        for y in range(sc.nY) for b in range(sc.nB)
    ]
    for la, lb in pairs:
        if la is None:
            measured = S.psi
            target_core = T.psi
            label = "identity"
        else:
            x, a = la
            y, b = lb
            measured = (S.M[x][a] @ S.psi.reshape(S.dimA, S.dimB) @ S.N[y][b].T).reshape(-1)
            target_core = (T.M[x][a] @ T.psi.reshape(T.dimA, T.dimB) @ T.N[y][b].T).reshape(-1)
            label = f"(x={x},a={a},y={y},b={b})"
        lhs = _regroup(_apply_local(w.IA, w.IB, measured, S.dimA, S.dimB),
                       T.dimA, w.dimAuxA, T.dimB, w.dimAuxB)
        rhs = np.kron(target_core, w.aux)
        residuals[label] = float(np.linalg.norm(lhs - rhs))
    max_residual = max(residuals.values())

    rank_psi = schmidt_decompose(S.psi, S.dimA, S.dimB, tol).rank
    rank_tilde = schmidt_decompose(T.psi, T.dimA, T.dimB, tol).rank
    rank_aux = schmidt_decompose(w.aux, w.dimAuxA, w.dimAuxB, tol).rank
    schmidt_ranks = {"psi": rank_psi, "psi_tilde": rank_tilde, "aux": rank_aux}
    rank_consistent = rank_psi == rank_tilde * rank_aux

    moment_residual = None
    if support_of(T, tol).centrally_supported:
        moment_residual = 0.0
        letters_a = [(x, a) for x in range(sc.nX) for a in range(sc.nA)]
        letters_b = [(y, b) for y in range(sc.nY) for b in range(sc.nB)]
        words_a = _words_up_to(letters_a, 3)
        words_b = _words_up_to(letters_b, 3)
        for wa in words_a:
            for wb in words_b:
                if len(wa) + len(wb) > 3:
                    continue
                f_s = evaluate_moment(S, Word("A", wa), Word("B", wb))
                f_t = evaluate_moment(T, Word("A", wa), Word("B", wb))
                moment_residual = max(moment_residual, abs(f_s - f_t))

    passed = (isometry_ok and aux_norm_residual <= tol.eps
              and max_residual <= tol.eps and rank_consistent
              and (moment_residual is None or moment_residual <= tol.eps))
    return DilationReport(
        passed=passed,
        max_residual=max_residual,
        residuals=residuals,
        isometry_ok=isometry_ok,
        aux_norm_residual=aux_norm_residual,
        schmidt_ranks=schmidt_ranks,
        rank_consistent=rank_consistent,
        moment_residual=moment_residual,
    )


def _words_up_to(letters, max_len: int):
    words = [()]
    level = [()]
    for _ in range(max_len):
        level = [w + (l,) for w in level for l in letters]
        words.extend(level)
    return words


class NotDilatable(RuntimeError):
    """No local dilation witness exists (or the search does not apply)."""

    def __init__(self, reason: str, obstruction: dict | None = None):
        super().__init__(reason)
        self.reason = reason
        self.obstruction = obstruction or {}


def _flat(family) -> list[np.ndarray]:
    return [op for povm in family for op in povm]


def find_local_dilation(S: QuantumModel, T: QuantumModel, seed: int = 0,
                        tol: Tolerance = DEFAULT_TOL) -> DilationWitness:
    """Construct a witness that the ideal model T is a local dilation of S.

    Requires T's associated representation to be irreducible on both sides
    (reducible targets raise NotDilatable).  Both sides of S are decomposed
    into (irrep (x) multiplicity) blocks; the state is expanded over block
    pairs, every supported component must carry the correlation and the same
    component state as T (rank-one cross-multiplicity structure, unit overlap
    after intertwining), and the block isometries are assembled with phases
    chosen so each component overlap with psi~ is real positive.  For blocks
    the state never touches, the isometry routes into the first standard
    basis vector of T's space.  When several assemblies exist (multiplicity
    on the auxiliary), the lexicographically-first one is returned.
    """
    if S.scenario != T.scenario:
        raise NotDilatable("models live in different scenarios")

    p_s = correlation_of(S, tol).p
    p_t = correlation_of(T, tol).p
    corr_gap = float(np.abs(p_s - p_t).max())
    if corr_gap > tol.eps * 10:
        raise NotDilatable(
            f"correlations differ (max gap {corr_gap:.3e}); a dilation preserves the correlation",
            {"kind": "correlation", "gap": corr_gap},
        )

    rank_s = schmidt_decompose(S.psi, S.dimA, S.dimB, tol).rank
    rank_t = schmidt_decompose(T.psi, T.dimA, T.dimB, tol).rank
    if rank_t == 0 or rank_s % rank_t != 0:
        raise NotDilatable(
            f"schmidt-rank obstruction: rank(psi)={rank_s} is not a multiple of "
            f"rank(psi~)={rank_t}, but isometries preserve Schmidt rank",
            {"kind": "schmidt-rank", "rank_psi": rank_s, "rank_psi_tilde": rank_t},
        )

    dec_ta = irrep_decompose(_flat(T.M), seed=seed + 2, tol=tol)
    dec_tb = irrep_decompose(_flat(T.N), seed=seed + 3, tol=tol)
    if not (dec_ta.irreducible and dec_tb.irreducible):
        raise NotDilatable(
            "ideal model's associated representation is reducible; the constructive "
            "search only applies to irreducible ideal models",
            {"kind": "reducible-ideal",
             "blocksA": [(b.n, b.m) for b in dec_ta.blocks],
             "blocksB": [(b.n, b.m) for b in dec_tb.blocks]},
        )

    dec_a = irrep_decompose(_flat(S.M), seed=seed, tol=tol)
    dec_b = irrep_decompose(_flat(S.N), seed=seed + 1, tol=tol)
    psi_mat = S.psi.reshape(S.dimA, S.dimB)
    weight_cut = 1e-12

    # per block pair: coefficient tensor reshaped to (irrep x irrep, mult x mult)
    comp: dict[tuple[int, int], dict] = {}
    for i, ba in enumerate(dec_a.blocks):
        for j, bb in enumerate(dec_b.blocks):
            c = dagger(ba.basis) @ psi_mat @ np.conj(bb.basis)
            mat = (c.reshape(ba.n, ba.m, bb.n, bb.m)
                   .transpose(0, 2, 1, 3).reshape(ba.n * bb.n, ba.m * bb.m))
            weight = float(np.linalg.norm(mat))
            if weight > weight_cut:
                comp[(i, j)] = {"mat": mat, "weight": weight}

    lam_a = sorted({i for i, _ in comp})
    lam_b = sorted({j for _, j in comp})

    # intertwiners from the supported irreps of S onto T's operators
    inter_a: dict[int, np.ndarray] = {}
    for i in lam_a:
        blk = dec_a.blocks[i]
        if blk.n != T.dimA:
            raise NotDilatable(
                f"A-side component {i} has irrep dimension {blk.n} != dim H~_A = {T.dimA}; "
                "its state component cannot equal the ideal state",
                {"kind": "component-state", "side": "A", "block": i},
            )
        u, res = _intertwiner(blk.generators, _flat(T.M), tol)
        if u is None or res > tol.eps * 100:
            raise NotDilatable(
                f"A-side component {i} is not unitarily equivalent to the ideal "
                f"representation (residual {res:.3e})",
                {"kind": "component-state", "side": "A", "block": i, "residual": res},
            )
        inter_a[i] = u
    inter_b: dict[int, np.ndarray] = {}
    for j in lam_b:
        blk = dec_b.blocks[j]
        if blk.n != T.dimB:
            raise NotDilatable(
                f"B-side component {j} has irrep dimension {blk.n} != dim H~_B = {T.dimB}",
                {"kind": "component-state", "side": "B", "block": j},
            )
        u, res = _intertwiner(blk.generators, _flat(T.N), tol)
        if u is None or res > tol.eps * 100:
            raise NotDilatable(
                f"B-side component {j} is not unitarily equivalent to the ideal "
                f"representation (residual {res:.3e})",
                {"kind": "component-state", "side": "B", "block": j, "residual": res},
            )
        inter_b[j] = u

    # auxiliary space offsets: supported blocks contribute their multiplicity
    # space, unreached blocks their whole subspace
    def aux_layout(dec, lam):
        offsets, off = {}, 0
        for idx, blk in enumerate(dec.blocks):
            size = blk.m if idx in lam else blk.n * blk.m
            offsets[idx] = (off, size)
            off += size
        return offsets, off

    aux_off_a, dim_aux_a = aux_layout(dec_a, lam_a)
    aux_off_b, dim_aux_b = aux_layout(dec_b, lam_b)

    # validate each supported component and collect the auxiliary state
    aux = np.zeros(dim_aux_a * dim_aux_b, dtype=complex)
    sc = S.scenario
    for (i, j), data in sorted(comp.items()):
        ba, bb = dec_a.blocks[i], dec_b.blocks[j]
        mat, weight = data["mat"], data["weight"]
        u_svd, svals, vh_svd = np.linalg.svd(mat)
        if len(svals) > 1 and svals[1] > max(100 * tol.eps, 1e-10) * svals[0]:
            raise NotDilatable(
                f"component ({i},{j}) carries several distinct states across its "
                f"multiplicity space (second singular value {svals[1]:.3e}); "
                "the component state differs from the ideal state",
                {"kind": "component-state", "block": (i, j), "sv_ratio": svals[1] / svals[0]},
            )
        psi_ij = u_svd[:, 0]
        kappa = svals[0] * vh_svd[0, :]  # mat = outer(psi_ij, kappa): lambda_ij |kappa_ij>

        comp_model = QuantumModel(
            scenario=sc, dimA=ba.n, dimB=bb.n,
            M=[[ba.generators[x * sc.nA + a] for a in range(sc.nA)] for x in range(sc.nX)],
            N=[[bb.generators[y * sc.nB + b] for b in range(sc.nB)] for y in range(sc.nY)],
            psi=psi_ij,
        )
        gap = float(np.abs(correlation_of(comp_model, Tolerance(1e-6)).p - p_t).max())
        if gap > max(100 * tol.eps, 1e-8):
            raise NotDilatable(
                f"component ({i},{j}) has correlation differing from p by {gap:.3e}",
                {"kind": "component-correlation", "block": (i, j), "gap": gap},
            )

        mapped = np.kron(inter_a[i], inter_b[j]) @ psi_ij
        overlap = complex(np.vdot(T.psi, mapped))
        if abs(abs(overlap) - 1.0) > 1e-7:
            raise NotDilatable(
                f"component ({i},{j}) state has overlap modulus {abs(overlap):.6f} with "
                "the ideal state; the component state differs from the ideal state",
                {"kind": "component-state", "block": (i, j), "overlap": abs(overlap)},
            )
        phase = overlap / abs(overlap)
        offa, _ = aux_off_a[i]
        offb, _ = aux_off_b[j]
        for k in range(ba.m):
            for l in range(bb.m):
                aux[(offa + k) * dim_aux_b + offb + l] += phase * kappa[k * bb.m + l]

    aux = aux / np.linalg.norm(aux)

    def assemble(dec, lam, inter, aux_off, dim_aux, tilde_dim, local_dim):
        iso = np.zeros((tilde_dim * dim_aux, local_dim), dtype=complex)
        col = 0
        for idx, blk in enumerate(dec.blocks):
            off, _ = aux_off[idx]
            if idx in lam:
                u = inter[idx]
                for r in range(blk.n):
                    for k in range(blk.m):
                        for p in range(tilde_dim):
                            iso[p * dim_aux + off + k, col + r * blk.m + k] = u[p, r]
            else:
                for c in range(blk.n * blk.m):
                    iso[0 * dim_aux + off + c, col + c] = 1.0
            col += blk.n * blk.m
        return iso

    ia = assemble(dec_a, lam_a, inter_a, aux_off_a, dim_aux_a, T.dimA, S.dimA)
    ib = assemble(dec_b, lam_b, inter_b, aux_off_b, dim_aux_b, T.dimB, S.dimB)
    ia = ia @ dagger(dec_a.change_of_basis())
    ib = ib @ dagger(dec_b.change_of_basis())
    return DilationWitness(IA=ia, IB=ib, aux=aux, dimAuxA=dim_aux_a, dimAuxB=dim_aux_b)


def compose_witnesses(w1: DilationWitness, w2: DilationWitness,
                      midA: int, midB: int) -> DilationWitness:
    """Witness for S >= T'' from witnesses S >= T' (w1) and T' >= T'' (w2).

    ``midA``/``midB`` are the local dimensions of the intermediate model T''
    maps out of, i.e. T'.dimA and T'.dimB.  Isometries compose and the
    auxiliary states tensor (new auxiliary = aux2 (x) aux1 on each side).
    """
    dTA2 = w2.IA.shape[0] // w2.dimAuxA
    dTB2 = w2.IB.shape[0] // w2.dimAuxB

    ia = np.kron(w2.IA, np.eye(w1.dimAuxA)) @ w1.IA
    ib = np.kron(w2.IB, np.eye(w1.dimAuxB)) @ w1.IB
    # rows of ia are (T''_A, aux2A, aux1A); target grouping (T''_A, aux2A (x) aux1A)
    # is the same composite index, so no reorder is needed on the isometries.
    if w2.IA.shape[1] != midA or w2.IB.shape[1] != midB:
        raise ValueError("intermediate dimensions do not match w2's domain")

    auxA = w2.dimAuxA * w1.dimAuxA
    auxB = w2.dimAuxB * w1.dimAuxB
    a2 = w2.aux.reshape(w2.dimAuxA, w2.dimAuxB)
    a1 = w1.aux.reshape(w1.dimAuxA, w1.dimAuxB)
    aux = np.einsum("ij,kl->ikjl", a2, a1).reshape(-1)
    return DilationWitness(IA=ia, IB=ib, aux=aux, dimAuxA=auxA, dimAuxB=auxB)
