"""Model and correlation data types, validation, and the abstract state.

A quantum model is a pair of local POVM families plus a bipartite pure state;
a commuting model puts both families on one space and requires them to
commute.  Word moments ``<psi| M^{x1}_{a1}...  (x) N^{y1}_{b1}... |psi>`` are
the single currency for everything observable: correlations are just the
degree-(1,1) moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, as_vector, dagger, mat_norm
from .schmidt import SUPPORT_RANK_CUT

__all__ = [
    "Scenario",
    "QuantumModel",
    "CommutingModel",
    "Correlation",
    "Word",
    "ModelFlags",
    "Violation",
    "ValidationReport",
    "validate_quantum_model",
    "validate_commuting_model",
    "validate_model",
    "correlation_of",
    "evaluate_moment",
    "moments_agree_up_to",
    "classify",
    "is_projective_state",
]


@dataclass(frozen=True)
class Scenario:
    """Input/output alphabet sizes of a bipartite Bell scenario."""

    nX: int
    nY: int
    nA: int
    nB: int

    def __post_init__(self):
        if min(self.nX, self.nY, self.nA, self.nB) < 1:
            raise ValueError(f"scenario counts must be >= 1: {self}")


def _family(ops) -> list[list[np.ndarray]]:
    return [[as_matrix(m) for m in povm] for povm in ops]


@dataclass(frozen=True)
class QuantumModel:
    """Tensor-product model: local POVMs M[x][a], N[y][b] and a joint state.

    ``psi`` lives on the composite space with index ``i_A * dimB + i_B``.
    """

    scenario: Scenario
    dimA: int
    dimB: int
    M: list[list[np.ndarray]]
    N: list[list[np.ndarray]]
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", _family(self.M))
        object.__setattr__(self, "N", _family(self.N))
        object.__setattr__(self, "psi", as_vector(self.psi))

    @property
    def kind(self) -> str:
        return "tensor"


@dataclass(frozen=True)
class CommutingModel:
    """Single-space model with mutually commuting measurement families."""

    scenario: Scenario
    dim: int
    M: list[list[np.ndarray]]
    N: list[list[np.ndarray]]
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", _family(self.M))
        object.__setattr__(self, "N", _family(self.N))
        object.__setattr__(self, "psi", as_vector(self.psi))

    @property
    def kind(self) -> str:
        return "commuting"


@dataclass(frozen=True)
class Correlation:
    """Outcome table p[a, b, x, y]; rows sum to 1 for every setting pair."""

    scenario: Scenario
    p: np.ndarray
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        sc = self.scenario
        if p.shape != (sc.nA, sc.nB, sc.nX, sc.nY):
            raise ValueError(f"correlation table shape {p.shape} does not match {sc}")
        object.__setattr__(self, "p", p)

    def value(self, a, b, x, y) -> float:
        return float(self.p[a, b, x, y])


@dataclass(frozen=True)
class Word:
    """Formal product of one side's generators; empty letters = identity."""

    side: str  # "A" or "B"
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {self.side!r}")
        object.__setattr__(self, "letters", tuple((int(x), int(a)) for x, a in self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def reversed(self) -> "Word":
        return Word(self.side, tuple(reversed(self.letters)))


@dataclass(frozen=True)
class ModelFlags:
    projective: bool
    full_rank: bool
    synchronous_scenario: bool
    binary: bool


@dataclass(frozen=True)
class Violation:
    name: str
    location: str
    residual: float

    def __str__(self):
        return f"{self.name} at {self.location}: residual {self.residual:.3e}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def add(self, name: str, location: str, residual: float):
        self.violations.append(Violation(name, location, float(residual)))

    def __str__(self):
        if self.valid:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


def _check_povm_family(rep: ValidationReport, ops, label: str, n_inputs: int,
                       n_outputs: int, dim: int, tol: Tolerance):
    if len(ops) != n_inputs:
        rep.add("family count", label, abs(len(ops) - n_inputs))
        return
    for x, povm in enumerate(ops):
        if len(povm) != n_outputs:
            rep.add("POVM outcome count", f"{label}[{x}]", abs(len(povm) - n_outputs))
            continue
        total = np.zeros((dim, dim), dtype=complex)
        for a, m in enumerate(povm):
            loc = f"{label}[{x}][{a}]"
            if m.shape != (dim, dim):
                rep.add("operator shape", loc, float(abs(m.shape[0] - dim)))
                return
            herm_res = mat_norm(m - dagger(m))
            if herm_res > tol.eps * (1 + mat_norm(m)):
                rep.add("hermiticity", loc, herm_res)
            else:
                min_eig = float(np.linalg.eigvalsh((m + dagger(m)) / 2).min())
                if min_eig < -tol.eps:
                    rep.add("positivity", loc, -min_eig)
            total = total + m
        comp_res = mat_norm(total - np.eye(dim))
        if comp_res > tol.eps * (1 + mat_norm(total)):
            rep.add("POVM completeness", f"{label}[{x}]", comp_res)


def validate_quantum_model(m: QuantumModel, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    """Every violated model invariant with its residual; valid iff none."""
    rep = ValidationReport()
    sc = m.scenario
    _check_povm_family(rep, m.M, "M", sc.nX, sc.nA, m.dimA, tol)
    _check_povm_family(rep, m.N, "N", sc.nY, sc.nB, m.dimB, tol)
    if len(m.psi) != m.dimA * m.dimB:
        rep.add("state dimension", "psi", abs(len(m.psi) - m.dimA * m.dimB))
    else:
        norm_res = abs(float(np.linalg.norm(m.psi)) - 1.0)
        if norm_res > tol.eps:
            rep.add("state normalization", "psi", norm_res)
    return rep


def validate_commuting_model(m: CommutingModel, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    rep = ValidationReport()
    sc = m.scenario
    _check_povm_family(rep, m.M, "M", sc.nX, sc.nA, m.dim, tol)
    _check_povm_family(rep, m.N, "N", sc.nY, sc.nB, m.dim, tol)
    if len(m.psi) != m.dim:
        rep.add("state dimension", "psi", abs(len(m.psi) - m.dim))
    else:
        norm_res = abs(float(np.linalg.norm(m.psi)) - 1.0)
        if norm_res > tol.eps:
            rep.add("state normalization", "psi", norm_res)
    for x, povm in enumerate(m.M):
        for a, ma in enumerate(povm):
            for y, qovm in enumerate(m.N):
                for b, nb in enumerate(qovm):
                    res = mat_norm(ma @ nb - nb @ ma)
                    if res > tol.eps * (1 + mat_norm(ma) * mat_norm(nb)):
                        rep.add("commutation", f"[M[{x}][{a}], N[{y}][{b}]]", res)
    return rep


def validate_model(m, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    if isinstance(m, QuantumModel):
        return validate_quantum_model(m, tol)
    if isinstance(m, CommutingModel):
        return validate_commuting_model(m, tol)
    raise TypeError(f"not a model: {type(m)}")


def _apply_word_vec(model, word: Word, vec: np.ndarray) -> np.ndarray:
    """pi(word) |vec| on the model's representation space."""
    out = vec
    tensor = isinstance(model, QuantumModel)
    for x, a in reversed(word.letters):  # rightmost letter acts first
        op = model.M[x][a] if word.side == "A" else model.N[x][a]
        if not tensor:
            out = op @ out
        elif word.side == "A":
            out = (op @ out.reshape(model.dimA, model.dimB)).reshape(-1)
        else:
            out = (out.reshape(model.dimA, model.dimB) @ op.T).reshape(-1)
    return out


def evaluate_moment(model, wA: Word, wB: Word) -> complex:
    """Abstract-state value f(wA (x) wB) = <psi| pi_A(wA) pi_B(wB) |psi>.

    Works for tensor and commuting models alike; empty words act as the
    identity, so ``evaluate_moment(m, Word("A"), Word("B")) == 1``.
    """
    if wA.side != "A" or wB.side != "B":
        raise ValueError("evaluate_moment expects an A-side and a B-side word")
    sc = model.scenario
    for x, a in wA.letters:
        if not (0 <= x < sc.nX and 0 <= a < sc.nA):
            raise IndexError(f"A-letter ({x},{a}) outside scenario {sc}")
    for y, b in wB.letters:
        if not (0 <= y < sc.nY and 0 <= b < sc.nB):
            raise IndexError(f"B-letter ({y},{b}) outside scenario {sc}")
    v = _apply_word_vec(model, wB, model.psi)
    v = _apply_word_vec(model, wA, v)
    return complex(np.vdot(model.psi, v))


def correlation_of(model, tol: Tolerance = DEFAULT_TOL) -> Correlation:
    """Correlation table of a valid model.

    Imaginary parts below tolerance are discarded and tiny negatives clamped
    to zero, renormalizing each (x,y) slice; the adjustments are recorded in
    ``Correlation.notes``.
    """
    sc = model.scenario
    p = np.zeros((sc.nA, sc.nB, sc.nX, sc.nY))
    max_imag = 0.0
    for x in range(sc.nX):
        for y in range(sc.nY):
            for a in range(sc.nA):
                for b in range(sc.nB):
                    val = evaluate_moment(model, Word("A", ((x, a),)), Word("B", ((y, b),)))
                    max_imag = max(max_imag, abs(val.imag))
                    p[a, b, x, y] = val.real
    if max_imag >= tol.eps:
        raise ValueError(
            f"correlation has residual imaginary part {max_imag:.3e}; model is not valid"
        )
    clamped = float(-min(p.min(), 0.0))
    if clamped > tol.eps:
        raise ValueError(f"correlation entry below -eps: {-clamped:.3e}; model is not valid")
    p = np.clip(p, 0.0, None)
    for x in range(sc.nX):
        for y in range(sc.nY):
            p[:, :, x, y] /= p[:, :, x, y].sum()
    return Correlation(sc, p, notes={"max_imag_discarded": max_imag,
                                     "max_negative_clamped": clamped})


def classify(m: QuantumModel, tol: Tolerance = DEFAULT_TOL) -> ModelFlags:
    """Structural flags of a valid quantum model."""
    projective = all(
        linalg.structural_predicates(op, tol).projection
        for fam in (m.M, m.N) for povm in fam for op in povm
    )
    rank = linalg.schmidt_rank_of_matrix(m.psi.reshape(m.dimA, m.dimB), SUPPORT_RANK_CUT)
    sc = m.scenario
    return ModelFlags(
        projective=projective,
        full_rank=(m.dimA == m.dimB and rank == m.dimA),
        synchronous_scenario=(sc.nX == sc.nY and sc.nA == sc.nB),
        binary=(sc.nA == 2 and sc.nB == 2),
    )


def moments_agree_up_to(m1, m2, max_length: int, tol: Tolerance = DEFAULT_TOL):
    """Compare all word moments of two models up to a combined degree cutoff.

    Heuristic pre-check only: agreement up to a finite degree does not prove
    state equality (no degree bound is known in general); disagreement
    disproves it.  Returns ``(agree, worst_gap)``.  The sound decision
    procedure is ``bellkit.reps.states_equal``.
    """
    if m1.scenario != m2.scenario:
        raise ValueError("moment comparison requires a common scenario")
    sc = m1.scenario
    letters_a = [(x, a) for x in range(sc.nX) for a in range(sc.nA)]
    letters_b = [(y, b) for y in range(sc.nY) for b in range(sc.nB)]

    def words(letters):
        out = [()]
        level = [()]
        for _ in range(max_length):
            level = [w + (l,) for w in level for l in letters]
            out.extend(level)
        return out

    worst = 0.0
    for wa in words(letters_a):
        for wb in words(letters_b):
            if len(wa) + len(wb) > max_length:
                continue
            gap = abs(evaluate_moment(m1, Word("A", wa), Word("B", wb))
                      - evaluate_moment(m2, Word("A", wa), Word("B", wb)))
            worst = max(worst, gap)
    return worst <= tol.eps * 2, worst


def is_projective_state(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether the abstract state of the model is projective.

    Tests f((m^x_a - (m^x_a)^2) (x) Id) = 0 and the B-side analogue for all
    generators, via linearity from word moments.  A non-projective POVM acting
    only outside the support of psi still yields True: the state cannot see it.
    """
    sc = m.scenario
    empty_b = Word("B")
    empty_a = Word("A")
    for x in range(sc.nX):
        for a in range(sc.nA):
            lin = evaluate_moment(m, Word("A", ((x, a),)), empty_b)
            sq = evaluate_moment(m, Word("A", ((x, a), (x, a))), empty_b)
            if not tol.is_zero(lin - sq):
                return False
    for y in range(sc.nY):
        for b in range(sc.nB):
            lin = evaluate_moment(m, empty_a, Word("B", ((y, b),)))
            sq = evaluate_moment(m, empty_a, Word("B", ((y, b), (y, b))))
            if not tol.is_zero(lin - sq):
                return False
    return True
