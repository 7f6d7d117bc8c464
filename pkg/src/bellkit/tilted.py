"""Tilted-CHSH sum-of-squares certificates.

The tilted-CHSH functional eta = alpha*a0 + a0*b0 + a0*b1 + a1*b0 - a1*b1
(in the +-1-observable generators a_x = m^x_0 - m^x_1, b_y = n^y_0 - n^y_1)
has optimal value lam = sqrt(8 + 2*alpha^2) over all models, certified by two
explicit operator identities expressing 2*lam*(lam - eta) as a sum of squares
and manifestly positive terms.  The identities hold in the universal algebra,
i.e. for every valid model whatsoever; a model is optimal exactly when the
state annihilates every term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import DEFAULT_TOL, Tolerance, mat_norm
from .models import QuantumModel, Scenario

__all__ = [
    "NCPoly",
    "TiltedChshPolynomials",
    "tilted_chsh_build",
    "TiltedChshCertificate",
    "verify_tilted_sos",
    "optimal_tilted_model",
]

# generator indices in monomials
A0, A1, B0, B1 = 0, 1, 2, 3


class NCPoly:
    """Noncommutative polynomial in the four observables a0, a1, b0, b1.

    Stored as a monomial-to-coefficient map; monomials are tuples of
    generator indices.  No simplification is performed beyond merging equal
    monomials; commutation between the a and b letters only enters when a
    polynomial is evaluated on concrete operators.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, ...], float] = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff != 0.0:
                    self.terms[tuple(mono)] = float(coeff)

    @staticmethod
    def constant(c: float) -> "NCPoly":
        return NCPoly({(): c})

    @staticmethod
    def gen(idx: int) -> "NCPoly":
        return NCPoly({(idx,): 1.0})

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = NCPoly.constant(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0.0) + c
        return NCPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = NCPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return NCPoly.constant(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return NCPoly({m: c * other for m, c in self.terms.items()})
        out: dict[tuple[int, ...], float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = m1 + m2
                out[mono] = out.get(mono, 0.0) + c1 * c2
        return NCPoly(out)

    def __rmul__(self, other):
        return self * other

    def square(self) -> "NCPoly":
        return self * self

    def evaluate(self, gens: list[np.ndarray]) -> np.ndarray:
        """Substitute concrete matrices for the generators."""
        d = gens[0].shape[0]
        out = np.zeros((d, d), dtype=complex)
        for mono, coeff in self.terms.items():
            term = np.eye(d, dtype=complex)
            for idx in mono:
                term = term @ gens[idx]
            out += coeff * term
        return out

    def __repr__(self):
        return f"NCPoly({len(self.terms)} terms)"


@dataclass(frozen=True)
class TiltedChshPolynomials:
    """The functional and the twelve certificate polynomials for one alpha."""

    alpha: float
    lam: float
    delta: float
    eta: NCPoly
    r: tuple[NCPoly, NCPoly, NCPoly, NCPoly]
    s: tuple[NCPoly, ...]  # s1..s8

    def identity_sides(self) -> tuple[NCPoly, NCPoly, NCPoly]:
        """(LHS, RHS1, RHS2) of the two certificate identities.

        LHS = 2*lam*(lam - eta);
        RHS1 = r1^2 + r2^2 + (s1+s2+s3+s4)/2 + 2*(s5+s6);
        RHS2 = r3^2 + r4^2 + (s1+s2+s3+s4)/2
               + 2*(2-a0^2-a1^2)*(2-b0^2-b1^2)
               + (lam-alpha*(a0-a1))^2*(1-b0^2)/2
               + (lam-alpha*(a0+a1))^2*(1-b1^2)/2.
        """
        a0, a1, b0, b1 = (NCPoly.gen(i) for i in (A0, A1, B0, B1))
        r1, r2, r3, r4 = self.r
        s1, s2, s3, s4, s5, s6, _, _ = self.s
        lhs = 2 * self.lam * (NCPoly.constant(self.lam) - self.eta)
        rhs1 = (r1.square() + r2.square() + 0.5 * (s1 + s2 + s3 + s4) + 2 * (s5 + s6))
        w0 = NCPoly.constant(self.lam) - self.alpha * (a0 - a1)
        w1 = NCPoly.constant(self.lam) - self.alpha * (a0 + a1)
        rhs2 = (r3.square() + r4.square() + 0.5 * (s1 + s2 + s3 + s4)
                + 2 * (2 - a0.square() - a1.square()) * (2 - b0.square() - b1.square())
                + 0.5 * w0.square() * (1 - b0.square())
                + 0.5 * w1.square() * (1 - b1.square()))
        return lhs, rhs1, rhs2


def tilted_chsh_build(alpha: float) -> TiltedChshPolynomials:
    """Formal certificate polynomials for the tilted-CHSH family.

    Valid for 0 <= alpha < 2; lam = sqrt(8 + 2 alpha^2) and
    delta = sqrt(8 - 2 alpha^2).
    """
    if not 0 <= alpha < 2:
        raise ValueError(f"alpha must lie in [0, 2), got {alpha}")
    lam = math.sqrt(8 + 2 * alpha**2)
    delta = math.sqrt(8 - 2 * alpha**2)
    a0, a1, b0, b1 = (NCPoly.gen(i) for i in (A0, A1, B0, B1))

    eta = alpha * a0 + a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1
    r1 = NCPoly.constant(lam) - eta
    r2 = alpha * a1 - a0 * b0 + a0 * b1 - a1 * b0 - a1 * b1
    r3 = (2 * a0 - (lam / 2) * (b0 + b1)
          + (alpha / 2) * (a0 * b0 + a0 * b1 - a1 * b0 + a1 * b1))
    r4 = (2 * a1 - (lam / 2) * (b0 - b1)
          + (alpha / 2) * (a0 * b0 - a0 * b1 - a1 * b0 - a1 * b1))

    one = NCPoly.constant(1.0)
    s1 = (alpha + 2 * b0).square() * (one - a0.square())
    s2 = (alpha + 2 * b1).square() * (one - a0.square())
    s3 = (alpha - 2 * b0).square() * (one - a1.square())
    s4 = (alpha - 2 * b1).square() * (one - a1.square())
    s5 = (2 + a0 * a1 + a1 * a0) * (one - b0.square())
    s6 = (2 - a0 * a1 - a1 * a0) * (one - b1.square())
    s7 = (NCPoly.constant(lam) - alpha * (a0 - a1)) * (one - b0.square())
    s8 = (NCPoly.constant(lam) - alpha * (a0 + a1)) * (one - b1.square())

    return TiltedChshPolynomials(
        alpha=alpha, lam=lam, delta=delta, eta=eta,
        r=(r1, r2, r3, r4), s=(s1, s2, s3, s4, s5, s6, s7, s8),
    )


def _observable_generators(m) -> list[np.ndarray]:
    """[a0, a1, b0, b1] as matrices on the model's full space."""
    if isinstance(m, QuantumModel):
        eyeA, eyeB = np.eye(m.dimA), np.eye(m.dimB)
        return [
            np.kron(m.M[0][0] - m.M[0][1], eyeB),
            np.kron(m.M[1][0] - m.M[1][1], eyeB),
            np.kron(eyeA, m.N[0][0] - m.N[0][1]),
            np.kron(eyeA, m.N[1][0] - m.N[1][1]),
        ]
    return [
        m.M[0][0] - m.M[0][1],
        m.M[1][0] - m.M[1][1],
        m.N[0][0] - m.N[0][1],
        m.N[1][0] - m.N[1][1],
    ]


@dataclass
class TiltedChshCertificate:
    alpha: float
    lam: float
    delta: float
    f_eta: float
    identity_defects: tuple[float, float]
    state_residuals: dict[str, float]
    identities_ok: bool
    optimal: bool


def verify_tilted_sos(m, alpha: float, tol: Tolerance = DEFAULT_TOL) -> TiltedChshCertificate:
    """Evaluate the tilted-CHSH certificate on a concrete model.

    The two identity defects are operator norms of LHS - RHS and must vanish
    for every valid model, optimal or not.  The state residuals f(r_i^2) and
    f(s_j) are nonnegative and must all vanish exactly when f(eta) reaches
    lam, which is what ``optimal`` reports (at the given tolerance).
    """
    sc = m.scenario
    if sc != Scenario(2, 2, 2, 2):
        raise ValueError(f"tilted CHSH needs the (2,2,2,2) scenario, got {sc}")
    polys = tilted_chsh_build(alpha)
    gens = _observable_generators(m)
    psi = m.psi

    lhs_p, rhs1_p, rhs2_p = polys.identity_sides()
    lhs = lhs_p.evaluate(gens)
    defect1 = mat_norm(lhs - rhs1_p.evaluate(gens))
    defect2 = mat_norm(lhs - rhs2_p.evaluate(gens))

    f_eta = float(np.real(np.vdot(psi, polys.eta.evaluate(gens) @ psi)))
    residuals: dict[str, float] = {}
    for i, r in enumerate(polys.r, start=1):
        op = r.evaluate(gens)
        residuals[f"r{i}^2"] = float(np.real(np.vdot(op @ psi, op @ psi)))
    for j, s in enumerate(polys.s, start=1):
        op = s.evaluate(gens)
        residuals[f"s{j}"] = float(np.real(np.vdot(psi, op @ psi)))

    identities_ok = max(defect1, defect2) <= max(tol.eps, 1e-8)
    optimal = abs(f_eta - polys.lam) <= tol.eps
    return TiltedChshCertificate(
        alpha=alpha,
        lam=polys.lam,
        delta=polys.delta,
        f_eta=f_eta,
        identity_defects=(defect1, defect2),
        state_residuals=residuals,
        identities_ok=identities_ok,
        optimal=optimal,
    )


_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def _angles_model(params) -> QuantumModel:
    theta, ta0, ta1, tb0, tb1 = params
    psi = np.zeros(4)
    psi[0] = math.cos(theta)
    psi[3] = math.sin(theta)

    def povm(t):
        obs = math.cos(t) * _Z + math.sin(t) * _X
        return [(np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2]

    return QuantumModel(
        scenario=Scenario(2, 2, 2, 2), dimA=2, dimB=2,
        M=[povm(ta0), povm(ta1)], N=[povm(tb0), povm(tb1)], psi=psi,
    )


def _tilted_value(params, alpha: float) -> float:
    theta, ta0, ta1, tb0, tb1 = params
    c2t = math.cos(2 * theta)
    s2t = math.sin(2 * theta)

    def corr(ta, tb):
        # <psi| O(ta) (x) O(tb) |psi> for psi = cos t|00> + sin t|11>
        return math.cos(ta) * math.cos(tb) + s2t * math.sin(ta) * math.sin(tb)

    mean_a0 = math.cos(ta0) * c2t
    return (alpha * mean_a0 + corr(ta0, tb0) + corr(ta0, tb1)
            + corr(ta1, tb0) - corr(ta1, tb1))


def optimal_tilted_model(alpha: float, seed: int = 0) -> QuantumModel:
    """Optimal 2-qubit projective model for the tilted-CHSH functional.

    Seeded derivative-free search (Nelder-Mead with multistart) over the
    five-angle family: state cos(t)|00> + sin(t)|11>, observables
    cos(.)Z + sin(.)X on each side.  The returned model satisfies
    f(eta) = sqrt(8 + 2 alpha^2) to well below 1e-6.
    """
    if not 0 <= alpha < 2:
        raise ValueError(f"alpha must lie in [0, 2), got {alpha}")
    rng = np.random.default_rng(seed)
    s2t = math.sqrt((4 - alpha**2) / (4 + alpha**2))
    mu = math.atan(s2t)
    guesses = [np.array([0.5 * math.asin(s2t), 0.0, math.pi / 2, mu, -mu])]
    guesses += [rng.uniform(-math.pi, math.pi, size=5) for _ in range(4)]

    best = None
    for g in guesses:
        res = minimize(lambda p: -_tilted_value(p, alpha), g, method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-14, "maxiter": 20000})
        if best is None or res.fun < best.fun:
            best = res
    return _angles_model(best.x)
