"""Support projections, support models, and the centrally-supported property.

Two independent criteria for being centrally supported are implemented: the
defining commutator condition ``[Pi_A, M] = [Pi_B, N] = 0``, and the
transfer condition that every A-operator can be moved across the state onto
the B side (and vice versa).  They must agree on every input; the test suite
enforces this on a large fixture corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, Tolerance, dagger, mat_norm
from .models import QuantumModel
from .schmidt import SchmidtDecomposition, schmidt_decompose

__all__ = ["SupportData", "support_of", "is_centrally_supported_via_transfer"]


@dataclass(frozen=True)
class SupportData:
    PiA: np.ndarray
    PiB: np.ndarray
    supportModel: QuantumModel
    centrally_supported: bool
    commutator_residuals: dict[str, float]
    schmidt: SchmidtDecomposition


def _compress(op: np.ndarray, basis: np.ndarray) -> np.ndarray:
    t = dagger(basis) @ op @ basis
    return (t + dagger(t)) / 2  # scrub fp drift before POVM validation


def support_of(m: QuantumModel, tol: Tolerance = DEFAULT_TOL) -> SupportData:
    """Support projections and the compressed support model.

    The support model's dimensions equal the Schmidt rank of psi and its
    operators are the compressions ``Pi M Pi`` written in the Schmidt bases.
    The model is centrally supported iff every commutator residual
    ``||[Pi_A, M^x_a]||`` and ``||[Pi_B, N^y_b]||`` vanishes within tolerance.
    """
    sd = schmidt_decompose(m.psi, m.dimA, m.dimB, tol)
    basisA, basisB = sd.left, sd.right
    PiA = basisA @ dagger(basisA)
    PiB = basisB @ dagger(basisB)

    residuals: dict[str, float] = {}
    worst = 0.0
    for x, povm in enumerate(m.M):
        for a, op in enumerate(povm):
            r = mat_norm(PiA @ op - op @ PiA)
            residuals[f"[PiA,M[{x}][{a}]]"] = r
            worst = max(worst, r)
    for y, povm in enumerate(m.N):
        for b, op in enumerate(povm):
            r = mat_norm(PiB @ op - op @ PiB)
            residuals[f"[PiB,N[{y}][{b}]]"] = r
            worst = max(worst, r)

    psi_small = np.einsum("ai,ab,bj->ij", basisA.conj(), m.psi.reshape(m.dimA, m.dimB),
                          basisB.conj()).reshape(-1)
    psi_small = psi_small / np.linalg.norm(psi_small)
    support_model = QuantumModel(
        scenario=m.scenario,
        dimA=sd.rank,
        dimB=sd.rank,
        M=[[_compress(op, basisA) for op in povm] for povm in m.M],
        N=[[_compress(op, basisB) for op in povm] for povm in m.N],
        psi=psi_small,
    )
    return SupportData(
        PiA=PiA,
        PiB=PiB,
        supportModel=support_model,
        centrally_supported=bool(worst <= tol.eps),
        commutator_residuals=residuals,
        schmidt=sd,
    )


def _best_transfer_residual(op: np.ndarray, psi_mat: np.ndarray, side: str) -> float:
    """min_X || (op (x) Id) psi - (Id (x) X) psi || (side A; mirrored for B).

    The unknown acts on the opposite factor; the minimization is a linear
    least-squares problem in vec(X).
    """
    if side == "A":
        target = (op @ psi_mat).reshape(-1)
        dB = psi_mat.shape[1]
        # (Id (x) X) psi  has (i,j) component  sum_k X[j,k] psi[i,k]
        design = np.zeros((psi_mat.size, dB * dB), dtype=complex)
        for j in range(dB):
            for k in range(dB):
                design[j::dB, j * dB + k] = psi_mat[:, k]
    else:
        target = (psi_mat @ op.T).reshape(-1)
        dA = psi_mat.shape[0]
        # (X (x) Id) psi  has (i,j) component  sum_k X[i,k] psi[k,j]
        dB = psi_mat.shape[1]
        design = np.zeros((psi_mat.size, dA * dA), dtype=complex)
        for i in range(dA):
            for k in range(dA):
                design[i * dB:(i + 1) * dB, i * dA + k] = psi_mat[k, :]
    sol, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    return float(np.linalg.norm(design @ sol - target))


def is_centrally_supported_via_transfer(m: QuantumModel, tol: Tolerance = DEFAULT_TOL):
    """Transfer-criterion verdict plus the per-operator defect norms.

    For each measurement operator the least-squares problem
    ``min_X ||(M (x) Id - Id (x) X) psi||`` is solved (and symmetrically for
    N); the model is centrally supported iff every optimal residual vanishes.
    Agrees with ``support_of(m).centrally_supported`` on all inputs.
    """
    psi_mat = m.psi.reshape(m.dimA, m.dimB)
    residuals: dict[str, float] = {}
    worst = 0.0
    for x, povm in enumerate(m.M):
        for a, op in enumerate(povm):
            r = _best_transfer_residual(op, psi_mat, "A")
            residuals[f"transfer M[{x}][{a}]"] = r
            worst = max(worst, r)
    for y, povm in enumerate(m.N):
        for b, op in enumerate(povm):
            r = _best_transfer_residual(op, psi_mat, "B")
            residuals[f"transfer N[{y}][{b}]"] = r
            worst = max(worst, r)
    return bool(worst <= tol.eps), residuals
