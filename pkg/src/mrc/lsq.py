"""Weighted least-squares fitting of exterior harmonics to boundary data.

The discrete functional is the quadrature approximation of the squared
L2(S) misfit; scaling rows of the design matrix and right-hand side by
sqrt(w_i) makes ||A c - b||_2 equal that norm exactly. The solve is a
dense SVD with relative truncation: small matrices, severe ill-conditioning
on nonspherical surfaces, and the adaptive loop wants the spectrum anyway.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .harmonics import BasisEvaluation, unflatten

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
ROBIN = "robin"
BC_KINDS = (DIRICHLET, NEUMANN, ROBIN)


@dataclass(frozen=True)
class LsqProblem:
    """sqrt(w)-scaled design matrix, right-hand side, and column index map."""

    matrix: np.ndarray  # (n_nodes, n_cols)
    rhs: np.ndarray  # (n_nodes,)
    indices: tuple  # flat column k -> (ell, m)
    sqrt_w: np.ndarray  # (n_nodes,) row scaling, kept for diagnostics


@dataclass(frozen=True)
class LsqSolution:
    coefficients: np.ndarray
    residual_l2: float
    singular_values: np.ndarray
    rank: int
    cond_estimate: float


def assemble(rule, basis: BasisEvaluation, values: np.ndarray, bc: str = DIRICHLET,
             sigma: float = 0.0) -> LsqProblem:
    """Build the weighted system for the given boundary-condition kind.

    Columns: Dirichlet h_k(x_i); Neumann n_i . grad h_k(x_i); Robin
    n_i . grad h_k(x_i) + sigma * h_k(x_i). All rows carry sqrt(w_i).
    """
    if bc not in BC_KINDS:
        raise ValueError(f"unknown boundary condition {bc!r}")
    values = np.asarray(values, dtype=float)
    if values.shape[0] != rule.n_nodes or basis.values.shape[0] != rule.n_nodes:
        raise ValueError("node count mismatch between rule, basis, and data")

    if bc == DIRICHLET:
        cols = basis.values
    else:
        if basis.gradients is None:
            raise ValueError(f"{bc} assembly requires basis gradients")
        cols = np.einsum("ij,ikj->ik", rule.normals, basis.gradients)
        if bc == ROBIN:
            if sigma < 0:
                raise ValueError("Robin coefficient must be >= 0")
            cols = cols + sigma * basis.values

    sw = np.sqrt(rule.weights)
    indices = tuple(unflatten(k) for k in range(basis.values.shape[1]))
    return LsqProblem(matrix=cols * sw[:, None], rhs=values * sw, indices=indices, sqrt_w=sw)


def solve(problem: LsqProblem, svd_rtol: float = 1e-12) -> LsqSolution:
    """Truncated-SVD minimum-norm least squares.

    Singular values below svd_rtol * sigma_max are discarded; the solution
    is the minimum-norm minimizer over the retained subspace. The reported
    residual is ||A c - b||_2 recomputed from the returned coefficients.
    """
    A, b = problem.matrix, problem.rhs
    if A.size == 0:
        raise SolverError("empty system")
    if A.shape[0] < A.shape[1]:
        warnings.warn(
            f"underdetermined system ({A.shape[0]} rows < {A.shape[1]} cols)",
            stacklevel=2,
        )
    U, svals, Vt = np.linalg.svd(A, full_matrices=False)
    keep = svals >= svd_rtol * svals[0] if svals[0] > 0 else np.zeros_like(svals, bool)
    rank = int(keep.sum())
    if rank == 0:
        raise SolverError("all singular values fall below the truncation threshold")

    proj = U[:, keep].T @ b
    c = Vt[keep].T @ (proj / svals[keep])
    residual = float(np.linalg.norm(A @ c - b))
    return LsqSolution(
        coefficients=c,
        residual_l2=residual,
        singular_values=svals,
        rank=rank,
        cond_estimate=float(svals[0] / svals[keep][-1]),
    )
