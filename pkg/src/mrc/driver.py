"""Adaptive degree loop: grow the expansion until the boundary residual
falls below the target.

At each degree L the full system for degrees 0..L is assembled and solved
from scratch (the matrices are small); the loop stops at the first L whose
residual is <= epsilon, at L_max, or after a run of consecutive steps with
negligible improvement (default three; band-limited data orthogonal to the
low degrees produces long flat plateaus, so the patience is configurable). The residual history over nested bases is
non-increasing by construction, which is what makes "smallest such L"
well-defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import fields, geometry, harmonics, lsq
from .errors import ConfigError, SolverError

CONVERGED = "converged"
L_MAX_REACHED = "L_max_reached"
STAGNATED = "stagnated"


@dataclass(frozen=True)
class MrcConfig:
    """Parameters of an adaptive run; epsilon is in the same units as the
    discrete L2(S) norm of the data (reports also carry residual/||f||)."""

    epsilon: float
    L_start: int = 2
    L_step: int = 1
    L_max: int = 40
    svd_rtol: float = 1e-12
    stagnation_factor: float = 0.999
    stagnation_patience: int = 3

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 <= self.L_start <= self.L_max <= harmonics.ELL_MAX:
            raise ConfigError(
                f"need 0 <= L_start <= L_max <= {harmonics.ELL_MAX}, "
                f"got L_start={self.L_start}, L_max={self.L_max}"
            )
        if self.L_step < 1:
            raise ConfigError("L_step must be >= 1")
        if not 0 < self.stagnation_factor < 1:
            raise ConfigError("stagnation_factor must lie in (0, 1)")
        if self.stagnation_patience < 1:
            raise ConfigError("stagnation_patience must be >= 1")
        if not self.svd_rtol > 0:
            raise ConfigError("svd_rtol must be > 0")


@dataclass(frozen=True)
class DegreeRecord:
    """Diagnostics for one degree of the adaptive loop."""

    L: int
    residual_l2: float
    residual_rel: float
    sup_residual: float
    rank: int
    cond_estimate: float


@dataclass(frozen=True)
class SolveReport:
    history: tuple[DegreeRecord, ...]
    chosen_L: int | None
    coefficients: np.ndarray
    termination: str
    f_norm: float
    epsilon: float
    svd_rtol: float
    bc: str
    sigma: float
    rule_refined: bool
    fd_derivatives: bool
    field: fields.ExteriorField = dc_field(repr=False, default=None)

    @property
    def final_residual(self) -> float:
        return self.history[-1].residual_l2

    def to_dict(self) -> dict:
        return {
            "chosen_L": self.chosen_L,
            "termination": self.termination,
            "epsilon": self.epsilon,
            "svd_rtol": self.svd_rtol,
            "bc": self.bc,
            "sigma": self.sigma,
            "f_norm": self.f_norm,
            "final_residual": self.final_residual,
            "rule_refined": self.rule_refined,
            "fd_derivatives": self.fd_derivatives,
            "history": [
                {
                    "L": h.L,
                    "residual_l2": h.residual_l2,
                    "residual_rel": h.residual_rel,
                    "sup_residual": h.sup_residual,
                    "rank": h.rank,
                    "cond_estimate": h.cond_estimate,
                }
                for h in self.history
            ],
            "coefficients": [
                {"ell": int(ell), "m": int(m), "value": float(v)}
                for (ell, m), v in zip(
                    (harmonics.unflatten(k) for k in range(self.coefficients.shape[0])),
                    self.coefficients,
                )
            ],
        }


def run_mrc(spec: geometry.SurfaceSpec, rule: geometry.QuadratureRule,
            data: fields.BoundaryData, cfg: MrcConfig) -> SolveReport:
    """Adaptive fit of exterior harmonics to the boundary data.

    If the rule cannot resolve degrees up to L_max it is refined
    automatically (and the data resampled via its oracle); tabulated data
    without an oracle instead caps the effective L_max at what the rule
    resolves. Either adjustment is recorded in the report.
    """
    refined = False
    L_max = cfg.L_max
    if not rule.resolves(cfg.L_max):
        if data.oracle is not None:
            rule = geometry.build_quadrature(spec, cfg.L_max + 2, 2 * cfg.L_max + 2)
            data = fields.boundary_data_from_oracle(rule, data.oracle, data.bc, data.sigma)
            refined = True
        else:
            L_max = min(rule.n_theta - 1, (rule.n_phi - 1) // 2)
            if L_max < cfg.L_start:
                raise ConfigError(
                    "quadrature rule cannot resolve L_start and tabulated data cannot be resampled"
                )
            refined = True
    if data.values.shape[0] != rule.n_nodes:
        raise ValueError("boundary data length does not match the quadrature rule")

    r_min = geometry.inscribed_radius(spec)
    r_max = geometry.enclosing_radius(spec)
    need_grad = data.bc != lsq.DIRICHLET
    f_norm = float(np.sqrt(np.sum(rule.weights * data.values**2)))

    history: list[DegreeRecord] = []
    coeffs = np.zeros(1)
    termination = L_MAX_REACHED
    chosen_L = None
    stagnant_steps = 0
    prev_residual = None

    for L in range(cfg.L_start, L_max + 1, cfg.L_step):
        basis = harmonics.basis_on_nodes(L, rule, spec.center, gradients=need_grad)
        problem = lsq.assemble(rule, basis, data.values, data.bc, data.sigma)
        try:
            sol = lsq.solve(problem, cfg.svd_rtol)
        except SolverError:
            termination = STAGNATED
            break
        coeffs = sol.coefficients
        trial = fields.ExteriorField(spec.center, coeffs, r_min, r_max)
        history.append(
            DegreeRecord(
                L=L,
                residual_l2=sol.residual_l2,
                residual_rel=sol.residual_l2 / f_norm if f_norm > 0 else 0.0,
                sup_residual=fields.sup_residual(rule, trial, data),
                rank=sol.rank,
                cond_estimate=sol.cond_estimate,
            )
        )
        if sol.residual_l2 <= cfg.epsilon:
            chosen_L = L
            termination = CONVERGED
            break
        if prev_residual is not None and sol.residual_l2 > cfg.stagnation_factor * prev_residual:
            stagnant_steps += 1
            if stagnant_steps >= cfg.stagnation_patience:
                termination = STAGNATED
                break
        else:
            stagnant_steps = 0
        prev_residual = sol.residual_l2

    if not history:
        raise SolverError("adaptive loop terminated before completing a single solve")

    return SolveReport(
        history=tuple(history),
        chosen_L=chosen_L,
        coefficients=coeffs,
        termination=termination,
        f_norm=f_norm,
        epsilon=cfg.epsilon,
        svd_rtol=cfg.svd_rtol,
        bc=data.bc,
        sigma=data.sigma,
        rule_refined=refined,
        fd_derivatives=spec.uses_fd_derivatives,
        field=fields.ExteriorField(spec.center, coeffs, r_min, r_max),
    )


def neumann_data_from_potential(spec: geometry.SurfaceSpec, rule: geometry.QuadratureRule,
                                z, q: float = 1.0) -> fields.BoundaryData:
    """Normal-derivative trace of the point source q/|x-z| on the surface."""
    fields.interior_source_or_raise(spec, z)
    return fields.boundary_data_from_oracle(rule, fields.PointSource(z, q), lsq.NEUMANN)
