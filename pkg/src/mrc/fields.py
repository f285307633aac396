"""Exterior field evaluation, exact-solution oracles, and error metrics.

An ExteriorField is the truncated expansion sum_k c_k h_k(x). Oracles are
harmonic functions with closed forms (a point source q/|x-z| with z inside
the surface, or an explicit band-limited expansion) used to manufacture
boundary data and measure true errors. The point-source convention is
q/|x-z| with no 4*pi factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import geometry, harmonics
from .errors import ConfigError
from .lsq import DIRICHLET, NEUMANN, ROBIN, BC_KINDS


@dataclass(frozen=True)
class ExteriorField:
    """Truncated exterior-harmonic expansion about `center`.

    Evaluation is refused inside the inscribed sphere (radius r_min): the
    expansion is only controlled in the exterior of the surface.
    """

    center: tuple[float, float, float]
    coefficients: np.ndarray
    r_min: float
    r_max: float

    @property
    def ell_max(self) -> int:
        ell = math.isqrt(self.coefficients.shape[0]) - 1
        if harmonics.n_terms(ell) != self.coefficients.shape[0]:
            raise ValueError("coefficient vector length is not a perfect square")
        return ell

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        r = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        if np.any(r < self.r_min * (1.0 - 1e-12)):
            raise ValueError("evaluation point inside the inscribed sphere")
        h = harmonics.eval_h(self.ell_max, pts, self.center)
        v = h @ self.coefficients
        return float(v[0]) if single else v

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        r = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        if np.any(r < self.r_min * (1.0 - 1e-12)):
            raise ValueError("evaluation point inside the inscribed sphere")
        g = np.einsum("ikj,k->ij", harmonics.eval_grad_h(self.ell_max, pts, self.center), self.coefficients)
        return g[0] if single else g


class PointSource:
    """Harmonic oracle v(x) = q / |x - z| for a source z inside the surface."""

    kind = "point_source"

    def __init__(self, z, q: float = 1.0):
        self.z = np.asarray(z, dtype=float)
        self.q = float(q)

    def __call__(self, x) -> np.ndarray:
        d = np.atleast_2d(np.asarray(x, dtype=float)) - self.z
        return self.q / np.linalg.norm(d, axis=1)

    def gradient(self, x) -> np.ndarray:
        d = np.atleast_2d(np.asarray(x, dtype=float)) - self.z
        return -self.q * d / np.linalg.norm(d, axis=1)[:, None] ** 3


class BandLimited:
    """Harmonic oracle given by an explicit finite expansion about `center`."""

    kind = "band_limited"

    def __init__(self, coefficients, center=(0.0, 0.0, 0.0)):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.center = tuple(center)
        ell = math.isqrt(self.coefficients.shape[0]) - 1
        if harmonics.n_terms(ell) != self.coefficients.shape[0]:
            raise ValueError("coefficient vector length is not a perfect square")
        self.ell_max = ell

    def __call__(self, x) -> np.ndarray:
        return harmonics.eval_h(self.ell_max, np.atleast_2d(x), self.center) @ self.coefficients

    def gradient(self, x) -> np.ndarray:
        g = harmonics.eval_grad_h(self.ell_max, np.atleast_2d(x), self.center)
        return np.einsum("ikj,k->ij", g, self.coefficients)


@dataclass(frozen=True)
class BoundaryData:
    """Boundary trace samples at quadrature nodes plus the condition kind.

    `oracle` is kept when the data came from a closed form, so the driver
    can resample after refining the quadrature rule.
    """

    bc: str
    values: np.ndarray
    sigma: float = 0.0
    oracle: object | None = None

    def __post_init__(self):
        if self.bc not in BC_KINDS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")


def boundary_data_from_oracle(rule, oracle, bc: str = DIRICHLET, sigma: float = 0.0) -> BoundaryData:
    """Sample the trace of an oracle on the rule's nodes for the given bc."""
    if bc == DIRICHLET:
        f = oracle(rule.points)
    elif bc == NEUMANN:
        f = np.einsum("ij,ij->i", rule.normals, oracle.gradient(rule.points))
    elif bc == ROBIN:
        f = np.einsum("ij,ij->i", rule.normals, oracle.gradient(rule.points)) + sigma * oracle(rule.points)
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return BoundaryData(bc=bc, values=np.asarray(f, dtype=float), sigma=sigma, oracle=oracle)


def multipole_coefficients(z, q: float, ell_max: int, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Expansion of q/|x-z| about `center` in exterior harmonics.

    c_lm = q * 4*pi/(2l+1) * |z-c|^l * Y_lm((z-c)/|z-c|), valid for
    |x-c| > |z-c|. For z at the center only the l=0 term survives.
    Validated in the test suite against direct quadrature projection.
    """
    d = np.asarray(z, dtype=float) - np.asarray(center, dtype=float)
    rz = float(np.linalg.norm(d))
    c = np.zeros(harmonics.n_terms(ell_max))
    if rz == 0.0:
        c[0] = q * math.sqrt(4.0 * math.pi)
        return c
    Y = harmonics.eval_Y(ell_max, d / rz)
    ells = harmonics.degrees(ell_max)
    return q * 4.0 * math.pi / (2 * ells + 1) * rz**ells * Y


class SphereError(NamedTuple):
    l2: float
    sup: float


def error_on_enclosing_sphere(field: ExteriorField, oracle, R: float,
                              n_theta: int = 64, n_phi: int = 128) -> SphereError:
    """L2 and node-sup error of the field against the oracle on |x-c| = R."""
    if R < field.r_max:
        raise ValueError(f"sphere radius {R} does not enclose the surface (r_max={field.r_max})")
    rule = geometry.build_quadrature(geometry.SurfaceSpec.sphere(R, field.center), n_theta, n_phi)
    diff = field(rule.points) - np.asarray(oracle(rule.points), dtype=float)
    return SphereError(
        l2=float(np.sqrt(np.sum(rule.weights * diff**2))),
        sup=float(np.max(np.abs(diff))),
    )


def sup_residual(rule, field: ExteriorField, data: BoundaryData) -> float:
    """Node-max boundary misfit of the fitted field (C(S)-norm diagnostic)."""
    if data.bc == DIRICHLET:
        trace = field(rule.points)
    else:
        trace = np.einsum("ij,ij->i", rule.normals, field.gradient(rule.points))
        if data.bc == ROBIN:
            trace = trace + data.sigma * field(rule.points)
    return float(np.max(np.abs(trace - data.values)))


def interior_source_or_raise(spec, z) -> np.ndarray:
    """Validate that z lies strictly inside the inscribed sphere of spec."""
    z = np.asarray(z, dtype=float)
    if np.linalg.norm(z - np.asarray(spec.center)) >= geometry.inscribed_radius(spec):
        raise ConfigError("source point must lie inside the inscribed sphere")
    return z
