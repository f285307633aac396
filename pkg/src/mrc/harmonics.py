"""Real orthonormal spherical harmonics and exterior harmonics.

Basis functions are Y_lm(theta, phi) on the unit sphere and their exterior
counterparts h_lm(x) = Y_lm(x/|x|) / |x|^(l+1), which are harmonic and decay
at infinity. Everything is real-valued: for m > 0 the azimuthal factor is
sqrt(2)*cos(m*phi), for m < 0 it is sqrt(2)*sin(|m|*phi). The normalization
is folded into the Legendre three-term recurrence so evaluation is stable up
to degree 64; no Condon-Shortley phase is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Hard cap on the expansion degree. r^(l+1) dynamic range wrecks the
# conditioning of any fit long before this.
ELL_MAX = 64

_SQRT2 = math.sqrt(2.0)


def n_terms(ell_max: int) -> int:
    """Number of (l, m) pairs with 0 <= l <= ell_max."""
    return (ell_max + 1) ** 2


def flatten(ell: int, m: int) -> int:
    """Flat index k = l^2 + m + l; degrees 0..L occupy 0..(L+1)^2-1."""
    if ell < 0 or abs(m) > ell:
        raise ValueError(f"invalid harmonic index (ell={ell}, m={m})")
    return ell * ell + m + ell


def unflatten(k: int) -> tuple[int, int]:
    """Inverse of :func:`flatten`."""
    if k < 0:
        raise ValueError(f"invalid flat index {k}")
    ell = math.isqrt(k)
    return ell, k - ell * ell - ell


def degrees(ell_max: int) -> np.ndarray:
    """Array mapping flat index -> degree l, for 0 <= l <= ell_max."""
    ells = np.empty(n_terms(ell_max), dtype=int)
    for ell in range(ell_max + 1):
        ells[ell * ell : (ell + 1) ** 2] = ell
    return ells


def _recurrence_coeffs(ell_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the fully normalized associated Legendre recurrence.

    P[m, m](x) = a[m, m] * (1 - x^2)^(m/2)
    P[l, m](x) = a[l, m] * x * P[l-1, m] + b[l, m] * P[l-2, m]

    with the sphere normalization (including the 1/sqrt(4*pi)) built into
    a[m, m], so that the real harmonics assembled from these are orthonormal.
    """
    a = np.zeros((ell_max + 1, ell_max + 1))
    b = np.zeros((ell_max + 1, ell_max + 1))
    for m in range(ell_max + 1):
        amm = 1.0
        for k in range(1, m + 1):
            amm *= (2 * k + 1) / (2 * k)
        a[m, m] = math.sqrt(amm / (4.0 * math.pi))
        for ell in range(m + 1, ell_max + 1):
            a[ell, m] = math.sqrt((4 * ell * ell - 1) / (ell * ell - m * m))
            if ell > m + 1:
                b[ell, m] = -math.sqrt(
                    (2 * ell + 1)
                    * ((ell - 1) ** 2 - m * m)
                    / ((2 * ell - 3) * (ell * ell - m * m))
                )
    return a, b


def _check_ell_max(ell_max: int) -> None:
    if not 0 <= ell_max <= ELL_MAX:
        raise ValueError(f"ell_max must be in [0, {ELL_MAX}], got {ell_max}")


def ylm(
    ell_max: int,
    theta: np.ndarray,
    phi: np.ndarray,
    derivatives: bool = False,
) -> tuple[np.ndarray, ...]:
    """Evaluate all Y_lm with l <= ell_max at angles (theta, phi).

    Returns (Y,) or (Y, dY/dtheta, dY/dphi); each array has shape
    (n_points, (ell_max+1)^2) in flat index order. Derivative evaluation
    at a pole (sin(theta) = 0) is refused: the 1/sin(theta) factors are
    only finite away from the poles, which quadrature nodes guarantee.
    """
    _check_ell_max(ell_max)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    x = np.cos(theta)
    s = np.sin(theta)
    if derivatives and np.any(np.abs(s) < 1e-13):
        raise ValueError("angular derivatives are singular at the poles")

    a, b = _recurrence_coeffs(ell_max)
    n = theta.shape[0]
    K = n_terms(ell_max)
    Y = np.zeros((n, K))
    if derivatives:
        dYdt = np.zeros((n, K))
        dYdp = np.zeros((n, K))

    for m in range(ell_max + 1):
        if m > 0:
            az_c = _SQRT2 * np.cos(m * phi)
            az_s = _SQRT2 * np.sin(m * phi)
        p_prev = np.zeros(n)  # P[l-1, m]
        p = a[m, m] * s**m
        for ell in range(m, ell_max + 1):
            if ell > m:
                p_new = a[ell, m] * x * p + b[ell, m] * p_prev
                p_prev, p = p, p_new
            if m == 0:
                Y[:, flatten(ell, 0)] = p
            else:
                Y[:, flatten(ell, m)] = p * az_c
                Y[:, flatten(ell, -m)] = p * az_s
            if derivatives:
                # dP/dtheta = (l*x*P[l,m] - c*P[l-1,m]) / sin(theta)
                c = math.sqrt((2 * ell + 1) / (2 * ell - 1) * (ell * ell - m * m)) if ell > 0 else 0.0
                dp = (ell * x * p - c * p_prev) / s
                if m == 0:
                    dYdt[:, flatten(ell, 0)] = dp
                else:
                    k_pos = flatten(ell, m)
                    k_neg = flatten(ell, -m)
                    dYdt[:, k_pos] = dp * az_c
                    dYdt[:, k_neg] = dp * az_s
                    dYdp[:, k_pos] = -m * p * az_s
                    dYdp[:, k_neg] = m * p * az_c

    if derivatives:
        return Y, dYdt, dYdp
    return (Y,)


def _angles_of(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(r, theta, phi) of Cartesian points, shape (n, 3)."""
    r = np.linalg.norm(points, axis=1)
    if np.any(r == 0.0):
        raise ValueError("evaluation at the expansion center is singular")
    theta = np.arccos(np.clip(points[:, 2] / r, -1.0, 1.0))
    phi = np.arctan2(points[:, 1], points[:, 0])
    return r, theta, phi


def eval_Y(ell_max: int, alpha) -> np.ndarray:
    """All Y_lm at unit direction(s) alpha; |alpha| must be 1 to 1e-12."""
    alpha = np.asarray(alpha, dtype=float)
    single = alpha.ndim == 1
    alpha = np.atleast_2d(alpha)
    norms = np.linalg.norm(alpha, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValueError("alpha must be a unit vector (|alpha| = 1 to 1e-12)")
    _, theta, phi = _angles_of(alpha)
    (Y,) = ylm(ell_max, theta, phi)
    return Y[0] if single else Y


def eval_h(ell_max: int, x, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Exterior harmonics h_lm(x) = Y_lm((x-c)/r) / r^(l+1), r = |x-c|."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x) - np.asarray(center, dtype=float)
    r, theta, phi = _angles_of(pts)
    (Y,) = ylm(ell_max, theta, phi)
    h = Y / r[:, None] ** (degrees(ell_max)[None, :] + 1)
    return h[0] if single else h


def eval_grad_h(ell_max: int, x, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Cartesian gradients of all h_lm at x; shape (n, K, 3) or (K, 3).

    Assembled in spherical components about the center:
    radial -(l+1)*Y/r^(l+2), polar (dY/dtheta)/r^(l+2), azimuthal
    (dY/dphi)/(sin(theta)*r^(l+2)).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x) - np.asarray(center, dtype=float)
    r, theta, phi = _angles_of(pts)
    Y, dYdt, dYdp = ylm(ell_max, theta, phi, derivatives=True)

    s, c = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    rhat = np.stack([s * cp, s * sp, c], axis=1)
    that = np.stack([c * cp, c * sp, -s], axis=1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)

    ells = degrees(ell_max)
    rpow = r[:, None] ** (ells[None, :] + 2)
    rad = -(ells[None, :] + 1) * Y / rpow
    pol = dYdt / rpow
    azi = dYdp / (s[:, None] * rpow)

    grad = (
        rad[:, :, None] * rhat[:, None, :]
        + pol[:, :, None] * that[:, None, :]
        + azi[:, :, None] * phat[:, None, :]
    )
    return grad[0] if single else grad


@dataclass(frozen=True)
class BasisEvaluation:
    """Exterior harmonics tabulated at a fixed set of surface nodes.

    values[i, k] = h_k(x_i); gradients[i, k, :] = grad h_k(x_i) when built
    with gradients=True (required for Neumann/Robin assembly).
    """

    ell_max: int
    values: np.ndarray
    gradients: np.ndarray | None = None


def basis_on_nodes(ell_max: int, rule, center, gradients: bool = False) -> BasisEvaluation:
    """Tabulate h_lm (and optionally their gradients) at quadrature nodes.

    Uses the rule's (theta, phi) directly, so node angles and basis angles
    agree exactly.
    """
    _check_ell_max(ell_max)
    r = np.linalg.norm(rule.points - np.asarray(center, dtype=float), axis=1)
    out = ylm(ell_max, rule.theta, rule.phi, derivatives=gradients)
    ells = degrees(ell_max)
    values = out[0] / r[:, None] ** (ells[None, :] + 1)
    if not gradients:
        return BasisEvaluation(ell_max=ell_max, values=values)

    Y, dYdt, dYdp = out
    s, c = np.sin(rule.theta), np.cos(rule.theta)
    sp, cp = np.sin(rule.phi), np.cos(rule.phi)
    rhat = np.stack([s * cp, s * sp, c], axis=1)
    that = np.stack([c * cp, c * sp, -s], axis=1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
    rpow = r[:, None] ** (ells[None, :] + 2)
    rad = -(ells[None, :] + 1) * Y / rpow
    pol = dYdt / rpow
    azi = dYdp / (s[:, None] * rpow)
    grad = (
        rad[:, :, None] * rhat[:, None, :]
        + pol[:, :, None] * that[:, None, :]
        + azi[:, :, None] * phat[:, None, :]
    )
    return BasisEvaluation(ell_max=ell_max, values=values, gradients=grad)
