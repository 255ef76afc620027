"""RKHS elements and norms, pushforwards under integration, direct sums.

Two routes to a norm coexist: the spectral route through basis
coefficients (sum w_j^2 / lam_j over the eigenbasis) and analytic
derivative formulas for the Brownian-motion catalog members.  Derivatives
use finite differences throughout; tolerances downstream are set for
that.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import GridFunction, inner_l2
from .spectral import SpectralBasis, project, reconstruct


class NotInRkhsError(ValueError):
    """The candidate function lies outside the RKHS in question (the
    shifted law would be orthogonal, not equivalent)."""


@dataclass(frozen=True)
class RkhsElement:
    """Candidate RKHS function represented by basis coefficients."""

    basis: SpectralBasis
    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (self.basis.m,):
            raise ValueError(
                f"coefficients have shape {w.shape}, expected ({self.basis.m},)"
            )
        object.__setattr__(self, "w", w)
        w.setflags(write=False)

    def function(self) -> GridFunction:
        return reconstruct(self.w, self.basis)


def element_from_function(f: GridFunction, basis: SpectralBasis) -> RkhsElement:
    return RkhsElement(basis, project(f, basis))


def rkhs_norm_series(e: RkhsElement) -> float:
    """sqrt(sum_j w_j^2 / lam_j)."""
    return float(np.sqrt(np.sum(e.w**2 / e.basis.lam)))


def _deriv_sq_integral(f: GridFunction) -> float:
    # forward differences live on cells; the cell sum integrates the
    # squared piecewise-constant derivative exactly
    h = f.grid.h
    d = np.diff(f.values) / h
    return float(h * np.sum(d**2))


def rkhs_norm_bm(f: GridFunction) -> float:
    """Brownian-motion RKHS norm sqrt(int f'(t)^2 dt); needs f(0) = 0."""
    if abs(f.values[0]) > 1e-8:
        raise NotInRkhsError(
            f"f(0) = {f.values[0]:.3e} != 0: not in the Brownian-motion RKHS"
        )
    return float(np.sqrt(_deriv_sq_integral(f)))


def rkhs_norm_released(f: GridFunction) -> float:
    """Norm for Brownian motion released at zero:
    sqrt(f(0)^2 + int f'(t)^2 dt)."""
    return float(np.sqrt(f.values[0] ** 2 + _deriv_sq_integral(f)))


def rkhs_norm_intbm_released(f: GridFunction, k: int) -> float:
    """Norm for the k-fold integrated Brownian motion with released
    derivatives: sqrt(sum_{i<=k} f^(i)(0)^2 + int f^(k+1)(t)^2 dt).

    Derivatives by iterated central differences (one-sided at the
    endpoints), so the grid must resolve k+1 differentiations.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    n = f.grid.n
    if n < 50 * (k + 1):
        raise ValueError(
            f"grid too coarse for {k + 1} finite-difference derivatives: "
            f"n={n} < {50 * (k + 1)}"
        )
    h = f.grid.h
    g = f.values
    boundary_sq = g[0] ** 2
    for _ in range(k):
        g = np.gradient(g, h, edge_order=2)
        boundary_sq += g[0] ** 2
    g = np.gradient(g, h, edge_order=2)
    return float(np.sqrt(boundary_sq + np.dot(f.grid.weights, g**2)))


def pushforward_integrate(e: RkhsElement, k: int):
    """Image of the element under k-fold integration, with its RKHS norm.

    Integration is one-to-one continuous linear, so the norm of the image
    in the pushed-forward RKHS equals the norm of the element.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    vals = e.function().values
    h = e.basis.grid.h
    for _ in range(k):
        vals = cumulative_trapezoid(vals, dx=h, initial=0.0)
    return GridFunction(e.basis.grid, vals), rkhs_norm_series(e)


def direct_sum_norm(a_v: float, a_w: float) -> float:
    """Norm of h_V + h_W in the direct-sum RKHS of independent summands:
    sqrt(a_v^2 + a_w^2)."""
    if a_v < 0 or a_w < 0:
        raise ValueError(f"summand norms must be >= 0, got ({a_v}, {a_w})")
    return float(np.hypot(a_v, a_w))


def shared_basis_sum_eigs(mu, mu_prime) -> np.ndarray:
    """Series scales of V + W when V and W expand over one shared basis:
    componentwise sqrt(mu_i^2 + mu'_i^2)."""
    mu = np.asarray(mu, dtype=float)
    mu_prime = np.asarray(mu_prime, dtype=float)
    if mu.shape != mu_prime.shape:
        raise ValueError(f"length mismatch: {mu.shape} vs {mu_prime.shape}")
    return np.hypot(mu, mu_prime)


def finite_dim_norm(sigma: np.ndarray, b: np.ndarray) -> float:
    """RKHS norm of b for a normal vector with covariance sigma.

    With g the minimum-norm solution of sigma g = b the square norm is
    g^T sigma g; b outside the range of sigma is rejected.
    """
    sigma = np.asarray(sigma, dtype=float)
    b = np.asarray(b, dtype=float)
    g, *_ = np.linalg.lstsq(sigma, b, rcond=None)
    residual = np.linalg.norm(sigma @ g - b)
    if residual > 1e-8 * np.linalg.norm(b):
        raise NotInRkhsError(
            f"vector outside the covariance range (residual {residual:.3e})"
        )
    return float(np.sqrt(max(g @ sigma @ g, 0.0)))


def spectral_vs_analytic_gap(f: GridFunction, basis: SpectralBasis) -> float:
    """Relative disagreement between the spectral norm of the projection
    of f and the analytic Brownian-motion norm of f (diagnostic)."""
    analytic = rkhs_norm_bm(f)
    series = rkhs_norm_series(element_from_function(f, basis))
    return abs(series - analytic) / analytic


def l2_residual_outside_span(f: GridFunction, basis: SpectralBasis) -> float:
    """Quadrature-L2 mass of f not captured by the basis span."""
    w = project(f, basis)
    total = inner_l2(f, f)
    return float(np.sqrt(max(total - float(np.sum(w**2)), 0.0)))
