"""Discretized Mercer decomposition of a covariance operator.

The Gram matrix G on a quadrature grid is symmetrized by the weights,
B = D^(1/2) G D^(1/2) with D = diag(weights), so that the discrete
operator is self-adjoint in the quadrature inner product (Nystrom).  Its
eigenpairs give the working basis: eigenvalues lam_k and grid-sampled
eigenfunctions phi_k, orthonormal under inner_l2.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction, GridMismatchError
from .kernels import gram


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalues (descending) and quadrature-orthonormal eigenfunctions."""

    grid: Grid
    lam: np.ndarray = field(repr=False)   # (m,)
    phi: np.ndarray = field(repr=False)   # (m, n), row j = phi_j on the grid
    truncation_tol: float = 0.0

    def __post_init__(self):
        self.lam.setflags(write=False)
        self.phi.setflags(write=False)

    @property
    def m(self) -> int:
        return self.lam.size

    def trace(self) -> float:
        """Total retained variance sum_j lam_j."""
        return float(self.lam.sum())

    def diag_variance(self) -> np.ndarray:
        """Pointwise variance sum_j lam_j phi_j(t)^2 of the truncated
        process."""
        return np.einsum("j,ji,ji->i", self.lam, self.phi, self.phi)


def eig_basis(spec, grid: Grid, truncation_tol: float = 1e-10) -> SpectralBasis:
    """Eigendecompose the quadrature-weighted Gram matrix.

    Eigenvalues with lam_k <= truncation_tol * lam_1 are dropped (this
    clips the negative round-off eigenvalues of the symmetric solve).
    Signs are fixed so the first nonzero component of each phi_k, scanning
    from t=0, is positive.
    """
    if truncation_tol < 0:
        raise ValueError(f"truncation_tol must be >= 0, got {truncation_tol}")
    G = gram(spec, grid)
    sqw = np.sqrt(grid.weights)
    B = G * np.outer(sqw, sqw)
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    if evals[0] <= 0:
        raise ValueError("covariance operator has no positive eigenvalues")
    keep = evals > truncation_tol * evals[0]
    if not np.any(keep):
        raise ValueError(
            f"all eigenvalues clipped at truncation_tol={truncation_tol}"
        )
    lam = evals[keep].copy()
    phi = (evecs[:, keep] / sqw[:, None]).T.copy()
    # quadrature norms are already 1 (the eigenvectors are Euclidean
    # orthonormal); renormalize to remove residual round-off anyway
    nrm = np.sqrt(np.einsum("i,ji,ji->j", grid.weights, phi, phi))
    phi /= nrm[:, None]
    scale = np.max(np.abs(phi), axis=1)
    for row, s in zip(phi, scale):
        nz = np.nonzero(np.abs(row) > 1e-8 * s)[0]
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return SpectralBasis(grid=grid, lam=lam, phi=phi, truncation_tol=truncation_tol)


def project(f: GridFunction, basis: SpectralBasis) -> np.ndarray:
    """Coefficients w_j = <f, phi_j> in the quadrature inner product."""
    if not f.grid.same_as(basis.grid):
        raise GridMismatchError("function and basis live on different grids")
    return basis.phi @ (basis.grid.weights * f.values)


def reconstruct(w, basis: SpectralBasis) -> GridFunction:
    """sum_j w_j phi_j as a grid function; w may be shorter than m."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size > basis.m:
        raise ValueError(
            f"coefficient vector of length {w.size} does not fit basis size {basis.m}"
        )
    return GridFunction(basis.grid, w @ basis.phi[: w.size])
