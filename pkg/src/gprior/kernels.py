"""Covariance kernel catalog and Gram-matrix assembly.

Catalog: Brownian motion (min(s,t)), Brownian motion released at zero
(1 + min(s,t)), k-fold integrated Brownian motion, the Riemann-Liouville
family, explicit finite-dimensional covariance matrices, and kernels given
by a truncated series sum_j lam_j phi_j(s) phi_j(t).
"""

from dataclasses import dataclass, field
from math import factorial, comb

import numpy as np

from .grid import Grid

# Composite Gauss-Legendre rule used by the Riemann-Liouville kernel:
# 4 panels graded toward 0 (where the substituted integrand has its
# boundary layer for points near the diagonal), 16 nodes each.
_RL_PANELS = (0.0, 0.125, 0.25, 0.5, 1.0)
_RL_NODES_PER_PANEL = 16


def _composite_gl_rule():
    x, w = np.polynomial.legendre.leggauss(_RL_NODES_PER_PANEL)
    nodes, weights = [], []
    for lo, hi in zip(_RL_PANELS[:-1], _RL_PANELS[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


_RL_V, _RL_W = _composite_gl_rule()


@dataclass(frozen=True)
class BrownianMotion:
    """K(s,t) = min(s,t)."""

    def pair_eval(self, s, t):
        return np.minimum(s, t)


@dataclass(frozen=True)
class ReleasedBrownianMotion:
    """Brownian motion started at an independent standard normal:
    K(s,t) = 1 + min(s,t)."""

    def pair_eval(self, s, t):
        return 1.0 + np.minimum(s, t)


@dataclass(frozen=True)
class IntegratedBrownianMotion:
    """k-fold primitive of Brownian motion.

    From the moving-average representation int_0^t (t-u)^k/k! dW_u,
    K(s,t) = int_0^{s^t} (s-u)^k (t-u)^k du / (k!)^2, evaluated in closed
    form by a binomial expansion.  tests/test_kernels.py checks this
    against a brute-force path-simulation oracle.
    """

    k: int

    def __post_init__(self):
        if self.k < 1 or self.k != int(self.k):
            raise ValueError(f"integrated BM needs integer k >= 1, got {self.k}")

    def pair_eval(self, s, t):
        a = np.minimum(s, t)
        b = np.maximum(s, t)
        d = b - a
        k = self.k
        acc = np.zeros(np.broadcast(a, b).shape)
        for j in range(k + 1):
            acc += comb(k, j) * d ** (k - j) * a ** (k + j + 1) / (k + j + 1)
        return acc / factorial(k) ** 2


@dataclass(frozen=True)
class RiemannLiouville:
    """Fractional-smoothness process int_0^t (t-u)^(alpha-1/2) dW_u.

    K(s,t) = int_0^{s^t} (t-u)^(alpha-1/2) (s-u)^(alpha-1/2) du.  The
    integral is computed on the fixed composite Gauss-Legendre rule after
    the substitution u = (s^t)(1 - v^2), which removes the endpoint
    singularity for alpha < 1/2 and sharpens convergence for all alpha.
    The diagonal has the exact value t^(2 alpha) / (2 alpha).
    """

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"Riemann-Liouville needs alpha > 0, got {self.alpha}")

    def pair_eval(self, s, t):
        a = np.minimum(s, t)
        b = np.maximum(s, t)
        p = self.alpha - 0.5
        # substituted integrand: 2 a^(p+1) v^(2p+1) ((b-a) + a v^2)^p
        v = _RL_V
        core = (b[..., None] - a[..., None]) + a[..., None] * v**2
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = core**p
        vals = np.where(core > 0.0, vals, 0.0)
        quad = 2.0 * a ** (p + 1.0) * (vals * (v ** (2.0 * p + 1.0) * _RL_W)).sum(-1)
        diag = np.where(a > 0.0, a ** (2.0 * self.alpha), 0.0) / (2.0 * self.alpha)
        return np.where(a == b, diag, quad)


@dataclass(frozen=True)
class FiniteDimCovariance:
    """Explicit d x d covariance matrix; points of [0,1] address rows by
    nearest index, so the Gram matrix on a matching grid is the matrix
    itself."""

    sigma: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.sigma, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.T)) > 1e-10:
            raise ValueError("covariance matrix not symmetric within 1e-10")
        eigs = np.linalg.eigvalsh(0.5 * (m + m.T))
        if eigs[0] < -1e-10 * max(1.0, eigs[-1]):
            raise ValueError(f"covariance not PSD: min eigenvalue {eigs[0]:.3e}")
        object.__setattr__(self, "sigma", m)
        m.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def pair_eval(self, s, t):
        i = np.rint(np.asarray(s) * (self.dim - 1)).astype(int)
        j = np.rint(np.asarray(t) * (self.dim - 1)).astype(int)
        return self.sigma[i, j]


@dataclass(frozen=True)
class SeriesKernel:
    """Truncated series kernel sum_j lam_j phi_j(s) phi_j(t) with the
    phi_j sampled on a common grid (nearest-point evaluation)."""

    grid: Grid
    lam: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)  # shape (m, n), row j = phi_j

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if lam.ndim != 1 or np.any(lam <= 0):
            raise ValueError("series kernel needs strictly positive weights")
        if phi.shape != (lam.size, self.grid.n):
            raise ValueError(
                f"phi must have shape ({lam.size}, {self.grid.n}), got {phi.shape}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "phi", phi)
        lam.setflags(write=False)
        phi.setflags(write=False)

    def pair_eval(self, s, t):
        i = np.rint(np.asarray(s) * (self.grid.n - 1)).astype(int)
        j = np.rint(np.asarray(t) * (self.grid.n - 1)).astype(int)
        return np.einsum("j,j...,j...->...", self.lam, self.phi[:, i], self.phi[:, j])


KernelSpec = (
    BrownianMotion
    | ReleasedBrownianMotion
    | IntegratedBrownianMotion
    | RiemannLiouville
    | FiniteDimCovariance
    | SeriesKernel
)


def kernel_eval(spec, s, t):
    """Evaluate K(s,t); s and t may be scalars or broadcastable arrays
    with entries in [0,1]."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(s > 1) or np.any(t < 0) or np.any(t > 1):
        raise ValueError("kernel arguments must lie in [0,1]")
    out = spec.pair_eval(s, t)
    return float(out) if np.ndim(out) == 0 else out


def gram(spec, grid: Grid) -> np.ndarray:
    """Gram matrix G_ij = K(t_i, t_j), exactly symmetrized."""
    pts = grid.points
    if isinstance(spec, RiemannLiouville):
        # row blocks keep the quadrature workspace bounded
        n = grid.n
        G = np.empty((n, n))
        block = max(1, 2_000_000 // (n * _RL_V.size))
        for lo in range(0, n, block):
            hi = min(n, lo + block)
            G[lo:hi] = spec.pair_eval(pts[lo:hi, None], pts[None, :])
    else:
        G = np.asarray(spec.pair_eval(pts[:, None], pts[None, :]), dtype=float)
    return 0.5 * (G + G.T)


def sup_variance(spec, grid: Grid) -> float:
    """sigma(W) for the sup norm: sqrt of the largest pointwise variance."""
    diag = np.asarray(kernel_eval(spec, grid.points, grid.points))
    return float(np.sqrt(np.max(diag)))


def parse_kernel(text: str):
    """Parse CLI kernel strings: 'bm', 'released-bm', 'ibm:k=2',
    'rl:alpha=0.8'."""
    name, _, args = text.partition(":")
    params = {}
    if args:
        for part in args.split(","):
            key, _, val = part.partition("=")
            if not val:
                raise ValueError(f"malformed kernel parameter {part!r} in {text!r}")
            params[key.strip()] = val.strip()
    if name == "bm":
        return BrownianMotion()
    if name == "released-bm":
        return ReleasedBrownianMotion()
    if name == "ibm":
        if set(params) != {"k"}:
            raise ValueError(f"kernel 'ibm' takes exactly k=<int>, got {text!r}")
        return IntegratedBrownianMotion(k=int(params["k"]))
    if name == "rl":
        if set(params) != {"alpha"}:
            raise ValueError(f"kernel 'rl' takes exactly alpha=<float>, got {text!r}")
        return RiemannLiouville(alpha=float(params["alpha"]))
    raise ValueError(
        f"unknown kernel {text!r}; expected bm, released-bm, ibm:k=..., rl:alpha=..."
    )
