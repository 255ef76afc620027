"""Exact structural checks: isometry of integration pushforwards, the
direct-sum Pythagoras identity, and the shared-basis counterexample where
the sum RKHS is not an orthogonal sum.  No Monte Carlo noise enters."""

import numpy as np

from .grid import GridFunction, make_grid
from .kernels import BrownianMotion, IntegratedBrownianMotion, SeriesKernel, gram
from .rkhs import (
    RkhsElement,
    element_from_function,
    pushforward_integrate,
    rkhs_norm_bm,
    rkhs_norm_released,
    rkhs_norm_series,
)
from .smallball import CheckReport
from .spectral import eig_basis


def check_isometry_integration(
    basis_bm, k: int, elements, truncation_tol: float = 1e-10, rel_tol: float = 0.05
) -> CheckReport:
    """Integration maps the Brownian-motion RKHS isometrically onto the
    RKHS of the integrated process: compare each element's norm with the
    norm of its k-fold primitive in the integrated-kernel basis."""
    basis_int = eig_basis(
        IntegratedBrownianMotion(k=k), basis_bm.grid, truncation_tol
    )
    worst = 0.0
    for e in elements:
        before = rkhs_norm_series(e)
        image, _ = pushforward_integrate(e, k)
        after = rkhs_norm_series(element_from_function(image, basis_int))
        if before == 0.0:
            worst = max(worst, abs(after))
            continue
        worst = max(worst, abs(after - before) / before)
    return CheckReport(
        name="isometry-integration",
        passed=bool(worst <= rel_tol),
        lhs=float(worst),
        rhs=rel_tol,
        slack=0.0,
        detail=f"k={k} elements={len(elements)} worst_rel_dev={worst:.3e}",
    )


def check_direct_sum(f: GridFunction) -> CheckReport:
    """Releasing at zero splits the square norm exactly:
    |f|_released^2 = f(0)^2 + |f - f(0)|_bm^2."""
    released_sq = rkhs_norm_released(f) ** 2
    shifted = GridFunction(f.grid, f.values - f.values[0])
    parts_sq = f.values[0] ** 2 + rkhs_norm_bm(shifted) ** 2
    tol = 1e-8 * (1.0 + released_sq)
    gap = abs(released_sq - parts_sq)
    return CheckReport(
        name="direct-sum",
        passed=bool(gap <= tol),
        lhs=float(released_sq),
        rhs=float(parts_sq),
        slack=tol,
        detail=f"gap={gap:.3e}",
    )


def optimal_split_cost(mu: float, mu_prime: float) -> float:
    """min over a of a^2/mu^2 + (1-a)^2/mu'^2; the closed form is
    1/(mu^2 + mu'^2), attained at a = mu^2/(mu^2 + mu'^2)."""
    a = mu**2 / (mu**2 + mu_prime**2)
    return a**2 / mu**2 + (1.0 - a) ** 2 / mu_prime**2


def brute_split_cost(mu: float, mu_prime: float, samples: int = 2_000_001) -> float:
    """Dense-scan oracle for the same minimum."""
    a = np.linspace(-0.5, 1.5, samples)
    return float(np.min(a**2 / mu**2 + (1.0 - a) ** 2 / mu_prime**2))


def check_shared_basis_counterexample(mu, mu_prime, grid=None) -> CheckReport:
    """Shared-basis independent sum: the series scales combine as
    sqrt(mu_i^2 + mu'_i^2), and the sum norm is NOT the Pythagorean sum
    of an arbitrary split.

    Verifies (a) the eigenvalues of the summed kernel, (b) the optimal
    one-dimensional split identity against the closed form, and (c) a
    strict gap for the naive split of phi_1 as phi_1 + 0.
    """
    mu = np.asarray(mu, dtype=float)
    mu_prime = np.asarray(mu_prime, dtype=float)
    if mu.shape != mu_prime.shape or mu.ndim != 1:
        raise ValueError("mu and mu_prime must be 1-d of equal length")
    if grid is None:
        grid = make_grid(201)
    host = eig_basis(BrownianMotion(), grid, truncation_tol=1e-10)
    if host.m < mu.size:
        raise ValueError(f"host basis too small: {host.m} < {mu.size}")
    phi = host.phi[: mu.size]

    g_sum = gram(SeriesKernel(grid, mu**2, phi), grid) + gram(
        SeriesKernel(grid, mu_prime**2, phi), grid
    )
    sqw = np.sqrt(grid.weights)
    evals = np.linalg.eigvalsh(g_sum * np.outer(sqw, sqw))[::-1][: mu.size]
    expected = np.sort(mu**2 + mu_prime**2)[::-1]
    eig_err = float(np.max(np.abs(evals - expected)))

    split_err = max(
        abs(optimal_split_cost(m, mp) - 1.0 / (m**2 + mp**2))
        for m, mp in zip(mu, mu_prime)
    )
    naive = 1.0 / mu[0] ** 2  # phi_1 decomposed as phi_1 + 0
    true_sq = 1.0 / (mu[0] ** 2 + mu_prime[0] ** 2)
    strict_gap = naive - true_sq

    passed = bool(eig_err <= 1e-8 and split_err <= 1e-10 and strict_gap > 1e-8)
    return CheckReport(
        name="shared-basis-counterexample",
        passed=passed,
        lhs=float(eig_err),
        rhs=float(strict_gap),
        slack=1e-8,
        detail=f"eig_err={eig_err:.3e} split_err={split_err:.3e} "
               f"naive-vs-true gap={strict_gap:.3e}",
    )


def default_structural_elements(basis_bm, count: int = 3, seed: int = 0):
    """Small deterministic element set for the isometry check: the
    identity function plus sparse pseudo-random coefficient vectors."""
    from .backend import standard_normals

    grid = basis_bm.grid
    elems = [element_from_function(GridFunction(grid, grid.points), basis_bm)]
    z = standard_normals(seed, 0, count, 5)
    for row in z:
        w = np.zeros(basis_bm.m)
        w[:5] = row * np.sqrt(basis_bm.lam[:5])
        elems.append(RkhsElement(basis_bm, w))
    return elems
