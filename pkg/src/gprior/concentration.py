"""Concentration function: decentering cost plus small-ball exponent,
and the machinery that consumes it (rate solving, exponent translation,
ellipsoid entropy, log-log slope fits).

The decentering cost is a constrained quadratic program over the
truncated eigenbasis, where the RKHS is the coefficient ellipsoid:
minimize |h|_H^2 / 2 subject to |h - w| <= eps.  The l2 ball gives a
closed-form KKT solution found by a multiplier bisection; the sup ball
imposes one linear constraint per grid point and is solved by
quadratic-penalty continuation with an accelerated gradient method,
polished by an active-set KKT solve.

Convention: approx_term returns inf |h|^2/2 as in the concentration
function; the rate equation for the approximation term uses the full
|h|^2, i.e. twice this value (see rate_curves).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, inner_l2
from .smallball import smallball_mc
from .spectral import SpectralBasis, project


@dataclass(frozen=True)
class ConcentrationPoint:
    eps: float
    approx_term: float          # inf |h|^2/2 over the eps-ball around w
    neg_log_smallball: float    # -log P(|W| < eps), Monte Carlo
    phi: float                  # their sum
    optimizer_gap: float


@dataclass(frozen=True)
class RateSolution:
    n: float
    eps_n: float
    which: str                  # prior-mass | approximation | combined
    residual: float             # phi(eps_n) - n eps_n^2 (<= 0 at the solution)


class InfeasibleApproximationError(ValueError):
    """w cannot be approximated within eps by the truncated span."""


# ---------------------------------------------------------------------------
# decentering cost


def _approx_l2(w_coef, lam, slack_sq, eps):
    """Closed-form KKT solution of min 1/2 sum h_j^2/lam_j subject to
    sum (h_j - w_j)^2 <= slack_sq, by bisection on the multiplier."""
    total = float(np.sum(w_coef**2))
    if total <= slack_sq:
        return 0.0, np.zeros_like(w_coef), 0.0

    def dist_sq(mu):
        return float(np.sum(w_coef**2 / (1.0 + mu * lam) ** 2))

    def value(mu):
        h = w_coef * (mu * lam) / (1.0 + mu * lam)
        return 0.5 * float(np.sum(h**2 / lam)), h

    lo, hi = 0.0, 1.0 / lam[0]
    while dist_sq(hi) > slack_sq:
        hi *= 2.0
        if hi > 1e150:
            raise InfeasibleApproximationError(
                f"cannot reach the ball of radius {eps} within the span"
            )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dist_sq(mid) > slack_sq:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    v_hi, h = value(hi)
    v_lo, _ = value(lo)
    return v_hi, h, abs(v_hi - v_lo)


def _spectral_norm(a, iters=60):
    v = np.full(a.shape[1], 1.0 / math.sqrt(a.shape[1]))
    s = 0.0
    for _ in range(iters):
        u = a @ v
        v = a.T @ u
        s = math.sqrt(np.linalg.norm(v))
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
    return s


def _fista(c, grad, step, iters, tol):
    y = c.copy()
    t = 1.0
    g_old = None
    for _ in range(iters):
        g = grad(y)
        c_new = y - step * g
        if g_old is not None and np.dot(g, c_new - c) > 0.0:
            # gradient restart
            t = 1.0
            y = c_new
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = c_new + ((t - 1.0) / t_new) * (c_new - c)
            t = t_new
        moved = np.linalg.norm(c_new - c)
        c = c_new
        g_old = g
        if moved <= tol * (1.0 + np.linalg.norm(c)):
            break
    return c


def _kkt_polish(a_mat, y, eps, c_pen):
    """Try an active-set equality solve; returns (value, h-coef in c
    coordinates, gap) on success, None otherwise."""
    r = a_mat @ c_pen - y
    for margin in (1e-10, 1e-8, 1e-6, 1e-4):
        active = np.nonzero(np.abs(r) >= eps * (1.0 - margin) - 1e-14)[0]
        if active.size == 0 or active.size > a_mat.shape[1] + 8:
            continue
        signs = np.sign(r[active])
        a_act = a_mat[active]
        b = y[active] + signs * eps
        gramm = a_act @ a_act.T
        nu, *_ = np.linalg.lstsq(gramm, b, rcond=None)
        c = a_act.T @ nu
        if np.any(signs * nu > 1e-9 * (1.0 + np.abs(nu).max())):
            continue  # multiplier sign broken: wrong active set
        res = a_mat @ c - y
        if np.max(np.abs(res)) > eps * (1.0 + 1e-9) + 1e-12:
            continue
        sys_err = np.linalg.norm(gramm @ nu - b) / max(np.linalg.norm(b), 1e-30)
        if sys_err > 1e-8:
            continue
        value = 0.5 * float(np.dot(c, c))
        gap = value * sys_err + 1e-15
        return value, c, gap
    return None


def _approx_sup(w_vals, lam, phi, grid, eps):
    """Penalty continuation + accelerated gradient + KKT polish for the
    sup-norm constrained problem, in RKHS-orthonormal coordinates."""
    a_mat = (phi * np.sqrt(lam)[:, None]).T  # (n, m): c -> path values
    y = w_vals
    sig2 = max(_spectral_norm(a_mat) ** 2, 1e-30)

    # feasibility requires no slack at all when w is reachable: start from
    # the l2 warm start, which is cheap and close for smooth targets
    w_coef = phi @ (grid.weights * y)
    r_sq = max(inner_l2(GridFunction(grid, y), GridFunction(grid, y))
               - float(np.sum(w_coef**2)), 0.0)
    if r_sq > 0 and math.sqrt(r_sq) > eps:
        # even the l2 ball is out of reach, the smaller sup ball certainly is
        raise InfeasibleApproximationError(
            f"target has l2 mass {math.sqrt(r_sq):.3e} outside the span, "
            f"beyond eps={eps}"
        )
    _, h_l2, _ = _approx_l2(w_coef, lam, max(eps**2 - r_sq, 0.0), eps)
    c = h_l2 / np.sqrt(lam)

    value = 0.5 * float(np.dot(c, c))
    prev_value = value
    rho = 1.0 / sig2
    viol = np.inf
    polished = None
    for _ in range(14):
        step = 1.0 / (1.0 + rho * sig2)

        def grad(cv):
            r = a_mat @ cv - y
            d = np.sign(r) * np.clip(np.abs(r) - eps, 0.0, None)
            return cv + rho * (a_mat.T @ d)

        c = _fista(c, grad, step, iters=4000, tol=1e-12)
        r = a_mat @ c - y
        excess = np.clip(np.abs(r) - eps, 0.0, None)
        viol = float(excess.max())
        prev_value, value = value, 0.5 * float(np.dot(c, c))
        if viol <= 1e-2 * eps:
            # active set is usually settled well before the penalty
            # pressure can push the violation to zero; the equality
            # solve is exact when its KKT checks pass
            polished = _kkt_polish(a_mat, y, eps, c)
            if polished is not None:
                break
        if viol <= 1e-10 * max(1.0, eps):
            break
        rho *= 10.0

    if polished is None and viol > 1e-3 * eps:
        # violation did not shrink under full penalty pressure
        raise InfeasibleApproximationError(
            f"sup-ball of radius {eps} unreachable (violation {viol:.3e})"
        )

    if polished is not None:
        value, c, gap = polished
    else:
        # multiplier estimates convert the violation into a value bound
        mu_sum = float(np.sum(rho * np.clip(np.abs(r) - eps, 0.0, None)))
        gap = abs(value - prev_value) + viol * mu_sum

    # sup over the grid is not the sup over [0,1]: fold the residual's
    # grid modulus into the reported gap
    r = a_mat @ c - y
    mod = float(np.max(np.abs(np.diff(r)))) if r.size > 1 else 0.0
    gap += 0.5 * mod * math.sqrt(value + 1.0)

    h = c * np.sqrt(lam)
    return value, h, gap


def approx_term(w: GridFunction, basis: SpectralBasis, eps: float, norm_kind: str):
    """inf |h|^2/2 over RKHS elements with |h - w| <= eps.

    Returns (value, argmin coefficients, gap bound).
    """
    if eps <= 0:
        raise ValueError(f"need eps > 0, got {eps}")
    if not w.grid.same_as(basis.grid):
        raise ValueError("target function and basis live on different grids")
    if norm_kind == "l2":
        w_coef = project(w, basis)
        r_sq = max(inner_l2(w, w) - float(np.sum(w_coef**2)), 0.0)
        if r_sq > eps**2:
            raise InfeasibleApproximationError(
                f"target has l2 mass {math.sqrt(r_sq):.3e} outside the span, "
                f"beyond eps={eps}"
            )
        return _approx_l2(w_coef, basis.lam, eps**2 - r_sq, eps)
    if norm_kind == "sup":
        return _approx_sup(w.values, basis.lam, basis.phi, basis.grid, eps)
    raise ValueError(f"unknown norm {norm_kind!r}, expected 'sup' or 'l2'")


# ---------------------------------------------------------------------------
# the concentration function and rates


def concentration_fn(
    w: GridFunction,
    basis: SpectralBasis,
    eps_list,
    norm_kind: str = "sup",
    trials: int = 10_000,
    seed: int = 0,
):
    """One ConcentrationPoint per radius (given largest first); the curve
    is truncated with a warning when the small-ball estimate runs out of
    hits."""
    eps_arr = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_arr):
        raise ValueError("radii must be positive")
    if any(a <= b for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValueError("radii must be sorted in decreasing order")
    points = []
    for eps in eps_arr:
        value, _, gap = approx_term(w, basis, eps, norm_kind)
        est = smallball_mc(basis, eps, norm_kind, None, trials, seed)
        if est.hits == 0:
            warnings.warn(
                f"no small-ball hits at eps={eps:g}; truncating the curve",
                stacklevel=2,
            )
            break
        points.append(
            ConcentrationPoint(
                eps=eps,
                approx_term=value,
                neg_log_smallball=est.neg_log_p,
                phi=value + est.neg_log_p,
                optimizer_gap=gap,
            )
        )
    return points


def _tabulated_phi(points):
    pts = sorted((float(e), float(v)) for e, v in points)
    eps = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if np.any(eps <= 0) or np.any(val <= 0):
        raise ValueError("tabulated curve needs positive radii and values")
    log_e, log_v = np.log(eps), np.log(val)

    def phi(x):
        return math.exp(np.interp(math.log(x), log_e, log_v))

    return phi, float(eps[0]), float(eps[-1])


def solve_rate(phi, n: float, which: str = "combined", bracket=None) -> RateSolution:
    """Smallest eps with phi(eps) <= n eps^2, to relative tolerance 1e-6.

    `phi` is a nonincreasing callable or a tabulated sequence of
    (eps, value) pairs, interpolated log-log.
    """
    if n <= 0:
        raise ValueError(f"need n > 0, got {n}")
    if callable(phi):
        fn = phi
        lo, hi = bracket if bracket is not None else (1e-8, 1e3)
    else:
        fn, lo, hi = _tabulated_phi(phi)
        if bracket is not None:
            lo, hi = max(lo, bracket[0]), min(hi, bracket[1])

    def slack(e):
        return fn(e) - n * e * e

    if slack(hi) > 0:
        raise ValueError(
            f"no crossing: phi({hi:g}) still exceeds n eps^2; enlarge the domain"
        )
    if slack(lo) <= 0:
        # already satisfied at the bottom of the domain
        return RateSolution(n=n, eps_n=lo, which=which, residual=slack(lo))
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if slack(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * hi:
            break
    return RateSolution(n=n, eps_n=hi, which=which, residual=slack(hi))


def rate_curves(points):
    """Split a concentration curve into the two rate inputs: the
    small-ball exponent curve and the approximation curve (full squared
    norm, i.e. twice the stored half-norm term)."""
    prior_mass = [(p.eps, p.neg_log_smallball) for p in points]
    approx = [(p.eps, 2.0 * p.approx_term) for p in points]
    return prior_mass, approx


def combined_rate(points, n: float) -> RateSolution:
    """The rate is the worse of the two separate minimal solutions."""
    prior_mass, approx = rate_curves(points)
    sol_p = solve_rate(prior_mass, n, which="prior-mass")
    sol_a = solve_rate([(e, max(v, 1e-300)) for e, v in approx], n,
                       which="approximation")
    worse = sol_p if sol_p.eps_n >= sol_a.eps_n else sol_a
    return RateSolution(n=n, eps_n=worse.eps_n, which="combined",
                        residual=worse.residual)


# ---------------------------------------------------------------------------
# exponent calculus, entropy, slope fits


def exponent_translate(alpha: float, beta: float):
    """Small-ball exponent (alpha, beta) in eps^-alpha log(1/eps)^beta
    maps to the entropy exponent pair (2a/(2+a), 2b/(2+a))."""
    if alpha <= 0:
        raise ValueError(f"need alpha > 0, got {alpha}")
    return 2.0 * alpha / (2.0 + alpha), 2.0 * beta / (2.0 + alpha)


def ellipsoid_packing(semiaxes, eps: float) -> int:
    """Greedy maximal set of points of the ellipsoid
    {x : sum x_i^2/a_i^2 <= 1} at pairwise Euclidean distance >= 2 eps,
    taken from a lattice of spacing eps/2."""
    a = np.asarray(semiaxes, dtype=float)
    if a.ndim != 1 or np.any(a <= 0):
        raise ValueError("semiaxes must be a 1-d positive sequence")
    if a.size > 8:
        raise ValueError(f"dimension {a.size} exceeds the cap of 8")
    if eps <= 0:
        raise ValueError(f"need eps > 0, got {eps}")
    delta = eps / 2.0
    counts = np.floor(a / delta).astype(int)
    total = np.prod(2 * counts + 1, dtype=float)
    if total > 2e5:
        raise ValueError(
            f"lattice of {total:.3g} candidates too large at eps={eps} "
            f"in dimension {a.size}"
        )
    axes = [np.arange(-k, k + 1) * delta for k in counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    pts = pts[((pts / a) ** 2).sum(axis=1) <= 1.0]
    kept = np.empty((0, a.size))
    # slightly relaxed threshold so exact-separation lattice points are
    # not lost to float dust
    min_sep_sq = (2.0 * eps) ** 2 * (1.0 - 1e-9)
    for p in pts:
        if kept.size == 0 or np.min(((kept - p) ** 2).sum(axis=1)) >= min_sep_sq:
            kept = np.vstack([kept, p])
    return max(len(kept), 1)


def ellipsoid_entropy(semiaxes, eps: float) -> float:
    """log of the greedy packing count: at separation 2 eps the count
    lower-bounds the (eps/2)-covering number and upper-bounds the
    2 eps-covering number of the ellipsoid."""
    return math.log(ellipsoid_packing(semiaxes, eps))


def fit_loglog(points):
    """Least-squares slope and intercept of log(value) against
    log(1/eps)."""
    pts = [(float(e), float(v)) for e, v in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    if any(e <= 0 or v <= 0 for e, v in pts):
        raise ValueError("log-log fit needs positive radii and values")
    x = np.log([1.0 / e for e, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)
