"""Monte Carlo small-ball probabilities and the concentration inequalities.

Estimates P(|W - center| < eps) from KL draws with Wilson confidence
intervals, plus pass/fail checks of the shift inequality, the sandwich
between concentration-function values, the two-term Gaussian correlation
bound for enlarged RKHS balls, and the sub-Gaussian tail bound.  All
pass/fail margins are 3 standard errors: the underlying statements are
deterministic inequalities, so Monte Carlo noise is the only admissible
violation source.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .backend import derive_stream
from .grid import GridFunction
from .rkhs import RkhsElement, rkhs_norm_series
from .sampler import kl_path_batch, norm_of_paths, sample_exact
from .spectral import SpectralBasis

_Z95 = 1.959963984540054  # two-sided 95% normal quantile

# sub-stream tags so one user seed feeds decorrelated estimates
_STREAM_CENTERED = 11
_STREAM_DECENTERED = 12
_STREAM_BORELL_LHS = 13
_STREAM_BORELL_RHS = 14
_STREAM_TAIL = 15

_BATCH_DOUBLES = 8_000_000


def wilson_interval(hits: int, trials: int, z: float = _Z95):
    """Wilson score interval; well-behaved at zero hits."""
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials**2)) / denom
    # clamp away float dust so 0 <= lo <= p <= hi <= 1 holds exactly
    return max(min(center - half, p), 0.0), min(max(center + half, p), 1.0)


@dataclass(frozen=True)
class SmallBallEstimate:
    eps: float
    norm_kind: str
    center: GridFunction | None
    hits: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    neg_log_p: float  # +inf sentinel when hits == 0
    seed: int

    @property
    def se(self) -> float:
        return math.sqrt(self.p_hat * (1 - self.p_hat) / self.trials)

    @property
    def se_log(self) -> float:
        """Delta-method standard error of -log p_hat."""
        if self.hits == 0:
            return math.inf
        return math.sqrt((1 - self.p_hat) / (self.p_hat * self.trials))

    def neg_log_lower_bound(self) -> float:
        """Conservative lower bound on -log p from the CI upper end;
        finite even at zero hits."""
        return -math.log(self.ci_high)


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    lhs: float
    rhs: float
    slack: float
    detail: str = ""


def smallball_mc(
    basis: SpectralBasis,
    eps: float,
    norm_kind: str = "sup",
    center: GridFunction | None = None,
    trials: int = 10_000,
    seed: int = 0,
    stream: int = _STREAM_CENTERED,
) -> SmallBallEstimate:
    """Fraction of KL draws with |path - center| < eps."""
    if eps <= 0:
        raise ValueError(f"ball radius must be positive, got eps={eps}")
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    sub_seed = derive_stream(seed, stream)
    shift = None if center is None else center.values
    hits = 0
    batch = max(1, _BATCH_DOUBLES // basis.grid.n)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        _, paths = kl_path_batch(basis, b, sub_seed, start=done)
        if shift is not None:
            paths -= shift
        norms = norm_of_paths(paths, basis.grid.weights, norm_kind)
        hits += int(np.count_nonzero(norms < eps))
        done += b
    p = hits / trials
    lo, hi = wilson_interval(hits, trials)
    return SmallBallEstimate(
        eps=eps,
        norm_kind=norm_kind,
        center=center,
        hits=hits,
        trials=trials,
        p_hat=p,
        ci_low=lo,
        ci_high=hi,
        neg_log_p=-math.log(p) if hits > 0 else math.inf,
        seed=seed,
    )


def check_shift_inequality(
    basis: SpectralBasis,
    h: RkhsElement,
    eps: float,
    norm_kind: str = "sup",
    trials: int = 10_000,
    seed: int = 0,
) -> CheckReport:
    """P(|W - h| < eps) >= exp(-|h|_H^2 / 2) P(|W| < eps), both sides
    estimated on independent streams."""
    center = h.function()
    dec = smallball_mc(basis, eps, norm_kind, center, trials, seed,
                       stream=_STREAM_DECENTERED)
    cen = smallball_mc(basis, eps, norm_kind, None, trials, seed,
                       stream=_STREAM_CENTERED)
    factor = math.exp(-0.5 * rkhs_norm_series(h) ** 2)
    slack = 3.0 * math.sqrt(dec.se**2 + (factor * cen.se) ** 2)
    passed = dec.ci_low >= factor * cen.ci_high - slack
    return CheckReport(
        name="shift-inequality",
        passed=passed,
        lhs=dec.p_hat,
        rhs=factor * cen.p_hat,
        slack=slack,
        detail=f"eps={eps:g} norm={norm_kind} factor={factor:.4f} "
               f"hits={dec.hits}/{cen.hits}",
    )


def check_sandwich(
    basis: SpectralBasis,
    w: GridFunction,
    eps: float,
    norm_kind: str = "sup",
    trials: int = 10_000,
    seed: int = 0,
) -> CheckReport:
    """phi_w(eps) <= -log P(|W - w| < eps) <= phi_w(eps/2), each
    concentration value assembled from the optimizer and a centered
    estimate.

    A zero-hit centered estimate at eps/2 is replaced by the one-sided
    CI bound (a conservative lower bound for the upper envelope).
    """
    from .concentration import approx_term  # cycle: concentration uses smallball_mc

    dec = smallball_mc(basis, eps, norm_kind, w, trials, seed,
                       stream=_STREAM_DECENTERED)
    if dec.hits == 0:
        raise ValueError(
            "no decentered small-ball hits; increase trials or eps"
        )
    mc = dec.neg_log_p

    cen_lo = smallball_mc(basis, eps, norm_kind, None, trials, seed,
                          stream=_STREAM_CENTERED)
    cen_hi = smallball_mc(basis, eps / 2, norm_kind, None, trials, seed,
                          stream=_STREAM_CENTERED)
    a_lo, _, gap_lo = approx_term(w, basis, eps, norm_kind)
    a_hi, _, gap_hi = approx_term(w, basis, eps / 2, norm_kind)

    if cen_lo.hits == 0:
        raise ValueError("no centered small-ball hits at eps; increase trials")
    phi_lo = a_lo + cen_lo.neg_log_p
    bounded_envelope = cen_hi.hits == 0
    phi_hi = a_hi + (
        cen_hi.neg_log_lower_bound() if bounded_envelope else cen_hi.neg_log_p
    )

    slack_lo = 3.0 * math.sqrt(dec.se_log**2 + cen_lo.se_log**2) + gap_lo
    slack_hi = 3.0 * math.sqrt(
        dec.se_log**2 + (0.0 if bounded_envelope else cen_hi.se_log**2)
    ) + gap_hi
    lower_ok = mc >= phi_lo - slack_lo
    upper_ok = mc <= phi_hi + slack_hi
    detail = (
        f"eps={eps:g} norm={norm_kind} phi(eps)={phi_lo:.4f} "
        f"mc={mc:.4f} phi(eps/2)={phi_hi:.4f}"
    )
    if bounded_envelope:
        detail += " [upper envelope from zero-hit CI bound]"
    return CheckReport(
        name="sandwich",
        passed=lower_ok and upper_ok,
        lhs=phi_lo,
        rhs=phi_hi,
        slack=max(slack_lo, slack_hi),
        detail=detail,
    )


def _dist_to_ellipsoid(points: np.ndarray, semiaxes: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row to {y: sum (y_i/a_i)^2 <= 1},
    axis-aligned; degenerate axes allowed."""
    pts = np.abs(points)
    live = semiaxes > 0
    dead_sq = (pts[:, ~live] ** 2).sum(axis=1)
    a = semiaxes[live]
    u = pts[:, live]
    if a.size == 0:
        return np.sqrt(dead_sq)
    inside = (u**2 / a**2).sum(axis=1) <= 1.0
    # outside points: y_i = a_i^2 u_i / (t + a_i^2) with t > 0 solving
    # sum a_i^2 u_i^2 / (t + a_i^2)^2 = 1 (decreasing in t); bisection
    t_lo = np.zeros(len(pts))
    t_hi = np.full(len(pts), a.max() * (np.linalg.norm(u, axis=1) + a.max()))
    for _ in range(100):
        t = 0.5 * (t_lo + t_hi)
        val = (a**2 * u**2 / (t[:, None] + a**2) ** 2).sum(axis=1)
        too_far = val > 1.0
        t_lo = np.where(too_far, t, t_lo)
        t_hi = np.where(too_far, t_hi, t)
    t = 0.5 * (t_lo + t_hi)
    y = a**2 * u / (t[:, None] + a**2)
    live_sq = np.where(inside, 0.0, ((u - y) ** 2).sum(axis=1))
    return np.sqrt(live_sq + dead_sq)


def check_borell(
    sigma: np.ndarray,
    eps: float,
    big_m: float,
    trials: int = 10_000,
    seed: int = 0,
) -> CheckReport:
    """P(W in eps B_1 + M H_1) >= Phi(Phi^{-1}(P(|W| < eps)) + M) for a
    normal vector in dimension <= 2 (where the Minkowski-sum membership
    test is an exact ellipsoid projection)."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    d = sigma.shape[0]
    if d > 2:
        raise ValueError(f"dimension {d} > 2 not supported")
    if eps <= 0 or big_m < 0:
        raise ValueError(f"need eps > 0 and M >= 0, got eps={eps}, M={big_m}")
    evals, evecs = np.linalg.eigh(sigma)
    semiaxes = big_m * np.sqrt(np.clip(evals, 0.0, None))

    draws = sample_exact(sigma, trials, derive_stream(seed, _STREAM_BORELL_LHS))
    dist = _dist_to_ellipsoid(draws @ evecs, semiaxes)
    hits = int(np.count_nonzero(dist <= eps))
    lhs = hits / trials
    lhs_lo, _ = wilson_interval(hits, trials)

    if d == 1:
        p0 = 2.0 * ndtr(eps / math.sqrt(sigma[0, 0])) - 1.0
        se0 = 0.0
    else:
        rhs_draws = sample_exact(
            sigma, trials, derive_stream(seed, _STREAM_BORELL_RHS)
        )
        h0 = int(np.count_nonzero(np.linalg.norm(rhs_draws, axis=1) < eps))
        p0 = h0 / trials
        se0 = math.sqrt(p0 * (1 - p0) / trials)
    rhs = float(ndtr(ndtri(p0) + big_m))
    p0_cons = max(p0 - 3.0 * se0, 1.0 / (10.0 * trials))
    rhs_cons = float(ndtr(ndtri(p0_cons) + big_m))
    se_lhs = math.sqrt(max(lhs * (1 - lhs), 0.25 / trials) / trials)
    return CheckReport(
        name="borell",
        passed=lhs_lo >= rhs_cons - 3.0 * se_lhs,
        lhs=lhs,
        rhs=rhs,
        slack=(rhs - rhs_cons) + 3.0 * se_lhs,
        detail=f"d={d} eps={eps:g} M={big_m:g} p0={p0:.4f}",
    )


def check_tail(
    target,
    x: float,
    trials: int = 10_000,
    seed: int = 0,
    norm_kind: str = "sup",
) -> CheckReport:
    """P(|W| - median > x) <= 1 - Phi(x / sigma(W)), with the median
    estimated from the same sample.

    `target` is a SpectralBasis (paths, sup or l2 norm) or a covariance
    matrix (vectors, Euclidean norm).
    """
    if x <= 0:
        raise ValueError(f"need x > 0, got {x}")
    sub_seed = derive_stream(seed, _STREAM_TAIL)
    if isinstance(target, SpectralBasis):
        sigma = math.sqrt(float(np.max(target.diag_variance())))
        norms = np.empty(trials)
        batch = max(1, _BATCH_DOUBLES // target.grid.n)
        done = 0
        while done < trials:
            b = min(batch, trials - done)
            _, paths = kl_path_batch(target, b, sub_seed, start=done)
            norms[done : done + b] = norm_of_paths(
                paths, target.grid.weights, norm_kind
            )
            done += b
    else:
        cov = np.atleast_2d(np.asarray(target, dtype=float))
        sigma = math.sqrt(float(np.max(np.diag(cov))))
        norms = np.linalg.norm(sample_exact(cov, trials, sub_seed), axis=1)
    med = float(np.median(norms))
    exceed = int(np.count_nonzero(norms - med > x))
    p_hat = exceed / trials
    bound = 1.0 - float(ndtr(x / sigma))
    se = math.sqrt(max(p_hat * (1 - p_hat), 1.0 / trials) / trials)
    return CheckReport(
        name="tail",
        passed=p_hat <= bound + 3.0 * se,
        lhs=p_hat,
        rhs=bound,
        slack=3.0 * se,
        detail=f"x={x:g} sigma={sigma:.4f} median={med:.4f}",
    )
