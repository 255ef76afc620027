"""Acceptance suite: one test per criterion, each printing a pass line.

Tolerances are pinned here, not configurable.  Statistical checks use
3-standard-error slack on fixed seeds; everything else is deterministic.
"""

import math
import time

import numpy as np
from scipy.special import ndtr, ndtri

import gprior as gp
from gprior.cli import main as cli_main
from gprior.concentration import approx_term, fit_loglog
from gprior.sampler import kl_path_batch
from gprior.verify_structure import brute_split_cost, optimal_split_cost


def _ok(num, msg):
    print(f"criterion {num:2d} PASS: {msg}")


def test_criterion_01_spectral_correctness(bm_basis_2001):
    t0 = time.time()
    exact = np.array([((k - 0.5) * math.pi) ** -2 for k in range(1, 6)])
    rel = np.abs(bm_basis_2001.lam[:5] - exact) / exact
    elapsed = time.time() - t0
    assert np.max(rel) <= 0.01
    assert elapsed < 30.0
    _ok(1, f"top-5 eigenvalues within {np.max(rel):.2e} of closed form")


def test_criterion_02_reproducing_property(bm_basis_1001, rl1_basis_1001):
    worst = 0.0
    for basis, spec in (
        (bm_basis_1001, gp.BrownianMotion()),
        (rl1_basis_1001, gp.RiemannLiouville(alpha=1.0)),
    ):
        n = basis.grid.n
        for s in (0.25, 0.5, 0.75):
            idx = int(round(s * (n - 1)))
            e = gp.RkhsElement(basis, basis.lam * basis.phi[:, idx])
            expect = math.sqrt(gp.kernel_eval(spec, s, s))
            worst = max(worst, abs(gp.rkhs_norm_series(e) - expect) / expect)
    assert worst <= 0.02
    _ok(2, f"|K(s,.)|_H = sqrt(K(s,s)) within {worst:.2%}")


def test_criterion_03_cameron_martin(scalar_basis):
    g = gp.make_grid(101)
    basis = gp.eig_basis(gp.BrownianMotion(), g, 1e-10)
    h = gp.element_from_function(gp.grid_function(g, lambda t: t), basis)
    total, total_sq, n_draws = 0.0, 0.0, 1_000_000
    batch = 100_000
    for start in range(0, n_draws, batch):
        z, _ = kl_path_batch(basis, batch, 1234, start=start)
        vals = np.exp(gp.cm_log_ratio_batch(h, z))
        total += vals.sum()
        total_sq += (vals**2).sum()
    mean = total / n_draws
    se = math.sqrt(max(total_sq / n_draws - mean**2, 0.0) / n_draws)
    assert abs(mean - 1.0) <= 3.0 * se

    mu = 1.3
    h1 = gp.RkhsElement(scalar_basis, np.array([mu]))
    worst = 0.0
    for d in gp.sample_kl(scalar_basis, 100, 55):
        expect = mu * d.z[0] - mu * mu / 2.0
        worst = max(worst, abs(gp.cm_log_ratio(h1, d) - expect))
    assert worst <= 1e-12
    _ok(3, f"E[exp] = {mean:.5f} (+- {se:.5f}); scalar ratio exact to {worst:.1e}")


def test_criterion_04_shift_inequality(scalar_basis):
    lhs = ndtr(1.5) - ndtr(0.5)
    rhs = math.exp(-0.5) * (ndtr(0.5) - ndtr(-0.5))
    assert abs(lhs - 0.2417) <= 1e-4
    assert abs(rhs - 0.2322) <= 1e-4

    configs = [
        ("bm", "l2", 0.5),
        ("released-bm", "l2", 0.98),
        ("ibm:k=1", "l2", 0.23),
        ("rl:alpha=0.75", "l2", 0.41),
        ("bm", "sup", 0.6),
    ]
    g = gp.make_grid(101)
    for kernel, norm_kind, eps in configs:
        basis = gp.eig_basis(gp.parse_kernel(kernel), g, 1e-10)
        h = gp.element_from_function(gp.grid_function(g, lambda t: t), basis)
        h = gp.RkhsElement(basis, h.w / gp.rkhs_norm_series(h))
        rep = gp.check_shift_inequality(basis, h, eps, norm_kind, 100_000, 77)
        assert rep.passed, f"{kernel}/{norm_kind}/{eps}: {rep}"
    _ok(4, f"scalar oracle {lhs:.4f} >= {rhs:.4f}; 5 catalog configs pass")


def test_criterion_05_sandwich(bm_basis_201):
    t0 = time.time()
    w = gp.grid_function(bm_basis_201.grid, lambda t: t)
    for eps in (0.4, 0.2):
        rep = gp.check_sandwich(bm_basis_201, w, eps, "l2", 100_000, 7)
        assert rep.passed, rep
    elapsed = time.time() - t0
    assert elapsed < 60.0
    _ok(5, f"phi_w(eps) <= MC <= phi_w(eps/2) at eps 0.4 and 0.2 ({elapsed:.0f}s)")


def test_criterion_06_borell():
    lhs = 2.0 * ndtr(1.1) - 1.0
    p0 = 2.0 * ndtr(0.1) - 1.0
    rhs = float(ndtr(ndtri(p0) + 1.0))
    assert abs(lhs - 0.7287) <= 1e-3
    assert abs(rhs - 0.342) <= 1e-3
    assert lhs >= rhs
    rep = gp.check_borell(np.eye(2), 0.5, 2.0, 100_000, 21)
    assert rep.passed
    _ok(6, f"scalar {lhs:.4f} >= {rhs:.4f}; 2-D MC check passes")


def test_criterion_07_optimizer(toy2d_basis):
    b = toy2d_basis
    rng = np.random.default_rng(14)
    worst_l2 = worst_kkt = 0.0
    for _ in range(5):
        wc = rng.normal(size=2) * np.array([1.0, 0.7])
        w = gp.reconstruct(wc, b)
        eps = float(rng.uniform(0.15, 0.5))
        value, h, _ = approx_term(w, b, eps, "l2")

        if float(np.sum(wc**2)) <= eps**2:
            oracle = 0.0
        else:
            th = np.linspace(0.0, 2.0 * math.pi, 2_000_001)
            vals = 0.5 * ((wc[0] + eps * np.cos(th)) ** 2 / b.lam[0]
                          + (wc[1] + eps * np.sin(th)) ** 2 / b.lam[1])
            oracle = float(np.min(vals))
        worst_l2 = max(worst_l2, abs(value - oracle))

        if np.max(np.abs(h)) > 1e-12:
            j = int(np.argmax(np.abs(h)))
            mu = h[j] / (b.lam[j] * (wc[j] - h[j]))
            worst_kkt = max(
                worst_kkt,
                float(np.max(np.abs(h * (1.0 + mu * b.lam) - mu * b.lam * wc))),
            )

        v_l2 = value
        v_sup, _, gap = approx_term(w, b, eps, "sup")
        assert v_l2 - 1e-9 <= v_sup
        assert v_sup <= _sup_zoom(b, w, eps) + gap + 1e-9
    assert worst_l2 <= 1e-4
    assert worst_kkt <= 1e-8
    _ok(7, f"l2 vs brute {worst_l2:.1e}; KKT residual {worst_kkt:.1e}; sup brackets hold")


def _sup_zoom(b, w, eps):
    center = gp.project(w, b)
    span, best = 3.0, np.inf
    for _ in range(4):
        g1 = np.linspace(center[0] - span, center[0] + span, 401)
        g2 = np.linspace(center[1] - span, center[1] + span, 401)
        H1, H2 = np.meshgrid(g1, g2, indexing="ij")
        paths = (H1[..., None] * b.phi[0] + H2[..., None] * b.phi[1]
                 - w.values[None, None, :])
        feas = np.max(np.abs(paths), axis=2) <= eps
        q = np.where(feas, 0.5 * (H1**2 / b.lam[0] + H2**2 / b.lam[1]), np.inf)
        idx = np.unravel_index(np.argmin(q), q.shape)
        best = q[idx]
        center = np.array([H1[idx], H2[idx]])
        span /= 50.0
    return float(best)


def test_criterion_08_rate_solver():
    worst = 0.0
    for alpha in (1.0, 2.0, 4.0):
        for n in (1e3, 1e6):
            sol = gp.solve_rate(lambda e, a=alpha: e**-a, n)
            expect = n ** (-1.0 / (2.0 + alpha))
            worst = max(worst, abs(sol.eps_n - expect) / expect)
    assert worst <= 1e-6
    _ok(8, f"eps_n = n^(-1/(2+alpha)) to {worst:.1e} relative")


def test_criterion_09_exponent_calculus():
    assert gp.exponent_translate(2.0, 0.0) == (1.0, 0.0)
    seq = [gp.exponent_translate(a, 0.0)[0] for a in np.geomspace(0.1, 1e8, 40)]
    assert all(x < y for x, y in zip(seq, seq[1:]))
    assert seq[-1] < 2.0 and 2.0 - seq[-1] <= 1e-6
    _ok(9, "translate (2,0) -> (1,0); monotone in alpha with limit 2")


def test_criterion_10_approximation_slopes(grid201):
    t0 = time.time()
    t = grid201.points
    g_ibm = gp.gram(gp.IntegratedBrownianMotion(k=1), grid201)
    ident = gp.GridFunction(grid201, t.copy())

    pinned = gp.eig_basis(gp.FiniteDimCovariance(1.0 + g_ibm), grid201, 1e-10)
    pts = [(eps, approx_term(ident, pinned, eps, "sup")[0])
           for eps in (0.2, 0.1, 0.05, 0.02)]
    slope_pinned, _ = fit_loglog(pts)
    assert slope_pinned >= 0.85

    released = gp.eig_basis(
        gp.FiniteDimCovariance(1.0 + np.outer(t, t) + g_ibm), grid201, 1e-10
    )
    pts_id = [(eps, approx_term(ident, released, eps, "sup")[0])
              for eps in (0.2, 0.1, 0.05, 0.02)]
    slope_released_id, _ = fit_loglog(pts_id)
    assert slope_released_id <= 0.8

    # the 2/3 power law needs a target of matching (3/2) roughness; the
    # identity sits inside the released space so its cost saturates at
    # |id|^2/2 instead of growing
    g401 = gp.make_grid(401)
    t4 = g401.points
    rel4 = gp.eig_basis(
        gp.FiniteDimCovariance(
            1.0 + np.outer(t4, t4) + gp.gram(gp.IntegratedBrownianMotion(k=1), g401)
        ),
        g401, 1e-10,
    )
    rough = gp.reconstruct(50.0 * np.arange(1, rel4.m + 1) ** -2.0, rel4)
    pts_rough = [(eps, approx_term(rough, rel4, eps, "l2")[0])
                 for eps in (0.2, 0.1, 0.05, 0.02)]
    slope_released, _ = fit_loglog(pts_rough)
    assert 0.5 <= slope_released <= 0.8
    elapsed = time.time() - t0
    assert elapsed < 120.0
    _ok(10, f"pinned-derivative slope {slope_pinned:.2f} >= 0.85; released "
            f"{slope_released:.2f} in [0.5, 0.8] ({elapsed:.0f}s)")


def test_criterion_11_structure(bm_basis_201):
    from gprior.verify_structure import default_structural_elements

    elems = default_structural_elements(bm_basis_201, count=3, seed=2)
    rep = gp.check_isometry_integration(bm_basis_201, 1, elems, rel_tol=0.05)
    assert rep.passed

    g = bm_basis_201.grid
    rep2 = gp.check_direct_sum(gp.grid_function(g, lambda t: 0.3 + np.sin(t)))
    assert rep2.passed

    worst = 0.0
    for mu, mup in [(3.0, 4.0), (0.5, 0.125), (1.0, 1.0)]:
        closed = 1.0 / (mu**2 + mup**2)
        worst = max(worst, abs(optimal_split_cost(mu, mup) - closed),
                    abs(brute_split_cost(mu, mup) - closed))
    assert worst <= 1e-10
    rep3 = gp.check_shared_basis_counterexample([3.0], [4.0], g)
    assert rep3.passed
    _ok(11, f"isometry within {rep.lhs:.1e}; direct sum exact; "
            f"split identity to {worst:.1e}")


def test_criterion_12_determinism(tmp_path):
    texts = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code = cli_main([
            "verify", "--kernel", "bm", "--n", "101", "--trials", "20000",
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]
    _ok(12, "two `verify --seed 7` runs produced byte-identical output")
