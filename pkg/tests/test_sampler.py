import math

import numpy as np
import pytest

import gprior as gp
from gprior.sampler import kl_path_batch


def test_deterministic_and_subsettable(bm_basis_201):
    b = bm_basis_201
    z1, p1 = kl_path_batch(b, 50, 99)
    z2, p2 = kl_path_batch(b, 50, 99)
    assert np.array_equal(z1, z2) and np.array_equal(p1, p2)
    z_sub, _ = kl_path_batch(b, 10, 99, start=30)
    assert np.array_equal(z1[30:40], z_sub)


def test_sample_kl_objects(bm_basis_201):
    draws = gp.sample_kl(bm_basis_201, 3, 5)
    assert len(draws) == 3
    d = draws[1]
    expect = (d.z * np.sqrt(bm_basis_201.lam)) @ bm_basis_201.phi
    assert np.array_equal(d.path.values, expect)
    with pytest.raises(ValueError):
        gp.sample_kl(bm_basis_201, 0, 5)


def test_single_mode_paths_are_scalar_normals(scalar_basis):
    z, paths = kl_path_batch(scalar_basis, 1000, 3)
    # phi = 1, lam = 1: every path is the constant z_1
    assert np.allclose(paths, z[:, :1] @ np.ones((1, paths.shape[1])), atol=1e-12)
    assert abs(z.mean()) <= 3.0 / math.sqrt(1000)


def test_path_moments_match_kernel(bm_basis_201):
    b = bm_basis_201
    count = 30000
    _, paths = kl_path_batch(b, count, 42)
    pts = b.grid.points
    for i, j in [(60, 140), (100, 100), (20, 180)]:
        prod = paths[:, i] * paths[:, j]
        se = prod.std() / math.sqrt(count)
        assert abs(prod.mean() - min(pts[i], pts[j])) <= 3.0 * se
    mean_se = paths.std(axis=0) / math.sqrt(count)
    assert np.all(np.abs(paths.mean(axis=0)) <= 3.0 * mean_se + 1e-12)


def test_sample_exact():
    draws = gp.sample_exact(np.eye(2), 40000, 11)
    cov = draws.T @ draws / len(draws)
    assert np.max(np.abs(cov - np.eye(2))) <= 0.03
    draws = gp.sample_exact(np.diag([4.0, 1.0]), 40000, 12)
    var = draws.var(axis=0)
    assert abs(var[0] - 4.0) <= 4.0 * 3.0 * math.sqrt(2.0 / 40000)
    assert abs(var[1] - 1.0) <= 1.0 * 3.0 * math.sqrt(2.0 / 40000)
    zeros = gp.sample_exact(np.zeros((2, 2)), 10, 1)
    assert np.array_equal(zeros, np.zeros((10, 2)))
    with pytest.raises(ValueError):
        gp.sample_exact(np.array([[1.0, 2.0], [2.0, 1.0]]), 10, 1)


def test_cm_log_ratio_zero_shift(bm_basis_201):
    b = bm_basis_201
    h0 = gp.RkhsElement(b, np.zeros(b.m))
    for d in gp.sample_kl(b, 5, 2):
        assert gp.cm_log_ratio(h0, d) == 0.0


def test_cm_log_ratio_scalar_closed_form(scalar_basis):
    mu = 0.7
    h = gp.RkhsElement(scalar_basis, np.array([mu]))
    for d in gp.sample_kl(scalar_basis, 50, 21):
        z = d.z[0]
        expect = mu * z - mu * mu / 2.0  # log N(mu,1)/N(0,1) density ratio
        assert abs(gp.cm_log_ratio(h, d) - expect) <= 1e-12


def test_cm_expectation_is_one(bm_basis_201):
    b = bm_basis_201
    h = gp.element_from_function(gp.grid_function(b.grid, lambda t: t), b)
    z, _ = kl_path_batch(b, 100000, 7)
    vals = np.exp(gp.cm_log_ratio_batch(h, z))
    se = vals.std() / math.sqrt(len(vals))
    assert abs(vals.mean() - 1.0) <= 3.0 * se


def test_change_of_measure_identity(bm_basis_201):
    """Shifting the paths equals reweighting by the density ratio, for a
    sup-ball indicator functional."""
    b = bm_basis_201
    h = gp.element_from_function(gp.grid_function(b.grid, lambda t: 0.5 * t), b)
    h_vals = h.function().values
    count = 60000
    z, paths = kl_path_batch(b, count, 31)
    sup_shifted = np.max(np.abs(paths + h_vals), axis=1)
    lhs = sup_shifted < 0.8
    weights = np.exp(gp.cm_log_ratio_batch(h, z))
    # P(W + h in C) = E[1_C(W) dP(W-h)/dP  ... transported to the draw]
    rhs = (np.max(np.abs(paths), axis=1) < 0.8) * weights
    se = math.hypot(lhs.std() / math.sqrt(count), rhs.std() / math.sqrt(count))
    assert abs(lhs.mean() - rhs.mean()) <= 3.0 * se


def test_truncation_variance_monotone(bm_basis_201):
    b = bm_basis_201
    last = b.grid.n - 1
    theory = []
    sampled = []
    for m in (5, 20, b.m):
        sub = gp.SpectralBasis(b.grid, b.lam[:m], b.phi[:m], b.truncation_tol)
        theory.append(float(np.sum(sub.lam * sub.phi[:, last] ** 2)))
        _, paths = kl_path_batch(sub, 20000, 13)
        sampled.append(paths[:, last].var())
    assert theory[0] < theory[1] < theory[2] <= 1.0 + 1e-6
    for th, sa in zip(theory, sampled):
        assert abs(sa - th) <= 3.0 * th * math.sqrt(2.0 / 20000)


def test_clipped_tail_trace(bm_basis_201):
    from gprior.sampler import clipped_tail_trace

    gap_full = clipped_tail_trace(bm_basis_201, gp.BrownianMotion())
    assert 0.0 <= gap_full <= 1e-8  # full clipped basis keeps the trace
    sub = gp.SpectralBasis(
        bm_basis_201.grid, bm_basis_201.lam[:10], bm_basis_201.phi[:10],
        bm_basis_201.truncation_tol,
    )
    gap_sub = clipped_tail_trace(sub, gp.BrownianMotion())
    expect = 0.5 - float(np.sum(bm_basis_201.lam[:10]))  # kernel trace is 1/2
    assert abs(gap_sub - expect) <= 1e-8


def test_backend_bit_identical():
    pytest.importorskip("gprior._rng_cy")
    from gprior import _rng_cy, _rng_py

    a = _rng_py.standard_normals(123, 7, 500, 17)
    b = _rng_cy.standard_normals(123, 7, 500, 17)
    assert np.array_equal(a, b)
    assert np.array_equal(
        _rng_py.raw_words(9, 0, 200, 5), _rng_cy.raw_words(9, 0, 200, 5)
    )


def test_derived_streams_differ():
    from gprior.backend import derive_stream, standard_normals

    s1 = derive_stream(7, 1)
    s2 = derive_stream(7, 2)
    assert s1 != s2
    a = standard_normals(s1, 0, 100, 4)
    b = standard_normals(s2, 0, 100, 4)
    assert not np.array_equal(a, b)
