import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import cscluster as cc
from conftest import disjoint_cliques, path_graph
from oracles import dense_filter_apply, quad_cheb_coeff


def _step(lambda_c):
    return lambda lam: (np.asarray(lam) <= lambda_c).astype(float)


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def test_midpoint_step_coefficients():
    poly = cc.cheb_coeffs(1.0, 2.0, m=8, damping="none")
    assert np.isclose(poly.coeffs[0], 0.5, atol=1e-12)
    assert np.isclose(poly.coeffs[1], 2 / np.pi, atol=1e-6)
    assert np.isclose(poly.coeffs[2], 0.0, atol=1e-12)


@pytest.mark.parametrize("lambda_c,lambda_max", [(0.3, 2.0), (1.7, 2.0), (5.0, 12.0)])
def test_step_coefficients_match_quadrature(lambda_c, lambda_max):
    m = 12
    poly = cc.cheb_coeffs(lambda_c, lambda_max, m, damping="none")
    for j in range(m + 1):
        ref = quad_cheb_coeff(_step(lambda_c), j, lambda_max)
        assert abs(poly.coeffs[j] - ref) < 5e-6


def test_jackson_factors_shape():
    g = cc.jackson_damping(40)
    assert np.isclose(g[0], 1.0)
    assert np.all(np.diff(g) <= 1e-12)
    assert g[-1] < 0.01
    assert np.all(g > -1e-12)


def test_damped_tail_error_small():
    poly = cc.cheb_coeffs(0.8, 2.0, m=200, damping="jackson")
    lam = np.linspace(0.0, 2.0, 2000)
    away = np.abs(lam - 0.8) > 0.1 * 2.0
    err = np.abs(poly.evaluate(lam) - _step(0.8)(lam))
    assert err[away].max() <= 0.02


@pytest.mark.parametrize("damping", ["none", "jackson"])
@pytest.mark.parametrize("frac", [0.05, 0.2, 0.5, 0.8, 0.95])
@pytest.mark.parametrize("m", [30, 100])
def test_response_bounded_and_separating(damping, frac, m):
    lambda_max = 2.0
    poly = cc.cheb_coeffs(frac * lambda_max, lambda_max, m, damping=damping)
    grid = poly.evaluate(np.linspace(0.0, lambda_max, 1000))
    assert grid.min() >= -0.15
    assert grid.max() <= 1.15
    assert poly.evaluate(0.0) >= 0.9
    assert poly.evaluate(lambda_max) <= 0.1


def test_cutoff_beyond_spectrum_is_all_pass():
    poly = cc.cheb_coeffs(2.5, 2.0, m=50, damping="none")
    grid = poly.evaluate(np.linspace(0.0, 2.0, 500))
    assert np.allclose(grid, 1.0, atol=1e-9)


def test_sigmoid_response():
    poly = cc.cheb_coeffs(1.0, 2.0, m=60, damping="none", response="sigmoid",
                          sigmoid_sharpness=30.0)
    assert abs(poly.evaluate(1.0) - 0.5) < 1e-3
    assert poly.evaluate(0.0) > 0.99
    assert poly.evaluate(2.0) < 0.01


@pytest.mark.parametrize("kwargs", [
    dict(lambda_c=0.0, lambda_max=2.0, m=10),
    dict(lambda_c=-0.5, lambda_max=2.0, m=10),
    dict(lambda_c=1.0, lambda_max=0.0, m=10),
    dict(lambda_c=1.0, lambda_max=2.0, m=0),
    dict(lambda_c=1.0, lambda_max=2.0, m=10, damping="gauss"),
])
def test_cheb_coeffs_rejects_bad_inputs(kwargs):
    with pytest.raises(ValueError):
        cc.cheb_coeffs(**kwargs)


# ---------------------------------------------------------------------------
# filter application
# ---------------------------------------------------------------------------

def _random_sbm_laplacian(n=60, seed=0):
    params = cc.SbmParams(n=n, k=3, s=10, e=0.2)
    g, _ = cc.sbm_generate(params, seed)
    return cc.laplacian(g)


def test_apply_constant_filter_is_identity():
    lap = _random_sbm_laplacian()
    poly = cc.FilterPoly(5, np.array([1.0, 0, 0, 0, 0, 0]), 1.0, 2.0, "none")
    x = np.random.default_rng(0).normal(size=(lap.n, 4))
    assert np.allclose(cc.apply_filter(lap, poly, x), x, atol=1e-14)


def test_apply_linear_filter_equals_matvec():
    lap = _random_sbm_laplacian()
    # c0 + c1*(1 - 2 lam / lmax) = lam  when  c0 = lmax/2, c1 = -lmax/2
    lmax = lap.lambda_max_bound
    poly = cc.FilterPoly(1, np.array([lmax / 2, -lmax / 2]), 1.0, lmax, "none")
    x = np.random.default_rng(1).normal(size=(lap.n, 3))
    assert np.allclose(cc.apply_filter(lap, poly, x), lap.matrix @ x, atol=1e-10)


@pytest.mark.parametrize("damping", ["none", "jackson"])
def test_apply_filter_matches_dense_oracle(damping):
    lap = _random_sbm_laplacian(seed=4)
    poly = cc.cheb_coeffs(0.7, lap.lambda_max_bound, m=40, damping=damping)
    x = np.random.default_rng(2).normal(size=(lap.n, 5))
    expected = dense_filter_apply(lap.matrix.toarray(), poly, x)
    assert np.allclose(cc.apply_filter(lap, poly, x), expected, atol=1e-8)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(min_value=-3, max_value=3), b=st.floats(min_value=-3, max_value=3))
def test_apply_filter_linear_in_signals(a, b):
    lap = _random_sbm_laplacian(seed=5)
    poly = cc.cheb_coeffs(0.5, lap.lambda_max_bound, m=25)
    rng = np.random.default_rng(3)
    x = rng.normal(size=(lap.n, 2))
    y = rng.normal(size=(lap.n, 2))
    lhs = cc.apply_filter(lap, poly, a * x + b * y)
    rhs = a * cc.apply_filter(lap, poly, x) + b * cc.apply_filter(lap, poly, y)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_apply_filter_counts_matvecs_exactly():
    lap = _random_sbm_laplacian()
    counter = cc.MatvecCounter()
    poly = cc.cheb_coeffs(0.5, lap.lambda_max_bound, m=37)
    x = np.random.default_rng(4).normal(size=(lap.n, 6))
    cc.apply_filter(lap, poly, x, counter)
    assert counter.count == 37 * 6
    cc.apply_filter(lap, poly, x[:, :2], counter)
    assert counter.count == 37 * 6 + 37 * 2


def test_apply_filter_shape_errors():
    lap = _random_sbm_laplacian()
    poly = cc.cheb_coeffs(0.5, lap.lambda_max_bound, m=5)
    with pytest.raises(ValueError):
        cc.apply_filter(lap, poly, np.zeros(lap.n))
    with pytest.raises(ValueError):
        cc.apply_filter(lap, poly, np.zeros((lap.n + 1, 2)))


# ---------------------------------------------------------------------------
# eigencount
# ---------------------------------------------------------------------------

def test_eigencount_all_pass_estimates_n():
    lap = _random_sbm_laplacian(n=100, seed=6)
    est, feats = cc.eigencount(lap, 2.5, d=50, m=100, seed=0)
    assert abs(est - 100) <= 15
    assert feats.values.shape == (100, 50)


def test_eigencount_below_second_eigenvalue_estimates_one():
    lap = _random_sbm_laplacian(n=100, seed=7)
    basis = cc.eigendecompose(lap, 2)
    lam2 = basis.eigenvalues[1]
    est, _ = cc.eigencount(lap, lam2 / 2, d=100, m=300, seed=1)
    assert abs(est - 1.0) <= 0.3


def test_eigencount_unbiased_in_spectral_gap(sbm300):
    _, g, _ = sbm300
    lap = cc.laplacian(g)
    basis = cc.eigendecompose(lap, 4)
    cut = 0.5 * (basis.eigenvalues[-1] + basis.lambda_next)
    ests = [cc.eigencount(lap, cut, d=100, m=300, seed=s)[0] for s in range(50)]
    assert abs(np.mean(ests) - 4.0) <= 0.2


def test_eigencount_monotone_in_cutoff():
    lap = _random_sbm_laplacian(n=120, seed=8)
    cuts = np.linspace(0.05, 1.95, 20)
    ests = [cc.eigencount(lap, c, d=30, m=80, seed=42)[0] for c in cuts]
    rho = stats.spearmanr(cuts, ests).statistic
    assert rho >= 0.95


def test_eigencount_charges_counter():
    lap = _random_sbm_laplacian()
    counter = cc.MatvecCounter()
    cc.eigencount(lap, 0.5, d=9, m=21, seed=0, counter=counter)
    assert counter.count == 21 * 9


# ---------------------------------------------------------------------------
# cutoff search
# ---------------------------------------------------------------------------

def test_find_lambda_k_path_graph():
    lap = cc.laplacian(path_graph(3), "normalized")  # spectrum {0, 1, 2}
    est, feats, iters = cc.find_lambda_k(lap, 2, d=300, m=200, seed=3)
    assert 1.0 < est < 2.0
    assert feats.values.shape == (3, 300)
    assert iters >= 1


def test_find_lambda_k_components_accepts_below_gap():
    g, _ = disjoint_cliques(2, 5)
    lap = cc.laplacian(g)  # two zero eigenvalues, next at 1.25
    # whether the count accepts early or the width stop fires, the returned
    # cutoff must land strictly between the component eigenvalues and the rest
    for seed in range(5):
        est, _, iters = cc.find_lambda_k(lap, 2, d=200, m=100, seed=seed)
        assert 0.0 < est < 1.25
        assert iters >= 1


def test_find_lambda_k_charges_iterations_times_block():
    lap = _random_sbm_laplacian(n=120, seed=9)
    counter = cc.MatvecCounter()
    _, _, iters = cc.find_lambda_k(lap, 3, d=40, m=30, seed=5, counter=counter)
    assert counter.count == iters * 30 * 40


def test_find_lambda_k_warm_start_saves_iterations(sbm300):
    params, _, _ = sbm300
    wins = 0
    for seed in range(50):
        g1, labels = cc.sbm_generate(params, seed)
        l1 = cc.laplacian(g1)
        lam_prev, _, _ = cc.find_lambda_k(l1, 4, d=150, m=80, seed=seed)
        g2 = cc.perturb_edges(g1, 0.03, params, labels, seed + 1000)
        l2 = cc.laplacian(g2)
        _, _, cold = cc.find_lambda_k(l2, 4, d=150, m=80, seed=seed + 1)
        # warm interval centered on the previous estimate: first probe reuses it
        _, _, warm = cc.find_lambda_k(l2, 4, d=150, m=80, seed=seed + 1,
                                      interval=(0.5 * lam_prev, 1.5 * lam_prev))
        wins += warm <= cold
    assert wins >= 40


def test_warm_interval_helper():
    assert cc.warm_interval(0.5, 2.0) == (0.25, 1.0)
    assert cc.warm_interval(1.5, 2.0) == (0.75, 2.0)


def test_find_lambda_k_nonconvergence_error():
    g, _ = disjoint_cliques(2, 5)
    lap = cc.laplacian(g)
    with pytest.raises(cc.EigencountSearchError) as err:
        cc.find_lambda_k(lap, 2, d=100, m=60, seed=6, interval=(1.9, 2.0),
                         tol=0.0, max_iters=2)
    assert err.value.iterations == 2
    assert err.value.last_estimate > 5  # the whole spectrum passes up there
    assert 1.9 < err.value.last_cutoff < 2.0


def test_find_lambda_k_rejects_bad_interval():
    lap = _random_sbm_laplacian()
    with pytest.raises(ValueError):
        cc.find_lambda_k(lap, 3, d=10, interval=(1.0, 0.5))
    with pytest.raises(ValueError):
        cc.find_lambda_k(lap, lap.n, d=10)


# ---------------------------------------------------------------------------
# approximation error against the ideal projector
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("cut_on_eigenvalue", [False, True])
def test_filtered_block_close_to_ideal_projection(cut_on_eigenvalue):
    params = cc.SbmParams(n=120, k=3, s=12, e=0.1)
    g, _ = cc.sbm_generate(params, 11)
    lap = cc.laplacian(g)
    basis = cc.eigendecompose(lap, 3)
    cut = basis.eigenvalues[-1] if cut_on_eigenvalue \
        else 0.5 * (basis.eigenvalues[-1] + basis.lambda_next)
    poly = cc.cheb_coeffs(cut, lap.lambda_max_bound, m=250, damping="jackson")
    r = cc.random_signals(120, 40, seed=12)
    approx = cc.apply_filter(lap, poly, r)
    ideal = cc.ideal_projector_apply(basis, r)
    grid = np.linspace(0.0, lap.lambda_max_bound, 4000)
    worst = np.abs(poly.evaluate(grid) - _step(cut)(grid)).max()
    assert np.linalg.norm(approx - ideal) <= worst * np.linalg.norm(r) + 1e-6


def test_matvec_counter_thread_safe_interface():
    counter = cc.MatvecCounter()
    counter.add(3)
    counter.add(4)
    assert counter.count == 7
