import numpy as np
import pytest

from driftlab import (
    DegenerateSampleError,
    DriftSpec,
    ModelParams,
    SineBasis,
    TimeGrid,
    VolatilityProfile,
    basis_derivative,
    basis_fn,
    drift_inner_product,
    drift_inner_products,
    eigenvalue,
    gamma_fn,
    noise_stream,
    observed_coefficient,
    observed_path,
    orthonormal_fn,
    reconstruct_path,
    simulate_noise,
    simulate_path,
    stieltjes_cumulative,
)

import oracles


PARAMS = ModelParams(sigma=1.0, T=1.0, alpha=1.0)


class TestModelTypes:
    def test_params_validation(self):
        with pytest.raises(ValueError):
            ModelParams(sigma=0.0, T=1.0)
        with pytest.raises(ValueError):
            ModelParams(sigma=1.0, T=-2.0)

    def test_grid_basics(self):
        grid = TimeGrid(8, 2.0)
        assert grid.points[0] == 0.0
        assert grid.points[-1] == 2.0
        assert grid.dt == 0.25
        w = grid.trapezoid_weights()
        assert w.shape == (9,)
        assert np.isclose(w.sum(), 2.0)
        assert w[0] == w[-1] == grid.dt / 2

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(0, 1.0)
        with pytest.raises(ValueError):
            TimeGrid(16, 0.0)

    def test_profile_constant_and_piecewise(self):
        const = VolatilityProfile.constant(2.0)
        assert const.is_constant
        assert float(const.value(0.3)) == 2.0
        two = VolatilityProfile(levels=(1.0, 3.0), breakpoints=(0.5,))
        assert not two.is_constant
        assert float(two.value(0.25)) == 1.0
        assert float(two.value(0.75)) == 3.0
        segs = list(two.segments(1.0))
        assert segs == [(0.0, 0.5, 1.0), (0.5, 1.0, 3.0)]

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            VolatilityProfile(levels=(1.0, -1.0), breakpoints=(0.5,))
        with pytest.raises(ValueError):
            VolatilityProfile(levels=(1.0, 2.0, 3.0), breakpoints=(0.7, 0.2))
        with pytest.raises(ValueError):
            VolatilityProfile(levels=(1.0,), breakpoints=(0.5,))


class TestBasis:
    def test_boundary_values(self):
        for k in (1, 2, 7):
            assert basis_fn(k, 0.0, PARAMS) == 0.0
            assert orthonormal_fn(k, 0.0, PARAMS) == 0.0

    def test_gamma_multiplies_by_sigma_sq(self):
        params = ModelParams(sigma=3.0, T=2.0)
        t = np.linspace(0.0, 2.0, 11)
        np.testing.assert_allclose(
            gamma_fn(2, t, params), 9.0 * basis_fn(2, t, params), rtol=1e-14
        )

    def test_eigenvalues_decreasing(self):
        lam = np.array([eigenvalue(k, PARAMS) for k in range(1, 9)])
        assert np.all(lam > 0)
        assert np.all(np.diff(lam) < 0)
        assert np.isclose(lam[0], 1.0 / (np.pi * 0.5))

    def test_orthonormal_under_grid_quadrature(self):
        # products of the first few sine modes integrate exactly under
        # the trapezoid rule on a uniform grid
        grid = TimeGrid(512, 1.0)
        w = grid.trapezoid_weights()
        mat = SineBasis(1.0, 1.0, 8).orthonormal_matrix(grid)
        gram = (mat * w) @ mat.T
        np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)

    def test_derivative_pairing(self):
        # <h_j, h_k> = int hdot_j hdot_k dt = delta_jk / sigma^2
        params = ModelParams(sigma=2.0, T=1.5)
        grid = TimeGrid(512, 1.5)
        w = grid.trapezoid_weights()
        der = SineBasis(2.0, 1.5, 6).derivative_matrix(grid)
        gram = (der * w) @ der.T
        np.testing.assert_allclose(gram, np.eye(6) / 4.0, atol=1e-12)

    def test_kernel_eigensystem_oracle(self):
        # lambda_k^2 and e_k are the eigenpairs of the covariance kernel
        sigma, T = 1.3, 0.7
        vals, vecs, t = oracles.kernel_eigensystem(sigma, T, 400)
        params = ModelParams(sigma=sigma, T=T)
        for k in range(1, 5):
            lam = eigenvalue(k, params)
            assert abs(vals[k - 1] / lam**2 - 1.0) < 1e-3
            ek = orthonormal_fn(k, t, params)
            vk = vecs[:, k - 1]
            if np.dot(vk, ek) < 0:
                vk = -vk
            assert np.max(np.abs(vk - ek)) < 1e-3

    def test_index_and_time_validation(self):
        with pytest.raises(ValueError):
            basis_fn(0, 0.5, PARAMS)
        with pytest.raises(ValueError):
            basis_derivative(2, 1.5, PARAMS)
        with pytest.raises(ValueError):
            orthonormal_fn(1, -0.1, PARAMS)


class TestDriftSpecs:
    def test_linear_values(self):
        u = DriftSpec.linear(2.5)
        t = np.linspace(0.0, 1.0, 5)
        np.testing.assert_allclose(u.values(t, PARAMS), 2.5 * t)
        np.testing.assert_allclose(u.derivative_values(t, PARAMS), 2.5)

    def test_linear_inner_products_against_quadrature(self):
        params = ModelParams(sigma=1.7, T=2.0, alpha=0.8)
        u = DriftSpec.linear(0.8)
        t = np.linspace(0.0, 2.0, 40001)
        for k in (1, 2, 3, 8):
            hdot = basis_derivative(k, t, params)
            ref = np.trapezoid(0.8 * hdot, t)
            assert abs(drift_inner_product(u, k, params) - ref) < 1e-8

    def test_inner_products_vector_matches_scalar(self):
        u = DriftSpec.linear(1.0)
        vec = drift_inner_products(u, 6, PARAMS)
        for k in range(1, 7):
            assert vec[k - 1] == drift_inner_product(u, k, PARAMS)

    def test_alternating_signs_for_linear_drift(self):
        vec = drift_inner_products(DriftSpec.linear(1.0), 6, PARAMS)
        assert np.all(vec[::2] > 0)
        assert np.all(vec[1::2] < 0)

    def test_coefficient_drift_inner_products(self):
        params = ModelParams(sigma=2.0, T=1.0)
        u = DriftSpec.from_coefficients([1.0, -0.5, 0.25])
        vec = drift_inner_products(u, 5, params)
        np.testing.assert_allclose(vec, [0.25, -0.125, 0.0625, 0.0, 0.0])

    def test_coefficient_drift_curve(self):
        params = ModelParams(sigma=2.0, T=1.0)
        u = DriftSpec.from_coefficients([0.0, 1.0])
        t = np.linspace(0.0, 1.0, 9)
        np.testing.assert_allclose(u.values(t, params), basis_fn(2, t, params))

    def test_tabulated_derivative_matches_linear(self):
        grid = TimeGrid(2048, 1.0)
        u_tab = DriftSpec.from_tabulated_derivative(
            np.full(grid.points.shape, 1.0), grid
        )
        u_lin = DriftSpec.linear(1.0)
        np.testing.assert_allclose(
            u_tab.values(grid.points, PARAMS), u_lin.values(grid.points, PARAMS),
            atol=1e-12,
        )
        for k in (1, 2, 5):
            assert abs(
                drift_inner_product(u_tab, k, PARAMS) - drift_inner_product(u_lin, k, PARAMS)
            ) < 1e-6


class TestNoiseStreams:
    def test_reproducible_and_distinct(self):
        a = noise_stream(42, 7).standard_normal(6)
        b = noise_stream(42, 7).standard_normal(6)
        c = noise_stream(42, 8).standard_normal(6)
        d = noise_stream(43, 7).standard_normal(6)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert not np.array_equal(a, d)

    def test_prefix_stability(self):
        # reading a longer block from a fresh stream keeps the prefix:
        # this is what lets different truncation levels share replicates
        short = noise_stream(5, 3).standard_normal(4)
        long = noise_stream(5, 3).standard_normal(64)
        np.testing.assert_array_equal(short, long[:4])

    def test_seed_validation(self):
        with pytest.raises(ValueError):
            noise_stream(-1, 0)
        with pytest.raises(ValueError):
            noise_stream(0, 2**64)

    def test_simulate_noise_shape(self):
        eta = simulate_noise(1, 2, 32)
        assert eta.shape == (32,)
        np.testing.assert_array_equal(eta, noise_stream(1, 2).standard_normal(32))


class TestPathConstruction:
    def test_expansion_reproduces_single_mode(self):
        grid = TimeGrid(128, 1.0)
        eta = np.zeros(16)
        eta[2] = 1.0
        path = reconstruct_path(eta, grid, PARAMS)
        expected = eigenvalue(3, PARAMS) * orthonormal_fn(3, grid.points, PARAMS)
        np.testing.assert_allclose(path, expected, atol=1e-14)

    def test_simulated_path_fields(self):
        grid = TimeGrid(64, 1.0)
        u = DriftSpec.linear(1.0)
        s = simulate_path(9, 4, u, PARAMS, grid, 32)
        assert s.x[0] == 0.0
        assert s.n_basis == 32
        np.testing.assert_array_equal(s.x, s.xu + s.u)
        np.testing.assert_allclose(s.u, grid.points, atol=1e-15)
        assert s.seed == 9 and s.replicate_index == 4

    def test_observed_path_rejects_bad_eta(self):
        grid = TimeGrid(16, 1.0)
        u = DriftSpec.linear(1.0)
        with pytest.raises(ValueError):
            observed_path(np.zeros((3, 2)), u, grid, PARAMS)

    def test_path_variance_matches_eigenvalues(self):
        # Var X^u_T = sum_k lambda_k^2 e_k(T)^2; T is where the sine
        # basis concentrates, a sharp check of the scaling
        grid = TimeGrid(2, 1.0)
        n = 256
        var_theory = sum(
            eigenvalue(k, PARAMS) ** 2 * orthonormal_fn(k, 1.0, PARAMS) ** 2
            for k in range(1, n + 1)
        )
        acc = 0.0
        reps = 4000
        for rep in range(reps):
            eta = simulate_noise(12, rep, n)
            acc += reconstruct_path(eta, grid, PARAMS)[-1] ** 2
        mc = acc / reps
        # fourth-moment stderr of the variance estimate
        se = var_theory * np.sqrt(2.0 / reps)
        assert abs(mc - var_theory) < 4 * se


class TestObservedCoefficients:
    def test_identity_mode_recovers_scaled_coefficient(self):
        grid = TimeGrid(256, 1.0)
        u = DriftSpec.linear(1.0)
        s = simulate_path(3, 0, u, PARAMS, grid, 64)
        for k in (1, 2, 5):
            lam = eigenvalue(k, PARAMS)
            expected = (s.eta[k - 1] + drift_inner_product(u, k, PARAMS)) / lam
            assert observed_coefficient(s, u, k) == expected

    def test_quadrature_mode_near_identity_mode(self):
        grid = TimeGrid(2048, 1.0)
        u = DriftSpec.linear(1.0)
        s = simulate_path(21, 0, u, PARAMS, grid, 512)
        for k in (1, 2, 3):
            ident = observed_coefficient(s, u, k, method="identity")
            quadr = observed_coefficient(s, u, k, method="quadrature")
            assert abs(ident - quadr) < 2e-2

    def test_unknown_method_rejected(self):
        grid = TimeGrid(16, 1.0)
        u = DriftSpec.linear(1.0)
        s = simulate_path(0, 0, u, PARAMS, grid, 8)
        with pytest.raises(ValueError):
            observed_coefficient(s, u, 1, method="midpoint")


class TestStieltjesCumulative:
    def test_against_naive_left_sums(self):
        rng = np.random.default_rng(11)
        values = np.cumsum(rng.standard_normal(33))
        values[0] = 0.0
        weights = np.repeat(rng.uniform(0.2, 2.0, size=4), (8, 8, 8, 8))
        out = stieltjes_cumulative(values, weights)
        naive = np.zeros_like(values)
        for j in range(32):
            naive[j + 1] = naive[j] + weights[j] * (values[j + 1] - values[j])
        np.testing.assert_allclose(out, naive, atol=1e-12)

    def test_constant_half_weight_telescopes_exactly(self):
        rng = np.random.default_rng(5)
        values = rng.standard_normal(65)
        out = stieltjes_cumulative(values, np.full(64, 0.5))
        np.testing.assert_array_equal(out, 0.5 * (values - values[0]))

    def test_batched_rows(self):
        rng = np.random.default_rng(7)
        values = rng.standard_normal((3, 17))
        weights = rng.uniform(0.5, 1.5, size=16)
        out = stieltjes_cumulative(values, weights)
        for i in range(3):
            np.testing.assert_allclose(
                out[i], stieltjes_cumulative(values[i], weights), rtol=1e-15
            )

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            stieltjes_cumulative(np.zeros(5), np.zeros(3))


def test_degenerate_error_carries_replicate():
    err = DegenerateSampleError("boom", replicate=17)
    assert err.replicate == 17
    assert isinstance(err, RuntimeError)
