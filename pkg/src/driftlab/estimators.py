"""Drift estimators: efficient, Bayes (independent-increment), and Stein-type.

The efficient estimator is the observed path itself.  The Bayes estimator
under a centered independent-increment Gaussian prior shrinks the
observation toward the prior mean drift with weight tau^2/(tau^2+sigma^2).
The Stein-type family perturbs the efficient estimator by the logarithmic
gradient of a cylindrical functional

    F_{n,a,b} = ( sum_{i<=n} (lambda_i^{-1} X^u(h_i) + b_i)^2 )^(a/2)

whose Laplacian ratios admit scalar closed forms, which is what makes the
risk identities checkable replicate by replicate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .process_sim import (
    DegenerateSampleError,
    DriftSpec,
    ModelParams,
    PathSample,
    SineBasis,
    TimeGrid,
    VolatilityProfile,
    drift_inner_products,
    stieltjes_cumulative,
)


@dataclass(frozen=True)
class EstimateSeries:
    """Grid values of one estimator, tagged with its family label."""

    values: np.ndarray
    label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("estimate contains non-finite values")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class BayesSpec:
    """Gaussian prior on the drift: volatility profile tau and mean drift v."""

    tau: VolatilityProfile
    v: DriftSpec

    @classmethod
    def centered(cls, tau_level):
        return cls(tau=VolatilityProfile.constant(tau_level), v=DriftSpec.zero())


@dataclass(frozen=True)
class CylindricalFunctional:
    """The triple (n, a, b) indexing F_{n,a,b}.

    Parameters
    ----------
    n : int
        Number of basis coefficients entering the functional; n >= 3.
    a : float
        Norm exponent.  sqrt(F) is superharmonic iff a in [4-2n, 0], F
        itself iff a in [2-n, 0]; a = 2-n is the James-Stein choice.
    b : ndarray or None
        Offset vector of length n.  None means "match the drift": the
        offsets b_k = lambda_k^{-1} <u, h_k> are filled in at evaluation
        time from whichever drift the caller passes, which makes the
        coefficients b_k + lambda_k^{-1} X^u(h_k) = lambda_k^{-1} X(h_k)
        computable from the observation alone.
    """

    n: int
    a: float
    b: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need n >= 3, got n={self.n}")
        if self.b is not None:
            b = np.asarray(self.b, dtype=float)
            if b.shape != (self.n,):
                raise ValueError("offset vector must have length n")
            object.__setattr__(self, "b", b)

    @property
    def sqrt_is_superharmonic(self):
        return 4 - 2 * self.n <= self.a <= 0

    @property
    def is_superharmonic(self):
        return 2 - self.n <= self.a <= 0

    @property
    def is_james_stein(self):
        return self.a == 2 - self.n

    def offsets(self, u, params):
        """Resolved offset vector: stored b, or drift-matched defaults."""
        if self.b is not None:
            return self.b
        lam = SineBasis(params.sigma, params.T, self.n).eigenvalues()
        return drift_inner_products(u, self.n, params) / lam


def functional_coefficients(sample, u, fnl):
    """Coefficient vector c_i = lambda_i^{-1} X^u(h_i) + b_i and its norm Dn.

    With drift-matched offsets c_i = lambda_i^{-1} X(h_i), the observable
    coefficients of the path.  Raises on the probability-zero event Dn = 0
    rather than clamping, since clamping would bias every risk estimate
    built on top.
    """
    params = sample.params
    if fnl.n > sample.n_basis:
        raise ValueError(f"functional needs {fnl.n} coefficients, sample has {sample.n_basis}")
    lam = SineBasis(params.sigma, params.T, fnl.n).eigenvalues()
    c = sample.eta[: fnl.n] / lam + fnl.offsets(u, params)
    dn = float(c @ c)
    if dn == 0.0:
        raise DegenerateSampleError(
            "all functional coefficients vanished", replicate=sample.replicate_index
        )
    return c, dn


def efficient_estimate(sample: PathSample) -> EstimateSeries:
    """The observed path itself; unbiased and attains the variance bound."""
    return EstimateSeries(values=sample.x, label="efficient")


def posterior_drift_curve(x_values, v, tau_profile, sigma_profile, grid, params):
    """Shrinkage curve int_0^t sigma^2/(tau^2+sigma^2) dv + int_0^t tau^2/(tau^2+sigma^2) dX.

    Both integrals are left-point Riemann-Stieltjes sums over grid
    increments; the weights are constant on profile segments, so the sums
    telescope segment by segment.  Shared by the Bayes estimator and the
    scalar path filter, which are required to coincide bitwise.
    """
    sig2 = sigma_profile.left_values(grid) ** 2
    tau2 = tau_profile.left_values(grid) ** 2
    denom = tau2 + sig2
    v_values = v.values(grid.points, params)
    part_v = stieltjes_cumulative(v_values, sig2 / denom)
    part_x = stieltjes_cumulative(np.asarray(x_values, dtype=float), tau2 / denom)
    return part_v + part_x


def bayes_estimate(sample: PathSample, spec: BayesSpec, sigma_profile=None) -> EstimateSeries:
    """Posterior mean drift given the observation, independent-increment case."""
    if sigma_profile is None:
        sigma_profile = VolatilityProfile.constant(sample.params.sigma)
    curve = posterior_drift_curve(
        sample.x, spec.v, spec.tau, sigma_profile, sample.grid, sample.params
    )
    return EstimateSeries(values=curve, label="bayes")


def _merged_segments(tau_profile, sigma_profile, T):
    edges = sorted({0.0, float(T)} | set(tau_profile.breakpoints) | set(sigma_profile.breakpoints))
    if edges[0] < 0.0 or edges[-1] > float(T):
        raise ValueError("profile breakpoints must lie inside (0, T)")
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        yield a, b, float(tau_profile.value(mid)), float(sigma_profile.value(mid))


def _nested_integral(tau_profile, sigma_profile, T, integrand):
    # int_0^T int_0^t g(s) ds dt for g piecewise constant: the inner
    # cumulative is piecewise linear, so per-segment trapezoids are exact
    inner = 0.0
    total = 0.0
    for a, b, tau, sig in _merged_segments(tau_profile, sigma_profile, T):
        g = integrand(tau, sig)
        nxt = inner + g * (b - a)
        total += 0.5 * (inner + nxt) * (b - a)
        inner = nxt
    return total


def bayes_risk_closed_form(spec: BayesSpec, sigma_profile, T) -> float:
    """Prior-averaged risk int_0^T int_0^t tau^2 sigma^2 / (tau^2+sigma^2) ds dt."""
    return _nested_integral(
        spec.tau, sigma_profile, T,
        lambda tau, sig: tau**2 * sig**2 / (tau**2 + sig**2),
    )


def bayes_mse_decomposition(spec: BayesSpec, u: DriftSpec, sigma_profile, grid, params):
    """(variance term, squared-bias term) of the fixed-drift mean square error.

    The variance term int_0^T int_0^t tau^4 sigma^2/(tau^2+sigma^2)^2 ds dt
    is exact piecewise; the squared bias
    int_0^T | int_0^t sigma^2 (dv/ds - du/ds)/(tau^2+sigma^2) ds |^2 dt
    is computed by composite trapezoid quadrature on the grid.
    """
    variance = _nested_integral(
        spec.tau, sigma_profile, params.T,
        lambda tau, sig: tau**4 * sig**2 / (tau**2 + sig**2) ** 2,
    )
    t = grid.points
    sig2 = sigma_profile.value(t) ** 2
    tau2 = spec.tau.value(t) ** 2
    integrand = sig2 * (
        spec.v.derivative_values(t, params) - u.derivative_values(t, params)
    ) / (tau2 + sig2)
    inner = cumulative_trapezoid(integrand, dx=grid.dt, initial=0.0)
    bias_sq = float(np.trapezoid(inner * inner, dx=grid.dt))
    return variance, bias_sq


def scaled_projection(sample: PathSample, u: DriftSpec, n: int) -> EstimateSeries:
    """Projection of the observation on the span of the first n basis images.

    Returns sum_{k<=n} lambda_k^{-2} X(h_k) (Gamma h_k)(t), i.e. the
    coefficients lambda_k^{-1} X(h_k) against the L^2(dt)-orthonormal
    functions lambda_k^{-1} Gamma h_k.
    """
    if n < 1 or n > sample.n_basis:
        raise ValueError(f"projection order {n} out of range 1..{sample.n_basis}")
    params = sample.params
    basis = SineBasis(params.sigma, params.T, n)
    lam = basis.eigenvalues()
    coeffs = (sample.eta[:n] + drift_inner_products(u, n, params)) / lam
    values = coeffs @ basis.orthonormal_matrix(sample.grid)
    return EstimateSeries(values=values, label="scaled-projection")


def stein_correction(sample: PathSample, u: DriftSpec, fnl: CylindricalFunctional) -> EstimateSeries:
    """Logarithmic gradient D_t log F_{n,a,b} evaluated on the grid.

    Equals a * sum_i e_i(t) c_i / Dn with e_i = lambda_i^{-1} Gamma h_i;
    for a = 2-n this is the James-Stein form
    -(n-2) * proj(t) / ||proj||^2 applied to the scaled projection.
    """
    c, dn = functional_coefficients(sample, u, fnl)
    params = sample.params
    e_mat = SineBasis(params.sigma, params.T, fnl.n).orthonormal_matrix(sample.grid)
    values = (fnl.a * c / dn) @ e_mat
    return EstimateSeries(values=values, label="stein-correction")


def stein_estimate(sample: PathSample, u: DriftSpec, fnl: CylindricalFunctional) -> EstimateSeries:
    """Observed path plus the Stein correction."""
    corr = stein_correction(sample, u, fnl)
    return EstimateSeries(values=sample.x + corr.values, label="stein")


def laplacian_ratios(sample: PathSample, u: DriftSpec, fnl: CylindricalFunctional):
    """Scalar closed forms (Delta F / F, Delta sqrt(F) / sqrt(F)).

    Delta F / F = a (n + a - 2) / Dn vanishes at a = 2-n, where
    Delta sqrt(F)/sqrt(F) = -(n-2)^2 / (4 Dn) is strictly negative.
    """
    _, dn = functional_coefficients(sample, u, fnl)
    n, a = fnl.n, fnl.a
    delta_f = a * (n + a - 2) / dn
    delta_sqrt = (a * (n - 2 + a / 2) / 2) / dn
    return delta_f, delta_sqrt


def correction_norm_sq(sample: PathSample, u: DriftSpec, fnl: CylindricalFunctional) -> float:
    """||D log F||^2_{L^2(dt)} = (n-2)^2 / Dn in the James-Stein case."""
    if not fnl.is_james_stein:
        raise ValueError("closed-form correction norm requires a = 2 - n")
    _, dn = functional_coefficients(sample, u, fnl)
    return (fnl.n - 2) ** 2 / dn


def log_gradient_norm_sq(sample: PathSample, u: DriftSpec, fnl: CylindricalFunctional) -> float:
    """||D log F||^2_{L^2(dt)} = a^2 / Dn for any exponent a."""
    _, dn = functional_coefficients(sample, u, fnl)
    return fnl.a**2 / dn
