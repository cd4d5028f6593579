"""Sine-basis path simulation for drifted Brownian observations.

The observation model is X_t = X^u_t + u_t on [0, T], where X^u is a
centered Gaussian martingale with quadratic variation sigma^2 dt and u is a
deterministic drift with square-integrable derivative and u(0) = 0.  X^u is
simulated by the truncated expansion

    X^u_t = sigma * (sqrt(2T)/pi) * sum_n eta_n sin((n-1/2) pi t / T) / (n-1/2)

with i.i.d. standard normal coefficients eta_n drawn from counter-based
substreams, so every replicate is reproducible independently of execution
order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox


class DegenerateSampleError(RuntimeError):
    """A probability-zero configuration was hit (e.g. a zero denominator)."""

    def __init__(self, message, replicate=None):
        super().__init__(message)
        self.replicate = replicate


@dataclass(frozen=True)
class ModelParams:
    """Scalar model constants: volatility sigma, horizon T, linear slope alpha."""

    sigma: float = 1.0
    T: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not (self.T > 0):
            raise ValueError(f"T must be positive, got {self.T}")


@dataclass(frozen=True)
class VolatilityProfile:
    """Piecewise-constant volatility level s -> sigma_s on [0, T].

    `levels` holds one strictly positive value per segment; `breakpoints`
    holds the interior segment boundaries in strictly increasing order.
    A single level with no breakpoints is the constant profile.
    """

    levels: tuple
    breakpoints: tuple = ()

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        breaks = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "breakpoints", breaks)
        if len(levels) != len(breaks) + 1:
            raise ValueError("need exactly one more level than breakpoints")
        if any(v <= 0 for v in levels):
            raise ValueError("volatility levels must be strictly positive")
        if any(b <= 0 for b in breaks):
            raise ValueError("breakpoints must be strictly positive")
        if list(breaks) != sorted(set(breaks)):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, level):
        return cls(levels=(float(level),))

    @property
    def kind(self):
        return "constant" if not self.breakpoints else "piecewise-constant"

    @property
    def is_constant(self):
        return not self.breakpoints

    def segments(self, T):
        """Yield (start, end, level) triples covering [0, T]."""
        if self.breakpoints and self.breakpoints[-1] >= T:
            raise ValueError("breakpoints must lie strictly inside (0, T)")
        edges = (0.0,) + self.breakpoints + (float(T),)
        for a, b, lvl in zip(edges[:-1], edges[1:], self.levels):
            yield a, b, lvl

    def left_values(self, grid):
        """Level at the left endpoint of each grid interval (length M)."""
        lefts = grid.points[:-1]
        idx = np.searchsorted(np.asarray(self.breakpoints), lefts, side="right")
        return np.asarray(self.levels, dtype=float)[idx]

    def value(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
        return np.asarray(self.levels, dtype=float)[idx]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_M = T with spacing exactly T/M."""

    M: int
    T: float = 1.0
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"grid needs at least 2 intervals, got M={self.M}")
        if not (self.T > 0):
            raise ValueError(f"T must be positive, got {self.T}")
        pts = np.linspace(0.0, self.T, self.M + 1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dt(self):
        return self.T / self.M

    def trapezoid_weights(self):
        w = np.full(self.M + 1, self.dt)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


@dataclass(frozen=True)
class DriftSpec:
    """Deterministic drift u with u(0) = 0 and square-integrable derivative.

    Three representations are supported: a linear ramp u_t = slope * t, a
    finite combination of basis functions u = sum_k coeffs[k] h_k, or a
    tabulated derivative sampled on a uniform grid.  Random (adapted) drifts
    are not representable here on purpose.
    """

    kind: str
    slope: float = 0.0
    coeffs: tuple = ()
    du: np.ndarray | None = None
    du_grid: TimeGrid | None = None

    @classmethod
    def linear(cls, slope):
        return cls(kind="linear", slope=float(slope))

    @classmethod
    def zero(cls):
        return cls(kind="linear", slope=0.0)

    @classmethod
    def from_coefficients(cls, coeffs):
        return cls(kind="coefficients", coeffs=tuple(float(c) for c in coeffs))

    @classmethod
    def from_tabulated_derivative(cls, du, grid):
        du = np.asarray(du, dtype=float)
        if du.shape != (grid.M + 1,):
            raise ValueError("tabulated derivative must have one value per grid point")
        if not np.all(np.isfinite(du)):
            raise ValueError("tabulated derivative must be finite-valued")
        return cls(kind="tabulated", du=du, du_grid=grid)

    def __post_init__(self):
        if self.kind not in ("linear", "coefficients", "tabulated"):
            raise ValueError(f"unknown drift kind {self.kind!r}")

    def values(self, t, params):
        """u evaluated at times t (u(0) = 0 in every representation)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            return self.slope * t
        if self.kind == "coefficients":
            out = np.zeros_like(t)
            for j, c in enumerate(self.coeffs, start=1):
                if c != 0.0:
                    out += c * basis_fn(j, t, params)
            return out
        # tabulated: cumulative trapezoid of the stored derivative
        from scipy.integrate import cumulative_trapezoid

        u = cumulative_trapezoid(self.du, dx=self.du_grid.dt, initial=0.0)
        return np.interp(t, self.du_grid.points, u)

    def derivative_values(self, t, params):
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            return np.full_like(t, self.slope)
        if self.kind == "coefficients":
            out = np.zeros_like(t)
            for j, c in enumerate(self.coeffs, start=1):
                if c != 0.0:
                    out += c * basis_derivative(j, t, params)
            return out
        return np.interp(t, self.du_grid.points, self.du)


# ---------------------------------------------------------------------------
# sine basis


def _check_index(k):
    if k < 1:
        raise ValueError(f"basis index must be >= 1, got {k}")


def _check_time(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T):
        raise ValueError("time outside [0, T]")
    return t


def basis_fn(k, t, params):
    """h_k(t) = (sqrt(2T) / (sigma pi (k-1/2))) sin((k-1/2) pi t / T)."""
    _check_index(k)
    t = _check_time(t, params.T)
    freq = (k - 0.5) * math.pi / params.T
    amp = math.sqrt(2.0 * params.T) / (params.sigma * math.pi * (k - 0.5))
    return amp * np.sin(freq * t)


def basis_derivative(k, t, params):
    """d/dt h_k(t) = (1/sigma) sqrt(2/T) cos((k-1/2) pi t / T)."""
    _check_index(k)
    t = _check_time(t, params.T)
    freq = (k - 0.5) * math.pi / params.T
    return (1.0 / params.sigma) * math.sqrt(2.0 / params.T) * np.cos(freq * t)


def eigenvalue(k, params):
    """lambda_k = sigma T / (pi (k-1/2)); strictly decreasing in k."""
    _check_index(k)
    return params.sigma * params.T / (math.pi * (k - 0.5))


def gamma_fn(k, t, params):
    """(Gamma h_k)(t) = sigma^2 h_k(t) for constant volatility."""
    return params.sigma**2 * basis_fn(k, t, params)


def orthonormal_fn(k, t, params):
    """e_k(t) = lambda_k^{-1} (Gamma h_k)(t) = sqrt(2/T) sin((k-1/2) pi t / T)."""
    _check_index(k)
    t = _check_time(t, params.T)
    return math.sqrt(2.0 / params.T) * np.sin((k - 0.5) * math.pi * t / params.T)


@dataclass(frozen=True)
class SineBasis:
    """First `max_index` basis functions for fixed (sigma, T), vectorized."""

    sigma: float
    T: float
    max_index: int

    def __post_init__(self):
        if self.max_index < 1:
            raise ValueError("max_index must be >= 1")
        if self.sigma <= 0 or self.T <= 0:
            raise ValueError("sigma and T must be positive")

    @property
    def params(self):
        return ModelParams(sigma=self.sigma, T=self.T)

    def eigenvalues(self, n=None):
        n = self.max_index if n is None else n
        k = np.arange(1, n + 1)
        return self.sigma * self.T / (np.pi * (k - 0.5))

    def orthonormal_matrix(self, grid, n=None):
        """Rows e_k(t_i) for k = 1..n; orthonormal in L^2(dt)."""
        n = self.max_index if n is None else n
        k = np.arange(1, n + 1)
        phases = np.outer((k - 0.5) * np.pi / self.T, grid.points)
        return math.sqrt(2.0 / self.T) * np.sin(phases)

    def fn_matrix(self, grid, n=None):
        """Rows h_k(t_i) for k = 1..n."""
        lam = self.eigenvalues(n)
        return (lam / self.sigma**2)[:, None] * self.orthonormal_matrix(grid, n)

    def derivative_matrix(self, grid, n=None):
        n = self.max_index if n is None else n
        k = np.arange(1, n + 1)
        phases = np.outer((k - 0.5) * np.pi / self.T, grid.points)
        return (1.0 / self.sigma) * math.sqrt(2.0 / self.T) * np.cos(phases)


def drift_inner_product(u, k, params):
    """Unweighted pairing <u, h_k> = int_0^T du/ds * dh_k/ds ds.

    Uses the closed form for linear drifts, the exact coefficient for
    basis-combination drifts, and composite trapezoid quadrature for
    tabulated derivatives.
    """
    _check_index(k)
    if u.kind == "linear":
        # int_0^T alpha * (1/sigma) sqrt(2/T) cos((k-1/2) pi s / T) ds
        sign = 1.0 if k % 2 == 1 else -1.0
        return (
            u.slope
            * math.sqrt(2.0 * params.T)
            / params.sigma
            * sign
            / (math.pi * (k - 0.5))
        )
    if u.kind == "coefficients":
        if k <= len(u.coeffs):
            return u.coeffs[k - 1] / params.sigma**2
        return 0.0
    # tabulated derivative: quadrature on its own grid
    grid = u.du_grid
    hdot = basis_derivative(k, grid.points, params)
    return float(np.trapezoid(u.du * hdot, dx=grid.dt))


def drift_inner_products(u, n, params):
    """Vector of <u, h_k> for k = 1..n."""
    if u.kind == "linear":
        k = np.arange(1, n + 1)
        signs = np.where(k % 2 == 1, 1.0, -1.0)
        return u.slope * math.sqrt(2.0 * params.T) / params.sigma * signs / (
            np.pi * (k - 0.5)
        )
    return np.array([drift_inner_product(u, k, params) for k in range(1, n + 1)])


# ---------------------------------------------------------------------------
# simulation


def noise_stream(seed, replicate):
    """Counter-based substream for one replicate, keyed by (seed, replicate).

    Each (seed, replicate) pair owns a disjoint Philox counter space, so the
    draw for coefficient j of replicate r is a pure function of
    (seed, r, j) no matter how many replicates run, or in what order.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must fit an unsigned 64-bit integer")
    if replicate < 0 or replicate >= 2**64:
        raise ValueError("replicate index must fit an unsigned 64-bit integer")
    key = np.array([seed, replicate], dtype=np.uint64)
    return Generator(Philox(key=key))


def simulate_noise(seed, replicate, n_basis):
    """n_basis i.i.d. standard normal coefficients for one replicate."""
    if n_basis < 1:
        raise ValueError("n_basis must be >= 1")
    return noise_stream(seed, replicate).standard_normal(n_basis)


def reconstruct_path(eta, grid, params, n_basis=None):
    """Evaluate the truncated expansion X^u on the grid; X^u_0 = 0 exactly."""
    eta = np.asarray(eta, dtype=float)
    if eta.size == 0:
        raise ValueError("eta must contain at least one coefficient")
    if n_basis is None:
        n_basis = eta.shape[-1]
    basis = SineBasis(params.sigma, params.T, n_basis)
    coef_to_path = basis.eigenvalues()[:, None] * basis.orthonormal_matrix(grid)
    return eta[..., :n_basis] @ coef_to_path


@dataclass(frozen=True)
class PathSample:
    """One simulated replicate: noise coefficients and grid values of X^u, u, X."""

    eta: np.ndarray
    xu: np.ndarray
    u: np.ndarray
    x: np.ndarray
    grid: TimeGrid
    params: ModelParams
    drift: DriftSpec
    seed: int
    replicate_index: int

    @property
    def n_basis(self):
        return self.eta.shape[0]


def observed_path(xu, u, grid, params, eta=None, seed=0, replicate=0):
    """Complete a simulated noise path into an observation X = X^u + u."""
    xu = np.asarray(xu, dtype=float)
    if xu.shape != (grid.M + 1,):
        raise ValueError("xu must have one value per grid point")
    u_vals = u.values(grid.points, params)
    x = xu + u_vals
    if eta is None:
        eta = np.empty(0)
    return PathSample(
        eta=np.asarray(eta, dtype=float),
        xu=xu,
        u=u_vals,
        x=x,
        grid=grid,
        params=params,
        drift=u,
        seed=seed,
        replicate_index=replicate,
    )


def simulate_path(seed, replicate, u, params, grid, n_basis):
    """Draw one replicate and assemble the full PathSample."""
    eta = simulate_noise(seed, replicate, n_basis)
    xu = reconstruct_path(eta, grid, params)
    return observed_path(xu, u, grid, params, eta=eta, seed=seed, replicate=replicate)


def observed_coefficient(sample, u, k, params=None, method="identity"):
    """lambda_k^{-1} X(h_k), the k-th observable coefficient of the path.

    method="identity" uses X^u(h_k) = eta_k, exact in the truncated model.
    method="quadrature" recomputes X(h_k) = int dh_k/dt dX by left-point
    Riemann-Stieltjes sums over the stored grid path, which carries
    truncation plus discretization error and is meant for cross-checking.
    """
    params = sample.params if params is None else params
    _check_index(k)
    lam = eigenvalue(k, params)
    if method == "identity":
        if k > sample.n_basis:
            raise ValueError(f"coefficient {k} beyond simulated n_basis={sample.n_basis}")
        return (sample.eta[k - 1] + drift_inner_product(u, k, params)) / lam
    if method == "quadrature":
        hdot = basis_derivative(k, sample.grid.points[:-1], params)
        increments = np.diff(sample.x)
        return float(np.sum(hdot * increments)) / lam
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# grid integrals shared by the estimators and the filter


def stieltjes_cumulative(values, left_weights):
    """Cumulative left-point Riemann-Stieltjes sums sum_{j<m} w_j (p_{j+1} - p_j).

    The sum is telescoped over runs of equal weight, so a constant-weight
    integral of a path starting at p_0 = 0 comes out as w * p_m with no
    accumulated rounding.  `values` may be (..., M+1); weights are per
    interval (length M).
    """
    values = np.asarray(values, dtype=float)
    left_weights = np.asarray(left_weights, dtype=float)
    M = values.shape[-1] - 1
    if left_weights.shape != (M,):
        raise ValueError("need one weight per grid interval")
    out = np.empty_like(values)
    out[..., 0] = 0.0
    j = 0
    while j < M:
        k = j
        while k + 1 < M and left_weights[k + 1] == left_weights[j]:
            k += 1
        w = left_weights[j]
        seg = values[..., j + 1 : k + 2] - values[..., j : j + 1]
        out[..., j + 1 : k + 2] = out[..., j : j + 1] + w * seg
        j = k + 1
    return out
