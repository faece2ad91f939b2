"""Six-compartment delayed rumor-propagation model: parameters, state space,
drift/diffusion fields, reproduction-number thresholds, and sampled
verification of the local regularity bounds the well-posedness argument
rests on.

The population splits into susceptible ``S``, exposed ``E``, spreading
``I``, removed ``R``, skeptical ``Ig``, and fact-checked ``F`` classes.
One realization follows the Ito system

    dS  = -beta * S * I(t - tau)              dt + n_S  * S  dW_S
    dE  = (beta * S * I(t - tau) - sigma_act * E) dt + n_E  * E  dW_E
    dI  = (sigma_act * E - (gamma + rho) * I) dt + n_I  * I  dW_I
    dR  = gamma * I                           dt + n_R  * R  dW_R
    dIg = (rho * I - theta * Ig)              dt + n_Ig * Ig dW_Ig
    dF  = theta * Ig                          dt + n_F  * F  dW_F

with independent Wiener processes and a discrete information delay ``tau``.
The drift moves mass between compartments only, so its six components sum
to zero and the deterministic flow conserves the total population ``N``.
Every diffusion coefficient is proportional to its own state component
(multiplicative noise), which makes the nonnegative orthant absorbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "COMPARTMENTS",
    "CSV_COMPARTMENTS",
    "DEFAULT_NOISE_INTENSITY",
    "DEFAULT_SPREADER_FRACTION",
    "BoundCheckReport",
    "HistoryFunction",
    "ModelParams",
    "NoiseIntensities",
    "StateVector",
    "default_initial_state",
    "default_params",
    "diffusion",
    "drift",
    "growth_bound_constant",
    "lipschitz_constant",
    "reproduction_number",
    "stochastic_margin",
    "verify_growth_bound",
    "verify_lipschitz_bound",
]

COMPARTMENTS = ("s", "e", "i", "r", "ig", "f")
CSV_COMPARTMENTS = ("S", "E", "I", "R", "Ig", "F")

# Default noise level for the bundled reference regime.  The reference
# table fixes only tau, R0 and beta; the noise intensities are a
# calibration assumption.  0.01 keeps sub-threshold runs quiescent over a
# horizon of 200 time units and matches the dispersion of the reference
# statistics; larger values (>= 0.05) let the susceptible pool wander
# super-critical through its own noise and ignite spurious outbreaks.
DEFAULT_NOISE_INTENSITY = 0.01

# Default initial spreader share of the population (rest susceptible).
DEFAULT_SPREADER_FRACTION = 0.005


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class NoiseIntensities:
    """Per-compartment multiplicative noise intensities (all >= 0)."""

    s: float = DEFAULT_NOISE_INTENSITY
    e: float = DEFAULT_NOISE_INTENSITY
    i: float = DEFAULT_NOISE_INTENSITY
    r: float = DEFAULT_NOISE_INTENSITY
    ig: float = DEFAULT_NOISE_INTENSITY
    f: float = DEFAULT_NOISE_INTENSITY

    def __post_init__(self):
        for name in COMPARTMENTS:
            value = _require_finite(f"noise.{name}", getattr(self, name))
            if value < 0:
                raise ValueError(f"noise.{name} must be >= 0, got {value}")

    @classmethod
    def uniform(cls, level: float) -> "NoiseIntensities":
        return cls(level, level, level, level, level, level)

    @classmethod
    def zero(cls) -> "NoiseIntensities":
        return cls.uniform(0.0)

    def scaled(self, factor: float) -> "NoiseIntensities":
        return NoiseIntensities(*(factor * v for v in self.as_array()))

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.e, self.i, self.r, self.ig, self.f])

    @property
    def max_intensity(self) -> float:
        return float(np.max(self.as_array()))


@dataclass(frozen=True)
class ModelParams:
    """Rate constants, delay, noise intensities, and population size.

    ``beta`` is the transmission rate, ``sigma_act`` the exposed-to-spreader
    activation rate, ``gamma`` the loss-of-interest rate, ``rho`` the
    spreader-to-skeptical rate, and ``theta`` the fact-checking rate.  The
    activation rate is deliberately not called ``sigma`` so it can never be
    confused with the noise intensities.

    ``beta`` may be zero (no transmission; useful for degenerate checks);
    the four other rates must be strictly positive.
    """

    beta: float
    sigma_act: float
    gamma: float
    rho: float
    theta: float
    tau: float = 0.0
    noise: NoiseIntensities = NoiseIntensities()
    population: float = 1.0

    def __post_init__(self):
        beta = _require_finite("beta", self.beta)
        if beta < 0:
            raise ValueError(f"beta must be >= 0, got {beta}")
        for name in ("sigma_act", "gamma", "rho", "theta"):
            value = _require_finite(name, getattr(self, name))
            if value <= 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        tau = _require_finite("tau", self.tau)
        if tau < 0:
            raise ValueError(f"tau must be >= 0, got {tau}")
        if not isinstance(self.noise, NoiseIntensities):
            raise TypeError("noise must be a NoiseIntensities instance")
        population = _require_finite("population", self.population)
        if population <= 0:
            raise ValueError(f"population must be > 0, got {population}")

    @property
    def removal_rate(self) -> float:
        """Total exit rate from the spreader class, gamma + rho."""
        return self.gamma + self.rho


@dataclass(frozen=True)
class StateVector:
    """One point (s, e, i, r, ig, f) in compartment space, componentwise >= 0."""

    s: float
    e: float
    i: float
    r: float
    ig: float
    f: float

    def __post_init__(self):
        for name in COMPARTMENTS:
            value = _require_finite(name, getattr(self, name))
            if value < 0:
                raise ValueError(f"state component {name} must be >= 0, got {value}")

    @classmethod
    def from_array(cls, values) -> "StateVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (6,):
            raise ValueError(f"expected 6 components, got shape {values.shape}")
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.e, self.i, self.r, self.ig, self.f])

    @property
    def total(self) -> float:
        return self.s + self.e + self.i + self.r + self.ig + self.f


def _state_array(x) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.as_array()
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != 6:
        raise ValueError(f"state arrays must have 6 trailing components, got shape {arr.shape}")
    return arr


def _drift_with_delayed_i(x: np.ndarray, i_delayed, p: ModelParams) -> np.ndarray:
    # Shared kernel: each inter-compartment flow is computed once and
    # reused with both signs, so the six components cancel to zero exactly
    # (up to the final rounding of the additions).
    transmission = p.beta * x[..., 0] * i_delayed
    activation = p.sigma_act * x[..., 1]
    removal = p.gamma * x[..., 2]
    skepticism = p.rho * x[..., 2]
    verification = p.theta * x[..., 4]
    out = np.empty_like(x)
    out[..., 0] = -transmission
    out[..., 1] = transmission - activation
    out[..., 2] = activation - (removal + skepticism)
    out[..., 3] = removal
    out[..., 4] = skepticism - verification
    out[..., 5] = verification
    return out


def drift(x, x_delayed, p: ModelParams) -> np.ndarray:
    """Deterministic rate of change at state ``x`` given the delayed state.

    Only the spreader component of ``x_delayed`` enters (the delayed
    transmission term).  Accepts :class:`StateVector` or arrays with six
    trailing components (leading axes are broadcast), and returns an array
    of the same shape.  Total function on nonnegative inputs; components
    sum to zero.
    """
    xa = _state_array(x)
    ya = _state_array(x_delayed)
    return _drift_with_delayed_i(xa, ya[..., 2], p)


def diffusion(x, p: ModelParams) -> np.ndarray:
    """Diagonal diffusion coefficients ``noise_k * x_k``.

    Multiplicative: a component's coefficient vanishes exactly when the
    component is zero, so noise alone never pushes mass across zero.
    """
    xa = _state_array(x)
    return p.noise.as_array() * xa


def reproduction_number(p: ModelParams) -> float:
    """Basic reproduction number ``beta * N / (gamma + rho)``."""
    return p.beta * p.population / p.removal_rate


def stochastic_margin(p: ModelParams) -> float:
    """Margin of the sufficient mean-square stability condition.

    Returns ``(1 - n_I**2 / (2 * (gamma + rho))) - beta * N / (gamma + rho)``.
    A positive value means spreader noise plus removal dominate delayed
    transmission, which guarantees exponential mean-square decay of the
    linearized (E, I) subsystem for every delay; the condition is
    sufficient only, so a negative margin proves nothing by itself.
    """
    damping = 1.0 - p.noise.i**2 / (2.0 * p.removal_rate)
    return damping - reproduction_number(p)


def growth_bound_constant(p: ModelParams, radius: float) -> float:
    """Explicit constant K(R) with ``|b|^2 + |g|^2 <= K (1 + |x|^2 + |y|^2)``
    for all nonnegative ``x, y`` with norms at most ``radius``.

    Derivation (triangle plus Young inequalities, componentwise): with
    ``|x_1| <= R`` the squared drift components are bounded by

        b1^2 <= beta^2 R^2 y_3^2
        b2^2 <= 2 beta^2 R^2 y_3^2 + 2 sigma_act^2 x_2^2
        b3^2 <= 2 sigma_act^2 x_2^2 + 2 (gamma+rho)^2 x_3^2
        b4^2 = gamma^2 x_3^2
        b5^2 <= 2 rho^2 x_3^2 + 2 theta^2 x_5^2
        b6^2 = theta^2 x_5^2

    so ``|b|^2 <= C_b (|x|^2 + |y|^2)`` with ``C_b`` the largest collected
    coefficient, and the diagonal diffusion satisfies
    ``|g|^2 <= max(noise)^2 |x|^2``.  The bound is restricted to a ball
    because the transmission term is quadratic: the ratio grows linearly
    in the radius and no radius-free constant exists.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    gr = p.removal_rate
    drift_coeff = max(
        3.0 * p.beta**2 * radius**2,
        4.0 * p.sigma_act**2,
        2.0 * gr**2 + p.gamma**2 + 2.0 * p.rho**2,
        3.0 * p.theta**2,
    )
    return drift_coeff + p.noise.max_intensity**2


def lipschitz_constant(p: ModelParams, radius: float) -> float:
    """Explicit constant L(R) with
    ``|b(x,y) - b(x',y')| <= L (|x-x'| + |y-y'|)`` on the radius-R ball.

    Each flow appears in exactly two drift components, so the l1 norm of
    the component differences is bounded by ``2 max(beta R, sigma_act,
    gamma+rho, theta)`` times the l1 norms of the state differences;
    ``sqrt(6)`` converts l1 to the Euclidean norm used in the estimate.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    return math.sqrt(6.0) * 2.0 * max(
        p.beta * radius, p.sigma_act, p.removal_rate, p.theta
    )


@dataclass(frozen=True)
class BoundCheckReport:
    """Outcome of a sampled bound verification."""

    max_ratio: float
    bound: float
    passed: bool
    sample_count: int
    radius: float


def _sample_nonnegative_ball(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    # Directions from folded normals (uniform over the nonnegative part of
    # the sphere), radii pushed toward the boundary where the bounds are
    # tightest.
    direction = np.abs(rng.standard_normal((count, 6)))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / 6.0)
    return direction / norms * radii[:, None]


def verify_growth_bound(
    p: ModelParams, sample_count: int, radius: float, rng_seed: int
) -> BoundCheckReport:
    """Sample the growth ratio ``(|b|^2 + |g|^2) / (1 + |x|^2 + |y|^2)``
    over random nonnegative pairs in the radius ball and compare its
    maximum against :func:`growth_bound_constant`.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    bound = growth_bound_constant(p, radius)
    rng = np.random.default_rng(rng_seed)
    max_ratio = 0.0
    remaining = sample_count
    while remaining > 0:
        chunk = min(remaining, 1 << 17)
        x = _sample_nonnegative_ball(rng, chunk, radius)
        y = _sample_nonnegative_ball(rng, chunk, radius)
        b = _drift_with_delayed_i(x, y[:, 2], p)
        g = p.noise.as_array() * x
        num = np.sum(b * b, axis=1) + np.sum(g * g, axis=1)
        den = 1.0 + np.sum(x * x, axis=1) + np.sum(y * y, axis=1)
        max_ratio = max(max_ratio, float(np.max(num / den)))
        remaining -= chunk
    return BoundCheckReport(max_ratio, bound, max_ratio <= bound, sample_count, radius)


def verify_lipschitz_bound(
    p: ModelParams, sample_count: int, radius: float, rng_seed: int
) -> BoundCheckReport:
    """Sample ``|b(x,y) - b(x',y')| / (|x-x'| + |y-y'|)`` over random
    nonnegative pairs in the radius ball and compare its maximum against
    :func:`lipschitz_constant`.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    bound = lipschitz_constant(p, radius)
    rng = np.random.default_rng(rng_seed)
    max_ratio = 0.0
    remaining = sample_count
    while remaining > 0:
        chunk = min(remaining, 1 << 17)
        x = _sample_nonnegative_ball(rng, chunk, radius)
        y = _sample_nonnegative_ball(rng, chunk, radius)
        x2 = _sample_nonnegative_ball(rng, chunk, radius)
        y2 = _sample_nonnegative_ball(rng, chunk, radius)
        num = np.linalg.norm(
            _drift_with_delayed_i(x, y[:, 2], p) - _drift_with_delayed_i(x2, y2[:, 2], p),
            axis=1,
        )
        den = np.linalg.norm(x - x2, axis=1) + np.linalg.norm(y - y2, axis=1)
        valid = den > 0.0
        if np.any(valid):
            max_ratio = max(max_ratio, float(np.max(num[valid] / den[valid])))
        remaining -= chunk
    return BoundCheckReport(max_ratio, bound, max_ratio <= bound, sample_count, radius)


class HistoryFunction:
    """Initial trajectory segment on ``[-span, 0]``.

    Two forms are supported: a constant history (one state, extended to
    any span) and a sampled history (uniform grid on ``[-span, 0]``,
    linear interpolation between samples).  Samples must be componentwise
    nonnegative; whether they sum to the population is checked against
    concrete parameters by :meth:`validate_for`.
    """

    def __init__(self, xi_grid: np.ndarray, samples: np.ndarray):
        xi_grid = np.asarray(xi_grid, dtype=float)
        samples = np.asarray(samples, dtype=float)
        if xi_grid.ndim != 1 or samples.shape != (xi_grid.size, 6):
            raise ValueError("history samples must be an (m, 6) array aligned with the grid")
        if xi_grid[-1] != 0.0:
            raise ValueError("history grid must end at 0")
        if xi_grid.size > 1 and np.any(np.diff(xi_grid) <= 0.0):
            raise ValueError("history grid must be strictly increasing")
        if not np.all(np.isfinite(samples)):
            raise ValueError("history samples must be finite")
        if np.any(samples < 0.0):
            raise ValueError("history samples must be componentwise >= 0")
        self._xi = xi_grid
        self._samples = samples

    @classmethod
    def constant(cls, state) -> "HistoryFunction":
        """Constant history equal to ``state`` for all lags."""
        arr = _state_array(state)
        if arr.shape != (6,):
            raise ValueError("constant history takes a single state")
        return cls(np.array([0.0]), arr[None, :])

    @classmethod
    def sampled(cls, states, span: float) -> "HistoryFunction":
        """History sampled on a uniform grid over ``[-span, 0]``."""
        samples = np.array([_state_array(s) for s in states], dtype=float)
        if samples.ndim != 2 or samples.shape[0] < 2:
            raise ValueError("sampled history needs at least two states")
        if span <= 0:
            raise ValueError("span must be > 0")
        xi = np.linspace(-span, 0.0, samples.shape[0])
        return cls(xi, samples)

    @property
    def is_constant(self) -> bool:
        return self._xi.size == 1

    @property
    def span(self) -> float:
        return float(-self._xi[0])

    def initial_state(self) -> np.ndarray:
        """State at lag 0, the integration's starting point."""
        return self._samples[-1].copy()

    def __call__(self, xi) -> np.ndarray:
        """Evaluate the history at lag(s) ``xi <= 0``."""
        xi_arr = np.asarray(xi, dtype=float)
        if np.any(xi_arr > 1e-12) or (
            not self.is_constant and np.any(xi_arr < self._xi[0] - 1e-12)
        ):
            raise ValueError(
                f"history defined on [{-self.span:g}, 0], evaluated outside"
            )
        if self.is_constant:
            out = np.broadcast_to(self._samples[0], xi_arr.shape + (6,)).copy()
        else:
            out = np.stack(
                [np.interp(xi_arr, self._xi, self._samples[:, c]) for c in range(6)],
                axis=-1,
            )
        return out

    def validate_for(self, p: ModelParams) -> None:
        """Check the history is usable with ``p``: the span covers the
        delay and every sample sums to the population."""
        if not self.is_constant and self.span < p.tau * (1.0 - 1e-12):
            raise ValueError(
                f"history span {self.span:g} does not cover the delay {p.tau:g}"
            )
        sums = self._samples.sum(axis=1)
        tol = 1e-9 * p.population
        worst = float(np.max(np.abs(sums - p.population)))
        if worst > tol:
            raise ValueError(
                f"history samples must sum to the population {p.population:g} "
                f"(worst residual {worst:.3g})"
            )


def default_params(
    tau: float = 0.0,
    r0: float = 2.0,
    noise_level: float = DEFAULT_NOISE_INTENSITY,
) -> ModelParams:
    """Parameters of the bundled reference regime.

    The reference statistics fix only ``tau``, ``R0`` and
    ``beta = 0.15 * R0`` (densities, ``N = 1``).  The remaining values are
    documented assumptions: ``gamma = 0.10``, ``rho = 0.05`` (their sum is
    forced by the beta column), ``sigma_act = 0.25``, ``theta = 0.10``,
    uniform noise at ``noise_level``.
    """
    return ModelParams(
        beta=0.15 * r0,
        sigma_act=0.25,
        gamma=0.10,
        rho=0.05,
        theta=0.10,
        tau=tau,
        noise=NoiseIntensities.uniform(noise_level),
        population=1.0,
    )


def default_initial_state(p: ModelParams) -> StateVector:
    """Default seeding: a small spreader share, everyone else susceptible."""
    i0 = DEFAULT_SPREADER_FRACTION * p.population
    return StateVector(s=p.population - i0, e=0.0, i=i0, r=0.0, ig=0.0, f=0.0)
