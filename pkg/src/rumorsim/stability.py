"""Equilibrium classification, the linearized (E, I) delay subsystem, and
empirical mean-square stability verification.

Setting the drift to zero forces the exposed, spreader, and skeptical
classes to vanish (the spreader outflow ``gamma * I`` admits no positive
fixed point), leaving a continuum of rumor-free equilibria: any split of
the population over ``(S, R, F)``.  Local behavior near the fully
susceptible point is governed by the linear delay subsystem

    dE = (beta * N * I(t - tau) - sigma_act * E) dt + n_E * E dW_E
    dI = (sigma_act * E - (gamma + rho) * I)     dt + n_I * I dW_I

whose second moment ``E[E^2 + I^2]`` decays exponentially for every delay
whenever :func:`~rumorsim.model.stochastic_margin` is positive.  This
module estimates that second moment over an ensemble and issues an
empirical verdict instead of re-deriving the analysis.
"""

from __future__ import annotations

import enum
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import EXTINCTION_FRACTION, EnsembleSummary, FinalSizeHorizonWarning
from .errors import NumericsError
from .integrator import CSV_FLOAT_FORMAT, IntegratorConfig, Trajectory, steps_on_grid
from .model import ModelParams, StateVector, drift, stochastic_margin
from .rng import derive_seed, normal_block

__all__ = [
    "DECAY_RATIO",
    "GROWTH_RATIO",
    "DecayVerdict",
    "EquilibriumClass",
    "EquilibriumReport",
    "FinalSizeReport",
    "MeanSquareDecayReport",
    "classify_equilibrium",
    "final_size",
    "simulate_linearized",
    "write_decay_csv",
]

# Terminal/initial second-moment ratio thresholds.  The band between them
# is reported as inconclusive: near the stability threshold a finite
# ensemble cannot support a binary call.
DECAY_RATIO = 1e-2
GROWTH_RATIO = 1e2

# Least-squares fit of the decay rate starts after the initial transient
# and stops before the estimate underflows the log scale.
_FIT_START_FRACTION = 0.1
_FIT_FLOOR = 1e-12


class EquilibriumClass(enum.Enum):
    RUMOR_FREE = "rumor-free"
    RUMOR_FREE_FAMILY = "rumor-free-family"
    NOT_EQUILIBRIUM = "not-equilibrium"


class DecayVerdict(enum.Enum):
    DECAY = "decay"
    GROWTH = "growth"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EquilibriumReport:
    state: StateVector
    classification: EquilibriumClass
    drift_residual: float
    conservation_residual: float
    tolerance: float


def classify_equilibrium(x: StateVector, p: ModelParams, tol: float = 1e-9) -> EquilibriumReport:
    """Classify a candidate state against the rumor-free equilibrium family.

    A state is a family member iff its exposed, spreader, and skeptical
    components vanish (within ``tol``) and the drift residual at the state
    is at most ``tol``; the fully susceptible point gets the distinguished
    rumor-free label.  At exact family members the drift residual is zero
    to machine precision, not merely small: every flow is a product with a
    zero factor.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    residual = float(np.linalg.norm(drift(x, x, p)))
    conservation = abs(x.total - p.population)
    is_family = max(x.e, x.i, x.ig) <= tol and residual <= tol
    if is_family and abs(x.s - p.population) <= tol and max(x.r, x.f) <= tol:
        label = EquilibriumClass.RUMOR_FREE
    elif is_family:
        label = EquilibriumClass.RUMOR_FREE_FAMILY
    else:
        label = EquilibriumClass.NOT_EQUILIBRIUM
    return EquilibriumReport(
        state=x,
        classification=label,
        drift_residual=residual,
        conservation_residual=conservation,
        tolerance=tol,
    )


@dataclass(frozen=True)
class MeanSquareDecayReport:
    """Ensemble estimate of the linearized second moment over time."""

    times: np.ndarray
    ms_estimate: np.ndarray
    fitted_rate: float
    margin: float
    verdict: DecayVerdict
    run_count: int

    @property
    def initial_estimate(self) -> float:
        return float(self.ms_estimate[0])

    @property
    def terminal_estimate(self) -> float:
        return float(self.ms_estimate[-1])


def _fit_decay_rate(times: np.ndarray, estimate: np.ndarray) -> float:
    horizon = times[-1]
    start = np.searchsorted(times, _FIT_START_FRACTION * horizon)
    below = np.nonzero(estimate < _FIT_FLOOR)[0]
    stop = int(below[0]) if below.size else times.size
    if stop - start < 2:
        return float("nan")
    window = slice(start, stop)
    return float(np.polyfit(times[window], np.log(estimate[window]), 1)[0])


def simulate_linearized(
    p: ModelParams,
    e0: float,
    i0: float,
    cfg: IntegratorConfig,
    run_count: int,
    base_seed: int,
) -> MeanSquareDecayReport:
    """Integrate the linearized (E, I) delay subsystem and test its
    second moment for decay.

    Uses constant history ``(e0, i0)``, Euler-Maruyama on the same step
    grid rules as the full model, and the counter noise stream (columns
    0 and 1 for the E and I perturbations).  No nonnegativity projection
    is applied: the subsystem is linear and the second moment is
    sign-blind, while clamping would distort it.

    Verdict: decay if the terminal estimate fell below ``DECAY_RATIO``
    times the initial one, growth if it rose above ``GROWTH_RATIO`` times,
    inconclusive in between.
    """
    if e0 < 0 or i0 < 0 or (e0 == 0 and i0 == 0):
        raise ValueError("initial perturbation must be nonnegative and not identically zero")
    if run_count < 1:
        raise ValueError(f"run_count must be >= 1, got {run_count}")

    h = cfg.step_size
    n_steps = cfg.step_count
    k = steps_on_grid(p.tau, h, "tau")
    bn = p.beta * p.population

    states = np.empty((n_steps + 1, run_count, 2))
    states[0] = (e0, i0)
    increments = np.empty((run_count, n_steps, 2))
    for j in range(run_count):
        increments[j] = normal_block(derive_seed(base_seed, j), n_steps, 2)
    increments *= np.sqrt(h)

    noise_pair = np.array([p.noise.e, p.noise.i])
    for step in range(n_steps):
        x = states[step]
        i_delayed = states[step - k][:, 1] if step >= k else np.full(run_count, i0)
        de = bn * i_delayed - p.sigma_act * x[:, 0]
        di = p.sigma_act * x[:, 0] - p.removal_rate * x[:, 1]
        x_next = x + np.stack([de, di], axis=1) * h + (noise_pair * x) * increments[:, step, :]
        if not np.all(np.isfinite(x_next)):
            raise NumericsError(
                f"linearized second moment overflowed at step {step + 1} "
                f"(t={(step + 1) * h:g}); shorten the horizon"
            )
        states[step + 1] = x_next

    recorded = states[:: cfg.record_stride]
    times = h * np.arange(0, n_steps + 1)[:: cfg.record_stride]
    sq_sum = (recorded**2).sum(axis=2)
    ms_estimate = sq_sum.mean(axis=1)

    ratio = ms_estimate[-1] / ms_estimate[0]
    if ratio <= DECAY_RATIO:
        verdict = DecayVerdict.DECAY
    elif ratio >= GROWTH_RATIO:
        verdict = DecayVerdict.GROWTH
    else:
        verdict = DecayVerdict.INCONCLUSIVE

    return MeanSquareDecayReport(
        times=times,
        ms_estimate=ms_estimate,
        fitted_rate=_fit_decay_rate(times, ms_estimate),
        margin=stochastic_margin(p),
        verdict=verdict,
        run_count=run_count,
    )


@dataclass(frozen=True)
class FinalSizeReport:
    """Terminal distribution over the absorbing classes."""

    s_inf: float
    r_inf: float
    f_inf: float
    terminal_spreader: float
    conservation_residual: float
    extinguished: bool

    @property
    def outbreak_size(self) -> float:
        """Cumulative reach of the rumor, terminal ``R + F``."""
        return self.r_inf + self.f_inf

    @property
    def srf_sum(self) -> float:
        return self.s_inf + self.r_inf + self.f_inf


def final_size(source, p: ModelParams) -> FinalSizeReport:
    """Read the terminal (S, R, F) split from a trajectory or an ensemble
    summary (which uses the terminal mean state).

    Warns with :class:`FinalSizeHorizonWarning` when the terminal spreader
    mass shows the outbreak had not died out by the horizon; the
    conservation residual ``|S + R + F - N|`` quantifies how far the
    terminal state is from a true limiting equilibrium.
    """
    if isinstance(source, Trajectory):
        terminal = source.states[-1]
    elif isinstance(source, EnsembleSummary):
        terminal = source.mean[-1]
    else:
        raise TypeError(f"expected Trajectory or EnsembleSummary, got {type(source).__name__}")
    s_inf, r_inf, f_inf = float(terminal[0]), float(terminal[3]), float(terminal[5])
    spreader = float(terminal[2])
    extinguished = spreader < EXTINCTION_FRACTION * p.population
    if not extinguished:
        warnings.warn(
            f"terminal spreader mass {spreader:.3g} >= {EXTINCTION_FRACTION:g} * N; "
            f"final-size values are not converged",
            FinalSizeHorizonWarning,
            stacklevel=2,
        )
    return FinalSizeReport(
        s_inf=s_inf,
        r_inf=r_inf,
        f_inf=f_inf,
        terminal_spreader=spreader,
        conservation_residual=abs(s_inf + r_inf + f_inf - p.population),
        extinguished=extinguished,
    )


def write_decay_csv(report: MeanSquareDecayReport, path) -> None:
    """Write ``t,ms_estimate`` rows, with the margin, verdict, and fitted
    rate carried as ``#``-prefixed header lines."""
    buf = io.StringIO()
    buf.write("# margin=" + (CSV_FLOAT_FORMAT % report.margin) + "\n")
    buf.write(f"# verdict={report.verdict.value}\n")
    buf.write("# fitted_rate=" + (CSV_FLOAT_FORMAT % report.fitted_rate) + "\n")
    buf.write(f"# run_count={report.run_count}\n")
    buf.write("t,ms_estimate\n")
    for t, v in zip(report.times, report.ms_estimate):
        buf.write((CSV_FLOAT_FORMAT % t) + "," + (CSV_FLOAT_FORMAT % v) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())
