"""Noisy binary input channel models.

Two crossover profiles corrupt the ideal reply stream: a fixed-probability
symmetric channel, and a non-stationary curve built by fitting a cubic to
empirical per-input error rates and re-interpolating its anchor points
(first input, interior minimum, maximum) with a monotone piecewise cubic,
holding the maximum flat out to the input cap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "CrossoverSamples",
    "ErrorProfile",
    "FixedProfile",
    "PchipProfile",
    "build_pchip",
    "corrupt",
    "default_crossover_samples",
    "default_nonstationary_profile",
    "fit_cubic",
    "load_crossover_samples",
    "parse_profile_arg",
]

_P_MAX = 0.5  # crossover beyond one half would invert the channel


@dataclass(frozen=True)
class CrossoverSamples:
    """Empirical per-input error rates with the trial counts behind them."""

    inputs: tuple[int, ...]
    rates: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if not len(self.inputs) == len(self.rates) == len(self.counts):
            raise ValueError("inputs, rates, counts must align")
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("rates must lie in [0, 1]")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")


class ErrorProfile:
    """Crossover probability as a function of the 1-based input index."""

    def crossover(self, k: int) -> float:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class FixedProfile(ErrorProfile):
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= _P_MAX:
            raise ValueError("fixed crossover must lie in [0, 0.5]")

    def crossover(self, k: int) -> float:
        return self.p

    def label(self) -> str:
        return f"fixed:{self.p:g}"


@dataclass(frozen=True)
class PchipProfile(ErrorProfile):
    """Monotone piecewise-cubic crossover curve, clamped past its last knot."""

    knots_x: tuple[float, ...]
    knots_y: tuple[float, ...]
    clamp_at: int = 50
    degenerate: bool = False  # endpoint fallback was used
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.knots_x, dtype=float)
        ys = np.clip(np.asarray(self.knots_y, dtype=float), 0.0, _P_MAX)
        if xs.size < 2:
            raise ValueError("profile needs at least two knots")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("knot positions must be strictly increasing")
        object.__setattr__(self, "_interp", PchipInterpolator(xs, ys, extrapolate=False))

    def crossover(self, k: int) -> float:
        x = min(max(float(k), self.knots_x[0]), self.knots_x[-1])
        return float(np.clip(self._interp(x), 0.0, _P_MAX))

    def label(self) -> str:
        return "pchip"


def corrupt(x: int, k: int, profile: ErrorProfile, rng: np.random.Generator) -> int:
    """Flip reply x for input k with the profile's crossover probability."""
    if x not in (0, 1):
        raise ValueError("channel input must be 0 or 1")
    return 1 - x if rng.random() < profile.crossover(k) else x


def fit_cubic(samples: CrossoverSamples, weighted: bool = False) -> np.polynomial.Polynomial:
    """Least-squares degree-3 fit to the empirical crossover curve.

    With ``weighted`` the residuals are weighted by sqrt(count), giving
    the count-weighted least-squares solution; the default is unweighted.
    """
    xs = np.asarray(samples.inputs, dtype=float)
    if np.unique(xs).size < 4:
        raise ValueError("cubic fit needs at least 4 distinct input indices")
    ys = np.asarray(samples.rates, dtype=float)
    w = np.sqrt(np.asarray(samples.counts, dtype=float)) if weighted else None
    return np.polynomial.Polynomial.fit(xs, ys, deg=3, w=w).convert()


def build_pchip(cubic: np.polynomial.Polynomial, max_inputs: int = 50) -> PchipProfile:
    """Anchor-point profile from a fitted cubic on [1, max_inputs].

    Knots: the cubic's value at input 1, its interior minimum, its maximum,
    then the maximum held flat out to max_inputs. A cubic without interior
    extrema in the range falls back to a fit through the endpoint values,
    flagged on the returned profile.
    """
    lo, hi = 1.0, float(max_inputs)
    crit = [r.real for r in cubic.deriv().roots() if abs(r.imag) < 1e-9 and lo < r.real < hi]
    if not crit:
        return PchipProfile(
            knots_x=(lo, hi),
            knots_y=(float(cubic(lo)), float(cubic(hi))),
            clamp_at=max_inputs,
            degenerate=True,
        )

    candidates = sorted(set(crit) | {lo, hi})
    values = [float(cubic(x)) for x in candidates]
    x_min = candidates[int(np.argmin(values))]
    x_max = candidates[int(np.argmax(values))]

    knots: dict[float, float] = {lo: float(cubic(lo))}
    knots[x_min] = float(cubic(x_min))
    knots[x_max] = float(cubic(x_max))
    knots[hi] = float(cubic(x_max))  # maximum held until the input cap
    xs = tuple(sorted(knots))
    ys = tuple(knots[x] for x in xs)
    return PchipProfile(knots_x=xs, knots_y=ys, clamp_at=max_inputs)


def load_crossover_samples(path) -> CrossoverSamples:
    """Read a plain-text sample table: input index, rate, optional count."""
    inputs, rates, counts = [], [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if not row[0].strip().lstrip("+-").isdigit():
                continue  # header line
            inputs.append(int(row[0]))
            rates.append(float(row[1]))
            counts.append(int(row[2]) if len(row) > 2 else 1)
    return CrossoverSamples(tuple(inputs), tuple(rates), tuple(counts))


def default_crossover_samples() -> CrossoverSamples:
    """Bundled per-input error-rate table for the non-stationary profile.

    The values are approximate figure reads from the source experiment,
    not exact ground truth; treat derived accuracies as soft targets.
    """
    text = resources.files("swarmteleop.data").joinpath("crossover_default.csv").read_text()
    inputs, rates, counts = [], [], []
    for row in csv.reader(text.splitlines()):
        if not row or row[0].lstrip().startswith("#") or not row[0].strip().isdigit():
            continue
        inputs.append(int(row[0]))
        rates.append(float(row[1]))
        counts.append(int(row[2]) if len(row) > 2 else 1)
    return CrossoverSamples(tuple(inputs), tuple(rates), tuple(counts))


def default_nonstationary_profile(max_inputs: int = 50) -> PchipProfile:
    """Cubic-plus-monotone-interpolant profile from the bundled table."""
    return build_pchip(fit_cubic(default_crossover_samples()), max_inputs=max_inputs)


def parse_profile_arg(arg: str) -> ErrorProfile:
    """Parse a CLI error-profile argument: ``fixed:<p>`` or ``pchip:<file>``.

    ``pchip:default`` (or bare ``pchip:``) selects the bundled table.
    """
    kind, _, rest = arg.partition(":")
    if kind == "fixed":
        return FixedProfile(p=float(rest))
    if kind == "pchip":
        if rest in ("", "default"):
            return default_nonstationary_profile()
        return build_pchip(fit_cubic(load_crossover_samples(rest)))
    raise ValueError(f"unknown error profile {arg!r} (use fixed:<p> or pchip:<file>)")
