"""Posterior-matching interaction over a finite ordered dictionary.

Implements the discrete bisection-with-noise scheme used to steer the
effector: a posterior over dictionary indices, an adjusted-median guess
rule, the two-sided multiplicative update for noisy binary replies, and a
one-step-at-a-time baseline that shares the same posterior bookkeeping.

All indices are 1-based dictionary indices; the posterior entry alpha[j-1]
is the probability that string j is the target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "GuessOutcome",
    "PosteriorState",
    "StopResult",
    "StoppingRule",
    "check_stopped",
    "correct_input",
    "init_posterior",
    "map_estimate",
    "select_guess",
    "stepwise_init",
    "stepwise_update",
    "update_posterior",
]

_NORM_TOL = 1e-9


@dataclass
class PosteriorState:
    """Mutable per-trial state: posterior vector, input count, channel belief."""

    alpha: np.ndarray
    assumed_p: float
    rng: np.random.Generator
    k: int = 0
    last_guess: Optional[int] = None

    @property
    def size(self) -> int:
        return self.alpha.shape[0]

    def check(self) -> None:
        """Assert the probability-vector invariants."""
        if np.any(self.alpha < 0):
            raise AssertionError("posterior has negative mass")
        total = float(self.alpha.sum())
        if abs(total - 1.0) > _NORM_TOL:
            raise AssertionError(f"posterior sums to {total}, not 1")


@dataclass(frozen=True)
class StoppingRule:
    """Stop at posterior mass >= tau, or at the input cap (default 50)."""

    tau: float
    max_inputs: int = 50

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.max_inputs < 1:
            raise ValueError("max_inputs must be positive")


@dataclass(frozen=True)
class GuessOutcome:
    """Result of guess selection: chosen index plus the adjustment internals."""

    n: int
    median: int
    pi1: float


@dataclass(frozen=True)
class StopResult:
    """Terminal estimate: index, inputs used, and how the trial ended."""

    j_star: int
    k_star: int
    converged: bool  # False means the input cap expired and MAP was taken


def init_posterior(n_d: int, assumed_p: float, seed) -> PosteriorState:
    """Uniform prior over n_d strings with a per-trial random stream.

    ``seed`` may be anything numpy accepts as a seed, including an existing
    Generator (used when replaying a recorded trial).
    """
    if n_d < 1:
        raise ValueError("dictionary size must be positive")
    if not 0.0 <= assumed_p < 0.5:
        raise ValueError("assumed crossover must lie in [0, 0.5)")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    alpha = np.full(n_d, 1.0 / n_d)
    return PosteriorState(alpha=alpha, assumed_p=assumed_p, rng=rng)


def select_guess(state: PosteriorState) -> GuessOutcome:
    """Pick the next query index by the randomized adjusted-median rule.

    The median N is the smallest index whose cumulative mass reaches 1/2.
    The guess is N with probability nu2/(nu1+nu2) and N+1 otherwise, where
    nu1 (nu2) measures how unbalanced the split below/at N is; at N = N_d
    the guess is pinned to N_d because there is no query point beyond it.
    """
    alpha = state.alpha
    cum = np.cumsum(alpha)
    # Cumulative-mass comparison carries the same 1e-9 slack as the
    # normalization invariant; cumsum rounding sits far below it.
    n_med = int(np.searchsorted(cum, 0.5 - _NORM_TOL)) + 1
    n_med = min(n_med, state.size)

    head = cum[n_med - 2] if n_med >= 2 else 0.0  # mass strictly below N
    at = cum[n_med - 1]  # mass up to and including N
    nu1 = (1.0 - head) - head
    nu2 = at - (1.0 - at)
    if n_med == state.size:
        n = n_med
        pi1 = 1.0
    else:
        pi1 = min(1.0, max(0.0, nu2 / (nu1 + nu2)))
        n = n_med if state.rng.random() < pi1 else n_med + 1
    state.last_guess = n
    return GuessOutcome(n=n, median=n_med, pi1=pi1)


def correct_input(target_j: int, guess_n: int) -> int:
    """Ideal reply: 1 if the target is at or past the guess, else 0.

    Equality counts as 1 (a tie is answered "right").
    """
    return 1 if target_j >= guess_n else 0


def update_posterior(state: PosteriorState, n: int, y: int) -> PosteriorState:
    """Apply one binary reply y for query boundary n and renormalize.

    With q = 1 - p and nu = (mass below n) - (mass at or above n), entries
    below n scale by 2q/(1 + nu(q-p)) on y = 0 or 2p/(1 - nu(q-p)) on
    y = 1; entries at or above n scale by the complementary factors. The
    update is Bayes' rule for a symmetric channel, written so the output
    is analytically normalized; an explicit renormalization guards float
    drift over long input sequences.
    """
    if y not in (0, 1):
        raise ValueError("reply must be 0 or 1")
    if not 1 <= n <= state.size:
        raise ValueError("query index out of range")
    p = state.assumed_p
    q = 1.0 - p
    alpha = state.alpha
    below = alpha[: n - 1].sum()
    nu = below - (1.0 - below)
    if y == 0:
        denom = 1.0 + nu * (q - p)
    else:
        denom = 1.0 - nu * (q - p)
    if denom <= 0.0:
        # Only reachable at assumed_p = 0 when the reply contradicts a side
        # that already carries zero mass.
        raise ValueError("reply contradicts a noiseless-channel posterior")
    if y == 0:
        lo_fac, hi_fac = 2.0 * q / denom, 2.0 * p / denom
    else:
        lo_fac, hi_fac = 2.0 * p / denom, 2.0 * q / denom
    alpha[: n - 1] *= lo_fac
    alpha[n - 1 :] *= hi_fac
    alpha /= alpha.sum()
    state.k += 1
    return state


def map_estimate(state: PosteriorState) -> int:
    """Index of maximum posterior mass; ties break to the smallest index."""
    return int(np.argmax(state.alpha)) + 1


def check_stopped(state: PosteriorState, rule: StoppingRule) -> Optional[StopResult]:
    """Terminal check: threshold crossing first, then the input cap.

    Returns the first index whose mass reaches tau, or the MAP estimate
    flagged as a timeout once max_inputs replies have been consumed.
    """
    hits = np.nonzero(state.alpha >= rule.tau)[0]
    if hits.size:
        return StopResult(j_star=int(hits[0]) + 1, k_star=state.k, converged=True)
    if state.k >= rule.max_inputs:
        return StopResult(j_star=map_estimate(state), k_star=state.k, converged=False)
    return None


def stepwise_init(n_d: int) -> int:
    """First guess of the one-step baseline: N_d/2 rounded half-up."""
    return int(np.floor(n_d / 2 + 0.5))


def stepwise_update(n_prev: int, y: int, n_d: int) -> int:
    """Move the guess one position in the indicated direction, clamped."""
    if y not in (0, 1):
        raise ValueError("reply must be 0 or 1")
    return max(min(n_prev + (2 * y - 1), n_d), 1)
