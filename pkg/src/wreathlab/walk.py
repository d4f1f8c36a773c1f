"""Canonical simple random walks and displacement-exponent estimation.

Each trial draws its own counter-based stream (Philox keyed by seed and trial
index), so results are independent of evaluation order and reproducible
bit-for-bit. The line walk is vectorized; the wreath walk runs a tight loop
over a mutable lamp table and evaluates the exact word metric at the requested
times only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .errors import EstimationError, ValidationError

__all__ = [
    "WalkSample",
    "BetaFit",
    "TailEstimate",
    "dyadic_times",
    "simulate",
    "estimate_beta",
    "estimate_tail",
    "median_rule_constant",
]

GROUPS = ("z", "zwrz")


@dataclass(frozen=True)
class WalkSample:
    """Displacement samples d(W_t, identity), one row per trial."""

    group: str
    times: tuple[int, ...]
    displacements: np.ndarray  # shape (trials, len(times)), integer
    seed: int

    @property
    def trials(self) -> int:
        return self.displacements.shape[0]

    def mean_displacement(self) -> np.ndarray:
        return self.displacements.mean(axis=0)

    def median_displacement(self) -> np.ndarray:
        return np.median(self.displacements, axis=0)


class BetaFit(NamedTuple):
    beta_hat: float
    intercept_hat: float
    r2: float
    stderr: float


@dataclass(frozen=True)
class TailEstimate:
    """Empirical exceedance frequencies Pr(d(W_t, e) >= c t^beta)."""

    c: float
    beta: float
    delta_hat: dict[int, float]
    standard_errors: dict[int, float]


def dyadic_times(lo_exp: int = 4, hi_exp: int = 14) -> tuple[int, ...]:
    """The default time grid 2^lo_exp .. 2^hi_exp."""
    if lo_exp > hi_exp:
        raise ValidationError("empty time grid")
    return tuple(2**k for k in range(lo_exp, hi_exp + 1))


def _trial_rng(seed: int, trial: int) -> Generator:
    key = np.array([seed, trial], dtype=np.uint64)
    return Generator(Philox(key=key))


def _line_trial(seed: int, trial: int, times: Sequence[int]) -> np.ndarray:
    t_max = times[-1]
    rng = _trial_rng(seed, trial)
    steps = rng.integers(0, 2, size=t_max, dtype=np.int64) * 2 - 1
    position = np.cumsum(steps)
    return np.array([abs(int(position[t - 1])) if t else 0 for t in times], dtype=np.int64)


def _wreath_distance(lamps: dict[int, int], cursor: int) -> int:
    if lamps:
        lo = min(lamps)
        hi = max(lamps)
        left = min(lo, 0, cursor)
        right = max(hi, 0, cursor)
    else:
        left = min(0, cursor)
        right = max(0, cursor)
    travel = min(
        (0 - left) + (right - left) + (right - cursor),
        (right - 0) + (right - left) + (cursor - left),
    )
    return travel + sum(abs(v) for v in lamps.values())


def _wreath_trial(seed: int, trial: int, times: Sequence[int]) -> np.ndarray:
    t_max = times[-1]
    rng = _trial_rng(seed, trial)
    codes = rng.integers(0, 4, size=t_max).tolist()
    lamps: dict[int, int] = {}
    cursor = 0
    out = np.zeros(len(times), dtype=np.int64)
    next_index = 0
    if times[0] == 0:
        next_index = 1  # d(W_0, e) = 0 already in place
    if next_index == len(times):
        return out
    target = times[next_index]
    get = lamps.get
    step = 0
    for code in codes:
        step += 1
        if code == 0:
            v = get(cursor, 0) + 1
            if v:
                lamps[cursor] = v
            else:
                del lamps[cursor]
        elif code == 1:
            v = get(cursor, 0) - 1
            if v:
                lamps[cursor] = v
            else:
                del lamps[cursor]
        elif code == 2:
            cursor += 1
        else:
            cursor -= 1
        if step == target:
            out[next_index] = _wreath_distance(lamps, cursor)
            next_index += 1
            if next_index == len(times):
                break
            target = times[next_index]
    return out


def simulate(group: str, times: Sequence[int], trials: int, seed: int) -> WalkSample:
    """Run the uniform-generator walk and record exact displacements.

    times must be strictly increasing and nonnegative; trials >= 1.
    """
    if group not in GROUPS:
        raise ValidationError(f"unknown group {group!r}; expected one of {GROUPS}")
    times = tuple(int(t) for t in times)
    if not times:
        raise ValidationError("at least one time required")
    if times[0] < 0:
        raise ValidationError("times must be nonnegative")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError("times must be strictly increasing")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    one_trial = _line_trial if group == "z" else _wreath_trial
    if times == (0,):
        rows = np.zeros((trials, 1), dtype=np.int64)
    else:
        rows = np.stack([one_trial(seed, i, times) for i in range(trials)])
    return WalkSample(group, times, rows, seed)


def estimate_beta(sample: WalkSample, statistic: str = "mean") -> BetaFit:
    """Least-squares slope of log displacement against log time.

    statistic selects the per-time summary ("mean" is the contract default,
    "median" is reported alongside by the CLI). Requires at least 4 distinct
    times with a positive summary value.
    """
    if statistic == "mean":
        summary = sample.mean_displacement()
    elif statistic == "median":
        summary = sample.median_displacement()
    else:
        raise ValidationError("statistic must be 'mean' or 'median'")
    times = np.array(sample.times, dtype=float)
    keep = (times > 0) & (summary > 0)
    if keep.sum() < 4:
        raise EstimationError("need >= 4 times with positive displacement")
    x = np.log(times[keep])
    y = np.log(summary[keep])
    if np.allclose(x, x[0]):
        raise EstimationError("degenerate time grid")
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), residual, _, _ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ np.array([slope, intercept])
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    dof = len(x) - 2
    if dof > 0:
        sigma2 = ss_res / dof
        sxx = float(np.sum((x - x.mean()) ** 2))
        stderr = math.sqrt(sigma2 / sxx)
    else:
        stderr = 0.0
    return BetaFit(float(slope), float(intercept), r2, stderr)


def estimate_tail(sample: WalkSample, c: float, beta: float) -> TailEstimate:
    """Exceedance frequency of the threshold c t^beta at every sampled time."""
    if c <= 0:
        raise ValidationError("c must be positive")
    if not 0 < beta <= 1:
        raise ValidationError("beta must lie in (0, 1]")
    delta_hat: dict[int, float] = {}
    errors: dict[int, float] = {}
    trials = sample.trials
    for column, t in enumerate(sample.times):
        threshold = c * t**beta
        hit = float((sample.displacements[:, column] >= threshold).mean())
        delta_hat[t] = hit
        errors[t] = math.sqrt(hit * (1.0 - hit) / trials)
    return TailEstimate(c, beta, delta_hat, errors)


def median_rule_constant(
    sample: WalkSample, beta: float, reference_time: int = 1024, factor: float = 0.5
) -> float:
    """The rule-fixed tail constant: factor x median(d at the reference time) /
    reference_time^beta."""
    if reference_time not in sample.times:
        raise ValidationError(f"reference time {reference_time} not in the sample grid")
    column = sample.times.index(reference_time)
    med = float(np.median(sample.displacements[:, column]))
    if med <= 0:
        raise EstimationError("median displacement at the reference time is zero")
    return factor * med / reference_time**beta
