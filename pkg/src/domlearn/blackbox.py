"""Black-box function oracles and domain-of-interest indicators.

An oracle maps a point in [-1,1]^d to a float; any non-finite result (inf,
-inf, NaN) stands for an "undefined" evaluation, the exit-flag case, and is
normalized to +inf.  An Indicator decides membership of a *value* in the
domain of interest, so the domain itself is {y : indicator(f(y)) = 1}.

Four built-in test functions are provided, together with their indicators.
External simulators plug in through Problem with any callable oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnknownFunction


def is_defined(value: float) -> bool:
    """True when the oracle returned an actual value rather than an exit flag."""
    return math.isfinite(value)


@dataclass(frozen=True)
class Indicator:
    """Membership test a <= v < b (or a <= v <= b when closed_upper).

    Non-finite values never pass: an undefined evaluation is always outside
    the domain of interest.
    """

    lower: float
    upper: float
    closed_upper: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("indicator requires lower < upper")

    def accepts(self, value: float) -> bool:
        if not math.isfinite(value):
            return False
        if self.closed_upper:
            return self.lower <= value <= self.upper
        return self.lower <= value < self.upper

    def accepts_values(self, values: np.ndarray) -> np.ndarray:
        """Vectorized membership over an array of values."""
        v = np.asarray(values, dtype=float)
        ok = np.isfinite(v) & (v >= self.lower)
        if self.closed_upper:
            return ok & (v <= self.upper)
        return ok & (v < self.upper)


class Problem:
    """A black-box evaluation target: oracle, indicator, and a call counter.

    The oracle must be pure.  `evals` counts every oracle call made through
    `evaluate`, which is the only path the sampling loop uses, so it equals
    the running evaluation budget of a trial.
    """

    def __init__(self, oracle: Callable[[np.ndarray], float], indicator: Indicator, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.oracle = oracle
        self.indicator = indicator
        self.dim = dim
        self._evals = 0

    @property
    def evals(self) -> int:
        return self._evals

    def evaluate(self, y: np.ndarray) -> float:
        """Call the oracle once; non-finite results come back as +inf."""
        self._evals += 1
        value = float(self.oracle(y))
        return value if math.isfinite(value) else math.inf


def eval_test_function_batch(fid: int, points: np.ndarray) -> np.ndarray:
    """Vectorized built-in test function over rows of `points`.

    Does not touch any evaluation counter; intended for ground-truth tables
    in simulations.  Singular or overflowing evaluations come back as +inf.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    _check_fid_dim(fid, d)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fid == 1:
            s2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
            out = ((10.0 / 7.0) ** 2 - 1.0 / s2) * np.exp(-pts.sum(axis=1) / (2.0 * d))
        elif fid == 2:
            t = (pts ** 2).sum(axis=1)
            out = np.log(8.0 * t) - 2.0 * t
        elif fid == 3:
            t = (pts ** 2).sum(axis=1)
            coef = 1.0 - ((d - 2.0) / 100.0) * (d * d - 10.0 * d + 29.0)
            out = coef * np.log((16.0 / d) * t) - (4.0 / d) * t
        else:
            shifts = np.array([(-1.0) ** (i + 1) / (i + 1) for i in range(1, d + 1)])
            q = d / 4.0
            out = np.prod(q / (q + (pts + shifts) ** 2), axis=1)
    out = np.asarray(out, dtype=float)
    out[~np.isfinite(out)] = np.inf
    return out


def eval_test_function(fid: int, y: np.ndarray) -> float:
    """Scalar evaluation of a built-in test function at one point."""
    y = np.asarray(y, dtype=float)
    return float(eval_test_function_batch(fid, y.reshape(1, -1))[0])


def indicator_for(fid: int) -> Indicator:
    """Domain-of-interest indicator of a built-in test function.

    Functions 1-3 use the half-open band [0, inf); function 4 uses the closed
    band [0.18, 0.72].
    """
    if fid in (1, 2, 3):
        return Indicator(0.0, math.inf)
    if fid == 4:
        return Indicator(0.18, 0.72, closed_upper=True)
    raise UnknownFunction(f"no built-in test function with id {fid}")


def required_dim(fid: int) -> int:
    """Smallest dimension a built-in test function is defined for."""
    if fid not in (1, 2, 3, 4):
        raise UnknownFunction(f"no built-in test function with id {fid}")
    return 2 if fid == 1 else 1


def _check_fid_dim(fid: int, dim: int) -> None:
    if dim < required_dim(fid):
        raise ValueError(f"test function {fid} requires dim >= {required_dim(fid)}")


def make_problem(fid: int, dim: int) -> Problem:
    """Problem wrapping a built-in test function and its indicator."""
    _check_fid_dim(fid, dim)
    indicator = indicator_for(fid)

    def oracle(y: np.ndarray) -> float:
        return eval_test_function(fid, y)

    return Problem(oracle, indicator, dim)
