"""Offline regression oracles and their estimation-error curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .core import ConfigError, FiniteFunctionClass, LinearPredictor, TablePredictor

LOSS_TIE_TOL = 1e-12


def _check_rewards(ys: np.ndarray) -> None:
    if ys.size and (ys.min() < 0.0 or ys.max() > 1.0):
        raise ValueError("oracle rewards must lie in [0, 1]")


def erm_losses(fclass: FiniteFunctionClass, contexts, actions, rewards) -> np.ndarray:
    """Summed squared loss of every class member on the sample."""
    ys = np.asarray(rewards, dtype=np.float64)
    _check_rewards(ys)
    return _kernels.class_losses(fclass.tables, contexts, actions, ys)


def erm_least_squares(fclass: FiniteFunctionClass, contexts, actions, rewards) -> TablePredictor:
    """Exact least-squares ERM over a finite class.

    Members whose loss is within ``1e-12`` of the minimum count as tied and the
    lowest index wins, so identical requests always return the same member and
    an empty sample returns member 0.
    """
    losses = erm_losses(fclass, contexts, actions, rewards)
    best = losses.min()
    j = int(np.flatnonzero(losses - best < LOSS_TIE_TOL)[0])
    return fclass.member(j)


def linear_least_squares(d: int, features, rewards, ridge: float = 1e-8) -> LinearPredictor:
    """Ridge-stabilised least squares ``(sum phi phi^T + ridge I) theta = sum phi r``."""
    if d <= 0:
        raise ConfigError("dimension", f"must be positive, got {d}")
    if ridge < 0:
        raise ConfigError("ridge", f"must be non-negative, got {ridge}")
    phi = np.asarray(features, dtype=np.float64).reshape(-1, d)
    ys = np.asarray(rewards, dtype=np.float64)
    _check_rewards(ys)
    if phi.shape[0] == 0:
        return LinearPredictor(np.zeros(d))
    gram = phi.T @ phi + ridge * np.eye(d)
    rhs = phi.T @ ys
    # lstsq keeps the rank-deficient, ridge=0 case well defined (minimum-norm solution)
    theta = np.linalg.solve(gram, rhs) if ridge > 0 else np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return LinearPredictor(theta)


class FiniteClassOracle:
    """Least-squares oracle bound to one finite class."""

    kind = "finite"

    def __init__(self, fclass: FiniteFunctionClass):
        self.fclass = fclass

    @property
    def class_size(self) -> int:
        return self.fclass.size

    def empty(self) -> TablePredictor:
        return self.fclass.member(0)

    def fit(self, window: dict) -> TablePredictor:
        return erm_least_squares(self.fclass, window["contexts"], window["actions"], window["rewards"])


class LinearOracle:
    kind = "linear"

    def __init__(self, d: int, ridge: float = 1e-8):
        if d <= 0:
            raise ConfigError("dimension", f"must be positive, got {d}")
        self.d = d
        self.ridge = ridge

    def empty(self) -> LinearPredictor:
        return LinearPredictor(np.zeros(self.d))

    def fit(self, window: dict) -> LinearPredictor:
        return linear_least_squares(self.d, window["features"], window["rewards"], self.ridge)


@dataclass(frozen=True)
class EstimationErrorCurve:
    """High-probability squared-error guarantee ``xi(n, delta)`` of an oracle.

    ``descriptor`` records the named form and its constants so the curve can be
    echoed into run metadata and rebuilt from config.
    """

    fn: Callable[[int, float], float] = field(repr=False)
    descriptor: dict

    def __call__(self, n: int, delta: float) -> float:
        if n <= 0:
            raise ValueError("estimation error is undefined for n = 0")
        return self.fn(n, delta)


def xi_finite_class(size: int, C: float = 16.0) -> EstimationErrorCurve:
    """``C ln(2|F|/delta) / n``."""
    if size < 4:
        raise ConfigError("class_size", f"need |F| >= 4, got {size}")
    if C <= 0:
        raise ConfigError("xi.C", f"must be positive, got {C}")

    def xi(n, delta):
        return C * math.log(2.0 * size / delta) / n

    return EstimationErrorCurve(xi, {"form": "finite", "class_size": size, "C": C})


def xi_linear_class(d: int, C: float = 8.0) -> EstimationErrorCurve:
    """``C (d ln(e max(n, d) / d) + ln(2/delta)) / n``."""
    if d < 1:
        raise ConfigError("dimension", f"must be >= 1, got {d}")
    if C <= 0:
        raise ConfigError("xi.C", f"must be positive, got {C}")

    def xi(n, delta):
        return C * (d * math.log(math.e * max(n, d) / d) + math.log(2.0 / delta)) / n

    return EstimationErrorCurve(xi, {"form": "linear", "dimension": d, "C": C})


def constant_xi(value: float) -> EstimationErrorCurve:
    if value <= 0:
        raise ConfigError("xi.value", f"must be positive, got {value}")
    return EstimationErrorCurve(lambda n, delta: value, {"form": "constant", "value": value})
