"""Epoch schedules ``0 = tau_0 < tau_1 < tau_2 < ...``.

Epoch ``m`` covers rounds ``tau_{m-1}+1 .. tau_m``.  The geometric schedule is
unbounded and materialised lazily; known-horizon and custom schedules are
finite.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field


class ScheduleExhausted(LookupError):
    pass


@dataclass
class EpochSchedule:
    kind: str
    _bounds: list[int] = field(default_factory=list)
    finite: bool = True

    def __post_init__(self):
        prev = 0
        for b in self._bounds:
            if int(b) != b or b <= prev:
                raise ValueError(f"epoch boundaries must be strictly increasing positive integers: {self._bounds}")
            prev = b

    def _grow(self, m: int) -> None:
        # only the geometric schedule is unbounded
        while len(self._bounds) < m:
            self._bounds.append(2 ** (len(self._bounds) + 1))

    def tau(self, m: int) -> int:
        """Boundary ``tau_m`` (``tau_0 = 0``)."""
        if m == 0:
            return 0
        if not self.finite:
            self._grow(m)
        elif m > len(self._bounds):
            raise ScheduleExhausted(f"schedule has only {len(self._bounds)} epochs")
        return self._bounds[m - 1]

    def boundaries(self, horizon: int | None = None) -> list[int]:
        """Boundaries up to and including the epoch that contains ``horizon``."""
        if horizon is None:
            if not self.finite:
                raise ValueError("an unbounded schedule needs a horizon")
            return list(self._bounds)
        m = self.epoch_of(max(horizon, 1))
        return [self.tau(i) for i in range(1, m + 1)]

    def epoch_of(self, t: int) -> int:
        """Smallest ``m`` with ``t <= tau_m``."""
        if t < 1:
            raise ValueError(f"rounds start at 1, got {t}")
        if not self.finite:
            while not self._bounds or self._bounds[-1] < t:
                self._grow(len(self._bounds) + 1)
        elif not self._bounds or t > self._bounds[-1]:
            raise ScheduleExhausted(f"round {t} is beyond the last boundary of the schedule")
        return bisect_left(self._bounds, t) + 1

    def n_epochs(self, horizon: int) -> int:
        return self.epoch_of(horizon)

    def oracle_calls(self, horizon: int) -> int:
        """Oracle calls over ``horizon`` rounds: one per epoch after the first."""
        return self.n_epochs(horizon) - 1

    def descriptor(self) -> dict:
        if self.kind == "custom":
            return {"kind": "custom", "boundaries": list(self._bounds)}
        return {"kind": self.kind}


def geometric_schedule() -> EpochSchedule:
    """``tau_m = 2^m``."""
    return EpochSchedule("geometric", [], finite=False)


def _ceil_pow(T: int, m: int) -> int:
    v = T ** (1.0 - 2.0**-m)
    r = round(v)
    # guard exact integer powers against a last-ulp overshoot
    if abs(v - r) <= 1e-9 * max(v, 1.0):
        return int(r)
    return int(math.ceil(v))


def known_horizon_schedule(T: int) -> EpochSchedule:
    """``tau_m = ceil(T^(1 - 2^-m))``, consecutive duplicates dropped, capped at ``T``."""
    if T is None or int(T) != T or T < 2:
        raise ValueError("horizon: the known-horizon schedule needs an integer T >= 2")
    T = int(T)
    bounds: list[int] = []
    m = 1
    while True:
        b = _ceil_pow(T, m)
        if b >= T:
            bounds.append(T)
            break
        if not bounds or b > bounds[-1]:
            bounds.append(b)
        m += 1
    return EpochSchedule("known_horizon", bounds)


def custom_schedule(boundaries) -> EpochSchedule:
    bounds = [int(b) for b in boundaries]
    if not bounds:
        raise ValueError("a custom schedule needs at least one boundary")
    return EpochSchedule("custom", bounds)


def satisfies_doubling_cap(s: EpochSchedule, horizon: int) -> bool:
    """``tau_m <= 2 tau_{m-1}`` for every epoch reached by ``horizon``."""
    b = s.boundaries(horizon)
    return all(b[i] <= 2 * b[i - 1] for i in range(1, len(b)))


def satisfies_growth_floor(s: EpochSchedule, horizon: int) -> bool:
    """``tau_m >= 2^m`` for every epoch reached by ``horizon``."""
    return all(b >= 2**m for m, b in enumerate(s.boundaries(horizon), start=1))
