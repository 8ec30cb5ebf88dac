"""Uniform time grids, sample paths and the Hurst parameter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["HurstParam", "TimeGrid", "SamplePath", "as_hurst"]


@dataclass(frozen=True)
class HurstParam:
    """Hurst parameter in (0, 1).

    H = 1/2 is the classical Markov case; the scaling theory implemented
    here treats it only as a sanity regime, which ``is_classical`` flags.
    """

    value: float

    def __post_init__(self):
        if not 0.0 < self.value < 1.0:
            raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.value}")

    @property
    def is_classical(self) -> bool:
        return self.value == 0.5

    def __float__(self) -> float:
        return self.value


def as_hurst(H) -> float:
    """Coerce a float or HurstParam to a validated float."""
    h = float(H)
    if not 0.0 < h < 1.0:
        raise ValueError(f"Hurst parameter must lie in (0, 1), got {h}")
    return h


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < t_1 < ... < t_n = horizon with t_k = k*dt."""

    horizon: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.t0 != 0.0:
            raise ValueError("grids start at t0 = 0")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass
class SamplePath:
    """One realization of a process on a uniform grid (n_steps + 1 values)."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_steps + 1,):
            raise ValueError(
                f"path length {self.values.shape} does not match grid "
                f"({self.grid.n_steps + 1} points)"
            )

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def __len__(self) -> int:
        return len(self.values)
