"""Wavefunctions sampled on the uniform grid x_j = j/M of [0, 1]."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


def trapezoid_weights(m: int) -> np.ndarray:
    """Composite trapezoid weights on M + 1 equispaced nodes.

    Exact for the discrete orthogonality of sampled sine, cosine and
    exponential modes, which the grid-complete propagators rely on.
    """
    if m < 2:
        raise ValueError(f"grid needs M >= 2 intervals, got {m}")
    w = np.full(m + 1, 1.0 / m)
    w[0] = w[-1] = 0.5 / m
    return w


@dataclass(frozen=True, eq=False)
class StateGrid:
    samples: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        w = np.asarray(self.weights, dtype=float)
        if s.ndim != 1 or s.shape != w.shape:
            raise ValueError("samples and weights must be 1-d arrays of equal length")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], m: int) -> "StateGrid":
        x = np.linspace(0.0, 1.0, m + 1)
        return cls(np.asarray(f(x), dtype=complex), trapezoid_weights(m))

    @classmethod
    def from_samples(cls, samples) -> "StateGrid":
        samples = np.asarray(samples, dtype=complex)
        return cls(samples, trapezoid_weights(len(samples) - 1))

    @property
    def m(self) -> int:
        return len(self.samples) - 1

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(self.samples) ** 2)))

    def inner(self, other: "StateGrid") -> complex:
        return complex(np.sum(self.weights * np.conj(self.samples) * other.samples))

    def distance(self, other: "StateGrid") -> float:
        d = self.samples - other.samples
        return float(np.sqrt(np.sum(self.weights * np.abs(d) ** 2)))

    def normalized(self) -> "StateGrid":
        return StateGrid(self.samples / self.norm(), self.weights)

    def boundary_magnitude(self) -> tuple[float, float]:
        return float(abs(self.samples[0])), float(abs(self.samples[-1]))


# Standard smooth initial states, normalized in L2(0, 1).

def parabola(x):
    """sqrt(30) x (1 - x): vanishes at both ends with nonzero slope."""
    return np.sqrt(30.0) * x * (1 - x)


def quartic(x):
    """sqrt(630) x^2 (1 - x)^2: value and slope vanish at both ends."""
    return np.sqrt(630.0) * x**2 * (1 - x) ** 2


_BUMP_NORM = math.sqrt(math.factorial(17) / math.factorial(8) ** 2)


def bump(x):
    """Normalized (x (1 - x))^4: value and first three derivatives vanish at both ends.

    Its expansion in the eigenmodes of every family decays fast enough for
    finite-difference and spectral propagators to be compared at 1e-4.
    """
    return _BUMP_NORM * (x * (1 - x)) ** 4


INITIAL_STATES = {"parabola": parabola, "quartic": quartic, "bump": bump}
