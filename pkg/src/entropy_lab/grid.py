"""Uniform symmetric quadrature grids and sampled functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:
    from .oscillator_basis import CoefficientVector


class SupportError(ValueError):
    """The grid does not cover the region where the function lives."""


class ResolutionError(ValueError):
    """The grid spacing is too coarse for the features being sampled."""


class DegenerateInputError(ValueError):
    """A zero (or numerically zero) function was passed where a norm is needed."""


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes ``x_j = j*h`` for ``j = -n_half..n_half`` with ``h = L/n_half``.

    The node count is always odd, the centre node is exactly 0 and
    ``x[-j] == -x[j]`` holds bitwise.
    """

    half_width: float
    n_half: int

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.n_half < 1:
            raise ValueError(f"n_half must be >= 1, got {self.n_half}")

    @classmethod
    def from_spacing(cls, half_width: float, spacing: float) -> "QuadratureGrid":
        """Grid on [-L, L] whose spacing is at most ``spacing``."""
        if not spacing > 0:
            raise ValueError(f"spacing must be positive, got {spacing}")
        n_half = max(1, int(math.ceil(half_width / spacing - 1e-9)))
        return cls(float(half_width), n_half)

    @property
    def spacing(self) -> float:
        return self.half_width / self.n_half

    @property
    def size(self) -> int:
        return 2 * self.n_half + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(-self.n_half, self.n_half + 1) * self.spacing
        x.setflags(write=False)
        return x

    def refined(self) -> "QuadratureGrid":
        """Same interval, half the spacing."""
        return QuadratureGrid(self.half_width, 2 * self.n_half)

    def widened(self, factor: int = 2) -> "QuadratureGrid":
        """``factor`` times the interval at the same spacing."""
        return QuadratureGrid(self.half_width * factor, self.n_half * factor)

    def integrate(self, values: np.ndarray) -> float | complex:
        """Trapezoidal rule over the grid (numpy's pairwise summation)."""
        v = np.asarray(values)
        return self.spacing * (np.sum(v) - 0.5 * (v[0] + v[-1]))

    def first_node_at_or_above(self, boundary: float) -> int:
        """Index of the first node with ``x_j >= boundary``, by exact rational arithmetic."""
        from fractions import Fraction

        j = Fraction(boundary) * self.n_half / Fraction(self.half_width)
        k = math.ceil(j)
        return min(max(k + self.n_half, 0), self.size)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on a :class:`QuadratureGrid`.

    ``source`` records the oscillator-basis expansion the samples came from,
    when there is one; entropy routines use it to correct the quadrature at
    zeros of the function.
    """

    grid: QuadratureGrid
    values: np.ndarray
    source: Optional["CoefficientVector"] = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite samples")
        object.__setattr__(self, "values", v)

    def scaled(self, factor: complex) -> "GridFunction":
        src = None if self.source is None else self.source.scaled(factor)
        return GridFunction(self.grid, factor * self.values, src)

    def l2_norm(self) -> float:
        return math.sqrt(float(self.grid.integrate(np.abs(self.values) ** 2).real))

    def edge_magnitude(self) -> float:
        return float(max(abs(self.values[0]), abs(self.values[-1])))
