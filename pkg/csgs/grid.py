#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from csgs import GridError

BOUNDARY_PERIODIC = 'periodic'
BOUNDARY_DIRICHLET = 'dirichlet'
BOUNDARIES = (BOUNDARY_PERIODIC, BOUNDARY_DIRICHLET)

LAPLACIAN_SPECTRAL = 'spectral'
LAPLACIAN_FD2 = 'fd2'
LAPLACIAN_MODES = (LAPLACIAN_SPECTRAL, LAPLACIAN_FD2)

# Smallest even n accepted on every axis; n = 4 grids carry the quadrature weight checks
MIN_POINTS_PER_DIM = 4


@dataclass(frozen=True)
class GridSpec:
    """
    Truncated box [-L, L)^d sampled with n nodes per axis.

    On dirichlet grids the field vanishes at the ghost nodes -L-h and +L, which bound the sampled nodes
    on each axis.
    """
    dim: int
    half_width: float
    points_per_dim: int
    boundary: str = BOUNDARY_PERIODIC
    laplacian_mode: str = LAPLACIAN_SPECTRAL

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise GridError(f"dim must be 1, 2 or 3 (got {self.dim})")
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise GridError(f"half_width must be positive (got {self.half_width})")
        if self.points_per_dim % 2 != 0:
            raise GridError(f"n must be even (got {self.points_per_dim})")
        if self.points_per_dim < MIN_POINTS_PER_DIM:
            raise GridError(f"n must be at least {MIN_POINTS_PER_DIM} (got {self.points_per_dim})")
        if self.boundary not in BOUNDARIES:
            raise GridError(f"boundary must be one of {', '.join(BOUNDARIES)} (got '{self.boundary}')")
        if self.laplacian_mode not in LAPLACIAN_MODES:
            raise GridError(f"laplacian_mode must be one of {', '.join(LAPLACIAN_MODES)} (got '{self.laplacian_mode}')")
        if self.laplacian_mode == LAPLACIAN_SPECTRAL and self.boundary != BOUNDARY_PERIODIC:
            raise GridError("spectral laplacian requires periodic boundary")

    @property
    def is_periodic(self) -> bool:
        return self.boundary == BOUNDARY_PERIODIC

    def with_points(self, points_per_dim: int) -> GridSpec:
        return GridSpec(self.dim, self.half_width, points_per_dim, self.boundary, self.laplacian_mode)


class Grid:
    _spec: GridSpec
    _spacing: float
    _axes: Tuple[np.ndarray, ...]
    _weights: np.ndarray

    _coordinates: Optional[np.ndarray]
    _symbol: Optional[np.ndarray]

    def __init__(self, spec: GridSpec) -> None:
        self._spec = spec
        self._spacing = 2.0 * spec.half_width / spec.points_per_dim

        axis = -spec.half_width + np.arange(spec.points_per_dim) * self._spacing
        self._axes = tuple(axis for _ in range(spec.dim))

        # Periodic: rectangle rule. Dirichlet: trapezoid rule whose endpoints are the zero ghosts,
        # which leaves h on every sampled node as well.
        self._weights = np.full(self.shape, self._spacing ** spec.dim)

        self._coordinates = None
        self._symbol = None

    @property
    def spec(self) -> GridSpec:
        return self._spec

    @property
    def dim(self) -> int:
        return self._spec.dim

    @property
    def spacing(self) -> float:
        return self._spacing

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self._spec.points_per_dim,) * self._spec.dim

    @property
    def axes(self) -> Tuple[np.ndarray, ...]:
        return self._axes

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def measure(self) -> float:
        return (2.0 * self._spec.half_width) ** self._spec.dim

    @property
    def coordinates(self) -> np.ndarray:
        """
        Node coordinates stacked along the first axis, shape (d, n, ..., n)
        """
        if self._coordinates is None:
            self._coordinates = np.stack(np.meshgrid(*self._axes, indexing='ij'))
            self._coordinates.setflags(write=False)

        return self._coordinates

    @property
    def radius_squared(self) -> np.ndarray:
        return np.sum(self.coordinates ** 2, axis=0)

    @property
    def nodes_per_unit(self) -> Optional[int]:
        """
        Number of nodes per unit length when it is integral, None otherwise
        """
        per_unit = self._spec.points_per_dim / (2.0 * self._spec.half_width)
        rounded = int(round(per_unit))
        if rounded < 1 or abs(per_unit - rounded) > 1e-9 * per_unit:
            return None

        return rounded

    def shell_mask(self, fraction: float = 0.8) -> np.ndarray:
        sup_norm = np.max(np.abs(self.coordinates), axis=0)
        return sup_norm >= fraction * self._spec.half_width

    def node_coordinate(self, index: Sequence[int]) -> Tuple[float, ...]:
        return tuple(float(self._axes[axis][i]) for axis, i in enumerate(index))

    def conforms(self, f: np.ndarray) -> bool:
        return isinstance(f, np.ndarray) and f.shape == self.shape

    def check(self, f: np.ndarray, name: str = 'field') -> None:
        if not self.conforms(f):
            actual = f.shape if isinstance(f, np.ndarray) else type(f).__name__
            raise GridError(f"{name} does not conform to the grid: expected shape {self.shape}, got {actual}")

    def laplacian_symbol(self) -> np.ndarray:
        """
        Eigenvalues of -Δ in the basis that diagonalises it: Fourier modes on periodic grids, sine modes
        (DST-I) on dirichlet grids
        """
        if self._symbol is None:
            n = self._spec.points_per_dim
            h = self._spacing

            if self._spec.laplacian_mode == LAPLACIAN_SPECTRAL:
                k = 2.0 * np.pi * sfft.fftfreq(n, d=h)
                per_axis = k ** 2
            elif self._spec.is_periodic:
                k = 2.0 * np.pi * sfft.fftfreq(n, d=h)
                per_axis = 4.0 / h ** 2 * np.sin(k * h / 2.0) ** 2
            else:
                j = np.arange(1, n + 1)
                per_axis = 4.0 / h ** 2 * np.sin(np.pi * j / (2.0 * (n + 1))) ** 2

            symbol = np.zeros(self.shape)
            for axis in range(self._spec.dim):
                broadcast_shape = [1] * self._spec.dim
                broadcast_shape[axis] = n
                symbol = symbol + per_axis.reshape(broadcast_shape)

            symbol.setflags(write=False)
            self._symbol = symbol

        return self._symbol

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other._spec == self._spec

    def __hash__(self) -> int:
        return hash(self._spec)

    def __repr__(self) -> str:
        return f"Grid({self._spec})"


def build_grid(spec: GridSpec) -> Grid:
    return Grid(spec)


def integrate(f: np.ndarray, grid: Grid) -> float:
    grid.check(f)
    return float(np.sum(grid.weights * f))


def apply_laplacian(f: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Return Δf (note the sign: -apply_laplacian is the positive semidefinite operator)
    """
    grid.check(f)

    if grid.spec.laplacian_mode == LAPLACIAN_SPECTRAL:
        return -sfft.ifftn(grid.laplacian_symbol() * sfft.fftn(f)).real

    h2 = grid.spacing ** 2
    result = np.zeros_like(f, dtype=float)

    if grid.spec.is_periodic:
        for axis in range(grid.dim):
            result += np.roll(f, 1, axis=axis) + np.roll(f, -1, axis=axis) - 2.0 * f
    else:
        padded = np.pad(f, 1)
        core = tuple(slice(1, -1) for _ in range(grid.dim))
        for axis in range(grid.dim):
            lower = list(core)
            upper = list(core)
            lower[axis] = slice(0, -2)
            upper[axis] = slice(2, None)
            result += padded[tuple(lower)] + padded[tuple(upper)] - 2.0 * f

    return result / h2


def solve_shifted_laplacian(f: np.ndarray, grid: Grid, shift: float) -> np.ndarray:
    """
    Return (-Δ + shift)^{-1} f for shift > 0
    """
    grid.check(f)
    if shift <= 0:
        raise GridError(f"shift must be positive (got {shift})")

    denominator = grid.laplacian_symbol() + shift
    if grid.spec.is_periodic:
        return sfft.ifftn(sfft.fftn(f) / denominator).real

    return sfft.idstn(sfft.dstn(f, type=1) / denominator, type=1)


def translate_lattice(f: np.ndarray, shift: Sequence[int], grid: Grid) -> np.ndarray:
    """
    Return x -> f(x + z) for an integer lattice vector z
    """
    grid.check(f)

    if not grid.spec.is_periodic:
        raise GridError("lattice translation requires a periodic grid")

    shift = tuple(int(s) for s in shift)
    if len(shift) != grid.dim:
        raise GridError(f"shift must have {grid.dim} components (got {len(shift)})")

    nodes_per_unit = grid.nodes_per_unit
    if nodes_per_unit is None:
        raise GridError(
            f"non-integral node shift: {grid.spec.points_per_dim} nodes on a box of length "
            f"{2.0 * grid.spec.half_width} do not give a whole number of nodes per unit length"
        )

    if not any(shift):
        return f.copy()

    return np.roll(f, tuple(-s * nodes_per_unit for s in shift), axis=tuple(range(grid.dim)))


@dataclass
class FieldPair:
    """
    The unknown (u, v) sampled on a grid
    """
    u: np.ndarray
    v: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)

        self.grid.check(self.u, 'u')
        self.grid.check(self.v, 'v')

        for name, component in (('u', self.u), ('v', self.v)):
            if not np.all(np.isfinite(component)):
                index = tuple(int(i) for i in np.argwhere(~np.isfinite(component))[0])
                raise GridError(f"{name} is not finite at node {self.grid.node_coordinate(index)}")

    @classmethod
    def zeros(cls, grid: Grid) -> FieldPair:
        return FieldPair(np.zeros(grid.shape), np.zeros(grid.shape), grid)

    def check_same_grid(self, other: FieldPair) -> None:
        if self.grid != other.grid:
            raise GridError(f"mismatched grids: {self.grid} and {other.grid}")

    def scaled(self, t: float) -> FieldPair:
        return FieldPair(t * self.u, t * self.v, self.grid)

    def plus(self, other: FieldPair, alpha: float = 1.0) -> FieldPair:
        self.check_same_grid(other)
        return FieldPair(self.u + alpha * other.u, self.v + alpha * other.v, self.grid)

    def absolute(self) -> FieldPair:
        return FieldPair(np.abs(self.u), np.abs(self.v), self.grid)

    def negated(self) -> FieldPair:
        return FieldPair(-self.u, -self.v, self.grid)

    def translated(self, shift: Sequence[int]) -> FieldPair:
        return FieldPair(translate_lattice(self.u, shift, self.grid), translate_lattice(self.v, shift, self.grid), self.grid)

    def inner(self, other: FieldPair) -> float:
        self.check_same_grid(other)
        return integrate(self.u * other.u + self.v * other.v, self.grid)

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self), 0.0)))

    def is_zero(self) -> bool:
        return not (np.any(self.u) or np.any(self.v))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.u >= 0.0) and np.all(self.v >= 0.0))
