"""Periodic grids for the spectral laboratory.

The computational domain is the periodic cube [-L, L)^N with n samples per
axis, spacing h = 2L/n. Wavenumbers follow the standard DFT layout: the
per-axis frequencies are integer multiples of pi/L with the zero mode first.
Derived arrays (coordinates, |k|^2, the multiplier |k|^{2s}) are cached per
grid because every operator evaluation reuses them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_COORD_CACHE: dict = {}
_KSQ_CACHE: dict = {}
_SYMBOL_CACHE: dict = {}
_TAIL_MASK_CACHE: dict = {}


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L)^N."""

    dim: int
    points_per_axis: int
    half_length: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def frequencies(self) -> np.ndarray:
        """Per-axis wavenumbers (pi/L times integers, DFT order)."""
        n = self.points_per_axis
        return 2.0 * np.pi * np.fft.fftfreq(n, d=self.spacing)

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def num_points(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def volume(self) -> float:
        return (2.0 * self.half_length) ** self.dim

    def axis_coordinates(self) -> np.ndarray:
        """Sample positions along one axis: -L + h*j."""
        key = (self.dim, self.points_per_axis, self.half_length)
        if key not in _COORD_CACHE:
            n = self.points_per_axis
            _COORD_CACHE[key] = -self.half_length + self.spacing * np.arange(n)
        return _COORD_CACHE[key]

    def meshgrid(self) -> tuple:
        x = self.axis_coordinates()
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def radius(self) -> np.ndarray:
        """Euclidean distance from the origin at every grid point."""
        mesh = self.meshgrid()
        return np.sqrt(sum(c * c for c in mesh))

    def wavenumber_sq(self) -> np.ndarray:
        """|k|^2 on the full N-dimensional frequency grid."""
        key = (self.dim, self.points_per_axis, self.half_length)
        if key not in _KSQ_CACHE:
            k = self.frequencies
            mesh = np.meshgrid(*([k] * self.dim), indexing="ij")
            _KSQ_CACHE[key] = sum(c * c for c in mesh)
        return _KSQ_CACHE[key]

    def symbol(self, s: float) -> np.ndarray:
        """Fourier multiplier |k|^{2s} of the fractional Laplacian."""
        key = (self.dim, self.points_per_axis, self.half_length, float(s))
        if key not in _SYMBOL_CACHE:
            _SYMBOL_CACHE[key] = self.wavenumber_sq() ** float(s)
        return _SYMBOL_CACHE[key]

    def boundary_tail_mask(self) -> np.ndarray:
        """Boolean mask of points with |x|_inf > L/2 (the outer shell)."""
        key = (self.dim, self.points_per_axis, self.half_length)
        if key not in _TAIL_MASK_CACHE:
            mesh = self.meshgrid()
            amax = np.abs(mesh[0])
            for c in mesh[1:]:
                amax = np.maximum(amax, np.abs(c))
            _TAIL_MASK_CACHE[key] = amax > 0.5 * self.half_length
        return _TAIL_MASK_CACHE[key]


def make_grid(dim: int, points_per_axis: int, half_length: float) -> GridSpec:
    """Validated GridSpec constructor."""
    if dim not in (1, 2, 3):
        raise ValueError("unsupported dimension %r (must be 1, 2, or 3)" % (dim,))
    n = int(points_per_axis)
    if n != points_per_axis or n % 2 != 0:
        raise ValueError("odd grid size %r (points per axis must be even)" % (points_per_axis,))
    if n < 8:
        raise ValueError("grid size %d too small (need at least 8 points per axis)" % n)
    L = float(half_length)
    if not (L > 0.0) or not np.isfinite(L):
        raise ValueError("non-positive half length %r" % (half_length,))
    return GridSpec(dim=dim, points_per_axis=n, half_length=L)
