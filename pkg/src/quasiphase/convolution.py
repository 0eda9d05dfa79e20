"""Sampled phase-space grids, FFT convolution and Gaussian deconvolution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .analytic import KernelSpec

__all__ = ["Axis", "Grid2D", "UnsupportedKernelError", "convolve", "deconvolve", "integrate"]


class UnsupportedKernelError(ValueError):
    """The requested kernel cannot be used for this operation."""


@dataclass(frozen=True)
class Axis:
    """``count`` uniformly spaced samples from ``lo`` to ``hi`` inclusive."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis needs count >= 2, got {self.count}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("axis bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"inverted axis bounds {self.lo}:{self.hi}")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "count", int(self.count))

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def as_tuple(self) -> tuple:
        return (self.lo, self.hi, self.count)

    @classmethod
    def symmetric(cls, radius: float, count: int) -> "Axis":
        return cls(-radius, radius, count)


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Samples of a function on the alpha plane.

    ``values[i, j]`` is the value at ``re_axis.points[j] + 1j * im_axis.points[i]``.
    Each sample stands for one cell of area ``re spacing * im spacing``.
    """

    re_axis: Axis
    im_axis: Axis
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.im_axis.count, self.re_axis.count):
            raise ValueError(
                f"values shape {v.shape} does not match axes "
                f"({self.im_axis.count}, {self.re_axis.count})"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, re_axis: Axis, im_axis: Axis, func) -> "Grid2D":
        """Evaluate ``func(alpha_array)`` on the grid."""
        return cls(re_axis, im_axis, np.asarray(func(cls.alpha_mesh(re_axis, im_axis))))

    @classmethod
    def from_samples(cls, re_points, im_points, values) -> "Grid2D":
        """Build from explicit sample coordinates, which must be uniform."""
        axes = []
        for pts in (np.asarray(re_points, float), np.asarray(im_points, float)):
            if pts.size < 2:
                raise ValueError("need at least two samples per axis")
            d = np.diff(pts)
            if np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-9 * max(1.0, abs(d.mean())):
                raise ValueError("grid is not uniform")
            axes.append(Axis(pts[0], pts[-1], pts.size))
        return cls(axes[0], axes[1], values)

    @staticmethod
    def alpha_mesh(re_axis: Axis, im_axis: Axis) -> np.ndarray:
        x, y = np.meshgrid(re_axis.points, im_axis.points)
        return x + 1j * y

    @property
    def alpha(self) -> np.ndarray:
        return self.alpha_mesh(self.re_axis, self.im_axis)

    @property
    def cell_area(self) -> float:
        return self.re_axis.spacing * self.im_axis.spacing

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values) -> "Grid2D":
        return Grid2D(self.re_axis, self.im_axis, values)


def _edge_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def integrate(f: Grid2D):
    """Integral over the grid rectangle: samples times the cell area.

    Samples on the boundary carry half weight (a quarter at the corners), so
    the rectangle ``[lo, hi]`` is covered exactly once; for functions that
    vanish at the boundary this is the plain cell-area sum. Rows are reduced
    first, then summed in index order, so the result does not depend on how
    the grid was produced.
    """
    wy = _edge_weights(f.im_axis.count)
    wx = _edge_weights(f.re_axis.count)
    row_sums = np.sum(f.values * wx[None, :], axis=1) * wy
    total = 0.0
    for r in row_sums:
        total += r
    total = total * f.cell_area
    return complex(total) if f.is_complex else float(total)


def _padded_shape(shape) -> tuple:
    return tuple(sfft.next_fast_len(2 * n) for n in shape)


def _kernel_offsets(grid: Grid2D, kernel: KernelSpec) -> np.ndarray:
    ny, nx = grid.values.shape
    ox = np.arange(-(nx - 1), nx) * grid.re_axis.spacing
    oy = np.arange(-(ny - 1), ny) * grid.im_axis.spacing
    X, Y = np.meshgrid(ox, oy)
    return kernel(X, Y) * grid.cell_area


def convolve(f: Grid2D, kernel: KernelSpec) -> Grid2D:
    """Linear convolution ``(K * f)`` on the same axes, via zero-padded FFT."""
    ny, nx = f.values.shape
    kern = _kernel_offsets(f, kernel)
    shape = _padded_shape(kern.shape)
    if np.iscomplexobj(f.values):
        out = sfft.ifft2(sfft.fft2(f.values, shape) * sfft.fft2(kern, shape))
    else:
        out = sfft.irfft2(sfft.rfft2(f.values, shape) * sfft.rfft2(kern, shape), shape)
    # full linear convolution has the zero offset at index (ny-1, nx-1)
    out = out[ny - 1 : 2 * ny - 1, nx - 1 : 2 * nx - 1]
    return f.with_values(out)


def deconvolve(f: Grid2D, kernel: KernelSpec, cutoff_eps: float) -> Grid2D:
    """Regularized inverse of :func:`convolve` for Gaussian kernels.

    Fourier modes where the kernel transform is not above ``cutoff_eps`` are
    discarded; the rest are divided by the analytic kernel transform.
    """
    if kernel.kind != "gaussian_s":
        raise UnsupportedKernelError(
            "only Gaussian kernels can be deconvolved: the sinc2 transform "
            "vanishes outside a square"
        )
    if not 0 < cutoff_eps <= 1:
        raise ValueError("cutoff_eps must lie in (0, 1]")
    ny, nx = f.values.shape
    shape = _padded_shape(f.values.shape)
    kx = 2 * np.pi * sfft.fftfreq(shape[1], d=f.re_axis.spacing)
    ky = 2 * np.pi * sfft.fftfreq(shape[0], d=f.im_axis.spacing)
    khat = kernel.transform(kx[None, :], ky[:, None])
    keep = khat > cutoff_eps
    ratio = np.where(keep, 1.0 / np.where(keep, khat, 1.0), 0.0)
    # khat is real and even, so filtering in place needs no phase correction
    out = sfft.ifft2(sfft.fft2(f.values, shape) * ratio)[:ny, :nx]
    if not np.iscomplexobj(f.values):
        out = out.real
    return f.with_values(out)
