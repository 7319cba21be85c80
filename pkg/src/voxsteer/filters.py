"""Cone density filter of radius rmin, built from stacked 2-D convolutions.

The 3-D cone kernel w(i,j,k) = max(0, rmin - sqrt(i^2+j^2+k^2)) is applied
with zero padding as one 2-D pass per kernel slab along z, summed; this
equals the dense 3-D convolution to rounding. Outputs are normalized per
element by hs, the same convolution applied to an all-ones field, so a
constant field is a fixed point. The kernel is symmetric, hence
self-adjoint up to the hs normalization; sensitivity filtering divides by
hs first and convolves after.

Element fields may be passed flat (x-fastest order) or as (nx, ny, nz)
arrays; the result matches the input's shape.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage


class FilterKernel:
    """Cone filter weights plus the per-element normalization for one mesh shape."""

    def __init__(self, shape: tuple[int, int, int], rmin: float = 1.5):
        if not (math.isfinite(rmin) and rmin >= 1.0):
            raise ValueError(f"rmin must be >= 1 element, got {rmin!r}")
        self.shape = tuple(int(n) for n in shape)
        if len(self.shape) != 3 or any(n < 1 for n in self.shape):
            raise ValueError(f"bad field shape {shape!r}")
        self.rmin = float(rmin)
        self.half_width = math.ceil(self.rmin) - 1
        hw = self.half_width
        idx = np.arange(-hw, hw + 1)
        ii, jj, kk = np.meshgrid(idx, idx, idx, indexing="ij")
        self.weights = np.maximum(0.0, self.rmin - np.sqrt(ii**2 + jj**2 + kk**2))
        self.hs = self._convolve(np.ones(self.shape))
        self.weights.setflags(write=False)
        self.hs.setflags(write=False)

    def _convolve(self, x: np.ndarray) -> np.ndarray:
        """Zero-padded kernel convolution as a per-slab sequence of 2-D passes."""
        hw = self.half_width
        if hw == 0:
            return x * self.weights[0, 0, 0]
        nz = self.shape[2]
        out = np.zeros_like(x)
        for s in range(2 * hw + 1):
            w2 = self.weights[:, :, s]
            if not w2.any():
                continue
            y = ndimage.convolve(x, w2[:, :, None], mode="constant", cval=0.0)
            dz = s - hw
            if dz == 0:
                out += y
            elif dz > 0:
                out[:, :, dz:] += y[:, :, : nz - dz]
            else:
                out[:, :, : nz + dz] += y[:, :, -dz:]
        return out

    def _as_grid(self, field) -> tuple[np.ndarray, bool]:
        arr = np.asarray(field, dtype=float)
        if arr.shape == self.shape:
            return arr, False
        n = self.shape[0] * self.shape[1] * self.shape[2]
        if arr.shape == (n,):
            return arr.reshape(self.shape, order="F"), True
        raise ValueError(f"field shape {arr.shape} does not match mesh {self.shape}")

    def forward(self, x) -> np.ndarray:
        """Physical densities: convolve then normalize by hs."""
        grid, flat = self._as_grid(x)
        out = self._convolve(grid) / self.hs
        return out.ravel(order="F") if flat else out

    def adjoint(self, g) -> np.ndarray:
        """Pull a gradient wrt filtered values back to design variables."""
        grid, flat = self._as_grid(g)
        out = self._convolve(grid / self.hs)
        return out.ravel(order="F") if flat else out


def filter_field(x, kernel: FilterKernel) -> np.ndarray:
    return kernel.forward(x)


def filter_sensitivities(g_phys, kernel: FilterKernel) -> np.ndarray:
    return kernel.adjoint(g_phys)
