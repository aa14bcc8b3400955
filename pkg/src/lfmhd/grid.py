"""Collocation grid and discrete calculus on the slab T^2 x (0, 1).

Tangential directions (y1, y2) are periodic with period 1 and are handled
spectrally; the normal direction y3 lives on a uniform grid with n3 + 1
points including both walls and is handled with second-order finite
differences (one-sided stencils at the walls).

Array layout conventions used throughout the package:

* interior scalar field: shape ``(n1, n2, n3 + 1)``
* interior vector field: shape ``(3, n1, n2, n3 + 1)``
* boundary scalar field: shape ``(2, n1, n2)`` (plane 0 is y3 = 0)
* boundary vector field: shape ``(3, 2, n1, n2)``

Leading axes beyond the grid axes are treated as component axes and
broadcast over.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class FieldShapeError(ValueError):
    """Raised when an array does not match any known field layout."""


@dataclass(frozen=True)
class GridSpec:
    """Resolution and dealiasing parameters for the slab grid.

    Attributes
    ----------
    n1, n2 : int
        Tangential point counts.  Must be even and at least 8.
    n3 : int
        Number of normal intervals; the lattice carries n3 + 1 planes.
    dealias_fraction : float
        Fraction of the tangential spectrum retained when products are
        dealiased.  1.0 disables truncation.
    """

    n1: int
    n2: int
    n3: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        for name in ("n1", "n2"):
            n = getattr(self, name)
            if n < 8 or n % 2 != 0:
                raise ValueError(f"{name} must be even and >= 8, got {n}")
        if self.n3 < 8:
            raise ValueError(f"n3 must be >= 8, got {self.n3}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}"
            )

    @property
    def h3(self) -> float:
        return 1.0 / self.n3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3 + 1)


def _wavenumbers(n: int) -> np.ndarray:
    # period-1 torus: mode k carries wavenumber 2*pi*k
    return 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n)


class Grid:
    """Cached operators for one :class:`GridSpec`.

    Holds wavenumber tables, dealias masks, quadrature weights and the
    coordinate lattice, and implements derivatives, tangential inversion
    and the Sobolev norms used by the diagnostics.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        n1, n2, n3 = spec.n1, spec.n2, spec.n3
        self.shape = spec.shape
        self.h3 = spec.h3
        self.y1 = np.arange(n1) / n1
        self.y2 = np.arange(n2) / n2
        self.y3 = np.linspace(0.0, 1.0, n3 + 1)
        self.k1 = _wavenumbers(n1)
        self.k2 = _wavenumbers(n2)
        # trapezoid weights along y3; tangential quadrature is the plain mean
        w3 = np.full(n3 + 1, self.h3)
        w3[0] *= 0.5
        w3[-1] *= 0.5
        self.w3 = w3

    # ------------------------------------------------------------------
    # layout helpers

    def field_kind(self, f: np.ndarray) -> str:
        """Classify ``f`` as 'interior' or 'boundary' from its trailing axes."""
        s = self.spec
        if f.ndim >= 3 and f.shape[-3:] == (s.n1, s.n2, s.n3 + 1):
            return "interior"
        if f.ndim >= 2 and f.shape[-2:] == (s.n1, s.n2):
            return "boundary"
        raise FieldShapeError(
            f"array of shape {f.shape} matches neither interior {s.shape} "
            f"nor boundary (..., {s.n1}, {s.n2}) layout"
        )

    def _tangential_axes(self, f: np.ndarray) -> tuple[int, int]:
        if self.field_kind(f) == "interior":
            return (f.ndim - 3, f.ndim - 2)
        return (f.ndim - 2, f.ndim - 1)

    @cached_property
    def identity_map(self) -> np.ndarray:
        """The reference position field y, shape (3, n1, n2, n3 + 1)."""
        s = self.spec
        out = np.zeros((3,) + s.shape)
        out[0] = self.y1[:, None, None]
        out[1] = self.y2[None, :, None]
        out[2] = self.y3[None, None, :]
        return out

    def displacement(self, eta: np.ndarray) -> np.ndarray:
        """Periodic part of a flow map: eta minus the identity."""
        return eta - self.identity_map

    # ------------------------------------------------------------------
    # spectral helpers

    def _multiplier(self, f: np.ndarray, p1: int, p2: int) -> np.ndarray:
        """Apply the tangential Fourier multiplier (i k1)^p1 (i k2)^p2.

        Any positive power zeroes the Nyquist column of that axis, so the
        result agrees exactly with composing single derivatives.
        """
        ax1, ax2 = self._tangential_axes(f)
        fh = np.fft.fft2(f, axes=(ax1, ax2))
        n1, n2 = self.spec.n1, self.spec.n2
        m1 = (1j * self.k1) ** p1 if p1 else np.ones(n1, dtype=complex)
        m2 = (1j * self.k2) ** p2 if p2 else np.ones(n2, dtype=complex)
        if p1:
            m1[n1 // 2] = 0.0
        if p2:
            m2[n2 // 2] = 0.0
        shape1 = [1] * f.ndim
        shape1[ax1] = n1
        shape2 = [1] * f.ndim
        shape2[ax2] = n2
        fh *= m1.reshape(shape1)
        fh *= m2.reshape(shape2)
        return np.fft.ifft2(fh, axes=(ax1, ax2)).real

    def _fd3(self, f: np.ndarray) -> np.ndarray:
        """Second-order d/dy3: central inside, one-sided at the walls."""
        if self.field_kind(f) != "interior":
            raise FieldShapeError("axis-3 derivative needs an interior field")
        h = self.h3
        out = np.empty_like(f)
        out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
        out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h)
        out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h)
        return out

    # ------------------------------------------------------------------
    # public operators

    def derivative(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Partial derivative along axis 1, 2 (spectral) or 3 (FD)."""
        if axis == 1:
            return self._multiplier(f, 1, 0)
        if axis == 2:
            return self._multiplier(f, 0, 1)
        if axis == 3:
            return self._fd3(f)
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")

    def derivative_multi(self, f: np.ndarray, p1: int, p2: int, p3: int) -> np.ndarray:
        """Mixed derivative d1^p1 d2^p2 d3^p3 by composition."""
        g = self._multiplier(f, p1, p2) if (p1 or p2) else f
        for _ in range(p3):
            g = self._fd3(g)
        return g

    def tangential_laplacian(self, f: np.ndarray) -> np.ndarray:
        """Flat tangential Laplacian d11 + d22 via the -|xi|^2 multiplier."""
        ax1, ax2 = self._tangential_axes(f)
        fh = np.fft.fft2(f, axes=(ax1, ax2))
        shape1 = [1] * f.ndim
        shape1[ax1] = self.spec.n1
        shape2 = [1] * f.ndim
        shape2[ax2] = self.spec.n2
        k1sq = (self.k1**2).reshape(shape1)
        k2sq = (self.k2**2).reshape(shape2)
        fh *= -(k1sq + k2sq)
        return np.fft.ifft2(fh, axes=(ax1, ax2)).real

    def project_nonzero(self, f: np.ndarray) -> np.ndarray:
        """Remove the tangential mean on every y3 plane (or boundary plane)."""
        ax1, ax2 = self._tangential_axes(f)
        return f - f.mean(axis=(ax1, ax2), keepdims=True)

    def invert_tangential_laplacian_nonzero(self, g: np.ndarray) -> np.ndarray:
        """Solve lap_t u = P_{!=0} g plane-wise with zero tangential mean."""
        ax1, ax2 = self._tangential_axes(g)
        gh = np.fft.fft2(g, axes=(ax1, ax2))
        shape1 = [1] * g.ndim
        shape1[ax1] = self.spec.n1
        shape2 = [1] * g.ndim
        shape2[ax2] = self.spec.n2
        ksq = (self.k1**2).reshape(shape1) + (self.k2**2).reshape(shape2)
        with np.errstate(divide="ignore", invalid="ignore"):
            gh = np.where(ksq > 0.0, -gh / ksq, 0.0)
        return np.fft.ifft2(gh, axes=(ax1, ax2)).real

    @cached_property
    def _dealias_mask(self) -> np.ndarray:
        n1, n2 = self.spec.n1, self.spec.n2
        idx1 = np.abs(np.fft.fftfreq(n1, d=1.0 / n1))
        idx2 = np.abs(np.fft.fftfreq(n2, d=1.0 / n2))
        c1 = np.floor(self.spec.dealias_fraction * (n1 / 2.0))
        c2 = np.floor(self.spec.dealias_fraction * (n2 / 2.0))
        return (idx1[:, None] <= c1) & (idx2[None, :] <= c2)

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """Truncate the tangential spectrum to the dealias fraction."""
        if self.spec.dealias_fraction >= 1.0:
            return f
        ax1, ax2 = self._tangential_axes(f)
        fh = np.fft.fft2(f, axes=(ax1, ax2))
        shape = [1] * f.ndim
        shape[ax1] = self.spec.n1
        shape[ax2] = self.spec.n2
        fh *= self._dealias_mask.reshape(shape)
        return np.fft.ifft2(fh, axes=(ax1, ax2)).real

    # ------------------------------------------------------------------
    # quadrature and norms

    def integrate(self, f: np.ndarray) -> float:
        """Integral over the slab: exact tangential mean, trapezoid in y3."""
        if self.field_kind(f) != "interior":
            raise FieldShapeError("integrate expects an interior field")
        plane_mean = f.mean(axis=(-3, -2))
        return float(np.sum(plane_mean * self.w3, axis=-1).sum())

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """L2 inner product of interior fields (components summed)."""
        return self.integrate(f * g)

    def low_norm(self, f: np.ndarray) -> float:
        """Interior L2 norm without derivative terms (components summed)."""
        return float(np.sqrt(self.integrate(f * f)))

    @staticmethod
    def _multi_indices(s: int):
        for total in range(s + 1):
            for p1 in range(total + 1):
                for p2 in range(total - p1 + 1):
                    yield p1, p2, total - p1 - p2

    def norm(self, f: np.ndarray, s: float, where: str = "interior") -> float:
        """Sobolev norm of a field.

        Interior norms take integer s in 0..4 and sum squared L2 norms of
        all mixed derivatives of order <= s.  Boundary norms take
        half-integer s in 0..7/2 and use the tangential multiplier
        (1 + |xi|^2)^(s/2), summed over both planes.  Component axes are
        summed in quadrature.
        """
        if where == "interior":
            if s != int(s) or not 0 <= int(s) <= 4:
                raise ValueError(f"interior norm order must be an integer in 0..4, got {s}")
            if self.field_kind(f) != "interior":
                raise FieldShapeError("interior norm expects an interior field")
            total = 0.0
            for p1, p2, p3 in self._multi_indices(int(s)):
                d = self.derivative_multi(f, p1, p2, p3)
                total += self.integrate(d * d)
            return float(np.sqrt(total))
        if where == "boundary":
            two_s = 2.0 * s
            if two_s != int(two_s) or not 0 <= int(two_s) <= 7:
                raise ValueError(
                    f"boundary norm order must be a half-integer in 0..7/2, got {s}"
                )
            if self.field_kind(f) != "boundary":
                raise FieldShapeError("boundary norm expects a boundary field")
            fh = np.fft.fft2(f, axes=(-2, -1))
            fh /= self.spec.n1 * self.spec.n2
            ksq = self.k1[:, None] ** 2 + self.k2[None, :] ** 2
            weight = (1.0 + ksq) ** s
            total = np.sum(weight * np.abs(fh) ** 2)
            return float(np.sqrt(total))
        raise ValueError(f"where must be 'interior' or 'boundary', got {where!r}")

    def boundary_slices(self, f: np.ndarray) -> np.ndarray:
        """Restrict an interior field to the two walls, plane axis first.

        Output shape is ``(..., 2, n1, n2)`` with plane 0 at y3 = 0.
        """
        if self.field_kind(f) != "interior":
            raise FieldShapeError("boundary_slices expects an interior field")
        return np.stack([f[..., 0], f[..., -1]], axis=-3)
