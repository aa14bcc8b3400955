"""Tangential mollifier and its commutators.

The smoothing operator acts plane by plane in the tangential Fourier
variables through the Gaussian multiplier

    m_kappa(xi) = exp(-kappa^2 |xi|^2 / 2),

so it is self-adjoint on every plane, contracts every tangential Sobolev
norm, and the squared operator used for the smoothed flow map is just the
multiplier squared applied in one pass.  kappa = 0 is the identity.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid


def _gaussian_symbol(grid: Grid, kappa: float, power: int) -> np.ndarray:
    ksq = grid.k1[:, None] ** 2 + grid.k2[None, :] ** 2
    return np.exp(-0.5 * power * kappa * kappa * ksq)


def mollify(grid: Grid, f: np.ndarray, kappa: float, power: int = 1) -> np.ndarray:
    """Apply the Gaussian tangential mollifier (to the given power).

    Works on interior and boundary layouts alike; the y3 direction is
    untouched.  ``power=2`` gives the squared operator.
    """
    if kappa < 0.0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    if kappa == 0.0 or power == 0:
        return f.copy()
    ax1, ax2 = grid._tangential_axes(f)
    fh = np.fft.fft2(f, axes=(ax1, ax2))
    shape = [1] * f.ndim
    shape[ax1] = grid.spec.n1
    shape[ax2] = grid.spec.n2
    fh *= _gaussian_symbol(grid, kappa, power).reshape(shape)
    return np.fft.ifft2(fh, axes=(ax1, ax2)).real


def commutator(grid: Grid, f: np.ndarray, g: np.ndarray, kappa: float) -> np.ndarray:
    """[mollifier, f] g = mollify(f g) - f mollify(g), pointwise products."""
    return mollify(grid, f * g, kappa) - f * mollify(grid, g, kappa)


def derivative_commutator(
    grid: Grid, f: np.ndarray, g: np.ndarray, kappa: float, axis: int
) -> np.ndarray:
    """[mollifier, f] (d_axis g), the form appearing in tangential energy swaps."""
    return commutator(grid, f, grid.derivative(g, axis), kappa)
