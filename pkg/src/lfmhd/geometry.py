"""Flow-map geometry: deformation gradient, cofactors, covariant calculus.

Index conventions, with Greek indices running over 1..3:

* ``deta[alpha, mu]`` holds d(eta_alpha)/d(y_mu);
* ``a[mu, alpha]`` is the inverse, so that a^{mu alpha} d_mu pulls back
  the Eulerian gradient;
* ``A = J a`` is the cofactor matrix, whose rows are divergence free for
  any smooth map (the Piola identity) up to discretization error.

Derivatives of flow maps always act on the periodic displacement
``eta - Id`` in the tangential directions, so the identity map is exact
on the discrete lattice.  Inversion and determinants are pointwise 3x3
algebra; products inside covariant operators are pointwise with the
grid's tangential dealiasing applied to each result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .smoothing import mollify


class DegenerateMapError(RuntimeError):
    """Flow map Jacobian at or below the determinant floor.

    Carries the offending lattice index, reference coordinates and the
    Jacobian value there.
    """

    def __init__(self, value: float, index: tuple[int, int, int], coords: tuple[float, float, float]):
        self.value = value
        self.index = index
        self.coords = coords
        super().__init__(
            f"flow map degenerate: det = {value:.6e} at lattice index {index}, "
            f"y = ({coords[0]:.4f}, {coords[1]:.4f}, {coords[2]:.4f})"
        )


@dataclass
class GeometryCache:
    """Geometry of one flow map and of its tangentially smoothed copy."""

    grid: Grid
    kappa: float
    eta: np.ndarray      # (3, n1, n2, n3+1)
    J: np.ndarray        # (n1, n2, n3+1)
    a: np.ndarray        # (3, 3, n1, n2, n3+1), a[mu, alpha]
    A: np.ndarray        # cofactor J * a
    eta_s: np.ndarray    # smoothed map (squared mollifier on the displacement)
    J_s: np.ndarray
    a_s: np.ndarray


def deformation_gradient(grid: Grid, eta: np.ndarray) -> np.ndarray:
    """d(eta_alpha)/d(y_mu) as a (3, 3, n1, n2, n3+1) array."""
    disp = grid.displacement(eta)
    out = np.empty((3, 3) + grid.spec.shape)
    for alpha in range(3):
        for mu in range(3):
            d = grid.derivative(disp[alpha], mu + 1)
            if alpha == mu:
                d = d + 1.0
            out[alpha, mu] = d
    return out


def _invert_pointwise(deta: np.ndarray, det_floor: float, grid: Grid):
    mats = np.moveaxis(deta, (0, 1), (-2, -1))  # (..., alpha, mu)
    J = np.linalg.det(mats)
    jmin = float(J.min())
    if jmin <= det_floor:
        index = np.unravel_index(int(np.argmin(J)), J.shape)
        coords = (
            float(grid.y1[index[0]]),
            float(grid.y2[index[1]]),
            float(grid.y3[index[2]]),
        )
        raise DegenerateMapError(jmin, tuple(int(i) for i in index), coords)
    inv = np.linalg.inv(mats)  # inv[..., mu, alpha]
    a = np.moveaxis(inv, (-2, -1), (0, 1))
    return J, a


def build_geometry(
    grid: Grid,
    eta: np.ndarray,
    kappa: float,
    det_floor: float = 1e-6,
) -> GeometryCache:
    """Assemble the geometry cache for a flow map and its smoothed copy.

    The smoothed map applies the squared tangential mollifier to the
    displacement.  Raises :class:`DegenerateMapError` if either Jacobian
    drops to the floor.
    """
    deta = deformation_gradient(grid, eta)
    J, a = _invert_pointwise(deta, det_floor, grid)
    A = J[None, None] * a

    disp = grid.displacement(eta)
    eta_s = grid.identity_map + mollify(grid, disp, kappa, power=2)
    deta_s = deformation_gradient(grid, eta_s)
    J_s, a_s = _invert_pointwise(deta_s, det_floor, grid)

    return GeometryCache(
        grid=grid, kappa=kappa, eta=eta, J=J, a=a, A=A,
        eta_s=eta_s, J_s=J_s, a_s=a_s,
    )


# ----------------------------------------------------------------------
# covariant operators (pass a = cache.a or cache.a_s explicitly)


def cov_grad(grid: Grid, a: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Covariant gradient a^{mu alpha} d_mu f of a scalar field."""
    df = np.stack([grid.derivative(f, mu + 1) for mu in range(3)])
    out = np.einsum("ma...,m...->a...", a, df)
    return grid.dealias(out)


def cov_grad_vector(grid: Grid, a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Covariant gradient of a vector field; out[alpha, lam] = grad^alpha X_lam."""
    dX = np.stack([np.stack([grid.derivative(X[lam], mu + 1) for mu in range(3)])
                   for lam in range(3)])  # (lam, mu, ...)
    out = np.einsum("ma...,lm...->al...", a, dX)
    return grid.dealias(out)


def cov_div(grid: Grid, a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Covariant divergence a^{mu alpha} d_mu X_alpha."""
    dX = np.stack([np.stack([grid.derivative(X[alpha], mu + 1) for mu in range(3)])
                   for alpha in range(3)])  # (alpha, mu, ...)
    out = np.einsum("ma...,am...->...", a, dX)
    return grid.dealias(out)


def cov_curl(grid: Grid, a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Covariant curl, the antisymmetric part of the covariant gradient."""
    G = cov_grad_vector(grid, a, X)  # G[mu, alpha] = grad^mu X_alpha
    out = np.empty_like(X)
    out[0] = G[1, 2] - G[2, 1]
    out[1] = G[2, 0] - G[0, 2]
    out[2] = G[0, 1] - G[1, 0]
    return out


def cov_laplacian(grid: Grid, a: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Nested covariant Laplacian div_a(grad_a f), scalar or component-wise."""
    if f.ndim == 3:
        return cov_div(grid, a, cov_grad(grid, a, f))
    return np.stack([cov_div(grid, a, cov_grad(grid, a, comp)) for comp in f])


def covariant(grid: Grid, a: np.ndarray, f: np.ndarray, kind: str) -> np.ndarray:
    """Dispatch helper over the four covariant operators."""
    if kind == "grad":
        return cov_grad(grid, a, f) if f.ndim == 3 else cov_grad_vector(grid, a, f)
    if kind == "div":
        return cov_div(grid, a, f)
    if kind == "curl":
        return cov_curl(grid, a, f)
    if kind == "laplacian":
        return cov_laplacian(grid, a, f)
    raise ValueError(f"unknown covariant operator kind {kind!r}")


def piola_field(grid: Grid, A: np.ndarray) -> np.ndarray:
    """Row divergences d_mu A^{mu alpha} of a cofactor matrix."""
    return np.stack([
        sum(grid.derivative(A[mu, alpha], mu + 1) for mu in range(3))
        for alpha in range(3)
    ])


def piola_residual(cache: GeometryCache, smoothed: bool = False) -> float:
    """Max over alpha of the L2 norm of the cofactor row divergences."""
    A = cache.J_s[None, None] * cache.a_s if smoothed else cache.A
    res = piola_field(cache.grid, A)
    return max(cache.grid.low_norm(res[alpha]) for alpha in range(3))
