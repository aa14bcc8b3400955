"""One linearized evolution step with frozen coefficients.

The advance integrates, over a shared time lattice, the system

    d_t eta = v + psi*
    rho0 / Js* d_t v = (b* . grad_a*) b - grad_a* Q,   Q = q + |b|^2 / 2
    r* d_t q = -div_a* v,                              r* = Js* R'(q*) / rho0
    d_t b - lap_a* b = (b* . grad_a*) v - b* div_a* v
    q = 0 and b = 0 on both walls,

where starred quantities come from a previous iterate, are stored at the
integrator nodes, and are linearly interpolated in time.  (eta, v, q) use
an explicit midpoint rule with b lagged at the step start; b then takes a
backward-Euler diffusion step whose transport source is evaluated at the
new velocity.  Wall conditions are imposed strongly after every stage,
and the Dirichlet rows of the implicit solve are eliminated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse.linalg import LinearOperator, bicgstab

from .correction import correction_field
from .geometry import build_geometry, cov_div, cov_grad, cov_grad_vector, cov_laplacian
from .grid import Grid
from .state import EquationOfState, FlowState


class CflError(RuntimeError):
    """Time step exceeds the acoustic stability bound."""

    def __init__(self, dt: float, bound: float, cfl_safety: float, h3: float):
        self.dt = dt
        self.bound = bound
        super().__init__(
            f"dt = {dt:.6e} violates the acoustic CFL bound "
            f"dt <= cfl_safety * h3 * min sqrt(r Js / rho0) = "
            f"{cfl_safety} * {h3:.6e} * {bound / (cfl_safety * h3):.6e} = {bound:.6e}"
        )


class DiffusionSolveError(RuntimeError):
    """Implicit diffusion solve failed to reach the residual target."""

    def __init__(self, iterations: int, residual: float, tol: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"implicit diffusion solve stalled after {iterations} iterations "
            f"at relative residual {residual:.3e} (target {tol:.1e})"
        )


@dataclass
class Trajectory:
    """States on a uniform time lattice, plus the run parameters."""

    grid: Grid
    eos: EquationOfState
    kappa: float
    dt: float
    states: list[FlowState]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def stack(self, name: str) -> np.ndarray:
        """Stack one field over time, shape (nodes, ...)."""
        return np.stack([getattr(s, name) for s in self.states])

    @property
    def final(self) -> FlowState:
        return self.states[-1]


def trivial_trajectory(
    grid: Grid, eos: EquationOfState, rho0: np.ndarray,
    kappa: float, dt: float, nsteps: int,
) -> Trajectory:
    """Identity map, zero velocity/field/head at every node."""
    shape = grid.spec.shape
    states = [
        FlowState(
            grid=grid, eos=eos, t=j * dt,
            eta=grid.identity_map.copy(),
            v=np.zeros((3,) + shape), b=np.zeros((3,) + shape),
            q=np.zeros(shape), rho0=rho0,
        )
        for j in range(nsteps + 1)
    ]
    return Trajectory(grid=grid, eos=eos, kappa=kappa, dt=dt, states=states)


@dataclass
class FrozenSample:
    """Ring coefficients interpolated to one time."""

    psi: np.ndarray
    a_s: np.ndarray
    J_s: np.ndarray
    b: np.ndarray
    r: np.ndarray


@dataclass
class FrozenCoefficients:
    """Ring quantities of a previous iterate at the integrator nodes.

    Stores, per node: the smoothed-geometry inverse and Jacobian, the
    correction field psi, the frozen magnetic field and head, and the
    acoustic weight r = Js R'(q) / rho0.  ``at`` interpolates linearly.
    """

    grid: Grid
    eos: EquationOfState
    kappa: float
    times: np.ndarray
    eta: np.ndarray    # (nodes, 3, ...)
    psi: np.ndarray
    a_s: np.ndarray    # (nodes, 3, 3, ...)
    J_s: np.ndarray
    b: np.ndarray
    q: np.ndarray
    r: np.ndarray
    rho0: np.ndarray = field(repr=False, default=None)

    @classmethod
    def freeze(cls, traj: Trajectory, det_floor: float = 1e-6) -> "FrozenCoefficients":
        grid, eos, kappa = traj.grid, traj.eos, traj.kappa
        rho0 = traj.states[0].rho0
        n = len(traj)
        shape = grid.spec.shape
        eta = np.empty((n, 3) + shape)
        psi = np.empty((n, 3) + shape)
        a_s = np.empty((n, 3, 3) + shape)
        J_s = np.empty((n,) + shape)
        b = np.empty((n, 3) + shape)
        q = np.empty((n,) + shape)
        r = np.empty((n,) + shape)
        for j, s in enumerate(traj.states):
            cache = build_geometry(grid, s.eta, kappa, det_floor=det_floor)
            eta[j] = s.eta
            psi[j] = correction_field(grid, s.eta, s.v, cache, kappa)
            a_s[j] = cache.a_s
            J_s[j] = cache.J_s
            b[j] = s.b
            q[j] = s.q
            r[j] = cache.J_s * eos.rho_p(s.q) / rho0
        if r.min() <= 0.0:
            raise ValueError(
                f"frozen acoustic weight r must be positive, min = {r.min():.3e}"
            )
        return cls(
            grid=grid, eos=eos, kappa=kappa, times=traj.times,
            eta=eta, psi=psi, a_s=a_s, J_s=J_s, b=b, q=q, r=r, rho0=rho0,
        )

    def at(self, t: float) -> FrozenSample:
        times = self.times
        t0, t1 = times[0], times[-1]
        if t < t0 - 1e-12 or t > t1 + 1e-12:
            raise ValueError(
                f"frozen coefficients cover [{t0}, {t1}], requested t = {t}"
            )
        t = min(max(t, t0), t1)
        j = int(np.searchsorted(times, t, side="right")) - 1
        j = min(max(j, 0), len(times) - 2)
        w = (t - times[j]) / (times[j + 1] - times[j])
        def lerp(arr):
            if w == 0.0:
                return arr[j]
            if w == 1.0:
                return arr[j + 1]
            return (1.0 - w) * arr[j] + w * arr[j + 1]
        return FrozenSample(
            psi=lerp(self.psi), a_s=lerp(self.a_s), J_s=lerp(self.J_s),
            b=lerp(self.b), r=lerp(self.r),
        )

    def cfl_bound(self, cfl_safety: float) -> float:
        speed = np.sqrt(self.r * self.J_s / self.rho0[None])
        return float(cfl_safety * self.grid.h3 * speed.min())


# ----------------------------------------------------------------------
# implicit diffusion solve


def _d3_matrix(nz: int, h: float) -> np.ndarray:
    D = np.zeros((nz, nz))
    for i in range(1, nz - 1):
        D[i, i - 1] = -0.5 / h
        D[i, i + 1] = 0.5 / h
    D[0, 0], D[0, 1], D[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
    D[-1, -1], D[-1, -2], D[-1, -3] = 1.5 / h, -2.0 / h, 0.5 / h
    return D


@lru_cache(maxsize=8)
def _flat_modal_factors(nz: int, h: float, dt: float):
    """Eigen-factorization of the composed normal operator, interior rows."""
    D33 = (_d3_matrix(nz, h) @ _d3_matrix(nz, h))[1:-1, 1:-1]
    w, V = np.linalg.eig(D33)
    return w, V, np.linalg.inv(V)


def _flat_preconditioner(grid: Grid, dt: float):
    nz = grid.spec.n3 + 1
    w, V, Vinv = _flat_modal_factors(nz, grid.h3, dt)
    ksq = grid.k1[:, None] ** 2 + grid.k2[None, :] ** 2
    denom = 1.0 + dt * ksq[:, :, None] - dt * w[None, None, :]

    def apply(res_int: np.ndarray) -> np.ndarray:
        rh = np.fft.fft2(res_int, axes=(0, 1))
        wh = np.einsum("ab,ijb->ija", Vinv, rh)
        wh /= denom
        xh = np.einsum("ab,ijb->ija", V, wh)
        return np.fft.ifft2(xh, axes=(0, 1)).real

    return apply


def implicit_diffusion_solve(
    grid: Grid,
    a_s: np.ndarray,
    rhs: np.ndarray,
    dt: float,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> np.ndarray:
    """Solve (I - dt lap_a) x = rhs with x = 0 on both walls.

    Component-wise for vector right-hand sides.  The Krylov iteration is
    preconditioned by the exact flat-geometry modal solve, so it converges
    in a handful of steps whenever the smoothed geometry is close to the
    identity.  Non-convergence raises :class:`DiffusionSolveError`.
    """
    if rhs.ndim == 4:
        return np.stack([
            implicit_diffusion_solve(grid, a_s, comp, dt, tol, max_iter)
            for comp in rhs
        ])

    n1, n2, nz = grid.spec.shape
    nint = nz - 2
    size = n1 * n2 * nint

    def embed(x_int: np.ndarray) -> np.ndarray:
        full = np.zeros((n1, n2, nz))
        full[..., 1:-1] = x_int
        return full

    def matvec(x_flat: np.ndarray) -> np.ndarray:
        full = embed(x_flat.reshape(n1, n2, nint))
        out = full - dt * cov_laplacian(grid, a_s, full)
        return out[..., 1:-1].ravel()

    precond = _flat_preconditioner(grid, dt)

    def psolve(r_flat: np.ndarray) -> np.ndarray:
        return precond(r_flat.reshape(n1, n2, nint)).ravel()

    b_flat = rhs[..., 1:-1].ravel()
    bnorm = np.linalg.norm(b_flat)
    if bnorm == 0.0:
        return np.zeros((n1, n2, nz))

    A = LinearOperator((size, size), matvec=matvec)
    M = LinearOperator((size, size), matvec=psolve)
    iters = 0

    def count(_):
        nonlocal iters
        iters += 1

    x_flat, info = bicgstab(A, b_flat, rtol=tol, atol=0.0, maxiter=max_iter,
                            M=M, callback=count)
    residual = np.linalg.norm(matvec(x_flat) - b_flat) / bnorm
    if info != 0 or residual > 10.0 * tol:
        raise DiffusionSolveError(iterations=iters, residual=residual, tol=tol)
    return embed(x_flat.reshape(n1, n2, nint))


# ----------------------------------------------------------------------
# the advance


def _enforce_walls(q: np.ndarray, b: np.ndarray | None = None) -> None:
    q[..., 0] = 0.0
    q[..., -1] = 0.0
    if b is not None:
        b[..., 0] = 0.0
        b[..., -1] = 0.0


def _explicit_rates(grid, smp: FrozenSample, v, q, b_lag, half_b2, rho0):
    Q = q + half_b2
    lorentz = np.einsum(
        "a...,al...->l...", smp.b, cov_grad_vector(grid, smp.a_s, b_lag)
    )
    dv = (smp.J_s / rho0)[None] * (lorentz - cov_grad(grid, smp.a_s, Q))
    dq = -cov_div(grid, smp.a_s, v) / smp.r
    deta = v + smp.psi
    return deta, dv, dq


def advance_linearized(
    grid: Grid,
    frozen: FrozenCoefficients,
    init: FlowState,
    dt: float,
    T: float,
    cfl_safety: float = 0.4,
    diffusion_tol: float = 1e-9,
    diffusion_max_iter: int = 500,
) -> Trajectory:
    """Integrate the frozen-coefficient system from ``init`` over [0, T].

    Requires T to be an integer multiple of dt and dt to satisfy the
    acoustic CFL bound evaluated over all frozen samples; violations
    raise ValueError and :class:`CflError` respectively.
    """
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T = {T} is not a positive integer multiple of dt = {dt}")
    bound = frozen.cfl_bound(cfl_safety)
    if dt > bound:
        raise CflError(dt, bound, cfl_safety, grid.h3)
    if frozen.times[-1] < T - 1e-12:
        raise ValueError(
            f"frozen coefficients cover [0, {frozen.times[-1]}], need [0, {T}]"
        )

    rho0 = init.rho0
    state = init.copy()
    states = [state]
    for n in range(nsteps):
        t = n * dt
        b_lag = state.b
        half_b2 = 0.5 * np.sum(b_lag * b_lag, axis=0)

        s0 = frozen.at(t)
        k1 = _explicit_rates(grid, s0, state.v, state.q, b_lag, half_b2, rho0)
        eta_m = state.eta + 0.5 * dt * k1[0]
        v_m = state.v + 0.5 * dt * k1[1]
        q_m = state.q + 0.5 * dt * k1[2]
        _enforce_walls(q_m)

        sm = frozen.at(t + 0.5 * dt)
        k2 = _explicit_rates(grid, sm, v_m, q_m, b_lag, half_b2, rho0)
        eta_n = state.eta + dt * k2[0]
        v_n = state.v + dt * k2[1]
        q_n = state.q + dt * k2[2]
        _enforce_walls(q_n)

        s1 = frozen.at(t + dt)
        div_v = cov_div(grid, s1.a_s, v_n)
        transport = np.einsum(
            "a...,al...->l...", s1.b, cov_grad_vector(grid, s1.a_s, v_n)
        ) - s1.b * div_v
        rhs_b = b_lag + dt * transport
        b_n = implicit_diffusion_solve(
            grid, s1.a_s, rhs_b, dt, tol=diffusion_tol, max_iter=diffusion_max_iter
        )
        _enforce_walls(q_n, b_n)

        state = FlowState(
            grid=grid, eos=init.eos, t=t + dt,
            eta=eta_n, v=v_n, b=b_n, q=q_n, rho0=rho0,
        )
        states.append(state)

    return Trajectory(grid=grid, eos=init.eos, kappa=frozen.kappa, dt=dt, states=states)
