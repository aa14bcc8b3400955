"""Energy functionals, residual audits and the empirical lemma battery.

Everything here is read-only over trajectories: each function rebuilds
whatever geometry it needs from the stored flow maps at the trajectory's
own smoothing scale, so the diagnostics cannot drift out of sync with
the solver state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correction import correction_field, harmonic_extension
from .fields import perturbed_map, random_vector, wall_vanishing_scalar
from .geometry import (
    GeometryCache,
    build_geometry,
    cov_div,
    cov_grad,
    cov_grad_vector,
    cov_laplacian,
)
from .grid import Grid
from .linear_step import Trajectory
from .smoothing import mollify


# ----------------------------------------------------------------------
# time differences on snapshot stacks


def time_derivative(stack: np.ndarray, dt: float, order: int) -> np.ndarray:
    """Discrete d/dt of a (nodes, ...) stack, second order where possible.

    Centered differences inside, one-sided at the ends; with exactly
    order + 1 nodes the end rows fall back to the interior stencil.
    """
    if order == 0:
        return stack
    n = stack.shape[0]
    if n < order + 1:
        raise ValueError(
            f"insufficient history: order-{order} time derivative needs at least "
            f"{order + 1} snapshots, got {n}"
        )
    out = np.empty_like(stack)
    if order == 1:
        if n == 2:
            d = (stack[1] - stack[0]) / dt
            out[0] = d
            out[1] = d
            return out
        out[1:-1] = (stack[2:] - stack[:-2]) / (2.0 * dt)
        out[0] = (-3.0 * stack[0] + 4.0 * stack[1] - stack[2]) / (2.0 * dt)
        out[-1] = (3.0 * stack[-1] - 4.0 * stack[-2] + stack[-3]) / (2.0 * dt)
        return out
    if order == 2:
        out[1:-1] = (stack[2:] - 2.0 * stack[1:-1] + stack[:-2]) / (dt * dt)
        if n >= 4:
            out[0] = (2.0 * stack[0] - 5.0 * stack[1] + 4.0 * stack[2] - stack[3]) / (dt * dt)
            out[-1] = (2.0 * stack[-1] - 5.0 * stack[-2] + 4.0 * stack[-3] - stack[-4]) / (dt * dt)
        else:
            out[0] = out[1]
            out[-1] = out[1]
        return out
    raise ValueError(f"time derivative order must be 0, 1 or 2, got {order}")


# ----------------------------------------------------------------------
# norms of flow maps (identity handled through the displacement)


def map_norm(grid: Grid, eta: np.ndarray, s: int) -> float:
    """Interior Sobolev norm of a flow map.

    The order-0 term uses the raw positions; all derivatives act on the
    periodic displacement with the identity's constant gradient added
    back, so the non-periodic reference coordinates never reach the FFT.
    """
    disp = grid.displacement(eta)
    total = 0.0
    for p1, p2, p3 in Grid._multi_indices(s):
        if p1 == p2 == p3 == 0:
            total += grid.integrate(np.sum(eta * eta, axis=0))
            continue
        d = np.stack([grid.derivative_multi(disp[alpha], p1, p2, p3) for alpha in range(3)])
        if p1 + p2 + p3 == 1:
            mu = (p1, p2, p3).index(1)
            d[mu] = d[mu] + 1.0
        total += grid.integrate(np.sum(d * d, axis=0))
    return float(np.sqrt(total))


# ----------------------------------------------------------------------
# difference energy between trajectories


def _check_comparable(t1: Trajectory, t2: Trajectory) -> None:
    if t1.grid.spec != t2.grid.spec:
        raise ValueError("trajectories live on different grids")
    if len(t1) != len(t2) or abs(t1.dt - t2.dt) > 1e-14:
        raise ValueError(
            f"trajectories have different time lattices: "
            f"{len(t1)} nodes at dt = {t1.dt} vs {len(t2)} at dt = {t2.dt}"
        )


def difference_energy(t1: Trajectory, t2: Trajectory, order: int = 2) -> np.ndarray:
    """Order-limited difference energy per time node.

    At each node this sums, over k = 0..order, the squared H^k norms of
    the (order - k)-th time differences of [v], [b], [q], plus the
    squared H^order norm of the map difference [eta].
    """
    _check_comparable(t1, t2)
    grid, dt = t1.grid, t1.dt
    n = len(t1)
    total = np.zeros(n)
    for name in ("v", "b", "q"):
        diff = t1.stack(name) - t2.stack(name)
        for k in range(order + 1):
            dts = time_derivative(diff, dt, order - k)
            for j in range(n):
                total[j] += grid.norm(dts[j], k) ** 2
    deta = t1.stack("eta") - t2.stack("eta")
    for j in range(n):
        total[j] += grid.norm(deta[j], order) ** 2
    return total


# ----------------------------------------------------------------------
# energy functionals


ENERGY_COLUMNS = (
    "t", "E_total", "E_eta4", "E_boundary", "E_v", "E_b", "E_q",
    "H_run", "H_b", "W_q", "E_phys", "D_diss", "balance_residual",
    "taylor_margin", "small_geometry", "div_b",
)


@dataclass
class EnergyReport:
    """Tabulated energy functionals along a trajectory."""

    kappa: float
    dt: float
    truncation_order: int
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def rows(self):
        n = len(self.columns["t"])
        for j in range(n):
            yield {name: float(self.columns[name][j]) for name in ENERGY_COLUMNS}


def physical_energy_balance(traj: Trajectory, caches: list[GeometryCache] | None = None):
    """Physical energy, viscous-resistive dissipation, and the step residuals.

    Returns (E, D, residual) arrays over the nodes, with residual[j] the
    defect of E(t_j) - E(t_{j-1}) + trapezoid of D over the step; an
    exact balance makes it zero.
    """
    grid, eos = traj.grid, traj.eos
    n = len(traj)
    if caches is None:
        caches = [build_geometry(grid, s.eta, traj.kappa) for s in traj.states]
    E = np.empty(n)
    D = np.empty(n)
    for j, s in enumerate(traj.states):
        cache = caches[j]
        kinetic = 0.5 * grid.integrate(s.rho0 * np.sum(s.v * s.v, axis=0))
        magnetic = 0.5 * grid.integrate(cache.J_s * np.sum(s.b * s.b, axis=0))
        internal = grid.integrate(s.rho0 * np.asarray(eos.q_potential(eos.rho(s.q))))
        E[j] = kinetic + magnetic + internal
        Gb = cov_grad_vector(grid, cache.a_s, s.b)
        D[j] = eos.diffusivity * grid.integrate(cache.J_s * np.sum(Gb * Gb, axis=(0, 1)))
    residual = np.zeros(n)
    residual[1:] = np.diff(E) + 0.5 * traj.dt * (D[1:] + D[:-1])
    return E, D, residual


def small_geometry_norm(grid: Grid, cache: GeometryCache) -> float:
    """||Js - 1||_3 + ||Id - a~||_3, the closeness-to-identity gauge."""
    total_j = grid.norm(cache.J_s - 1.0, 3)
    delta = np.eye(3)[:, :, None, None, None] - cache.a_s
    total_a = np.sqrt(sum(
        grid.norm(delta[mu, alpha], 3) ** 2 for mu in range(3) for alpha in range(3)
    ))
    return float(total_j + total_a)


def energy_functionals(traj: Trajectory, order: int = 2) -> EnergyReport:
    """Tabulate the truncated energy scale along a trajectory.

    ``order`` is the highest time-derivative order entering the interior
    sums (the full scale would run to order 4; the desk-scale default
    stops at 2 and the report header says so).
    """
    from .state import taylor_sign_margin  # local import to avoid a cycle

    grid, dt, kappa = traj.grid, traj.dt, traj.kappa
    n = len(traj)
    caches = [build_geometry(grid, s.eta, kappa) for s in traj.states]

    cols: dict[str, np.ndarray] = {name: np.zeros(n) for name in ENERGY_COLUMNS}
    cols["t"] = traj.times

    stacks = {name: traj.stack(name) for name in ("v", "b", "q")}
    dstacks = {
        (name, k): time_derivative(stacks[name], dt, order - k)
        for name in stacks for k in range(order + 1)
    }

    for j, s in enumerate(traj.states):
        cache = caches[j]
        cols["E_eta4"][j] = map_norm(grid, s.eta, 4) ** 2

        # boundary term: fourth tangential derivatives of the once-mollified
        # displacement, contracted with the third row of the smoothed inverse
        disp_w = grid.boundary_slices(mollify(grid, grid.displacement(s.eta), kappa))
        aw = grid.boundary_slices(cache.a_s)
        bdy = 0.0
        lap_w = grid.tangential_laplacian(disp_w)
        for i in range(2):
            for k in range(2):
                dij = grid.derivative(grid.derivative(lap_w, i + 1), k + 1)
                T = np.einsum("a...,a...->...", aw[2], dij)
                bdy += grid.norm(T, 0, where="boundary") ** 2
        cols["E_boundary"][j] = bdy

        for name, col in (("v", "E_v"), ("b", "E_b"), ("q", "E_q")):
            cols[col][j] = sum(
                grid.norm(dstacks[(name, k)][j], k) ** 2 for k in range(order + 1)
            )

        cols["taylor_margin"][j] = taylor_sign_margin(s, cache)
        cols["small_geometry"][j] = small_geometry_norm(grid, cache)
        cols["div_b"][j] = grid.low_norm(cov_div(grid, cache.a_s, s.b))

    cols["E_total"] = (
        cols["E_eta4"] + cols["E_boundary"] + cols["E_v"] + cols["E_b"] + cols["E_q"]
    )

    # running and pointwise parts of the heat/wave companions
    hb_run = np.array([grid.norm(dstacks[("b", 0)][j], 0) ** 2 for j in range(n)])
    cols["H_run"] = np.concatenate(
        [[0.0], np.cumsum(0.5 * dt * (hb_run[1:] + hb_run[:-1]))]
    )
    cols["H_b"] = np.array([grid.norm(dstacks[("b", 1)][j], 1) ** 2 for j in range(n)])
    cols["W_q"] = np.array([
        grid.norm(dstacks[("q", 0)][j], 0) ** 2 + grid.norm(dstacks[("q", 1)][j], 1) ** 2
        for j in range(n)
    ])

    E, D, residual = physical_energy_balance(traj, caches)
    cols["E_phys"] = E
    cols["D_diss"] = D
    cols["balance_residual"] = residual

    return EnergyReport(kappa=kappa, dt=dt, truncation_order=order, columns=cols)


# ----------------------------------------------------------------------
# constraint monitors


def constraint_residuals(
    traj: Trajectory,
    c0: float | None = None,
    epsilon: float = 0.1,
) -> list[dict]:
    """Per-node constraint table: div b, Taylor margin, geometry gauge.

    Flags mark a Taylor margin below c0 / 2 and a geometry gauge above
    epsilon; both thresholds follow the run configuration.
    """
    from .state import taylor_sign_margin

    grid = traj.grid
    rows = []
    for s in traj.states:
        cache = build_geometry(grid, s.eta, traj.kappa)
        margin = taylor_sign_margin(s, cache)
        small = small_geometry_norm(grid, cache)
        div_b = grid.low_norm(cov_div(grid, cache.a_s, s.b))
        rows.append({
            "t": s.t,
            "div_b": div_b,
            "taylor_margin": margin,
            "small_geometry": small,
            "taylor_ok": bool(c0 is None or margin >= 0.5 * c0),
            "small_ok": bool(small <= epsilon),
        })
    return rows


def divergence_monitor(
    traj: Trajectory,
    drift_constant: float,
    allowance: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Flag nodes whose div_a b exceeds the calibrated drift envelope.

    The envelope is allowance + drift_constant * t * (dt + h3^2); data
    that starts divergence-free stays under it, while corrupted data
    trips the flag immediately.
    """
    grid = traj.grid
    h3 = grid.h3
    div = np.array([
        grid.low_norm(cov_div(grid, build_geometry(grid, s.eta, traj.kappa).a_s, s.b))
        for s in traj.states
    ])
    envelope = allowance + drift_constant * traj.times * (traj.dt + h3 * h3)
    return div, div > envelope


def nonlinear_residuals(traj: Trajectory) -> dict[str, np.ndarray]:
    """Residuals of the smoothed nonlinear system along its own trajectory.

    Each equation is re-evaluated with the trajectory's own geometry and
    correction field, with time derivatives from the snapshot stack; on a
    converged fixed point all four arrays sit at scheme accuracy.
    """
    grid, eos, kappa, dt = traj.grid, traj.eos, traj.kappa, traj.dt
    rho0 = traj.states[0].rho0
    n = len(traj)
    caches = [build_geometry(grid, s.eta, kappa) for s in traj.states]

    stacks = {name: traj.stack(name) for name in ("eta", "v", "b", "q")}
    dts = {name: time_derivative(stacks[name], dt, 1) for name in stacks}

    out = {name: np.empty(n) for name in ("eta", "v", "q", "b")}
    for j, s in enumerate(traj.states):
        cache = caches[j]
        a = cache.a_s
        psi = correction_field(grid, s.eta, s.v, cache, kappa)
        out["eta"][j] = grid.low_norm(dts["eta"][j] - s.v - psi)

        Gb = cov_grad_vector(grid, a, s.b)
        lorentz = np.einsum("a...,al...->l...", s.b, Gb)
        r_v = (rho0 / cache.J_s)[None] * dts["v"][j] - lorentz + cov_grad(grid, a, s.Q)
        out["v"][j] = grid.low_norm(r_v)

        r_coeff = cache.J_s * np.asarray(eos.rho_p(s.q)) / rho0
        out["q"][j] = grid.low_norm(r_coeff * dts["q"][j] + cov_div(grid, a, s.v))

        div_v = cov_div(grid, a, s.v)
        Gv = cov_grad_vector(grid, a, s.v)
        transport = np.einsum("a...,al...->l...", s.b, Gv) - s.b * div_v
        r_b = dts["b"][j] - cov_laplacian(grid, a, s.b) - transport
        out["b"][j] = grid.low_norm(r_b)
    return out


# ----------------------------------------------------------------------
# the good-unknown decomposition audit


def _d4(grid: Grid, f: np.ndarray) -> np.ndarray:
    # the fixed fourth tangential derivative d1 d2 lap_t
    return grid.derivative_multi(grid.tangential_laplacian(f), 1, 1, 0)


def _d3(grid: Grid, f: np.ndarray) -> np.ndarray:
    # d4 with the first tangential derivative peeled off
    return grid.derivative_multi(grid.tangential_laplacian(f), 0, 1, 0)


def alinhac_residual(cache: GeometryCache, f: np.ndarray) -> float:
    """Relative defect of the good-unknown decomposition for a scalar f.

    Pushes the fixed fourth tangential derivative through the covariant
    gradient of the smoothed geometry, subtracts the covariant gradient
    of the good unknown and the three-term remainder, and returns the
    ratio of the L2 norms of the defect and of the left-hand side.
    """
    grid = cache.grid
    ae = cache.a_s
    disp_s = grid.displacement(cache.eta_s)

    G = cov_grad(grid, ae, f)
    lhs = np.stack([_d4(grid, G[alpha]) for alpha in range(3)])

    d4eta = np.stack([_d4(grid, disp_s[gamma]) for gamma in range(3)])
    F = _d4(grid, f) - np.einsum("g...,g...->...", d4eta, G)
    grad_F = cov_grad(grid, ae, F)

    gradG = np.stack([cov_grad(grid, ae, G[gamma]) for gamma in range(3)])  # (gamma, alpha, ...)
    term1 = np.einsum("g...,ga...->a...", d4eta, gradG)

    # W[gamma, beta] = d1 d_beta of the smoothed displacement
    powers = ((2, 0, 0), (1, 1, 0), (1, 0, 1))
    W = np.stack([
        np.stack([grid.derivative_multi(disp_s[gamma], *powers[beta]) for beta in range(3)])
        for gamma in range(3)
    ])
    df = np.stack([grid.derivative(f, mu + 1) for mu in range(3)])
    term2 = np.zeros_like(G)
    for alpha in range(3):
        for mu in range(3):
            c = np.einsum("g...,b...,gb...->...", ae[mu], ae[:, alpha], W)
            cw = sum(
                ae[mu, g] * ae[b, alpha] * _d3(grid, W[g, b])
                for g in range(3) for b in range(3)
            )
            term2[alpha] += (_d3(grid, c) - cw) * df[mu]

    term3 = np.zeros_like(G)
    for alpha in range(3):
        for mu in range(3):
            term3[alpha] += (
                _d4(grid, ae[mu, alpha] * df[mu])
                - _d4(grid, ae[mu, alpha]) * df[mu]
                - ae[mu, alpha] * _d4(grid, df[mu])
            )

    C = term1 - term2 + term3
    defect = lhs - grad_F - C
    num = np.sqrt(sum(grid.low_norm(defect[alpha]) ** 2 for alpha in range(3)))
    den = np.sqrt(sum(grid.low_norm(lhs[alpha]) ** 2 for alpha in range(3)))
    return float(num / den) if den > 0 else float(num)


# ----------------------------------------------------------------------
# second-order wave audit for the pressure head


def wave_equation_residual(traj: Trajectory) -> np.ndarray:
    """Defect of the second-order pressure-head equation along a run.

    The equation is the exact time derivative of the continuity relation
    with the momentum equation substituted, so on a converged trajectory
    the defect is pure scheme error (time stencils, wall stencils,
    dealiasing).  Returns the L2 defect per node.
    """
    grid, eos, dt, kappa = traj.grid, traj.eos, traj.dt, traj.kappa
    rho0 = traj.states[0].rho0
    n = len(traj)
    caches = [build_geometry(grid, s.eta, kappa) for s in traj.states]

    q_st = traj.stack("q")
    v_st = traj.stack("v")
    a_st = np.stack([c.a_s for c in caches])
    J_st = np.stack([c.J_s for c in caches])
    r_st = J_st * np.asarray(eos.rho_p(q_st)) / rho0[None]

    dq = time_derivative(q_st, dt, 1)
    d2q = time_derivative(q_st, dt, 2)
    dr = time_derivative(r_st, dt, 1)
    da = time_derivative(a_st, dt, 1)

    res = np.empty(n)
    for j, s in enumerate(traj.states):
        a = a_st[j]
        Jr = J_st[j] / rho0
        b = s.b
        lhs = r_st[j] * d2q[j] - Jr * cov_laplacian(grid, a, q_st[j])

        lap_b = cov_laplacian(grid, a, b)
        Gb = cov_grad_vector(grid, a, b)
        div_b = cov_div(grid, a, b)
        rhs = Jr * np.einsum("l...,l...->...", b, lap_b)
        w0 = Jr * (
            np.sum(Gb * Gb, axis=(0, 1))
            - np.einsum("al...,la...->...", Gb, Gb)
            - np.einsum("a...,a...->...", b, cov_grad(grid, a, div_b))
        )
        w0 -= dr[j] * dq[j]
        w0 -= sum(
            da[j][mu, alpha] * grid.derivative(v_st[j][alpha], mu + 1)
            for mu in range(3) for alpha in range(3)
        )
        lorentz = np.einsum("a...,al...->l...", b, Gb)
        grad_Q = cov_grad(grid, a, s.Q)
        grad_Jr = cov_grad(grid, a, Jr)
        w0 -= np.einsum("l...,l...->...", lorentz - grad_Q, grad_Jr)

        res[j] = grid.low_norm(lhs - rhs - w0)
    return res


# ----------------------------------------------------------------------
# lemma battery


@dataclass
class LemmaReport:
    """Empirical constants for the div-curl, elliptic and trace estimates."""

    rows: list[dict] = field(default_factory=list)

    def values(self, check: str) -> list[float]:
        return [r["value"] for r in self.rows if r["check"] == check]


def _flat_div(grid: Grid, X: np.ndarray) -> np.ndarray:
    return sum(grid.derivative(X[i], i + 1) for i in range(3))


def _flat_curl(grid: Grid, X: np.ndarray) -> np.ndarray:
    out = np.empty_like(X)
    out[0] = grid.derivative(X[2], 2) - grid.derivative(X[1], 3)
    out[1] = grid.derivative(X[0], 3) - grid.derivative(X[2], 1)
    out[2] = grid.derivative(X[1], 1) - grid.derivative(X[0], 2)
    return out


def lemma_suite(
    grid: Grid,
    seed: int = 0,
    n_samples: int = 4,
    kappa: float = 0.1,
) -> LemmaReport:
    """Measure the constants in the normal-trace div-curl estimate, the
    variable-coefficient elliptic gradient estimate, and the harmonic
    trace sandwich on single modes.

    The report carries one row per (check, sample/mode, order); the
    estimates hold when the values stay bounded as the corpus and the
    resolution vary, which is what the tests assert.
    """
    rng = np.random.default_rng(seed)
    report = LemmaReport()

    # div-curl with normal trace
    for i in range(n_samples):
        X = random_vector(grid, rng, band=3, n3_modes=2)
        for s in (1, 2):
            num = grid.norm(X, s)
            den = (
                grid.norm(X, 0)
                + grid.norm(_flat_curl(grid, X), s - 1)
                + grid.norm(_flat_div(grid, X), s - 1)
                + grid.norm(grid.boundary_slices(X[2]), s - 0.5, where="boundary")
            )
            report.rows.append({
                "check": "hodge", "label": f"sample {i} s={s}", "value": num / den,
            })

    # elliptic gradient bound on a perturbed map, Dirichlet test fields
    eta = perturbed_map(grid, rng, eps=0.05, band=1)
    cache = build_geometry(grid, eta, kappa)
    eta_s_norm = map_norm(grid, cache.eta_s, 2)
    disp_s = grid.displacement(cache.eta_s)
    dbar_sq = 0.0
    for gamma in range(3):
        for i in range(2):
            d = grid.derivative(disp_s[gamma], i + 1)
            if gamma == i:
                d = d + 1.0
            dbar_sq += grid.norm(d, 2) ** 2
    dbar_norm = np.sqrt(dbar_sq)
    P = (1.0 + eta_s_norm) ** 3
    for i in range(n_samples):
        f = wall_vanishing_scalar(grid, rng, band=2)
        num = grid.norm(cov_grad(grid, cache.a_s, f), 2)
        den = P * (
            grid.norm(cov_laplacian(grid, cache.a_s, f), 1) + dbar_norm * grid.norm(f, 2)
        )
        report.rows.append({
            "check": "elliptic", "label": f"sample {i}", "value": num / den,
        })

    # harmonic trace sandwich on single modes, with the closed-form pin
    Y1 = grid.y1[:, None]
    Y2 = grid.y2[None, :]
    for (m1, m2) in ((1, 0), (2, 1), (0, 3)):
        k = 2.0 * np.pi * np.hypot(m1, m2)
        g = np.zeros((2, grid.spec.n1, grid.spec.n2))
        g[0] = np.cos(2.0 * np.pi * (m1 * Y1 + m2 * Y2))
        psi = harmonic_extension(grid, g)
        closed = (np.sinh(2.0 * k) / (2.0 * k) - 1.0) / (4.0 * np.sinh(k) ** 2)
        report.rows.append({
            "check": "trace_pin", "label": f"mode ({m1} {m2})",
            "value": abs(grid.low_norm(psi) ** 2 - closed) / closed,
        })
        ratio = grid.norm(psi, 1) / grid.norm(g, 0.5, where="boundary")
        report.rows.append({
            "check": "trace_ratio", "label": f"mode ({m1} {m2})", "value": ratio,
        })
    return report
