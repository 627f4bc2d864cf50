"""Method-of-lines reaction-diffusion system on a 1-D interval.

Finite-volume discretization: states live at cell centers, the diffusion
coefficient k(t, xi) at interior faces, and boundary faces carry zero
flux (Neumann). This keeps the divergence structure exact, so mass
conservation and operator symmetry hold by construction, and the
discrete system is literally a path-graph network with rescaled weights
(see `as_path_network`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels, network
from .dynamics import PolynomialField, VectorField, polynomial
from .errors import DimensionMismatchError, DivergedError, NonFiniteStateError
from .graphs import path_graph


@dataclass(frozen=True)
class PdeGrid:
    length: float
    n_cells: int

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.n_cells < 2:
            raise ValueError(f"need at least 2 cells, got {self.n_cells}")

    @property
    def h(self) -> float:
        return self.length / self.n_cells

    @property
    def n_faces(self) -> int:
        return self.n_cells - 1

    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h


@dataclass(frozen=True)
class PdeState:
    t: float
    x: np.ndarray  # (n_cells, n)
    k: np.ndarray  # (n_faces,)


@dataclass
class PdeScenario:
    field: PolynomialField
    B: np.ndarray  # (n, p)
    C: np.ndarray  # (p, n)
    grid: PdeGrid
    gamma: np.ndarray  # (n_faces,)
    x0: np.ndarray  # (n_cells, n)
    t_end: float
    dt: float
    k0: np.ndarray | None = None  # (n_faces,), defaults to zeros
    record_every: int = 1
    adaptation_enabled: bool = True
    divergence_bound: float = network.DEFAULT_DIVERGENCE_BOUND
    vf: VectorField = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.vf = polynomial(self.field)
        n = self.field.dim
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if self.B.shape[0] != n or self.C.shape != (self.B.shape[1], n):
            raise DimensionMismatchError(
                f"B {self.B.shape} / C {self.C.shape} inconsistent with n={n}"
            )
        nf = self.grid.n_faces
        if np.isscalar(self.gamma):
            self.gamma = np.full(nf, float(self.gamma))
        else:
            self.gamma = np.asarray(self.gamma, dtype=float)
        if self.gamma.shape != (nf,):
            raise DimensionMismatchError(f"gamma must have one value per face ({nf})")
        if np.any(self.gamma <= 0):
            raise ValueError("gamma must be positive at every face")
        if self.k0 is None:
            self.k0 = np.zeros(nf)
        else:
            self.k0 = np.asarray(self.k0, dtype=float)
            if self.k0.shape != (nf,):
                raise DimensionMismatchError(f"k0 must have one value per face ({nf})")
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.x0.shape != (self.grid.n_cells, n):
            raise DimensionMismatchError(
                f"x0 shape {self.x0.shape} != (n_cells={self.grid.n_cells}, n={n})"
            )
        if self.dt <= 0 or self.t_end < 0:
            raise ValueError("need dt > 0 and t_end >= 0")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be a positive integer")
        self.record_every = int(self.record_every)

    @property
    def n_steps(self) -> int:
        steps = int(round(self.t_end / self.dt))
        if abs(steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(
                f"t_end={self.t_end} is not an integer multiple of dt={self.dt}"
            )
        return steps

    def initial_state(self) -> PdeState:
        return PdeState(t=0.0, x=self.x0.copy(), k=self.k0.copy())


def discrete_rhs(s: PdeScenario, state: PdeState):
    """Reference (xdot, kdot): face gradients, flux-form divergence with
    zero-flux ghost faces, and per-face adaptation gamma * sum_l g_l^2."""
    x = np.asarray(state.x, dtype=float)
    k = np.asarray(state.k, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))):
        raise NonFiniteStateError("state contains NaN or infinity")
    h = s.grid.h
    y = x @ s.C.T  # (nc, p)
    g = (y[1:] - y[:-1]) / h  # (nf, p)
    flux = k[:, None] * g
    div = np.diff(flux, axis=0, prepend=0.0, append=0.0) / h  # (nc, p)
    xdot = s.vf.eval(x) + div @ s.B.T
    if s.adaptation_enabled:
        kdot = s.gamma * np.einsum("ij,ij->i", g, g)
    else:
        kdot = np.zeros_like(k)
    return xdot, kdot


@dataclass
class PdeTrajectoryLog:
    scenario: PdeScenario
    t: np.ndarray  # (T,)
    x: np.ndarray  # (T, n_cells, n)
    k: np.ndarray  # (T, n_faces)


def integrate_pde(s: PdeScenario) -> PdeTrajectoryLog:
    """RK4 over the augmented (x, k) system; same logging and divergence
    contract as the network integrator."""
    n_steps = s.n_steps
    x0 = np.ascontiguousarray(s.x0, dtype=np.float64)
    if not np.all(np.isfinite(x0)):
        raise NonFiniteStateError("initial profile contains NaN or infinity")
    coeffs, comp_idx, powers = _kernels.pack_polynomial(s.field.components)
    rec = s.record_every
    T = n_steps // rec + 1 + (1 if n_steps % rec else 0)
    snaps_x = np.empty((T, *x0.shape))
    snaps_k = np.empty((T, s.grid.n_faces))
    status, step, n_rec, worst = _kernels.pde_rk4(
        x0, np.ascontiguousarray(s.k0, dtype=np.float64),
        coeffs, comp_idx, powers,
        np.ascontiguousarray(s.B), np.ascontiguousarray(s.C),
        np.ascontiguousarray(s.gamma),
        1.0 / s.grid.h, float(s.dt), n_steps, rec,
        float(s.divergence_bound), s.adaptation_enabled,
        snaps_x, snaps_k,
    )
    t_fail = step * s.dt
    if status == _kernels.STATUS_NONFINITE:
        raise NonFiniteStateError(f"non-finite state at t={t_fail:g}")
    if status == _kernels.STATUS_DIVERGED:
        raise DivergedError(
            f"|x| reached {worst:.3g} > bound {s.divergence_bound:g} at t={t_fail:g}"
        )
    steps_logged = np.arange(0, n_steps + 1, rec)
    if n_steps % rec:
        steps_logged = np.append(steps_logged, n_steps)
    t = steps_logged * s.dt
    return PdeTrajectoryLog(scenario=s, t=t, x=snaps_x[:n_rec], k=snaps_k[:n_rec])


def neumann_operator(grid: PdeGrid, k_faces=None) -> np.ndarray:
    """Matrix of x -> -div(k grad x) at frozen face coefficients.

    Symmetric positive semidefinite with the constant vector in its null
    space; unit coefficients by default.
    """
    nf = grid.n_faces
    if k_faces is None:
        k_faces = np.ones(nf)
    else:
        k_faces = np.asarray(k_faces, dtype=float)
        if k_faces.shape != (nf,):
            raise DimensionMismatchError(f"need one coefficient per face ({nf})")
    w = k_faces / grid.h**2
    A = np.zeros((grid.n_cells, grid.n_cells))
    for m in range(nf):
        A[m, m] += w[m]
        A[m + 1, m + 1] += w[m]
        A[m, m + 1] -= w[m]
        A[m + 1, m] -= w[m]
    return A


def discrete_poincare_lambda2(grid: PdeGrid) -> float:
    """Second-smallest eigenvalue of the unit-coefficient Neumann
    Laplacian; the discrete spectral-gap constant for the grid."""
    return float(np.linalg.eigvalsh(neumann_operator(grid))[1])


def as_path_network(s: PdeScenario) -> network.Scenario:
    """The exactly equivalent path-graph network.

    Cell m couples to its neighbors with weight k_face / h^2, and the
    face update law becomes a link update with gain gamma / h^4:
       K = k/h^2  =>  K' = k'/h^2 = (gamma/h^2) |grad y|^2
                              = (gamma/h^4) |y_{m+1} - y_m|^2.
    """
    h = s.grid.h
    ch = network.make_channel(
        path_graph(s.grid.n_cells),
        s.B,
        s.C,
        gains=s.gamma / h**4,
        initial_weights=s.k0 / h**2,
    )
    return network.Scenario(
        field=s.field,
        channels=(ch,),
        x0=s.x0.copy(),
        t_end=s.t_end,
        dt=s.dt,
        record_every=s.record_every,
        adaptation_enabled=s.adaptation_enabled,
        divergence_bound=s.divergence_bound,
    )


def spatial_sync_error(x: np.ndarray, C: np.ndarray, h: float) -> float:
    """Midpoint quadrature of the squared output deviation,
    h * sum_m |C (x_m - xbar)|^2."""
    x = np.asarray(x, dtype=float)
    xt = x - x.mean(axis=0)
    yt = xt @ np.atleast_2d(C).T
    return float(h * np.sum(yt * yt))


def pde_metrics_series(
    log: PdeTrajectoryLog,
    P: np.ndarray | None = None,
    kstar: float | None = None,
):
    """Arrays (sync_err, mass, V) per logged step.

    mass is the cellwise integral h * sum_m x_m, one column per state
    dimension. V is the integral Lyapunov monitor (midpoint quadrature,
    faces weighted by h); nan without P/kstar or with nonpositive gamma.
    """
    s = log.scenario
    h = s.grid.h
    T = len(log.t)
    sync = np.empty(T)
    mass = np.empty((T, s.field.dim))
    V = np.full(T, np.nan)
    have_v = P is not None and kstar is not None and np.all(s.gamma > 0)
    if have_v:
        P = np.atleast_2d(np.asarray(P, dtype=float))
    for m in range(T):
        x = log.x[m]
        sync[m] = spatial_sync_error(x, s.C, h)
        mass[m] = h * x.sum(axis=0)
        if have_v:
            xt = x - x.mean(axis=0)
            ktil = log.k[m] - kstar
            V[m] = h * float(np.einsum("id,de,ie->", xt, P, xt))
            V[m] += h * float(np.sum(ktil * ktil / s.gamma))
    return sync, mass, V
