"""Coupled compartment networks with locally adapted link weights.

Node i runs x_i' = f(x_i) + sum_q B_q sum_j k_ij^q (y_j^q - y_i^q) with
outputs y^q = C_q x, one weighted graph per channel. Each link weight is
stored once per undirected link and, when adaptation is on, grows as
k_ij' = gamma_ij |y_i - y_j|^2. Weights are integrated as part of the
same augmented ODE state by fixed-step RK4.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .dynamics import PolynomialField, VectorField, polynomial
from .errors import DimensionMismatchError, DivergedError, NonFiniteStateError
from .graphs import Graph, incidence

DEFAULT_DIVERGENCE_BOUND = 1e6


@dataclass(frozen=True)
class Channel:
    """One input-output coupling channel with its own graph and weights."""

    graph: Graph
    B: np.ndarray  # (n, p)
    C: np.ndarray  # (p, n)
    gains: np.ndarray  # (M,) adaptation gain per undirected link
    initial_weights: np.ndarray  # (M,)

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]


def make_channel(
    graph: Graph,
    B,
    C,
    gains=None,
    initial_weights=None,
    default_gain: float = 1.0,
    initial_weight: float = 0.0,
) -> Channel:
    """Normalize scalars/None into per-link arrays and validate shapes."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if B.shape[1] != C.shape[0] or B.shape[0] != C.shape[1]:
        raise DimensionMismatchError(
            f"B {B.shape} and C {C.shape} are not an (n x p, p x n) pair"
        )
    M = graph.n_links
    if gains is None:
        gains = np.full(M, float(default_gain))
    elif np.isscalar(gains):
        gains = np.full(M, float(gains))
    else:
        gains = np.asarray(gains, dtype=float)
    if initial_weights is None:
        initial_weights = np.full(M, float(initial_weight))
    elif np.isscalar(initial_weights):
        initial_weights = np.full(M, float(initial_weights))
    else:
        initial_weights = np.asarray(initial_weights, dtype=float)
    if gains.shape != (M,) or initial_weights.shape != (M,):
        raise DimensionMismatchError(
            f"gains/initial_weights must have one entry per link (M={M})"
        )
    if np.any(gains < 0):
        raise ValueError("adaptation gains must be nonnegative")
    if np.any(initial_weights < 0):
        warnings.warn("negative initial link weights: coupling starts repulsive")
    return Channel(graph=graph, B=B, C=C, gains=gains, initial_weights=initial_weights)


@dataclass(frozen=True)
class NetworkState:
    t: float
    x: np.ndarray  # (N, n)
    k: tuple[np.ndarray, ...]  # per channel, (M_q,)


@dataclass
class Scenario:
    """Everything needed for one deterministic network run."""

    field: PolynomialField
    channels: tuple[Channel, ...]
    x0: np.ndarray  # (N, n)
    t_end: float
    dt: float = 1e-3
    record_every: int = 1
    adaptation_enabled: bool = True
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND
    vf: VectorField = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.vf = polynomial(self.field)
        if not self.channels:
            raise DimensionMismatchError("scenario needs at least one channel")
        N = self.channels[0].graph.n_nodes
        n = self.field.dim
        for ch in self.channels:
            if ch.graph.n_nodes != N:
                raise DimensionMismatchError("all channel graphs must share the node set")
            if ch.B.shape[0] != n:
                raise DimensionMismatchError(
                    f"channel B has {ch.B.shape[0]} rows, state dimension is {n}"
                )
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.x0.shape != (N, n):
            raise DimensionMismatchError(
                f"x0 shape {self.x0.shape} does not match (N={N}, n={n})"
            )
        if self.dt <= 0 or self.t_end < 0:
            raise ValueError("need dt > 0 and t_end >= 0")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be a positive integer")
        self.record_every = int(self.record_every)

    @property
    def n_nodes(self) -> int:
        return self.channels[0].graph.n_nodes

    @property
    def n_steps(self) -> int:
        steps = int(round(self.t_end / self.dt))
        if abs(steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(
                f"t_end={self.t_end} is not an integer multiple of dt={self.dt}"
            )
        return steps

    def initial_state(self) -> NetworkState:
        return NetworkState(
            t=0.0,
            x=self.x0.copy(),
            k=tuple(ch.initial_weights.copy() for ch in self.channels),
        )


def rhs(scenario: Scenario, state: NetworkState):
    """Reference time-derivative of (x, k); sums run over graph neighbors.

    Returns (xdot (N, n), kdots tuple of (M_q,)). Coupling uses the
    oriented incidence matrix: per channel, xdot -= E (k * E^T Y) B^T.
    """
    x = np.asarray(state.x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError("state contains NaN or infinity")
    xdot = scenario.vf.eval(x)
    kdots = []
    for ch, k in zip(scenario.channels, state.k):
        k = np.asarray(k, dtype=float)
        if not np.all(np.isfinite(k)):
            raise NonFiniteStateError("link weights contain NaN or infinity")
        E = incidence(ch.graph)
        Y = x @ ch.C.T  # (N, p)
        D = E.T @ Y  # per-link output differences, head minus tail
        xdot = xdot - (E @ (k[:, None] * D)) @ ch.B.T
        if scenario.adaptation_enabled:
            kdots.append(ch.gains * np.einsum("ij,ij->i", D, D))
        else:
            kdots.append(np.zeros_like(k))
    return xdot, tuple(kdots)


@dataclass
class TrajectoryLog:
    scenario: Scenario
    t: np.ndarray  # (T,)
    x: np.ndarray  # (T, N, n)
    k: tuple[np.ndarray, ...]  # per channel, (T, M_q)

    def final_state(self) -> NetworkState:
        return NetworkState(
            t=float(self.t[-1]),
            x=self.x[-1].copy(),
            k=tuple(kq[-1].copy() for kq in self.k),
        )

    def outputs(self, channel: int) -> np.ndarray:
        """Logged outputs Y^q, shape (T, N, p_q)."""
        C = self.scenario.channels[channel].C
        return self.x @ C.T


def _pack_channels(scenario: Scenario):
    n = scenario.field.dim
    B_all = np.ascontiguousarray(np.hstack([ch.B for ch in scenario.channels]))
    C_all = np.ascontiguousarray(np.vstack([ch.C for ch in scenario.channels]))
    p_off = np.cumsum([0] + [ch.n_outputs for ch in scenario.channels]).astype(np.int64)
    m_off = np.cumsum([0] + [ch.graph.n_links for ch in scenario.channels]).astype(np.int64)
    heads = np.array(
        [i for ch in scenario.channels for (i, j) in ch.graph.links], dtype=np.int64
    )
    tails = np.array(
        [j for ch in scenario.channels for (i, j) in ch.graph.links], dtype=np.int64
    )
    gains = np.concatenate([ch.gains for ch in scenario.channels]).astype(np.float64)
    k0 = np.concatenate([ch.initial_weights for ch in scenario.channels]).astype(np.float64)
    assert B_all.shape == (n, p_off[-1])
    return B_all, C_all, p_off, heads, tails, m_off, gains, k0


def integrate(scenario: Scenario) -> TrajectoryLog:
    """Classical RK4 over [0, t_end]; logs every `record_every` steps
    (step 0 and the final step always included).

    Raises DivergedError when any |x| exceeds the divergence bound and
    NonFiniteStateError on NaN/inf.
    """
    n_steps = scenario.n_steps
    x0 = np.ascontiguousarray(scenario.x0, dtype=np.float64)
    if not np.all(np.isfinite(x0)):
        raise NonFiniteStateError("initial state contains NaN or infinity")
    coeffs, comp_idx, powers = _kernels.pack_polynomial(scenario.field.components)
    B_all, C_all, p_off, heads, tails, m_off, gains, k0 = _pack_channels(scenario)

    rec = scenario.record_every
    T = n_steps // rec + 1 + (1 if n_steps % rec else 0)
    snaps_x = np.empty((T, *x0.shape))
    snaps_k = np.empty((T, k0.shape[0]))
    status, step, n_rec, worst = _kernels.ode_rk4(
        x0, k0, coeffs, comp_idx, powers,
        B_all, C_all, p_off, heads, tails, m_off, gains,
        float(scenario.dt), n_steps, rec,
        float(scenario.divergence_bound), scenario.adaptation_enabled,
        snaps_x, snaps_k,
    )
    t_fail = step * scenario.dt
    if status == _kernels.STATUS_NONFINITE:
        raise NonFiniteStateError(f"non-finite state at t={t_fail:g}")
    if status == _kernels.STATUS_DIVERGED:
        raise DivergedError(
            f"|x| reached {worst:.3g} > bound {scenario.divergence_bound:g} at t={t_fail:g}"
        )

    steps_logged = np.arange(0, n_steps + 1, rec)
    if n_steps % rec:
        steps_logged = np.append(steps_logged, n_steps)
    t = steps_logged * scenario.dt
    k_split = []
    for q in range(len(scenario.channels)):
        k_split.append(snaps_k[:n_rec, m_off[q]:m_off[q + 1]].copy())
    return TrajectoryLog(scenario=scenario, t=t, x=snaps_x[:n_rec], k=tuple(k_split))


def link_index(graph: Graph, link: Sequence[int]) -> int:
    """Index of a 1-based unordered node pair in the graph's link order."""
    i, j = int(link[0]), int(link[1])
    key = (min(i, j) - 1, max(i, j) - 1)
    try:
        return graph.links.index(key)
    except ValueError:
        raise KeyError(f"({i},{j}) is not a link of the graph") from None


def weight_integral_check(log: TrajectoryLog, channel: int, link: Sequence[int]) -> float:
    """Relative residual between the logged weight increment of one link
    and gamma times the trapezoidal integral of |y_i - y_j|^2.

    The two sides are independent discretizations of the same update law,
    so the residual measures integrator/log self-consistency.
    """
    ch = log.scenario.channels[channel]
    idx = link_index(ch.graph, link)
    i, j = ch.graph.links[idx]
    d = (log.x[:, i, :] - log.x[:, j, :]) @ ch.C.T  # (T, p)
    integrand = np.einsum("ij,ij->i", d, d)
    quad = float(ch.gains[idx]) * float(np.trapezoid(integrand, log.t))
    if not log.scenario.adaptation_enabled:
        quad = 0.0
    delta = float(log.k[channel][-1, idx] - log.k[channel][0, idx])
    scale = max(abs(delta), abs(quad), 1e-300)
    return abs(delta - quad) / scale
