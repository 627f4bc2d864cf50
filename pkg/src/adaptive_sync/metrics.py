"""Diagnostics: averages, deviations, sync error, Lyapunov monitor,
and the runtime boundedness guard.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .certificate import Certificate
from .graphs import coupling_bound, is_connected
from .network import TrajectoryLog

# Monitoring coupling level: the decay argument only needs k* "large
# enough", so the monitor uses a 10% margin over the threshold.
KSTAR_MARGIN = 1.1


def deviations(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Node average xbar and deviations xtilde = x - xbar (rows sum to 0)."""
    x = np.asarray(x, dtype=float)
    xbar = x.mean(axis=0)
    return xbar, x - xbar


def _output_matrices(channels) -> list[np.ndarray]:
    return [np.atleast_2d(np.asarray(getattr(c, "C", c), dtype=float)) for c in channels]


def sync_error(x: np.ndarray, channels: Sequence) -> np.ndarray:
    """Per-channel sum_i |C_q (x_i - xbar)|^2.

    `channels` may hold Channel objects or raw (p, n) output matrices.
    """
    _, xt = deviations(x)
    out = []
    for C in _output_matrices(channels):
        yt = xt @ C.T
        out.append(float(np.sum(yt * yt)))
    return np.array(out)


def lyapunov(
    x: np.ndarray,
    k: Sequence[np.ndarray],
    cert: Certificate,
    kstar,
    gains: Sequence[np.ndarray],
    omegas: Sequence[float] | None = None,
) -> float:
    """V = sum_i xt_i^T P xt_i + sum_q w_q sum_links (k - k*_q)^2 / gamma.

    The per-link weight term carries an implicit factor two because the
    defining double sum visits every undirected link from both ends.
    `kstar` may be a scalar or one value per channel.
    """
    _, xt = deviations(x)
    V = float(np.einsum("id,de,ie->", xt, cert.P, xt))
    m = len(k)
    kstars = np.broadcast_to(np.asarray(kstar, dtype=float), (m,))
    if omegas is None:
        omegas = cert.omegas() if len(cert.omegas()) == m else (1.0,) * m
    for q in range(m):
        g = np.asarray(gains[q], dtype=float)
        if np.any(g <= 0):
            raise ValueError("lyapunov monitor needs strictly positive gains")
        ktil = np.asarray(k[q], dtype=float) - kstars[q]
        V += float(omegas[q]) * float(np.sum(ktil * ktil / g))
    return V


def in_box(x: np.ndarray, box: Sequence[Sequence[float]]) -> bool:
    x = np.asarray(x, dtype=float)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return bool(np.all(x >= lo) and np.all(x <= hi))


@dataclass(frozen=True)
class SyncMetrics:
    t: float
    xbar: np.ndarray
    sync_err: np.ndarray  # per channel
    sync_err_total: float
    lyapunov: float  # nan when no certificate / nonpositive gains
    in_box: bool
    max_state: float


def monitor_kstars(log: TrajectoryLog, cert: Certificate) -> np.ndarray:
    """Per-channel monitoring level 1.1 * theta / (2 lambda2(G_q))."""
    return np.array(
        [KSTAR_MARGIN * coupling_bound(ch.graph, cert.theta) for ch in log.scenario.channels]
    )


def metrics_series(
    log: TrajectoryLog,
    cert: Certificate | None = None,
    kstar=None,
) -> list[SyncMetrics]:
    """Per logged step diagnostics for a finished run.

    Without a certificate the Lyapunov value is nan and the box check is
    vacuously true. `kstar` overrides the default monitoring level.
    """
    channels = log.scenario.channels
    gains = [ch.gains for ch in channels]
    have_v = cert is not None and all(np.all(g > 0) for g in gains)
    if have_v and kstar is None:
        if all(is_connected(ch.graph) for ch in channels):
            kstar = monitor_kstars(log, cert)
        else:
            have_v = False  # no spectral gap, no monitoring level
    out = []
    for m in range(len(log.t)):
        x = log.x[m]
        xbar, _ = deviations(x)
        per = sync_error(x, channels)
        if have_v:
            V = lyapunov(x, [kq[m] for kq in log.k], cert, kstar, gains)
        else:
            V = float("nan")
        box_ok = in_box(x, cert.box) if cert is not None else True
        out.append(
            SyncMetrics(
                t=float(log.t[m]),
                xbar=xbar,
                sync_err=per,
                sync_err_total=float(per.sum()),
                lyapunov=V,
                in_box=box_ok,
                max_state=float(np.abs(x).max()),
            )
        )
    return out


@dataclass(frozen=True)
class BoundednessReport:
    max_abs_state: float
    box_exit_steps: int  # logged steps with some x_i outside the box
    first_exit_t: float | None
    avg_bound: float
    max_abs_avg: float
    avg_bound_ok: bool

    def __str__(self) -> str:
        exits = f"{self.box_exit_steps} box exits"
        if self.first_exit_t is not None:
            exits += f" (first at t={self.first_exit_t:g})"
        return (
            f"max|x|={self.max_abs_state:.6g}, {exits}, "
            f"avg bound {'holds' if self.avg_bound_ok else 'VIOLATED'} "
            f"(max|xbar|={self.max_abs_avg:.6g} vs {self.avg_bound:.6g})"
        )


def boundedness_guard(log: TrajectoryLog, box=None, tol: float = 1e-9) -> BoundednessReport:
    """Check the run stayed bounded and inside the declared box.

    The average bound max{|xbar(0)|, 1 + max_i sup_t |xt_i|} is the
    a-priori estimate available for reaction terms that push back once
    |x| passes 1 (the shipped cubic does); for other dynamics it is
    reported as-is and may legitimately fail.
    """
    xbars = log.x.mean(axis=1)  # (T, n)
    xt = log.x - xbars[:, None, :]
    max_avg = float(np.abs(xbars).max())
    bound = max(float(np.abs(xbars[0]).max()), 1.0 + float(np.abs(xt).max()))
    exits = 0
    first_exit = None
    if box is not None:
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        outside = np.any((log.x < lo) | (log.x > hi), axis=(1, 2))
        exits = int(outside.sum())
        if exits:
            first_exit = float(log.t[int(np.argmax(outside))])
    return BoundednessReport(
        max_abs_state=float(np.abs(log.x).max()),
        box_exit_steps=exits,
        first_exit_t=first_exit,
        avg_bound=bound,
        max_abs_avg=max_avg,
        avg_bound_ok=max_avg <= bound + tol,
    )
