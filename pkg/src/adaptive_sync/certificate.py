"""Checks for the output-feedback-style synchronization certificate.

A certificate (P, theta, B, C) over a box X witnesses

    P J(x) + J(x)^T P <= theta C^T C   for all x in X,    P B = C^T.

With multiple channels the coupling equation relaxes to
P B = [w1 C1^T ... wm Cm^T] with positive multipliers w_q. The matrix
inequality is verified on a finite sample (lattice plus seeded random
interior points) and reported as sampled evidence, not proof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import VectorField
from .errors import (
    DimensionMismatchError,
    InequalityFailedError,
    StructureFailedError,
)
from .graphs import Graph, coupling_bound, lambda2

# Non-strict inequalities: the bistable example attains equality at x=0.
MARGIN_TOL = 1e-9
STRUCTURE_TOL = 1e-10


@dataclass(frozen=True)
class ChannelMatrices:
    B: np.ndarray  # (n, p_q)
    C: np.ndarray  # (p_q, n)
    omega: float = 1.0


@dataclass(frozen=True)
class Certificate:
    P: np.ndarray
    theta: float
    B: np.ndarray  # (n, p); stacked [B1 ... Bm] when multi-channel
    C: np.ndarray  # (p, n); stacked rows [C1; ...; Cm] when multi-channel
    box: tuple[tuple[float, float], ...]
    channels: tuple[ChannelMatrices, ...] | None = None

    @classmethod
    def single(cls, P, theta, B, C, box) -> "Certificate":
        P = np.atleast_2d(np.asarray(P, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        C = np.atleast_2d(np.asarray(C, dtype=float))
        return cls(P=P, theta=float(theta), B=B, C=C,
                   box=tuple((float(a), float(b)) for a, b in box))

    @classmethod
    def multi(cls, P, theta, channels: Sequence[ChannelMatrices], box) -> "Certificate":
        P = np.atleast_2d(np.asarray(P, dtype=float))
        chans = tuple(channels)
        B = np.hstack([np.atleast_2d(np.asarray(c.B, float)) for c in chans])
        C = np.vstack([np.atleast_2d(np.asarray(c.C, float)) for c in chans])
        return cls(P=P, theta=float(theta), B=B, C=C,
                   box=tuple((float(a), float(b)) for a, b in box),
                   channels=chans)

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def omegas(self) -> tuple[float, ...]:
        if self.channels is None:
            return (1.0,)
        return tuple(c.omega for c in self.channels)


def _check_dims(cert: Certificate) -> None:
    n = cert.P.shape[0]
    if cert.P.shape != (n, n):
        raise DimensionMismatchError(f"P must be square, got {cert.P.shape}")
    p = cert.B.shape[1]
    if cert.B.shape != (n, p) or cert.C.shape != (p, n):
        raise DimensionMismatchError(
            f"B {cert.B.shape} and C {cert.C.shape} inconsistent with n={n}"
        )
    if len(cert.box) != n:
        raise DimensionMismatchError(
            f"box has {len(cert.box)} intervals, state dimension is {n}"
        )
    if cert.channels is not None:
        widths = [np.atleast_2d(c.B).shape[1] for c in cert.channels]
        if sum(widths) != p:
            raise DimensionMismatchError("channel blocks do not tile B")
        if any(c.omega <= 0 for c in cert.channels):
            raise ValueError("channel multipliers must be positive")


@dataclass(frozen=True)
class StructureReport:
    passed: bool
    symmetry_residual: float
    min_eigenvalue: float
    coupling_residual: float  # max |PB - target| entrywise

    def __str__(self) -> str:
        return (
            f"P symmetry residual {self.symmetry_residual:.3g}, "
            f"min eig {self.min_eigenvalue:.6g}, "
            f"coupling residual {self.coupling_residual:.3g}"
        )


def check_structure(cert: Certificate) -> StructureReport:
    """Verify P = P^T > 0 and the coupling equation PB = C^T (or its
    multiplier-weighted multi-channel form)."""
    _check_dims(cert)
    if cert.theta <= 0:
        raise ValueError(f"theta must be positive, got {cert.theta}")
    sym = float(np.abs(cert.P - cert.P.T).max())
    min_eig = float(np.linalg.eigvalsh(0.5 * (cert.P + cert.P.T))[0])
    if cert.channels is None:
        target = cert.C.T
    else:
        target = np.hstack(
            [c.omega * np.atleast_2d(np.asarray(c.C, float)).T for c in cert.channels]
        )
    coupling = float(np.abs(cert.P @ cert.B - target).max())
    passed = sym <= STRUCTURE_TOL and min_eig > 0 and coupling <= STRUCTURE_TOL
    return StructureReport(passed, sym, min_eig, coupling)


@dataclass(frozen=True)
class InequalityReport:
    passed: bool
    worst_margin: float
    worst_x: np.ndarray
    n_samples: int

    def __str__(self) -> str:
        loc = np.array2string(self.worst_x, precision=6)
        return f"worst margin {self.worst_margin:.6g} at x={loc} over {self.n_samples} samples"


def _sample_points(box, grid: int, seed: int) -> np.ndarray:
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    axes = [np.linspace(a, b, grid) for a, b in zip(lo, hi)]
    lattice = np.array(list(itertools.product(*axes)))
    rng = np.random.Generator(np.random.Philox(seed))
    interior = rng.uniform(lo, hi, size=(grid, len(box)))
    return np.vstack([lattice, interior])


def check_jacobian_inequality(
    cert: Certificate, vf: VectorField, grid: int = 41, seed: int = 0
) -> InequalityReport:
    """Sample min eig of theta C^T C - P J(x) - J(x)^T P over the box.

    Samples are a `grid`-per-dimension lattice plus `grid` seeded random
    interior points; pass requires the minimum margin >= -1e-9.
    """
    _check_dims(cert)
    if vf.dim != cert.dim:
        raise DimensionMismatchError(
            f"vector field dimension {vf.dim} != certificate dimension {cert.dim}"
        )
    if grid < 2:
        raise ValueError("grid must be >= 2 points per dimension")
    S0 = cert.theta * cert.C.T @ cert.C
    worst = np.inf
    worst_x = None
    points = _sample_points(cert.box, grid, seed)
    for x in points:
        J = np.asarray(vf.jacobian(x), dtype=float)
        S = S0 - cert.P @ J - J.T @ cert.P
        margin = float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])
        if margin < worst:
            worst = margin
            worst_x = x.copy()
    return InequalityReport(worst >= -MARGIN_TOL, worst, worst_x, len(points))


@dataclass(frozen=True)
class CertificationReport:
    theta: float
    lambda2s: tuple[float, ...]  # one per channel graph
    kstars: tuple[float, ...]
    structure: StructureReport
    inequality: InequalityReport

    @property
    def kstar(self) -> float:
        return self.kstars[0]

    def epsilon(self, k: float, channel: int = 0) -> float:
        """Decay-rate margin 2 k lambda2 - theta at coupling level k."""
        return 2.0 * k * self.lambda2s[channel] - self.theta

    def __str__(self) -> str:
        ks = ", ".join(f"{k:.6g}" for k in self.kstars)
        return f"theta={self.theta:g}, k*=[{ks}]; {self.structure}; {self.inequality}"


def certify(
    cert: Certificate,
    vf: VectorField,
    graphs: Graph | Sequence[Graph],
    grid: int = 41,
    seed: int = 0,
) -> CertificationReport:
    """Run both certificate checks and compute per-graph coupling bounds.

    Raises StructureFailedError or InequalityFailedError when the
    corresponding check fails; propagates DisconnectedGraphError from the
    coupling bound.
    """
    if isinstance(graphs, Graph):
        graphs = (graphs,)
    structure = check_structure(cert)
    if not structure.passed:
        raise StructureFailedError(structure)
    inequality = check_jacobian_inequality(cert, vf, grid=grid, seed=seed)
    if not inequality.passed:
        raise InequalityFailedError(inequality)
    lams = tuple(lambda2(g) for g in graphs)
    kstars = tuple(coupling_bound(g, cert.theta) for g in graphs)
    return CertificationReport(cert.theta, lams, kstars, structure, inequality)
