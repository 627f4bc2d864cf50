"""Node vector fields with analytic Jacobians.

Scenario files describe dynamics as polynomial term lists, which keeps
them serializable and lets the certificate checker evaluate J(x)
exactly. `VectorField.eval` accepts any (..., dim) stack of states so
simulators can evaluate all nodes or grid cells in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import MalformedPolynomialError

Monomial = tuple[float, tuple[int, ...]]


@dataclass(frozen=True)
class VectorField:
    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PolynomialField:
    """Per-component monomial lists: component c is sum of
    coeff * x1^e1 * ... * xn^en over its (coeff, (e1,...,en)) terms."""

    dim: int
    components: tuple[tuple[Monomial, ...], ...]

    @classmethod
    def from_lists(cls, components: Sequence[Sequence[Sequence]]) -> "PolynomialField":
        """Build from nested lists, e.g. [[(1.0, [1]), (-1.0, [3])]]."""
        dim = len(components)
        comps = tuple(
            tuple((float(c), tuple(int(e) for e in p)) for c, p in terms)
            for terms in components
        )
        return cls(dim=dim, components=comps)


def _validate(spec: PolynomialField) -> None:
    if spec.dim < 1 or len(spec.components) != spec.dim:
        raise MalformedPolynomialError(
            f"expected {spec.dim} component term lists, got {len(spec.components)}"
        )
    for ci, terms in enumerate(spec.components):
        for coeff, powers in terms:
            if not np.isfinite(coeff):
                raise MalformedPolynomialError(f"non-finite coefficient in component {ci}")
            if len(powers) != spec.dim:
                raise MalformedPolynomialError(
                    f"component {ci}: exponent tuple {powers} has length "
                    f"{len(powers)}, expected {spec.dim}"
                )
            if any((not isinstance(e, (int, np.integer))) or e < 0 for e in powers):
                raise MalformedPolynomialError(
                    f"component {ci}: exponents must be nonnegative integers, got {powers}"
                )


def polynomial(spec: PolynomialField) -> VectorField:
    """Vector field with Jacobian assembled term-by-term by the power rule."""
    _validate(spec)
    n = spec.dim
    components = spec.components

    def f(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for ci, terms in enumerate(components):
            acc = out[..., ci]
            for coeff, powers in terms:
                term = np.full(x.shape[:-1], coeff)
                for d, e in enumerate(powers):
                    if e:
                        term = term * x[..., d] ** e
                acc += term
        return out

    def jac(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        J = np.zeros((n, n))
        for ci, terms in enumerate(components):
            for coeff, powers in terms:
                for d, e in enumerate(powers):
                    if e == 0:
                        continue
                    term = coeff * e * x[d] ** (e - 1)
                    for dp, ep in enumerate(powers):
                        if dp != d and ep:
                            term = term * x[dp] ** ep
                    J[ci, d] += term
        return J

    return VectorField(dim=n, eval=f, jacobian=jac)


def bistable_field() -> PolynomialField:
    """Term-list encoding of the scalar double well x - x^3."""
    return PolynomialField.from_lists([[(1.0, [1]), (-1.0, [3])]])


def bistable() -> VectorField:
    """Scalar double well f(x) = x - x^3 with J(x) = 1 - 3x^2.

    Stable equilibria at +-1, saddle at 0.
    """

    def f(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x - x**3

    def jac(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([[1.0 - 3.0 * float(x[0]) ** 2]])

    return VectorField(dim=1, eval=f, jacobian=jac)


def check_jacobian(
    vf: VectorField,
    box: Sequence[Sequence[float]],
    n_samples: int = 100,
    seed: int = 0,
    step: float = 1e-5,
) -> float:
    """Worst relative deviation between the analytic Jacobian and central
    finite differences over seeded random points in `box`.

    Relative scale per entry is max(1, |J_ij|) so near-zero entries are
    compared absolutely.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    if lo.shape != (vf.dim,) or np.any(hi < lo):
        raise ValueError(f"box must be {vf.dim} nonempty intervals")
    rng = np.random.Generator(np.random.Philox(seed))
    worst = 0.0
    for _ in range(n_samples):
        x = rng.uniform(lo, hi)
        J = np.asarray(vf.jacobian(x), dtype=float)
        Jfd = np.empty_like(J)
        for d in range(vf.dim):
            dx = np.zeros(vf.dim)
            dx[d] = step
            Jfd[:, d] = (vf.eval(x + dx) - vf.eval(x - dx)) / (2.0 * step)
        err = np.abs(J - Jfd) / np.maximum(1.0, np.abs(J))
        worst = max(worst, float(err.max()))
    return worst
