"""Jitted fixed-step RK4 loops for the network and grid integrators.

The public `rhs` / `discrete_rhs` functions are plain numpy and stay the
reference semantics; these kernels exist only to make long fixed-step
runs cheap. Tests pin the kernels to the numpy reference.

Status codes returned by the kernels: 0 ok, 1 non-finite state,
2 divergence bound exceeded.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_DIVERGED = 2


def pack_polynomial(components) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten per-component monomial lists into kernel-friendly arrays."""
    dim = len(components)
    coeffs = []
    comp_idx = []
    powers = []
    for ci, terms in enumerate(components):
        for coeff, pw in terms:
            coeffs.append(float(coeff))
            comp_idx.append(ci)
            powers.append([int(e) for e in pw])
    if not coeffs:
        return (
            np.zeros(0),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, dim), dtype=np.int64),
        )
    return (
        np.asarray(coeffs, dtype=np.float64),
        np.asarray(comp_idx, dtype=np.int64),
        np.asarray(powers, dtype=np.int64),
    )


@njit(cache=True)
def _poly_add_into(out, xs, coeffs, comp_idx, powers):
    # out[i, comp] += sum of monomials evaluated at xs[i, :]
    rows, n = xs.shape
    for t in range(coeffs.shape[0]):
        ci = comp_idx[t]
        c0 = coeffs[t]
        for i in range(rows):
            v = c0
            for d in range(n):
                e = powers[t, d]
                if e > 0:
                    xv = xs[i, d]
                    pw = xv
                    for _ in range(e - 1):
                        pw *= xv
                    v *= pw
            out[i, ci] += v


@njit(cache=True)
def _classify(x, bound):
    # 1 non-finite beats 2 diverged when both occur
    status = STATUS_DIVERGED
    worst = 0.0
    rows, n = x.shape
    for i in range(rows):
        for d in range(n):
            v = x[i, d]
            if np.isnan(v) or np.isinf(v):
                return STATUS_NONFINITE, v
            if np.abs(v) > worst:
                worst = np.abs(v)
    return status, worst


@njit(cache=True)
def ode_rk4(
    x0,            # (N, n) initial states
    k0,            # (M_total,) initial weights, channels concatenated
    coeffs, comp_idx, powers,   # packed polynomial vector field
    B_all,         # (n, p_total) channel input blocks side by side
    C_all,         # (p_total, n) channel output blocks stacked
    p_off,         # (m+1,) column offsets of each channel in Y
    heads, tails,  # (M_total,) 0-based endpoint indices per link
    m_off,         # (m+1,) link offsets of each channel
    gains,         # (M_total,)
    dt, n_steps, record_every, bound, adapt,
    snaps_x, snaps_k,   # preallocated (T, N, n) and (T, M_total)
):
    N, n = x0.shape
    M = k0.shape[0]
    p_total = C_all.shape[0]
    m = p_off.shape[0] - 1

    x = x0.copy()
    k = k0.copy()
    sx = np.empty((4, N, n))
    sk = np.empty((4, M))
    xs = np.empty((N, n))
    ks = np.empty(M)
    y = np.empty((N, p_total))

    rec = 0
    snaps_x[rec] = x
    snaps_k[rec] = k
    rec += 1

    for step in range(1, n_steps + 1):
        for stage in range(4):
            if stage == 0:
                for i in range(N):
                    for d in range(n):
                        xs[i, d] = x[i, d]
                for l in range(M):
                    ks[l] = k[l]
            else:
                c = 0.5 * dt if stage < 3 else dt
                s = stage - 1
                for i in range(N):
                    for d in range(n):
                        xs[i, d] = x[i, d] + c * sx[s, i, d]
                for l in range(M):
                    ks[l] = k[l] + c * sk[s, l]

            for i in range(N):
                for q in range(p_total):
                    acc = 0.0
                    for d in range(n):
                        acc += C_all[q, d] * xs[i, d]
                    y[i, q] = acc

            for i in range(N):
                for d in range(n):
                    sx[stage, i, d] = 0.0
            _poly_add_into(sx[stage], xs, coeffs, comp_idx, powers)

            for q in range(m):
                for l in range(m_off[q], m_off[q + 1]):
                    hd = heads[l]
                    tl = tails[l]
                    kl = ks[l]
                    acc = 0.0
                    for pq in range(p_off[q], p_off[q + 1]):
                        dv = y[hd, pq] - y[tl, pq]
                        acc += dv * dv
                        for d in range(n):
                            flow = B_all[d, pq] * kl * dv
                            sx[stage, hd, d] -= flow
                            sx[stage, tl, d] += flow
                    sk[stage, l] = gains[l] * acc if adapt else 0.0

        c6 = dt / 6.0
        for i in range(N):
            for d in range(n):
                x[i, d] += c6 * (
                    sx[0, i, d] + 2.0 * (sx[1, i, d] + sx[2, i, d]) + sx[3, i, d]
                )
        for l in range(M):
            k[l] += c6 * (sk[0, l] + 2.0 * (sk[1, l] + sk[2, l]) + sk[3, l])

        ok = True
        for i in range(N):
            for d in range(n):
                if not (np.abs(x[i, d]) <= bound):
                    ok = False
        if not ok:
            status, worst = _classify(x, bound)
            return status, step, rec, worst

        if step % record_every == 0:
            snaps_x[rec] = x
            snaps_k[rec] = k
            rec += 1

    if n_steps % record_every != 0:
        snaps_x[rec] = x
        snaps_k[rec] = k
        rec += 1
    return STATUS_OK, n_steps, rec, 0.0


@njit(cache=True)
def pde_rk4(
    x0,            # (n_cells, n)
    k0,            # (n_faces,) face diffusion coefficients
    coeffs, comp_idx, powers,
    B,             # (n, p)
    C,             # (p, n)
    gains,         # (n_faces,) adaptation gain sampled at faces
    inv_h, dt, n_steps, record_every, bound, adapt,
    snaps_x, snaps_k,
):
    nc, n = x0.shape
    nf = k0.shape[0]
    p = C.shape[0]

    x = x0.copy()
    k = k0.copy()
    sx = np.empty((4, nc, n))
    sk = np.empty((4, nf))
    xs = np.empty((nc, n))
    ks = np.empty(nf)
    y = np.empty((nc, p))
    g = np.empty((nf, p))

    rec = 0
    snaps_x[rec] = x
    snaps_k[rec] = k
    rec += 1

    for step in range(1, n_steps + 1):
        for stage in range(4):
            if stage == 0:
                for i in range(nc):
                    for d in range(n):
                        xs[i, d] = x[i, d]
                for f in range(nf):
                    ks[f] = k[f]
            else:
                c = 0.5 * dt if stage < 3 else dt
                s = stage - 1
                for i in range(nc):
                    for d in range(n):
                        xs[i, d] = x[i, d] + c * sx[s, i, d]
                for f in range(nf):
                    ks[f] = k[f] + c * sk[s, f]

            for i in range(nc):
                for q in range(p):
                    acc = 0.0
                    for d in range(n):
                        acc += C[q, d] * xs[i, d]
                    y[i, q] = acc
            for f in range(nf):
                for q in range(p):
                    g[f, q] = (y[f + 1, q] - y[f, q]) * inv_h

            for i in range(nc):
                for d in range(n):
                    sx[stage, i, d] = 0.0
            _poly_add_into(sx[stage], xs, coeffs, comp_idx, powers)

            # flux-form divergence with zero-flux ghost faces (Neumann)
            for i in range(nc):
                for q in range(p):
                    div = 0.0
                    if i < nf:
                        div += ks[i] * g[i, q]
                    if i > 0:
                        div -= ks[i - 1] * g[i - 1, q]
                    div *= inv_h
                    for d in range(n):
                        sx[stage, i, d] += B[d, q] * div

            for f in range(nf):
                acc = 0.0
                for q in range(p):
                    acc += g[f, q] * g[f, q]
                sk[stage, f] = gains[f] * acc if adapt else 0.0

        c6 = dt / 6.0
        for i in range(nc):
            for d in range(n):
                x[i, d] += c6 * (
                    sx[0, i, d] + 2.0 * (sx[1, i, d] + sx[2, i, d]) + sx[3, i, d]
                )
        for f in range(nf):
            k[f] += c6 * (sk[0, f] + 2.0 * (sk[1, f] + sk[2, f]) + sk[3, f])

        ok = True
        for i in range(nc):
            for d in range(n):
                if not (np.abs(x[i, d]) <= bound):
                    ok = False
        if not ok:
            status, worst = _classify(x, bound)
            return status, step, rec, worst

        if step % record_every == 0:
            snaps_x[rec] = x
            snaps_k[rec] = k
            rec += 1

    if n_steps % record_every != 0:
        snaps_x[rec] = x
        snaps_k[rec] = k
        rec += 1
    return STATUS_OK, n_steps, rec, 0.0
