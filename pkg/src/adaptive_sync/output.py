"""Deterministic CSV and summary emission for finished runs.

All floats are written with 17 significant digits, '.' decimal
separator, and LF line endings, so identical runs produce byte-identical
files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import metrics as metrics_mod
from . import pde as pde_mod
from .certificate import Certificate, CertificationReport
from .graphs import is_connected, lambda2
from .network import TrajectoryLog
from .pde import PdeTrajectoryLog


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def link_label(channel_no: int, pair: tuple[int, int]) -> str:
    return f"k{channel_no}_{pair[0]}_{pair[1]}"


def weight_columns(log: TrajectoryLog) -> list[tuple[int, int, str]]:
    """(channel index, link index, column label) in serialization order."""
    cols = []
    for q, ch in enumerate(log.scenario.channels):
        for idx, pair in enumerate(ch.graph.link_labels()):
            cols.append((q, idx, link_label(q + 1, pair)))
    return cols


def write_ode_csvs(log: TrajectoryLog, out_dir: Path, cert: Certificate | None) -> list:
    """states.csv, weights.csv, metrics.csv; returns the metrics series."""
    N = log.scenario.n_nodes
    n = log.scenario.field.dim
    header = ["t"] + [f"x_{i + 1}_{d + 1}" for i in range(N) for d in range(n)]
    write_csv(
        out_dir / "states.csv",
        header,
        ([log.t[m]] + list(log.x[m].reshape(-1)) for m in range(len(log.t))),
    )

    cols = weight_columns(log)
    header = ["t"] + [label for (_, _, label) in cols]
    write_csv(
        out_dir / "weights.csv",
        header,
        ([log.t[m]] + [log.k[q][m, idx] for (q, idx, _) in cols] for m in range(len(log.t))),
    )

    series = metrics_mod.metrics_series(log, cert)
    m_channels = len(log.scenario.channels)
    header = (
        ["t", "sync_err_total"]
        + [f"sync_err_{q + 1}" for q in range(m_channels)]
        + ["V", "max_state", "in_box"]
    )
    write_csv(
        out_dir / "metrics.csv",
        header,
        (
            [s.t, s.sync_err_total]
            + list(s.sync_err)
            + [s.lyapunov, s.max_state, s.in_box]
            for s in series
        ),
    )
    return series


def write_pde_csvs(log: PdeTrajectoryLog, out_dir: Path, cert: Certificate | None):
    """profiles.csv, diffusion.csv, pde_metrics.csv; returns (sync, mass, V)."""
    s = log.scenario
    nc, n = s.grid.n_cells, s.field.dim
    header = ["t"] + [f"x_{m + 1}_{d + 1}" for m in range(nc) for d in range(n)]
    write_csv(
        out_dir / "profiles.csv",
        header,
        ([log.t[m]] + list(log.x[m].reshape(-1)) for m in range(len(log.t))),
    )
    header = ["t"] + [f"k_{f + 1}" for f in range(s.grid.n_faces)]
    write_csv(
        out_dir / "diffusion.csv",
        header,
        ([log.t[m]] + list(log.k[m]) for m in range(len(log.t))),
    )
    P = cert.P if cert is not None else None
    kstar = None
    if cert is not None:
        kstar = metrics_mod.KSTAR_MARGIN * cert.theta / (
            2.0 * pde_mod.discrete_poincare_lambda2(s.grid)
        )
    sync, mass, V = pde_mod.pde_metrics_series(log, P=P, kstar=kstar)
    header = ["t", "sync_err"] + [f"mass_{d + 1}" for d in range(n)] + ["V"]
    write_csv(
        out_dir / "pde_metrics.csv",
        header,
        ([log.t[m], sync[m]] + list(mass[m]) + [V[m]] for m in range(len(log.t))),
    )
    return sync, mass, V


def _cert_lines(report: CertificationReport | None, failure: str | None) -> list[str]:
    if failure is not None:
        return [f"certificate: FAIL ({failure})"]
    if report is None:
        return ["certificate: not provided"]
    ineq = report.inequality
    loc = ",".join(fmt(v) for v in np.atleast_1d(ineq.worst_x))
    return [
        "certificate: pass",
        f"  structure: symmetry residual={fmt(report.structure.symmetry_residual)}"
        f" min_eig={fmt(report.structure.min_eigenvalue)}"
        f" coupling residual={fmt(report.structure.coupling_residual)}",
        f"  inequality: worst margin={fmt(ineq.worst_margin)} at x=[{loc}]"
        f" over {ineq.n_samples} samples",
    ]


def write_ode_summary(
    log: TrajectoryLog,
    out_dir: Path,
    series,
    cert: Certificate | None,
    cert_report: CertificationReport | None,
    cert_failure: str | None,
) -> dict:
    lines = ["kind: ode"]
    sc = log.scenario
    lines.append(f"nodes: {sc.n_nodes}")
    lines.append(
        f"time: t_end={fmt(sc.t_end)} dt={fmt(sc.dt)} record_every={sc.record_every}"
        f" adaptation={'on' if sc.adaptation_enabled else 'off'}"
    )
    theta = cert.theta if cert is not None else None
    for q, ch in enumerate(sc.channels):
        lam = lambda2(ch.graph)
        line = (
            f"channel {q + 1}: N={ch.graph.n_nodes} M={ch.graph.n_links}"
            f" connected={'yes' if is_connected(ch.graph) else 'no'}"
            f" lambda2={fmt(lam)}"
        )
        if theta is not None and lam > 0:
            line += f" kstar={fmt(theta / (2 * lam))}"
        lines.append(line)
    lines.extend(_cert_lines(cert_report, cert_failure))

    final = series[-1]
    lines.append(f"final sync error: {fmt(final.sync_err_total)}")
    V = np.array([s.lyapunov for s in series])
    if np.all(np.isfinite(V)):
        inside = np.array([s.in_box for s in series])
        start = int(np.argmax(inside)) if inside.any() else len(V)
        dV = np.diff(V[start:]) if len(V) - start > 1 else np.zeros(1)
        worst = float(dV.max()) if dV.size else 0.0
        verdict = "ok" if worst <= 1e-8 else "WARNING (transient increase)"
        lines.append(f"lyapunov descent: max step {fmt(worst)} [{verdict}]")
    cols = weight_columns(log)
    finals = [(label, float(log.k[q][-1, idx])) for (q, idx, label) in cols]
    finals.sort(key=lambda item: (-item[1], item[0]))
    lines.append("final weights (descending):")
    for label, val in finals:
        lines.append(f"  {label} = {fmt(val)}")
    guard = metrics_mod.boundedness_guard(log, box=cert.box if cert else None)
    lines.append(f"boundedness: {guard}")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    return {
        "final_sync_err": final.sync_err_total,
        "max_weight_label": finals[0][0] if finals else "",
        "max_weight": finals[0][1] if finals else float("nan"),
    }


def write_pde_summary(
    log: PdeTrajectoryLog,
    out_dir: Path,
    sync: np.ndarray,
    mass: np.ndarray,
    cert: Certificate | None,
    cert_report: CertificationReport | None,
    cert_failure: str | None,
) -> dict:
    s = log.scenario
    lines = ["kind: pde"]
    lines.append(f"cells: {s.grid.n_cells}")
    lines.append(f"faces: {s.grid.n_faces}")
    lines.append(
        f"time: t_end={fmt(s.t_end)} dt={fmt(s.dt)} record_every={s.record_every}"
        f" adaptation={'on' if s.adaptation_enabled else 'off'}"
    )
    lam = pde_mod.discrete_poincare_lambda2(s.grid)
    line = f"grid: length={fmt(s.grid.length)} h={fmt(s.grid.h)} lambda2={fmt(lam)}"
    if cert is not None:
        line += f" kstar={fmt(cert.theta / (2 * lam))}"
    lines.append(line)
    lines.extend(_cert_lines(cert_report, cert_failure))
    lines.append(f"final sync error: {fmt(sync[-1])}")
    f_max = int(np.argmax(log.k[-1]))
    lines.append(f"max diffusion coefficient: k_{f_max + 1} = {fmt(log.k[-1, f_max])}")
    drift = float(np.abs(mass - mass[0]).max())
    lines.append(f"mass drift: {fmt(drift)}")
    lines.append(f"max |x|: {fmt(float(np.abs(log.x).max()))}")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    return {
        "final_sync_err": float(sync[-1]),
        "max_weight_label": f"k_{f_max + 1}",
        "max_weight": float(log.k[-1, f_max]),
    }
