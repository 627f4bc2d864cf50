"""Command-line entry point: run, check-certificate, graph-info, sweep.

Exit codes: 0 ok, 2 certificate failure, 3 divergence, 64 bad usage or
scenario schema error, 74 I/O error. The ADAPTIVE_SYNC_LOG environment
variable (DEBUG/INFO/WARNING/ERROR) controls log verbosity.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import output, pde, scenario_io
from .certificate import (
    CertificationReport,
    certify,
    check_jacobian_inequality,
    check_structure,
)
from .dynamics import polynomial
from .errors import (
    AdaptiveSyncError,
    DisconnectedGraphError,
    DivergedError,
    InequalityFailedError,
    NonFiniteStateError,
    SchemaError,
    StructureFailedError,
    UnknownParameterError,
)
from .graphs import is_connected, lambda2
from .network import integrate

EXIT_OK = 0
EXIT_CERT_FAILED = 2
EXIT_DIVERGED = 3
EXIT_SCHEMA = 64
EXIT_IO = 74

SETTLED_SYNC_THRESHOLD = 1e-3

log = logging.getLogger("adaptive_sync")


class _Parser(argparse.ArgumentParser):
    # argparse's default usage-error exit code collides with the
    # certificate-failure code; remap to the schema/usage code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_SCHEMA, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adaptive-sync", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write CSV logs")
    run.add_argument("scenario", type=Path)
    run.add_argument("--out-dir", type=Path, required=True)
    run.add_argument("--require-cert", action="store_true",
                     help="fail (exit 2) unless the certificate checks pass")
    run.add_argument("--quiet", action="store_true")

    chk = sub.add_parser("check-certificate", help="verify the scenario's certificate")
    chk.add_argument("scenario", type=Path)
    chk.add_argument("--grid", type=int, default=41,
                     help="lattice points per dimension (default 41)")
    chk.add_argument("--seed", type=int, default=0,
                     help="seed for the random interior samples")

    gi = sub.add_parser("graph-info", help="print N, M, connectivity, lambda2, k*")
    gi.add_argument("scenario", type=Path)
    gi.add_argument("--theta", type=float, default=None,
                    help="coupling-bound numerator (defaults to the certificate's theta)")

    sw = sub.add_parser("sweep", help="rerun a scenario over a list of parameter values")
    sw.add_argument("scenario", type=Path)
    sw.add_argument("--param", required=True,
                    help="dotted path of a numeric scalar, e.g. adaptation.default_gain")
    sw.add_argument("--values", required=True,
                    help="comma-separated list of values")
    sw.add_argument("--out-dir", type=Path, required=True)
    sw.add_argument("--parallel", type=int, default=1, metavar="N",
                    help="number of concurrent worker processes (default 1)")
    sw.add_argument("--quiet", action="store_true")
    return parser


def _setup_logging(quiet: bool) -> None:
    level_name = os.environ.get("ADAPTIVE_SYNC_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    if quiet:
        level = max(level, logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _evaluate_certificate(doc: dict, grid: int = 41, seed: int = 0):
    """(cert, report, failure_message); report/failure are None-or-set."""
    cert = scenario_io.build_certificate(doc)
    if cert is None:
        return None, None, None
    vf = polynomial(scenario_io.field_from(doc))
    if doc["kind"] == "ode":
        graphs = [scenario_io.graph_from(ch["graph"]) for ch in doc["channels"]]
    else:
        graphs = []
    try:
        if graphs:
            report = certify(cert, vf, graphs, grid=grid, seed=seed)
        else:
            # PDE: matrix checks plus the grid's spectral gap
            structure = check_structure(cert)
            if not structure.passed:
                raise StructureFailedError(structure)
            ineq = check_jacobian_inequality(cert, vf, grid=grid, seed=seed)
            if not ineq.passed:
                raise InequalityFailedError(ineq)
            lam = pde.discrete_poincare_lambda2(
                pde.PdeGrid(float(doc["grid"]["length"]), int(doc["grid"]["n_cells"]))
            )
            report = CertificationReport(
                cert.theta, (lam,), (cert.theta / (2 * lam),), structure, ineq
            )
        return cert, report, None
    except (StructureFailedError, InequalityFailedError) as e:
        return cert, None, str(e.report)
    except DisconnectedGraphError:
        return cert, None, "graph disconnected: coupling threshold undefined"


def _simulate_to_dir(doc: dict, out_dir: Path, grid: int = 41, seed: int = 0) -> dict:
    """Integrate and write all outputs; returns the summary dict."""
    cert, report, failure = _evaluate_certificate(doc, grid=grid, seed=seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    log.info("simulating %s scenario -> %s", doc["kind"], out_dir)
    if doc["kind"] == "ode":
        run_log = integrate(scenario_io.build_ode_scenario(doc))
        series = output.write_ode_csvs(run_log, out_dir, cert)
        info = output.write_ode_summary(run_log, out_dir, series, cert, report, failure)
        sync = np.array([s.sync_err_total for s in series])
        t = run_log.t
    else:
        run_log = pde.integrate_pde(scenario_io.build_pde_scenario(doc))
        sync, mass, _ = output.write_pde_csvs(run_log, out_dir, cert)
        info = output.write_pde_summary(run_log, out_dir, sync, mass, cert, report, failure)
        t = run_log.t
    settled = t[sync < SETTLED_SYNC_THRESHOLD]
    info["settled_time"] = float(settled[0]) if settled.size else float("nan")
    info["cert_failure"] = failure
    return info


def _cmd_run(args) -> int:
    doc = scenario_io.load_scenario(args.scenario)
    log.info("loaded scenario %s (kind=%s)", args.scenario, doc["kind"])
    if args.require_cert:
        cert, report, failure = _evaluate_certificate(doc)
        if cert is None:
            print("certificate required but scenario has none", file=sys.stderr)
            return EXIT_CERT_FAILED
        if failure is not None:
            print(f"certificate FAILED: {failure}", file=sys.stderr)
            return EXIT_CERT_FAILED
    info = _simulate_to_dir(doc, args.out_dir)
    if not args.quiet:
        print(f"wrote {args.out_dir}/summary.txt")
        print(f"final sync error: {info['final_sync_err']:.6g}")
        print(f"largest final weight: {info['max_weight_label']} = {info['max_weight']:.6g}")
        if info["cert_failure"] is not None:
            print(f"certificate FAILED: {info['cert_failure']}")
    return EXIT_OK


def _cmd_check_certificate(args) -> int:
    doc = scenario_io.load_scenario(args.scenario)
    if "certificate" not in doc:
        print("scenario has no certificate section", file=sys.stderr)
        return EXIT_SCHEMA
    cert = scenario_io.build_certificate(doc)
    vf = polynomial(scenario_io.field_from(doc))
    structure = check_structure(cert)
    inequality = check_jacobian_inequality(cert, vf, grid=args.grid, seed=args.seed)
    print(f"structure ({'pass' if structure.passed else 'FAIL'}): {structure}")
    print(f"inequality ({'pass' if inequality.passed else 'FAIL'}): {inequality}")
    if doc["kind"] == "ode":
        for q, ch in enumerate(doc["channels"]):
            g = scenario_io.graph_from(ch["graph"])
            lam = lambda2(g)
            line = f"channel {q + 1}: lambda2={lam:.12g}"
            if lam > 0:
                line += f" k*={cert.theta / (2 * lam):.12g}"
            print(line)
    else:
        grid = pde.PdeGrid(float(doc["grid"]["length"]), int(doc["grid"]["n_cells"]))
        lam = pde.discrete_poincare_lambda2(grid)
        print(f"grid: lambda2={lam:.12g} k*={cert.theta / (2 * lam):.12g}")
    if structure.passed and inequality.passed:
        print("PASS")
        return EXIT_OK
    print("FAIL")
    return EXIT_CERT_FAILED


def _cmd_graph_info(args) -> int:
    doc = scenario_io.load_scenario(args.scenario)
    theta = args.theta
    if theta is None and "certificate" in doc:
        theta = float(doc["certificate"]["theta"])
    if doc["kind"] == "pde":
        grid = pde.PdeGrid(float(doc["grid"]["length"]), int(doc["grid"]["n_cells"]))
        lam = pde.discrete_poincare_lambda2(grid)
        line = (
            f"grid: cells={grid.n_cells} faces={grid.n_faces} "
            f"length={grid.length:g} lambda2={lam:.12g}"
        )
        if theta is not None:
            line += f" k*(theta={theta:g})={theta / (2 * lam):.12g}"
        print(line)
        return EXIT_OK
    for q, ch in enumerate(doc["channels"]):
        g = scenario_io.graph_from(ch["graph"])
        connected = is_connected(g)
        lam = lambda2(g)
        line = (
            f"channel {q + 1}: N={g.n_nodes} M={g.n_links} "
            f"connected={'yes' if connected else 'no'} lambda2={lam:.12g}"
        )
        if theta is not None and connected:
            line += f" k*(theta={theta:g})={theta / (2 * lam):.12g}"
        print(line)
    return EXIT_OK


def _sweep_worker(payload):
    doc, out_dir = payload
    return _simulate_to_dir(doc, Path(out_dir))


def _cmd_sweep(args) -> int:
    doc = scenario_io.load_scenario(args.scenario)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        print(f"--values must be comma-separated numbers: {args.values!r}", file=sys.stderr)
        return EXIT_SCHEMA
    if not values:
        print("--values is empty", file=sys.stderr)
        return EXIT_SCHEMA
    docs = [scenario_io.set_scenario_param(doc, args.param, v) for v in values]
    run_dirs = [args.out_dir / f"run_{i:03d}" for i in range(len(values))]
    payloads = list(zip(docs, map(str, run_dirs)))
    if args.parallel > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.parallel) as pool:
            infos = list(pool.map(_sweep_worker, payloads))
    else:
        infos = [_sweep_worker(p) for p in payloads]
    args.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for v, info in zip(values, infos):
        rows.append([
            v,
            info["final_sync_err"],
            info["max_weight"],
            info["max_weight_label"],
            info["settled_time"],
        ])
    output.write_csv(
        args.out_dir / "sweep.csv",
        ["value", "final_sync_err", "max_final_weight", "max_weight_link", "settled_time"],
        rows,
    )
    if not args.quiet:
        print(f"wrote {args.out_dir}/sweep.csv ({len(values)} runs)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _setup_logging(getattr(args, "quiet", False))
    handlers = {
        "run": _cmd_run,
        "check-certificate": _cmd_check_certificate,
        "graph-info": _cmd_graph_info,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except (SchemaError, UnknownParameterError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except (DivergedError, NonFiniteStateError) as e:
        print(f"simulation halted: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except AdaptiveSyncError as e:
        # anything else the library rejects is a scenario inconsistency
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
