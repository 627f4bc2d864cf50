#!/usr/bin/env python3
"""Barbell experiment: with and without weight adaptation.

Runs the two barbell fixtures, prints final node states side by side,
and lists the adapted link weights in descending order so the bridge
link's dominance is visible. Pass --out-dir to also keep the CSV logs.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from adaptive_sync import cli, integrate, scenario_io, sync_error

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=None,
                        help="also write the full CSV logs here")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the fixture's initial-condition seed")
    args = parser.parse_args()

    logs = {}
    for name in ("barbell_no_adaptation", "barbell_adaptive"):
        doc = scenario_io.load_scenario(FIXTURES / f"{name}.json")
        sc = scenario_io.build_ode_scenario(doc, seed_override=args.seed)
        logs[name] = integrate(sc)

    off = logs["barbell_no_adaptation"]
    on = logs["barbell_adaptive"]
    print("node   x(0)        final (no adaptation)  final (adaptive)")
    for i in range(8):
        print(f"{i + 1:3d}  {off.x[0, i, 0]:+9.4f}        {off.x[-1, i, 0]:+12.6f}"
              f"      {on.x[-1, i, 0]:+12.6f}")
    err_off = sync_error(off.x[-1], off.scenario.channels).sum()
    err_on = sync_error(on.x[-1], on.scenario.channels).sum()
    print(f"\nfinal sync error: {err_off:.3e} (off)  vs  {err_on:.3e} (adaptive)")

    ch = on.scenario.channels[0]
    finals = sorted(
        zip(ch.graph.link_labels(), on.k[0][-1]), key=lambda kv: -kv[1]
    )
    print("\nadapted link weights (descending):")
    for (i, j), v in finals:
        tag = "   <- bridge" if (i, j) == (4, 5) else ""
        print(f"  k_{i}_{j} = {v:8.4f}{tag}")

    if args.out_dir is not None:
        for name in logs:
            code = cli.main([
                "run", str(FIXTURES / f"{name}.json"),
                "--out-dir", str(args.out_dir / name), "--quiet",
            ])
            if code == 0:
                print(f"wrote {args.out_dir / name}")


if __name__ == "__main__":
    main()
