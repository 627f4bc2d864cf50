#!/usr/bin/env python3
"""Regenerate the canonical scenario fixtures under fixtures/.

Fixture seeds are chosen so the random initial states contain both signs
(seed 0 additionally puts the two barbell clusters on opposite sides of
the saddle, which is what makes the bridge link accumulate the largest
weight).
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures"

BISTABLE = {"components": [[{"coeff": 1.0, "powers": [1]}, {"coeff": -1.0, "powers": [3]}]]}
BISTABLE_2D = {
    "components": [
        [{"coeff": 1.0, "powers": [1, 0]}, {"coeff": -1.0, "powers": [3, 0]}],
        [{"coeff": 1.0, "powers": [0, 1]}, {"coeff": -1.0, "powers": [0, 3]}],
    ]
}
ZERO_FIELD = {"components": [[]]}

BARBELL_LINKS = (
    [[a, b] for a in range(1, 5) for b in range(a + 1, 5)]
    + [[a, b] for a in range(5, 9) for b in range(a + 1, 9)]
    + [[4, 5]]
)
RING6 = [[1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [1, 6]]
STAR6 = [[1, 2], [1, 3], [1, 4], [1, 5], [1, 6]]


def barbell(adaptation: bool, theta: float) -> dict:
    return {
        "kind": "ode",
        "dynamics": BISTABLE,
        "channels": [
            {
                "graph": {"n_nodes": 8, "links": BARBELL_LINKS},
                "B": [[1.0]],
                "C": [[1.0]],
            }
        ],
        "certificate": {"P": [[1.0]], "theta": theta, "box": [[-3.0, 3.0]]},
        "initial": {"seed": 0, "low": -2.0, "high": 2.0},
        "time": {"t_end": 20.0, "dt": 0.001, "record_every": 10},
        "adaptation": {"enabled": adaptation, "default_gain": 1.0, "initial_weight": 0.0},
    }


def two_node_linear() -> dict:
    return {
        "kind": "ode",
        "dynamics": ZERO_FIELD,
        "channels": [
            {"graph": {"n_nodes": 2, "links": [[1, 2]]}, "B": [[1.0]], "C": [[1.0]]}
        ],
        "initial": [[1.0], [0.0]],
        "time": {"t_end": 10.0, "dt": 0.001, "record_every": 10},
        "adaptation": {"enabled": False, "default_gain": 0.0, "initial_weight": 1.0},
    }


def pde_bistable_split() -> dict:
    n_cells = 64
    profile = [[-1.0] if m < n_cells // 2 else [1.0] for m in range(n_cells)]
    return {
        "kind": "pde",
        "dynamics": BISTABLE,
        "grid": {"length": 1.0, "n_cells": n_cells},
        "B": [[1.0]],
        "C": [[1.0]],
        "gamma": 1.0,
        "certificate": {"P": [[1.0]], "theta": 2.0, "box": [[-3.0, 3.0]]},
        "initial": profile,
        "time": {"t_end": 30.0, "dt": 5e-05, "record_every": 4000},
        "adaptation": {"enabled": True, "initial_weight": 0.0},
    }


def multichannel_two_graph() -> dict:
    return {
        "kind": "ode",
        "dynamics": BISTABLE_2D,
        "channels": [
            {
                "graph": {"n_nodes": 6, "links": RING6},
                "B": [[1.0], [0.0]],
                "C": [[1.0, 0.0]],
            },
            {
                "graph": {"n_nodes": 6, "links": STAR6},
                "B": [[0.0], [1.0]],
                "C": [[0.0, 1.0]],
            },
        ],
        "certificate": {
            "P": [[1.0, 0.0], [0.0, 1.0]],
            "theta": 2.0,
            "box": [[-3.0, 3.0], [-3.0, 3.0]],
            "omegas": [1.0, 1.0],
        },
        "initial": {"seed": 3, "low": -2.0, "high": 2.0},
        "time": {"t_end": 20.0, "dt": 0.001, "record_every": 10},
        "adaptation": {"enabled": True, "default_gain": 1.0, "initial_weight": 0.0},
    }


FIXTURES = {
    "barbell_adaptive.json": barbell(True, 2.0),
    "barbell_no_adaptation.json": barbell(False, 2.0),
    "cert_fail_theta1.json": barbell(True, 1.0),
    "two_node_linear.json": two_node_linear(),
    "pde_bistable_split.json": pde_bistable_split(),
    "multichannel_two_graph.json": multichannel_two_graph(),
}


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for name, doc in FIXTURES.items():
        path = OUT / name
        path.write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
