"""Scenario files: JSON schema, validation, and construction of runnable
scenarios.

A scenario is a single JSON document; unknown keys are rejected at every
level so typos fail loudly before any computation. Seeded initial
conditions use the counter-based Philox generator keyed by the literal
seed, so the drawn values are reproducible across machines and runs.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator

from . import network, pde
from .certificate import Certificate, ChannelMatrices
from .dynamics import PolynomialField
from .errors import (
    AdaptiveSyncError,
    SchemaError,
    UnknownParameterError,
)
from .graphs import Graph, build_graph

_NUMBER = {"type": "number"}
_POS_NUMBER = {"type": "number", "exclusiveMinimum": 0}
_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": _NUMBER},
}
_TERM = {
    "type": "object",
    "properties": {
        "coeff": _NUMBER,
        "powers": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
    },
    "required": ["coeff", "powers"],
    "additionalProperties": False,
}
_DYNAMICS = {
    "type": "object",
    "properties": {
        "components": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _TERM}},
    },
    "required": ["components"],
    "additionalProperties": False,
}
_GRAPH = {
    "type": "object",
    "properties": {
        "n_nodes": {"type": "integer", "minimum": 1},
        "links": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "integer", "minimum": 1},
            },
        },
    },
    "required": ["n_nodes", "links"],
    "additionalProperties": False,
}
_SCALAR_OR_LIST = {
    "oneOf": [_NUMBER, {"type": "array", "minItems": 1, "items": _NUMBER}]
}
_CHANNEL = {
    "type": "object",
    "properties": {
        "graph": _GRAPH,
        "B": _MATRIX,
        "C": _MATRIX,
        "gains": _SCALAR_OR_LIST,
        "initial_weights": _SCALAR_OR_LIST,
    },
    "required": ["graph", "B", "C"],
    "additionalProperties": False,
}
_CERTIFICATE = {
    "type": "object",
    "properties": {
        "P": _MATRIX,
        "theta": _POS_NUMBER,
        "box": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUMBER},
        },
        "omegas": {"type": "array", "minItems": 1, "items": _POS_NUMBER},
    },
    "required": ["P", "theta", "box"],
    "additionalProperties": False,
}
_INITIAL = {
    "oneOf": [
        _MATRIX,
        {
            "type": "object",
            "properties": {"seed": {"type": "integer", "minimum": 0}, "low": _NUMBER, "high": _NUMBER},
            "required": ["seed", "low", "high"],
            "additionalProperties": False,
        },
    ]
}
_TIME = {
    "type": "object",
    "properties": {
        "t_end": {"type": "number", "minimum": 0},
        "dt": _POS_NUMBER,
        "record_every": {"type": "integer", "minimum": 1},
    },
    "required": ["t_end", "dt"],
    "additionalProperties": False,
}
_ADAPTATION = {
    "type": "object",
    "properties": {
        "enabled": {"type": "boolean"},
        "default_gain": {"type": "number", "minimum": 0},
        "initial_weight": _NUMBER,
    },
    "additionalProperties": False,
}
_GRID = {
    "type": "object",
    "properties": {
        "length": _POS_NUMBER,
        "n_cells": {"type": "integer", "minimum": 2},
    },
    "required": ["length", "n_cells"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "kind": {"enum": ["ode", "pde"]},
        "dynamics": _DYNAMICS,
        "certificate": _CERTIFICATE,
        "channels": {"type": "array", "minItems": 1, "items": _CHANNEL},
        "grid": _GRID,
        "B": _MATRIX,
        "C": _MATRIX,
        "gamma": _SCALAR_OR_LIST,
        "initial": _INITIAL,
        "time": _TIME,
        "adaptation": _ADAPTATION,
    },
    "required": ["kind", "dynamics", "initial", "time"],
    "additionalProperties": False,
}

_VALIDATOR = Draft202012Validator(SCENARIO_SCHEMA)

_ODE_ONLY = ("channels",)
_PDE_ONLY = ("grid", "B", "C", "gamma")


def validate_scenario(doc: dict) -> None:
    """Structural validation; raises SchemaError with the offending path."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"scenario invalid at {where}: {e.message}")
    kind = doc["kind"]
    if kind == "ode":
        if "channels" not in doc:
            raise SchemaError("ode scenario requires a 'channels' section")
        present = [k for k in _PDE_ONLY if k in doc]
        if present:
            raise SchemaError(f"keys {present} are only valid for kind 'pde'")
    else:
        missing = [k for k in _PDE_ONLY if k not in doc]
        if missing:
            raise SchemaError(f"pde scenario requires sections {missing}")
        if "channels" in doc:
            raise SchemaError("'channels' is only valid for kind 'ode'")


def load_scenario(path) -> dict:
    """Read and validate a scenario file. I/O errors propagate as OSError."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("scenario file must hold a JSON object")
    validate_scenario(doc)
    return doc


def field_from(doc: dict) -> PolynomialField:
    comps = [
        [(term["coeff"], term["powers"]) for term in comp]
        for comp in doc["dynamics"]["components"]
    ]
    return PolynomialField.from_lists(comps)


def _initial_array(doc: dict, rows: int, n: int, seed_override=None) -> np.ndarray:
    spec = doc["initial"]
    if isinstance(spec, dict):
        seed = int(spec["seed"]) if seed_override is None else int(seed_override)
        rng = np.random.Generator(np.random.Philox(seed))
        return rng.uniform(float(spec["low"]), float(spec["high"]), size=(rows, n))
    x0 = np.asarray(spec, dtype=float)
    if x0.shape != (rows, n):
        raise SchemaError(
            f"explicit initial state has shape {x0.shape}, expected ({rows}, {n})"
        )
    return x0


def _adaptation(doc: dict) -> tuple[bool, float, float]:
    ad = doc.get("adaptation", {})
    return (
        bool(ad.get("enabled", True)),
        float(ad.get("default_gain", 1.0)),
        float(ad.get("initial_weight", 0.0)),
    )


def _time(doc: dict) -> tuple[float, float, int]:
    tm = doc["time"]
    return float(tm["t_end"]), float(tm["dt"]), int(tm.get("record_every", 1))


def graph_from(gdoc: dict) -> Graph:
    return build_graph(int(gdoc["n_nodes"]), [tuple(l) for l in gdoc["links"]])


def build_ode_scenario(doc: dict, seed_override=None) -> network.Scenario:
    """Construct a runnable network scenario; wraps semantic errors
    (bad graphs, dimension mismatches) in SchemaError."""
    fld = field_from(doc)
    enabled, default_gain, initial_weight = _adaptation(doc)
    t_end, dt, record_every = _time(doc)
    try:
        channels = []
        for ch in doc["channels"]:
            channels.append(
                network.make_channel(
                    graph_from(ch["graph"]),
                    ch["B"],
                    ch["C"],
                    gains=ch.get("gains"),
                    initial_weights=ch.get("initial_weights"),
                    default_gain=default_gain,
                    initial_weight=initial_weight,
                )
            )
        N = channels[0].graph.n_nodes
        x0 = _initial_array(doc, N, fld.dim, seed_override)
        return network.Scenario(
            field=fld,
            channels=tuple(channels),
            x0=x0,
            t_end=t_end,
            dt=dt,
            record_every=record_every,
            adaptation_enabled=enabled,
        )
    except SchemaError:
        raise
    except (AdaptiveSyncError, ValueError) as e:
        raise SchemaError(f"scenario is structurally valid but inconsistent: {e}") from e


def build_pde_scenario(doc: dict, seed_override=None) -> pde.PdeScenario:
    fld = field_from(doc)
    enabled, _, initial_weight = _adaptation(doc)
    t_end, dt, record_every = _time(doc)
    try:
        grid = pde.PdeGrid(float(doc["grid"]["length"]), int(doc["grid"]["n_cells"]))
        gamma = doc["gamma"]
        gamma = (
            np.full(grid.n_faces, float(gamma))
            if np.isscalar(gamma)
            else np.asarray(gamma, dtype=float)
        )
        x0 = _initial_array(doc, grid.n_cells, fld.dim, seed_override)
        return pde.PdeScenario(
            field=fld,
            B=doc["B"],
            C=doc["C"],
            grid=grid,
            gamma=gamma,
            x0=x0,
            t_end=t_end,
            dt=dt,
            k0=np.full(grid.n_faces, initial_weight),
            record_every=record_every,
            adaptation_enabled=enabled,
        )
    except SchemaError:
        raise
    except (AdaptiveSyncError, ValueError) as e:
        raise SchemaError(f"scenario is structurally valid but inconsistent: {e}") from e


def build_certificate(doc: dict) -> Certificate | None:
    """Certificate from the scenario's own B/C structure, or None when the
    file carries no certificate section."""
    cdoc = doc.get("certificate")
    if cdoc is None:
        return None
    P = cdoc["P"]
    theta = float(cdoc["theta"])
    box = [tuple(iv) for iv in cdoc["box"]]
    try:
        if doc["kind"] == "ode":
            blocks = [
                (np.atleast_2d(np.asarray(ch["B"], float)),
                 np.atleast_2d(np.asarray(ch["C"], float)))
                for ch in doc["channels"]
            ]
        else:
            blocks = [(np.atleast_2d(np.asarray(doc["B"], float)),
                       np.atleast_2d(np.asarray(doc["C"], float)))]
        omegas = cdoc.get("omegas")
        if omegas is not None and len(omegas) != len(blocks):
            raise SchemaError(
                f"certificate lists {len(omegas)} omegas for {len(blocks)} channels"
            )
        if len(blocks) == 1 and omegas is None:
            return Certificate.single(P, theta, blocks[0][0], blocks[0][1], box)
        if omegas is None:
            omegas = [1.0] * len(blocks)
        chans = [
            ChannelMatrices(B=b, C=c, omega=float(w))
            for (b, c), w in zip(blocks, omegas)
        ]
        return Certificate.multi(P, theta, chans, box)
    except SchemaError:
        raise
    except (AdaptiveSyncError, ValueError) as e:
        raise SchemaError(f"certificate section inconsistent: {e}") from e


def set_scenario_param(doc: dict, dotted: str, value: float) -> dict:
    """Deep-copied scenario with one numeric scalar replaced.

    The dotted path may index lists, e.g. 'channels.0.gains'. The target
    must already be a number (not a list or object).
    """
    out = copy.deepcopy(doc)
    keys = dotted.split(".")
    node: Any = out
    for key in keys[:-1]:
        if isinstance(node, list):
            try:
                node = node[int(key)]
            except (ValueError, IndexError):
                raise UnknownParameterError(f"no element {key!r} along {dotted!r}")
        elif isinstance(node, dict) and key in node:
            node = node[key]
        else:
            raise UnknownParameterError(f"no key {key!r} along {dotted!r}")
    last = keys[-1]
    if isinstance(node, list):
        try:
            idx = int(last)
            old = node[idx]
        except (ValueError, IndexError):
            raise UnknownParameterError(f"no element {last!r} along {dotted!r}")
        if not isinstance(old, (int, float)) or isinstance(old, bool):
            raise UnknownParameterError(f"{dotted!r} is not a numeric scalar")
        node[idx] = value
    else:
        if not isinstance(node, dict) or last not in node:
            raise UnknownParameterError(f"no key {last!r} along {dotted!r}")
        old = node[last]
        if not isinstance(old, (int, float)) or isinstance(old, bool):
            raise UnknownParameterError(f"{dotted!r} is not a numeric scalar")
        node[last] = value
    validate_scenario(out)
    return out
