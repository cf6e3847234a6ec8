"""JSON document format for systems, GKZ data, and reduction plans.

A document is a JSON object with three fields::

    {"kind": "...", "vars": {"coords": [...], "params": [...]}, "payload": {...}}

Expression strings in payloads use the kernel grammar.  Integer matrices
are arrays of arrays; slice assignments map 1-based v indices to
expression strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from projlaplace.gkz import GkzData, ReductionPlan, cayley, ExponentData
from projlaplace.hyper2 import HyperbolicEq
from projlaplace.rank4 import AsymptoticSystem, ConjugateSystem, GeneralSystem
from projlaplace.symexpr import VarTable

__all__ = ["Document", "DocumentError", "load_document", "parse_document"]

_KINDS = ("hyperbolic", "general", "asymptotic", "conjugate", "gkz", "plan", "appell-params")

_SYSTEM_FIELDS = {
    "hyperbolic": ("a", "b", "c"),
    "general": ("ell", "a", "b", "p", "m", "c", "f", "q"),
    "asymptotic": ("b", "c", "p", "q"),
    "conjugate": ("a", "b", "c", "q", "m", "n", "r"),
}


class DocumentError(ValueError):
    """Malformed document: missing fields or unparseable payload."""


@dataclass(frozen=True)
class Document:
    kind: str
    table: VarTable
    value: object


def _require(payload: dict, field: str):
    if field not in payload:
        raise DocumentError(f"payload field {field!r} is required")
    return payload[field]


def parse_document(obj: dict) -> Document:
    if not isinstance(obj, dict):
        raise DocumentError("document must be a JSON object")
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise DocumentError(f"unknown document kind {kind!r}")
    vars_obj = obj.get("vars") or {}
    try:
        table = VarTable(
            coords=tuple(vars_obj.get("coords", ())),
            params=tuple(vars_obj.get("params", ())),
        )
    except ValueError as err:
        raise DocumentError(f"bad vars block: {err}") from err
    payload = obj.get("payload") or {}
    try:
        if kind in _SYSTEM_FIELDS:
            fields = {name: table.parse(str(_require(payload, name))) for name in _SYSTEM_FIELDS[kind]}
            ctor = {
                "hyperbolic": HyperbolicEq,
                "general": GeneralSystem,
                "asymptotic": AsymptoticSystem,
                "conjugate": ConjugateSystem,
            }[kind]
            return Document(kind=kind, table=table, value=ctor(**fields))
        if kind == "gkz":
            blocks = _require(payload, "blocks")
            k = int(_require(payload, "k"))
            data = ExponentData(blocks=tuple(tuple(tuple(int(e) for e in row) for row in blk) for blk in blocks), k=k)
            gamma = tuple(table.parse(str(g)) for g in _require(payload, "gamma"))
            if "lattice" in payload:
                lattice = tuple(tuple(int(e) for e in vec) for vec in payload["lattice"])
            else:
                from projlaplace.gkz import lattice_basis

                lattice = tuple(tuple(v) for v in lattice_basis(cayley(data)))
            gkz = GkzData(A=cayley(data), gamma=gamma, lattice=lattice, m=data.m, k=data.k)
            return Document(kind=kind, table=table, value=gkz)
        if kind == "plan":
            defs = tuple((str(name), int(row)) for name, row in _require(payload, "variables"))
            slice_map = {}
            for key, value in _require(payload, "slice").items():
                slice_map[int(key) - 1] = table.parse(str(value))
            return Document(kind=kind, table=table, value=ReductionPlan(variable_defs=defs, slice=slice_map))
        if kind == "appell-params":
            family = str(_require(payload, "family"))
            values = {str(k): float(v) for k, v in _require(payload, "values").items()}
            return Document(kind=kind, table=table, value=(family, values))
    except DocumentError:
        raise
    except (ValueError, ZeroDivisionError, TypeError, KeyError) as err:
        raise DocumentError(f"bad {kind} payload: {err}") from err
    raise DocumentError(f"unhandled document kind {kind!r}")


def load_document(path: str) -> Document:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise DocumentError(f"cannot read document {path}: {err}") from err
    return parse_document(obj)
