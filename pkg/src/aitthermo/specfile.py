"""Machine spec files.

A spec is a JSON object with a ``kind`` field::

    {"kind": "table", "name": "B", "domain": ["1", "01"], "outputs": ["", "0"]}
    {"kind": "spectrum", "name": "O", "rule": {"name": "unary"},
     "tail_majorant": {"name": "geometric"}}
    {"kind": "spectrum", "name": "small", "entries": {"1": 1, "3": 2}}
    {"kind": "universal", "name": "U", "budget": 65536}
    {"kind": "composite", "factors": ["B", "heavy_tail(3,2)", {...inline spec...}]}

``outputs`` is optional (every program then outputs the empty string).  A
composite factor is either a builtin name or an inline spec.
"""
from __future__ import annotations

import json
import re
from collections.abc import Mapping
from pathlib import Path

from .compose import CompositeMachine, compose
from .core import spectrum_from_dict
from .errors import SpecParseError, UnknownMachine
from .machines import (
    DEFAULT_BUDGET,
    Machine,
    SpectrumMachine,
    TableMachine,
    UniversalMachine,
    builtin,
)

_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_builtin(ref: str, budget: int | None = None) -> Machine:
    """``B``, ``O``, ``heavy_tail``, ``heavy_tail(3,2)``, ``U`` or ``U(1000)``."""
    m = _CALL.match(ref)
    if not m:
        raise UnknownMachine(f"unknown machine {ref!r}")
    name, args = m.group(1), m.group(2)
    try:
        params = [int(a) for a in args.split(",")] if args and args.strip() else []
    except ValueError:
        raise SpecParseError(f"bad parameters in {ref!r}") from None
    if name == "U":
        if params:
            return builtin("U", budget=params[0])
        return builtin("U", budget=DEFAULT_BUDGET if budget is None else budget)
    try:
        return builtin(name, *params)
    except (TypeError, ValueError) as exc:
        raise SpecParseError(str(exc)) from exc


def machine_from_dict(d, budget: int | None = None) -> Machine:
    if isinstance(d, str):
        return parse_builtin(d, budget)
    if not isinstance(d, Mapping):
        raise SpecParseError("a machine spec must be an object or a builtin name")
    kind = d.get("kind")
    name = d.get("name") or ""
    try:
        if kind == "table":
            domain = d["domain"]
            return TableMachine.from_domain(name or "table", domain, d.get("outputs"))
        if kind == "spectrum":
            return SpectrumMachine(name or "spectrum", spectrum_from_dict(d))
        if kind == "universal":
            tables = tuple(machine_from_dict(t) for t in d.get("tables", ()))
            b = d.get("budget", DEFAULT_BUDGET if budget is None else budget)
            return UniversalMachine(name or "U", tables, int(b))
        if kind == "composite":
            factors = [machine_from_dict(f, budget) for f in d["factors"]]
            m = compose(factors)
            if name and isinstance(m, CompositeMachine):
                m = CompositeMachine(m.factors, name=name)
            return m
    except KeyError as exc:
        raise SpecParseError(f"{kind} spec is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecParseError):
            raise
        raise SpecParseError(f"bad {kind} spec: {exc}") from exc
    raise SpecParseError(f"unknown machine kind {kind!r}")


def _builtin_ref(m: Machine) -> str | None:
    """Name under which ``parse_builtin`` rebuilds ``m`` exactly, if any."""
    if m.name == "B" and isinstance(m, TableMachine) and m.table == builtin("B").table:
        return "B"
    if isinstance(m, SpectrumMachine) and (m.name in ("O", "heavy_tail") or m.name.startswith("heavy_tail(")):
        try:
            if m.to_dict() == parse_builtin(m.name).to_dict():
                return m.name
        except (SpecParseError, UnknownMachine):
            pass
    return None


def machine_to_dict(m: Machine) -> dict:
    """Spec for ``m``; composite factors that are builtins are written by name."""
    if isinstance(m, CompositeMachine):
        return {"kind": "composite", "name": m.name,
                "factors": [_builtin_ref(f) or machine_to_dict(f) for f in m.factors]}
    return m.to_dict()


def dumps(m: Machine) -> str:
    return json.dumps(machine_to_dict(m), indent=2, ensure_ascii=False) + "\n"


def loads(text: str, budget: int | None = None) -> Machine:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"not valid JSON: {exc}") from exc
    return machine_from_dict(d, budget)


def load(path, budget: int | None = None) -> Machine:
    return loads(Path(path).read_text(encoding="utf-8"), budget)


def dump(m: Machine, path) -> None:
    Path(path).write_text(dumps(m), encoding="utf-8")


def resolve(ref: str, budget: int | None = None) -> Machine:
    """A builtin name, or a path to a spec file."""
    p = Path(ref)
    if p.suffix == ".json" or p.exists():
        return load(p, budget)
    return parse_builtin(ref, budget)
