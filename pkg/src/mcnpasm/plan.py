"""Declarative assembly plans (YAML).

A plan is a mapping with ``version: 1`` and a ``steps`` list.  Each step
has an ``op`` and acts on named decks::

    version: 1
    steps:
      - {op: load, name: room, path: ./room.mcnp}
      - {op: rotate_y, deck: room, angle: 1, shift: [0, 400, 0]}
      - foreach: {var: d, values: [0, 30], steps: [
          {op: write, deck: room, path: "room_{d}.mcnp"}]}

Relative input paths resolve against the plan's directory; outputs go to
``output_dir`` (plan key), else to ``$MCNPASM_OUTPUT_DIR``, else next to
the plan.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import McnpError, PlanError
from .parser import read_deck, transform_from_entries

OUTPUT_ENV = "MCNPASM_OUTPUT_DIR"
PLAN_VERSION = 1


@dataclass
class PlanContext:
    base_dir: str
    output_dir: str
    decks: dict = field(default_factory=dict)
    written: list = field(default_factory=list)


def parse_cell_spec(spec) -> list[int]:
    """``"12-21"``, ``"1,3,5-7"`` or a list of ints."""
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        out = []
        for item in spec:
            out.extend(parse_cell_spec(item))
        return out
    out = []
    for part in str(spec).replace(" ", "").split(","):
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep:
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty cell range {part!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    return out


def _subst(value, env: dict):
    if isinstance(value, str):
        return value.format(**env) if env else value
    if isinstance(value, list):
        return [_subst(v, env) for v in value]
    if isinstance(value, dict):
        return {k: _subst(v, env) for k, v in value.items()}
    return value


def _num(v) -> float:
    return float(v)


def _vec(v, n=3) -> list[float]:
    if isinstance(v, str):
        v = v.replace(",", " ").split()
    vals = [float(x) for x in v]
    if len(vals) != n:
        raise ValueError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _deck(ctx: PlanContext, name):
    if name not in ctx.decks:
        raise KeyError(f"undefined deck handle {name!r}")
    return ctx.decks[name]


def _req(step: dict, key: str):
    if key not in step:
        raise KeyError(f"missing key {key!r}")
    return step[key]


def _run_step(ctx: PlanContext, step: dict) -> None:
    op = _req(step, "op")
    if op == "load":
        path = _req(step, "path")
        full = path if os.path.isabs(path) else os.path.join(ctx.base_dir, path)
        deck = read_deck(full)
        if deck.provenance.source_path == full and not deck.provenance.children:
            deck.provenance.source_path = path
        deck.source_path = path
        ctx.decks[_req(step, "name")] = deck
    elif op == "copy":
        ctx.decks[_req(step, "name")] = _deck(ctx, _req(step, "source")).copy()
    elif op == "translate":
        _deck(ctx, _req(step, "deck")).translate(_vec(_req(step, "vector")))
    elif op in ("rotate_x", "rotate_y", "rotate_z"):
        d = _deck(ctx, _req(step, "deck"))
        d.rotate(op[-1], _num(_req(step, "angle")), _vec(step.get("shift", [0, 0, 0])))
    elif op == "rotate_u":
        d = _deck(ctx, _req(step, "deck"))
        d.rotate_u(_vec(_req(step, "axis")), _num(_req(step, "angle")), _vec(step.get("shift", [0, 0, 0])))
    elif op == "transform_card":
        d = _deck(ctx, _req(step, "deck"))
        entries = _req(step, "entries")
        if isinstance(entries, str):
            entries = entries.replace(",", " ").split()
        vals = [float(x) for x in entries]
        if len(vals) not in (3, 12, 13):
            raise ValueError("transform_card needs 3, 12 or 13 entries")
        t, _, _ = transform_from_entries(vals, degrees=bool(step.get("degrees", False)))
        d.transform_by(t)
    elif op == "insert":
        host = _deck(ctx, _req(step, "host"))
        host.insert(_deck(ctx, _req(step, "guest")), step.get("location", "default"))
    elif op == "insert_cells":
        _deck(ctx, _req(step, "host")).insert_cells(_deck(ctx, _req(step, "guest")))
    elif op == "extract":
        src = _deck(ctx, _req(step, "deck"))
        ctx.decks[_req(step, "name")] = src.extract(parse_cell_spec(_req(step, "cells")))
    elif op == "renum":
        _deck(ctx, _req(step, "deck")).renum(step.get("cell"), step.get("surf"), step.get("trans"))
    elif op == "resolve_trcl":
        _deck(ctx, _req(step, "deck")).resolve_trcl(step.get("keep", ()))
    elif op == "add_card":
        lines = _req(step, "lines")
        _deck(ctx, _req(step, "deck")).add_card([lines] if isinstance(lines, str) else list(lines))
    elif op == "write":
        path = _req(step, "path")
        full = path if os.path.isabs(path) else os.path.join(ctx.output_dir, path)
        _deck(ctx, _req(step, "deck")).write(full)
        ctx.written.append(full)
    else:
        raise ValueError(f"unknown op {op!r}")


def _run_steps(ctx: PlanContext, steps, env: dict, prefix: str) -> None:
    if not isinstance(steps, list):
        raise PlanError("steps must be a list", prefix.rstrip(".") or None)
    for i, raw in enumerate(steps, 1):
        label = f"{prefix}{i}"
        if not isinstance(raw, dict):
            raise PlanError("step must be a mapping", label)
        if "foreach" in raw:
            spec = raw["foreach"]
            try:
                var = spec["var"]
                values = spec["values"]
                body = spec["steps"]
            except (KeyError, TypeError):
                raise PlanError("foreach needs var, values and steps", label) from None
            for v in values:
                _run_steps(ctx, body, {**env, var: v}, f"{label}[{var}={v}].")
            continue
        step = _subst(raw, env)
        try:
            _run_step(ctx, step)
        except PlanError:
            raise
        except (McnpError, KeyError, ValueError, TypeError, OSError) as e:
            msg = e.args[0] if isinstance(e, KeyError) and e.args else e
            raise PlanError(f"{step.get('op', '?')}: {msg}", label) from e


def load_plan(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        plan = yaml.safe_load(fh)
    return plan if plan is not None else {}


def run_plan(plan: Any, base_dir: str = ".", output_dir: str = None) -> list[str]:
    """Execute a plan (mapping or YAML file path); returns written file paths."""
    if isinstance(plan, (str, os.PathLike)):
        base_dir = os.path.dirname(os.path.abspath(plan))
        plan = load_plan(plan)
    if not isinstance(plan, dict):
        raise PlanError("plan must be a mapping")
    version = plan.get("version", PLAN_VERSION)
    if version != PLAN_VERSION:
        raise PlanError(f"unsupported plan version {version!r}")
    out = output_dir or plan.get("output_dir") or os.environ.get(OUTPUT_ENV) or "."
    if not os.path.isabs(out):
        out = os.path.join(base_dir, out)
    ctx = PlanContext(base_dir, out)
    _run_steps(ctx, plan.get("steps") or [], {}, "")
    return ctx.written

