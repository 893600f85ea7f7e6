"""
Reading and writing SFT, potential, suspension and result files.

JSON is written with sorted keys and a fixed layout so identical inputs give
byte-identical files. Non-finite floats are written as the strings "nan",
"inf" and "-inf".
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import ValidationError

from src.dynamics.potentials import OneSidedPotential, TwoSidedPotential
from src.dynamics.sft import TransitionStructure
from src.dynamics.suspension import SuspensionSpec
from src.errors import InputError
from src.schemas.files import InlineSFT, PotentialFile, SuspensionFile


# ---------------------------------------------------------------------------
# SFT text format
# ---------------------------------------------------------------------------

def parse_sft(text: str) -> TransitionStructure:
    """First line ``n``, then ``n`` rows of ``n`` characters ``0``/``1``."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty SFT file")
    try:
        n = int(lines[0])
    except ValueError:
        raise InputError(f"first SFT line must be the alphabet size, got {lines[0]!r}") from None
    rows = lines[1:]
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise InputError(f"SFT needs {n} rows of {n} characters")
    return TransitionStructure.from_rows(rows)


def format_sft(ts: TransitionStructure) -> str:
    return "\n".join([str(ts.n), *ts.rows()]) + "\n"


def read_sft(path: str | Path) -> TransitionStructure:
    return parse_sft(_read_text(path))


def write_sft(path: str | Path, ts: TransitionStructure) -> None:
    Path(path).write_text(format_sft(ts), encoding="utf-8")


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------

def potential_from_model(ts: TransitionStructure, model: PotentialFile):
    table = {tuple(e.word): e.value for e in model.entries}
    if model.kind == "one_sided":
        if model.depth_or_radius < 1:
            raise InputError("one-sided depth must be >= 1")
        return OneSidedPotential(ts, model.depth_or_radius, table)
    return TwoSidedPotential(ts, model.depth_or_radius, table)


def potential_to_dict(pot: OneSidedPotential | TwoSidedPotential) -> dict:
    return {
        "kind": pot.kind,
        "depth_or_radius": pot.depth if isinstance(pot, OneSidedPotential) else pot.radius,
        "entries": [{"word": list(w), "value": v} for w, v in pot.items()],
    }


def read_potential(path: str | Path, ts: TransitionStructure):
    return potential_from_model(ts, _validated(PotentialFile, _read_json(path), path))


def write_potential(path: str | Path, pot) -> None:
    write_json(path, potential_to_dict(pot))


# ---------------------------------------------------------------------------
# Suspension specs
# ---------------------------------------------------------------------------

def suspension_from_dict(data: dict, source: str | Path = "<suspension>") -> SuspensionSpec:
    model = _validated(SuspensionFile, data, source)
    if len(model.sft.rows) != model.sft.n:
        raise InputError(f"inline SFT declares n={model.sft.n} but has {len(model.sft.rows)} rows")
    ts = TransitionStructure.from_rows(model.sft.rows)
    roof = potential_from_model(ts, model.roof)
    if not isinstance(roof, OneSidedPotential):
        raise InputError("roof must be a one-sided potential")
    return SuspensionSpec(ts, roof)


def suspension_to_dict(spec: SuspensionSpec) -> dict:
    return {
        "sft": InlineSFT(n=spec.ts.n, rows=spec.ts.rows()).model_dump(),
        "roof": potential_to_dict(spec.roof),
    }


def read_suspension(path: str | Path) -> SuspensionSpec:
    return suspension_from_dict(_read_json(path), path)


# ---------------------------------------------------------------------------
# Generic JSON / CSV
# ---------------------------------------------------------------------------

def _clean(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])


def _read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _validated(schema, data: Any, source) -> Any:
    if not isinstance(data, dict):
        raise InputError(f"{source}: expected a JSON object")
    try:
        return schema(**data)
    except ValidationError as exc:
        errors = "; ".join(f"{'.'.join(str(l) for l in e['loc'])}: {e['msg']}" for e in exc.errors())
        raise InputError(f"{source}: {errors}") from exc
