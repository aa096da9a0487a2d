"""CSV/JSON writers and run manifests."""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__


def frac_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def jsonable(v: Any) -> Any:
    """Exact values as strings; everything else left to json."""
    if isinstance(v, bool) or v is None or isinstance(v, (str, float)):
        return v
    if isinstance(v, Fraction):
        return frac_str(v)
    if isinstance(v, int):
        # big integers lose precision in most JSON readers
        return v if abs(v) < 2 ** 53 else str(v)
    if isinstance(v, Mapping):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return str(v)


def csv_text(rows: Sequence[Mapping[str, Any]], fieldnames: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    write_csv_stream(buf, rows, fieldnames)
    return buf.getvalue()


def write_csv_stream(fh, rows: Sequence[Mapping[str, Any]],
                     fieldnames: Sequence[str] | None = None) -> None:
    fieldnames = list(fieldnames or (rows[0].keys() if rows else []))
    w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k, "")) for k in fieldnames})


def _cell(v: Any) -> Any:
    if isinstance(v, Fraction):
        return frac_str(v)
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path: str | Path, rows: Sequence[Mapping[str, Any]],
              fieldnames: Sequence[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        write_csv_stream(fh, rows, fieldnames)
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(data), indent=2) + "\n")
    return path


def json_text(data: Any) -> str:
    return json.dumps(jsonable(data), indent=2)


@dataclass
class RunManifest:
    command: str
    flags: dict[str, Any]
    seed: int | None = None
    version: str = __version__
    wall_time: float = 0.0
    outputs: list[str] = field(default_factory=list)
    argv: list[str] = field(default_factory=lambda: list(sys.argv[1:]))
    started: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))

    def to_json(self) -> dict:
        return jsonable(asdict(self))


def manifest_path(out: str | Path) -> Path:
    return Path(f"{out}.manifest.json")


def write_manifest(m: RunManifest, out: str | Path) -> Path:
    path = manifest_path(out)
    path.write_text(json.dumps(m.to_json(), indent=2) + "\n")
    return path


def with_suffix_json(out: str | Path) -> Path:
    out = Path(out)
    return out.with_suffix(".json") if out.suffix != ".json" else out.with_suffix(".mirror.json")
