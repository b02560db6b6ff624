"""Run configuration and machine-readable reports."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import mpmath

from .cache import default_cache_path

FORMATS = ("text", "json", "csv")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    scan_bound: int = 10_000
    stretch_bound: int = 100_000
    precision_guard_bits: int = 64
    cache_path: Path | None = None
    output_format: str = "text"
    workers: int = 1

    def __post_init__(self):
        if self.scan_bound < 1 or self.stretch_bound < 1:
            raise UsageError("scan bounds must be positive")
        if self.precision_guard_bits < 32:
            raise UsageError("precision_guard_bits must be at least 32")
        if self.output_format not in FORMATS:
            raise UsageError(f"unknown output format {self.output_format!r}")
        if self.workers < 1:
            raise UsageError("workers must be positive")
        if self.cache_path is None:
            self.cache_path = default_cache_path()

    def public(self) -> dict:
        """The part of the config that can change results."""
        return {
            "precision_guard_bits": self.precision_guard_bits,
            "scan_bound": self.scan_bound,
            "stretch_bound": self.stretch_bound,
        }


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, float, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 30)
    if isinstance(obj, mpmath.mpc):
        return {"re": mpmath.nstr(obj.real, 30), "im": mpmath.nstr(obj.imag, 30)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in obj]
        return sorted(items, key=json.dumps) if isinstance(obj, (set, frozenset)) else items
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class Report:
    command: str
    inputs: dict
    outputs: dict
    passed: bool = True
    config: dict = field(default_factory=dict)
    columns: list[str] | None = None
    rows: list[list] | None = None
    text: str = ""
    timing: float | None = field(default=None, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        d.pop("text")
        if not include_timing:
            d.pop("timing")
        return to_jsonable(d)

    @classmethod
    def from_json(cls, data: str | bytes) -> Report:
        d = json.loads(data)
        return cls(**d)


def emit_report(report: Report, fmt: str, include_timing: bool = False) -> bytes:
    if fmt == "json":
        body = json.dumps(report.to_dict(include_timing), sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        if report.rows is None:
            raise UsageError(f"{report.command} has no tabular output; csv is unavailable")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        for row in to_jsonable(report.rows):
            w.writerow(row)
        body = buf.getvalue()
    elif fmt == "text":
        body = report.text if report.text.endswith("\n") else report.text + "\n"
        if include_timing and report.timing is not None:
            body += f"# {report.timing:.2f}s\n"
    else:
        raise UsageError(f"unknown output format {fmt!r}")
    return body.encode()
