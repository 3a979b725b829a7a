"""Structured pass/fail records for inequality checks.

Every checker in the toolkit evaluates an inequality "lhs <= rhs" on a grid
of evaluation points and reports per-point slack ``rhs - lhs``.  A check
passes when every slack clears the scale-relative threshold
``-tol * (1 + scale)``, where ``scale = max(|lhs|, |rhs|)`` at that point;
both sides of the inequalities span several orders of magnitude across
parameter sweeps, so an absolute threshold would be meaningless.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Iterable

DEFAULT_TOL = 1e-6


def _json_safe(x: Any) -> Any:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
    return x


def _json_restore(x: Any) -> Any:
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    if x == "nan":
        return math.nan
    return x


@dataclass
class CheckPoint:
    """One evaluation point of an inequality check."""

    point: dict
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        if math.isinf(self.rhs) and self.rhs > 0:
            return math.inf
        if math.isinf(self.lhs) and self.lhs < 0:
            return math.inf
        return self.rhs - self.lhs

    @property
    def scale(self) -> float:
        vals = [abs(v) for v in (self.lhs, self.rhs) if math.isfinite(v)]
        return max(vals) if vals else 0.0

    def to_dict(self) -> dict:
        return {
            "point": {k: _json_safe(v) for k, v in self.point.items()},
            "lhs": _json_safe(self.lhs),
            "rhs": _json_safe(self.rhs),
            "slack": _json_safe(self.slack),
        }


@dataclass
class VerificationReport:
    """Outcome of one inequality verification.

    ``worst_slack`` is the minimum slack over all evaluation points and
    ``scale`` the corresponding point's magnitude; ``passed`` is equivalent
    to ``worst_slack >= -tol * (1 + scale)`` holding at every point.
    """

    name: str
    params: dict
    grid: list
    details: list[CheckPoint]
    tol: float
    worst_slack: float = math.inf
    scale: float = 0.0
    passed: bool = True
    runtime: float = 0.0
    notes: list[str] = field(default_factory=list)

    @classmethod
    def from_points(
        cls,
        name: str,
        params: dict,
        grid: Iterable,
        points: Iterable[CheckPoint],
        tol: float = DEFAULT_TOL,
        runtime: float = 0.0,
        notes: list[str] | None = None,
    ) -> "VerificationReport":
        pts = list(points)
        worst = math.inf
        scale = 0.0
        ok = True
        for p in pts:
            s = p.slack
            if s < -tol * (1.0 + p.scale):
                ok = False
            if s < worst:
                worst = s
                scale = p.scale
        return cls(
            name=name,
            params=params,
            grid=list(grid),
            details=pts,
            tol=tol,
            worst_slack=worst,
            scale=scale,
            passed=ok,
            runtime=runtime,
            notes=notes or [],
        )

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: worst_slack={self.worst_slack:.3e} "
            f"(tol={self.tol:.1e}, points={len(self.details)})"
        )

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "params": {k: _json_safe(v) for k, v in self.params.items()},
            "grid": [_json_safe(g) for g in self.grid],
            "worst_slack": _json_safe(self.worst_slack),
            "scale": _json_safe(self.scale),
            "tol": self.tol,
            "pass": self.passed,
            "runtime": self.runtime,
            "notes": list(self.notes),
            "details": [p.to_dict() for p in self.details],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "VerificationReport":
        pts = [
            CheckPoint(
                point={k: _json_restore(v) for k, v in p["point"].items()},
                lhs=_json_restore(p["lhs"]),
                rhs=_json_restore(p["rhs"]),
            )
            for p in d["details"]
        ]
        return cls(
            name=d["name"],
            params={k: _json_restore(v) for k, v in d["params"].items()},
            grid=[_json_restore(g) for g in d["grid"]],
            details=pts,
            tol=d["tol"],
            worst_slack=_json_restore(d["worst_slack"]),
            scale=_json_restore(d.get("scale", 0.0)),
            passed=d["pass"],
            runtime=d.get("runtime", 0.0),
            notes=list(d.get("notes", [])),
        )


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_report_json(report: VerificationReport, path: str) -> None:
    write_atomic(path, json.dumps(report.to_json_dict(), indent=2))


def write_report_csv(report: VerificationReport, path: str) -> None:
    """One CSV row per evaluation point."""
    keys: list[str] = []
    for p in report.details:
        for k in p.point:
            if k not in keys:
                keys.append(k)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(keys + ["lhs", "rhs", "slack"])
            for p in report.details:
                w.writerow([p.point.get(k, "") for k in keys] + [p.lhs, p.rhs, p.slack])
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
