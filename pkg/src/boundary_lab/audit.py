"""Audit reports and their CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

AUDIT_COLUMNS = ("audit", "model", "param_json", "measured_min", "measured_max",
                 "bound_low", "bound_high", "pass")


def fmt(x) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def _jsonable(v):
    if isinstance(v, float):
        return float(f"{v:.17g}")
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if hasattr(v, "item"):
        return v.item()
    return v


@dataclass
class AuditRow:
    params: dict
    measured_min: float
    measured_max: float
    bound_low: float = -math.inf
    bound_high: float = math.inf

    @property
    def passed(self) -> bool:
        return (self.bound_low <= self.measured_min and self.measured_max <= self.bound_high
                and not math.isnan(self.measured_min) and not math.isnan(self.measured_max))


@dataclass
class AuditReport:
    """Measured constants of one named experiment, one row per parameter point.

    ``tables`` carries auxiliary CSV tables (convergence sequences, spectra,
    spherical profiles) as ``name -> (columns, rows)``; ``extra`` holds
    structured measurements that tests inspect directly.
    """

    audit: str
    model: str
    rows: list[AuditRow] = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add(self, params, measured_min, measured_max=None, low=-math.inf, high=math.inf):
        if measured_max is None:
            measured_max = measured_min
        row = AuditRow(dict(params), float(measured_min), float(measured_max), float(low), float(high))
        self.rows.append(row)
        return row

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def measured_min(self):
        return min(r.measured_min for r in self.rows)

    @property
    def measured_max(self):
        return max(r.measured_max for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(AUDIT_COLUMNS)
        for r in self.rows:
            w.writerow([self.audit, self.model,
                        json.dumps(_jsonable(r.params), sort_keys=True),
                        fmt(r.measured_min), fmt(r.measured_max),
                        fmt(r.bound_low), fmt(r.bound_high), fmt(r.passed)])
        return buf.getvalue()

    def table_csv(self, name) -> str:
        columns, rows = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(x) for x in row])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "audit": self.audit,
            "model": self.model,
            "pass": self.passed,
            "rows": len(self.rows),
            "measured_min": _jsonable(self.measured_min) if self.rows else None,
            "measured_max": _jsonable(self.measured_max) if self.rows else None,
        }


def merge_reports(audit: str, model: str, reports) -> AuditReport:
    """Concatenate rows and same-named tables of several reports of one experiment."""
    out = AuditReport(audit, model)
    for rep in reports:
        out.rows.extend(rep.rows)
        for name, (cols, rows) in rep.tables.items():
            if name in out.tables:
                out.tables[name][1].extend(rows)
            else:
                out.tables[name] = (cols, list(rows))
        for k, v in rep.extra.items():
            out.extra.setdefault(k, []).append(v)
    return out
