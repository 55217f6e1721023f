"""Check records and report serialization (JSON, CSV, plain-text table)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

THEOREMS = (
    "Christensen",
    "MainThm12",
    "BalanRho",
    "Prop33Chain",
    "Lemma21Reduction",
    "Ex33Items",
    "Prop34Items",
    "CgeqAinvHalf",
)

CSV_HEADER = ["theorem", "eps", "trial", "seed", "input_C", "input_A", "input_B",
              "input_a0", "predicted", "measured", "precondition", "pass"]


@dataclass
class TheoremCheck:
    """One predicted-versus-measured comparison.

    ``passed`` is ``None`` whenever the precondition does not hold.  Advisory
    rows are reported but never decide the exit status.
    """

    theorem: str
    name: str
    predicted: Any
    measured: Any
    tolerance: float
    passed: Optional[bool]
    precondition_satisfied: bool = True
    inputs: dict = field(default_factory=dict)
    seed: Optional[int] = None
    eps: Optional[float] = None
    trial: Optional[int] = None
    advisory: bool = False

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem id {self.theorem!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not self.precondition_satisfied:
            self.passed = None

    @property
    def failed(self) -> bool:
        return self.precondition_satisfied and not self.advisory and self.passed is False

    def key(self):
        return (self.theorem, _sortable(self.eps), _sortable(self.trial), self.name)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "name": self.name,
            "inputs": {k: _jsonable(v) for k, v in sorted(self.inputs.items())},
            "predicted": _jsonable(self.predicted),
            "measured": _jsonable(self.measured),
            "tolerance": self.tolerance,
            "precondition": self.precondition_satisfied,
            "pass": self.passed,
            "advisory": self.advisory,
            "seed": self.seed,
            "eps": self.eps,
            "trial": self.trial,
        }

    def csv_row(self) -> list:
        return [
            self.theorem,
            _cell(self.eps),
            _cell(self.trial),
            _cell(self.seed),
            _cell(self.inputs.get("C")),
            _cell(self.inputs.get("A")),
            _cell(self.inputs.get("B")),
            _cell(self.inputs.get("a0")),
            _cell(self.predicted),
            _cell(self.measured),
            "true" if self.precondition_satisfied else "false",
            "" if self.passed is None else ("true" if self.passed else "false"),
        ]


def _sortable(v):
    return (0, 0) if v is None else (1, v)


def _jsonable(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def _cell(v) -> str:
    """CSV cell; pairs are joined with ';' and floats use shortest round-trip form."""
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) or hasattr(v, "item"):
        v = float(v)
        return repr(v)
    return str(v)


def checks_to_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in checks:
        w.writerow(c.csv_row())
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def render_table(checks) -> str:
    rows = [("theorem", "check", "predicted", "measured", "status")]
    for c in checks:
        if not c.precondition_satisfied:
            status = "n/a"
        elif c.passed:
            status = "pass"
        else:
            status = "FAIL"
        if c.advisory and c.precondition_satisfied:
            status = "consistent" if c.passed else "inconsistent"
        rows.append((c.theorem, c.name, _short(c.predicted), _short(c.measured), status))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _short(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float) or hasattr(v, "item"):
        return f"{float(v):.6g}"
    return str(v)
