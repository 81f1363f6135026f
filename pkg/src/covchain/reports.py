"""Inequality reports and their CSV/JSON serialisation."""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field


def fmt(x):
    """Decimal text with 17 significant digits (round-trips a double)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class BoundReport:
    """One instance of an inequality ``lhs <= rhs``.

    ``hard`` reports fail the verification suite when ``passed`` is false;
    soft reports only record a measured value (``passed`` is then always
    true).  ``slack`` is ``rhs - lhs`` unless a ratio is more meaningful,
    in which case the producer sets it explicitly.
    """

    name: str
    lhs: float
    rhs: float
    passed: bool
    context: dict = field(default_factory=dict)
    slack: float = None
    hard: bool = True
    low_confidence: bool = False

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        if self.slack is None:
            self.slack = self.rhs - self.lhs
        self.passed = bool(self.passed)

    def row(self):
        ctx = json.dumps(_plain(self.context), sort_keys=True, separators=(",", ":"))
        return [self.name, fmt(self.lhs), fmt(self.rhs), fmt(self.slack), fmt(self.passed),
                fmt(self.hard), fmt(self.low_confidence), ctx]

    def to_dict(self):
        d = asdict(self)
        d["context"] = _plain(self.context)
        return d


def check(name, lhs, rhs, tol=0.0, **context):
    """Build a hard report for ``lhs <= rhs + tol``."""
    return BoundReport(name, lhs, rhs, lhs <= rhs + tol, dict(context, tol=tol))


def _plain(obj):
    """Convert numpy scalars/arrays inside ``obj`` to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


HEADER = ["name", "lhs", "rhs", "slack", "passed", "hard", "low_confidence", "context"]


def to_csv(reports, header=True):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(HEADER)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def write_csv(path, reports):
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(reports))


def summarize(reports):
    """Pass counts and rows grouped by report name."""
    by_name = {}
    for r in reports:
        by_name.setdefault(r.name, []).append(r.to_dict())
    hard = [r for r in reports if r.hard]
    return {
        "total": len(reports),
        "hard": len(hard),
        "hard_passed": sum(r.passed for r in hard),
        "hard_failed": sum(not r.passed for r in hard),
        "soft": len(reports) - len(hard),
        "low_confidence": sum(r.low_confidence for r in reports),
        "rows": by_name,
    }
