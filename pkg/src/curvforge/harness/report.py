"""CurvatureReport assembly and deterministic JSON/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

CSV_COLUMNS = ["check", "location", "measured", "expected", "tolerance", "relation", "pass"]


def _clean(x):
    """Non-finite floats become strings so the JSON stays strict."""
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


def versions():
    import numpy
    import scipy

    from .. import __version__
    return {"curvforge": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__}


def build_report(config, records, errors=()):
    """Records keep check-then-emission order; the summary is derived from them."""
    rows = [r.as_dict() for r in records]
    worst = {}
    for r in records:
        m = r.margin
        if r.check not in worst or m < worst[r.check]:
            worst[r.check] = m
    failed = sum(not r.passed for r in records)
    return _clean({
        "meta": {"config_hash": config.hash(), "seed": config.seed, "name": config.name,
                 "fixture": config.fixture, "versions": versions()},
        "records": rows,
        "errors": list(errors),
        "summary": {"total": len(rows), "passed": len(rows) - failed, "failed": failed,
                    "worst_margins": dict(sorted(worst.items()))},
    })


def report_passed(report):
    return report["summary"]["failed"] == 0 and not report["errors"]


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def records_csv(rows, extra=None):
    """CSV text with a stable header; ``extra`` names leading columns present in each row."""
    cols = list(extra or []) + CSV_COLUMNS
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_value(r.get(k)) for k in cols})
    return buf.getvalue()


def table_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_value(x) for x in r])
    return buf.getvalue()


def _csv_value(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(float(x))
    if hasattr(x, "item"):
        return _csv_value(x.item())
    return x


def write_outputs(out_dir, files):
    """Write ``{name: text}`` into ``out_dir`` (created on demand)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
