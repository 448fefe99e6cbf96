"""CSV and key-value emission.

Floats are written with 17 significant digits so a file round-trips to the
same doubles; columns come in a fixed order.  Runtimes are printed to the
console only, which keeps files from repeated runs byte-identical.

Files
-----
results.csv   check, status, kind (measured | tolerance), quantity, value
summary.txt   key=value lines: counts and one status line per check
field.csv     t, x0..x{d-1}, value, grad0..grad{d-1}; one row per slice and grid node
kato.csv      quantity, eps, value; one row per eps and quantity
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(fmt(u) for u in v)
    return str(v)


def write_table(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def result_rows(results):
    for r in results:
        for kind, block in (("measured", r.measured), ("tolerance", r.tolerances)):
            for q in block:
                yield (r.name, r.status, kind, q, block[q])


def write_results(results, out_dir) -> list[Path]:
    """results.csv plus summary.txt."""
    out = Path(out_dir)
    files = [write_table(out / "results.csv", ("check", "status", "kind", "quantity", "value"),
                         result_rows(results))]
    counts = {s: sum(r.status == s for r in results) for s in ("pass", "fail", "vacuous")}
    lines = [f"checks={len(results)}"] + [f"{s}={n}" for s, n in counts.items()]
    lines += [f"check.{r.name}={r.status}" for r in results]
    lines += [f"detail.{r.name}={r.detail.splitlines()[0]}" for r in results if r.detail]
    summary = out / "summary.txt"
    summary.write_text("\n".join(lines) + "\n")
    files.append(summary)
    return files


def field_rows(fld, source: int = 0):
    """Rows (t, x.., value, grad..) for one source; slices x grid nodes rows."""
    pts = fld.points
    for ti, t in enumerate(fld.times):
        val = fld.value[ti, source]
        grad = fld.grad[ti, source]
        for j in range(pts.shape[0]):
            yield (t, *pts[j], val[j], *grad[j])


def write_field(fld, path, source: int = 0) -> Path:
    d = fld.points.shape[1]
    header = ("t",) + tuple(f"x{i}" for i in range(d)) + ("value",) + tuple(f"grad{i}" for i in range(d))
    return write_table(path, header, field_rows(fld, source))


def write_decay(tables: dict, path) -> Path:
    """K(eps) tables keyed by quantity name; one row per eps each."""
    rows = [(name, e, v) for name, tab in tables.items() for e, v in tab.rows()]
    return write_table(path, ("quantity", "eps", "value"), rows)


def write_key_values(path, items: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{k}={fmt(v)}\n" for k, v in items.items()))
    return path


def console_line(r) -> str:
    head = f"{r.status.upper():8s} {r.name:18s} {r.runtime:8.1f}s"
    return head + (f"  {r.detail.splitlines()[0]}" if r.detail else "")
