"""Trajectory and report serialization.

CSV records are RFC-4180 style with a mandatory header row and floats at 17
significant digits, so a written record reparses to the exact same doubles.
JSON trajectory files carry {meta, columns, rows, status}; plot files are
two-column CSV series extracted per requested variable pair.
"""

import csv
import json
from pathlib import Path

import numpy as np


def _fmt(value):
    return f"{float(value):.17g}"


def trajectory_columns(traj, state_names):
    names = list(state_names)
    if len(names) != traj.states.shape[1]:
        names = [f"x{i}" for i in range(traj.states.shape[1])]
    return ["t"] + names + list(traj.monitors.keys())


def trajectory_rows(traj, state_names):
    columns = trajectory_columns(traj, state_names)
    monitor_series = [traj.monitors[k] for k in traj.monitors]
    rows = []
    for idx, t in enumerate(traj.times):
        row = [t] + list(traj.states[idx]) + [series[idx] for series in monitor_series]
        rows.append(row)
    return columns, rows


def write_trajectory_csv(path, traj, state_names):
    columns, rows = trajectory_rows(traj, state_names)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return Path(path)


def write_trajectory_json(path, traj, state_names, meta=None):
    columns, rows = trajectory_rows(traj, state_names)
    payload = {
        "meta": meta or {},
        "columns": columns,
        "rows": [[float(v) for v in row] for row in rows],
        "status": traj.status,
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=1)
        handle.write("\n")
    return Path(path)


def read_trajectory_json(path):
    with open(path) as handle:
        return json.load(handle)


def write_report_json(path, report):
    with open(path, "w") as handle:
        json.dump(report, handle, indent=1, default=_json_default)
        handle.write("\n")
    return Path(path)


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"cannot serialize {type(value)}")


def series_for(columns, rows, name):
    if name not in columns:
        raise KeyError(f"no column '{name}'; available: {', '.join(columns)}")
    idx = columns.index(name)
    return [row[idx] for row in rows]


def write_plot_csv(path, columns, rows, pair):
    a, b = pair
    xs = series_for(columns, rows, a)
    ys = series_for(columns, rows, b)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([a, b])
        for x, y in zip(xs, ys):
            writer.writerow([_fmt(x), _fmt(y)])
    return Path(path)


def write_plot_svg(path, columns, rows, pair, size=480, margin=24):
    """Minimal vector rendering of one two-column series as a polyline."""
    a, b = pair
    xs = np.array(series_for(columns, rows, a), dtype=float)
    ys = np.array(series_for(columns, rows, b), dtype=float)
    finite = np.isfinite(xs) & np.isfinite(ys)
    xs, ys = xs[finite], ys[finite]

    def scaled(vals):
        lo, hi = float(np.min(vals)), float(np.max(vals))
        span = hi - lo if hi > lo else 1.0
        return (vals - lo) / span * (size - 2 * margin) + margin

    px = scaled(xs)
    py = size - scaled(ys)      # svg y grows downward
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">\n'
        f'<rect width="{size}" height="{size}" fill="white"/>\n'
        f'<polyline points="{points}" fill="none" stroke="black" stroke-width="1"/>\n'
        f'<text x="{size // 2}" y="{size - 4}" text-anchor="middle" '
        f'font-size="12">{a} vs {b}</text>\n</svg>\n'
    )
    with open(path, "w") as handle:
        handle.write(svg)
    return Path(path)
