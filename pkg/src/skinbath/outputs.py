"""Delimited data emission.

All files are UTF-8 with a header row, '.' decimal separator and scientific
notation carrying 17 significant digits, so fixed-step runs round-trip byte
for byte.  The JSON variant mirrors the table as {"columns": [...],
"data": [[...], ...]}.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .evolve import Trajectory, extract_observables


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".16e")


def write_table(directory: Path, stem: str, header: list[str], rows, formats=("csv",)) -> list[str]:
    """Write one logical table in every requested format; returns file names."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    rows = list(rows)
    if "csv" in formats:
        name = f"{stem}.csv"
        with open(directory / name, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(x) for x in row])
        written.append(name)
    if "json" in formats:
        name = f"{stem}.json"
        payload = {
            "columns": header,
            "data": [[x if isinstance(x, str) else _json_num(x) for x in row] for row in rows],
        }
        with open(directory / name, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")
        written.append(name)
    return written


def _json_num(x):
    v = float(x)
    if math.isnan(v) or math.isinf(v):
        return _fmt(v)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return v


def trajectory_rows(traj: Trajectory):
    """Header and rows for trajectory tables:
    t, P_<label> (linear + log10) per emitter, stored_norm, log_scale."""
    obs = extract_observables(traj, "population")
    header = ["t"]
    for label in traj.labels:
        header += [f"P_{label}", f"log10_P_{label}"]
    header += ["stored_norm", "log_scale"]
    rows = []
    for i, t in enumerate(traj.times):
        row = [t]
        for j in range(len(traj.labels)):
            row += [obs.linear[i, j], obs.log10[i, j]]
        row += [traj.stored_norm[i], traj.log_scale[i]]
        rows.append(row)
    return header, rows


def fields_rows(traj: Trajectory):
    """Long-format per-site intensities: t, n, I_n, log10_I_n."""
    obs = extract_observables(traj, "intensity")
    header = ["t", "n", "I_n", "log10_I_n"]
    rows = []
    m = obs.linear.shape[1]
    for i, t in enumerate(traj.times):
        for n in range(m):
            rows.append([t, n, obs.linear[i, n], obs.log10[i, n]])
    return header, rows


def spectrum_rows(k, energies):
    header = ["k", "ReE", "ImE"]
    rows = [[float(ki), ei.real, ei.imag] for ki, ei in zip(k, energies)]
    return header, rows


def profile_rows(lattice_profile: np.ndarray):
    header = ["n", "abs_psi", "phase"]
    rows = [
        [n, abs(v), math.atan2(v.imag, v.real)] for n, v in enumerate(lattice_profile)
    ]
    return header, rows


def selfenergy_rows(deltas, channels: dict[str, np.ndarray]):
    header = ["delta"]
    for name in channels:
        header += [f"Re_sigma_{name}", f"Im_sigma_{name}"]
    rows = []
    for i, d in enumerate(deltas):
        row = [float(d)]
        for series in channels.values():
            row += [series[i].real, series[i].imag]
        rows.append(row)
    return header, rows


def surface_rows(sample):
    header = ["branch", "r", "theta", "u", "v", "w", "residual"]
    rows = [
        [int(b), r, th, u, v, w, res]
        for b, r, th, u, v, w, res in zip(
            sample.branch, sample.r, sample.theta, sample.u, sample.v, sample.w,
            sample.residuals,
        )
    ]
    return header, rows


def site_rows(hyperbolic_map):
    header = ["n", "x_n"]
    rows = [[int(n), x] for n, x in zip(hyperbolic_map.n, hyperbolic_map.x)]
    return header, rows
