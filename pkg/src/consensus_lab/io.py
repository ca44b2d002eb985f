"""File output for trajectories, diagnostics and reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import Trajectory
from .schedule import ConnectionSchedule


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trajectory_csv(traj: Trajectory, out_dir, stem: str = "trajectory") -> list[Path]:
    """One CSV per coordinate axis with columns ``t, x_1, ..., x_N``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for ax in range(traj.dim):
        name = f"{stem}.csv" if traj.dim == 1 else f"{stem}_axis{ax}.csv"
        path = out_dir / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"x_{j}" for j in range(1, traj.n_agents + 1)])
            for t, row in zip(traj.times, traj.axis(ax)):
                w.writerow([_fmt(t)] + [_fmt(v) for v in row])
        paths.append(path)
    return paths


def read_trajectory_csv(path) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data[:, 0], data[:, 1:, None])


def trajectory_to_dict(traj: Trajectory, step_log: bool = False) -> dict:
    out = {"times": traj.times.tolist(), "positions": traj.positions.tolist(),
           "n_agents": traj.n_agents, "dim": traj.dim}
    if step_log:
        out["steps"] = [{"t0": s.t0, "t1": s.t1, "generator": s.generator.tolist()}
                        for s in traj.steps]
    return out


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def write_diameter_csv(times, diameters, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "diameter"])
        for t, d in zip(times, diameters):
            w.writerow([_fmt(t), _fmt(d)])
    return path


def load_schedule(path) -> ConnectionSchedule:
    return ConnectionSchedule.from_dict(json.loads(Path(path).read_text()))
