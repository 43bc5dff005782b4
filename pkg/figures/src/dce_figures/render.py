"""Figure rendering from dce-lab CSV files.

Input schemas (from the dce-lab CLI):
  sweep CSV      header: epsilon,ratio,lambda_max,unstable
  trajectory CSV header: t,re_a1,im_a1,...,re_ak,im_ak,n1,...,nk

fig2  stability map: one boundary curve per sweep CSV, log-scale ratio
      axis, unstable region shaded above each curve.
fig3  lowest-mode growth: first CSV drawn solid, second dashed.
fig4  modes 1..3 of one trajectory CSV.
fig5  lowest mode of one trajectory CSV.

No physics is recomputed here: the boundary curve is extracted from the
classification column, and trajectories are plotted as stored.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5")

_SWEEP_HEADER = ["epsilon", "ratio", "lambda_max", "unstable"]


class SchemaError(ValueError):
    """Input file does not match the documented CSV schemas."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    input_paths: tuple[str, ...]
    output_path: str
    log_y: bool = True

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise SchemaError(f"unknown figure id {self.figure_id!r}; "
                              f"expected one of {FIGURE_IDS}")
        object.__setattr__(self, "input_paths", tuple(self.input_paths))
        expected = {"fig2": 2, "fig3": 2, "fig4": 1, "fig5": 1}[self.figure_id]
        if len(self.input_paths) != expected:
            raise SchemaError(f"{self.figure_id} needs {expected} input "
                              f"CSV(s), got {len(self.input_paths)}")


@dataclass(frozen=True)
class RenderSummary:
    """What was drawn; lets callers assert on the rendering deterministically."""

    figure_id: str
    output_path: str
    series_points: tuple[int, ...]
    width_px: int
    height_px: int
    curves: dict = field(default_factory=dict, compare=False)


def read_sweep(path: str):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != _SWEEP_HEADER:
            raise SchemaError(f"{path}: expected header {_SWEEP_HEADER}, "
                              f"got {header}")
        eps, ratio, lam, unstable = [], [], [], []
        for row in reader:
            if len(row) != 4:
                raise SchemaError(f"{path}: malformed row {row!r}")
            eps.append(float(row[0]))
            ratio.append(float(row[1]))
            lam.append(float(row[2]))
            unstable.append(row[3] == "true")
    if not eps:
        raise SchemaError(f"{path}: no data rows")
    return (np.asarray(eps), np.asarray(ratio), np.asarray(lam),
            np.asarray(unstable))


def read_trajectory(path: str, modes: int):
    """Times and the first ``modes`` photon-proxy columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        needed = ["t"] + [f"n{i}" for i in range(1, modes + 1)]
        missing = [c for c in needed if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}; "
                              f"header is {header}")
        idx = [header.index(c) for c in needed]
        rows = [[float(row[i]) for i in idx] for row in reader]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows)
    return data[:, 0], data[:, 1:]


def boundary_curve(path: str):
    """Per-epsilon smallest ratio classified unstable in a sweep CSV.

    Purely data-driven: epsilon values keep file order, and epsilons whose
    whole column is stable are dropped.
    """
    eps, ratio, _, unstable = read_sweep(path)
    xs, ys = [], []
    seen = []
    for e in eps:
        if not any(abs(e - s) < 1e-15 for s in seen):
            seen.append(e)
    for e in seen:
        mask = (eps == e) & unstable
        if np.any(mask):
            xs.append(e)
            ys.append(float(np.min(ratio[mask])))
    return np.asarray(xs), np.asarray(ys)


def _series_label(path: str, fallback: str) -> str:
    """Prefer the expansion order recorded in the CSV's manifest."""
    base, _ = os.path.splitext(path)
    manifest = base + ".manifest.json"
    if os.path.exists(manifest):
        try:
            with open(manifest) as fh:
                payload = json.load(fh)
            n = payload.get("args", {}).get("n")
            if n is not None:
                return f"order {n}"
        except (OSError, json.JSONDecodeError):
            pass
    return fallback


def render(spec: FigureSpec) -> RenderSummary:
    """Draw one figure and write the image file."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    try:
        if spec.figure_id == "fig2":
            summary = _render_fig2(spec, ax)
        else:
            summary = _render_trajectories(spec, ax)
        fig.tight_layout()
        fig.savefig(spec.output_path)
        width, height = fig.canvas.get_width_height()
    finally:
        plt.close(fig)
    return RenderSummary(figure_id=spec.figure_id,
                         output_path=spec.output_path,
                         series_points=summary[0],
                         width_px=width, height_px=height,
                         curves=summary[1])


def _render_fig2(spec: FigureSpec, ax):
    colors = ("tab:orange", "tab:blue")
    points = []
    curves = {}
    top = 1.0
    for path, color in zip(spec.input_paths, colors):
        xs, ys = boundary_curve(path)
        if xs.size == 0:
            raise SchemaError(f"{path}: no unstable cells; nothing to draw")
        label = _series_label(path, os.path.basename(path))
        if label in curves:
            label = f"{label} ({os.path.basename(path)})"
        ax.plot(xs, ys, color=color, label=label)
        top = max(top, float(np.max(ys)) * 1e2)
        points.append(int(xs.size))
        curves[label] = (xs, ys)
    for (xs, ys), color in zip(curves.values(), colors):
        ax.fill_between(xs, ys, top, color=color, alpha=0.2)
    ax.set_yscale("log")
    ax.set_xlabel("modulation depth")
    ax.set_ylabel("frequency to damping ratio")
    ax.set_title("vacuum stability boundary (shaded: photon production)")
    ax.legend()
    return tuple(points), curves


def _render_trajectories(spec: FigureSpec, ax):
    points = []
    curves = {}
    if spec.figure_id == "fig3":
        styles = [("with oscillating terms", "-", "tab:blue"),
                  ("stationary terms only", "--", "tab:orange")]
        for path, (label, style, color) in zip(spec.input_paths, styles):
            t, n = read_trajectory(path, 1)
            ax.plot(t, n[:, 0], style, color=color, label=label)
            points.append(int(t.size))
            curves[label] = (t, n[:, 0])
        ax.set_title("mean photon number, lowest mode")
    elif spec.figure_id == "fig4":
        t, n = read_trajectory(spec.input_paths[0], 3)
        for i, color in enumerate(("tab:blue", "tab:orange", "tab:green")):
            label = f"mode {i + 1}"
            ax.plot(t, n[:, i], color=color, label=label)
            points.append(int(t.size))
            curves[label] = (t, n[:, i])
        ax.set_title("mean photon number, modes 1 to 3")
    else:  # fig5
        t, n = read_trajectory(spec.input_paths[0], 1)
        ax.plot(t, n[:, 0], color="tab:blue", label="mode 1")
        points.append(int(t.size))
        curves["mode 1"] = (t, n[:, 0])
        ax.set_title("mean photon number, sixth-order resonance")
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("dimensionless time")
    ax.set_ylabel("photon number proxy")
    ax.legend()
    return tuple(points), curves
