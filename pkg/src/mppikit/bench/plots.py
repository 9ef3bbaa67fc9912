"""Render SVG figures from a run directory's CSV artifacts.

Outputs are byte-identical for identical inputs: the Agg backend, a fixed
svg.hashsalt, and stripped date metadata remove every nondeterministic
element matplotlib would otherwise embed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from mppikit.dsp import Spectrum  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "mppikit"

_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def _read_csv(path: Path) -> tuple[list[str], list[dict]]:
    """Header and row dicts of a schema-versioned CSV (comment lines skipped)."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ValueError(f"{path.name} has no header row")
    header = rows[0]
    return header, [dict(zip(header, row)) for row in rows[1:]]


def _float(row: dict, key: str) -> float:
    try:
        return float(row[key])
    except (KeyError, ValueError):
        return float("nan")


def _save(fig, path: Path) -> Path:
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def _heatmaps(run_dir: Path) -> list[Path]:
    path = run_dir / "aggregate.csv"
    if not path.exists():
        return []
    _, rows = _read_csv(path)
    if not rows:
        notice = run_dir / "heatmap_notice.txt"
        notice.write_text("aggregate.csv has no data rows; no heatmap emitted\n")
        return [notice]

    written = []
    variants = sorted({r["variant"] for r in rows})
    horizons = sorted({int(r["horizon"]) for r in rows})
    rollouts = sorted({int(r["n_rollouts"]) for r in rows})
    for variant in variants:
        grid = np.full((len(horizons), len(rollouts)), np.nan)
        for r in rows:
            if r["variant"] != variant:
                continue
            i = horizons.index(int(r["horizon"]))
            j = rollouts.index(int(r["n_rollouts"]))
            grid[i, j] = _float(r, "mean_cumulative_cost")
        fig, ax = plt.subplots(figsize=(5, 4))
        image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
        ax.set_xticks(range(len(rollouts)), [str(n) for n in rollouts])
        ax.set_yticks(range(len(horizons)), [str(h) for h in horizons])
        ax.set_xlabel("rollouts N")
        ax.set_ylabel("horizon H")
        ax.set_title(f"mean cumulative cost: {variant}")
        fig.colorbar(image, ax=ax)
        written.append(_save(fig, run_dir / f"heatmap_{variant}.svg"))
    return written


def _control_series(run_dir: Path) -> list[Path]:
    path = run_dir / "controls.csv"
    if not path.exists():
        return []
    header, rows = _read_csv(path)
    dims = [name for name in header if name.startswith("u_")]
    steps = [int(r["step"]) for r in rows]
    written = []
    for name in dims:
        values = [_float(r, name) for r in rows]
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot(steps, values, linewidth=1.0)
        ax.set_xlabel("step")
        ax.set_ylabel(name)
        ax.set_title(f"applied control {name}")
        written.append(_save(fig, run_dir / f"controls_{name}.svg"))
    return written


def _distance_boxes(run_dir: Path) -> list[Path]:
    path = run_dir / "episodes.csv"
    if not path.exists():
        return []
    _, rows = _read_csv(path)
    finite = [r for r in rows if np.isfinite(_float(r, "distance_m"))]
    if not finite:
        return []
    variants = sorted({r["variant"] for r in finite})
    rollouts = sorted({int(r["n_rollouts"]) for r in finite})
    fig, ax = plt.subplots(figsize=(1.5 + 1.5 * len(rollouts) * len(variants), 4))
    data, labels = [], []
    for n in rollouts:
        for variant in variants:
            values = [_float(r, "distance_m") for r in finite
                      if r["variant"] == variant and int(r["n_rollouts"]) == n]
            if values:
                data.append(values)
                labels.append(f"{variant}\nN={n}")
    ax.boxplot(data, tick_labels=labels)
    ax.set_ylabel("distance [m]")
    ax.set_title("episode distances")
    return [_save(fig, run_dir / "distance_box.svg")]


def _psd_overlay(run_dir: Path) -> list[Path]:
    paths = sorted(run_dir.glob("*spectrum*.csv"))
    if not paths:
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in paths:
        spectrum = Spectrum.from_csv(path)
        keep = spectrum.freqs > 0
        ax.loglog(spectrum.freqs[keep], spectrum.power[keep],
                  label=path.stem, linewidth=1.0)
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel("PSD")
    ax.set_title("power spectral densities")
    ax.legend(fontsize=8)
    return [_save(fig, run_dir / "psd_overlay.svg")]


_ARTISTS = [("heatmap", _heatmaps), ("controls", _control_series),
            ("distance_box", _distance_boxes), ("psd_overlay", _psd_overlay)]


def emit_plots(run_dir) -> list[Path]:
    """Render every figure the directory's CSVs support.

    A malformed input fails only its own figure: the error lands in
    <name>.error.txt and the remaining figures are still rendered. Returns
    all written paths, notices and error files included.
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ValueError(f"{run_dir} is not a directory")
    written: list[Path] = []
    for name, artist in _ARTISTS:
        try:
            written.extend(artist(run_dir))
        except Exception as exc:
            error_path = run_dir / f"{name}.error.txt"
            error_path.write_text(f"{type(exc).__name__}: {exc}\n")
            written.append(error_path)
    return written
