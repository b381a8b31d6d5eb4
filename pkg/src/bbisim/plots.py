"""Static SVG figures of sweep results.

Figures are built with the object-oriented API (no pyplot state) and
saved with a fixed hash salt and no date, so identical inputs give
identical files.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib
from matplotlib.colors import Normalize
from matplotlib.figure import Figure

from .engine import Scenario, SweepCell

#: y-axis clip used by the fs x SNR figures; pass ``clip_ms=None`` to disable
DEFAULT_CLIP_MS = 50.0

PLOT_STYLE = {
    "font.size": 9.0,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.linewidth": 0.5,
    "lines.linewidth": 1.2,
    "lines.markersize": 3.5,
    "figure.figsize": (4.8, 3.2),
    "image.cmap": "viridis",
    "svg.hashsalt": "bbisim",
    "svg.fonttype": "none",
}

_SVG_METADATA = {"Date": None, "Creator": None}


class MissingSliceError(ValueError):
    """The requested slice has grid points with no result."""

    def __init__(self, figure: str, missing: Sequence[tuple]):
        self.missing = list(missing)
        shown = ", ".join(_describe(m) for m in self.missing[:8])
        more = f" (+{len(self.missing) - 8} more)" if len(self.missing) > 8 else ""
        super().__init__(f"{figure}: missing cells {shown}{more}")


def _describe(key: tuple) -> str:
    c, sc, fs, snr = key
    return f"class={c} scenario={Scenario(sc).value} fs={fs:g} snr={snr:g}"


def _index(cells: Iterable[SweepCell]) -> dict[tuple, SweepCell]:
    return {(c.dawber_class, Scenario(c.scenario), float(c.fs_low), float(c.snr_db)): c for c in cells}


def _lookup(index: dict, keys: list[tuple], figure: str) -> list[SweepCell]:
    missing = [k for k in keys if k not in index]
    if missing:
        raise MissingSliceError(figure, missing)
    return [index[k] for k in keys]


def _axis_values(index: dict, pos: int, **match) -> list[float]:
    fields = {"dawber_class": 0, "scenario": 1, "fs_low": 2, "snr_db": 3}
    values = {k[pos] for k in index if all(k[fields[f]] == v for f, v in match.items())}
    return sorted(values)


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    return path


def _clip(ax, values, clip_ms):
    if clip_ms is not None and max(values) > clip_ms:
        ax.set_ylim(0, clip_ms)


def plot_heatmap(cells, path, *, dawber_class=1, scenario=Scenario.EXACT,
                 fs_list=None, snr_list=None, clip_ms=DEFAULT_CLIP_MS) -> Path:
    """RMSE over the fs x SNR grid for one class and scenario."""
    index = _index(cells)
    scenario = Scenario(scenario)
    fs_list = list(fs_list) if fs_list is not None else _axis_values(
        index, 2, dawber_class=dawber_class, scenario=scenario)
    snr_list = list(snr_list) if snr_list is not None else _axis_values(
        index, 3, dawber_class=dawber_class, scenario=scenario)
    if not fs_list or not snr_list:
        raise MissingSliceError("heatmap", [(dawber_class, scenario, float("nan"), float("nan"))])
    keys = [(dawber_class, scenario, float(fs), float(snr)) for snr in snr_list for fs in fs_list]
    found = _lookup(index, keys, "heatmap")
    grid = [[found[i * len(fs_list) + j].rmse_ms for j in range(len(fs_list))] for i in range(len(snr_list))]
    vmax = clip_ms if clip_ms is not None else max(max(row) for row in grid)
    with matplotlib.rc_context(PLOT_STYLE):
        fig = Figure()
        ax = fig.add_subplot()
        ax.grid(False)
        mesh = ax.pcolormesh(range(len(fs_list) + 1), range(len(snr_list) + 1), grid,
                             norm=Normalize(0.0, vmax if vmax > 0 else 1.0), shading="flat")
        ax.set_xticks([j + 0.5 for j in range(len(fs_list))], [f"{fs:g}" for fs in fs_list])
        ax.set_yticks([i + 0.5 for i in range(len(snr_list))], [f"{s:g}" for s in snr_list])
        ax.set_xlabel("sampling rate $f_s$ (Hz)")
        ax.set_ylabel("SNR (dB)")
        ax.set_title(f"class {dawber_class}, {scenario.value}")
        bar = fig.colorbar(mesh, ax=ax)
        bar.set_label("RMSE (ms)" + (f", clipped at {clip_ms:g}" if clip_ms is not None else ""))
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_rmse_vs_snr(cells, path, *, dawber_class=1, scenario=Scenario.EXACT,
                     fs_list=None, snr_list=None, clip_ms=DEFAULT_CLIP_MS) -> Path:
    """One RMSE-vs-SNR line per sampling rate."""
    index = _index(cells)
    scenario = Scenario(scenario)
    fs_list = list(fs_list) if fs_list is not None else _axis_values(
        index, 2, dawber_class=dawber_class, scenario=scenario)
    snr_list = list(snr_list) if snr_list is not None else _axis_values(
        index, 3, dawber_class=dawber_class, scenario=scenario)
    if not fs_list or not snr_list:
        raise MissingSliceError("rmse_vs_snr", [(dawber_class, scenario, float("nan"), float("nan"))])
    with matplotlib.rc_context(PLOT_STYLE):
        fig = Figure()
        ax = fig.add_subplot()
        values = []
        for fs in fs_list:
            keys = [(dawber_class, scenario, float(fs), float(s)) for s in snr_list]
            rmse = [c.rmse_ms for c in _lookup(index, keys, "rmse_vs_snr")]
            values += rmse
            ax.plot(snr_list, rmse, marker="o", label=f"{fs:g} Hz")
        _clip(ax, values, clip_ms)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("RMSE (ms)")
        ax.set_title(f"class {dawber_class}, {scenario.value}")
        ax.legend(ncols=2)
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_rmse_vs_fs(cells, path, *, snr_db, scenario=Scenario.EXACT, classes=None, fs_list=None) -> Path:
    """One RMSE-vs-sampling-rate line per class at a fixed SNR."""
    index = _index(cells)
    scenario = Scenario(scenario)
    classes = list(classes) if classes is not None else _axis_values(
        index, 0, scenario=scenario, snr_db=float(snr_db))
    fs_list = list(fs_list) if fs_list is not None else _axis_values(
        index, 2, scenario=scenario, snr_db=float(snr_db))
    if not classes or not fs_list:
        raise MissingSliceError("rmse_vs_fs", [(0, scenario, float("nan"), float(snr_db))])
    with matplotlib.rc_context(PLOT_STYLE):
        fig = Figure()
        ax = fig.add_subplot()
        for c in classes:
            keys = [(c, scenario, float(fs), float(snr_db)) for fs in fs_list]
            ax.plot(fs_list, [x.rmse_ms for x in _lookup(index, keys, "rmse_vs_fs")],
                    marker="o", label=f"class {c}")
        ax.set_xlabel("sampling rate $f_s$ (Hz)")
        ax.set_ylabel("RMSE (ms)")
        ax.set_title(f"{scenario.value}, SNR {snr_db:g} dB")
        ax.legend()
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_scenario_bars(cells, path, *, fs_low, snr_db, classes=None) -> Path:
    """Exact, Varied and corrected-Varied RMSE per class at one grid point."""
    index = _index(cells)
    if classes is None:
        classes = sorted({k[0] for k in index if k[2] == float(fs_low) and k[3] == float(snr_db)})
    if not classes:
        raise MissingSliceError("scenario_bars", [(0, Scenario.EXACT, float(fs_low), float(snr_db))])
    exact = _lookup(index, [(c, Scenario.EXACT, float(fs_low), float(snr_db)) for c in classes], "scenario_bars")
    varied = _lookup(index, [(c, Scenario.VARIED, float(fs_low), float(snr_db)) for c in classes], "scenario_bars")
    series = (("Exact", [c.rmse_ms for c in exact]),
              ("Varied", [c.rmse_ms for c in varied]),
              ("Varied, corrected", [c.rmse_corrected_ms for c in varied]))
    width = 0.26
    with matplotlib.rc_context(PLOT_STYLE):
        fig = Figure()
        ax = fig.add_subplot()
        ax.grid(axis="x", visible=False)
        for k, (label, values) in enumerate(series):
            ax.bar([i + (k - 1) * width for i in range(len(classes))], values, width, label=label)
        ax.set_xticks(range(len(classes)), [f"class {c}" for c in classes])
        ax.set_ylabel("RMSE (ms)")
        ax.set_title(f"$f_s$ = {fs_low:g} Hz, SNR {snr_db:g} dB")
        ax.legend()
        fig.tight_layout()
        return _save(fig, Path(path))


def _preferred(values: Sequence[float], wanted: float) -> float:
    return wanted if wanted in values else max(values)


def render_plots(cells, output_dir, *, clip_ms=DEFAULT_CLIP_MS) -> list[Path]:
    """Render every figure the available cells support; returns the written paths."""
    cells = list(cells)
    if not cells:
        raise MissingSliceError("render_plots", [])
    out = Path(output_dir)
    index = _index(cells)
    written = []
    groups = defaultdict(list)
    for key in index:
        groups[(key[0], key[1])].append(key)
    for (c, sc) in sorted(groups, key=lambda g: (g[0], g[1].value)):
        stem = f"class{c}_{sc.value}"
        written.append(plot_heatmap(cells, out / f"heatmap_{stem}.svg",
                                    dawber_class=c, scenario=sc, clip_ms=clip_ms))
        written.append(plot_rmse_vs_snr(cells, out / f"rmse_vs_snr_{stem}.svg",
                                        dawber_class=c, scenario=sc, clip_ms=clip_ms))
    for sc in sorted({k[1] for k in index}, key=lambda s: s.value):
        snr = _preferred(_axis_values(index, 3, scenario=sc), 24.0)
        classes = _axis_values(index, 0, scenario=sc, snr_db=snr)
        fs_list = [fs for fs in _axis_values(index, 2, scenario=sc, snr_db=snr)
                   if all((c, sc, fs, snr) in index for c in classes)]
        written.append(plot_rmse_vs_fs(cells, out / f"rmse_vs_fs_{sc.value}_snr{snr:g}.svg",
                                       snr_db=snr, scenario=sc, classes=classes, fs_list=fs_list))
    common = sorted({(k[2], k[3]) for k in index if k[1] is Scenario.EXACT}
                    & {(k[2], k[3]) for k in index if k[1] is Scenario.VARIED})
    if common:
        fs, snr = (23.0, 24.0) if (23.0, 24.0) in common else common[-1]
        classes = [c for c in sorted({k[0] for k in index})
                   if (c, Scenario.EXACT, fs, snr) in index and (c, Scenario.VARIED, fs, snr) in index]
        written.append(plot_scenario_bars(cells, out / f"scenario_bars_fs{fs:g}_snr{snr:g}.svg",
                                          fs_low=fs, snr_db=snr, classes=classes))
    return written
