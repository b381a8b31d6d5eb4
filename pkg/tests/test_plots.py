import pytest

from bbisim.engine import Scenario, SweepCell
from bbisim.plots import (
    MissingSliceError,
    plot_heatmap,
    plot_rmse_vs_fs,
    plot_rmse_vs_snr,
    plot_scenario_bars,
    render_plots,
)


def _cells(classes=(1, 2), fs=(14.0, 23.0), snr=(18.0, 24.0), scenarios=(Scenario.EXACT,)):
    out = []
    for c in classes:
        for sc in scenarios:
            for f in fs:
                for s in snr:
                    rmse = 100.0 / (s + 4) + 10.0 / f + (10.0 if sc is Scenario.VARIED else 0.0)
                    out.append(SweepCell(c, sc, f, s, 5000, rmse, rmse - (10.0 if sc is Scenario.VARIED else 0.0), 0.01))
    return out


def test_single_cell_heatmap(tmp_path):
    path = plot_heatmap(_cells((1,), (14.0,), (18.0,)), tmp_path / "h.svg")
    text = path.read_text()
    assert text.startswith("<?xml") and "<svg" in text


def test_missing_cells_are_named(tmp_path):
    cells = [c for c in _cells() if not (c.fs_low == 23.0 and c.snr_db == 24.0 and c.dawber_class == 1)]
    with pytest.raises(MissingSliceError) as info:
        plot_heatmap(cells, tmp_path / "h.svg")
    assert "class=1 scenario=Exact fs=23 snr=24" in str(info.value)
    with pytest.raises(MissingSliceError):
        plot_rmse_vs_fs(cells, tmp_path / "f.svg", snr_db=24.0, classes=(1, 2), fs_list=(14.0, 23.0))
    with pytest.raises(MissingSliceError):
        plot_scenario_bars(_cells(), tmp_path / "b.svg", fs_low=14.0, snr_db=18.0)


def test_figures_are_deterministic(tmp_path):
    a = plot_rmse_vs_snr(_cells(), tmp_path / "a.svg")
    b = plot_rmse_vs_snr(_cells(), tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()


def test_axis_labels_have_units(tmp_path):
    text = plot_rmse_vs_snr(_cells(), tmp_path / "a.svg").read_text()
    assert "RMSE (ms)" in text and "SNR (dB)" in text
    text = plot_heatmap(_cells(), tmp_path / "h.svg", clip_ms=50.0).read_text()
    assert "(Hz)" in text and "clipped at 50" in text
    text = plot_scenario_bars(_cells(scenarios=tuple(Scenario)), tmp_path / "b.svg", fs_low=14.0, snr_db=18.0).read_text()
    assert "Var" in text and "RMSE (ms)" in text


def test_render_plots_covers_available_figures(tmp_path):
    cells = _cells(scenarios=(Scenario.EXACT, Scenario.VARIED))
    written = render_plots(cells, tmp_path)
    names = sorted(p.name for p in written)
    assert "heatmap_class1_Exact.svg" in names and "rmse_vs_snr_class2_Varied5pc.svg" in names
    assert "rmse_vs_fs_Exact_snr24.svg" in names
    assert "scenario_bars_fs23_snr24.svg" in names
    assert all(p.exists() and p.stat().st_size > 0 for p in written)


def test_render_without_varied_has_no_bars(tmp_path):
    names = [p.name for p in render_plots(_cells(), tmp_path)]
    assert not any(n.startswith("scenario_bars") for n in names)
    with pytest.raises(MissingSliceError):
        render_plots([], tmp_path)
