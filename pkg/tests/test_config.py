from pathlib import Path

import pytest

from bbisim.config import ConfigError, config_from_dict, parse_config
from bbisim.engine import DEFAULT_FS_LIST, DEFAULT_SNR_LIST, Scenario
from bbisim.noise import NoiseKind


def _write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def test_empty_file_gives_default_sweep(tmp_path):
    cfg = parse_config(_write(tmp_path, ""))
    specs = cfg.cell_specs()
    assert len(specs) == 480
    assert {s.scenario for s in specs} == {Scenario.EXACT}
    assert {s.noise_kind for s in specs} == {NoiseKind.PINK}
    assert cfg.grid.fs_list == DEFAULT_FS_LIST and cfg.grid.snr_list == DEFAULT_SNR_LIST
    assert cfg.worker_count == 1 and cfg.master_seed == 0 and cfg.variation_pct == 5.0


def test_fixed_snr_slice(tmp_path):
    cfg = parse_config(_write(tmp_path, "[grid]\nsnr_db_list = [24]\nfs_list = [5, 6, 8, 11, 14, 18, 23, 30, 39, 50]\n"))
    specs = cfg.cell_specs()
    assert len(specs) == 40 and {s.snr_db for s in specs} == {24.0}


def test_fixed_rate_slice(tmp_path):
    cfg = parse_config(_write(tmp_path, "[grid]\nfs_list = [23]\n"))
    assert len(cfg.cell_specs()) == 48


def test_full_example(tmp_path):
    cfg = parse_config(_write(tmp_path, """
seed = 9
noise = "white"
variation_pct = 2.5
workers = 3
output_dir = "out"
emit_trials = true
emit_plots = false

[grid]
classes = [4]
scenarios = ["Exact", "Varied5pc"]
fs_list = [14]
snr_db_list = [18, 24.5]

[simulation]
max_trials = 1000
nsem_threshold = 0.02
delay_std_s = 0.05

[prototypes.4.gaussian]
amplitude = 0.6
"""))
    assert cfg.master_seed == 9 and cfg.grid.seed == 9
    assert cfg.worker_count == 3 and cfg.output_dir == Path("out")
    assert cfg.emit_trials and not cfg.emit_plots
    specs = cfg.cell_specs()
    assert len(specs) == 4
    s = specs[-1]
    assert s.noise_kind is NoiseKind.WHITE and s.variation.relative_std == pytest.approx(0.025)
    assert s.max_trials == 1000 and s.nsem_threshold == 0.02 and s.delay.std == 0.05
    assert s.prototype.gaussian.amplitude == 0.6 and s.prototype.gamma.amplitude == 0.5384
    assert {sp.snr_db for sp in specs} == {18.0, 24.5}


@pytest.mark.parametrize("text, location", [
    ("colour = 1", "colour"),
    ("[grid]\nfs = [1]", "grid.fs"),
    ("[simulation]\nmax_trial = 5", "simulation.max_trial"),
    ("[prototypes.1.gamma]\nwidth = 0.1", "prototypes.1.gamma.width"),
])
def test_unknown_keys_are_located(tmp_path, text, location):
    with pytest.raises(ConfigError) as info:
        parse_config(_write(tmp_path, text))
    assert info.value.location == location
    assert "unknown key" in str(info.value)


@pytest.mark.parametrize("data, location", [
    ({"workers": 0}, "workers"),
    ({"seed": -1}, "seed"),
    ({"seed": 1.5}, "seed"),
    ({"noise": "brown"}, "noise"),
    ({"emit_plots": "yes"}, "emit_plots"),
    ({"grid": {"classes": [5]}}, "grid.classes[0]"),
    ({"grid": {"fs_list": []}}, "grid.fs_list"),
    ({"grid": {"fs_list": [14, -1]}}, "grid.fs_list[1]"),
    ({"grid": {"fs_list": [14, 14]}}, "grid.fs_list"),
    ({"grid": {"scenarios": ["Varied"]}}, "grid.scenarios[0]"),
    ({"simulation": {"max_trials": 2}}, "simulation.max_trials"),
    ({"simulation": {"max_abs_delay_s": 5.0}}, "simulation"),
    ({"prototypes": {"7": {}}}, "prototypes.7"),
    ({"prototypes": {"1": {"gamma": {"std": 0}}}}, "prototypes.1.gamma.std"),
])
def test_validation_errors(data, location):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    assert info.value.location == location


def test_parse_errors(tmp_path):
    with pytest.raises(ConfigError, match="file not found"):
        parse_config(tmp_path / "missing.toml")
    with pytest.raises(ConfigError, match="parse error"):
        parse_config(_write(tmp_path, "seed = = 1"))
