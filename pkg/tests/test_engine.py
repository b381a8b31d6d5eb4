import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbisim.delay import cross_correlation, peak_lag
from bbisim.engine import (
    CellSpec,
    DelayDistribution,
    NsemAccumulator,
    Scenario,
    SweepGrid,
    TrialRecord,
    TrialRunner,
    _place,
    cell_stream,
    compute_rmse,
    run_cell,
    run_sweep,
    run_trial,
)
from bbisim.noise import NoiseKind
from bbisim.pulse_model import dawber_prototype
from bbisim.resampler import rational_ratio, resample_array

FAST = dict(nsem_threshold=0.08)


@settings(max_examples=100)
@given(st.lists(st.floats(0.0, 1e3), min_size=2, max_size=200))
def test_nsem_matches_numpy(values):
    acc = NsemAccumulator()
    for v in values:
        acc.add(v)
    x = np.array(values)
    assert acc.mean == pytest.approx(x.mean(), rel=1e-9, abs=1e-9)
    sd = x.std(ddof=1)
    if sd > 1e-6 and x.mean() > 1e-6:
        assert acc.nsem == pytest.approx(sd / (x.mean() * math.sqrt(x.size)), rel=1e-6)


def test_nsem_edge_cases():
    acc = NsemAccumulator()
    assert acc.nsem == math.inf
    for v in (2.0, 2.0, 2.0):
        acc.add(v)
    assert acc.nsem == 0.0
    acc = NsemAccumulator()
    for v in (1.0, 2.0, 3.0):
        acc.add(v)
    # sd = 1, mean = 2, n = 3
    assert acc.nsem == pytest.approx(1 / (2 * math.sqrt(3)))


def test_rmse_example():
    assert compute_rmse([0.001, 0.003]) == pytest.approx(math.sqrt(5.0))
    assert compute_rmse([0.0]) == 0.0
    with pytest.raises(ValueError):
        compute_rmse([])


def test_trial_record():
    r = TrialRecord.from_delays(0.1, 0.098, 0.097)
    assert r.abs_error == pytest.approx(0.003)
    assert r.corrected_abs_error == pytest.approx(0.001)


def test_delay_distribution_bounds():
    rng = np.random.default_rng(0)
    dist = DelayDistribution(std=0.1, max_abs=0.05)
    draws = [dist.draw(rng) for _ in range(2000)]
    assert all(abs(v) <= 0.05 for v, _ in draws)
    assert sum(r for _, r in draws) > 0
    with pytest.raises(ValueError):
        DelayDistribution(std=0.0)


def test_cell_spec_validation():
    with pytest.raises(ValueError):
        CellSpec(1, max_trials=2)
    with pytest.raises(ValueError):
        CellSpec(1, fs_low=0.0)
    with pytest.raises(ValueError):
        CellSpec(1, prototype=dawber_prototype(2))
    assert CellSpec(3).prototype == dawber_prototype(3)
    assert CellSpec(1, fs_low=14.0, snr_db=18.0).label == "class=1 scenario=Exact fs=14 snr=18"


@pytest.mark.parametrize("shift", [-3000, -1, 0, 5, 1234, 9999])
def test_exact_clean_lag_matches_explicit_correlation(shift):
    runner = TrialRunner(CellSpec(1, fs_low=14.0))
    pulse = dawber_prototype(1).evaluate(np.arange(20_000) / 10_000.0)
    x1 = _place(pulse, 20_000, 40_000)
    x2 = _place(pulse, 20_000 + shift, 40_000)
    expected = peak_lag(cross_correlation(x1, x2, 10_000), 10_000)
    assert runner._clean_lag_exact(shift) == expected


def test_exact_fast_path_matches_generic_pipeline():
    spec = CellSpec(2, fs_low=23.0)
    runner = TrialRunner(spec)
    rng = np.random.default_rng(4)
    shift, _, y1, y2, _ = runner.signals(rng)
    pulse = dawber_prototype(2).evaluate(np.arange(20_000) / 10_000.0)
    up, down = rational_ratio(10_000, 23)
    np.testing.assert_allclose(y1, resample_array(_place(pulse, 20_000, 40_000), up, down), atol=1e-12)
    np.testing.assert_allclose(y2, resample_array(_place(pulse, 20_000 + shift, 40_000), up, down), atol=1e-12)


def test_noise_free_limit_recovers_delay():
    rng = np.random.default_rng(1)
    for scenario in Scenario:
        runner = TrialRunner(CellSpec(1, scenario, fs_low=50.0, snr_db=200.0))
        for _ in range(20):
            record, _ = runner.run(rng)
            assert record.corrected_abs_error <= 0.0015


def test_single_trial_high_snr_is_sub_millisecond():
    # a single trial at 14 Hz / 30 dB can land within 0.25 ms
    errors = [run_trial(dawber_prototype(1), Scenario.EXACT, 14.0, 30.0, np.random.default_rng(s)).abs_error
              for s in range(20)]
    assert min(errors) < 0.00025
    assert np.median(errors) < 0.00125


def test_exact_scenario_has_identical_errors():
    cell = run_cell(CellSpec(1, fs_low=14.0, snr_db=30.0, **FAST), collect_trials=True)
    assert all(t.abs_error == t.corrected_abs_error for t in cell.trials)
    assert cell.rmse_ms == cell.rmse_corrected_ms


def test_termination_rule():
    cell = run_cell(CellSpec(1, fs_low=14.0, snr_db=24.0, **FAST))
    assert cell.n_trials > 2 and cell.final_nsem < 0.08 and not cell.capped
    capped = run_cell(CellSpec(1, fs_low=14.0, snr_db=-3.0, max_trials=10))
    assert capped.capped and capped.n_trials == 10


def test_run_cell_determinism():
    spec = CellSpec(4, fs_low=11.0, snr_db=12.0, **FAST)
    a = run_cell(spec, seed=3)
    assert a == run_cell(spec, seed=3)
    assert a != run_cell(spec, seed=4)
    assert run_cell(spec, cell_stream(3, spec)) == a


def test_streams_are_named_by_cell():
    a, b = CellSpec(1, fs_low=14.0), CellSpec(1, fs_low=18.0)
    assert cell_stream(0, a).random() == cell_stream(0, a).random()
    assert cell_stream(0, a).random() != cell_stream(0, b).random()


def test_sweep_order_and_workers():
    grid = SweepGrid(fs_list=(23.0, 8.0), snr_list=(30.0, 24.0), classes=(2, 1))
    seen = []
    serial = run_sweep(grid, on_cell=seen.append, **FAST)
    assert [c.sort_key for c in serial] == sorted(c.sort_key for c in serial)
    assert seen == serial
    assert run_sweep(grid, workers=2, **FAST) == serial


def test_grid_specs():
    specs = SweepGrid().specs()
    assert len(specs) == 480
    assert len({s.label for s in specs}) == 480
    assert specs[0].label == "class=1 scenario=Exact fs=5 snr=-3"


def test_white_noise_option():
    cell = run_cell(CellSpec(1, fs_low=23.0, snr_db=24.0, noise_kind=NoiseKind.WHITE, **FAST))
    assert cell.rmse_ms > 0


def test_rmse_hand_examples():
    assert compute_rmse([0.003, 0.004]) == pytest.approx(3.5355339, rel=1e-7)
    assert compute_rmse([-0.002]) == pytest.approx(2.0)


def test_rmse_of_half_normal():
    e = np.abs(np.random.default_rng(0).normal(0.0, 0.004, 100_000))
    assert compute_rmse(e) == pytest.approx(4.0, rel=0.01)


def test_identical_beats_have_exact_clean_delay():
    runner = TrialRunner(CellSpec(2, fs_low=14.0))
    rng = np.random.default_rng(8)
    for _ in range(200):
        record, _ = runner.run(rng)
        assert abs(record.clean_delay - record.true_delay) <= 0.00005


def test_varied_clean_delay_differs_from_truth():
    runner = TrialRunner(CellSpec(1, Scenario.VARIED, fs_low=23.0, snr_db=24.0))
    rng = np.random.default_rng(5)
    shifts = []
    for _ in range(5000):
        shift, clean, *_ = runner.signals(rng)
        shifts.append((clean - shift) / 10_000.0)
    rms_ms = 1000 * math.sqrt(np.mean(np.square(shifts)))
    # same order as the uncorrected Varied error (several ms), far above the exact case
    assert 3.0 < rms_ms < 50.0


def test_noise_free_well_sampled_limit():
    runner = TrialRunner(CellSpec(1, fs_low=50.0, snr_db=300.0))
    rng = np.random.default_rng(0)
    assert all(runner.run(rng)[0].abs_error <= 0.001 for _ in range(200))


def test_varied_single_trial_can_reach_six_ms():
    runner = TrialRunner(CellSpec(1, Scenario.VARIED, fs_low=8.0, snr_db=21.0))
    rng = np.random.default_rng(0)
    worst = max(runner.run(rng)[0].corrected_abs_error for _ in range(300))
    assert worst >= 0.006


def test_zero_spread_terminates_after_three_trials():
    spec = CellSpec(1, fs_low=50.0, snr_db=300.0, delay=DelayDistribution(std=1e-7, max_abs=1e-6))
    cell = run_cell(spec)
    assert cell.n_trials == 3 and cell.final_nsem == 0.0 and cell.rmse_ms == 0.0


def test_one_cell_sweep_equals_run_cell():
    grid = SweepGrid(fs_list=(18.0,), snr_list=(27.0,), classes=(3,), seed=5)
    (swept,) = run_sweep(grid, **FAST)
    assert swept == run_cell(CellSpec(3, fs_low=18.0, snr_db=27.0, **FAST), cell_stream(5, grid.specs(**FAST)[0]))


def test_class1_plateau_at_23_hz():
    cell = run_cell(CellSpec(1, fs_low=23.0, snr_db=24.0))
    assert cell.rmse_ms == pytest.approx(1.39, rel=0.25)
