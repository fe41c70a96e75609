import csv
import io
import os

import pytest

from twinsim.harness import (
    EVENTS,
    SwitchError,
    read_switch_errors,
    run_experiment,
    run_scenario,
    summarize,
    summary_table,
)
from twinsim.scenario import FailureSpec, ScenarioConfig


def short_cfg(**kwargs):
    defaults = dict(approach="MDTS", duration=450.0, runs=3, seed=99)
    defaults.update(kwargs)
    return ScenarioConfig(**defaults)


class TestRunScenario:
    def test_gt_has_zero_switch_error(self):
        trace = run_scenario(ScenarioConfig(approach="GT", duration=900.0), 0)
        errors = trace.switch_errors()
        assert errors, "expected at least one switch"
        assert all(e.error == 0.0 for e in errors)

    def test_rows_strictly_increasing_and_events_valid(self):
        trace = run_scenario(short_cfg(), 0)
        times = [r.time for r in trace.rows]
        assert all(b > a for a, b in zip(times, times[1:]))
        assert all(r.event in EVENTS for r in trace.rows)

    def test_deterministic_given_seed(self):
        cfg = short_cfg()
        a = run_scenario(cfg, 1).to_csv_text()
        b = run_scenario(cfg, 1).to_csv_text()
        assert a == b

    def test_different_runs_differ(self):
        cfg = short_cfg()
        assert run_scenario(cfg, 0).to_csv_text() != run_scenario(cfg, 1).to_csv_text()

    def test_pt_discards_model_columns(self):
        trace = run_scenario(short_cfg(approach="PT"), 0)
        for r in trace.rows:
            assert r.t_perceived_std is None
            assert r.u_dt is None
            assert r.u_mitigated is None
            assert r.u_pt is not None

    def test_gt_perceives_truth_exactly(self):
        trace = run_scenario(short_cfg(approach="GT"), 0)
        assert all(r.t_perceived_mean == r.t_true for r in trace.rows)

    def test_reset_rows_follow_protocol(self):
        trace = run_scenario(ScenarioConfig(approach="MDTS"), 0)
        rows = trace.rows
        reset_rows = [i for i, r in enumerate(rows) if r.event == "RESET"]
        assert reset_rows, "expected resets in a full-length MDTS run"
        threshold = 0.9 * 0.3
        for i in reset_rows:
            assert rows[i - 1].u_dt >= threshold - 1e-12
            assert rows[i].u_dt == rows[i].u_mitigated

    def test_per_step_room_mode_runs(self):
        trace = run_scenario(short_cfg(approach="UADT", room_input_mode="per_step"), 0)
        assert len(trace.rows) == 151

    def test_pt_errors_are_sensor_noise_scale(self):
        errors = []
        for run in range(10):
            trace = run_scenario(ScenarioConfig(approach="PT"), run)
            errors += [e.error for e in trace.switch_errors()]
        magnitudes = sorted(abs(e) for e in errors)
        median = magnitudes[len(magnitudes) // 2]
        assert 0.02 <= median <= 0.5   # on the order of the 0.204 sensor std
        # noisy perception switches both early and late relative to the truth
        assert any(e > 0 for e in errors) and any(e < 0 for e in errors)

    def test_uadt_uncertainty_spans_reliability_range(self):
        # free-running twin: starts at sigma_init, ceiling under the 0.3 limit
        trace = run_scenario(ScenarioConfig(approach="UADT"), 0)
        u = [r.u_dt for r in trace.rows]
        assert min(u) == pytest.approx(0.005, abs=1e-12)
        assert 0.27 < max(u) <= 0.3

    def test_safe_mode_latches_heater_off(self):
        cfg = ScenarioConfig(approach="MDTS",
                             failure=FailureSpec(time=600.0, g_box_factor=5.0))
        trace = run_scenario(cfg, 0)
        events = [r.event for r in trace.rows]
        assert "DIVERGED" in events and "SAFE_MODE" in events
        assert events.index("SAFE_MODE") == events.index("DIVERGED") + 1
        after = trace.rows[events.index("DIVERGED"):]
        assert all(not r.heater_on for r in after)


class TestExperiment:
    def test_single_run_matches_run_scenario(self, tmp_path):
        cfg = short_cfg(runs=1)
        run_experiment(cfg, str(tmp_path))
        written = (tmp_path / "traces" / "run_0000.csv").read_text()
        assert written == run_scenario(cfg, 0).to_csv_text()

    def test_worker_count_does_not_change_output(self, tmp_path):
        cfg = short_cfg()
        run_experiment(cfg, str(tmp_path / "serial"), workers=1)
        run_experiment(cfg, str(tmp_path / "parallel"), workers=3)
        for name in ("switch_errors.csv", "uncertainties.csv"):
            assert (tmp_path / "serial" / name).read_bytes() == \
                (tmp_path / "parallel" / name).read_bytes()

    def test_uncertainty_kinds_per_approach(self, tmp_path):
        for approach, kinds in (("UAPT", {"Uprime"}), ("UADT", {"U"}),
                                ("MDTS", {"U", "Uprime", "mu"})):
            out = tmp_path / approach
            run_experiment(short_cfg(approach=approach, runs=1), str(out))
            with open(out / "uncertainties.csv", newline="") as fh:
                seen = {row["u_kind"] for row in csv.DictReader(fh)}
            assert seen == kinds

    def test_manifest_echoes_config(self, tmp_path):
        cfg = short_cfg(runs=1)
        run_experiment(cfg, str(tmp_path))
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "approach = MDTS" in manifest
        assert "seed = 99" in manifest


def make_errors(values, approach="MDTS"):
    return [SwitchError(0, approach, float(i), v, 0.0) for i, v in enumerate(values)]


class TestSummarize:
    def test_all_zero_errors(self):
        stats = summarize(make_errors([0.0] * 10))["MDTS"]
        assert stats.mean_abs == stats.median_abs == stats.std_abs == 0.0
        assert stats.q95 == 0.0

    def test_known_quantiles(self):
        # 21 evenly spaced values: linear-interpolated quantiles are exact
        values = [i * 0.1 for i in range(21)]
        stats = summarize(make_errors(values))["MDTS"]
        assert stats.count == 21
        assert stats.median_abs == pytest.approx(1.0, abs=1e-12)
        assert stats.q05 == pytest.approx(0.1, abs=1e-12)
        assert stats.q25 == pytest.approx(0.5, abs=1e-12)
        assert stats.q75 == pytest.approx(1.5, abs=1e-12)
        assert stats.q95 == pytest.approx(1.9, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_table_contains_ratios(self):
        errors = (make_errors([0.1, 0.2], "MDTS") + make_errors([0.4, 0.5], "UAPT")
                  + make_errors([0.3, 0.6], "UADT"))
        table = summary_table(summarize(errors))
        assert "MDTS / UAPT" in table
        assert "MDTS / UADT" in table

    def test_csv_roundtrip(self, tmp_path):
        cfg = short_cfg(approach="PT", runs=2)
        paths = run_experiment(cfg, str(tmp_path))
        errors = read_switch_errors(paths["switch_errors"])
        direct = [e for run in range(2)
                  for e in run_scenario(cfg, run).switch_errors()]
        assert len(errors) == len(direct)
        for a, b in zip(errors, direct):
            assert a.error == pytest.approx(b.error, abs=1e-7)

    def test_schema_mismatch_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError, match="missing switch-error columns"):
            read_switch_errors(str(bad))
