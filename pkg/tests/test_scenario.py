import pytest

from twinsim.scenario import (
    FailureSpec,
    ScenarioConfig,
    load_scenario,
    parse_scenario_text,
    save_scenario,
    scenario_to_text,
)


class TestRoundTrip:
    def test_default_config_roundtrips(self):
        cfg = ScenarioConfig()
        assert parse_scenario_text(scenario_to_text(cfg)) == cfg

    def test_failure_config_roundtrips(self):
        cfg = ScenarioConfig(failure=FailureSpec(time=600.0, g_box_factor=5.0))
        assert parse_scenario_text(scenario_to_text(cfg)) == cfg

    def test_file_roundtrip(self, tmp_path):
        cfg = ScenarioConfig(approach="UAPT", seed=42, runs=7)
        path = tmp_path / "case.scn"
        save_scenario(cfg, str(path))
        assert load_scenario(str(path)) == cfg

    def test_comments_and_blank_lines(self):
        text = "# a comment\n\napproach = PT  # trailing comment\nseed = 3\n"
        cfg = parse_scenario_text(text)
        assert cfg.approach == "PT"
        assert cfg.seed == 3


class TestParseErrors:
    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario key"):
            parse_scenario_text("approach = PT\nwibble = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            parse_scenario_text("seed = 1\nseed = 2\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="expected 'key = value'"):
            parse_scenario_text("approach PT\n")

    def test_bad_approach_rejected(self):
        with pytest.raises(ValueError, match="approach"):
            parse_scenario_text("approach = BOGUS\n")

    def test_bad_bool_rejected(self):
        with pytest.raises(ValueError, match="true or false"):
            parse_scenario_text("param_mismatch = maybe\n")


class TestValidation:
    def test_default_validates(self):
        ScenarioConfig().validate()

    def test_failure_beyond_duration_rejected(self):
        with pytest.raises(ValueError, match="within the run"):
            ScenarioConfig(duration=500.0, failure=FailureSpec(time=600.0))

    def test_sensor_grid_must_align(self):
        from dataclasses import replace
        cfg = ScenarioConfig()
        cfg = replace(cfg, solver=replace(cfg.solver, h=0.3))
        with pytest.raises(ValueError, match="multiple"):
            cfg.validate()

    def test_solver_step_must_divide_base(self):
        from dataclasses import replace
        cfg = ScenarioConfig()
        cfg = replace(cfg, solver=replace(cfg.solver, h=0.03))
        with pytest.raises(ValueError, match="divide"):
            cfg.validate()

    def test_oversized_step_hits_stability_bound(self):
        from dataclasses import replace
        cfg = ScenarioConfig()
        bound = cfg.plant.stability_bound()
        cfg = replace(cfg, solver=replace(cfg.solver, h=float(round(bound + 1))))
        with pytest.raises(ValueError, match="stability bound"):
            cfg.validate()

    def test_runs_must_be_positive(self):
        with pytest.raises(ValueError):
            ScenarioConfig(runs=0)


class TestShippedScenarios:
    @pytest.mark.parametrize("name", ["default", "failure", "uncertainty_1ms"])
    def test_shipped_scenario_is_valid(self, name):
        import os
        path = os.path.join(os.path.dirname(__file__), "..", "scenarios", f"{name}.scn")
        cfg = load_scenario(path)
        cfg.validate()

    def test_default_scenario_constants(self):
        import os
        path = os.path.join(os.path.dirname(__file__), "..", "scenarios", "default.scn")
        cfg = load_scenario(path)
        # regression-locked calibration outputs
        assert cfg.solver.k_num == 0.9574
        assert cfg.solver.sigma_init == 0.005
        assert cfg.fusion.reliability_limit == 0.3
        assert cfg.consistency.k == 2.0
        assert cfg.consistency.r == 0.05
