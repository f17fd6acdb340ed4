"""
Tests for the Monte Carlo harness.
"""

from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from mmwave_scheduling.exceptions import ConfigError, UnknownPresetError, UnknownSchedulerError
from mmwave_scheduling.harness import (
    DESK_CONFIG,
    FULL_SCALE_CONFIG,
    best_parameters,
    candidate_size_profile,
    emit_csv,
    figure_preset,
    read_csv,
    run_sweep,
    summarize,
    tune_parameters,
)
from mmwave_scheduling.models import CSV_COLUMNS, SweepResult, SweepRow, SweepSpec
from mmwave_scheduling.verification import (
    check_candidate_set_shrinkage,
    check_power_sweep_trend,
    check_resolution_sweep_trend,
)

GOLDEN_HEADER = (
    '"algorithm","rho_db","bits","trial","sum_rate","num_selected",'
    '"candidate_sizes","evaluations","channel_digest"'
)


@pytest.fixture
def tiny_spec(small_config):
    return SweepSpec(
        rho_db_grid=(0.0, 10.0),
        bits_grid=(1, 3),
        trials=3,
        base_config=small_config,
        master_seed=42,
        name="tiny",
    )


@pytest.fixture
def tiny_result(tiny_spec):
    return run_sweep(tiny_spec)


class TestRunSweep:
    """Test cases for run_sweep."""

    def test_row_count_and_order(self, tiny_spec, tiny_result):
        assert len(tiny_result) == 2 * 2 * 5 * 3
        keys = [row.sort_key() for row in tiny_result.rows]
        assert keys == sorted(keys)

    def test_channels_shared_within_trial(self, tiny_result):
        frame = tiny_result.to_frame()
        digests = frame.groupby("trial")["channel_digest"].nunique()
        assert (digests == 1).all()
        assert frame["channel_digest"].nunique() == 3

    def test_reproducible(self, tiny_spec, tiny_result):
        assert run_sweep(tiny_spec).rows == tiny_result.rows

    def test_independent_of_worker_count(self, tiny_spec, tiny_result):
        assert run_sweep(tiny_spec, workers=3).rows == tiny_result.rows

    def test_seed_changes_channels(self, tiny_spec, tiny_result):
        other = run_sweep(replace(tiny_spec, master_seed=43))
        assert other.rows[0].channel_digest != tiny_result.rows[0].channel_digest

    def test_random_stream_independent_of_other_algorithms(self, tiny_spec):
        alone = run_sweep(replace(tiny_spec, algorithms=("random",)))
        together = run_sweep(replace(tiny_spec, algorithms=("css", "random")))
        random_rows = [row for row in together.rows if row.algorithm == "random"]
        assert random_rows == alone.rows

    def test_random_rows_fill_every_slot(self, tiny_result):
        assert all(row.num_selected == 4 for row in tiny_result.rows if row.algorithm == "random")

    def test_sum_rates_non_negative(self, tiny_result):
        assert all(row.sum_rate >= 0 for row in tiny_result.rows)

    def test_candidate_tracking_can_be_disabled(self, tiny_spec):
        result = run_sweep(replace(tiny_spec, trials=1, track_candidates=False))
        assert all(row.candidate_sizes == () for row in result.rows)

    def test_unknown_algorithm_fails_early(self, tiny_spec):
        with pytest.raises(UnknownSchedulerError, match="Valid schedulers"):
            run_sweep(replace(tiny_spec, algorithms=("css", "max-weight")))

    def test_algorithm_params_apply_to_one_algorithm(self, tiny_spec):
        spec = replace(
            tiny_spec, trials=2, algorithms=("css", "sus"),
            algorithm_params={"css": {"ortho_threshold": 0.0}},
        )
        result = run_sweep(spec)
        assert all(row.num_selected == 1 for row in result.rows if row.algorithm == "css")
        sus_alone = run_sweep(replace(tiny_spec, trials=2, algorithms=("sus",)))
        assert [row for row in result.rows if row.algorithm == "sus"] == sus_alone.rows


class TestSweepSpec:
    """Test cases for SweepSpec validation."""

    def test_n_ol_override(self, small_config):
        spec = SweepSpec((0.0,), (1, 8), 1, small_config, n_ol_overrides={8: 5})
        assert spec.n_ol_for(8) == 5
        assert spec.n_ol_for(1) == small_config.beam_overlap_limit

    def test_grid_points(self, tiny_spec):
        assert tiny_spec.grid_points() == [(0.0, 1), (0.0, 3), (10.0, 1), (10.0, 3)]

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rho_db_grid": ()},
            {"bits_grid": ()},
            {"bits_grid": (0,)},
            {"trials": 0},
            {"algorithms": ()},
            {"master_seed": -1},
        ],
    )
    def test_invalid(self, kwargs):
        fields = {"rho_db_grid": (0.0,), "bits_grid": (2,), "trials": 1}
        fields.update(kwargs)
        with pytest.raises(ConfigError):
            SweepSpec(**fields)

    def test_algorithm_params_normalized(self, small_config):
        spec = SweepSpec(
            (0.0,), (2,), 1, small_config,
            algorithm_params={"CSS": {"ortho_threshold": 1, "beam_overlap_limit": 1.0}},
        )
        assert spec.algorithm_params == {"css": {"ortho_threshold": 1.0, "beam_overlap_limit": 1}}
        css = spec.config_for("css", small_config)
        assert (css.ortho_threshold, css.beam_overlap_limit) == (1.0, 1)
        assert spec.config_for("sus", small_config) is small_config

    @pytest.mark.parametrize(
        "params, message",
        [
            ({"max-weight": {"ortho_threshold": 0.3}}, "Unknown scheduler"),
            ({"css": {"alpha": 0.3}}, "Unknown parameter"),
            ({"css": {"ortho_threshold": 1.5}}, "Invalid parameters for 'css'"),
            ({"sus": {"beam_overlap_limit": -1}}, "Invalid parameters for 'sus'"),
        ],
    )
    def test_invalid_algorithm_params(self, small_config, params, message):
        with pytest.raises(ConfigError, match=message):
            SweepSpec((0.0,), (2,), 1, small_config, algorithm_params=params)


class TestPresets:
    """Test cases for figure presets."""

    def test_power_sweep(self):
        spec = figure_preset("fig2")
        assert spec.rho_db_grid == (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
        assert spec.bits_grid == (2,)
        assert spec.base_config == FULL_SCALE_CONFIG
        assert spec.base_config.num_antennas == 128

    def test_resolution_sweep_schedule(self):
        spec = figure_preset("fig3-desk", master_seed=9)
        assert spec.bits_grid == tuple(range(1, 10))
        assert spec.rho_db_grid == (5.0,)
        assert spec.n_ol_for(8) > spec.n_ol_for(1)
        assert spec.master_seed == 9
        assert spec.base_config == DESK_CONFIG

    def test_set_size_point(self):
        spec = figure_preset("FIG4")
        assert spec.rho_db_grid == (6.0,)
        assert spec.bits_grid == (2,)
        assert spec.trials == 100
        point = spec.base_config.with_power_db(6.0)
        css, sus = spec.config_for("css", point), spec.config_for("sus", point)
        assert css.ortho_threshold < sus.ortho_threshold
        assert css.beam_overlap_limit == spec.n_ol_for(2) == 3

    def test_other_presets_share_parameters(self):
        assert figure_preset("fig2").algorithm_params == {}
        assert figure_preset("fig4-desk").algorithm_params == figure_preset("fig4").algorithm_params

    def test_unknown(self):
        with pytest.raises(UnknownPresetError, match="Valid presets"):
            figure_preset("fig9")


class TestCsv:
    """Test cases for CSV emission and read-back."""

    def test_golden_rows(self, tmp_path):
        row = SweepRow(
            algorithm="css",
            rho_db=5.0,
            bits=2,
            trial=0,
            sum_rate=12.5,
            num_selected=3,
            candidate_sizes=(200, 150, 90),
            evaluations=440,
            channel_digest="0123abcd0123abcd",
        )
        path = emit_csv(SweepResult([row]), tmp_path / "out.csv")
        text = path.read_bytes().decode("utf-8")
        assert text == GOLDEN_HEADER + "\n" + '"css",5.0,2,0,12.5,3,"200;150;90",440,"0123abcd0123abcd"\n'

    def test_round_trip(self, tmp_path, tiny_result):
        path = emit_csv(tiny_result, tmp_path / "nested" / "sweep.csv")
        assert read_csv(path).rows == tiny_result.rows

    def test_header(self, tmp_path, tiny_result):
        path = emit_csv(tiny_result, tmp_path / "sweep.csv")
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == GOLDEN_HEADER
        assert list(pd.read_csv(path).columns) == list(CSV_COLUMNS)

    def test_unwritable_path(self, tmp_path, tiny_result):
        with pytest.raises(OSError):
            emit_csv(tiny_result, tmp_path)


class TestSummaries:
    """Test cases for summarize and candidate_size_profile."""

    def test_summary_columns(self, tiny_result):
        summary = summarize(tiny_result)
        assert len(summary) == 5 * 2 * 2
        assert (summary["trials"] == 3).all()
        assert {"mean_sum_rate", "std_error", "mean_selected", "mean_evaluations", "gain_over_random"} <= set(
            summary.columns
        )

    def test_gain_over_random(self, tiny_result):
        summary = summarize(tiny_result)
        random_rows = summary[summary["algorithm"] == "random"]
        np.testing.assert_allclose(random_rows["gain_over_random"], 0.0, atol=1e-12)
        css = summary[(summary["algorithm"] == "css") & (summary["rho_db"] == 10.0) & (summary["bits"] == 3)]
        rnd = random_rows[(random_rows["rho_db"] == 10.0) & (random_rows["bits"] == 3)]
        expected = css["mean_sum_rate"].iloc[0] / rnd["mean_sum_rate"].iloc[0] - 1
        assert css["gain_over_random"].iloc[0] == pytest.approx(expected)

    def test_mean_matches_rows(self, tiny_result):
        summary = summarize(tiny_result)
        rates = [r.sum_rate for r in tiny_result.rows if (r.algorithm, r.rho_db, r.bits) == ("greedy", 0.0, 1)]
        row = summary[(summary["algorithm"] == "greedy") & (summary["rho_db"] == 0.0) & (summary["bits"] == 1)]
        assert row["mean_sum_rate"].iloc[0] == pytest.approx(np.mean(rates))

    def test_without_random(self, tiny_spec):
        summary = summarize(run_sweep(replace(tiny_spec, trials=1, algorithms=("sus",))))
        assert summary["gain_over_random"].isna().all()

    def test_empty(self):
        assert summarize(SweepResult()).empty
        assert candidate_size_profile(SweepResult()).empty

    def test_profile_first_stage_is_every_user(self, tiny_result):
        profile = candidate_size_profile(tiny_result)
        first = profile[profile["stage"] == 1]
        assert (first["mean_size"] == 12).all()
        greedy = profile[profile["algorithm"] == "greedy"]
        for record in greedy.to_dict("records"):
            assert record["mean_size"] == 12 - record["stage"] + 1


class TestTuning:
    """Test cases for tune_parameters."""

    def test_grid_and_best(self, tiny_spec):
        spec = replace(tiny_spec, trials=2, rho_db_grid=(10.0,), bits_grid=(2,))
        table = tune_parameters(spec, [0.3, 0.9], [1, 4])
        counts = table.groupby("algorithm").size().to_dict()
        assert counts == {"css": 4, "sus": 2, "beam-select": 2}
        assert table["best"].sum() == 3
        assert table[table["algorithm"] == "sus"]["n_ol"].isna().all()
        assert table[table["algorithm"] == "beam-select"]["epsilon"].isna().all()

        best = best_parameters(table)
        assert set(best) == {"css", "sus", "beam-select"}
        assert best["sus"]["n_ol"] is None
        assert best["css"]["epsilon"] in (0.3, 0.9)

    def test_ignores_algorithm_params(self, tiny_spec):
        spec = replace(
            tiny_spec, trials=1, rho_db_grid=(10.0,), bits_grid=(2,), algorithms=("css",),
            algorithm_params={"css": {"ortho_threshold": 0.0}},
        )
        with patch("mmwave_scheduling.harness.run_sweep", wraps=run_sweep) as spy:
            tune_parameters(spec, [0.3, 0.9], [2])
        assert spy.call_count == 2
        assert all(call.args[0].algorithm_params == {} for call in spy.call_args_list)


@pytest.mark.slow
class TestDeskScaleTrends:
    """Desk-scale statistical checks."""

    def test_power_sweep_ordering(self):
        passed, detail = check_power_sweep_trend()
        assert passed, detail

    def test_resolution_sweep_convergence(self):
        passed, detail = check_resolution_sweep_trend()
        assert passed, detail

    def test_candidate_set_shrinkage(self):
        passed, detail = check_candidate_set_shrinkage()
        assert passed, detail
