"""Smoke tests for the elfarol python module."""

import math

import pytest

import elfarol


@pytest.fixture()
def default_config():
    cfg = elfarol.SimConfig()
    cfg.rng_seed = 5
    return cfg


def test_world_basics(default_config):
    grid = default_config.grid
    assert elfarol.is_inside(elfarol.Position(25, 25), grid)
    assert not elfarol.is_inside(elfarol.Position(19, 25), grid)
    assert elfarol.apply_action(elfarol.Position(0, 0), elfarol.Action.X_MINUS, grid) == \
        elfarol.Position(0, 0)
    assert elfarol.signed_boundary_distance(elfarol.Position(25, 25), grid) == pytest.approx(-5.0)
    assert elfarol.signed_boundary_distance(elfarol.Position(35, 25), grid) == pytest.approx(6.0)
    assert default_config.threshold_count == 12


def test_parse_response_fallback():
    out = elfarol.parse_response("Message: hi\nMemory: m\nAction: x+1")
    assert out.message == "hi"
    assert out.action == elfarol.Action.X_PLUS
    assert elfarol.parse_response("gibberish").action == elfarol.Action.STAY


def test_greedy_run_and_replay(tmp_path, default_config):
    cfg = default_config
    cfg.brain.kind = elfarol.BrainKind.GREEDY_TO_BAR
    cfg.max_steps = 60
    run_dir = tmp_path / "run"
    result = elfarol.run_simulation(cfg, run_dir)
    assert result.complete
    assert result.final_attendance == 20

    log = elfarol.load_run(run_dir)
    series = elfarol.attendance_series(log)
    assert len(series) == 61
    assert all(b >= a for a, b in zip(series, series[1:]))
    assert series[-1] == 20

    verdict = elfarol.verify_replay(run_dir, tmp_path / "replay")
    assert verdict.ok


def test_welch_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    a = [3.1, 4.5, 2.2, 5.9, 4.4]
    b = [7.2, 6.1, 8.5, 5.5]
    ours = elfarol.welch_t_test(a, b)
    theirs = scipy_stats.ttest_ind(a, b, equal_var=False)
    assert ours.t == pytest.approx(theirs.statistic, abs=1e-12)
    assert ours.p == pytest.approx(theirs.pvalue, rel=1e-9)


def test_analysis_pipeline(tmp_path, default_config):
    cfg = default_config
    cfg.brain.kind = elfarol.BrainKind.THRESHOLD_RESPONDER
    cfg.max_steps = 80
    run_dir = tmp_path / "run"
    elfarol.run_simulation(cfg, run_dir)
    log = elfarol.load_run(run_dir)

    t_b = elfarol.crowding_time(log)
    assert t_b is not None and t_b >= 0
    rates = elfarol.exit_rate_series(log)
    assert all(0.0 <= r <= 1.0 for r in rates if r is not None)

    files = elfarol.export_report([log], ["run"], tmp_path / "report",
                                  elfarol.ExportFormat.BOTH)
    names = {f.name for f in files}
    assert "attendance.csv" in names
    assert "speed_profile.svg" in names


def test_token_frequencies_and_stopwords(tmp_path, default_config):
    cfg = default_config
    cfg.brain.kind = elfarol.BrainKind.RANDOM_WALK
    cfg.max_steps = 5
    run_dir = tmp_path / "run"
    elfarol.run_simulation(cfg, run_dir)
    log = elfarol.load_run(run_dir)
    freq = elfarol.token_frequencies([log], set())
    assert freq.total == 0  # scripted brains are silent

    stopwords = elfarol.default_stopwords()
    assert "the" in stopwords
    assert "together" not in stopwords


def test_degenerate_welch_raises():
    with pytest.raises(RuntimeError):
        elfarol.welch_t_test([0.0, 0.0], [0.0, 0.0])
