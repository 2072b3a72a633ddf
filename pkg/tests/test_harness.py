import csv
import json

import numpy as np
import pytest

from spadepso.cli import main
from spadepso.harness import (
    TRACE_HEADER,
    ExperimentConfig,
    Report,
    UsageError,
    compare,
    emit_plot_data,
    load_config_file,
    load_report,
    load_reports,
    run_experiment,
)
from spadepso.optimizers import RunResult, TraceRecord
from spadepso.stats import error_stats, wilcoxon_signed_rank


def small(**kw):
    base = dict(optimizer="spade", problem="sphere", dim=3, runs=2, budget=400)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(UsageError, match="valid"):
        small(problem="F42")
    with pytest.raises(UsageError):
        small(optimizer="ga")
    with pytest.raises(UsageError):
        small(runs=0)
    with pytest.raises(UsageError):
        ExperimentConfig(problem="F1", dim=7)
    with pytest.raises(UsageError):
        ExperimentConfig(problem="ssrp", dim=10)
    with pytest.raises(UsageError):
        small(overrides=(("not_a_param", 1),))
    assert ExperimentConfig(problem="ode").dim == 15
    assert ExperimentConfig(problem="f5", dim=30).problem == "F5"


def test_defaults_follow_protocol():
    cfg = ExperimentConfig(problem="F1", dim=10)
    assert cfg.runs == 30 and cfg.seeds == list(range(30))
    assert cfg.effective_budget() == 100000
    assert ExperimentConfig(problem="ode").effective_budget() == 3751 * 40
    assert ExperimentConfig(problem="ode", overrides=(("population", 400),)).effective_budget() == 3751 * 400


def test_single_run_has_zero_std():
    rep = run_experiment(small(runs=1))
    assert rep.aggregate()["std"] == 0.0


def test_seeds_are_base_plus_run_index():
    rep = run_experiment(small(seed=10, runs=3))
    assert [r.seed for r in rep.runs] == [10, 11, 12]
    assert rep.provenance["seeds"] == [10, 11, 12]


def test_report_is_reproducible_and_replayable(tmp_path):
    a = run_experiment(small(out=str(tmp_path / "a")))
    b = run_experiment(small(out=str(tmp_path / "b")))
    ja = (tmp_path / "a" / "spade_sphere_D3.json").read_text()
    jb = (tmp_path / "b" / "spade_sphere_D3.json").read_text()
    assert ja == jb
    loaded = load_report(tmp_path / "a" / "spade_sphere_D3.json")
    replay = run_experiment(loaded.config, write=False)
    assert replay.errors.tolist() == a.errors.tolist()
    assert loaded.provenance["config_hash"] == a.config.config_hash()
    assert b.config.config_hash() == a.config.config_hash()


def test_stored_aggregate_matches_runs(tmp_path):
    run_experiment(small(out=str(tmp_path), runs=3))
    body = json.loads((tmp_path / "spade_sphere_D3.json").read_text())
    errors = [r["error"] for r in body["runs"]]
    best, mean, std = error_stats(errors)
    assert body["aggregate"] == {"best": best, "mean": mean, "std": std}
    assert "timestamp" not in json.dumps(body)


def test_no_partial_files_left(tmp_path):
    run_experiment(small(out=str(tmp_path)))
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]


def test_workers_give_same_results():
    serial = run_experiment(small(runs=3))
    pooled = run_experiment(small(runs=3, workers=2))
    assert serial.errors.tolist() == pooled.errors.tolist()


def _fake(problem, errors, optimizer="spade"):
    cfg = ExperimentConfig(optimizer=optimizer, problem=problem, dim=10, runs=len(errors))
    runs = [RunResult(optimizer, problem, s, np.zeros(10), e, e, 10) for s, e in enumerate(errors)]
    return Report(cfg, runs)


FUNCS = ["F1", "F2", "F3", "F4", "F5"]


def test_compare_with_itself_is_all_ties():
    reps = [_fake(f, [1.0, 2.0]) for f in FUNCS]
    table = compare(reps, reps)
    v = table.verdict
    assert (v.wins, v.losses, v.ties) == (0, 0, 5)
    assert v.cells()[2] == "5 (1.00)"


def test_compare_dominating():
    a = [_fake(f, [1.0, 1.0]) for f in FUNCS]
    b = [_fake(f, [2.0 + i, 2.0]) for i, f in enumerate(FUNCS)]
    v = compare(a, b).verdict
    assert v.wins == 5 and v.p_value == pytest.approx(2 / 32)
    assert v.cells()[0] == "5 (0.06)"


def test_compare_matches_direct_wilcoxon():
    rng = np.random.default_rng(0)
    a = [_fake(f, rng.random(3).tolist()) for f in FUNCS]
    b = [_fake(f, rng.random(3).tolist(), "pso") for f in FUNCS]
    table = compare(a, b)
    direct = wilcoxon_signed_rank([r.errors.mean() for r in a], [r.errors.mean() for r in b])
    assert table.verdict == direct
    assert "spade vs pso" in table.text()


def test_compare_mismatched_sets():
    a = [_fake(f, [1.0]) for f in ["F1", "F2"]]
    b = [_fake(f, [1.0]) for f in ["F2", "F3"]]
    with pytest.raises(UsageError, match="only in a: F1 D=10; only in b: F3 D=10"):
        compare(a, b)


def test_plot_data(tmp_path):
    rec = [TraceRecord(i, 40 * (i + 1), 1.0 / (i + 1), 3.0, 2.0, 2.5, i) for i in range(3)]
    rep = _fake("F1", [1.0])
    rep.runs[0].trace = rec
    (path,) = emit_plot_data(rep, tmp_path)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == TRACE_HEADER
    assert [int(r[0]) for r in rows[1:]] == [0, 1, 2]
    rep.runs[0].trace = []
    (path,) = emit_plot_data(rep, tmp_path)
    assert path.read_text().strip() == ",".join(TRACE_HEADER)


def test_config_file(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text("# protocol\noptimizer = pso\nproblem = F8\ndim = 10\nruns = 3\nw = 0.9, 0.4\nk = 3\n")
    settings = load_config_file(p)
    assert settings["optimizer"] == "pso" and settings["dim"] == 10
    assert settings["overrides"] == {"w": (0.9, 0.4), "k": 3}
    cfg = ExperimentConfig.from_dict(settings)
    assert cfg.spade_config().w == (0.9, 0.4)
    p.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        load_config_file(p)


def test_cli_run_and_compare(tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    args = ["--problem", "sphere", "--dim", "3", "--runs", "2", "--budget", "400"]
    assert main(["run", "--optimizer", "spade", *args, "--out", str(out_a)]) == 0
    assert main(["run", "--optimizer", "pso", *args, "--out", str(out_b)]) == 0
    assert (out_a / "spade_sphere_D3.json").exists()
    assert len(list(out_a.glob("*_trace_seed*.csv"))) == 2
    capsys.readouterr()
    assert main(["compare", "--a", str(out_a), "--b", str(out_b), "--out", str(tmp_path / "v.csv")]) == 0
    text = capsys.readouterr().out
    assert "spade vs pso" in text and "≈" in text
    assert (tmp_path / "v.csv").read_text().startswith("opponent,wins")
    assert len(load_reports([out_a])) == 1


def test_cli_config_and_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("problem = sphere\ndim = 3\nruns = 1\nbudget = 200\nvote_on = pbest\n")
    assert main(["run", "--config", str(cfg), "--set", "k=3", "--out", str(tmp_path)]) == 0
    body = json.loads((tmp_path / "spade_sphere_D3.json").read_text())
    assert body["config"]["overrides"] == {"k": 3, "vote_on": "pbest"}


def test_cli_usage_errors(capsys):
    assert main(["run", "--problem", "F99", "--dim", "10"]) == 2
    assert "valid" in capsys.readouterr().err
    assert main(["run", "--problem", "F1", "--dim", "10", "--set", "bogus=1"]) == 2
    assert main(["compare", "--a", "/nonexistent.json", "--b", "/nonexistent.json"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--optimizer", "ga"])
    assert exc.value.code == 2


def test_cli_spa_demo(capsys):
    assert main(["spa-demo"]) == 0
    out = capsys.readouterr().out
    assert "(1, 3, 1, 3, 2)" in out and "particle 3" in out
