import json

import numpy as np
import pytest

from ddsc.checkpoint import load_checkpoint
from ddsc.cli import main
from ddsc.config import ConfigError, build_config, dump_config, read_config_text

SMALL = ["--set", "dataset.n_per_class_device=20", "--set", "dataset.label_fraction=0.25",
         "--set", "dataset.F_raw=8"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "r"
    code, stdout, _ = run_cli(capsys, "run", "--strategies", "uniform,ddsc", "--seeds", "3", "--epochs", "4",
                              "--out", str(out), *SMALL)
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["config.cfg", "curves.csv", "summary.json"]
    lines = (out / "curves.csv").read_text().splitlines()
    assert lines[0].startswith("# generated ")
    assert len(lines) == 2 + 6 * 4
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["strategies"]) == {"uniform", "ddsc"}
    assert summary["strategies"]["ddsc"]["n_seeds"] == 3
    assert "uniform" in summary["ddsc_unseen_delta_pct"]
    assert "ddsc" in stdout


def test_rerun_is_byte_identical(tmp_path, capsys):
    args = ["run", "--strategies", "ddsc,static_entropy", "--seeds", "2", "--epochs", "3", *SMALL]
    for d in ("a", "b"):
        assert run_cli(capsys, *args, "--out", str(tmp_path / d))[0] == 0
    a = (tmp_path / "a" / "curves.csv").read_text().splitlines()[1:]
    b = (tmp_path / "b" / "curves.csv").read_text().splitlines()[1:]
    assert a == b
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()


def test_resolved_config_reproduces_run(tmp_path, capsys):
    assert run_cli(capsys, "run", "--strategies", "uniform", "--seeds", "5,9", "--epochs", "2",
                   "--out", str(tmp_path / "a"), *SMALL)[0] == 0
    cfg = tmp_path / "a" / "config.cfg"
    assert run_cli(capsys, "run", "--config", str(cfg), "--out", str(tmp_path / "b"))[0] == 0
    a = (tmp_path / "a" / "curves.csv").read_text().splitlines()[1:]
    b = (tmp_path / "b" / "curves.csv").read_text().splitlines()[1:]
    assert a == b and a[1].startswith("uniform,5,")


def test_checkpoints_and_inspect(tmp_path, capsys):
    out = tmp_path / "r"
    assert run_cli(capsys, "run", "--strategies", "ddsc", "--seeds", "1", "--epochs", "6",
                   "--checkpoints", "on", "--out", str(out), *SMALL)[0] == 0
    cks = sorted((out / "checkpoints").iterdir())
    assert len(cks) == 6
    code, text, _ = run_cli(capsys, "inspect", str(cks[0]))
    assert code == 0
    assert "epoch: 1/6" in text
    assert "epoch weights:" in text and "uniform=yes" in text.split("next-epoch")[0]
    state = load_checkpoint(cks[1])
    assert np.allclose(np.linalg.norm(state.bank.prototypes, axis=1), 1.0, atol=1e-9)
    code, text, _ = run_cli(capsys, "inspect", str(cks[1]))
    assert "dev0=1" in text and "lambda:" in text
    # next-epoch weights at an early epoch are dominated by the invariance score
    top = int(np.argmax(state.next_weights))
    assert state.ledger.H_hat[top] > np.median(state.ledger.H_hat)


def test_inspect_corrupt(tmp_path, capsys):
    bad = tmp_path / "x.json"
    bad.write_text("garbage")
    code, _, err = run_cli(capsys, "inspect", str(bad))
    assert code == 1 and "unreadable checkpoint" in err


def test_validate_prints_defaults(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("run.strategies = ddsc\nrun.epochs = 10\nrun.seeds = 2\n")
    code, out, _ = run_cli(capsys, "validate", "--config", str(cfg))
    assert code == 0
    for line in ("schedule.lambda_min = 0.2", "schedule.tau = 0.1", "schedule.beta = 0.9",
                 "schedule.gamma = 0.3", "schedule.eta_H = 0.7", "schedule.epsilon = 1e-12"):
        assert line in out.splitlines()


@pytest.mark.parametrize("extra,key,msg", [
    (["--set", "schedule.lambda_min=1.5"], "schedule.lambda_min", "out of [0,1)"),
    (["--set", "schedule.bogus=1"], "schedule.bogus", "unknown key"),
    (["--set", "schedule.tau=abc"], "schedule.tau", "invalid value"),
    (["--strategies", "ddsc,magic"], "run.strategies", "unknown strategy"),
])
def test_validate_rejects(capsys, extra, key, msg):
    code, _, err = run_cli(capsys, "validate", "--strategies", "ddsc", "--epochs", "3", "--seeds", "1", *extra)
    assert code == 2
    assert key in err and msg in err


def test_missing_required_field(tmp_path, capsys):
    code, _, err = run_cli(capsys, "run", "--strategies", "ddsc", "--seeds", "2", "--out", str(tmp_path / "o"))
    assert code == 2 and "run.epochs" in err and "missing required field" in err


def test_default_out_root(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DDSC_OUT_ROOT", str(tmp_path / "root"))
    assert run_cli(capsys, "run", "--strategies", "uniform", "--seeds", "1", "--epochs", "1", *SMALL)[0] == 0
    (run_dir,) = (tmp_path / "root").iterdir()
    assert run_dir.name.startswith("run-") and (run_dir / "curves.csv").exists()


def test_refuses_nonempty_out(tmp_path, capsys):
    (tmp_path / "keep.txt").write_text("x")
    code, _, err = run_cli(capsys, "run", "--strategies", "uniform", "--seeds", "1", "--epochs", "1",
                           "--out", str(tmp_path))
    assert code == 2 and "not empty" in err


def test_config_text_round_trip():
    raw = read_config_text("run.strategies = ddsc, uniform  # two\nrun.epochs = 7\nrun.seeds = 4,\n"
                           "schedule.beta = 0.85\n")
    cfg = build_config(raw)
    assert cfg.run.seeds == (4,) and cfg.schedule.T == 7 and cfg.schedule.beta == 0.85
    assert build_config(read_config_text(dump_config(cfg))) == cfg
    with pytest.raises(ConfigError, match="duplicate"):
        read_config_text("a.b = 1\na.b = 2\n")


def test_runtime_failure_reports_context(tmp_path, capsys, monkeypatch):
    from ddsc.bench import backbone

    orig = backbone.ToyBackbone.per_sample_loss
    calls = {"n": 0}

    def flaky(self, idx):
        calls["n"] += 1
        out = orig(self, idx)
        return out * np.nan if calls["n"] > 3 else out

    monkeypatch.setattr(backbone.ToyBackbone, "per_sample_loss", flaky)
    code, _, err = run_cli(capsys, "run", "--strategies", "ddsc", "--seeds", "1", "--epochs", "3",
                           "--out", str(tmp_path / "o"), *SMALL)
    assert code == 1
    assert "strategy=ddsc seed=0 epoch=" in err and "non-finite loss" in err
