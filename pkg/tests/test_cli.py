import json
import os
import subprocess
import sys

import pytest

PKG_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_cli(args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "relu_forge.cli"] + args,
        capture_output=True,
        text=True,
        cwd=PKG_ROOT,
        **kw,
    )


def report_bytes(outdir, name):
    files = sorted(f for f in os.listdir(outdir) if f.endswith(".report.json"))
    assert len(files) == 1, files
    assert files[0].startswith(name)
    with open(os.path.join(outdir, files[0]), "rb") as fh:
        return fh.read()


def test_unknown_subcommand_exits_64():
    res = run_cli(["frobnicate"])
    assert res.returncode == 64
    assert "unknown subcommand" in res.stderr


def test_no_args_prints_usage():
    res = run_cli([])
    assert res.returncode == 0
    assert "subcommands" in res.stdout


def test_flag_validation_exits_1():
    res = run_cli(["deepen", "--epsilon", "0"])
    assert res.returncode == 1
    res = run_cli(["deepen", "--no-such-flag"])
    assert res.returncode == 1


def test_io_error_exits_1(tmp_path):
    res = run_cli(
        ["train", "--data-path", str(tmp_path / "missing.csv"), "--out",
         str(tmp_path)]
    )
    assert res.returncode == 1


def test_deepen_end_to_end_and_rerun_identical(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    flags = [
        "deepen", "--d", "1", "--m", "8", "--epsilon", "0.2",
        "--mc-budget", "5000", "--seed", "3",
    ]
    res = run_cli(flags + ["--out", out1])
    assert res.returncode == 0, res.stderr
    res = run_cli(flags + ["--out", out2])
    assert res.returncode == 0
    assert report_bytes(out1, "deepen") == report_bytes(out2, "deepen")


def test_deepen_json_mode(tmp_path):
    res = run_cli(
        [
            "deepen", "--d", "1", "--m", "6", "--epsilon", "0.25",
            "--mc-budget", "5000", "--json", "--out", str(tmp_path),
        ]
    )
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)
    assert payload["schema_version"] == 1
    assert payload["interpolation_residual"] <= 1e-8


def test_invariant_failure_exits_2(tmp_path):
    # a diverging run trips the not_diverged check
    res = run_cli(
        [
            "train", "--m", "40", "--width", "16", "--lr", "1e9",
            "--epochs", "300", "--out", str(tmp_path),
        ]
    )
    assert res.returncode == 2
    assert "FAILED checks" in res.stderr


@pytest.mark.parametrize(
    "args,name",
    [
        (["bad-interp", "--m", "4", "--mc-budget", "5000"], "bad-interp"),
        (
            ["approx-rate", "--N-list", "4,8,16", "--grid-res", "65"],
            "approx-rate",
        ),
        (["interp-fit", "--N", "12", "--m", "6"], "interp-fit"),
        (
            ["train", "--m", "50", "--width", "8", "--epochs", "150",
             "--record-every", "50"],
            "train",
        ),
        (
            ["sweep", "--m", "40", "--widths", "2,32", "--depths", "1",
             "--epochs", "400", "--early-stop", "1e-2"],
            "sweep",
        ),
        (["norms", "--fn", "psi", "--budget", "2000"], "norms"),
        (
            ["verify-gates", "--ell-list", "2", "--nu-list", "1e-2,1e-3"],
            "verify-gates",
        ),
    ],
)
def test_subcommands_pass_and_write_reports(tmp_path, args, name):
    res = run_cli(args + ["--out", str(tmp_path)])
    assert res.returncode == 0, (res.stdout, res.stderr)
    blob = report_bytes(str(tmp_path), name)
    payload = json.loads(blob)
    assert payload["schema_version"] == 1
    assert all(payload["checks"].values())


def test_train_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"width": 24, "epochs": 120, "record_every": 40}')
    res = run_cli(
        ["train", "--config", str(cfg), "--m", "40", "--json",
         "--out", str(tmp_path / "runs")]
    )
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)
    assert payload["width"] == 24 and payload["epochs_run"] == 120
    # explicit flags still override the config file
    res = run_cli(
        ["train", "--config", str(cfg), "--width", "6", "--m", "40",
         "--json", "--out", str(tmp_path / "runs2")]
    )
    assert json.loads(res.stdout)["width"] == 6
    bad = tmp_path / "bad.json"
    bad.write_text('{"no_such_flag": 1}')
    res = run_cli(["train", "--config", str(bad), "--out", str(tmp_path)])
    assert res.returncode == 1


def test_teacher_roundtrip_through_cli(tmp_path):
    out = str(tmp_path / "first")
    res = run_cli(
        ["deepen", "--d", "2", "--m", "6", "--epsilon", "0.3",
         "--mc-budget", "5000", "--out", out]
    )
    assert res.returncode == 0
    student = [f for f in os.listdir(out) if f.endswith("student.json")][0]
    res = run_cli(
        [
            "deepen", "--teacher-path", os.path.join(out, student),
            "--d", "2", "--m", "4", "--epsilon", "0.3",
            "--mc-budget", "5000", "--out", str(tmp_path / "second"),
        ]
    )
    assert res.returncode == 0, res.stderr
