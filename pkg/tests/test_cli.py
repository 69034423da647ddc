import subprocess
import sys

import pytest

from lmflow.lab.cli import build_parser, cli_main
from lmflow.lab.io import read_series, read_snapshot


def test_run_writes_series(tmp_path, capsys):
    code = cli_main(
        ["run", "--scheme", "modified-lm", "--dt", "1e-3", "--tfinal", "1e-2", "--nx", "32", "--ny", "32",
         "--out-dir", str(tmp_path)]
    )
    assert code == 0
    recs = read_series(tmp_path / "series.csv")
    assert len(recs) == 10
    assert read_snapshot(tmp_path / "final.csv").shape == (32, 32)
    assert "steps=10" in capsys.readouterr().out


def test_run_binary_snapshots(tmp_path):
    code = cli_main(
        ["run", "--nx", "16", "--ny", "16", "--tfinal", "4e-3", "--snapshot-every", "2",
         "--snapshot-format", "bin", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    assert sorted(p.name for p in tmp_path.glob("*.bin")) == [
        "final.bin", "snap_000000.bin", "snap_000002.bin", "snap_000004.bin"
    ]


def test_fig1_modified_lm_decreases_energy(tmp_path):
    assert cli_main(["fig1", "--scheme", "modified-lm", "--dt", "1e-3", "--out-dir", str(tmp_path)]) == 0
    recs = read_series(tmp_path / "series.csv")
    assert len(recs) == 50
    assert recs[-1].energy < recs[0].energy


@pytest.mark.parametrize("dt", ["1e-3", "1e-4"])
def test_fig1_original_lm_exits_cleanly(tmp_path, dt, capsys):
    code = cli_main(["fig1", "--scheme", "original-lm", "--dt", dt, "--out-dir", str(tmp_path)])
    err = capsys.readouterr().err
    if code == 2:
        assert "step" in err
    else:
        assert code == 0
    for rec in read_series(tmp_path / "series.csv"):
        assert rec.energy == rec.energy


def test_fig1_does_not_expose_preset_flags(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli_main(["fig1", "--eps2", "0.1", "--out-dir", str(tmp_path)])
    assert info.value.code == 1


def test_unknown_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as info:
        cli_main(["run", "--bogus"])
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_config_error_exits_1(tmp_path, capsys):
    code = cli_main(["run", "--dt", "3e-3", "--tfinal", "1e-2", "--out-dir", str(tmp_path)])
    assert code == 1
    assert "not a whole number" in capsys.readouterr().err


def test_bad_init_file_exits_1(tmp_path):
    code = cli_main(["run", "--init", f"file:{tmp_path / 'missing.csv'}", "--out-dir", str(tmp_path)])
    assert code == 1


def test_converge(tmp_path, capsys):
    code = cli_main(["converge", "--dts", "4e-4,2e-4,1e-4", "--nx", "16", "--ny", "16", "--tfinal", "1.6e-3",
                     "--out-dir", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    orders = [ln.split(",")[-1] for ln in lines[2:] if ln.split(",")[-1]]
    assert len(orders) == 2


def test_converge_bad_dts(tmp_path):
    assert cli_main(["converge", "--dts", "4e-4,x", "--out-dir", str(tmp_path)]) == 1


def test_deterministic_series(tmp_path):
    args = ["run", "--nx", "32", "--ny", "32", "--tfinal", "5e-3", "--seed", "11"]
    assert cli_main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "series.csv").read_bytes() == (tmp_path / "b" / "series.csv").read_bytes()


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LMFLOW_OUT_DIR", str(tmp_path))
    assert cli_main(["run", "--nx", "16", "--ny", "16", "--tfinal", "2e-3"]) == 0
    assert (tmp_path / "series.csv").exists()


def test_parser_defaults():
    args = build_parser().parse_args(["converge", "--dts", "1e-3,5e-4"])
    assert args.scheme == "original-lm" and args.nx == 64 and args.init == "modes:1:0,0:2"
    args = build_parser().parse_args(["fig1"])
    assert args.eps2 == 0.06 and args.mean == 0.3 and args.amp == 0.01 and args.gamma is None


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lmflow", "run", "--nx", "16", "--ny", "16", "--tfinal", "2e-3",
         "--out-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "lmflow", "run", "--nope"], capture_output=True, text=True)
    assert proc.returncode == 1
