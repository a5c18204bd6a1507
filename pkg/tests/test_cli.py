import csv
import json
import subprocess
import sys

import pytest

from specop.cli import ConfigError, emit_report, main, parse_config


def _cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_config():
    cfg = parse_config("# comment\nN = 64\nR=8  # box\nt = 0.1, 0.2\nsymbol = lift\n\n")
    assert cfg == {"N": 64, "R": 8.0, "t": [0.1, 0.2], "symbol": "lift"}
    for bad in ("N = 6.5", "nonsense = 1", "N", "N = 1\nN = 2"):
        with pytest.raises(ConfigError):
            parse_config(bad)


def test_heat_spectrum_end_to_end(tmp_path, capsys):
    cfg = _cfg(tmp_path, "n = 1\nN = 256\nR = 12\ns = 2\nt = 0.1\n")
    out = tmp_path / "heat"
    code = main(["heat-spectrum", "--config", cfg, "--out", str(out)])
    rows = list(csv.reader((out / "spectrum.csv").open()))
    assert rows[0] == ["k", "abs_lambda", "singular_value", "predicted_shape", "pass"]
    assert len(rows) == 257
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 257))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema"] == 1
    assert summary["predicted"]["beta"] == 2.0
    # the fitted exponent at t = 0.1 over k in [4, 32] is about 1.4, so the rate verdict fails
    assert summary["verdicts"]["weyl"] and not summary["verdicts"]["computed_beta>=predicted_beta"]
    assert code == 1
    assert "heat-spectrum/computed_beta>=predicted_beta" in capsys.readouterr().out


def test_rerun_is_byte_identical(tmp_path):
    cfg = _cfg(tmp_path, "n = 1\nN = 128\nR = 8\ns = 1\np = 2\nprobes = 6\nJmax = 2\n")
    a, b = tmp_path / "a", tmp_path / "b"
    main(["besov-equiv", "--config", cfg, "--out", str(a), "--seed", "7"])
    main(["besov-equiv", "--config", cfg, "--out", str(b), "--seed", "7"])
    for name in ("measurements.csv", "plot.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "runtimes.json").exists()
    header = (a / "measurements.csv").read_text().splitlines()[0]
    assert header == "probe,computed_seq_norm,computed_besov_norm,computed_ratio"


def test_invalid_hypothesis_exits_three(tmp_path, capsys):
    cfg = _cfg(tmp_path, "N = 64\np = 3\nsigma = 2\ns = 1\nsource = fourier_operator_small_p\n")
    code = main(["fourier-spectrum", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 3
    assert "1 < p <= 2 fails (p=3)" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_missing_config_and_unknown_keys(tmp_path):
    assert main(["symbol-check"]) == 3
    assert main(["symbol-check", "--config", str(tmp_path / "none.cfg")]) == 3
    assert main(["symbol-check", "--config", _cfg(tmp_path, "colour = red\n")]) == 3
    deep = _cfg(tmp_path, "N = 128\nR = 8\nJmax = 4\n", "deep.cfg")
    assert main(["besov-equiv", "--config", deep, "--out", str(tmp_path / "d")]) == 3
    assert main(["report"]) == 3


def test_passing_run_and_report(tmp_path, capsys):
    cfg = _cfg(tmp_path, "n = 1\nN = 128\nR = 8\nsymbol = lift\nrho = 1\n")
    out = tmp_path / "runs" / "sym"
    assert main(["symbol-check", "--config", cfg, "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "runs")]) == 0
    text = capsys.readouterr().out
    assert "symbol-check" in text and "PASS" in text and "all 1 verdicts pass" in text


def test_report_failed_and_empty(tmp_path):
    d = tmp_path / "x"
    d.mkdir()
    text, code = emit_report(d)
    assert code == 2 and "no results" in text
    (d / "summary.json").write_text(json.dumps({"experiment": "demo", "verdicts": {"a": True, "b": False}}))
    text, code = emit_report(d)
    assert code == 1 and "failed: demo/b" in text


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, "N = 64\nR = 6\nsymbol = lift\nrho = 1\nu = 3\nJmax = 1\n")
    proc = subprocess.run([sys.executable, "-m", "specop", "wavelet-transport", "--config", cfg,
                           "--out", str(tmp_path / "w")], capture_output=True, text=True)
    assert proc.returncode in (0, 1), proc.stderr
    assert (tmp_path / "w" / "plot.csv").exists()


def test_bad_seed_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["smoothing", "--config", "x", "--seed", "-1"])
