import json

import pytest

from nctorus.classical import read_word
from nctorus.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_json(capsys):
    code, out, _ = run_cli(capsys, "classify", "--matrix", "1,1,1,2")
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "chaotic_shallow"
    assert d["spectral"]["lambda_surd"] == {"p": 3, "q": 1, "D": 5}
    assert d["spectral"]["entropy_nats_decimal"].startswith("0.96242365011")


def test_global_flags_before_or_after_subcommand(capsys):
    a = run_cli(capsys, "--out", "tsv", "classify", "--matrix", "1,1,1,2")
    b = run_cli(capsys, "classify", "--matrix", "1,1,1,2", "--out", "tsv")
    assert a == b and a[1].splitlines()[1].split("\t")[8] == "chaotic_shallow"


def test_sweep_tsv(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--max-entry", "1")
    assert code == 0 and len(out.strip().splitlines()) == 21
    assert run_cli(capsys, "sweep", "--max-entry", "11")[0] == 2


def test_usage_errors(capsys):
    assert run_cli(capsys, "classify", "--matrix", "1,1,1,1")[0] == 2
    assert run_cli(capsys, "classify")[0] == 2
    assert run_cli(capsys, "frobnicate")[0] == 2
    assert run_cli(capsys, "brudno")[0] == 2
    assert run_cli(capsys, "depth", "--string", "012")[0] == 2


def test_precision_error_exit(capsys):
    code, _, err = run_cli(capsys, "simulate", "--matrix", "1,1,1,2", "--length", "2000", "--precision", "64")
    assert code == 2 and "fractional bits" in err


def test_budget_error_exit(capsys):
    code, _, err = run_cli(capsys, "entropy", "--matrix", "1,1,1,2", "--grid", "4", "--maxn", "7", "--samples", "10")
    assert code == 2 and "n_max" in err


def test_simulate_word_file_and_brudno(tmp_path, capsys):
    path = tmp_path / "w.nctw"
    code, out, _ = run_cli(capsys, "simulate", "--matrix", "1,1,1,2", "--grid", "4", "--length", "2000",
                           "--precision", "4096", "--word-out", str(path))
    assert code == 0 and out.strip() == str(path)
    w = read_word(path)
    assert w.alphabet_size == 16 and len(w) == 2000
    code, out, _ = run_cli(capsys, "brudno", "--word", str(path), "--out", "json")
    d = json.loads(out)
    assert code == 0 and d["length"] == 2000 and "rate_per_binary_digit" in d


def test_simulate_text_output_is_deterministic(capsys):
    argv = ("simulate", "--matrix", "1,1,1,2", "--length", "30", "--seeds", "2", "--seed", "7")
    first, second = run_cli(capsys, *argv), run_cli(capsys, *argv)
    assert first == second and len(first[1].splitlines()) == 2


def test_entropy_and_nats(capsys):
    code, out, _ = run_cli(capsys, "entropy", "--matrix", "1,1,1,2", "--samples", "2000", "--maxn", "3",
                           "--out", "json")
    bits = json.loads(out)
    code, out, _ = run_cli(capsys, "--nats", "entropy", "--matrix", "1,1,1,2", "--samples", "2000", "--maxn", "3",
                           "--out", "json")
    nats = json.loads(out)
    assert nats["rows"][0]["H"] == pytest.approx(bits["rows"][0]["H"] * 0.6931471805599453)


def test_afl_tsv(capsys):
    code, out, err = run_cli(capsys, "afl", "--matrix", "1,1,1,2", "--theta", "1/5", "--maxn", "2")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("n\tdim\tH")
    assert float(lines[2].split("\t")[2]) == pytest.approx(2.0)
    assert "rational" in err


def test_depth_examples(tmp_path, capsys):
    cache = tmp_path / "cache.tsv"
    code, out, _ = run_cli(capsys, "depth", "--string", "0000", "--significance", "1", "--max-prog-len", "14",
                           "--budget", "1024", "--cache", str(cache), "--out", "json")
    d = json.loads(out)
    assert code == 0 and d["canonical_program"] == "010010010" and d["K_upper"] == 9
    assert cache.exists()
    again = run_cli(capsys, "depth", "--string", "0000", "--significance", "1", "--max-prog-len", "14",
                    "--budget", "1024", "--cache", str(cache), "--out", "json")
    assert json.loads(again[1]) == d
    code, out, _ = run_cli(capsys, "depth", "--qubits", '[["1", "0"], ["0", "0"]]', "--max-prog-len", "14",
                           "--budget", "1024", "--out", "json")
    assert code == 0 and set(json.loads(out)["encoding"]) <= {"0", "1"}
    assert run_cli(capsys, "depth", "--qubits", '[["1", "0"], ["1", "0"]]')[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nseed = 7\nout = json\nlength = 30\n")
    code, out, _ = run_cli(capsys, "simulate", "--matrix", "1,1,1,2", "--config", str(cfg))
    d = json.loads(out)
    assert code == 0 and d["seed"] == 7 and d["length"] == 30
    code, out, _ = run_cli(capsys, "simulate", "--matrix", "1,1,1,2", "--config", str(cfg), "--seed", "3")
    assert json.loads(out)["seed"] == 3
    cfg.write_text("bogus = 1\n")
    assert run_cli(capsys, "classify", "--matrix", "1,1,1,2", "--config", str(cfg))[0] == 2


def test_report_command(capsys):
    code, out, _ = run_cli(capsys, "report", "--matrix", "1,1,1,2", "--matrix", "1,1,0,1", "--out", "json")
    d = json.loads(out)
    assert code == 0 and [v["verdict"] for v in d["verdicts"]] == [
        "chaotic_shallow", "nonchaotic_parabolic_indeterminate"]
    assert all(v["evidence"] for v in d["verdicts"])


def test_trace_mode_flag(capsys):
    code, out, _ = run_cli(capsys, "classify", "--matrix=-1,-1,-1,-2", "--trace-mode", "hyperbolic")
    assert code == 0 and json.loads(out)["verdict"] == "chaotic_shallow"
    code, out, _ = run_cli(capsys, "classify", "--matrix=-1,-1,-1,-2", "--trace-mode", "paper")
    assert code == 0 and json.loads(out)["verdict"] == "nonchaotic_indeterminate"
    assert run_cli(capsys, "classify", "--matrix", "1,1,1,2", "--trace-mode", "bogus")[0] == 2
