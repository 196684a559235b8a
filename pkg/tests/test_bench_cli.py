import json
import re

import numpy as np
import pytest

from fastmm.bench import CSV_HEADER, BenchRow, bench_rows, bench_run
from fastmm.catalog import builtin, save_triple
from fastmm.cli import ERROR_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_csv_header():
    assert CSV_HEADER == "n,chain,cutoff,reps,median_seconds,gflops,max_rel_error"


def test_bench_shape():
    text = bench_run([128, 256], ["classical", "2"], cutoff=32, reps=3)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    rows = [line.split(",") for line in lines[1:]]
    assert [(r[0], r[1]) for r in rows] == [("256", "classical"), ("256", "2"),
                                            ("128", "classical"), ("128", "2")]
    assert all(float(r[4]) > 0 for r in rows)
    assert all(r[6] == "-1" for r in rows)


def test_bench_chain_order_and_classical_first():
    rows, _ = bench_rows([36], ["3", "2"], cutoff=4, reps=3)
    assert [r.chain for r in rows] == ["classical", "3", "2"]


def test_bench_skips_indivisible(caplog):
    rows, skipped = bench_rows([30, 32], ["2x2"], cutoff=4, reps=3)
    assert [(r.n, r.chain) for r in rows] == [(32, "classical"), (32, "2x2"), (30, "classical")]
    assert len(skipped) == 1 and "n=30" in skipped[0]
    assert "n=30" in caplog.text


def test_bench_check_and_reproducible():
    a, _ = bench_rows([24], ["2,3"], cutoff=1, reps=3, seed=5, check=True)
    b, _ = bench_rows([24], ["2,3"], cutoff=1, reps=3, seed=5, check=True)
    assert [(r.n, r.chain, r.cutoff, r.reps, r.max_rel_error) for r in a] == \
        [(r.n, r.chain, r.cutoff, r.reps, r.max_rel_error) for r in b]
    assert 0 <= a[1].max_rel_error <= 1e-13


def test_bench_rejects_few_reps():
    with pytest.raises(ValueError):
        bench_rows([8], ["2"], reps=2)


def test_gflops_convention():
    fast = BenchRow(1000, "2", 64, 3, 1.0, -1.0)
    slow = BenchRow(1000, "classical", 64, 3, 2.0, -1.0)
    assert fast.gflops == pytest.approx(2.0)
    assert fast.gflops > slow.gflops


def test_no_arguments(capsys):
    code, out, err = run(capsys)
    assert code == 2 and "usage" in err


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--nope"])
    assert exc.value.code == 2


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0 and "laderman-p3\tp=3\trank=23" in out


def test_verify_builtin(capsys):
    code, out, _ = run(capsys, "verify", "--builtin", "strassen-p2")
    assert code == 0 and out.startswith("PASS") and "checked=64" in out


def test_verify_corrupted_file(capsys, tmp_path, strassen):
    doc = json.loads(save_triple(strassen))
    doc["w"][3][0] = 0
    path = tmp_path / "corrupted.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "--algo", str(path))
    assert code == 1
    assert out.startswith("FAIL")
    assert re.search(r"z=3", out)


def test_verify_malformed_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"p": 2}')
    code, _, err = run(capsys, "verify", "--algo", str(path))
    assert code == 2 and "missing field" in err


def test_compose_writes_loadable_json(capsys, tmp_path):
    code, out, _ = run(capsys, "compose", "--chain", "2,3")
    doc = json.loads(out)
    assert code == 0 and (doc["p"], doc["rank"]) == (6, 161)


def test_print_classical(capsys):
    code, out, _ = run(capsys, "print", "--classical", "2")
    assert out.splitlines()[0] == "CDP[0] << (ADP[0]) * (BDP[0]) + (ADP[1]) * (BDP[2])"


def test_run_check(capsys):
    code, out, _ = run(capsys, "run", "--chain", "2,3", "--n", "36", "--cutoff", "1", "--check")
    assert code == 0
    assert "base_multiplies=34776" in out and "OK" in out


def test_run_indivisible(capsys):
    code, _, err = run(capsys, "run", "--chain", "2", "--n", "9")
    assert code == 2 and "indivisible" in err


def test_model_row(capsys):
    code, out, _ = run(capsys, "model", "--chain", "2,3", "--n", "6", "--header")
    header, row = out.splitlines()
    assert header.startswith("n,chain,cutoff,base_multiplies")
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["base_multiplies"] == "161" and fields["workspace_elements"] == "20"


def test_error_row(capsys):
    code, out, _ = run(capsys, "error", "--chain", "2", "--n", "16", "--trials", "3",
                       "--seed", "1", "--dist", "integer", "--header")
    header, row = out.splitlines()
    assert header == ERROR_HEADER
    assert row.split(",")[5:] == ["0.000000e+00", "0.000000e+00"]


def test_codegen_file(capsys, tmp_path):
    dest = tmp_path / "s.c"
    code, _, _ = run(capsys, "codegen", "--chain", "2", "--n", "8", "-o", str(dest))
    text = dest.read_bytes()
    assert code == 0 and text.count(b"    gemm(") == 7 and text.endswith(b"\n")


def test_bench_cli(capsys, tmp_path):
    dest = tmp_path / "b.csv"
    code, _, err = run(capsys, "bench", "--sizes", "16,18", "--chains", "2,3", "--reps", "3",
                       "--cutoff", "4", "--csv", str(dest))
    lines = dest.read_text().splitlines()
    assert code == 0 and lines[0] == CSV_HEADER
    assert [line.split(",")[:2] for line in lines[1:]] == [
        ["18", "classical"], ["18", "2"], ["18", "3"], ["16", "classical"], ["16", "2"]]
