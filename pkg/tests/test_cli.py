import json
import subprocess
import sys

import pytest

from prrtail import cli


def run(*args):
    return cli.main(list(args))


@pytest.fixture
def qs_path(corpus):
    return str(corpus["quickselect"][0].prr_path)


def test_synth_text(qs_path, capsys):
    assert run("synth", qs_path, "--kappa", "n", "--ep", "4*n") == 0
    out = capsys.readouterr().out
    assert "exp(-alpha*ln(alpha) + 2*alpha)" in out


def test_synth_json(qs_path, capsys):
    assert run("synth", qs_path, "--kappa", "n", "--ep", "4*n", "--json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["bounds"][0]["t_bar"] == "ln(alpha)*n^-1"


def test_synth_failure_exit_code(qs_path, capsys):
    assert run("synth", qs_path, "--kappa", "ln(n)", "--ep", "ln(n)", "--B", "1", "--M", "2") == 1


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        run("synth")
    assert e.value.code == 2
    bad = tmp_path / "bad.prr"
    bad.write_text("def p(n; 2) = { oops }")
    assert run("synth", str(bad), "--kappa", "n", "--ep", "n") == 2
    assert run("synth", str(tmp_path / "missing.prr"), "--kappa", "n", "--ep", "n") == 2


def test_simulate_csv(qs_path, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run("simulate", qs_path, "--n", "16", "--samples", "1000", "--seed", "3", "--csv", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "cost" and len(lines) == 1001
    assert json.loads(capsys.readouterr().out)["samples"] == 1000


def test_verify(qs_path, capsys):
    code = run("verify", qs_path, "--bound", "exp(alpha)", "--kappa", "n", "--alpha", "4",
               "--n", "32", "--samples", "2000", "--seed", "1")
    assert code == 0
    code = run("verify", qs_path, "--bound", "exp(-20)", "--kappa", "n", "--alpha", "1",
               "--n", "32", "--samples", "2000", "--seed", "1")
    assert code == 1


def test_comp_bound(qs_path, capsys):
    assert run("comp-bound", qs_path, "--ep", "4*n", "--n-max", "300") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["M_lo"] == pytest.approx(-1, abs=0.2)


def test_bench_matches_golden(tmp_path):
    rows = cli.run_benchmarks(out_dir=tmp_path)
    golden = {r["benchmark"]: r for r in cli.read_rows(cli.golden_path())}
    written = {r["benchmark"]: r for r in cli.read_rows(tmp_path / "bench.csv")}
    assert set(written) == set(golden) and len(rows) == 12
    for name, r in written.items():
        same = all(r[k] == golden[name][k] for k in cli.BENCH_COLUMNS)
        assert same == (r["match"] == "True")


def test_golden_is_reproducible():
    rows = [cli.reference_row(cli.load_benchmark(n)) for n in cli.benchmark_names()]
    assert rows == cli.read_rows(cli.golden_path())


def test_compare_outputs(tmp_path, capsys):
    assert run("compare", "--name", "quickselect", "--out", str(tmp_path)) == 0
    assert (tmp_path / "quickselect_ours.dat").read_text().count("\n") == 52
    assert run("compare", "--name", "rdadder") == 1


def test_configs_carry_reference_data():
    for name in cli.benchmark_names():
        spec = cli.load_benchmark(name)
        assert spec.reference_bound["f"] and spec.reference_bound["bound"]
        if name in ("rdadder", "mc4"):
            assert spec.karp_reference is None
        else:
            assert spec.karp_reference.startswith("exp(")


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "prrtail.cli", "bench", "--name", "randsearch"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "randsearch" in r.stdout
