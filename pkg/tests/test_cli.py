import csv
import io as stdio
import json
import math

import pytest

from pbits import cli
from pbits.family import recurrence_output
from pbits.io import load_density
from pbits.linalg import DEFAULT_MAX_DIM, DEFAULT_TOL


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def gen(capsys, tmp_path, *args):
    path = tmp_path / "state.json"
    code, _, err = run(capsys, "gen", *args, "--out", str(path))
    assert code == 0, err
    return path


class TestGlobalFlags:
    def test_defaults(self, monkeypatch):
        for var in ("PBITS_TOL", "PBITS_SEED", "PBITS_MAX_DIM"):
            monkeypatch.delenv(var, raising=False)
        st = cli.resolve_settings(cli.build_parser().parse_args(["verify"]))
        assert st == cli.Settings(DEFAULT_TOL, 0, DEFAULT_MAX_DIM)

    def test_env_then_flag(self, monkeypatch):
        monkeypatch.setenv("PBITS_TOL", "1e-6")
        monkeypatch.setenv("PBITS_SEED", "5")
        st = cli.resolve_settings(cli.build_parser().parse_args(["verify"]))
        assert st.tol == 1e-6 and st.seed == 5
        st = cli.resolve_settings(cli.build_parser().parse_args(["--tol", "1e-8", "--seed", "3", "verify"]))
        assert st.tol == 1e-8 and st.seed == 3

    def test_twelve_digits(self):
        assert cli.fmt(math.pi) == "3.14159265359"
        assert cli.dump_json({"x": 1 / 3}) == '{\n  "x": 0.333333333333\n}'


class TestGenAnalyze:
    def test_gamma_v(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "gamma-v", "--d", "2")
        assert load_density(path).dim == 16
        rep = json.loads(run(capsys, "analyze", str(path))[1])
        assert rep["log_negativity"] == pytest.approx(0.585, abs=1e-3)
        assert rep["block_norm"] == pytest.approx(0.5)
        assert rep["ppt"] is False

    def test_family(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "family", "--p", "0.3", "--d", "2", "--k", "1")
        assert load_density(path).is_valid()
        path2 = gen(capsys, tmp_path, "family", "--p", "0.3", "--d", "2", "--k", "2")
        rep = json.loads(run(capsys, "analyze", str(path2))[1])
        assert rep["ppt"] is False

    def test_basic_pdit(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "basic-pdit", "--d", "3", "--shield-dim", "2")
        rep = json.loads(run(capsys, "analyze", str(path))[1])
        assert rep["dw_rate"] == pytest.approx(math.log2(3), abs=1e-9)

    def test_p_plus_sigma_rate(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "basic-pdit", "--d", "2", "--shield-dim", "2")
        rep = json.loads(run(capsys, "analyze", str(path))[1])
        assert rep["dw_rate"] == pytest.approx(1, abs=1e-9)

    def test_round_trip_matches_memory(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "recurrence", "--p", "0.3", "--d", "2", "--k", "1", "--m", "2")
        from_file = json.loads(run(capsys, "analyze", str(path))[1])
        in_memory = json.loads(cli.dump_json(cli.analyze_state(recurrence_output(0.3, 2, 1, 2), DEFAULT_TOL)))
        assert from_file == in_memory

    def test_errors(self, capsys, tmp_path):
        code, _, err = run(capsys, "gen", "nonsense", "--out", str(tmp_path / "x.json"))
        assert code == 2 and "unknown state" in err
        code, _, err = run(capsys, "gen", "family", "--p", "0.3", "--out", str(tmp_path / "x.json"))
        assert code == 2 and "--d" in err
        code, _, err = run(capsys, "--max-dim", "64", "gen", "family", "--p", "0.3", "--d", "2", "--k", "3",
                           "--out", str(tmp_path / "x.json"))
        assert code == 2
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2")
        assert run(capsys, "analyze", str(bad))[0] == 2


class TestCcqRates:
    def test_ccq_from_state_and_file(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "gamma-v", "--d", "2")
        out_path = tmp_path / "c.json"
        code, out, _ = run(capsys, "ccq", str(path), "--out", str(out_path))
        first = json.loads(out)
        assert code == 0 and first["dw_rate"] == pytest.approx(1)
        second = json.loads(run(capsys, "ccq", str(out_path))[1])
        assert second["holevo"] == pytest.approx(first["holevo"], abs=1e-11)
        names = {i["name"] for i in second["implications"]}
        assert "joint_from_unif_holevo.proof" in names

    def test_rates(self, capsys, tmp_path):
        path = gen(capsys, tmp_path, "flower", "--d", "2")
        rep = json.loads(run(capsys, "rates", str(path), "--samples", "200")[1])
        assert rep["er_upper"] == 1
        assert rep["dw_rate"] == pytest.approx(1)
        assert rep["dw_rate"] <= 1 + 1e-9 and rep["log_negativity"] >= 0
        assert rep["er_lower_witness"] <= 0.5 + 1e-9


class TestSweep:
    def _rows(self, capsys, *argv):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        return list(csv.reader(stdio.StringIO(out)))

    def test_header(self, capsys):
        rows = self._rows(capsys, "family-sweep", "--p", "0.3", "--d", "2", "--k", "1", "--m", "2")
        assert ",".join(rows[0]) == (
            "p,d,k,m,ppt_analytic,min_eig_pt,block_norm_formula,block_norm_numeric,success_prob,dw_rate"
        )

    def test_single_tuple_matches_analyze(self, capsys, tmp_path):
        row = self._rows(capsys, "family-sweep", "--p", "0.3", "--d", "2", "--k", "1", "--m", "2")[1]
        path = gen(capsys, tmp_path, "recurrence", "--p", "0.3", "--d", "2", "--k", "1", "--m", "2")
        rep = json.loads(run(capsys, "analyze", str(path))[1])
        assert float(row[5]) == rep["min_eig_pt"]
        assert float(row[7]) == rep["block_norm"]
        assert float(row[9]) == rep["dw_rate"]

    def test_grid_invariant_and_skips(self, capsys):
        rows = self._rows(capsys, "family-sweep", "--p", "0.3", "--d", "2", "3", "4", "--k", "1", "2", "--m", "1", "2")[1:]
        assert len(rows) == 12
        assert [r[1:4] for r in rows][:2] == [["2", "1", "1"], ["2", "1", "2"]]
        evaluated = [r for r in rows if r[4] != "skipped"]
        assert len(evaluated) == 10
        for r in evaluated:
            assert abs(float(r[6]) - float(r[7])) <= 1e-8

    def test_block_norm_increases_with_k(self, capsys):
        rows = self._rows(capsys, "--max-dim", "1024", "family-sweep",
                          "--p", "0.3", "--d", "2", "--k", "1", "2", "3", "--m", "2")[1:]
        assert float(rows[0][7]) < float(rows[1][7])
        assert rows[2][4:] == ["skipped"] * 6

    def test_jobs_preserve_order(self):
        serial = cli.run_sweep([0.3], [2, 3], [1], [1, 2])
        parallel = cli.run_sweep([0.3], [2, 3], [1], [1, 2], jobs=2)
        assert [r.cells() for r in serial] == [r.cells() for r in parallel]


class TestVerifyDemo:
    def test_verify_passes(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0 and "all invariant groups pass" in out

    def test_verify_deterministic(self, capsys):
        a = run(capsys, "--seed", "7", "verify")[1]
        b = run(capsys, "--seed", "7", "verify")[1]
        assert a == b

    def test_verify_tiny_tolerance_fails(self, capsys):
        code, out, _ = run(capsys, "--tol", "1e-30", "verify")
        assert code != 0 and "FAIL" in out

    def test_pqc_demo(self, capsys):
        code, out, _ = run(capsys, "pqc-demo", "--d", "2", "--k", "1")
        assert code == 0
        assert "probabilities: 0.5 0.5" in out
        assert "psi+ on outcome 1: 1\n" in out and "psi- on outcome 2: 1\n" in out
        assert "Tr(sigma1 sigma2): 0\n" in out
