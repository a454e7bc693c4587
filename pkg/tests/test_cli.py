import csv
import json

import pytest

import nlasim.nla
from nlasim import DiagonalAmplifierOp
from nlasim.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    header = []
    with open(path, newline="") as handle:
        rows = [line for line in handle if not line.startswith("#")]
        header = [line for line in open(path) if line.startswith("#")]
    return header, list(csv.DictReader(rows))


class TestOutputs:
    def test_byte_identical_reruns(self, tmp_path):
        args = ["fig3", "--sweep", "gain=1.2:1.6:3", "--sweep", "alpha=0.3:0.3:1"]
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert main(args + ["--out", str(first)]) == 0
        assert main(args + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_header_records_config_and_seed(self, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["amplify", "--alpha", "0.1", "--seed", "9", "--out", str(out)]) == 0
        header, rows = read_csv(out)
        joined = "".join(header)
        assert '"seed": 9' in joined
        assert "# provenance:" in joined
        assert rows and "success_prob" in rows[0]

    def test_json_mirrors_csv_rows(self, tmp_path):
        csv_path = tmp_path / "t.csv"
        json_path = tmp_path / "t.json"
        base = ["distill", "--squeeze-r", "0.1", "--arms", "2", "--eta", "0.05"]
        assert main(base + ["--out", str(csv_path)]) == 0
        assert main(base + ["--format", "json", "--out", str(json_path)]) == 0
        payload = json.loads(json_path.read_text())
        _, rows = read_csv(csv_path)
        assert len(payload["rows"]) == len(rows) == 1
        assert payload["rows"][0]["chi_prime"] == pytest.approx(
            float(rows[0]["chi_prime"]), rel=1e-10
        )
        assert payload["config"]["seed"] == 0
        assert payload["version"]

    def test_probabilities_emitted_raw_and_percent(self, capsys):
        code, out, _ = run_cli(
            ["amplify", "--alpha", "0.0,0.0", "--arms", "2", "--eta", "0.05"], capsys
        )
        assert code == 0
        table = [line for line in out.splitlines() if not line.startswith("#")]
        cols = table[0].split(",")
        row = table[1].split(",")
        raw = float(row[cols.index("success_prob")])
        pct = float(row[cols.index("success_prob_pct")])
        assert pct == pytest.approx(100.0 * raw, rel=1e-12)
        assert raw == pytest.approx(0.0025, rel=1e-9)


class TestAmplify:
    def test_overfull_number_state_flagged(self, capsys):
        code, out, _ = run_cli(
            ["amplify", "--fock", "3", "--arms", "2", "--eta", "0.3"], capsys
        )
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        cols = lines[0].split(",")
        row = lines[1].split(",")
        assert row[cols.index("zero_output")] == "true"
        assert float(row[cols.index("success_prob")]) == 0.0

    def test_alpha_and_fock_exclusive(self, capsys):
        code, _, err = run_cli(["amplify", "--alpha", "0.1", "--fock", "1"], capsys)
        assert code == 1
        assert "configuration error" in err

    def test_misfire_mode(self, capsys):
        code, out, _ = run_cli(
            ["amplify", "--alpha", "0.3", "--arms", "5", "--gamma", "0.01"], capsys
        )
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        cols = lines[0].split(",")
        row = lines[1].split(",")
        assert 0.0 < float(row[cols.index("purity")]) <= 1.0
        assert float(row[cols.index("term_fidelity")]) > 0.95
        probs = [float(l.split(",")[cols.index("prob_n")]) for l in lines[1:]]
        assert sum(probs) == pytest.approx(1.0, abs=1e-9)

    def test_misfire_needs_coherent_input(self, capsys):
        code, _, err = run_cli(["amplify", "--fock", "1", "--gamma", "0.01"], capsys)
        assert code == 1


class TestExitCodes:
    def test_bad_flag_value(self, capsys):
        code, _, err = run_cli(["amplify", "--alpha", "0.1", "--eta", "2.0"], capsys)
        assert code == 1

    def test_unparseable_sweep(self, capsys):
        code, _, err = run_cli(["fig3", "--sweep", "gain=oops"], capsys)
        assert code == 1

    def test_nonconvergent_request(self, capsys):
        code, _, err = run_cli(
            ["distill", "--chi", "0.6", "--asymptotic", "--gain", "2", "--loss", "1"],
            capsys,
        )
        assert code == 3
        assert "nonconvergent" in err

    def test_verify_passes(self, capsys):
        code, out, _ = run_cli(["verify", "--samples", "30000"], capsys)
        assert code == 0
        assert "oracle_equivalence,pass" in out

    def test_verify_detects_corrupted_operator(self, capsys, monkeypatch):
        # classic bookkeeping fault: per-pattern prefactor instead of the
        # pattern-summed one
        true_operator = nlasim.nla.nla_operator

        def corrupted(arm_count, eta, cutoff):
            op = true_operator(arm_count, eta, cutoff)
            return DiagonalAmplifierOp(
                op.arm_count,
                op.eta,
                op.gain,
                op.cutoff,
                op.coeffs * 2.0 ** (-arm_count / 2.0),
            )

        monkeypatch.setattr(nlasim.nla, "nla_operator", corrupted)
        code, out, _ = run_cli(["verify", "--samples", "30000"], capsys)
        assert code == 2
        assert "oracle_equivalence,fail" in out

    def test_verify_skips_beyond_oracle_limit(self, capsys):
        code, out, _ = run_cli(
            ["verify", "--samples", "30000", "--arms", "7"], capsys
        )
        assert code == 0
        assert "skipped" in out and "beyond oracle limit" in out


class TestFigureTables:
    def test_fig3_columns(self, capsys):
        code, out, _ = run_cli(
            ["fig3", "--sweep", "gain=1.3:1.5:3", "--sweep", "alpha=0.25:0.5:2"],
            capsys,
        )
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == (
            "eta,alpha,target_gain,fidelity,success_prob,success_prob_pct,device_gain"
        )
        # two etas x two alphas x three gains
        assert len(lines) - 1 == 12

    def test_fig4_trend_columns(self, capsys):
        code, out, _ = run_cli(["fig4", "--sweep", "gain=1:2:3"], capsys)
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        cols = lines[0].split(",")
        for name in ("chi_source", "gain", "success_prob", "v_minus", "product"):
            assert name in cols
        products = [float(l.split(",")[cols.index("product")]) for l in lines[1:]]
        assert products[0] > products[-1] >= 1.0 - 1e-9

    def test_module_entry_point(self, tmp_path):
        import subprocess
        import sys

        out = tmp_path / "m.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "nlasim", "amplify", "--alpha", "0.1",
             "--out", str(out)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert out.read_text().startswith("# tool: nlasim")

    def test_clone_row(self, capsys):
        code, out, _ = run_cli(["clone", "--alpha", "0.5", "--asymptotic"], capsys)
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        cols = lines[0].split(",")
        row = lines[1].split(",")
        assert float(row[cols.index("clone1_fidelity")]) == pytest.approx(1.0, abs=1e-9)
        assert float(row[cols.index("clone2_fidelity")]) == pytest.approx(1.0, abs=1e-9)
