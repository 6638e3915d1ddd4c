import contextlib
import io
import json
import math

import numpy as np
import pytest

from rslab import cli
from rslab.concentration import QuadratureError
from rslab.semigroup import binary_semigroup
from rslab.sobolev import binary_xi_q, xi_pq_n, xi_q


def run_cli(args):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        rc = cli.main(args)
    return rc, out.getvalue(), err.getvalue()


def parse_csv(text):
    lines = [ln for ln in text.strip().splitlines()
             if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


class TestXi:
    def test_binary_curve_starts_at_zero(self):
        rc, out, _ = run_cli(["xi", "--binary", "--q", "2", "--grid", "64"])
        assert rc == 0
        rows = parse_csv(out)
        assert len(rows) == 64
        assert float(rows[0]["alpha"]) == 0.0
        assert float(rows[0]["value"]) == 0.0

    def test_binary_low_order_curve_monotone(self):
        rc, out, _ = run_cli(["xi", "--binary", "--q", "0.8", "--grid", "64"])
        assert rc == 0
        vals = [float(r["value"]) for r in parse_csv(out)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_binary_curve_matches_closed_form(self):
        rc, out, _ = run_cli(["xi", "--binary", "--q", "3", "--grid", "16"])
        rows = parse_csv(out)
        for r in rows:
            a = float(r["alpha"])
            assert float(r["value"]) == pytest.approx(binary_xi_q(3.0, a),
                                                      abs=1e-10)

    def test_generator_single_value_round_trip(self, tmp_path):
        path = tmp_path / "gen.mat"
        np.savetxt(path, np.array([[-0.5, 0.5], [0.5, -0.5]]))
        rc, out, _ = run_cli(["xi", "--generator", str(path), "--q", "2",
                              "--alpha", "0.2"])
        assert rc == 0
        row = parse_csv(out)[0]
        expect = xi_q(binary_semigroup(), 2.0, 0.2)
        assert float(row["value"]) == pytest.approx(expect, abs=1e-9)
        assert row["kind"] == "xi_q"

    def test_conv_envelope_is_convex(self):
        rc, out, _ = run_cli(["xi", "--binary", "--q", "3", "--grid", "32",
                              "--conv"])
        assert rc == 0
        rows = parse_csv(out)
        assert rows[0]["kind"] == "conv_xi_q"
        vals = np.array([float(r["value"]) for r in rows])
        assert np.min(np.diff(vals, 2)) >= -1e-9

    def test_two_parameter_single_value(self):
        rc, out, _ = run_cli(["xi", "--binary", "--q", "2", "--p", "2",
                              "--n", "1", "--alpha", "0.3"])
        assert rc == 0
        row = parse_csv(out)[0]
        expect = xi_pq_n(binary_semigroup(), 2.0, 2.0, 1, 0.3)
        assert float(row["value"]) == pytest.approx(expect, abs=1e-9)
        assert row["kind"] == "xi_pq_n"
        assert row["n"] == "1"

    def test_json_schema(self):
        rc, out, _ = run_cli(["xi", "--binary", "--q", "2", "--grid", "4",
                              "--format", "json"])
        assert rc == 0
        payload = json.loads(out)
        assert payload["meta"]["subcommand"] == "xi"
        assert payload["meta"]["seed"] == 0
        assert len(payload["rows"]) == 4
        assert payload["rows"][0]["value"] == 0.0


class TestQRadius:
    def test_complete_four(self):
        rc, out, _ = run_cli(["qradius", "--graph", "complete", "4",
                              "--q", "2"])
        assert rc == 0
        assert float(parse_csv(out)[0]["value"]) == pytest.approx(3.0,
                                                                  abs=1e-9)

    def test_hypercube_dimension_flag(self):
        rc, out, _ = run_cli(["qradius", "--graph", "hypercube", "--n", "3",
                              "--q", "inf"])
        assert rc == 0
        assert float(parse_csv(out)[0]["value"]) == pytest.approx(3.0)

    def test_cycle(self):
        rc, out, _ = run_cli(["qradius", "--graph", "cycle", "5", "--q", "1"])
        assert rc == 0
        assert float(parse_csv(out)[0]["value"]) == pytest.approx(2.0)

    def test_subset_restriction(self):
        # the two-edge path inside C5 has spectral radius sqrt(2)
        rc, out, _ = run_cli(["qradius", "--graph", "cycle", "5", "--q", "2",
                              "--subset", "0", "1", "2"])
        assert rc == 0
        assert float(parse_csv(out)[0]["value"]) == pytest.approx(
            math.sqrt(2.0), abs=1e-8)

    def test_graph_file(self, tmp_path):
        path = tmp_path / "tri.g"
        path.write_text("3 3\n0 1\n1 2\n0 2\n")
        rc, out, _ = run_cli(["qradius", "--graph", str(path), "--q", "2"])
        assert rc == 0
        assert float(parse_csv(out)[0]["value"]) == pytest.approx(2.0)


class TestFaberKrahn:
    def test_hypercube_subcube(self):
        rc, out, _ = run_cli(["faber-krahn", "--graph", "hypercube",
                              "--n", "3", "--q", "2", "--m", "4"])
        assert rc == 0
        row = parse_csv(out)[0]
        assert float(row["value"]) == pytest.approx(2.0, abs=1e-9)
        assert row["witness"] == "0 1 2 3"

    def test_bound_dominates_value(self):
        rc, out, _ = run_cli(["faber-krahn", "--graph", "hypercube",
                              "--n", "2", "--q", "2", "--m", "3",
                              "--bound", "--grid", "48"])
        assert rc == 0
        row = parse_csv(out)[0]
        assert float(row["bound"]) >= float(row["value"]) - 1e-8


class TestConcentration:
    def test_gaussian_example(self):
        rc, out, _ = run_cli(["concentration", "--family", "gaussian",
                              "--p", "0", "--r", "1.5"])
        assert rc == 0
        row = parse_csv(out)[0]
        assert float(row["bound"]) == pytest.approx(math.exp(-1.125),
                                                    abs=1e-10)
        assert float(row["q_star"]) == pytest.approx(1.5)

    def test_gaussian_multiple_levels(self):
        rc, out, _ = run_cli(["concentration", "--family", "gaussian",
                              "--p", "1", "--r", "0.25", "2"])
        rows = parse_csv(out)
        assert len(rows) == 2
        # small r sits on the flat branch, large r on the quadratic one
        assert float(rows[0]["bound"]) == pytest.approx(math.exp(-0.25))
        assert float(rows[1]["bound"]) == pytest.approx(math.exp(-3.125))

    def test_binary_beats_baseline(self):
        rc, out, _ = run_cli(["concentration", "--family", "binary",
                              "--n", "10", "--p", "0", "--r", "2"])
        assert rc == 0
        row = parse_csv(out)[0]
        assert float(row["bound"]) <= float(row["baseline"]) - 1e-6
        assert float(row["quad_error"]) <= 1e-8


class TestExtremal:
    def test_dirac_mixture_report(self):
        rc, out, _ = run_cli(["extremal", "--variant", "dirac-mixture",
                              "--binary", "--n", "6", "--p", "3", "--q", "2",
                              "--eps", "0.2", "--beta", "0.3"])
        assert rc == 0
        row = parse_csv(out)[0]
        assert float(row["ent_rate"]) > 0.0
        assert float(row["dirichlet_rate"]) >= 0.0

    def test_missing_beta_rejected(self):
        rc, _, err = run_cli(["extremal", "--variant", "dirac-mixture",
                              "--binary", "--n", "6", "--p", "3", "--q", "2"])
        assert rc == 1
        assert "beta" in err


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["concentration", "--family", "binary", "--n", "6",
                "--p", "0.5", "--r", "1", "--grid", "16"]
        assert cli.main(args + ["--out", str(a)]) == 0
        assert cli.main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_byte_identical_json(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["xi", "--binary", "--q", "1.5", "--grid", "16",
                "--format", "json"]
        assert cli.main(args + ["--out", str(a)]) == 0
        assert cli.main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_help_exits_zero(self):
        rc, _, _ = run_cli(["--help"])
        assert rc == 0

    def test_unknown_subcommand(self):
        rc, _, _ = run_cli(["frobnicate"])
        assert rc == 1

    def test_negative_order(self):
        rc, _, err = run_cli(["xi", "--binary", "--q", "-1", "--grid", "8"])
        assert rc == 1
        assert "error" in err

    def test_missing_generator_file(self):
        rc, _, _ = run_cli(["xi", "--generator", "/no/such/file",
                            "--q", "2", "--alpha", "0.1"])
        assert rc == 1

    def test_binary_and_generator_conflict(self, tmp_path):
        path = tmp_path / "gen.mat"
        np.savetxt(path, np.array([[-0.5, 0.5], [0.5, -0.5]]))
        rc, _, _ = run_cli(["xi", "--binary", "--generator", str(path),
                            "--q", "2", "--alpha", "0.1"])
        assert rc == 1

    def test_support_size_out_of_range(self):
        rc, _, _ = run_cli(["faber-krahn", "--graph", "hypercube",
                            "--n", "2", "--q", "2", "--m", "99"])
        assert rc == 1

    def test_quadrature_failure_maps_to_two(self, monkeypatch):
        def boom(*a, **k):
            raise QuadratureError("forced")
        monkeypatch.setattr(cli, "hypercube_bound", boom)
        rc, _, err = run_cli(["concentration", "--family", "binary",
                              "--n", "4", "--p", "0", "--r", "1"])
        assert rc == 2
        assert "numerical failure" in err

    def test_verify_all_green(self):
        rc, out, _ = run_cli(["verify"])
        assert rc == 0
        assert "FAIL" not in out
        lines = out.strip().splitlines()
        assert lines[-1].endswith("checks passed")

    def test_verify_failure_exits_three(self, monkeypatch):
        monkeypatch.setattr(cli, "_verify_checks",
                            lambda seed: [("always-red", lambda: False)])
        rc, out, _ = run_cli(["verify"])
        assert rc == 3
        assert "always-red: FAIL" in out
