import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from satrelay import analytic as an
from satrelay import cli
from satrelay.config import ScenarioConfig


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestEvaluate:
    def test_coverage_pass_through(self, capsys):
        code, out, _ = run(capsys, "coverage")
        c = ScenarioConfig.load()
        want = an.coverage_ni_exact(c.geometry_params(), c.rician(), c.thresholds["gamma_th"]).value
        assert code == 0
        assert json.loads(out)["value"] == want

    def test_e2e_interference_pass_through(self, capsys):
        sets = ["geometry.H1=10 km", "geometry.L=5 km", "geometry.T_I=50 km"]
        argv = ["e2e", "--scenario", "is"] + [x for s in sets for x in ("--set", s)]
        code, out, _ = run(capsys, *argv)
        c = ScenarioConfig.load(overrides=sets)
        want = an.e2e_outage(
            c.geometry_params(), c.shadowed_rician(), "is", 1.0, 1.0, ip=c.interference(), orders=c.orders()
        ).value
        assert code == 0
        assert json.loads(out)["value"] == want

    def test_outage_refine_and_orders(self, capsys):
        code, out, _ = run(capsys, "outage", "--refine", "--orders", "20")
        rec = json.loads(out)
        assert code == 0
        assert rec["orders"] == {"G": 20, "H": 20, "J": 20, "Q": 20}
        assert rec["refinement_delta"] < 1e-2

    def test_outage_fixed_distance(self, capsys):
        code, out, _ = run(capsys, "outage", "--d0", "1500")
        c = ScenarioConfig.load()
        assert json.loads(out)["value"] == an.outage_sr_conditional(1500.0, c.shadowed_rician(), 1.0)

    def test_csv_output(self, capsys, tmp_path):
        target = tmp_path / "cov.csv"
        code, out, _ = run(capsys, "coverage", "--scenario", "is", "--format", "csv", "--out", str(target))
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 1
        assert rows[0]["orders.G"] == "50"
        assert target.read_text() == out

    def test_malformed_unit(self, capsys):
        code, _, err = run(capsys, "coverage", "--set", "power.P_R=1 dbm")
        assert code == 2
        assert "power.P_R" in err

    def test_unknown_field(self, capsys):
        code, _, err = run(capsys, "coverage", "--set", "channel.Kappa=1")
        assert code == 2 and "channel.Kappa" in err

    def test_unsupported_exponent(self, capsys):
        code, _, err = run(capsys, "coverage", "--scenario", "is", "--set", "channel.n2=3")
        assert code == 2

    def test_print_config(self, capsys, tmp_path):
        code, out, _ = run(capsys, "coverage", "--print-config", "--set", "channel.K=0 dB", "--seed", "9")
        assert code == 0
        path = tmp_path / "eff.yaml"
        path.write_text(out)
        c = ScenarioConfig.load(path)
        assert c.channel["K"] == 1.0 and c.mc["seed"] == 9


class TestValidate:
    def test_coverage_passes(self, capsys):
        code, out, _ = run(capsys, "validate", "coverage-ni", "--trials", "200000")
        rec = json.loads(out)
        assert code == 0 and rec["pass"] and abs(rec["z"]) <= 3

    def test_repeatable(self, capsys):
        a = run(capsys, "validate", "cdf-z", "--trials", "50000", "--seed", "4")
        b = run(capsys, "validate", "cdf-z", "--trials", "50000", "--seed", "4")
        assert a == b

    def test_se_scaling(self, capsys):
        _, small, _ = run(capsys, "validate", "coverage-ni", "--trials", "100")
        _, large, _ = run(capsys, "validate", "coverage-ni", "--trials", "10000")
        ratio = json.loads(small)["std_error"] / json.loads(large)["std_error"]
        assert ratio == pytest.approx(10.0, rel=0.2)

    def test_failure_exit_code(self, capsys):
        # the fitted closed form is biased by ~1e-2, far outside 3 SE at 1e6 trials
        code, out, _ = run(capsys, "validate", "e2e-ni", "--method", "approx")
        assert code == 4 and not json.loads(out)["pass"]

    def test_fixed_needs_distance(self, capsys):
        code, _, err = run(capsys, "validate", "outage-sr-fixed")
        assert code == 2 and "--d0" in err


class TestSweep:
    def column(self, out, name):
        return [float(r[name]) for r in csv.DictReader(io.StringIO(out))]

    def test_omega_r(self, capsys):
        code, out, _ = run(capsys, "sweep", "--metric", "coverage", "--axis", "channel.Omega_R",
                           "--grid", "0", "50", "11", "--unit", "dB")
        assert code == 0
        assert np.all(np.diff(self.column(out, "coverage")) >= 0)
        assert out.splitlines()[0] == "channel.Omega_R,linear,coverage"

    def test_h1(self, capsys):
        code, out, _ = run(capsys, "sweep", "--metric", "coverage", "--axis", "geometry.H1",
                           "--values", "1 km", "5 km", "10 km", "20 km", "40 km")
        assert code == 0
        assert np.all(np.diff(self.column(out, "coverage")) <= 0)

    def test_deadline(self, capsys):
        code, out, _ = run(capsys, "sweep", "--metric", "eta", "--axis", "optimizer.T_total",
                           "--grid", "0.5", "3", "6")
        assert code == 0
        assert np.all(np.diff(self.column(out, "eta")) >= 0)

    def test_needs_values(self, capsys):
        code, _, _ = run(capsys, "sweep", "--metric", "outage", "--axis", "geometry.Psi")
        assert code == 2

    def test_bad_axis(self, capsys):
        code, _, err = run(capsys, "sweep", "--metric", "outage", "--axis", "geometry.Q", "--values", "1")
        assert code == 2


class TestOptimize:
    def test_symmetric(self, capsys):
        sets = ["optimizer.gamma_SR=1 linear", "optimizer.gamma_RD=1 linear", "optimizer.T_total=2",
                "optimizer.P_R_max=50 W"]
        code, out, _ = run(capsys, "optimize", *[x for s in sets for x in ("--set", s)])
        rec = json.loads(out)
        assert code == 0 and rec["converged"]
        assert rec["T_S"] == pytest.approx(1.0) and rec["T_R"] == pytest.approx(1.0)
        assert rec["lambda_trace"][0] == 0.0

    def test_infeasible(self, capsys):
        code, _, err = run(capsys, "optimize", "--set", "optimizer.T_total=0.01")
        assert code == 3
        assert "T_S_min=" in err and "T_R_min=" in err


def _cli(args, workers):
    env = dict(os.environ, SATRELAY_WORKERS=str(workers))
    return subprocess.run(
        [sys.executable, "-m", "satrelay", *args], capture_output=True, env=env, check=False
    )


@pytest.mark.parametrize(
    "args",
    [
        ["validate", "e2e-is", "--trials", "300000", "--seed", "11"],
        ["optimize", "--scenario", "is", "--format", "csv"],
        ["sweep", "--metric", "outage", "--axis", "geometry.Psi", "--values", "30 deg", "60 deg"],
    ],
)
def test_byte_identical(args):
    first = _cli(args, 1)
    second = _cli(args, 3)
    assert first.returncode == 0
    assert first.stdout == second.stdout
