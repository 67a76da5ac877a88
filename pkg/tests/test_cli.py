import csv
import io
import json
import math

import numpy as np
import pytest

from cvloc import states
from cvloc.cli import main
from cvloc.cmfile import write_cm
from cvloc.gaussian import ptranspose_symplectic_eigs
from cvloc.measurement import condition_on_homodyne, condition_on_mode, pure_measurement_cm
from cvloc.symmetric import SymmetricStateParams, build_symmetric_cm


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cm(tmp_path):
    def make(g, name="g.cm"):
        path = tmp_path / name
        write_cm(path, g)
        return path

    return make


def test_negativity_json(capsys, cm):
    code, out, _ = _run(capsys, "negativity", cm(states.tmsv(0.5)), "--json")
    assert code == 0
    assert json.loads(out)["E_N"] == pytest.approx(1.0 / math.log(2.0), rel=1e-12)


def test_negativity_worked_example(capsys, cm):
    code, out, _ = _run(capsys, "negativity", cm(2.0 * states.isotropic_example_pure()))
    assert code == 0 and "E_N = 0.189525" in out


def test_localize_auto_isotropic(capsys, cm):
    code, out, _ = _run(capsys, "localize", cm(2.0 * states.isotropic_example_pure()), "--json")
    rec = json.loads(out)
    assert code == 0
    assert rec["solver"] == "isotropic" and rec["tag"] == "coherent"
    assert rec["E"] == pytest.approx(0.757108, abs=1e-6)


def test_localize_homodyne_strategy(capsys, cm):
    code, out, _ = _run(capsys, "localize", cm(2.0 * states.isotropic_example_pure()), "--strategy", "homodyne", "--json")
    assert code == 0 and json.loads(out)["E"] == pytest.approx(0.653640, abs=1e-6)


def test_reported_measurement_reproduces_mu2_in_file_frame(capsys, cm, rng):
    for _ in range(5):
        g = states.random_physical_cm(3, rng)
        path = cm(g)
        for strategy in ("auto", "homodyne"):
            code, out, _ = _run(capsys, "localize", path, "--strategy", strategy, "--json")
            rec = json.loads(out)
            assert code == 0
            if rec["r"] is None:
                cond = condition_on_homodyne(g, 2, rec["theta"])
            else:
                cond = condition_on_mode(g, 2, pure_measurement_cm(rec["r"], rec["theta"]))
            assert ptranspose_symplectic_eigs(cond)[1] == pytest.approx(rec["mu2"], rel=1e-8)


def test_localize_symmetric_four_mode(capsys, cm):
    p = SymmetricStateParams(4, 3.0, 0.9, -0.6)
    code, out, _ = _run(capsys, "localize", cm(build_symmetric_cm(p)), "--json")
    rec = json.loads(out)
    assert code == 0 and rec["solver"] == "symmetric"


def test_exit_codes(capsys, cm, tmp_path, rng):
    bad = tmp_path / "bad.cm"
    bad.write_text("not a covariance matrix\n")
    assert _run(capsys, "negativity", bad)[0] == 1
    assert _run(capsys, "negativity", tmp_path / "missing.cm")[0] == 1
    code, _, err = _run(capsys, "negativity", cm(0.5 * np.eye(4)))
    assert code == 2 and "witness" in err
    assert _run(capsys, "validate", cm(0.5 * np.eye(4)))[0] == 2
    assert _run(capsys, "localize", cm(states.random_physical_cm(4, rng)))[0] == 3
    assert _run(capsys, "negativity", cm(np.eye(4)), "--modes", "0", "5")[0] == 3
    assert _run(capsys, "sweep-lambda", "--lambda-max", "0.9", "--nmax", "10", "--steps", "3")[0] == 4


def test_force_numeric_sweep(capsys, cm, rng):
    code, out, _ = _run(capsys, "localize", cm(states.random_physical_cm(3, rng)), "--strategy", "sweep", "--json")
    assert code == 0 and json.loads(out)["solver"] == "sweep"


def test_sweep_nu_csv(capsys, cm, tmp_path):
    path = tmp_path / "nu.csv"
    code, _, _ = _run(capsys, "sweep-nu", cm(states.isotropic_example_pure()), "--steps", "5", "--csv", path)
    assert code == 0
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["nu", "E_before", "E_hom", "E_opt", "winner"]
    assert len(rows) == 6
    assert all(v == format(float(v), ".12g") for r in rows[1:] for v in r[:4])
    assert float(rows[-1][3]) == pytest.approx(0.0, abs=1e-9)


def test_sweep_nu_rejects_mixed_input(capsys, cm):
    assert _run(capsys, "sweep-nu", cm(2.0 * states.isotropic_example_pure()))[0] == 3


def test_sweep_lambda_deterministic(capsys):
    argv = ("sweep-lambda", "--eta", "0.8", "--lambda-max", "0.5", "--steps", "6", "--nmax", "30")
    a = _run(capsys, *argv)
    b = _run(capsys, *argv)
    assert a[0] == 0 and a[1] == b[1]
    rows = list(csv.reader(io.StringIO(a[1])))
    assert rows[0] == ["lambda", "E_L_G", "E_L_NG_eta=0.8"]
    assert len(rows) == 7
