import json
import subprocess
import sys

import pytest

from limbmaps.circle import Angle
from limbmaps.cli import parse_and_dispatch


def run(capsys, *argv):
    code = parse_and_dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err


def test_theta_bar(capsys):
    assert run(capsys, "theta", "1/3", "1/4", "--bar")[:2] == (0, "1/6")


def test_theta_symmetry(capsys):
    assert run(capsys, "theta", "1/3", "--symmetry")[:2] == (0, "11/56")


@pytest.mark.parametrize("argv,out", [
    (("theta", "1/3", "1/4"), "2/3"),
    (("theta", "1/3", "1/2", "--inverse"), "11/56"),
    (("theta", "1/3", "4/7", "--hat"), "0"),
    (("theta", "1/3", "1/7", "--map", "2/3"), "5/7"),
    (("theta", "1/3", "1/4", "--full", "1/3"), "1/4"),
    (("theta", "1/3", "1/2", "--tune", "1/3", "2/3"), "7/12"),
])
def test_theta_variants_round_trip(capsys, argv, out):
    code, text, _ = run(capsys, *argv)
    assert code == 0 and text == out
    assert str(Angle(text)) == str(Angle(out))


def test_theta_json(capsys):
    code, text, _ = run(capsys, "theta", "1/3", "1/4", "--bar", "--json")
    assert json.loads(text) == {"schema": "limbmaps.angle/1", "value": "1/6"}


def test_float_angles_rejected(capsys):
    code, _, err = run(capsys, "theta", "1/3", "0.25", "--bar")
    assert code == 2 and "exact" in err
    assert run(capsys, "ray", "M", "1e-1")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "ray", "M")[0] == 2
    assert run(capsys, "ray", "L", "1/3")[0] == 2
    assert run(capsys, "theta", "1/3")[0] == 2
    assert run(capsys, "solve", "center", "L", "--period", "1", "--seed", "2", "0")[0] == 2


def test_domain_error_is_json(capsys):
    code, text, _ = run(capsys, "theta", "1/3", "1/2")
    assert code == 1
    assert json.loads(text)["type"] == "OutsideWake"


def test_limb(capsys):
    code, text, _ = run(capsys, "limb", "1/3")
    d = json.loads(text)
    assert code == 0 and d["schema"] == "limbmaps.limb/1"
    assert d["root_pair"] == ["1/7", "2/7"]


def test_ray_json_and_csv(capsys, tmp_path):
    code, text, _ = run(capsys, "ray", "M", "1/6")
    d = json.loads(text)
    assert code == 0 and d["schema"] == "limbmaps.ray/1"
    assert abs(complex(d["landing_estimate"]["re"], d["landing_estimate"]["im"]) - 1j) < 1e-5
    out = tmp_path / "r.csv"
    code, text, _ = run(capsys, "ray", "L", "3", "1/2", "--format", "csv", "-o", str(out), "--G-min", "1e-4")
    assert code == 0 and out.read_text().startswith("potential,re,im\n")
    code, text, _ = run(capsys, "ray", "julia", "0", "0", "1/3", "--G-min", "1e-6")
    assert code == 0 and json.loads(text)["status"] == "landed"
    code, text, _ = run(capsys, "ray", "juliaP", "3", "2", "0", "1/4", "--G-min", "1e-3")
    assert code == 0


def test_solve(capsys):
    code, text, _ = run(capsys, "solve", "mis", "M", "--angle", "1/6")
    d = json.loads(text)
    assert code == 0 and d["schema"] == "limbmaps.misiurewicz/1"
    assert (d["preperiod"], d["period"]) == (1, 2)
    assert abs(d["parameter"]["im"] - 1) < 1e-12
    code, text, _ = run(capsys, "solve", "center", "M", "--period", "3", "--seed", "-0.1", "0.75")
    assert abs(json.loads(text)["center"]["re"] + 0.12256116687665) < 1e-12
    code, text, _ = run(capsys, "solve", "center", "L", "--q", "5", "--period", "2",
                        "--angles", "24/35", "29/35")
    d = json.loads(text)
    assert code == 0 and abs(d["center"]["re"] - 14.00925762) < 1e-6
    code, text, _ = run(capsys, "solve", "root", "M", "--period", "2", "--seed", "-0.77", "0")
    assert abs(json.loads(text)["root"]["re"] + 0.75) < 1e-6


def test_render(capsys, tmp_path):
    out = tmp_path / "l.pgm"
    code, text, _ = run(capsys, "render", "locus", "-o", str(out), "--size", "32", "24",
                        "--ray", "L", "1/2")
    assert code == 0 and json.loads(text)["inside_pixels"] > 0
    assert out.read_bytes().startswith(b"P5\n32 24\n255\n")


def test_verify_exit_code(capsys, tmp_path):
    code, text, _ = run(capsys, "verify", "locus_structure", "--q", "3")
    assert code == 0 and json.loads(text)["summary"]["failed"] == 0
    out = tmp_path / "rep.json"
    code, _, _ = run(capsys, "verify", "conjugacy", "--q", "5", "--p", "2", "--samples", "20", "-o", str(out))
    assert code == 0 and json.loads(out.read_text())["schema"] == "limbmaps.report/1"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "limbmaps.cli", "theta", "1/3", "1/4", "--bar"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "1/6"
