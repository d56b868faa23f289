import json

import pytest

from zfcert.cli import main
from zfcert.counterexample import oshea_monotone_plant
from zfcert.search import Certificate


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    return {
        "baseline": write("baseline.json", {"num": [-1, -2], "den": [1, 1]}),
        "oshea": write("oshea.json", oshea_monotone_plant(0.25, 1e-3).to_dict()),
        "neg": write("neg.json", {"num": [-1], "den": [1]}),
        "two": write("two.json", {"num": [2], "den": [1, 1]}),
        "lag": write("lag.json", {"num": [1], "den": [1, 1]}),
        "unstable": write("unstable.json", {"num": [1], "den": [1, -1]}),
        "broken": write("broken.json", '{"num": [1,'),
        "sat": write("sat.json", {"breakpoints": [-1, 1], "values": [-1, 1],
                                  "left_slope": 0, "right_slope": 0}),
        "dir": tmp_path,
    }


def test_certify_feasible(files):
    out = files["dir"] / "c.json"
    assert main(["certify", "--plant", files["baseline"], "--out", str(out)]) == 0
    cert = Certificate.from_json(out.read_text())
    assert cert.status == "Feasible" and cert.epsilon >= 0.9
    csv = (files["dir"] / "c.csv").read_text().splitlines()
    assert csv[0] == "omega,re_G,im_G,re_M,im_M,condition"


def test_certify_infeasible(files):
    out = files["dir"] / "o.json"
    code = main(["certify", "--plant", files["oshea"], "--mode", "signed", "--basis-size", "20",
                 "--out", str(out)])
    assert code == 2
    assert json.loads(out.read_text())["status"] == "InfeasibleAtBasis"


def test_certify_errors(files, capsys):
    assert main(["certify", "--plant", files["broken"]]) == 1
    assert "malformed" in capsys.readouterr().err
    assert main(["certify", "--plant", files["unstable"]]) == 1
    assert "RH-infinity" in capsys.readouterr().err
    assert main(["certify", "--plant", str(files["dir"] / "missing.json")]) == 1


def test_certify_deterministic(files):
    a, b = files["dir"] / "a.json", files["dir"] / "b.json"
    for p in (a, b):
        main(["certify", "--plant", files["baseline"], "--basis-size", "6", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_grid_points_env(files, monkeypatch):
    monkeypatch.setenv("ZF_CERTIFY_GRID_POINTS", "50")
    out = files["dir"] / "e.json"
    main(["certify", "--plant", files["baseline"], "--out", str(out)])
    assert json.loads(out.read_text())["provenance"]["search_grid"]["n_finite"] == 51
    main(["certify", "--plant", files["baseline"], "--grid-points", "80", "--out", str(out)])
    assert json.loads(out.read_text())["provenance"]["search_grid"]["n_finite"] == 81


def test_counterexample_command(files):
    out = files["dir"] / "x.json"
    code = main(["counterexample", "--name", "oshea-monotone", "--max-basis", "4",
                 "--grid-points", "400", "--out", str(out)])
    rep = json.loads(out.read_text())
    assert code == 0
    assert rep["clearance"] > 0
    assert main(["counterexample", "--name", "oshea-slope", "--xi", "0.5"]) == 1


def test_nyquist_constant(files, capsys):
    svg = files["dir"] / "n.svg"
    csv = files["dir"] / "n.csv"
    assert main(["nyquist", "--plant", files["neg"], "--out", str(svg), "--csv", str(csv)]) == 0
    rows = csv.read_text().splitlines()
    assert rows[0] == "omega,re,im"
    assert all(r.split(",")[1:] == ["-1.0", "0.0"] for r in rows[1:])
    assert rows[-1].startswith("inf,")
    assert json.loads(capsys.readouterr().out)["clearance"] == 1.0
    assert "<circle" in svg.read_text()


def test_nyquist_intersects(files):
    svg = files["dir"] / "i.svg"
    code = main(["nyquist", "--plant", files["two"], "--a", str(1 / 3), "--b", "1", "--out", str(svg)])
    assert code == 2
    assert "INTERSECTS" in svg.read_text()


def test_nyquist_oshea_clearance(files):
    svg = files["dir"] / "o.svg"
    assert main(["nyquist", "--plant", files["oshea"], "--out", str(svg)]) == 0
    assert "clearance = " in svg.read_text()


def test_iqc_sat_member(files):
    assert main(["iqc-test", "--nonlinearity", files["sat"], "--b", "1"]) == 0
    assert main(["iqc-test", "--builtin", "sat", "--b", "1"]) == 0


def test_iqc_lti_nonmember(files, capsys):
    assert main(["iqc-test", "--lti", files["lag"]]) == 2
    rep = json.loads(capsys.readouterr().out)
    assert rep["witness"]["omega"] > 0 and rep["witness"]["tau"] > 0


def test_iqc_neg_identity(files, capsys):
    assert main(["iqc-test", "--builtin", "neg-identity"]) == 2
    rep = json.loads(capsys.readouterr().out)
    assert rep["falsification"]["excess"] > 0


def test_iqc_odd(files, capsys):
    assert main(["iqc-test", "--builtin", "asym", "--odd"]) == 2
    assert main(["iqc-test", "--builtin", "sat", "--odd"]) == 0


def test_help_documents_csv(capsys):
    with pytest.raises(SystemExit):
        main(["certify", "--help"])
    assert "re_G" in capsys.readouterr().out
