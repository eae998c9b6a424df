import json
import os
import subprocess
import sys

import numpy as np
import pytest

from polystab import cli

SINGULAR = """n: 1
d: 1
m: 1
coeff:
  - [["1"]]
  - [["t1"]]
"""


def _run(*args):
    return cli.main([str(a) for a in args])


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _manifest(out):
    with open(os.path.join(out, "manifest.json"), encoding="utf-8") as fh:
        return json.load(fh)


def test_spectrum_single_row(family_dir, tmp_path):
    out = tmp_path / "o"
    assert _run("spectrum", family_dir / "linear.yaml", "--at", "2", "--out", out) == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "re,im,multiplicity"
    assert len(lines) == 2
    re, im, mult = lines[1].split(",")
    assert float(re) == -2.0 and float(im) == 0.0 and mult == "1"
    report = json.loads((out / "report.json").read_text())
    assert report["spectral_radius"] == 2.0


def test_negative_parameter_values(family_dir, tmp_path):
    out = tmp_path / "o"
    assert _run("spectrum", family_dir / "linear.yaml", "--at", "-1.5", "--out", out) == 0
    assert float((out / "spectrum.csv").read_text().splitlines()[1].split(",")[0]) == 1.5


def test_pseudo_disk_area(family_dir, tmp_path):
    out = tmp_path / "o"
    rc = _run("pseudo", family_dir / "disk.yaml", "--at", "0,0", "--eps", "1",
              "--region", "-2,2,-2,2", "--res", "101", "--out", out)
    assert rc == 0
    rows = (out / "grid.csv").read_text().splitlines()[1:]
    assert len(rows) == 101 * 101
    centre = sum(int(r.split(",")[3]) for r in rows)
    area = np.pi / 0.04 ** 2
    assert abs(centre - area) <= 0.02 * area


def test_holder_sqrt(family_dir, tmp_path):
    out = tmp_path / "o"
    assert _run("holder", family_dir / "sqrt.yaml", "--at", "0", "--map", "spectrum",
                "--direction", "1", "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["alpha_hat"] == pytest.approx(0.5, abs=0.02)
    assert report["verdict"] == "near stratum boundary"


def test_jordan_and_stratify(family_dir, tmp_path):
    out = tmp_path / "j"
    assert _run("jordan", family_dir / "sqrt.yaml", "--at", "0", "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert "(2)" in json.dumps(report)
    out = tmp_path / "s"
    assert _run("stratify", family_dir / "sqrt.yaml", "--axis", "-1,1,21", "--out", out) == 0
    assert (out / "strata.csv").exists()


def test_other_commands_run(family_dir, tmp_path):
    q = family_dir / "quadratic.yaml"
    assert _run("numrange", q, "--at", "0.2,-0.3", "--res", "31", "--out", tmp_path / "w") == 0
    assert _run("jointnr", q, "--at", "0.2,-0.3", "--samples", "200", "--out", tmp_path / "jw") == 0
    assert _run("certify", q, "--at", "0,0", "--samples", "20", "--out", tmp_path / "c") == 0
    report = json.loads((tmp_path / "jw" / "report.json").read_text())
    assert report["last_coordinate_deviation"] <= 1e-12


def test_manifest_lists_every_file(family_dir, tmp_path):
    out = tmp_path / "o"
    _run("pseudo", family_dir / "quadratic.yaml", "--at", "0,0", "--eps", "0.2",
         "--region", "-3,3,-3,3", "--res", "21", "--out", out)
    man = _manifest(out)
    listed = {e["name"] for e in man["files"]}
    assert listed == set(os.listdir(out))
    for e in man["files"]:
        if e["name"] != "manifest.json":
            assert e["bytes"] == os.path.getsize(out / e["name"])
    assert man["config"]["eps"] == 0.2 and len(man["config"]["family_sha256"]) == 64


def test_byte_identical_reruns(family_dir, tmp_path):
    args = ("pseudo", family_dir / "quadratic.yaml", "--at", "0.1,0.1", "--eps", "0.3",
            "--region", "-3,3,-3,3", "--res", "25", "--seed", "7")
    a, b = tmp_path / "a", tmp_path / "b"
    _run(*args, "--out", a)
    _run(*args, "--out", b)
    assert sorted(os.listdir(a)) == sorted(os.listdir(b))
    for name in os.listdir(a):
        if name == "manifest.json":
            continue
        assert _read(a / name) == _read(b / name)
    # rerun into the same directory replaces the previous outputs
    first = _read(a / "grid.csv")
    assert _run(*args, "--out", a) == 0
    assert _read(a / "grid.csv") == first


def test_exit_code_config_errors(family_dir, tmp_path):
    assert _run("spectrum", tmp_path / "missing.yaml", "--at", "0", "--out", tmp_path / "o") == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("n: 1\nd: 1\nm: 1\ncoeff:\n  - [[\"t1 +\"]]\n  - [[\"1\"]]\n")
    assert _run("spectrum", bad, "--at", "0", "--out", tmp_path / "o") == 2
    assert _run("pseudo", family_dir / "linear.yaml", "--at", "0", "--eps", "-1",
                "--region", "-1,1,-1,1", "--out", tmp_path / "o") == 2
    assert _run("spectrum", family_dir / "linear.yaml", "--out", tmp_path / "o") == 2
    foreign = tmp_path / "foreign"
    foreign.mkdir()
    (foreign / "keep.txt").write_text("x")
    assert _run("spectrum", family_dir / "linear.yaml", "--at", "0", "--out", foreign) == 2
    assert (foreign / "keep.txt").exists()


def test_exit_code_singular_leading(tmp_path):
    fam = tmp_path / "sing.yaml"
    fam.write_text(SINGULAR)
    assert _run("spectrum", fam, "--at", "0", "--out", tmp_path / "o") == 3
    assert _run("spectrum", fam, "--at", "2", "--out", tmp_path / "p") == 0


def test_exit_code_invariant_violation(family_dir, tmp_path, monkeypatch):
    def broken(f, cfg, out):
        out["x.csv"] = "x\n"
        return {}, ["forced violation"]

    monkeypatch.setitem(cli._DISPATCH, "spectrum", broken)
    out = tmp_path / "o"
    assert _run("spectrum", family_dir / "linear.yaml", "--at", "0", "--out", out) == 4
    report = json.loads((out / "report.json").read_text())
    assert report["invariant_violations"] == ["forced violation"]
    assert (out / "manifest.json").exists()


def test_console_entry_point(family_dir, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "polystab.cli", "spectrum", str(family_dir / "linear.yaml"),
                           "--at", "1", "--out", str(tmp_path / "o")], capture_output=True)
    assert proc.returncode == 0
