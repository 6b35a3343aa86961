import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from kfree.admissibility import find_locator, is_admissible
from kfree.analytics import density_report, entropy
from kfree.sieve import Box, kfree_ring, sieve, visible
from kfree.symmetry import UniMat, inadmissible_image_witness, stab_search

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("KFREE_REGEN_GOLDEN") == "1"

CASES = {
    "sieve_visible.json": ["sieve", "--set", "visible", "--d", "2", "--radius", "12"],
    "sieve_gauss.csv": ["sieve", "--set", "kfree", "--ring", "gauss", "--k", "2", "--radius", "8", "--format", "csv"],
    "sieve_bfree.json": ["sieve", "--set", "bfree", "--B", "4,9,25", "--d", "1", "--radius", "30"],
    "admissible_yes.json": ["admissible", "--points", "(0,0),(1,0),(0,1)"],
    "admissible_no.json": ["admissible", "--points", "(0,0),(1,0),(0,1),(1,1)"],
    "locate_single.json": ["locate", "--P", "(0,0)", "--Q", ""],
    "locate_window.json": ["locate", "--P", "(0,0)", "--Q", "(1,1)", "--set", "kfree", "--ring", "eisenstein", "--k", "2"],
    "locate_crt.json": ["locate", "--Q", "0,0;0,1;1,0;1,1", "--mode", "crt"],
    "stab_gauss.json": ["stab", "--set", "kfree", "--ring", "gauss", "--k", "2", "--entry-bound", "2", "--radius", "64"],
    "witness_shear.json": ["witness", "--ring", "gauss", "--k", "2", "--matrix", "1,1,0,1"],
    "density_visible.csv": ["density", "--radii", "50,100", "--format", "csv"],
    "density_kfree.json": ["density", "--set", "kfree", "--k", "2", "--radii", "20,40"],
    "entropy_visible.json": ["entropy"],
    "entropy_golden.json": ["entropy", "--set", "kfree", "--ring", "golden", "--k", "2"],
}


def run(*argv, env=None):
    full = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "kfree", *argv], capture_output=True, env=full)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    res = run(*CASES[name])
    assert res.returncode in (0, 1), res.stderr.decode()
    path = GOLDEN / name
    if REGEN:
        path.write_bytes(res.stdout)
    assert res.stdout == path.read_bytes()


def test_repeated_runs_identical():
    argv = CASES["stab_gauss.json"]
    assert run(*argv).stdout == run(*argv).stdout


def test_exit_codes(tmp_path):
    assert run("sieve", "--radius", "0").returncode == 2
    assert run("sieve", "--radius", "3", "--set", "kfree").returncode == 2
    assert run("admissible", "--points", "(0,0),(1,0),(0,1),(1,1)").returncode == 1
    assert run("locate", "--Q", "0,0;0,1;1,0;1,1", "--radius", "3").returncode == 1
    assert run("sieve", "--d", "3", "--radius", "500").returncode == 3
    assert run("stab", "--entry-bound", "7").returncode == 3
    assert run("witness", "--matrix", "0,-1,1,0").returncode == 1
    assert run("witness", "--matrix", "1,1,1").returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    res = run("render", str(bad), "--out", str(tmp_path / "x.svg"))
    assert res.returncode == 2 and res.stdout == b"" and b"error" in res.stderr


def test_threads_do_not_change_output():
    argv = ["sieve", "--set", "kfree", "--ring", "sqrt2", "--k", "2", "--radius", "40"]
    one = run(*argv, "--threads", "1").stdout
    assert run("--threads", "4", *argv).stdout == one
    assert run(*argv, env={"KFREE_THREADS": "3"}).stdout == one
    assert run(*argv, env={"KFREE_THREADS": "zero"}).returncode == 2


def test_sieve_parity():
    res = run("sieve", "--set", "kfree", "--ring", "gauss", "--k", "2", "--radius", "50")
    assert res.stdout.decode() == sieve(kfree_ring("gauss", 2), Box(2, 50)).to_json()


def test_binary_round_trip(tmp_path):
    out = tmp_path / "v.kfps"
    assert run("sieve", "--radius", "20", "--format", "bin", "--out", str(out)).returncode == 0
    assert out.read_bytes() == sieve(visible(2), Box(2, 20)).to_bytes()


def test_library_parity():
    data = json.loads(run(*CASES["admissible_no.json"]).stdout)
    assert data["admissible"] == is_admissible([(0, 0), (1, 0), (0, 1), (1, 1)], visible(2)).admissible
    data = json.loads(run(*CASES["locate_single.json"]).stdout)
    assert data["t"] == list(find_locator([(0, 0)], [], visible(2)).t) == [0, 1]
    data = json.loads(run(*CASES["stab_gauss.json"]).stdout)
    assert data == stab_search(kfree_ring("gauss", 2), 2, 64).to_dict()
    assert len(data["passed"]) == 8
    data = json.loads(run(*CASES["witness_shear.json"]).stdout)
    assert data == inadmissible_image_witness(UniMat.of(1, 1, 0, 1), "gauss", 2).to_dict()
    assert data["S_admissible"] and not data["A_S_admissible"]
    data = json.loads(run(*CASES["density_kfree.json"]).stdout)
    from kfree.sieve import kfree_lattice

    assert data == json.loads(json.dumps(density_report(kfree_lattice(2, 2), [20, 40]).to_dict()))
    data = json.loads(run(*CASES["entropy_visible.json"]).stdout)
    assert data["entropy"] == entropy(visible(2)).value


def test_render_overlay(tmp_path):
    a, b = tmp_path / "v.json", tmp_path / "g.json"
    run("sieve", "--radius", "30", "--out", str(a))
    run("sieve", "--set", "kfree", "--ring", "gauss", "--k", "2", "--radius", "30", "--format", "bin", "--out", str(b))
    svg1, svg2 = tmp_path / "f1.svg", tmp_path / "f2.svg"
    assert run("render", str(a), str(b), "--out", str(svg1)).returncode == 0
    assert run("render", str(a), str(b), "--out", str(svg2)).returncode == 0
    assert svg1.read_bytes() == svg2.read_bytes()
    ppm = tmp_path / "v.ppm"
    assert run("render", str(a), "--out", str(ppm)).returncode == 0
    assert ppm.read_bytes().startswith(b"P6\n")
    assert run("render", str(a), str(b), str(a), "--out", str(svg1)).returncode == 2


def test_sieve_writes_svg_and_density_plot(tmp_path):
    svg = tmp_path / "e.svg"
    res = run("sieve", "--set", "kfree", "--ring", "eisenstein", "--k", "2", "--radius", "10", "--svg", str(svg), "--embed")
    assert res.returncode == 0 and svg.read_text().lstrip().startswith("<?xml")
    plot = tmp_path / "d.svg"
    assert run("density", "--radii", "20,40", "--plot", str(plot)).returncode == 0
    assert plot.exists()
