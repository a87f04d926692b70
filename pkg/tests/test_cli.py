import json
import subprocess
import sys

import pytest

from stokeslab import io
from stokeslab.cli import main
from stokeslab.euler import ElementaryModel
from stokeslab.exactcore import QMatrix, Ray
from stokeslab.newton import ResidueMatrix, TwistConfig
from stokeslab.stokes import StokesSystem, validate

SWAP = StokesSystem([0, 1], [1, 1], transitions={Ray(0, 1): QMatrix([[0, 1], [1, 0]]), Ray(0, -1): QMatrix.identity(2)})


@pytest.fixture
def docs(tmp_path):
    paths = {}
    for name, obj in [
        ("ident", StokesSystem([0, 1], [1, 1])),
        ("swap", SWAP),
        ("model", ElementaryModel(1, (2,), 1)),
        ("twist", TwistConfig(1, (2,), 1, (((2,), 1),))),
        ("residue", ResidueMatrix(((1,),), ((0,),), 1)),
    ]:
        paths[name] = tmp_path / f"{name}.json"
        io.save(obj, paths[name])
    bad = json.loads(io.dumps(StokesSystem([0, 1], [1, 1])))
    bad["points"][0][0] = "1/0"
    paths["bad"] = tmp_path / "bad.json"
    paths["bad"].write_text(json.dumps(bad))
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_exit_codes(docs, capsys):
    assert run(capsys, "validate", docs["ident"])[:2] == (0, "valid\n")
    code, out, _ = run(capsys, "validate", docs["swap"])
    assert code == 2 and "graded generization" in out
    assert run(capsys, "validate", docs["bad"])[0] == 1
    assert run(capsys, "validate", docs["ident"].parent / "missing.json")[0] == 1


def test_laplace_pipeline(docs, capsys, tmp_path):
    code, out, err = run(capsys, "laplace", "fwd", docs["ident"])
    assert code == 0
    sp = io.loads(out)
    assert sp.psi_dim == 2 and sp.phi == (1, 1)
    assert "psi_dim: 2" in err and "plane cohomology: [0, 0, 0]" in err
    fwd = tmp_path / "fwd.json"
    fwd.write_text(out)
    code, out, err = run(capsys, "laplace", "bwd", fwd)
    assert code == 0 and validate(io.loads(out)).ok
    code, out, _ = run(capsys, "laplace", "bwd", "--costokes", fwd)
    assert code == 0 and io.loads(out).validate().ok
    code, out, _ = run(capsys, "laplace", "fwd", docs["swap"])
    assert code == 2 and out == ""


def test_roundtrip_and_cohomology(docs, capsys):
    code, out, _ = run(capsys, "roundtrip", docs["ident"])
    assert code == 0 and out.rstrip().endswith("verdict: pass")
    code, out, _ = run(capsys, "cohomology", docs["ident"], "--t", "0", "0")
    assert code == 0 and "h0: 0" in out and "h1: 1" in out
    code, out, _ = run(capsys, "cohomology", docs["ident"], "--t", "0", "0", "--lax")
    assert code == 0 and "kind: lax" in out and "h1: 2" in out


def test_euler_commands(docs, capsys):
    code, out, _ = run(capsys, "euler", "irr", docs["model"], "--ramify", "3")
    assert code == 0
    assert out.splitlines() == ["chi convention: -2", "classical irregularity: 2", "ramified: -6 (degree 3)"]
    assert run(capsys, "euler", "chi", "3:2", "1:-1")[1] == "chi: 5\n"
    code, out, _ = run(capsys, "euler", "triple", docs["model"], "--beta", "1,1")
    assert code == 0 and out.endswith("equal: yes\n")
    assert run(capsys, "euler", "chi", "3-2")[0] == 1


def test_newton_commands(docs, capsys):
    code, out, _ = run(capsys, "newton", "hull", "-2,0", "0,-1", "-1,0")
    assert code == 0 and out.splitlines() == ["vertex: (-2, 0)", "vertex: (0, -1)"]
    assert run(capsys, "newton", "nonres", "1", "1")[:2] == (0, "nonresonant\n")
    code, out, _ = run(capsys, "newton", "nonres", "1", "-1")
    assert code == 2 and "m = (1, 1)" in out
    code, out, _ = run(capsys, "newton", "generic", docs["twist"], "--a", "-1/1,0")
    assert code == 2 and "generic: no" in out
    code, out, _ = run(capsys, "newton", "forms", docs["residue"], "--a", "1/2")
    assert code == 0 and "pass: yes" in out


def test_suite_is_deterministic(capsys):
    a = run(capsys, "suite", "euler", "--seed", "5")
    b = run(capsys, "suite", "euler", "--seed", "5")
    assert a == b and a[0] == 0
    code, out, _ = run(capsys, "suite", "newton", "--seed", "3", "--cases", "5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["suite"] == "newton" and doc["verdict"] == "pass"
    assert run(capsys, "suite", "nosuch")[0] == 1


def test_console_script(docs):
    proc = subprocess.run([sys.executable, "-m", "stokeslab.cli", "validate", str(docs["swap"])],
                          capture_output=True, text=True)
    assert proc.returncode == 2
