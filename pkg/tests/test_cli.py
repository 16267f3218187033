import json
import subprocess
import sys
from fractions import Fraction

import pytest

from arithgroup import cli, zmgroup
from arithgroup.arithz import elementary_generators, gamma_m_generators, sl_generators
from arithgroup.exactmat import IntMat, matrices_to_json, transvection, vector_to_json


@pytest.fixture(autouse=True)
def restore_globals():
    limits = (zmgroup.LIMITS.orbit_cap, zmgroup.LIMITS.enum_cap)
    cache = zmgroup._CACHE_DIR
    yield
    zmgroup.LIMITS.orbit_cap, zmgroup.LIMITS.enum_cap = limits
    zmgroup._CACHE_DIR = cache


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    def mats(name, ms, mod=None):
        return write(name, matrices_to_json(ms, mod))

    def vec(name, v):
        return write(name, vector_to_json(v))

    write.mats, write.vec, write.dir = mats, vec, tmp_path
    return write


def run(*argv):
    code, report, _ = cli.run([str(a) for a in argv])
    return code, report


def test_index_of_level_twelve_elementary_group(files):
    g = files.mats("E.json", elementary_generators(4, 12).generators)
    code, rep = run("index", "--group", g, "--mod", 144)
    assert code == 0
    assert rep["factored"] == "2^35 * 3^11 * 5^2 * 7 * 13"
    assert int(rep["index"]) == 2**35 * 3**11 * 5**2 * 7 * 13
    assert "seconds" in rep


def test_member_identity(files):
    g = files.mats("G.json", sl_generators(3))
    x = files.mats("x.json", [IntMat.identity(3)])
    code, rep = run("member", "--group", g, "--mod", 4, "--x", x)
    assert code == 0 and rep["word_length"] == 0


def test_member_negative_and_verify(files):
    g = files.mats("G.json", gamma_m_generators(3, 4).generators)
    x = files.mats("x.json", [transvection(3, 1, 2, 1)])
    assert run("member", "--group", g, "--mod", 4, "--x", x)[0] == 1
    y = files.mats("y.json", [transvection(3, 1, 2, 4) @ transvection(3, 3, 1, 8)])
    code, rep = run("member", "--group", g, "--mod", 4, "--x", y)
    assert code == 0
    report = files("rep.json", rep)
    code, ver = run("verify", "--report", report)
    assert code == 0 and ver["verified"]


def test_member_over_residues(files):
    g = files.mats("G.json", [x.reduce(4) for x in sl_generators(3)], mod=4)
    x = files.mats("x.json", [transvection(3, 2, 3, 3).reduce(4)], mod=4)
    code, rep = run("member", "--group", g, "--x", x)
    assert code == 0
    assert run("verify", "--report", files("rep.json", rep))[0] == 0


def test_orbit_negative(files):
    g = files.mats("G.json", sl_generators(3))
    u, v = files.vec("u.json", (1, 2, 3)), files.vec("v.json", (2, 4, 6))
    assert run("orbit", "--group", g, "--mod", 2, "--u", u, "--v", v)[0] == 1


def test_orbit_and_stabilizer_certificates(files):
    g = files.mats("E.json", elementary_generators(3, 2).generators)
    u, v = files.vec("u.json", (1, 0, 0)), files.vec("v.json", (5, 4, 8))
    code, rep = run("orbit", "--group", g, "--mod", 4, "--u", u, "--v", v)
    assert code == 0 and rep["verified"]
    assert run("verify", "--report", files("o.json", rep))[0] == 0
    code, rep = run("stabilizer", "--group", g, "--mod", 4, "--u", u)
    assert code == 0 and rep["verified"] and rep["count"] > 0
    assert run("verify", "--report", files("s.json", rep))[0] == 0


def test_tampered_certificate_fails(files):
    g = files.mats("E.json", elementary_generators(3, 2).generators)
    u, v = files.vec("u.json", (1, 0, 0)), files.vec("v.json", (5, 4, 8))
    _, rep = run("orbit", "--group", g, "--mod", 4, "--u", u, "--v", v)
    rep["certificate"]["v"] = ["5", "4", "9"]
    code, ver = run("verify", "--report", files("bad.json", rep))
    assert code == 1 and not ver["verified"]


def test_level_max_pcs_and_normality(files):
    g = files.mats("G.json", [transvection(3, 1, 2, 2)] + gamma_m_generators(3, 8).generators)
    assert run("level", "--group", g)[1]["level"] == "2"
    assert run("max-pcs", "--group", g, "--mod", 8)[1]["level"] == "8"
    code, rep = run("subnormal", "--group", g, "--mod", 8)
    assert code == 0 and rep["subnormal"] and rep["e_prime"] == 3 and rep["defect_bound"] == 4
    assert run("normal", "--group", g, "--mod", 8)[0] == 1
    p = files.mats("P.json", gamma_m_generators(3, 2).generators)
    assert run("normal", "--group", p, "--mod", 2)[0] == 0


def test_subnormal_over_residues(files):
    g = files.mats("G.json", [transvection(3, 1, 2, 2).reduce(4)], mod=4)
    code, rep = run("subnormal", "--group", g)
    assert code == 0 and rep["e_prime"] == 2 and rep["defect_bound"] == 3


def test_normal_closure_and_subgroups(files):
    g = files.mats("G.json", [transvection(3, 1, 2, 6)])
    code, rep = run("normal-closure", "--group", g)
    assert code == 0 and rep["level"] == "6"
    h = files.mats("H.json", sl_generators(3))
    code, rep = run("normal-subgroups", "--group", h, "--mod", 4, "--level", 2)
    assert code == 0 and rep["count"] == 1


def test_intersect(files):
    a = files.mats("A.json", gamma_m_generators(3, 2).generators)
    b = files.mats("B.json", gamma_m_generators(3, 3).generators)
    code, rep = run("intersect", "--group", a, "--mod", 2, "--group2", b, "--mod2", 3)
    assert code == 0 and rep["level"] == "6"


def test_lift_and_verify(files):
    b = [[2, 3, 0], [3, 5, 0], [0, 0, 1]]
    x = files("b.json", {"n": 3, "mod": 6, "mats": [[[str(a) for a in r] for r in b]]})
    code, rep = run("lift", "--x", x)
    assert code == 0
    m = IntMat.from_rows([[int(a) for a in r] for r in rep["lifts"][0]["matrix"]])
    assert m.det() == 1 and m.reduce(6).rows() == [[2, 3, 0], [3, 5, 0], [0, 0, 1]]
    assert run("verify", "--report", files("l.json", rep))[0] == 0


def test_conjugate_rational_input(files):
    rows = [[["1", "2", "0"], ["0", "1", "0"], ["0", "0", "1"]],
            [["1", "0", "0"], ["1/2", "1", "0"], ["0", "0", "1"]]]
    g = files("S.json", {"n": 3, "mod": None, "mats": rows})
    code, rep = run("conjugate", "--group", g)
    assert code == 0
    assert all(Fraction(a).denominator == 1 for c in rep["conjugates"] for r in c for a in r)
    assert run("verify", "--report", files("c.json", rep))[0] == 0


def test_conjugate_failure_is_negative(files):
    rows = [[["1/2", "0", "0"], ["0", "2", "0"], ["0", "0", "1"]]]
    g = files("S.json", {"n": 3, "mod": None, "mats": rows})
    assert run("conjugate", "--group", g)[0] == 1


def test_input_errors(files):
    g = files.mats("G.json", sl_generators(3))
    assert run("index", "--group", g)[0] == 2
    assert run("index", "--group", str(files.dir / "missing.json"), "--mod", 2)[0] == 2
    assert run("member", "--group", g, "--mod", 2)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.run(["no-such-verb"])
    assert exc.value.code == 2


def test_resource_cap(files):
    g = files.mats("E.json", elementary_generators(3, 2).generators)
    u = files.vec("u.json", (1, 0, 0))
    code, rep = run("stabilizer", "--group", g, "--mod", 4, "--u", u, "--cap-orbit", 10)
    assert code == 3 and rep["cap"] == 10


def test_chain_cache_dir(files):
    g = files.mats("G.json", sl_generators(3))
    cache = files.dir / "cache"
    assert run("index", "--group", g, "--mod", 6, "--cache-dir", cache)[0] == 0
    assert any(cache.iterdir())
    assert run("index", "--group", g, "--mod", 6, "--cache-dir", cache)[1]["index"] == "1"
    assert run("index", "--group", g, "--mod", 6, "--no-cache")[0] == 0


def test_selftest_pass_and_corruption():
    code, rep = run("selftest")
    assert code == 0 and all(s["ok"] for s in rep["suites"])
    assert all("seconds" in s for s in rep["suites"])
    code, rep = run("selftest", "--corrupt", "order-formula")
    assert code == 1
    assert [s["name"] for s in rep["suites"] if not s["ok"]] == ["order-formula"]


def test_console_entry_point(files):
    g = files.mats("G.json", sl_generators(3))
    out = subprocess.run([sys.executable, "-m", "arithgroup.cli", "index", "--group", g,
                          "--mod", "2", "--json"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["index"] == "1"
