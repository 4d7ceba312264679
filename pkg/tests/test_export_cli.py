import json
import subprocess
import sys

import numpy as np
import pytest

from mcf_translators.cli import main
from mcf_translators.errors import DomainError
from mcf_translators.export import (
    SCHEMA_VERSION,
    RunManifest,
    domain_from_table,
    height_field,
    read_grid_binary,
    read_grid_csv,
    read_obj,
    read_profile_csv,
    revolve_polyline,
    write_grid_binary,
    write_grid_csv,
    write_obj,
    write_series_csv,
)
from mcf_translators.graphical import BoxDomain, GridSolution


@pytest.fixture
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def table(path):
    return read_profile_csv(path)[1]


def payload(path):
    """File contents without the manifest line, which records the output paths."""
    return [l for l in open(path).read().splitlines() if not l.startswith("# manifest")]


# ---------------------------------------------------------------- formats


def test_manifest_round_trip():
    m = RunManifest("solve", {"n": 3, "grid": [33, 33], "rect": [[0.0, 1.0], [2.0, 3.5]]},
                    tolerances={"tol": 1e-10}, outputs=["a.csv"])
    back = RunManifest.from_json(m.to_json())
    assert back == m
    assert back.schema_version == SCHEMA_VERSION
    bad = json.loads(m.to_json())
    bad["schema_version"] = 99
    with pytest.raises(DomainError):
        RunManifest.from_json(json.dumps(bad))


def test_profile_csv_is_lossless(tmp_path):
    rng = np.random.default_rng(0)
    s = np.sort(rng.normal(size=50))
    w, f = rng.normal(size=50) * 1e-7, rng.normal(size=50) * 1e9
    m = RunManifest("profile", {"n": 2})
    write_series_csv(tmp_path / "p.csv", s, w, f, m)
    back_m, t = read_profile_csv(tmp_path / "p.csv")
    assert back_m == m
    assert np.array_equal(t, np.column_stack([s, w, f]))
    assert open(tmp_path / "p.csv").read().splitlines()[1] == "s,w,f"


@pytest.mark.parametrize("n", [2, 4])
def test_grid_csv_and_binary_round_trip(tmp_path, n):
    d = BoxDomain([(0.5, 1.5), (-1.0, 1.0)], (7, 9), n)
    rng = np.random.default_rng(1)
    sol = GridSolution(d, rng.normal(size=d.shape) * 0.01)
    m = RunManifest("solve", {"n": n})
    write_grid_csv(tmp_path / "g.csv", sol, m)
    mm, dom, values = read_grid_csv(tmp_path / "g.csv")
    assert mm == m and dom.shape == d.shape and dom.n == n
    assert np.array_equal(values, sol.values)
    header = open(tmp_path / "g.csv").read().splitlines()[1]
    assert header == ",".join([f"x{i + 1}" for i in range(n)] + ["u"])
    write_grid_binary(tmp_path / "g.bin", sol, m)
    mb, db, vb = read_grid_binary(tmp_path / "g.bin")
    assert mb == m and db.bounds == d.bounds
    assert np.array_equal(vb, sol.values)


def test_grid_table_validation():
    with pytest.raises(DomainError):
        domain_from_table(["x1", "v"], np.zeros((4, 2)))
    pts = np.array([[1.0, 0.0, 1.0], [2.0, 0.0, 2.0], [1.0, 1.0, 3.0]])
    with pytest.raises(DomainError):
        domain_from_table(["x1", "x2", "u"], pts)


def test_revolve_counts_and_orientation():
    s = np.linspace(0.0, 2.0, 11)
    f = s**2
    v, faces = revolve_polyline(s, f, 2, angular=16, model="hyperboloid")
    assert v.shape == (11 * 16, 3) and faces.shape == (2 * 10 * 16, 3)
    a, b, c = v[faces[:, 0], :2], v[faces[:, 1], :2], v[faces[:, 2], :2]
    cross = (b - a)[:, 0] * (c - a)[:, 1] - (b - a)[:, 1] * (c - a)[:, 0]
    # triangles touching the axis ring are degenerate; all others turn counterclockwise
    assert np.all(cross[2 * 16:] > 0)
    with pytest.raises(DomainError):
        revolve_polyline(s, f, 4)


def test_revolve_half_space_rings_are_distance_circles():
    s = np.array([0.5, 1.0])
    v, _ = revolve_polyline(s, s, 2, angular=8)
    x1, x2 = v[:, 0], v[:, 1]
    d = 2 * np.arcsinh(np.sqrt((x1 - 1) ** 2 + x2**2) / (2 * np.sqrt(x1)))
    assert np.allclose(d, np.repeat(s, 8), atol=1e-12)


def test_height_field_orientation(tmp_path):
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (5, 4))
    v, faces = height_field(GridSolution(d, np.zeros(d.shape)))
    assert v.shape == (20, 3) and faces.shape == (2 * 4 * 3, 3)
    a, b, c = v[faces[:, 0]], v[faces[:, 1]], v[faces[:, 2]]
    normal_z = np.cross(b - a, c - a)[:, 2]
    assert np.all(normal_z > 0)
    write_obj(tmp_path / "h.obj", v, faces, RunManifest("mesh", {}))
    rv, rf = read_obj(tmp_path / "h.obj")
    assert np.array_equal(rv, v) and np.array_equal(rf, faces)


# ---------------------------------------------------------------- profile


def test_cli_linear_profile(in_tmp):
    assert main(["profile", "--family", "horosphere", "--branch", "f1", "--n", "3", "--s", "0:1",
                 "--samples", "11", "--out", "f1.csv"]) == 0
    t = table("f1.csv")
    assert np.array_equal(t[:, 2], t[:, 0] / 2)
    m = json.load(open("f1.json"))["manifest"]
    assert m["subcommand"] == "profile" and m["parameters"]["branch"] == "f1"


def test_cli_profile_outside_domain(in_tmp, capsys):
    assert main(["profile", "--family", "horosphere", "--branch", "f5", "--n", "3", "--s", "0:1"]) == 2
    err = capsys.readouterr().err
    assert "outside the maximal domain of f5" in err


def test_cli_bowl_profiles(in_tmp):
    assert main(["profile", "--family", "rotational", "--type", "bowl", "--n", "3", "--s-max", "10",
                 "--out", "b3.csv"]) == 0
    assert table("b3.csv")[-1, 1] == pytest.approx(0.5, abs=1e-3)
    # for n = 2 the limit 1 is only approached like 1 - 1/(2s); see the notes
    assert main(["profile", "--family", "rotational", "--type", "bowl", "--n", "2", "--s-max", "10",
                 "--out", "b2.csv"]) == 0
    w_end = table("b2.csv")[-1, 1]
    assert 0.94 < w_end < 0.95


def test_cli_spacelike_and_timelike(in_tmp):
    assert main(["profile", "--family", "rotational", "--type", "spacelike", "--n", "2",
                 "--s0", "1", "--z0", "0.1", "--out", "c.csv"]) == 0
    assert json.load(open("c.json"))["manifest"]["parameters"]["limit_tag"] == -1
    assert main(["profile", "--family", "rotational", "--type", "timelike", "--n", "3",
                 "--s0", "1", "--z0", "2", "--out", "t.csv"]) == 0
    params = json.load(open("t.json"))["manifest"]["parameters"]
    assert params["within_bound"] is True
    assert main(["profile", "--family", "rotational", "--type", "timelike", "--n", "3",
                 "--s0", "1", "--z0", "0.5"]) == 2


def test_cli_missing_arguments(in_tmp):
    assert main(["profile", "--family", "horosphere", "--n", "2", "--s", "0:1"]) == 2
    assert main(["profile", "--family", "rotational", "--n", "2"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["profile", "--family", "horosphere", "--n", "2", "--s", "1:0"])
    assert info.value.code == 2


# ---------------------------------------------------------------- solve


def test_cli_rectangle_f3(in_tmp):
    assert main(["solve", "--preset", "rectangle", "--branch", "f3", "--n", "2", "--grid", "65x65",
                 "--out", "r.csv"]) == 0
    rep = json.load(open("r.json"))
    assert rep["comparison"]["max_error"] < 1e-4
    assert rep["report"]["converged"]
    _, dom, values = read_grid_csv("r.csv")
    assert dom.shape == (65, 65)


def test_cli_exact_linear(in_tmp):
    # w = 1/(n - 1) = 1 is light-like when n = 2
    assert main(["solve", "--preset", "exact-linear", "--n", "2", "--grid", "33x33"]) == 2
    errs = []
    for g in ("17x17", "33x33"):
        assert main(["solve", "--preset", "exact-linear", "--n", "3", "--grid", g, "--out", f"e{g}.csv"]) == 0
        errs.append(json.load(open(f"e{g}.json"))["comparison"]["max_error"])
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_cli_boundary_files(in_tmp):
    assert main(["solve", "--preset", "exact-linear", "--n", "3", "--grid", "17x17", "--out", "e.csv"]) == 0
    assert main(["solve", "--boundary", "e.csv", "--out", "again.csv"]) == 0
    _, _, a = read_grid_csv("e.csv")
    _, _, b = read_grid_csv("again.csv")
    assert np.max(np.abs(a - b)) < 1e-9

    open("bad.csv", "w").write("x1,x2,u\n1,0,zero\n")
    assert main(["solve", "--boundary", "bad.csv"]) == 2
    d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (9, 9))
    write_grid_csv("steep.csv", GridSolution.from_function(d, lambda P: 3 * P[..., 1]), RunManifest("x", {}))
    assert main(["solve", "--boundary", "steep.csv"]) == 3
    assert main(["solve", "--preset", "exact-linear", "--n", "3", "--grid", "17x17", "--max-iter", "1",
                 "--tol", "1e-14"]) == 4


def test_cli_binary_output(in_tmp):
    assert main(["solve", "--preset", "exact-linear", "--n", "3", "--grid", "9x9", "--format", "binary",
                 "--out", "e.bin"]) == 0
    m, dom, values = read_grid_binary("e.bin")
    assert m.subcommand == "solve" and values.shape == (9, 9)


# ---------------------------------------------------------------- verify


@pytest.mark.parametrize("suite", ["numerics", "horosphere", "rotational", "elliptic"])
def test_cli_verify_suites(in_tmp, suite):
    assert main(["verify", "--suite", suite, "--out", "v.json"]) == 0
    rep = json.load(open("v.json"))
    assert rep["suite"] == suite and rep["failures"] == 0 and rep["passes"] == len(rep["cases"])
    assert set(rep) == {"suite", "cases", "passes", "failures", "tolerances"}


# ---------------------------------------------------------------- mesh


def test_cli_mesh_bowl(in_tmp):
    main(["profile", "--family", "rotational", "--type", "bowl", "--n", "2", "--s", "0:3",
          "--samples", "40", "--out", "b.csv"])
    assert main(["mesh", "b.csv", "--angular", "24", "--out", "b.obj"]) == 0
    v, f = read_obj("b.obj")
    assert v.shape == (40 * 24, 3)
    assert open("b.obj").readline().startswith("# manifest ")
    assert main(["mesh", "b.csv", "--n", "4", "--out", "x.obj"]) == 2


def test_cli_mesh_spindle_closes_at_top(in_tmp):
    assert main(["profile", "--family", "rotational", "--type", "spindle", "--n", "2", "--s-top", "1",
                 "--out", "sp.csv"]) == 0
    params = json.load(open("sp.json"))["manifest"]["parameters"]
    k = params["segments"][0]
    rows = len(table("sp.csv"))
    assert main(["mesh", "sp.csv", "--angular", "16", "--model", "hyperboloid", "--out", "sp.obj"]) == 0
    v, _ = read_obj("sp.obj")
    assert v.shape == ((rows + 1) * 16, 3)
    top = v[k * 16:(k + 1) * 16]
    assert np.allclose(np.hypot(top[:, 0], top[:, 1]), np.sinh(1.0))
    assert np.allclose(top[:, 2], params["t0"])


def test_cli_mesh_grid(in_tmp):
    main(["solve", "--preset", "rectangle", "--branch", "f3", "--n", "2", "--grid", "17x13", "--out", "r.csv"])
    assert main(["mesh", "r.csv", "--out", "r.obj"]) == 0
    v, f = read_obj("r.obj")
    assert v.shape == (17 * 13, 3) and f.shape == (2 * 16 * 12, 3)


# ---------------------------------------------------------------- reproducibility


def test_rerun_is_bit_for_bit(in_tmp):
    main(["profile", "--family", "rotational", "--type", "timelike", "--n", "3", "--s0", "0.7",
          "--z0", "-1.6", "--out", "t.csv"])
    assert main(["rerun", "t.json", "--out", "t2.csv"]) == 0
    assert payload("t.csv") == payload("t2.csv")
    main(["solve", "--preset", "rectangle", "--branch", "f6", "--n", "3", "--grid", "9x9",
          "--format", "binary", "--out", "r.bin"])
    assert main(["rerun", "r.bin", "--out", "r2.bin"]) == 0
    assert np.array_equal(read_grid_binary("r.bin")[2], read_grid_binary("r2.bin")[2])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mcf_translators", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "profile" in out.stdout
