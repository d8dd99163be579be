import csv
import json

import pytest

from ernstmx import cli


def write_cfg(tmp_path, **over):
    cfg = {"boundary": {"x": {"kind": "family", "p": 0.6, "q": 0.8},
                        "y": {"kind": "family", "p": 0.6, "q": 0.8}},
           "delta": 0.3, "grid": {"nx": 5, "ny": 5},
           "contour": {"N": 32, "adaptive": False}, "exact": {"p": 0.6, "q": 0.8}}
    cfg.update(over)
    p = tmp_path / "run.json"
    p.write_text(json.dumps(cfg))
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_exact_mode_outputs(tmp_path):
    cfg = write_cfg(tmp_path, grid={"nx": 9, "ny": 9})
    assert cli.main(["exact", "--config", str(cfg), "--out", str(tmp_path / "o"), "--nutku-halil"]) == 0
    rows = read_rows(tmp_path / "o" / "fields.csv")
    assert rows[0] == cli.FIELDS_HEADER
    assert all(float(r[0]) + float(r[1]) < 0.7 for r in rows[1:])
    assert (tmp_path / "o" / "nutku_halil.csv").exists()
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["admissible"] is True


def test_trivial_data_solve(tmp_path):
    cfg = write_cfg(tmp_path, boundary={"x": {"kind": "trivial"}, "y": {"kind": "trivial"}},
                    exact=None)
    assert cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    for r in read_rows(tmp_path / "o" / "fields.csv")[1:]:
        assert float(r[2]) == pytest.approx(1.0, abs=1e-13)
        assert abs(float(r[4])) < 1e-13 and abs(float(r[5])) < 1e-13


def test_solve_is_deterministic(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path)
    monkeypatch.setenv("ERNSTMX_THREADS", "1")
    cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "a")])
    monkeypatch.setenv("ERNSTMX_THREADS", "2")
    cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "fields.csv").read_bytes()
    assert a == (tmp_path / "b" / "fields.csv").read_bytes()


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("ERNSTMX_THREADS", "1")
    assert cli.worker_count() == 1
    monkeypatch.setenv("ERNSTMX_THREADS", "junk")
    assert cli.worker_count() >= 1


def test_config_errors(tmp_path, capsys):
    bad = write_cfg(tmp_path, delta=1.5, colour="red")
    assert cli.main(["solve", "--config", str(bad)]) == 2
    assert "unknown config keys" in capsys.readouterr().err
    assert cli.main(["solve", "--config", str(tmp_path / "missing.json")]) == 2


def test_invalid_boundary_data_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, boundary={"x": {"kind": "family", "amplitude": 1.2},
                                        "y": {"kind": "trivial"}})
    assert cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_failed_points_are_flagged(tmp_path):
    rows = [{"x": 0.1, "y": 0.2, "error": "ResolutionError: unresolved"}]
    cli.write_fields(tmp_path / "f.csv", rows)
    r = read_rows(tmp_path / "f.csv")[1]
    assert r[9] == "failed:ResolutionError" and r[2] == "nan"


def test_grid_points_strict_triangle():
    cfg = cli.RunConfig.from_dict({"boundary": {"x": {}, "y": {}}, "delta": 0.2,
                                   "grid": {"nx": 5, "ny": 5}})
    _, _, pts = cfg.grid_points()
    assert all(x + y < 0.8 for _, _, x, y in pts) and len(pts) == 10


def test_boundary_check_family_and_trivial(tmp_path):
    from ernstmx import exact

    fp = exact.FamilyParams(0.6, 0.8)
    ev = lambda x, y: tuple(complex(v) for v in exact.potentials(fp, x, y)[:2])
    cfg = cli.RunConfig.load(write_cfg(tmp_path, mode="boundary-check"))
    rep = cli.run_boundary_check(cfg, evaluator=ev)
    assert rep.admissible and not rep.failures
    assert len(rep.edge_limit_defects["table"]) == 6
    assert abs(rep.functional_x.value - 1) < 1e-2 and abs(rep.functional_y.value - 1) < 1e-2
    triv = cli.RunConfig.load(write_cfg(tmp_path, boundary={"x": {"kind": "trivial"},
                                                            "y": {"kind": "trivial"}}))
    rep = cli.run_boundary_check(triv, evaluator=lambda x, y: (1 + 0j, 0j))
    assert rep.admissible is False and rep.admissibility_values == (0.0, 0.0)
