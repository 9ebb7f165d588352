from __future__ import annotations

import json
import subprocess
import sys

import pytest

from coarse_ends.cli import InvalidInput, RunConfig, main, parse_ray
from coarse_ends.coarsemaps import MapTrace
from coarse_ends.cones import planted_complex
from coarse_ends.space import StaircaseSpace, build_space


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_ends_line(capsys):
    code, doc = run_json(capsys, "ends", "--kind", "line", "--rmax", "50", "--horizon", "120")
    assert code == 0
    assert doc["end_count"]["count"] == 2
    assert doc["config"]["command"] == "ends"
    assert doc["horizon"] == 120


def test_ends_staircase(capsys):
    code, doc = run_json(capsys, "ends", "--kind", "staircase", "--nmax", "200", "--rmax", "50")
    assert code == 0
    assert doc["end_count"]["count"] == 1


def test_ends_tree_growth(capsys):
    code, doc = run_json(capsys, "ends", "--kind", "regular-tree-4", "--rmax", "6")
    assert code == 0
    assert doc["end_count"]["growth"][:4] == [4, 12, 36, 108]


def test_ends_csv(capsys):
    code, out, _ = run(capsys, "ends", "--kind", "line", "--rmax", "12", "--horizon", "30", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "R,count"
    assert lines[1:] == [f"{R},2" for R in range(1, 13)]


def test_short_profile_is_inconclusive(capsys):
    code, doc = run_json(capsys, "ends", "--kind", "grid-2", "--rmax", "5")
    assert code == 3
    assert doc["end_count"]["stabilized"] is False


def test_invalid_input_exits_2(capsys):
    code, _, err = run(capsys, "ends", "--kind", "bogus")
    assert code == 2
    assert "bogus" in err
    assert run(capsys, "ends", "--kind", "line", "--rmax", "0")[0] == 2
    assert run(capsys, "ends")[0] == 2


def test_out_directory(tmp_path, capsys):
    code, _, _ = run(capsys, "ends", "--kind", "line", "--rmax", "10", "--horizon", "30", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "ends.json").read_text())
    assert doc["profile"]["counts"] == [2] * 10
    assert (tmp_path / "ends.csv").read_text().startswith("R,count\n")


def test_reports_are_reproducible(capsys):
    argv = ("ends", "--kind", "halfline", "--rmax", "10", "--horizon", "25")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_tree_pi0_branches(capsys):
    code, doc = run_json(capsys, "tree-pi0", "--kind", "regular-tree-3", "--ray1", "geodesic:0", "--ray2", "geodesic:1")
    assert code == 0
    assert doc["relation"] == "different"
    assert doc["divergence_height"] == 0
    assert doc["cross_check"] is True


def test_tree_pi0_detour(capsys):
    code, doc = run_json(capsys, "tree-pi0", "--kind", "regular-tree-3", "--ray1", "geodesic:0", "--ray2", "detour:0:3")
    assert doc["relation"] == "equivalent"
    assert doc["same_end"] == "same"
    assert doc["cross_check"] is True


def test_tree_pi0_self(capsys):
    code, doc = run_json(capsys, "tree-pi0", "--kind", "free-group-rank-2", "--ray1", "geodesic:01", "--ray2", "geodesic:01")
    assert doc["relation"] == "equivalent"


def test_tree_pi0_rejects_non_tree(capsys):
    code, _, err = run(capsys, "tree-pi0", "--kind", "grid-2", "--ray1", "geodesic:0", "--ray2", "geodesic:1")
    assert code == 2
    assert "not a tree" in err


def test_same_end_staircase(capsys):
    code, doc = run_json(capsys, "same-end", "--kind", "staircase", "--nmax", "60", "--ray1", "alpha",
                         "--ray2", "alpha-prime", "--rmax", "5", "--length", "60")
    assert code == 0
    assert doc["relation"] == "same"
    assert set(doc["witnesses"]) == {"1", "2", "3", "4", "5"}


def test_same_end_inconclusive_exit(capsys):
    code, doc = run_json(capsys, "same-end", "--kind", "line", "--ray1", "geodesic:0", "--ray2", "geodesic:0",
                         "--rmax", "8", "--length", "5")
    assert code == 3
    assert doc["relation"] == "inconclusive"


def test_staircase_refute_direct(capsys):
    code, doc = run_json(capsys, "staircase-refute", "--generator", "direct-crosser", "--A", "2", "--rows", "20-70")
    assert code == 0
    assert doc["refuted"] is True
    assert doc["scan"]["stable_word"] == "f_4"
    assert doc["witness"]["step"] == 4
    assert len(doc["witness"]["points"]) == 51


def test_staircase_refute_constant(capsys):
    code, doc = run_json(capsys, "staircase-refute", "--generator", "constant", "--A", "1")
    assert code == 0
    assert doc["refuted"] is False
    assert doc["scan"]["stable_word"] == "()"


def test_staircase_refute_negative_control(capsys):
    code, doc = run_json(capsys, "staircase-refute", "--generator", "top-crosser", "--steps", "constant", "--A", "1")
    assert doc["refuted"] is False
    assert doc["refutation"].startswith("unavailable")


def test_staircase_refute_rows_file(tmp_path, capsys):
    from coarse_ends.obstruction import candidate_family

    s = StaircaseSpace(n_max=40)
    path = tmp_path / "rows.json"
    path.write_text(json.dumps(candidate_family(s, "double", 40).to_dict(s)))
    code, doc = run_json(capsys, "staircase-refute", "--nmax", "40", "--rows-file", str(path), "--A", "2", "--rows", "20-40")
    assert doc["scan"]["stable_word"] == "f_4 b_5 f_6"


def test_staircase_refute_raw_rows_rejected(capsys):
    code, _, err = run(capsys, "staircase-refute", "--generator", "direct", "--raw", "--rows", "20-30")
    assert code == 2
    assert "path" in err


def test_cone_check(capsys, tmp_path):
    code, doc = run_json(capsys, "cone-check", "--planted", "3")
    assert code == 0
    assert doc["ends"] == 3 and doc["passed"]
    path = tmp_path / "x.json"
    path.write_text(json.dumps(planted_complex(2).to_dict()))
    code, doc = run_json(capsys, "cone-check", "--complex", str(path))
    assert doc["ends"] == 2
    assert run(capsys, "cone-check")[0] == 2


def test_map_check(tmp_path, capsys):
    line = build_space("line")
    trace = MapTrace.from_function(line, line, lambda x: 2 * x, 10)
    path = tmp_path / "t.json"
    path.write_text(json.dumps(trace.to_dict()))
    code, doc = run_json(capsys, "map-check", "--trace", str(path), "--radii", "1,3", "--balls", "[[0, 2]]")
    assert code == 0
    assert doc["modulus"] == {"1": "0", "3": "4"}
    assert doc["affine_bound"] == {"A": "2", "B": "0"}
    assert doc["proper_on_trace"] is True


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export-dot", "--kind", "regular-tree-3", "--radius", "1")
    assert code == 0
    assert out.count("--") == 3


def test_parse_ray_forms(tmp_path):
    t = build_space("regular-tree-3")
    assert parse_ray(t, "geodesic:01", 4).samples == ((), (0,), (0, 1), (0, 1, 0))
    path = tmp_path / "r.json"
    path.write_text("[[], [2], [2, 1]]")
    assert parse_ray(t, f"@{path}", 10).samples == ((), (2,), (2, 1))
    with pytest.raises(InvalidInput):
        parse_ray(t, "alpha", 5)
    with pytest.raises(InvalidInput):
        parse_ray(t, "geodesic:x", 5)


def test_run_config_validation():
    with pytest.raises(InvalidInput):
        RunConfig("ends", "line", {"rmax": -1})


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "coarse_ends", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.1.0"
