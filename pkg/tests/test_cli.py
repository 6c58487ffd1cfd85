import csv
import json
import math

import pytest

from npe_adi.charges import Atom, ChargeSystem, write_pqr
from npe_adi.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main, parse_alphas, parse_length, parse_list

FAST = ["--h", "0.5", "--padding", "3", "--dt", "0.05", "--t-final", "0.5"]


def _read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    return first, rows


def _outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if ".timing." not in p.name}


def test_parse_helpers():
    assert parse_length("pi/4") == pytest.approx(math.pi / 4)
    assert parse_length("π/48") == pytest.approx(math.pi / 48)
    assert parse_list("pi/4, pi/8") == pytest.approx([math.pi / 4, math.pi / 8])
    assert parse_alphas("1,10,40") == [1.0, 10.0, 40.0]
    for bad in ("-1", "0", "__import__('os')", "abc"):
        with pytest.raises(Exception):
            parse_length(bad)


def test_usage_errors(tmp_path):
    assert main([]) == EXIT_USAGE
    assert main(["born", "--dt", "-1", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    assert main(["mms-convergence", "--study", "space", "--h-list", "0.3", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    assert main(["mms-convergence", "--out-dir", str(tmp_path)]) == EXIT_USAGE


def test_mms_single_row(tmp_path):
    rc = main(["mms-convergence", "--study", "space", "--scheme", "eps1", "--h-list", "pi/4", "--dt", "0.5",
               "--out-dir", str(tmp_path)])
    assert rc == EXIT_OK
    first, rows = _read_csv(tmp_path / "mms_space.csv")
    assert first.startswith("# config_hash=")
    assert rows[0] == ["h", "eps1_linf", "eps1_linf_order", "eps1_l2", "eps1_l2_order"]
    assert len(rows) == 2 and rows[1][2] == ""
    assert float(rows[1][1]) > 0


def test_mms_time_study_reports_slope(tmp_path):
    rc = main(["mms-convergence", "--study", "time", "--scheme", "both", "--h", "pi/4", "--dt-list", "0.8,1.6",
               "--out-dir", str(tmp_path)])
    assert rc == EXIT_OK
    text = (tmp_path / "mms_time.csv").read_text()
    assert "eps1 fitted slope" in text and "eps2 fitted slope" in text
    _, rows = _read_csv(tmp_path / "mms_time.csv")
    assert len(rows[0]) == 9 and [r[0] for r in rows[1:]] == ["1.6", "0.8"]


def test_born_no_contrast_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["born", *FAST, "--eps-s", "1"]
    assert main([*args, "--out-dir", str(a)]) == EXIT_OK
    assert main([*args, "--out-dir", str(b)]) == EXIT_OK
    assert _outputs(a) == _outputs(b)
    report = json.loads((a / "born_report.json").read_text())
    assert abs(report["results"][0]["dG_p"]) < 1e-6
    assert "config_hash" in report
    assert (a / "born.timing.json").exists() and (a / "born_trace_adi.csv").exists()


def test_born_sweep_both_solvers(tmp_path):
    rc = main(["born", *FAST, "--alpha-sweep", "1,40", "--both-solvers", "--out-dir", str(tmp_path)])
    assert rc == EXIT_OK
    _, rows = _read_csv(tmp_path / "born_sweep.csv")
    assert rows[0][:3] == ["alpha", "solver", "dG_p"]
    assert [(r[0], r[1]) for r in rows[1:]] == [("1.0", "adi"), ("1.0", "bvp"), ("40.0", "adi"), ("40.0", "bvp")]
    assert all(float(r[2]) < 0 for r in rows[1:])
    assert not (tmp_path / "born_trace_adi.csv").exists()


def _two_charges(path):
    write_pqr(ChargeSystem([Atom((-0.8, 0.0, 0.0), 0.5, 1.2), Atom((0.8, 0.0, 0.0), -0.5, 1.2)]), path)
    return path


def test_compare_two_charges(tmp_path):
    pqr = _two_charges(tmp_path / "pair.pqr")
    out = tmp_path / "out"
    rc = main(["compare", "--pqr", str(pqr), "--h", "0.5", "--padding", "2.5", "--dt", "0.01", "--t-final", "2",
               "--out-dir", str(out)])
    assert rc == EXIT_OK
    res = json.loads((out / "compare.json").read_text())["result"]
    assert res["adi"]["converged"] and res["bvp"]["converged"]
    assert abs(res["dG_p_difference"]) <= max(1.0, 0.01 * abs(res["bvp"]["dG_p"]))
    timing = json.loads((out / "compare.timing.json").read_text())
    assert timing["wall_time"]["speedup_bvp_over_adi"] > 0


def test_compare_adi_only(tmp_path):
    rc = main(["compare", "--solver", "adi-only", *FAST, "--out-dir", str(tmp_path)])
    assert rc == EXIT_OK
    res = json.loads((tmp_path / "compare.json").read_text())["result"]
    assert set(res) == {"adi"}


def test_solvate_missing_file_writes_nothing(tmp_path):
    out = tmp_path / "out"
    good = _two_charges(tmp_path / "pair.pqr")
    assert main(["solvate", "--pqr", str(good), str(tmp_path / "nope.pqr"), "--out-dir", str(out)]) == EXIT_IO
    assert not out.exists()
    bad = tmp_path / "bad.pqr"
    bad.write_text("ATOM      1  C   MOL     1       x y z 0.1 1.0\n")
    assert main(["solvate", "--pqr", str(bad), "--out-dir", str(out)]) == EXIT_IO
    assert not out.exists()


def test_solvate_matches_reference_rows(tmp_path):
    pqr = _two_charges(tmp_path / "imidazole.pqr")
    out = tmp_path / "out"
    assert main(["solvate", "--pqr", str(pqr), *FAST, "--out-dir", str(out)]) == EXIT_OK
    report = json.loads((out / "imidazole.json").read_text())
    assert report["config"]["solvation"]["alpha"] == 40.0
    summary = json.loads((out / "solvate_summary.json").read_text())
    assert summary["statistics"]["n_matched"] == 1
    _, rows = _read_csv(out / "solvate_summary.csv")
    assert rows[1][0] == "imidazole" and float(rows[1][2]) == -9.81


def test_presets(tmp_path):
    from npe_adi.cli import PRESETS
    assert PRESETS["compound"] == {"h": 0.25, "dt": 0.1, "t_final": 2.0, "alpha": 40.0}
    assert PRESETS["protein"]["h"] == 0.5 and PRESETS["protein"]["dt"] == 0.15 and PRESETS["protein"]["t_final"] == 3.0
