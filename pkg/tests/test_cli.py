from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from kinetostiff import orthoglide as og
from kinetostiff.cli import main, parse_point
from kinetostiff.errors import InputError
from kinetostiff.procrustes import LoadCase, synthetic_datasets, write_dataset


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_fields(tmp_path, k, cloud, names=None):
    paths = []
    for i, ds in enumerate(synthetic_datasets(k, cloud, p0=[10.0, 0.0, 0.0])):
        path = tmp_path / f"case{i}.csv"
        write_dataset(ds, path)
        paths.append(str(path))
    return paths


class TestEval:
    def test_prpar_origin(self, capsys):
        code, out, _ = run(capsys, "eval", "--point", "0,0,0", "--variant", "prpar")
        doc = json.loads(out)
        assert code == 0 and doc["schema"].startswith("kinetostiff.stiffness-report/")
        assert doc["k_tran"] == pytest.approx(2.78e-4, rel=0.15)

    def test_variant_ratio(self, capsys):
        puu = json.loads(run(capsys, "eval", "--point", "0,0,0", "--variant", "puu")[1])
        prpar = json.loads(run(capsys, "eval", "--point", "0,0,0", "--variant", "prpar")[1])
        assert puu["k_tran"] == pytest.approx(prpar["k_tran"], rel=1e-12)
        assert puu["k_rot"] / prpar["k_rot"] == pytest.approx(10.8, rel=0.05)

    @pytest.mark.parametrize("point", ["0,0", "a,b,c", "1,2,3,4", "nan,0,0"])
    def test_malformed_point(self, capsys, point):
        assert run(capsys, "eval", "--point", point)[0] == 2

    def test_unreachable(self, capsys):
        code, _, err = run(capsys, "eval", "--point", "0,400,0")
        assert code == 1 and "chain x" in err

    def test_output_file(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        assert run(capsys, "eval", "--point", "Q2", "--out", str(out))[0] == 0
        assert json.loads(out.read_text())["rank_Km"] == 6

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2


class TestMap:
    def test_single_point_matches_eval(self, capsys):
        _, out, _ = run(capsys, "map", "--grid=-73.65:-73.65:1,-73.65:-73.65:1,-73.65:-73.65:1")
        lines = out.splitlines()
        assert lines[0].startswith("# schema=kinetostiff.stiffness-map/")
        assert lines[1] == "x,y,z,k_tran,k_rot,rank_Km,status"
        row = lines[2].split(",")
        rep = json.loads(run(capsys, "eval", "--point", "Q1")[1])
        assert float(row[3]) == rep["k_tran"] and float(row[4]) == rep["k_rot"]
        assert row[-1] == "ok"

    def test_cube_and_determinism(self, capsys, tmp_path):
        grid = "--grid=-73.65:126.35:5,-73.65:126.35:5,-73.65:126.35:5"
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "map", grid, "--out", str(a), "--workers", "4")[0] == 0
        assert run(capsys, "map", grid, "--out", str(b), "--workers", "1", "--seed", "0")[0] == 0
        assert len(a.read_text().splitlines()) == 2 + 125
        assert a.read_bytes() == b.read_bytes()
        side = json.loads(a.with_suffix(".json").read_text())
        assert side["schema"].startswith("kinetostiff.stiffness-map/") and len(side["points"]) == 125

    def test_unreachable_rows_flagged(self, capsys):
        code, out, _ = run(capsys, "map", "--grid", "0:400:2,0:0:1,0:0:1")
        assert code == 0
        assert out.splitlines()[-1].endswith(",unreachable")

    def test_bad_grid(self, capsys):
        assert run(capsys, "map", "--grid", "0:1:2")[0] == 2


class TestFitCompliance:
    def test_recovers_matrix(self, capsys, tmp_path, config, rng):
        k = np.array(config[0]["foot"])
        paths = write_fields(tmp_path, k, rng.uniform(-30, 30, (40, 3)))
        code, out, _ = run(capsys, "fit-compliance", *paths, "--key", "foot")
        doc = json.loads(out)
        assert code == 0 and doc["schema"].startswith("kinetostiff.compliance/")
        got = np.array(doc["foot"])
        assert np.linalg.norm(got - k) / np.linalg.norm(k) < 1e-9

    def test_duplicate_load_is_data_error(self, capsys, tmp_path, rng):
        paths = write_fields(tmp_path, np.eye(6) * 1e-5, rng.uniform(-30, 30, (40, 3)))
        paths[5] = paths[0]
        assert run(capsys, "fit-compliance", *paths)[0] == 3

    def test_collinear_nodes(self, capsys, tmp_path):
        line = np.outer(np.arange(5.0), [1.0, 1.0, 0.0])
        paths = write_fields(tmp_path, np.eye(6) * 1e-5, line)
        code, _, err = run(capsys, "fit-compliance", *paths)
        assert code == 3 and "degenerate" in err

    def test_wrong_count(self, capsys, tmp_path, rng):
        paths = write_fields(tmp_path, np.eye(6) * 1e-5, rng.uniform(-30, 30, (10, 3)))
        assert run(capsys, "fit-compliance", *paths[:4])[0] == 2


class TestValidate:
    def test_default_config_passes(self, capsys):
        code, out, _ = run(capsys, "validate")
        assert code == 0 and "all suites passed" in out
        assert out.count("PASS") == 7

    def test_asymmetric_matrix_fails(self, capsys, tmp_path, config):
        data = json.loads(json.dumps(config[0]))
        data["foot"][0][1] = 1e-3
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        code, out, _ = run(capsys, "validate", "--config", str(path))
        assert code == 1
        assert "FAIL  config_matrices" in out and "not symmetric" in out

    @pytest.mark.parametrize("seed", [1, 7, 123])
    def test_seed_does_not_flip_status(self, capsys, seed):
        assert run(capsys, "validate", "--seed", str(seed))[0] == 0


class TestCompare:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "compare", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and [r["point"] for r in doc["rows"]] == ["Q0", "Q1", "Q2"]
        assert doc["rows"][0]["k_rot_ratio_puu_over_prpar"] == pytest.approx(10.8, rel=0.05)

    def test_extended_applies_to_parallelogram_only(self, capsys):
        base = json.loads(run(capsys, "compare", "--format", "json", "--points", "Q0")[1])["rows"][0]
        ext = json.loads(run(capsys, "compare", "--format", "json", "--points", "Q0", "--extended")[1])["rows"][0]
        assert ext["puu"] == base["puu"]
        assert ext["prpar"]["k_tran"] > base["prpar"]["k_tran"]

    def test_table(self, capsys):
        code, out, _ = run(capsys, "compare", "--points", "Q0;0,10,20")
        assert code == 0 and len(out.splitlines()) == 4


def test_parse_point_names():
    np.testing.assert_array_equal(parse_point("q1"), og.POINTS["Q1"])
    with pytest.raises(InputError):
        parse_point("Q9")


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "kinetostiff.cli", "eval", "--point", "Q0"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["available"]
