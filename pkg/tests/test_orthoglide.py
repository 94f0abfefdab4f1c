from __future__ import annotations

import json

import numpy as np
import pytest

from kinetostiff import orthoglide as og
from kinetostiff import se3
from kinetostiff.chain import forward_kinematics
from kinetostiff.errors import InputError, WorkspaceError
from kinetostiff.kinetostatics import matrix_rank

CUBE = "-73.65:126.35:5,-73.65:126.35:5,-73.65:126.35:5"
CYCLE = [1, 2, 0, 4, 5, 3]


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestGeometry:
    def test_x_base_translation(self, geom):
        np.testing.assert_allclose(og.base_transform(geom, "x")[:3, 3], [-geom.L - geom.r, 0, 0])

    def test_bases_are_cyclic_permutations(self, geom):
        tx = og.base_transform(geom, "x")
        ty = og.base_transform(geom, "y")
        tz = og.base_transform(geom, "z")
        np.testing.assert_allclose(ty[:3, 3], np.roll(tx[:3, 3], 1))
        np.testing.assert_allclose(tz[:3, 3], np.roll(tx[:3, 3], 2))

    def test_legs_orthogonal_at_origin(self, geom):
        dirs = []
        for cid, pose in og.inverse_kinematics(geom, [0, 0, 0]).items():
            rot = og.CHAIN_ROTATIONS[cid] @ se3.rotation("z", pose.config.q[0]) @ se3.rotation("y", pose.config.q[1])
            dirs.append(rot[:, 0])
        np.testing.assert_allclose(np.array(dirs) @ np.array(dirs).T, np.eye(3), atol=1e-15)

    @pytest.mark.parametrize("kwargs", [dict(L=10.0, r=20.0), dict(L=300.0, r=30.0, d=0.0), dict(L=300.0, r=30.0, variant="rpr")])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            og.OrthoglideGeometry(**kwargs)

    def test_axis_flexibility_needs_parallelogram(self):
        with pytest.raises(InputError):
            og.OrthoglideGeometry(L=300.0, r=30.0, variant="puu", axis_flexibility=True)


class TestInverseKinematics:
    def test_origin(self, geom):
        for pose in og.inverse_kinematics(geom, [0, 0, 0]).values():
            assert pose.config.q0 == 0.0
            np.testing.assert_array_equal(pose.config.q, 0.0)

    def test_round_trip(self, geom, rng):
        worst = 0.0
        for p in rng.uniform(-100, 150, (1000, 3)):
            for cid, pose in og.inverse_kinematics(geom, p).items():
                t = forward_kinematics(og.build_chain(geom, cid), pose.config)
                worst = max(worst, np.abs(t[:3, 3] - p).max())
                np.testing.assert_allclose(t[:3, :3], np.eye(3), atol=1e-12)
        assert worst < 1e-9

    def test_flat_point_puts_legs_in_a_plane(self, geom):
        name, p = og.singular_configs(geom)[0]
        assert name == "flat"
        dirs = []
        for cid, pose in og.inverse_kinematics(geom, p).items():
            rot = og.CHAIN_ROTATIONS[cid] @ se3.rotation("z", pose.config.q[0]) @ se3.rotation("y", pose.config.q[1])
            dirs.append(rot[:, 0])
        assert abs(np.linalg.det(np.array(dirs))) < 1e-12

    def test_unreachable_names_chain(self, geom):
        with pytest.raises(WorkspaceError) as info:
            og.inverse_kinematics(geom, [0.0, 400.0, 0.0])
        assert info.value.chain == "x"
        assert "chain x" in str(info.value)

    def test_near_singular_flag(self, geom):
        poses = og.inverse_kinematics(geom, [0.0, geom.L - 1e-5, 0.0])
        assert poses["x"].near_singular and not poses["y"].near_singular


class TestEvaluate:
    def test_prpar_origin(self, geom, springs):
        rep = og.evaluate_stiffness(geom, og.POINTS["Q0"], springs)
        assert rep.k_tran == pytest.approx(2.78e-4, rel=0.15)
        assert rep.k_rot == pytest.approx(1.94e-7, rel=0.15)

    def test_rotational_ratio_at_origin(self, geom, springs):
        a = og.evaluate_stiffness(geom.with_variant("puu"), og.POINTS["Q0"], springs)
        b = og.evaluate_stiffness(geom, og.POINTS["Q0"], springs)
        assert a.k_tran == pytest.approx(b.k_tran, rel=1e-12)
        assert 8 <= a.k_rot / b.k_rot <= 13

    def test_origin_is_isotropic(self, geom, springs):
        kt = og.evaluate_stiffness(geom, [0, 0, 0], springs).K_tran
        np.testing.assert_allclose(kt, kt[0, 0] * np.eye(3), atol=1e-9 * kt[0, 0])

    @pytest.mark.parametrize("variant", og.VARIANTS)
    @pytest.mark.parametrize("point", list(og.POINTS))
    def test_cyclic_symmetry_on_diagonal(self, geom, springs, variant, point):
        km = og.evaluate_stiffness(geom.with_variant(variant), og.POINTS[point], springs).K_m
        assert rel(km[np.ix_(CYCLE, CYCLE)], km) < 1e-9

    def test_summaries(self, geom, springs):
        rep = og.evaluate_stiffness(geom, og.POINTS["Q1"], springs)
        c = np.linalg.inv(rep.K_m)
        assert rep.k_tran == pytest.approx(np.trace(c[:3, :3]) / 3, rel=1e-10)
        assert rep.k_rot_max == pytest.approx(np.linalg.eigvalsh(c[3:, 3:]).max(), rel=1e-10)
        assert rep.k_tran_max >= rep.k_tran

    def test_report_dict_is_json(self, geom, springs):
        d = og.evaluate_stiffness(geom, og.POINTS["Q2"], springs).to_dict()
        assert json.loads(json.dumps(d))["rank_Km"] == 6

    def test_extended_needs_axis_matrix(self, geom, springs):
        from dataclasses import replace

        bare = replace(springs, k_axis=None)
        with pytest.raises(InputError):
            og.evaluate_stiffness(geom.with_variant("prpar", axis_flexibility=True), [0, 0, 0], bare)


class TestSingularConfigs:
    @pytest.mark.parametrize("variant", og.VARIANTS)
    def test_flat(self, geom, springs, variant):
        g = geom.with_variant(variant)
        rep = og.evaluate_stiffness(g, og.singular_configs(g)[0][1], springs)
        kt = rep.K_tran
        assert matrix_rank(kt) == 2
        assert not rep.available and rep.k_tran is None
        np.testing.assert_allclose(np.diag(kt), kt[0, 0], rtol=1e-9)
        off = kt[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(off, -kt[0, 0] / 2, rtol=1e-9)

    @pytest.mark.parametrize("variant", og.VARIANTS)
    def test_bar(self, geom, springs, variant):
        g = geom.with_variant(variant)
        kt = og.evaluate_stiffness(g, og.singular_configs(g)[1][1], springs).K_tran
        assert matrix_rank(kt) == 1
        np.testing.assert_allclose(kt, kt[0, 0], rtol=1e-9)


class TestWorkspaceMap:
    def test_single_point(self, geom, springs):
        rows = og.workspace_map(geom, og.grid_points(og.parse_grid("0:0:1,0:0:1,0:0:1")), springs)
        assert len(rows) == 1
        np.testing.assert_array_equal(rows[0].report.K_m, og.evaluate_stiffness(geom, [0, 0, 0], springs).K_m)

    def test_cube_reachable_and_ordered(self, geom, springs):
        pts = og.grid_points(og.parse_grid(CUBE))
        rows = og.workspace_map(geom, pts, springs, workers=4)
        assert len(rows) == 125 and {r.status for r in rows} == {"ok"}
        assert [r.index for r in rows] == list(range(125))
        serial = og.workspace_map(geom, pts, springs, workers=1)
        assert all(np.array_equal(a.report.K_m, b.report.K_m) for a, b in zip(rows, serial))

    def test_parallelogram_never_more_compliant_in_rotation(self, geom, springs):
        pts = og.grid_points(og.parse_grid(CUBE))
        for a, b in zip(og.workspace_map(geom, pts, springs), og.workspace_map(geom.with_variant("puu"), pts, springs)):
            assert a.report.k_rot <= b.report.k_rot

    def test_diagonal_trend(self, geom, springs):
        k = [og.evaluate_stiffness(geom, [a] * 3, springs).k_tran for a in np.linspace(-73.65, 126.35, 21)]
        i = int(np.argmin(k))
        assert np.all(np.diff(k[: i + 1]) < 0) and np.all(np.diff(k[i:]) > 0)
        assert k[-1] > k[0]

    def test_unreachable_flagged(self, geom, springs):
        rows = og.workspace_map(geom, [[0, 0, 0], [0, 500, 0]], springs, workers=1)
        assert [r.status for r in rows] == ["ok", "unreachable"]

    def test_empty(self, geom, springs):
        with pytest.raises(InputError):
            og.workspace_map(geom, np.zeros((0, 3)), springs)

    @pytest.mark.parametrize("text", ["0:1:2,0:1:2", "0:1:0,0:1:2,0:1:2", "1:0:2,0:1:2,0:1:2", "a:1:2,0:1:2,0:1:2", "0:1:1,0:0:1,0:0:1"])
    def test_bad_grid(self, text):
        with pytest.raises(InputError):
            og.parse_grid(text)


class TestCalibration:
    def test_fit_reproduces_published_summaries(self, springs):
        res = og.calibrate_geometry(springs)
        assert 300 < res.L < 320 and 25 < res.r < 35
        assert res.max_relative_error < 0.01

    def test_bundled_config_is_calibrated(self, geom, springs):
        errs = og.table_errors(geom, springs)
        assert max(abs(e) for rows in errs.values() for pair in rows.values() for e in pair) < 0.01


class TestConfig:
    def test_round_trip(self, geom, springs, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(og.config_to_dict(geom, springs)))
        data, again = og.load_config(path)
        assert og.geometry_from_dict(data) == geom
        np.testing.assert_array_equal(again.k_act, springs.k_act)

    def test_missing_geometry(self, tmp_path, config):
        data = dict(config[0])
        del data["L"]
        with pytest.raises(InputError):
            og.geometry_from_dict(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            og.load_config(tmp_path / "nope.json")
