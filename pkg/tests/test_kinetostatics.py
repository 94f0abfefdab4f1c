from __future__ import annotations

import numpy as np
import pytest

from kinetostiff import orthoglide as og
from kinetostiff.chain import ChainConfig, ChainSpec, Spring, jacobians
from kinetostiff.errors import InputError, NumericalError, SingularityError
from kinetostiff.kinetostatics import (
    aggregate_manipulator,
    assemble_spring_compliance,
    cartesian_spring_compliance,
    chain_stiffness_blocksolve,
    chain_stiffness_svd,
    matrix_rank,
    solve_chain,
)


def random_spd(rng, n=6):
    a = rng.standard_normal((n, n))
    return a @ a.T / n + 0.1 * np.eye(n)


@pytest.fixture
def puu_chain(geom, springs):
    g = geom.with_variant("puu")
    pose = og.inverse_kinematics(g, og.POINTS["Q1"])["x"]
    jac = jacobians(og.build_chain(g, "x"), pose.config)
    return jac, springs.blocks(springs.k_bar / 2)


class TestSpringCompliance:
    def test_single_end_spring(self, rng):
        k = random_spd(rng)
        jac = jacobians(ChainSpec((Spring("s"),)), ChainConfig())
        np.testing.assert_allclose(cartesian_spring_compliance(jac, {"s": k}), k, atol=1e-15)

    def test_control_loop_term_is_rank_one(self, puu_chain):
        jac, blocks = puu_chain
        s_full = cartesian_spring_compliance(jac, blocks)
        s_stiff = cartesian_spring_compliance(jac, {**blocks, "ctr": np.zeros((1, 1))})
        j0 = jac.block("ctr")[:, 0]
        np.testing.assert_allclose(s_full - s_stiff, blocks["ctr"][0, 0] * np.outer(j0, j0), atol=1e-18)

    def test_blockwise_equals_full_assembly(self, puu_chain):
        jac, blocks = puu_chain
        k_full = assemble_spring_compliance(jac, blocks)
        assert k_full.shape == (19, 19)
        s = cartesian_spring_compliance(jac, blocks)
        ref = jac.J_theta @ k_full @ jac.J_theta.T
        assert np.linalg.norm(s - ref) / np.linalg.norm(ref) < 1e-10

    def test_missing_block(self, puu_chain):
        jac, blocks = puu_chain
        del blocks["foot"]
        with pytest.raises(InputError):
            cartesian_spring_compliance(jac, blocks)


class TestChainStiffness:
    def test_no_passive_joints(self, rng):
        s = random_spd(rng)
        cs = chain_stiffness_svd(s, np.zeros((6, 0)))
        np.testing.assert_allclose(cs.K, np.linalg.inv(s), rtol=1e-10)
        assert cs.rank == 6
        np.testing.assert_allclose(chain_stiffness_blocksolve(s, np.zeros((6, 0))).K, cs.K, rtol=1e-10)

    def test_axis_aligned_slack(self):
        cs = chain_stiffness_svd(np.eye(6), np.eye(6)[:, :2])
        np.testing.assert_allclose(cs.K, np.diag([0, 0, 1, 1, 1, 1]), atol=1e-15)
        assert cs.rank == 4

    def test_puu_chain_rank_two(self, puu_chain):
        jac, blocks = puu_chain
        cs = chain_stiffness_svd(cartesian_spring_compliance(jac, blocks), jac.J_q)
        assert cs.rank == 2
        assert matrix_rank(cs.K) == 2
        np.testing.assert_allclose(cs.K @ cs.nullspace_basis, 0.0, atol=1e-9 * np.abs(cs.K).max())

    def test_methods_agree_on_full_rank(self, rng):
        for _ in range(20):
            m = int(rng.integers(1, 6))
            s, jq = random_spd(rng), rng.standard_normal((6, m))
            a, b = chain_stiffness_svd(s, jq).K, chain_stiffness_blocksolve(s, jq).K
            assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-9

    def test_blocksolve_refuses_rank_deficient(self, rng):
        jq = rng.standard_normal((6, 2))
        jq = np.hstack([jq, jq[:, :1] + jq[:, 1:]])
        with pytest.raises(SingularityError):
            chain_stiffness_blocksolve(random_spd(rng), jq)
        assert chain_stiffness_svd(random_spd(rng), jq).rank == 4

    def test_degenerate_springs_name_direction(self):
        s = np.diag([1.0, 1.0, 1.0, 1.0, 0.0, 1.0])
        with pytest.raises(NumericalError) as info:
            chain_stiffness_svd(s, np.eye(6)[:, :1])
        np.testing.assert_allclose(np.abs(info.value.direction), np.eye(6)[4], atol=1e-12)

    def test_singular_manipulator_posture_uses_svd(self, geom, springs):
        g = geom.with_variant("puu")
        name, p = og.singular_configs(g)[0]
        chains = [og.chain_stiffness(g, cid, pose, springs) for cid, pose in og.inverse_kinematics(g, p).items()]
        km = aggregate_manipulator(chains).K_m
        assert name == "flat" and matrix_rank(km) < 6


class TestSolveChain:
    def test_passive_motion_absorbed(self, rng):
        s, jq = random_spd(rng), rng.standard_normal((6, 3))
        jt, kt = rng.standard_normal((6, 6)), random_spd(rng)
        sol = solve_chain(s, jq, jq @ [0.1, -0.2, 0.3], J_theta=jt, k_theta=kt)
        np.testing.assert_allclose(sol.f, 0.0, atol=1e-12)
        np.testing.assert_allclose(sol.tau_theta, 0.0, atol=1e-12)
        np.testing.assert_allclose(sol.dq, [0.1, -0.2, 0.3], atol=1e-12)

    def test_zero_displacement(self, rng):
        sol = solve_chain(random_spd(rng), rng.standard_normal((6, 2)), np.zeros(6))
        assert not sol.f.any() and not sol.dq.any()

    def test_residuals(self, rng):
        for _ in range(20):
            s, jq, dt = random_spd(rng), rng.standard_normal((6, 2)), rng.standard_normal(6)
            sol = solve_chain(s, jq, dt)
            assert np.abs(s @ sol.f + jq @ sol.dq - dt).max() < 1e-9
            assert np.abs(jq.T @ sol.f).max() < 1e-9
            assert not sol.min_norm

    def test_min_norm_flag(self, rng):
        jq = rng.standard_normal((6, 1))
        sol = solve_chain(random_spd(rng), np.hstack([jq, jq]), rng.standard_normal(6))
        assert sol.min_norm
        assert sol.dq[0] == pytest.approx(sol.dq[1])


class TestAggregate:
    def test_isotropic_chains_give_full_rank(self, geom, springs):
        g = geom.with_variant("puu")
        chains = [og.chain_stiffness(g, cid, pose, springs) for cid, pose in og.inverse_kinematics(g, [0, 0, 0]).items()]
        assert [c.rank for c in chains] == [2, 2, 2]
        assert matrix_rank(aggregate_manipulator(chains).K_m) == 6

    def test_single_chain(self, rng):
        cs = chain_stiffness_svd(random_spd(rng), rng.standard_normal((6, 2)))
        np.testing.assert_array_equal(aggregate_manipulator([cs]).K_m, cs.K)

    def test_eigenvalue_bound(self, rng):
        chains = [chain_stiffness_svd(random_spd(rng), rng.standard_normal((6, 2))) for _ in range(3)]
        km = aggregate_manipulator(chains).K_m
        lam = np.linalg.eigvalsh(km)[0]
        assert lam >= max(np.linalg.eigvalsh(c.K)[0] for c in chains) - 1e-12
        assert aggregate_manipulator(chains).ranks == (4, 4, 4)

    def test_empty(self):
        with pytest.raises(InputError):
            aggregate_manipulator([])
