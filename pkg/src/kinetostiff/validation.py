"""Built-in invariant suites used by ``kinetostiff validate``.

Every suite compares two independent routes to the same quantity (closed
form against numerical assembly, SVD against bordered solve, analytic
against finite differences) on a seeded random corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .chain import forward_kinematics, jacobians, numeric_jacobians
from .compliance import SpringSet, springs_from_dict, validate_compliance
from .errors import StiffnessError
from .kinetostatics import chain_stiffness_blocksolve, chain_stiffness_svd
from .orthoglide import (
    POINTS,
    OrthoglideGeometry,
    build_chain,
    evaluate_stiffness,
    geometry_from_dict,
    inverse_kinematics,
)
from .parallelogram import (
    ParallelogramSpec,
    bar_chain,
    parallelogram_stiffness_analytic,
    parallelogram_stiffness_numeric,
)

WORKSPACE_CUBE = (-73.65, 126.35)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "max_error", float(self.max_error))


def random_points(rng: np.random.Generator, n: int, cube=WORKSPACE_CUBE) -> np.ndarray:
    return rng.uniform(cube[0], cube[1], size=(n, 3))


def random_spd(rng: np.random.Generator, n: int = 6, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return scale * (a @ a.T / n + 0.1 * np.eye(n))


def random_bar_compliance(rng: np.random.Generator) -> np.ndarray:
    """Beam-patterned bar compliance ({x}, {y, rz}, {z, ry}, {rx} groups)."""
    k = np.zeros((6, 6))
    k[0, 0] = rng.uniform(1e-5, 1e-4)
    k[3, 3] = rng.uniform(1e-6, 1e-5)
    for i, j in ((1, 5), (2, 4)):
        m = random_spd(rng, 2)
        k[np.ix_([i, j], [i, j])] = m * np.array([[1e-2, 1e-4], [1e-4, 1e-6]])
    return 0.5 * (k + k.T)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def suite_config_matrices(data: Mapping, **_) -> SuiteResult:
    worst = 0.0
    try:
        for key in ("foot", "bar", "axis", "act"):
            if key in data:
                k = np.asarray(data[key], dtype=float)
                validate_compliance(k)
                worst = max(worst, _rel(k, k.T))
    except StiffnessError as exc:
        return SuiteResult("config_matrices", False, float("nan"), 1e-6, f"{key}: {exc}")
    return SuiteResult("config_matrices", True, worst, 1e-6, "symmetric and positive semi-definite")


def suite_fk_ik(geom: OrthoglideGeometry, rng, n_points=50, **_) -> SuiteResult:
    worst = 0.0
    for p in random_points(rng, n_points):
        for cid, pose in inverse_kinematics(geom, p).items():
            t = forward_kinematics(build_chain(geom, cid), pose.config)
            worst = max(worst, np.abs(t[:3, 3] - p).max(), np.abs(t[:3, :3] - np.eye(3)).max())
    return SuiteResult("fk_ik_roundtrip", worst < 1e-9, worst, 1e-9)


def suite_fd_jacobians(geom: OrthoglideGeometry, springs: SpringSet, rng, n_points=4, **_) -> SuiteResult:
    worst = 0.0
    for p in random_points(rng, n_points):
        for variant in ("puu", "prpar"):
            g = geom.with_variant(variant)
            for cid, pose in inverse_kinematics(g, p).items():
                spec = build_chain(g, cid)
                a, b = jacobians(spec, pose.config), numeric_jacobians(spec, pose.config)
                worst = max(worst, np.abs(a.J_theta - b.J_theta).max(), np.abs(a.J_q - b.J_q).max())
    pspec = ParallelogramSpec(L=geom.L, d=geom.d, k_bar=springs.k_bar, k_axis=springs.k_axis)
    for q in rng.uniform(-1.2, 1.2, size=3):
        for side in ("up", "dn"):
            spec, cfg = bar_chain(pspec, q, side, extended=springs.k_axis is not None)
            a, b = jacobians(spec, cfg), numeric_jacobians(spec, cfg)
            worst = max(worst, np.abs(a.J_theta - b.J_theta).max(), np.abs(a.J_q - b.J_q).max())
    return SuiteResult("fd_jacobians", worst < 1e-5, worst, 1e-5)


def suite_svd_blocksolve(rng, n_cases=50, **_) -> SuiteResult:
    worst = 0.0
    for _ in range(n_cases):
        m = int(rng.integers(1, 6))
        s = random_spd(rng)
        jq = rng.standard_normal((6, m))
        worst = max(worst, _rel(chain_stiffness_svd(s, jq).K, chain_stiffness_blocksolve(s, jq).K))
    return SuiteResult("svd_vs_blocksolve", worst < 1e-9, worst, 1e-9)


def suite_parallelogram(geom: OrthoglideGeometry, springs: SpringSet, rng, **_) -> SuiteResult:
    worst = 0.0
    bars = [springs.k_bar] + [random_bar_compliance(rng) for _ in range(3)]
    for kb in bars:
        spec = ParallelogramSpec(L=geom.L, d=geom.d, k_bar=kb)
        for q in np.linspace(-1.2, 1.2, 7):
            worst = max(
                worst,
                _rel(parallelogram_stiffness_analytic(q, spec).K, parallelogram_stiffness_numeric(q, spec).K),
            )
    return SuiteResult("parallelogram_closed_form", worst < 1e-8, worst, 1e-8)


def suite_kappa_invariance(geom: OrthoglideGeometry, springs: SpringSet, **_) -> SuiteResult:
    g = geom.with_variant("prpar")
    worst = 0.0
    for p in POINTS.values():
        ref = evaluate_stiffness(OrthoglideGeometry(g.L, g.r, g.d, "prpar", kappa_f=1e3), p, springs).K_m
        for kf in (1.0, 1e6):
            km = evaluate_stiffness(OrthoglideGeometry(g.L, g.r, g.d, "prpar", kappa_f=kf), p, springs).K_m
            worst = max(worst, _rel(km, ref))
    return SuiteResult("fictitious_stiffness_invariance", worst < 1e-7, worst, 1e-7)


def suite_symmetry(geom: OrthoglideGeometry, springs: SpringSet, **_) -> SuiteResult:
    perm = [1, 2, 0, 4, 5, 3]
    worst = 0.0
    for variant in ("puu", "prpar"):
        for p in POINTS.values():
            km = evaluate_stiffness(geom.with_variant(variant), p, springs).K_m
            worst = max(worst, _rel(km[np.ix_(perm, perm)], km))
    return SuiteResult("cyclic_symmetry", worst < 1e-9, worst, 1e-9)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "fk_ik_roundtrip": suite_fk_ik,
    "fd_jacobians": suite_fd_jacobians,
    "svd_vs_blocksolve": suite_svd_blocksolve,
    "parallelogram_closed_form": suite_parallelogram,
    "fictitious_stiffness_invariance": suite_kappa_invariance,
    "cyclic_symmetry": suite_symmetry,
}


def run_all(data: Mapping, seed: int = 0) -> list[SuiteResult]:
    """Run every suite on a raw config mapping.

    A config whose matrices fail the symmetry/definiteness check stops there;
    the remaining suites are reported as failed because they need those
    matrices.
    """
    results = [suite_config_matrices(data)]
    if not results[0].passed:
        return results + [SuiteResult(n, False, float("nan"), 0.0, "skipped: invalid config") for n in SUITES]
    springs = springs_from_dict(data)
    geom = geometry_from_dict(data)
    for name, fn in SUITES.items():
        rng = np.random.default_rng([seed, len(name)])
        try:
            results.append(fn(geom=geom, springs=springs, rng=rng))
        except StiffnessError as exc:
            results.append(SuiteResult(name, False, float("nan"), 0.0, f"{type(exc).__name__}: {exc}"))
    return results
