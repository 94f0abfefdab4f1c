"""Orthoglide-type 3-axis translational manipulators: 3-PUU and 3-PRPaR.

Each chain ``i`` in {x, y, z} is

    T_base V_a(q0 + th0) V_s(act) V_s(foot) Rz(q1) Ry(q2) Tx(L) V_s(leg) Ry(q3) Rz(q4) T_tool

expressed in chain-local axes that are a cyclic permutation of the world
axes. In the PUU variant the leg spring is a 6-dof spring with the
compliance of a double-section bar. In the PRPaR variant it is the 5-dof
parallelogram stiffness, and the two parallelogram joints move together
(``q2 + q3 = 0``).

The reference posture (all legs along their actuator axes, mutually
orthogonal) is the origin of the workspace.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import se3
from .chain import Actuated, ChainConfig, ChainSpec, PassivePair, Rigid, Spring, constrain_passive, jacobians
from .compliance import SpringSet, invert_spd, springs_from_dict, springs_to_dict
from .errors import InputError, NumericalError, WorkspaceError
from .kinetostatics import (
    aggregate_manipulator,
    cartesian_spring_compliance,
    chain_stiffness_svd,
    matrix_rank,
    SIGMA_TOL,
)
from .parallelogram import (
    DEFAULT_KAPPA_F,
    ParallelogramSpec,
    parallelogram_stiffness_analytic,
    parallelogram_stiffness_numeric,
    regularize_for_chain_use,
)

CHAIN_IDS = ("x", "y", "z")
VARIANTS = ("puu", "prpar")
PLG_MODES = ("fictitious", "reduce_5dof")
CONFIG_SCHEMA = "kinetostiff.orthoglide-config/1"
NEAR_SINGULAR_TOL = 1e-3

# rotation of each chain's base frame: local x is the actuator axis
CHAIN_ROTATIONS = {
    "x": np.eye(3),
    "y": np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
    "z": np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),
}

POINTS = {
    "Q0": (0.0, 0.0, 0.0),
    "Q1": (-73.65, -73.65, -73.65),
    "Q2": (126.35, 126.35, 126.35),
}

# published compliance summaries (k_tran [mm/N], k_rot [rad/(N mm)]) of the prototype
REFERENCE_COMPLIANCE = {
    "puu": {"Q0": (2.78e-4, 20.9e-7), "Q1": (10.9e-4, 24.1e-7), "Q2": (71.3e-4, 25.8e-7)},
    "prpar": {"Q0": (2.78e-4, 1.94e-7), "Q1": (9.86e-4, 2.06e-7), "Q2": (21.2e-4, 2.65e-7)},
    "prpar_extended": {"Q0": (2.93e-4, 2.02e-7), "Q1": (10.2e-4, 2.15e-7), "Q2": (21.9e-4, 2.76e-7)},
}

# published K_tran entries [N/mm] at the two diagonal singular postures
REFERENCE_SINGULAR = {
    "puu": {"flat": (1.48e3, -0.74e3), "bar": (1.78e3, 1.78e3)},
    "prpar": {"flat": (1.54e3, -0.77e3), "bar": (4.65e3, 4.65e3)},
}


@dataclass(frozen=True)
class OrthoglideGeometry:
    """Leg length ``L``, end-effector offset ``r`` and parallelogram separation ``d`` (mm).

    ``kappa_f`` and ``plg_mode`` choose how the rank-5 parallelogram stiffness
    is made usable as a chain spring; the results do not depend on either.
    """

    L: float
    r: float
    d: float = 80.0
    variant: str = "prpar"
    axis_flexibility: bool = False
    kappa_f: float = DEFAULT_KAPPA_F
    plg_mode: str = "fictitious"

    def __post_init__(self):
        object.__setattr__(self, "variant", str(self.variant).lower())
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not (np.isfinite(self.L) and np.isfinite(self.r) and self.L > self.r > 0):
            raise InputError(f"geometry needs L > r > 0, got L={self.L}, r={self.r}")
        if self.variant == "prpar" and not (np.isfinite(self.d) and self.d > 0):
            raise InputError(f"parallelogram separation must be positive, got d={self.d}")
        if self.axis_flexibility and self.variant != "prpar":
            raise InputError("axis flexibility only applies to the parallelogram (prpar) variant")
        if self.plg_mode not in PLG_MODES:
            raise InputError(f"plg_mode must be one of {PLG_MODES}")
        if not (np.isfinite(self.kappa_f) and self.kappa_f > 0):
            raise InputError("kappa_f must be positive")

    def with_variant(self, variant: str, axis_flexibility: bool | None = None) -> "OrthoglideGeometry":
        flex = self.axis_flexibility if axis_flexibility is None else axis_flexibility
        return replace(self, variant=variant, axis_flexibility=flex and str(variant).lower() == "prpar")


def _check_chain_id(chain_id):
    if chain_id not in CHAIN_IDS:
        raise InputError(f"chain id must be one of {CHAIN_IDS}, got {chain_id!r}")


def base_transform(geom: OrthoglideGeometry, chain_id: str) -> np.ndarray:
    b = CHAIN_ROTATIONS[chain_id]
    return se3.make_transform(b, b @ np.array([-geom.L - geom.r, 0.0, 0.0]))


def tool_transform(geom: OrthoglideGeometry, chain_id: str) -> np.ndarray:
    return se3.make_transform(CHAIN_ROTATIONS[chain_id].T, [geom.r, 0.0, 0.0])


def build_chain(geom: OrthoglideGeometry, chain_id: str) -> ChainSpec:
    """Chain description for leg ``chain_id``; springs are named ctr, act, foot and leg."""
    _check_chain_id(chain_id)
    leg_dofs = (0, 1, 3, 4, 5) if geom.variant == "prpar" and geom.plg_mode == "reduce_5dof" else tuple(range(6))
    elements = (
        Rigid(base_transform(geom, chain_id)),
        Actuated("x", "translation", spring="ctr"),
        Spring("act"),
        Spring("foot"),
        PassivePair("z", "y"),
        Rigid(se3.Tx(geom.L)),
        Spring("leg", dofs=leg_dofs),
        PassivePair("y", "z"),
        Rigid(tool_transform(geom, chain_id)),
    )
    spec = ChainSpec(elements, names=("q1", "q2", "q3", "q4"))
    if geom.variant == "prpar":
        spec = constrain_passive(spec, [[0.0, 1.0, 1.0, 0.0]])
    return spec


@dataclass(frozen=True)
class ChainPose:
    chain_id: str
    config: ChainConfig
    near_singular: bool


def inverse_kinematics(geom: OrthoglideGeometry, p) -> dict[str, ChainPose]:
    """Configurations of the three chains that place the end point at ``p``.

    The branch with ``q0 = 0`` at the origin is used. Raises
    :class:`WorkspaceError` naming the first chain that cannot reach ``p``.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise InputError("point must be three finite coordinates")
    out = {}
    for cid in CHAIN_IDS:
        x, y, z = CHAIN_ROTATIONS[cid].T @ p
        disc = geom.L**2 - y**2 - z**2
        if disc < 0:
            raise WorkspaceError(f"point {p.tolist()} is out of reach of chain {cid}", chain=cid)
        s = np.sqrt(disc)
        q0 = x + geom.L - s
        q1 = np.arctan2(y, s)
        q2 = np.arctan2(-z, np.hypot(s, y))
        near = s < NEAR_SINGULAR_TOL * geom.L
        out[cid] = ChainPose(cid, ChainConfig(q0=q0, q=[q1, q2, -q2, -q1]), bool(near))
    return out


def leg_compliance(geom: OrthoglideGeometry, springs: SpringSet, q2: float) -> np.ndarray:
    """Compliance of the leg spring (bar-frame axes) for the given leg elevation ``q2``."""
    if geom.variant == "puu":
        # two bars of the double section in place of the parallelogram
        return springs.k_bar / 2.0
    spec = ParallelogramSpec(L=geom.L, d=geom.d, k_bar=springs.k_bar, k_axis=springs.k_axis)
    if geom.axis_flexibility:
        if springs.k_axis is None:
            raise InputError("axis flexibility needs an 'axis' compliance matrix in the config")
        k_plg = parallelogram_stiffness_numeric(q2, spec, extended=True)
    else:
        k_plg = parallelogram_stiffness_analytic(q2, spec)
    return regularize_for_chain_use(k_plg, mode=geom.plg_mode, kappa_f=geom.kappa_f).compliance


@dataclass(frozen=True)
class StiffnessReport:
    """Stiffness of the manipulator at one point.

    ``k_tran``/``k_rot`` are the mean principal compliances (trace / 3) of the
    translational and rotational blocks of ``K_m^-1``; ``k_tran_max`` and
    ``k_rot_max`` are the largest eigenvalues of the same blocks. All four
    are ``None`` when ``K_m`` is singular (``available`` is False).
    """

    point: np.ndarray
    variant: str
    K_m: np.ndarray
    K_chains: dict[str, np.ndarray]
    chain_ranks: dict[str, int]
    rank_Km: int
    compliance: np.ndarray | None
    k_tran: float | None
    k_rot: float | None
    k_tran_max: float | None
    k_rot_max: float | None
    near_singular_chains: tuple[str, ...] = ()

    @property
    def K_tran(self) -> np.ndarray:
        return self.K_m[:3, :3]

    @property
    def available(self) -> bool:
        return self.compliance is not None

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "point": arr(self.point),
            "variant": self.variant,
            "available": self.available,
            "k_tran": self.k_tran,
            "k_rot": self.k_rot,
            "k_tran_max": self.k_tran_max,
            "k_rot_max": self.k_rot_max,
            "rank_Km": self.rank_Km,
            "chain_ranks": dict(self.chain_ranks),
            "near_singular_chains": list(self.near_singular_chains),
            "K_m": arr(self.K_m),
            "K_tran": arr(self.K_tran),
            "compliance": arr(self.compliance),
            "K_chains": {k: arr(v) for k, v in self.K_chains.items()},
        }


def chain_stiffness(geom: OrthoglideGeometry, chain_id: str, pose: ChainPose, springs: SpringSet, sigma_tol=SIGMA_TOL):
    spec = build_chain(geom, chain_id)
    jac = jacobians(spec, pose.config)
    leg = leg_compliance(geom, springs, pose.config.q[1])
    s = cartesian_spring_compliance(jac, springs.blocks(leg))
    return chain_stiffness_svd(s, jac.J_q, sigma_tol)


def evaluate_stiffness(geom: OrthoglideGeometry, p, springs: SpringSet, sigma_tol: float = SIGMA_TOL) -> StiffnessReport:
    """Manipulator stiffness at ``p`` and its compliance summaries."""
    poses = inverse_kinematics(geom, p)
    chains = {cid: chain_stiffness(geom, cid, poses[cid], springs, sigma_tol) for cid in CHAIN_IDS}
    km = aggregate_manipulator(chains.values()).K_m
    rank = matrix_rank(km, sigma_tol)
    comp = k_tran = k_rot = kt_max = kr_max = None
    if rank == 6:
        try:
            comp = invert_spd(km)
        except NumericalError:
            comp = None
    if comp is not None:
        ct, cr = comp[:3, :3], comp[3:, 3:]
        k_tran, k_rot = float(np.trace(ct) / 3), float(np.trace(cr) / 3)
        kt_max, kr_max = float(np.linalg.eigvalsh(ct)[-1]), float(np.linalg.eigvalsh(cr)[-1])
    return StiffnessReport(
        point=np.asarray(p, dtype=float).reshape(3),
        variant=geom.variant,
        K_m=km,
        K_chains={cid: c.K for cid, c in chains.items()},
        chain_ranks={cid: c.rank for cid, c in chains.items()},
        rank_Km=rank,
        compliance=comp,
        k_tran=k_tran,
        k_rot=k_rot,
        k_tran_max=kt_max,
        k_rot_max=kr_max,
        near_singular_chains=tuple(cid for cid in CHAIN_IDS if poses[cid].near_singular),
    )


def singular_configs(geom: OrthoglideGeometry) -> list[tuple[str, np.ndarray]]:
    """The two diagonal singular points: legs coplanar ("flat") and legs parallel ("bar")."""
    a_flat = -geom.L / np.sqrt(6.0)
    a_bar = geom.L / np.sqrt(3.0)
    return [("flat", np.full(3, a_flat)), ("bar", np.full(3, a_bar))]


# --- workspace maps ---------------------------------------------------------


def parse_grid(text: str) -> list[np.ndarray]:
    """Parse ``xmin:xmax:n,ymin:ymax:n,zmin:zmax:n`` into three coordinate arrays."""
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError(f"grid needs three axis specs separated by commas, got {text!r}")
    axes = []
    for part in parts:
        fields = part.split(":")
        if len(fields) != 3:
            raise InputError(f"axis spec must be min:max:n, got {part!r}")
        try:
            lo, hi, n = float(fields[0]), float(fields[1]), int(fields[2])
        except ValueError:
            raise InputError(f"axis spec must be min:max:n, got {part!r}") from None
        if n < 1 or not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
            raise InputError(f"axis spec needs n >= 1 and min <= max, got {part!r}")
        if n == 1 and hi != lo:
            raise InputError(f"a single-point axis needs min == max, got {part!r}")
        axes.append(np.linspace(lo, hi, n))
    return axes


def grid_points(axes: Sequence[np.ndarray]) -> np.ndarray:
    """All grid points, x varying slowest."""
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


@dataclass(frozen=True)
class MapRow:
    index: int
    point: np.ndarray
    status: str
    report: StiffnessReport | None
    message: str = ""


def _map_one(args):
    i, p, geom, springs = args
    try:
        rep = evaluate_stiffness(geom, p, springs)
    except WorkspaceError as exc:
        return MapRow(i, p, "unreachable", None, str(exc))
    except NumericalError as exc:
        return MapRow(i, p, "numerical_error", None, str(exc))
    return MapRow(i, p, "ok" if rep.available else "singular", rep)


def workspace_map(geom: OrthoglideGeometry, points, springs: SpringSet, workers: int | None = None) -> list[MapRow]:
    """Evaluate every point; unreachable points are flagged, never fatal.

    Rows come back sorted by point index regardless of ``workers``.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if points.shape[0] == 0:
        raise InputError("grid is empty")
    workers = workers or os.cpu_count() or 1
    jobs = [(i, p, geom, springs) for i, p in enumerate(points)]
    if workers == 1:
        rows = [_map_one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_map_one, jobs))
    return sorted(rows, key=lambda r: r.index)


# --- calibration against the published summaries ---------------------------


@dataclass(frozen=True)
class CalibrationResult:
    L: float
    r: float
    d: float
    relative_errors: dict[str, dict[str, tuple[float, float]]] = field(default_factory=dict)

    @property
    def max_relative_error(self) -> float:
        return max(abs(e) for rows in self.relative_errors.values() for pair in rows.values() for e in pair)


def table_errors(geom: OrthoglideGeometry, springs: SpringSet, reference=None, keys=("puu", "prpar")):
    """Relative errors ``model / reference - 1`` of (k_tran, k_rot) per variant and point."""
    reference = REFERENCE_COMPLIANCE if reference is None else reference
    out = {}
    for key in keys:
        variant = "prpar" if key.startswith("prpar") else "puu"
        g = geom.with_variant(variant, axis_flexibility=key.endswith("extended"))
        out[key] = {}
        for name, (kt_ref, kr_ref) in reference[key].items():
            rep = evaluate_stiffness(g, POINTS[name], springs)
            out[key][name] = (rep.k_tran / kt_ref - 1.0, rep.k_rot / kr_ref - 1.0)
    return out


def calibrate_geometry(
    springs: SpringSet,
    x0=(310.0, 30.0, 80.0),
    points: Sequence[str] = ("Q0", "Q1", "Q2"),
    bounds=((200.0, 1.0, 20.0), (400.0, 150.0, 200.0)),
) -> CalibrationResult:
    """Least-squares fit of ``(L, r, d)`` to the published compliance summaries.

    Residuals are log-ratios of ``k_tran`` and ``k_rot`` for both variants at
    the listed points. The compliance at the origin does not depend on ``L``
    or ``r``, so at least one off-origin point is needed to identify them.
    """
    from scipy.optimize import least_squares

    ref = {k: {p: REFERENCE_COMPLIANCE[k][p] for p in points} for k in ("puu", "prpar")}

    def residuals(x):
        try:
            g = OrthoglideGeometry(L=x[0], r=x[1], d=x[2])
            errs = table_errors(g, springs, ref)
        except (WorkspaceError, InputError):
            return np.full(4 * len(points), 10.0)
        return np.log1p(np.array([e for rows in errs.values() for pair in rows.values() for e in pair]))

    sol = least_squares(residuals, np.asarray(x0, dtype=float), bounds=bounds, x_scale=[100.0, 10.0, 10.0])
    L, r, d = (float(v) for v in sol.x)
    errs = table_errors(OrthoglideGeometry(L=L, r=r, d=d), springs, ref)
    return CalibrationResult(L=L, r=r, d=d, relative_errors=errs)


# --- configuration files ----------------------------------------------------


def geometry_from_dict(data: Mapping, variant: str | None = None, **overrides) -> OrthoglideGeometry:
    flags = data.get("flags", {})
    try:
        kwargs = dict(
            L=float(data["L"]),
            r=float(data["r"]),
            d=float(data.get("d", 80.0)),
            variant=variant or data.get("variant", "prpar"),
            axis_flexibility=bool(flags.get("axis_flexibility", False)),
            kappa_f=float(data.get("kappa_f", DEFAULT_KAPPA_F)),
            plg_mode=data.get("plg_mode", "fictitious"),
        )
    except KeyError as exc:
        raise InputError(f"config is missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad value in config: {exc}") from None
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return OrthoglideGeometry(**kwargs)


def load_config(path=None) -> tuple[dict, SpringSet]:
    """Read a geometry + spring config; ``None`` loads the bundled prototype config."""
    if path is None:
        text = resources.files("kinetostiff").joinpath("data/orthoglide.json").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None
    return data, springs_from_dict(data)


def config_to_dict(geom: OrthoglideGeometry, springs: SpringSet) -> dict:
    out = {
        "schema": CONFIG_SCHEMA,
        "L": geom.L,
        "r": geom.r,
        "d": geom.d,
        "variant": geom.variant,
        "flags": {"axis_flexibility": geom.axis_flexibility},
        "kappa_f": geom.kappa_f,
    }
    out.update(springs_to_dict(springs))
    return out


def default_setup(variant: str = "prpar", **overrides) -> tuple[OrthoglideGeometry, SpringSet]:
    data, springs = load_config(None)
    return geometry_from_dict(data, variant=variant, **overrides), springs
