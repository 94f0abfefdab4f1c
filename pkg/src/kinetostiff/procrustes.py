"""Link compliance from nodal displacement fields of six load cases.

Each load case (unit-direction force or torque applied to a reference body)
comes with nodal positions ``p_k`` and displacements ``d_k``. A rigid motion
``g'_k = R g_k + t`` with ``g_k = p_k - p0`` is fitted by orthogonal
Procrustes (Kabsch), the small rotation is read off ``R`` and the scaled
translation/rotation becomes one column of the compliance matrix.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import se3
from .compliance import validate_compliance
from .errors import DataError, InputError, RegimeError

LOAD_ORDER = (
    ("force", "x"),
    ("force", "y"),
    ("force", "z"),
    ("torque", "x"),
    ("torque", "y"),
    ("torque", "z"),
)
DEGENERACY_TOL = 1e-10
ASYMMETRY_LIMIT = 0.1
SMALL_ROTATION_LIMIT = 1e-2


@dataclass(frozen=True)
class LoadCase:
    type: str
    axis: str
    magnitude: float

    def __post_init__(self):
        if self.type not in ("force", "torque"):
            raise InputError(f"load type must be 'force' or 'torque', got {self.type!r}")
        if self.axis not in se3.AXES:
            raise InputError(f"load axis must be x, y or z, got {self.axis!r}")
        if not (np.isfinite(self.magnitude) and self.magnitude != 0):
            raise InputError("load magnitude must be finite and non-zero")

    @property
    def index(self) -> int:
        return LOAD_ORDER.index((self.type, self.axis))


@dataclass(frozen=True)
class DisplacementDataset:
    """Nodal positions and displacements (both ``(m, 3)``, mm) for one load case."""

    p0: np.ndarray
    positions: np.ndarray
    displacements: np.ndarray
    load: LoadCase

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=float).reshape(3)
        pos = np.asarray(self.positions, dtype=float)
        disp = np.asarray(self.displacements, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape != disp.shape:
            raise InputError("positions and displacements must both be (m, 3) arrays")
        if pos.shape[0] < 3:
            raise DataError(f"need at least 3 nodes, got {pos.shape[0]}")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(disp))):
            raise InputError("node data must be finite")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "displacements", disp)


@dataclass(frozen=True)
class RigidFit:
    t: np.ndarray
    R: np.ndarray
    residual_rms: float


def fit_rigid_motion(ds: DisplacementDataset) -> RigidFit:
    """Least-squares rigid motion mapping ``g_k`` onto ``g_k + d_k``.

    Uses the centred cross-covariance and corrects reflections. Raises
    :class:`DataError` when the node cloud is (nearly) collinear.
    """
    g = ds.positions - ds.p0
    gp = g + ds.displacements
    gc, gpc = g.mean(axis=0), gp.mean(axis=0)
    h = (g - gc).T @ (gp - gpc)
    u, sigma, vt = np.linalg.svd(h)
    if sigma[0] == 0 or sigma[1] / sigma[0] < DEGENERACY_TOL:
        raise DataError("node cloud is degenerate (collinear or coincident nodes)")
    v = vt.T
    sign = np.sign(np.linalg.det(v @ u.T))
    r = v @ np.diag([1.0, 1.0, sign]) @ u.T
    t = gpc - r @ gc
    resid = gp - g @ r.T - t
    return RigidFit(t=t, R=r, residual_rms=float(np.sqrt(np.mean(np.sum(resid**2, axis=1)))))


def small_angle_extract(fit: RigidFit | np.ndarray) -> np.ndarray:
    """Rotation angles ``(phi_x, phi_y, phi_z)`` of a small rotation, ``R ~ I + [phi]x``.

    Antisymmetric part of ``R``, so an elementary rotation by ``+eps`` about an
    axis yields ``+eps`` on that axis.
    """
    r = fit.R if isinstance(fit, RigidFit) else np.asarray(fit, dtype=float)
    if np.linalg.norm(r - np.eye(3)) >= SMALL_ROTATION_LIMIT:
        raise RegimeError("rotation is too large for the small-angle extraction")
    return se3.vee(r)


def compliance_column(ds: DisplacementDataset) -> np.ndarray:
    fit = fit_rigid_motion(ds)
    return np.concatenate([fit.t, small_angle_extract(fit)]) / ds.load.magnitude


def build_compliance(datasets: Sequence[DisplacementDataset]) -> np.ndarray:
    """6x6 compliance from the six canonical load cases (Fx, Fy, Fz, Mx, My, Mz).

    Raises:
        InputError: a load case is missing or duplicated.
        DataError: the raw matrix is more than 10% asymmetric, or the
            symmetrized matrix is not positive semi-definite.
    """
    datasets = list(datasets)
    seen = {}
    for ds in datasets:
        idx = ds.load.index
        if idx in seen:
            raise InputError(f"duplicate load case {LOAD_ORDER[idx]}")
        seen[idx] = ds
    missing = [LOAD_ORDER[i] for i in range(6) if i not in seen]
    if missing:
        raise InputError(f"missing load cases {missing}")
    k_raw = np.column_stack([compliance_column(seen[i]) for i in range(6)])
    asym = np.linalg.norm(k_raw - k_raw.T) / np.linalg.norm(k_raw)
    if asym > ASYMMETRY_LIMIT:
        raise DataError(f"fitted compliance is {asym:.1%} asymmetric; check the load cases")
    k = 0.5 * (k_raw + k_raw.T)
    return validate_compliance(k, sym_rtol=np.inf)


def synthetic_dataset(k, load: LoadCase, positions, p0=(0.0, 0.0, 0.0)) -> DisplacementDataset:
    """Displacement field of a rigid body on a 6-dof spring of compliance ``k``.

    The twist ``k @ w`` of the spring centre is applied as an exact rigid
    motion (rotation vector plus translation) to every node.
    """
    from scipy.spatial.transform import Rotation

    w = np.zeros(6)
    w[load.index] = load.magnitude
    twist = np.asarray(k, dtype=float) @ w
    r = Rotation.from_rotvec(twist[3:]).as_matrix()
    p0 = np.asarray(p0, dtype=float)
    g = np.asarray(positions, dtype=float) - p0
    disp = g @ r.T + twist[:3] - g
    return DisplacementDataset(p0=p0, positions=np.asarray(positions, dtype=float), displacements=disp, load=load)


def synthetic_datasets(k, positions, magnitudes=(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), p0=(0.0, 0.0, 0.0)):
    return [
        synthetic_dataset(k, LoadCase(t, a, m), positions, p0)
        for (t, a), m in zip(LOAD_ORDER, magnitudes)
    ]


# --- file format: CSV node table plus a JSON sidecar ------------------------

CSV_COLUMNS = ("node_id", "px", "py", "pz", "dx", "dy", "dz")


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_dataset(ds: DisplacementDataset, csv_path) -> None:
    """Write ``<name>.csv`` (nodes) and ``<name>.json`` (load, p0)."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for i, (p, d) in enumerate(zip(ds.positions, ds.displacements)):
            w.writerow([i, *(f"{v:.16e}" for v in p), *(f"{v:.16e}" for v in d)])
    meta = {
        "load": {"type": ds.load.type, "axis": ds.load.axis, "magnitude": ds.load.magnitude},
        "p0": ds.p0.tolist(),
    }
    sidecar_path(csv_path).write_text(json.dumps(meta, indent=2))


def read_dataset(csv_path, load: LoadCase | None = None, p0=None) -> DisplacementDataset:
    """Read a node table; load and ``p0`` come from the sidecar unless given."""
    csv_path = Path(csv_path)
    meta = {}
    side = sidecar_path(csv_path)
    if side.exists():
        meta = json.loads(side.read_text())
    if load is None:
        if "load" not in meta:
            raise InputError(f"{csv_path}: no load declared (sidecar {side.name} missing)")
        ld = meta["load"]
        load = LoadCase(ld["type"], ld["axis"], float(ld["magnitude"]))
    if p0 is None:
        p0 = meta.get("p0", (0.0, 0.0, 0.0))
    rows = []
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{csv_path}: missing columns {sorted(missing)}")
        for row in reader:
            try:
                rows.append([float(row[c]) for c in CSV_COLUMNS[1:]])
            except ValueError:
                raise InputError(f"{csv_path}: non-numeric value in row {reader.line_num}") from None
    data = np.array(rows, dtype=float).reshape(-1, 6)
    return DisplacementDataset(p0=p0, positions=data[:, :3], displacements=data[:, 3:], load=load)
