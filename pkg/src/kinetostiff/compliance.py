"""Link and spring compliance models.

Compliance matrices are 6x6, ordered (x, y, z translation; x, y, z rotation),
in mm/N, rad/(N mm) and the mixed mm/(N mm) off-diagonal blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import se3
from .errors import DataError, InputError, NumericalError

SYMMETRY_RTOL = 1e-6
PSD_RTOL = 1e-9
SPD_RTOL = 1e-14


@dataclass(frozen=True)
class BeamSection:
    """Straight prismatic beam, x axis along the beam.

    Attributes:
        L: length [mm]
        A: cross-section area [mm^2]
        Iy: second moment about y [mm^4]
        Iz: second moment about z [mm^4]
        J: polar moment [mm^4]
        E: Young modulus [N/mm^2]
        G: shear modulus [N/mm^2]
    """

    L: float
    A: float
    Iy: float
    Iz: float
    J: float
    E: float
    G: float

    def __post_init__(self):
        for name in ("L", "A", "Iy", "Iz", "J", "E", "G"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InputError(f"beam parameter {name} must be finite and positive, got {v}")

    @classmethod
    def rectangular(cls, L, b, h, E, G) -> "BeamSection":
        """Solid b x h rectangle; ``h`` is the dimension along z, so ``Iy = b h^3 / 12``."""
        iy = b * h**3 / 12.0
        iz = h * b**3 / 12.0
        return cls(L=L, A=b * h, Iy=iy, Iz=iz, J=iy + iz, E=E, G=G)

    def with_length(self, L) -> "BeamSection":
        return BeamSection(L, self.A, self.Iy, self.Iz, self.J, self.E, self.G)


def beam_compliance(section: BeamSection) -> np.ndarray:
    """Tip compliance of a cantilever beam, expressed in the tip frame."""
    L, A, Iy, Iz, J, E, G = (
        section.L, section.A, section.Iy, section.Iz, section.J, section.E, section.G
    )
    k = np.zeros((6, 6))
    k[0, 0] = L / (E * A)
    k[1, 1] = L**3 / (3 * E * Iz)
    k[2, 2] = L**3 / (3 * E * Iy)
    k[3, 3] = L / (G * J)
    k[4, 4] = L / (E * Iy)
    k[5, 5] = L / (E * Iz)
    k[2, 4] = k[4, 2] = -(L**2) / (2 * E * Iy)
    k[1, 5] = k[5, 1] = L**2 / (2 * E * Iz)
    return k


def spring_jacobian(placement_chain: Iterable[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    """Jacobians of a passive-joint-free chain of 6-dof springs.

    ``placement_chain`` lists, for each spring, the transform from the previous
    spring (or the chain root) to this spring. Returns the end-frame transform
    and one 6x6 Jacobian block per spring, with twists in the end frame.
    """
    placements = [se3.check_transform(p) for p in placement_chain]
    prefix = [np.eye(4)]
    for p in placements:
        prefix.append(prefix[-1] @ p)
    end = prefix[-1]
    end_inv = se3.inverse(end)
    blocks = []
    for i in range(1, len(prefix)):
        # spring i sits right after placement i; the rest of the chain follows it
        left = prefix[i]
        right = se3.inverse(left) @ end
        cols = [
            se3.chain_partial(left, se3.elem_generator(ax, kind), right)
            for ax, kind in se3.SPRING_COORDS
        ]
        world = np.column_stack(cols)
        blocks.append(se3.block_rotation(end_inv[:3, :3]) @ world)
    return end, blocks


def serial_aggregate(segments) -> np.ndarray:
    """Compliance of a serial chain of compliant segments, seen at its end frame.

    Args:
        segments: sequence of ``(placement, compliance)`` pairs. ``placement``
            is the transform from the previous segment's spring frame (or the
            root) to this segment's spring frame.

    Returns:
        ``J_b @ blockdiag(k_i) @ J_b.T`` in end-frame axes.
    """
    segments = list(segments)
    if not segments:
        raise InputError("serial_aggregate needs at least one segment")
    _, blocks = spring_jacobian(p for p, _ in segments)
    out = np.zeros((6, 6))
    for jb, (_, k) in zip(blocks, segments):
        k = np.asarray(k, dtype=float)
        out += jb @ k @ jb.T
    return 0.5 * (out + out.T)


def beam_chain(section: BeamSection, n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a straight beam into ``n`` equal segments for :func:`serial_aggregate`."""
    if n < 1:
        raise InputError("segment count must be positive")
    piece = section.with_length(section.L / n)
    k = beam_compliance(piece)
    return [(se3.Tx(piece.L), k) for _ in range(n)]


def validate_compliance(k, sym_rtol: float = SYMMETRY_RTOL, psd_rtol: float = PSD_RTOL) -> np.ndarray:
    """Check a user-supplied 6x6 compliance matrix and return its symmetric part.

    Raises:
        InputError: wrong shape or non-finite entries.
        DataError: relative asymmetry above ``sym_rtol`` or an eigenvalue below
            ``-psd_rtol * ||k||``.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (6, 6) or not np.all(np.isfinite(k)):
        raise InputError(f"compliance must be a finite 6x6 matrix, got shape {k.shape}")
    norm = np.linalg.norm(k)
    if norm == 0:
        return k.copy()
    asym = np.linalg.norm(k - k.T) / norm
    if asym > sym_rtol:
        raise DataError(f"compliance matrix is not symmetric (relative asymmetry {asym:.3g})")
    ks = 0.5 * (k + k.T)
    lam = np.linalg.eigvalsh(ks)
    if lam[0] < -psd_rtol * norm:
        raise DataError(f"compliance matrix is not positive semi-definite (eigenvalue {lam[0]:.3g})")
    return ks


def invert_spd(m, rtol: float = SPD_RTOL) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix.

    Raises:
        NumericalError: smallest eigenvalue not above ``rtol * ||m||``; the
            exception carries the eigenvalue and its eigenvector.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    ms = 0.5 * (m + m.T)
    lam, vec = np.linalg.eigh(ms)
    if lam[0] <= rtol * np.linalg.norm(ms):
        raise NumericalError(
            f"matrix is singular or indefinite (smallest eigenvalue {lam[0]:.3g})",
            value=float(lam[0]),
            direction=vec[:, 0],
        )
    inv = (vec / lam) @ vec.T
    return 0.5 * (inv + inv.T)


@dataclass(frozen=True)
class SpringSet:
    """Compliances of the springs of one manipulator chain.

    ``k_ctr`` is the scalar control-loop compliance of the actuated joint; the
    matrices are 6x6 compliances. ``k_bar`` and ``k_axis`` are the raw link
    data; which of them enters the leg spring depends on the architecture.
    """

    k_ctr: float
    k_act: np.ndarray
    k_foot: np.ndarray
    k_bar: np.ndarray
    k_axis: np.ndarray | None = None
    extra: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.k_ctr) and self.k_ctr > 0):
            raise InputError(f"k_ctr must be positive, got {self.k_ctr}")
        object.__setattr__(self, "k_act", validate_compliance(self.k_act))
        object.__setattr__(self, "k_foot", validate_compliance(self.k_foot))
        object.__setattr__(self, "k_bar", validate_compliance(self.k_bar))
        if self.k_axis is not None:
            object.__setattr__(self, "k_axis", validate_compliance(self.k_axis))

    def blocks(self, leg) -> dict[str, np.ndarray]:
        """Compliance per spring block name for a chain whose leg spring is ``leg``."""
        out = {
            "ctr": np.array([[self.k_ctr]]),
            "act": self.k_act,
            "foot": self.k_foot,
            "leg": np.asarray(leg, dtype=float),
        }
        out.update({k: np.asarray(v, dtype=float) for k, v in self.extra.items()})
        return out


CONFIG_KEYS = {"foot": "k_foot", "bar": "k_bar", "axis": "k_axis", "act": "k_act"}


def springs_from_dict(data: Mapping) -> SpringSet:
    try:
        kwargs = {attr: np.array(data[key], dtype=float) for key, attr in CONFIG_KEYS.items() if key in data}
        return SpringSet(k_ctr=float(data["k_ctr"]), **kwargs)
    except KeyError as exc:
        raise InputError(f"compliance config is missing key {exc.args[0]!r}") from None


def springs_to_dict(springs: SpringSet) -> dict:
    out = {"k_ctr": springs.k_ctr}
    for key, attr in CONFIG_KEYS.items():
        v = getattr(springs, attr)
        if v is not None:
            out[key] = np.asarray(v).tolist()
    return out


def load_springs(path) -> SpringSet:
    """Load a compliance config file (JSON, 6x6 row-major arrays under named keys)."""
    with open(Path(path)) as fh:
        return springs_from_dict(json.load(fh))
