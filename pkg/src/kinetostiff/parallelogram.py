"""Stiffness of a planar parallelogram leg made of two flexible bars.

The parallelogram is split into an upper and a lower serial chain::

    up: Tz(-d/2) Ry(q + dq1) Tx(L) Vs(theta) Ry(-q + dq2) Tz(+d/2)
    dn: Tz(+d/2) Ry(q + dq1) Tx(L) Vs(theta) Ry(-q + dq2) Tz(-d/2)

whose stiffnesses add up. The closed-form result is expressed in the *bar
frame*: the end point (midpoint of the distal axis) with axes rotated by
``Ry(q)``, so that x runs along the bars and z is the swing direction that
the passive joints leave free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import se3
from .chain import ChainConfig, ChainSpec, Passive, Rigid, Spring, jacobians
from .compliance import invert_spd, validate_compliance
from .errors import InputError, StructuralError
from .kinetostatics import aggregate_manipulator, cartesian_spring_compliance, chain_stiffness_svd

DEFAULT_KAPPA_F = 1e3
REDUCED_DOFS = (0, 1, 3, 4, 5)


@dataclass(frozen=True)
class ParallelogramSpec:
    """Bar length ``L`` and bar separation ``d`` in mm, single-bar compliance ``k_bar``.

    ``k_axis`` (optional) is the compliance of each half of the two short
    axes, local x along the axis; it is only used by the extended model.
    """

    L: float
    d: float
    k_bar: np.ndarray
    k_axis: np.ndarray | None = None

    def __post_init__(self):
        if not (self.L > 0 and self.d > 0):
            raise InputError(f"parallelogram needs L > 0 and d > 0, got L={self.L}, d={self.d}")
        object.__setattr__(self, "k_bar", validate_compliance(self.k_bar))
        if self.k_axis is not None:
            object.__setattr__(self, "k_axis", validate_compliance(self.k_axis))


def _check_angle(q):
    q = float(q)
    if not abs(q) < np.pi / 2:
        raise InputError(f"parallelogram angle must satisfy |q| < pi/2, got {q}")
    return q


@dataclass(frozen=True)
class ParallelogramStiffness:
    """6x6 parallelogram stiffness in the bar frame at angle ``q``."""

    K: np.ndarray
    q: float

    def end_frame(self) -> np.ndarray:
        """Same stiffness with world-aligned axes (the frame that ends both bar chains)."""
        b = se3.block_rotation(se3.rotation("y", self.q))
        return b @ self.K @ b.T


class ParallelogramJacobians(NamedTuple):
    J_q_up: np.ndarray
    J_theta_up: np.ndarray
    J_q_dn: np.ndarray
    J_theta_dn: np.ndarray


def _bar_jacobians(q, L, d):
    s, c = np.sin(q), np.cos(q)
    h = d / 2
    j_q = np.array([
        [-L * s + h, h],
        [0.0, 0.0],
        [-L * c, 0.0],
        [0.0, 0.0],
        [1.0, 1.0],
        [0.0, 0.0],
    ])
    j_t = np.array([
        [c, 0, s, 0, h, 0],
        [0, 1, 0, -h * c, 0, -h * s],
        [-s, 0, c, 0, 0, 0],
        [0, 0, 0, c, 0, s],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, -s, 0, c],
    ], dtype=float)
    return j_q, j_t


def parallelogram_jacobians(q, L, d) -> ParallelogramJacobians:
    """Closed-form passive and spring Jacobians of both bar chains (world-aligned end frame)."""
    q = _check_angle(q)
    up = _bar_jacobians(q, L, d)
    dn = _bar_jacobians(q, L, -d)
    return ParallelogramJacobians(up[0], up[1], dn[0], dn[1])


def bar_chain(spec: ParallelogramSpec, q, side: str, extended: bool = False) -> tuple[ChainSpec, ChainConfig]:
    """Serial chain for one bar of the parallelogram (``side`` is ``"up"`` or ``"dn"``).

    With ``extended`` the two axis halves crossed by this bar carry 6-dof
    springs ``axis_base`` and ``axis_tip``; each spring sits at the far end
    of its half-axis with local x along the direction of travel.
    """
    q = _check_angle(q)
    if side not in ("up", "dn"):
        raise InputError("side must be 'up' or 'dn'")
    sign = 1.0 if side == "up" else -1.0
    h = spec.d / 2
    elements = [Rigid(se3.Tz(-sign * h))]
    if extended:
        # local x along -sign*z
        elements += [Rigid(se3.Ry(sign * np.pi / 2)), Spring("axis_base"), Rigid(se3.Ry(-sign * np.pi / 2))]
    elements += [Passive("y"), Rigid(se3.Tx(spec.L)), Spring("bar"), Passive("y"), Rigid(se3.Tz(sign * h))]
    if extended:
        elements += [Rigid(se3.Ry(-sign * np.pi / 2)), Spring("axis_tip"), Rigid(se3.Ry(sign * np.pi / 2))]
    chain = ChainSpec(tuple(elements), names=("dq1", "dq2"))
    return chain, ChainConfig(q0=0.0, q=[q, -q])


def parallelogram_stiffness_numeric(q, spec: ParallelogramSpec, extended: bool = False) -> ParallelogramStiffness:
    """Parallelogram stiffness assembled from its two bar chains (bar frame)."""
    q = _check_angle(q)
    if extended and spec.k_axis is None:
        raise InputError("extended parallelogram model needs k_axis")
    springs = {"bar": spec.k_bar, "axis_base": spec.k_axis, "axis_tip": spec.k_axis}
    chains = []
    for side in ("up", "dn"):
        ch, cfg = bar_chain(spec, q, side, extended)
        jac = jacobians(ch, cfg)
        s = cartesian_spring_compliance(jac, springs)
        chains.append(chain_stiffness_svd(s, jac.J_q))
    k_end = aggregate_manipulator(chains).K_m
    b = se3.block_rotation(se3.rotation("y", q))
    k_bar_frame = b.T @ k_end @ b
    return ParallelogramStiffness(K=0.5 * (k_bar_frame + k_bar_frame.T), q=q)


def parallelogram_stiffness_analytic(q, spec: ParallelogramSpec) -> ParallelogramStiffness:
    """Closed-form parallelogram stiffness (bar frame).

    Only the bar stiffness entries K11, K22, K26, K44, K66 enter; the
    bending stiffness in the parallelogram plane is taken up by the joints.
    Exact for bars whose stiffness has the usual beam pattern (no coupling
    between the {x}, {y, rz}, {z, ry} and {rx} groups).
    """
    q = _check_angle(q)
    kb = invert_spd(spec.k_bar)
    d = spec.d
    s, c = np.sin(q), np.cos(q)
    k = np.zeros((6, 6))
    k[0, 0] = kb[0, 0]
    k[1, 1] = kb[1, 1]
    k[1, 5] = k[5, 1] = kb[1, 5]
    k[3, 3] = kb[3, 3] + d**2 * c**2 * kb[1, 1] / 4
    k[4, 4] = d**2 * c**2 * kb[0, 0] / 4
    k[3, 5] = k[5, 3] = d**2 * np.sin(2 * q) * kb[1, 1] / 8
    k[5, 5] = kb[5, 5] + d**2 * s**2 * kb[1, 1] / 4
    return ParallelogramStiffness(K=2.0 * k, q=q)


@dataclass(frozen=True)
class SpringModel:
    """A virtual spring usable in a chain: compliance over the listed coordinates."""

    compliance: np.ndarray
    dofs: tuple[int, ...]


def regularize_for_chain_use(K, mode: str = "fictitious", kappa_f: float = DEFAULT_KAPPA_F) -> SpringModel:
    """Turn the rank-5 parallelogram stiffness into an invertible spring.

    ``"fictitious"`` adds ``kappa_f`` [N/mm] on the free swing translation;
    ``"reduce_5dof"`` drops that coordinate and keeps a 5-dof spring. Either
    way the passive parallelogram joint absorbs the swing direction, so the
    chain stiffness does not depend on the choice.
    """
    if isinstance(K, ParallelogramStiffness):
        K = K.K
    K = np.asarray(K, dtype=float)
    scale = np.abs(K).max()
    if np.abs(K[2]).max() > 1e-9 * scale or np.abs(K[:, 2]).max() > 1e-9 * scale:
        raise StructuralError("parallelogram stiffness must have a zero swing row/column (index 2)")
    if mode == "fictitious":
        if not kappa_f > 0:
            raise InputError("fictitious stiffness must be positive")
        kk = K.copy()
        kk[2, :] = 0.0
        kk[:, 2] = 0.0
        kk[2, 2] = kappa_f
        return SpringModel(invert_spd(kk), tuple(range(6)))
    if mode == "reduce_5dof":
        idx = list(REDUCED_DOFS)
        return SpringModel(invert_spd(K[np.ix_(idx, idx)]), REDUCED_DOFS)
    raise InputError(f"unknown regularization mode {mode!r}")


def embed_5dof(K5) -> np.ndarray:
    """Re-insert the zero swing row/column into a 5x5 reduced stiffness."""
    out = np.zeros((6, 6))
    idx = list(REDUCED_DOFS)
    out[np.ix_(idx, idx)] = K5
    return out
