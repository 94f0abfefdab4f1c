"""Declarative serial chains with virtual springs and passive joints.

A chain is an ordered tuple of elements:

* :class:`Rigid` -- a constant transform,
* :class:`Actuated` -- an actuated joint ``V(q0 + theta0)`` whose virtual
  spring coordinate ``theta0`` is the first coordinate of its spring block,
* :class:`Spring` -- a multi-dof virtual spring ``Tx Ty Tz Rx Ry Rz``, optionally
  restricted to a subset of those six coordinates,
* :class:`Passive` -- one passive rotation (or translation),
* :class:`PassivePair` -- two successive passive rotations (a U-joint).

Spring coordinates are gathered into ``theta`` and passive coordinates into
``q``, both in declaration order. Jacobians are evaluated at the rigid posture
(``theta = 0``) about the nominal passive coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from . import se3
from .errors import InputError


@dataclass(frozen=True)
class Rigid:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", se3.check_transform(self.matrix))


@dataclass(frozen=True)
class Actuated:
    axis: str
    kind: str = "translation"
    spring: str = "ctr"

    def __post_init__(self):
        object.__setattr__(self, "kind", se3.normalize_kind(self.kind))


@dataclass(frozen=True)
class Spring:
    name: str
    dofs: tuple[int, ...] = (0, 1, 2, 3, 4, 5)

    def __post_init__(self):
        dofs = tuple(int(i) for i in self.dofs)
        if not dofs or len(set(dofs)) != len(dofs) or any(i < 0 or i > 5 for i in dofs):
            raise InputError(f"spring dofs must be distinct indices in 0..5, got {self.dofs}")
        object.__setattr__(self, "dofs", tuple(sorted(dofs)))

    @property
    def coords(self):
        return [se3.SPRING_COORDS[i] for i in self.dofs]


@dataclass(frozen=True)
class Passive:
    axis: str
    kind: str = "rotation"

    def __post_init__(self):
        object.__setattr__(self, "kind", se3.normalize_kind(self.kind))


@dataclass(frozen=True)
class PassivePair:
    first: str
    second: str


Element = Union[Rigid, Actuated, Spring, Passive, PassivePair]


@dataclass(frozen=True)
class ChainSpec:
    """Immutable chain description.

    Attributes:
        elements: ordered chain elements.
        passive_basis: ``(m_raw, m)`` matrix mapping independent passive
            variations to raw passive variations. ``None`` means identity.
        passive_relations: the homogeneous relations ``A @ q = 0`` the basis
            was built from (kept for config checks).
        names: labels of the independent passive coordinates.
    """

    elements: tuple
    passive_basis: np.ndarray | None = None
    passive_relations: np.ndarray | None = None
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        elements = tuple(self.elements)
        for e in elements:
            if not isinstance(e, (Rigid, Actuated, Spring, Passive, PassivePair)):
                raise InputError(f"unknown chain element {e!r}")
        if not any(isinstance(e, Spring) and len(e.dofs) == 6 for e in elements):
            raise InputError("a chain needs at least one full 6-dof spring")
        object.__setattr__(self, "elements", elements)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"q{i + 1}" for i in range(self.n_passive)))

    @property
    def n_theta(self) -> int:
        n = 0
        for e in self.elements:
            if isinstance(e, Actuated):
                n += 1
            elif isinstance(e, Spring):
                n += len(e.dofs)
        return n

    @property
    def n_passive_raw(self) -> int:
        n = 0
        for e in self.elements:
            if isinstance(e, Passive):
                n += 1
            elif isinstance(e, PassivePair):
                n += 2
        return n

    @property
    def n_passive(self) -> int:
        if self.passive_basis is None:
            return self.n_passive_raw
        return self.passive_basis.shape[1]

    @property
    def has_actuator(self) -> bool:
        return any(isinstance(e, Actuated) for e in self.elements)

    def spring_blocks(self) -> list[tuple[str, slice]]:
        """``(name, slice into theta)`` for every spring block, in chain order."""
        out, i = [], 0
        for e in self.elements:
            if isinstance(e, Actuated):
                out.append((e.spring, slice(i, i + 1)))
                i += 1
            elif isinstance(e, Spring):
                out.append((e.name, slice(i, i + len(e.dofs))))
                i += len(e.dofs)
        return out


@dataclass(frozen=True)
class ChainConfig:
    """Coordinates of a chain: actuated ``q0``, raw passive ``q`` and springs ``theta``."""

    q0: float = 0.0
    q: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "q0", float(self.q0))
        object.__setattr__(self, "q", np.array(self.q, dtype=float).reshape(-1))
        if self.theta is not None:
            object.__setattr__(self, "theta", np.array(self.theta, dtype=float).reshape(-1))

    def with_theta(self, theta) -> "ChainConfig":
        return replace(self, theta=np.asarray(theta, dtype=float))

    def with_q(self, q) -> "ChainConfig":
        return replace(self, q=np.asarray(q, dtype=float))


@dataclass(frozen=True)
class JacobianPair:
    """Spring Jacobian ``J_theta`` (6 x n_theta) and passive Jacobian ``J_q`` (6 x m)."""

    J_theta: np.ndarray
    J_q: np.ndarray
    blocks: tuple[tuple[str, slice], ...] = ()

    def block(self, name: str) -> np.ndarray:
        for n, s in self.blocks:
            if n == name:
                return self.J_theta[:, s]
        raise KeyError(name)


def _check_config(spec: ChainSpec, cfg: ChainConfig) -> np.ndarray:
    if cfg.q.shape != (spec.n_passive_raw,):
        raise InputError(f"chain has {spec.n_passive_raw} passive coordinates, config has {cfg.q.size}")
    theta = np.zeros(spec.n_theta) if cfg.theta is None else cfg.theta
    if theta.shape != (spec.n_theta,):
        raise InputError(f"chain has {spec.n_theta} spring coordinates, config has {theta.size}")
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(cfg.q)) and np.isfinite(cfg.q0)):
        raise InputError("chain coordinates must be finite")
    return theta


def _factors(spec: ChainSpec, cfg: ChainConfig, theta: np.ndarray) -> list[np.ndarray]:
    """Flatten a chain into elementary 4x4 factors at the given coordinates."""
    out = []
    it, iq = 0, 0
    for e in spec.elements:
        if isinstance(e, Rigid):
            out.append(e.matrix)
        elif isinstance(e, Actuated):
            out.append(se3.elem_transform(e.axis, e.kind, cfg.q0 + theta[it]))
            it += 1
        elif isinstance(e, Spring):
            for ax, kind in e.coords:
                out.append(se3.elem_transform(ax, kind, theta[it]))
                it += 1
        elif isinstance(e, Passive):
            out.append(se3.elem_transform(e.axis, e.kind, cfg.q[iq]))
            iq += 1
        else:
            out.append(se3.elem_transform(e.first, "rotation", cfg.q[iq]))
            out.append(se3.elem_transform(e.second, "rotation", cfg.q[iq + 1]))
            iq += 2
    return out


def forward_kinematics(spec: ChainSpec, cfg: ChainConfig) -> np.ndarray:
    """End-frame pose: the product of all element transforms in declared order."""
    theta = _check_config(spec, cfg)
    return se3.compose(*_factors(spec, cfg, theta))


def jacobians(spec: ChainSpec, cfg: ChainConfig) -> JacobianPair:
    """Spring and passive Jacobians at the rigid posture.

    Every joint factor is split as ``V(nominal) @ V(delta)`` and its column is
    obtained from :func:`se3.chain_partial` with the constant products on
    either side. Raises :class:`InputError` for a config with non-zero
    ``theta`` or one that violates the passive relations.
    """
    theta = _check_config(spec, cfg)
    if np.any(theta != 0.0):
        raise InputError("jacobians are defined at the rigid posture; theta must be zero")
    if spec.passive_relations is not None and spec.passive_relations.size:
        resid = spec.passive_relations @ cfg.q
        if np.abs(resid).max() > 1e-9:
            raise InputError(f"passive coordinates violate the chain relations (residual {resid})")

    factors = _factors(spec, cfg, theta)
    n = len(factors)
    prefix = [np.eye(4)]
    for f in factors:
        prefix.append(prefix[-1] @ f)
    suffix = [np.eye(4)] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = factors[i] @ suffix[i + 1]

    def column(i_factor, axis, kind):
        # variation enters right after factor i_factor (V(nom) @ V(delta))
        return se3.chain_partial(prefix[i_factor + 1], se3.elem_generator(axis, kind), suffix[i_factor + 1])

    j_theta, j_q = [], []
    k = 0
    for e in spec.elements:
        if isinstance(e, Rigid):
            k += 1
        elif isinstance(e, Actuated):
            j_theta.append(column(k, e.axis, e.kind))
            k += 1
        elif isinstance(e, Spring):
            for ax, kind in e.coords:
                j_theta.append(column(k, ax, kind))
                k += 1
        elif isinstance(e, Passive):
            j_q.append(column(k, e.axis, e.kind))
            k += 1
        else:
            j_q.append(column(k, e.first, "rotation"))
            j_q.append(column(k + 1, e.second, "rotation"))
            k += 2

    J_theta = np.column_stack(j_theta) if j_theta else np.zeros((6, 0))
    J_q_raw = np.column_stack(j_q) if j_q else np.zeros((6, 0))
    J_q = J_q_raw if spec.passive_basis is None else J_q_raw @ spec.passive_basis
    return JacobianPair(J_theta=J_theta, J_q=J_q, blocks=tuple(spec.spring_blocks()))


def constrain_passive(spec: ChainSpec, constraints: Sequence[Sequence[float]]) -> ChainSpec:
    """Tie passive coordinates together with homogeneous linear relations.

    Each relation is a coefficient vector ``c`` over the raw passive
    coordinates meaning ``c @ q = 0``. For each relation the last coordinate
    with a non-zero coefficient becomes dependent, so ``q2 + q3 = 0`` keeps
    ``q2`` and the new column for it is ``dT/dq2 - dT/dq3``.
    """
    constraints = [np.asarray(c, dtype=float).reshape(-1) for c in constraints]
    if not constraints:
        return spec
    m = spec.n_passive_raw
    if spec.passive_basis is not None:
        raise InputError("chain already carries passive relations; pass them all at once")
    a = np.vstack(constraints)
    if a.shape[1] != m:
        raise InputError(f"relations must have {m} coefficients (one per passive coordinate)")
    if not np.all(np.isfinite(a)) or np.any(np.all(a == 0, axis=1)):
        raise InputError("relations must be finite and non-trivial")
    if np.linalg.matrix_rank(a) < a.shape[0]:
        raise InputError("passive relations are redundant or inconsistent")

    # reduced row echelon form with pivots chosen from the right
    rr = a[:, ::-1].copy()
    pivots = []
    row = 0
    for col in range(m):
        if row == rr.shape[0]:
            break
        p = row + int(np.argmax(np.abs(rr[row:, col])))
        if abs(rr[p, col]) < 1e-12:
            continue
        rr[[row, p]] = rr[[p, row]]
        rr[row] /= rr[row, col]
        for r2 in range(rr.shape[0]):
            if r2 != row:
                rr[r2] -= rr[r2, col] * rr[row]
        pivots.append(m - 1 - col)
        row += 1
    rr = rr[:, ::-1]
    free = [i for i in range(m) if i not in pivots]
    basis = np.zeros((m, len(free)))
    for j, f in enumerate(free):
        basis[f, j] = 1.0
        for r_i, p in enumerate(pivots):
            basis[p, j] = -rr[r_i, f]
    names = tuple(spec.names[i] for i in free)
    return replace(spec, passive_basis=basis, passive_relations=a, names=names)


def numeric_jacobians(spec: ChainSpec, cfg: ChainConfig, h: float = 1e-6) -> JacobianPair:
    """Central finite differences of :func:`forward_kinematics` (test oracle).

    Twists are taken at the end point in world axes, matching :func:`jacobians`.
    """
    theta0 = np.zeros(spec.n_theta) if cfg.theta is None else cfg.theta

    def diff(make):
        tp = forward_kinematics(spec, make(h))
        tm = forward_kinematics(spec, make(-h))
        return se3.pose_difference(tp, tm) / (2 * h)

    jt = []
    for j in range(spec.n_theta):
        e = np.zeros(spec.n_theta)
        e[j] = 1.0
        jt.append(diff(lambda s, e=e: cfg.with_theta(theta0 + s * e)))
    basis = np.eye(spec.n_passive_raw) if spec.passive_basis is None else spec.passive_basis
    jq = [diff(lambda s, b=b: cfg.with_q(cfg.q + s * b)) for b in basis.T]
    return JacobianPair(
        J_theta=np.column_stack(jt) if jt else np.zeros((6, 0)),
        J_q=np.column_stack(jq) if jq else np.zeros((6, 0)),
        blocks=tuple(spec.spring_blocks()),
    )
