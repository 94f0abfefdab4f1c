"""Homogeneous transforms, elementary motions and their derivative generators.

Conventions:
    - Transforms are plain ``(4, 4)`` float arrays; lengths in mm, angles in rad.
    - Rotations are right-handed and active: ``Rz(a)`` maps x to (cos a, sin a, 0).
    - A twist is the 6-vector ``(dpx, dpy, dpz, dphix, dphiy, dphiz)``: the
      end-point translation followed by the rotation, both in world axes.
    - The rotation part of a derivative is read from the conventional skew
      matrix ``[w]x = [[0, -wz, wy], [wz, 0, -wx], [-wy, wx, 0]]``.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, StructuralError

AXES = ("x", "y", "z")
KINDS = ("translation", "rotation")

_KIND_ALIASES = {
    "translation": "translation",
    "trans": "translation",
    "t": "translation",
    "rotation": "rotation",
    "rot": "rotation",
    "r": "rotation",
}

# Order of the six elementary coordinates of a full 6-dof spring.
SPRING_COORDS = (
    ("x", "translation"),
    ("y", "translation"),
    ("z", "translation"),
    ("x", "rotation"),
    ("y", "rotation"),
    ("z", "rotation"),
)

STRUCTURE_TOL = 1e-8


def _axis_index(axis: str) -> int:
    try:
        return AXES.index(axis)
    except ValueError:
        raise InputError(f"axis must be one of {AXES}, got {axis!r}") from None


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind]
    except (KeyError, TypeError):
        raise InputError(f"kind must be one of {KINDS}, got {kind!r}") from None


def rotation(axis: str, angle: float) -> np.ndarray:
    """3x3 rotation matrix about a coordinate axis."""
    i = _axis_index(axis)
    c, s = np.cos(angle), np.sin(angle)
    j, k = (i + 1) % 3, (i + 2) % 3
    r = np.eye(3)
    r[j, j] = c
    r[j, k] = -s
    r[k, j] = s
    r[k, k] = c
    return r


def elem_transform(axis: str, kind: str, value: float) -> np.ndarray:
    """Elementary translation along, or rotation about, a coordinate axis.

    Args:
        axis: ``"x"``, ``"y"`` or ``"z"``.
        kind: ``"translation"`` or ``"rotation"`` (short forms ``"t"``/``"r"`` accepted).
        value: displacement in mm or angle in rad.

    Returns:
        A ``(4, 4)`` homogeneous transform.
    """
    kind = normalize_kind(kind)
    value = float(value)
    if not np.isfinite(value):
        raise InputError(f"elementary transform value must be finite, got {value}")
    m = np.eye(4)
    if kind == "translation":
        m[_axis_index(axis), 3] = value
    else:
        m[:3, :3] = rotation(axis, value)
    return m


def Tx(v: float) -> np.ndarray:
    return elem_transform("x", "translation", v)


def Ty(v: float) -> np.ndarray:
    return elem_transform("y", "translation", v)


def Tz(v: float) -> np.ndarray:
    return elem_transform("z", "translation", v)


def Rx(v: float) -> np.ndarray:
    return elem_transform("x", "rotation", v)


def Ry(v: float) -> np.ndarray:
    return elem_transform("y", "rotation", v)


def Rz(v: float) -> np.ndarray:
    return elem_transform("z", "rotation", v)


def elem_generator(axis: str, kind: str) -> np.ndarray:
    """Derivative of ``elem_transform(axis, kind, v)`` with respect to ``v`` at ``v = 0``."""
    kind = normalize_kind(kind)
    i = _axis_index(axis)
    g = np.zeros((4, 4))
    if kind == "translation":
        g[i, 3] = 1.0
    else:
        g[:3, :3] = skew(np.eye(3)[i])
    return g


def skew(w) -> np.ndarray:
    """Conventional cross-product matrix of a 3-vector."""
    wx, wy, wz = np.asarray(w, dtype=float)
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew`, averaging the two copies of each entry."""
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def twist_from_derivative(t_prime, tol: float = STRUCTURE_TOL) -> np.ndarray:
    """Read a twist out of a derivative of a homogeneous transform.

    The derivative must already be expressed at an identity orientation, i.e.
    its rotation block is skew-symmetric.

    Raises:
        StructuralError: non-zero bottom row or non-skew rotation block.
    """
    t_prime = np.asarray(t_prime, dtype=float)
    if t_prime.shape != (4, 4):
        raise InputError(f"expected a 4x4 matrix, got shape {t_prime.shape}")
    scale = max(1.0, float(np.abs(t_prime).max()))
    if np.abs(t_prime[3]).max() > tol * scale:
        raise StructuralError("derivative of a homogeneous transform must have a zero bottom row")
    w = t_prime[:3, :3]
    if np.abs(w + w.T).max() > tol * scale:
        raise StructuralError("rotation block of the derivative is not skew-symmetric")
    return np.concatenate([t_prime[:3, 3], vee(w)])


def chain_partial(left, generator, right) -> np.ndarray:
    """Jacobian column of a coordinate sitting between two constant factors.

    The chain is ``T = left @ V(v) @ right`` with ``V(0) = I`` and ``V'(0) = generator``.
    The column is the twist of the end frame of ``T`` in world axes.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    t_prime = left @ generator @ right
    r_end = left[:3, :3] @ right[:3, :3]
    # bring the rotation block back to an identity orientation: dR @ R^T
    t_prime[:3, :3] = t_prime[:3, :3] @ r_end.T
    return twist_from_derivative(t_prime)


def is_transform(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4) or not np.all(np.isfinite(m)):
        return False
    if not np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0]):
        return False
    r = m[:3, :3]
    return bool(np.linalg.norm(r.T @ r - np.eye(3)) < tol and np.linalg.det(r) > 0)


def check_transform(m, tol: float = 1e-10) -> np.ndarray:
    """Return ``m`` as a float array, raising :class:`InputError` if it is not a rigid transform."""
    arr = np.asarray(m, dtype=float)
    if not is_transform(arr, tol):
        raise InputError("matrix is not a valid homogeneous transform")
    return arr


def make_transform(rot=None, trans=None) -> np.ndarray:
    m = np.eye(4)
    if rot is not None:
        m[:3, :3] = rot
    if trans is not None:
        m[:3, 3] = trans
    return m


def inverse(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    r, p = m[:3, :3], m[:3, 3]
    out = np.eye(4)
    out[:3, :3] = r.T
    out[:3, 3] = -r.T @ p
    return out


def compose(*transforms) -> np.ndarray:
    out = np.eye(4)
    for t in transforms:
        out = out @ t
    return out


def reorthonormalize(m) -> np.ndarray:
    """Project the rotation block onto SO(3) (nearest rotation in Frobenius norm)."""
    out = np.array(m, dtype=float)
    u, _, vt = np.linalg.svd(out[:3, :3])
    d = np.sign(np.linalg.det(u @ vt))
    out[:3, :3] = u @ np.diag([1.0, 1.0, d]) @ vt
    out[3] = (0.0, 0.0, 0.0, 1.0)
    return out


def twist_transform(rot, offset) -> np.ndarray:
    """6x6 map carrying a twist of a frame to the twist of a rigidly attached point.

    ``rot`` is the rotation of the source frame in world axes and ``offset`` the
    world-frame vector from the source origin to the target point. Source twist
    components are in the source frame, target components in world axes.
    """
    rot = np.asarray(rot, dtype=float)
    a = np.zeros((6, 6))
    a[:3, :3] = rot
    a[3:, 3:] = rot
    a[:3, 3:] = -skew(offset) @ rot
    return a


def block_rotation(rot) -> np.ndarray:
    """6x6 block-diagonal rotation acting on twists or wrenches at a fixed point."""
    return np.kron(np.eye(2), np.asarray(rot, dtype=float))


def pose_difference(t_plus, t_minus) -> np.ndarray:
    """Twist-like 6-vector of the difference between two nearby poses.

    Used by finite-difference oracles: translation difference and the rotation
    vector of ``R+ @ R-^T``.
    """
    dp = t_plus[:3, 3] - t_minus[:3, 3]
    dr = t_plus[:3, :3] @ t_minus[:3, :3].T
    # vee of the relative rotation is sin(angle) * axis, exact to third order
    return np.concatenate([dp, vee(dr)])
