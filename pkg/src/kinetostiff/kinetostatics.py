"""Chain and manipulator stiffness from spring compliances and passive Jacobians.

For one chain the kinetostatic model is

    S @ f + J_q @ dq = dt,    J_q.T @ f = 0

with ``S = J_theta @ k_theta @ J_theta.T`` the spring compliance seen at the
end point. The chain stiffness ``f = K @ dt`` is obtained either from an SVD of
``J_q`` (works at singular postures) or from the bordered block matrix
(non-singular postures only). Chain stiffnesses add up to the manipulator
stiffness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .chain import JacobianPair
from .compliance import invert_spd
from .errors import InputError, NumericalError, SingularityError

SIGMA_TOL = 1e-9


def cartesian_spring_compliance(jac: JacobianPair, springs: Mapping[str, np.ndarray]) -> np.ndarray:
    """Blockwise ``sum J_b k_b J_b^T`` over the spring blocks of a chain.

    Args:
        jac: Jacobians whose ``blocks`` name the spring blocks.
        springs: compliance matrix per block name; a scalar is accepted for
            1-dof blocks.
    """
    s = np.zeros((6, 6))
    for name, sl in jac.blocks:
        if name not in springs:
            raise InputError(f"no compliance given for spring block {name!r}")
        k = np.atleast_2d(np.asarray(springs[name], dtype=float))
        width = sl.stop - sl.start
        if k.shape != (width, width):
            raise InputError(f"spring block {name!r} has {width} coordinates, compliance is {k.shape}")
        jb = jac.J_theta[:, sl]
        s += jb @ k @ jb.T
    return 0.5 * (s + s.T)


def assemble_spring_compliance(jac: JacobianPair, springs: Mapping[str, np.ndarray]) -> np.ndarray:
    """Full block-diagonal compliance over all spring coordinates."""
    n = jac.J_theta.shape[1]
    k = np.zeros((n, n))
    for name, sl in jac.blocks:
        k[sl, sl] = np.atleast_2d(np.asarray(springs[name], dtype=float))
    return k


@dataclass(frozen=True)
class ChainStiffness:
    """Stiffness of one chain.

    Attributes:
        K: 6x6 stiffness at the end point.
        rank: ``6 - jac_rank``.
        nullspace_basis: 6 x r orthonormal basis of the end-point motions that
            the passive joints absorb (``K @ basis = 0``).
        jac_rank: numerical rank ``r`` of ``J_q``.
    """

    K: np.ndarray
    rank: int
    nullspace_basis: np.ndarray
    jac_rank: int


def _check_inputs(S, J_q):
    S = np.asarray(S, dtype=float)
    if S.shape != (6, 6):
        raise InputError(f"spring compliance must be 6x6, got {S.shape}")
    J_q = np.asarray(J_q, dtype=float)
    if J_q.size == 0:
        J_q = np.zeros((6, 0))
    if J_q.ndim != 2 or J_q.shape[0] != 6 or J_q.shape[1] > 6:
        raise InputError(f"passive Jacobian must be 6 x m with m <= 6, got {J_q.shape}")
    return 0.5 * (S + S.T), J_q


def passive_split(J_q, sigma_tol: float = SIGMA_TOL):
    """Split R^6 into the range of ``J_q`` and its orthogonal complement.

    Returns ``(U_r, U_d, sigma)``; the rank decision counts singular values
    above ``sigma_tol * sigma_max``.
    """
    J_q = np.asarray(J_q, dtype=float)
    if J_q.shape[1] == 0:
        return np.zeros((6, 0)), np.eye(6), np.zeros(0)
    u, sigma, _ = np.linalg.svd(J_q, full_matrices=True)
    smax = sigma[0] if sigma.size else 0.0
    r = int(np.sum(sigma > sigma_tol * smax)) if smax > 0 else 0
    return u[:, :r], u[:, r:], sigma


def chain_stiffness_svd(S, J_q, sigma_tol: float = SIGMA_TOL) -> ChainStiffness:
    """Chain stiffness ``K = U_d (U_d^T S U_d)^-1 U_d^T``.

    ``U_d`` spans the end-point motions the passive joints cannot produce.
    Valid at singular postures; the rank of ``K`` drops with the rank of
    ``J_q``.

    Raises:
        NumericalError: ``U_d^T S U_d`` is singular, i.e. the springs offer no
            compliance-bounded resistance along some constrained direction.
            The exception's ``direction`` is that direction in end-point
            coordinates.
    """
    S, J_q = _check_inputs(S, J_q)
    u_r, u_d, _ = passive_split(J_q, sigma_tol)
    reduced = u_d.T @ S @ u_d
    try:
        inner = invert_spd(reduced) if reduced.size else reduced
    except NumericalError as exc:
        direction = u_d @ exc.direction
        raise NumericalError(
            f"spring compliance is degenerate along constrained direction {np.round(direction, 6)}",
            value=exc.value,
            direction=direction,
        ) from None
    K = u_d @ inner @ u_d.T
    K = 0.5 * (K + K.T)
    r = u_r.shape[1]
    return ChainStiffness(K=K, rank=6 - r, nullspace_basis=u_r, jac_rank=r)


def chain_stiffness_blocksolve(S, J_q, sigma_tol: float = SIGMA_TOL) -> ChainStiffness:
    """Chain stiffness from the leading 6x6 block of ``[[S, J_q], [J_q^T, 0]]^-1``.

    Raises:
        SingularityError: ``J_q`` is rank deficient; use :func:`chain_stiffness_svd`.
    """
    S, J_q = _check_inputs(S, J_q)
    m = J_q.shape[1]
    u_r, _, sigma = passive_split(J_q, sigma_tol)
    if u_r.shape[1] < m:
        raise SingularityError(
            f"passive Jacobian is rank deficient (rank {u_r.shape[1]} < {m}); use the SVD solver",
            value=float(sigma[-1]) if sigma.size else None,
        )
    big = np.zeros((6 + m, 6 + m))
    big[:6, :6] = S
    big[:6, 6:] = J_q
    big[6:, :6] = J_q.T
    try:
        inv = np.linalg.solve(big, np.eye(6 + m))
    except np.linalg.LinAlgError:
        raise NumericalError("bordered kinetostatic matrix is singular") from None
    K = 0.5 * (inv[:6, :6] + inv[:6, :6].T)
    return ChainStiffness(K=K, rank=6 - m, nullspace_basis=u_r, jac_rank=m)


@dataclass(frozen=True)
class ChainSolution:
    """Response of one chain to an imposed end-point displacement.

    ``tau_theta`` and ``dtheta`` are only filled when the spring Jacobian and
    compliance were supplied. ``min_norm`` flags a singular posture where
    ``dq`` is the minimum-norm representative of a family of solutions.
    """

    f: np.ndarray
    dq: np.ndarray
    tau_theta: np.ndarray | None
    dtheta: np.ndarray | None
    min_norm: bool


def solve_chain(S, J_q, dt, *, J_theta=None, k_theta=None, sigma_tol: float = SIGMA_TOL) -> ChainSolution:
    """Wrench, passive motion and spring state for an imposed displacement ``dt``."""
    S, J_q = _check_inputs(S, J_q)
    dt = np.asarray(dt, dtype=float).reshape(6)
    cs = chain_stiffness_svd(S, J_q, sigma_tol)
    f = cs.K @ dt
    m = J_q.shape[1]
    if m:
        dq, *_ = np.linalg.lstsq(J_q, dt - S @ f, rcond=None)
    else:
        dq = np.zeros(0)
    tau = dtheta = None
    if J_theta is not None and k_theta is not None:
        tau = np.asarray(J_theta).T @ f
        dtheta = np.asarray(k_theta) @ tau
    return ChainSolution(f=f, dq=dq, tau_theta=tau, dtheta=dtheta, min_norm=cs.jac_rank < m)


@dataclass(frozen=True)
class ManipulatorStiffness:
    K_m: np.ndarray
    chains: tuple[ChainStiffness, ...]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(c.rank for c in self.chains)


def aggregate_manipulator(chains: Sequence[ChainStiffness]) -> ManipulatorStiffness:
    """Manipulator stiffness as the sum of the chain stiffnesses at a common pose."""
    chains = tuple(chains)
    if not chains:
        raise InputError("need at least one chain")
    K_m = np.zeros((6, 6))
    for c in chains:
        K_m = K_m + c.K
    return ManipulatorStiffness(K_m=K_m, chains=chains)


def matrix_rank(m, rtol: float = SIGMA_TOL) -> int:
    """Numerical rank with a tolerance relative to the largest singular value."""
    sigma = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    return int(np.sum(sigma > rtol * sigma[0]))
