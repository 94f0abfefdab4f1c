"""Lumped virtual-spring stiffness models of overconstrained parallel manipulators."""

from __future__ import annotations

from .chain import (
    Actuated,
    ChainConfig,
    ChainSpec,
    Passive,
    PassivePair,
    Rigid,
    Spring,
    constrain_passive,
    forward_kinematics,
    jacobians,
    numeric_jacobians,
)
from .compliance import BeamSection, SpringSet, beam_compliance, serial_aggregate, validate_compliance
from .errors import (
    DataError,
    InputError,
    NumericalError,
    RegimeError,
    SingularityError,
    StiffnessError,
    StructuralError,
    WorkspaceError,
)
from .kinetostatics import aggregate_manipulator, chain_stiffness_blocksolve, chain_stiffness_svd, solve_chain
from .orthoglide import OrthoglideGeometry, StiffnessReport, evaluate_stiffness, inverse_kinematics
from .parallelogram import ParallelogramSpec, parallelogram_stiffness_analytic, parallelogram_stiffness_numeric

__version__ = "0.1.0"
