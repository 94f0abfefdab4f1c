"""Stiffness at the two kinematic singularities of the Orthoglide.

At the "flat" posture (all legs in the base plane) the translational
stiffness loses one direction; at the "bar" posture (all legs aligned with
the diagonal) it keeps only one. The printed matrices show the resulting
patterns: equal diagonal with off-diagonal equal to minus half the diagonal,
and all nine entries equal.
"""

from __future__ import annotations

import numpy as np

from kinetostiff import orthoglide as og
from kinetostiff.kinetostatics import matrix_rank

np.set_printoptions(precision=1, suppress=True)

geom, springs = og.default_setup("prpar")
for variant in og.VARIANTS:
    g = geom.with_variant(variant)
    for name, p in og.singular_configs(g):
        rep = og.evaluate_stiffness(g, p, springs)
        kt = rep.K_tran
        print(f"{variant} at the {name} posture {np.round(p, 2)} mm: rank {matrix_rank(kt)}")
        print(kt, "N/mm\n")
