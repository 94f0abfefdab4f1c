"""Parallelogram leg against a single bar.

Builds the parallelogram stiffness twice (closed form and by summing the two
bar chains), shows that the swing direction is free, and checks how much
the second bar stiffens rotation about the bar-normal axis.
"""

from __future__ import annotations

import numpy as np

from kinetostiff.compliance import BeamSection, beam_compliance, invert_spd
from kinetostiff.parallelogram import (
    ParallelogramSpec,
    parallelogram_stiffness_analytic,
    parallelogram_stiffness_numeric,
    regularize_for_chain_use,
)

np.set_printoptions(precision=3, suppress=False, linewidth=120)

b, h, d, L = 5.0, 12.0, 80.0, 300.0
section = BeamSection.rectangular(L=L, b=b, h=h, E=2.1e5, G=8.1e4)
spec = ParallelogramSpec(L=L, d=d, k_bar=beam_compliance(section))

for q in (0.0, 0.4, 0.9):
    a = parallelogram_stiffness_analytic(q, spec).K
    n = parallelogram_stiffness_numeric(q, spec).K
    err = np.linalg.norm(a - n) / np.linalg.norm(n)
    print(f"q={q:.1f} rad: closed form vs assembled, rel err {err:.1e}; swing row max {np.abs(a[2]).max():.1e}")

k_single = invert_spd(spec.k_bar)[4, 4]
k_plg = parallelogram_stiffness_analytic(0.0, spec).K[4, 4]
print(f"\nrotational stiffening about the bar normal: {k_plg / k_single:.3f}, 1.5(d/h)^2 = {1.5 * (d / h) ** 2:.3f}")

# inside a leg the free swing direction is absorbed by a passive joint, so it
# is either filled with a fictitious spring or dropped
spring = regularize_for_chain_use(parallelogram_stiffness_analytic(0.3, spec), mode="fictitious", kappa_f=1e3)
reduced = regularize_for_chain_use(parallelogram_stiffness_analytic(0.3, spec), mode="reduce_5dof")
print(f"\nfictitious spring acts on dofs {spring.dofs}, reduced spring on dofs {reduced.dofs}")
