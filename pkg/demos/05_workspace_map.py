"""Compliance over the Cartesian workspace.

Evaluates both variants on a coarse grid, prints the range of the scalar
compliances and writes the PRPaR map in the same CSV layout that
``kinetostiff map`` produces, ready for plotting.
"""

from __future__ import annotations

import sys

import numpy as np

from kinetostiff import orthoglide as og
from kinetostiff.cli import map_csv

geom, springs = og.default_setup("prpar")
points = og.grid_points(og.parse_grid("-73.65:126.35:5,-73.65:126.35:5,-73.65:126.35:5"))

for variant in og.VARIANTS:
    rows = og.workspace_map(geom.with_variant(variant), points, springs)
    ok = [r.report for r in rows if r.status == "ok"]
    kt = np.array([r.k_tran for r in ok])
    kr = np.array([r.k_rot for r in ok])
    print(f"{variant}: {len(ok)}/{len(rows)} points ok, k_tran {kt.min():.3e}..{kt.max():.3e}, k_rot {kr.min():.3e}..{kr.max():.3e}")

out = sys.argv[1] if len(sys.argv) > 1 else None
if out:
    with open(out, "w") as fh:
        fh.write(map_csv(og.workspace_map(geom, points, springs)))
    print(f"wrote {out}")
