"""Recovering a link compliance from nodal displacement fields.

A finite-element run would load a link with six unit wrenches and export the
displacement of every node. Here those fields are generated from a known
compliance, written to disk in the CSV plus JSON sidecar format read by
``kinetostiff fit-compliance``, read back and fitted.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from kinetostiff import orthoglide as og
from kinetostiff import procrustes

data, _ = og.load_config()
k_true = np.array(data["foot"])

rng = np.random.default_rng(3)
p0 = np.array([0.0, 0.0, 0.0])
nodes = rng.uniform(-30.0, 30.0, size=(200, 3))
datasets = procrustes.synthetic_datasets(k_true, nodes, p0=p0)

with tempfile.TemporaryDirectory() as tmp:
    paths = []
    for (kind, axis), ds in zip(procrustes.LOAD_ORDER, datasets):
        path = Path(tmp) / f"{kind}_{axis}.csv"
        procrustes.write_dataset(ds, path)
        paths.append(path)
    print("wrote", ", ".join(p.name for p in paths))
    k_fit = procrustes.build_compliance([procrustes.read_dataset(p) for p in paths])

err = np.linalg.norm(k_fit - k_true) / np.linalg.norm(k_true)
print(f"relative error of the recovered compliance: {err:.2e}")

# measurement noise shows up as a rigid-fit residual and a small asymmetry
noisy = [
    procrustes.DisplacementDataset(ds.p0, ds.positions, ds.displacements + rng.normal(0, 1e-7, ds.displacements.shape), ds.load)
    for ds in datasets
]
k_noisy = procrustes.build_compliance(noisy)
print(f"with 1e-7 mm noise: relative error {np.linalg.norm(k_noisy - k_true) / np.linalg.norm(k_true):.2e}")
