#!/usr/bin/env python3
"""Smoke test for the pivotlab_py extension module.

Build the extension first, then run this script:

    cargo build -p pivotlab-py
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_extension():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libpivotlab_py.so", "pivotlab_py.dll", "libpivotlab_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("extension not built; run `cargo build -p pivotlab-py` first")
    staging = Path(tempfile.mkdtemp(prefix="pivotlab_py_"))
    suffix = ".so" if built.suffix in (".so", ".dylib") else ".pyd"
    shutil.copy2(built, staging / f"pivotlab_py{suffix}")
    sys.path.insert(0, str(staging))
    import pivotlab_py

    return pivotlab_py


def main():
    pl = import_extension()

    grid = pl.Grid.uniform(0.0, 15.0, 60)
    assert grid.num_cells == 60
    assert len(grid.pivots()) == 60
    assert abs(grid.pivots()[0] - 0.125) < 1e-14

    kernel = pl.Kernel("sum:1.0")
    assert kernel.eval(2.0, 3.0) == 5.0

    ic = pl.Density("normal:1.0,0.01")
    n0 = ic.project(grid)
    m1_0 = sum(n * x for n, x in zip(n0, grid.pivots()))
    assert abs(sum(n0) - 1.0) < 1e-6

    solver = pl.Solver(grid, kernel)
    rhs = solver.rhs(n0)
    assert len(rhs) == 60

    result = solver.integrate(n0, t_end=0.5, dt=1e-3)
    assert result["m0"] < sum(n0), "total number must decrease"
    drift = abs(result["mass_ledger"] - m1_0) / m1_0
    assert drift < 1e-11, f"mass ledger drift {drift}"
    expected_m0 = sum(n0) * math.exp(-m1_0 * 0.5)
    assert abs(result["m0"] - expected_m0) / expected_m0 < 0.01

    rows = pl.eoc_study(
        "uniform", 0.0, 15.0, 30, 3, kernel, ic, mode="self", t_end=0.1, dt=1e-3
    )
    assert [gp for gp, _, _ in rows] == [30, 60, 120]
    assert rows[-1][2] is not None

    print("smoke test passed")


if __name__ == "__main__":
    main()
