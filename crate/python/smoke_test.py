"""Smoke test for the pymhd extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import sys
import tempfile
from pathlib import Path

import pymhd


def main() -> int:
    gas = pymhd.GasModel(5.0 / 3.0)
    u = gas.conserved(1.0, [0.5, -0.25], 2.0, [0.75, 0.1])
    rho, vel, p, b = gas.primitive(u)
    assert abs(p - 2.0) < 1e-12 and abs(vel[0] - 0.5) < 1e-14
    assert gas.convexity(u, ("linear", 1.0, 0.0))[2]
    assert not gas.convexity(u, ("exp", 2.0, None))[2]

    assert "brio_wu" in pymhd.problem_ids()
    sim = pymhd.Simulation({"problem": "brio_wu", "nx": "100", "viscosity": "first_order", "t_final": "0.02"})
    s0 = sim.monitor()["min_s"]
    before = sim.totals()
    sim.advance()
    assert sim.finished and sim.steps > 0
    assert sim.monitor()["min_s"] >= s0 - 1e-12
    rho = sim.component("rho")
    assert len(rho) == sim.n_dofs and min(rho) > 0.0
    # the fluid is at rest at both ends, so mass and energy do not move through the boundary
    drift = max(abs(sim.totals()[c] - before[c]) for c in (0, 3))
    assert drift < 1e-12
    print(f"brio_wu: {sim.steps} steps to t = {sim.t:.3f}, min s drop {sim.monitor()['min_s'] - s0:.2e}, mass/energy drift {drift:.1e}")

    try:
        pymhd.Simulation({"mesh.bogus": "1"})
    except pymhd.ConfigError as e:
        print(f"config error raised as expected: {e}")
    else:
        raise AssertionError("bad key accepted")

    with tempfile.TemporaryDirectory() as out:
        status = pymhd.run(out, {"problem": "orszag_tang", "nx": "12", "t_final": "0.01"})
        assert status == 0
        names = sorted(p.name for p in Path(out).iterdir())
        assert {"entropy_history.csv", "run_manifest.txt", "snapshot_0001.vtk"} <= set(names)
        print(f"orszag_tang run wrote {len(names)} files")
    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
