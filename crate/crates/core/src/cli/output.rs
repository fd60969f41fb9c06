//! Text writers for snapshots, VTK files and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::solver::Simulation;
use crate::thermo::{primitive_from_conserved, ConservedState, NCOMP};

const FIELD_NAMES: [&str; NCOMP] = ["rho", "mx", "my", "E", "Bx", "By"];

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn pressure(sim: &Simulation, i: usize) -> f64 {
    let st = ConservedState::from_array(&sim.node_state(i));
    primitive_from_conserved(&st, &sim.problem.gas).map(|p| p.p).unwrap_or(f64::NAN)
}

/// One row per DOF: coordinates, conserved fields, pressure and viscosity.
pub fn snapshot_csv(sim: &Simulation) -> String {
    let n = sim.n_dofs();
    let dim = sim.problem.dim;
    let mut s = String::new();
    s.push_str(if dim == 1 { "x" } else { "x,y" });
    for f in FIELD_NAMES {
        let _ = write!(s, ",{f}");
    }
    s.push_str(",p,eps\n");
    for i in 0..n {
        let x = sim.space.dof_coords[i];
        let _ = write!(s, "{:.17e}", x[0]);
        if dim == 2 {
            let _ = write!(s, ",{:.17e}", x[1]);
        }
        for c in 0..NCOMP {
            let _ = write!(s, ",{:.17e}", sim.u[c * n + i]);
        }
        let _ = writeln!(s, ",{:.17e},{:.17e}", pressure(sim, i), sim.eps[i]);
    }
    s
}

/// Legacy ASCII VTK unstructured grid over the mesh vertices. Higher-degree
/// interior nodes are not shown; periodic copies of a node are written as
/// separate points.
pub fn snapshot_vtk(sim: &Simulation, title: &str) -> String {
    let mesh = &sim.space.mesh;
    let n = sim.n_dofs();
    let nv = mesh.vertices.len();
    let dofs = &sim.space.vertex_dofs;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nv} double");
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", v[0], v[1]);
    }
    let nc = mesh.cells.len();
    let _ = writeln!(s, "CELLS {nc} {}", nc * 4);
    for c in &mesh.cells {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    let mut scalar = |name: &str, value: &dyn Fn(usize) -> f64| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for &d in dofs {
            let _ = writeln!(s, "{:.17e}", value(d));
        }
    };
    scalar("density", &|d| sim.u[d]);
    scalar("energy", &|d| sim.u[3 * n + d]);
    scalar("pressure", &|d| pressure(sim, d));
    scalar("viscosity", &|d| sim.eps[d]);
    for (name, base) in [("momentum", 1), ("magnetic_field", 4)] {
        let _ = writeln!(s, "VECTORS {name} double");
        for &d in dofs {
            let _ = writeln!(s, "{:.17e} {:.17e} 0", sim.u[base * n + d], sim.u[(base + 1) * n + d]);
        }
    }
    s
}

/// Writes `contents` to `dir/name` and returns its hash.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<String> {
    fs::write(dir.join(name), contents)?;
    Ok(sha256_hex(contents.as_bytes()))
}
