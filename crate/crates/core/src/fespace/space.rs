//! Continuous Lagrange spaces over a [`Mesh`] with periodic identification and
//! Dirichlet constraints.

use std::collections::HashMap;

use super::mesh::{Mesh, MARKER_BOTTOM, MARKER_LEFT, MARKER_RIGHT, MARKER_TOP};
use super::quadrature::{interval_rule_for_degree, triangle_rule_for_degree, QuadratureRule};
use super::reference::ReferenceElement;
use super::sparse::{cg_csr, CgOptions, CsrMatrix, TripletBuilder};
use crate::error::{MhdError, Result};

const KEY_SCALE: f64 = (1u64 << 30) as f64;

/// Quadrature rule with tabulated reference basis values and gradients.
#[derive(Debug, Clone)]
pub struct QuadratureTable {
    pub rule: QuadratureRule,
    /// `phi[q][i]`
    pub phi: Vec<Vec<f64>>,
    /// `dphi[q][i]` in reference coordinates.
    pub dphi: Vec<Vec<[f64; 2]>>,
}

impl QuadratureTable {
    pub fn new(reference: &ReferenceElement, rule: QuadratureRule) -> Self {
        let phi = rule.points.iter().map(|&p| reference.eval(p)).collect();
        let dphi = rule.points.iter().map(|&p| reference.eval_grad(p)).collect();
        QuadratureTable { rule, phi, dphi }
    }
}

/// Affine map from the reference cell: `x = origin + jac * xi`.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    /// Inverse transpose of `jac`, maps reference gradients to physical ones.
    pub jinv_t: [[f64; 2]; 2],
    pub det: f64,
}

impl CellGeometry {
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv_t[0][0] * g[0] + self.jinv_t[0][1] * g[1],
            self.jinv_t[1][0] * g[0] + self.jinv_t[1][1] * g[1],
        ]
    }
}

/// Data handed to quadrature-loop callbacks.
pub struct QpContext<'a> {
    pub cell: usize,
    pub dofs: &'a [usize],
    pub x: [f64; 2],
    /// Quadrature weight times Jacobian determinant.
    pub jxw: f64,
    pub phi: &'a [f64],
    pub grad: &'a [[f64; 2]],
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Mesh,
    pub degree: usize,
    pub reference: ReferenceElement,
    pub table: QuadratureTable,
    pub periodic: [bool; 2],
    pub cell_dofs: Vec<Vec<usize>>,
    pub dof_coords: Vec<[f64; 2]>,
    /// Boundary sides each DOF lies on (periodic sides excluded).
    pub dof_markers: Vec<Vec<usize>>,
    /// Global DOF attached to each mesh vertex.
    pub vertex_dofs: Vec<usize>,
    pub geometry: Vec<CellGeometry>,
}

#[derive(Debug, Clone)]
pub struct MassOperators {
    pub consistent: CsrMatrix,
    pub lumped: Vec<f64>,
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: usize, periodic: [bool; 2]) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(MhdError::Config(format!("polynomial degree must be 1, 2 or 3, got {degree}")));
        }
        let dim = mesh.dim;
        let reference = ReferenceElement::new(dim, degree);
        let rule = if dim == 1 {
            interval_rule_for_degree(2 * degree + 1)
        } else {
            triangle_rule_for_degree(2 * degree + 1)
        };
        let table = QuadratureTable::new(&reference, rule);
        let geometry: Vec<CellGeometry> = (0..mesh.n_cells()).map(|c| cell_geometry(&mesh, c)).collect();
        if let Some(c) = geometry.iter().position(|g| !(g.det > 0.0)) {
            return Err(MhdError::InvalidDomain(format!("cell {c} has nonpositive measure")));
        }
        let periodic = if dim == 1 { [periodic[0], false] } else { periodic };

        let [[x0, x1], [y0, y1]] = mesh.bounds;
        let key_of = |p: [f64; 2]| -> (i64, i64) {
            let kx = quantize(p[0], x0, x1, periodic[0]);
            let ky = if dim == 1 { 0 } else { quantize(p[1], y0, y1, periodic[1]) };
            (kx, ky)
        };
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut dof_coords = Vec::new();
        let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
        for geo in &geometry {
            let mut dofs = Vec::with_capacity(reference.n_local());
            for &xi in &reference.nodes {
                let p = geo.map(xi);
                let next = dof_coords.len();
                let id = *index.entry(key_of(p)).or_insert(next);
                if id == next {
                    dof_coords.push(p);
                }
                dofs.push(id);
            }
            cell_dofs.push(dofs);
        }
        let vertex_dofs = mesh
            .vertices
            .iter()
            .map(|&v| {
                index
                    .get(&key_of(v))
                    .copied()
                    .ok_or_else(|| MhdError::InvalidDomain("vertex not attached to any cell".into()))
            })
            .collect::<Result<Vec<_>>>()?;

        let tol = 1e-9;
        let lx = x1 - x0;
        let ly = y1 - y0;
        let dof_markers = dof_coords
            .iter()
            .map(|p| {
                let mut m = Vec::new();
                if !periodic[0] {
                    if (p[0] - x0).abs() <= tol * lx {
                        m.push(MARKER_LEFT);
                    }
                    if (p[0] - x1).abs() <= tol * lx {
                        m.push(MARKER_RIGHT);
                    }
                }
                if dim == 2 && !periodic[1] {
                    if (p[1] - y0).abs() <= tol * ly {
                        m.push(MARKER_BOTTOM);
                    }
                    if (p[1] - y1).abs() <= tol * ly {
                        m.push(MARKER_TOP);
                    }
                }
                m
            })
            .collect();

        Ok(FeSpace { mesh, degree, reference, table, periodic, cell_dofs, dof_coords, dof_markers, vertex_dofs, geometry })
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn is_fully_periodic(&self) -> bool {
        if self.dim() == 1 {
            self.periodic[0]
        } else {
            self.periodic[0] && self.periodic[1]
        }
    }

    /// Table for a rule of at least the given exactness.
    pub fn table_for_exactness(&self, exactness: usize) -> QuadratureTable {
        let rule = if self.dim() == 1 {
            interval_rule_for_degree(exactness)
        } else {
            triangle_rule_for_degree(exactness)
        };
        QuadratureTable::new(&self.reference, rule)
    }

    /// Calls `f` at every quadrature point of every cell, in a fixed order.
    pub fn quad_loop_with<F: FnMut(&QpContext)>(&self, table: &QuadratureTable, mut f: F) {
        let nloc = self.reference.n_local();
        let mut grad = vec![[0.0; 2]; nloc];
        for (c, geo) in self.geometry.iter().enumerate() {
            for q in 0..table.rule.len() {
                for i in 0..nloc {
                    grad[i] = geo.grad(table.dphi[q][i]);
                }
                let ctx = QpContext {
                    cell: c,
                    dofs: &self.cell_dofs[c],
                    x: geo.map(table.rule.points[q]),
                    jxw: table.rule.weights[q] * geo.det,
                    phi: &table.phi[q],
                    grad: &grad,
                };
                f(&ctx);
            }
        }
    }

    pub fn quad_loop<F: FnMut(&QpContext)>(&self, f: F) {
        self.quad_loop_with(&self.table, f)
    }

    pub fn interpolate<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        self.dof_coords.iter().map(|&p| f(p)).collect()
    }

    /// Value and gradient of a nodal field at a quadrature point.
    pub fn eval_at(ctx: &QpContext, field: &[f64]) -> (f64, [f64; 2]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (i, &d) in ctx.dofs.iter().enumerate() {
            let c = field[d];
            v += ctx.phi[i] * c;
            g[0] += ctx.grad[i][0] * c;
            g[1] += ctx.grad[i][1] * c;
        }
        (v, g)
    }

    /// Integral of a nodal field.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        let mut s = 0.0;
        self.quad_loop(|ctx| s += ctx.jxw * Self::eval_at(ctx, field).0);
        s
    }

    pub fn build_mass_operators(&self) -> MassOperators {
        let n = self.n_dofs();
        let mut t = TripletBuilder::new(n, n);
        self.quad_loop(|ctx| {
            for (i, &di) in ctx.dofs.iter().enumerate() {
                for (j, &dj) in ctx.dofs.iter().enumerate() {
                    t.add(di, dj, ctx.jxw * ctx.phi[i] * ctx.phi[j]);
                }
            }
        });
        let consistent = t.build();
        let lumped = consistent.row_sums();
        MassOperators { consistent, lumped }
    }

    /// Load vector `(f, phi_i)` for a pointwise function.
    pub fn load_vector<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        let mut b = vec![0.0; self.n_dofs()];
        self.quad_loop(|ctx| {
            let v = f(ctx.x) * ctx.jxw;
            for (i, &d) in ctx.dofs.iter().enumerate() {
                b[d] += v * ctx.phi[i];
            }
        });
        b
    }

    pub fn l2_project<F: Fn([f64; 2]) -> f64>(&self, mass: &MassOperators, f: F) -> Result<Vec<f64>> {
        let b = self.load_vector(f);
        let mut x = diagonal_guess(&b, &mass.consistent);
        cg_csr(&mass.consistent, &b, &mut x, CgOptions::default())?;
        Ok(x)
    }

    /// L2 projection of the cellwise constant `circumradius / degree`.
    pub fn mesh_size_field(&self, mass: &MassOperators) -> Result<Vec<f64>> {
        let k = self.degree as f64;
        let hk: Vec<f64> = (0..self.mesh.n_cells()).map(|c| self.mesh.circumradius(c) / k).collect();
        let mut b = vec![0.0; self.n_dofs()];
        self.quad_loop(|ctx| {
            let v = hk[ctx.cell] * ctx.jxw;
            for (i, &d) in ctx.dofs.iter().enumerate() {
                b[d] += v * ctx.phi[i];
            }
        });
        let mut x = diagonal_guess(&b, &mass.consistent);
        cg_csr(&mass.consistent, &b, &mut x, CgOptions::default())?;
        Ok(x)
    }

    /// DOFs lying on the boundary side with the given marker.
    pub fn boundary_dofs(&self, marker: usize) -> Result<Vec<usize>> {
        let max_marker = if self.dim() == 1 { MARKER_RIGHT } else { MARKER_TOP };
        if !(MARKER_LEFT..=max_marker).contains(&marker) {
            return Err(MhdError::UnknownBoundaryMarker(marker));
        }
        Ok((0..self.n_dofs()).filter(|&d| self.dof_markers[d].contains(&marker)).collect())
    }

    /// All DOFs on non-periodic boundary sides.
    pub fn all_boundary_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| !self.dof_markers[d].is_empty()).collect()
    }
}

fn diagonal_guess(b: &[f64], m: &CsrMatrix) -> Vec<f64> {
    b.iter().zip(m.diagonal()).map(|(b, d)| b / d).collect()
}

fn quantize(x: f64, lo: f64, hi: f64, periodic: bool) -> i64 {
    let k = ((x - lo) / (hi - lo) * KEY_SCALE).round() as i64;
    if periodic && k == KEY_SCALE as i64 {
        0
    } else {
        k
    }
}

fn cell_geometry(mesh: &Mesh, c: usize) -> CellGeometry {
    let v = mesh.cell_vertices(c);
    if mesh.dim == 1 {
        let j = v[1][0] - v[0][0];
        CellGeometry {
            origin: v[0],
            jac: [[j, 0.0], [0.0, 1.0]],
            jinv_t: [[1.0 / j, 0.0], [0.0, 1.0]],
            det: j,
        }
    } else {
        let a = v[1][0] - v[0][0];
        let b = v[2][0] - v[0][0];
        let c2 = v[1][1] - v[0][1];
        let d = v[2][1] - v[0][1];
        let det = a * d - b * c2;
        // jac = [[a, b], [c, d]]; inverse = [[d, -b], [-c, a]] / det
        CellGeometry {
            origin: v[0],
            jac: [[a, b], [c2, d]],
            jinv_t: [[d / det, -c2 / det], [-b / det, a / det]],
            det,
        }
    }
}

/// Strongly imposed nodal values for a component-major multi-field vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    pub dofs: Vec<usize>,
    /// `values[k][c]`: value of component `c` at `dofs[k]`.
    pub values: Vec<Vec<f64>>,
}

impl Constraints {
    pub fn none() -> Self {
        Constraints::default()
    }

    /// Freezes the current values of `field` at the DOFs carrying any of `markers`.
    pub fn freeze(space: &FeSpace, markers: &[usize], field: &[f64], ncomp: usize) -> Result<Self> {
        let n = space.n_dofs();
        let mut dofs = Vec::new();
        for &m in markers {
            for d in space.boundary_dofs(m)? {
                if !dofs.contains(&d) {
                    dofs.push(d);
                }
            }
        }
        dofs.sort_unstable();
        let values = dofs.iter().map(|&d| (0..ncomp).map(|c| field[c * n + d]).collect()).collect();
        Ok(Constraints { dofs, values })
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn apply(&self, field: &mut [f64], n_dofs: usize) {
        for (k, &d) in self.dofs.iter().enumerate() {
            for (c, &v) in self.values[k].iter().enumerate() {
                field[c * n_dofs + d] = v;
            }
        }
    }

    /// Zeroes constrained entries (used on time derivatives).
    pub fn zero(&self, field: &mut [f64], n_dofs: usize) {
        for &d in &self.dofs {
            for c in 0..self.values.first().map_or(0, |v| v.len()) {
                field[c * n_dofs + d] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{build_interval_mesh, build_triangulated_rectangle, TrianglePattern};
    use super::*;

    fn unit_square(n: usize, k: usize, periodic: bool) -> FeSpace {
        let m = build_triangulated_rectangle(n, n, [[0.0, 1.0], [0.0, 1.0]], TrianglePattern::Right).unwrap();
        FeSpace::new(m, k, [periodic, periodic]).unwrap()
    }

    #[test]
    fn dof_counts() {
        for k in 1..=3 {
            let s = unit_square(4, k, false);
            assert_eq!(s.n_dofs(), (4 * k + 1) * (4 * k + 1));
            let p = unit_square(4, k, true);
            assert_eq!(p.n_dofs(), (4 * k) * (4 * k));
        }
        let m = build_interval_mesh(640, 0.0, 1.0).unwrap();
        assert_eq!(FeSpace::new(m.clone(), 1, [false, false]).unwrap().n_dofs(), 641);
        assert_eq!(FeSpace::new(m, 1, [true, false]).unwrap().n_dofs(), 640);
    }

    #[test]
    fn partition_of_unity() {
        let s = unit_square(3, 3, false);
        let mut worst: f64 = 0.0;
        s.quad_loop(|ctx| {
            let sum: f64 = ctx.phi.iter().sum();
            let gsum: f64 = ctx.grad.iter().map(|g| g[0].abs() + g[1].abs()).sum::<f64>();
            let gx: f64 = ctx.grad.iter().map(|g| g[0]).sum();
            worst = worst.max((sum - 1.0).abs()).max(gx.abs() / gsum);
        });
        assert!(worst < 1e-13);
    }

    #[test]
    fn mass_operator_properties() {
        let s = unit_square(5, 2, true);
        let m = s.build_mass_operators();
        let total: f64 = m.lumped.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        let n = s.n_dofs();
        for i in 0..n {
            for k in m.consistent.row_ptr[i]..m.consistent.row_ptr[i + 1] {
                let j = m.consistent.col_idx[k];
                assert!((m.consistent.values[k] - m.consistent.get(j, i)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lumped_1d_interior_entry() {
        let m = build_interval_mesh(10, 0.0, 1.0).unwrap();
        let s = FeSpace::new(m, 1, [false, false]).unwrap();
        let mass = s.build_mass_operators();
        assert!((mass.lumped[5] - 0.1).abs() < 1e-15);
        assert!((mass.lumped[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn periodic_partners_identified() {
        let s = unit_square(4, 2, true);
        for (v, p) in s.mesh.vertices.iter().enumerate() {
            if p[0] == 1.0 {
                let partner = s.mesh.vertices.iter().position(|q| q[0] == 0.0 && q[1] == p[1]).unwrap();
                let partner = if p[1] == 1.0 { 0 } else { partner };
                assert_eq!(s.vertex_dofs[v], s.vertex_dofs[partner]);
            }
        }
        assert!(s.all_boundary_dofs().is_empty());
    }

    #[test]
    fn projection_reproduces_polynomials() {
        for k in 1..=3 {
            let s = unit_square(3, k, false);
            let mass = s.build_mass_operators();
            let f = |p: [f64; 2]| (p[0] + 2.0 * p[1] - 0.3).powi(k as i32);
            let x = s.l2_project(&mass, f).unwrap();
            for (d, p) in s.dof_coords.iter().enumerate() {
                assert!((x[d] - f(*p)).abs() < 1e-10, "k={k} {} {}", x[d], f(*p));
            }
        }
    }

    #[test]
    fn mesh_size_single_element_and_degree_scaling() {
        let m = build_interval_mesh(1, 0.0, 2.0).unwrap();
        let s = FeSpace::new(m, 1, [false, false]).unwrap();
        let h = s.mesh_size_field(&s.build_mass_operators()).unwrap();
        assert!(h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let m = build_interval_mesh(8, 0.0, 1.0).unwrap();
        let s1 = FeSpace::new(m.clone(), 1, [true, false]).unwrap();
        let s2 = FeSpace::new(m, 2, [true, false]).unwrap();
        let h1 = s1.mesh_size_field(&s1.build_mass_operators()).unwrap();
        let h2 = s2.mesh_size_field(&s2.build_mass_operators()).unwrap();
        assert!(h1.iter().all(|v| (v - 1.0 / 16.0).abs() < 1e-12));
        assert!(h2.iter().all(|v| (v - 1.0 / 32.0).abs() < 1e-12));
    }

    #[test]
    fn constraints_freeze_and_apply() {
        let m = build_interval_mesh(4, 0.0, 1.0).unwrap();
        let s = FeSpace::new(m, 1, [false, false]).unwrap();
        let n = s.n_dofs();
        let field: Vec<f64> = (0..2 * n).map(|i| i as f64).collect();
        let c = Constraints::freeze(&s, &[1, 2], &field, 2).unwrap();
        let mut g = vec![-1.0; 2 * n];
        c.apply(&mut g, n);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[4], 4.0);
        assert_eq!(g[n], n as f64);
        assert_eq!(g[1], -1.0);
        assert!(matches!(Constraints::freeze(&s, &[3], &field, 2), Err(MhdError::UnknownBoundaryMarker(3))));
    }
}
