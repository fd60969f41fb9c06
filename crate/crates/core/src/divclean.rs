//! Projection cleaning of the discrete magnetic field.
//!
//! With `D_d[j][i] = (d_d phi_i, phi_j)` and lumped mass `M`, the weak
//! divergence of `B` tested with `phi_i` is `r_i = (B, grad phi_i) = (D^T B)_i`.
//! Cleaning solves `(D^T M^-1 D) Psi = D^T B` and sets `B' = B - M^-1 D Psi`,
//! the lumped L2 projection of `grad Psi`, so that `D^T B' = 0` on every free
//! test function.

use crate::error::{MhdError, Result};
use crate::fespace::{cg_solve, CgOptions, CsrMatrix, FeSpace, MassOperators};
use crate::fespace::sparse::TripletBuilder;
use crate::thermo::{ConservedState, BX, BY, EN, MX, MY, NCOMP, RHO};

/// What stays fixed in the state when the magnetic field is replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyUpdate {
    /// Total energy `E` is kept; pressure absorbs the change of magnetic energy.
    #[default]
    KeepTotal,
    /// Internal energy is kept; `E` absorbs the change of magnetic energy.
    KeepInternal,
}

impl EnergyUpdate {
    pub fn name(&self) -> &'static str {
        match self {
            EnergyUpdate::KeepTotal => "total",
            EnergyUpdate::KeepInternal => "internal",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DivergenceCleaner {
    n: usize,
    d: [CsrMatrix; 2],
    lumped: Vec<f64>,
    /// Test functions on which the weak divergence is driven to zero.
    free: Vec<bool>,
    diag: Vec<f64>,
    deflate: bool,
    pub cg: CgOptions,
    pub energy: EnergyUpdate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanReport {
    pub before: f64,
    pub after: f64,
    pub iterations: usize,
}

impl DivergenceCleaner {
    /// `pin_mean` selects the zero-mean constraint on fully periodic meshes.
    pub fn new(space: &FeSpace, mass: &MassOperators, pin_mean: bool) -> Result<Self> {
        let n = space.n_dofs();
        if let Some(i) = mass.lumped.iter().position(|&m| !(m > 0.0)) {
            return Err(MhdError::Config(format!(
                "divergence cleaning needs positive lumped masses (entry {i} is {})",
                mass.lumped[i]
            )));
        }
        let periodic = space.is_fully_periodic();
        if periodic && !pin_mean {
            return Err(MhdError::NullspaceUnpinned);
        }
        let mut tx = TripletBuilder::new(n, n);
        let mut ty = TripletBuilder::new(n, n);
        space.quad_loop(|ctx| {
            for (j, &dj) in ctx.dofs.iter().enumerate() {
                let w = ctx.jxw * ctx.phi[j];
                for (i, &di) in ctx.dofs.iter().enumerate() {
                    tx.add(dj, di, w * ctx.grad[i][0]);
                    ty.add(dj, di, w * ctx.grad[i][1]);
                }
            }
        });
        let d = [tx.build(), ty.build()];
        let boundary = space.all_boundary_dofs();
        let mut free = vec![true; n];
        for b in boundary {
            free[b] = false;
        }
        let mut diag = vec![0.0; n];
        for m in &d {
            for j in 0..n {
                for k in m.row_ptr[j]..m.row_ptr[j + 1] {
                    diag[m.col_idx[k]] += m.values[k] * m.values[k] / mass.lumped[j];
                }
            }
        }
        for i in 0..n {
            if !free[i] {
                diag[i] = 1.0;
            }
        }
        Ok(DivergenceCleaner {
            n,
            d,
            lumped: mass.lumped.clone(),
            free,
            diag,
            deflate: periodic,
            cg: CgOptions { rtol: 1e-12, max_iter: 10_000, deflate_constants: periodic, atol: 0.0 },
            energy: EnergyUpdate::KeepTotal,
        })
    }

    /// `r_i = (B, grad phi_i)` for all DOFs.
    pub fn weak_divergence(&self, bx: &[f64], by: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        let mut tmp = vec![0.0; self.n];
        self.d[0].matvec_transpose(bx, &mut r);
        self.d[1].matvec_transpose(by, &mut tmp);
        for (a, b) in r.iter_mut().zip(&tmp) {
            *a += b;
        }
        r
    }

    /// `sqrt(sum_i r_i^2 / m_i)` over free test functions.
    pub fn weak_divergence_norm(&self, bx: &[f64], by: &[f64]) -> f64 {
        let r = self.weak_divergence(bx, by);
        (0..self.n)
            .filter(|&i| self.free[i])
            .map(|i| r[i] * r[i] / self.lumped[i])
            .sum::<f64>()
            .sqrt()
    }

    // Norm of `|D|^T |B|`: the size of the weak divergence without cancellation.
    fn cancellation_scale(&self, bx: &[f64], by: &[f64]) -> f64 {
        let mut acc = vec![0.0; self.n];
        for (m, b) in self.d.iter().zip([bx, by]) {
            for j in 0..self.n {
                for k in m.row_ptr[j]..m.row_ptr[j + 1] {
                    acc[m.col_idx[k]] += (m.values[k] * b[j]).abs();
                }
            }
        }
        (0..self.n).filter(|&i| self.free[i]).map(|i| acc[i] * acc[i]).sum::<f64>().sqrt()
    }

    fn gradient(&self, psi: &[f64]) -> [Vec<f64>; 2] {
        let mut gx = vec![0.0; self.n];
        let mut gy = vec![0.0; self.n];
        self.d[0].matvec(psi, &mut gx);
        self.d[1].matvec(psi, &mut gy);
        for j in 0..self.n {
            gx[j] /= self.lumped[j];
            gy[j] /= self.lumped[j];
        }
        [gx, gy]
    }

    fn apply_operator(&self, psi: &[f64], out: &mut [f64]) {
        let mut masked = psi.to_vec();
        for i in 0..self.n {
            if !self.free[i] {
                masked[i] = 0.0;
            }
        }
        let [gx, gy] = self.gradient(&masked);
        let r = self.weak_divergence(&gx, &gy);
        for i in 0..self.n {
            out[i] = if self.free[i] { r[i] } else { 0.0 };
        }
    }

    /// Projects `(bx, by)` in place and reports the weak divergence before and after.
    pub fn clean(&self, bx: &mut [f64], by: &mut [f64]) -> Result<CleanReport> {
        let before = self.weak_divergence_norm(bx, by);
        let mut rhs = self.weak_divergence(bx, by);
        for i in 0..self.n {
            if !self.free[i] {
                rhs[i] = 0.0;
            }
        }
        let mut psi = vec![0.0; self.n];
        let floor = 1e2 * f64::EPSILON * self.cancellation_scale(bx, by);
        let opts = CgOptions { deflate_constants: self.deflate, atol: self.cg.atol.max(floor), ..self.cg };
        let stats = cg_solve(|v, o| self.apply_operator(v, o), &self.diag, &rhs, &mut psi, opts)?;
        for i in 0..self.n {
            if !self.free[i] {
                psi[i] = 0.0;
            }
        }
        let [gx, gy] = self.gradient(&psi);
        for j in 0..self.n {
            bx[j] -= gx[j];
            by[j] -= gy[j];
        }
        let after = self.weak_divergence_norm(bx, by);
        Ok(CleanReport { before, after, iterations: stats.iterations })
    }

    /// Cleans the magnetic block of a component-major state and re-checks
    /// admissibility under the cleaner's energy update.
    pub fn clean_state(&self, u: &mut [f64]) -> Result<CleanReport> {
        let n = self.n;
        let mut bx = u[BX * n..(BX + 1) * n].to_vec();
        let mut by = u[BY * n..(BY + 1) * n].to_vec();
        let report = self.clean(&mut bx, &mut by)?;
        postclean_consistency(u, n, &bx, &by, self.energy)?;
        Ok(report)
    }
}

/// Replaces `B` in the state keeping `rho`, `m` and either `E` or the
/// internal energy; fails if the resulting internal energy is not positive.
pub fn postclean_consistency(u: &mut [f64], n: usize, bx: &[f64], by: &[f64], energy: EnergyUpdate) -> Result<()> {
    if energy == EnergyUpdate::KeepInternal {
        for i in 0..n {
            let (old_x, old_y) = (u[BX * n + i], u[BY * n + i]);
            u[EN * n + i] += 0.5 * (bx[i] * bx[i] + by[i] * by[i] - old_x * old_x - old_y * old_y);
        }
    }
    for i in 0..n {
        let st = ConservedState {
            rho: u[RHO * n + i],
            m: [u[MX * n + i], u[MY * n + i]],
            energy: u[EN * n + i],
            b: [bx[i], by[i]],
        };
        let rho_e = st.internal_energy();
        if !(rho_e > 0.0) {
            return Err(MhdError::NonpositiveInternalEnergy { rho: st.rho, rho_e }.at(format!("node {i} after cleaning")));
        }
    }
    u[BX * n..(BX + 1) * n].copy_from_slice(bx);
    u[BY * n..(BY + 1) * n].copy_from_slice(by);
    debug_assert_eq!(u.len(), NCOMP * n);
    Ok(())
}

/// `||div B_h||_{L2}` evaluated cell by cell.
pub fn divergence_l2(space: &FeSpace, bx: &[f64], by: &[f64]) -> f64 {
    let mut s = 0.0;
    space.quad_loop(|ctx| {
        let (_, gx) = FeSpace::eval_at(ctx, bx);
        let (_, gy) = FeSpace::eval_at(ctx, by);
        let div = gx[0] + gy[1];
        s += ctx.jxw * div * div;
    });
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{build_triangulated_rectangle, TrianglePattern};

    fn square(n: usize, periodic: bool) -> FeSpace {
        let m = build_triangulated_rectangle(n, n, [[0.0, 1.0], [0.0, 1.0]], TrianglePattern::Right).unwrap();
        FeSpace::new(m, 1, [periodic, periodic]).unwrap()
    }

    #[test]
    fn divergence_l2_values() {
        let s = square(4, false);
        let bx = s.interpolate(|p| p[0]);
        let zero = vec![0.0; s.n_dofs()];
        assert!((divergence_l2(&s, &bx, &zero) - 1.0).abs() < 1e-12);
        let c = vec![0.3; s.n_dofs()];
        assert_eq!(divergence_l2(&s, &c, &c), 0.0);
    }

    #[test]
    fn constant_field_unchanged() {
        let s = square(6, true);
        let mass = s.build_mass_operators();
        let cl = DivergenceCleaner::new(&s, &mass, true).unwrap();
        let mut bx = vec![0.4; s.n_dofs()];
        let mut by = vec![-1.1; s.n_dofs()];
        cl.clean(&mut bx, &mut by).unwrap();
        assert!(bx.iter().all(|v| (v - 0.4).abs() < 1e-10));
        assert!(by.iter().all(|v| (v + 1.1).abs() < 1e-10));
    }

    #[test]
    fn periodic_requires_pin() {
        let s = square(3, true);
        let mass = s.build_mass_operators();
        assert!(matches!(DivergenceCleaner::new(&s, &mass, false), Err(MhdError::NullspaceUnpinned)));
    }

    #[test]
    fn periodic_projection_idempotent() {
        let s = square(16, true);
        let mass = s.build_mass_operators();
        let cl = DivergenceCleaner::new(&s, &mass, true).unwrap();
        let tau = std::f64::consts::TAU;
        let mut bx = s.interpolate(|p| (tau * p[0]).sin() + 0.2 * (tau * p[1]).cos());
        let mut by = s.interpolate(|p| (tau * p[1]).cos() * (tau * p[0]).cos());
        let rep = cl.clean(&mut bx, &mut by).unwrap();
        assert!(rep.after < 1e-8 * rep.before);
        let (bx1, by1) = (bx.clone(), by.clone());
        cl.clean(&mut bx, &mut by).unwrap();
        let diff: f64 = bx.iter().zip(&bx1).chain(by.iter().zip(&by1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }

    #[test]
    fn consistency_update() {
        let n = 1;
        let mut u = vec![1.0, 0.0, 0.0, 2.0, 1.0, 0.0];
        postclean_consistency(&mut u, n, &[0.5], &[0.0], EnergyUpdate::KeepTotal).unwrap();
        assert_eq!(u, vec![1.0, 0.0, 0.0, 2.0, 0.5, 0.0]);
        let st = ConservedState::from_array(&[1.0, 0.0, 0.0, 2.0, 0.5, 0.0]);
        assert!(st.internal_energy() > 1.5);
        assert!(postclean_consistency(&mut u, n, &[2.0], &[0.0], EnergyUpdate::KeepTotal).is_err());
        let mut v = vec![1.0, 0.0, 0.0, 2.0, 1.0, 0.0];
        postclean_consistency(&mut v, n, &[2.0], &[0.0], EnergyUpdate::KeepInternal).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 3.5, 2.0, 0.0]);
        assert_eq!(u[BX], 0.5);
    }
}
