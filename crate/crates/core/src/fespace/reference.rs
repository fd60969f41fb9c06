//! Lagrange basis on the reference simplex, built from the inverse of the
//! monomial Vandermonde matrix at equispaced lattice nodes.

use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub dim: usize,
    pub degree: usize,
    /// Lattice nodes in reference coordinates.
    pub nodes: Vec<[f64; 2]>,
    exponents: Vec<[usize; 2]>,
    // coeffs[(j, i)]: coefficient of monomial j in basis function i
    coeffs: DMatrix<f64>,
}

impl ReferenceElement {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(dim == 1 || dim == 2);
        assert!((1..=3).contains(&degree));
        let k = degree as f64;
        let mut nodes = Vec::new();
        let mut exponents = Vec::new();
        if dim == 1 {
            for i in 0..=degree {
                nodes.push([i as f64 / k, 0.0]);
                exponents.push([i, 0]);
            }
        } else {
            for j in 0..=degree {
                for i in 0..=(degree - j) {
                    nodes.push([i as f64 / k, j as f64 / k]);
                    exponents.push([i, j]);
                }
            }
        }
        let n = nodes.len();
        let v = DMatrix::from_fn(n, n, |i, j| monomial(exponents[j], nodes[i]));
        let coeffs = v.try_inverse().expect("lattice Vandermonde is invertible");
        ReferenceElement { dim, degree, nodes, exponents, coeffs }
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, xi: [f64; 2]) -> Vec<f64> {
        let m: Vec<f64> = self.exponents.iter().map(|&e| monomial(e, xi)).collect();
        (0..self.n_local())
            .map(|i| (0..m.len()).map(|j| self.coeffs[(j, i)] * m[j]).sum())
            .collect()
    }

    pub fn eval_grad(&self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        let dm: Vec<[f64; 2]> = self.exponents.iter().map(|&e| monomial_grad(e, xi)).collect();
        (0..self.n_local())
            .map(|i| {
                let mut g = [0.0; 2];
                for (j, d) in dm.iter().enumerate() {
                    g[0] += self.coeffs[(j, i)] * d[0];
                    g[1] += self.coeffs[(j, i)] * d[1];
                }
                g
            })
            .collect()
    }
}

fn monomial(e: [usize; 2], x: [f64; 2]) -> f64 {
    x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32)
}

fn monomial_grad(e: [usize; 2], x: [f64; 2]) -> [f64; 2] {
    let dx = if e[0] == 0 { 0.0 } else { e[0] as f64 * x[0].powi(e[0] as i32 - 1) * x[1].powi(e[1] as i32) };
    let dy = if e[1] == 0 { 0.0 } else { e[1] as f64 * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32 - 1) };
    [dx, dy]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_property() {
        for dim in 1..=2 {
            for k in 1..=3 {
                let r = ReferenceElement::new(dim, k);
                for (a, node) in r.nodes.iter().enumerate() {
                    let phi = r.eval(*node);
                    for (b, v) in phi.iter().enumerate() {
                        let expect = if a == b { 1.0 } else { 0.0 };
                        assert!((v - expect).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn local_counts() {
        assert_eq!(ReferenceElement::new(1, 3).n_local(), 4);
        assert_eq!(ReferenceElement::new(2, 1).n_local(), 3);
        assert_eq!(ReferenceElement::new(2, 2).n_local(), 6);
        assert_eq!(ReferenceElement::new(2, 3).n_local(), 10);
    }

    #[test]
    fn gradients_match_differences() {
        let r = ReferenceElement::new(2, 3);
        let x = [0.21, 0.33];
        let h = 1e-6;
        let g = r.eval_grad(x);
        let px = r.eval([x[0] + h, x[1]]);
        let mx = r.eval([x[0] - h, x[1]]);
        let py = r.eval([x[0], x[1] + h]);
        let my = r.eval([x[0], x[1] - h]);
        for i in 0..r.n_local() {
            assert!((g[i][0] - (px[i] - mx[i]) / (2.0 * h)).abs() < 1e-7);
            assert!((g[i][1] - (py[i] - my[i]) / (2.0 * h)).abs() < 1e-7);
        }
    }
}
