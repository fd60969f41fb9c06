//! Quadrature rules on the reference interval `[0, 1]` and the reference
//! triangle with vertices `(0,0)`, `(1,0)`, `(0,1)`.

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
pub fn interval_rule(n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre_nodes(n);
    QuadratureRule {
        points: x.iter().map(|&xi| [0.5 * (xi + 1.0), 0.0]).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        exactness: 2 * n - 1,
    }
}

/// Interval rule exact for polynomials of degree `degree`.
pub fn interval_rule_for_degree(degree: usize) -> QuadratureRule {
    interval_rule(degree / 2 + 1)
}

/// Six-point symmetric rule, exact to degree 4.
pub fn triangle_dunavant4() -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    push_orbit3(&mut points, &mut weights, 0.108103018168070, 0.445948490915965, 0.223381589678011);
    push_orbit3(&mut points, &mut weights, 0.816847572980459, 0.091576213509771, 0.109951743655322);
    QuadratureRule { points, weights, exactness: 4 }
}

/// Seven-point symmetric rule, exact to degree 5.
pub fn triangle_dunavant5() -> QuadratureRule {
    let mut points = vec![[1.0 / 3.0, 1.0 / 3.0]];
    let mut weights = vec![0.5 * 0.225];
    push_orbit3(&mut points, &mut weights, 0.059715871789770, 0.470142064105115, 0.132394152788506);
    push_orbit3(&mut points, &mut weights, 0.797426985353087, 0.101286507323456, 0.125939180544827);
    QuadratureRule { points, weights, exactness: 5 }
}

// Barycentric orbit (a, b, b) with weight normalized to the unit triangle area 1/2.
fn push_orbit3(points: &mut Vec<[f64; 2]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    for bary in [[a, b, b], [b, a, b], [b, b, a]] {
        points.push([bary[1], bary[2]]);
        weights.push(0.5 * w);
    }
}

/// Collapsed (Duffy) tensor Gauss rule with `n` points per direction.
pub fn triangle_collapsed(n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre_nodes(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        let a = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let b = 0.5 * (x[j] + 1.0);
            points.push([a * (1.0 - b), b]);
            weights.push(0.25 * w[i] * w[j] * (1.0 - b));
        }
    }
    QuadratureRule { points, weights, exactness: 2 * n - 2 }
}

/// Triangle rule exact for polynomials of total degree `degree`.
pub fn triangle_rule_for_degree(degree: usize) -> QuadratureRule {
    match degree {
        0..=4 => triangle_dunavant4(),
        5 => triangle_dunavant5(),
        d => triangle_collapsed((d + 3) / 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // Exact integral of x^a y^b over the reference triangle.
    fn monomial_triangle(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn check_triangle(rule: &QuadratureRule) {
        for a in 0..=rule.exactness {
            for b in 0..=(rule.exactness - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = monomial_triangle(a, b);
                assert!((q - exact).abs() < 1e-13, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn dunavant_rules_exact() {
        check_triangle(&triangle_dunavant4());
        check_triangle(&triangle_dunavant5());
    }

    #[test]
    fn collapsed_rules_exact() {
        for n in 1..8 {
            check_triangle(&triangle_collapsed(n));
        }
    }

    #[test]
    fn dunavant5_misses_degree6() {
        let r = triangle_dunavant5();
        let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(6)).sum();
        assert!((q - monomial_triangle(6, 0)).abs() > 1e-8);
    }

    #[test]
    fn gauss_legendre_exact() {
        for n in 1..12 {
            let r = interval_rule(n);
            for d in 0..=(2 * n - 1) {
                let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(d as i32)).sum();
                assert!((q - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn gauss_legendre_two_points() {
        let (x, w) = gauss_legendre_nodes(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }
}
