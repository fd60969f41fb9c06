use mhd_fem::thermo::*;
use proptest::prelude::*;

fn gamma() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.4, 5.0 / 3.0, 2.0])
}

prop_compose! {
    fn admissible()(
        log_rho in -2.0f64..1.0,
        log_p in -3.0f64..3.0,
        u in prop::array::uniform2(-5.0f64..5.0),
        b in prop::array::uniform2(-5.0f64..5.0),
    ) -> (f64, [f64; 2], f64, [f64; 2]) {
        (10f64.powf(log_rho), u, 10f64.powf(log_p), b)
    }
}

fn entropy_function() -> impl Strategy<Value = EntropyFunction> {
    prop_oneof![
        (-2.0f64..2.0, -1.0f64..1.0).prop_map(|(a, b)| EntropyFunction::Linear { a, b }),
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| EntropyFunction::Tanh { a, b }),
        (-3.0f64..3.0).prop_map(|k| EntropyFunction::Exp { k }),
        (-3.0f64..3.0).prop_map(|k| EntropyFunction::NegExp { k }),
    ]
}

/// `-rho f(s)` from the conserved variables, written out independently.
fn eta(u: &[f64; 6], gamma: f64, f: &EntropyFunction) -> f64 {
    let rho = u[0];
    let rho_e = u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / rho - 0.5 * (u[4] * u[4] + u[5] * u[5]);
    let p = (gamma - 1.0) * rho_e;
    let s = (p / rho.powf(gamma)).ln();
    -rho * f.eval(s).0
}

/// Steps small against both the variable and the internal energy it feeds.
fn fd_steps(u: &[f64; 6]) -> [f64; 6] {
    let rho = u[0];
    let vel = [u[1] / rho, u[2] / rho];
    let rho_e = u[3] - 0.5 * (u[1] * vel[0] + u[2] * vel[1]) - 0.5 * (u[4] * u[4] + u[5] * u[5]);
    let sens = [0.5 * (vel[0] * vel[0] + vel[1] * vel[1]), vel[0].abs(), vel[1].abs(), 1.0, u[4].abs(), u[5].abs()];
    std::array::from_fn(|c| 1e-4 * (u[c].abs().max(0.1)).min(rho_e / sens[c].max(1e-300)))
}

fn fd_hessian(u: &[f64; 6], gamma: f64, f: &EntropyFunction) -> [[f64; 6]; 6] {
    let h = fd_steps(u);
    let at = |a: usize, sa: f64, b: usize, sb: f64| {
        let mut v = *u;
        v[a] += sa * h[a];
        v[b] += sb * h[b];
        eta(&v, gamma, f)
    };
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            (at(a, 1.0, b, 1.0) - at(a, 1.0, b, -1.0) - at(a, -1.0, b, 1.0) + at(a, -1.0, b, -1.0)) / (4.0 * h[a] * h[b])
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn j1_is_negative_definite(g in gamma(), (rho, u, p, b) in admissible(), eps in 1e-3f64..10.0) {
        let gas = GasModel::with_gamma(g).unwrap();
        let st = conserved_from_primitive(rho, u, p, b, &gas).unwrap();
        let prim = primitive_from_conserved(&st, &gas).unwrap();
        let j = j1_matrix(prim.rho, prim.e, &gas, eps).unwrap();
        prop_assert!(j.trace() < 0.0);
        prop_assert!(j.determinant() > 0.0);
        let ev = j.symmetric_eigenvalues();
        prop_assert!(ev[0] < 0.0 && ev[1] < 0.0);
    }

    #[test]
    fn primitive_round_trip(g in gamma(), (rho, u, p, b) in admissible()) {
        let gas = GasModel::with_gamma(g).unwrap();
        let st = conserved_from_primitive(rho, u, p, b, &gas).unwrap();
        let prim = primitive_from_conserved(&st, &gas).unwrap();
        prop_assert!((prim.p - p).abs() <= 1e-9 * (p + st.energy));
        prop_assert!((prim.rho - rho).abs() == 0.0);
        prop_assert!(prim.e > 0.0 && prim.temperature > 0.0);
    }

    #[test]
    fn fast_speed_bounds(g in gamma(), (rho, _u, p, b) in admissible(), theta in 0.0f64..std::f64::consts::TAU) {
        let gas = GasModel::with_gamma(g).unwrap();
        let n = [theta.cos(), theta.sin()];
        let cf = fast_speed(rho, p, b, n, &gas).unwrap();
        let a2 = g * p / rho;
        let va2 = (b[0] * b[0] + b[1] * b[1]) / rho;
        prop_assert!(cf * cf >= a2.max(va2) * (1.0 - 1e-12));
        prop_assert!(cf * cf <= (a2 + va2) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3_000))]

    #[test]
    fn convexity_matches_harten_conditions(g in gamma(), (rho, u, p, b) in admissible(), f in entropy_function()) {
        let gas = GasModel::with_gamma(g).unwrap();
        let st = conserved_from_primitive(rho, u, p, b, &gas).unwrap();
        let s = specific_entropy(rho, p, &gas).unwrap();
        let (_, f1, f2) = f.eval(s);
        // skip the measure-zero neighbourhood of the boundary of the class
        prop_assume!(f1.abs() > 1e-6 && (f1 / gas.c_p() - f2).abs() > 1e-6);
        let r = generalized_entropy_convexity_check(&st, &gas, &f).unwrap();
        prop_assert_eq!(r.cond1, f1 > 0.0);
        prop_assert_eq!(r.hessian_pd, r.cond1 && r.cond2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hessian_matches_finite_differences(g in gamma(), (rho, u, p, b) in admissible(), f in entropy_function()) {
        let gas = GasModel::with_gamma(g).unwrap();
        let st = conserved_from_primitive(rho, u, p, b, &gas).unwrap();
        let h = entropy_hessian(&st, &gas, &f).unwrap();
        let fd = fd_hessian(&st.to_array(), g, &f);
        let (mut num, mut den) = (0.0, 0.0);
        for a in 0..6 {
            for c in 0..6 {
                num += (fd[a][c] - h[(a, c)]).powi(2);
                den += h[(a, c)].powi(2);
            }
        }
        // rounding floor of the central differences; skip states where it
        // swamps the Hessian (saturated tanh or exp profiles)
        let steps = fd_steps(&st.to_array());
        let scale = eta(&st.to_array(), g, &f).abs();
        let noise: f64 = (0..36).map(|k| (f64::EPSILON * scale / (steps[k / 6] * steps[k % 6])).powi(2)).sum();
        prop_assume!(noise.sqrt() <= 1e-6 * den.sqrt());
        prop_assert!((num / den).sqrt() <= 1e-4, "relative error {}", (num / den).sqrt());
    }

    #[test]
    fn entropy_derivatives_match_finite_differences(g in gamma(), log_rho in -2.0f64..1.0, log_e in -2.0f64..2.0) {
        let gas = GasModel::with_gamma(g).unwrap();
        let (rho, e) = (10f64.powf(log_rho), 10f64.powf(log_e));
        let s = |r: f64, e: f64| specific_entropy(r, (g - 1.0) * r * e, &gas).unwrap();
        let d = entropy_derivatives(rho, e, &gas).unwrap();
        let (hr, he) = (1e-5 * rho, 1e-5 * e);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        prop_assert!(rel((s(rho + hr, e) - s(rho - hr, e)) / (2.0 * hr), d.s_rho) <= 1e-6);
        prop_assert!(rel((s(rho, e + he) - s(rho, e - he)) / (2.0 * he), d.s_e) <= 1e-6);
        let s_rr = (s(rho + hr, e) - 2.0 * s(rho, e) + s(rho - hr, e)) / (hr * hr);
        let s_ee = (s(rho, e + he) - 2.0 * s(rho, e) + s(rho, e - he)) / (he * he);
        prop_assert!(rel(s_rr, d.s_rho_rho) <= 1e-4);
        prop_assert!(rel(s_ee, d.s_e_e) <= 1e-4);
        let s_re = (s(rho + hr, e + he) - s(rho + hr, e - he) - s(rho - hr, e + he) + s(rho - hr, e - he)) / (4.0 * hr * he);
        prop_assert!(s_re.abs() <= 1e-4 * (d.s_rho_rho * rho * rho).abs().max(d.s_e_e.abs() * e * e) / (rho * e));
    }
}

#[test]
fn steep_exponential_is_not_convex() {
    // f = exp(k s) with k > 1/c_p violates f'/c_p - f'' > 0 everywhere
    let gas = GasModel::with_gamma(1.4).unwrap();
    let st = conserved_from_primitive(1.0, [0.2, -0.1], 1.0, [0.3, 0.4], &gas).unwrap();
    let r = generalized_entropy_convexity_check(&st, &gas, &EntropyFunction::Exp { k: 2.0 }).unwrap();
    assert!(r.cond1 && !r.cond2 && !r.hessian_pd);
}
