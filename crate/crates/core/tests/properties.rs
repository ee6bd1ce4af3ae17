use gjms_core::conformal::{
    angle_from_radius, bubble_on_sphere, pullback_to_plane, radius_from_angle, sup_abs, BubbleParams,
};
use gjms_core::kernels::{funk_hecke_spectrum, hls_functional};
use gjms_core::lane_emden::{lane_emden_residual, solve_newton_with, Nonlinearity};
use gjms_core::rayleigh::{rayleigh_quotient, sharp_constant};
use gjms_core::scalar::ln_gamma;
use gjms_core::spectral::{
    build_quadrature, gjms_eigenvalues, lp_norm, quadratic_form, sphere_area, Discretization, SphereParams, ZonalBasis,
    ZonalFunction,
};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = SphereParams> {
    (1usize..=4, 0usize..=6).prop_map(|(m, extra)| SphereParams::new(2 * m + 1 + extra, m).unwrap())
}

fn damped(raw: &[f64]) -> Vec<f64> {
    raw.iter()
        .enumerate()
        .map(|(k, c)| c / (1.0 + (k * k) as f64))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quadrature_is_exact_on_moments(n in 3usize..10, order in 4usize..40, frac in 0.0f64..1.0) {
        let rule = build_quadrature::<f64>(n, order).unwrap();
        let j = ((2 * order - 1) as f64 * frac) as i32;
        let got = rule.integrate(|t| t.powi(j));
        let area = sphere_area::<f64>(n - 1).unwrap();
        if j % 2 == 1 {
            prop_assert!(got.abs() <= 1e-13 * area);
        } else {
            // |S^{n-1}| B((j+1)/2, n/2)
            let a = (j as f64 + 1.0) / 2.0;
            let b = n as f64 / 2.0;
            let want = area * (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp();
            prop_assert!(((got - want) / want).abs() <= 1e-12, "j={j}: {got} vs {want}");
        }
    }

    #[test]
    fn basis_is_orthonormal(n in 3usize..10, order in 8usize..60, frac in 0.0f64..1.0) {
        let params = SphereParams::new(n, 1).unwrap();
        let degree = ((order / 2) as f64 * frac) as usize;
        let basis = ZonalBasis::new(build_quadrature::<f64>(n, order).unwrap(), params, degree).unwrap();
        prop_assert!(basis.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn spectrum_positive_increasing(params in admissible(), degree in 0usize..80) {
        let s = gjms_eigenvalues::<f64>(params, degree).unwrap();
        prop_assert!(s.lambda[0] > 0.0);
        prop_assert!(s.lambda.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn spectral_gap(params in admissible(), raw in prop::collection::vec(-1.0f64..1.0, 10)) {
        let s = gjms_eigenvalues::<f64>(params, 9).unwrap();
        let u = ZonalFunction::new(params, damped(&raw)).unwrap();
        let q = quadratic_form(&u, &s).unwrap();
        let l2 = u.l2_norm().powi(2);
        let higher: f64 = u.coeffs()[1..].iter().map(|c| c * c).sum();
        // the excess controls the nonconstant part, so equality forces c_k = 0 for k >= 1
        prop_assert!(q - s.lambda[0] * l2 >= (s.lambda[1] - s.lambda[0]) * higher * (1.0 - 1e-12));
    }

    #[test]
    fn stereographic_round_trip(r in 0.0f64..1e3) {
        let t = angle_from_radius(r).unwrap();
        prop_assert!(t > -1.0 && t <= 1.0);
        let back = radius_from_angle(t).unwrap();
        // t ≈ -1 + 2/r² holds only ~1/r² relative information on r
        prop_assert!((back - r).abs() <= 1e-14 * r.max(1.0) * (1.0 + r * r));
    }

    #[test]
    fn angle_round_trip(t in -0.999f64..=1.0) {
        let back = angle_from_radius(radius_from_angle(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-14 / (1.0 + t));
    }

    #[test]
    fn constant_pulls_back_to_the_standard_profile(params in admissible(), r in 0.0f64..50.0) {
        let w = params.conformal_weight::<f64>();
        let v = ZonalFunction::constant(params, 4, 2f64.powf(-w)).unwrap();
        let prof = pullback_to_plane(&v, &[r]).unwrap();
        let want = (1.0 + r * r).powf(-w);
        prop_assert!((prof.values[0] - want).abs() <= 1e-12 * want.max(1e-300) + 1e-300);
    }

    #[test]
    fn pullback_decay_bound(params in admissible(), raw in prop::collection::vec(-1.0f64..1.0, 8)) {
        let v = ZonalFunction::new(params, damped(&raw)).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| (i as f64 * 0.07).exp() - 1.0).collect();
        let prof = pullback_to_plane(&v, &grid).unwrap();
        let w = params.conformal_weight::<f64>();
        let bound = 2f64.powf(w) * sup_abs(&v, 4001);
        // sup over a sample slightly underestimates the true sup
        prop_assert!(prof.decay_excess(bound) <= 1e-6 * bound.max(1.0));
    }

    #[test]
    fn hls_bounded_by_ground_mode(raw in prop::collection::vec(-1.0f64..1.0, 9), which in 0usize..3) {
        let params = [(3, 1), (5, 2), (7, 3)].map(|(n, m)| SphereParams::new(n, m).unwrap())[which];
        let kernel = funk_hecke_spectrum::<f64>(params, 8, 1e-10).unwrap();
        let v = ZonalFunction::new(params, damped(&raw)).unwrap();
        let i = hls_functional(&v, &kernel).unwrap();
        let higher: f64 = v.coeffs()[1..].iter().map(|c| c * c).sum();
        let excess = kernel.mu[0] * v.l2_norm().powi(2) - i;
        prop_assert!(excess >= (kernel.mu[0] - kernel.mu[1]) * higher * (1.0 - 1e-10) - 1e-12);
    }

    #[test]
    fn reported_residual_is_the_fixed_point_defect(raw in prop::collection::vec(-0.3f64..0.3, 9)) {
        let params = SphereParams::new(3, 1).unwrap();
        let disc = Discretization::<f64>::new(params, 12).unwrap();
        let f = Nonlinearity::power(3.0).unwrap();
        let mut coeffs = damped(&raw);
        coeffs.resize(13, 0.0);
        coeffs[0] = 0.866 * sphere_area::<f64>(3).unwrap().sqrt();
        let init = ZonalFunction::new(params, coeffs).unwrap();
        let r = solve_newton_with(&disc, &f, &init, 1e-10, 60).unwrap();
        let again: f64 = lane_emden_residual(&f, &r.solution, &disc).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((again - r.residual).abs() <= 1e-15 + 1e-12 * again);
        if r.converged {
            prop_assert!(r.residual <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn critical_norm_is_dilation_invariant(lambda in 0.25f64..4.0) {
        let params = SphereParams::new(3, 1).unwrap();
        let disc = Discretization::<f64>::new(params, 96).unwrap();
        let crit = params.critical_sobolev_exponent::<f64>();
        let norm = |l: f64| {
            let b = bubble_on_sphere(&BubbleParams::new(l, params).unwrap(), &disc.basis).unwrap();
            lp_norm(&b.function, crit, &disc.basis).unwrap()
        };
        let base = norm(1.0);
        prop_assert!(((norm(lambda) - base) / base).abs() <= 1e-6);
    }
}

#[test]
fn strictness_margin_grows_with_distance() {
    let params = SphereParams::new(3, 1).unwrap();
    let disc = Discretization::<f64>::new(params, 16).unwrap();
    let s = sharp_constant::<f64>(1, 3, 4.0).unwrap();
    let mut last = 0.0;
    for i in 1..=10 {
        let eps = 0.05 * i as f64;
        let mut u = ZonalFunction::constant(params, 16, 1.0).unwrap();
        u.coeffs_mut()[1] = eps * u.coeffs()[0];
        let margin = rayleigh_quotient(&u, 4.0, &disc).unwrap() - s;
        assert!(margin > last, "eps = {eps}: margin {margin} after {last}");
        if u.distance_to_constant() >= 0.1 {
            assert!(margin > 0.0);
        }
        last = margin;
    }
}
