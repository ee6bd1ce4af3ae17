//! Zonal solutions of `P_m u = f(u)` on `S^n`: Newton and Green-iteration
//! solvers, multistart uniqueness probes, and numerical checks of radial
//! monotonicity and super-polyharmonicity of the planar pullback.

mod linalg;
mod nonlinearity;
mod probe;
mod solver;
mod verify;

pub use nonlinearity::{constant_solution, Classification, Nonlinearity};
pub use probe::{
    probe_starts, uniqueness_probe, uniqueness_probe_with, Counterexample, ProbeReport, TrialOutcome, PROBE_TOL,
};
pub use solver::{
    lane_emden_residual, solve_green, solve_newton, solve_newton_with, SolutionKind, SolveResult, CONSTANT_THRESHOLD,
};
pub use verify::{
    chebyshev_radial_grid, verify_profile_monotone, verify_super_polyharmonic, verify_symmetry_monotonicity,
    LevelReport, MonotonicityReport, SuperPolyharmonicReport, MONOTONE_SLACK, SUPER_POLYHARMONIC_TOL,
};

#[cfg(test)]
mod tests {
    use crate::spectral::{build_quadrature, SphereParams, ZonalBasis};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // mean(u)^p <= mean(u^p) under the discrete rule for u >= 0, p >= 1
        #[test]
        fn discrete_jensen(raw in prop::collection::vec(-1.0f64..1.0, 7), p in 1.0f64..6.0) {
            let params = SphereParams::new(5, 2).unwrap();
            let rule = build_quadrature::<f64>(5, 20).unwrap();
            let basis = ZonalBasis::new(rule, params, 6).unwrap();
            let mut coeffs = raw.clone();
            coeffs[0] = 2.0 + raw[0].abs();
            let u = crate::spectral::ZonalFunction::new(params, coeffs).unwrap();
            let vals: Vec<f64> = basis.synthesize(&u).unwrap().iter().map(|v| v.max(0.0)).collect();
            let area = basis.rule().integrate_values(&vec![1.0; vals.len()]);
            let mean = basis.rule().integrate_values(&vals) / area;
            let mean_p = basis.rule().integrate_values(&vals.iter().map(|v| v.powf(p)).collect::<Vec<_>>()) / area;
            prop_assert!(mean.powf(p) <= mean_p * (1.0 + 1e-12));
        }
    }
}
