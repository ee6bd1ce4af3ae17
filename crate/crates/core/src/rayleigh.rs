//! The subcritical Sobolev quotient `∫ P_m(u) u dσ / ‖u‖_p²`, its closed-form
//! infimum and a multistart minimizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{bubble_on_sphere, BubbleParams};
use crate::error::{domain, Error, Result};
use crate::scalar::{norm2, Real};
use crate::spectral::{
    gjms_eigenvalue_product, lp_norm_of_values, quadratic_form, sphere_area, Discretization, SphereParams,
    ZonalFunction,
};

/// Sharp constant `S_{m,n,p} = Λ_0 |S^n|^{1 - 2/p}`.
///
/// Defined on the closed range `2 <= p <= 2n/(n-2m)` so the endpoints can be
/// reported; the inequality itself is strict-subcritical.
pub fn sharp_constant<T: Real>(m: usize, n: usize, p: T) -> Result<T> {
    let params = SphereParams::new(n, m)?;
    let crit = params.critical_sobolev_exponent::<T>();
    if !(p >= T::lit(2.0) && p <= crit) {
        return Err(domain(format!("sharp constant needs 2 <= p <= {crit}, got {p}")));
    }
    let lambda0 = gjms_eigenvalue_product::<T>(params, 0);
    let area = sphere_area::<T>(n)?;
    Ok(lambda0 * area.powf(T::one() - T::lit(2.0) / p))
}

fn check_exponent<T: Real>(params: SphereParams, p: T) -> Result<()> {
    let crit = params.critical_sobolev_exponent::<T>();
    if !(p > T::lit(2.0) + T::lit(1e-3) && p < crit) {
        return Err(domain(format!("exponent must satisfy 2 + 1e-3 < p < {crit}, got {p}")));
    }
    Ok(())
}

/// `Q_m(u) / ‖u‖_p²`.
pub fn rayleigh_quotient<T: Real>(u: &ZonalFunction<T>, p: T, disc: &Discretization<T>) -> Result<T> {
    if !(p >= T::one()) {
        return Err(domain(format!("exponent must be >= 1, got {p}")));
    }
    if u.l2_norm() == T::zero() {
        return Err(Error::ZeroFunction);
    }
    let values = disc.basis.synthesize(u)?;
    let norm = lp_norm_of_values(&values, p, &disc.basis)?;
    Ok(quadratic_form(u, &disc.spectrum)? / (norm * norm))
}

/// Gradient of the quotient with respect to the coefficients `c_k`:
/// `2Λ_k c_k / ‖u‖_p² - 2 Q_m(u) ‖u‖_p^{-p-2} ⟨|u|^{p-2} u, Y_k⟩`.
pub fn rayleigh_gradient<T: Real>(u: &ZonalFunction<T>, p: T, disc: &Discretization<T>) -> Result<Vec<T>> {
    check_exponent(u.params(), p)?;
    Ok(value_and_gradient(u.coeffs(), p, disc)?.1)
}

fn value_and_gradient<T: Real>(c: &[T], p: T, disc: &Discretization<T>) -> Result<(T, Vec<T>)> {
    let values = disc.basis.synthesize_raw(c)?;
    let integral = disc
        .basis
        .rule()
        .integrate_values(&values.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>());
    if !(integral > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    let two = T::lit(2.0);
    let norm2p = integral.powf(two / p);
    let q: T = c.iter().zip(&disc.spectrum.lambda).map(|(&ck, &l)| l * ck * ck).sum();
    let value = q / norm2p;
    let nonlin: Vec<T> = values.iter().map(|&v| v.abs().powf(p - two) * v).collect();
    let proj = disc.basis.analyze_raw(&nonlin)?;
    let factor = two * q / (norm2p * integral);
    let grad = c
        .iter()
        .zip(&disc.spectrum.lambda)
        .zip(&proj)
        .map(|((&ck, &l), &pk)| two * l * ck / norm2p - factor * pk)
        .collect();
    Ok((value, grad))
}

/// Settings for [`minimize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OptimizerConfig<T> {
    pub params: SphereParams,
    pub p: T,
    pub degree: usize,
    /// Number of random starts, in addition to the constant and two bubbles.
    pub starts: usize,
    pub seed: u64,
    pub step0: T,
    pub tol_grad: T,
    pub max_iter: usize,
}

impl<T: Real> OptimizerConfig<T> {
    pub fn new(params: SphereParams, p: T) -> Self {
        Self {
            params,
            p,
            degree: 32,
            starts: 20,
            seed: 0,
            step0: T::one(),
            tol_grad: T::lit(1e-9),
            max_iter: 5000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.params, self.p)?;
        if self.starts < 1 {
            return Err(domain("need at least one random start"));
        }
        if !(self.tol_grad > T::zero()) || !(self.step0 > T::zero()) {
            return Err(domain("tol_grad and step0 must be positive"));
        }
        if self.degree < 1 {
            return Err(domain("truncation degree must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TracePoint<T> {
    pub iter: usize,
    pub value: T,
    pub grad_norm: T,
}

/// Outcome of one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StartSummary<T> {
    pub label: String,
    pub value: T,
    pub grad_norm: T,
    pub iters: usize,
    pub distance_to_constant: T,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MinimizationResult<T> {
    /// Best minimizer, normalized to `‖u‖_p = 1` with nonnegative mean.
    pub minimizer: ZonalFunction<T>,
    pub value: T,
    pub grad_norm: T,
    pub iters: usize,
    pub distance_to_constant: T,
    pub converged: bool,
    pub best_start: String,
    pub starts: Vec<StartSummary<T>>,
    /// Convergence trace of the best start.
    pub trace: Vec<TracePoint<T>>,
}

struct Run<T> {
    coeffs: Vec<T>,
    summary: StartSummary<T>,
    trace: Vec<TracePoint<T>>,
}

fn normalize<T: Real>(c: &mut [T], p: T, disc: &Discretization<T>) -> Result<()> {
    let values = disc.basis.synthesize_raw(c)?;
    let norm = lp_norm_of_values(&values, p, &disc.basis)?;
    if !(norm > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    c.iter_mut().for_each(|x| *x = *x / norm);
    Ok(())
}

// Gradient descent preconditioned by (2Λ)^{-1} (the H^m Riesz map), Armijo
// backtracking, renormalized to the unit L^p sphere after every step.
fn descend<T: Real>(
    label: String,
    mut c: Vec<T>,
    cfg: &OptimizerConfig<T>,
    disc: &Discretization<T>,
) -> Result<Run<T>> {
    let p = cfg.p;
    normalize(&mut c, p, disc)?;
    let mut trace = Vec::new();
    let (mut value, mut grad) = value_and_gradient(&c, p, disc)?;
    let mut iters = 0;
    let mut converged = false;
    loop {
        let grad_norm = norm2(&grad);
        trace.push(TracePoint {
            iter: iters,
            value,
            grad_norm,
        });
        if grad_norm <= cfg.tol_grad {
            converged = true;
            break;
        }
        if iters >= cfg.max_iter {
            break;
        }
        // ‖u‖_p = 1 here, so a unit step solves the quadratic part exactly
        let half = T::lit(0.5);
        let dir: Vec<T> = grad
            .iter()
            .zip(&disc.spectrum.lambda)
            .map(|(&g, &l)| -half * g / l)
            .collect();
        let slope: T = grad.iter().zip(&dir).map(|(&g, &d)| g * d).sum();
        let mut step = cfg.step0;
        let mut accepted = None;
        if -slope * step < T::lit(1e3) * T::epsilon() * value.abs() {
            // predicted decrease is below rounding in the value; Armijo cannot
            // discriminate, take the contraction step as is
            accepted = Some(c.iter().zip(&dir).map(|(&ci, &di)| ci + step * di).collect());
        }
        while accepted.is_none() && step > T::lit(1e-20) {
            let trial: Vec<T> = c.iter().zip(&dir).map(|(&ci, &di)| ci + step * di).collect();
            if let Ok((v, _)) = value_and_gradient(&trial, p, disc) {
                if v <= value + T::lit(1e-4) * step * slope {
                    accepted = Some(trial);
                    break;
                }
            }
            step = step * T::lit(0.5);
        }
        let Some(mut next) = accepted else {
            // no decrease representable in floating point
            break;
        };
        normalize(&mut next, p, disc)?;
        c = next;
        (value, grad) = value_and_gradient(&c, p, disc)?;
        iters += 1;
    }
    if c[0] < T::zero() {
        c.iter_mut().for_each(|x| *x = -*x);
        grad.iter_mut().for_each(|x| *x = -*x);
    }
    let total = norm2(&c);
    let summary = StartSummary {
        label,
        value,
        grad_norm: norm2(&grad),
        iters,
        distance_to_constant: norm2(&c[1..]) / total,
        converged,
    };
    Ok(Run {
        coeffs: c,
        summary,
        trace,
    })
}

/// Initial coefficient vectors: the constant, bubbles with `λ = 2, 4`, then
/// `cfg.starts` seeded Gaussian starts damped by `1 / (1 + k²)`.
pub fn initial_points<T: Real>(cfg: &OptimizerConfig<T>, disc: &Discretization<T>) -> Result<Vec<(String, Vec<T>)>> {
    let k = cfg.degree;
    let mut out = Vec::with_capacity(cfg.starts + 3);
    let mut constant = vec![T::zero(); k + 1];
    constant[0] = T::one();
    out.push(("constant".to_string(), constant));
    for lambda in [2.0, 4.0] {
        let b = BubbleParams::new(T::lit(lambda), cfg.params)?;
        let e = bubble_on_sphere(&b, &disc.basis)?;
        out.push((format!("bubble({lambda})"), e.function.into_coeffs()));
    }
    for i in 0..cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64 + 1);
        let c = (0..=k)
            .map(|j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                T::lit(z) / T::from_usize_lossy(1 + j * j)
            })
            .collect();
        out.push((format!("random({i})"), c));
    }
    Ok(out)
}

/// Best-of-multistart minimization of the quotient over zonal `u`.
pub fn minimize<T: Real>(cfg: &OptimizerConfig<T>) -> Result<MinimizationResult<T>> {
    cfg.validate()?;
    let disc = Discretization::<T>::new(cfg.params, cfg.degree)?;
    minimize_with(cfg, &disc)
}

/// [`minimize`] on a prebuilt discretization of matching degree.
pub fn minimize_with<T: Real>(cfg: &OptimizerConfig<T>, disc: &Discretization<T>) -> Result<MinimizationResult<T>> {
    cfg.validate()?;
    if disc.degree() != cfg.degree || disc.params() != cfg.params {
        return Err(domain("discretization does not match the optimizer configuration"));
    }
    let starts = initial_points(cfg, disc)?;
    let runs = starts
        .into_par_iter()
        .map(|(label, c)| descend(label, c, cfg, disc))
        .collect::<Result<Vec<_>>>()?;
    let best = runs.iter().enumerate().fold(
        0,
        |b, (i, r)| if r.summary.value < runs[b].summary.value { i } else { b },
    );
    let starts: Vec<StartSummary<T>> = runs.iter().map(|r| r.summary.clone()).collect();
    let Run { coeffs, summary, trace } = runs.into_iter().nth(best).expect("at least one start");
    Ok(MinimizationResult {
        minimizer: ZonalFunction::new(cfg.params, coeffs)?,
        value: summary.value,
        grad_norm: summary.grad_norm,
        iters: summary.iters,
        distance_to_constant: summary.distance_to_constant,
        converged: summary.converged,
        best_start: summary.label,
        starts,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(n: usize, m: usize) -> SphereParams {
        SphereParams::new(n, m).unwrap()
    }

    #[test]
    fn sharp_constant_values() {
        let s = sharp_constant::<f64>(1, 3, 4.0).unwrap();
        assert_relative_eq!(s, 0.75 * 2f64.sqrt() * PI, max_relative = 1e-14);
        assert!((s - 3.33216).abs() < 1e-5);
        let s = sharp_constant::<f64>(2, 5, 2.5).unwrap();
        let area5 = PI.powi(3); // |S^5| = π³
        assert_relative_eq!(s, 105.0 / 16.0 * area5.powf(0.2), max_relative = 1e-14);
        assert!((s - 13.0425).abs() < 1e-4);
        assert!(sharp_constant::<f64>(1, 3, 7.0).is_err());
        assert!(sharp_constant::<f64>(1, 3, 1.5).is_err());
        assert!(sharp_constant::<f64>(2, 4, 3.0).is_err());
    }

    #[test]
    fn critical_endpoint_continuity() {
        for (m, n) in [(1, 3), (2, 5), (3, 7)] {
            let crit = 2.0 * n as f64 / (n - 2 * m) as f64;
            let end = sharp_constant::<f64>(m, n, crit).unwrap();
            let lambda0 = gjms_eigenvalue_product::<f64>(params(n, m), 0);
            let beckner = lambda0 * sphere_area::<f64>(n).unwrap().powf(2.0 * m as f64 / n as f64);
            assert_relative_eq!(end, beckner, max_relative = 1e-14);
            let near = sharp_constant::<f64>(m, n, crit - 1e-9).unwrap();
            assert!((near - end).abs() < 1e-6 * end);
        }
    }

    #[test]
    fn quotient_examples() {
        let p = params(3, 1);
        let d = Discretization::<f64>::new(p, 16).unwrap();
        let one = ZonalFunction::constant(p, 16, 1.7).unwrap();
        let s = sharp_constant::<f64>(1, 3, 4.0).unwrap();
        assert_relative_eq!(rayleigh_quotient(&one, 4.0, &d).unwrap(), s, max_relative = 1e-13);
        let y1 = ZonalFunction::harmonic(p, 16, 1).unwrap();
        assert!(rayleigh_quotient(&y1, 4.0, &d).unwrap() > s);
        let u = ZonalFunction::new(p, vec![1.0, 0.2, -0.1, 0.05])
            .unwrap()
            .with_degree(16);
        let r = rayleigh_quotient(&u, 4.0, &d).unwrap();
        assert_relative_eq!(
            rayleigh_quotient(&u.scaled(-3.5), 4.0, &d).unwrap(),
            r,
            max_relative = 1e-13
        );
        assert_eq!(
            rayleigh_quotient(&ZonalFunction::zero(p, 16), 4.0, &d),
            Err(Error::ZeroFunction)
        );
    }

    #[test]
    fn gradient_vanishes_at_constants_and_is_euler_orthogonal() {
        let p = params(5, 2);
        let d = Discretization::<f64>::new(p, 12).unwrap();
        let c = ZonalFunction::constant(p, 12, 0.8).unwrap();
        let g = rayleigh_gradient(&c, 2.5, &d).unwrap();
        assert!(norm2(&g) < 1e-10);

        let u = ZonalFunction::new(p, vec![1.0, 0.3, -0.2, 0.1, 0.05])
            .unwrap()
            .with_degree(12);
        let g = rayleigh_gradient(&u, 2.5, &d).unwrap();
        let euler: f64 = g.iter().zip(u.coeffs()).map(|(a, b)| a * b).sum();
        assert!(euler.abs() < 1e-10 * norm2(&g) * u.l2_norm());
        assert!(rayleigh_gradient(&u, 2.0005, &d).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = params(3, 1);
        let d = Discretization::<f64>::new(p, 10).unwrap();
        let u = ZonalFunction::new(p, vec![1.2, -0.4, 0.3, 0.1, -0.05, 0.02])
            .unwrap()
            .with_degree(10);
        let g = rayleigh_gradient(&u, 4.0, &d).unwrap();
        let h = 1e-5;
        for k in 0..=10 {
            let mut plus = u.clone();
            plus.coeffs_mut()[k] += h;
            let mut minus = u.clone();
            minus.coeffs_mut()[k] -= h;
            let fd =
                (rayleigh_quotient(&plus, 4.0, &d).unwrap() - rayleigh_quotient(&minus, 4.0, &d).unwrap()) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-6 * norm2(&g), "k = {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn constant_start_converges_immediately() {
        let mut cfg = OptimizerConfig::new(params(3, 1), 4.0_f64);
        cfg.starts = 1;
        cfg.degree = 16;
        let r = minimize(&cfg).unwrap();
        let constant = r.starts.iter().find(|s| s.label == "constant").unwrap();
        assert!(constant.iters <= 1);
        assert!(constant.converged);
    }

    #[test]
    fn config_validation() {
        let mut cfg = OptimizerConfig::new(params(3, 1), 6.0_f64);
        assert!(cfg.validate().is_err());
        cfg.p = 2.0005;
        assert!(cfg.validate().is_err());
        cfg.p = 3.0;
        cfg.starts = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn minimize_small_case() {
        let mut cfg = OptimizerConfig::new(params(5, 2), 2.5_f64);
        cfg.degree = 16;
        cfg.starts = 4;
        let r = minimize(&cfg).unwrap();
        let s = sharp_constant::<f64>(2, 5, 2.5).unwrap();
        assert!(((r.value - s) / s).abs() < 1e-6);
        assert!(r.distance_to_constant < 1e-5);
        assert!(r.starts.iter().all(|s| s.converged), "{:?}", r.starts);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn quotient_bounded_below_by_sharp_constant(
            raw in prop::collection::vec(-1.0f64..1.0, 9),
            which in 0usize..3,
            t in 0.05f64..0.95,
        ) {
            let (m, n) = [(1, 3), (2, 5), (1, 4)][which];
            let pp = params(n, m);
            let crit = pp.critical_sobolev_exponent::<f64>();
            let p = 2.0 + 1e-3 + t * (crit - 2.0 - 2e-3);
            let d = Discretization::<f64>::new(pp, 8).unwrap();
            let coeffs: Vec<f64> = raw.iter().enumerate().map(|(k, c)| c / (1.0 + (k * k) as f64)).collect();
            prop_assume!(norm2(&coeffs) > 1e-3);
            let u = ZonalFunction::new(pp, coeffs).unwrap();
            let s = sharp_constant::<f64>(m, n, p).unwrap();
            prop_assert!(rayleigh_quotient(&u, p, &d).unwrap() >= s * (1.0 - 1e-8));
        }
    }
}
