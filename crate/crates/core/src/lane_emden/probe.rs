use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nonlinearity::{constant_solution, Classification, Nonlinearity};
use super::solver::{solve_newton_with, SolutionKind, SolveResult};
use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::spectral::{Discretization, SphereParams, ZonalFunction};

/// Newton tolerance used by the probe.
pub const PROBE_TOL: f64 = 1e-10;
const PROBE_MAX_ITER: usize = 100;
const PERTURBATION: f64 = 0.5;

/// A converged, nonnegative, nonconstant solution. Kept in full for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Counterexample<T> {
    pub trial: usize,
    pub result: SolveResult<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrialOutcome<T> {
    pub trial: usize,
    pub converged: bool,
    pub classification: SolutionKind,
    pub residual: T,
    pub iters: usize,
    pub mean: T,
    pub negativity: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProbeReport<T> {
    pub params: SphereParams,
    pub nonlinearity: Nonlinearity<T>,
    pub degree: usize,
    pub trials: usize,
    pub seed: u64,
    /// Predicted constant solution, if a positive one exists.
    pub constant_value: Option<T>,
    pub converged: usize,
    pub non_converged: usize,
    /// Converged to `u ≡ 0`.
    pub trivial_zero: usize,
    /// Converged to a solution with a negative nodal value.
    pub sign_changing: usize,
    /// Converged nonnegative outcomes equal to the constant.
    pub constant_hits: usize,
    /// `constant_hits` over all converged nonnegative nontrivial outcomes.
    pub fraction_constant: T,
    /// Largest `|mean(u) - c| / c` over the constant hits.
    pub max_constant_error: T,
    pub counterexamples: Vec<Counterexample<T>>,
    /// For linear `f(t) = a t`: number of `k` with `Λ_k = a`, i.e. the
    /// dimension of the zonal solution space. No Newton runs are made.
    pub linear_kernel_dimension: Option<usize>,
    pub outcomes: Vec<TrialOutcome<T>>,
}

/// Trial starts: trial 0 is the constant (or `1` if there is no positive
/// constant), later trials add damped Gaussian modes, shrunk until the start
/// is positive at every node.
pub fn probe_starts<T: Real>(
    disc: &Discretization<T>,
    base_value: T,
    trials: usize,
    seed: u64,
) -> Result<Vec<ZonalFunction<T>>> {
    let params = disc.params();
    let k = disc.degree();
    let base = ZonalFunction::constant(params, k, base_value)?;
    (0..trials)
        .map(|trial| {
            if trial == 0 {
                return Ok(base.clone());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let c0 = base.coeffs()[0];
            let noise: Vec<T> = (0..=k)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    T::lit(PERTURBATION * z) * c0 / T::from_usize_lossy(1 + j * j)
                })
                .collect();
            let mut amp = T::one();
            loop {
                let coeffs: Vec<T> = base.coeffs().iter().zip(&noise).map(|(&b, &z)| b + amp * z).collect();
                let u = ZonalFunction::new(params, coeffs)?;
                let min = disc.basis.synthesize(&u)?.into_iter().fold(T::infinity(), T::min);
                if min > T::zero() && u.value_at(T::one()) > T::zero() && u.value_at(-T::one()) > T::zero() {
                    return Ok(u);
                }
                amp = amp * T::lit(0.5);
            }
        })
        .collect()
}

/// Newton from `trials` positive starts; tallies which solutions are reached.
pub fn uniqueness_probe<T: Real>(
    params: SphereParams,
    f: &Nonlinearity<T>,
    trials: usize,
    seed: u64,
    degree: usize,
) -> Result<ProbeReport<T>> {
    let disc = Discretization::<T>::new(params, degree)?;
    uniqueness_probe_with(&disc, f, trials, seed, T::lit(PROBE_TOL))
}

/// [`uniqueness_probe`] on a prebuilt discretization with Newton tolerance `tol`.
pub fn uniqueness_probe_with<T: Real>(
    disc: &Discretization<T>,
    f: &Nonlinearity<T>,
    trials: usize,
    seed: u64,
    tol: T,
) -> Result<ProbeReport<T>> {
    let params = disc.params();
    let degree = disc.degree();
    if !(tol > T::zero()) {
        return Err(domain("probe tolerance must be positive"));
    }
    if trials < 1 {
        return Err(domain("probe needs at least one trial"));
    }
    if f.classify(params) != Classification::Subcritical {
        return Err(domain(format!(
            "probe requires a subcritical nonlinearity, got max exponent {}",
            f.max_exponent()
        )));
    }
    let constant_value = constant_solution(params, f);
    let mut report = ProbeReport {
        params,
        nonlinearity: f.clone(),
        degree,
        trials,
        seed,
        constant_value,
        converged: 0,
        non_converged: 0,
        trivial_zero: 0,
        sign_changing: 0,
        constant_hits: 0,
        fraction_constant: T::zero(),
        max_constant_error: T::zero(),
        counterexamples: Vec::new(),
        linear_kernel_dimension: None,
        outcomes: Vec::new(),
    };
    if f.is_linear() {
        let a = f.linear_coefficient();
        let tol = T::lit(1e-12);
        let dim = disc
            .spectrum
            .lambda
            .iter()
            .filter(|&&l| (l - a).abs() <= tol * l)
            .count();
        report.linear_kernel_dimension = Some(dim);
        return Ok(report);
    }
    let base_value = constant_value.filter(|c| *c > T::zero()).unwrap_or(T::one());
    let starts = probe_starts(disc, base_value, trials, seed)?;
    let results = starts
        .par_iter()
        .map(|init| solve_newton_with(disc, f, init, tol, PROBE_MAX_ITER))
        .collect::<Result<Vec<_>>>()?;

    let zero_scale = starts[0].l2_norm();
    let mut nontrivial = 0usize;
    for (trial, r) in results.into_iter().enumerate() {
        let scale = r.solution.l2_norm();
        let mean = r.solution.mean();
        report.outcomes.push(TrialOutcome {
            trial,
            converged: r.converged,
            classification: r.classification,
            residual: r.residual,
            iters: r.iters,
            mean,
            negativity: r.negativity,
        });
        if !r.converged {
            report.non_converged += 1;
            continue;
        }
        report.converged += 1;
        // the zero solution is isolated, so a converged run near it is it
        if scale <= T::lit(1e-6) * zero_scale {
            report.trivial_zero += 1;
            continue;
        }
        let sup = r.negativity.abs().max(mean.abs());
        if r.negativity < -T::lit(1e-9) * sup {
            report.sign_changing += 1;
            continue;
        }
        nontrivial += 1;
        match (r.classification, constant_value) {
            (SolutionKind::Constant, Some(c)) if c > T::zero() => {
                report.constant_hits += 1;
                report.max_constant_error = report.max_constant_error.max((mean - c).abs() / c);
            }
            (SolutionKind::Constant, _) => report.constant_hits += 1,
            _ => report.counterexamples.push(Counterexample { trial, result: r }),
        }
    }
    report.fraction_constant = if nontrivial == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(report.constant_hits) / T::from_usize_lossy(nontrivial)
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize) -> SphereParams {
        SphereParams::new(n, m).unwrap()
    }

    #[test]
    fn single_trial_from_the_constant() {
        let f = Nonlinearity::power(3.0_f64).unwrap();
        let r = uniqueness_probe(params(3, 1), &f, 1, 7, 16).unwrap();
        assert_eq!((r.converged, r.constant_hits), (1, 1));
        assert_eq!(r.fraction_constant, 1.0);
        assert!(r.max_constant_error < 1e-12);
    }

    #[test]
    fn starts_are_positive_and_seeded() {
        let disc = Discretization::<f64>::new(params(5, 2), 16).unwrap();
        let a = probe_starts(&disc, 2.0, 6, 11).unwrap();
        let b = probe_starts(&disc, 2.0, 6, 11).unwrap();
        assert_eq!(a, b);
        let c = probe_starts(&disc, 2.0, 6, 12).unwrap();
        assert_ne!(a[1], c[1]);
        for u in &a {
            assert!(disc.basis.synthesize(u).unwrap().iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn small_probe_finds_only_the_constant() {
        let f: Nonlinearity<f64> = "1:1,1:2".parse().unwrap();
        let r = uniqueness_probe(params(5, 2), &f, 8, 3, 16).unwrap();
        assert!(r.converged >= 6, "{r:?}");
        assert!(r.counterexamples.is_empty());
        assert!(r.max_constant_error <= 1e-8);
    }

    #[test]
    fn linear_case_reports_kernel_dimension() {
        let pp = params(3, 1);
        let none = uniqueness_probe(pp, &Nonlinearity::power(1.0_f64).unwrap(), 4, 0, 8).unwrap();
        assert_eq!(none.linear_kernel_dimension, Some(0));
        assert!(none.outcomes.is_empty());
        // a = Λ_1 = 15/4 resonates with the degree-1 mode
        let f = Nonlinearity::new(vec![(3.75_f64, 1.0)]).unwrap();
        let one = uniqueness_probe(pp, &f, 4, 0, 8).unwrap();
        assert_eq!(one.linear_kernel_dimension, Some(1));
    }

    #[test]
    fn rejects_critical_nonlinearity() {
        let f = Nonlinearity::power(5.0_f64).unwrap();
        assert!(uniqueness_probe(params(3, 1), &f, 4, 0, 8).is_err());
    }
}
