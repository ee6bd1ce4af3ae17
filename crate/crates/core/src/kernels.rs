//! Funk–Hecke spectrum of the Riesz kernel `|ξ - η|^{-(n-2m)}` on `S^n`,
//! the Green operator `P_m^{-1}` and the Hardy–Littlewood–Sobolev form.
//!
//! The kernel acts diagonally on zonal harmonics with eigenvalues
//!
//! ```text
//! μ̂_k = |S^{n-1}| ∫ (2 - 2t)^{-(n-2m)/2} Ĝ_k(t) (1 - t²)^{(n-2)/2} dt,
//! ```
//!
//! `Ĝ_k = C_k^{(n-1)/2} / C_k^{(n-1)/2}(1)`. After cancelling powers of
//! `1 - t` the weight is `(1 - t)^{m-1} (1 + t)^{(n-2)/2}`, so a Gauss–Jacobi
//! rule with those exponents integrates each eigenvalue exactly once it has
//! more than `(k + 1) / 2` nodes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{ln_gamma, rel_diff, Real};
use crate::spectral::{
    sphere_area, zonal_harmonics_at, Discretization, GaussJacobi, GjmsSpectrum, SphereParams, ZonalFunction,
};

/// Funk–Hecke eigenvalues `μ̂_0..μ̂_K` of `|ξ - η|^{-(n-2m)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KernelSpectrum<T> {
    pub params: SphereParams,
    pub mu: Vec<T>,
    /// Relative change between the last two quadrature refinements.
    pub achieved_tol: T,
}

impl<T: Real> KernelSpectrum<T> {
    pub fn degree(&self) -> usize {
        self.mu.len() - 1
    }
}

/// Computes the kernel spectrum to relative tolerance `tol` by doubling the
/// Gauss–Jacobi order until two successive estimates agree.
pub fn funk_hecke_spectrum<T: Real>(params: SphereParams, degree: usize, tol: T) -> Result<KernelSpectrum<T>> {
    let n = params.n();
    let alpha = T::from_usize_lossy(params.m() - 1);
    let beta = (T::from_usize_lossy(n) - T::lit(2.0)) / T::lit(2.0);
    let prefactor = sphere_area::<T>(n - 1)? * T::lit(2.0).powf(-params.conformal_weight::<T>());
    let at_one = zonal_harmonics_at::<T>(n, degree, T::one());

    let estimate = |order: usize| -> Result<Vec<T>> {
        let gj = GaussJacobi::new(order, alpha, beta)?;
        let mut acc = vec![T::zero(); degree + 1];
        for (&t, &w) in gj.nodes.iter().zip(&gj.weights) {
            for (k, y) in zonal_harmonics_at::<T>(n, degree, t).into_iter().enumerate() {
                acc[k] = acc[k] + w * y / at_one[k];
            }
        }
        Ok(acc.into_iter().map(|a| a * prefactor).collect())
    };

    const MAX_ORDER: usize = 4096;
    let mut order = (degree + params.m()) / 2 + 2;
    let mut current = estimate(order)?;
    let achieved = loop {
        let finer = estimate(order * 2)?;
        let change = current
            .iter()
            .zip(&finer)
            .map(|(&a, &b)| rel_diff(a, b))
            .fold(T::zero(), T::max);
        current = finer;
        order *= 2;
        if change <= tol {
            break change;
        }
        if order >= MAX_ORDER {
            return Err(Error::Accuracy {
                requested: tol.to_f64_lossy(),
                achieved: change.to_f64_lossy(),
                context: format!("Funk-Hecke spectrum for {params}"),
            });
        }
    };

    for k in 0..=degree {
        if !(current[k] > T::zero()) || (k > 0 && !(current[k] < current[k - 1])) {
            return Err(Error::Inconsistency(format!(
                "kernel spectrum not positive decreasing at k = {k} for {params}"
            )));
        }
    }
    Ok(KernelSpectrum {
        params,
        mu: current,
        achieved_tol: achieved,
    })
}

/// Green normalizations: `c_n` for `(-Δ)^{-1}` on `R^n` and `g_mn` with
/// `P_m^{-1}` having kernel `g_mn |ξ - η|^{-(n-2m)}` on `S^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenConstants<T> {
    pub c_n: T,
    pub g_mn: T,
    /// `max_k |g_mn μ̂_k Λ_k - 1|`.
    pub max_defect: T,
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    let half = T::from_usize_lossy(n) / T::lit(2.0);
    (half * T::PI().ln() - ln_gamma(half + T::one())).exp()
}

/// Fixes `g_mn = 1 / (μ̂_0 Λ_0)` and checks `g_mn μ̂_k Λ_k = 1` for every `k`.
/// A defect beyond `1e-6` is reported as an inconsistency.
pub fn green_constant<T: Real>(kernel: &KernelSpectrum<T>, spectrum: &GjmsSpectrum<T>) -> Result<GreenConstants<T>> {
    if kernel.params != spectrum.params {
        return Err(domain("kernel and GJMS spectra belong to different (n, m)"));
    }
    let n = kernel.params.n();
    let nf = T::from_usize_lossy(n);
    let c_n = T::one() / (nf * (nf - T::lit(2.0)) * unit_ball_volume::<T>(n));
    let g_mn = T::one() / (kernel.mu[0] * spectrum.lambda[0]);
    let max_defect = kernel
        .mu
        .iter()
        .zip(&spectrum.lambda)
        .map(|(&mu, &l)| (g_mn * mu * l - T::one()).abs())
        .fold(T::zero(), T::max);
    if max_defect > T::lit(1e-6) {
        return Err(Error::Inconsistency(format!(
            "Green identity g*mu_k*Lambda_k = 1 violated by {:e} for {}",
            max_defect.to_f64_lossy(),
            kernel.params
        )));
    }
    Ok(GreenConstants { c_n, g_mn, max_defect })
}

/// `P_m^{-1} v`: `c_k ↦ c_k / Λ_k`.
pub fn green_apply<T: Real>(v: &ZonalFunction<T>, spectrum: &GjmsSpectrum<T>) -> Result<ZonalFunction<T>> {
    if v.degree() > spectrum.degree() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.degree(),
            got: v.degree(),
        });
    }
    let coeffs = v.coeffs().iter().zip(&spectrum.lambda).map(|(&c, &l)| c / l).collect();
    ZonalFunction::new(v.params(), coeffs)
}

/// `I(v) = ∬ v(ξ) v(η) |ξ - η|^{-(n-2m)} dσ dσ = Σ μ̂_k c_k²`.
pub fn hls_functional<T: Real>(v: &ZonalFunction<T>, kernel: &KernelSpectrum<T>) -> Result<T> {
    if v.degree() > kernel.degree() {
        return Err(Error::DimensionMismatch {
            expected: kernel.degree(),
            got: v.degree(),
        });
    }
    Ok(v.coeffs().iter().zip(&kernel.mu).map(|(&c, &mu)| mu * c * c).sum())
}

/// Outcome of the dual HLS maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DualResult<T> {
    /// Largest `g I(v) / ‖v‖²_{p'}` found.
    pub maximum: T,
    /// Value of the quotient at `v ≡ 1`.
    pub at_constant: T,
    /// Per-trial final quotient, trial 0 being the constant start.
    pub trial_values: Vec<T>,
    /// Distance to constants of the best maximizer.
    pub distance_to_constant: T,
    pub converged: bool,
}

/// Maximizes `g_mn I(v) / ‖v‖²_{p'}` over nonnegative zonal `v`,
/// `p' = p / (p - 1)`, from `trials` seeded starts (the first is `v ≡ 1`).
///
/// Each trial runs the monotone fixed-point ascent `v ← (P_m^{-1} v)^{p-1}`
/// on quadrature nodes, renormalized in `L^{p'}`.
pub fn hls_dual_ratio<T: Real>(
    params: SphereParams,
    p: T,
    trials: usize,
    seed: u64,
    degree: usize,
) -> Result<DualResult<T>> {
    let crit = params.critical_sobolev_exponent::<T>();
    if !(p > T::lit(2.0) && p < crit) {
        return Err(domain(format!("dual ratio needs 2 < p < {crit}, got {p}")));
    }
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let disc = Discretization::<T>::new(params, degree)?;
    let kernel = funk_hecke_spectrum(params, degree, T::lit(1e-12))?;
    let green = green_constant(&kernel, &disc.spectrum)?;
    let dual = p / (p - T::one());
    let area = disc.area();

    let quotient = |v: &[T]| -> Result<(T, Vec<T>)> {
        let c = disc.basis.analyze_raw(v)?;
        let energy: T = c
            .iter()
            .zip(&kernel.mu)
            .map(|(&ck, &mu)| green.g_mn * mu * ck * ck)
            .sum();
        let norm = crate::spectral::lp_norm_of_values(v, dual, &disc.basis)?;
        Ok((energy / (norm * norm), c))
    };

    let run = |trial: usize| -> Result<(T, T, bool)> {
        let mut v: Vec<T> = if trial == 0 {
            vec![T::one(); disc.order()]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let mut c = vec![T::zero(); degree + 1];
            c[0] = area.sqrt();
            for (k, ck) in c.iter_mut().enumerate().skip(1) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *ck = T::lit(z) * area.sqrt() / T::from_usize_lossy(1 + k * k);
            }
            disc.basis
                .synthesize_raw(&c)?
                .into_iter()
                .map(|x| x.max(T::zero()))
                .collect()
        };
        let (mut value, _) = quotient(&v)?;
        let mut converged = false;
        for _ in 0..2000 {
            let (_, c) = quotient(&v)?;
            let gc: Vec<T> = c
                .iter()
                .zip(&kernel.mu)
                .map(|(&ck, &mu)| green.g_mn * mu * ck)
                .collect();
            let gv = disc.basis.synthesize_raw(&gc)?;
            let mut next: Vec<T> = gv.into_iter().map(|x| x.max(T::zero()).powf(p - T::one())).collect();
            let norm = crate::spectral::lp_norm_of_values(&next, dual, &disc.basis)?;
            if !(norm > T::zero()) {
                break;
            }
            next.iter_mut().for_each(|x| *x = *x / norm);
            let (next_value, _) = quotient(&next)?;
            v = next;
            let done = (next_value - value).abs() <= T::lit(1e-15) * value.abs();
            value = value.max(next_value);
            if done {
                converged = true;
                break;
            }
        }
        let (_, c) = quotient(&v)?;
        let dist = crate::scalar::norm2(&c[1..]) / crate::scalar::norm2(&c);
        Ok((value, dist, converged))
    };

    let outcomes = (0..trials).into_par_iter().map(run).collect::<Result<Vec<_>>>()?;
    let &(maximum, distance_to_constant, _) = outcomes
        .iter()
        .fold(&outcomes[0], |best, o| if o.0 > best.0 { o } else { best });
    Ok(DualResult {
        maximum,
        at_constant: outcomes[0].0,
        trial_values: outcomes.iter().map(|o| o.0).collect(),
        distance_to_constant,
        converged: outcomes.iter().all(|o| o.2),
    })
}
