//! Spectrum of the GJMS operator `P_m` on zonal harmonics and the
//! quadratic and `L^p` functionals built on it.

use serde::{Deserialize, Serialize};

use super::basis::ZonalBasis;
use super::function::ZonalFunction;
use super::params::SphereParams;
use super::quadrature::build_quadrature;
use crate::error::{domain, Error, Result};
use crate::scalar::{gamma_ratio, rel_diff, Real};

/// Eigenvalues `Λ_0..Λ_K` of `P_m` on degree-`k` spherical harmonics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GjmsSpectrum<T> {
    pub params: SphereParams,
    pub lambda: Vec<T>,
}

impl<T: Real> GjmsSpectrum<T> {
    pub fn degree(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn ground(&self) -> T {
        self.lambda[0]
    }
}

/// Eigenvalue of the conformal Laplacian `-Δ + n(n-2)/4` on degree `k`.
pub fn conformal_laplacian_eigenvalue<T: Real>(n: usize, k: usize) -> T {
    let kf = T::from_usize_lossy(k);
    let nf = T::from_usize_lossy(n);
    kf * (kf + nf - T::one()) + nf * (nf - T::lit(2.0)) / T::lit(4.0)
}

/// `Λ_k = Π_{j=0}^{m-1} (μ_k - j(j+1))`, `μ_k = k(k+n-1) + n(n-2)/4`.
pub fn gjms_eigenvalue_product<T: Real>(params: SphereParams, k: usize) -> T {
    let mu = conformal_laplacian_eigenvalue::<T>(params.n(), k);
    (0..params.m())
        .map(|j| mu - T::from_usize_lossy(j * (j + 1)))
        .fold(T::one(), |acc, f| acc * f)
}

/// `Γ(k + n/2 + m) / Γ(k + n/2 - m)`.
pub fn gjms_eigenvalue_gamma<T: Real>(params: SphereParams, k: usize) -> T {
    let base = T::from_usize_lossy(k) + T::from_usize_lossy(params.n()) / T::lit(2.0);
    let m = T::from_usize_lossy(params.m());
    gamma_ratio(base + m, base - m)
}

/// Spectrum of `P_m` up to degree `K`, cross-checked against the Γ-ratio form.
pub fn gjms_eigenvalues<T: Real>(params: SphereParams, degree: usize) -> Result<GjmsSpectrum<T>> {
    let tol = T::lit(1e-10).max(T::lit(1e3) * T::epsilon());
    let mut lambda = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        let prod = gjms_eigenvalue_product::<T>(params, k);
        let via_gamma = gjms_eigenvalue_gamma::<T>(params, k);
        if rel_diff(prod, via_gamma) > tol {
            return Err(Error::Inconsistency(format!(
                "GJMS eigenvalue {k} for {params}: product {prod} vs gamma ratio {via_gamma}"
            )));
        }
        if !(prod > T::zero()) || lambda.last().is_some_and(|&prev| !(prod > prev)) {
            return Err(Error::Inconsistency(format!(
                "GJMS spectrum not positive increasing at k = {k} for {params}"
            )));
        }
        lambda.push(prod);
    }
    Ok(GjmsSpectrum { params, lambda })
}

/// `∫ P_m(u) u dσ = Σ Λ_k c_k²`.
pub fn quadratic_form<T: Real>(u: &ZonalFunction<T>, spectrum: &GjmsSpectrum<T>) -> Result<T> {
    if u.degree() > spectrum.degree() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.degree(),
            got: u.degree(),
        });
    }
    Ok(u.coeffs().iter().zip(&spectrum.lambda).map(|(&c, &l)| l * c * c).sum())
}

/// `(∫ |u|^p dσ)^{1/p}` by quadrature.
pub fn lp_norm<T: Real>(u: &ZonalFunction<T>, p: T, basis: &ZonalBasis<T>) -> Result<T> {
    let values = basis.synthesize(u)?;
    lp_norm_of_values(&values, p, basis)
}

pub(crate) fn lp_norm_of_values<T: Real>(values: &[T], p: T, basis: &ZonalBasis<T>) -> Result<T> {
    if !(p >= T::one()) {
        return Err(domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let integral = basis
        .rule()
        .integrate_values(&values.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>());
    Ok(integral.powf(T::one() / p))
}

/// Largest relative residual of `Δ Y_k + k(k+n-1) Y_k` on `1 <= k <= K`,
/// with the zonal Laplace–Beltrami operator `(1-t²) u'' - n t u'` applied
/// through the polynomial differentiation matrix on `Q` Gauss nodes.
pub fn laplace_beltrami_residual(n: usize, degree: usize, order: usize) -> Result<f64> {
    if n < 3 {
        return Err(domain("Laplace-Beltrami check needs n >= 3"));
    }
    let rule = build_quadrature::<f64>(n, order)?;
    // the basis depends on n only; m = 1 is admissible for every n >= 3
    let params = SphereParams::new(n, 1)?;
    let basis = ZonalBasis::new(rule, params, degree)?;
    let x = &basis.rule().nodes;
    let q = x.len();
    let bary: Vec<f64> = (0..q)
        .map(|j| 1.0 / (0..q).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>())
        .collect();
    let mut d = vec![vec![0.0; q]; q];
    for i in 0..q {
        let mut diag = 0.0;
        for j in 0..q {
            if i != j {
                d[i][j] = bary[j] / bary[i] / (x[i] - x[j]);
                diag -= d[i][j];
            }
        }
        d[i][i] = diag;
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        d.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    };
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for k in 1..=degree {
        let y: Vec<f64> = (0..q).map(|i| basis.value(i, k)).collect();
        let dy = apply(&y);
        let d2y = apply(&dy);
        let eig = (k * (k + n - 1)) as f64;
        let scale = eig * y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for i in 0..q {
            let lap = (1.0 - x[i] * x[i]) * d2y[i] - nf * x[i] * dy[i];
            worst = worst.max((lap + eig * y[i]).abs() / scale);
        }
    }
    Ok(worst)
}
