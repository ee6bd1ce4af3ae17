//! Orthonormal zonal harmonics on `S^n` and the nodal transforms
//! between coefficient space and quadrature nodes.

use super::function::ZonalFunction;
use super::params::SphereParams;
use super::quadrature::{sphere_area, QuadratureRule};
use crate::error::{Error, Result};
use crate::scalar::{ln_gamma, Real};

/// Values `Y_0(t)..Y_K(t)` of the L²(S^n)-orthonormal zonal harmonics.
///
/// `Y_k` is the Gegenbauer polynomial `C_k^{(n-1)/2}` rescaled to unit
/// L² norm with positive leading coefficient; computed by the three-term
/// recurrence of the orthonormal Jacobi family with `α = β = (n-2)/2`.
pub fn zonal_harmonics_at<T: Real>(n: usize, degree: usize, t: T) -> Vec<T> {
    let (p0, recs) = recurrence(n, degree);
    let mut out = Vec::with_capacity(degree + 1);
    out.push(p0);
    if degree >= 1 {
        out.push(t * p0 / recs[1]);
    }
    for k in 1..degree {
        let next = (t * out[k] - recs[k] * out[k - 1]) / recs[k + 1];
        out.push(next);
    }
    out
}

/// `(Y_0, [b_0 = 0, b_1, ..., b_K])`.
fn recurrence<T: Real>(n: usize, degree: usize) -> (T, Vec<T>) {
    let a = (T::from_usize_lossy(n) - T::lit(2.0)) / T::lit(2.0);
    let two = T::lit(2.0);
    let recs = (0..=degree)
        .map(|k| {
            if k == 0 {
                return T::zero();
            }
            let kf = T::from_usize_lossy(k);
            (kf * (kf + two * a) / ((two * kf + two * a - T::one()) * (two * kf + two * a + T::one()))).sqrt()
        })
        .collect();
    // ∫ (1-t²)^a dt = √π Γ(a+1) / Γ(a+3/2)
    let mass = (T::lit(0.5) * T::PI().ln() + ln_gamma(a + T::one()) - ln_gamma(a + T::lit(1.5))).exp();
    let outer = if n >= 2 {
        sphere_area::<T>(n - 1).expect("n >= 2")
    } else {
        T::one()
    };
    (T::one() / (mass * outer).sqrt(), recs)
}

/// Zonal harmonics tabulated at the nodes of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalBasis<T> {
    params: SphereParams,
    rule: QuadratureRule<T>,
    degree: usize,
    // row-major: values[i * (degree + 1) + k] = Y_k(t_i)
    values: Vec<T>,
}

impl<T: Real> ZonalBasis<T> {
    /// Tabulates `Y_0..Y_K` on the nodes of `rule`. Requires `K < Q`.
    pub fn new(rule: QuadratureRule<T>, params: SphereParams, degree: usize) -> Result<Self> {
        if degree >= rule.order() {
            return Err(Error::Aliasing {
                degree,
                nodes: rule.order(),
            });
        }
        if rule.n != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                got: rule.n,
            });
        }
        let values = rule
            .nodes
            .iter()
            .flat_map(|&t| zonal_harmonics_at(params.n(), degree, t))
            .collect();
        Ok(Self {
            params,
            rule,
            degree,
            values,
        })
    }

    pub fn params(&self) -> SphereParams {
        self.params
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> usize {
        self.rule.order()
    }

    /// `Y_k(t_i)`.
    #[inline]
    pub fn value(&self, node: usize, k: usize) -> T {
        self.values[node * (self.degree + 1) + k]
    }

    /// Row of basis values at node `i`.
    #[inline]
    pub fn row(&self, node: usize) -> &[T] {
        let w = self.degree + 1;
        &self.values[node * w..(node + 1) * w]
    }

    /// Discrete Gram matrix `G_{jk} = Σ_i w_i Y_j(t_i) Y_k(t_i)`.
    pub fn gram(&self) -> Vec<Vec<T>> {
        let w = self.degree + 1;
        let mut g = vec![vec![T::zero(); w]; w];
        for (i, &wi) in self.rule.weights.iter().enumerate() {
            let row = self.row(i);
            for j in 0..w {
                let a = wi * row[j];
                for k in j..w {
                    g[j][k] = g[j][k] + a * row[k];
                }
            }
        }
        for j in 0..w {
            for k in 0..j {
                g[j][k] = g[k][j];
            }
        }
        g
    }

    /// Projection of nodal samples onto `Y_0..Y_K`.
    pub fn analyze(&self, values: &[T]) -> Result<ZonalFunction<T>> {
        ZonalFunction::new(self.params, self.analyze_raw(values)?)
    }

    pub(crate) fn analyze_raw(&self, values: &[T]) -> Result<Vec<T>> {
        if values.len() != self.nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes(),
                got: values.len(),
            });
        }
        let mut c = vec![T::zero(); self.degree + 1];
        for (i, (&v, &w)) in values.iter().zip(&self.rule.weights).enumerate() {
            let a = v * w;
            for (ck, &y) in c.iter_mut().zip(self.row(i)) {
                *ck = *ck + a * y;
            }
        }
        Ok(c)
    }

    /// Values of `u` at the quadrature nodes.
    pub fn synthesize(&self, u: &ZonalFunction<T>) -> Result<Vec<T>> {
        if u.params().n() != self.params.n() {
            return Err(Error::DimensionMismatch {
                expected: self.params.n(),
                got: u.params().n(),
            });
        }
        self.synthesize_raw(u.coeffs())
    }

    pub(crate) fn synthesize_raw(&self, coeffs: &[T]) -> Result<Vec<T>> {
        if coeffs.len() > self.degree + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.degree + 1,
                got: coeffs.len(),
            });
        }
        Ok((0..self.nodes())
            .map(|i| self.row(i).iter().zip(coeffs).map(|(&y, &c)| y * c).sum())
            .collect())
    }

    /// `max_{jk} |G_{jk} - δ_{jk}|`.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.gram();
        let mut worst = T::zero();
        for (j, row) in g.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let target = if j == k { T::one() } else { T::zero() };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// Tabulates `Y_0..Y_K` for `params` on `rule`.
pub fn zonal_basis<T: Real>(rule: &QuadratureRule<T>, params: SphereParams, degree: usize) -> Result<ZonalBasis<T>> {
    ZonalBasis::new(rule.clone(), params, degree)
}

#[cfg(test)]
mod tests {
    use super::super::quadrature::build_quadrature;
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn basis(n: usize, m: usize, k: usize, q: usize) -> ZonalBasis<f64> {
        let rule = build_quadrature(n, q).unwrap();
        ZonalBasis::new(rule, SphereParams::new(n, m).unwrap(), k).unwrap()
    }

    #[test]
    fn y0_is_normalized_constant() {
        let b = basis(5, 2, 6, 16);
        let expect = 1.0 / sphere_area::<f64>(5).unwrap().sqrt();
        for i in 0..b.nodes() {
            assert_relative_eq!(b.value(i, 0), expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn gram_is_identity() {
        let b = basis(7, 3, 32, 72);
        assert!(b.orthonormality_defect() < 1e-10);
        let b = basis(3, 1, 2, 8);
        assert!(b.gram()[1][2].abs() < 1e-12);
    }

    #[test]
    fn s3_harmonics_are_chebyshev_second_kind() {
        // Y_k = U_k / (π √2) on S^3, with U_k(cos θ) = sin((k+1)θ)/sin θ
        for &th in &[0.3_f64, 1.1, 2.0, 2.9] {
            let ys = zonal_harmonics_at::<f64>(3, 12, th.cos());
            for (k, y) in ys.iter().enumerate() {
                let u = ((k as f64 + 1.0) * th).sin() / th.sin();
                assert_relative_eq!(*y, u / (PI * 2f64.sqrt()), max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn analyze_synthesize_round_trip() {
        let b = basis(5, 2, 16, 64);
        let p = b.params();
        let coeffs: Vec<f64> = (0..=16)
            .map(|k| ((k * 37 % 11) as f64 - 5.0) / (1.0 + k as f64))
            .collect();
        let u = ZonalFunction::new(p, coeffs.clone()).unwrap();
        let back = b.analyze(&b.synthesize(&u).unwrap()).unwrap();
        for (a, c) in back.coeffs().iter().zip(&coeffs) {
            assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_function_is_pure_degree_one() {
        let b = basis(3, 1, 8, 24);
        let vals: Vec<f64> = b.rule().nodes.clone();
        let u = b.analyze(&vals).unwrap();
        // oracle: ∫ t Y_1 dσ = ∫ t² dσ / ‖t‖ = ‖t‖_{L²}, with ∫_{S^3} t² dσ = |S^3|/4
        let norm_t = (2.0 * PI * PI / 4.0).sqrt();
        assert_relative_eq!(u.coeffs()[1], norm_t, max_relative = 1e-12);
        for (k, c) in u.coeffs().iter().enumerate() {
            if k != 1 {
                assert!(c.abs() < 1e-13, "c_{k} = {c}");
            }
        }
    }

    #[test]
    fn synthesize_constant_mode() {
        let b = basis(3, 1, 4, 12);
        let u = ZonalFunction::harmonic(b.params(), 4, 0).unwrap();
        let v = b.synthesize(&u).unwrap();
        let expect = (2.0 * PI * PI).powf(-0.5);
        assert!(v.iter().all(|x| (x - expect).abs() < 1e-14));
    }

    #[test]
    fn aliasing_and_mismatch_errors() {
        let rule = build_quadrature::<f64>(3, 8).unwrap();
        let p = SphereParams::new(3, 1).unwrap();
        assert!(matches!(
            ZonalBasis::new(rule.clone(), p, 8),
            Err(Error::Aliasing { .. })
        ));
        let b = ZonalBasis::new(rule, p, 4).unwrap();
        assert!(b.analyze(&[1.0; 5]).is_err());
        let big = ZonalFunction::<f64>::zero(p, 6);
        assert!(b.synthesize(&big).is_err());
    }
}
