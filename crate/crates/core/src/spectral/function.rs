use serde::{Deserialize, Serialize};

use super::basis::zonal_harmonics_at;
use super::params::SphereParams;
use crate::error::{domain, Error, Result};
use crate::scalar::{norm2, Real};

/// A zonal function on `S^n`, stored as coefficients `c_0..c_K` in the
/// L²-orthonormal zonal harmonic basis `Y_0..Y_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ZonalRepr<T>", try_from = "ZonalRepr<T>", bound = "T: Real")]
pub struct ZonalFunction<T> {
    params: SphereParams,
    coeffs: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct ZonalRepr<T> {
    n: usize,
    m: usize,
    #[serde(rename = "K")]
    k: usize,
    coeffs: Vec<T>,
}

impl<T: Real> From<ZonalFunction<T>> for ZonalRepr<T> {
    fn from(u: ZonalFunction<T>) -> Self {
        ZonalRepr {
            n: u.params.n(),
            m: u.params.m(),
            k: u.degree(),
            coeffs: u.coeffs,
        }
    }
}

impl<T: Real> TryFrom<ZonalRepr<T>> for ZonalFunction<T> {
    type Error = Error;
    fn try_from(r: ZonalRepr<T>) -> Result<Self> {
        if r.coeffs.len() != r.k + 1 {
            return Err(Error::DimensionMismatch {
                expected: r.k + 1,
                got: r.coeffs.len(),
            });
        }
        ZonalFunction::new(SphereParams::new(r.n, r.m)?, r.coeffs)
    }
}

impl<T: Real> ZonalFunction<T> {
    pub fn new(params: SphereParams, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("a zonal function needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(domain("non-finite coefficient"));
        }
        Ok(Self { params, coeffs })
    }

    pub fn zero(params: SphereParams, degree: usize) -> Self {
        Self {
            params,
            coeffs: vec![T::zero(); degree + 1],
        }
    }

    /// The constant function with pointwise value `value`.
    pub fn constant(params: SphereParams, degree: usize, value: T) -> Result<Self> {
        let area = super::sphere_area::<T>(params.n())?;
        let mut u = Self::zero(params, degree);
        u.coeffs[0] = value * area.sqrt();
        Ok(u)
    }

    /// The basis function `Y_k` itself.
    pub fn harmonic(params: SphereParams, degree: usize, k: usize) -> Result<Self> {
        if k > degree {
            return Err(Error::DimensionMismatch {
                expected: degree,
                got: k,
            });
        }
        let mut u = Self::zero(params, degree);
        u.coeffs[k] = T::one();
        Ok(u)
    }

    pub fn params(&self) -> SphereParams {
        self.params
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Truncation degree `K`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `‖u‖_{L²(S^n)}`, by Parseval.
    pub fn l2_norm(&self) -> T {
        norm2(&self.coeffs)
    }

    /// Mean value over the sphere.
    pub fn mean(&self) -> T {
        let area = super::sphere_area::<T>(self.params.n()).expect("n >= 3");
        self.coeffs[0] / area.sqrt()
    }

    /// `‖u - mean(u)‖_{L²} / ‖u‖_{L²}`, in `[0, 1]`; zero for `u = 0`.
    pub fn distance_to_constant(&self) -> T {
        let total = self.l2_norm();
        if total == T::zero() {
            return T::zero();
        }
        norm2(&self.coeffs[1..]) / total
    }

    /// Pointwise evaluation at `t = cos θ`.
    pub fn value_at(&self, t: T) -> T {
        zonal_harmonics_at(self.params.n(), self.degree(), t)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(y, &c)| y * c)
            .sum()
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            params: self.params,
            coeffs: self.coeffs.iter().map(|&c| c * alpha).collect(),
        }
    }

    /// Same function truncated or zero-padded to `degree`.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, T::zero());
        Self {
            params: self.params,
            coeffs,
        }
    }
}
