//! Zonal spectral calculus on `S^n`: quadrature, orthonormal zonal
//! harmonics, the GJMS spectrum and the functionals built on them.

mod basis;
mod function;
mod gjms;
mod params;
mod quadrature;

pub use basis::{zonal_basis, zonal_harmonics_at, ZonalBasis};
pub use function::ZonalFunction;
pub(crate) use gjms::lp_norm_of_values;
pub use gjms::{
    conformal_laplacian_eigenvalue, gjms_eigenvalue_gamma, gjms_eigenvalue_product, gjms_eigenvalues,
    laplace_beltrami_residual, lp_norm, quadratic_form, GjmsSpectrum,
};
pub use params::SphereParams;
pub use quadrature::{build_quadrature, sphere_area, GaussJacobi, QuadratureRule};

use crate::error::Result;
use crate::scalar::Real;

/// Default truncation degree.
pub const DEFAULT_DEGREE: usize = 64;

/// Default quadrature order `2K + 8` for truncation degree `K`.
pub fn default_order(degree: usize) -> usize {
    2 * degree + 8
}

/// Everything needed to work with truncated zonal functions for one
/// `(n, m)`: nodal basis and GJMS spectrum at a common degree.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub basis: ZonalBasis<T>,
    pub spectrum: GjmsSpectrum<T>,
}

impl<T: Real> Discretization<T> {
    /// Degree `K` with the default quadrature order.
    pub fn new(params: SphereParams, degree: usize) -> Result<Self> {
        Self::with_order(params, degree, default_order(degree))
    }

    pub fn with_order(params: SphereParams, degree: usize, order: usize) -> Result<Self> {
        let rule = build_quadrature(params.n(), order)?;
        let basis = ZonalBasis::new(rule, params, degree)?;
        let spectrum = gjms_eigenvalues(params, degree)?;
        Ok(Self { basis, spectrum })
    }

    pub fn params(&self) -> SphereParams {
        self.basis.params()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn order(&self) -> usize {
        self.basis.nodes()
    }

    pub fn area(&self) -> T {
        sphere_area(self.params().n()).expect("n >= 3")
    }
}
