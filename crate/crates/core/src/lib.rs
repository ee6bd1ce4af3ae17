//! Spectral toolkit for the GJMS operators `P_m` on the round sphere `S^n`,
//! restricted to zonal (rotationally symmetric) functions.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod conformal;
pub mod error;
pub mod integrate;
pub mod kernels;
pub mod lane_emden;
pub mod rayleigh;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ZonalFunctionF64 = spectral::ZonalFunction<f64>;
pub type ZonalBasisF64 = spectral::ZonalBasis<f64>;
pub type QuadratureRuleF64 = spectral::QuadratureRule<f64>;
pub type GjmsSpectrumF64 = spectral::GjmsSpectrum<f64>;
pub type DiscretizationF64 = spectral::Discretization<f64>;
pub type KernelSpectrumF64 = kernels::KernelSpectrum<f64>;
pub type RadialProfileF64 = conformal::RadialProfile<f64>;
pub type NonlinearityF64 = lane_emden::Nonlinearity<f64>;
pub type SolveResultF64 = lane_emden::SolveResult<f64>;
pub type ProbeReportF64 = lane_emden::ProbeReport<f64>;
pub type OptimizerConfigF64 = rayleigh::OptimizerConfig<f64>;
pub type MinimizationResultF64 = rayleigh::MinimizationResult<f64>;
