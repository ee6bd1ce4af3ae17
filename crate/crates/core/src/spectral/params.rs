use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Dimension `n` of the sphere `S^n` and order parameter `m` of the
/// operator `P_m` (order `2m`). Always satisfies `n > 2m`, `m >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SphereParams {
    n: usize,
    m: usize,
}

#[derive(Deserialize)]
struct RawParams {
    n: usize,
    m: usize,
}

impl TryFrom<RawParams> for SphereParams {
    type Error = crate::Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        SphereParams::new(raw.n, raw.m)
    }
}

impl SphereParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(domain(format!("operator order m must be >= 1, got {m}")));
        }
        if n < 3 || n <= 2 * m {
            return Err(domain(format!("need n > 2m and n >= 3, got n = {n}, m = {m}")));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sobolev critical exponent `2n / (n - 2m)`.
    pub fn critical_sobolev_exponent<T: Real>(&self) -> T {
        T::from_usize_lossy(2 * self.n) / T::from_usize_lossy(self.n - 2 * self.m)
    }

    /// Critical Lane–Emden exponent `(n + 2m) / (n - 2m)`.
    pub fn critical_lane_emden_exponent<T: Real>(&self) -> T {
        T::from_usize_lossy(self.n + 2 * self.m) / T::from_usize_lossy(self.n - 2 * self.m)
    }

    /// Conformal weight `n/2 - m` of `P_m`.
    pub fn conformal_weight<T: Real>(&self) -> T {
        T::from_usize_lossy(self.n) / T::lit(2.0) - T::from_usize_lossy(self.m)
    }

    /// Gegenbauer index `(n - 1) / 2` of zonal harmonics on `S^n`.
    pub fn gegenbauer_index<T: Real>(&self) -> T {
        (T::from_usize_lossy(self.n) - T::one()) / T::lit(2.0)
    }
}

impl std::fmt::Display for SphereParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}
