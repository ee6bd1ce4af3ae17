use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{signed_pow, signed_pow_deriv, Real};
use crate::spectral::{gjms_eigenvalue_product, SphereParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Subcritical,
    Critical,
    Supercritical,
}

/// `f(t) = Σ a_k t^{p_k}` with `a_k >= 0`, `p_k >= 1`, terms sorted by exponent.
///
/// Non-integer powers are extended to negative `t` as odd functions
/// `|t|^{p-1} t`; integer powers are used as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "Vec<(T, T)>", into = "Vec<(T, T)>")]
pub struct Nonlinearity<T> {
    terms: Vec<(T, T)>,
}

impl<T: Real> TryFrom<Vec<(T, T)>> for Nonlinearity<T> {
    type Error = Error;
    fn try_from(terms: Vec<(T, T)>) -> Result<Self> {
        Self::new(terms)
    }
}

impl<T: Real> From<Nonlinearity<T>> for Vec<(T, T)> {
    fn from(f: Nonlinearity<T>) -> Self {
        f.terms
    }
}

impl<T: Real> Nonlinearity<T> {
    /// Terms as `(a, p)` pairs.
    pub fn new(mut terms: Vec<(T, T)>) -> Result<Self> {
        for &(a, p) in &terms {
            if !(a >= T::zero()) || !a.is_finite() {
                return Err(domain(format!("coefficient must be finite and >= 0, got {a}")));
            }
            if !(p >= T::one()) || !p.is_finite() {
                return Err(domain(format!("exponent must be finite and >= 1, got {p}")));
            }
        }
        terms.sort_by(|x, y| x.1.partial_cmp(&y.1).expect("finite exponents"));
        Ok(Self { terms })
    }

    /// `f(t) = t^p`.
    pub fn power(p: T) -> Result<Self> {
        Self::new(vec![(T::one(), p)])
    }

    pub fn terms(&self) -> &[(T, T)] {
        &self.terms
    }

    /// True when every coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(a, _)| a == T::zero())
    }

    fn active(&self) -> impl Iterator<Item = &(T, T)> {
        self.terms.iter().filter(|(a, _)| *a > T::zero())
    }

    /// True when `f(t) = a t` (including `f ≡ 0`).
    pub fn is_linear(&self) -> bool {
        self.active().all(|&(_, p)| p == T::one())
    }

    /// Largest exponent with a nonzero coefficient, `1` for `f ≡ 0`.
    pub fn max_exponent(&self) -> T {
        self.active().map(|&(_, p)| p).fold(T::one(), T::max)
    }

    /// Sum of the coefficients of the `t^1` terms.
    pub fn linear_coefficient(&self) -> T {
        self.active().filter(|&&(_, p)| p == T::one()).map(|&(a, _)| a).sum()
    }

    pub fn eval(&self, t: T) -> T {
        self.terms.iter().map(|&(a, p)| a * signed_pow(t, p)).sum()
    }

    pub fn deriv(&self, t: T) -> T {
        self.terms.iter().map(|&(a, p)| a * signed_pow_deriv(t, p)).sum()
    }

    /// Position of the largest exponent relative to `(n + 2m)/(n - 2m)`.
    pub fn classify(&self, params: SphereParams) -> Classification {
        let crit = params.critical_lane_emden_exponent::<T>();
        let p = self.max_exponent();
        if p < crit {
            Classification::Subcritical
        } else if p == crit {
            Classification::Critical
        } else {
            Classification::Supercritical
        }
    }
}

impl<T: Real> fmt::Display for Nonlinearity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(a, p)| format!("{a}:{p}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses `"a1:p1,a2:p2"`; an empty string is `f ≡ 0`.
impl<T: Real + FromStr> FromStr for Nonlinearity<T> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, p) = part
                .split_once(':')
                .ok_or_else(|| domain(format!("term `{part}` is not of the form a:p")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<T>()
                    .map_err(|_| domain(format!("cannot parse `{x}` as a number")))
            };
            terms.push((parse(a)?, parse(p)?));
        }
        Self::new(terms)
    }
}

/// Positive value `c` with `Λ_0 c = f(c)`.
///
/// `Some(0)` for `f ≡ 0`; `None` when no positive root exists (including
/// the linear case, where any root is either zero or a continuum).
pub fn constant_solution<T: Real>(params: SphereParams, f: &Nonlinearity<T>) -> Option<T> {
    if f.is_zero() {
        return Some(T::zero());
    }
    if f.is_linear() {
        return None;
    }
    let lambda0 = gjms_eigenvalue_product::<T>(params, 0);
    let active: Vec<(T, T)> = f.active().copied().collect();
    if let [(a, p)] = active[..] {
        return Some((lambda0 / a).powf(T::one() / (p - T::one())));
    }
    // h(c) = f(c)/c - Λ_0 is nondecreasing on (0, ∞)
    let h = |c: T| active.iter().map(|&(a, p)| a * c.powf(p - T::one())).sum::<T>() - lambda0;
    if h(T::zero()) >= T::zero() {
        return None;
    }
    let mut hi = T::one();
    while h(hi) < T::zero() {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return None;
        }
    }
    let mut lo = T::zero();
    for _ in 0..400 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / T::lit(2.0))
}
