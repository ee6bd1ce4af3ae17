//! Gauss–Jacobi quadrature and its specialization to the surface measure of
//! `S^n` restricted to zonal integrands.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{ln_gamma, Real};

/// Surface area `|S^n| = 2 π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn sphere_area<T: Real>(n: usize) -> Result<T> {
    if n < 1 {
        return Err(domain(format!("sphere dimension must be >= 1, got {n}")));
    }
    let half = T::from_usize_lossy(n + 1) / T::lit(2.0);
    Ok(T::lit(2.0) * (half * T::PI().ln() - ln_gamma(half)).exp())
}

/// Nodes and weights of a Gauss–Jacobi rule on `[-1, 1]` for the weight
/// `(1 - x)^alpha (1 + x)^beta`, nodes sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussJacobi<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> GaussJacobi<T> {
    pub fn new(order: usize, alpha: T, beta: T) -> Result<Self> {
        if order == 0 {
            return Err(domain("Gauss-Jacobi order must be positive"));
        }
        if !(alpha > -T::one() && beta > -T::one()) {
            return Err(domain("Gauss-Jacobi exponents must exceed -1"));
        }
        let fail = || Error::NodeSolver { order, n: 0 };
        let q = T::from_usize_lossy(order);
        let ab = alpha + beta;
        let eps = T::epsilon();
        let mut roots: Vec<T> = Vec::with_capacity(order);

        // Roots located from x = 1 downwards; deflation keeps Newton off
        // roots that are already found.
        for i in 1..=order {
            let theta = T::PI() * (T::from_usize_lossy(i) - T::lit(0.25) + T::lit(0.5) * alpha)
                / (q + T::lit(0.5) * (ab + T::one()));
            let mut x = theta.cos();
            let mut converged = false;
            let mut last_dx = T::infinity();
            for _ in 0..200 {
                let (p, dp, _) = jacobi_with_derivative(order, alpha, beta, x);
                let deflate: T = roots.iter().map(|&r| T::one() / (x - r)).sum();
                let denom = dp - p * deflate;
                if denom == T::zero() || !denom.is_finite() {
                    return Err(fail());
                }
                let dx = p / denom;
                x = x - dx;
                if dx.abs() <= T::lit(4.0) * eps * x.abs().max(T::lit(1e-3)) {
                    converged = true;
                    break;
                }
                // at high order the recurrence itself is only accurate to
                // ~Q eps; stop once Newton no longer contracts there
                if dx.abs() <= q * T::lit(16.0) * eps && dx.abs() >= T::lit(0.5) * last_dx {
                    converged = true;
                    break;
                }
                last_dx = dx.abs();
            }
            if !converged || !(x > -T::one() && x < T::one()) {
                return Err(fail());
            }
            roots.push(x);
        }
        roots.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        if roots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(fail());
        }

        // classical weight formula in terms of P'_Q(x_i) and P_{Q-1}(x_i)
        let log_c = ln_gamma(alpha + q) + ln_gamma(beta + q) - ln_gamma(q + T::one()) - ln_gamma(q + ab + T::one());
        let two = T::lit(2.0);
        let weights = roots
            .iter()
            .map(|&x| {
                let (_, dp, prev) = jacobi_with_derivative(order, alpha, beta, x);
                log_c.exp() * (two * q + ab) * two.powf(ab) / (dp * prev)
            })
            .collect::<Vec<_>>();
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(fail());
        }
        Ok(Self {
            nodes: roots,
            weights,
            alpha,
            beta,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Returns `(P_n(x), P_n'(x), P_{n-1}(x))` for the Jacobi polynomial `P_n^{(a,b)}`.
pub(crate) fn jacobi_with_derivative<T: Real>(n: usize, a: T, b: T, x: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let ab = a + b;
    let mut p_prev = one;
    let mut p = (a - b) / two + (ab + two) * x / two;
    if n == 0 {
        return (one, T::zero(), T::zero());
    }
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let c = two * kf + ab;
        let a1 = two * kf * (kf + ab) * (c - two);
        let a2 = (c - one) * (a * a - b * b);
        let a3 = (c - two) * (c - one) * c;
        let a4 = two * (kf + a - one) * (kf + b - one) * c;
        let next = ((a2 + a3 * x) * p - a4 * p_prev) / a1;
        p_prev = p;
        p = next;
    }
    let nf = T::from_usize_lossy(n);
    let c = two * nf + ab;
    let dp = (nf * (a - b - c * x) * p + two * (nf + a) * (nf + b) * p_prev) / (c * (one - x * x));
    (p, dp, p_prev)
}

/// Quadrature for zonal integrands on `S^n`, in the variable `t = cos θ`.
///
/// `∫_{S^n} f(t) dσ = |S^{n-1}| ∫_{-1}^{1} f(t) (1 - t²)^{(n-2)/2} dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule<T> {
    pub n: usize,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// Integral of nodal samples.
    pub fn integrate_values(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(&v, &w)| v * w).sum()
    }
}

/// Gauss rule with `order` nodes for the surface measure of `S^n`.
pub fn build_quadrature<T: Real>(n: usize, order: usize) -> Result<QuadratureRule<T>> {
    if n < 2 {
        return Err(domain(format!("zonal quadrature needs n >= 2, got {n}")));
    }
    if order < 4 {
        return Err(domain(format!("quadrature order must be >= 4, got {order}")));
    }
    let a = (T::from_usize_lossy(n) - T::lit(2.0)) / T::lit(2.0);
    let gj = GaussJacobi::new(order, a, a).map_err(|e| match e {
        Error::NodeSolver { order, .. } => Error::NodeSolver { order, n },
        other => other,
    })?;
    let scale = sphere_area::<T>(n - 1)?;
    Ok(QuadratureRule {
        n,
        nodes: gj.nodes,
        weights: gj.weights.into_iter().map(|w| w * scale).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area::<f64>(1).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area::<f64>(2).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area::<f64>(3).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
        assert!(sphere_area::<f64>(0).is_err());
    }

    #[test]
    fn sphere_area_matches_quadrature_of_one() {
        let rule = build_quadrature::<f64>(3, 8).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), 2.0 * PI * PI, max_relative = 1e-12);
        assert!(rule.integrate(|t| t).abs() < 1e-13);
    }

    #[test]
    fn second_moment_on_s5() {
        // oracle: composite midpoint rule in θ with 2e5 panels, ∫ cos²θ sin⁴θ / ∫ sin⁴θ
        let panels = 200_000;
        let h = PI / panels as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..panels {
            let th = (i as f64 + 0.5) * h;
            let s4 = th.sin().powi(4);
            num += th.cos().powi(2) * s4;
            den += s4;
        }
        let oracle = num / den;
        assert_relative_eq!(oracle, 1.0 / 6.0, max_relative = 1e-9);

        let rule = build_quadrature::<f64>(5, 16).unwrap();
        let area = sphere_area::<f64>(5).unwrap();
        assert_relative_eq!(rule.integrate(|t| t * t) / area, oracle, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_quadrature::<f64>(1, 8).is_err());
        assert!(build_quadrature::<f64>(3, 3).is_err());
        assert!(GaussJacobi::<f64>::new(5, -1.0, 0.0).is_err());
    }

    #[test]
    fn asymmetric_jacobi_moments() {
        // ∫ (1-x)^2 (1+x)^{1/2} dx = 2^{3.5} B(3, 1.5)
        let gj = GaussJacobi::<f64>::new(6, 2.0, 0.5).unwrap();
        let exact = 2f64.powf(3.5) * crate::scalar::gamma(3.0) * crate::scalar::gamma(1.5) / crate::scalar::gamma(4.5);
        assert_relative_eq!(gj.integrate(|_| 1.0), exact, max_relative = 1e-13);
    }

    #[test]
    fn large_order_rule_is_valid() {
        let rule = build_quadrature::<f64>(3, 520).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), 2.0 * PI * PI, max_relative = 1e-12);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }
}
