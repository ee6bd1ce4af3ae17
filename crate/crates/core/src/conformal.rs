//! Stereographic transport between radial functions on `R^n` and zonal
//! functions on `S^n`.
//!
//! The point `x ∈ R^n` maps to the sphere point with last coordinate
//! `(1 - |x|²) / (1 + |x|²)`, so `r = 0` is the north pole `t = 1` and
//! `r → ∞` approaches the south pole `t = -1`. The pullback metric is
//! `(2 / (1 + |x|²))² dx²`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::integrate::adaptive_gauss_kronrod;
use crate::scalar::Real;
use crate::spectral::{sphere_area, QuadratureRule, SphereParams, ZonalBasis, ZonalFunction};

/// `t = (1 - r²) / (1 + r²)`.
pub fn angle_from_radius<T: Real>(r: T) -> Result<T> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(domain(format!("radius must be finite and >= 0, got {r}")));
    }
    let r2 = r * r;
    Ok((T::one() - r2) / (T::one() + r2))
}

/// `r = √((1 - t) / (1 + t))`; `t = -1` has no finite preimage.
pub fn radius_from_angle<T: Real>(t: T) -> Result<T> {
    if t == -T::one() {
        return Err(Error::InfiniteRadius);
    }
    if !(t > -T::one() && t <= T::one()) {
        return Err(domain(format!("t = cos θ must lie in (-1, 1], got {t}")));
    }
    Ok(((T::one() - t) / (T::one() + t)).sqrt())
}

/// Conformal factor `2 / (1 + r²)` of the stereographic pullback.
pub fn conformal_factor<T: Real>(r: T) -> T {
    T::lit(2.0) / (T::one() + r * r)
}

/// Samples `u(r_i)` of a radial function on `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RadialProfile<T> {
    pub params: SphereParams,
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> RadialProfile<T> {
    pub fn new(params: SphereParams, grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        validate_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("non-finite profile value"));
        }
        Ok(Self { params, grid, values })
    }

    /// Samples a closed-form radial function.
    pub fn from_fn(params: SphereParams, grid: Vec<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.iter().map(|&r| f(r)).collect();
        Self::new(params, grid, values)
    }

    /// Largest excess of `u(r) (1 + r²)^{n/2 - m}` over `bound`.
    pub fn decay_excess(&self, bound: T) -> T {
        let w = self.params.conformal_weight::<T>();
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&r, &u)| u.abs() * (T::one() + r * r).powf(w) - bound)
            .fold(T::neg_infinity(), T::max)
    }
}

fn validate_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("empty radial grid"));
    }
    if !(grid[0] >= T::zero()) || grid.iter().any(|r| !r.is_finite()) {
        return Err(domain("radial grid must be finite and start at r >= 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("radial grid must be strictly increasing"));
    }
    Ok(())
}

/// `u(r) = (2 / (1 + r²))^{n/2 - m} v(t(r))`.
pub fn pullback_to_plane<T: Real>(v: &ZonalFunction<T>, grid: &[T]) -> Result<RadialProfile<T>> {
    validate_grid(grid)?;
    let w = v.params().conformal_weight::<T>();
    let values = grid
        .iter()
        .map(|&r| Ok(conformal_factor(r).powf(w) * v.value_at(angle_from_radius(r)?)))
        .collect::<Result<Vec<_>>>()?;
    RadialProfile::new(v.params(), grid.to_vec(), values)
}

/// Largest `|v|` over a dense sample of `[-1, 1]`.
pub fn sup_abs<T: Real>(v: &ZonalFunction<T>, samples: usize) -> T {
    let samples = samples.max(2);
    (0..samples)
        .map(|i| {
            let theta = T::PI() * T::from_usize_lossy(i) / T::from_usize_lossy(samples - 1);
            v.value_at(theta.cos()).abs()
        })
        .fold(T::zero(), T::max)
}

/// Dilation `λ` of the centred extremal profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams<T> {
    pub lambda: T,
    pub params: SphereParams,
}

impl<T: Real> BubbleParams<T> {
    pub fn new(lambda: T, params: SphereParams) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(domain(format!("bubble dilation must be positive, got {lambda}")));
        }
        Ok(Self { lambda, params })
    }

    /// The planar profile `λ^{(n-2m)/2} (1 + λ² r²)^{m - n/2}`.
    pub fn planar_value(&self, r: T) -> T {
        let w = self.params.conformal_weight::<T>();
        self.lambda.powf(w) * (T::one() + self.lambda * self.lambda * r * r).powf(-w)
    }

    /// The pushed-forward bubble on the sphere,
    /// `v_λ(t) = (λ / (1 + t + λ²(1 - t)))^{(n-2m)/2}`.
    pub fn sphere_value(&self, t: T) -> T {
        let w = self.params.conformal_weight::<T>();
        let l2 = self.lambda * self.lambda;
        (self.lambda / (T::one() + t + l2 * (T::one() - t))).powf(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TruncationWarning<T> {
    pub tail: T,
    pub suggested_degree: usize,
}

/// Spectral expansion of a bubble together with its truncation diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BubbleExpansion<T> {
    pub function: ZonalFunction<T>,
    /// `|c_K| / ‖v‖_{L²}`.
    pub tail: T,
    pub warning: Option<TruncationWarning<T>>,
}

/// Coefficients of the sphere bubble `v_λ` in the zonal basis.
pub fn bubble_on_sphere<T: Real>(b: &BubbleParams<T>, basis: &ZonalBasis<T>) -> Result<BubbleExpansion<T>> {
    if b.params.n() != basis.params().n() {
        return Err(Error::DimensionMismatch {
            expected: basis.params().n(),
            got: b.params.n(),
        });
    }
    let values: Vec<T> = basis.rule().nodes.iter().map(|&t| b.sphere_value(t)).collect();
    let mut function = basis.analyze(&values)?;
    if b.lambda == T::one() {
        // exact constant; drop rounding noise in higher modes
        for c in function.coeffs_mut().iter_mut().skip(1) {
            *c = T::zero();
        }
    }
    let norm = function.l2_norm();
    let tail = function.coeffs()[function.degree()].abs() / norm;
    let threshold = T::lit(1e-6);
    let warning = (tail > threshold).then(|| TruncationWarning {
        tail,
        suggested_degree: suggested_degree(b.lambda, function.degree()),
    });
    Ok(BubbleExpansion {
        function,
        tail,
        warning,
    })
}

// The sphere bubble is analytic in t with a singularity at
// t* = (λ² + 1) / (λ² - 1); coefficients decay like ρ^k with
// ρ = 1 / (|t*| + √(t*² - 1)).
fn suggested_degree<T: Real>(lambda: T, current: usize) -> usize {
    let l2 = lambda * lambda;
    let ts = ((l2 + T::one()) / (l2 - T::one())).abs();
    let rho = T::one() / (ts + (ts * ts - T::one()).sqrt());
    let needed = (T::lit(1e-8).ln() / rho.ln()).to_f64_lossy();
    if needed.is_finite() {
        ((needed * 1.25).ceil() as usize + 8).max(current + 1)
    } else {
        current * 2
    }
}

/// Both sides of the change-of-variables identity
/// `∫_{S^n} |v|^q dσ = ∫_{R^n} |u|^q (2/(1+r²))^{n - q(n/2-m)} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportCheck<T> {
    pub sphere: T,
    pub plane: T,
    pub discrepancy: T,
}

/// Relative discrepancy between the sphere and plane integrals of `|v|^q`.
/// The sphere side uses `rule`; the plane side an adaptive radial quadrature
/// on `[0, R]` with `R` chosen so the analytic tail is below `1e-12` of the
/// sphere integral.
pub fn norm_transport_check<T: Real>(
    v: &ZonalFunction<T>,
    q: T,
    rule: &QuadratureRule<T>,
) -> Result<TransportCheck<T>> {
    if !(q >= T::one()) {
        return Err(domain(format!("exponent q must be >= 1, got {q}")));
    }
    let params = v.params();
    let n = params.n();
    let nf = T::from_usize_lossy(n);
    let w = params.conformal_weight::<T>();
    let sphere = rule.integrate(|t| v.value_at(t).abs().powf(q));
    if sphere == T::zero() {
        return Ok(TransportCheck {
            sphere,
            plane: T::zero(),
            discrepancy: T::zero(),
        });
    }
    let outer = sphere_area::<T>(n - 1)?;
    let sup = sup_abs(v, 4096);
    let rel = T::lit(1e-12);
    // |integrand| <= sup^q 2^n r^{-n-1}, so the tail beyond R is at most
    // |S^{n-1}| sup^q 2^n R^{-n} / n
    let r_max = (outer * sup.powf(q) * T::lit(2.0).powf(nf) / (nf * rel * sphere)).powf(T::one() / nf);
    let weight_exp = nf - q * w;
    let integrand = |r: T| -> T {
        let factor = conformal_factor(r);
        let t = (T::one() - r * r) / (T::one() + r * r);
        let u = factor.powf(w) * v.value_at(t);
        u.abs().powf(q) * factor.powf(weight_exp) * r.powi(n as i32 - 1)
    };
    let mut plane = T::zero();
    let mut a = T::zero();
    let mut b = T::one();
    while a < r_max {
        let hi = b.min(r_max);
        let (piece, _) = adaptive_gauss_kronrod(integrand, a, hi, T::lit(1e-13), T::zero(), 400)?;
        plane = plane + piece;
        a = hi;
        b = b * T::lit(2.0);
    }
    plane = plane * outer;
    Ok(TransportCheck {
        sphere,
        plane,
        discrepancy: (sphere - plane).abs() / sphere,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_quadrature, Discretization};
    use approx::assert_relative_eq;

    fn params(n: usize, m: usize) -> SphereParams {
        SphereParams::new(n, m).unwrap()
    }

    #[test]
    fn radius_angle_examples() {
        assert_eq!(angle_from_radius(0.0_f64).unwrap(), 1.0);
        assert_eq!(angle_from_radius(1.0_f64).unwrap(), 0.0);
        assert_relative_eq!(
            radius_from_angle(0.5_f64).unwrap(),
            1.0 / 3f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(radius_from_angle(-1.0_f64), Err(Error::InfiniteRadius));
        assert!(radius_from_angle(1.5_f64).is_err());
        assert!(angle_from_radius(-1.0_f64).is_err());
    }

    #[test]
    fn conformal_factor_examples() {
        assert_eq!(conformal_factor(0.0_f64), 2.0);
        assert_eq!(conformal_factor(1.0_f64), 1.0);
        assert_relative_eq!(conformal_factor(3.0_f64), 0.2, max_relative = 1e-15);
    }

    #[test]
    fn pullback_of_constant_is_unit_bubble() {
        for (n, m) in [(3, 1), (5, 2), (7, 3)] {
            let p = params(n, m);
            let w = p.conformal_weight::<f64>();
            let v = ZonalFunction::constant(p, 4, 2f64.powf(-w)).unwrap();
            let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
            let u = pullback_to_plane(&v, &grid).unwrap();
            for (&r, &val) in u.grid.iter().zip(&u.values) {
                assert_relative_eq!(val, (1.0 + r * r).powf(-w), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn pullback_of_y1_at_unit_radius() {
        let p = params(3, 1);
        let y1 = ZonalFunction::<f64>::harmonic(p, 3, 1).unwrap();
        let u = pullback_to_plane(&y1, &[0.0, 1.0]).unwrap();
        assert_relative_eq!(u.values[1], y1.value_at(0.0), epsilon = 1e-15);
        let zero = ZonalFunction::<f64>::zero(p, 3);
        assert!(pullback_to_plane(&zero, &[0.0, 1.0])
            .unwrap()
            .values
            .iter()
            .all(|&x| x == 0.0));
        assert!(pullback_to_plane(&zero, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn decay_bound_holds_for_bounded_data() {
        let p = params(5, 2);
        let coeffs = vec![0.3, -0.2, 0.15, 0.05, -0.02];
        let v = ZonalFunction::new(p, coeffs).unwrap();
        let grid: Vec<f64> = (0..400).map(|i| (i as f64 * 0.05).powi(2)).collect();
        let prof = pullback_to_plane(&v, &grid).unwrap();
        let w = p.conformal_weight::<f64>();
        let bound = sup_abs(&v, 4096) * 2f64.powf(w) + 1e-9;
        assert!(prof.decay_excess(bound) <= 0.0);
    }

    #[test]
    fn unit_bubble_is_constant_on_sphere() {
        let p = params(3, 1);
        let d = Discretization::<f64>::new(p, 16).unwrap();
        let b = BubbleParams::new(1.0, p).unwrap();
        let e = bubble_on_sphere(&b, &d.basis).unwrap();
        assert_relative_eq!(e.function.mean(), 2f64.powf(-0.5), max_relative = 1e-13);
        assert_eq!(e.function.distance_to_constant(), 0.0);
        assert!(e.warning.is_none());
    }

    #[test]
    fn sphere_bubble_matches_planar_profile() {
        let p = params(5, 2);
        let b = BubbleParams::new(2.5_f64, p).unwrap();
        let w = p.conformal_weight::<f64>();
        for &r in &[0.0_f64, 0.3, 1.0, 4.0] {
            let t = angle_from_radius(r).unwrap();
            let pushed = conformal_factor(r).powf(-w) * b.planar_value(r);
            assert_relative_eq!(b.sphere_value(t), pushed, max_relative = 1e-13);
        }
    }

    #[test]
    fn critical_norm_invariant_and_concentration() {
        let p = params(3, 1);
        let d = Discretization::<f64>::new(p, 64).unwrap();
        let q = p.critical_sobolev_exponent::<f64>();
        let mut norms = vec![];
        let mut c0 = vec![];
        for lam in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let e = bubble_on_sphere(&BubbleParams::new(lam, p).unwrap(), &d.basis).unwrap();
            norms.push(crate::spectral::lp_norm(&e.function, q, &d.basis).unwrap());
            c0.push(e.function.coeffs()[0]);
        }
        for nrm in &norms[..5] {
            assert_relative_eq!(*nrm, norms[2], max_relative = 1e-6);
        }
        // c_0 decreases along λ = 2, 4, 8
        assert!(c0[3] > c0[4] && c0[4] > c0[5]);
    }

    #[test]
    fn truncation_warning_for_sharp_bubble() {
        let p = params(3, 1);
        let d = Discretization::<f64>::new(p, 8).unwrap();
        let e = bubble_on_sphere(&BubbleParams::new(8.0, p).unwrap(), &d.basis).unwrap();
        let w = e.warning.expect("tail should be flagged");
        assert!(w.suggested_degree > 8);
    }

    #[test]
    fn transport_identity() {
        let p = params(3, 1);
        let rule = build_quadrature::<f64>(3, 40).unwrap();
        let one = ZonalFunction::constant(p, 4, 1.0).unwrap();
        let crit = transport(&one, 6.0, &rule);
        assert!(crit.discrepancy <= 1e-8, "{crit:?}");
        assert_relative_eq!(crit.sphere, 2.0 * std::f64::consts::PI.powi(2), max_relative = 1e-12);
        let sub = transport(&one, 2.0, &rule);
        assert!(sub.discrepancy <= 1e-8, "{sub:?}");
        let zero = ZonalFunction::<f64>::zero(p, 4);
        let z = transport(&zero, 3.0, &rule);
        assert_eq!((z.sphere, z.plane), (0.0, 0.0));

        let v = ZonalFunction::new(p, vec![1.0, 0.3, -0.1]).unwrap();
        assert!(transport(&v, 2.0, &rule).discrepancy <= 1e-8);
    }

    fn transport(v: &ZonalFunction<f64>, q: f64, rule: &QuadratureRule<f64>) -> TransportCheck<f64> {
        norm_transport_check(v, q, rule).unwrap()
    }
}
