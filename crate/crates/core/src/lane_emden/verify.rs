use serde::{Deserialize, Serialize};

use crate::conformal::{pullback_to_plane, RadialProfile};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::spectral::ZonalFunction;

/// Slack allowed between consecutive samples of a non-increasing profile.
pub const MONOTONE_SLACK: f64 = 1e-9;
/// Per-level tolerance of the sign check, relative to the level's sup norm.
pub const SUPER_POLYHARMONIC_TOL: f64 = 1e-6;
const TAIL_LIMIT: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MonotonicityReport<T> {
    pub pass: bool,
    /// `max_i u(r_{i+1}) - u(r_i)`; negative for strictly decreasing profiles.
    pub worst_increase: T,
    /// Index `i` of the first violating pair `(r_i, r_{i+1})`.
    pub violation_index: Option<usize>,
}

/// Checks `u(r_{i+1}) <= u(r_i) + 1e-9` along a sampled profile.
pub fn verify_profile_monotone<T: Real>(profile: &RadialProfile<T>) -> MonotonicityReport<T> {
    let slack = T::lit(MONOTONE_SLACK);
    let mut worst = T::neg_infinity();
    let mut index = None;
    for (i, w) in profile.values.windows(2).enumerate() {
        let inc = w[1] - w[0];
        worst = worst.max(inc);
        if inc > slack && index.is_none() {
            index = Some(i);
        }
    }
    MonotonicityReport {
        pass: index.is_none(),
        worst_increase: worst,
        violation_index: index,
    }
}

/// Radial symmetry is built in for zonal functions; this checks that the
/// planar pullback of `sol` is non-increasing in `r` on `grid`.
pub fn verify_symmetry_monotonicity<T: Real>(sol: &ZonalFunction<T>, grid: &[T]) -> Result<MonotonicityReport<T>> {
    Ok(verify_profile_monotone(&pullback_to_plane(sol, grid)?))
}

/// Radii `r_j = √s_j` where `s_j` are the Chebyshev–Lobatto points of
/// `[0, r_max²]`, ascending from `r = 0`.
pub fn chebyshev_radial_grid<T: Real>(r_max: T, points: usize) -> Result<Vec<T>> {
    if points < 3 {
        return Err(domain("Chebyshev grid needs at least 3 points"));
    }
    if !(r_max > T::zero()) || !r_max.is_finite() {
        return Err(domain(format!("r_max must be positive, got {r_max}")));
    }
    let s_max = r_max * r_max;
    let last = T::from_usize_lossy(points - 1);
    Ok((0..points)
        .map(|j| {
            let x = -(T::PI() * T::from_usize_lossy(j) / last).cos();
            let s = if j == 0 {
                T::zero()
            } else {
                s_max * (T::one() + x) / T::lit(2.0)
            };
            if j == points - 1 {
                r_max
            } else {
                s.sqrt()
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelReport<T> {
    /// The level `i` of `(-Δ)^i u`.
    pub level: usize,
    pub min_value: T,
    pub argmin_radius: T,
    pub sup: T,
    pub tol: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SuperPolyharmonicReport<T> {
    pub pass: bool,
    /// Relative size of the highest Chebyshev coefficients of the input.
    pub tail: T,
    pub levels: Vec<LevelReport<T>>,
}

// Chebyshev coefficients from samples at x_j = -cos(jπ/M), j = 0..M.
fn chebyshev_coefficients<T: Real>(values: &[T]) -> Vec<T> {
    let m = values.len() - 1;
    let mf = T::from_usize_lossy(m);
    let two = T::lit(2.0);
    (0..=m)
        .map(|k| {
            let mut acc = T::zero();
            for (j, &v) in values.iter().enumerate() {
                // x_j = cos(π (M - j) / M)
                let arg = T::PI() * T::from_usize_lossy(((m - j) * k) % (2 * m)) / mf;
                let w = if j == 0 || j == m { T::lit(0.5) } else { T::one() };
                acc = acc + w * v * arg.cos();
            }
            let c = two * acc / mf;
            if k == 0 || k == m {
                c / two
            } else {
                c
            }
        })
        .collect()
}

fn chebyshev_derivative<T: Real>(a: &[T]) -> Vec<T> {
    let n = a.len();
    if n < 2 {
        return vec![T::zero()];
    }
    let mut d = vec![T::zero(); n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + T::lit(2.0) * T::from_usize_lossy(k) * a[k];
    }
    d[0] = d[0] / T::lit(2.0);
    d.truncate(n - 1);
    d
}

// (x + 1) · Σ a_k T_k
fn times_x_plus_one<T: Real>(a: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + 1];
    let half = T::lit(0.5);
    for (k, &ak) in a.iter().enumerate() {
        out[k] = out[k] + ak;
        if k == 0 {
            out[1] = out[1] + ak;
        } else {
            out[k + 1] = out[k + 1] + half * ak;
            out[k - 1] = out[k - 1] + half * ak;
        }
    }
    out
}

fn chebyshev_eval_lobatto<T: Real>(a: &[T], m: usize) -> Vec<T> {
    let mf = T::from_usize_lossy(m);
    (0..=m)
        .map(|j| {
            let theta = T::PI() * T::from_usize_lossy(m - j) / mf;
            a.iter()
                .enumerate()
                .map(|(k, &ak)| ak * (T::from_usize_lossy(k) * theta).cos())
                .sum()
        })
        .collect()
}

/// Checks `(-Δ)^i u >= -tol_i` for `i = 1..m-1`, `tol_i = 1e-6 · sup|(-Δ)^i u|`.
///
/// The profile must be sampled on [`chebyshev_radial_grid`]. Writing
/// `u(r) = U(s)`, `s = r²`, the radial Laplacian is `4 s U'' + 2n U'`, which
/// is applied exactly to the Chebyshev interpolant of `U`; no `1/r` appears,
/// so the origin needs no special treatment. An [`Error::Accuracy`] is raised
/// when the interpolant is not resolved on the grid.
pub fn verify_super_polyharmonic<T: Real>(profile: &RadialProfile<T>, m: usize) -> Result<SuperPolyharmonicReport<T>> {
    let grid = &profile.grid;
    let points = grid.len();
    if m <= 1 {
        return Ok(SuperPolyharmonicReport {
            pass: true,
            tail: T::zero(),
            levels: Vec::new(),
        });
    }
    let r_max = *grid.last().expect("validated grid");
    let expected = chebyshev_radial_grid(r_max, points)?;
    if grid
        .iter()
        .zip(&expected)
        .any(|(&a, &b)| (a - b).abs() > T::lit(1e-12) * r_max)
    {
        return Err(domain("profile must be sampled on chebyshev_radial_grid"));
    }
    let n = T::from_usize_lossy(profile.params.n());
    let s_max = r_max * r_max;
    let deg = points - 1;

    let coeffs = chebyshev_coefficients(&profile.values);
    let top = coeffs.iter().fold(T::zero(), |acc, c| acc.max(c.abs()));
    let tail_start = deg + 1 - (deg / 16).max(4);
    let tail = if top > T::zero() {
        coeffs[tail_start..].iter().fold(T::zero(), |acc, c| acc.max(c.abs())) / top
    } else {
        T::zero()
    };
    if tail > T::lit(TAIL_LIMIT) {
        return Err(Error::Accuracy {
            requested: TAIL_LIMIT,
            achieved: tail.to_f64_lossy(),
            context: format!("radial profile not resolved by {points} Chebyshev points"),
        });
    }

    let c2 = T::lit(8.0) / s_max;
    let c1 = T::lit(4.0) * n / s_max;
    let mut current = coeffs;
    let mut levels = Vec::with_capacity(m - 1);
    for level in 1..m {
        let d1 = chebyshev_derivative(&current);
        let d2 = chebyshev_derivative(&d1);
        let mut next = times_x_plus_one(&d2);
        next.resize(next.len().max(d1.len()), T::zero());
        for (k, v) in next.iter_mut().enumerate() {
            let a = *v * c2 + d1.get(k).copied().unwrap_or(T::zero()) * c1;
            *v = -a;
        }
        let values = chebyshev_eval_lobatto(&next, deg);
        let sup = values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let (imin, min) = values
            .iter()
            .enumerate()
            .fold((0, T::infinity()), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let tol = T::lit(SUPER_POLYHARMONIC_TOL) * sup;
        levels.push(LevelReport {
            level,
            min_value: min,
            argmin_radius: grid[imin],
            sup,
            tol,
            pass: min >= -tol,
        });
        current = next;
    }
    Ok(SuperPolyharmonicReport {
        pass: levels.iter().all(|l| l.pass),
        tail,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SphereParams;

    fn params(n: usize, m: usize) -> SphereParams {
        SphereParams::new(n, m).unwrap()
    }

    #[test]
    fn chebyshev_calculus_on_polynomials() {
        // U(x) = x³ - 2x + 1 at Lobatto points
        let m = 8;
        let xs: Vec<f64> = (0..=m)
            .map(|j| -(std::f64::consts::PI * j as f64 / m as f64).cos())
            .collect();
        let vals: Vec<f64> = xs.iter().map(|x| x * x * x - 2.0 * x + 1.0).collect();
        let a = chebyshev_coefficients(&vals);
        let d = chebyshev_eval_lobatto(&chebyshev_derivative(&a), m);
        let p = chebyshev_eval_lobatto(&times_x_plus_one(&a), m);
        for (j, x) in xs.iter().enumerate() {
            assert!((d[j] - (3.0 * x * x - 2.0)).abs() < 1e-13);
            assert!((p[j] - (x + 1.0) * vals[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_and_bubble_profiles_are_monotone() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let pp = params(5, 2);
        let c = ZonalFunction::constant(pp, 8, 6.5625).unwrap();
        let rep = verify_symmetry_monotonicity(&c, &grid).unwrap();
        assert!(rep.pass && rep.worst_increase < 0.0);
    }

    #[test]
    fn oscillating_profile_fails_at_the_first_rise() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let prof = RadialProfile::from_fn(params(3, 1), grid.clone(), |r| r.sin() + 2.0).unwrap();
        let rep = verify_profile_monotone(&prof);
        assert!(!rep.pass);
        assert_eq!(rep.violation_index, Some(0));
        // first rise after the descent past π/2 starts near 3π/2
        let decreasing = RadialProfile::from_fn(params(3, 1), grid[16..].to_vec(), |r| r.sin() + 2.0).unwrap();
        let rep = verify_profile_monotone(&decreasing);
        let i = rep.violation_index.unwrap();
        assert!((grid[16 + i] - 1.5 * std::f64::consts::PI).abs() < 0.1);
    }

    #[test]
    fn laplacian_of_closed_form_profile() {
        // u = (1+s)^{-1/2} on R^5:  -Δu = (5 + 2s)(1+s)^{-5/2}
        let pp = params(5, 2);
        let grid = chebyshev_radial_grid(4.0, 129).unwrap();
        let prof = RadialProfile::from_fn(pp, grid.clone(), |r: f64| (1.0 + r * r).powf(-0.5)).unwrap();
        let rep = verify_super_polyharmonic(&prof, 2).unwrap();
        assert!(rep.pass);
        let oracle_min = grid
            .iter()
            .map(|r| {
                let s = r * r;
                (5.0 + 2.0 * s) * (1.0 + s).powf(-2.5)
            })
            .fold(f64::INFINITY, f64::min);
        // endpoint derivatives amplify rounding by ~N⁴; compare relative to the sup
        assert!(
            (rep.levels[0].min_value - oracle_min).abs() < 1e-7 * rep.levels[0].sup,
            "{rep:?} {oracle_min}"
        );
        assert!((rep.levels[0].sup - 5.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_fails_beyond_half_dimension() {
        // -Δ e^{-r²} = (2n - 4s) e^{-s} < 0 for s > n/2
        let pp = params(5, 2);
        let grid = chebyshev_radial_grid(4.0, 129).unwrap();
        let prof = RadialProfile::from_fn(pp, grid, |r: f64| (-r * r).exp()).unwrap();
        let rep = verify_super_polyharmonic(&prof, 2).unwrap();
        assert!(!rep.pass);
        let lvl = &rep.levels[0];
        assert!(lvl.argmin_radius * lvl.argmin_radius > 2.5);
        // minimum of (10 - 4s) e^{-s} is at s = 7/2: -4 e^{-3.5}
        assert!((lvl.min_value + 4.0 * (-3.5f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn vacuous_for_m_one_and_rejects_bad_grids() {
        let pp = params(3, 1);
        let prof = RadialProfile::from_fn(pp, vec![0.0, 1.0, 2.0], |r| -r).unwrap();
        assert!(verify_super_polyharmonic(&prof, 1).unwrap().pass);
        assert!(verify_super_polyharmonic(&prof, 2).is_err());
        let grid = chebyshev_radial_grid(3.0, 9).unwrap();
        let rough = RadialProfile::from_fn(params(5, 2), grid, |r: f64| (5.0 * r).sin().abs()).unwrap();
        assert!(matches!(
            verify_super_polyharmonic(&rough, 2),
            Err(Error::Accuracy { .. })
        ));
    }
}
