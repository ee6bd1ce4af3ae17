use serde::{Deserialize, Serialize};

use super::linalg::{levenberg_solve, lu_solve};
use super::nonlinearity::Nonlinearity;
use crate::error::{domain, Error, Result};
use crate::scalar::{norm2, Real};
use crate::spectral::{Discretization, SphereParams, ZonalFunction};

/// Distance to the constants below which a solution counts as constant.
pub const CONSTANT_THRESHOLD: f64 = 1e-7;
const DIVERGENCE_NORM: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Constant,
    Nonconstant,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolveResult<T> {
    pub solution: ZonalFunction<T>,
    /// `‖Λ⊙c - analyze(f(synthesize(c)))‖`, the L² norm of the projected residual.
    pub residual: T,
    pub iters: usize,
    pub converged: bool,
    pub classification: SolutionKind,
    pub distance_to_constant: T,
    /// Smallest nodal value (negative when the solution changes sign).
    pub negativity: T,
}

/// Coefficient-space residual `Λ⊙c - analyze(f(synthesize(c)))`.
pub fn lane_emden_residual<T: Real>(
    f: &Nonlinearity<T>,
    u: &ZonalFunction<T>,
    disc: &Discretization<T>,
) -> Result<Vec<T>> {
    check_degree(u, disc)?;
    residual_raw(f, u.coeffs(), disc)
}

fn residual_raw<T: Real>(f: &Nonlinearity<T>, c: &[T], disc: &Discretization<T>) -> Result<Vec<T>> {
    let values = disc.basis.synthesize_raw(c)?;
    let fu: Vec<T> = values.iter().map(|&v| f.eval(v)).collect();
    let proj = disc.basis.analyze_raw(&fu)?;
    Ok(c.iter()
        .zip(&disc.spectrum.lambda)
        .zip(&proj)
        .map(|((&ck, &l), &pk)| l * ck - pk)
        .collect())
}

fn jacobian<T: Real>(f: &Nonlinearity<T>, c: &[T], disc: &Discretization<T>) -> Result<Vec<Vec<T>>> {
    let values = disc.basis.synthesize_raw(c)?;
    let w = c.len();
    let mut j = vec![vec![T::zero(); w]; w];
    for (i, (&v, &wi)) in values.iter().zip(&disc.basis.rule().weights).enumerate() {
        let a = wi * f.deriv(v);
        let row = disc.basis.row(i);
        for k in 0..w {
            let ak = a * row[k];
            for l in 0..w {
                j[k][l] = j[k][l] - ak * row[l];
            }
        }
    }
    for (k, &l) in disc.spectrum.lambda.iter().enumerate() {
        j[k][k] = j[k][k] + l;
    }
    Ok(j)
}

fn check_degree<T: Real>(u: &ZonalFunction<T>, disc: &Discretization<T>) -> Result<()> {
    if u.degree() != disc.degree() {
        return Err(Error::DimensionMismatch {
            expected: disc.degree(),
            got: u.degree(),
        });
    }
    if u.params() != disc.params() {
        return Err(domain(format!(
            "function on {} but discretization on {}",
            u.params(),
            disc.params()
        )));
    }
    Ok(())
}

fn finish<T: Real>(
    c: Vec<T>,
    f: &Nonlinearity<T>,
    disc: &Discretization<T>,
    iters: usize,
    converged: bool,
    diverged: bool,
) -> Result<SolveResult<T>> {
    let params = disc.params();
    if diverged {
        let solution = ZonalFunction::new(
            params,
            c.iter().map(|x| if x.is_finite() { *x } else { T::zero() }).collect(),
        )?;
        return Ok(SolveResult {
            distance_to_constant: solution.distance_to_constant(),
            solution,
            residual: T::infinity(),
            iters,
            converged: false,
            classification: SolutionKind::Diverged,
            negativity: T::neg_infinity(),
        });
    }
    let residual = norm2(&residual_raw(f, &c, disc)?);
    let solution = ZonalFunction::new(params, c)?;
    let nodal = disc.basis.synthesize(&solution)?;
    let negativity = nodal
        .iter()
        .copied()
        .chain([solution.value_at(T::one()), solution.value_at(-T::one())])
        .fold(T::infinity(), T::min);
    let distance = solution.distance_to_constant();
    let classification = if distance <= T::lit(CONSTANT_THRESHOLD) {
        SolutionKind::Constant
    } else {
        SolutionKind::Nonconstant
    };
    Ok(SolveResult {
        solution,
        residual,
        iters,
        converged,
        classification,
        distance_to_constant: distance,
        negativity,
    })
}

/// Newton's method for `P_m u = f(u)` on the coefficients of `u`.
///
/// Stops when the residual is below `tol`, or when it stagnates below the
/// rounding floor `1e3 · eps · (Λ_K ‖c‖ + 1)`; both count as converged and
/// the achieved residual is reported either way.
pub fn solve_newton<T: Real>(
    params: SphereParams,
    f: &Nonlinearity<T>,
    init: &ZonalFunction<T>,
    tol: T,
    max_iter: usize,
) -> Result<SolveResult<T>> {
    let disc = Discretization::new(params, init.degree())?;
    solve_newton_with(&disc, f, init, tol, max_iter)
}

/// [`solve_newton`] on a prebuilt discretization of the same degree as `init`.
pub fn solve_newton_with<T: Real>(
    disc: &Discretization<T>,
    f: &Nonlinearity<T>,
    init: &ZonalFunction<T>,
    tol: T,
    max_iter: usize,
) -> Result<SolveResult<T>> {
    check_degree(init, disc)?;
    if !(tol > T::zero()) {
        return Err(domain("tolerance must be positive"));
    }
    let mut c = init.coeffs().to_vec();
    let mut r = residual_raw(f, &c, disc)?;
    let mut rn = norm2(&r);
    let mut iters = 0;
    let mut prev = T::infinity();
    // Analysis of f(u) carries noise ~ eps ‖c‖ in every mode, amplified by Λ_K
    let lambda_max = *disc.spectrum.lambda.last().expect("nonempty spectrum");
    let floor = |c: &[T]| T::lit(1e3) * T::epsilon() * (lambda_max * norm2(c) + T::one());
    loop {
        if rn <= tol {
            return finish(c, f, disc, iters, true, false);
        }
        if rn <= floor(&c) && rn > T::lit(0.5) * prev {
            // stagnated at the rounding floor of the residual
            return finish(c, f, disc, iters, true, false);
        }
        if iters >= max_iter {
            return finish(c, f, disc, iters, false, false);
        }
        let j = jacobian(f, &c, disc)?;
        let rhs: Vec<T> = r.iter().map(|&x| -x).collect();
        let step = match lu_solve(j.clone(), rhs.clone(), T::lit(1e3) * T::epsilon()) {
            Some(s) => s,
            None => levenberg_solve(&j, &rhs, T::lit(1e-8))
                .ok_or_else(|| Error::Inconsistency("Newton system singular even after regularization".into()))?,
        };
        let mut alpha = T::one();
        let mut accepted = None;
        while alpha > T::lit(1e-10) {
            let trial: Vec<T> = c.iter().zip(&step).map(|(&ci, &si)| ci + alpha * si).collect();
            if trial.iter().all(|x| x.is_finite()) {
                let tr = residual_raw(f, &trial, disc)?;
                let tn = norm2(&tr);
                if tn <= (T::one() - T::lit(1e-4) * alpha) * rn {
                    accepted = Some((trial, tr, tn));
                    break;
                }
            }
            alpha = alpha * T::lit(0.5);
        }
        iters += 1;
        let Some((trial, tr, tn)) = accepted else {
            // no decrease: either at the rounding floor of the residual or stuck
            let at_floor = rn <= floor(&c);
            return finish(c, f, disc, iters, at_floor, false);
        };
        prev = rn;
        c = trial;
        r = tr;
        rn = tn;
        if !(norm2(&c) <= T::lit(DIVERGENCE_NORM)) {
            return finish(c, f, disc, iters, false, true);
        }
    }
}

/// Normalized Green iteration `v ← P_m^{-1} f(v) / ‖·‖` for a single power
/// `f(t) = a t^p`, `p > 1`, followed by the rescaling that makes the limit
/// direction an exact solution.
pub fn solve_green<T: Real>(
    params: SphereParams,
    f: &Nonlinearity<T>,
    init: &ZonalFunction<T>,
    tol: T,
    max_iter: usize,
) -> Result<SolveResult<T>> {
    let active: Vec<(T, T)> = f.terms().iter().copied().filter(|(a, _)| *a > T::zero()).collect();
    let (a, p) = match active[..] {
        [(a, p)] if p > T::one() => (a, p),
        _ => {
            return Err(domain(
                "Green iteration needs a single homogeneous term a t^p with p > 1",
            ))
        }
    };
    let disc = Discretization::new(params, init.degree())?;
    check_degree(init, &disc)?;
    let n0 = init.l2_norm();
    if n0 == T::zero() {
        return Err(Error::ZeroFunction);
    }
    let mut v: Vec<T> = init.coeffs().iter().map(|&x| x / n0).collect();
    let mut gain = T::zero();
    let mut converged = false;
    let mut iters = 0;
    let power = Nonlinearity::new(vec![(a, p)])?;
    while iters < max_iter {
        let values = disc.basis.synthesize_raw(&v)?;
        let fv: Vec<T> = values.iter().map(|&x| power.eval(x)).collect();
        let w: Vec<T> = disc
            .basis
            .analyze_raw(&fv)?
            .into_iter()
            .zip(&disc.spectrum.lambda)
            .map(|(x, &l)| x / l)
            .collect();
        gain = norm2(&w);
        if !(gain > T::zero()) {
            return Err(Error::ZeroFunction);
        }
        let next: Vec<T> = w.iter().map(|&x| x / gain).collect();
        let change = norm2(&next.iter().zip(&v).map(|(x, y)| *x - *y).collect::<Vec<_>>());
        v = next;
        iters += 1;
        if change <= tol {
            converged = true;
            break;
        }
    }
    // P^{-1} f(β v) = β^p · gain · v  ⇒  β^{p-1} gain = 1
    let beta = gain.powf(-T::one() / (p - T::one()));
    let c: Vec<T> = v.iter().map(|&x| beta * x).collect();
    finish(c, f, &disc, iters, converged, false)
}

#[cfg(test)]
mod tests {
    use super::super::nonlinearity::constant_solution;
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: usize, m: usize) -> SphereParams {
        SphereParams::new(n, m).unwrap()
    }

    #[test]
    fn constant_start_is_a_root() {
        for (n, m, p) in [(3, 1, 3.0_f64), (5, 2, 2.0), (7, 3, 1.5)] {
            let pp = params(n, m);
            let f = Nonlinearity::power(p).unwrap();
            let c = constant_solution(pp, &f).unwrap();
            let init = ZonalFunction::constant(pp, 16, c).unwrap();
            // absolute 1e-12 is below rounding once Λ_0 c_0 is large
            let tol = 1e-12 * (crate::spectral::gjms_eigenvalue_product::<f64>(pp, 0) * init.l2_norm()).max(1.0);
            let r = solve_newton(pp, &f, &init, tol, 20).unwrap();
            assert!(r.iters <= 2 && r.converged, "{r:?}");
            assert!(r.residual <= tol);
            assert_eq!(r.classification, SolutionKind::Constant);
            assert_relative_eq!(r.solution.mean(), c, max_relative = 1e-13);
        }
    }

    #[test]
    fn perturbed_start_returns_to_the_constant() {
        let pp = params(3, 1);
        let f = Nonlinearity::power(3.0).unwrap();
        let c = constant_solution(pp, &f).unwrap();
        let mut init = ZonalFunction::constant(pp, 24, c).unwrap();
        init.coeffs_mut()[2] += 0.3;
        let r = solve_newton(pp, &f, &init, 1e-11, 50).unwrap();
        assert!(r.converged);
        assert_eq!(r.classification, SolutionKind::Constant);
        assert_relative_eq!(r.solution.mean(), c, max_relative = 1e-10);
        assert!(r.negativity > 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let pp = params(5, 2);
        let disc = Discretization::<f64>::new(pp, 6).unwrap();
        let f: Nonlinearity<f64> = "1:1,0.5:2.5".parse().unwrap();
        let c: Vec<f64> = vec![3.0, 0.4, -0.2, 0.1, 0.05, -0.02, 0.01];
        let j = jacobian(&f, &c, &disc).unwrap();
        let h = 1e-6;
        for l in 0..c.len() {
            let mut plus = c.clone();
            plus[l] += h;
            let mut minus = c.clone();
            minus[l] -= h;
            let rp = residual_raw(&f, &plus, &disc).unwrap();
            let rm = residual_raw(&f, &minus, &disc).unwrap();
            for k in 0..c.len() {
                let fd = (rp[k] - rm[k]) / (2.0 * h);
                assert!((fd - j[k][l]).abs() < 1e-6 * (1.0 + j[k][l].abs()), "({k},{l})");
            }
        }
    }

    #[test]
    fn zero_nonlinearity_drives_to_zero() {
        let pp = params(3, 1);
        let f = Nonlinearity::<f64>::new(vec![]).unwrap();
        let init = ZonalFunction::constant(pp, 8, 1.0).unwrap();
        let r = solve_newton(pp, &f, &init, 1e-12, 10).unwrap();
        assert!(r.converged && r.solution.l2_norm() < 1e-12);
    }

    #[test]
    fn divergence_is_flagged() {
        // supercritical-growth Newton from a large start with a tiny budget
        let pp = params(3, 1);
        let f = Nonlinearity::power(1.5).unwrap();
        let init = ZonalFunction::constant(pp, 4, 1e9).unwrap();
        let r = solve_newton(pp, &f, &init, 1e-12, 3).unwrap();
        assert_eq!(r.classification, SolutionKind::Diverged);
        assert!(!r.converged);
    }

    #[test]
    fn green_iteration_agrees_with_newton_on_the_constant() {
        for (n, m, p) in [(3, 1, 3.0_f64), (5, 2, 2.0), (5, 2, 1.7)] {
            let pp = params(n, m);
            let f = Nonlinearity::power(p).unwrap();
            let c = constant_solution(pp, &f).unwrap();
            let mut init = ZonalFunction::constant(pp, 16, 1.0).unwrap();
            init.coeffs_mut()[1] = 0.2;
            init.coeffs_mut()[3] = -0.1;
            let g = solve_green(pp, &f, &init, 1e-14, 500).unwrap();
            assert!(g.converged, "{g:?}");
            let newton = solve_newton(pp, &f, &ZonalFunction::constant(pp, 16, c).unwrap(), 1e-12, 5).unwrap();
            assert!((g.solution.mean() - newton.solution.mean()).abs() <= 1e-10 * c);
            assert_eq!(g.classification, SolutionKind::Constant);
        }
    }

    #[test]
    fn green_iteration_rejects_sums() {
        let pp = params(5, 2);
        let f: Nonlinearity<f64> = "1:1,1:2".parse().unwrap();
        let init = ZonalFunction::constant(pp, 8, 1.0).unwrap();
        assert!(solve_green(pp, &f, &init, 1e-12, 10).is_err());
    }
}
