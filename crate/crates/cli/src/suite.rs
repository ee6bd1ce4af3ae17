//! The `verify` command: every invariant of the toolkit checked on one `(m, n)`.

use serde_json::json;

use gjms_core::conformal::{bubble_on_sphere, BubbleParams, RadialProfile};
use gjms_core::kernels::{funk_hecke_spectrum, green_constant, hls_dual_ratio};
use gjms_core::lane_emden::{
    chebyshev_radial_grid, constant_solution, probe_starts, solve_newton_with, uniqueness_probe, uniqueness_probe_with,
    verify_profile_monotone, verify_super_polyharmonic, Nonlinearity, SolutionKind, PROBE_TOL,
};
use gjms_core::rayleigh::{
    minimize, minimize_with, rayleigh_gradient, rayleigh_quotient, sharp_constant, OptimizerConfig,
};
use gjms_core::spectral::{default_order, gjms_eigenvalues, Discretization, SphereParams, ZonalFunction};

use crate::commands::{
    count, degree, monotone_grid, sphere, verifier_checks, Outcome, CONSTANT_MATCH_TOL, GREEN_TOL, MINIMIZER_DIST_TOL,
    SHARP_REL_TOL, VERIFY_POINTS, VERIFY_R_MAX,
};
use crate::error::{usage, CliResult};
use crate::report::{num, Check, Table};
use crate::settings::Settings;

pub const GROUPS: &[&str] = &[
    "green-identity",
    "sharp-constant",
    "gradient",
    "uniqueness",
    "verifiers",
    "critical",
    "duality",
    "determinism",
];

const GRADIENT_DEGREE: usize = 12;
const GRADIENT_POINTS: usize = 20;
const GRADIENT_TOL: f64 = 1e-6;
const PROBE_DEGREE: usize = 24;
const CRITICAL_DEGREE: usize = 48;
const INVARIANCE_DEGREE: usize = 256;
const INVARIANCE_TOL: f64 = 1e-4;
const DUALITY_TOL: f64 = 1e-4;

struct Suite {
    params: SphereParams,
    p: f64,
    k: usize,
    starts: usize,
    seed: u64,
}

impl Suite {
    /// `f(t) = t^q` with `q` halfway between 1 and the critical exponent.
    fn probe_power(&self) -> f64 {
        0.5 * (1.0 + self.params.critical_lane_emden_exponent::<f64>())
    }

    fn green_identity(&self) -> CliResult<Vec<Check>> {
        let spectrum = gjms_eigenvalues::<f64>(self.params, self.k)?;
        let kernel = funk_hecke_spectrum(self.params, self.k, 1e-10)?;
        let green = green_constant(&kernel, &spectrum)?;
        Ok(vec![Check::at_most(
            "green-identity",
            green.max_defect,
            GREEN_TOL,
            format!("max |g mu_k Lambda_k - 1| for k <= {}", self.k),
        )])
    }

    fn sharp_constant(&self) -> CliResult<Vec<Check>> {
        let mut cfg = OptimizerConfig::new(self.params, self.p);
        cfg.degree = self.k;
        cfg.starts = self.starts;
        cfg.seed = self.seed;
        let r = minimize(&cfg)?;
        let exact = sharp_constant::<f64>(self.params.m(), self.params.n(), self.p)?;
        let rel = ((r.value - exact) / exact).abs();
        Ok(vec![
            Check::at_most(
                "sharp-constant",
                rel,
                SHARP_REL_TOL,
                format!("minimum {} vs {exact}", r.value),
            ),
            Check::at_most(
                "minimizer-is-constant",
                r.distance_to_constant,
                MINIMIZER_DIST_TOL,
                format!("best start {}", r.best_start),
            ),
        ])
    }

    fn gradient(&self) -> CliResult<Vec<Check>> {
        let k = GRADIENT_DEGREE.min(self.k);
        let disc = Discretization::<f64>::new(self.params, k)?;
        let points = probe_starts(&disc, 1.0, GRADIENT_POINTS + 1, self.seed)?;
        let mut worst: f64 = 0.0;
        let h = 1e-5;
        for u in &points[1..] {
            let g = rayleigh_gradient(u, self.p, &disc)?;
            let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (j, gj) in g.iter().enumerate() {
                let mut plus = u.clone();
                plus.coeffs_mut()[j] += h;
                let mut minus = u.clone();
                minus.coeffs_mut()[j] -= h;
                let fd =
                    (rayleigh_quotient(&plus, self.p, &disc)? - rayleigh_quotient(&minus, self.p, &disc)?) / (2.0 * h);
                worst = worst.max((fd - gj).abs() / gnorm);
            }
        }
        Ok(vec![Check::at_most(
            "gradient",
            worst,
            GRADIENT_TOL,
            format!("central differences at {GRADIENT_POINTS} points, K = {k}"),
        )])
    }

    fn uniqueness(&self) -> CliResult<Vec<Check>> {
        let f = Nonlinearity::power(self.probe_power())?;
        let disc = Discretization::<f64>::new(self.params, PROBE_DEGREE)?;
        let r = uniqueness_probe_with(&disc, &f, self.starts, self.seed, PROBE_TOL)?;
        let label = format!("f = t^{}", self.probe_power());
        Ok(vec![
            Check::at_most(
                "uniqueness",
                r.counterexamples.len() as f64,
                0.0,
                format!("{label}: {} converged, {} constant", r.converged, r.constant_hits),
            ),
            Check::at_most(
                "constant-value",
                r.max_constant_error,
                CONSTANT_MATCH_TOL,
                format!("{label}: max relative error"),
            ),
        ])
    }

    fn verifiers(&self) -> CliResult<Vec<Check>> {
        let f = Nonlinearity::power(self.probe_power())?;
        let disc = Discretization::<f64>::new(self.params, PROBE_DEGREE)?;
        let c = constant_solution(self.params, &f).unwrap_or(1.0);
        let mut checked = 0;
        let mut failed = Vec::new();
        for (trial, init) in probe_starts(&disc, c, self.starts, self.seed)?.iter().enumerate() {
            let r = solve_newton_with(&disc, &f, init, PROBE_TOL, 100)?;
            if !r.converged || r.negativity < 0.0 || r.solution.l2_norm() <= 1e-6 * init.l2_norm() {
                continue;
            }
            checked += 1;
            if !verifier_checks(&r.solution, self.params.m())?.0 {
                failed.push(trial);
            }
        }
        let sine = negative_control_sine()?;
        let gauss = negative_control_gaussian()?;
        Ok(vec![
            Check::at_most(
                "verifiers-accept-solutions",
                failed.len() as f64,
                0.0,
                format!("{checked} solutions checked, failing trials {failed:?}"),
            ),
            Check::holds(
                "verifiers-reject-controls",
                sine && gauss,
                format!("sin(r)+2 rejected={sine}, exp(-r^2) rejected={gauss}"),
            ),
        ])
    }

    fn critical(&self) -> CliResult<Vec<Check>> {
        let params = self.params;
        let pc = params.critical_lane_emden_exponent::<f64>();
        let f = Nonlinearity::power(pc)?;
        let disc = Discretization::<f64>::new(params, CRITICAL_DEGREE)?;
        let b = bubble_on_sphere(&BubbleParams::new(2.0, params)?, &disc.basis)?;
        let c = constant_solution(params, &f).expect("single power");
        let beta = c * 2f64.powf(params.conformal_weight::<f64>());
        let r = solve_newton_with(&disc, &f, &b.function.scaled(beta), 1e-10, 50)?;
        let newton_ok = r.converged && r.residual <= 1e-8 && r.classification == SolutionKind::Nonconstant;

        let big = Discretization::<f64>::new(params, INVARIANCE_DEGREE)?;
        let crit = params.critical_sobolev_exponent::<f64>();
        let mut quotients = Vec::new();
        for lambda in [0.5, 1.0, 2.0] {
            let e = bubble_on_sphere(&BubbleParams::new(lambda, params)?, &big.basis)?;
            quotients.push(rayleigh_quotient(&e.function, crit, &big)?);
        }
        let hi = quotients.iter().cloned().fold(f64::MIN, f64::max);
        let lo = quotients.iter().cloned().fold(f64::MAX, f64::min);

        let b2 = bubble_on_sphere(&BubbleParams::new(2.0, params)?, &big.basis)?;
        let one = ZonalFunction::constant(params, INVARIANCE_DEGREE, 1.0)?;
        let margin = rayleigh_quotient(&b2.function, self.p, &big)? - rayleigh_quotient(&one, self.p, &big)?;
        Ok(vec![
            Check::holds(
                "critical-bubble-solution",
                newton_ok,
                format!(
                    "p = {pc}: converged={} residual {:e} kind {:?} distance {:e}",
                    r.converged, r.residual, r.classification, r.distance_to_constant
                ),
            ),
            Check::at_most(
                "conformal-invariance",
                (hi - lo) / lo,
                INVARIANCE_TOL,
                format!("critical quotient of bubbles lambda = 1/2, 1, 2 at K = {INVARIANCE_DEGREE}"),
            ),
            Check::above(
                "subcritical-margin",
                margin,
                0.0,
                format!("bubble(2) minus constant at p = {}", self.p),
            ),
        ])
    }

    fn duality(&self) -> CliResult<Vec<Check>> {
        let dual = hls_dual_ratio::<f64>(self.params, self.p, 8, self.seed, 32)?;
        let s = sharp_constant::<f64>(self.params.m(), self.params.n(), self.p)?;
        let product = dual.maximum * s;
        Ok(vec![Check::at_most(
            "duality",
            (product - 1.0).abs(),
            DUALITY_TOL,
            format!("dual maximum times sharp constant = {product}"),
        )])
    }

    fn determinism(&self) -> CliResult<Vec<Check>> {
        let mut cfg = OptimizerConfig::new(self.params, self.p);
        cfg.degree = 16;
        cfg.starts = 6;
        cfg.seed = self.seed;
        let disc = Discretization::<f64>::new(self.params, 16)?;
        let a = serde_json::to_string(&minimize_with(&cfg, &disc)?)?;
        let b = serde_json::to_string(&minimize_with(&cfg, &disc)?)?;
        let f = Nonlinearity::power(self.probe_power())?;
        let pa = serde_json::to_string(&uniqueness_probe(self.params, &f, 8, self.seed, 16)?)?;
        let pb = serde_json::to_string(&uniqueness_probe(self.params, &f, 8, self.seed, 16)?)?;
        Ok(vec![Check::holds(
            "determinism",
            a == b && pa == pb,
            "minimize and probe JSON identical across reruns",
        )])
    }
}

fn negative_control_sine() -> CliResult<bool> {
    let params = SphereParams::new(3, 1)?;
    let prof = RadialProfile::from_fn(params, monotone_grid(), |r| r.sin() + 2.0)?;
    Ok(!verify_profile_monotone(&prof).pass)
}

fn negative_control_gaussian() -> CliResult<bool> {
    let params = SphereParams::new(5, 2)?;
    let grid = chebyshev_radial_grid(VERIFY_R_MAX, VERIFY_POINTS)?;
    let prof = RadialProfile::from_fn(params, grid, |r: f64| (-r * r).exp())?;
    Ok(!verify_super_polyharmonic(&prof, 2)?.pass)
}

pub fn verify(s: &Settings) -> CliResult<Outcome> {
    let params = sphere(s)?;
    let crit = params.critical_sobolev_exponent::<f64>();
    let p = s.real("p")?.unwrap_or(0.5 * (2.0 + crit));
    if !(p > 2.0 + 1e-3 && p < crit) {
        return Err(s.invalid("p", format!("need 2 < p < {crit}")));
    }
    let suite = Suite {
        params,
        p,
        k: degree(s, 32)?,
        starts: count(s, "starts", 20)?,
        seed: s.u64("seed")?.unwrap_or(0),
    };
    let groups: Vec<&str> = match s.text("only") {
        None => GROUPS.to_vec(),
        Some(list) => {
            let picked: Vec<&str> = list.split(',').map(str::trim).filter(|g| !g.is_empty()).collect();
            if let Some(bad) = picked.iter().find(|g| !GROUPS.contains(g)) {
                return Err(s.invalid(
                    "only",
                    format!("unknown check group `{bad}`; known: {}", GROUPS.join(", ")),
                ));
            }
            picked
        }
    };
    if groups.is_empty() {
        return Err(usage("`only` selects no check group"));
    }

    let mut checks = Vec::new();
    for g in &groups {
        checks.extend(match *g {
            "green-identity" => suite.green_identity()?,
            "sharp-constant" => suite.sharp_constant()?,
            "gradient" => suite.gradient()?,
            "uniqueness" => suite.uniqueness()?,
            "verifiers" => suite.verifiers()?,
            "critical" => suite.critical()?,
            "duality" => suite.duality()?,
            "determinism" => suite.determinism()?,
            _ => unreachable!("validated above"),
        });
    }
    let mut table = Table::new(&["name", "pass", "value", "limit", "margin", "detail"]);
    for c in &checks {
        table.push(vec![
            c.name.clone(),
            c.pass.to_string(),
            num(c.value),
            num(c.limit),
            num(c.margin),
            c.detail.clone(),
        ]);
    }
    let inputs = json!({
        "m": params.m(), "n": params.n(), "p": p, "K": suite.k, "starts": suite.starts,
        "seed": suite.seed, "groups": groups,
    });
    let results = json!({
        "passed": checks.iter().filter(|c| c.pass).count(),
        "total": checks.len(),
        "probe_power": suite.probe_power(),
        "probe_degree": PROBE_DEGREE,
        "critical_degree": CRITICAL_DEGREE,
        "invariance_degree": INVARIANCE_DEGREE,
    });
    let mut out = Outcome::new(inputs, results, table);
    out.checks = checks;
    out.seed = Some(suite.seed);
    out.degree = Some(suite.k);
    out.order = Some(default_order(suite.k));
    Ok(out)
}
