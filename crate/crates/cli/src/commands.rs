use serde_json::{json, Value};

use gjms_core::conformal::{bubble_on_sphere, pullback_to_plane, BubbleParams};
use gjms_core::kernels::{funk_hecke_spectrum, green_constant};
use gjms_core::lane_emden::{
    chebyshev_radial_grid, constant_solution, probe_starts, solve_green, solve_newton_with, uniqueness_probe_with,
    verify_super_polyharmonic, verify_symmetry_monotonicity, Classification, Nonlinearity, SolutionKind, PROBE_TOL,
};
use gjms_core::rayleigh::{minimize_with, rayleigh_quotient, sharp_constant, OptimizerConfig};
use gjms_core::spectral::{default_order, gjms_eigenvalues, Discretization, SphereParams, ZonalFunction};
use gjms_core::Error;

use crate::error::{usage, CliResult};
use crate::report::{num, Check, Table};
use crate::settings::Settings;

/// Relative error allowed between the minimum and the closed-form constant.
pub const SHARP_REL_TOL: f64 = 1e-6;
/// Distance to the constants allowed for a reported minimizer.
pub const MINIMIZER_DIST_TOL: f64 = 1e-5;
pub const GREEN_TOL: f64 = 1e-8;
pub const CONSTANT_MATCH_TOL: f64 = 1e-8;

/// Grid for the monotonicity verifier, radii `0..10`.
pub fn monotone_grid() -> Vec<f64> {
    (0..=400).map(|i| i as f64 * 0.025).collect()
}
pub const VERIFY_R_MAX: f64 = 4.0;
pub const VERIFY_POINTS: usize = 129;

/// What a command produced, before provenance is attached.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub table: Table,
    pub seed: Option<u64>,
    pub degree: Option<usize>,
    pub order: Option<usize>,
}

impl Outcome {
    pub fn new(inputs: Value, results: Value, table: Table) -> Self {
        Self {
            inputs,
            results,
            checks: Vec::new(),
            table,
            seed: None,
            degree: None,
            order: None,
        }
    }
}

pub fn allowed_flags(command: &str) -> &'static [&'static str] {
    match command {
        "eigenvalues" => &["m", "n", "K", "tol"],
        "sharp-constant" => &["m", "n", "p"],
        "minimize" => &["m", "n", "p", "K", "Q", "starts", "seed", "tol", "max-iter"],
        "solve" => &[
            "m", "n", "p", "f", "K", "Q", "seed", "tol", "max-iter", "init", "method",
        ],
        "probe" => &["m", "n", "p", "f", "K", "Q", "starts", "seed", "tol"],
        "verify" => &["m", "n", "p", "K", "starts", "seed", "only"],
        "sweep" => &["m", "n", "p", "lambda", "K", "Q", "starts", "seed", "tol", "max-iter"],
        _ => &[],
    }
}

pub fn reject_unused_flags(s: &Settings, command: &str) -> CliResult<()> {
    let allowed = allowed_flags(command);
    for key in s.flags() {
        if !allowed.contains(&key) && key != "out" && key != "format" {
            return Err(usage(format!("--{key} is not used by `{command}`")));
        }
    }
    Ok(())
}

pub fn sphere(s: &Settings) -> CliResult<SphereParams> {
    let m = s.required("m", s.usize("m")?)?;
    let n = s.required("n", s.usize("n")?)?;
    SphereParams::new(n, m).map_err(|e| s.invalid("n", e))
}

pub fn degree(s: &Settings, default: usize) -> CliResult<usize> {
    let k = s.usize("K")?.unwrap_or(default);
    if k < 1 {
        return Err(s.invalid("K", "truncation degree must be >= 1"));
    }
    Ok(k)
}

pub fn discretization(s: &Settings, params: SphereParams, k: usize) -> CliResult<(Discretization<f64>, usize)> {
    let q = s.usize("Q")?.unwrap_or(default_order(k));
    let disc =
        Discretization::with_order(params, k, q).map_err(|e| s.invalid(if s.has("Q") { "Q" } else { "K" }, e))?;
    Ok((disc, q))
}

pub fn positive(s: &Settings, key: &str, default: f64) -> CliResult<f64> {
    let x = s.real(key)?.unwrap_or(default);
    if x > 0.0 {
        Ok(x)
    } else {
        Err(s.invalid(key, "must be positive"))
    }
}

pub fn count(s: &Settings, key: &str, default: usize) -> CliResult<usize> {
    let x = s.usize(key)?.unwrap_or(default);
    if x >= 1 {
        Ok(x)
    } else {
        Err(s.invalid(key, "must be >= 1"))
    }
}

/// `--f`, or `--p` as shorthand for `f(t) = t^p`.
fn nonlinearity(s: &Settings) -> CliResult<Nonlinearity<f64>> {
    match (s.nonlinearity()?, s.real("p")?) {
        (Some(_), Some(_)) => Err(s.invalid("p", "give either f or p, not both")),
        (Some(f), None) => Ok(f),
        (None, Some(p)) => Nonlinearity::power(p).map_err(|e| s.invalid("p", e)),
        (None, None) => Err(usage("missing required field `f` (or `p` for f(t) = t^p)")),
    }
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Subcritical => "subcritical",
        Classification::Critical => "critical",
        Classification::Supercritical => "supercritical",
    }
}

pub fn eigenvalues(s: &Settings) -> CliResult<Outcome> {
    let params = sphere(s)?;
    let k = degree(s, 32)?;
    let tol = positive(s, "tol", 1e-10)?;
    let spectrum = gjms_eigenvalues::<f64>(params, k)?;
    let kernel = funk_hecke_spectrum(params, k, tol)?;
    let green = green_constant(&kernel, &spectrum)?;

    let mut table = Table::new(&["k", "lambda", "mu_hat", "green_product"]);
    let mut rows = Vec::new();
    for (j, (&l, &mu)) in spectrum.lambda.iter().zip(&kernel.mu).enumerate() {
        let prod = green.g_mn * mu * l;
        table.push(vec![j.to_string(), num(l), num(mu), num(prod)]);
        rows.push(json!({ "k": j, "lambda": l, "mu_hat": mu, "green_product": prod }));
    }
    let inputs = json!({ "m": params.m(), "n": params.n(), "K": k, "kernel_tol": tol });
    let results = json!({
        "g_mn": green.g_mn,
        "c_n": green.c_n,
        "max_green_defect": green.max_defect,
        "kernel_achieved_tol": kernel.achieved_tol,
        "rows": rows,
    });
    let mut out = Outcome::new(inputs, results, table);
    out.degree = Some(k);
    out.checks.push(Check::at_most(
        "green-identity",
        green.max_defect,
        GREEN_TOL,
        format!("max_k |g mu_k Lambda_k - 1| over k <= {k}"),
    ));
    Ok(out)
}

pub fn sharp_constant_table(s: &Settings) -> CliResult<Outcome> {
    let params = sphere(s)?;
    let grid = s.required("p", s.reals("p")?)?;
    let (m, n) = (params.m(), params.n());
    let mut table = Table::new(&["m", "n", "p", "sharp_constant"]);
    let mut rows = Vec::new();
    for &p in &grid {
        let c = sharp_constant::<f64>(m, n, p).map_err(|e| s.invalid("p", e))?;
        table.push(vec![m.to_string(), n.to_string(), num(p), num(c)]);
        rows.push(json!({ "p": p, "sharp_constant": c }));
    }
    let inputs = json!({ "m": m, "n": n, "p": grid });
    let results = json!({
        "method": "closed form Lambda_0 |S^n|^(1 - 2/p)",
        "critical_exponent": params.critical_sobolev_exponent::<f64>(),
        "rows": rows,
    });
    Ok(Outcome::new(inputs, results, table))
}

pub fn minimize(s: &Settings) -> CliResult<Outcome> {
    let params = sphere(s)?;
    let p = s.required("p", s.real("p")?)?;
    let k = degree(s, 32)?;
    let mut cfg = OptimizerConfig::new(params, p);
    cfg.degree = k;
    cfg.starts = count(s, "starts", cfg.starts)?;
    cfg.seed = s.u64("seed")?.unwrap_or(cfg.seed);
    cfg.tol_grad = positive(s, "tol", cfg.tol_grad)?;
    cfg.max_iter = count(s, "max-iter", cfg.max_iter)?;
    cfg.validate().map_err(|e| s.invalid("p", e))?;
    let (disc, q) = discretization(s, params, k)?;

    let r = minimize_with(&cfg, &disc)?;
    let exact = sharp_constant::<f64>(params.m(), params.n(), p)?;
    let rel = ((r.value - exact) / exact).abs();

    let mut table = Table::new(&["iter", "value", "grad_norm"]);
    for t in &r.trace {
        table.push(vec![t.iter.to_string(), num(t.value), num(t.grad_norm)]);
    }
    let inputs = json!({
        "m": params.m(), "n": params.n(), "p": p, "K": k, "Q": q,
        "starts": cfg.starts, "seed": cfg.seed, "tol_grad": cfg.tol_grad, "max_iter": cfg.max_iter,
    });
    let results = json!({
        "value": r.value,
        "sharp_constant": exact,
        "relative_error": rel,
        "distance_to_constant": r.distance_to_constant,
        "grad_norm": r.grad_norm,
        "iters": r.iters,
        "converged": r.converged,
        "best_start": r.best_start,
        "starts": r.starts,
        "minimizer": r.minimizer.coeffs(),
        "trace": r.trace,
    });
    let mut out = Outcome::new(inputs, results, table);
    out.seed = Some(cfg.seed);
    out.degree = Some(k);
    out.order = Some(q);
    out.checks = vec![
        Check::holds(
            "converged",
            r.converged,
            format!("gradient norm {:e} against {:e}", r.grad_norm, cfg.tol_grad),
        ),
        Check::at_most(
            "sharp-constant",
            rel,
            SHARP_REL_TOL,
            format!("minimum {} against closed form {}", r.value, exact),
        ),
        Check::at_most(
            "minimizer-is-constant",
            r.distance_to_constant,
            MINIMIZER_DIST_TOL,
            "relative L2 distance of the minimizer to the constants",
        ),
    ];
    Ok(out)
}

/// Checks that a nonnegative solution is radially monotone on the plane and,
/// for `m >= 2`, super-polyharmonic.
pub fn verifier_checks(sol: &ZonalFunction<f64>, m: usize) -> CliResult<(bool, String)> {
    let mono = verify_symmetry_monotonicity(sol, &monotone_grid())?;
    let grid = chebyshev_radial_grid(VERIFY_R_MAX, VERIFY_POINTS)?;
    let prof = pullback_to_plane(sol, &grid)?;
    let (sph_pass, sph_detail) = match verify_super_polyharmonic(&prof, m) {
        Ok(r) => {
            let worst = r
                .levels
                .iter()
                .map(|l| l.min_value / l.sup.max(f64::MIN_POSITIVE))
                .fold(f64::INFINITY, f64::min);
            (
                r.pass,
                format!("super-polyharmonic={} worst level min/sup={worst:e}", r.pass),
            )
        }
        Err(Error::Accuracy { achieved, .. }) => (false, format!("super-polyharmonic unresolved, tail {achieved:e}")),
        Err(e) => return Err(e.into()),
    };
    Ok((
        mono.pass && sph_pass,
        format!(
            "monotone={} worst increase {:e}; {sph_detail}",
            mono.pass, mono.worst_increase
        ),
    ))
}

fn initial_guess(
    s: &Settings,
    disc: &Discretization<f64>,
    f: &Nonlinearity<f64>,
    seed: u64,
) -> CliResult<(String, ZonalFunction<f64>)> {
    let params = disc.params();
    let k = disc.degree();
    let base = constant_solution(params, f).filter(|c| *c > 0.0).unwrap_or(1.0);
    let spec = s.text("init").unwrap_or("constant");
    let init = match spec.split_once(':') {
        None if spec == "constant" => ZonalFunction::constant(params, k, base)?,
        None if spec == "random" => probe_starts(disc, base, 2, seed)?.pop().expect("two starts"),
        Some(("bubble", lambda)) => {
            let lambda = crate::settings::parse_real(lambda).map_err(|e| s.invalid("init", e))?;
            let b = BubbleParams::new(lambda, params).map_err(|e| s.invalid("init", e))?;
            // at λ = 1 the bubble is 2^{-w}; scale it onto the constant
            let beta = base * 2f64.powf(params.conformal_weight::<f64>());
            bubble_on_sphere(&b, &disc.basis)?.function.scaled(beta)
        }
        _ => return Err(s.invalid("init", "expected constant, random or bubble:<lambda>")),
    };
    Ok((spec.to_string(), init))
}

pub fn solve(s: &Settings) -> CliResult<Outcome> {
    let params = sphere(s)?;
    let f = nonlinearity(s)?;
    let k = degree(s, 32)?;
    let tol = positive(s, "tol", 1e-10)?;
    let max_iter = count(s, "max-iter", 100)?;
    let seed = s.u64("seed")?.unwrap_or(0);
    let method = s.text("method").unwrap_or("newton");
    if method == "green" && s.has("Q") {
        return Err(s.invalid("Q", "the Green iteration uses the default quadrature order"));
    }
    let (disc, q) = discretization(s, params, k)?;
    let (init_name, init) = initial_guess(s, &disc, &f, seed)?;
    let r = match method {
        "newton" => solve_newton_with(&disc, &f, &init, tol, max_iter)?,
        "green" => solve_green(params, &f, &init, tol, max_iter).map_err(|e| match e {
            Error::Domain(msg) => s.invalid("f", msg),
            e => e.into(),
        })?,
        _ => return Err(s.invalid("method", "expected newton or green")),
    };

    let class = f.classify(params);
    let constant = constant_solution(params, &f);
    let sup = r.solution.coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max);
    let nonnegative = r.negativity >= -1e-9 * sup;
    let nontrivial = r.solution.l2_norm() > 1e-6 * init.l2_norm();

    // convergence may also be declared at the rounding floor above `tol`
    let mut checks = vec![Check::holds(
        "converged",
        r.converged,
        format!("{} iterations, residual {:e}, tol {tol:e}", r.iters, r.residual),
    )];
    let mut verifiers = Value::Null;
    if r.converged && nonnegative && nontrivial {
        if class == Classification::Subcritical {
            checks.push(Check::at_most(
                "uniqueness",
                r.distance_to_constant,
                gjms_core::lane_emden::CONSTANT_THRESHOLD,
                "a positive subcritical solution must be constant",
            ));
        }
        let (pass, detail) = verifier_checks(&r.solution, params.m())?;
        checks.push(Check::holds("symmetry-monotonicity", pass, detail.clone()));
        verifiers = json!({ "pass": pass, "detail": detail });
    }

    let mut table = Table::new(&["k", "coefficient"]);
    for (j, c) in r.solution.coeffs().iter().enumerate() {
        table.push(vec![j.to_string(), num(*c)]);
    }
    let inputs = json!({
        "m": params.m(), "n": params.n(), "f": f.to_string(), "K": k, "Q": q, "tol": tol,
        "max_iter": max_iter, "method": method, "init": init_name, "seed": seed,
    });
    let results = json!({
        "classification": class_name(class),
        "constant_solution": constant,
        "kind": r.classification,
        "converged": r.converged,
        "residual": r.residual,
        "iters": r.iters,
        "distance_to_constant": r.distance_to_constant,
        "negativity": r.negativity,
        "mean": r.solution.mean(),
        "coefficients": r.solution.coeffs(),
        "verifiers": verifiers,
    });
    let mut out = Outcome::new(inputs, results, table);
    out.checks = checks;
    out.seed = Some(seed);
    out.degree = Some(k);
    out.order = Some(if method == "green" { default_order(k) } else { q });
    Ok(out)
}

pub fn probe(s: &Settings) -> CliResult<Outcome> {
    let params = sphere(s)?;
    let f = nonlinearity(s)?;
    let k = degree(s, 24)?;
    let trials = count(s, "starts", 50)?;
    let seed = s.u64("seed")?.unwrap_or(0);
    let tol = positive(s, "tol", PROBE_TOL)?;
    if f.classify(params) != Classification::Subcritical {
        return Err(s.invalid(
            if s.has("f") { "f" } else { "p" },
            "the uniqueness probe needs a subcritical f",
        ));
    }
    let (disc, q) = discretization(s, params, k)?;
    let r = uniqueness_probe_with(&disc, &f, trials, seed, tol)?;

    let mut table = Table::new(&["trial", "converged", "kind", "residual", "iters", "mean", "negativity"]);
    for o in &r.outcomes {
        let kind = match o.classification {
            SolutionKind::Constant => "constant",
            SolutionKind::Nonconstant => "nonconstant",
            SolutionKind::Diverged => "diverged",
        };
        table.push(vec![
            o.trial.to_string(),
            o.converged.to_string(),
            kind.to_string(),
            num(o.residual),
            o.iters.to_string(),
            num(o.mean),
            num(o.negativity),
        ]);
    }
    let mut checks = Vec::new();
    if r.linear_kernel_dimension.is_none() {
        checks.push(Check::at_most(
            "no-counterexamples",
            r.counterexamples.len() as f64,
            0.0,
            format!(
                "{} converged nonnegative nonconstant solutions",
                r.counterexamples.len()
            ),
        ));
        checks.push(Check::at_least(
            "constant-reached",
            r.constant_hits as f64,
            1.0,
            format!("{} of {} converged runs", r.constant_hits, r.converged),
        ));
        checks.push(Check::at_most(
            "constant-value",
            r.max_constant_error,
            CONSTANT_MATCH_TOL,
            "max |mean(u) - c| / c over constant outcomes",
        ));
    }
    let inputs = json!({
        "m": params.m(), "n": params.n(), "f": f.to_string(), "K": k, "Q": q,
        "trials": trials, "seed": seed, "tol": tol,
    });
    let mut out = Outcome::new(inputs, serde_json::to_value(&r)?, table);
    out.checks = checks;
    out.seed = Some(seed);
    out.degree = Some(k);
    out.order = Some(q);
    Ok(out)
}

pub fn sweep(s: &Settings) -> CliResult<Outcome> {
    let ms = s.required("m", s.usizes("m")?)?;
    let ns = s.required("n", s.usizes("n")?)?;
    let ps = s.required("p", s.reals("p")?)?;
    let lambdas = s.reals("lambda")?;
    let k = degree(s, 32)?;
    let starts = count(s, "starts", 20)?;
    let seed = s.u64("seed")?.unwrap_or(0);
    let tol = positive(s, "tol", 1e-9)?;
    let max_iter = count(s, "max-iter", 5000)?;
    let q = s.usize("Q")?.unwrap_or(default_order(k));

    let mut combos = Vec::new();
    let mut skipped = Vec::new();
    for &m in &ms {
        for &n in &ns {
            for &p in &ps {
                let Ok(params) = SphereParams::new(n, m) else {
                    skipped.push(json!({ "m": m, "n": n, "p": p, "reason": "need n > 2m, n >= 3, m >= 1" }));
                    continue;
                };
                let crit = params.critical_sobolev_exponent::<f64>();
                let ok = match lambdas {
                    Some(_) => (2.0..=crit).contains(&p),
                    None => p > 2.0 + 1e-3 && p < crit,
                };
                if ok {
                    combos.push((params, p));
                } else {
                    skipped.push(json!({ "m": m, "n": n, "p": p, "reason": format!("p outside the range for critical exponent {crit}") }));
                }
            }
        }
    }

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let table = match &lambdas {
        None => {
            let mut table = Table::new(&[
                "m",
                "n",
                "p",
                "sharp_constant",
                "minimum",
                "relative_error",
                "distance_to_constant",
                "converged",
            ]);
            let (mut worst_rel, mut worst_dist) = (0.0f64, 0.0f64);
            for &(params, p) in &combos {
                let mut cfg = OptimizerConfig::new(params, p);
                cfg.degree = k;
                cfg.starts = starts;
                cfg.seed = seed;
                cfg.tol_grad = tol;
                cfg.max_iter = max_iter;
                let disc = Discretization::with_order(params, k, q).map_err(|e| s.invalid("Q", e))?;
                let r = minimize_with(&cfg, &disc)?;
                let exact = sharp_constant::<f64>(params.m(), params.n(), p)?;
                let rel = ((r.value - exact) / exact).abs();
                worst_rel = worst_rel.max(rel);
                worst_dist = worst_dist.max(r.distance_to_constant);
                table.push(vec![
                    params.m().to_string(),
                    params.n().to_string(),
                    num(p),
                    num(exact),
                    num(r.value),
                    num(rel),
                    num(r.distance_to_constant),
                    r.converged.to_string(),
                ]);
                rows.push(json!({
                    "m": params.m(), "n": params.n(), "p": p, "sharp_constant": exact, "minimum": r.value,
                    "relative_error": rel, "distance_to_constant": r.distance_to_constant, "converged": r.converged,
                }));
            }
            if !combos.is_empty() {
                checks.push(Check::at_most(
                    "sharp-constant",
                    worst_rel,
                    SHARP_REL_TOL,
                    "worst relative error over the grid",
                ));
                checks.push(Check::at_most(
                    "minimizer-is-constant",
                    worst_dist,
                    MINIMIZER_DIST_TOL,
                    "worst distance to the constants over the grid",
                ));
            }
            table
        }
        Some(lambdas) => {
            let mut table = Table::new(&["m", "n", "p", "lambda", "quotient", "margin", "tail"]);
            let mut worst_margin = f64::INFINITY;
            for &(params, p) in &combos {
                let disc = Discretization::with_order(params, k, q).map_err(|e| s.invalid("Q", e))?;
                let one = ZonalFunction::constant(params, k, 1.0)?;
                let base = rayleigh_quotient(&one, p, &disc)?;
                let subcritical = p < params.critical_sobolev_exponent::<f64>();
                for &lambda in lambdas {
                    let b = BubbleParams::new(lambda, params).map_err(|e| s.invalid("lambda", e))?;
                    let e = bubble_on_sphere(&b, &disc.basis)?;
                    let value = rayleigh_quotient(&e.function, p, &disc)?;
                    let margin = value - base;
                    if subcritical && lambda != 1.0 {
                        worst_margin = worst_margin.min(margin);
                    }
                    table.push(vec![
                        params.m().to_string(),
                        params.n().to_string(),
                        num(p),
                        num(lambda),
                        num(value),
                        num(margin),
                        num(e.tail),
                    ]);
                    rows.push(json!({
                        "m": params.m(), "n": params.n(), "p": p, "lambda": lambda,
                        "quotient": value, "margin": margin, "tail": e.tail,
                    }));
                }
            }
            if worst_margin.is_finite() {
                checks.push(Check::above(
                    "subcritical-strictness",
                    worst_margin,
                    0.0,
                    "smallest quotient excess of a nonconstant bubble over the constant",
                ));
            }
            table
        }
    };
    let inputs = json!({
        "m": ms, "n": ns, "p": ps, "lambda": lambdas, "K": k, "Q": q,
        "starts": starts, "seed": seed, "tol_grad": tol, "max_iter": max_iter,
    });
    let results = json!({ "rows": rows, "skipped": skipped });
    let mut out = Outcome::new(inputs, results, table);
    out.checks = checks;
    out.seed = Some(seed);
    out.degree = Some(k);
    out.order = Some(q);
    Ok(out)
}
