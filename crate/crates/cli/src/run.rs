use std::fmt::Write as _;
use std::fs;

use anyhow::{Context, Result};
use doublematch::cauchy::aliasing_check;
use doublematch::pi::{pi_iterate, MeromorphicIterate};
use doublematch::prefactor::plan;
use doublematch::scaling::{condition_validator, scaling_sweep, unit_kernel_spec, ContourSpec, ScalingOptions};
use doublematch::verify::{match_sweep, MatchOptions, SyntheticFamily};
use doublematch::{matrix_fn, sup_norm_on_grid, CircleGrid, Complex64, ComplexMatrix, ExponentProfile, SampledMatrixFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{named_profiles, Mode, RunConfig};
use crate::output::{export_csv, write_json, write_table};

/// What a finished run reports back to the caller.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub pass: bool,
    pub summary: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mode = config.mode.expect("validated");
    let outcome = match mode {
        Mode::MatchVerify => match_verify(config)?,
        Mode::ScalingVerify => scaling_verify(config)?,
        Mode::PiDemo => pi_demo(config)?,
        Mode::Profiles => profiles(config)?,
    };
    fs::write(config.output_dir.join("summary.txt"), &outcome.summary)
        .with_context(|| format!("writing summary to {}", config.output_dir.display()))?;
    Ok(outcome)
}

fn prepare(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.output_dir).with_context(|| format!("creating {}", config.output_dir.display()))
}

fn slope_text(s: Option<f64>) -> String {
    s.map_or_else(|| "at floor".to_string(), |v| format!("{v:.3}"))
}

fn match_verify(config: &RunConfig) -> Result<RunOutcome> {
    let profile = config.profile.resolve()?;
    let fam = SyntheticFamily::with_units(profile);
    fam.validate()?;
    let pl = plan(&profile)?;
    let opts = MatchOptions {
        quad_nodes: config.grid_m,
        eval_nodes: config.grid_m,
        outer_nodes: config.grid_m,
        tol: config.tol_slope,
    };
    let outcome = match_sweep(&fam, &config.n_values(), &opts)?;
    let report = &outcome.report;
    let degrees_ok = outcome.points.iter().all(|p| p.degree <= p.degree_bound);
    let pass = report.pass && degrees_ok;

    prepare(config)?;
    export_csv(&outcome.points, &config.output_dir.join("residuals.csv"))?;
    let doc = json!({
        "config_echo": config,
        "profile": profile,
        "K": pl.k,
        "slopes": {
            "inner": report.slope_inner,
            "outer": report.slope_outer,
            "predicted_inner": report.predicted_inner,
            "predicted_outer": report.predicted_outer,
        },
        "pass": pass,
        "floor_excluded_points": report.floor_excluded_points,
        "tol_slope": report.tol,
        "degrees": outcome.points.iter().map(|p| json!({"n": p.n, "degree": p.degree, "bound": p.degree_bound})).collect::<Vec<_>>(),
    });
    write_json(&doc, &config.output_dir.join("report.json"))?;

    let mut s = String::new();
    writeln!(s, "mode: match-verify")?;
    writeln!(s, "profile: {}", profile_text(&profile))?;
    writeln!(s, "K: {}", pl.k.map_or("none (trivial route)".to_string(), |k| k.to_string()))?;
    writeln!(s, "{:>6}  {:>12}  {:>12}  {:>6}", "n", "inner", "outer", "degree")?;
    for p in &outcome.points {
        writeln!(s, "{:>6}  {:>12.4e}  {:>12.4e}  {:>3}/{:<2}", p.n, p.residual_inner, p.residual_outer, p.degree, p.degree_bound)?;
    }
    writeln!(
        s,
        "inner slope {} (predicted {:.3}, limit {:.3})",
        slope_text(report.slope_inner),
        report.predicted_inner,
        report.predicted_inner + report.tol
    )?;
    writeln!(
        s,
        "outer slope {} (predicted {:.3}, limit {:.3})",
        slope_text(report.slope_outer),
        report.predicted_outer,
        report.predicted_outer + report.tol
    )?;
    if !report.floor_excluded_points.is_empty() {
        writeln!(s, "at floor (excluded from fits): {:?}", report.floor_excluded_points)?;
    }
    writeln!(s, "degree bound respected: {degrees_ok}")?;
    writeln!(s, "pass: {pass}")?;
    Ok(RunOutcome { pass, summary: s })
}

fn scaling_verify(config: &RunConfig) -> Result<RunOutcome> {
    let profile = config.profile.resolve()?;
    let fam = SyntheticFamily::with_units(profile);
    fam.validate()?;
    let spec = ContourSpec::default_for(profile, fam.m)?;
    let kspec = unit_kernel_spec(fam.m);
    let cond = condition_validator(&profile);
    let opts = ScalingOptions { quad_nodes: config.grid_m, circle_nodes: config.grid_m, ..ScalingOptions::default() };
    let outcome = scaling_sweep(&fam, &spec, &kspec, &config.n_values(), &opts, config.tol_slope)?;
    let report = &outcome.report;

    prepare(config)?;
    let rows: Vec<Vec<f64>> = outcome
        .points
        .iter()
        .map(|p| {
            let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            vec![p.n, p.deviation, p.lipschitz, worst(&p.sandwich), worst(&p.r_difference), p.r_minus_identity]
        })
        .collect();
    let header = ["n", "near_origin_deviation", "near_origin_lipschitz", "sandwich_max", "r_difference_max", "r_minus_identity"];
    let mut buf = Vec::new();
    write_table(&header, &rows, &mut buf)?;
    fs::write(config.output_dir.join("scaling.csv"), buf)?;
    let doc = json!({
        "config_echo": config,
        "profile": profile,
        "K": plan(&profile)?.k,
        "condition": cond,
        "scaling": report,
        "pass": report.pass,
    });
    write_json(&doc, &config.output_dir.join("report.json"))?;

    let t = &report.targets;
    let tol = report.tol;
    let mut s = String::new();
    writeln!(s, "mode: scaling-verify")?;
    writeln!(s, "profile: {}", profile_text(&profile))?;
    writeln!(s, "condition on c: threshold {:.4}, c = {}, {}", cond.threshold, cond.c, if cond.pass { "holds" } else { "fails" })?;
    let line = |name: &str, slope: Option<f64>, bound: String, ok: bool| format!("{name:<28} slope {:>9}  {bound}  {}", slope_text(slope), if ok { "ok" } else { "FAIL" });
    writeln!(s, "{}", line("near-origin deviation", report.deviation.slope, format!("<= {:.3}", t.deviation + tol), report.pass_deviation))?;
    writeln!(
        s,
        "{}",
        line("near-origin lipschitz", report.lipschitz.slope, format!("in [{:.3}, {:.3}]", t.lipschitz - tol, t.lipschitz + tol), report.pass_lipschitz)
    )?;
    writeln!(s, "{}", line("sandwich (worst pair)", report.sandwich_worst, format!("<= {:.3}", t.sandwich + tol), report.pass_sandwich))?;
    writeln!(s, "{}", line("R difference (worst pair)", report.r_difference_worst, format!("<= {:.3}", t.r_difference + tol), report.pass_r_difference))?;
    writeln!(s, "{}", line("|R - I|", report.r_minus_identity.slope, format!("<= {:.3}", t.r_minus_identity + tol), report.pass_r_minus_identity))?;
    writeln!(s, "pass: {}", report.pass)?;
    Ok(RunOutcome { pass: report.pass, summary: s })
}

#[derive(Debug, Clone, Serialize)]
struct PiLevel {
    level: usize,
    nodes: usize,
    pole_order_bound: usize,
    measured_pole_order: usize,
    sup_norm: f64,
    aliasing: f64,
}

const PI_DEMO_RADIUS: f64 = 0.5;
const PI_DEMO_LEVELS: usize = 3;

/// `sum_{k=-q}^{deg} F_k z^k + W z0/(z0 - z)` with seeded coefficients.
fn random_rational(seed: u64, m: usize) -> (usize, SampledMatrixFunction, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(1..=3usize);
    let deg = rng.gen_range(0..=4i32);
    let mut draw = |scale: f64| ComplexMatrix::from_fn(m, |_, _| Complex64::from_polar(scale * rng.gen_range(0.0..1.0f64).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)));
    let poly: Vec<(i32, ComplexMatrix)> = (-(q as i32)..=deg).map(|k| (k, draw(PI_DEMO_RADIUS.powi(-k)))).collect();
    let w = draw(1.0);
    let z0 = Complex64::from_polar(2.5, 0.7);
    let f = matrix_fn(move |z| {
        let mut acc = w.scale(z0 / (z0 - z));
        for (k, c) in &poly {
            acc += &c.scale(z.powi(*k));
        }
        Ok(acc)
    });
    let grid = CircleGrid::staggered(PI_DEMO_RADIUS, 64).expect("valid grid");
    let samples = SampledMatrixFunction::from_fn(grid, m, f, q).expect("finite samples");
    (q, samples, deg as usize)
}

fn pi_demo(config: &RunConfig) -> Result<RunOutcome> {
    let m = 2;
    let (q, samples, deg) = random_rational(config.seed, m);
    let samples = doublematch::cauchy::resolve(samples.resample(samples.grid().with_len(config.grid_m)?)?)?;
    let base = MeromorphicIterate::new(samples, q)?;
    let chain = pi_iterate(&base, PI_DEMO_LEVELS)?;
    let levels: Vec<PiLevel> = chain
        .iter()
        .map(|it| PiLevel {
            level: it.level,
            nodes: it.samples.grid().len(),
            pole_order_bound: it.pole_order,
            measured_pole_order: it.measured_pole_order(),
            sup_norm: sup_norm_on_grid(&it.samples),
            aliasing: aliasing_check(&it.samples),
        })
        .collect();
    let pass = levels
        .iter()
        .all(|l| l.measured_pole_order <= l.pole_order_bound && l.aliasing < doublematch::cauchy::ALIASING_TOL);

    prepare(config)?;
    let rows: Vec<Vec<f64>> = levels
        .iter()
        .map(|l| vec![l.level as f64, l.nodes as f64, l.pole_order_bound as f64, l.measured_pole_order as f64, l.sup_norm, l.aliasing])
        .collect();
    let mut buf = Vec::new();
    write_table(&["level", "nodes", "pole_order_bound", "measured_pole_order", "sup_norm", "aliasing"], &rows, &mut buf)?;
    fs::write(config.output_dir.join("pi_levels.csv"), buf)?;
    let doc = json!({
        "config_echo": config,
        "m": m,
        "pole_order": q,
        "polynomial_degree": deg,
        "levels": levels,
        "pass": pass,
    });
    write_json(&doc, &config.output_dir.join("report.json"))?;

    let mut s = String::new();
    writeln!(s, "mode: pi-demo (seed {}, m = {m}, pole order {q})", config.seed)?;
    writeln!(s, "{:>5}  {:>6}  {:>5}  {:>8}  {:>12}  {:>10}", "level", "nodes", "bound", "measured", "sup norm", "aliasing")?;
    for l in &levels {
        writeln!(
            s,
            "{:>5}  {:>6}  {:>5}  {:>8}  {:>12.4e}  {:>10.2e}",
            l.level, l.nodes, l.pole_order_bound, l.measured_pole_order, l.sup_norm, l.aliasing
        )?;
    }
    writeln!(s, "pass: {pass}")?;
    Ok(RunOutcome { pass, summary: s })
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x}")
    } else {
        format!("{x:.4}")
    }
}

fn profile_text(p: &ExponentProfile) -> String {
    format!("a={} b={} c={} d={} e={} p={} r={}", num(p.a), num(p.b), num(p.c), num(p.d), num(p.e), p.p, num(p.r))
}

fn profiles(config: &RunConfig) -> Result<RunOutcome> {
    let mut rows = Vec::new();
    let mut s = String::new();
    writeln!(s, "{:<10} {:<50} {:>3} {:>8} {:>10} {:>6}", "name", "profile", "K", "ratio", "threshold", "cond")?;
    for (name, p) in named_profiles() {
        let pl = plan(&p)?;
        let cond = condition_validator(&p);
        writeln!(
            s,
            "{:<10} {:<50} {:>3} {:>8.4} {:>10.4} {:>6}",
            name,
            profile_text(&p),
            pl.k.map_or("-".to_string(), |k| k.to_string()),
            pl.ratio,
            cond.threshold,
            if cond.pass { "holds" } else { "fails" }
        )?;
        rows.push(json!({"name": name, "profile": p, "K": pl.k, "ratio": pl.ratio, "trivial": pl.trivial, "condition": cond}));
    }
    prepare(config)?;
    write_json(&json!({"config_echo": config, "profiles": rows, "pass": true}), &config.output_dir.join("report.json"))?;
    Ok(RunOutcome { pass: true, summary: s })
}
