use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context as _};
use clap::Args;
use qssep_core::{
    associahedron_profile, estimate_loop_cumulant, format_t_poly, profile_of, Comparison, Cycle, DeformationTower,
    Error, MultilinearPoly, Profile, Property, QssepConfig, RegularTower, Report, Solver, SweepSummary, Verifier,
};
use serde::Serialize;

use crate::manifest::Context;
use crate::OutputArgs;

pub const CACHE_ENV: &str = "QSSEP_CACHE_DIR";

type Outcome = anyhow::Result<bool>;

/// Usage errors map to 2, internal invariant violations to 3.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Invariant(_) | Error::NonFinite { .. } | Error::NotMultilinear(_)) => 3,
        _ => 2,
    }
}

fn solver() -> anyhow::Result<Solver> {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => Ok(Solver::with_disk_cache(&dir)
            .with_context(|| format!("cannot use cache directory {}", PathBuf::from(&dir).display()))?),
        _ => Ok(Solver::new()),
    }
}

fn parse_cycle(s: &str) -> anyhow::Result<Cycle> {
    Ok(s.parse::<Cycle>()?)
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------- loop-eval

#[derive(Args, Debug, Serialize)]
pub struct LoopEvalArgs {
    /// Cycle in sequence form, e.g. "(1 3 2 4)".
    #[arg(long)]
    pub cycle: String,
    /// Evaluate at x1,x2,... (one value per point).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub at: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct LoopEvalResult {
    cycle: Cycle,
    degree: usize,
    poly: MultilinearPoly,
    expanded: String,
    factored: Option<String>,
    at: Option<Vec<f64>>,
    value: Option<f64>,
}

pub fn loop_eval(a: &LoopEvalArgs, ctx: Context) -> Outcome {
    let sigma = parse_cycle(&a.cycle)?;
    let lv = solver()?.loop_expectation(&sigma)?;
    if let Some(x) = &a.at {
        if x.len() != lv.degree {
            bail!("--at has {} values, the cycle has {} points", x.len(), lv.degree);
        }
    }
    let expanded = lv.poly.to_string();
    let pretty = lv.poly.pretty_factored();
    let res = LoopEvalResult {
        value: a.at.as_ref().map(|x| lv.poly.eval_f64(x)),
        at: a.at.clone(),
        factored: (pretty != expanded).then_some(pretty.clone()),
        cycle: lv.cycle,
        degree: lv.degree,
        expanded,
        poly: lv.poly,
    };
    let mut text = format!("{pretty}\ncycle: {}\ndegree: {}\nexpanded: {}\n", res.cycle, res.degree, res.expanded);
    if let (Some(x), Some(v)) = (&res.at, res.value) {
        let _ = writeln!(text, "value at {x:?}: {v}");
    }
    ctx.emit(a.out.json, &res, &text)?;
    Ok(true)
}

// ---------------------------------------------------------------- verify

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Largest loop size swept.
    #[arg(long)]
    pub pmax: usize,
    /// Smallest loop size swept.
    #[arg(long, default_value_t = 1)]
    pub pmin: usize,
    /// Properties to check: boundary, moves, continuity, gluing, compat, propag, pair or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub property: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct VerifyResult {
    pmin: usize,
    pmax: usize,
    properties: Vec<Property>,
    summary: SweepSummary,
    by_property: BTreeMap<String, SweepSummary>,
    failures: Vec<Report>,
}

fn parse_properties(names: &[String]) -> anyhow::Result<Vec<Property>> {
    let mut props = Vec::new();
    for n in names {
        let add: Vec<Property> = if n.trim().eq_ignore_ascii_case("all") {
            Property::SWEEP.iter().copied().chain([Property::Pair]).collect()
        } else {
            vec![n.parse::<Property>()?]
        };
        for p in add {
            if !props.contains(&p) {
                props.push(p);
            }
        }
    }
    Ok(props)
}

pub fn verify(a: &VerifyArgs, ctx: Context) -> Outcome {
    if a.pmin > a.pmax {
        bail!("--pmin {} exceeds --pmax {}", a.pmin, a.pmax);
    }
    let properties = parse_properties(&a.property)?;
    let solver = solver()?;
    let reports = Verifier::new(&solver).sweep(a.pmin, a.pmax, &properties);
    let by_property: BTreeMap<String, SweepSummary> = properties
        .iter()
        .map(|p| {
            let mine: Vec<Report> = reports.iter().filter(|r| r.property == *p).cloned().collect();
            (p.to_string(), SweepSummary::of(&mine))
        })
        .collect();
    let res = VerifyResult {
        pmin: a.pmin,
        pmax: a.pmax,
        summary: SweepSummary::of(&reports),
        failures: reports.into_iter().filter(|r| !r.pass).collect(),
        properties,
        by_property,
    };
    let mut text = String::new();
    for (name, s) in &res.by_property {
        let _ = writeln!(text, "{name}: {}/{} pass", s.passed, s.total);
    }
    let _ = writeln!(
        text,
        "{} {}/{} checks pass for {} <= P <= {}",
        status(res.summary.failed == 0),
        res.summary.passed,
        res.summary.total,
        res.pmin,
        res.pmax
    );
    for r in &res.failures {
        let _ = writeln!(text, "{r}");
    }
    ctx.emit(a.out.json, &res, &text)?;
    Ok(res.summary.failed == 0)
}

// ---------------------------------------------------------------- series

#[derive(Args, Debug, Serialize)]
pub struct SeriesArgs {
    /// Deformation profile, e.g. "(2 1)"; omit or pass "()" for the regular loop.
    #[arg(long)]
    pub profile: Option<String>,
    /// Position of the profile along the loop.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Level; the reconstructed loop has k + 1 points.
    #[arg(long)]
    pub k: usize,
    /// Truncation order of the Catalan series the pipeline starts from.
    #[arg(long)]
    pub order: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct SeriesResult {
    profile: Profile,
    q: usize,
    k: usize,
    order: usize,
    cycle: Cycle,
    coefficients: Vec<String>,
    truncation: isize,
    reconstructed: MultilinearPoly,
    reconstructed_text: String,
}

pub fn series(a: &SeriesArgs, ctx: Context) -> Outcome {
    let mu = match a.profile.as_deref().map(str::trim) {
        None | Some("()") | Some("") => Profile::empty(),
        Some(s) => s.parse::<Profile>()?,
    };
    let (order, series, cycle, reconstructed) = if mu.is_empty() {
        if a.q != 1 {
            bail!("--q only applies to a non-empty profile");
        }
        let order = a.order.unwrap_or(a.k);
        let reg = RegularTower::new(a.k, order)?;
        (order, reg.ck(a.k)?.clone(), Cycle::regular(a.k + 1), reg.reconstruct(a.k)?)
    } else {
        let order = a.order.unwrap_or_else(|| DeformationTower::required_order(&mu, a.k));
        let reg = RegularTower::new(a.k, order)?;
        let tower = DeformationTower::new(&reg, &mu, a.k)?;
        let cycle = mu.apply(a.q, a.k + 1)?;
        (order, tower.series(a.q, a.k)?.clone(), cycle, tower.reconstruct(a.q, a.k)?)
    };
    let res = SeriesResult {
        profile: mu,
        q: a.q,
        k: a.k,
        order,
        cycle,
        coefficients: series.display_y(),
        truncation: series.order() + 1,
        reconstructed_text: reconstructed.pretty_factored(),
        reconstructed,
    };
    let mut text = format!("loop: {}\n", res.cycle);
    for (n, c) in res.coefficients.iter().enumerate() {
        let _ = writeln!(text, "z^{n}: {c}");
    }
    let _ = writeln!(text, "+ O(z^{})", res.truncation);
    let _ = writeln!(text, "reconstructed: {}", res.reconstructed_text);
    ctx.emit(a.out.json, &res, &text)?;
    Ok(true)
}

// ---------------------------------------------------------------- simulate

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected i,j, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(i)?, p(j)?))
}

#[derive(Args, Debug, Serialize)]
pub struct SimArgs {
    /// Simulation parameters as JSON (default: L=10, n_a=1, n_b=0, 10^4 trajectories).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the seed of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of trajectories.
    #[arg(long)]
    pub n_traj: Option<usize>,
    /// Override the simulated time.
    #[arg(long)]
    pub t_max: Option<f64>,
}

impl SimArgs {
    fn load(&self, ctx: &mut Context) -> anyhow::Result<QssepConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                ctx.input(p);
                let raw = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&raw).with_context(|| format!("parsing {}", p.display()))?
            }
            None => QssepConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n_traj {
            cfg.n_traj = n;
        }
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        for w in cfg.validate()? {
            eprintln!("warning: {w}");
        }
        ctx.manifest.seed = Some(cfg.seed);
        Ok(cfg)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// CSV file for the comparison table; the manifest goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pair cumulant sites "i,j" (repeatable; default 3L/10,7L/10).
    #[arg(long = "pair", value_parser = parse_pair)]
    pub pairs: Vec<(usize, usize)>,
    /// Site whose variance is estimated (repeatable; default L/2).
    #[arg(long = "variance")]
    pub variances: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct SimulateResult {
    config: QssepConfig,
    elapsed_seconds: f64,
    rows: Vec<Comparison>,
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn simulate(a: &SimulateArgs, mut ctx: Context) -> Outcome {
    let cfg = a.sim.load(&mut ctx)?;
    let pairs = if a.pairs.is_empty() {
        vec![(3 * cfg.l / 10, 7 * cfg.l / 10)]
    } else {
        a.pairs.clone()
    };
    let variances = if a.variances.is_empty() {
        vec![cfg.l / 2]
    } else {
        a.variances.clone()
    };
    for &i in pairs.iter().flat_map(|(i, j)| [i, j]).chain(&variances) {
        if i >= cfg.sites() {
            bail!("site {i} outside the chain 0..={}", cfg.l);
        }
    }
    let start = Instant::now();
    let ens = qssep_core::run_steady(&cfg)?;
    let rows = qssep_core::compare(&cfg, &ens, &pairs, &variances)?;
    let res = SimulateResult {
        config: cfg,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        rows,
    };
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
        for r in &res.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        ctx.output(out);
        let side = manifest_path(out);
        ctx.output(&side);
        fs::write(&side, serde_json::to_string_pretty(&ctx.manifest)?)?;
    }
    let mut text = format!(
        "{} trajectories, L = {}, dt = {}, t_max = {}, seed = {} ({:.1} s)\n",
        res.config.n_traj, res.config.l, res.config.dt, res.config.t_max, res.config.seed, res.elapsed_seconds
    );
    let _ = writeln!(
        text,
        "{:<10} {:>7} {:>14} {:>12} {:>14} {:>9}",
        "observable", "indices", "estimate", "stderr", "prediction", "z_score"
    );
    for r in &res.rows {
        let _ = writeln!(
            text,
            "{:<10} {:>7} {:>14.8} {:>12.8} {:>14.8} {:>9.3}",
            r.observable, r.indices, r.estimate, r.stderr, r.prediction, r.z_score
        );
    }
    ctx.emit(a.output.json, &res, &text)?;
    Ok(true)
}

// ---------------------------------------------------------------- associahedron

#[derive(Args, Debug, Serialize)]
pub struct AssociahedronArgs {
    /// Dimension index n; the polynomial comes from the (n + 1)-point regular loop.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct AssociahedronResult {
    n: usize,
    coefficients: Vec<String>,
    polynomial: String,
}

pub fn associahedron(a: &AssociahedronArgs, ctx: Context) -> Outcome {
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let c = associahedron_profile(&solver()?, a.n + 1)?;
    let res = AssociahedronResult {
        n: a.n,
        coefficients: c.iter().map(ToString::to_string).collect(),
        polynomial: format_t_poly(&c),
    };
    ctx.emit(a.out.json, &res, &format!("{}\n", res.polynomial))?;
    Ok(true)
}

// ---------------------------------------------------------------- compare

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    /// Cycle in sequence form, e.g. "(1 3 2 4)".
    #[arg(long)]
    pub cycle: String,
    /// Also simulate (two-point loops only) with this configuration.
    #[arg(long)]
    pub simulate: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// Chain sites "i,j" for the simulated cumulant (default 3L/10,7L/10).
    #[arg(long, value_parser = parse_pair)]
    pub points: Option<(usize, usize)>,
    /// Statistical tolerance in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub sigmas: f64,
    /// Relative tolerance absorbing finite-size corrections.
    #[arg(long, default_value_t = 0.15)]
    pub rel_tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct Check {
    check: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct CompareResult {
    cycle: Cycle,
    poly: MultilinearPoly,
    checks: Vec<Check>,
    simulation: Option<Comparison>,
    pass: bool,
}

fn series_reconstruction(sigma: &Cycle) -> anyhow::Result<(String, MultilinearPoly)> {
    let p = sigma.size();
    let d = profile_of(sigma);
    if d.profile.is_empty() {
        let reg = RegularTower::for_points(p)?;
        return Ok(("regular tower".into(), reg.reconstruct(p - 1)?));
    }
    let tower = DeformationTower::build(&d.profile, p - 1)?;
    Ok((
        format!("profile {} at q = {}", d.profile, d.offset),
        tower.reconstruct(d.offset, p - 1)?,
    ))
}

pub fn compare(a: &CompareArgs, mut ctx: Context) -> Outcome {
    let sigma = parse_cycle(&a.cycle)?;
    let p = sigma.size();
    if a.simulate && p != 2 {
        bail!("simulation compares two-point loops only; {sigma} has {p} points");
    }
    let solver = solver()?;
    let lv = solver.loop_expectation(&sigma)?;
    let mut checks = Vec::new();

    let inv = lv.check_invariants();
    checks.push(Check {
        check: "solver invariants".into(),
        pass: inv.is_ok(),
        detail: match inv {
            Ok(()) => "boundary values and full derivative".into(),
            Err(e) => e.to_string(),
        },
    });

    let (how, rebuilt) = series_reconstruction(&sigma)?;
    let same = rebuilt == lv.poly;
    checks.push(Check {
        check: "series reconstruction".into(),
        pass: same,
        detail: if same {
            how
        } else {
            format!("{how}: difference {}", &rebuilt - &lv.poly)
        },
    });

    let verifier = Verifier::new(&solver);
    for prop in Property::SWEEP {
        let reports: Vec<Report> =
            prop.positions(p).into_iter().map(|j| verifier.check(prop, &sigma, j)).collect();
        let s = SweepSummary::of(&reports);
        let mut detail = format!("{}/{} positions", s.passed, s.total);
        for r in reports.iter().filter(|r| !r.pass) {
            let _ = write!(detail, "; {r}");
        }
        checks.push(Check {
            check: format!("verifier {prop}"),
            pass: s.failed == 0,
            detail,
        });
    }

    if p >= 2 {
        let mine = solver.minus_t_specialization(&sigma)?;
        let reference = solver.minus_t_specialization(&Cycle::regular(p))?;
        checks.push(Check {
            check: "-t specialization".into(),
            pass: mine == reference,
            detail: format!("{} (regular: {})", format_t_poly(&mine), format_t_poly(&reference)),
        });
    }

    let mut simulation = None;
    if a.simulate {
        let cfg = a.sim.load(&mut ctx)?;
        let (i, j) = a.points.unwrap_or((3 * cfg.l / 10, 7 * cfg.l / 10));
        let (i, j) = (i.min(j), i.max(j));
        if j >= cfg.sites() || i == j {
            bail!("points must be two distinct sites in 0..={}", cfg.l);
        }
        let x = [cfg.x(i), cfg.x(j)];
        let prediction = cfg.delta_n().powi(2) * lv.poly.eval_f64(&x) / cfg.l as f64;
        let ens = qssep_core::run_steady(&cfg)?;
        let est = estimate_loop_cumulant(&ens, &[i, j], &sigma)?;
        let row = Comparison {
            observable: "pair".into(),
            indices: format!("{i} {j}"),
            estimate: est.value,
            stderr: est.stderr,
            prediction,
            z_score: est.z_score(prediction),
        };
        let pass = row.within(a.sigmas, a.rel_tol);
        checks.push(Check {
            check: "monte carlo".into(),
            pass,
            detail: format!(
                "{:.6} ± {:.6} vs {:.6} (z = {:.2}, tolerance max({} stderr, {}%))",
                row.estimate,
                row.stderr,
                row.prediction,
                row.z_score,
                a.sigmas,
                100.0 * a.rel_tol
            ),
        });
        simulation = Some(row);
    }

    let pass = checks.iter().all(|c| c.pass);
    let res = CompareResult {
        poly: lv.poly,
        cycle: sigma,
        checks,
        simulation,
        pass,
    };
    let mut text = format!("{} = {}\n", res.cycle, res.poly.pretty_factored());
    let width = res.checks.iter().map(|c| c.check.len()).max().unwrap_or(0);
    for c in &res.checks {
        let _ = writeln!(text, "{:<width$}  {}  {}", c.check, status(c.pass), c.detail);
    }
    let _ = writeln!(text, "{}", status(res.pass));
    ctx.emit(a.out.json, &res, &text)?;
    Ok(res.pass)
}
