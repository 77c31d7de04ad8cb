use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use leafgrowth::growth::{run_replicas, GROWTH_CAP};
use leafgrowth::measure::compute_measure;
use leafgrowth::quadrature::QuadratureConfig;
use leafgrowth::rng::{stream, Purpose};
use leafgrowth::spectrum::{integral_i, moment_recursion, slope_fit, spectrum_grid, MOMENT_CAP};
use leafgrowth::spine::{dimension_exponent, discrete_spine_batch, simulate_spines, JumpLaw, SpineConfig};
use leafgrowth::stats::{iqr, mean, std_error};
use leafgrowth::tree::remy_sample;
use leafgrowth::{PlaneBinaryTree, GAMMA};

mod config;
mod output;
mod verify;

use config::{parse_f64_list, parse_usize_list, ConfigFile, Resolver};
use output::{cell, num, Meta};

/// Largest tree `sample` will draw.
const SAMPLE_CAP: usize = 10_000_000;
const REPLICA_CAP: usize = 10_000_000;
/// Largest size for the discrete spine chain.
const SPINE_CAP: usize = 1_000_000_000;

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

enum Failure {
    Usage(String),
    Verification,
    Runtime(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<leafgrowth::Error> for Failure {
    fn from(e: leafgrowth::Error) -> Self {
        use leafgrowth::Error::*;
        match e {
            AboveCap { .. } | InvalidArgument(_) | Parse { .. } | DegenerateWindow { .. } | NoBracket { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "leafgrowth", version, about = "Leaf-growth measures on plane binary trees")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed. Drawn at random and recorded when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Paren,
    Dot,
    Csv,
    Json,
    Jsonl,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SpineMode {
    Discrete,
    Continuum,
}

impl fmt::Display for SpineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpineMode::Discrete => "discrete",
            SpineMode::Continuum => "continuum",
        })
    }
}

impl std::str::FromStr for SpineMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <SpineMode as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a uniform tree of size n.
    Sample {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Annotate leaves with their leaf-growth masses.
        #[arg(long)]
        measure: bool,
        /// Include the density of the measure against the uniform one.
        #[arg(long)]
        density: bool,
    },
    /// Run growth chains from the single leaf.
    Grow {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        /// Comma-separated sizes; default is the powers of two up to n, and n.
        #[arg(long)]
        checkpoints: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Compute the measure of a given tree.
    Measure {
        /// Tree in parenthesis notation.
        #[arg(long, conflicts_with = "input")]
        tree: Option<String>,
        /// File holding the tree; `#` lines are skipped.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Tabulate beta(alpha) over a grid.
    Spectrum {
        /// `a,b,c` or `lo:hi:step`.
        #[arg(long, allow_hyphen_values = true)]
        alphas: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Moments e_n(alpha) from the exact recursion.
    Moments {
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// `lo,hi` window for the slope fit.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Spine simulation, discrete chain or continuum subordinator.
    Spine {
        #[arg(long, value_enum)]
        mode: Option<SpineMode>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        eps_cut: Option<f64>,
        /// Comma-separated epsilons for the near-extinction exponents.
        #[arg(long)]
        eps_grid: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run an invariant suite and print a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cap_check(what: &str, value: usize, cap: usize) -> Result<(), UsageError> {
    if value > cap {
        return Err(UsageError(format!("{what} = {value} exceeds the cap of {cap}")));
    }
    Ok(())
}

fn allow(format: Format, allowed: &[Format], command: &str) -> Result<(), UsageError> {
    if !allowed.contains(&format) {
        let names: Vec<String> = allowed.iter().map(|f| f.to_string()).collect();
        return Err(UsageError(format!("{command} supports --format {}, not {format}", names.join("|"))));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut r = Resolver::new(file);

    let threads = r.pick_opt("threads", cli.threads)?;
    // Results do not depend on the thread count, so it stays out of the header.
    r.forget("threads");
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::Usage("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let seed = match r.pick_opt("seed", cli.seed)? {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            r.record("seed", s);
            s
        }
    };
    let output: Option<PathBuf> = r.pick_opt::<String>("output", cli.output.map(|p| p.display().to_string()))?.map(PathBuf::from);
    r.record("version", env!("CARGO_PKG_VERSION"));

    match cli.command {
        Command::Sample { n, format, measure, density } => {
            r.record("command", "sample");
            let n = r.pick("n", n, 10usize)?;
            cap_check("n", n, SAMPLE_CAP)?;
            let format = r.pick("format", format, Format::Paren)?;
            let measure = r.switch("measure", measure)?;
            let density = r.switch("density", density)?;
            allow(format, &[Format::Paren, Format::Dot, Format::Csv, Format::Json], "sample")?;
            sample(n, seed, format, measure, density, r.into_meta(), output.as_deref())
        }
        Command::Grow { n, replicas, checkpoints, format } => {
            r.record("command", "grow");
            let n = r.pick("n", n, 1000usize)?;
            cap_check("n", n, GROWTH_CAP)?;
            let replicas = r.pick("replicas", replicas, 10usize)?;
            cap_check("replicas", replicas, REPLICA_CAP)?;
            let checkpoints = match r.pick_opt("checkpoints", checkpoints)? {
                Some(s) => parse_usize_list(&s)?,
                None => {
                    let mut c: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k < n).collect();
                    c.push(n);
                    r.record("checkpoints", c.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
                    c
                }
            };
            let format = r.pick("format", format, Format::Jsonl)?;
            allow(format, &[Format::Jsonl, Format::Csv], "grow")?;
            grow(n, replicas, &checkpoints, seed, format, r.into_meta(), output.as_deref())
        }
        Command::Measure { tree, input, format } => {
            r.record("command", "measure");
            let text = match (r.pick_opt("tree", tree)?, r.pick_opt::<String>("input", input.map(|p| p.display().to_string()))?) {
                (Some(t), _) => t,
                (None, Some(path)) => std::fs::read_to_string(&path)
                    .map_err(|e| UsageError(format!("cannot read {path}: {e}")))?
                    .lines()
                    .filter(|l| !l.trim_start().starts_with('#'))
                    .collect::<String>(),
                (None, None) => return Err(Failure::Usage("measure needs --tree or --input".into())),
            };
            let t = PlaneBinaryTree::decode(text.trim())?;
            let format = r.pick("format", format, Format::Csv)?;
            allow(format, &[Format::Csv, Format::Json, Format::Dot], "measure")?;
            r.record("n", t.n_internal());
            measure(&t, format, r.into_meta(), output.as_deref())
        }
        Command::Spectrum { alphas, format } => {
            r.record("command", "spectrum");
            let alphas = r.pick("alphas", alphas, "-1:3:0.25".to_string())?;
            let alphas = parse_f64_list(&alphas)?;
            if alphas.is_empty() {
                return Err(Failure::Usage("empty alpha grid".into()));
            }
            let format = r.pick("format", format, Format::Csv)?;
            allow(format, &[Format::Csv, Format::Json], "spectrum")?;
            spectrum(&alphas, format, r.into_meta(), output.as_deref())
        }
        Command::Moments { alpha, n, window, format } => {
            r.record("command", "moments");
            let alpha = r.pick("alpha", alpha, 1.0f64)?;
            let n = r.pick("n", n, 1000usize)?;
            cap_check("n", n, MOMENT_CAP)?;
            let window = match r.pick_opt("window", window)? {
                Some(s) => match parse_usize_list(&s)?[..] {
                    [lo, hi] => Some((lo, hi)),
                    _ => return Err(Failure::Usage(format!("window needs lo,hi, got {s:?}"))),
                },
                None => None,
            };
            let format = r.pick("format", format, Format::Csv)?;
            allow(format, &[Format::Csv, Format::Json], "moments")?;
            moments(alpha, n, window, format, r.into_meta(), output.as_deref())
        }
        Command::Spine { mode, n, replicas, eps_cut, eps_grid, format } => {
            r.record("command", "spine");
            let mode = r.pick("mode", mode, SpineMode::Discrete)?;
            let replicas = r.pick("replicas", replicas, 1000usize)?;
            cap_check("replicas", replicas, REPLICA_CAP)?;
            let format = r.pick("format", format, Format::Csv)?;
            allow(format, &[Format::Csv, Format::Json], "spine")?;
            match mode {
                SpineMode::Discrete => {
                    let n = r.pick("n", n, 1000usize)?;
                    cap_check("n", n, SPINE_CAP)?;
                    spine_discrete(n, replicas, seed, format, r.into_meta(), output.as_deref())
                }
                SpineMode::Continuum => {
                    let defaults = SpineConfig::default();
                    let eps_cut = r.pick("eps_cut", eps_cut, defaults.eps_cut)?;
                    let grid = parse_f64_list(&r.pick("eps_grid", eps_grid, "0.01,0.001".to_string())?)?;
                    if grid.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                        return Err(Failure::Usage("eps_grid values must lie in (0, 1)".into()));
                    }
                    let cfg = SpineConfig { eps_cut, ..defaults };
                    spine_continuum(&cfg, replicas, &grid, seed, format, r.into_meta(), output.as_deref())
                }
            }
        }
        Command::Verify { suite } => {
            r.record("command", "verify");
            r.record("suite", suite.name());
            let checks = verify::run(suite, seed);
            let passed = checks.iter().all(|c| c.passed);
            let mut out = output::open(output.as_deref())?;
            output::write_json(
                &mut *out,
                &r.into_meta(),
                json!({ "suite": suite.name(), "passed": passed, "checks": checks }),
            )?;
            out.flush()?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn sample(n: usize, seed: u64, format: Format, measure: bool, density: bool, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let t = remy_sample(n, &mut stream(seed, 0, Purpose::Tree));
    let m = (measure || density || format == Format::Csv).then(|| compute_measure(&t));
    let mut out = output::open(path)?;
    match format {
        Format::Paren => {
            output::comment_header(&mut *out, "#", &meta)?;
            writeln!(out, "{}", t.encode())?;
        }
        Format::Dot => {
            output::comment_header(&mut *out, "//", &meta)?;
            match &m {
                Some(m) => out.write_all(m.to_dot(&t).as_bytes())?,
                None => out.write_all(t.to_dot(None::<fn(_) -> f64>).as_bytes())?,
            }
        }
        Format::Csv => {
            let m = m.as_ref().expect("computed for csv");
            let rows = m
                .log_masses()
                .iter()
                .zip(m.density_vs_uniform())
                .enumerate()
                .map(|(i, (&l, d))| vec![i.to_string(), cell(l.exp()), cell(l), cell(d)]);
            output::write_csv(&mut *out, &meta, &["leaf", "mass", "log_mass", "density"], rows)?;
        }
        Format::Json => {
            let mut body = json!({ "n": n, "tree": t.encode() });
            if let Some(m) = &m {
                if measure {
                    body["masses"] = Value::Array(m.masses().into_iter().map(num).collect());
                }
                if density {
                    body["density"] = Value::Array(m.density_vs_uniform().into_iter().map(num).collect());
                }
            }
            output::write_json(&mut *out, &meta, body)?;
        }
        Format::Jsonl => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}

fn gamma_hat(log_mass: f64, n: usize) -> f64 {
    if n < 2 {
        f64::NAN
    } else {
        log_mass / (n as f64).ln()
    }
}

fn grow(n: usize, replicas: usize, checkpoints: &[usize], seed: u64, format: Format, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let mut checkpoints: Vec<usize> = checkpoints.iter().copied().filter(|&k| k <= n).collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.last() != Some(&n) {
        checkpoints.push(n);
    }
    let runs = run_replicas(n, &checkpoints, replicas, seed)?;
    let finals: Vec<f64> = runs.iter().map(|r| gamma_hat(r.last().expect("n is a checkpoint").log_mass, n)).collect();
    let heights: Vec<f64> = runs.iter().map(|r| r.last().expect("n is a checkpoint").leaf_height as f64).collect();
    let summary = json!({
        "n": n,
        "replicas": replicas,
        "mean_gamma_hat": num(mean(&finals)),
        "gamma_hat_std_error": num(std_error(&finals)),
        "gamma_hat_iqr": num(iqr(&finals)),
        "gamma": GAMMA,
        "mean_leaf_height": num(mean(&heights)),
    });
    let mut out = output::open(path)?;
    match format {
        Format::Jsonl => {
            output::write_json_line(&mut *out, &output::meta_line(&meta))?;
            for (i, recs) in runs.iter().enumerate() {
                for rec in recs {
                    let line = json!({
                        "replica": i,
                        "n": rec.n,
                        "log_mass": rec.log_mass,
                        "leaf_height": rec.leaf_height,
                        "stat": num(gamma_hat(rec.log_mass, rec.n)),
                        "path_length": rec.path_length,
                    });
                    output::write_json_line(&mut *out, &line)?;
                }
            }
            output::write_json_line(&mut *out, &json!({ "summary": summary }))?;
        }
        Format::Csv => {
            let rows = runs.iter().enumerate().map(|(i, recs)| {
                let rec = recs.last().expect("n is a checkpoint");
                vec![
                    i.to_string(),
                    rec.n.to_string(),
                    cell(rec.log_mass),
                    rec.leaf_height.to_string(),
                    rec.path_length.to_string(),
                    cell(gamma_hat(rec.log_mass, rec.n)),
                ]
            });
            output::write_csv(&mut *out, &meta, &["replica", "n", "log_mass", "leaf_height", "path_length", "gamma_hat"], rows)?;
            eprintln!("{summary}");
        }
        _ => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}

fn measure(t: &PlaneBinaryTree, format: Format, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let m = compute_measure(t);
    let mut out = output::open(path)?;
    match format {
        Format::Csv => {
            output::comment_header(&mut *out, "#", &meta)?;
            out.write_all(m.to_csv().as_bytes())?;
        }
        Format::Dot => {
            output::comment_header(&mut *out, "//", &meta)?;
            out.write_all(m.to_dot(t).as_bytes())?;
        }
        Format::Json => {
            let ext = m.extremes();
            let mut body = json!({
                "n": t.n_internal(),
                "tree": t.encode(),
                "log_masses": m.log_masses().iter().copied().map(num).collect::<Vec<_>>(),
                "min_mass": num(ext.min),
                "max_mass": num(ext.max),
            });
            if let Some(exact) = m.exact_masses() {
                body["exact_masses"] = Value::Array(exact.iter().map(|q| Value::String(q.to_string())).collect());
            }
            output::write_json(&mut *out, &meta, body)?;
        }
        _ => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}

fn spectrum(alphas: &[f64], format: Format, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let cfg = QuadratureConfig::default();
    let points = spectrum_grid(alphas, &cfg)?;
    let mut out = output::open(path)?;
    match format {
        Format::Csv => {
            let rows = points.iter().map(|p| {
                vec![
                    cell(p.alpha),
                    cell(p.beta),
                    cell(p.residual),
                    cell(p.bracket.0),
                    cell(p.bracket.1),
                    p.iterations.to_string(),
                ]
            });
            output::write_csv(&mut *out, &meta, &["alpha", "beta", "residual", "bracket_lo", "bracket_hi", "iterations"], rows)?;
        }
        Format::Json => {
            let mut list = Vec::new();
            for p in &points {
                let at_root = integral_i(p.alpha, p.beta, &cfg)?;
                list.push(json!({
                    "alpha": p.alpha,
                    "beta": p.beta,
                    "residual": num(p.residual),
                    "bracket": [p.bracket.0, p.bracket.1],
                    "iterations": p.iterations,
                    "quadrature_error": num(at_root.error),
                    "panels": at_root.panels,
                }));
            }
            output::write_json(&mut *out, &meta, json!({ "points": list }))?;
        }
        _ => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}

fn moments(alpha: f64, n: usize, window: Option<(usize, usize)>, format: Format, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let table = moment_recursion(alpha, n)?;
    let fit = match window {
        Some(w) => Some(slope_fit(&table, w)?),
        None if n >= 32 => Some(slope_fit(&table, (n / 16, n))?),
        None => None,
    };
    let mut out = output::open(path)?;
    match format {
        Format::Csv => {
            let rows = table.log_e.iter().enumerate().map(|(k, &l)| vec![k.to_string(), cell(l.exp()), cell(l)]);
            output::write_csv(&mut *out, &meta, &["n", "e_n", "log_e_n"], rows)?;
        }
        Format::Json => {
            let values: Vec<Value> = table
                .log_e
                .iter()
                .enumerate()
                .map(|(k, &l)| json!({ "n": k, "e": num(l.exp()), "log_e": num(l) }))
                .collect();
            let fit = fit.as_ref().map(|f| {
                json!({
                    "window": [f.window.0, f.window.1],
                    "slope": num(f.slope),
                    "intercept": num(f.intercept),
                    "dyadic": f.dyadic.iter().map(|&(k, s)| json!({ "n": k, "estimate": num(s) })).collect::<Vec<_>>(),
                })
            });
            output::write_json(&mut *out, &meta, json!({ "alpha": alpha, "values": values, "fit": fit }))?;
        }
        _ => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}

fn spine_discrete(n: usize, replicas: usize, seed: u64, format: Format, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let batch = discrete_spine_batch(n, replicas, seed)?;
    let scale = 2.0 * std::f64::consts::SQRT_2 * (n as f64).sqrt();
    let g: Vec<f64> = batch.iter().map(|b| gamma_hat(b.0, n)).collect();
    let h: Vec<f64> = batch.iter().map(|b| b.1 as f64 / scale).collect();
    let mut out = output::open(path)?;
    match format {
        Format::Csv => {
            let rows = batch
                .iter()
                .enumerate()
                .map(|(i, b)| vec![i.to_string(), cell(b.0), b.1.to_string(), cell(g[i]), cell(h[i])]);
            output::write_csv(&mut *out, &meta, &["replica", "neg_log_mass", "steps", "gamma_hat", "height_scaled"], rows)?;
        }
        Format::Json => {
            let samples: Vec<Value> = batch
                .iter()
                .map(|b| json!({ "neg_log_mass": b.0, "steps": b.1 }))
                .collect();
            let body = json!({
                "mode": "discrete",
                "summary": {
                    "n": n,
                    "replicas": replicas,
                    "mean_gamma_hat": num(mean(&g)),
                    "gamma_hat_iqr": num(iqr(&g)),
                    "mean_height_scaled": num(mean(&h)),
                },
                "samples": samples,
            });
            output::write_json(&mut *out, &meta, body)?;
        }
        _ => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}

fn spine_continuum(cfg: &SpineConfig, paths: usize, grid: &[f64], seed: u64, format: Format, meta: Meta, path: Option<&Path>) -> Result<(), Failure> {
    let law = JumpLaw::new(cfg.eps_cut, &cfg.quadrature)?;
    if let Some(w) = &law.warning {
        eprintln!("warning: {w}");
    }
    let sims = simulate_spines(&law, cfg, paths, grid, seed);
    let mut out = output::open(path)?;
    match format {
        Format::Csv => {
            let mut header: Vec<String> = ["replica", "extinction", "tail_bound", "flagged", "jumps"].map(String::from).to_vec();
            for e in grid {
                header.push(format!("mu_exponent_{e}"));
                header.push(format!("nu_exponent_{e}"));
            }
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = sims.iter().enumerate().map(|(i, s)| {
                let mut row = vec![
                    i.to_string(),
                    cell(s.extinction),
                    cell(s.tail_bound),
                    s.flagged.to_string(),
                    s.jumps.to_string(),
                ];
                for &e in grid {
                    match s.exponents.iter().find(|x| x.0 == e) {
                        Some(&(_, mu, nu)) => row.extend([cell(mu), cell(nu)]),
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                row
            });
            output::write_csv(&mut *out, &meta, &header, rows)?;
        }
        Format::Json => {
            let i: Vec<f64> = sims.iter().map(|s| s.extinction).collect();
            let i2: Vec<f64> = i.iter().map(|x| x * x).collect();
            let exponents: Vec<Value> = dimension_exponent(&sims, grid)
                .iter()
                .map(|e| json!({ "eps": e.eps, "mu": num(e.mu), "nu": num(e.nu), "ratio": num(e.ratio), "samples": e.samples }))
                .collect();
            let body = json!({
                "mode": "continuum",
                "law": {
                    "eps_cut": law.eps_cut,
                    "rate": law.rate,
                    "drift_mu": law.drift_mu,
                    "drift_nu": law.drift_nu,
                    "warning": law.warning,
                },
                "summary": {
                    "replicas": paths,
                    "mean_extinction": num(mean(&i)),
                    "mean_extinction_squared": num(mean(&i2)),
                    "flagged": sims.iter().filter(|s| s.flagged).count(),
                    "coupling_violations": sims.iter().filter(|s| !s.coupling_ok).count(),
                    "exponents": exponents,
                },
                "samples": sims.iter().map(|s| json!({
                    "extinction": s.extinction,
                    "tail_bound": s.tail_bound,
                    "flagged": s.flagged,
                    "jumps": s.jumps,
                })).collect::<Vec<_>>(),
            });
            output::write_json(&mut *out, &meta, body)?;
        }
        _ => unreachable!("rejected above"),
    }
    out.flush()?;
    Ok(())
}
