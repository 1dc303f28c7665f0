//! Command-line front end: subcommand dispatch, report emission, and the
//! exit-code contract (0 = all PASS/gated, 1 = any FAIL, 2 = config error,
//! 3 = internal/accuracy error).
//!
//! Reports are deterministic: `report.json` carries no timing and is
//! byte-identical across runs and thread counts for a fixed config; wall time
//! appears only on stdout and in `summary.csv`.

use crate::config::{parse_config, RunConfig};
use crate::error::Result;
use crate::harness::{run_check, CheckOutcome, REGISTRY};
use crate::harness::family::TestFamily;
use crate::lattice::{build_ball_family, BallPolicy, Grid};
use crate::operators::{fractional_kernel, SemigroupSpec, TimeQuadrature};
use crate::spaces::{bmo_norm, morrey_norm, MorreyParams};
use crate::weights::{
    ap_characteristic, ap_member, critical_index_estimate, reverse_holder_constant, rh_member,
    ScanEnv, WeightSpec, DEFAULT_CRITICAL_TOL, DEFAULT_R_MAX,
};
use clap::{Parser, Subcommand};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "mlab", version, about = "Weighted Morrey-space toolkit: weights, norms, generalized fractional integrals, and the check harness")]
pub struct Cli {
    /// INI-style config file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's [output] dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Resolution ladder (overrides the config), e.g. 256,512,1024.
    #[arg(long, global = true, value_delimiter = ',', value_name = "N,...")]
    pub resolutions: Option<Vec<usize>>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Muckenhoupt A_p diagnostics for the configured weight.
    Ap,
    /// Reverse Hoelder diagnostics and critical-index estimate.
    Rh,
    /// Weighted Morrey and BMO norms of the built-in test family.
    Norm,
    /// Apply the generalized fractional integral to the test family.
    Apply,
    /// Run the named checks (default: the config's ids, else the registry).
    Check { ids: Vec<String> },
    /// Run checks across the full resolution ladder (default: the registry).
    Sweep { ids: Vec<String> },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(res) = &cli.resolutions {
        cfg.resolutions = res.clone();
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parallelism degree: config key wins over MLAB_THREADS.
fn configure_threads(cfg: &RunConfig) {
    let threads = cfg.threads.or_else(|| {
        std::env::var("MLAB_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        // A failure here means a pool already exists (e.g. under tests);
        // results are thread-count-independent, so this is not an error.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("mlab-out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn active_weight(cfg: &RunConfig) -> WeightSpec {
    cfg.weight.clone().unwrap_or(WeightSpec::Power(-0.5))
}

fn build_family(cfg: &RunConfig, n: usize) -> Result<(Grid, crate::lattice::BallFamily, TestFamily)> {
    let grid = Grid::new(cfg.dim, cfg.half_width, n)?;
    let fam = build_ball_family(
        grid,
        BallPolicy {
            stride: cfg.stride,
            include_origin: cfg.include_origin,
            include_single_cell: cfg.include_single_cell,
        },
    )?;
    let family = TestFamily::build(grid)?;
    Ok((grid, fam, family))
}

fn run_ap(cfg: &RunConfig, dir: &Path) -> Result<i32> {
    let wspec = active_weight(cfg);
    let env = ScanEnv::new(cfg.dim, cfg.half_width, cfg.resolutions.clone())?;
    let member = ap_member(&wspec, cfg.p, &env)?;
    let (grid, fam, _) = build_family(cfg, cfg.max_resolution())?;
    let w = wspec.realize(grid)?;
    let ch = ap_characteristic(&w, cfg.p, &fam)?;
    let doc = json!({
        "weight": wspec.descriptor(),
        "p": cfg.p,
        "member": member,
        "characteristic": ch,
        "config_hash": cfg.config_hash(),
    });
    let text = serde_json::to_string_pretty(&doc)?;
    fs::write(dir.join("ap.json"), &text)?;
    println!("A_{} of {}: member={member} characteristic={:.6}", cfg.p, wspec.descriptor(), ch.value);
    Ok(0)
}

fn run_rh(cfg: &RunConfig, dir: &Path) -> Result<i32> {
    let wspec = active_weight(cfg);
    let env = ScanEnv::new(cfg.dim, cfg.half_width, cfg.resolutions.clone())?;
    let member = rh_member(&wspec, cfg.r, &env)?;
    let critical = critical_index_estimate(&wspec, &env, DEFAULT_R_MAX, DEFAULT_CRITICAL_TOL)?;
    let (grid, fam, _) = build_family(cfg, cfg.max_resolution())?;
    let w = wspec.realize(grid)?;
    let ch = reverse_holder_constant(&w, cfg.r, &fam)?;
    let doc = json!({
        "weight": wspec.descriptor(),
        "r": cfg.r,
        "member": member,
        "constant": ch,
        "critical_index": critical,
        "config_hash": cfg.config_hash(),
    });
    fs::write(dir.join("rh.json"), serde_json::to_string_pretty(&doc)?)?;
    println!(
        "RH_{} of {}: member={member} constant={:.6} critical_index={:.4}{}",
        cfg.r,
        wspec.descriptor(),
        ch.value,
        critical.value,
        if critical.capped { " (capped)" } else { "" }
    );
    Ok(0)
}

fn run_norm(cfg: &RunConfig, dir: &Path) -> Result<i32> {
    let wspec = active_weight(cfg);
    let (grid, fam, family) = build_family(cfg, cfg.max_resolution())?;
    let w = wspec.realize(grid)?;
    let params = MorreyParams::new(cfg.p, cfg.kappa)?;
    let mut csv = String::from("kind,name,value,witness_radius\n");
    for nf in &family.functions {
        let rep = morrey_norm(&nf.f, &params, &w, &w, &fam)?;
        let radius = rep.witness.as_ref().map_or(0.0, |b| b.radius);
        csv.push_str(&format!("morrey,{},{:.12e},{}\n", nf.name, rep.value, radius));
        println!("morrey({}) = {:.6e}", nf.name, rep.value);
    }
    for b in &family.symbols {
        let rep = bmo_norm(&b.f, Some(&w), &fam)?;
        let radius = rep.witness.as_ref().map_or(0.0, |b| b.radius);
        csv.push_str(&format!("bmo,{},{:.12e},{}\n", b.name, rep.value, radius));
        println!("bmo({}) = {:.6e}", b.name, rep.value);
    }
    fs::write(dir.join("norms.csv"), csv)?;
    Ok(0)
}

fn run_apply(cfg: &RunConfig, dir: &Path) -> Result<i32> {
    let (grid, _, family) = build_family(cfg, cfg.max_resolution())?;
    let spec = SemigroupSpec::heat(cfg.dim);
    let d = TimeQuadrature::default_for(&grid);
    let quad = TimeQuadrature::new(d.t_min, d.t_max, cfg.quad_nodes)?;
    let (kernel, diag) = fractional_kernel(&spec, grid, cfg.alpha, &quad)?;
    for nf in &family.functions {
        let out = kernel.apply(&nf.f);
        let mut buf = Vec::new();
        out.write_csv(&mut buf)?;
        fs::write(dir.join(format!("apply-{}.csv", nf.name)), buf)?;
        println!("applied L^(-alpha/2) to {} (alpha = {})", nf.name, cfg.alpha);
    }
    let doc = json!({
        "alpha": cfg.alpha,
        "diagnostics": diag,
        "config_hash": cfg.config_hash(),
    });
    fs::write(dir.join("apply-diagnostics.json"), serde_json::to_string_pretty(&doc)?)?;
    Ok(0)
}

fn resolve_ids(ids: &[String], cfg: &RunConfig) -> Vec<String> {
    if !ids.is_empty() {
        ids.to_vec()
    } else if !cfg.checks.is_empty() {
        cfg.checks.clone()
    } else {
        REGISTRY.iter().map(|s| s.to_string()).collect()
    }
}

fn run_checks(cfg: &RunConfig, dir: &Path, ids: &[String], dump_family: bool) -> Result<i32> {
    let mut outcomes: Vec<CheckOutcome> = Vec::new();
    for id in ids {
        let outcome = run_check(id, cfg)?;
        let max = outcome
            .report
            .resolutions
            .iter()
            .map(|e| e.max_ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{} {} (max {:.6e}, {:.2} s)",
            outcome.report.id, outcome.report.verdict, max, outcome.seconds
        );
        outcomes.push(outcome);
    }
    let reports: Vec<_> = outcomes.iter().map(|o| &o.report).collect();
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&reports)?)?;
    let mut csv = String::from("id,n,max_ratio,verdict,seconds\n");
    for o in &outcomes {
        for e in &o.report.resolutions {
            csv.push_str(&format!(
                "{},{},{:.12e},{},{:.3}\n",
                o.report.id, e.n, e.max_ratio, o.report.verdict, o.seconds
            ));
        }
    }
    fs::write(dir.join("summary.csv"), csv)?;
    if dump_family {
        let (_, _, family) = build_family(cfg, cfg.max_resolution())?;
        let fdir = dir.join("functions");
        fs::create_dir_all(&fdir)?;
        for nf in family.functions.iter().chain(&family.symbols) {
            let mut buf = Vec::new();
            nf.f.write_csv(&mut buf)?;
            fs::write(fdir.join(format!("{}.csv", nf.name)), buf)?;
        }
    }
    Ok(if outcomes.iter().all(|o| o.report.passed()) { 0 } else { 1 })
}

/// Dispatches a parsed invocation; the i32 is the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    configure_threads(&cfg);
    let dir = out_dir(&cfg)?;
    match &cli.cmd {
        Cmd::Ap => run_ap(&cfg, &dir),
        Cmd::Rh => run_rh(&cfg, &dir),
        Cmd::Norm => run_norm(&cfg, &dir),
        Cmd::Apply => run_apply(&cfg, &dir),
        Cmd::Check { ids } => run_checks(&cfg, &dir, &resolve_ids(ids, &cfg), false),
        Cmd::Sweep { ids } => run_checks(&cfg, &dir, &resolve_ids(ids, &cfg), true),
    }
}

/// Entry point used by the binary: errors become JSON diagnostics on stderr
/// plus the contracted exit code.
pub fn main_with(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version; usage errors are config errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            let code = err.exit_code();
            let doc = json!({ "error": format!("{err}"), "exit_code": code });
            eprintln!("{doc}");
            code
        }
    }
}
