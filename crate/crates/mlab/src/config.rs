//! Flat INI-style run configuration: parsing, cross-field validation, and a
//! canonical echo used for hashing and the round-trip property.
//!
//! Validation collects every violation (not just the first) and quotes the
//! violated inequality, so a bad config is diagnosed in one pass.

use crate::error::{Error, Result};
use crate::weights::WeightSpec;
use sha2::{Digest, Sha256};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [grid]
    pub dim: usize,
    pub half_width: f64,
    pub resolutions: Vec<usize>,
    // [balls]
    pub stride: Option<usize>,
    pub include_origin: bool,
    pub include_single_cell: bool,
    // [params]
    pub alpha: f64,
    pub p: f64,
    pub kappa: f64,
    pub m: usize,
    pub r: f64,
    pub tau: f64,
    pub quad_nodes: usize,
    /// Overrides each check's default weight when set.
    pub weight: Option<WeightSpec>,
    pub seed: u64,
    pub threads: Option<usize>,
    // [checks]
    pub checks: Vec<String>,
    // [output]
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            half_width: 8.0,
            resolutions: vec![512, 1024],
            stride: Some(4),
            include_origin: true,
            include_single_cell: true,
            alpha: 0.25,
            p: 2.0,
            kappa: 0.25,
            m: 2,
            r: 2.0,
            tau: 2.0,
            quad_nodes: 96,
            weight: None,
            seed: 7,
            threads: None,
            checks: Vec::new(),
            out_dir: None,
        }
    }
}

impl RunConfig {
    /// Sobolev exponent q from 1/q = 1/p - alpha/n; `None` when the relation
    /// has no finite solution (q = infinity is not supported).
    pub fn q(&self) -> Option<f64> {
        let inv = 1.0 / self.p - self.alpha / self.dim as f64;
        if inv > 1e-12 {
            Some(1.0 / inv)
        } else {
            None
        }
    }

    /// Finest configured resolution.
    pub fn max_resolution(&self) -> usize {
        *self.resolutions.last().expect("validated non-empty resolutions")
    }

    /// Canonical INI echo; `parse_config(to_ini(c)) == c` for any valid c.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        s.push_str("[grid]\n");
        s.push_str(&format!("dim = {}\n", self.dim));
        s.push_str(&format!("R = {}\n", self.half_width));
        let res: Vec<String> = self.resolutions.iter().map(|n| n.to_string()).collect();
        s.push_str(&format!("resolutions = {}\n", res.join(",")));
        s.push_str("\n[balls]\n");
        s.push_str(&format!(
            "stride = {}\n",
            self.stride.map_or("none".to_string(), |v| v.to_string())
        ));
        s.push_str(&format!("origin = {}\n", self.include_origin));
        s.push_str(&format!("single_cell = {}\n", self.include_single_cell));
        s.push_str("\n[params]\n");
        s.push_str(&format!("alpha = {}\n", self.alpha));
        s.push_str(&format!("p = {}\n", self.p));
        s.push_str(&format!("kappa = {}\n", self.kappa));
        s.push_str(&format!("m = {}\n", self.m));
        s.push_str(&format!("r = {}\n", self.r));
        s.push_str(&format!("tau = {}\n", self.tau));
        s.push_str(&format!("nodes = {}\n", self.quad_nodes));
        if let Some(w) = &self.weight {
            s.push_str(&format!("weight = {}\n", w.descriptor()));
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        if let Some(t) = self.threads {
            s.push_str(&format!("threads = {t}\n"));
        }
        s.push_str("\n[checks]\n");
        if !self.checks.is_empty() {
            s.push_str(&format!("ids = {}\n", self.checks.join(",")));
        }
        s.push_str("\n[output]\n");
        if let Some(d) = &self.out_dir {
            s.push_str(&format!("dir = {}\n", d.display()));
        }
        s
    }

    /// SHA-256 of the canonical echo, hex-encoded; embedded in every report.
    /// Hashes only the scientific configuration: parallelism degree, check
    /// selection, and output paths never change any computed number, so they
    /// must not change the hash (reports are byte-identical across them).
    pub fn config_hash(&self) -> String {
        let mut scientific = self.clone();
        scientific.threads = None;
        scientific.checks = Vec::new();
        scientific.out_dir = None;
        let mut hasher = Sha256::new();
        hasher.update(scientific.to_ini().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Cross-field validation mirroring the theorem's hypothesis list.
    /// Collects every violation.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let n = self.dim as f64;
        if !(self.dim == 1 || self.dim == 2) {
            errs.push(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !(self.half_width > 0.0) {
            errs.push(format!("R must be positive, got {}", self.half_width));
        }
        if self.resolutions.is_empty() {
            errs.push("resolutions must be non-empty".into());
        }
        for &nn in &self.resolutions {
            if nn < 8 || nn % 2 != 0 {
                errs.push(format!("resolution {nn} must be even and >= 8"));
            }
        }
        if !self.resolutions.windows(2).all(|w| w[0] < w[1]) {
            errs.push(format!("resolutions must be strictly increasing, got {:?}", self.resolutions));
        }
        if self.stride == Some(0) {
            errs.push("stride must be >= 1 (or none)".into());
        }
        if !(self.alpha > 0.0 && self.alpha < n) {
            errs.push(format!("0 < α < n violated: α = {}, n = {}", self.alpha, self.dim));
        }
        if !(self.p > 1.0 && self.alpha > 0.0 && self.p < n / self.alpha) {
            errs.push(format!(
                "1 < p < n/α violated: p = {}, n/α = {}",
                self.p,
                n / self.alpha
            ));
        }
        match self.q() {
            None => errs.push(format!(
                "1/q = 1/p − α/n violated: p = {}, α = {}, n = {} give 1/q = {} (q = ∞ not supported)",
                self.p,
                self.alpha,
                self.dim,
                1.0 / self.p - self.alpha / n
            )),
            Some(q) => {
                if !(self.kappa >= 0.0 && self.kappa < self.p / q) {
                    errs.push(format!(
                        "0 ≤ κ < p/q violated: κ = {}, p/q = {}",
                        self.kappa,
                        self.p / q
                    ));
                }
            }
        }
        if self.m < 1 {
            errs.push(format!("m must be >= 1, got {}", self.m));
        }
        if !(self.r > 1.0) {
            errs.push(format!("r > 1 violated: r = {}", self.r));
        }
        if !(self.tau > 1.0) {
            errs.push(format!("τ > 1 violated: τ = {}", self.tau));
        }
        if self.quad_nodes < 8 {
            errs.push(format!("time-quadrature nodes must be >= 8, got {}", self.quad_nodes));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigList(errs))
        }
    }
}

fn parse_bool(key: &str, v: &str, errs: &mut Vec<String>) -> bool {
    match v {
        "true" => true,
        "false" => false,
        _ => {
            errs.push(format!("bad boolean for `{key}`: `{v}`"));
            false
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str, errs: &mut Vec<String>, default: T) -> T {
    v.parse().unwrap_or_else(|_| {
        errs.push(format!("bad value for `{key}`: `{v}`"));
        default
    })
}

/// Parses an INI-style config; `#` and `;` start comments. Every violation is
/// collected and reported together.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut errs: Vec<String> = Vec::new();
    let mut section = String::new();
    let mut saw_n = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            let name = &line[1..line.len() - 1];
            match name {
                "grid" | "balls" | "params" | "checks" | "output" => section = name.to_string(),
                other => errs.push(format!("unknown section `[{other}]` on line {}", lineno + 1)),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errs.push(format!("expected `key = value` on line {}: `{line}`", lineno + 1));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("grid", "dim") => cfg.dim = parse_num(key, value, &mut errs, 1),
            ("grid", "R") => cfg.half_width = parse_num(key, value, &mut errs, 8.0),
            ("grid", "N") => {
                cfg.resolutions = vec![parse_num(key, value, &mut errs, 512)];
                saw_n = true;
            }
            ("grid", "resolutions") => {
                if saw_n {
                    errs.push("give either `N` or `resolutions`, not both".into());
                }
                cfg.resolutions = value
                    .split(',')
                    .map(|v| parse_num("resolutions", v.trim(), &mut errs, 512))
                    .collect();
            }
            ("balls", "stride") => {
                cfg.stride = if value == "none" {
                    None
                } else {
                    Some(parse_num(key, value, &mut errs, 4))
                }
            }
            ("balls", "origin") => cfg.include_origin = parse_bool(key, value, &mut errs),
            ("balls", "single_cell") => cfg.include_single_cell = parse_bool(key, value, &mut errs),
            ("params", "alpha") => cfg.alpha = parse_num(key, value, &mut errs, 0.25),
            ("params", "p") => cfg.p = parse_num(key, value, &mut errs, 2.0),
            ("params", "kappa") => cfg.kappa = parse_num(key, value, &mut errs, 0.25),
            ("params", "m") => cfg.m = parse_num(key, value, &mut errs, 2),
            ("params", "r") => cfg.r = parse_num(key, value, &mut errs, 2.0),
            ("params", "tau") => cfg.tau = parse_num(key, value, &mut errs, 2.0),
            ("params", "nodes") => cfg.quad_nodes = parse_num(key, value, &mut errs, 96),
            ("params", "weight") => match WeightSpec::parse(value) {
                Ok(w) => cfg.weight = Some(w),
                Err(e) => errs.push(format!("bad `weight`: {e}")),
            },
            ("params", "seed") => cfg.seed = parse_num(key, value, &mut errs, 7),
            ("params", "threads") => cfg.threads = Some(parse_num(key, value, &mut errs, 1)),
            ("checks", "ids") => {
                cfg.checks = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            ("output", "dir") => cfg.out_dir = Some(PathBuf::from(value)),
            ("", k) => errs.push(format!("key `{k}` outside any section on line {}", lineno + 1)),
            (sec, k) => errs.push(format!("unknown key `{k}` in section [{sec}] on line {}", lineno + 1)),
        }
    }
    if !errs.is_empty() {
        return Err(Error::ConfigList(errs));
    }
    cfg.validate()?;
    Ok(cfg)
}
