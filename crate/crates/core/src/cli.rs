//! Command-line front end: declarative run configs, CSV/JSON outputs and
//! byte-stable plot data.
//!
//! Outputs embed the hash of the effective configuration in a `#` header
//! line (CSV) or a `config_hash` field (JSON), so a result can always be
//! traced back to the run that produced it. Floats are printed with Rust's
//! shortest round-trip formatting: identical configs give identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::eigen::{eigensolve, EigenSolveConfig};
use crate::pipeline::{well_minimum, ChainBase, ModelChoice, PartnerArtifacts};
use crate::verify::suites;

/// Exit codes, mirrored in the process status.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_NO_EIGENVALUE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "susy-forge", version, about = "SUSY partner potentials for 1D Schrödinger problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the partner potentials and the chain, writing CSV/JSON files.
    Partner(CommonArgs),
    /// Eigensolve the base and partner potentials side by side.
    Spectrum(SpectrumArgs),
    /// Run the verification suite and write report.json.
    Verify(VerifyArgs),
    /// Sweep f0 over a list or range, one CSV row per value.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON config file; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model: "free" or "coulomb".
    #[arg(long)]
    pub model: Option<String>,
    /// Free-particle wave number k > 0.
    #[arg(long)]
    pub k: Option<f64>,
    /// Coulomb angular momentum l >= 0.
    #[arg(long)]
    pub l: Option<u32>,
    /// Chain constant f0.
    #[arg(long, allow_hyphen_values = true)]
    pub f0: Option<f64>,
    /// Chain constant beta1 (shifts u2 by beta1 u1; inert in V3).
    #[arg(long, allow_hyphen_values = true)]
    pub beta1: Option<f64>,
    /// Number of grid samples.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Output directory (default: $SUSY_FORGE_OUT, then ".").
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of levels to solve for.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Energy bracket (two values: lo hi).
    #[arg(long, num_args = 2, allow_hyphen_values = true)]
    pub bracket: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Which suite to run: "free", "coulomb" or "all".
    #[arg(long)]
    pub suite: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Explicit f0 values, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub f0_list: Option<Vec<f64>>,
    /// f0 range as lo hi step.
    #[arg(long, num_args = 3, allow_hyphen_values = true)]
    pub f0_range: Option<Vec<f64>>,
}

/// The effective run configuration: file values with flag overrides applied.
/// Serialized canonically for hashing and echoed into every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: String,
    pub k: f64,
    pub l: u32,
    pub f0: f64,
    pub beta1: f64,
    pub grid_n: Option<usize>,
    pub levels: usize,
    pub bracket: Option<(f64, f64)>,
    pub suite: Option<String>,
    pub f0_list: Option<Vec<f64>>,
    pub f0_range: Option<(f64, f64, f64)>,
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "free".into(),
            k: 1.0,
            l: 0,
            f0: -0.25,
            beta1: 0.0,
            grid_n: None,
            levels: 3,
            bracket: None,
            suite: None,
            f0_list: None,
            f0_range: None,
            out_dir: None,
        }
    }
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {p:?}: {e}")))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {p:?}: {e}")))
            }
        }
    }

    fn apply_common(&mut self, args: &CommonArgs) {
        if let Some(m) = &args.model {
            self.model = m.clone();
        }
        if let Some(k) = args.k {
            self.k = k;
        }
        if let Some(l) = args.l {
            self.l = l;
        }
        if let Some(f0) = args.f0 {
            self.f0 = f0;
        }
        if let Some(b) = args.beta1 {
            self.beta1 = b;
        }
        if let Some(n) = args.grid_n {
            self.grid_n = Some(n);
        }
        if let Some(out) = &args.out {
            self.out_dir = Some(out.to_string_lossy().into_owned());
        }
    }

    fn model_choice(&self) -> Result<ModelChoice> {
        match self.model.as_str() {
            "free" => Ok(ModelChoice::Free { k: self.k }),
            "coulomb" => Ok(ModelChoice::Coulomb { l: self.l }),
            other => Err(Error::Config(format!("unknown model `{other}` (use free|coulomb)"))),
        }
    }

    fn out_dir(&self) -> PathBuf {
        if let Some(d) = &self.out_dir {
            return PathBuf::from(d);
        }
        if let Ok(d) = std::env::var("SUSY_FORGE_OUT") {
            if !d.is_empty() {
                return PathBuf::from(d);
            }
        }
        PathBuf::from(".")
    }

    pub fn hash(&self) -> String {
        // where the files land is not part of the run's identity
        let mut hashed = self.clone();
        hashed.out_dir = None;
        let canonical = serde_json::to_string(&hashed).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn csv_row(values: &[f64]) -> String {
    let mut row = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            row.push(',');
        }
        row.push_str(&format!("{v}"));
    }
    row
}

struct PartnerRun {
    base: ChainBase,
    artifacts: PartnerArtifacts,
}

fn build_run(cfg: &RunConfig) -> Result<PartnerRun> {
    let choice = cfg.model_choice()?;
    let base = ChainBase::build(choice, cfg.grid_n, cfg.beta1)?;
    let artifacts = base.with_f0(cfg.f0)?;
    Ok(PartnerRun { base, artifacts })
}

fn cmd_partner(cfg: &RunConfig) -> Result<()> {
    let run = build_run(cfg)?;
    let base = &run.base;
    let art = &run.artifacts;
    let hash = cfg.hash();
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;

    let grid = &base.grid;
    let mut potentials = format!("# config-hash: {hash}\nx,V0,V2,V3_direct,V3_iterative\n");
    for i in 0..grid.len() {
        potentials.push_str(&csv_row(&[
            grid.x(i),
            base.v0.values()[i],
            base.v2.values()[i],
            art.v3_direct.values()[i],
            art.v3_iterative.values()[i],
        ]));
        potentials.push('\n');
    }
    write_file(&out.join("potentials.csv"), &potentials)?;

    let mut chain = format!("# config-hash: {hash}\nx,u1,u2,u3,w,f,psi_eps3\n");
    for i in 0..grid.len() {
        chain.push_str(&csv_row(&[
            grid.x(i),
            base.u1.values()[i],
            base.u2.values()[i],
            base.u3.values()[i],
            base.w.values()[i],
            art.f.values()[i],
            art.missing.state.values()[i],
        ]));
        chain.push('\n');
    }
    write_file(&out.join("chain.csv"), &chain)?;

    let meta = serde_json::json!({
        "config_hash": hash,
        "sigma_minus": base.sigma_minus,
        "f0": art.f0,
        "regime": art.regime,
        "x1": art.x1,
        "epsilon": base.epsilon,
        "beta1": base.beta1,
        "missing_state": {
            "raw_norm": art.missing.raw_norm,
            "normalizable": art.missing.normalizable,
            "left_edge_fraction": art.missing.left_edge_fraction,
            "right_edge_fraction": art.missing.right_edge_fraction,
        },
        "grid": {
            "n": grid.len(),
            "h": grid.h(),
            "x_min": grid.x_min(),
            "x_max": grid.x_max(),
        },
        "tolerances": {
            "series_rel_tol": 1e-12,
            "node_floor": crate::numerics::NODE_FLOOR,
            "boundary_tol": crate::hyperconfluent3::BOUNDARY_TOL,
        },
    });
    write_file(&out.join("meta.json"), &serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn default_bracket(cfg: &RunConfig, base: &ChainBase) -> (f64, f64) {
    cfg.bracket.unwrap_or_else(|| {
        let eps = base.epsilon;
        (1.5 * eps.min(-1.0), -1e-6)
    })
}

fn bound_state_ceiling(v: &crate::grid::GridFn) -> Option<f64> {
    let grid = v.grid();
    let mut ceiling: Option<f64> = None;
    if matches!(grid.left(), crate::grid::Boundary::TruncatedInfinite { .. }) {
        ceiling = Some(v.values()[0]);
    }
    if matches!(grid.right(), crate::grid::Boundary::TruncatedInfinite { .. }) {
        let edge = v.values()[v.len() - 1];
        ceiling = Some(ceiling.map_or(edge, |c| c.min(edge)));
    }
    ceiling
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let run = build_run(cfg)?;
    let base = &run.base;
    let art = &run.artifacts;
    let hash = cfg.hash();
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;

    let bracket = default_bracket(cfg, base);
    let solve = |v: &crate::grid::GridFn| -> Result<Option<crate::chain::SpectrumReport>> {
        // clip the bracket below the continuum edge: anything above the
        // potential's asymptotic value is a box state of the truncation
        let hi = match bound_state_ceiling(v) {
            Some(c) => bracket.1.min(c),
            None => bracket.1,
        };
        if bracket.0 >= hi {
            return Ok(None);
        }
        let cfg_e = EigenSolveConfig::new(cfg.levels, (bracket.0, hi));
        match eigensolve(v, &cfg_e) {
            Ok(rep) => Ok(Some(rep)),
            Err(Error::NoEigenvalueInBracket { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut rep_v0 = solve(&base.v0)?;
    let mut rep_v3 = solve(&art.v3_direct)?;
    if rep_v0.is_none() && rep_v3.is_none() {
        return Err(Error::NoEigenvalueInBracket {
            lo: bracket.0,
            hi: bracket.1,
        });
    }

    let expected: Vec<f64> = (0..cfg.levels).filter_map(|n| base.model.eigenvalue(n)).collect();
    if !expected.is_empty() {
        for rep in [&mut rep_v0, &mut rep_v3].into_iter().flatten() {
            let cmp = crate::verify::spectrum_compare(rep, &expected, 1e-3);
            rep.comparison = Some(cmp.rows);
        }
    }
    if let Some(rep) = rep_v3.as_mut() {
        rep.classification = Some(art.regime.clone());
    }
    let json = serde_json::json!({
        "config_hash": hash,
        "bracket": bracket,
        "levels": cfg.levels,
        "regime": art.regime,
        "v0": rep_v0,
        "v3": rep_v3,
        "expected": if expected.is_empty() { None } else { Some(expected) },
    });
    write_file(&out.join("spectrum.json"), &serde_json::to_string_pretty(&json)?)?;
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, suite: Option<&str>) -> Result<bool> {
    let hash = cfg.hash();
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;
    let which = suite
        .map(str::to_owned)
        .or_else(|| cfg.suite.clone())
        .unwrap_or_else(|| cfg.model.clone());
    let mut report = crate::verify::VerifyReport::new(hash);
    match which.as_str() {
        "free" => suites::free_particle_suite(&mut report, cfg.k, cfg.grid_n)?,
        "coulomb" => suites::coulomb_suite(&mut report, cfg.l, cfg.grid_n)?,
        "all" => {
            suites::free_particle_suite(&mut report, cfg.k, cfg.grid_n)?;
            suites::coulomb_suite(&mut report, cfg.l, cfg.grid_n)?;
        }
        other => return Err(Error::Config(format!("unknown suite `{other}` (use free|coulomb|all)"))),
    }
    write_file(&out.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
    for failure in report.failures() {
        eprintln!(
            "FAIL {}: value {:e} vs threshold {:e} ({})",
            failure.name, failure.value, failure.threshold, failure.meta
        );
    }
    Ok(report.all_pass())
}

fn sweep_values(cfg: &RunConfig, args: &SweepArgs) -> Result<Vec<f64>> {
    if let Some(list) = &args.f0_list {
        return Ok(list.clone());
    }
    if let Some(range) = &args.f0_range {
        if range.len() != 3 {
            return Err(Error::Config("f0-range needs lo hi step".into()));
        }
        return Ok(range_values(range[0], range[1], range[2]));
    }
    if let Some(list) = &cfg.f0_list {
        return Ok(list.clone());
    }
    if let Some((lo, hi, step)) = cfg.f0_range {
        return Ok(range_values(lo, hi, step));
    }
    Ok(Vec::new())
}

fn range_values(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if step <= 0.0 {
        return out;
    }
    let mut i = 0u64;
    loop {
        let v = lo + step * i as f64;
        if v > hi + 0.5 * step {
            break;
        }
        out.push(v.min(hi));
        i += 1;
    }
    out
}

fn cmd_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<()> {
    let choice = cfg.model_choice()?;
    let base = ChainBase::build(choice, cfg.grid_n, cfg.beta1)?;
    let values = sweep_values(cfg, args)?;
    let hash = cfg.hash();
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;

    let mut csv = format!("# config-hash: {hash}\nf0,sigma_margin,regime,x1,psi_eps3_norm,v3_min_x,v3_min_depth,error\n");
    for f0 in values {
        let (margin, regime) = base.classify(f0)?;
        match base.with_f0(f0) {
            Ok(art) => {
                let (min_x, min_depth) = well_minimum(&art.v3_direct).unwrap_or((f64::NAN, f64::NAN));
                let x1 = art.x1.map(|v| format!("{v}")).unwrap_or_default();
                csv.push_str(&format!(
                    "{f0},{margin},{},{x1},{},{min_x},{min_depth},\n",
                    art.regime.name(),
                    art.missing.raw_norm,
                ));
            }
            Err(e) => {
                csv.push_str(&format!("{f0},{margin},{},,,,,\"{e}\"\n", regime.name()));
            }
        }
    }
    write_file(&out.join("sweep.csv"), &csv)?;
    Ok(())
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NodeDetected { .. } | Error::ForbiddenWindow { .. } | Error::IntegrandBlowUp { .. } => EXIT_SINGULAR,
        Error::NoEigenvalueInBracket { .. } => EXIT_NO_EIGENVALUE,
        _ => EXIT_CONFIG,
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome: Result<i32> = (|| match cli.command {
        Command::Partner(args) => {
            let mut cfg = RunConfig::load(args.config.as_deref())?;
            cfg.apply_common(&args);
            validate(&cfg)?;
            cmd_partner(&cfg)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum(args) => {
            let mut cfg = RunConfig::load(args.common.config.as_deref())?;
            cfg.apply_common(&args.common);
            if let Some(levels) = args.levels {
                cfg.levels = levels;
            }
            if let Some(b) = &args.bracket {
                cfg.bracket = Some((b[0], b[1]));
            }
            validate(&cfg)?;
            cmd_spectrum(&cfg)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let mut cfg = RunConfig::load(args.common.config.as_deref())?;
            cfg.apply_common(&args.common);
            validate(&cfg)?;
            let pass = cmd_verify(&cfg, args.suite.as_deref())?;
            Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Sweep(args) => {
            let mut cfg = RunConfig::load(args.common.config.as_deref())?;
            cfg.apply_common(&args.common);
            validate(&cfg)?;
            cmd_sweep(&cfg, &args)?;
            Ok(EXIT_OK)
        }
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn validate(cfg: &RunConfig) -> Result<()> {
    cfg.model_choice()?;
    if cfg.model == "free" && !(cfg.k > 0.0) {
        return Err(Error::Config(format!("k must be positive, got {}", cfg.k)));
    }
    if let Some(n) = cfg.grid_n {
        if n < 7 {
            return Err(Error::Config(format!("grid_n must be at least 7, got {n}")));
        }
    }
    if cfg.levels == 0 {
        return Err(Error::Config("levels must be at least 1".into()));
    }
    if let Some((lo, hi)) = cfg.bracket {
        if lo >= hi {
            return Err(Error::Config(format!("bracket ({lo}, {hi}) must be increasing")));
        }
    }
    Ok(())
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
