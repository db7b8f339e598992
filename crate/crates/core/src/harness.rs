//! Experiment orchestration behind the `seedless` binary.
//!
//! Each command takes an [`ExperimentConfig`], runs the corresponding
//! library audits and returns an [`AuditReport`]: a config echo, named
//! checks, exact values and the wall-clock time. Randomized steps draw from
//! `rng_seed`, one ChaCha stream per trial, so reports are reproducible
//! regardless of the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversaries::{
    build_1l_adversary, build_nosf23_adversary, build_shela23_extraction_adversary,
    condense_above_one_over_c, condense_nosf_two_over_c, CondenseCertificate,
};
use crate::check::{all_required_pass, Check};
use crate::condensers::{
    audit_sampled, certify_with_summary, certify_wrapped, derive_params, explicit_reach_summary,
    fiber_census, fiber_count, sample_output_light, validate_constraints, wrap_condenser,
    ExplicitCfg, ExplicitExt, Profile, RandomProcessParams, ReachProfile,
};
use crate::covering::{greedy_cover, BipartiteGraph};
use crate::dist::{
    heavy_set, min_entropy, prob_to_string, ratio, smooth_min_entropy, tv_entropy_bound_check, Dist,
};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::sources::BlockFunctionTable;

/// Version of the report layout; bump on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    AuditExtract23,
    AuditCondense,
    Condense,
    Cover,
    Entropy,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::AuditExtract23 => "audit-extract23",
            Command::AuditCondense => "audit-condense",
            Command::Condense => "condense",
            Command::Cover => "cover",
            Command::Entropy => "entropy",
        })
    }
}

/// Which impossibility construction `audit-condense` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// One good block among `ell`.
    OneGood,
    /// Two good blocks among three, NOSF.
    Nosf23,
    /// `g` good blocks among `ell >= 2g`, SHELA.
    AboveOneOverC,
    /// `g` good blocks among `ell` with `g/ell = 2/c`, NOSF.
    NosfTwoOverC,
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-good" | "1l" => Ok(Theorem::OneGood),
            "nosf23" => Ok(Theorem::Nosf23),
            "above-one-over-c" => Ok(Theorem::AboveOneOverC),
            "nosf-two-over-c" => Ok(Theorem::NosfTwoOverC),
            other => Err(Error::Parse(format!("unknown theorem {other:?}"))),
        }
    }
}

/// Which output-light extractor `condense` builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Sampled,
    Explicit,
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampled" => Ok(Construction::Sampled),
            "explicit" => Ok(Construction::Explicit),
            other => Err(Error::Parse(format!("unknown construction {other:?}"))),
        }
    }
}

/// Parameters of one run. Fields a command does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: u32,
    pub ell: u32,
    pub t: u32,
    pub eps: f64,
    pub profile: Profile,
    pub trials: usize,
    pub rng_seed: Option<u64>,
    pub fn_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub workers: Option<usize>,
    pub theorem: Theorem,
    /// Good blocks for the `1/c` recipes.
    pub g: u32,
    /// Log of the source-entropy parameter `K` for `condense`.
    pub k: f64,
    pub m_bits: u32,
    pub p: f64,
    pub gamma: f64,
    pub construction: Construction,
    /// Seed length of the explicit construction's inner extractor.
    pub d: Option<u32>,
    /// Degree exponent for `cover`.
    pub delta: f64,
}

impl ExperimentConfig {
    /// Defaults matching the desk-scale settings used throughout the tests.
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            n: 4,
            ell: 3,
            t: 6,
            eps: 0.1,
            profile: Profile::Scaled,
            trials: 10,
            rng_seed: None,
            fn_file: None,
            out: None,
            csv: None,
            workers: None,
            theorem: Theorem::OneGood,
            g: 1,
            k: 6.0,
            m_bits: 10,
            p: 1.0 / 16.0,
            gamma: 0.5,
            construction: Construction::Sampled,
            d: None,
            delta: 0.5,
        }
    }

    fn seed(&self) -> Result<u64> {
        self.rng_seed
            .ok_or_else(|| Error::Precondition("--rng-seed is required for randomized runs".into()))
    }
}

/// Rows for the optional CSV summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Outcome of one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub version: String,
    pub command: Command,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    pub wall_clock_ms: f64,
    #[serde(skip)]
    pub csv: CsvTable,
}

impl AuditReport {
    fn new(
        config: &ExperimentConfig,
        checks: Vec<Check>,
        results: Value,
        csv: CsvTable,
        started: Instant,
    ) -> Self {
        AuditReport {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.command,
            config: config.clone(),
            passed: all_required_pass(&checks),
            checks,
            results,
            wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
            csv,
        }
    }

    /// Process exit code: 0 when every required check passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Run the command named in `config`, inside a pool of `workers` threads when given.
pub fn run(config: &ExperimentConfig) -> Result<AuditReport> {
    let go = || match config.command {
        Command::AuditExtract23 => cmd_audit_extract23(config),
        Command::AuditCondense => cmd_audit_condense(config),
        Command::Condense => cmd_condense(config),
        Command::Cover => cmd_cover(config),
        Command::Entropy => cmd_entropy(config),
    };
    match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?
            .install(go),
        None => go(),
    }
}

/// Write the JSON report to `config.out` (or stdout) and the CSV summary when requested.
pub fn emit(report: &AuditReport) -> Result<()> {
    let json = report.to_json()?;
    match &report.config.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| io_error(path, e))?,
        None => println!("{json}"),
    }
    if let Some(path) = &report.config.csv {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        report.csv.write(file).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

/// The functions to audit: the one in `fn_file`, or `trials` random ones.
fn load_functions(config: &ExperimentConfig, ell: u32, t: u32) -> Result<Vec<BlockFunctionTable>> {
    if let Some(path) = &config.fn_file {
        let file = File::open(path).map_err(|e| io_error(path, e))?;
        return Ok(vec![BlockFunctionTable::read_raw(
            config.n,
            ell,
            t,
            BufReader::new(file),
        )?]);
    }
    let seed = config.seed()?;
    (0..config.trials as u64)
        .map(|i| BlockFunctionTable::random(config.n, ell, t, &mut stream(seed, i)))
        .collect()
}

fn count_labels<'a, I: IntoIterator<Item = &'a str>>(labels: I) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.to_string()).or_insert(0) += 1;
    }
    counts
}

/// Anti-extraction audit on three blocks with a 1-bit output.
pub fn cmd_audit_extract23(config: &ExperimentConfig) -> Result<AuditReport> {
    let started = Instant::now();
    let fs = load_functions(config, 3, 1)?;
    let outcomes = fs
        .par_iter()
        .map(build_shela23_extraction_adversary)
        .collect::<Result<Vec<_>>>()?;
    let guarantee = ratio(2, 25);
    let mut csv = CsvTable::new(&["index", "case", "bias", "bias_exact"]);
    let mut rows = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        let case = format!("{:?}", o.case);
        csv.rows.push(vec![
            i.to_string(),
            case.clone(),
            format!("{:.9}", o.bias),
            prob_to_string(&o.bias_exact),
        ]);
        rows.push(json!({"index": i, "case": case, "bias": o.bias, "bias_exact": prob_to_string(&o.bias_exact)}));
    }
    let min = outcomes.iter().map(|o| &o.bias_exact).min().cloned();
    let below = outcomes.iter().filter(|o| o.bias_exact < guarantee).count();
    let checks = vec![
        Check::new(
            "bias_at_least_guarantee",
            "|Pr[f(X) = 0] − 1/2| >= 0.08 for every audited f",
            below == 0,
            format!("{} functions, {below} below 2/25", outcomes.len()),
        ),
        Check::new(
            "construction_checks",
            "every construction's internal checks pass",
            outcomes.iter().all(|o| all_required_pass(&o.checks)),
            "",
        ),
    ];
    let results = json!({
        "functions": outcomes.len(),
        "min_bias": min.as_ref().map(prob_to_string),
        "cases": count_labels(rows.iter().filter_map(|r| r["case"].as_str())),
        "rows": rows,
    });
    Ok(AuditReport::new(config, checks, results, csv, started))
}

fn run_condense_theorem(
    config: &ExperimentConfig,
    f: &BlockFunctionTable,
) -> Result<CondenseCertificate> {
    match config.theorem {
        Theorem::OneGood => build_1l_adversary(f, config.eps),
        Theorem::Nosf23 => build_nosf23_adversary(f, config.eps).map(|(c, _)| c),
        Theorem::AboveOneOverC => condense_above_one_over_c(f, config.g, config.eps),
        Theorem::NosfTwoOverC => condense_nosf_two_over_c(f, config.g, config.eps),
    }
}

/// Anti-condensing audit: builds a certified adversary for each function.
pub fn cmd_audit_condense(config: &ExperimentConfig) -> Result<AuditReport> {
    let started = Instant::now();
    let ell = if config.theorem == Theorem::Nosf23 {
        3
    } else {
        config.ell
    };
    let fs = load_functions(config, ell, config.t)?;
    let certs = fs
        .par_iter()
        .map(|f| run_condense_theorem(config, f))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = CsvTable::new(&[
        "index",
        "case",
        "oracle_entropy",
        "formula_bound",
        "bound_bits",
        "hit_prob",
    ]);
    let mut rows = Vec::new();
    for (i, c) in certs.iter().enumerate() {
        csv.rows.push(vec![
            i.to_string(),
            c.case.clone(),
            format!("{:.9}", c.oracle_entropy),
            format!("{:.9}", c.formula_bound),
            format!("{:.9}", c.bound_bits),
            prob_to_string(&c.hit_prob),
        ]);
        rows.push(json!({
            "index": i,
            "theorem": c.theorem,
            "case": c.case,
            "oracle_entropy": c.oracle_entropy,
            "formula_bound": c.formula_bound,
            "bound_bits": c.bound_bits,
            "delta": c.delta,
            "heavy_set_size": c.heavy_set.len(),
            "hit_prob": prob_to_string(&c.hit_prob),
            "passed": c.passed(),
        }));
    }
    let failing = certs.iter().filter(|c| !c.passed()).count();
    let worst_gap = certs
        .iter()
        .map(|c| c.oracle_entropy - c.formula_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![Check::new(
        "certificates_pass",
        "oracle smooth min-entropy <= rate·t + delta, hit probability meets the guarantee",
        failing == 0,
        format!(
            "{} certificates, {failing} failing, max(oracle − bound) = {worst_gap:.6}",
            certs.len()
        ),
    )];
    let results = json!({
        "functions": certs.len(),
        "cases": count_labels(certs.iter().map(|c| c.case.as_str())),
        "max_oracle_minus_bound": worst_gap,
        "rows": rows,
    });
    Ok(AuditReport::new(config, checks, results, csv, started))
}

fn prefixed(prefix: &str, checks: &[Check]) -> Vec<Check> {
    checks
        .iter()
        .map(|c| Check {
            name: format!("{prefix}.{}", c.name),
            ..c.clone()
        })
        .collect()
}

/// Build and audit an output-light extractor and its three-block condenser.
pub fn cmd_condense(config: &ExperimentConfig) -> Result<AuditReport> {
    match config.construction {
        Construction::Sampled => condense_sampled(config),
        Construction::Explicit => condense_explicit(config),
    }
}

fn condense_sampled(config: &ExperimentConfig) -> Result<AuditReport> {
    let started = Instant::now();
    let params = match config.profile {
        Profile::Paper => derive_params(config.n, config.k, config.eps)?,
        Profile::Scaled => RandomProcessParams::scaled(
            config.n,
            config.m_bits,
            config.p,
            config.k,
            config.eps,
            config.gamma,
        )?,
    };
    let rows = validate_constraints(&params);
    let mut checks: Vec<Check> = rows
        .iter()
        .map(|r| {
            let detail = format!("{} {} {}", r.lhs, r.relation, r.rhs);
            let invariant = "parameter constraint table";
            match config.profile {
                Profile::Paper => Check::new(
                    &format!("constraint.{}", r.name),
                    invariant,
                    r.passed,
                    detail,
                ),
                Profile::Scaled => Check::info(
                    &format!("constraint.{}", r.name),
                    invariant,
                    r.passed,
                    detail,
                ),
            }
        })
        .collect();
    let mut results = json!({ "profile": params.profile, "params": params, "constraints": rows });
    let mut csv = CsvTable::new(&["check", "passed", "detail"]);

    let seed = config.seed()?;
    match sample_output_light(&params, seed) {
        Ok(cond) => {
            let audit = audit_sampled(&cond, &params, config.trials, seed ^ 0x5eed)?;
            checks.extend(prefixed("sampled", &audit.checks));
            results["audit"] =
                serde_json::to_value(&audit).map_err(|e| Error::Parse(e.to_string()))?;
            if 2 * cond.d() <= cond.n() && cond.n() % 2 == 0 {
                let w = wrap_condenser(cond, config.eps)?;
                let cert = certify_wrapped(&w, config.trials.min(20), seed ^ 0x3a3a)?;
                checks.extend(prefixed("wrap", &cert.checks));
                results["wrap"] =
                    serde_json::to_value(&cert).map_err(|e| Error::Parse(e.to_string()))?;
            } else {
                checks.push(Check::info(
                    "wrap",
                    "seed length at most the block width",
                    false,
                    "wrapper skipped: d > n/2",
                ));
            }
        }
        Err(Error::TooLarge { .. }) if config.profile == Profile::Paper => {
            checks.push(Check::info(
                "sampling",
                "N·M·p fits in memory",
                false,
                "paper-profile sets are too large to sample",
            ));
        }
        Err(e) => return Err(e),
    }
    for c in &checks {
        csv.rows.push(vec![
            c.name.clone(),
            c.passed.to_string(),
            c.detail.replace(',', ";"),
        ]);
    }
    Ok(AuditReport::new(config, checks, results, csv, started))
}

fn default_explicit_seed_bits(n: u32) -> u32 {
    if n <= 16 {
        2
    } else {
        4
    }
}

fn condense_explicit(config: &ExperimentConfig) -> Result<AuditReport> {
    let started = Instant::now();
    let seed = config.seed()?;
    let d = config
        .d
        .unwrap_or_else(|| default_explicit_seed_bits(config.n));
    let cfg = ExplicitCfg::table_random(config.n, config.eps, d, seed)?;
    let expected_fiber = 1u64 << (cfg.n1 - cfg.limb_bits);
    let mut checks = Vec::new();

    let mut rng = stream(seed, 1);
    let samples = config.trials.max(1);
    let mut sampled_ok = true;
    for _ in 0..samples {
        let s = rng.gen::<u64>() & crate::bits::mask(cfg.d);
        let y2 = rng.gen::<u64>() & crate::bits::mask(cfg.n2);
        for z in 0..1u64 << cfg.limb_bits {
            sampled_ok &= fiber_count(&cfg, s, y2, z)? == expected_fiber;
        }
    }
    checks.push(Check::new(
        "fiber_sampled",
        "fiber size is 2^(3n/16) for every (s, y2, z)",
        sampled_ok,
        format!("{samples} random (s, y2), all z, expected {expected_fiber}"),
    ));

    let mut results = json!({ "cfg": cfg, "expected_fiber": expected_fiber });
    match ReachProfile::build(&cfg) {
        Ok(profile) => {
            let (lo, hi) = fiber_census(&cfg, &profile);
            checks.push(Check::new(
                "fiber_exhaustive",
                "fiber size is 2^(3n/16) for every (s, y2, z)",
                lo == expected_fiber && hi == expected_fiber,
                format!("fiber sizes in [{lo}, {hi}] over all reachable prefixes"),
            ));
            let summary = explicit_reach_summary(&cfg, &profile);
            let w = wrap_condenser(ExplicitExt::new(cfg.clone())?, config.eps)?;
            let cert = certify_with_summary(&w, summary, config.trials.min(20), seed ^ 0x3a3a)?;
            checks.extend(prefixed("wrap", &cert.checks));
            results["wrap"] =
                serde_json::to_value(&cert).map_err(|e| Error::Parse(e.to_string()))?;
        }
        Err(Error::TooLarge { .. }) => {
            checks.push(Check::info(
                "exhaustive_audits",
                "exhaustive audits need n2 + d <= 32",
                false,
                "skipped at this width; fiber checked on samples only",
            ));
        }
        Err(e) => return Err(e),
    }
    let mut csv = CsvTable::new(&["check", "passed", "detail"]);
    for c in &checks {
        csv.rows.push(vec![
            c.name.clone(),
            c.passed.to_string(),
            c.detail.replace(',', ";"),
        ]);
    }
    Ok(AuditReport::new(config, checks, results, csv, started))
}

/// Graph file layout for `cover --fn-file`.
#[derive(Deserialize)]
struct GraphFile {
    n_right: usize,
    adjacency: Vec<Vec<u32>>,
    c0: f64,
    delta: f64,
    c1: f64,
}

/// Greedy covering on a graph file, or on `trials` random graphs with
/// `2^n` left and `2^t` right vertices and left degree `ceil(T^delta)`.
pub fn cmd_cover(config: &ExperimentConfig) -> Result<AuditReport> {
    let started = Instant::now();
    let mut instances = Vec::new();
    if let Some(path) = &config.fn_file {
        let file = File::open(path).map_err(|e| io_error(path, e))?;
        let g: GraphFile = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Parse(e.to_string()))?;
        instances.push((
            BipartiteGraph::new(g.n_right, g.adjacency)?,
            g.c0,
            g.delta,
            g.c1,
        ));
    } else {
        let seed = config.seed()?;
        if config.n > 16 || config.t > 16 {
            return Err(Error::too_large(
                "random cover graph",
                config.n.max(config.t),
                16,
            ));
        }
        let right = 1usize << config.t;
        let degree = ((right as f64).powf(config.delta).ceil() as usize).min(right);
        for i in 0..config.trials as u64 {
            let mut rng = stream(seed, i);
            let all: Vec<u32> = (0..right as u32).collect();
            let adjacency = (0..1usize << config.n)
                .map(|_| all.choose_multiple(&mut rng, degree).copied().collect())
                .collect();
            instances.push((
                BipartiteGraph::new(right, adjacency)?,
                1.0,
                config.delta,
                0.5,
            ));
        }
    }
    let results_vec = instances
        .par_iter()
        .map(|(g, c0, delta, c1)| greedy_cover(g, *c0, *delta, *c1))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = CsvTable::new(&["index", "steps", "bound", "covered"]);
    for (i, r) in results_vec.iter().enumerate() {
        csv.rows.push(vec![
            i.to_string(),
            r.steps.to_string(),
            format!("{:.6}", r.bound),
            r.covered.to_string(),
        ]);
    }
    let failing = results_vec.iter().filter(|r| !r.passed()).count();
    let checks = vec![Check::new(
        "cover_guarantees",
        "greedy cover reaches c1·N within the cardinality bound, by recount",
        failing == 0,
        format!("{} instances, {failing} failing", results_vec.len()),
    )];
    let results = json!({ "instances": results_vec.len(), "covers": results_vec });
    Ok(AuditReport::new(config, checks, results, csv, started))
}

/// Entropy summary of a distribution file, or of `trials` random
/// distributions on `t` bits with dyadic-free rational weights.
pub fn cmd_entropy(config: &ExperimentConfig) -> Result<AuditReport> {
    let started = Instant::now();
    let dists: Vec<Dist> = if let Some(path) = &config.fn_file {
        let file = File::open(path).map_err(|e| io_error(path, e))?;
        vec![serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Parse(e.to_string()))?]
    } else {
        let seed = config.seed()?;
        if config.t > 16 {
            return Err(Error::too_large("random distribution", config.t, 16));
        }
        (0..config.trials as u64)
            .map(|i| {
                let mut rng = stream(seed, i);
                let weights: Vec<u64> = (0..1u64 << config.t)
                    .map(|_| rng.gen_range(0..100))
                    .collect();
                let weights = if weights.iter().all(|w| w.is_zero()) {
                    vec![1]
                } else {
                    weights
                };
                Dist::from_counts(config.t, &weights)
            })
            .collect::<Result<_>>()?
    };
    let mut csv = CsvTable::new(&[
        "index",
        "min_entropy",
        "smooth_min_entropy",
        "heavy_set_size",
    ]);
    let mut rows = Vec::new();
    let mut consistent = true;
    for (i, d) in dists.iter().enumerate() {
        let h = min_entropy(d);
        let smooth = smooth_min_entropy(d, config.eps);
        let k = smooth.entropy_bits + 0.5;
        let heavy = heavy_set(d, k, config.eps);
        if let Some(set) = &heavy {
            consistent &= tv_entropy_bound_check(d, set, config.eps)?.holds;
        }
        consistent &=
            smooth.entropy_bits + 1e-12 >= h && smooth.entropy_bits <= d.bits() as f64 + 1e-12;
        let size = heavy.as_ref().map_or(0, |s| s.len());
        csv.rows.push(vec![
            i.to_string(),
            format!("{h:.9}"),
            format!("{:.9}", smooth.entropy_bits),
            size.to_string(),
        ]);
        rows.push(json!({
            "index": i,
            "min_entropy": h,
            "smooth": smooth,
            "heavy_set_size": size,
        }));
    }
    let checks = vec![Check::new(
        "entropy_consistency",
        "H_inf <= H_inf^eps <= t and every heavy set's TV bound holds",
        consistent,
        format!("{} distributions", dists.len()),
    )];
    let results = json!({ "distributions": dists.len(), "rows": rows });
    Ok(AuditReport::new(config, checks, results, csv, started))
}
