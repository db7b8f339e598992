use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seedless::condensers::Profile;
use seedless::harness::{emit, run, Command, Construction, ExperimentConfig, Theorem};

#[derive(Parser)]
#[command(
    name = "seedless",
    version,
    about = "Exact audits for seedless condensing"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bias of the anti-extraction adversary on three blocks.
    AuditExtract23(Common),
    /// Certified anti-condensing adversaries.
    AuditCondense(Common),
    /// Build and audit an output-light extractor and its condenser.
    Condense(Common),
    /// Greedy covering on a graph file or random graphs.
    Cover(Common),
    /// Min-entropy and smooth min-entropy of distributions.
    Entropy(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 4)]
    n: u32,
    #[arg(long, default_value_t = 3)]
    ell: u32,
    #[arg(long, default_value_t = 6)]
    t: u32,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value = "scaled")]
    profile: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    fn_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// one-good, nosf23, above-one-over-c or nosf-two-over-c.
    #[arg(long, default_value = "one-good")]
    theorem: String,
    #[arg(long, default_value_t = 1)]
    g: u32,
    #[arg(long, default_value_t = 6.0)]
    k: f64,
    #[arg(long = "m-bits", default_value_t = 10)]
    m_bits: u32,
    #[arg(long, default_value_t = 0.0625)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// sampled or explicit.
    #[arg(long, default_value = "sampled")]
    construction: String,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

fn config(command: Command, a: Common) -> anyhow::Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        n: a.n,
        ell: a.ell,
        t: a.t,
        eps: a.eps,
        profile: a.profile.parse::<Profile>()?,
        trials: a.trials,
        rng_seed: a.rng_seed,
        fn_file: a.fn_file,
        out: a.out,
        csv: a.csv,
        workers: a.workers,
        theorem: a.theorem.parse::<Theorem>()?,
        g: a.g,
        k: a.k,
        m_bits: a.m_bits,
        p: a.p,
        gamma: a.gamma,
        construction: a.construction.parse::<Construction>()?,
        d: a.d,
        delta: a.delta,
        ..ExperimentConfig::new(command)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::AuditExtract23(a) => (Command::AuditExtract23, a),
        Cmd::AuditCondense(a) => (Command::AuditCondense, a),
        Cmd::Condense(a) => (Command::Condense, a),
        Cmd::Cover(a) => (Command::Cover, a),
        Cmd::Entropy(a) => (Command::Entropy, a),
    };
    let result = config(command, args).and_then(|cfg| {
        let report = run(&cfg)?;
        emit(&report)?;
        Ok(report.exit_code())
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
