//! `permatch` — run the matched-pairs permutation test from the shell.
//!
//! Exit codes: 0 success, 2 input error, 3 internal consistency failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use permatch_core::{
    io, run_diagnostics, run_test, Alternative, Error, Matching, Mode, MomentsReport,
    SamplerConfig, SimilarityMatrix, SymmetryPolicy, TestReport, RNG_NAME, TIE_REL_TOL,
};

#[derive(Parser)]
#[command(
    name = "permatch",
    about = "Permutation test for whether a designated pairing of observations is unusually similar",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the test and print a report.
    Test(TestArgs),
    /// Check the structural identities (coupling linearity, increment bound,
    /// margins, normal-approximation distance) on the centered matrix.
    Diagnose(DiagnoseArgs),
    /// Print only the exact null mean and variance of U.
    Moments(MomentsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Similarity matrix: dense square CSV/TSV, optional header row/column.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Reject asymmetric input instead of averaging with the transpose.
    #[arg(long)]
    strict: bool,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Designated matching file (one 1-based pair "i j" per line);
    /// default is the consecutive pairing (1,2), (3,4), …
    #[arg(long, value_name = "FILE")]
    matching: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 100_000)]
    replicates: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest n for exhaustive enumeration (max 20).
    #[arg(long, default_value_t = 16)]
    cutoff: usize,
    #[arg(long, value_enum, default_value_t = AlternativeArg::Greater)]
    alternative: AlternativeArg,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Monte Carlo replicates for the empirical CDF distance.
    #[arg(long, default_value_t = 100_000)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    cutoff: usize,
    /// Sampled matchings for the structural checks when exhaustive
    /// enumeration is too large.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
    Normal,
    Auto,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Mc => Mode::Mc,
            ModeArg::Normal => Mode::Normal,
            ModeArg::Auto => Mode::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlternativeArg {
    Greater,
    Less,
    #[value(name = "two-sided")]
    TwoSided,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Alternative {
        match a {
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::TwoSided => Alternative::TwoSided,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Moments(args) => cmd_moments(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InternalConsistency(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_matrix(args: &InputArgs) -> Result<SimilarityMatrix, Error> {
    let raw = io::read_matrix_csv(&args.input)?;
    let policy = if args.strict {
        SymmetryPolicy::Strict
    } else {
        SymmetryPolicy::Average
    };
    SimilarityMatrix::ingest(&raw, policy)
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let e = load_matrix(&args.input)?;
    let pi0 = match &args.matching {
        Some(path) => io::read_matching_file(path, e.n())?,
        None => Matching::canonical(e.n())?,
    };
    let cfg = SamplerConfig::new(args.seed, args.replicates, args.cutoff)?;
    let report = run_test(&e, &pi0, &cfg, args.mode.into(), args.alternative.into())?;
    match args.input.output {
        OutputFormat::Json => println!("{}", report.to_json()),
        OutputFormat::Text => print_test_report(&report),
    }
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), Error> {
    let e = load_matrix(&args.input)?;
    let cfg = SamplerConfig::new(args.seed, args.replicates, args.cutoff)?;
    let report = run_diagnostics(&e.center(), &cfg, args.samples)?;
    match args.input.output {
        OutputFormat::Json => println!("{}", report.to_json()),
        OutputFormat::Text => {
            println!("diagnostics (n = {})", e.n());
            println!(
                "  linearity max residual    = {}",
                report.linearity_max_residual
            );
            println!(
                "  increment bound violations = {}",
                report.increment_bound_violations
            );
            println!("  margin max |.|            = {}", report.margin_max_abs);
            match (report.empirical_ks_distance, report.delta_bound) {
                (Some(ks), Some(bound)) => {
                    println!("  ks distance to normal     = {ks}");
                    println!("  delta bound               = {bound}");
                }
                _ => println!("  ks distance / bound       = n/a (degenerate distribution)"),
            }
            println!(
                "  samples used = {}, seed = {}, rng = {}",
                report.samples_used, report.seed, RNG_NAME
            );
        }
    }
    Ok(())
}

fn cmd_moments(args: MomentsArgs) -> Result<(), Error> {
    let e = load_matrix(&args.input)?;
    let report = MomentsReport::new(&e)?;
    match args.input.output {
        OutputFormat::Json => println!("{}", report.to_json()),
        OutputFormat::Text => {
            println!("moments of U over the matching null (n = {})", report.n);
            println!("  mean     = {}", report.mean);
            println!("  variance = {}", report.variance);
            for w in &report.warnings {
                println!("  warning: {w}");
            }
        }
    }
    Ok(())
}

fn print_test_report(r: &TestReport) {
    println!("permutation matching test (n = {})", r.n);
    println!("  statistic U   = {}", r.u);
    println!("  null mean     = {}", r.mean);
    println!("  null variance = {}", r.variance);
    if let Some(w) = r.w {
        println!("  standardized W = {w}");
    }
    println!("  alternative   = {}", alternative_name(r.alternative));
    println!("  mode          = {}", mode_name(r.mode));
    if let Some(p) = r.p_exact {
        println!("  p (exact enumeration) = {p}");
    }
    if let (Some(p), Some(se)) = (r.p_mc, r.mc_std_error) {
        println!("  p (monte carlo)       = {p}  (std error {se})");
    }
    if let Some(p) = r.p_normal {
        println!("  p (normal approx)     = {p}");
    }
    if let (Some(delta), Some(terms)) = (r.delta_bound, r.bound_terms.as_ref()) {
        println!("  normal-approx error bound delta <= {delta}");
        println!(
            "    term1 (moment ratio) = {}, term2 (alpha^3) = {}",
            terms.term1, terms.term2
        );
        if delta >= 1.0 {
            println!("    note: bound >= 1 — uninformative at this n");
        }
    }
    println!(
        "  seed = {}, replicates = {}, rng = {}, tie tolerance = {:e} (relative)",
        r.seed, r.replicates, r.rng, TIE_REL_TOL
    );
    for w in &r.warnings {
        println!("  warning: {w}");
    }
}

fn alternative_name(a: Alternative) -> &'static str {
    match a {
        Alternative::Greater => "greater",
        Alternative::Less => "less",
        Alternative::TwoSided => "two-sided",
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Mc => "mc",
        Mode::Normal => "normal",
        Mode::Auto => "auto",
    }
}
