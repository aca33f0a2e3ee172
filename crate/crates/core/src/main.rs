use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bohrseq::bohr::{decompose_gap, enumerate_bohr, solve_small_norm_set};
use bohrseq::builder::stream_sequence;
use bohrseq::config::Config;
use bohrseq::harness::{sixth, verify_member, verify_nonmember};
use bohrseq::io::{
    arc_report, read_points, read_seq, stage_summaries, write_seq, write_verify, BetaFile, BuildReport, CoverReport,
};
use bohrseq::rational::{parse_rational, Rational};
use bohrseq::Result;

/// Build and check strong characterizing sequences of subgroups of R/Z.
#[derive(Parser)]
#[command(name = "bohrseq", version)]
struct Cli {
    #[command(flatten)]
    budgets: Budgets,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Budgets {
    /// Largest precision, in bits, for certified comparisons.
    #[arg(long, global = true)]
    precision_cap: Option<u32>,
    /// Largest group ball, as a number of points.
    #[arg(long, global = true)]
    ball_budget: Option<u64>,
    /// Largest N tried by the searches.
    #[arg(long, global = true)]
    n_budget: Option<u64>,
    /// Intervals materialized by one arc-set computation.
    #[arg(long, global = true)]
    arc_budget: Option<u64>,
    /// Reachable sums kept by the cover containment check.
    #[arg(long, global = true)]
    dp_budget: Option<u64>,
}

impl Budgets {
    fn config(&self) -> Config {
        let mut cfg = Config::default();
        if let Some(v) = self.precision_cap {
            cfg.precision.cap = v;
        }
        if let Some(v) = self.ball_budget {
            cfg.ball_budget = v;
        }
        if let Some(v) = self.n_budget {
            cfg.n_budget = v;
        }
        if let Some(v) = self.arc_budget {
            cfg.arc_budget = v;
        }
        if let Some(v) = self.dp_budget {
            cfg.dp_budget = v;
        }
        cfg
    }
}

#[derive(Args)]
struct BohrArgs {
    /// JSON list of point descriptors.
    #[arg(long)]
    alphas: PathBuf,
    #[arg(long, value_parser = rational)]
    eps: Rational,
    #[arg(long)]
    limit: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Member,
    Nonmember,
}

#[derive(Subcommand)]
enum Command {
    /// Print the members of a finite Bohr set, one per line.
    Enum(BohrArgs),
    /// Print a certified progression cover of a finite Bohr set as JSON.
    Decompose(BohrArgs),
    /// Print the arcs of {β : ||nβ|| <= cutoff for all n in the Bohr set}.
    Arcs {
        #[command(flatten)]
        bohr: BohrArgs,
        #[arg(long, value_parser = rational, default_value = "1/6")]
        cutoff: Rational,
    },
    /// Build the first stages of the sequence.
    Build {
        /// JSON list of generator descriptors.
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        stages: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Check a point against a built sequence.
    Verify {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Exponent of the member series.
        #[arg(long, value_parser = rational, required_if_eq("mode", "member"))]
        r: Option<Rational>,
        /// Witness threshold for non-members.
        #[arg(long, value_parser = rational)]
        threshold: Option<Rational>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn rational(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.budgets.config();
    match cli.command {
        Command::Enum(a) => {
            let (_, alphas) = read_points(&a.alphas)?;
            for n in enumerate_bohr(&alphas, &a.eps, a.limit, &cfg)?.members() {
                println!("{n}");
            }
        }
        Command::Decompose(a) => {
            let (_, alphas) = read_points(&a.alphas)?;
            let h = enumerate_bohr(&alphas, &a.eps, a.limit, &cfg)?;
            let cover = decompose_gap(&h, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&CoverReport::from(&cover))?);
        }
        Command::Arcs { bohr: a, cutoff } => {
            let (_, alphas) = read_points(&a.alphas)?;
            let h = enumerate_bohr(&alphas, &a.eps, a.limit, &cfg)?;
            let set = solve_small_norm_set(h.members(), &cutoff, cfg.arc_budget)?;
            println!("{}", serde_json::to_string_pretty(&arc_report(&set))?);
        }
        Command::Build {
            group,
            stages,
            out,
            report,
        } => {
            let (descs, gens) = read_points(&group)?;
            let build = stream_sequence(gens, stages, &cfg)?;
            write_seq(&out, &build.stages)?;
            BuildReport::new(descs, stages, &build).write(&report)?;
            for s in &build.stages {
                eprintln!(
                    "stage {}: eps {} N {} M {} |S| {} certificates {}",
                    s.t(),
                    s.plan.eps,
                    s.plan.n,
                    s.plan.m,
                    s.members().len(),
                    if s.certificates.all() { "ok" } else { "FAILED" }
                );
            }
            if let Some(e) = build.error {
                return Err(e);
            }
        }
        Command::Verify {
            seq,
            report,
            beta,
            mode,
            r,
            threshold,
            out,
        } => {
            let rep = BuildReport::read(&report)?;
            let stages = stage_summaries(&read_seq(&seq)?, &rep)?;
            let gens = rep.generator_points()?;
            let beta = BetaFile::read(&beta)?;
            let result = match mode {
                Mode::Member => {
                    let r = r.expect("clap requires --r in member mode");
                    verify_member(&stages, &beta.member(&gens)?, &r)?
                }
                Mode::Nonmember => {
                    let threshold = threshold.unwrap_or_else(sixth);
                    verify_nonmember(&stages, &beta.point(&gens)?, &threshold, &cfg.precision)?
                }
            };
            write_verify(&out, &result)?;
            println!(
                "{}: {}",
                if result.passed() { "PASS" } else { "FAIL" },
                result.verdict()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
