use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use subindep::atlas::{classify_all_pairs, emit_report, AtlasConfig, ReportFormat};
use subindep::pipeline::{decide_pair_spec, format_decision, Config, OutputFormat, PairSpec};

/// Decide whether two permutation subgroups are independent.
#[derive(Parser)]
#[command(name = "subindep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one pair of subgroups.
    Decide(DecideArgs),
    /// Classify every ordered pair of subgroups of a symmetric group.
    Atlas(AtlasArgs),
}

#[derive(Args)]
struct Budgets {
    /// Largest group the engine will enumerate.
    #[arg(long, default_value_t = 5040)]
    max_group_order: usize,
    /// Most endomorphisms enumerated per subgroup.
    #[arg(long, default_value_t = 256)]
    endo_budget: usize,
    /// Largest group passed to the isomorphism test.
    #[arg(long, default_value_t = 512)]
    iso_budget: usize,
    /// Worker threads for exhaustive search.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct DecideArgs {
    /// JSON pair specification; `-` reads standard input.
    #[arg(long, conflicts_with = "inline", required_unless_present = "inline")]
    input: Option<String>,
    /// Take the pair from --degree, --a and --b.
    #[arg(long, requires = "degree")]
    inline: bool,
    #[arg(long)]
    degree: Option<usize>,
    /// Generator of A in cycle notation; repeatable.
    #[arg(long = "a", value_name = "CYCLES")]
    a: Vec<String>,
    /// Generator of B in cycle notation; repeatable.
    #[arg(long = "b", value_name = "CYCLES")]
    b: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also check the quotient isomorphisms and the product law.
    #[arg(long)]
    diagnostics: bool,
    /// Compute the smaller subgroup's normal closure first.
    #[arg(long)]
    easier_first: bool,
    /// Report elapsed_ms as 0 so output is reproducible.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    budgets: Budgets,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum AtlasFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct AtlasArgs {
    /// Degree n of the symmetric group S_n.
    #[arg(long)]
    degree: usize,
    /// Enumerate subgroups generated by at most this many elements.
    #[arg(long, default_value_t = 2)]
    max_gens: usize,
    /// Enumerate every subgroup instead.
    #[arg(long)]
    full_lattice: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: AtlasFormat,
    #[command(flatten)]
    budgets: Budgets,
}

fn read_input(path: &str) -> Result<String> {
    let mut s = String::new();
    if path == "-" {
        io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
    } else {
        s = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    }
    Ok(s)
}

fn run_decide(args: DecideArgs) -> Result<u8> {
    let spec: PairSpec = match (&args.input, args.inline) {
        (Some(path), false) => {
            let text = read_input(path)?;
            serde_json::from_str(&text).context("malformed pair specification")?
        }
        (None, true) => PairSpec {
            degree: args.degree.expect("required by --inline"),
            a: args.a.clone(),
            b: args.b.clone(),
        },
        _ => bail!("give either --input or --inline"),
    };
    let output_format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::Text => OutputFormat::Text,
    };
    let config = Config {
        max_group_order: args.budgets.max_group_order,
        endo_budget: args.budgets.endo_budget,
        iso_budget: args.budgets.iso_budget,
        run_diagnostics: args.diagnostics,
        output_format,
        parallelism: args.budgets.jobs,
        easier_first: args.easier_first,
        record_timing: !args.no_timing,
    };
    let (_, decision) = decide_pair_spec(&spec, &config)?;
    io::stdout().write_all(format_decision(&decision, output_format).as_bytes())?;
    Ok(decision.exit_code() as u8)
}

fn run_atlas(args: AtlasArgs) -> Result<u8> {
    let mut config = AtlasConfig {
        max_gens: (!args.full_lattice).then_some(args.max_gens),
        jobs: args.budgets.jobs,
        ..AtlasConfig::default()
    };
    config.pipeline.max_group_order = args.budgets.max_group_order;
    config.pipeline.endo_budget = args.budgets.endo_budget;
    config.pipeline.iso_budget = args.budgets.iso_budget;
    config.pipeline.validate()?;
    if args.budgets.jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let report = classify_all_pairs(args.degree, &config)?;
    let format = match args.format {
        AtlasFormat::Csv => ReportFormat::Csv,
        AtlasFormat::Json => ReportFormat::Json,
    };
    emit_report(&report, &args.out, format)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let s = &report.summary;
    eprintln!(
        "{} subgroups, {} rows; oracle disagreements {}, check disagreements {}, symmetry violations {}, budget trips {}, gap rows {} ({} dependent)",
        report.subgroup_count,
        s.rows,
        s.oracle_disagreements,
        s.check_disagreements.values().sum::<usize>(),
        s.symmetry_violations,
        s.budget_trips,
        s.gap_rows,
        s.gap_dependent.len()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Decide(a) => run_decide(a),
        Command::Atlas(a) => run_atlas(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
