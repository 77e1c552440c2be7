//! Command-line front end: generation, verification and reports for the
//! divisor-graph chain permutation. Batch only; identical invocations
//! produce byte-identical output.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 chain construction
//! failure (the message names the prime), 3 arithmetic overflow, 4 chain
//! validation failure.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chainperm::analysis;
use chainperm::error::Error;
use chainperm::gamma::{self, GammaStore};
use chainperm::oracle;
use chainperm::permutation::{self, SegmentKind, Stream};

#[derive(Parser)]
#[command(name = "chainperm", version, about = "Divisor-graph chain permutation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for cached per-prime chains. Falls back to
    /// CHAINPERM_CACHE_DIR; unset means in-memory only.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Work budget per chain construction.
    #[arg(long, global = true, default_value_t = gamma::DEFAULT_BUDGET)]
    node_budget: u64,

    /// Threads for the chain build pool where a command knows its prime
    /// range up front. Output order is unaffected.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lines,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Stream f(1..N), optionally resuming from a checkpoint.
    Generate(GenerateArgs),
    /// Re-validate a generated prefix and report coverage.
    Verify(VerifyArgs),
    /// Growth, lcm or coverage report over a generated prefix.
    Stats(StatsArgs),
    /// Build and print per-prime chains or their length statistics.
    Gamma(GammaArgs),
    /// Insertion decisions (k, q_k) up to a bound.
    Schedule(ScheduleArgs),
    /// The quadratic-growth baseline permutation.
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of terms to emit.
    #[arg(long)]
    terms: u64,
    #[arg(long, value_enum, default_value_t = Format::Lines)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Resume from (and update) this state file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    terms: u64,
    /// Verify the continuation recorded in a checkpoint instead of a
    /// fresh prefix.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    terms: u64,
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Growth,
    Lcm,
    Coverage,
}

#[derive(Args)]
struct GammaArgs {
    /// Build one chain and print it with its contract verdict.
    #[arg(long, conflicts_with = "upto")]
    prime: Option<u64>,
    /// Length statistics for every prime up to this bound.
    #[arg(long)]
    upto: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Lines)]
    format: Format,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    kmax: u64,
    #[arg(long, value_enum, default_value_t = Format::Lines)]
    format: Format,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    terms: u64,
    #[arg(long, value_enum, default_value_t = Format::Lines)]
    format: Format,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::GammaSearch { .. } | Error::BudgetExceeded { .. } => 2,
        Error::Overflow(_) => 3,
        Error::Chain(_) | Error::Corrupt { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            // Help and version go to stdout with success.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("CHAINPERM_CACHE_DIR").map(PathBuf::from));
    let store = GammaStore::new(cache_dir, cli.node_budget);

    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args, &store),
        Command::Verify(args) => cmd_verify(args, &store),
        Command::Stats(args) => cmd_stats(args, &store),
        Command::Gamma(args) => cmd_gamma(args, &store, cli.jobs),
        Command::Schedule(args) => cmd_schedule(args, &store),
        Command::Baseline(args) => cmd_baseline(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn usage_error(msg: &str) -> Result<ExitCode, Error> {
    eprintln!("error: {msg}");
    Ok(ExitCode::from(1))
}

fn open_sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn kind_str(kind: SegmentKind) -> &'static str {
    match kind {
        SegmentKind::Natural => "natural",
        SegmentKind::Insertion(_) => "insertion",
    }
}

fn cmd_generate(args: &GenerateArgs, store: &GammaStore) -> Result<ExitCode, Error> {
    if args.terms == 0 {
        return usage_error("--terms must be at least 1");
    }
    let mut stream = match &args.checkpoint {
        Some(path) if path.exists() => Stream::load_checkpoint(store, path)?,
        _ => Stream::new(store),
    };
    if stream.position() >= args.terms {
        return usage_error("checkpoint is already past --terms");
    }
    let mut sink = open_sink(&args.out)?;
    if args.format == Format::Csv {
        writeln!(sink, "value")?;
    }
    while stream.position() < args.terms {
        let item = stream.next().unwrap()?;
        match args.format {
            Format::Lines | Format::Csv => writeln!(sink, "{}", item.value)?,
            Format::Json => writeln!(
                sink,
                "{{\"n\":\"{}\",\"f\":\"{}\",\"segment_p\":\"{}\",\"kind\":\"{}\"}}",
                item.n,
                item.value,
                item.segment_p,
                kind_str(item.kind)
            )?,
        }
    }
    sink.flush()?;
    if let Some(path) = &args.checkpoint {
        stream.save_checkpoint(path)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs, store: &GammaStore) -> Result<ExitCode, Error> {
    if args.terms == 0 {
        return usage_error("--terms must be at least 1");
    }
    let seq = match &args.checkpoint {
        None => permutation::generate(args.terms, store)?,
        Some(path) => {
            // Replay: the recorded state must chain onto everything the
            // resumed stream emits.
            let mut stream = Stream::load_checkpoint(store, path)?;
            if stream.position() >= args.terms {
                return usage_error("checkpoint is already past --terms");
            }
            let mut seq = vec![stream.last_value()];
            while stream.position() < args.terms {
                seq.push(stream.next().unwrap()?.value);
            }
            seq
        }
    };
    if let Some(report) = oracle::recheck_sequence(&seq) {
        eprintln!("invalid: {report}");
        return Ok(ExitCode::from(4));
    }
    let coverage = analysis::coverage_of_stream(seq.len() as u64, seq.iter().map(|&v| Ok(v)))?;
    println!(
        "valid terms={} min_missing={} present_up_to={}",
        seq.len(),
        coverage.min_missing,
        coverage.present_up_to
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: &StatsArgs, store: &GammaStore) -> Result<ExitCode, Error> {
    if args.terms == 0 {
        return usage_error("--terms must be at least 1");
    }
    match args.which {
        Which::Growth | Which::Lcm => {
            let report = match args.which {
                Which::Growth => analysis::growth_report(args.terms, store)?,
                _ => analysis::lcm_report(args.terms, store)?,
            };
            match args.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string(&report).expect("report serializes")
                ),
                Format::Csv => print!("{}", analysis::checkpoints_csv(&report)),
                Format::Lines => {
                    println!("horizon={}", report.horizon);
                    println!("max_ratio={}", report.max_ratio);
                    println!("argmax_n={}", report.argmax_n);
                }
            }
        }
        Which::Coverage => {
            let report = analysis::coverage_report(args.terms, store)?;
            match args.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string(&report).expect("report serializes")
                ),
                Format::Csv => {
                    println!("horizon,min_missing,present_up_to");
                    println!(
                        "{},{},{}",
                        report.horizon, report.min_missing, report.present_up_to
                    );
                }
                Format::Lines => {
                    println!("horizon={}", report.horizon);
                    println!("min_missing={}", report.min_missing);
                    println!("present_up_to={}", report.present_up_to);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gamma(args: &GammaArgs, store: &GammaStore, jobs: usize) -> Result<ExitCode, Error> {
    match (args.prime, args.upto) {
        (Some(p), None) => {
            let g = store.get(p)?;
            match args.format {
                Format::Json => println!("{}", g.chain.to_json()),
                Format::Csv => print!("{}", g.chain.to_csv()),
                Format::Lines => {
                    let strings: Vec<String> =
                        g.chain.elems().iter().map(|v| v.to_string()).collect();
                    println!("{}", strings.join(","));
                }
            }
            // The store re-checks the contract on every build and load.
            println!("P1P2P3P4 OK");
            Ok(ExitCode::SUCCESS)
        }
        (None, Some(p_max)) => {
            if p_max < 2 {
                return usage_error("--upto must be at least 2");
            }
            if jobs > 1 {
                // Pre-build in parallel; row emission below stays ordered.
                let primes = chainperm::arith::sieve_primes(p_max)?;
                std::thread::scope(|scope| {
                    for chunk in primes.chunks(primes.len().div_ceil(jobs)) {
                        scope.spawn(move || {
                            for &p in chunk {
                                let _ = store.get(p);
                            }
                        });
                    }
                });
            }
            let rows = gamma::gamma_length_stats(store, p_max)?;
            match args.format {
                Format::Json => {
                    for (p, l, ratio) in rows {
                        println!("{{\"p\":\"{p}\",\"longueur\":\"{l}\",\"ratio\":{ratio}}}");
                    }
                }
                _ => {
                    println!("p,longueur,ratio");
                    for (p, l, ratio) in rows {
                        println!("{p},{l},{ratio}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        _ => usage_error("gamma needs exactly one of --prime or --upto"),
    }
}

fn cmd_schedule(args: &ScheduleArgs, store: &GammaStore) -> Result<ExitCode, Error> {
    if args.kmax == 0 {
        return usage_error("--kmax must be at least 1");
    }
    let schedule = permutation::resolve_schedule(args.kmax, store)?;
    match args.format {
        Format::Json => {
            for (k, q) in schedule.insertions() {
                println!("{{\"k\":\"{k}\",\"q\":\"{q}\"}}");
            }
        }
        _ => {
            println!("k,q");
            for (k, q) in schedule.insertions() {
                println!("{k},{q}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_baseline(args: &BaselineArgs) -> Result<ExitCode, Error> {
    if args.terms == 0 {
        return usage_error("--terms must be at least 1");
    }
    let (seq, stats) = analysis::baseline_naive(args.terms)?;
    let mut sink = BufWriter::new(io::stdout().lock());
    if args.format == Format::Csv {
        writeln!(sink, "value")?;
    }
    for (i, v) in seq.iter().enumerate() {
        match args.format {
            Format::Lines | Format::Csv => writeln!(sink, "{v}")?,
            Format::Json => writeln!(sink, "{{\"n\":\"{}\",\"f\":\"{v}\"}}", i + 1)?,
        }
    }
    sink.flush()?;
    eprintln!(
        "window_max_ratio={} at n={} over [{}..{}]",
        stats.window_max_ratio,
        stats.window_argmax_n,
        (args.terms / 2).max(1),
        args.terms
    );
    Ok(ExitCode::SUCCESS)
}
