use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ulam_core::bounds::{max_volume_n, table, theorem2_bound};
use ulam_core::harness::{
    simulate_adversary, verify_exhaustive, verify_sampled, VerificationReport, DEFAULT_CASE_BUDGET,
};
use ulam_core::strategy::{halving_size, Phase};
use ulam_core::{Answer, Oracle, OracleLimits, StrategyPlan, WideBounds};
use ulam_service::{ServiceConfig, SessionStore};

mod play;

#[derive(Parser)]
#[command(
    name = "ulam",
    version,
    about = "Searching with one lie: bounds, checks and live play"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal worst-case question count for n candidates.
    Q1 { n: u128 },
    /// All bounds for n: exact optimum, constructive strategy, volume bound.
    Bound { n: u128 },
    /// CSV of the bounds for a range of n.
    Table {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Brute-force optimum for n = 1..=K, checked against the closed form.
    Oracle(OracleArgs),
    /// Plays the strategy against honest responders with at most one lie.
    Verify(VerifyArgs),
    /// Plays the strategy, cut to q questions, against the weight adversary.
    Adversary {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        q: u32,
        /// Directory for the game transcript.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Reproduces the n = 1,000,000 numbers and the worked trace.
    Headline,
    /// Answer the machine's questions in the terminal.
    Play {
        #[arg(long)]
        n: u64,
        /// Write the finished transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Runs the JSON/HTTP session service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n_max: u64,
    /// Largest question count searched.
    #[arg(long, default_value_t = 40)]
    j_max: u32,
    /// Memo file, loaded if present and rewritten afterwards.
    #[arg(long, env = "ULAM_ORACLE_CACHE")]
    cache: Option<PathBuf>,
    /// Run the n values in parallel.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: u64,
    /// Exhaustive run with no case ceiling, reporting progress on stderr.
    #[arg(long, conflicts_with_all = ["samples", "seed"])]
    full: bool,
    /// Random cases instead of the exhaustive run.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 1, requires = "samples")]
    seed: u64,
    /// Ceiling on exhaustive case counts.
    #[arg(long, default_value_t = DEFAULT_CASE_BUDGET)]
    case_budget: u64,
    /// Directory for failure transcripts.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Append-only event log, replayed on startup.
    #[arg(long)]
    event_log: Option<PathBuf>,
    #[arg(long, default_value_t = 1 << 20)]
    max_n: u64,
    #[arg(long, default_value_t = 10_000)]
    max_sessions: usize,
    /// Idle seconds before an in-progress session expires.
    #[arg(long, default_value_t = 1800)]
    idle_timeout: u64,
}

/// Outcome of a command: `false` means a check failed.
type Checked = Result<bool>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Checked {
    match command {
        Command::Q1 { n } => {
            println!("{}", WideBounds::pelc_q1(&n)?);
            Ok(true)
        }
        Command::Bound { n } => bound(n),
        Command::Table { from, to } => {
            if from > to {
                bail!("--from must not exceed --to");
            }
            print!("{}", table(from, to)?);
            Ok(true)
        }
        Command::Oracle(args) => oracle(args),
        Command::Verify(args) => verify(args),
        Command::Adversary { n, q, transcripts } => adversary(n, q, transcripts.as_deref()),
        Command::Headline => headline(),
        Command::Play { n, transcript } => play::run(n, transcript.as_deref()),
        Command::Serve(args) => serve(args),
    }
}

fn bound(n: u128) -> Checked {
    let exact = WideBounds::pelc_q1(&n)?;
    let strategy = WideBounds::theorem2_bound(&n)?;
    let lower = WideBounds::volume_lower(&n)?;
    println!("n={n}");
    println!("q1={exact}");
    println!("strategy_q={} ell={}", strategy.q, strategy.ell);
    println!("volume_lower={}", lower.q);
    if n >= 2 {
        println!("gap={}", WideBounds::gap(&n)?);
    }
    Ok(true)
}

fn oracle(args: OracleArgs) -> Checked {
    let limits = OracleLimits {
        max_candidates: args.n_max.max(OracleLimits::default().max_candidates),
        max_questions: args.j_max,
    };
    let oracle = Oracle::new(limits);
    if let Some(path) = args.cache.as_deref().filter(|p| p.exists()) {
        let loaded = oracle
            .load(path)
            .with_context(|| format!("loading {}", path.display()))?;
        eprintln!("loaded {loaded} memo entries from {}", path.display());
    }
    let rows = oracle.q1_table(args.n_max, args.parallel)?;
    let mut ok = true;
    println!("n,oracle_q1,formula_q1,match");
    for (n, q) in rows {
        let formula = ulam_core::bounds::pelc_q1(n)?;
        ok &= q == formula;
        println!(
            "{n},{q},{formula},{}",
            if q == formula { "yes" } else { "NO" }
        );
    }
    if let Some(path) = args.cache.as_deref() {
        oracle
            .save(path)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!(
            "saved {} memo entries to {}",
            oracle.memo_len(),
            path.display()
        );
    }
    Ok(ok)
}

fn write_failures(report: &VerificationReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for failure in &report.failures {
        let lie = failure
            .case
            .lie_at
            .map_or("none".to_string(), |l| l.to_string());
        let path = dir.join(format!(
            "fail-n{}-x{}-lie{lie}.txt",
            report.n, failure.case.x
        ));
        std::fs::write(&path, failure.transcript.to_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Checked {
    let report = if let Some(samples) = args.samples {
        verify_sampled(args.n, samples, args.seed)?
    } else if args.full {
        let progress = |done: u64, total: u64| {
            let step = (total / 100).max(1);
            if done.is_multiple_of(step) || done == total {
                eprint!("\rsecrets {done}/{total}");
                if done == total {
                    eprintln!();
                }
            }
        };
        verify_exhaustive(args.n, None, Some(&progress))?
    } else {
        verify_exhaustive(args.n, Some(args.case_budget), None)?
    };
    print!("{report}");
    if let Some(dir) = args.transcripts.as_deref() {
        write_failures(&report, dir)?;
    }
    Ok(report.passed())
}

fn adversary(n: u64, q: u32, transcripts: Option<&Path>) -> Checked {
    let run = simulate_adversary(n, q)?;
    println!("{run}");
    if let Some(dir) = transcripts {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("adversary-n{n}-q{q}.txt"));
        std::fs::write(&path, run.transcript.to_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let strategy_q = theorem2_bound(n)?.q;
    let ok = if !ulam_core::bounds::volume_winnable(n, q)? {
        println!("expected: no win (volume test fails for q={q})");
        !run.questioner_won && !run.visited_lone_consistent
    } else if q >= strategy_q {
        println!("expected: win (q >= strategy budget {strategy_q})");
        run.questioner_won
    } else {
        println!("expected: either (q below the strategy budget {strategy_q} but within volume)");
        true
    };
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn headline() -> Checked {
    let n = 1_000_000u64;
    let mut ok = true;
    let mut line = |label: &str, got: String, want: &str| {
        let pass = got == want;
        ok &= pass;
        println!("{} {label}: {got}", if pass { "PASS" } else { "FAIL" });
    };
    line(
        "q1(1000000)",
        ulam_core::bounds::pelc_q1(n)?.to_string(),
        "25",
    );
    let t = theorem2_bound(n)?;
    line(
        "strategy bound (q, ell)",
        format!("({}, {})", t.q, t.ell),
        "(25, 20)",
    );
    line(
        "largest n winnable in 24 questions",
        format!("{:?}", max_volume_n(24)),
        "Some(671088)",
    );
    line(
        "largest n winnable in 25 questions",
        format!("{:?}", max_volume_n(25)),
        "Some(1290555)",
    );
    line("padded size 2^ell", (1u64 << t.ell).to_string(), "1048576");

    let mut plan = StrategyPlan::new(n)?;
    let mut state = plan.initial_state();
    let x = 1u64;
    for i in 0..t.ell {
        let question = plan.bit_question(i)?;
        let answer = Answer::from_bool(question.contains(state.padded_size(), x));
        state.apply_answer(&question, answer)?;
        plan.on_answer(&state, answer)?;
    }
    let s = state.summary();
    line(
        "state after 20 bit answers",
        format!("({},{}) weight {}", s.a, s.b, s.weight()?),
        "(1,20) weight 26",
    );
    let r = plan.pad_pennies(&mut state)?;
    line("pennies after padding", r.to_string(), "26");
    line(
        "halving pennies y",
        halving_size(plan.p(), r)?.to_string(),
        "11",
    );
    let (a5, _) = plan
        .next_question(&mut state)?
        .context("halving question")?;
    let mut yes = (plan.clone(), state.clone());
    yes.1.apply_answer(&a5, Answer::Yes)?;
    yes.0.on_answer(&yes.1, Answer::Yes)?;
    let next_y = match yes.0.phase() {
        Phase::Halving { p, r } => halving_size(*p, *r)?.to_string(),
        other => format!("{other:?}"),
    };
    line("Yes branch: pennies in the next halving set", next_y, "4");
    let mut no = state.clone();
    no.apply_answer(&a5, Answer::No)?;
    line("No branch: pennies left", no.summary().b.to_string(), "16");
    Ok(ok)
}

fn serve(args: ServeArgs) -> Checked {
    let config = ServiceConfig {
        max_n: args.max_n,
        max_sessions: args.max_sessions,
        idle_timeout: Duration::from_secs(args.idle_timeout),
        event_log: args.event_log,
    };
    let store = Arc::new(SessionStore::open(config).context("replaying the event log")?);
    let addr = SocketAddr::new(args.host, args.port);
    eprintln!(
        "listening on http://{addr} ({} sessions recovered)",
        store.len()
    );
    std::io::stderr().flush()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(ulam_service::serve(addr, store))?;
    Ok(true)
}
