use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stable_committee::bench::{run_suite, Suite};
use stable_committee::generators::{gen_cyclic, gen_random, gen_ranking_grid, ModelKind, RandomParams};
use stable_committee::lottery::{exact_game, mwu_lottery, GameSolution, MwuParams};
use stable_committee::rounding::{iterated_rounding, MwuProvider, RoundingParams};
use stable_committee::{
    committee_weight, verify_committee, verify_lottery, Committee, EnumerationBound, Error, Instance, Lottery,
    StabilityReport,
};

const EXIT_UNSTABLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "stable-committee", version, about = "Approximately stable committees and lotteries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance from one of the built-in families.
    Generate(GenerateArgs),
    /// Check a committee or lottery for approximate stability.
    Verify(VerifyArgs),
    /// Compute a stable lottery, a rounded committee or an exact game solution.
    Solve(SolveArgs),
    /// Tabulate a benchmark suite as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cyclic,
    Grid,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Voters for random instances; defaults to m.
    #[arg(long)]
    n: Option<usize>,
    /// Budget; overrides the family's own value for cyclic and grid.
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    ell: usize,
    #[arg(long, default_value = "approval")]
    kind: ModelKind,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated candidate indices.
    #[arg(long, conflicts_with = "lottery", required_unless_present = "lottery")]
    committee: Option<String>,
    /// Lottery JSON file.
    #[arg(long)]
    lottery: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Largest blocker size, or "all".
    #[arg(long = "L", default_value = "all", value_parser = parse_bound)]
    l: EnumerationBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lottery,
    Committee,
    ExactGame,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "committee")]
    mode: Mode,
    /// Largest blocker size, or "all".
    #[arg(long = "L", default_value = "1", value_parser = parse_bound)]
    l: EnumerationBound,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    beta: f64,
    /// Stability factor to verify at; defaults to 2 + eps for lotteries,
    /// the rounding bound for committees and 2 for the exact game.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-round rounding trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_bound(s: &str) -> Result<EnumerationBound, String> {
    if s == "all" {
        return Ok(EnumerationBound::AllCommittees);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or \"all\", got {s:?}")),
        Ok(l) => Ok(EnumerationBound::UpToSize(l)),
    }
}

/// A failed command: exit code and message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: EXIT_INPUT, message: message.to_string() }
    }

    fn solver(err: Error) -> Self {
        let code = match err {
            Error::Convergence { .. }
            | Error::InstanceTooLarge(_)
            | Error::TheoremViolation(_)
            | Error::DegenerateAttacker(_)
            | Error::DegenerateBlocker(..) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        Failure { code, message: err.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &PathBuf) -> Result<Instance, Failure> {
    Instance::from_json(&read(path)?).map_err(Failure::input)
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(Failure::input),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
    emit(None, &(text + "\n"))
}

fn stability_code(report: &StabilityReport) -> u8 {
    if report.stable {
        0
    } else {
        EXIT_UNSTABLE
    }
}

fn generate(args: GenerateArgs) -> Outcome {
    let inst = match args.family {
        Family::Cyclic => gen_cyclic(args.m, args.eps),
        Family::Grid => gen_ranking_grid(args.r, args.ell),
        Family::Random => gen_random(
            args.kind,
            args.m,
            args.n.unwrap_or(args.m),
            args.k.unwrap_or(2.0),
            RandomParams { density: args.density },
            args.seed,
        ),
    }
    .map_err(Failure::input)?;
    let inst = match (args.family, args.k) {
        (Family::Cyclic | Family::Grid, Some(k)) => inst.with_k(k).map_err(Failure::input)?,
        _ => inst,
    };
    emit(args.out.as_ref(), &(inst.to_json() + "\n"))?;
    eprintln!("generated m = {}, n = {}, K = {}", inst.m(), inst.n(), inst.k());
    Ok(0)
}

fn parse_committee(s: &str) -> Result<Committee, Failure> {
    let members = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u32>().map_err(|_| Failure::input(format!("bad candidate index {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Committee::new(members))
}

fn verify(args: VerifyArgs) -> Outcome {
    let inst = load_instance(&args.instance)?;
    let report = match (&args.committee, &args.lottery) {
        (Some(s), _) => verify_committee(&inst, &parse_committee(s)?, args.c, args.l),
        (None, Some(path)) => {
            let lottery = Lottery::from_json(&read(path)?).map_err(Failure::input)?;
            if (lottery.limit() - inst.k()).abs() > 1e-9 {
                return Err(Failure::input(format!(
                    "lottery K = {} differs from instance K = {}",
                    lottery.limit(),
                    inst.k()
                )));
            }
            verify_lottery(&inst, &lottery, args.c, args.l)
        }
        (None, None) => unreachable!("clap requires one of the two"),
    }
    .map_err(Failure::input)?;
    print_json(&report)?;
    eprintln!(
        "{} at c = {}: worst ratio {}{}",
        if report.stable { "stable" } else { "unstable" },
        report.target_c,
        report.worst_ratio,
        report.worst_blocker.as_ref().map(|b| format!(" from {b}")).unwrap_or_default()
    );
    Ok(stability_code(&report))
}

#[derive(Serialize)]
struct LotteryOutput<'a> {
    mode: &'static str,
    lottery: &'a Lottery,
    rounds: usize,
    report: StabilityReport,
}

#[derive(Serialize)]
struct CommitteeOutput<'a> {
    mode: &'static str,
    committee: &'a Committee,
    weight: f64,
    theoretical_bound: f64,
    guaranteed_bound: f64,
    report: StabilityReport,
}

#[derive(Serialize)]
struct GameOutput<'a> {
    mode: &'static str,
    game: &'a GameSolution,
    report: StabilityReport,
}

fn solve(args: SolveArgs) -> Outcome {
    let inst = load_instance(&args.instance)?;
    let size = args.l.max_size(inst.m());
    match args.mode {
        Mode::Lottery => {
            let params = MwuParams::new(size, args.eps, args.seed);
            let out = mwu_lottery(&inst, &inst.all_voters(), inst.k(), &params).map_err(Failure::solver)?;
            let c = args.c.unwrap_or(2.0 + args.eps);
            let report = verify_lottery(&inst, &out.lottery, c, args.l).map_err(Failure::solver)?;
            print_json(&LotteryOutput { mode: "lottery", lottery: &out.lottery, rounds: out.rounds, report: report.clone() })?;
            eprintln!("lottery with {} committees after {} rounds, worst ratio {}", out.lottery.len(), out.rounds, report.worst_ratio);
            Ok(stability_code(&report))
        }
        Mode::Committee => {
            let params = RoundingParams { alpha: args.alpha, beta: args.beta, epsilon: args.eps, seed: args.seed };
            params.validate().map_err(Failure::input)?;
            let mut provider = MwuProvider::new(MwuParams::new(size, args.eps, args.seed));
            let (committee, trace) = iterated_rounding(&inst, &params, &mut provider).map_err(Failure::solver)?;
            if let Some(path) = &args.trace {
                emit(Some(path), &trace.to_jsonl())?;
            }
            let c = args.c.unwrap_or(trace.theoretical_bound);
            let report = verify_committee(&inst, &committee, c, args.l).map_err(Failure::solver)?;
            let weight = committee_weight(&inst, &committee).map_err(Failure::solver)?;
            print_json(&CommitteeOutput {
                mode: "committee",
                committee: &committee,
                weight,
                theoretical_bound: trace.theoretical_bound,
                guaranteed_bound: trace.guaranteed_bound(),
                report: report.clone(),
            })?;
            eprintln!(
                "committee {committee} (weight {weight}) after {} rounds, worst ratio {}",
                trace.rounds.len(),
                report.worst_ratio
            );
            Ok(stability_code(&report))
        }
        Mode::ExactGame => {
            let c = args.c.unwrap_or(2.0);
            let game = exact_game(&inst, inst.k(), c, EnumerationBound::AllCommittees, args.l).map_err(Failure::solver)?;
            let report = verify_lottery(&inst, &game.defender_lottery, c, args.l).map_err(Failure::solver)?;
            print_json(&GameOutput { mode: "exact-game", game: &game, report: report.clone() })?;
            eprintln!(
                "game value {} (lower bound {}), {} at c = {c}",
                game.value,
                game.lower_bound,
                if game.value < 0.0 { "a stable lottery exists" } else { "no stable lottery" }
            );
            Ok(if game.value < 0.0 { 0 } else { EXIT_UNSTABLE })
        }
    }
}

fn bench(args: BenchArgs) -> Outcome {
    let (rows, ok) = match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            run_suite(args.suite, args.seeds, io::BufWriter::new(file))
        }
        None => run_suite(args.suite, args.seeds, io::stdout().lock()),
    }
    .map_err(Failure::solver)?;
    eprintln!("{}: {ok} of {rows} rows within bound", args.suite);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Verify(a) => verify(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
