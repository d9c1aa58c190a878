//! Command-line front end for the `ratcomp` solvers.

mod render;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ratcomp_core::io::{
    game_to_json, parse_manifest, random_spec_from_json, read_game_file, schemas,
    sequence_from_json,
};
use ratcomp_core::rational::parse_rational;
use ratcomp_core::repeated::{verify_folk_theorem, FolkInput, RealizationMode};
use ratcomp_core::trading::{
    competitive_trading_strategy, rational_trading_strategy, simulate, single_agent_audit,
    verify_trading, AnnouncementSequence, TradingRule, TradingSpec, TradingStrategy,
};
use ratcomp_core::{
    iterated_rational_restriction, iterated_rational_sets, make_bidding_game, minimax_regret,
    verify_claims, BiddingSpec, Error, Game, OpponentRestriction, Rational, RestrictionKind,
};

pub use render::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIVERGENCE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SIZE_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ratcomp",
    version,
    about = "Competitive and rationally competitive strategies for finite games"
)]
struct Cli {
    /// Print the JSON schemas of every input format and exit.
    #[arg(long, global = true)]
    schema: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Rational,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TwoMode {
    Full,
    Rational,
}

impl From<TwoMode> for RestrictionKind {
    fn from(m: TwoMode) -> Self {
        match m {
            TwoMode::Full => RestrictionKind::Full,
            TwoMode::Rational => RestrictionKind::Rational,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimax-regret reports for a game file.
    Solve(SolveArgs),
    /// Rational (non-weakly-dominated) strategy sets of a game file.
    Dominance(DominanceArgs),
    /// Build a k-price bidding game, solve it and check the closed forms.
    Bidding(BiddingArgs),
    /// Folk-strategy verification on a game sequence or random-game pool.
    Repeated(RepeatedArgs),
    /// Two-agent one-way trading: strategies, simulation and oracle.
    Trading(TradingArgs),
    /// Batch closed-form verification over a manifest of bidding specs.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    game: PathBuf,
    /// Only report this player.
    #[arg(long)]
    player: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    /// Rounds of iterated dominance behind the rational restriction.
    #[arg(long, default_value_t = 1)]
    rounds: usize,
}

#[derive(Debug, Args)]
struct DominanceArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
}

#[derive(Debug, Args)]
struct BiddingArgs {
    /// Valuations, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    l: Vec<i64>,
    #[arg(long = "T")]
    t: i64,
    #[arg(long)]
    k: usize,
    /// Compare the closed forms with the solver.
    #[arg(long)]
    verify: bool,
    /// Exit 1 when a closed form disagrees with the solver.
    #[arg(long)]
    strict: bool,
    /// Also write the generated game file.
    #[arg(long)]
    emit_game: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["sequence", "random"]))]
struct RepeatedArgs {
    /// `{"stages": [...]}` file.
    #[arg(long)]
    sequence: Option<PathBuf>,
    /// `{"pool": [...], "length": n, ...}` file.
    #[arg(long)]
    random: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TwoMode::Rational)]
    mode: TwoMode,
    /// Overrides the seed of a random spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the sample count of a random spec.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    realization: Option<Realization>,
    /// Exit 1 when a folk strategy fails a subgame.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Realization {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
struct TradingArgs {
    #[arg(long)]
    m1: i64,
    #[arg(long = "M1")]
    big_m1: i64,
    #[arg(long)]
    m2: i64,
    #[arg(long = "M2")]
    big_m2: i64,
    #[arg(long)]
    t: usize,
    #[arg(long = "K", default_value_t = 1)]
    k: i64,
    #[arg(long, default_value = "1", value_parser = rational_arg)]
    grid_step: Rational,
    #[arg(long, value_enum, default_value_t = TwoMode::Full)]
    mode: TwoMode,
    /// Run the brute-force oracle for both agents.
    #[arg(long)]
    oracle: bool,
    /// Agent 1 announcements for a simulation, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = rational_arg, requires = "a2")]
    a1: Vec<Rational>,
    /// Agent 2 announcements for a simulation, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = rational_arg, requires = "a1")]
    a2: Vec<Rational>,
    /// Replace the threshold of both agents in full mode.
    #[arg(long, value_parser = rational_arg)]
    threshold: Option<Rational>,
    /// Also audit the single-agent threshold on [m1, M1].
    #[arg(long)]
    audit: bool,
    /// Exit 1 when the oracle finds a strategy non-optimal.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    strict: bool,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Failure of a command, already mapped to its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeCap { .. } => EXIT_SIZE_CAP,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

/// A rendered report plus the exit code it implies.
struct Report {
    body: String,
    code: i32,
}

impl Report {
    fn ok(body: String) -> Self {
        Report {
            body,
            code: EXIT_OK,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_INVALID
                }
            };
        }
    };
    if cli.schema {
        return emit(&cli, out, err, Report::ok(pretty(&schemas())));
    }
    let Some(command) = &cli.command else {
        let _ = writeln!(
            err,
            "error: a subcommand is required\n\nUsage: ratcomp [OPTIONS] <COMMAND>"
        );
        return EXIT_INVALID;
    };
    let result = match command {
        Command::Solve(a) => solve(a, cli.format),
        Command::Dominance(a) => dominance(a, cli.format),
        Command::Bidding(a) => bidding(a, cli.format),
        Command::Repeated(a) => repeated(a, cli.format),
        Command::Trading(a) => trading(a, cli.format),
        Command::Verify(a) => verify(a, cli.format),
    };
    match result {
        Ok(report) => emit(&cli, out, err, report),
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write, report: Report) -> i32 {
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &report.body)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out
            .write_all(report.body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => report.code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn restriction(
    game: &Game,
    kind: RestrictionKind,
    rounds: usize,
) -> Result<OpponentRestriction, Failure> {
    Ok(match kind {
        RestrictionKind::Rational => iterated_rational_restriction(game, rounds)?,
        _ => OpponentRestriction::full(game),
    })
}

fn solve(a: &SolveArgs, format: Format) -> Result<Report, Failure> {
    let game = read_game_file(&a.game)?;
    let players: Vec<usize> = match a.player {
        Some(p) => {
            game.check_player(p)?;
            vec![p]
        }
        None => (0..game.player_count()).collect(),
    };
    let kinds = match a.mode {
        Mode::Full => vec![RestrictionKind::Full],
        Mode::Rational => vec![RestrictionKind::Rational],
        Mode::Both => vec![RestrictionKind::Full, RestrictionKind::Rational],
    };
    let mut reports = Vec::new();
    for kind in kinds {
        let r = restriction(&game, kind, a.rounds)?;
        for &p in &players {
            reports.push(minimax_regret(&game, p, &r)?);
        }
    }
    let input = json!({
        "game": game_to_json(&game)?,
        "player": a.player,
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "rounds": a.rounds,
    });
    Ok(Report::ok(render::regret_reports(
        &game, input, &reports, format,
    )))
}

fn dominance(a: &DominanceArgs, format: Format) -> Result<Report, Failure> {
    let game = read_game_file(&a.game)?;
    let sets = iterated_rational_sets(&game, a.rounds)?;
    let input = json!({"game": game_to_json(&game)?, "rounds": a.rounds});
    Ok(Report::ok(render::rational_sets(
        &game, input, &sets, format,
    )))
}

fn bidding(a: &BiddingArgs, format: Format) -> Result<Report, Failure> {
    let spec = BiddingSpec::new(a.l.clone(), a.t, a.k)?;
    let game = make_bidding_game(&spec)?;
    if let Some(path) = &a.emit_game {
        std::fs::write(path, pretty(&game_to_json(&game)?))
            .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    let full = OpponentRestriction::full(&game);
    let rat = iterated_rational_restriction(&game, 1)?;
    let mut reports = Vec::new();
    for r in [&full, &rat] {
        for p in 0..spec.players() {
            reports.push(minimax_regret(&game, p, r)?);
        }
    }
    let claims = if a.verify || a.strict {
        Some(verify_claims(&spec)?)
    } else {
        None
    };
    let code = match &claims {
        Some(c) if a.strict && !c.all_match() => EXIT_DIVERGENCE,
        _ => EXIT_OK,
    };
    Ok(Report {
        body: render::bidding(&spec, &game, &reports, claims.as_ref(), format),
        code,
    })
}

fn repeated(a: &RepeatedArgs, format: Format) -> Result<Report, Failure> {
    let (input, spec_json) = match (&a.sequence, &a.random) {
        (Some(path), None) => {
            let v = read_json(path)?;
            let seq = sequence_from_json(&v, path.parent())?;
            (FolkInput::Sequence(seq), json!({"sequence": v}))
        }
        (None, Some(path)) => {
            let v = read_json(path)?;
            let mut with_overrides = v.clone();
            if let Some(obj) = with_overrides.as_object_mut() {
                if let Some(m) = a.realization {
                    let mode = match m {
                        Realization::Exhaustive => RealizationMode::Exhaustive,
                        Realization::Sampled => RealizationMode::Sampled,
                    };
                    obj.insert("mode".into(), json!(mode));
                }
                if let Some(seed) = a.seed {
                    obj.insert("seed".into(), json!(seed));
                }
                if let Some(samples) = a.samples {
                    obj.insert("samples".into(), json!(samples));
                }
            }
            let spec = random_spec_from_json(&with_overrides, path.parent())?;
            let echo = json!({
                "random": v,
                "realization": spec.mode,
                "seed": spec.seed,
                "samples": spec.samples,
            });
            (FolkInput::Random(spec), echo)
        }
        _ => return Err(invalid("give exactly one of --sequence and --random")),
    };
    let report = verify_folk_theorem(&input, a.mode.into())?;
    let code = if a.strict && !report.all_passed() {
        EXIT_DIVERGENCE
    } else {
        EXIT_OK
    };
    Ok(Report {
        body: render::folk(spec_json, &report, format),
        code,
    })
}

fn trading(a: &TradingArgs, format: Format) -> Result<Report, Failure> {
    let spec = TradingSpec::new(a.m1, a.big_m1, a.m2, a.big_m2, a.t, a.k)?;
    let mode: RestrictionKind = a.mode.into();
    let strategies: Vec<TradingStrategy> = (0..2)
        .map(|p| -> Result<TradingStrategy, Failure> {
            let mut s = match mode {
                RestrictionKind::Rational => rational_trading_strategy(&spec, p)?,
                _ => competitive_trading_strategy(&spec, p)?,
            };
            if let (Some(th), RestrictionKind::Full) = (a.threshold, mode) {
                s.rule = TradingRule::Threshold { threshold: th };
            }
            Ok(s)
        })
        .collect::<Result<_, _>>()?;

    let simulation = if a.a1.is_empty() {
        None
    } else {
        if a.a1.len() != a.a2.len() {
            return Err(invalid("--a1 and --a2 need the same length"));
        }
        let ann = AnnouncementSequence(a.a1.iter().zip(&a.a2).map(|(x, y)| [*x, *y]).collect());
        Some(simulate(&spec, [&strategies[0], &strategies[1]], &ann)?)
    };
    let verdicts = if a.oracle {
        let mut v = Vec::new();
        for (p, strategy) in strategies.iter().enumerate() {
            let mut verdict = verify_trading(&spec, a.grid_step, p, mode)?;
            if a.threshold.is_some() && mode == RestrictionKind::Full {
                let r = ratcomp_core::trading::trading_oracle(
                    &spec,
                    a.grid_step,
                    p,
                    strategy,
                    mode,
                )?;
                verdict.strategy = strategy.describe();
                verdict.strategy_regret = r;
                verdict.optimal = r == verdict.minimal_regret;
            }
            v.push(verdict);
        }
        v
    } else {
        Vec::new()
    };
    let audit = if a.audit {
        Some(single_agent_audit(a.big_m1, a.m1, a.t)?)
    } else {
        None
    };
    let code = if a.strict && verdicts.iter().any(|v| !v.optimal) {
        EXIT_DIVERGENCE
    } else {
        EXIT_OK
    };
    let header = json!({
        "spec": spec,
        "mode": mode,
        "grid_step": ratcomp_core::rational::to_json(&a.grid_step),
        "strategies": strategies.iter().map(|s| json!({"player": s.player, "rule": s.describe()})).collect::<Vec<_>>(),
    });
    Ok(Report {
        body: render::trading(
            header,
            simulation.as_ref(),
            &verdicts,
            audit.as_ref(),
            format,
        ),
        code,
    })
}

fn verify(a: &VerifyArgs, format: Format) -> Result<Report, Failure> {
    let text = std::fs::read_to_string(&a.manifest)
        .map_err(|e| invalid(format!("cannot read {}: {e}", a.manifest.display())))?;
    let manifest = parse_manifest(&text)?;
    let reports = manifest
        .specs
        .iter()
        .map(verify_claims)
        .collect::<Result<Vec<_>, _>>()?;
    let code = if a.strict && reports.iter().any(|r| !r.all_match()) {
        EXIT_DIVERGENCE
    } else {
        EXIT_OK
    };
    Ok(Report {
        body: render::divergences(&manifest, &reports, format),
        code,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("ratcomp").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn unknown_flag_is_invalid_input() {
        let (code, out, err) = run_args(&["solve", "--bogus"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
    }

    #[test]
    fn schema_flag() {
        let (code, out, _) = run_args(&["--schema"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v.get("game").is_some());
    }

    #[test]
    fn violated_assumption_names_it() {
        let (code, _, err) = run_args(&["bidding", "--l", "6,4", "--T", "3", "--k", "1"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("T >= n") || err.contains("l_i < T"), "{err}");
    }

    #[test]
    fn size_cap_exit_code() {
        let (code, _, err) = run_args(&["bidding", "--l", "2,3,4,5,6", "--T", "99", "--k", "2"]);
        assert_eq!(code, EXIT_SIZE_CAP, "{err}");
    }
}
