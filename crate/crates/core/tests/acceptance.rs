//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.
//!
//! Known divergences between closed forms and the solver are pinned in
//! `tests/data/*.json`. Set `RATCOMP_BLESS=1` to regenerate them.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use ratcomp_core::rational::{int, ratio};
use ratcomp_core::repeated::{
    expand_sequence, folk_condition_holds, play_path, verify_folk_theorem, FolkInput, FolkReport,
    GameSequence, RandomGameSpec, RealizationMode, StrategySpace,
};
use ratcomp_core::trading::{single_agent_audit, verify_trading, TradingSpec};
use ratcomp_core::{
    all_player_reports, iterated_rational_sets, make_bidding_game, minimax_regret, rational_set,
    regret, verify_claims, weakly_dominates, AnalysisMode, BiddingSpec, Game, OpponentProfile,
    OpponentRestriction, Rational, RestrictionKind, StrategyProfile,
};

type Check = Result<String, String>;

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn blessing() -> bool {
    std::env::var_os("RATCOMP_BLESS").is_some_and(|v| v != "0")
}

/// Compares `computed` with the committed ledger `name`, or rewrites it when blessing.
fn against_ledger<T: Serialize>(name: &str, computed: &T) -> Result<(), String> {
    let value = serde_json::to_value(computed).map_err(|e| e.to_string())?;
    let path = data_path(name);
    if blessing() {
        let text = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())? + "\n";
        std::fs::write(&path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
        return Ok(());
    }
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let committed: Value = serde_json::from_str(&text).map_err(|e| format!("{name}: {e}"))?;
    if committed == value {
        Ok(())
    } else {
        Err(format!("computed divergences differ from ledger {name}"))
    }
}

fn random_bidding_spec(rng: &mut ChaCha8Rng, n: usize, k: usize, max_t: i64) -> BiddingSpec {
    let t = rng.gen_range(n as i64 + 2..=max_t);
    let mut pool: Vec<i64> = (2..t).collect();
    pool.shuffle(rng);
    BiddingSpec::new(pool[..n].to_vec(), t, k).expect("generated spec is valid")
}

fn random_game(
    rng: &mut ChaCha8Rng,
    players: usize,
    max_strategies: usize,
    lo: i64,
    hi: i64,
) -> Game {
    let counts: Vec<usize> = (0..players)
        .map(|_| rng.gen_range(1..=max_strategies))
        .collect();
    let cells = counts.iter().product::<usize>() * players;
    let payoffs = (0..cells).map(|_| int(rng.gen_range(lo..=hi))).collect();
    Game::from_flat(counts, payoffs).expect("consistent dimensions")
}

/// Distinct non-negative payoffs per player with highest >= 2 * second highest.
fn random_folk_stage(rng: &mut ChaCha8Rng) -> Game {
    let per_player: Vec<Vec<i64>> = (0..2)
        .map(|_| loop {
            let mut values: Vec<i64> = (0..=20).collect();
            values.shuffle(rng);
            let mut v = values[..4].to_vec();
            let cells = v.clone();
            v.sort_unstable();
            if v[3] >= 2 * v[2] {
                break cells;
            }
        })
        .collect();
    let cells = (0..4)
        .flat_map(|c| [int(per_player[0][c]), int(per_player[1][c])])
        .collect();
    Game::from_flat(vec![2, 2], cells).expect("2x2")
}

fn compatible(pool: &[Game]) -> bool {
    let seq = GameSequence::new(pool.to_vec()).expect("same player count");
    (0..2).all(|p| folk_condition_holds(&seq, p).unwrap_or(false))
}

#[derive(Serialize)]
struct BiddingDivergence {
    spec: BiddingSpec,
    mismatches: Vec<ratcomp_core::DivergenceEntry>,
}

fn bidding_divergences(specs: &[BiddingSpec]) -> Result<Vec<BiddingDivergence>, String> {
    let mut out = Vec::new();
    for spec in specs {
        let report = verify_claims(spec).map_err(|e| format!("{spec}: {e}"))?;
        let mismatches: Vec<_> = report.mismatches().cloned().collect();
        if !mismatches.is_empty() {
            out.push(BiddingDivergence {
                spec: spec.clone(),
                mismatches,
            });
        }
    }
    Ok(out)
}

fn second_price() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for _ in 0..25 {
        let n = rng.gen_range(2..=3);
        let spec = random_bidding_spec(&mut rng, n, 2, 15);
        let game = make_bidding_game(&spec).map_err(|e| e.to_string())?;
        for mode in [RestrictionKind::Full, RestrictionKind::Rational] {
            let reports = all_player_reports(&game, mode).map_err(|e| e.to_string())?;
            for (p, r) in reports.iter().enumerate() {
                if r.minimax_value != int(0) {
                    return Err(format!(
                        "{spec}: player {p} {mode:?} minimax {}",
                        r.minimax_value
                    ));
                }
                if !r.contains(spec.l[p] as usize) {
                    return Err(format!(
                        "{spec}: player {p} {mode:?} truthful bid outside argmin"
                    ));
                }
            }
        }
        let report = verify_claims(&spec).map_err(|e| e.to_string())?;
        if !report.all_match() {
            return Err(format!(
                "{spec}: closed form mismatch\n{}",
                report.to_table()
            ));
        }
    }
    Ok("25 specs, minimax 0 and truthful bid in every argmin".into())
}

fn first_price() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let specs: Vec<BiddingSpec> = (0..20)
        .map(|_| {
            let n = rng.gen_range(2..=3);
            random_bidding_spec(&mut rng, n, 1, 15)
        })
        .collect();
    let div = bidding_divergences(&specs)?;
    against_ledger("first_price_divergences.json", &div)?;
    let count: usize = div.iter().map(|d| d.mismatches.len()).sum();
    Ok(format!(
        "20 specs, {count} mismatches across {} specs, all pinned in ledger",
        div.len()
    ))
}

fn third_price() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let specs: Vec<BiddingSpec> = (0..15)
        .map(|_| random_bidding_spec(&mut rng, 3, 3, 12))
        .collect();
    for spec in &specs {
        let report = verify_claims(spec).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by_key(|&p| std::cmp::Reverse(spec.l[p]));
        let low = order[2];
        let entry = report
            .entries
            .iter()
            .find(|e| e.player == low && e.mode == AnalysisMode::Rational)
            .expect("entry per player and mode");
        if entry.oracle_minimax != int(0) {
            return Err(format!(
                "{spec}: low player {low} rational regret {}",
                entry.oracle_minimax
            ));
        }
    }
    let div = bidding_divergences(&specs)?;
    against_ledger("third_price_divergences.json", &div)?;
    let count: usize = div.iter().map(|d| d.mismatches.len()).sum();
    Ok(format!(
        "15 specs, low bidders at regret 0, {count} mismatches pinned in ledger"
    ))
}

#[derive(Serialize)]
struct RatDivergence {
    spec: BiddingSpec,
    player: usize,
    expected: Vec<usize>,
    actual: Vec<usize>,
}

fn dominance_structure() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut div = Vec::new();
    for _ in 0..20 {
        let n = rng.gen_range(2..=3);
        let spec = random_bidding_spec(&mut rng, n, 1, 15);
        let game = make_bidding_game(&spec).map_err(|e| e.to_string())?;
        for p in 0..n {
            let actual = rational_set(&game, p).map_err(|e| e.to_string())?.allowed;
            let expected: Vec<usize> = (1..spec.l[p] as usize).collect();
            if actual != expected {
                div.push(RatDivergence {
                    spec: spec.clone(),
                    player: p,
                    expected,
                    actual,
                });
            }
        }
    }
    against_ledger("dominance_divergences.json", &div)?;
    Ok(format!(
        "20 specs, {} set mismatches pinned in ledger",
        div.len()
    ))
}

fn subset_monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    for i in 0..100 {
        let players = rng.gen_range(2..=3);
        let game = random_game(&mut rng, players, 5, -10, 10);
        let full = all_player_reports(&game, RestrictionKind::Full).map_err(|e| e.to_string())?;
        let rat =
            all_player_reports(&game, RestrictionKind::Rational).map_err(|e| e.to_string())?;
        for (f, r) in full.iter().zip(&rat) {
            if r.minimax_value > f.minimax_value {
                return Err(format!(
                    "game {i} player {}: rational {} > full {}",
                    f.player, r.minimax_value, f.minimax_value
                ));
            }
        }
    }
    Ok("100 games, rational minimax <= full minimax for every player".into())
}

fn folk_failures(label: &str, report: &FolkReport, failed: &mut Vec<String>) {
    for e in report.entries.iter().filter(|e| !e.passed) {
        let f = &e.failures[0];
        failed.push(format!(
            "{label} realization {:?} player {}: subgame at {} history {} regret {} > {}",
            e.realization, e.player, f.start, f.history, f.continuation_regret, f.minimax_regret
        ));
    }
}

fn folk_theorem() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let stages: Vec<Game> = (0..10).map(|_| random_folk_stage(&mut rng)).collect();
    let run = |input: FolkInput| {
        verify_folk_theorem(&input, RestrictionKind::Rational).map_err(|e| e.to_string())
    };
    let mut failed = Vec::new();
    let mut checked = 0;
    for (i, g) in stages.iter().enumerate() {
        let seq = GameSequence::repeated(g, 2).map_err(|e| e.to_string())?;
        let report = run(FolkInput::Sequence(seq))?;
        checked += report.entries.len();
        folk_failures(&format!("stage {i} x2"), &report, &mut failed);
    }
    let seq = GameSequence::repeated(&stages[0], 3).map_err(|e| e.to_string())?;
    let report = run(FolkInput::Sequence(seq))?;
    checked += report.entries.len();
    folk_failures("stage 0 x3", &report, &mut failed);

    let pair = loop {
        let pair = vec![random_folk_stage(&mut rng), random_folk_stage(&mut rng)];
        if compatible(&pair) {
            break pair;
        }
    };
    let report = run(FolkInput::Sequence(
        GameSequence::new(pair.clone()).map_err(|e| e.to_string())?,
    ))?;
    checked += report.entries.len();
    folk_failures("mixed", &report, &mut failed);

    let spec = RandomGameSpec {
        pool: pair,
        length: 2,
        mode: RealizationMode::Exhaustive,
        seed: None,
        samples: 1,
    };
    let report = run(FolkInput::Random(spec))?;
    checked += report.entries.len();
    folk_failures("random pool", &report, &mut failed);

    if failed.is_empty() {
        Ok(format!("{checked} (realization, player) checks passed"))
    } else {
        Err(format!(
            "{} of {checked} checks failed:\n    {}",
            failed.len(),
            failed.join("\n    ")
        ))
    }
}

#[derive(Serialize)]
struct TradingDivergence {
    spec: TradingSpec,
    verdict: ratcomp_core::trading::OracleVerdict,
}

fn trading_thresholds() -> Check {
    let mut div = Vec::new();
    let mut checked = 0;
    for m1 in 1..=2 {
        for big_m1 in 4..=6 {
            for m2 in 1..=2 {
                for big_m2 in 4..=6 {
                    let spec = TradingSpec::new(m1, big_m1, m2, big_m2, 3, 1)
                        .map_err(|e| e.to_string())?;
                    for player in 0..2 {
                        for mode in [RestrictionKind::Full, RestrictionKind::Rational] {
                            let verdict = verify_trading(&spec, int(1), player, mode)
                                .map_err(|e| e.to_string())?;
                            checked += 1;
                            if !verdict.optimal {
                                div.push(TradingDivergence {
                                    spec,
                                    verdict,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    against_ledger("trading_divergences.json", &div)?;
    let full = div
        .iter()
        .filter(|d| d.verdict.mode == RestrictionKind::Full)
        .count();
    Ok(format!(
        "{checked} (spec, player, mode) checks, {} non-optimal ({full} full, {} rational) pinned in ledger",
        div.len(),
        div.len() - full
    ))
}

fn single_agent() -> Check {
    let a = single_agent_audit(10, 2, 3).map_err(|e| e.to_string())?;
    let b = single_agent_audit(10, 2, 3).map_err(|e| e.to_string())?;
    if a != b {
        return Err("audit is not deterministic".into());
    }
    if a.stated_threshold != int(4) {
        return Err(format!("stated threshold {} != 4", a.stated_threshold));
    }
    against_ledger("single_agent_audit.json", &a)?;
    Ok(a.verdict)
}

fn properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let instances = 100;
    for i in 0..instances {
        let players = rng.gen_range(2..=3);
        let game = random_game(&mut rng, players, 4, -6, 6);
        let profile = StrategyProfile(
            game.strategy_counts()
                .iter()
                .map(|&c| rng.gen_range(0..c))
                .collect(),
        );
        for p in 0..players {
            let r = regret(&game, p, &profile).map_err(|e| e.to_string())?;
            if r < int(0) {
                return Err(format!("instance {i}: negative regret {r}"));
            }
            let q = OpponentProfile::of(&profile, p);
            let best = game.best_response_value(p, &q).map_err(|e| e.to_string())?;
            let t = (0..game.strategy_count(p))
                .find(|&t| game.payoff(&q.combine(t), p).unwrap() == best)
                .expect("a best response exists");
            if regret(&game, p, &q.combine(t)).map_err(|e| e.to_string())? != int(0) {
                return Err(format!("instance {i}: best response with non-zero regret"));
            }

            let scale = ratio(rng.gen_range(1..=9), rng.gen_range(1..=4));
            let shift = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            let moved = game
                .affine_transform(p, scale, shift)
                .map_err(|e| e.to_string())?;
            let before = minimax_regret(&game, p, &OpponentRestriction::full(&game))
                .map_err(|e| e.to_string())?;
            let after = minimax_regret(&moved, p, &OpponentRestriction::full(&moved))
                .map_err(|e| e.to_string())?;
            if before.argmin_set != after.argmin_set
                || after.minimax_value != before.minimax_value * scale
            {
                return Err(format!("instance {i}: affine transform changed the argmin"));
            }

            let k = game.strategy_count(p);
            for s in 0..k {
                if weakly_dominates(&game, p, s, s).map_err(|e| e.to_string())? {
                    return Err(format!("instance {i}: strategy {s} dominates itself"));
                }
                for s2 in 0..k {
                    let a = weakly_dominates(&game, p, s, s2).map_err(|e| e.to_string())?;
                    let b = weakly_dominates(&game, p, s2, s).map_err(|e| e.to_string())?;
                    if a && b {
                        return Err(format!("instance {i}: mutual dominance {s} <-> {s2}"));
                    }
                }
            }
            if rational_set(&game, p)
                .map_err(|e| e.to_string())?
                .allowed
                .is_empty()
            {
                return Err(format!("instance {i}: empty rational set"));
            }
        }
        for set in iterated_rational_sets(&game, 3).map_err(|e| e.to_string())? {
            if set.allowed.is_empty() {
                return Err(format!("instance {i}: iterated rational set empty"));
            }
        }
    }

    for i in 0..instances {
        let stages: Vec<Game> = (0..rng.gen_range(2..=3))
            .map(|_| {
                let counts = vec![rng.gen_range(1..=2), rng.gen_range(1..=2)];
                let cells = (0..counts[0] * counts[1] * 2)
                    .map(|_| int(rng.gen_range(-5..=5)))
                    .collect();
                Game::from_flat(counts, cells).unwrap()
            })
            .collect();
        let seq = GameSequence::new(stages).map_err(|e| e.to_string())?;
        let expanded = expand_sequence(&seq).map_err(|e| e.to_string())?;
        let spaces: Vec<StrategySpace> = (0..2)
            .map(|p| StrategySpace::new(&seq, p).unwrap())
            .collect();
        let choice: Vec<usize> = spaces
            .iter()
            .map(|s| rng.gen_range(0..s.count() as usize))
            .collect();
        let strategies: Vec<_> = spaces
            .iter()
            .zip(&choice)
            .map(|(s, &c)| s.decode(c).unwrap())
            .collect();
        let path = play_path(&seq, &spaces, &strategies);
        for p in 0..2 {
            let sum: Rational = seq
                .stages()
                .iter()
                .zip(&path)
                .map(|(g, prof)| g.payoff_at(prof, p))
                .sum();
            if expanded.payoff_at(&choice, p) != sum {
                return Err(format!(
                    "instance {i}: expanded payoff is not the stage sum"
                ));
            }
        }
    }
    Ok(format!(
        "{instances} instances each: regret >= 0, best responses at 0, affine invariance, dominance \
         irreflexive and antisymmetric, Rat nonempty, expanded payoffs additive"
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "second-price zero regret",
            budget: Some(Duration::from_secs(5)),
            run: second_price,
        },
        Criterion {
            id: 2,
            name: "first-price closed forms",
            budget: Some(Duration::from_secs(10)),
            run: first_price,
        },
        Criterion {
            id: 3,
            name: "third-price closed forms",
            budget: Some(Duration::from_secs(20)),
            run: third_price,
        },
        Criterion {
            id: 4,
            name: "first-price dominance structure",
            budget: None,
            run: dominance_structure,
        },
        Criterion {
            id: 5,
            name: "subset monotonicity",
            budget: Some(Duration::from_secs(5)),
            run: subset_monotonicity,
        },
        Criterion {
            id: 6,
            name: "folk strategy subgame competitiveness",
            budget: Some(Duration::from_secs(60)),
            run: folk_theorem,
        },
        Criterion {
            id: 7,
            name: "trading thresholds",
            budget: Some(Duration::from_secs(120)),
            run: trading_thresholds,
        },
        Criterion {
            id: 8,
            name: "single-agent threshold audit",
            budget: None,
            run: single_agent,
        },
        Criterion {
            id: 9,
            name: "property suites",
            budget: None,
            run: properties,
        },
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for c in &criteria {
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| c.name.contains(f.as_str()) || c.id.to_string() == *f)
        {
            continue;
        }
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("took {elapsed:.2?}, budget {budget:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!(
                "criterion {}: PASS  {} ({elapsed:.2?}) {detail}",
                c.id, c.name
            ),
            Err(detail) => {
                failures += 1;
                println!(
                    "criterion {}: FAIL  {} ({elapsed:.2?}) {detail}",
                    c.id, c.name
                );
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
