//! Repeated games, fixed game sequences and random-game realizations.
//!
//! A history strategy picks a stage strategy at every iteration as a
//! function of the *other* players' past stage choices only. Expanding a
//! sequence yields an ordinary normal-form [`Game`] whose strategies are
//! history strategies, so the regret solver and dominance module apply to
//! it unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dominance::rational_restriction;
use crate::error::{Error, Result};
use crate::game::{Game, DEFAULT_DENSE_CAP};
use crate::rational::{common_denominator, scaled, unscale, Rational};
use crate::regret::{minimax_regret, OpponentRestriction, RegretReport, RestrictionKind};

/// Cap on the number of random-game realizations enumerated exhaustively.
pub const DEFAULT_REALIZATION_CAP: u128 = 100_000;

/// Stage games played in order over a common player set.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSequence {
    stages: Vec<Game>,
}

impl GameSequence {
    pub fn new(stages: Vec<Game>) -> Result<Self> {
        let first = stages
            .first()
            .ok_or_else(|| Error::invalid("a game sequence needs at least one stage"))?;
        let n = first.player_count();
        if let Some(i) = stages.iter().position(|g| g.player_count() != n) {
            return Err(Error::invalid(format!(
                "stage {i} has {} players, stage 0 has {n}",
                stages[i].player_count()
            )));
        }
        Ok(GameSequence { stages })
    }

    /// `game` played `times` times.
    pub fn repeated(game: &Game, times: usize) -> Result<Self> {
        Self::new(vec![game.clone(); times])
    }

    pub fn stages(&self) -> &[Game] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn player_count(&self) -> usize {
        self.stages[0].player_count()
    }

    /// The suffix starting at 0-based iteration `start`.
    pub fn suffix(&self, start: usize) -> GameSequence {
        GameSequence {
            stages: self.stages[start..].to_vec(),
        }
    }
}

/// Stage strategy per iteration and opponent history.
///
/// `decisions[it][h]` is the stage strategy at iteration `it` after
/// opponent history `h`. Histories are numbered lexicographically: earlier
/// iterations are more significant, and within an iteration the other
/// players appear in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HistoryStrategy {
    pub player: usize,
    pub decisions: Vec<Vec<usize>>,
}

impl HistoryStrategy {
    /// True when every iteration's decision ignores the history.
    pub fn is_history_independent(&self) -> bool {
        self.decisions
            .iter()
            .all(|d| d.windows(2).all(|w| w[0] == w[1]))
    }
}

/// Index arithmetic for one player's history strategies in a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySpace {
    player: usize,
    /// Own stage strategy count per iteration.
    own: Vec<usize>,
    /// Number of opponent histories reaching each iteration.
    histories: Vec<u128>,
    /// Per iteration, the radices of the other players' choices.
    opp_radices: Vec<Vec<usize>>,
    count: u128,
}

impl StrategySpace {
    pub fn new(seq: &GameSequence, player: usize) -> Result<Self> {
        seq.stages[0].check_player(player)?;
        let mut histories = Vec::with_capacity(seq.len());
        let mut opp_radices = Vec::with_capacity(seq.len());
        let mut own = Vec::with_capacity(seq.len());
        let mut h: u128 = 1;
        let mut count: u128 = 1;
        for g in &seq.stages {
            histories.push(h);
            own.push(g.strategy_count(player));
            let radices: Vec<usize> = (0..g.player_count())
                .filter(|&p| p != player)
                .map(|p| g.strategy_count(p))
                .collect();
            count = pow_sat(g.strategy_count(player) as u128, h).saturating_mul(count);
            h = radices
                .iter()
                .fold(h, |acc, &r| acc.saturating_mul(r as u128));
            opp_radices.push(radices);
        }
        Ok(StrategySpace {
            player,
            own,
            histories,
            opp_radices,
            count,
        })
    }

    /// Number of history strategies (saturating).
    pub fn count(&self) -> u128 {
        self.count
    }

    /// Opponent histories reaching 0-based iteration `it`.
    pub fn histories_at(&self, it: usize) -> u128 {
        self.histories[it]
    }

    /// History index of the realized path `path[..it]` from this player's view.
    pub fn history_index(&self, path: &[Vec<usize>]) -> usize {
        let mut h = 0usize;
        for (j, prof) in path.iter().enumerate() {
            let mut slot = 0;
            for (p, &c) in prof.iter().enumerate() {
                if p == self.player {
                    continue;
                }
                h = h * self.opp_radices[j][slot] + c;
                slot += 1;
            }
        }
        h
    }

    fn check_small(&self) -> Result<()> {
        if self.count > DEFAULT_DENSE_CAP {
            return Err(Error::size_cap(
                format!("history strategies of player {}", self.player),
                self.count,
                DEFAULT_DENSE_CAP,
            ));
        }
        Ok(())
    }

    /// Expanded-game strategy index of `s` (first decision most significant).
    pub fn encode(&self, s: &HistoryStrategy) -> Result<usize> {
        self.check_small()?;
        if s.player != self.player || s.decisions.len() != self.own.len() {
            return Err(Error::invalid(
                "history strategy does not fit this sequence",
            ));
        }
        let mut idx = 0usize;
        for (it, d) in s.decisions.iter().enumerate() {
            if d.len() as u128 != self.histories[it] {
                return Err(Error::invalid(format!(
                    "iteration {it} needs {} decisions, found {}",
                    self.histories[it],
                    d.len()
                )));
            }
            for &c in d {
                if c >= self.own[it] {
                    return Err(Error::invalid(format!(
                        "stage strategy {c} invalid at iteration {it}"
                    )));
                }
                idx = idx * self.own[it] + c;
            }
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Result<HistoryStrategy> {
        self.check_small()?;
        if idx as u128 >= self.count {
            return Err(Error::invalid(format!("strategy index {idx} out of range")));
        }
        let mut decisions: Vec<Vec<usize>> = self
            .histories
            .iter()
            .map(|&h| vec![0; h as usize])
            .collect();
        for it in (0..self.own.len()).rev() {
            for slot in decisions[it].iter_mut().rev() {
                *slot = idx % self.own[it];
                idx /= self.own[it];
            }
        }
        Ok(HistoryStrategy {
            player: self.player,
            decisions,
        })
    }

    /// The strategy induced on the suffix starting at `start` after the
    /// opponent history with index `prefix` (a history of length `start`).
    pub fn continuation(
        &self,
        s: &HistoryStrategy,
        start: usize,
        prefix: usize,
    ) -> HistoryStrategy {
        let base = self.histories[start] as usize;
        let decisions = (start..self.own.len())
            .map(|it| {
                let width = self.histories[it] as usize / base;
                s.decisions[it][prefix * width..(prefix + 1) * width].to_vec()
            })
            .collect();
        HistoryStrategy {
            player: s.player,
            decisions,
        }
    }
}

fn pow_sat(base: u128, exp: u128) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX || base <= 1 {
            break;
        }
    }
    if base == 0 && exp > 0 {
        0
    } else {
        acc
    }
}

/// Stage profiles realized when everyone follows their history strategy.
pub fn play_path(
    seq: &GameSequence,
    spaces: &[StrategySpace],
    strategies: &[HistoryStrategy],
) -> Vec<Vec<usize>> {
    let n = seq.player_count();
    let mut path: Vec<Vec<usize>> = Vec::with_capacity(seq.len());
    for it in 0..seq.len() {
        let prof = (0..n)
            .map(|p| strategies[p].decisions[it][spaces[p].history_index(&path)])
            .collect();
        path.push(prof);
    }
    path
}

/// Normal-form game over history strategies; payoffs are summed along the
/// induced play path.
pub fn expand_sequence(seq: &GameSequence) -> Result<Game> {
    let n = seq.player_count();
    let spaces: Vec<StrategySpace> = (0..n)
        .map(|p| StrategySpace::new(seq, p))
        .collect::<Result<_>>()?;
    let total = spaces
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.count()));
    if total > DEFAULT_DENSE_CAP {
        let per_player: Vec<String> = spaces.iter().map(|s| s.count().to_string()).collect();
        return Err(Error::size_cap(
            format!(
                "expanded sequence profiles (strategies per player: {})",
                per_player.join(" x ")
            ),
            total,
            DEFAULT_DENSE_CAP,
        ));
    }
    let decoded: Vec<Vec<HistoryStrategy>> = spaces
        .iter()
        .map(|sp| (0..sp.count() as usize).map(|i| sp.decode(i)).collect())
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = spaces.iter().map(|s| s.count() as usize).collect();

    // Stage payoffs over a common denominator keep the accumulation in integers.
    let stage_vals: Vec<Vec<Rational>> = seq
        .stages
        .iter()
        .map(|g| {
            g.profiles()
                .flat_map(|prof| {
                    (0..n)
                        .map(move |p| g.payoff_at(&prof, p))
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let den = common_denominator(stage_vals.iter().flatten())?;

    let probe = Game::from_flat(
        counts.clone(),
        vec![Rational::from_integer(0); total as usize * n],
    )?;
    let mut cells = Vec::with_capacity(total as usize * n);
    let mut chosen = Vec::with_capacity(n);
    for prof in probe.profiles() {
        chosen.clear();
        chosen.extend(prof.iter().enumerate().map(|(p, &i)| decoded[p][i].clone()));
        let path = play_path(seq, &spaces, &chosen);
        let mut sums = vec![0i128; n];
        for (g, stage_prof) in seq.stages.iter().zip(&path) {
            for (p, s) in sums.iter_mut().enumerate() {
                *s += scaled(&g.payoff_at(stage_prof, p), den);
            }
        }
        for s in sums {
            cells.push(unscale(s, den)?);
        }
    }
    Game::from_flat(counts, cells)
}

/// Every suffix of the sequence, longest first.
pub fn subgames(seq: &GameSequence) -> Vec<GameSequence> {
    (0..seq.len()).map(|q| seq.suffix(q)).collect()
}

/// Highest and second-highest distinct payoff of one player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffExtremes {
    pub player: usize,
    #[serde(with = "crate::rational::as_string")]
    pub highest: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub second_highest: Rational,
}

pub fn payoff_extremes(game: &Game, player: usize) -> Result<PayoffExtremes> {
    game.check_player(player)?;
    let mut vals = game.payoffs_of(player);
    vals.sort_unstable_by(|a, b| b.cmp(a));
    vals.dedup();
    if vals.len() < 2 {
        return Err(Error::Assumption(format!(
            "player {player} has a single payoff value; highest and second-highest are undefined"
        )));
    }
    Ok(PayoffExtremes {
        player,
        highest: vals[0],
        second_highest: vals[1],
    })
}

/// Rejects stage games with negative or repeated payoffs for some player.
pub fn check_stage_assumptions(game: &Game) -> Result<()> {
    for p in 0..game.player_count() {
        let mut vals = game.payoffs_of(p);
        if let Some(v) = vals.iter().find(|v| **v < Rational::from_integer(0)) {
            return Err(Error::Assumption(format!(
                "player {p} has negative payoff {v}"
            )));
        }
        vals.sort_unstable();
        if let Some(w) = vals.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Assumption(format!(
                "player {p} has repeated payoff {}; payoffs must be distinct",
                w[0]
            )));
        }
    }
    Ok(())
}

/// `h_i(G_k) >= 2 sh_i(G_l)` for all stage pairs `(k, l)`.
pub fn folk_condition_holds(seq: &GameSequence, player: usize) -> Result<bool> {
    Ok(condition_violation(seq.stages(), player)?.is_none())
}

/// First violating `(k, l)` pair for `player` over `pool`, if any.
fn condition_violation(pool: &[Game], player: usize) -> Result<Option<(usize, usize)>> {
    let ext: Vec<PayoffExtremes> = pool
        .iter()
        .map(|g| payoff_extremes(g, player))
        .collect::<Result<_>>()?;
    for (k, ek) in ext.iter().enumerate() {
        for (l, el) in ext.iter().enumerate() {
            if ek.highest < el.second_highest * Rational::from_integer(2) {
                return Ok(Some((k, l)));
            }
        }
    }
    Ok(None)
}

fn require_condition(pool: &[Game]) -> Result<()> {
    for g in pool {
        check_stage_assumptions(g)?;
    }
    for p in 0..pool[0].player_count() {
        if let Some((k, l)) = condition_violation(pool, p)? {
            return Err(Error::Assumption(format!(
                "h_i(G_k) >= 2 sh_i(G_l) fails for k={k}, l={l}, player {p}"
            )));
        }
    }
    Ok(())
}

fn stage_reports(game: &Game, player: usize) -> Result<(RegretReport, RegretReport)> {
    let full = minimax_regret(game, player, &OpponentRestriction::full(game))?;
    let rat = minimax_regret(game, player, &rational_restriction(game)?)?;
    Ok((full, rat))
}

/// Plays each stage's competitive strategy before the last iteration and the
/// last stage's rationally competitive strategy at the end, ignoring history.
/// Canonical picks (lowest argmin index) are used.
pub fn folk_strategy(seq: &GameSequence, player: usize) -> Result<HistoryStrategy> {
    require_condition(seq.stages())?;
    let space = StrategySpace::new(seq, player)?;
    let last = seq.len() - 1;
    let decisions = seq
        .stages
        .iter()
        .enumerate()
        .map(|(it, g)| {
            let (full, rat) = stage_reports(g, player)?;
            let pick = if it == last {
                rat.canonical_pick()
            } else {
                full.canonical_pick()
            };
            let width = usize::try_from(space.histories_at(it)).map_err(|_| {
                Error::size_cap(
                    "opponent histories",
                    space.histories_at(it),
                    usize::MAX as u128,
                )
            })?;
            Ok(vec![pick; width])
        })
        .collect::<Result<_>>()?;
    Ok(HistoryStrategy { player, decisions })
}

/// Where a subgame check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgameFailure {
    /// 0-based first iteration of the subgame.
    pub start: usize,
    /// Opponent-history index reaching it.
    pub history: usize,
    /// Expanded-game index of the continuation strategy.
    pub continuation: usize,
    #[serde(with = "crate::rational::as_string")]
    pub continuation_regret: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub minimax_regret: Rational,
}

/// Minimax reports of one player for every suffix of a sequence.
struct SuffixAnalysis {
    space: StrategySpace,
    suffix_spaces: Vec<StrategySpace>,
    reports: Vec<RegretReport>,
}

fn analyse_suffixes(
    seq: &GameSequence,
    player: usize,
    mode: RestrictionKind,
    expanded: &[Game],
) -> Result<SuffixAnalysis> {
    let space = StrategySpace::new(seq, player)?;
    let mut suffix_spaces = Vec::with_capacity(seq.len());
    let mut reports = Vec::with_capacity(seq.len());
    for (q, game) in expanded.iter().enumerate() {
        suffix_spaces.push(StrategySpace::new(&seq.suffix(q), player)?);
        let restriction = match mode {
            RestrictionKind::Full => OpponentRestriction::full(game),
            RestrictionKind::Rational => rational_restriction(game)?,
            RestrictionKind::Explicit => {
                return Err(Error::invalid("subgame checks use full or rational mode"))
            }
        };
        reports.push(minimax_regret(game, player, &restriction)?);
    }
    Ok(SuffixAnalysis {
        space,
        suffix_spaces,
        reports,
    })
}

fn subgame_failures(a: &SuffixAnalysis, strategy: &HistoryStrategy) -> Result<Vec<SubgameFailure>> {
    a.space.encode(strategy)?;
    let mut failures = Vec::new();
    for (q, report) in a.reports.iter().enumerate() {
        for h in 0..a.space.histories_at(q) as usize {
            let cont = a.space.continuation(strategy, q, h);
            let idx = a.suffix_spaces[q].encode(&cont)?;
            if !report.contains(idx) {
                failures.push(SubgameFailure {
                    start: q,
                    history: h,
                    continuation: idx,
                    continuation_regret: report.per_strategy_worst_regret[idx],
                    minimax_regret: report.minimax_value,
                });
            }
        }
    }
    Ok(failures)
}

fn expand_suffixes(seq: &GameSequence) -> Result<Vec<Game>> {
    subgames(seq).iter().map(expand_sequence).collect()
}

/// Every subgame failure of `strategy`; empty means competitive in all subgames.
pub fn subgame_check(
    seq: &GameSequence,
    player: usize,
    strategy: &HistoryStrategy,
    mode: RestrictionKind,
) -> Result<Vec<SubgameFailure>> {
    let expanded = expand_suffixes(seq)?;
    let analysis = analyse_suffixes(seq, player, mode, &expanded)?;
    subgame_failures(&analysis, strategy)
}

/// True iff the continuation of `strategy` after every opponent history is a
/// minimax-regret strategy of every suffix game.
pub fn is_competitive_in_all_subgames(
    seq: &GameSequence,
    player: usize,
    strategy: &HistoryStrategy,
    mode: RestrictionKind,
) -> Result<bool> {
    Ok(subgame_check(seq, player, strategy, mode)?.is_empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizationMode {
    Exhaustive,
    Sampled,
}

/// A pool of stage games drawn independently each iteration.
#[derive(Debug, Clone)]
pub struct RandomGameSpec {
    pub pool: Vec<Game>,
    pub length: usize,
    pub mode: RealizationMode,
    /// Required in sampled mode.
    pub seed: Option<u64>,
    /// Number of sequences drawn in sampled mode.
    pub samples: usize,
}

/// Realizations as pool-index sequences: all of them in lexicographic
/// order (exhaustive) or `samples` uniform draws from the seed.
pub fn random_realizations(spec: &RandomGameSpec) -> Result<Vec<Vec<usize>>> {
    if spec.pool.is_empty() {
        return Err(Error::invalid("random game pool is empty"));
    }
    if spec.length == 0 {
        return Err(Error::invalid("random game length must be at least 1"));
    }
    let m = spec.pool.len();
    match spec.mode {
        RealizationMode::Exhaustive => {
            let count = pow_sat(m as u128, spec.length as u128);
            if count > DEFAULT_REALIZATION_CAP {
                return Err(Error::size_cap(
                    "random-game realizations",
                    count,
                    DEFAULT_REALIZATION_CAP,
                ));
            }
            Ok(crate::game::Odometer::new(vec![(0..m).collect(); spec.length]).collect())
        }
        RealizationMode::Sampled => {
            let seed = spec
                .seed
                .ok_or_else(|| Error::invalid("sampled mode requires a seed"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..spec.samples)
                .map(|_| (0..spec.length).map(|_| rng.gen_range(0..m)).collect())
                .collect())
        }
    }
}

impl RandomGameSpec {
    pub fn sequence(&self, realization: &[usize]) -> Result<GameSequence> {
        let stages = realization
            .iter()
            .map(|&i| {
                self.pool.get(i).cloned().ok_or_else(|| {
                    Error::invalid(format!("realization index {i} outside the pool"))
                })
            })
            .collect::<Result<_>>()?;
        GameSequence::new(stages)
    }
}

/// What the folk verifier runs on.
#[derive(Debug, Clone)]
pub enum FolkInput {
    Sequence(GameSequence),
    Random(RandomGameSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolkEntry {
    /// Pool indices for random games, stage indices for a fixed sequence.
    pub realization: Vec<usize>,
    pub player: usize,
    /// Stage strategy played at each iteration.
    pub stage_picks: Vec<usize>,
    /// Competitive stage argmin sets per iteration, both modes.
    pub stage_full_argmin: Vec<Vec<usize>>,
    pub stage_rational_argmin: Vec<Vec<usize>>,
    /// Argmin-set sizes of every expanded suffix game, both modes.
    pub subgame_full_argmin_sizes: Vec<usize>,
    pub subgame_rational_argmin_sizes: Vec<usize>,
    pub passed: bool,
    pub failures: Vec<SubgameFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolkReport {
    pub mode: RestrictionKind,
    pub entries: Vec<FolkEntry>,
}

impl FolkReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

/// Builds the folk strategy for every player of every realization and checks
/// it subgame by subgame under `mode`.
pub fn verify_folk_theorem(input: &FolkInput, mode: RestrictionKind) -> Result<FolkReport> {
    let (realizations, pool): (Vec<(Vec<usize>, GameSequence)>, Vec<Game>) = match input {
        FolkInput::Sequence(seq) => (
            vec![((0..seq.len()).collect(), seq.clone())],
            seq.stages().to_vec(),
        ),
        FolkInput::Random(spec) => {
            let rs = random_realizations(spec)?;
            let seqs = rs
                .into_iter()
                .map(|r| spec.sequence(&r).map(|s| (r, s)))
                .collect::<Result<_>>()?;
            (seqs, spec.pool.clone())
        }
    };
    require_condition(&pool)?;

    let mut entries = Vec::new();
    for (realization, seq) in &realizations {
        let expanded = expand_suffixes(seq)?;
        for player in 0..seq.player_count() {
            let strategy = folk_strategy(seq, player)?;
            let stage: Vec<(RegretReport, RegretReport)> = seq
                .stages()
                .iter()
                .map(|g| stage_reports(g, player))
                .collect::<Result<_>>()?;
            let full = analyse_suffixes(seq, player, RestrictionKind::Full, &expanded)?;
            let rat = analyse_suffixes(seq, player, RestrictionKind::Rational, &expanded)?;
            let checked = if mode == RestrictionKind::Full {
                &full
            } else {
                &rat
            };
            let failures = subgame_failures(checked, &strategy)?;
            entries.push(FolkEntry {
                realization: realization.clone(),
                player,
                stage_picks: strategy.decisions.iter().map(|d| d[0]).collect(),
                stage_full_argmin: stage.iter().map(|(f, _)| f.argmin_set.clone()).collect(),
                stage_rational_argmin: stage.iter().map(|(_, r)| r.argmin_set.clone()).collect(),
                subgame_full_argmin_sizes: full
                    .reports
                    .iter()
                    .map(|r| r.argmin_set.len())
                    .collect(),
                subgame_rational_argmin_sizes: rat
                    .reports
                    .iter()
                    .map(|r| r.argmin_set.len())
                    .collect(),
                passed: failures.is_empty(),
                failures,
            });
        }
    }
    Ok(FolkReport { mode, entries })
}
