//! Two-agent one-way trading: payoffs, threshold strategies, a simulator
//! and an exact worst-case regret oracle on a discretized announcement grid.
//!
//! Each iteration both agents see both announcements and decide to take or
//! pass. The first iteration in which anyone takes ends the game: a lone
//! taker earns `a_i * X`, two simultaneous takers earn `a_i * K` each
//! (`X = 2K`). Everyone must pass afterwards.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, ratio, Rational};
use crate::regret::RestrictionKind;

/// Upper bound on announcement-tree nodes the oracle will visit.
pub const DEFAULT_TREE_CAP: u128 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TradingSpec {
    pub m1: i64,
    #[serde(rename = "M1")]
    pub big_m1: i64,
    pub m2: i64,
    #[serde(rename = "M2")]
    pub big_m2: i64,
    pub t: usize,
    #[serde(rename = "K")]
    pub k: i64,
}

impl TradingSpec {
    pub fn new(m1: i64, big_m1: i64, m2: i64, big_m2: i64, t: usize, k: i64) -> Result<Self> {
        let s = TradingSpec {
            m1,
            big_m1,
            m2,
            big_m2,
            t,
            k,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (m, big)) in [(self.m1, self.big_m1), (self.m2, self.big_m2)]
            .iter()
            .enumerate()
        {
            if *m <= 0 || big <= m {
                return Err(Error::Assumption(format!(
                    "agent {}: need M > m > 0, got m={m}, M={big}",
                    i + 1
                )));
            }
        }
        if self.t < 3 {
            return Err(Error::Assumption(format!(
                "need t >= 3 iterations, got {}",
                self.t
            )));
        }
        if self.k <= 0 {
            return Err(Error::Assumption(format!("need K >= 1, got {}", self.k)));
        }
        Ok(())
    }

    /// Total quantity `X = 2K`.
    pub fn quantity(&self) -> i64 {
        2 * self.k
    }

    /// `(m_i, M_i)` for 0-based agent `player`.
    pub fn bounds(&self, player: usize) -> (i64, i64) {
        if player == 0 {
            (self.m1, self.big_m1)
        } else {
            (self.m2, self.big_m2)
        }
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player > 1 {
            return Err(Error::invalid(format!(
                "trading has agents 0 and 1, got {player}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for TradingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m1={} M1={} m2={} M2={} t={} K={}",
            self.m1, self.big_m1, self.m2, self.big_m2, self.t, self.k
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Take,
    Pass,
}

/// Announcement pairs `(a_1, a_2)`, one per iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnouncementSequence(pub Vec<[Rational; 2]>);

impl AnnouncementSequence {
    pub fn from_integers(a1: &[i64], a2: &[i64]) -> Result<Self> {
        if a1.len() != a2.len() {
            return Err(Error::invalid("announcement lists differ in length"));
        }
        Ok(AnnouncementSequence(
            a1.iter().zip(a2).map(|(&x, &y)| [int(x), int(y)]).collect(),
        ))
    }

    pub fn validate(&self, spec: &TradingSpec) -> Result<()> {
        if self.0.len() != spec.t {
            return Err(Error::invalid(format!(
                "expected {} announcement pairs, got {}",
                spec.t,
                self.0.len()
            )));
        }
        for (j, pair) in self.0.iter().enumerate() {
            for (i, a) in pair.iter().enumerate() {
                let (m, big) = spec.bounds(i);
                if *a < int(m) || *a > int(big) {
                    return Err(Error::invalid(format!(
                        "iteration {}: a_{} = {a} outside [{m}, {big}]",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingOutcome {
    /// 1-based iteration at which each agent took, if it did.
    pub take_iteration: [Option<usize>; 2],
    #[serde(with = "pair_as_string")]
    pub payoffs: [Rational; 2],
}

mod pair_as_string {
    use super::Rational;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &[Rational; 2], s: S) -> Result<S::Ok, S::Error> {
        crate::rational::vec_as_string::serialize(p, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 2], D::Error> {
        let v = crate::rational::vec_as_string::deserialize(d)?;
        <[Rational; 2]>::try_from(v).map_err(|_| serde::de::Error::custom("expected two payoffs"))
    }
}

/// Payoffs of an explicit action pattern.
pub fn trading_payoff(
    spec: &TradingSpec,
    announcements: &AnnouncementSequence,
    actions: &[[Action; 2]],
) -> Result<TradingOutcome> {
    announcements.validate(spec)?;
    if actions.len() != spec.t {
        return Err(Error::invalid(format!(
            "expected {} action pairs, got {}",
            spec.t,
            actions.len()
        )));
    }
    let mut outcome = TradingOutcome {
        take_iteration: [None, None],
        payoffs: [int(0), int(0)],
    };
    let mut ended = false;
    for (j, (acts, pair)) in actions.iter().zip(&announcements.0).enumerate() {
        if ended {
            if let Some(i) = acts.iter().position(|a| *a == Action::Take) {
                return Err(Error::Contract(format!(
                    "agent {} takes at iteration {} after the game ended",
                    i + 1,
                    j + 1
                )));
            }
            continue;
        }
        let both = acts.iter().all(|a| *a == Action::Take);
        for i in 0..2 {
            if acts[i] == Action::Take {
                let units = if both { spec.k } else { spec.quantity() };
                outcome.payoffs[i] = pair[i] * int(units);
                outcome.take_iteration[i] = Some(j + 1);
                ended = true;
            }
        }
    }
    Ok(outcome)
}

/// Decision rule of one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TradingRule {
    /// Before the last iteration take iff `a_i >= threshold`; take at the last.
    Threshold { threshold: Rational },
    /// Take whenever the other agent sees its maximum (before the last
    /// iteration); otherwise take iff `a_i >= early` up to `t-2`, iff
    /// `a_i >= late` at `t-1`, and always at `t`.
    Rational { early: Rational, late: Rational },
    /// Never takes, not even at the last iteration.
    NeverTake,
    /// Explicit decisions keyed by `(iteration, a_1, a_2)`; missing keys pass.
    /// Not forced to pass after a take, so it can break the game's rules.
    Table(HashMap<(usize, Rational, Rational), Action>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingStrategy {
    pub player: usize,
    pub rule: TradingRule,
}

impl TradingStrategy {
    /// Action at 1-based `iteration` given both announcements.
    pub fn decide(
        &self,
        spec: &TradingSpec,
        iteration: usize,
        pair: [Rational; 2],
        any_take: bool,
    ) -> Action {
        let own = pair[self.player];
        let take_if = |c: bool| if c { Action::Take } else { Action::Pass };
        if let TradingRule::Table(map) = &self.rule {
            return map
                .get(&(iteration, pair[0], pair[1]))
                .copied()
                .unwrap_or(Action::Pass);
        }
        if any_take {
            return Action::Pass;
        }
        match &self.rule {
            TradingRule::Threshold { threshold } => {
                take_if(iteration >= spec.t || own >= *threshold)
            }
            TradingRule::Rational { early, late } => {
                let other = 1 - self.player;
                let other_max = int(spec.bounds(other).1);
                if iteration >= spec.t || pair[other] == other_max {
                    Action::Take
                } else if iteration + 1 < spec.t {
                    take_if(own >= *early)
                } else {
                    take_if(own >= *late)
                }
            }
            TradingRule::NeverTake => Action::Pass,
            TradingRule::Table(_) => unreachable!(),
        }
    }

    pub fn describe(&self) -> String {
        match &self.rule {
            TradingRule::Threshold { threshold } => {
                format!("take iff a_{} >= {threshold} before t; take at t", self.player + 1)
            }
            TradingRule::Rational { early, late } => format!(
                "take if a_{} = M_{}; else take iff a_{} >= {early} up to t-2, >= {late} at t-1; take at t",
                2 - self.player,
                2 - self.player,
                self.player + 1
            ),
            TradingRule::NeverTake => "never take".into(),
            TradingRule::Table(m) => format!("explicit table ({} entries)", m.len()),
        }
    }
}

/// Take iff `a_i >= (2 M_i + m_i) / 4` before the last iteration.
pub fn competitive_trading_strategy(spec: &TradingSpec, player: usize) -> Result<TradingStrategy> {
    spec.validate()?;
    spec.check_player(player)?;
    let (m, big) = spec.bounds(player);
    Ok(TradingStrategy {
        player,
        rule: TradingRule::Threshold {
            threshold: ratio(2 * big + m, 4),
        },
    })
}

/// Rationally competitive thresholds: `(2 M_i + m_i)/4` early, `(M_i + m_i)/4` at `t-1`.
pub fn rational_trading_strategy(spec: &TradingSpec, player: usize) -> Result<TradingStrategy> {
    spec.validate()?;
    spec.check_player(player)?;
    let (m, big) = spec.bounds(player);
    Ok(TradingStrategy {
        player,
        rule: TradingRule::Rational {
            early: ratio(2 * big + m, 4),
            late: ratio(big + m, 4),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    #[serde(with = "pair_as_string")]
    pub announcements: [Rational; 2],
    pub actions: [Action; 2],
    #[serde(with = "pair_as_string")]
    pub running_payoffs: [Rational; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simulation {
    pub outcome: TradingOutcome,
    pub trace: Vec<TraceRecord>,
}

/// Plays both strategies against a fixed announcement sequence.
pub fn simulate(
    spec: &TradingSpec,
    strategies: [&TradingStrategy; 2],
    announcements: &AnnouncementSequence,
) -> Result<Simulation> {
    spec.validate()?;
    announcements.validate(spec)?;
    if strategies[0].player != 0 || strategies[1].player != 1 {
        return Err(Error::invalid(
            "strategies must be given for agents 0 and 1 in order",
        ));
    }
    let mut actions = Vec::with_capacity(spec.t);
    let mut trace = Vec::with_capacity(spec.t);
    let mut any_take = false;
    let mut running = [int(0), int(0)];
    for (j, pair) in announcements.0.iter().enumerate() {
        let acts = [0, 1].map(|i| strategies[i].decide(spec, j + 1, *pair, any_take));
        if any_take && acts.contains(&Action::Take) {
            return Err(Error::Contract(format!(
                "a strategy takes at iteration {} after the game ended",
                j + 1
            )));
        }
        if !any_take && acts.contains(&Action::Take) {
            let both = acts.iter().all(|a| *a == Action::Take);
            for i in 0..2 {
                if acts[i] == Action::Take {
                    let units = if both { spec.k } else { spec.quantity() };
                    running[i] = pair[i] * int(units);
                }
            }
            any_take = true;
        }
        actions.push(acts);
        trace.push(TraceRecord {
            iteration: j + 1,
            announcements: *pair,
            actions: acts,
            running_payoffs: running,
        });
    }
    let outcome = trading_payoff(spec, announcements, &actions)?;
    debug_assert_eq!(outcome.payoffs, running);
    Ok(Simulation { outcome, trace })
}

/// Announcement values per agent on a grid of the given step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnouncementGrid {
    pub values: [Vec<Rational>; 2],
}

impl AnnouncementGrid {
    pub fn new(spec: &TradingSpec, step: Rational) -> Result<Self> {
        spec.validate()?;
        if step <= int(0) {
            return Err(Error::invalid(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let axis = |i: usize| -> Result<Vec<Rational>> {
            let (m, big) = spec.bounds(i);
            let span = (int(big) - int(m)) / step;
            if !span.is_integer() {
                return Err(Error::invalid(format!(
                    "grid step {step} does not divide [{m}, {big}]"
                )));
            }
            Ok((0..=span.to_integer())
                .map(|s| int(m) + step * int(s))
                .collect())
        };
        Ok(AnnouncementGrid {
            values: [axis(0)?, axis(1)?],
        })
    }

    pub fn pairs(&self) -> Vec<[Rational; 2]> {
        let mut out = Vec::with_capacity(self.values[0].len() * self.values[1].len());
        for a in &self.values[0] {
            for b in &self.values[1] {
                out.push([*a, *b]);
            }
        }
        out
    }
}

/// Shared state of one oracle run.
struct Tree<'a> {
    spec: &'a TradingSpec,
    player: usize,
    mode: RestrictionKind,
    pairs: Vec<[Rational; 2]>,
    future: Vec<Rational>,
}

impl<'a> Tree<'a> {
    fn new(
        spec: &'a TradingSpec,
        grid: &AnnouncementGrid,
        player: usize,
        mode: RestrictionKind,
    ) -> Result<Self> {
        if mode == RestrictionKind::Explicit {
            return Err(Error::invalid(
                "trading oracle supports full and rational modes",
            ));
        }
        let pairs = grid.pairs();
        let g = pairs.len() as u128;
        let nodes =
            (1..=spec.t as u32).fold(0u128, |acc, j| acc.saturating_add(g.saturating_pow(j)));
        if nodes > DEFAULT_TREE_CAP {
            return Err(Error::size_cap(
                "announcement-tree nodes",
                nodes,
                DEFAULT_TREE_CAP,
            ));
        }
        let mut tree = Tree {
            spec,
            player,
            mode,
            pairs,
            future: Vec::new(),
        };
        tree.future = tree.future_values();
        Ok(tree)
    }

    /// Opponent moves allowed at a node. Rational opponents always take at
    /// the last iteration and whenever their own announcement is maximal:
    /// passing there is weakly dominated by taking.
    fn opponent_moves(&self, iteration: usize, pair: &[Rational; 2]) -> &'static [Action] {
        const BOTH: &[Action] = &[Action::Take, Action::Pass];
        const TAKE: &[Action] = &[Action::Take];
        if self.mode == RestrictionKind::Rational {
            let other = 1 - self.player;
            if iteration == self.spec.t || pair[other] == int(self.spec.bounds(other).1) {
                return TAKE;
            }
        }
        BOTH
    }

    /// `future[j]`: best payoff reachable strictly after 1-based iteration `j`
    /// when the opponent has not taken by `j`, over all continuations.
    fn future_values(&self) -> Vec<Rational> {
        let t = self.spec.t;
        let (x, k) = (int(self.spec.quantity()), int(self.spec.k));
        let mut future = vec![int(0); t + 1];
        for j in (1..t).rev() {
            let mut best = int(0);
            for pair in &self.pairs {
                let a = pair[self.player];
                for mv in self.opponent_moves(j + 1, pair) {
                    let v = match mv {
                        Action::Take => a * k,
                        Action::Pass => (a * x).max(future[j + 1]),
                    };
                    best = best.max(v);
                }
            }
            future[j] = best;
        }
        future
    }

    /// Regret at a node where the player chose `own`, or `None` when the
    /// game continues (both pass before the last iteration).
    fn leaf_regret(
        &self,
        iteration: usize,
        best_past: Rational,
        a: Rational,
        own: Action,
        opp: Action,
    ) -> Option<Rational> {
        let (x, k) = (int(self.spec.quantity()), int(self.spec.k));
        match (own, opp) {
            (Action::Take, Action::Take) => Some(best_past.max(a * k) - a * k),
            (Action::Pass, Action::Take) => Some(best_past.max(a * k)),
            (Action::Take, Action::Pass) => {
                Some(best_past.max(a * x).max(self.future[iteration]) - a * x)
            }
            (Action::Pass, Action::Pass) if iteration == self.spec.t => Some(best_past.max(a * x)),
            (Action::Pass, Action::Pass) => None,
        }
    }

    fn strategy_regret(
        &self,
        s: &TradingStrategy,
        iteration: usize,
        best_past: Rational,
    ) -> Rational {
        let x = int(self.spec.quantity());
        let mut worst = int(0);
        for pair in &self.pairs {
            let a = pair[self.player];
            let own = s.decide(self.spec, iteration, *pair, false);
            for &opp in self.opponent_moves(iteration, pair) {
                let r = match self.leaf_regret(iteration, best_past, a, own, opp) {
                    Some(r) => r,
                    None => self.strategy_regret(s, iteration + 1, best_past.max(a * x)),
                };
                worst = worst.max(r);
            }
        }
        worst
    }

    fn optimal_regret(
        &self,
        iteration: usize,
        best_past: Rational,
        memo: &mut HashMap<(usize, Rational), Rational>,
    ) -> Rational {
        if let Some(v) = memo.get(&(iteration, best_past)) {
            return *v;
        }
        let x = int(self.spec.quantity());
        let mut worst = int(0);
        for pair in &self.pairs {
            let a = pair[self.player];
            let mut best_choice: Option<Rational> = None;
            for own in [Action::Take, Action::Pass] {
                let mut r_own = int(0);
                for &opp in self.opponent_moves(iteration, pair) {
                    let r = match self.leaf_regret(iteration, best_past, a, own, opp) {
                        Some(r) => r,
                        None => self.optimal_regret(iteration + 1, best_past.max(a * x), memo),
                    };
                    r_own = r_own.max(r);
                }
                best_choice = Some(best_choice.map_or(r_own, |b| b.min(r_own)));
            }
            worst = worst.max(best_choice.expect("two actions"));
        }
        memo.insert((iteration, best_past), worst);
        worst
    }
}

/// Worst-case regret of `strategy` over every announcement sequence on the
/// grid and every opponent strategy (non-dominated ones in rational mode).
///
/// The hindsight benchmark keeps the opponent's strategy fixed and lets the
/// player pick its best take time on the realized announcements.
pub fn trading_oracle(
    spec: &TradingSpec,
    grid_step: Rational,
    player: usize,
    strategy: &TradingStrategy,
    mode: RestrictionKind,
) -> Result<Rational> {
    spec.check_player(player)?;
    if strategy.player != player {
        return Err(Error::invalid("strategy belongs to the other agent"));
    }
    let grid = AnnouncementGrid::new(spec, grid_step)?;
    let tree = Tree::new(spec, &grid, player, mode)?;
    Ok(tree.strategy_regret(strategy, 1, int(0)))
}

/// Minimum worst-case regret over all deterministic strategies of `player`,
/// including ones that depend on the whole announcement history.
pub fn minimal_worst_case_regret(
    spec: &TradingSpec,
    grid_step: Rational,
    player: usize,
    mode: RestrictionKind,
) -> Result<Rational> {
    spec.check_player(player)?;
    let grid = AnnouncementGrid::new(spec, grid_step)?;
    let tree = Tree::new(spec, &grid, player, mode)?;
    Ok(tree.optimal_regret(1, int(0), &mut HashMap::new()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub player: usize,
    pub mode: RestrictionKind,
    pub strategy: String,
    #[serde(with = "crate::rational::as_string")]
    pub strategy_regret: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub minimal_regret: Rational,
    pub optimal: bool,
}

/// Compares the closed-form strategy of each mode with the oracle minimum.
pub fn verify_trading(
    spec: &TradingSpec,
    grid_step: Rational,
    player: usize,
    mode: RestrictionKind,
) -> Result<OracleVerdict> {
    let strategy = match mode {
        RestrictionKind::Rational => rational_trading_strategy(spec, player)?,
        _ => competitive_trading_strategy(spec, player)?,
    };
    let strategy_regret = trading_oracle(spec, grid_step, player, &strategy, mode)?;
    let minimal_regret = minimal_worst_case_regret(spec, grid_step, player, mode)?;
    Ok(OracleVerdict {
        player,
        mode,
        strategy: strategy.describe(),
        strategy_regret,
        minimal_regret,
        optimal: strategy_regret == minimal_regret,
    })
}

/// Acceptance threshold `(M - m) / 2` of the single-agent problem, as stated
/// in the one-way trading literature variant this crate follows.
pub fn single_agent_threshold(big_m: i64, m: i64) -> Result<Rational> {
    if !(big_m > m && m > 0) {
        return Err(Error::invalid(format!(
            "need M > m > 0, got M={big_m}, m={m}"
        )));
    }
    Ok(ratio(big_m - m, 2))
}

/// Brute-force audit of single-agent threshold strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleAgentAudit {
    #[serde(rename = "M")]
    pub big_m: i64,
    pub m: i64,
    pub t: usize,
    #[serde(with = "crate::rational::as_string")]
    pub stated_threshold: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub stated_threshold_regret: Rational,
    /// Grid thresholds attaining the minimum, ascending.
    #[serde(with = "crate::rational::vec_as_string")]
    pub optimal_thresholds: Vec<Rational>,
    #[serde(with = "crate::rational::as_string")]
    pub optimal_threshold_regret: Rational,
    /// Minimum over all deterministic strategies, not only thresholds.
    #[serde(with = "crate::rational::as_string")]
    pub optimal_regret_any_strategy: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub midpoint: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub midpoint_regret: Rational,
    pub stated_threshold_optimal: bool,
    pub verdict: String,
}

/// Single agent selling one unit: worst-case regret of "take iff `a >= theta`
/// before `t`, take at `t`" over all grid sequences.
fn single_threshold_regret(values: &[Rational], t: usize, theta: Rational) -> Rational {
    fn go(values: &[Rational], t: usize, theta: Rational, j: usize, best: Rational) -> Rational {
        let mut worst = int(0);
        for &a in values {
            let r = if j == t || a >= theta {
                // Take now; later announcements may reach the top value.
                let later = if j < t {
                    *values.last().expect("nonempty")
                } else {
                    int(0)
                };
                best.max(later).max(a) - a
            } else {
                go(values, t, theta, j + 1, best.max(a))
            };
            worst = worst.max(r);
        }
        worst
    }
    go(values, t, theta, 1, int(0))
}

fn single_optimal_regret(values: &[Rational], t: usize) -> Rational {
    fn go(
        values: &[Rational],
        t: usize,
        j: usize,
        best: Rational,
        memo: &mut HashMap<(usize, Rational), Rational>,
    ) -> Rational {
        if let Some(v) = memo.get(&(j, best)) {
            return *v;
        }
        let top = *values.last().expect("nonempty");
        let mut worst = int(0);
        for &a in values {
            let take = best.max(if j < t { top } else { int(0) }).max(a) - a;
            let pass = if j == t {
                best.max(a)
            } else {
                go(values, t, j + 1, best.max(a), memo)
            };
            worst = worst.max(take.min(pass));
        }
        memo.insert((j, best), worst);
        worst
    }
    go(values, t, 1, int(0), &mut HashMap::new())
}

/// Enumerates every grid threshold (plus "never before t") for the
/// single-agent problem on `[m, M]` and reports it next to `(M - m)/2`.
pub fn single_agent_audit(big_m: i64, m: i64, t: usize) -> Result<SingleAgentAudit> {
    let stated = single_agent_threshold(big_m, m)?;
    if t < 1 {
        return Err(Error::invalid("need at least one stage"));
    }
    let values: Vec<Rational> = (m..=big_m).map(int).collect();
    let candidates: Vec<Rational> = (m..=big_m + 1).map(int).collect();
    let regrets: Vec<Rational> = candidates
        .iter()
        .map(|&th| single_threshold_regret(&values, t, th))
        .collect();
    let best = *regrets.iter().min().expect("nonempty");
    let optimal_thresholds: Vec<Rational> = candidates
        .iter()
        .zip(&regrets)
        .filter(|(_, r)| **r == best)
        .map(|(c, _)| *c)
        .collect();
    let stated_regret = single_threshold_regret(&values, t, stated);
    let midpoint = ratio(big_m + m, 2);
    let midpoint_regret = single_threshold_regret(&values, t, midpoint);
    let any = single_optimal_regret(&values, t);
    let stated_optimal = stated_regret == best;
    let list: Vec<String> = optimal_thresholds.iter().map(|r| r.to_string()).collect();
    let verdict = if stated_optimal {
        format!("(M-m)/2 = {stated} is optimal (worst-case regret {best})")
    } else {
        format!(
            "(M-m)/2 = {stated} has worst-case regret {stated_regret}; optimal grid thresholds {{{}}} reach {best}; (M+m)/2 = {midpoint} reaches {midpoint_regret}",
            list.join(",")
        )
    };
    Ok(SingleAgentAudit {
        big_m,
        m,
        t,
        stated_threshold: stated,
        stated_threshold_regret: stated_regret,
        optimal_thresholds,
        optimal_threshold_regret: best,
        optimal_regret_any_strategy: any,
        midpoint,
        midpoint_regret,
        stated_threshold_optimal: stated_optimal,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> TradingSpec {
        TradingSpec::new(2, 6, 2, 6, 3, 1).unwrap()
    }

    fn seq() -> AnnouncementSequence {
        AnnouncementSequence::from_integers(&[3, 5, 4], &[2, 6, 3]).unwrap()
    }

    use Action::{Pass, Take};

    #[test]
    fn payoff_rules() {
        let s = spec();
        let solo = trading_payoff(&s, &seq(), &[[Pass, Pass], [Take, Pass], [Pass, Pass]]).unwrap();
        assert_eq!(solo.payoffs, [int(10), int(0)]);
        assert_eq!(solo.take_iteration, [Some(2), None]);
        let both = trading_payoff(&s, &seq(), &[[Pass, Pass], [Take, Take], [Pass, Pass]]).unwrap();
        assert_eq!(both.payoffs, [int(5), int(6)]);
        let none = trading_payoff(&s, &seq(), &[[Pass, Pass]; 3]).unwrap();
        assert_eq!(none.payoffs, [int(0), int(0)]);
        let late = trading_payoff(&s, &seq(), &[[Take, Pass], [Pass, Take], [Pass, Pass]]);
        assert!(matches!(late, Err(Error::Contract(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(TradingSpec::new(2, 2, 1, 3, 3, 1).is_err());
        assert!(TradingSpec::new(0, 2, 1, 3, 3, 1).is_err());
        assert!(TradingSpec::new(1, 2, 1, 3, 2, 1).is_err());
        assert!(TradingSpec::new(1, 2, 1, 3, 3, 0).is_err());
        let bad = AnnouncementSequence::from_integers(&[3, 7, 4], &[2, 6, 3]).unwrap();
        assert!(bad.validate(&spec()).is_err());
    }

    #[test]
    fn competitive_thresholds() {
        let s = spec();
        let c = competitive_trading_strategy(&s, 0).unwrap();
        assert_eq!(
            c.rule,
            TradingRule::Threshold {
                threshold: ratio(7, 2)
            }
        );
        assert_eq!(c.decide(&s, 1, [int(4), int(2)], false), Take);
        assert_eq!(c.decide(&s, 1, [int(3), int(2)], false), Pass);
        assert_eq!(c.decide(&s, 3, [int(2), int(2)], false), Take);
        assert_eq!(c.decide(&s, 1, [int(6), int(2)], true), Pass);
    }

    #[test]
    fn rational_rules() {
        let s = spec();
        let r = rational_trading_strategy(&s, 0).unwrap();
        assert_eq!(r.decide(&s, 1, [int(2), int(6)], false), Take);
        assert_eq!(r.decide(&s, 2, [int(2), int(5)], false), Take);
        assert_eq!(r.decide(&s, 1, [int(3), int(5)], false), Pass);
        assert_eq!(r.decide(&s, 3, [int(2), int(2)], false), Take);
        assert_eq!(r.decide(&s, 2, [int(6), int(6)], true), Pass);

        let long = TradingSpec::new(2, 6, 2, 6, 5, 1).unwrap();
        let r = rational_trading_strategy(&long, 1).unwrap();
        assert_eq!(r.decide(&long, 3, [int(2), int(3)], false), Pass);
        assert_eq!(r.decide(&long, 4, [int(2), int(2)], false), Take);
        assert_eq!(r.decide(&long, 4, [int(6), int(3)], false), Take);
    }

    #[test]
    fn simulation_steps() {
        let s = spec();
        let c0 = competitive_trading_strategy(&s, 0).unwrap();
        let c1 = competitive_trading_strategy(&s, 1).unwrap();
        let sim = simulate(&s, [&c0, &c1], &seq()).unwrap();
        assert_eq!(sim.outcome.payoffs, [int(5), int(6)]);
        assert_eq!(sim.trace[0].actions, [Pass, Pass]);
        assert_eq!(sim.trace[1].actions, [Take, Take]);
        assert_eq!(sim.trace[2].actions, [Pass, Pass]);

        let low = AnnouncementSequence::from_integers(&[2, 2, 2], &[2, 2, 2]).unwrap();
        let sim = simulate(&s, [&c0, &c1], &low).unwrap();
        assert_eq!(sim.outcome.take_iteration, [Some(3), Some(3)]);

        let r0 = rational_trading_strategy(&s, 0).unwrap();
        let r1 = rational_trading_strategy(&s, 1).unwrap();
        let top = AnnouncementSequence::from_integers(&[2, 2, 2], &[6, 2, 2]).unwrap();
        let sim = simulate(&s, [&r0, &r1], &top).unwrap();
        assert_eq!(sim.outcome.take_iteration[0], Some(1));
    }

    #[test]
    fn table_strategy_breaking_forced_pass() {
        let s = spec();
        let mut map = HashMap::new();
        map.insert((1, int(3), int(2)), Take);
        map.insert((2, int(5), int(6)), Take);
        let bad = TradingStrategy {
            player: 0,
            rule: TradingRule::Table(map),
        };
        let c1 = competitive_trading_strategy(&s, 1).unwrap();
        assert!(matches!(
            simulate(&s, [&bad, &c1], &seq()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn grid_construction() {
        let s = TradingSpec::new(1, 4, 2, 3, 3, 1).unwrap();
        let g = AnnouncementGrid::new(&s, int(1)).unwrap();
        assert_eq!(g.values[0].len(), 4);
        assert_eq!(g.values[1].len(), 2);
        assert_eq!(
            AnnouncementGrid::new(&s, ratio(1, 2)).unwrap().values[0].len(),
            7
        );
        assert!(AnnouncementGrid::new(&s, ratio(2, 3)).is_err());
        assert!(AnnouncementGrid::new(&s, int(0)).is_err());
    }

    #[test]
    fn single_agent_formula() {
        assert_eq!(single_agent_threshold(10, 2).unwrap(), int(4));
        assert_eq!(single_agent_threshold(5, 4).unwrap(), ratio(1, 2));
        assert!(single_agent_threshold(4, 5).is_err());
    }

    #[test]
    fn size_cap() {
        let s = TradingSpec::new(1, 100, 1, 100, 4, 1).unwrap();
        let c = competitive_trading_strategy(&s, 0).unwrap();
        assert!(matches!(
            trading_oracle(&s, int(1), 0, &c, RestrictionKind::Full),
            Err(Error::SizeCap { .. })
        ));
    }
}
