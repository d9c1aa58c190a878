//! Finite normal-form games with exact-rational payoffs.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{common_denominator, scaled, Rational};

/// Profile count up to which games are stored as dense tables.
pub const DEFAULT_DENSE_CAP: u128 = 1_000_000;

/// Upper bound on the number of payoff cells any single solver pass will touch.
pub const DEFAULT_ENUMERATION_CAP: u128 = 50_000_000;

/// Pure payoff rule `(profile, player) -> payoff`.
pub type PayoffRule = Arc<dyn Fn(&[usize], usize) -> Rational + Send + Sync>;

#[derive(Clone)]
enum PayoffSource {
    /// Row-major cells, `n` payoffs per cell, last player varying fastest.
    Dense(Arc<[Rational]>),
    Rule(PayoffRule),
}

/// A finite `n`-player game. Immutable once built, cheap to clone.
#[derive(Clone)]
pub struct Game {
    counts: Vec<usize>,
    strides: Vec<usize>,
    profile_count: u128,
    source: PayoffSource,
    labels: Option<Vec<Vec<String>>>,
}

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(pub Vec<usize>);

/// The choices of everyone except `player`, in ascending player order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpponentProfile {
    pub player: usize,
    pub choices: Vec<usize>,
}

impl OpponentProfile {
    /// Inserts `own` at the excluded player's slot.
    pub fn combine(&self, own: usize) -> StrategyProfile {
        let mut v = Vec::with_capacity(self.choices.len() + 1);
        v.extend_from_slice(&self.choices[..self.player]);
        v.push(own);
        v.extend_from_slice(&self.choices[self.player..]);
        StrategyProfile(v)
    }

    pub fn of(profile: &StrategyProfile, player: usize) -> Self {
        let mut choices = profile.0.clone();
        choices.remove(player);
        OpponentProfile { player, choices }
    }
}

impl fmt::Display for OpponentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "(")?;
        for (slot, c) in self.choices.iter().enumerate() {
            let p = if slot < self.player { slot } else { slot + 1 };
            if !first {
                write!(f, ",")?;
            }
            first = false;
            write!(f, "{p}:{c}")?;
        }
        write!(f, ")")
    }
}

/// Nested payoff table as it appears in game files: one axis per player,
/// innermost cells holding one payoff per player.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffTable {
    Axis(Vec<PayoffTable>),
    Cell(Vec<Rational>),
}

impl PayoffTable {
    /// Builds a table from integer triples, handy for 2-player literals.
    pub fn from_bimatrix(rows: &[Vec<(i64, i64)>]) -> Self {
        PayoffTable::Axis(
            rows.iter()
                .map(|r| {
                    PayoffTable::Axis(
                        r.iter()
                            .map(|&(a, b)| {
                                PayoffTable::Cell(vec![
                                    Rational::from_integer(a),
                                    Rational::from_integer(b),
                                ])
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

fn checked_product(counts: &[usize]) -> u128 {
    counts
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
        .unwrap_or(u128::MAX)
}

fn validate_counts(counts: &[usize]) -> Result<()> {
    if counts.len() < 2 {
        return Err(Error::invalid(format!(
            "a game needs at least 2 players, got {}",
            counts.len()
        )));
    }
    if let Some(p) = counts.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("player {p} has no strategies")));
    }
    Ok(())
}

fn strides_for(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; counts.len()];
    for p in (0..counts.len().saturating_sub(1)).rev() {
        strides[p] = strides[p + 1].saturating_mul(counts[p + 1]);
    }
    strides
}

/// Builds a dense game from a nested table, validating every axis.
pub fn make_dense_game(strategy_counts: &[usize], table: &PayoffTable) -> Result<Game> {
    validate_counts(strategy_counts)?;
    let n = strategy_counts.len();
    let total = checked_product(strategy_counts);
    if total > DEFAULT_ENUMERATION_CAP {
        return Err(Error::size_cap(
            "dense payoff table",
            total,
            DEFAULT_ENUMERATION_CAP,
        ));
    }
    let mut cells = Vec::with_capacity(total as usize * n);
    flatten(table, strategy_counts, 0, &mut Vec::new(), &mut cells)?;
    Game::from_flat(strategy_counts.to_vec(), cells)
}

fn flatten(
    t: &PayoffTable,
    counts: &[usize],
    depth: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Rational>,
) -> Result<()> {
    let n = counts.len();
    match t {
        PayoffTable::Axis(items) if depth < n => {
            if items.len() != counts[depth] {
                return Err(Error::Dimension {
                    axis: format!("player {depth} at prefix {path:?}"),
                    detail: format!("expected {} entries, found {}", counts[depth], items.len()),
                });
            }
            for (i, item) in items.iter().enumerate() {
                path.push(i);
                flatten(item, counts, depth + 1, path, out)?;
                path.pop();
            }
            Ok(())
        }
        PayoffTable::Cell(v) if depth == n => {
            if v.len() != n {
                return Err(Error::Dimension {
                    axis: format!("payoff cell {path:?}"),
                    detail: format!("expected {n} payoffs, found {}", v.len()),
                });
            }
            out.extend_from_slice(v);
            Ok(())
        }
        PayoffTable::Axis(_) => Err(Error::Dimension {
            axis: format!("payoff cell {path:?}"),
            detail: format!("table nests deeper than {n} player axes"),
        }),
        PayoffTable::Cell(_) => Err(Error::Dimension {
            axis: format!("player {depth} at prefix {path:?}"),
            detail: "payoff cell found where a player axis was expected".into(),
        }),
    }
}

impl Game {
    /// Dense game from cells in lexicographic profile order, `n` payoffs each.
    pub fn from_flat(counts: Vec<usize>, cells: Vec<Rational>) -> Result<Game> {
        validate_counts(&counts)?;
        let total = checked_product(&counts);
        let expected = total.saturating_mul(counts.len() as u128);
        if cells.len() as u128 != expected {
            return Err(Error::Dimension {
                axis: "cells".into(),
                detail: format!("expected {expected} payoffs, found {}", cells.len()),
            });
        }
        Ok(Game {
            strides: strides_for(&counts),
            profile_count: total,
            counts,
            source: PayoffSource::Dense(cells.into()),
            labels: None,
        })
    }

    /// Lazily evaluated game backed by a pure rule.
    pub fn from_rule(counts: Vec<usize>, rule: PayoffRule) -> Result<Game> {
        validate_counts(&counts)?;
        Ok(Game {
            strides: strides_for(&counts),
            profile_count: checked_product(&counts),
            counts,
            source: PayoffSource::Rule(rule),
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Game> {
        if labels.len() != self.counts.len() {
            return Err(Error::Dimension {
                axis: "labels".into(),
                detail: format!(
                    "expected {} label lists, found {}",
                    self.counts.len(),
                    labels.len()
                ),
            });
        }
        for (p, (l, &c)) in labels.iter().zip(&self.counts).enumerate() {
            if l.len() != c {
                return Err(Error::Dimension {
                    axis: format!("labels of player {p}"),
                    detail: format!("expected {c} labels, found {}", l.len()),
                });
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn player_count(&self) -> usize {
        self.counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strategy_count(&self, player: usize) -> usize {
        self.counts[player]
    }

    pub fn labels(&self) -> Option<&[Vec<String>]> {
        self.labels.as_deref()
    }

    pub fn label(&self, player: usize, strategy: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(player))
            .and_then(|l| l.get(strategy))
            .map(String::as_str)
    }

    pub fn profile_count(&self) -> u128 {
        self.profile_count
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.source, PayoffSource::Dense(_))
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.counts.len() {
            return Err(Error::invalid(format!(
                "player {player} out of range for a {}-player game",
                self.counts.len()
            )));
        }
        Ok(())
    }

    pub fn check_strategy(&self, player: usize, strategy: usize) -> Result<()> {
        self.check_player(player)?;
        if strategy >= self.counts[player] {
            return Err(Error::invalid(format!(
                "strategy {strategy} out of range for player {player} ({} strategies)",
                self.counts[player]
            )));
        }
        Ok(())
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.0.len() != self.counts.len() {
            return Err(Error::invalid(format!(
                "profile has {} entries, game has {} players",
                profile.0.len(),
                self.counts.len()
            )));
        }
        for (p, &s) in profile.0.iter().enumerate() {
            self.check_strategy(p, s)?;
        }
        Ok(())
    }

    /// `U_player(profile)`.
    pub fn payoff(&self, profile: &StrategyProfile, player: usize) -> Result<Rational> {
        self.check_profile(profile)?;
        self.check_player(player)?;
        Ok(self.payoff_at(&profile.0, player))
    }

    /// Unchecked payoff lookup; `choices` must be a valid profile.
    pub fn payoff_at(&self, choices: &[usize], player: usize) -> Rational {
        match &self.source {
            PayoffSource::Dense(cells) => {
                let idx: usize = choices.iter().zip(&self.strides).map(|(c, s)| c * s).sum();
                cells[idx * self.counts.len() + player]
            }
            PayoffSource::Rule(rule) => rule(choices, player),
        }
    }

    /// Every opponent profile of `player`, lexicographic in ascending player order.
    pub fn opponent_profiles(&self, player: usize) -> Result<Vec<OpponentProfile>> {
        self.check_player(player)?;
        let sets: Vec<Vec<usize>> = (0..self.counts.len())
            .filter(|&p| p != player)
            .map(|p| (0..self.counts[p]).collect())
            .collect();
        let count = sets.iter().map(|s| s.len() as u128).product::<u128>();
        if count > DEFAULT_ENUMERATION_CAP {
            return Err(Error::size_cap(
                "opponent profiles",
                count,
                DEFAULT_ENUMERATION_CAP,
            ));
        }
        Ok(Odometer::new(sets)
            .map(|choices| OpponentProfile { player, choices })
            .collect())
    }

    /// `max_t U_player(t, q)`.
    pub fn best_response_value(&self, player: usize, q: &OpponentProfile) -> Result<Rational> {
        self.check_player(player)?;
        if q.player != player || q.choices.len() + 1 != self.counts.len() {
            return Err(Error::invalid(format!(
                "opponent profile {q} does not exclude player {player}"
            )));
        }
        let mut best: Option<Rational> = None;
        for t in 0..self.counts[player] {
            let prof = q.combine(t);
            self.check_profile(&prof)?;
            let v = self.payoff_at(&prof.0, player);
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        Ok(best.expect("at least one strategy"))
    }

    /// New game with `U'_player = scale * U_player + shift`.
    pub fn affine_transform(
        &self,
        player: usize,
        scale: Rational,
        shift: Rational,
    ) -> Result<Game> {
        self.check_player(player)?;
        if scale <= Rational::zero() {
            return Err(Error::invalid(format!(
                "affine scale must be positive, got {scale}"
            )));
        }
        let n = self.counts.len();
        let source = match &self.source {
            PayoffSource::Dense(cells) => {
                let cells: Vec<Rational> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        if i % n == player {
                            *v * scale + shift
                        } else {
                            *v
                        }
                    })
                    .collect();
                PayoffSource::Dense(cells.into())
            }
            PayoffSource::Rule(rule) => {
                let rule = rule.clone();
                PayoffSource::Rule(Arc::new(move |c: &[usize], p: usize| {
                    let v = rule(c, p);
                    if p == player {
                        v * scale + shift
                    } else {
                        v
                    }
                }))
            }
        };
        Ok(Game {
            source,
            ..self.clone()
        })
    }

    /// Copies a rule-backed game into a dense table when it has at most `cap` profiles.
    pub fn materialize(&self, cap: u128) -> Game {
        if self.is_dense() || self.profile_count > cap {
            return self.clone();
        }
        let n = self.counts.len();
        let mut cells = Vec::with_capacity(self.profile_count as usize * n);
        for prof in self.profiles() {
            for p in 0..n {
                cells.push(self.payoff_at(&prof, p));
            }
        }
        Game {
            source: PayoffSource::Dense(cells.into()),
            ..self.clone()
        }
    }

    /// All profiles in lexicographic order.
    pub fn profiles(&self) -> Odometer {
        Odometer::new(self.counts.iter().map(|&c| (0..c).collect()).collect())
    }

    /// All payoffs of one player, used for extremes and validation.
    pub fn payoffs_of(&self, player: usize) -> Vec<Rational> {
        self.profiles()
            .map(|p| self.payoff_at(&p, player))
            .collect()
    }

    /// Integer payoff rows for `player`: one row per strategy in `own`, one
    /// column per opponent profile drawn from `opp_sets` (indexed by player;
    /// the entry for `player` itself is ignored).
    pub(crate) fn rows(
        &self,
        player: usize,
        own: &[usize],
        opp_sets: &[Vec<usize>],
    ) -> Result<PayoffRows> {
        let sets: Vec<Vec<usize>> = (0..self.counts.len())
            .filter(|&p| p != player)
            .map(|p| opp_sets[p].clone())
            .collect();
        let cols = sets.iter().map(|s| s.len() as u128).product::<u128>();
        let cells = cols.saturating_mul(own.len() as u128);
        if cells > DEFAULT_ENUMERATION_CAP {
            return Err(Error::size_cap(
                "payoff cells",
                cells,
                DEFAULT_ENUMERATION_CAP,
            ));
        }
        let opponents: Vec<OpponentProfile> = Odometer::new(sets)
            .map(|choices| OpponentProfile { player, choices })
            .collect();
        let mut raw: Vec<Vec<Rational>> = vec![Vec::with_capacity(opponents.len()); own.len()];
        let mut buf = vec![0usize; self.counts.len()];
        for q in &opponents {
            let mut slot = 0;
            for (p, b) in buf.iter_mut().enumerate() {
                if p != player {
                    *b = q.choices[slot];
                    slot += 1;
                }
            }
            for (r, &s) in own.iter().enumerate() {
                buf[player] = s;
                raw[r].push(self.payoff_at(&buf, player));
            }
        }
        let den = common_denominator(raw.iter().flatten())?;
        let values = raw
            .iter()
            .map(|row| row.iter().map(|v| scaled(v, den)).collect())
            .collect();
        Ok(PayoffRows {
            den,
            opponents,
            values,
        })
    }
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("strategy_counts", &self.counts)
            .field("dense", &self.is_dense())
            .finish()
    }
}

/// Payoff-identical comparison over every profile.
impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts
            && self.labels == other.labels
            && self.profiles().all(|p| {
                (0..self.counts.len()).all(|i| self.payoff_at(&p, i) == other.payoff_at(&p, i))
            })
    }
}

/// Payoffs of one player over a common denominator.
pub(crate) struct PayoffRows {
    pub den: i128,
    pub opponents: Vec<OpponentProfile>,
    /// `values[own_row][opponent_column]`, scaled by `den`.
    pub values: Vec<Vec<i128>>,
}

/// Mixed-radix counter over per-position value sets, last position fastest.
pub struct Odometer {
    sets: Vec<Vec<usize>>,
    pos: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub fn new(sets: Vec<Vec<usize>>) -> Self {
        let done = sets.iter().any(|s| s.is_empty());
        Odometer {
            pos: vec![0; sets.len()],
            sets,
            done,
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self
            .pos
            .iter()
            .zip(&self.sets)
            .map(|(&i, s)| s[i])
            .collect();
        let mut k = self.sets.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.pos[k] += 1;
            if self.pos[k] < self.sets[k].len() {
                break;
            }
            self.pos[k] = 0;
        }
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    pub(crate) fn example() -> Game {
        let t = PayoffTable::from_bimatrix(&[vec![(4, 0), (0, 3)], vec![(3, 1), (3, 2)]]);
        make_dense_game(&[2, 2], &t).unwrap()
    }

    #[test]
    fn dense_table_reads() {
        let g = example();
        assert_eq!(g.payoff(&StrategyProfile(vec![0, 0]), 0).unwrap(), int(4));
        assert_eq!(g.payoff(&StrategyProfile(vec![1, 1]), 1).unwrap(), int(2));
    }

    #[test]
    fn ragged_row_names_axis() {
        let bad = PayoffTable::Axis(vec![
            PayoffTable::Axis(vec![
                PayoffTable::Cell(vec![int(4), int(0)]),
                PayoffTable::Cell(vec![int(0), int(3)]),
                PayoffTable::Cell(vec![int(0), int(3)]),
            ]),
            PayoffTable::Axis(vec![
                PayoffTable::Cell(vec![int(3), int(1)]),
                PayoffTable::Cell(vec![int(3), int(2)]),
            ]),
        ]);
        match make_dense_game(&[2, 2], &bad) {
            Err(Error::Dimension { axis, .. }) => assert!(axis.contains("player 1"), "{axis}"),
            other => panic!("expected dimension error, got {other:?}"),
        }
        let short_cell =
            PayoffTable::Axis(vec![PayoffTable::Axis(vec![PayoffTable::Cell(vec![int(
                1,
            )])])]);
        assert!(matches!(
            make_dense_game(&[1, 1], &short_cell),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn asymmetric_game() {
        let t = PayoffTable::from_bimatrix(&[
            vec![(1, 1), (2, 2), (3, 3)],
            vec![(4, 4), (5, 5), (6, 6)],
        ]);
        let g = make_dense_game(&[2, 3], &t).unwrap();
        assert_eq!(g.strategy_counts(), &[2, 3]);
        assert_eq!(g.opponent_profiles(1).unwrap().len(), 2);
        assert_eq!(g.opponent_profiles(0).unwrap().len(), 3);
    }

    #[test]
    fn opponent_enumeration_order() {
        let g = example();
        let qs = g.opponent_profiles(0).unwrap();
        assert_eq!(
            qs.iter().map(|q| q.choices.clone()).collect::<Vec<_>>(),
            vec![vec![0], vec![1]]
        );
        assert_eq!(qs[1].to_string(), "(1:1)");

        let g3 = Game::from_rule(vec![2, 2, 2], Arc::new(|_: &[usize], _| int(0))).unwrap();
        let qs = g3.opponent_profiles(1).unwrap();
        assert_eq!(qs.len(), 4);
        assert_eq!(qs[2].choices, vec![1, 0]);
        assert_eq!(qs[2].combine(1).0, vec![1, 1, 0]);
        assert!(g3.opponent_profiles(3).is_err());
    }

    #[test]
    fn best_response_values() {
        let g = example();
        let q = |c| OpponentProfile {
            player: 0,
            choices: vec![c],
        };
        assert_eq!(g.best_response_value(0, &q(0)).unwrap(), int(4));
        assert_eq!(g.best_response_value(0, &q(1)).unwrap(), int(3));

        let single = Game::from_flat(vec![1, 2], vec![int(7), int(0), int(5), int(1)]).unwrap();
        let q1 = OpponentProfile {
            player: 0,
            choices: vec![1],
        };
        assert_eq!(single.best_response_value(0, &q1).unwrap(), int(5));
    }

    #[test]
    fn affine_transforms() {
        let g = example();
        let p00 = StrategyProfile(vec![0, 0]);
        assert_eq!(g.affine_transform(0, int(1), int(0)).unwrap(), g);
        assert_eq!(
            g.affine_transform(0, int(2), int(0))
                .unwrap()
                .payoff(&p00, 0)
                .unwrap(),
            int(8)
        );
        assert_eq!(
            g.affine_transform(0, int(1), int(-4))
                .unwrap()
                .payoff(&p00, 0)
                .unwrap(),
            int(0)
        );
        assert_eq!(
            g.affine_transform(0, int(2), int(0))
                .unwrap()
                .payoff(&p00, 1)
                .unwrap(),
            int(0)
        );
        assert!(g.affine_transform(0, int(0), int(0)).is_err());
        assert!(g.affine_transform(0, int(-1), int(0)).is_err());
    }

    #[test]
    fn out_of_range_is_input_error() {
        let g = example();
        assert!(matches!(
            g.payoff(&StrategyProfile(vec![2, 0]), 0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            g.payoff(&StrategyProfile(vec![0, 0]), 2),
            Err(Error::InvalidInput(_))
        ));
        assert!(g.payoff(&StrategyProfile(vec![0]), 0).is_err());
    }

    #[test]
    fn materialize_keeps_payoffs() {
        let lazy = Game::from_rule(
            vec![3, 2],
            Arc::new(|c: &[usize], p: usize| int((c[0] * 10 + c[1] + p) as i64)),
        )
        .unwrap();
        let dense = lazy.materialize(DEFAULT_DENSE_CAP);
        assert!(dense.is_dense());
        assert_eq!(dense, lazy);
        assert!(!lazy.materialize(2).is_dense());
    }
}
