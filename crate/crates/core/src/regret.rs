//! Additive regret and minimax-regret (competitive) strategy sets.

use serde::{Deserialize, Serialize};

use crate::dominance;
use crate::error::{Error, Result};
use crate::game::{Game, OpponentProfile, StrategyProfile};
use crate::rational::{unscale, Rational};

/// Which opponent profiles the inner maximum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestrictionKind {
    /// Every opponent profile.
    Full,
    /// Opponents restricted to their non-weakly-dominated strategies.
    Rational,
    /// Caller-supplied sets.
    Explicit,
}

impl std::fmt::Display for RestrictionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RestrictionKind::Full => "full",
            RestrictionKind::Rational => "rational",
            RestrictionKind::Explicit => "explicit",
        })
    }
}

/// Allowed strategy sets, one per player. When analysing player `i` the
/// entry for `i` is ignored: own candidates always range over the full set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentRestriction {
    pub kind: RestrictionKind,
    pub allowed: Vec<Vec<usize>>,
}

impl OpponentRestriction {
    pub fn full(game: &Game) -> Self {
        OpponentRestriction {
            kind: RestrictionKind::Full,
            allowed: game
                .strategy_counts()
                .iter()
                .map(|&c| (0..c).collect())
                .collect(),
        }
    }

    /// Validated caller-supplied sets; indices are sorted and deduplicated.
    pub fn explicit(game: &Game, allowed: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_kind(game, RestrictionKind::Explicit, allowed)
    }

    pub(crate) fn with_kind(
        game: &Game,
        kind: RestrictionKind,
        mut allowed: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if allowed.len() != game.player_count() {
            return Err(Error::invalid(format!(
                "restriction lists {} players, game has {}",
                allowed.len(),
                game.player_count()
            )));
        }
        for (p, set) in allowed.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            for &s in set.iter() {
                game.check_strategy(p, s)?;
            }
        }
        Ok(OpponentRestriction { kind, allowed })
    }

    fn check_for(&self, game: &Game, player: usize) -> Result<()> {
        if self.allowed.len() != game.player_count() {
            return Err(Error::invalid(
                "restriction does not match the game's player count",
            ));
        }
        for (p, set) in self.allowed.iter().enumerate() {
            if p == player {
                continue;
            }
            if set.is_empty() {
                return Err(Error::invalid(format!(
                    "restriction leaves opponent {p} with no strategies"
                )));
            }
            for &s in set {
                game.check_strategy(p, s)?;
            }
        }
        Ok(())
    }
}

/// Worst-case regret of every own strategy and the minimising set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegretReport {
    pub player: usize,
    pub restriction: RestrictionKind,
    #[serde(rename = "minimax_regret", with = "crate::rational::as_string")]
    pub minimax_value: Rational,
    #[serde(rename = "argmin")]
    pub argmin_set: Vec<usize>,
    #[serde(
        rename = "worst_regret_per_strategy",
        with = "crate::rational::vec_as_string"
    )]
    pub per_strategy_worst_regret: Vec<Rational>,
}

impl RegretReport {
    /// Lowest-index member of the argmin set.
    pub fn canonical_pick(&self) -> usize {
        self.argmin_set[0]
    }

    pub fn contains(&self, strategy: usize) -> bool {
        self.argmin_set.binary_search(&strategy).is_ok()
    }
}

/// `max_t U_i(t, s_-i) - U_i(s)`.
pub fn regret(game: &Game, player: usize, profile: &StrategyProfile) -> Result<Rational> {
    game.check_profile(profile)?;
    let q = OpponentProfile::of(profile, player);
    let best = game.best_response_value(player, &q)?;
    Ok(best - game.payoff_at(&profile.0, player))
}

/// Largest regret of `own_strategy` over opponent profiles drawn from `restriction`.
pub fn worst_case_regret(
    game: &Game,
    player: usize,
    own_strategy: usize,
    restriction: &OpponentRestriction,
) -> Result<Rational> {
    game.check_strategy(player, own_strategy)?;
    let report = minimax_regret(game, player, restriction)?;
    Ok(report.per_strategy_worst_regret[own_strategy])
}

/// Competitive strategies of `player` against `restriction`.
///
/// Best responses are computed once per opponent profile and shared by all
/// candidate strategies.
pub fn minimax_regret(
    game: &Game,
    player: usize,
    restriction: &OpponentRestriction,
) -> Result<RegretReport> {
    game.check_player(player)?;
    restriction.check_for(game, player)?;
    let own: Vec<usize> = (0..game.strategy_count(player)).collect();
    let rows = game.rows(player, &own, &restriction.allowed)?;

    let cols = rows.opponents.len();
    let mut worst = vec![i128::MIN; own.len()];
    for c in 0..cols {
        let best = rows.values.iter().map(|r| r[c]).max().expect("nonempty");
        for (w, r) in worst.iter_mut().zip(&rows.values) {
            *w = (*w).max(best - r[c]);
        }
    }
    let min = *worst.iter().min().expect("nonempty");
    let argmin_set = worst
        .iter()
        .enumerate()
        .filter(|(_, &w)| w == min)
        .map(|(s, _)| s)
        .collect();
    Ok(RegretReport {
        player,
        restriction: restriction.kind,
        minimax_value: unscale(min, rows.den)?,
        argmin_set,
        per_strategy_worst_regret: worst
            .iter()
            .map(|&w| unscale(w, rows.den))
            .collect::<Result<_>>()?,
    })
}

/// One report per player under the given restriction mode.
pub fn all_player_reports(game: &Game, mode: RestrictionKind) -> Result<Vec<RegretReport>> {
    let restriction = match mode {
        RestrictionKind::Full => OpponentRestriction::full(game),
        RestrictionKind::Rational => dominance::rational_restriction(game)?,
        RestrictionKind::Explicit => {
            return Err(Error::invalid(
                "explicit restrictions need caller-supplied sets",
            ))
        }
    };
    (0..game.player_count())
        .map(|p| minimax_regret(game, p, &restriction))
        .collect()
}
