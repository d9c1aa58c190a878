//! Weak dominance and rational (non-weakly-dominated) strategy sets.
//!
//! Dominance is always checked against the opponents' full profile space
//! unless a caller explicitly iterates elimination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;
use crate::regret::{OpponentRestriction, RestrictionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub strategy: usize,
    /// Lowest-index dominating strategy.
    pub dominated_by: usize,
}

/// `Rat(S_i)` together with the eliminated strategies and their witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalSet {
    pub player: usize,
    pub allowed: Vec<usize>,
    pub eliminated: Vec<Elimination>,
}

fn dominates(a: &[i128], b: &[i128]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

/// True iff `s` is never worse than `s_prime` and strictly better somewhere.
pub fn weakly_dominates(game: &Game, player: usize, s: usize, s_prime: usize) -> Result<bool> {
    game.check_strategy(player, s)?;
    game.check_strategy(player, s_prime)?;
    let full = OpponentRestriction::full(game);
    let rows = game.rows(player, &[s, s_prime], &full.allowed)?;
    Ok(dominates(&rows.values[0], &rows.values[1]))
}

/// One elimination round for `player` within `sets` (own candidates are
/// `sets[player]`, opponents range over their entries).
fn eliminate_within(game: &Game, player: usize, sets: &[Vec<usize>]) -> Result<RationalSet> {
    let own = &sets[player];
    let rows = game.rows(player, own, sets)?;
    let mut allowed = Vec::new();
    let mut eliminated = Vec::new();
    for (r, &s) in own.iter().enumerate() {
        let witness =
            (0..own.len()).find(|&w| w != r && dominates(&rows.values[w], &rows.values[r]));
        match witness {
            Some(w) => eliminated.push(Elimination {
                strategy: s,
                dominated_by: own[w],
            }),
            None => allowed.push(s),
        }
    }
    Ok(RationalSet {
        player,
        allowed,
        eliminated,
    })
}

/// Strategies of `player` not weakly dominated by another own strategy.
pub fn rational_set(game: &Game, player: usize) -> Result<RationalSet> {
    game.check_player(player)?;
    let full = OpponentRestriction::full(game);
    eliminate_within(game, player, &full.allowed)
}

/// Repeats elimination on the surviving strategies for up to `rounds` rounds
/// or until nothing changes. All players are updated simultaneously each
/// round against the previous round's survivors; round one is exactly
/// [`rational_set`] for every player.
pub fn iterated_rational_sets(game: &Game, rounds: usize) -> Result<Vec<RationalSet>> {
    if rounds == 0 {
        return Err(Error::invalid(
            "iterated elimination needs at least one round",
        ));
    }
    let n = game.player_count();
    let mut sets = OpponentRestriction::full(game).allowed;
    let mut eliminated: Vec<Vec<Elimination>> = vec![Vec::new(); n];
    for _ in 0..rounds {
        let next: Vec<RationalSet> = (0..n)
            .map(|p| eliminate_within(game, p, &sets))
            .collect::<Result<_>>()?;
        let changed = next.iter().any(|r| !r.eliminated.is_empty());
        for r in next {
            eliminated[r.player].extend(r.eliminated);
            sets[r.player] = r.allowed;
        }
        if !changed {
            break;
        }
    }
    Ok(sets
        .into_iter()
        .zip(eliminated)
        .enumerate()
        .map(|(player, (allowed, mut eliminated))| {
            eliminated.sort_by_key(|e| e.strategy);
            RationalSet {
                player,
                allowed,
                eliminated,
            }
        })
        .collect())
}

/// `Rat(S_j)` for every player, packaged as a restriction.
pub fn rational_restriction(game: &Game) -> Result<OpponentRestriction> {
    let allowed = (0..game.player_count())
        .map(|p| rational_set(game, p).map(|r| r.allowed))
        .collect::<Result<_>>()?;
    OpponentRestriction::with_kind(game, RestrictionKind::Rational, allowed)
}

/// Survivors of `rounds` rounds of iterated elimination as a restriction.
pub fn iterated_rational_restriction(game: &Game, rounds: usize) -> Result<OpponentRestriction> {
    let allowed = iterated_rational_sets(game, rounds)?
        .into_iter()
        .map(|r| r.allowed)
        .collect();
    OpponentRestriction::with_kind(game, RestrictionKind::Rational, allowed)
}
