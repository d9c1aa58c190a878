//! Deterministic fixtures shared by the solver benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratcomp_core::rational::int;
use ratcomp_core::repeated::GameSequence;
use ratcomp_core::trading::TradingSpec;
use ratcomp_core::{BiddingSpec, Game};

/// Dense game with `counts` strategies per player and payoffs in `-20..=20`.
pub fn random_game(counts: &[usize], seed: u64) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = counts.iter().product::<usize>() * counts.len();
    let payoffs = (0..cells).map(|_| int(rng.gen_range(-20..=20))).collect();
    Game::from_flat(counts.to_vec(), payoffs).expect("consistent dimensions")
}

pub fn bidding_spec(l: &[i64], t: i64, k: usize) -> BiddingSpec {
    BiddingSpec::new(l.to_vec(), t, k).expect("valid spec")
}

/// A 2x2 stage game meeting the folk-strategy payoff condition, repeated `times` times.
pub fn folk_sequence(times: usize) -> GameSequence {
    let cells = [10, 10, 4, 1, 1, 4, 0, 0].map(int).to_vec();
    let stage = Game::from_flat(vec![2, 2], cells).expect("2x2");
    GameSequence::repeated(&stage, times).expect("non-empty")
}

pub fn trading_spec(big_m: i64, t: usize) -> TradingSpec {
    TradingSpec::new(1, big_m, 2, big_m, t, 1).expect("valid spec")
}
