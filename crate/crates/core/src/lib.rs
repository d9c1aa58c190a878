//! Competitive (minimax-regret) and rationally competitive strategies for
//! finite games, with k-price bidding games, repeated and random game
//! sequences, and two-agent one-way trading.

pub mod bidding;
pub mod dominance;
pub mod error;
pub mod game;
pub mod io;
pub mod rational;
pub mod regret;
pub mod repeated;
pub mod trading;

pub use bidding::{
    bidding_utility, closed_form_competitive, closed_form_rational, make_bidding_game,
    verify_claims, AnalysisMode, BiddingSpec, ClaimId, ClaimPrediction, DivergenceEntry,
    DivergenceReport,
};
pub use dominance::{
    iterated_rational_restriction, iterated_rational_sets, rational_restriction, rational_set,
    weakly_dominates, Elimination, RationalSet,
};
pub use error::{Error, Result};
pub use game::{make_dense_game, Game, OpponentProfile, PayoffTable, StrategyProfile};
pub use rational::Rational;
pub use regret::{
    all_player_reports, minimax_regret, regret, worst_case_regret, OpponentRestriction,
    RegretReport, RestrictionKind,
};
