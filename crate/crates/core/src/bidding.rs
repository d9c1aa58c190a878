//! k-price bidding games and the closed-form claims about their
//! competitive and rationally competitive bids.
//!
//! Bids are integers `0..=T`; strategy index equals the bid.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dominance::rational_restriction;
use crate::error::{Error, Result};
use crate::game::{Game, DEFAULT_DENSE_CAP};
use crate::rational::{ceil_int, ratio, Rational};
use crate::regret::{minimax_regret, OpponentRestriction, RegretReport};

/// Valuations `l` on a grid of size `T`, winner pays the `k`-th highest bid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BiddingSpec {
    pub l: Vec<i64>,
    #[serde(rename = "T")]
    pub t: i64,
    pub k: usize,
}

impl BiddingSpec {
    pub fn new(l: Vec<i64>, t: i64, k: usize) -> Result<Self> {
        let spec = BiddingSpec { l, t, k };
        spec.validate()?;
        Ok(spec)
    }

    pub fn players(&self) -> usize {
        self.l.len()
    }

    /// Checks the standing assumptions on `(l, T, k)`.
    pub fn validate(&self) -> Result<()> {
        let n = self.l.len();
        if n < 2 {
            return Err(Error::Assumption(format!("need n >= 2 bidders, got {n}")));
        }
        if self.k < 1 || self.k > n {
            return Err(Error::Assumption(format!(
                "price rank k={} must lie in 1..={n}",
                self.k
            )));
        }
        if self.t < n as i64 {
            return Err(Error::Assumption(format!(
                "T >= n violated: T={}, n={n}",
                self.t
            )));
        }
        for (i, &li) in self.l.iter().enumerate() {
            if li < 2 || li >= self.t {
                return Err(Error::Assumption(format!(
                    "2 <= l_i < T violated for player {i}: l={li}, T={}",
                    self.t
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.l[i] == self.l[j] {
                    return Err(Error::Assumption(format!(
                        "valuations must be distinct: players {i} and {j} both have l={}",
                        self.l[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for BiddingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<String> = self.l.iter().map(i64::to_string).collect();
        write!(f, "l=({}) T={} k={}", l.join(","), self.t, self.k)
    }
}

fn utility_unchecked(l: &[i64], t: i64, k: usize, bids: &[usize], player: usize) -> Rational {
    let top = *bids.iter().max().expect("nonempty");
    if bids[player] != top {
        return Rational::from_integer(0);
    }
    let ties = bids.iter().filter(|&&b| b == top).count() as i64;
    let mut sorted = bids.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let price = sorted[k - 1] as i64;
    ratio(l[player] - price, t * ties)
}

/// Winner-takes payoff `(x_i - b_[k]/T) / M(b)` for top bidders, 0 otherwise.
pub fn bidding_utility(spec: &BiddingSpec, bids: &[i64], player: usize) -> Result<Rational> {
    if bids.len() != spec.players() {
        return Err(Error::invalid(format!(
            "expected {} bids, got {}",
            spec.players(),
            bids.len()
        )));
    }
    if player >= spec.players() {
        return Err(Error::invalid(format!("player {player} out of range")));
    }
    if spec.k < 1 || spec.k > spec.players() || spec.t <= 0 {
        return Err(Error::invalid(format!("malformed spec {spec}")));
    }
    let mut idx = Vec::with_capacity(bids.len());
    for (i, &b) in bids.iter().enumerate() {
        if b < 0 || b > spec.t {
            return Err(Error::invalid(format!(
                "bid {b} of player {i} outside [0, {}]",
                spec.t
            )));
        }
        idx.push(b as usize);
    }
    Ok(utility_unchecked(&spec.l, spec.t, spec.k, &idx, player))
}

/// The `n`-player game with bids `0..=T` for everyone.
pub fn make_bidding_game(spec: &BiddingSpec) -> Result<Game> {
    spec.validate()?;
    let (l, t, k) = (spec.l.clone(), spec.t, spec.k);
    let counts = vec![(t + 1) as usize; spec.players()];
    let rule = Arc::new(move |bids: &[usize], p: usize| utility_unchecked(&l, t, k, bids, p));
    let labels = (0..spec.players())
        .map(|_| (0..=t).map(|b| b.to_string()).collect())
        .collect();
    Ok(Game::from_rule(counts, rule)?
        .with_labels(labels)?
        .materialize(DEFAULT_DENSE_CAP))
}

/// Which closed-form statement a prediction comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClaimId {
    /// First price, plain regret value.
    #[serde(rename = "C3.1")]
    FirstPricePlain,
    /// Second price, plain: truthful bid, zero regret.
    #[serde(rename = "C3.2")]
    SecondPricePlain,
    /// Third price, plain: bid `min(2 l_j, T)`.
    #[serde(rename = "C3.3")]
    ThirdPricePlain,
    /// First price, rational regret value.
    #[serde(rename = "C4.1")]
    FirstPriceRational,
    /// Second price, rational: truthful bid, zero regret.
    #[serde(rename = "C4.2")]
    SecondPriceRational,
    /// Third price, rational bids.
    #[serde(rename = "C4.3")]
    ThirdPriceRational,
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClaimId::FirstPricePlain => "C3.1",
            ClaimId::SecondPricePlain => "C3.2",
            ClaimId::ThirdPricePlain => "C3.3",
            ClaimId::FirstPriceRational => "C4.1",
            ClaimId::SecondPriceRational => "C4.2",
            ClaimId::ThirdPriceRational => "C4.3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimPrediction {
    pub player: usize,
    pub predicted_bid: Option<i64>,
    #[serde(with = "crate::rational::opt_as_string")]
    pub predicted_regret: Option<Rational>,
    pub source: ClaimId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisMode {
    Plain,
    Rational,
}

impl fmt::Display for AnalysisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalysisMode::Plain => "plain",
            AnalysisMode::Rational => "rational",
        })
    }
}

fn check_closed_form(spec: &BiddingSpec, player: usize) -> Result<bool> {
    spec.validate()?;
    if player >= spec.players() {
        return Err(Error::invalid(format!("player {player} out of range")));
    }
    Ok((1..=3).contains(&spec.k))
}

/// Closed-form competitive prediction, or `None` when no formula covers `k`.
pub fn closed_form_competitive(
    spec: &BiddingSpec,
    player: usize,
) -> Result<Option<ClaimPrediction>> {
    if !check_closed_form(spec, player)? {
        return Ok(None);
    }
    let (li, t) = (spec.l[player], spec.t);
    let p = match spec.k {
        1 => ClaimPrediction {
            player,
            predicted_bid: None,
            predicted_regret: Some(ratio(ceil_int(&ratio(li - 1, 2)), t)),
            source: ClaimId::FirstPricePlain,
        },
        2 => ClaimPrediction {
            player,
            predicted_bid: Some(li),
            predicted_regret: Some(Rational::from_integer(0)),
            source: ClaimId::SecondPricePlain,
        },
        _ => ClaimPrediction {
            player,
            predicted_bid: Some((2 * li).min(t)),
            predicted_regret: None,
            source: ClaimId::ThirdPricePlain,
        },
    };
    Ok(Some(p))
}

/// Closed-form rationally competitive prediction, or `None` when no formula covers `k`.
pub fn closed_form_rational(spec: &BiddingSpec, player: usize) -> Result<Option<ClaimPrediction>> {
    if !check_closed_form(spec, player)? {
        return Ok(None);
    }
    let (li, t) = (spec.l[player], spec.t);
    let p = match spec.k {
        1 => {
            let best_other = spec
                .l
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != player)
                .map(|(_, &v)| v)
                .max()
                .expect("n >= 2");
            ClaimPrediction {
                player,
                predicted_bid: None,
                predicted_regret: Some(ratio(ceil_int(&ratio(li.min(best_other) - 2, 2)), t)),
                source: ClaimId::FirstPriceRational,
            }
        }
        2 => ClaimPrediction {
            player,
            predicted_bid: Some(li),
            predicted_regret: Some(Rational::from_integer(0)),
            source: ClaimId::SecondPriceRational,
        },
        _ => {
            let mut ranked = spec.l.clone();
            ranked.sort_unstable_by(|a, b| b.cmp(a));
            let third = ranked[2];
            if li >= ranked[1] {
                ClaimPrediction {
                    player,
                    predicted_bid: Some((2 * li - third).min(t)),
                    predicted_regret: None,
                    source: ClaimId::ThirdPriceRational,
                }
            } else {
                ClaimPrediction {
                    player,
                    predicted_bid: Some(li),
                    predicted_regret: Some(Rational::from_integer(0)),
                    source: ClaimId::ThirdPriceRational,
                }
            }
        }
    };
    Ok(Some(p))
}

/// One (player, mode) comparison of a closed form against the solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceEntry {
    pub player: usize,
    pub mode: AnalysisMode,
    pub predicted: ClaimPrediction,
    #[serde(with = "crate::rational::as_string")]
    pub oracle_minimax: Rational,
    pub oracle_argmin: Vec<usize>,
    /// `None` when the prediction carries no regret value.
    pub regret_match: Option<bool>,
    /// `None` when the prediction carries no bid.
    pub bid_match: Option<bool>,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub spec: BiddingSpec,
    pub entries: Vec<DivergenceEntry>,
}

impl DivergenceReport {
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| e.matched)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &DivergenceEntry> {
        self.entries.iter().filter(|e| !e.matched)
    }

    /// Aligned-column text rendering.
    pub fn to_table(&self) -> String {
        let header = [
            "player",
            "mode",
            "claim",
            "pred_bid",
            "pred_regret",
            "oracle_regret",
            "oracle_argmin",
            "match",
        ];
        let rows: Vec<[String; 8]> = self
            .entries
            .iter()
            .map(|e| {
                [
                    e.player.to_string(),
                    e.mode.to_string(),
                    e.predicted.source.to_string(),
                    e.predicted
                        .predicted_bid
                        .map_or("-".into(), |b| b.to_string()),
                    e.predicted
                        .predicted_regret
                        .map_or("-".into(), |r| r.to_string()),
                    e.oracle_minimax.to_string(),
                    format_set(&e.oracle_argmin),
                    if e.matched { "yes" } else { "NO" }.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.spec);
        let line = |cells: Vec<&str>, out: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(header.to_vec(), &mut out);
        for r in &rows {
            line(r.iter().map(String::as_str).collect(), &mut out);
        }
        out
    }
}

/// Compact rendering of a sorted index set, collapsing runs: `{1..5,8}`.
pub fn format_set(set: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < set.len() {
        let mut j = i;
        while j + 1 < set.len() && set[j + 1] == set[j] + 1 {
            j += 1;
        }
        if j > i {
            parts.push(format!("{}..{}", set[i], set[j]));
        } else {
            parts.push(set[i].to_string());
        }
        i = j + 1;
    }
    format!("{{{}}}", parts.join(","))
}

fn compare(
    prediction: ClaimPrediction,
    mode: AnalysisMode,
    oracle: &RegretReport,
) -> DivergenceEntry {
    let regret_match = prediction
        .predicted_regret
        .map(|r| r == oracle.minimax_value);
    let bid_match = prediction
        .predicted_bid
        .map(|b| b >= 0 && oracle.contains(b as usize));
    DivergenceEntry {
        player: prediction.player,
        mode,
        matched: regret_match.unwrap_or(true) && bid_match.unwrap_or(true),
        predicted: prediction,
        oracle_minimax: oracle.minimax_value,
        oracle_argmin: oracle.argmin_set.clone(),
        regret_match,
        bid_match,
    }
}

/// Solver reports for every player in both modes, in player order.
pub fn oracle_reports(spec: &BiddingSpec) -> Result<Vec<(RegretReport, RegretReport)>> {
    let game = make_bidding_game(spec)?;
    let full = OpponentRestriction::full(&game);
    let rat = rational_restriction(&game)?;
    (0..spec.players())
        .map(|p| {
            Ok((
                minimax_regret(&game, p, &full)?,
                minimax_regret(&game, p, &rat)?,
            ))
        })
        .collect()
}

/// Compares every closed form against brute-force minimax regret.
/// Mismatches are recorded, never raised.
pub fn verify_claims(spec: &BiddingSpec) -> Result<DivergenceReport> {
    spec.validate()?;
    if !(1..=3).contains(&spec.k) {
        return Err(Error::invalid(format!("no closed form for k={}", spec.k)));
    }
    let reports = oracle_reports(spec)?;
    let mut entries = Vec::with_capacity(2 * spec.players());
    for (p, (plain, rational)) in reports.iter().enumerate() {
        let pred = closed_form_competitive(spec, p)?.expect("k checked");
        entries.push(compare(pred, AnalysisMode::Plain, plain));
        let pred = closed_form_rational(spec, p)?.expect("k checked");
        entries.push(compare(pred, AnalysisMode::Rational, rational));
    }
    Ok(DivergenceReport {
        spec: spec.clone(),
        entries,
    })
}
