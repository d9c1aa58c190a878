//! JSON input formats: game files, stage sequences, random-game specs and
//! bidding manifests.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bidding::BiddingSpec;
use crate::error::{Error, Result};
use crate::game::{make_dense_game, Game, PayoffTable, DEFAULT_DENSE_CAP};
use crate::rational::{from_json, to_json};
use crate::repeated::{GameSequence, RandomGameSpec, RealizationMode};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn table_from_json(v: &Value, depth: usize, n: usize) -> Result<PayoffTable> {
    let items = v
        .as_array()
        .ok_or_else(|| parse_err(format!("payoffs at depth {depth} must be an array")))?;
    if depth == n {
        return Ok(PayoffTable::Cell(
            items.iter().map(from_json).collect::<Result<_>>()?,
        ));
    }
    Ok(PayoffTable::Axis(
        items
            .iter()
            .map(|i| table_from_json(i, depth + 1, n))
            .collect::<Result<_>>()?,
    ))
}

/// Reads a game object `{"players", "strategy_counts", "labels"?, "payoffs"}`.
pub fn game_from_json(v: &Value) -> Result<Game> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("game must be a JSON object"))?;
    let players = obj
        .get("players")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("missing integer field \"players\""))? as usize;
    let counts: Vec<usize> = obj
        .get("strategy_counts")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing array field \"strategy_counts\""))?
        .iter()
        .map(|c| {
            c.as_u64()
                .map(|c| c as usize)
                .ok_or_else(|| parse_err("strategy counts must be integers"))
        })
        .collect::<Result<_>>()?;
    if counts.len() != players {
        return Err(Error::Dimension {
            axis: "strategy_counts".into(),
            detail: format!("{} entries for {players} players", counts.len()),
        });
    }
    let payoffs = obj
        .get("payoffs")
        .ok_or_else(|| parse_err("missing field \"payoffs\""))?;
    let table = table_from_json(payoffs, 0, players)?;
    let game = make_dense_game(&counts, &table)?;
    match obj.get("labels") {
        None | Some(Value::Null) => Ok(game),
        Some(l) => {
            let labels: Vec<Vec<String>> =
                serde_json::from_value(l.clone()).map_err(|e| parse_err(format!("labels: {e}")))?;
            game.with_labels(labels)
        }
    }
}

fn table_to_json(game: &Game, prefix: &mut Vec<usize>) -> Value {
    let n = game.player_count();
    if prefix.len() == n {
        return Value::Array(
            (0..n)
                .map(|p| to_json(&game.payoff_at(prefix, p)))
                .collect(),
        );
    }
    let axis = prefix.len();
    Value::Array(
        (0..game.strategy_count(axis))
            .map(|s| {
                prefix.push(s);
                let v = table_to_json(game, prefix);
                prefix.pop();
                v
            })
            .collect(),
    )
}

/// Serializes any game small enough to tabulate.
pub fn game_to_json(game: &Game) -> Result<Value> {
    if game.profile_count() > DEFAULT_DENSE_CAP {
        return Err(Error::size_cap(
            "game file cells",
            game.profile_count(),
            DEFAULT_DENSE_CAP,
        ));
    }
    let mut obj = serde_json::Map::new();
    obj.insert("players".into(), json!(game.player_count()));
    obj.insert("strategy_counts".into(), json!(game.strategy_counts()));
    if let Some(l) = game.labels() {
        obj.insert("labels".into(), json!(l));
    }
    obj.insert("payoffs".into(), table_to_json(game, &mut Vec::new()));
    Ok(Value::Object(obj))
}

pub fn parse_game(text: &str) -> Result<Game> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    game_from_json(&v)
}

pub fn write_game(game: &Game) -> Result<String> {
    Ok(game_to_json(game)?.to_string())
}

pub fn read_game_file(path: &Path) -> Result<Game> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_game(&text)
}

/// A game given inline or as a path relative to `base`.
fn game_ref(v: &Value, base: Option<&Path>) -> Result<Game> {
    match v {
        Value::String(p) => {
            let path = match base {
                Some(b) => b.join(p),
                None => p.into(),
            };
            read_game_file(&path)
        }
        other => game_from_json(other),
    }
}

/// `{"stages": [game | "path", ...]}`.
pub fn sequence_from_json(v: &Value, base: Option<&Path>) -> Result<GameSequence> {
    let stages = v
        .get("stages")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("sequence needs a \"stages\" array"))?;
    GameSequence::new(
        stages
            .iter()
            .map(|s| game_ref(s, base))
            .collect::<Result<_>>()?,
    )
}

/// `{"pool": [...], "length": n, "mode": "exhaustive"|"sampled", "seed": s, "samples"?: k}`.
pub fn random_spec_from_json(v: &Value, base: Option<&Path>) -> Result<RandomGameSpec> {
    let pool = v
        .get("pool")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("random spec needs a \"pool\" array"))?
        .iter()
        .map(|g| game_ref(g, base))
        .collect::<Result<Vec<_>>>()?;
    let length =
        v.get("length")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err("random spec needs an integer \"length\""))? as usize;
    let mode: RealizationMode = match v.get("mode") {
        None => RealizationMode::Exhaustive,
        Some(m) => {
            serde_json::from_value(m.clone()).map_err(|e| parse_err(format!("mode: {e}")))?
        }
    };
    let seed = v.get("seed").and_then(Value::as_u64);
    if mode == RealizationMode::Sampled && seed.is_none() {
        return Err(Error::invalid("sampled mode requires an integer \"seed\""));
    }
    let samples = v.get("samples").and_then(Value::as_u64).unwrap_or(1) as usize;
    Ok(RandomGameSpec {
        pool,
        length,
        mode,
        seed,
        samples,
    })
}

/// Batch of bidding specs for claim verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiddingManifest {
    pub specs: Vec<BiddingSpec>,
}

pub fn parse_manifest(text: &str) -> Result<BiddingManifest> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("manifest: {e}")))
}

/// JSON schemas of every input format.
pub fn schemas() -> Value {
    let rational = json!({
        "oneOf": [
            {"type": "integer"},
            {"type": "string", "pattern": "^-?[0-9]+(/[0-9]+)?$"}
        ]
    });
    let game = json!({
        "type": "object",
        "required": ["players", "strategy_counts", "payoffs"],
        "properties": {
            "players": {"type": "integer", "minimum": 2},
            "strategy_counts": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "labels": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
            "payoffs": {
                "description": "one nested array level per player; innermost arrays hold one payoff per player",
                "type": "array"
            }
        },
        "definitions": {"rational": rational}
    });
    let game_ref = json!({"oneOf": [{"type": "string", "description": "path to a game file"}, {"$ref": "#/game"}]});
    json!({
        "game": game,
        "sequence": {
            "type": "object",
            "required": ["stages"],
            "properties": {"stages": {"type": "array", "minItems": 1, "items": game_ref}}
        },
        "random_spec": {
            "type": "object",
            "required": ["pool", "length"],
            "properties": {
                "pool": {"type": "array", "minItems": 1, "items": game_ref},
                "length": {"type": "integer", "minimum": 1},
                "mode": {"enum": ["exhaustive", "sampled"]},
                "seed": {"type": "integer", "minimum": 0},
                "samples": {"type": "integer", "minimum": 1}
            }
        },
        "bidding_manifest": {
            "type": "object",
            "required": ["specs"],
            "properties": {
                "specs": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["l", "T", "k"],
                        "properties": {
                            "l": {"type": "array", "items": {"type": "integer"}},
                            "T": {"type": "integer"},
                            "k": {"type": "integer", "minimum": 1}
                        }
                    }
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::StrategyProfile;
    use crate::rational::{int, ratio};

    const EXAMPLE: &str =
        r#"{"players":2,"strategy_counts":[2,2],"payoffs":[[[4,0],[0,3]],[[3,1],[3,2]]]}"#;

    #[test]
    fn reads_example() {
        let g = parse_game(EXAMPLE).unwrap();
        assert_eq!(g.payoff(&StrategyProfile(vec![0, 0]), 0).unwrap(), int(4));
        assert_eq!(write_game(&g).unwrap(), EXAMPLE);
    }

    #[test]
    fn fractions_and_labels() {
        let text = r#"{"players":2,"strategy_counts":[1,2],"labels":[["a"],["x","y"]],"payoffs":[[["1/2",0],[3,"-2/6"]]]}"#;
        let g = parse_game(text).unwrap();
        assert_eq!(
            g.payoff(&StrategyProfile(vec![0, 1]), 1).unwrap(),
            ratio(-1, 3)
        );
        assert_eq!(g.label(1, 1), Some("y"));
        let out = write_game(&g).unwrap();
        assert!(out.contains(r#""1/2""#) && out.contains(r#""-1/3""#));
        assert_eq!(parse_game(&out).unwrap(), g);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_game(
                r#"{"players":2,"strategy_counts":[2,2],"payoffs":[[[4,0],[0,3],[1,1]],[[3,1],[3,2]]]}"#
            ),
            Err(Error::Dimension { .. })
        ));
        assert!(parse_game(r#"{"players":2,"strategy_counts":[2],"payoffs":[]}"#).is_err());
        assert!(
            parse_game(r#"{"players":2,"strategy_counts":[1,1],"payoffs":[[[1.5,0]]]}"#).is_err()
        );
        assert!(parse_game("not json").is_err());
    }

    #[test]
    fn sequences_and_random_specs() {
        let g: Value = serde_json::from_str(EXAMPLE).unwrap();
        let seq = sequence_from_json(&json!({"stages": [g.clone(), g.clone()]}), None).unwrap();
        assert_eq!(seq.len(), 2);
        let r = random_spec_from_json(
            &json!({"pool": [g.clone()], "length": 2, "mode": "sampled", "seed": 3}),
            None,
        )
        .unwrap();
        assert_eq!(r.seed, Some(3));
        assert!(
            random_spec_from_json(&json!({"pool": [g], "length": 2, "mode": "sampled"}), None)
                .is_err()
        );
    }

    #[test]
    fn manifest() {
        let m = parse_manifest(r#"{"specs":[{"l":[6,4],"T":10,"k":2}]}"#).unwrap();
        assert_eq!(m.specs[0].t, 10);
    }
}
