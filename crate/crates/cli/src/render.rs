//! Report rendering in JSON, CSV and text.

use clap::ValueEnum;
use serde_json::{json, Value};

use ratcomp_core::bidding::format_set;
use ratcomp_core::io::BiddingManifest;
use ratcomp_core::repeated::FolkReport;
use ratcomp_core::trading::{OracleVerdict, Simulation, SingleAgentAudit};
use ratcomp_core::{BiddingSpec, DivergenceReport, Game, RationalSet, RegretReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("values serialize")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn labelled(game: &Game, player: usize, set: &[usize]) -> Option<Vec<String>> {
    game.labels()?;
    Some(
        set.iter()
            .map(|&s| game.label(player, s).unwrap_or_default().to_string())
            .collect(),
    )
}

fn report_json(game: &Game, r: &RegretReport) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    let obj = v.as_object_mut().expect("object");
    obj.insert("canonical_pick".into(), json!(r.canonical_pick()));
    if let Some(l) = labelled(game, r.player, &r.argmin_set) {
        obj.insert("argmin_labels".into(), json!(l));
    }
    v
}

fn report_row(r: &RegretReport) -> Vec<String> {
    vec![
        r.player.to_string(),
        r.restriction.to_string(),
        r.minimax_value.to_string(),
        format_set(&r.argmin_set),
        r.canonical_pick().to_string(),
        join(&r.per_strategy_worst_regret),
    ]
}

const REPORT_HEADER: [&str; 6] = [
    "player",
    "restriction",
    "minimax_regret",
    "argmin",
    "canonical_pick",
    "worst_regret_per_strategy",
];

fn report_text(r: &RegretReport) -> String {
    format!(
        "player {} [{}]: minimax regret {}, argmin {}, canonical pick {}\n",
        r.player,
        r.restriction,
        r.minimax_value,
        format_set(&r.argmin_set),
        r.canonical_pick()
    )
}

pub fn regret_reports(
    game: &Game,
    input: Value,
    reports: &[RegretReport],
    format: Format,
) -> String {
    match format {
        Format::Json => pretty(&json!({
            "input": input,
            "reports": reports.iter().map(|r| report_json(game, r)).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_table(&REPORT_HEADER, reports.iter().map(report_row)),
        Format::Text => reports.iter().map(report_text).collect(),
    }
}

pub fn rational_sets(game: &Game, input: Value, sets: &[RationalSet], format: Format) -> String {
    match format {
        Format::Json => {
            let sets: Vec<Value> = sets
                .iter()
                .map(|s| {
                    let mut v = serde_json::to_value(s).expect("sets serialize");
                    if let Some(l) = labelled(game, s.player, &s.allowed) {
                        v.as_object_mut()
                            .expect("object")
                            .insert("allowed_labels".into(), json!(l));
                    }
                    v
                })
                .collect();
            pretty(&json!({"input": input, "rational_sets": sets}))
        }
        Format::Csv => csv_table(
            &["player", "allowed", "eliminated"],
            sets.iter().map(|s| {
                vec![
                    s.player.to_string(),
                    format_set(&s.allowed),
                    s.eliminated
                        .iter()
                        .map(|e| format!("{}<{}", e.strategy, e.dominated_by))
                        .collect::<Vec<_>>()
                        .join(" "),
                ]
            }),
        ),
        Format::Text => sets
            .iter()
            .map(|s| {
                let mut line = format!("player {}: Rat = {}", s.player, format_set(&s.allowed));
                for e in &s.eliminated {
                    line += &format!("; {} dominated by {}", e.strategy, e.dominated_by);
                }
                line + "\n"
            })
            .collect(),
    }
}

pub fn bidding(
    spec: &BiddingSpec,
    game: &Game,
    reports: &[RegretReport],
    claims: Option<&DivergenceReport>,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            let mut v = json!({
                "spec": spec,
                "reports": reports.iter().map(|r| report_json(game, r)).collect::<Vec<_>>(),
            });
            if let Some(c) = claims {
                let obj = v.as_object_mut().expect("object");
                obj.insert("all_match".into(), json!(c.all_match()));
                obj.insert(
                    "claims".into(),
                    serde_json::to_value(&c.entries).expect("entries serialize"),
                );
            }
            pretty(&v)
        }
        Format::Csv => {
            let mut s = csv_table(&REPORT_HEADER, reports.iter().map(report_row));
            if let Some(c) = claims {
                s.push('\n');
                s += &claims_csv(std::slice::from_ref(c));
            }
            s
        }
        Format::Text => {
            let mut s = format!("{spec}\n");
            s += &reports.iter().map(report_text).collect::<String>();
            if let Some(c) = claims {
                s.push('\n');
                s += &c.to_table();
                s += if c.all_match() {
                    "all closed forms match\n"
                } else {
                    "closed forms diverge\n"
                };
            }
            s
        }
    }
}

fn claims_csv(reports: &[DivergenceReport]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    csv_table(
        &[
            "spec",
            "player",
            "mode",
            "claim",
            "pred_bid",
            "pred_regret",
            "oracle_regret",
            "oracle_argmin",
            "match",
        ],
        reports.iter().flat_map(|r| {
            r.entries.iter().map(move |e| {
                vec![
                    r.spec.to_string(),
                    e.player.to_string(),
                    serde_json::to_value(e.mode)
                        .expect("mode")
                        .as_str()
                        .unwrap_or_default()
                        .to_string(),
                    serde_json::to_value(e.predicted.source)
                        .expect("claim")
                        .as_str()
                        .unwrap_or_default()
                        .to_string(),
                    opt(e.predicted.predicted_bid.map(|b| b.to_string())),
                    opt(e.predicted.predicted_regret.map(|r| r.to_string())),
                    e.oracle_minimax.to_string(),
                    format_set(&e.oracle_argmin),
                    e.matched.to_string(),
                ]
            })
        }),
    )
}

pub fn divergences(
    manifest: &BiddingManifest,
    reports: &[DivergenceReport],
    format: Format,
) -> String {
    match format {
        Format::Json => pretty(&json!({
            "manifest": manifest,
            "all_match": reports.iter().all(DivergenceReport::all_match),
            "reports": reports,
        })),
        Format::Csv => claims_csv(reports),
        Format::Text => reports
            .iter()
            .map(|r| {
                let verdict = if r.all_match() {
                    "all match"
                } else {
                    "diverges"
                };
                format!("{} ({verdict})\n{}\n", r.spec, r.to_table())
            })
            .collect(),
    }
}

pub fn folk(input: Value, report: &FolkReport, format: Format) -> String {
    match format {
        Format::Json => pretty(&json!({
            "input": input,
            "mode": report.mode,
            "all_passed": report.all_passed(),
            "entries": report.entries,
        })),
        Format::Csv => csv_table(
            &[
                "realization",
                "player",
                "stage_picks",
                "passed",
                "failures",
                "first_failure",
            ],
            report.entries.iter().map(|e| {
                vec![
                    join(&e.realization),
                    e.player.to_string(),
                    join(&e.stage_picks),
                    e.passed.to_string(),
                    e.failures.len().to_string(),
                    e.failures
                        .first()
                        .map(|f| {
                            format!(
                                "start {} history {}: {} > {}",
                                f.start, f.history, f.continuation_regret, f.minimax_regret
                            )
                        })
                        .unwrap_or_default(),
                ]
            }),
        ),
        Format::Text => {
            let mut s = String::new();
            for e in &report.entries {
                s += &format!(
                    "realization [{}] player {}: picks [{}] {}\n",
                    join(&e.realization),
                    e.player,
                    join(&e.stage_picks),
                    if e.passed {
                        "competitive in all subgames".to_string()
                    } else {
                        format!("{} subgame failures", e.failures.len())
                    }
                );
                for f in &e.failures {
                    s += &format!(
                        "  subgame from iteration {} after history {}: regret {} > minimax {}\n",
                        f.start + 1,
                        f.history,
                        f.continuation_regret,
                        f.minimax_regret
                    );
                }
            }
            s
        }
    }
}

pub fn trading(
    header: Value,
    simulation: Option<&Simulation>,
    verdicts: &[OracleVerdict],
    audit: Option<&SingleAgentAudit>,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            let mut lines = vec![compact(&header)];
            if let Some(sim) = simulation {
                lines.extend(
                    sim.trace
                        .iter()
                        .map(|r| compact(&serde_json::to_value(r).expect("trace"))),
                );
                lines.push(compact(&json!({"outcome": sim.outcome})));
            }
            lines.extend(verdicts.iter().map(|v| compact(&json!({"oracle": v}))));
            if let Some(a) = audit {
                lines.push(compact(&json!({"single_agent_audit": a})));
            }
            lines.join("\n") + "\n"
        }
        Format::Csv => {
            let mut parts = Vec::new();
            if let Some(sim) = simulation {
                parts.push(csv_table(
                    &[
                        "iteration",
                        "a1",
                        "a2",
                        "action1",
                        "action2",
                        "payoff1",
                        "payoff2",
                    ],
                    sim.trace.iter().map(|r| {
                        let act = |i: usize| format!("{:?}", r.actions[i]).to_uppercase();
                        vec![
                            r.iteration.to_string(),
                            r.announcements[0].to_string(),
                            r.announcements[1].to_string(),
                            act(0),
                            act(1),
                            r.running_payoffs[0].to_string(),
                            r.running_payoffs[1].to_string(),
                        ]
                    }),
                ));
            }
            if !verdicts.is_empty() {
                parts.push(csv_table(
                    &[
                        "player",
                        "mode",
                        "strategy",
                        "strategy_regret",
                        "minimal_regret",
                        "optimal",
                    ],
                    verdicts.iter().map(|v| {
                        vec![
                            v.player.to_string(),
                            v.mode.to_string(),
                            v.strategy.clone(),
                            v.strategy_regret.to_string(),
                            v.minimal_regret.to_string(),
                            v.optimal.to_string(),
                        ]
                    }),
                ));
            }
            if let Some(a) = audit {
                parts.push(csv_table(
                    &[
                        "M",
                        "m",
                        "t",
                        "stated_threshold",
                        "stated_regret",
                        "optimal_thresholds",
                        "optimal_regret",
                        "midpoint_regret",
                    ],
                    [vec![
                        a.big_m.to_string(),
                        a.m.to_string(),
                        a.t.to_string(),
                        a.stated_threshold.to_string(),
                        a.stated_threshold_regret.to_string(),
                        join(&a.optimal_thresholds),
                        a.optimal_threshold_regret.to_string(),
                        a.midpoint_regret.to_string(),
                    ]],
                ));
            }
            if parts.is_empty() {
                parts.push(csv_table(
                    &["player", "rule"],
                    header["strategies"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(|s| {
                            vec![
                                s["player"].to_string(),
                                s["rule"].as_str().unwrap_or_default().to_string(),
                            ]
                        }),
                ));
            }
            parts.join("\n")
        }
        Format::Text => {
            let mut s = String::new();
            for st in header["strategies"].as_array().into_iter().flatten() {
                s += &format!(
                    "agent {}: {}\n",
                    st["player"].as_u64().unwrap_or(0) + 1,
                    st["rule"].as_str().unwrap_or_default()
                );
            }
            if let Some(sim) = simulation {
                for r in &sim.trace {
                    s += &format!(
                        "iteration {}: a=({}, {}) actions=({:?}, {:?}) payoffs=({}, {})\n",
                        r.iteration,
                        r.announcements[0],
                        r.announcements[1],
                        r.actions[0],
                        r.actions[1],
                        r.running_payoffs[0],
                        r.running_payoffs[1]
                    );
                }
            }
            for v in verdicts {
                s += &format!(
                    "agent {} [{}]: strategy regret {}, optimum {} ({})\n",
                    v.player + 1,
                    v.mode,
                    v.strategy_regret,
                    v.minimal_regret,
                    if v.optimal { "optimal" } else { "not optimal" }
                );
            }
            if let Some(a) = audit {
                s += &format!(
                    "single agent on [{}, {}], t={}: {}\n",
                    a.m, a.big_m, a.t, a.verdict
                );
            }
            s
        }
    }
}
