//! Canonical JSON report emission.
//!
//! Rationals serialize as `"num/den"` strings (never floats), enclosures as
//! two-element `["lo", "hi"]` string arrays, and every report carries a
//! schema version. `serde_json`'s default map keeps keys sorted, so
//! `to_string` on these values is byte-stable across runs.

use crate::certify::{BlockRepResult, EquivalenceCertificate, TypeCheckResult, TypeVerdict};
use crate::convolution::{ConvReport, ZVector};
use crate::dividing::{DoubleLimitReport, LimitVerdict, PairStatus, SopReport, WitnessReport};
use crate::enclosure::Enclosure;
use crate::probe::PackingReport;
use crate::tsirelson::{AdmissibleFamily, NormComputation, WitnessTree};
use crate::vector::{FiniteVector, Rat};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub fn rat_str(r: &Rat) -> String {
    r.to_string()
}

pub fn enclosure_json(e: &Enclosure) -> Value {
    json!([rat_str(e.lo()), rat_str(e.hi())])
}

pub fn vector_json(x: &FiniteVector) -> Value {
    x.to_json()
}

pub fn zvector_json(x: &ZVector) -> Value {
    x.to_json()
}

/// Wrap a report body with the schema version and kind tag.
pub fn envelope(kind: &str, body: Value) -> Value {
    json!({
        "kind": kind,
        "schema_version": SCHEMA_VERSION,
        "result": body,
    })
}

pub fn witness_tree_json(tree: &WitnessTree) -> Value {
    match tree {
        WitnessTree::Zero => json!({ "kind": "zero" }),
        WitnessTree::Sup { index } => json!({ "kind": "sup", "index": index }),
        WitnessTree::Family { pieces } => json!({
            "kind": "family",
            "pieces": pieces
                .iter()
                .map(|p| json!({
                    "interval": [p.lo, p.hi],
                    "tree": witness_tree_json(&p.tree),
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn norm_computation_json(comp: &NormComputation) -> Value {
    let mut body = json!({
        "value": rat_str(&comp.value),
        "vector": vector_json(&comp.input),
        "witness_tree": witness_tree_json(&comp.tree),
        "memo": {
            "subvectors": comp.stats.subvectors,
            "cache_hits": comp.stats.cache_hits,
        },
    });
    if let Some(its) = &comp.iterates {
        body["iterates"] = json!(its.iter().map(rat_str).collect::<Vec<_>>());
    }
    body
}

pub fn iterates_json(input: &FiniteVector, iterates: &[Rat]) -> Value {
    json!({
        "vector": vector_json(input),
        "iterates": iterates.iter().map(rat_str).collect::<Vec<_>>(),
    })
}

pub fn families_json(families: &[AdmissibleFamily], truncated: bool) -> Value {
    json!({
        "count": families.len(),
        "truncated": truncated,
        "families": families
            .iter()
            .map(|f| json!(f.intervals().iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>()))
            .collect::<Vec<_>>(),
    })
}

pub fn certificate_json(cert: &EquivalenceCertificate) -> Value {
    json!({
        "p": cert.p.to_string(),
        "ambient": cert.ambient.to_string(),
        "c_lower": enclosure_json(&cert.c_lower),
        "c_upper": enclosure_json(&cert.c_upper),
        "witness_lower": cert.witness_lower.iter().map(rat_str).collect::<Vec<_>>(),
        "witness_upper": cert.witness_upper.iter().map(rat_str).collect::<Vec<_>>(),
        "resolution": rat_str(&cert.resolution),
        "lipschitz_bound": rat_str(&cert.lipschitz_bound),
        "conclusive": cert.conclusive,
        "evals": cert.evals,
    })
}

pub fn type_check_json(res: &TypeCheckResult) -> Value {
    let verdict = match res.verdict {
        TypeVerdict::Pass => "pass",
        TypeVerdict::Violation => "violation",
        TypeVerdict::Inconclusive => "inconclusive",
    };
    json!({
        "verdict": verdict,
        "violating": res
            .violating
            .as_ref()
            .map(|v| json!(v.iter().map(rat_str).collect::<Vec<_>>()))
            .unwrap_or(Value::Null),
        "margin": res.margin.as_ref().map(|m| json!(rat_str(m))).unwrap_or(Value::Null),
        "yardstick_norm": enclosure_json(&res.yardstick_norm),
        "epsilon": rat_str(&res.epsilon),
        "certificate": certificate_json(&res.certificate),
    })
}

pub fn block_rep_json(res: &BlockRepResult) -> Value {
    json!({
        "success": res.blocks.is_some(),
        "blocks": res
            .blocks
            .as_ref()
            .map(|bs| json!(bs.iter().map(vector_json).collect::<Vec<_>>()))
            .unwrap_or(Value::Null),
        "best_candidate": res.best_candidate.iter().map(vector_json).collect::<Vec<_>>(),
        "best_score": rat_str(&res.best_score),
        "attempts": res.attempts,
        "check": res.check.as_ref().map(type_check_json).unwrap_or(Value::Null),
    })
}

pub fn double_limit_json(report: &DoubleLimitReport, include_matrix: bool) -> Value {
    let verdict = match report.verdict {
        LimitVerdict::OrderPropertyWitnessed => "order-property-witnessed",
        LimitVerdict::ConsistentWithStability => "consistent-with-stability",
        LimitVerdict::Inconclusive => "inconclusive",
    };
    let mut body = json!({
        "rows": report.rows,
        "cols": report.cols,
        "row_then_column": enclosure_json(&report.row_then_column),
        "column_then_row": enclosure_json(&report.column_then_row),
        "gap": enclosure_json(&report.gap),
        "verdict": verdict,
        "tolerance": rat_str(&report.tolerance),
    });
    if include_matrix {
        body["matrix"] = json!(report
            .matrix
            .iter()
            .map(|row| row.iter().map(enclosure_json).collect::<Vec<_>>())
            .collect::<Vec<_>>());
    }
    body
}

/// CSV rendering of a double-limit matrix; exact values print as single
/// rationals, genuine enclosures as `lo..hi`.
pub fn matrix_csv(report: &DoubleLimitReport) -> String {
    let mut out = String::new();
    let mut header = vec!["m\\n".to_string()];
    for n in 1..=report.cols {
        header.push(n.to_string());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (mi, row) in report.matrix.iter().enumerate() {
        let mut line = vec![(mi + 1).to_string()];
        for e in row {
            if e.is_exact() {
                line.push(rat_str(e.lo()));
            } else {
                line.push(format!("{}..{}", rat_str(e.lo()), rat_str(e.hi())));
            }
        }
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn witness_report_json(report: &WitnessReport, include_pairs: bool) -> Value {
    let unfilled: Vec<Value> = report
        .pairs
        .iter()
        .filter_map(|p| match &p.status {
            PairStatus::Unfilled { proved_infeasible } => Some(json!({
                "below_set": p.below_set,
                "above_set": p.above_set,
                "proved_infeasible": proved_infeasible,
            })),
            _ => None,
        })
        .collect();
    let mut body = json!({
        "below": rat_str(&report.below),
        "above": rat_str(&report.above),
        "depth": report.depth,
        "independent_at_depth": report.independent_at_depth,
        "pair_count": report.pairs.len(),
        "unfilled": unfilled,
        "first_unfilled": report.first_unfilled.map(|i| json!(i)).unwrap_or(Value::Null),
        "evals_used": report.evals_used,
    });
    if include_pairs {
        body["pairs"] = json!(report
            .pairs
            .iter()
            .map(|p| {
                let status = match &p.status {
                    PairStatus::Filled { witness } => json!({
                        "filled": true,
                        "witness": vector_json(witness),
                    }),
                    PairStatus::Unfilled { proved_infeasible } => json!({
                        "filled": false,
                        "proved_infeasible": proved_infeasible,
                    }),
                };
                json!({
                    "below_set": p.below_set,
                    "above_set": p.above_set,
                    "status": status,
                })
            })
            .collect::<Vec<_>>());
    }
    body
}

pub fn sop_report_json(report: &SopReport) -> Value {
    json!({
        "depth": report.depth,
        "samples": report.samples,
        "monotone_checked": report.monotone_checked,
        "chain_checked": report.chain_checked,
        "pass": report.pass,
        "violations": report
            .violations
            .iter()
            .map(|v| json!({
                "kind": v.kind,
                "m": v.m,
                "n": v.n,
                "left_value": rat_str(&v.left_value),
                "right_value": rat_str(&v.right_value),
                "sample": v.sample.as_ref().map(vector_json).unwrap_or(Value::Null),
            }))
            .collect::<Vec<_>>(),
    })
}

pub fn conv_report_json(report: &ConvReport) -> Value {
    json!({
        "value": enclosure_json(&report.value),
        "z": zvector_json(&report.z),
        "dual_u": zvector_json(&report.dual_u),
        "dual_ball_offset": rat_str(&report.dual_ball_offset),
        "pivots": report.pivots,
        "optimal": report.optimal,
        "halfwidth": report.halfwidth,
    })
}

pub fn packing_json(report: &PackingReport) -> Value {
    json!({
        "epsilon": rat_str(&report.epsilon),
        "selected": report.selected,
        "count": report.selected.len(),
        "growth": report
            .growth
            .iter()
            .map(|&(n, c)| json!([n, c]))
            .collect::<Vec<_>>(),
        "pairwise_lower": report
            .pairwise
            .iter()
            .map(|row| row.iter().map(enclosure_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// CSV rendering of a packing distance matrix (lower bounds).
pub fn packing_csv(report: &PackingReport) -> String {
    let n = report.pairwise.len();
    let mut out = String::new();
    let mut header = vec!["i\\j".to_string()];
    for j in 0..n {
        header.push(j.to_string());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in report.pairwise.iter().enumerate() {
        let mut line = vec![i.to_string()];
        for e in row {
            line.push(rat_str(e.lo()));
        }
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Byte-stable string form of a report value.
pub fn to_canonical_string(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("report values are valid JSON")
}
