//! JSON reports and their human rendering.
//!
//! Every report carries `schema` and `schema_version`; the matching JSON
//! Schemas ship in `schemas/`. Human output is produced from the same JSON
//! value by [`render_human`].

use serde::Serialize;
use serde_json::{json, Value};

use crate::engine::{GuardStatus, ImageClassification, WitnessBundle};
use crate::ncpoly::{NcLinearPoly, OrderResult};
use crate::oracle::{BruteOrder, VerificationReport};
use crate::utmatrix::UtMatrix;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
struct Header<'a> {
    schema: &'a str,
    schema_version: u32,
}

fn header(kind: &str) -> Value {
    serde_json::to_value(Header { schema: kind, schema_version: SCHEMA_VERSION }).expect("header")
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut base, extra) {
        a.extend(b);
    }
    base
}

fn poly_fields(p: &NcLinearPoly) -> Value {
    json!({
        "polynomial": p.to_string(),
        "num_vars": p.num_vars(),
        "field": p.field().to_string(),
    })
}

pub fn order_report(p: &NcLinearPoly, ord: &OrderResult, brute: Option<BruteOrder>) -> Value {
    let mut v = merge(header("utimage.order"), poly_fields(p));
    v = merge(
        v,
        json!({
            "order": ord.order,
            "witness_tuple": ord.witness_tuple,
            "alpha_witness": ord.alpha_witness,
        }),
    );
    if let Some(b) = brute {
        v = merge(v, json!({ "bruteforce": b }));
    }
    v
}

/// `{order, t, stratum_dim, guard, witness_tuple, theorem_case}` plus context.
pub fn classification_report(p: &NcLinearPoly, c: &ImageClassification) -> Value {
    let (status, required) = match c.guard {
        GuardStatus::Satisfied => ("satisfied", None),
        GuardStatus::Violated { required_exceeds, .. } => ("violated", Some(required_exceeds)),
    };
    let t_max = c.num_vars as i64 / 2 - 1;
    merge(
        merge(header("utimage.classification"), poly_fields(p)),
        json!({
            "n": c.n,
            "order": c.order,
            "t": c.stratum.t(),
            "stratum": c.stratum.to_string(),
            "stratum_dim": c.stratum.dim(),
            "theorem_case": c.case.label(),
            "case_description": c.case.description(),
            "claim": if c.is_exact() { "equal" } else { "containment_only" },
            "guard": {
                "case_bound": c.bounds.case_bound,
                "global_bound": c.bounds.global_bound,
                "field_card": p.field().cardinality(),
                "status": status,
                "required_exceeds": required,
                "global_satisfied": c.global_guard,
            },
            "range_check": { "t_min": -1, "t_max": t_max, "ok": c.range_ok },
            "witness_tuple": c.witness_tuple,
            "alpha_witness": c.alpha_witness,
        }),
    )
}

pub fn preimage_report(p: &NcLinearPoly, w: &WitnessBundle) -> Value {
    merge(
        merge(header("utimage.preimage"), poly_fields(p)),
        json!({
            "n": w.target.dim(),
            "theorem_case": w.case.label(),
            "target": w.target.to_json(),
            "assignment": w.assignment.iter().map(UtMatrix::to_json).collect::<Vec<_>>(),
            "residual": w.residual.to_json(),
            "residual_zero": w.residual.is_zero(),
        }),
    )
}

pub fn verification_report(p: &NcLinearPoly, n: usize, r: &VerificationReport) -> Value {
    merge(
        merge(header("utimage.verification"), poly_fields(p)),
        json!({
            "n": n,
            "mode": r.mode,
            "seed": r.seed,
            "rng": r.rng,
            "budget": r.budget,
            "claimed_t": r.claimed.t(),
            "observed": r.observed,
            "evaluations_used": r.evaluations_used as u64,
            "elapsed_ms": r.elapsed_ms as u64,
            "image_size": r.image_size,
            "targets_checked": r.targets_checked,
            "counterexample": r.counterexample.as_ref().map(|c| c.to_json()),
        }),
    )
}

pub fn error_report(exit_code: i32, kind: &str, message: &str) -> Value {
    merge(header("utimage.error"), json!({ "exit_code": exit_code, "kind": kind, "message": message }))
}

fn is_matrix(v: &Value) -> bool {
    match v {
        Value::Array(rows) => !rows.is_empty() && rows.iter().all(|r| matches!(r, Value::Array(c) if c.iter().all(Value::is_string))),
        _ => false,
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn render_matrix(v: &Value, indent: usize, out: &mut String) {
    let rows: Vec<Vec<String>> = v
        .as_array()
        .expect("matrix")
        .iter()
        .map(|r| r.as_array().expect("row").iter().map(scalar_text).collect())
        .collect();
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    for r in rows {
        let cells: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&format!("{:indent$}[ {} ]\n", "", cells.join(" ")));
    }
}

fn render_value(key: &str, v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, x) in map {
                render_value(k, x, indent + 2, out);
            }
        }
        _ if is_matrix(v) => {
            out.push_str(&format!("{pad}{key}:\n"));
            render_matrix(v, indent + 2, out);
        }
        Value::Array(items) if items.iter().any(|x| is_matrix(x) || x.is_object()) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (i, x) in items.iter().enumerate() {
                render_value(&format!("[{}]", i + 1), x, indent + 2, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            out.push_str(&format!("{pad}{key}: ({})\n", parts.join(", ")));
        }
        other => out.push_str(&format!("{pad}{key}: {}\n", scalar_text(other))),
    }
}

/// Plain-text rendering of a report: one `key: value` line per field,
/// nested objects indented, matrices as aligned rows.
pub fn render_human(report: &Value) -> String {
    let mut out = String::new();
    match report {
        Value::Object(map) => {
            for (k, v) in map {
                if k == "schema" || k == "schema_version" {
                    continue;
                }
                render_value(k, v, 0, &mut out);
            }
        }
        other => render_value("value", other, 0, &mut out),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{classify_image, preimage};
    use crate::parse::parse_polynomial;
    use crate::scalar::FieldSpec;

    #[test]
    fn classification_fields() {
        let p = parse_polynomial("x1*x2 - x2*x1", 2, FieldSpec::Prime(5)).unwrap();
        let c = classify_image(&p, 3).unwrap();
        let v = classification_report(&p, &c);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["order"], 1);
        assert_eq!(v["t"], 0);
        assert_eq!(v["stratum_dim"], 3);
        assert_eq!(v["guard"]["status"], "satisfied");
        assert_eq!(v["guard"]["case_bound"], 2);
        assert_eq!(v["theorem_case"], "ii");
        assert_eq!(v["witness_tuple"], json!([1]));
    }

    #[test]
    fn human_rendering_shows_matrices() {
        let k = FieldSpec::Prime(3);
        let p = parse_polynomial("x1*x2 - x2*x1", 2, k).unwrap();
        let w = preimage(&p, &UtMatrix::unit(2, k, 0, 1)).unwrap();
        let text = render_human(&preimage_report(&p, &w));
        assert!(text.contains("target:\n  [ 0 1 ]\n  [ 0 0 ]\n"), "{text}");
        assert!(text.contains("residual_zero: true"));
        assert!(!text.contains("schema"));
    }
}
