//! JSON serialization of orbit reports. Exact coordinates are emitted as
//! reduced rational strings so nothing is lost to binary floating point;
//! float coordinates are plain numbers. Keys are emitted in sorted order, so
//! equal reports serialize byte-identically.

use serde_json::{json, Map, Value};

use super::{OrbitReport, Outcome};
use crate::point::Point;
use crate::scalar::Scalar;

pub const REPORT_SCHEMA: &str = "orbit-report/1";

fn float_json(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(format!("{x}")), // inf/nan have no JSON number
    }
}

pub fn scalar_json<S: Scalar>(s: &S) -> Value {
    if S::EXACT {
        Value::String(s.to_string())
    } else {
        float_json(s.to_f64())
    }
}

pub fn point_json<S: Scalar>(p: &Point<S>) -> Value {
    Value::Array(p.iter().map(|c| scalar_json(c)).collect())
}

pub fn orbit_report_json<S: Scalar>(report: &OrbitReport<S>) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(REPORT_SCHEMA));
    m.insert("outcome".into(), json!(report.outcome.label()));
    match &report.outcome {
        Outcome::Converged { transient, period, cycle } => {
            m.insert("period".into(), json!(period));
            m.insert("transient".into(), json!(transient));
            m.insert(
                "cycle".into(),
                Value::Array(cycle.iter().map(point_json).collect()),
            );
        }
        Outcome::Unbounded { at_iter, sup_norm } => {
            m.insert("at_iter".into(), json!(at_iter));
            m.insert("sup_norm".into(), float_json(*sup_norm));
        }
        Outcome::Inconclusive { iters } => {
            m.insert("iters".into(), json!(iters));
        }
    }
    m.insert(
        "part_trajectory".into(),
        Value::Array(
            report
                .part_trajectory
                .iter()
                .map(|p| json!(p.indices()))
                .collect(),
        ),
    );
    m.insert("part_period".into(), json!(report.part_period));
    m.insert("part_preperiod".into(), json!(report.part_preperiod));
    if let Some(checks) = &report.checks {
        m.insert(
            "checks".into(),
            json!({
                "antichain": checks.antichain.pass,
                "m_invariance": checks.m_invariance.pass,
                "period_bound": checks.period_bound.pass,
                "factorization": checks.factorization.pass,
            }),
        );
        m.insert("falsification".into(), json!(checks.falsification()));
    }
    Value::Object(m)
}
