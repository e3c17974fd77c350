//! JSON model format.
//!
//! ```json
//! {
//!   "states": [
//!     {"name": "s0", "accepting": true, "labels": ["s0"]},
//!     {"name": "s1"}
//!   ],
//!   "actions": ["a", "b"],
//!   "initial": "s0",
//!   "transitions": [["s0", "a", "s0", 1.0], ["s0", "b", "s1", "0.5"], ...]
//! }
//! ```
//!
//! States, actions and the initial state may be referenced by name or by
//! index. Probabilities are numbers or decimal strings. Acceptance is Büchi
//! via `accepting` flags unless some state carries a `priority` (parity,
//! missing priorities default to 0) or a top-level `"rabin": [{"fin": [...],
//! "inf": [...]}]` list is present.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::acceptance::AcceptanceCondition;
use crate::error::{Error, Result};
use crate::mdp::Mdp;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Ref {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Prob {
    Number(f64),
    Decimal(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct StateEntry {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accepting: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    priority: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PairEntry {
    fin: Vec<Ref>,
    inf: Vec<Ref>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    states: Vec<StateEntry>,
    actions: Vec<String>,
    initial: Ref,
    transitions: Vec<(Ref, Ref, Ref, Prob)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rabin: Option<Vec<PairEntry>>,
}

fn format_err(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format { context: context.into(), message: message.into() }
}

fn resolve(r: &Ref, names: &[String], what: &str, context: &str) -> Result<usize> {
    match r {
        Ref::Index(i) => Ok(*i),
        Ref::Name(n) => names
            .iter()
            .position(|x| x == n)
            .ok_or_else(|| format_err(context, format!("unknown {what} `{n}`"))),
    }
}

/// Parses the model structure without checking stochasticity.
pub fn parse_model(text: &str) -> Result<Mdp> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| {
        let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim();
        format_err(format!("model line {}: `{line}`", e.line()), e.to_string())
    })?;
    let state_names: Vec<String> = file.states.iter().map(|s| s.name.clone()).collect();
    let n = state_names.len();
    let distinct: BTreeSet<&String> = state_names.iter().collect();
    if distinct.len() != n {
        return Err(format_err("states", "state names must be distinct"));
    }

    let acceptance = if let Some(pairs) = &file.rabin {
        let mut out = Vec::new();
        for (i, p) in pairs.iter().enumerate() {
            let ctx = format!("rabin pair {i}");
            let fin = p.fin.iter().map(|r| resolve(r, &state_names, "state", &ctx)).collect::<Result<Vec<_>>>()?;
            let inf = p.inf.iter().map(|r| resolve(r, &state_names, "state", &ctx)).collect::<Result<Vec<_>>>()?;
            out.push((fin, inf));
        }
        AcceptanceCondition::rabin(out)
    } else if file.states.iter().any(|s| s.priority.is_some()) {
        AcceptanceCondition::parity(file.states.iter().map(|s| s.priority.unwrap_or(0)).collect())
    } else {
        AcceptanceCondition::buchi(
            file.states.iter().enumerate().filter(|(_, s)| s.accepting == Some(true)).map(|(i, _)| i),
        )
    };

    let initial = resolve(&file.initial, &state_names, "state", "initial")?;
    let mut m = Mdp::new(n, file.actions.len(), initial, acceptance);
    m.set_state_names(state_names.clone());
    m.set_action_names(file.actions.clone());
    for (i, st) in file.states.iter().enumerate() {
        m.set_labels(i, st.labels.iter().cloned());
    }
    for (i, (s, a, t, p)) in file.transitions.iter().enumerate() {
        let ctx = format!("transition {i}");
        let s = resolve(s, &state_names, "state", &ctx)?;
        let a = resolve(a, &file.actions, "action", &ctx)?;
        let t = resolve(t, &state_names, "state", &ctx)?;
        if s >= n {
            return Err(format_err(ctx, format!("source state {s} does not exist")));
        }
        if a >= file.actions.len() {
            return Err(format_err(ctx, format!("action {a} does not exist")));
        }
        let p = match p {
            Prob::Number(x) => *x,
            Prob::Decimal(d) => d.trim().parse::<f64>().map_err(|e| format_err(&ctx, format!("probability `{d}`: {e}")))?,
        };
        m.add_transition(s, a, t, p);
    }
    Ok(m)
}

/// Parses and validates a model. Rows are rescaled to sum to 1 only when
/// `renormalize` is set.
pub fn model_from_json(text: &str, renormalize: bool) -> Result<Mdp> {
    let mut m = parse_model(text)?;
    if renormalize {
        m.renormalize();
    }
    m.validate().into_result()?;
    Ok(m)
}

pub fn model_to_json(m: &Mdp) -> String {
    let names = m.state_names();
    let idx = |s: usize| Ref::Name(names[s].clone());
    let states = (0..m.num_states())
        .map(|s| {
            let (accepting, priority) = match m.acceptance() {
                AcceptanceCondition::Buchi { accepting } => (Some(accepting.contains(&s)).filter(|&b| b), None),
                AcceptanceCondition::Parity { priority } => (None, Some(priority[s])),
                AcceptanceCondition::Rabin { .. } => (None, None),
            };
            StateEntry { name: names[s].clone(), accepting, priority, labels: m.labels(s).iter().cloned().collect() }
        })
        .collect();
    let rabin = match m.acceptance() {
        AcceptanceCondition::Rabin { pairs } => Some(
            pairs
                .iter()
                .map(|p| PairEntry { fin: p.fin.iter().map(|&s| idx(s)).collect(), inf: p.inf.iter().map(|&s| idx(s)).collect() })
                .collect(),
        ),
        _ => None,
    };
    let mut transitions = Vec::new();
    for s in 0..m.num_states() {
        for c in m.choices(s) {
            for &(t, p) in &c.successors {
                transitions.push((idx(s), Ref::Name(m.action_name(c.action).to_string()), idx(t), Prob::Number(p)));
            }
        }
    }
    let file = ModelFile { states, actions: m.action_names().to_vec(), initial: idx(m.initial()), transitions, rabin };
    serde_json::to_string_pretty(&file).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "states": [{"name": "s0", "accepting": true, "labels": ["s0"]}, {"name": "s1"}],
        "actions": ["a", "b"],
        "initial": "s0",
        "transitions": [["s0", "a", "s0", 1.0], ["s0", "b", "s1", "0.5"], ["s0", "b", 0, 0.5],
                        [1, "a", 1, 1], ["s1", 1, "s1", "1.0"]]
    }"#;

    #[test]
    fn parses_names_indices_and_decimal_strings() {
        let m = model_from_json(SMALL, false).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.choice(0, 1).unwrap().probability(1), 0.5);
        assert_eq!(m.acceptance(), &AcceptanceCondition::buchi([0]));
        assert!(m.labels(0).contains("s0"));
    }

    #[test]
    fn round_trip_is_structurally_equal() {
        let m = model_from_json(SMALL, false).unwrap();
        assert_eq!(model_from_json(&model_to_json(&m), false).unwrap(), m);
    }

    #[test]
    fn row_sum_violation_needs_explicit_renormalize() {
        let text = SMALL.replace("[\"s0\", \"a\", \"s0\", 1.0]", "[\"s0\", \"a\", \"s0\", 0.9]");
        assert!(matches!(model_from_json(&text, false), Err(Error::InvalidModel(v)) if v.len() == 1));
        assert!(model_from_json(&text, true).is_ok());
    }

    #[test]
    fn unknown_name_reports_transition() {
        let text = SMALL.replace("\"s1\", \"0.5\"", "\"s9\", \"0.5\"");
        let err = model_from_json(&text, false).unwrap_err().to_string();
        assert!(err.contains("transition 1") && err.contains("s9"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_model("{\n \"states\": [\n  oops\n]}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
