use super::{Diagnostic, Mdp, MdpBuilder};
use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocState {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    absorbing: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocTransition {
    to: String,
    prob: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocAction {
    state: String,
    name: String,
    weight: String,
    transitions: Vec<DocTransition>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocMdp {
    states: Vec<DocState>,
    initial: String,
    actions: Vec<DocAction>,
    #[serde(default)]
    goal: Vec<String>,
    #[serde(default)]
    fail: Vec<String>,
}

pub(crate) fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::MalformedDocument(format!("not an integer: {s:?}")));
    }
    BigInt::from_str(t.strip_prefix('+').unwrap_or(t)).map_err(|e| Error::MalformedDocument(e.to_string()))
}

/// Parses and validates an MDP document.
pub fn parse_mdp(doc: &[u8]) -> Result<Mdp> {
    let d: DocMdp = serde_json::from_slice(doc).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let mut b = MdpBuilder::new();
    for st in &d.states {
        if b.lookup(&st.id).is_some() {
            return Err(Error::MalformedDocument(format!("duplicate state id {:?}", st.id)));
        }
        let s = b.state(st.id.clone());
        for l in &st.labels {
            b.add_label(s, l);
        }
        if st.absorbing {
            b.states[s].absorbing = true;
        }
    }
    let find = |b: &MdpBuilder, id: &str| b.lookup(id).ok_or_else(|| Error::UnknownStateReference(id.to_string()));
    for a in &d.actions {
        let s = find(&b, &a.state)?;
        let w = parse_int(&a.weight)?;
        let mut tr = Vec::new();
        for t in &a.transitions {
            let to = find(&b, &t.to)?;
            let p = Rat::from_str(&t.prob).map_err(|e| Error::MalformedDocument(e.to_string()))?;
            if !p.is_positive() {
                return Err(Error::MalformedDocument(format!(
                    "non-positive probability {} on {}/{}",
                    t.prob, a.state, a.name
                )));
            }
            tr.push((to, p));
        }
        b.action(s, a.name.clone(), w, tr);
    }
    let init = find(&b, &d.initial)?;
    b.set_initial(init);
    for g in &d.goal {
        let s = find(&b, g)?;
        b.add_goal(s);
    }
    for f in &d.fail {
        let s = find(&b, f)?;
        b.add_fail(s);
    }
    match b.build() {
        Ok(m) => Ok(m),
        Err(Error::InvalidModel(diags)) => {
            for dg in &diags {
                if let Diagnostic::ProbabilitySumNotOne { state, action, sum } = dg {
                    return Err(Error::ProbabilitySumNotOne {
                        state: state.clone(),
                        action: action.clone(),
                        sum: sum.clone(),
                    });
                }
            }
            for dg in &diags {
                if let Diagnostic::UnreachableState { state } = dg {
                    return Err(Error::UnreachableState(state.clone()));
                }
            }
            Err(Error::InvalidModel(diags))
        }
        Err(e) => Err(e),
    }
}

/// Canonical serialization; rationals in lowest terms.
pub fn serialize_mdp(m: &Mdp) -> Vec<u8> {
    let doc = DocMdp {
        states: m
            .states()
            .iter()
            .map(|s| DocState { id: s.id.clone(), labels: s.labels.iter().cloned().collect(), absorbing: s.absorbing })
            .collect(),
        initial: m.id(m.initial()).to_string(),
        actions: (0..m.n_states())
            .flat_map(|s| {
                m.actions(s).iter().map(move |a| DocAction {
                    state: m.id(s).to_string(),
                    name: a.name.clone(),
                    weight: a.weight.to_string(),
                    transitions: a
                        .transitions
                        .iter()
                        .map(|t| DocTransition { to: m.id(t.to).to_string(), prob: t.prob.to_string() })
                        .collect(),
                })
            })
            .collect(),
        goal: m.ids_of(m.goal()),
        fail: m.ids_of(m.fail()),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("serializable");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::samples;

    #[test]
    fn two_state_document() {
        let doc = br#"{"states":[{"id":"s","labels":[]},{"id":"g","labels":["goal"]}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"0","transitions":[{"to":"g","prob":"1/4"},{"to":"s","prob":"3/4"}]},
                       {"state":"g","name":"stay","weight":"0","transitions":[{"to":"g","prob":"1"}]}],
            "goal":["g"],"fail":[]}"#;
        let m = parse_mdp(doc).unwrap();
        assert_eq!(m.n_states(), 2);
    }

    #[test]
    fn bad_sum_rejected() {
        let doc = br#"{"states":[{"id":"s"}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"0","transitions":[{"to":"s","prob":"1/3"},{"to":"s","prob":"1/3"}]}]}"#;
        assert!(matches!(parse_mdp(doc), Err(Error::ProbabilitySumNotOne { .. })));
    }

    #[test]
    fn unknown_reference_and_unreachable() {
        let doc = br#"{"states":[{"id":"s"}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"0","transitions":[{"to":"t","prob":"1"}]}]}"#;
        assert_eq!(parse_mdp(doc).unwrap_err(), Error::UnknownStateReference("t".into()));
        let doc = br#"{"states":[{"id":"s"},{"id":"u"}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"0","transitions":[{"to":"s","prob":"1"}]},
                       {"state":"u","name":"a","weight":"0","transitions":[{"to":"u","prob":"1"}]}]}"#;
        assert_eq!(parse_mdp(doc).unwrap_err(), Error::UnreachableState("u".into()));
    }

    #[test]
    fn malformed() {
        assert!(matches!(parse_mdp(b"{"), Err(Error::MalformedDocument(_))));
        let doc = br#"{"states":[{"id":"s"}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"1.5","transitions":[{"to":"s","prob":"1"}]}]}"#;
        assert!(matches!(parse_mdp(doc), Err(Error::MalformedDocument(_))));
    }

    #[test]
    fn loop_example_roundtrip() {
        let m = samples::alpha_beta_loop();
        let bytes = serialize_mdp(&m);
        let back = parse_mdp(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(serialize_mdp(&back), bytes);
        let weights: std::collections::BTreeSet<i64> = (0..m.n_states())
            .flat_map(|s| m.actions(s).iter().map(|a| i64::try_from(&a.weight).unwrap()).collect::<Vec<_>>())
            .collect();
        assert_eq!(weights, [0, 2, 3].into_iter().collect());
    }

    #[test]
    fn non_lowest_terms_normalized() {
        let doc = br#"{"states":[{"id":"s"}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"0","transitions":[{"to":"s","prob":"2/4"},{"to":"s","prob":"2/4"}]}]}"#;
        let m = parse_mdp(doc).unwrap();
        let text = String::from_utf8(serialize_mdp(&m)).unwrap();
        assert!(text.contains("\"prob\": \"1\""));
        let doc = br#"{"states":[{"id":"s"},{"id":"t"}],"initial":"s",
            "actions":[{"state":"s","name":"a","weight":"0","transitions":[{"to":"s","prob":"2/4"},{"to":"t","prob":"2/4"}]},
            {"state":"t","name":"a","weight":"-2","transitions":[{"to":"t","prob":"1"}]}]}"#;
        let text = String::from_utf8(serialize_mdp(&parse_mdp(doc).unwrap())).unwrap();
        assert!(text.contains("\"1/2\""));
        assert!(text.contains("\"-2\""));
    }
}
