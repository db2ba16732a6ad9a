//! Canonical on-disk machine format: one UTF-8 JSON document per machine,
//! discriminated by a top-level `"kind"` field. Unknown fields are rejected.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    CatRule, CatSpec, Ctx, IatCommRule, IatInteriorRule, IatSpec, MachineSpec, SeqRule,
    SeqTransducerSpec, TransducerKind, BOUNDARY, NO_OUTPUT,
};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown machine kind `{0}` (expected cat, iat, fst, or pdt)")]
    UnknownKind(String),
    #[error("missing `kind` field")]
    MissingKind,
    #[error("{0}")]
    Field(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatDoc {
    kind: String,
    states: Vec<String>,
    accepting: Vec<String>,
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    boundary: String,
    delta: Vec<CatRuleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatRuleDoc {
    l: String,
    c: String,
    r: String,
    next: String,
    out: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IatDoc {
    kind: String,
    states: Vec<String>,
    accepting: Vec<String>,
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    quiescent: String,
    end_marker: String,
    delta_interior: Vec<IatInteriorDoc>,
    delta_comm: Vec<IatCommDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IatInteriorDoc {
    l: String,
    c: String,
    r: String,
    next: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IatCommDoc {
    #[serde(rename = "in")]
    input: String,
    c: String,
    r: String,
    out: String,
    next: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqDoc {
    kind: String,
    states: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    stack_alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_stack: Option<String>,
    rules: Vec<SeqRuleDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqRuleDoc {
    from: String,
    /// Empty string is a λ-rule.
    #[serde(rename = "in")]
    input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pop: Option<String>,
    to: String,
    out: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    push: Option<String>,
}

fn reject_duplicates(states: &[String]) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for s in states {
        if !seen.insert(s) {
            return Err(ParseError::DuplicateState(s.clone()));
        }
    }
    Ok(())
}

fn ctx_of(s: String) -> Ctx {
    if s == BOUNDARY {
        Ctx::Boundary
    } else {
        Ctx::State(s)
    }
}

fn parse_default(field: Option<String>) -> Result<bool, ParseError> {
    match field.as_deref() {
        None => Ok(false),
        Some("self") => Ok(true),
        Some(other) => Err(ParseError::Field(format!(
            "unsupported default rule `{other}` (only \"self\" is defined)"
        ))),
    }
}

/// Parses a canonical machine document.
pub fn parse_machine(document: &str) -> Result<MachineSpec, ParseError> {
    let value: serde_json::Value = serde_json::from_str(document).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or(ParseError::MissingKind)?
        .to_string();
    match kind.as_str() {
        "cat" => {
            let doc: CatDoc =
                serde_json::from_value(value).map_err(|e| ParseError::Field(e.to_string()))?;
            if doc.boundary != BOUNDARY {
                return Err(ParseError::Field(format!(
                    "boundary must be `{BOUNDARY}`, got `{}`",
                    doc.boundary
                )));
            }
            reject_duplicates(&doc.states)?;
            let delta = doc
                .delta
                .into_iter()
                .map(|r| CatRule {
                    left: ctx_of(r.l),
                    center: r.c,
                    right: ctx_of(r.r),
                    next: r.next,
                    out: if r.out == NO_OUTPUT { None } else { Some(r.out) },
                })
                .collect();
            Ok(MachineSpec::Cat(CatSpec {
                states: doc.states,
                accepting: doc.accepting.into_iter().collect(),
                input_alphabet: doc.input_alphabet,
                output_alphabet: doc.output_alphabet,
                delta,
                default_rule: parse_default(doc.default)?,
            }))
        }
        "iat" => {
            let doc: IatDoc =
                serde_json::from_value(value).map_err(|e| ParseError::Field(e.to_string()))?;
            reject_duplicates(&doc.states)?;
            Ok(MachineSpec::Iat(IatSpec {
                states: doc.states,
                accepting: doc.accepting.into_iter().collect(),
                input_alphabet: doc.input_alphabet,
                output_alphabet: doc.output_alphabet,
                quiescent: doc.quiescent,
                end_marker: doc.end_marker,
                delta_interior: doc
                    .delta_interior
                    .into_iter()
                    .map(|r| IatInteriorRule { left: r.l, center: r.c, right: r.r, next: r.next })
                    .collect(),
                default_interior: parse_default(doc.default)?,
                delta_comm: doc
                    .delta_comm
                    .into_iter()
                    .map(|r| IatCommRule {
                        input: r.input,
                        comm: r.c,
                        right: r.r,
                        out: r.out,
                        next: r.next,
                    })
                    .collect(),
            }))
        }
        "fst" | "pdt" => {
            let doc: SeqDoc =
                serde_json::from_value(value).map_err(|e| ParseError::Field(e.to_string()))?;
            reject_duplicates(&doc.states)?;
            let kind = if doc.kind == "fst" { TransducerKind::Fst } else { TransducerKind::Pdt };
            let mut rules = Vec::new();
            for (idx, r) in doc.rules.into_iter().enumerate() {
                if kind == TransducerKind::Pdt && r.pop.is_none() {
                    return Err(ParseError::Field(format!(
                        "rule #{idx} ({} --{}--> {}): a pdt rule must name its popped stack symbol",
                        r.from, r.input, r.to
                    )));
                }
                if kind == TransducerKind::Pdt && r.push.is_none() {
                    return Err(ParseError::Field(format!(
                        "rule #{idx} ({} --{}--> {}): a pdt rule must carry a pushed stack word",
                        r.from, r.input, r.to
                    )));
                }
                rules.push(SeqRule {
                    from: r.from,
                    input: if r.input.is_empty() { None } else { Some(r.input) },
                    pop: r.pop,
                    to: r.to,
                    out: r.out,
                    push: r.push,
                });
            }
            Ok(MachineSpec::Seq(SeqTransducerSpec {
                kind,
                states: doc.states,
                initial: doc.initial,
                accepting: doc.accepting.into_iter().collect(),
                input_alphabet: doc.input_alphabet,
                output_alphabet: doc.output_alphabet,
                stack_alphabet: doc.stack_alphabet,
                initial_stack: doc.initial_stack,
                rules,
            }))
        }
        other => Err(ParseError::UnknownKind(other.to_string())),
    }
}

/// Serializes a machine to its canonical document. `parse_machine` of the
/// result is structurally equal to the input.
pub fn serialize_machine(spec: &MachineSpec) -> String {
    let value = match spec {
        MachineSpec::Cat(cat) => serde_json::to_value(CatDoc {
            kind: "cat".into(),
            states: cat.states.clone(),
            accepting: cat.accepting.iter().cloned().collect(),
            input_alphabet: cat.input_alphabet.clone(),
            output_alphabet: cat.output_alphabet.clone(),
            boundary: BOUNDARY.into(),
            delta: cat
                .delta
                .iter()
                .map(|r| CatRuleDoc {
                    l: r.left.to_string(),
                    c: r.center.clone(),
                    r: r.right.to_string(),
                    next: r.next.clone(),
                    out: r.out.clone().unwrap_or_else(|| NO_OUTPUT.to_string()),
                })
                .collect(),
            default: cat.default_rule.then(|| "self".to_string()),
        }),
        MachineSpec::Iat(iat) => serde_json::to_value(IatDoc {
            kind: "iat".into(),
            states: iat.states.clone(),
            accepting: iat.accepting.iter().cloned().collect(),
            input_alphabet: iat.input_alphabet.clone(),
            output_alphabet: iat.output_alphabet.clone(),
            quiescent: iat.quiescent.clone(),
            end_marker: iat.end_marker.clone(),
            delta_interior: iat
                .delta_interior
                .iter()
                .map(|r| IatInteriorDoc {
                    l: r.left.clone(),
                    c: r.center.clone(),
                    r: r.right.clone(),
                    next: r.next.clone(),
                })
                .collect(),
            delta_comm: iat
                .delta_comm
                .iter()
                .map(|r| IatCommDoc {
                    input: r.input.clone(),
                    c: r.comm.clone(),
                    r: r.right.clone(),
                    out: r.out.clone(),
                    next: r.next.clone(),
                })
                .collect(),
            default: iat.default_interior.then(|| "self".to_string()),
        }),
        MachineSpec::Seq(seq) => serde_json::to_value(SeqDoc {
            kind: match seq.kind {
                TransducerKind::Fst => "fst".into(),
                TransducerKind::Pdt => "pdt".into(),
            },
            states: seq.states.clone(),
            initial: seq.initial.clone(),
            accepting: seq.accepting.iter().cloned().collect(),
            input_alphabet: seq.input_alphabet.clone(),
            output_alphabet: seq.output_alphabet.clone(),
            stack_alphabet: seq.stack_alphabet.clone(),
            initial_stack: seq.initial_stack.clone(),
            rules: seq
                .rules
                .iter()
                .map(|r| SeqRuleDoc {
                    from: r.from.clone(),
                    input: r.input.clone().unwrap_or_default(),
                    pop: r.pop.clone(),
                    to: r.to.clone(),
                    out: r.out.clone(),
                    push: r.push.clone(),
                })
                .collect(),
        }),
    };
    let mut text = serde_json::to_string_pretty(&value.expect("machine serialization is infallible"))
        .expect("machine serialization is infallible");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::validate_cat;

    fn tiny_cat() -> CatSpec {
        CatSpec {
            states: vec!["a".into(), "b".into(), "h".into()],
            accepting: BTreeSet::from(["h".to_string()]),
            input_alphabet: vec!["a".into(), "b".into()],
            output_alphabet: vec!["a".into(), "b".into()],
            delta: vec![CatRule {
                left: Ctx::Boundary,
                center: "a".into(),
                right: Ctx::State("b".into()),
                next: "h".into(),
                out: Some("ab".into()),
            }],
            default_rule: true,
        }
    }

    #[test]
    fn round_trip_cat() {
        let spec = MachineSpec::Cat(tiny_cat());
        let text = serialize_machine(&spec);
        let back = parse_machine(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn duplicate_state_rejected() {
        let mut cat = tiny_cat();
        cat.states.push("a".into());
        let text = serialize_machine(&MachineSpec::Cat(cat));
        assert!(matches!(parse_machine(&text), Err(ParseError::DuplicateState(_))));
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r##"{"kind":"cat","states":["a"],"accepting":[],"input_alphabet":["a"],
            "output_alphabet":[],"boundary":"#","delta":[],"surprise":1}"##;
        assert!(matches!(parse_machine(text), Err(ParseError::Field(_))));
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_machine("{\n  \"kind\": ") {
            Err(ParseError::Syntax { line, .. }) => assert!(line >= 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn pdt_rule_missing_stack_field_is_named() {
        let text = r#"{"kind":"pdt","states":["p"],"initial":"p","accepting":["p"],
            "input_alphabet":["a"],"output_alphabet":["a"],"stack_alphabet":["Z"],
            "initial_stack":"Z",
            "rules":[{"from":"p","in":"a","to":"p","out":"a"}]}"#;
        match parse_machine(text) {
            Err(ParseError::Field(msg)) => assert!(msg.contains("rule #0"), "{msg}"),
            other => panic!("expected field error, got {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn round_trip_random_cats(seed in 0u64..500) {
            use rand::SeedableRng;
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let spec = MachineSpec::Cat(crate::harness::random_cat(&mut rng));
            let text = serialize_machine(&spec);
            let back = parse_machine(&text).expect("serialized machines parse");
            proptest::prop_assert_eq!(spec, back);
        }
    }

    #[test]
    fn round_trip_iat_and_pdt_samples() {
        for spec in [
            MachineSpec::Iat(crate::samples::iat_parity_annotator()),
            MachineSpec::Iat(crate::samples::iat_blinker()),
            MachineSpec::Seq(crate::samples::dpdt_lambda_burst()),
            MachineSpec::Seq(crate::samples::sfst_ends_in_b()),
        ] {
            let text = serialize_machine(&spec);
            assert_eq!(spec, parse_machine(&text).unwrap());
        }
    }

    #[test]
    fn parsed_cat_validates() {
        let text = serialize_machine(&MachineSpec::Cat(tiny_cat()));
        match parse_machine(&text).unwrap() {
            MachineSpec::Cat(cat) => assert!(validate_cat(&cat).is_empty()),
            _ => unreachable!(),
        }
    }
}
