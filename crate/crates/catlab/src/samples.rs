//! Small machines used by the verification suite and the CLI demos:
//! iterative-array transducers, finite-state transducers, and pushdown
//! transducers with known transductions.

use std::collections::BTreeSet;

use crate::machine::{
    IatCommRule, IatSpec, SeqRule, SeqTransducerSpec, TransducerKind, END_MARKER,
};

fn ab() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

fn comm(input: &str, from: &str, right: &str, out: &str, to: &str) -> IatCommRule {
    IatCommRule {
        input: input.into(),
        comm: from.into(),
        right: right.into(),
        out: out.into(),
        next: to.into(),
    }
}

/// Reads each symbol and emits it unchanged; accepts and halts at the end
/// marker. Real time: accepts at step n + 1, last output at step n.
pub fn iat_identity() -> IatSpec {
    let mut delta_comm = Vec::new();
    for x in ["a", "b"] {
        delta_comm.push(comm(x, "q0", "q0", x, "run"));
        delta_comm.push(comm(x, "run", "q0", x, "run"));
    }
    delta_comm.push(comm(END_MARKER, "run", "q0", "", "acc"));
    IatSpec {
        states: vec!["q0".into(), "run".into(), "acc".into()],
        accepting: BTreeSet::from(["acc".to_string()]),
        input_alphabet: ab(),
        output_alphabet: ab(),
        quiescent: "q0".into(),
        end_marker: END_MARKER.into(),
        delta_interior: vec![],
        default_interior: true,
        delta_comm,
    }
}

/// Emits, for each symbol read, the parity bit of the number of `a`s seen
/// so far (current symbol included).
pub fn iat_parity_annotator() -> IatSpec {
    let delta_comm = vec![
        comm("a", "q0", "q0", "1", "odd"),
        comm("b", "q0", "q0", "0", "even"),
        comm("a", "even", "q0", "1", "odd"),
        comm("a", "odd", "q0", "0", "even"),
        comm("b", "even", "q0", "0", "even"),
        comm("b", "odd", "q0", "1", "odd"),
        comm(END_MARKER, "even", "q0", "", "acc"),
        comm(END_MARKER, "odd", "q0", "", "acc"),
    ];
    IatSpec {
        states: vec!["q0".into(), "even".into(), "odd".into(), "acc".into()],
        accepting: BTreeSet::from(["acc".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec!["0".into(), "1".into()],
        quiescent: "q0".into(),
        end_marker: END_MARKER.into(),
        delta_interior: vec![],
        default_interior: true,
        delta_comm,
    }
}

/// Emits `1` at the first symbol of each maximal block of equal symbols and
/// `0` inside a block.
pub fn iat_block_counter() -> IatSpec {
    let delta_comm = vec![
        comm("a", "q0", "q0", "1", "sa"),
        comm("b", "q0", "q0", "1", "sb"),
        comm("a", "sa", "q0", "0", "sa"),
        comm("b", "sa", "q0", "1", "sb"),
        comm("b", "sb", "q0", "0", "sb"),
        comm("a", "sb", "q0", "1", "sa"),
        comm(END_MARKER, "sa", "q0", "", "acc"),
        comm(END_MARKER, "sb", "q0", "", "acc"),
    ];
    IatSpec {
        states: vec!["q0".into(), "sa".into(), "sb".into(), "acc".into()],
        accepting: BTreeSet::from(["acc".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec!["0".into(), "1".into()],
        quiescent: "q0".into(),
        end_marker: END_MARKER.into(),
        delta_interior: vec![],
        default_interior: true,
        delta_comm,
    }
}

/// Identity transducer whose second cell blinks in and out of the quiescent
/// state: exercises the re-quiescence normalization.
pub fn iat_blinker() -> IatSpec {
    use crate::machine::IatInteriorRule;
    let rule = |l: &str, c: &str, r: &str, next: &str| IatInteriorRule {
        left: l.into(),
        center: c.into(),
        right: r.into(),
        next: next.into(),
    };
    let mut delta_comm = Vec::new();
    for x in ["a", "b"] {
        delta_comm.push(comm(x, "q0", "q0", x, "run"));
        delta_comm.push(comm(x, "run", "q0", x, "run"));
        delta_comm.push(comm(x, "run", "on", x, "run"));
    }
    delta_comm.push(comm(END_MARKER, "run", "q0", "", "acc"));
    delta_comm.push(comm(END_MARKER, "run", "on", "", "acc"));
    IatSpec {
        states: vec!["q0".into(), "run".into(), "on".into(), "acc".into()],
        accepting: BTreeSet::from(["acc".to_string()]),
        input_alphabet: ab(),
        output_alphabet: ab(),
        quiescent: "q0".into(),
        end_marker: END_MARKER.into(),
        delta_interior: vec![
            rule("run", "q0", "q0", "on"),
            // The blink falls back to quiescent one step later.
            rule("run", "on", "q0", "q0"),
            rule("acc", "on", "q0", "q0"),
        ],
        default_interior: true,
        delta_comm,
    }
}

fn fst_rule(from: &str, input: &str, to: &str, out: &str) -> SeqRule {
    SeqRule {
        from: from.into(),
        input: (!input.is_empty()).then(|| input.to_string()),
        pop: None,
        to: to.into(),
        out: out.into(),
        push: None,
    }
}

fn pdt_rule(from: &str, input: &str, pop: &str, to: &str, out: &str, push: &str) -> SeqRule {
    SeqRule {
        from: from.into(),
        input: (!input.is_empty()).then(|| input.to_string()),
        pop: Some(pop.into()),
        to: to.into(),
        out: out.into(),
        push: Some(push.into()),
    }
}

/// Nondeterministic FST accepting `(ab)+` and emitting nothing.
pub fn fst_ab_plus() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Fst,
        states: vec!["q0".into(), "q1".into(), "qf".into()],
        initial: "q0".into(),
        accepting: BTreeSet::from(["qf".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec![],
        stack_alphabet: vec![],
        initial_stack: None,
        rules: vec![
            fst_rule("q0", "a", "q1", ""),
            fst_rule("q1", "b", "qf", ""),
            fst_rule("qf", "a", "q1", ""),
        ],
    }
}

/// Deterministic FST computing the homomorphism a -> 0, b -> 11.
pub fn dfst_homomorphism() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Fst,
        states: vec!["p".into()],
        initial: "p".into(),
        accepting: BTreeSet::from(["p".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec!["0".into(), "1".into()],
        stack_alphabet: vec![],
        initial_stack: None,
        rules: vec![fst_rule("p", "a", "p", "0"), fst_rule("p", "b", "p", "11")],
    }
}

/// Single-valued, nondeterministic, unambiguous FST: accepts exactly the
/// words ending in `b` and outputs the input unchanged. The accepting path
/// guesses the final symbol.
pub fn sfst_ends_in_b() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Fst,
        states: vec!["q0".into(), "qf".into()],
        initial: "q0".into(),
        accepting: BTreeSet::from(["qf".to_string()]),
        input_alphabet: ab(),
        output_alphabet: ab(),
        stack_alphabet: vec![],
        initial_stack: None,
        rules: vec![
            fst_rule("q0", "a", "q0", "a"),
            fst_rule("q0", "b", "q0", "b"),
            fst_rule("q0", "b", "qf", "b"),
        ],
    }
}

/// Genuinely ambiguous FST: two accepting paths with different outputs on `a`.
pub fn fst_ambiguous() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Fst,
        states: vec!["q0".into(), "qf".into(), "qg".into()],
        initial: "q0".into(),
        accepting: BTreeSet::from(["qf".to_string(), "qg".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec!["x".into(), "y".into()],
        stack_alphabet: vec![],
        initial_stack: None,
        rules: vec![fst_rule("q0", "a", "qf", "x"), fst_rule("q0", "a", "qg", "y")],
    }
}

/// Deterministic PDT realizing `{(a^n b^n, a^n)}`: pushes on `a`, pops and
/// emits on `b`, and accepts through a final λ-move on the bottom marker.
pub fn dpdt_an_bn() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Pdt,
        states: vec!["p".into(), "q".into(), "f".into()],
        initial: "p".into(),
        accepting: BTreeSet::from(["f".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec!["a".into()],
        stack_alphabet: vec!["Z".into(), "X".into()],
        initial_stack: Some("Z".into()),
        rules: vec![
            pdt_rule("p", "a", "Z", "p", "", "XZ"),
            pdt_rule("p", "a", "X", "p", "", "XX"),
            pdt_rule("p", "b", "X", "q", "a", ""),
            pdt_rule("q", "b", "X", "q", "a", ""),
            pdt_rule("q", "", "Z", "f", "", "Z"),
        ],
    }
}

/// Like [`dpdt_an_bn`] but the acceptance runs through a two-move λ-burst
/// that emits a trailing `c`: realizes `{(a^n b^n, a^n c)}` with k2 = 2.
pub fn dpdt_lambda_burst() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Pdt,
        states: vec!["p".into(), "q".into(), "e".into(), "f".into()],
        initial: "p".into(),
        accepting: BTreeSet::from(["f".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec!["a".into(), "c".into()],
        stack_alphabet: vec!["Z".into(), "X".into()],
        initial_stack: Some("Z".into()),
        rules: vec![
            pdt_rule("p", "a", "Z", "p", "", "XZ"),
            pdt_rule("p", "a", "X", "p", "", "XX"),
            pdt_rule("p", "b", "X", "q", "a", ""),
            pdt_rule("q", "b", "X", "q", "a", ""),
            pdt_rule("q", "", "Z", "e", "c", "Z"),
            pdt_rule("e", "", "Z", "f", "", "Z"),
        ],
    }
}

/// λ-free deterministic PDT copying its input (identity transduction).
pub fn dpdt_copy() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Pdt,
        states: vec!["p".into()],
        initial: "p".into(),
        accepting: BTreeSet::from(["p".to_string()]),
        input_alphabet: ab(),
        output_alphabet: ab(),
        stack_alphabet: vec!["Z".into()],
        initial_stack: Some("Z".into()),
        rules: vec![pdt_rule("p", "a", "Z", "p", "a", "Z"), pdt_rule("p", "b", "Z", "p", "b", "Z")],
    }
}

/// Pathological PDT with a reachable λ-cycle: constants computation must
/// reject it.
pub fn dpdt_lambda_loop() -> SeqTransducerSpec {
    SeqTransducerSpec {
        kind: TransducerKind::Pdt,
        states: vec!["p".into()],
        initial: "p".into(),
        accepting: BTreeSet::from(["p".to_string()]),
        input_alphabet: ab(),
        output_alphabet: vec![],
        stack_alphabet: vec!["Z".into()],
        initial_stack: Some("Z".into()),
        rules: vec![pdt_rule("p", "", "Z", "p", "", "Z")],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{default_step_cap, iat_run, word_of, RunnableIat};
    use crate::machine::{validate_iat, validate_seq};

    #[test]
    fn samples_validate() {
        assert!(validate_iat(&iat_identity()).is_empty());
        assert!(validate_iat(&iat_parity_annotator()).is_empty());
        assert!(validate_iat(&iat_block_counter()).is_empty());
        assert!(validate_iat(&iat_blinker()).is_empty());
        assert!(validate_seq(&fst_ab_plus()).is_empty());
        assert!(validate_seq(&dfst_homomorphism()).is_empty());
        assert!(validate_seq(&sfst_ends_in_b()).is_empty());
        assert!(validate_seq(&fst_ambiguous()).is_empty());
        assert!(validate_seq(&dpdt_an_bn()).is_empty());
        assert!(validate_seq(&dpdt_lambda_burst()).is_empty());
        assert!(validate_seq(&dpdt_copy()).is_empty());
        assert!(validate_seq(&dpdt_lambda_loop()).is_empty());
    }

    #[test]
    fn identity_iat_on_ab() {
        let iat = RunnableIat::new(&iat_identity()).unwrap();
        let trace = iat_run(&iat, &word_of("ab"), default_step_cap(2)).unwrap();
        assert_eq!(trace.final_output.as_deref(), Some("ab"));
        assert_eq!(trace.accept_time, Some(3));
        assert_eq!(trace.output_complete_time, Some(2));
    }

    #[test]
    fn iat_halting_at_start_yields_no_transduction() {
        // No comm rule for `b` from q0 with an `a`-only table: build one.
        let mut spec = iat_identity();
        spec.delta_comm.retain(|r| r.input != "b" || r.comm != "q0");
        let iat = RunnableIat::new(&spec).unwrap();
        let trace = iat_run(&iat, &word_of("ba"), 16).unwrap();
        assert!(trace.complete);
        assert_eq!(trace.final_output, None);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn lambda_emitting_iat_yields_empty_output() {
        let mut spec = iat_identity();
        for rule in &mut spec.delta_comm {
            rule.out = String::new();
        }
        let iat = RunnableIat::new(&spec).unwrap();
        let trace = iat_run(&iat, &word_of("aaa"), 16).unwrap();
        assert_eq!(trace.final_output.as_deref(), Some(""));
    }

    #[test]
    fn parity_annotator_output() {
        let iat = RunnableIat::new(&iat_parity_annotator()).unwrap();
        let trace = iat_run(&iat, &word_of("abab"), 16).unwrap();
        // a (odd) b (odd) a (even) b (even).
        assert_eq!(trace.final_output.as_deref(), Some("1100"));
    }

    #[test]
    fn block_counter_output() {
        let iat = RunnableIat::new(&iat_block_counter()).unwrap();
        let trace = iat_run(&iat, &word_of("aabba"), 20).unwrap();
        assert_eq!(trace.final_output.as_deref(), Some("10101"));
    }

    #[test]
    fn blinker_reenters_quiescent_and_still_transduces() {
        let spec = iat_blinker();
        let iat = RunnableIat::new(&spec).unwrap();
        let trace = iat_run(&iat, &word_of("aba"), 20).unwrap();
        assert_eq!(trace.final_output.as_deref(), Some("aba"));
        // The second array cell leaves and re-enters the quiescent state
        // (it sees the communication cell wake up with one step of delay).
        assert_eq!(trace.state_name(trace.steps[2].cells[1]), "on");
        assert_eq!(trace.state_name(trace.steps[3].cells[1]), "q0");
    }
}
