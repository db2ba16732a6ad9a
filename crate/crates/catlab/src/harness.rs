//! Brute-force oracles, exhaustive equivalence checking, and time-complexity
//! measurement: the verification backbone against which every builtin and
//! compiled machine is judged.

use std::collections::BTreeSet;
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::engine::{
    cat_run, default_step_cap, iat_run, RunTrace, RunnableCat, RunnableIat, TraceKind,
};
use crate::machine::{
    CatSpec, IatSpec, SeqTransducerSpec, TimeComplexity, TimeModel, TransducerKind,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("oracle `{0}` is unknown")]
    UnknownOracle(String),
    #[error("λ-step bound exceeded on `{0}`: the transducer loops on empty input")]
    LambdaLoop(String),
    #[error("machine failed to run on `{0}`: {1}")]
    Run(String, String),
    #[error("path explosion on `{0}`: more than {1} live branches")]
    PathExplosion(String, usize),
}

/// Sequential replay of an FST along every nondeterministic path.
/// Returns the set of outputs of accepting computations.
pub fn oracle_fst_all_paths(
    spec: &SeqTransducerSpec,
    word: &[String],
) -> Result<BTreeSet<String>, HarnessError> {
    const MAX_BRANCHES: usize = 100_000;
    debug_assert_eq!(spec.kind, TransducerKind::Fst);
    // λ-free FSTs only: one rule application per input symbol.
    let mut live: BTreeSet<(String, String)> = BTreeSet::new();
    live.insert((spec.initial.clone(), String::new()));
    for sym in word {
        let mut next = BTreeSet::new();
        for (state, out) in &live {
            for rule in &spec.rules {
                if rule.from == *state && rule.input.as_deref() == Some(sym.as_str()) {
                    next.insert((rule.to.clone(), format!("{out}{}", rule.out)));
                }
            }
        }
        if next.len() > MAX_BRANCHES {
            return Err(HarnessError::PathExplosion(join_word(word), MAX_BRANCHES));
        }
        live = next;
    }
    Ok(live
        .into_iter()
        .filter(|(state, _)| spec.accepting.contains(state))
        .map(|(_, out)| out)
        .collect())
}

/// Deterministic replay of a DPDT. Returns the output when the word is
/// accepted (accepting state reached with the whole input consumed), `None`
/// when rejected. The machine runs move by move, taking λ-rules when no
/// input rule applies, and stops at the first accepting configuration after
/// consuming the input.
pub fn oracle_dpdt(
    spec: &SeqTransducerSpec,
    word: &[String],
) -> Result<Option<String>, HarnessError> {
    debug_assert_eq!(spec.kind, TransducerKind::Pdt);
    let lambda_cap = spec.states.len() * spec.stack_alphabet.len() + 1;
    let mut state = spec.initial.clone();
    let mut stack: Vec<char> = spec
        .initial_stack
        .as_ref()
        .and_then(|z| z.chars().next())
        .into_iter()
        .collect();
    let mut out = String::new();
    let mut pos = 0usize;
    let mut lambda_run = 0usize;

    let accepting_now = |state: &String, pos: usize| pos == word.len() && spec.accepting.contains(state);
    loop {
        if accepting_now(&state, pos) {
            return Ok(Some(out));
        }
        let top = match stack.last() {
            Some(&g) => g.to_string(),
            None => return Ok(None),
        };
        let input_rule = (pos < word.len()).then(|| {
            spec.rules.iter().find(|r| {
                r.from == state
                    && r.input.as_deref() == Some(word[pos].as_str())
                    && r.pop.as_deref() == Some(top.as_str())
            })
        });
        let lambda_rule = spec
            .rules
            .iter()
            .find(|r| r.from == state && r.input.is_none() && r.pop.as_deref() == Some(top.as_str()));
        let (rule, consumed) = match (input_rule.flatten(), lambda_rule) {
            (Some(r), _) => (r, true),
            (None, Some(r)) => (r, false),
            (None, None) => return Ok(None),
        };
        if consumed {
            pos += 1;
            lambda_run = 0;
        } else {
            lambda_run += 1;
            if lambda_run > lambda_cap {
                return Err(HarnessError::LambdaLoop(join_word(word)));
            }
        }
        stack.pop();
        for g in rule.push.as_deref().unwrap_or("").chars().rev() {
            stack.push(g);
        }
        out.push_str(&rule.out);
        state = rule.to.clone();
    }
}

/// Direct computations of the worked-example transductions.
pub fn oracle_function(name: &str) -> Option<fn(&str) -> Option<String>> {
    match name {
        "copy" => Some(|w| (!w.is_empty()).then(|| format!("{w}{w}"))),
        "sort" => Some(|w| {
            if w.is_empty() {
                return None;
            }
            let a = w.chars().filter(|&c| c == 'a').count();
            let b = w.chars().filter(|&c| c == 'b').count();
            Some(format!("{}{}", "a".repeat(a), "b".repeat(b)))
        }),
        "reverse" => Some(|w| (!w.is_empty()).then(|| w.chars().rev().collect())),
        "square_marker" => Some(|w| {
            if w.is_empty() || w.len() % 2 != 0 {
                return None;
            }
            let (u, v) = w.split_at(w.len() / 2);
            (u == v).then(|| format!("{u}{}", "c".repeat(u.len())))
        }),
        _ => None,
    }
}

/// Checks bounded single-valuedness of a λ-free FST: no word of length up to
/// `max_len` has two distinct outputs. Returns the shortest ambiguity
/// witness in shortlex order if one exists.
pub fn check_single_valued(
    spec: &SeqTransducerSpec,
    max_len: usize,
) -> Result<Option<String>, HarnessError> {
    for word in ShortlexWords::new(&spec.input_alphabet, max_len) {
        let outputs = oracle_fst_all_paths(spec, &word)?;
        if outputs.len() > 1 {
            return Ok(Some(join_word(&word)));
        }
    }
    Ok(None)
}

/// All words over `alphabet` of length 1..=max_len in shortlex order.
pub struct ShortlexWords {
    alphabet: Vec<String>,
    max_len: usize,
    len: usize,
    counter: Vec<usize>,
    done: bool,
}

impl ShortlexWords {
    pub fn new(alphabet: &[String], max_len: usize) -> Self {
        ShortlexWords {
            alphabet: alphabet.to_vec(),
            max_len,
            len: 1,
            counter: vec![0],
            done: alphabet.is_empty() || max_len == 0,
        }
    }
}

impl Iterator for ShortlexWords {
    type Item = Vec<String>;

    fn next(&mut self) -> Option<Vec<String>> {
        if self.done {
            return None;
        }
        let word: Vec<String> =
            self.counter.iter().map(|&i| self.alphabet[i].clone()).collect();
        // Advance the counter, carrying into longer lengths.
        let mut i = self.counter.len();
        loop {
            if i == 0 {
                self.len += 1;
                if self.len > self.max_len {
                    self.done = true;
                } else {
                    self.counter = vec![0; self.len];
                }
                break;
            }
            i -= 1;
            self.counter[i] += 1;
            if self.counter[i] < self.alphabet.len() {
                break;
            }
            self.counter[i] = 0;
        }
        Some(word)
    }
}

pub fn join_word(word: &[String]) -> String {
    if word.iter().all(|s| s.chars().count() == 1) {
        word.concat()
    } else {
        word.join(" ")
    }
}

/// Any machine the harness can drive word by word.
pub enum Machine<'a> {
    Cat(&'a CatSpec),
    Iat(&'a IatSpec),
}

enum RunnableMachine {
    Cat(RunnableCat),
    Iat(RunnableIat),
}

impl RunnableMachine {
    fn run(&self, word: &[String], step_cap: usize) -> Result<RunTrace, crate::engine::EngineError> {
        match self {
            RunnableMachine::Cat(m) => cat_run(m, word, step_cap),
            RunnableMachine::Iat(m) => iat_run(m, word, step_cap),
        }
    }
}

/// The result a machine produced on one word: `None` when rejected or
/// incomplete, otherwise the transduction output.
pub type Oracle<'a> = dyn Fn(&[String]) -> Result<Option<String>, HarnessError> + 'a;

/// Per-length worst-case timing observed during a check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingRow {
    pub len: usize,
    pub words: usize,
    pub max_accept: Option<usize>,
    pub max_complete: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of an exhaustive oracle-vs-machine comparison: verdict, shortest
/// differing word if any, and the measured timing profile.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub words_checked: usize,
    pub timing: Vec<TimingRow>,
    /// Declared bounds the timing profile was checked against, with any
    /// machine-specific relaxation recorded explicitly.
    pub bounds_note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub word: String,
    pub expected: Option<String>,
    pub got: Option<String>,
    pub detail: String,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            Verdict::Pass => writeln!(f, "pass ({} words checked)", self.words_checked)?,
            Verdict::Fail => writeln!(f, "FAIL after {} words", self.words_checked)?,
        }
        if let Some(ce) = &self.counterexample {
            writeln!(
                f,
                "counterexample `{}`: expected {:?}, got {:?} ({})",
                ce.word, ce.expected, ce.got, ce.detail
            )?;
        }
        if let Some(note) = &self.bounds_note {
            writeln!(f, "bounds: {note}")?;
        }
        for row in &self.timing {
            writeln!(
                f,
                "  n={:<3} words={:<6} max t_i={} max t_o={}",
                row.len,
                row.words,
                row.max_accept.map_or("-".into(), |t| t.to_string()),
                row.max_complete.map_or("-".into(), |t| t.to_string()),
            )?;
        }
        Ok(())
    }
}

impl EquivalenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": match self.verdict { Verdict::Pass => "pass", Verdict::Fail => "fail" },
            "words_checked": self.words_checked,
            "counterexample": self.counterexample.as_ref().map(|ce| serde_json::json!({
                "word": ce.word,
                "expected": ce.expected,
                "got": ce.got,
                "detail": ce.detail,
            })),
            "bounds": self.bounds_note,
            "timing": self.timing.iter().map(|row| serde_json::json!({
                "len": row.len,
                "words": row.words,
                "max_accept": row.max_accept,
                "max_complete": row.max_complete,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Enumerates all words of length `1..=max_len` over `alphabet` in shortlex
/// order and compares the machine's acceptance and output against the
/// oracle. Engine runs that hit the step cap count as failures.
pub fn equiv_check(
    machine: Machine<'_>,
    oracle: &Oracle<'_>,
    alphabet: &[String],
    max_len: usize,
) -> Result<EquivalenceReport, HarnessError> {
    equiv_check_with_note(machine, oracle, alphabet, max_len, None)
}

pub fn equiv_check_with_note(
    machine: Machine<'_>,
    oracle: &Oracle<'_>,
    alphabet: &[String],
    max_len: usize,
    bounds_note: Option<String>,
) -> Result<EquivalenceReport, HarnessError> {
    equiv_check_full(machine, oracle, alphabet, max_len, bounds_note, None)
}

/// As [`equiv_check`], with an explicit step-cap override for machines whose
/// completion time exceeds the default `4n + 16`.
pub fn equiv_check_full(
    machine: Machine<'_>,
    oracle: &Oracle<'_>,
    alphabet: &[String],
    max_len: usize,
    bounds_note: Option<String>,
    step_cap: Option<&dyn Fn(usize) -> usize>,
) -> Result<EquivalenceReport, HarnessError> {
    let runnable = match machine {
        Machine::Cat(spec) => RunnableMachine::Cat(
            RunnableCat::new(spec).map_err(|e| HarnessError::Run("<build>".into(), e.to_string()))?,
        ),
        Machine::Iat(spec) => RunnableMachine::Iat(
            RunnableIat::new(spec).map_err(|e| HarnessError::Run("<build>".into(), e.to_string()))?,
        ),
    };
    let mut words_checked = 0usize;
    let mut timing: Vec<TimingRow> = Vec::new();
    for word in ShortlexWords::new(alphabet, max_len) {
        let n = word.len();
        if timing.last().is_none_or(|row| row.len != n) {
            timing.push(TimingRow { len: n, words: 0, max_accept: None, max_complete: None });
        }
        let expected = oracle(&word)?;
        let text = join_word(&word);
        let cap = step_cap.map_or_else(|| default_step_cap(n), |f| f(n));
        let trace = runnable
            .run(&word, cap)
            .map_err(|e| HarnessError::Run(text.clone(), e.to_string()))?;
        words_checked += 1;
        let row = timing.last_mut().expect("row pushed above");
        row.words += 1;
        if trace.transduced() {
            row.max_accept = row.max_accept.max(trace.accept_time);
            row.max_complete = row.max_complete.max(trace.output_complete_time);
        }
        let got = trace.final_output.clone();
        let mismatch = match (&expected, &got) {
            (Some(e), Some(g)) if e == g => None,
            (None, None) => None,
            (Some(_), Some(_)) => Some("outputs differ".to_string()),
            (Some(_), None) => Some(if trace.complete {
                "machine rejects a word the oracle transduces".to_string()
            } else {
                "run incomplete at the step cap".to_string()
            }),
            (None, Some(_)) => Some("machine transduces a word the oracle rejects".to_string()),
        };
        if let Some(detail) = mismatch {
            return Ok(EquivalenceReport {
                verdict: Verdict::Fail,
                counterexample: Some(Counterexample { word: text, expected, got, detail }),
                words_checked,
                timing,
                bounds_note,
            });
        }
    }
    Ok(EquivalenceReport {
        verdict: Verdict::Pass,
        counterexample: None,
        words_checked,
        timing,
        bounds_note,
    })
}

/// Seed recorded in sampled measurements, for reproducibility.
pub const SAMPLING_SEED: u64 = 0xCA7_1AB;

/// Lengths at or below this are measured exhaustively; above it, words are
/// sampled.
pub const EXHAUSTIVE_CUTOFF: usize = 10;
pub const SAMPLES_PER_LENGTH: usize = 24;

/// Per-length measurement of worst observed acceptance and completion times.
#[derive(Debug, Clone)]
pub struct ComplexityProfile {
    pub rows: Vec<TimingRow>,
    pub seed: u64,
    pub model: TimeModel,
}

impl ComplexityProfile {
    /// Checks the measured profile against declared bounds; returns the
    /// offending rows.
    pub fn violations(&self, ti: TimeComplexity, to: TimeComplexity) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            let n = row.len as u64;
            if let Some(t) = row.max_accept {
                if !ti.allows(t as u64, n, self.model) {
                    out.push(format!("t_i({}) = {} exceeds {}", row.len, t, ti));
                }
            }
            if let Some(t) = row.max_complete {
                if !to.allows(t as u64, n, self.model) {
                    out.push(format!("t_o({}) = {} exceeds {}", row.len, t, to));
                }
            }
        }
        out
    }

    /// Smallest factor `c` with every measured time at most `c * n`.
    pub fn measured_factor(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let n = row.len as f64;
            if let Some(t) = row.max_accept {
                worst = worst.max(t as f64 / n);
            }
            if let Some(t) = row.max_complete {
                worst = worst.max(t as f64 / n);
            }
        }
        worst
    }
}

/// Measures worst-case acceptance and output-completion times per length:
/// exhaustive below [`EXHAUSTIVE_CUTOFF`], seeded random sampling above.
/// Only transduced words contribute (rejected words carry no bound).
pub fn measure_complexity(
    machine: Machine<'_>,
    alphabet: &[String],
    lengths: impl IntoIterator<Item = usize>,
) -> Result<ComplexityProfile, HarnessError> {
    measure_complexity_with_cap(machine, alphabet, lengths, None)
}

pub fn measure_complexity_with_cap(
    machine: Machine<'_>,
    alphabet: &[String],
    lengths: impl IntoIterator<Item = usize>,
    step_cap: Option<&dyn Fn(usize) -> usize>,
) -> Result<ComplexityProfile, HarnessError> {
    let (runnable, model) = match machine {
        Machine::Cat(spec) => (
            RunnableMachine::Cat(
                RunnableCat::new(spec)
                    .map_err(|e| HarnessError::Run("<build>".into(), e.to_string()))?,
            ),
            TimeModel::Cat,
        ),
        Machine::Iat(spec) => (
            RunnableMachine::Iat(
                RunnableIat::new(spec)
                    .map_err(|e| HarnessError::Run("<build>".into(), e.to_string()))?,
            ),
            TimeModel::Iat,
        ),
    };
    let mut rng = StdRng::seed_from_u64(SAMPLING_SEED);
    let mut rows = Vec::new();
    for n in lengths {
        let mut row = TimingRow { len: n, words: 0, max_accept: None, max_complete: None };
        let cap = step_cap.map_or_else(|| default_step_cap(n), |f| f(n));
        let measure = |word: &[String], row: &mut TimingRow| -> Result<(), HarnessError> {
            let trace = runnable
                .run(word, cap)
                .map_err(|e| HarnessError::Run(join_word(word), e.to_string()))?;
            row.words += 1;
            if trace.transduced() {
                row.max_accept = row.max_accept.max(trace.accept_time);
                row.max_complete = row.max_complete.max(trace.output_complete_time);
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_CUTOFF {
            let mut word = vec![alphabet[0].clone(); n];
            let k = alphabet.len();
            let mut idx = vec![0usize; n];
            loop {
                measure(&word, &mut row)?;
                let mut i = n;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    idx[i] += 1;
                    if idx[i] < k {
                        word[i] = alphabet[idx[i]].clone();
                        break;
                    }
                    idx[i] = 0;
                    word[i] = alphabet[0].clone();
                }
                if idx.iter().all(|&v| v == 0) {
                    break;
                }
            }
        } else {
            for _ in 0..SAMPLES_PER_LENGTH {
                let word: Vec<String> = (0..n)
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
                    .collect();
                measure(&word, &mut row)?;
            }
        }
        rows.push(row);
    }
    Ok(ComplexityProfile { rows, seed: SAMPLING_SEED, model })
}

/// An oracle that replays another cell machine (used when checking compiled
/// machines against their sources).
pub fn machine_oracle<'a>(
    machine: Machine<'a>,
) -> Result<Box<dyn Fn(&[String]) -> Result<Option<String>, HarnessError> + 'a>, HarnessError> {
    let runnable = match machine {
        Machine::Cat(spec) => RunnableMachine::Cat(
            RunnableCat::new(spec).map_err(|e| HarnessError::Run("<build>".into(), e.to_string()))?,
        ),
        Machine::Iat(spec) => RunnableMachine::Iat(
            RunnableIat::new(spec).map_err(|e| HarnessError::Run("<build>".into(), e.to_string()))?,
        ),
    };
    Ok(Box::new(move |word: &[String]| {
        let trace = runnable
            .run(word, default_step_cap(word.len()))
            .map_err(|e| HarnessError::Run(join_word(word), e.to_string()))?;
        Ok(trace.final_output)
    }))
}

/// Fuzz result for the engine-invariant properties.
#[derive(Debug, Clone)]
pub struct FuzzReport {
    pub cases: usize,
    pub failures: Vec<String>,
}

/// Random small CATs and words: checks output-register monotonicity and
/// run determinism on every case.
pub fn fuzz_engine_invariants(cases: usize, seed: u64) -> FuzzReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let spec = random_cat(&mut rng);
        let cat = match RunnableCat::new(&spec) {
            Ok(cat) => cat,
            Err(e) => {
                failures.push(format!("case {case}: generated spec invalid: {e}"));
                continue;
            }
        };
        let n = rng.random_range(1..=8);
        let word: Vec<String> = (0..n)
            .map(|_| spec.input_alphabet[rng.random_range(0..spec.input_alphabet.len())].clone())
            .collect();
        let cap = default_step_cap(n);
        let t1 = cat_run(&cat, &word, cap).expect("valid word");
        let t2 = cat_run(&cat, &word, cap).expect("valid word");
        // Determinism: identical traces step for step.
        if t1.steps.len() != t2.steps.len()
            || t1
                .steps
                .iter()
                .zip(&t2.steps)
                .any(|(a, b)| a.cells != b.cells || a.outputs != b.outputs)
        {
            failures.push(format!("case {case}: two runs differ on `{}`", join_word(&word)));
        }
        // Monotonicity: a filled register never changes.
        'mono: for (t, pair) in t1.steps.windows(2).enumerate() {
            for i in 0..n {
                if let Some(prev) = &pair[0].outputs[i] {
                    if pair[1].outputs[i].as_deref() != Some(prev.as_ref()) {
                        failures.push(format!(
                            "case {case}: register {i} changed at step {} on `{}`",
                            t + 1,
                            join_word(&word)
                        ));
                        break 'mono;
                    }
                }
            }
        }
    }
    FuzzReport { cases, failures }
}

/// A uniformly random small total CAT over a two-symbol alphabet.
pub fn random_cat(rng: &mut StdRng) -> CatSpec {
    use crate::machine::{CatRule, Ctx};
    let extra = rng.random_range(0..=2usize);
    let states: Vec<String> =
        ["a", "b", "q1", "q2"].iter().take(2 + extra).map(|s| s.to_string()).collect();
    let mut delta = Vec::new();
    let ctxs: Vec<Ctx> = std::iter::once(Ctx::Boundary)
        .chain(states.iter().cloned().map(Ctx::State))
        .collect();
    for l in &ctxs {
        for c in &states {
            for r in &ctxs {
                let next = states[rng.random_range(0..states.len())].clone();
                let out = match rng.random_range(0..4) {
                    0 => None,
                    1 => Some(String::new()),
                    2 => Some("a".to_string()),
                    _ => Some("ab".to_string()),
                };
                delta.push(CatRule {
                    left: l.clone(),
                    center: c.clone(),
                    right: r.clone(),
                    next,
                    out,
                });
            }
        }
    }
    let accepting = states
        .iter()
        .filter(|_| rng.random_bool(0.4))
        .cloned()
        .collect();
    CatSpec {
        states: states.clone(),
        accepting,
        input_alphabet: vec!["a".into(), "b".into()],
        output_alphabet: vec!["a".into(), "b".into()],
        delta,
        default_rule: false,
    }
}

/// Speed-of-light check: changing the last input symbol cannot influence the
/// leftmost cell before step `n - 1`.
pub fn check_locality(cases: usize, seed: u64) -> FuzzReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let spec = random_cat(&mut rng);
        let cat = match RunnableCat::new(&spec) {
            Ok(cat) => cat,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let n = rng.random_range(2..=8);
        let mut word: Vec<String> = (0..n)
            .map(|_| spec.input_alphabet[rng.random_range(0..spec.input_alphabet.len())].clone())
            .collect();
        let t1 = cat_run(&cat, &word, n + 2).expect("valid word");
        let last = word[n - 1].clone();
        word[n - 1] = if last == "a" { "b".into() } else { "a".into() };
        let t2 = cat_run(&cat, &word, n + 2).expect("valid word");
        for t in 0..n.saturating_sub(1) {
            match (t1.steps.get(t), t2.steps.get(t)) {
                (Some(s1), Some(s2)) => {
                    if s1.cells[0] != s2.cells[0] {
                        failures.push(format!(
                            "case {case}: cell 1 differs at step {t} < n-1 = {}",
                            n - 1
                        ));
                        break;
                    }
                }
                _ => break,
            }
        }
    }
    FuzzReport { cases, failures }
}

/// IAT quiescence: cells beyond index t are quiescent at time t.
pub fn check_iat_quiescence(spec: &IatSpec, words: &[Vec<String>]) -> Vec<String> {
    let mut failures = Vec::new();
    let Ok(iat) = RunnableIat::new(spec) else {
        return vec!["spec invalid".into()];
    };
    let names = iat.state_names();
    for word in words {
        let Ok(trace) = iat_run(&iat, word, default_step_cap(word.len())) else {
            continue;
        };
        debug_assert_eq!(trace.kind, TraceKind::Iat);
        for (t, step) in trace.steps.iter().enumerate() {
            // step.cells[0] is the communication cell; array cell j is at
            // index j - 1. Cell j can first be excited at time j - 1.
            for (idx, &state) in step.cells.iter().enumerate().skip(1) {
                if idx > t && names[state as usize] != spec.quiescent {
                    failures.push(format!(
                        "word `{}`: array cell {} non-quiescent at time {t}",
                        join_word(word),
                        idx + 1,
                    ));
                }
            }
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::word_of;

    #[test]
    fn function_oracles_match_the_definitions() {
        assert_eq!(oracle_function("copy").unwrap()("ab"), Some("abab".into()));
        assert_eq!(oracle_function("sort").unwrap()("babaabba"), Some("aaaabbbb".into()));
        assert_eq!(oracle_function("reverse").unwrap()("ab"), Some("ba".into()));
        assert_eq!(oracle_function("square_marker").unwrap()("abab"), Some("abcc".into()));
        assert_eq!(oracle_function("square_marker").unwrap()("aba"), None);
        assert_eq!(oracle_function("square_marker").unwrap()("abba"), None);
    }

    #[test]
    fn shortlex_enumerates_2046_words_to_len_10() {
        let ab = vec!["a".to_string(), "b".to_string()];
        assert_eq!(ShortlexWords::new(&ab, 10).count(), 2046);
        assert_eq!(ShortlexWords::new(&ab, 1).count(), 2);
        let first: Vec<String> =
            ShortlexWords::new(&ab, 2).map(|w| join_word(&w)).collect();
        assert_eq!(first, ["a", "b", "aa", "ab", "ba", "bb"]);
    }

    #[test]
    fn copy_builtin_passes_equiv_to_len_6() {
        let spec = crate::builtins::builtin_by_name("copy").unwrap();
        let f = oracle_function("copy").unwrap();
        let oracle = move |w: &[String]| Ok(f(&join_word(w)));
        let ab = vec!["a".to_string(), "b".to_string()];
        let report = equiv_check(Machine::Cat(spec), &oracle, &ab, 6).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
        assert_eq!(report.words_checked, 126);
    }

    #[test]
    fn mutated_copy_fails_with_shortlex_minimal_counterexample() {
        let mut spec = crate::builtins::builtin_by_name("copy").unwrap().clone();
        // Corrupt one emitting rule.
        let rule = spec
            .delta
            .iter_mut()
            .find(|r| r.out.as_deref().map_or(false, |o| o == "ab"))
            .expect("an ab-emitting rule");
        rule.out = Some("ba".into());
        let f = oracle_function("copy").unwrap();
        let oracle = move |w: &[String]| Ok(f(&join_word(w)));
        let ab = vec!["a".to_string(), "b".to_string()];
        let report = equiv_check(Machine::Cat(&spec), &oracle, &ab, 6).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let ce = report.counterexample.unwrap();
        // Every shorter word in shortlex order passed before the failure.
        assert!(ce.word.len() <= 3, "{}", ce.word);
    }

    #[test]
    fn dpdt_oracle_runs_the_marker_sample() {
        let spec = crate::samples::dpdt_an_bn();
        assert_eq!(oracle_dpdt(&spec, &word_of("aabb")).unwrap(), Some("aa".into()));
        assert_eq!(oracle_dpdt(&spec, &word_of("ab")).unwrap(), Some("a".into()));
        assert_eq!(oracle_dpdt(&spec, &word_of("aab")).unwrap(), None);
        assert_eq!(oracle_dpdt(&spec, &word_of("ba")).unwrap(), None);
    }

    #[test]
    fn lambda_loop_is_reported() {
        let spec = crate::samples::dpdt_lambda_loop();
        assert!(matches!(
            oracle_dpdt(&spec, &word_of("a")),
            Err(HarnessError::LambdaLoop(_))
        ));
    }

    #[test]
    fn single_valued_checks() {
        let dfst = crate::samples::dfst_homomorphism();
        assert_eq!(check_single_valued(&dfst, 6).unwrap(), None);
        let ambiguous = crate::samples::fst_ambiguous();
        assert_eq!(check_single_valued(&ambiguous, 4).unwrap(), Some("a".into()));
        let sfst = crate::samples::sfst_ends_in_b();
        assert_eq!(check_single_valued(&sfst, 6).unwrap(), None);
    }

    #[test]
    fn empty_input_is_rejected_at_the_engine_boundary() {
        let spec = crate::builtins::builtin_by_name("copy").unwrap();
        let cat = RunnableCat::new(spec).unwrap();
        assert!(matches!(
            cat_run(&cat, &[], 8),
            Err(crate::engine::EngineError::EmptyInput)
        ));
        let iat = RunnableIat::new(&crate::samples::iat_identity()).unwrap();
        assert!(matches!(
            iat_run(&iat, &[], 8),
            Err(crate::engine::EngineError::EmptyInput)
        ));
    }

    #[test]
    fn iat_cells_beyond_the_front_stay_quiescent() {
        let words: Vec<Vec<String>> =
            ShortlexWords::new(&["a".to_string(), "b".to_string()], 6).collect();
        for spec in [
            crate::samples::iat_identity(),
            crate::samples::iat_blinker(),
            crate::samples::iat_parity_annotator(),
        ] {
            let failures = check_iat_quiescence(&spec, &words);
            assert!(failures.is_empty(), "{failures:?}");
        }
    }

    #[test]
    fn max_len_one_checks_two_words() {
        let spec = crate::builtins::builtin_by_name("copy").unwrap();
        let f = oracle_function("copy").unwrap();
        let oracle = move |w: &[String]| Ok(f(&join_word(w)));
        let ab = vec!["a".to_string(), "b".to_string()];
        let report = equiv_check(Machine::Cat(spec), &oracle, &ab, 1).unwrap();
        assert_eq!(report.words_checked, 2);
    }

    #[test]
    fn sort_measured_real_time_on_short_lengths() {
        let spec = crate::builtins::builtin_by_name("sort").unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        let profile = measure_complexity(Machine::Cat(spec), &ab, 2..=10).unwrap();
        for row in &profile.rows {
            assert!(row.max_accept.unwrap() <= row.len);
            assert_eq!(row.max_complete, Some(row.len));
        }
        assert!(profile.measured_factor() <= 1.0);
    }

    #[test]
    fn copy_single_letter_output_time_is_one() {
        let spec = crate::builtins::builtin_by_name("copy").unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        let profile = measure_complexity(Machine::Cat(spec), &ab, [1]).unwrap();
        assert_eq!(profile.rows[0].max_complete, Some(1));
    }

    #[test]
    fn measurement_reports_are_reproducible() {
        let spec = crate::builtins::builtin_by_name("copy").unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        let a = measure_complexity(Machine::Cat(spec), &ab, 2..=14).unwrap();
        let b = measure_complexity(Machine::Cat(spec), &ab, 2..=14).unwrap();
        assert_eq!(a.seed, SAMPLING_SEED);
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn fuzz_monotonicity_and_determinism() {
        let report = fuzz_engine_invariants(200, 1);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
    }

    #[test]
    fn fuzz_locality() {
        let report = check_locality(120, 2);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
    }
}
