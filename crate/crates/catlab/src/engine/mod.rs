//! Step-by-step execution of CAT and IAT specs, producing full space-time
//! traces with acceptance and output-completion times.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::machine::{CatSpec, Ctx, IatSpec, MachineSpec, Violation, BOUNDARY};

pub mod svg;
pub mod trace;

pub use trace::{RunTrace, TraceKind, TraceStep};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid machine: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("empty input: transductions are defined over non-empty words")]
    EmptyInput,
    #[error("symbol `{0}` is not in the input alphabet")]
    UnknownSymbol(String),
    #[error("delta has no entry for ({0}, {1}, {2}) and the spec carries no default rule")]
    UndefinedTransition(String, String, String),
    #[error("step cap must be at least 1")]
    ZeroStepCap,
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
}

/// Interned id; `BOUNDARY_ID` stands for `#` in delta keys.
pub(crate) const BOUNDARY_ID: u32 = u32::MAX;

/// A validated CAT with interned states, ready to run.
pub struct RunnableCat {
    input_alphabet: Vec<String>,
    names: Arc<Vec<String>>,
    index: HashMap<String, u32>,
    delta: crate::synth::FxMap<(u32, u32, u32), (u32, Option<Arc<str>>)>,
    accepting: Vec<bool>,
    default_rule: bool,
}

impl RunnableCat {
    pub fn new(spec: &CatSpec) -> Result<Self, EngineError> {
        let report = crate::machine::validate_cat(spec);
        if !report.is_empty() {
            return Err(EngineError::Invalid(report));
        }
        let names: Vec<String> = spec.states.clone();
        let index: HashMap<String, u32> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        let mut chunk_cache: HashMap<String, Arc<str>> = HashMap::new();
        let mut delta = crate::synth::FxMap::default();
        delta.reserve(spec.delta.len());
        for rule in &spec.delta {
            let l = match &rule.left {
                Ctx::Boundary => BOUNDARY_ID,
                Ctx::State(s) => index[s],
            };
            let c = index[&rule.center];
            let r = match &rule.right {
                Ctx::Boundary => BOUNDARY_ID,
                Ctx::State(s) => index[s],
            };
            let out = rule.out.as_ref().map(|w| {
                chunk_cache.entry(w.clone()).or_insert_with(|| Arc::from(w.as_str())).clone()
            });
            delta.insert((l, c, r), (index[&rule.next], out));
        }
        let mut accepting = vec![false; names.len()];
        for a in &spec.accepting {
            accepting[index[a] as usize] = true;
        }
        Ok(RunnableCat {
            input_alphabet: spec.input_alphabet.clone(),
            names: Arc::new(names),
            index,
            delta,
            accepting,
            default_rule: spec.default_rule,
        })
    }

    pub fn state_names(&self) -> Arc<Vec<String>> {
        Arc::clone(&self.names)
    }

    pub fn state_id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    fn lookup(&self, l: u32, c: u32, r: u32) -> Result<(u32, Option<Arc<str>>), EngineError> {
        if let Some(entry) = self.delta.get(&(l, c, r)) {
            return Ok(entry.clone());
        }
        if self.default_rule {
            return Ok((c, None));
        }
        let name = |id: u32| {
            if id == BOUNDARY_ID {
                BOUNDARY.to_string()
            } else {
                self.names[id as usize].clone()
            }
        };
        Err(EngineError::UndefinedTransition(name(l), name(c), name(r)))
    }

    fn intern_word(&self, word: &[String]) -> Result<Vec<u32>, EngineError> {
        if word.is_empty() {
            return Err(EngineError::EmptyInput);
        }
        word.iter()
            .map(|sym| {
                if !self.input_alphabet.contains(sym) {
                    return Err(EngineError::UnknownSymbol(sym.clone()));
                }
                Ok(self.index[sym])
            })
            .collect()
    }

    pub fn is_accepting(&self, id: u32) -> bool {
        self.accepting[id as usize]
    }
}

/// A configuration of a running CAT: cell states, write-once output
/// registers, and the step counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatConfiguration {
    pub cells: Vec<u32>,
    pub outputs: Vec<Option<Arc<str>>>,
    pub time: usize,
}

/// Computes the successor configuration. Registers already holding a word
/// are frozen; the `n = 1` case reads the boundary on both sides.
pub fn cat_step(cat: &RunnableCat, config: &CatConfiguration) -> Result<CatConfiguration, EngineError> {
    let n = config.cells.len();
    let mut cells = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    for i in 0..n {
        let l = if i == 0 { BOUNDARY_ID } else { config.cells[i - 1] };
        let r = if i + 1 == n { BOUNDARY_ID } else { config.cells[i + 1] };
        let (next, out) = cat.lookup(l, config.cells[i], r)?;
        cells.push(next);
        outputs.push(match &config.outputs[i] {
            Some(existing) => Some(existing.clone()),
            None => out,
        });
    }
    Ok(CatConfiguration { cells, outputs, time: config.time + 1 })
}

/// Default step cap: every in-scope construction finishes within `2n + O(1)`.
pub fn default_step_cap(n: usize) -> usize {
    4 * n + 16
}

/// Runs a CAT to completion (acceptance seen and all registers filled) or to
/// the step cap. Acceptance is checked at time 0 as well.
pub fn cat_run(cat: &RunnableCat, word: &[String], step_cap: usize) -> Result<RunTrace, EngineError> {
    if step_cap == 0 {
        return Err(EngineError::ZeroStepCap);
    }
    let cells = cat.intern_word(word)?;
    let n = cells.len();
    let mut config = CatConfiguration { cells, outputs: vec![None; n], time: 0 };

    let mut steps = Vec::new();
    let mut accept_time: Option<usize> = None;
    let mut output_complete_time: Option<usize> = None;

    let observe = |config: &CatConfiguration,
                   accept_time: &mut Option<usize>,
                   output_complete_time: &mut Option<usize>| {
        if accept_time.is_none() && cat.is_accepting(config.cells[0]) {
            *accept_time = Some(config.time);
        }
        if output_complete_time.is_none() && config.outputs.iter().all(|o| o.is_some()) {
            *output_complete_time = Some(config.time);
        }
    };

    observe(&config, &mut accept_time, &mut output_complete_time);
    steps.push(TraceStep { cells: config.cells.clone(), outputs: config.outputs.clone() });

    while accept_time.is_none() || output_complete_time.is_none() {
        if config.time >= step_cap {
            return Ok(RunTrace::cat(
                cat.state_names(),
                steps,
                accept_time,
                output_complete_time,
                None,
                false,
            ));
        }
        config = cat_step(cat, &config)?;
        observe(&config, &mut accept_time, &mut output_complete_time);
        steps.push(TraceStep { cells: config.cells.clone(), outputs: config.outputs.clone() });
    }

    let final_output = {
        let mut v = String::new();
        for out in &config.outputs {
            v.push_str(out.as_ref().expect("all registers filled"));
        }
        Some(v)
    };
    Ok(RunTrace::cat(cat.state_names(), steps, accept_time, output_complete_time, final_output, true))
}

/// A validated IAT with interned states.
pub struct RunnableIat {
    input_alphabet: Vec<String>,
    end_marker: String,
    names: Arc<Vec<String>>,
    interior: crate::synth::FxMap<(u32, u32, u32), u32>,
    comm: HashMap<(String, u32, u32), (Arc<str>, u32)>,
    accepting: Vec<bool>,
    quiescent: u32,
    default_interior: bool,
}

impl RunnableIat {
    pub fn new(spec: &IatSpec) -> Result<Self, EngineError> {
        let report = crate::machine::validate_iat(spec);
        if !report.is_empty() {
            return Err(EngineError::Invalid(report));
        }
        let names: Vec<String> = spec.states.clone();
        let index: HashMap<String, u32> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        let interior: crate::synth::FxMap<(u32, u32, u32), u32> = spec
            .delta_interior
            .iter()
            .map(|r| ((index[&r.left], index[&r.center], index[&r.right]), index[&r.next]))
            .collect();
        let mut chunk_cache: HashMap<String, Arc<str>> = HashMap::new();
        let comm = spec
            .delta_comm
            .iter()
            .map(|r| {
                let out = chunk_cache
                    .entry(r.out.clone())
                    .or_insert_with(|| Arc::from(r.out.as_str()))
                    .clone();
                ((r.input.clone(), index[&r.comm], index[&r.right]), (out, index[&r.next]))
            })
            .collect();
        let mut accepting = vec![false; names.len()];
        for a in &spec.accepting {
            accepting[index[a] as usize] = true;
        }
        Ok(RunnableIat {
            quiescent: index[&spec.quiescent],
            input_alphabet: spec.input_alphabet.clone(),
            end_marker: spec.end_marker.clone(),
            names: Arc::new(names),
            interior,
            comm,
            accepting,
            default_interior: spec.default_interior,
        })
    }

    pub fn state_names(&self) -> Arc<Vec<String>> {
        Arc::clone(&self.names)
    }

    fn interior_step(&self, l: u32, c: u32, r: u32) -> u32 {
        match self.interior.get(&(l, c, r)) {
            Some(next) => *next,
            None => {
                debug_assert!(self.default_interior);
                c
            }
        }
    }
}

/// Simulates an IAT on `word`. The communication cell reads one input symbol
/// per step and the end marker afterwards; the machine halts when no
/// communication rule applies. A transduction exists iff the word was
/// accepted and the machine halted.
pub fn iat_run(iat: &RunnableIat, word: &[String], step_cap: usize) -> Result<RunTrace, EngineError> {
    if step_cap == 0 {
        return Err(EngineError::ZeroStepCap);
    }
    if word.is_empty() {
        return Err(EngineError::EmptyInput);
    }
    for sym in word {
        if !iat.input_alphabet.contains(sym) {
            return Err(EngineError::UnknownSymbol(sym.clone()));
        }
    }

    let q = iat.quiescent;
    let mut comm = q;
    let mut tape: Vec<u32> = vec![q];
    let mut emitted = String::new();
    let mut chunks: Vec<Option<Arc<str>>> = Vec::new();
    let mut steps = Vec::new();
    let mut accept_time = if iat.accepting[comm as usize] { Some(0) } else { None };
    let mut last_emit: usize = 0;
    let mut halted = false;

    let snapshot = |comm: u32, tape: &[u32]| {
        let mut cells = Vec::with_capacity(tape.len() + 1);
        cells.push(comm);
        cells.extend_from_slice(tape);
        cells
    };
    steps.push(TraceStep { cells: snapshot(comm, &tape), outputs: vec![] });

    for t in 1..=step_cap {
        let input = if t <= word.len() { word[t - 1].clone() } else { iat.end_marker.clone() };
        let Some((out, next_comm)) = iat.comm.get(&(input, comm, tape[0])).cloned() else {
            halted = true;
            break;
        };
        // Interior cells update in the same step, reading the old comm state.
        let mut next_tape = Vec::with_capacity(tape.len() + 1);
        for j in 0..tape.len() {
            let l = if j == 0 { comm } else { tape[j - 1] };
            let r = if j + 1 == tape.len() { q } else { tape[j + 1] };
            next_tape.push(iat.interior_step(l, tape[j], r));
        }
        next_tape.push(q);
        tape = next_tape;
        comm = next_comm;
        if !out.is_empty() {
            emitted.push_str(&out);
            last_emit = t;
        }
        chunks.push(if out.is_empty() { None } else { Some(out) });
        if accept_time.is_none() && iat.accepting[comm as usize] {
            accept_time = Some(t);
        }
        steps.push(TraceStep { cells: snapshot(comm, &tape), outputs: chunks.clone() });
    }

    let complete = halted;
    let final_output = if halted && accept_time.is_some() { Some(emitted) } else { None };
    let output_complete_time = if halted { Some(last_emit) } else { None };
    Ok(RunTrace::iat(iat.state_names(), steps, accept_time, output_complete_time, final_output, complete))
}

/// Which factor of a two-track product supplies acceptance and output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Track {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackSelector {
    pub acceptance: Track,
    pub output: Track,
}

impl TrackSelector {
    /// Acceptance from the first machine, output from the second.
    pub const ACCEPT_A_OUTPUT_B: TrackSelector =
        TrackSelector { acceptance: Track::A, output: Track::B };
}

/// Product construction over a shared input alphabet: states are pairs,
/// delta applies both machines componentwise, and the accepting set and
/// output component come from the selected tracks. The result is pruned to
/// window-reachable pairs.
pub fn compose_tracks(
    a: &CatSpec,
    b: &CatSpec,
    selector: TrackSelector,
) -> Result<CatSpec, EngineError> {
    if a.input_alphabet != b.input_alphabet {
        return Err(EngineError::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            a.input_alphabet, b.input_alphabet
        )));
    }
    let ra = RunnableCat::new(a)?;
    let rb = RunnableCat::new(b)?;

    struct Product<'x> {
        a: &'x RunnableCat,
        b: &'x RunnableCat,
        selector: TrackSelector,
        alphabet: Vec<String>,
        outputs: Vec<String>,
    }

    impl crate::synth::SynthAutomaton for Product<'_> {
        type State = (u32, u32);

        fn init(&self, symbol: &str) -> Option<(u32, u32)> {
            Some((self.a.state_id(symbol)?, self.b.state_id(symbol)?))
        }

        fn step(
            &self,
            left: Option<&(u32, u32)>,
            center: &(u32, u32),
            right: Option<&(u32, u32)>,
        ) -> (Self::State, Option<String>) {
            let la = left.map_or(BOUNDARY_ID, |s| s.0);
            let lb = left.map_or(BOUNDARY_ID, |s| s.1);
            let ra = right.map_or(BOUNDARY_ID, |s| s.0);
            let rb = right.map_or(BOUNDARY_ID, |s| s.1);
            let (na, oa) = self.a.lookup(la, center.0, ra).expect("validated total table");
            let (nb, ob) = self.b.lookup(lb, center.1, rb).expect("validated total table");
            let out = match self.selector.output {
                Track::A => oa,
                Track::B => ob,
            };
            ((na, nb), out.map(|w| w.to_string()))
        }

        fn accepting(&self, s: &(u32, u32)) -> bool {
            match self.selector.acceptance {
                Track::A => self.a.is_accepting(s.0),
                Track::B => self.b.is_accepting(s.1),
            }
        }

        fn name(&self, s: &(u32, u32)) -> String {
            let na = &self.a.state_names()[s.0 as usize];
            let nb = &self.b.state_names()[s.1 as usize];
            if self.alphabet.contains(na) && na == nb {
                na.clone()
            } else {
                format!("{na}⋈{nb}")
            }
        }

        fn input_symbols(&self) -> Vec<String> {
            self.alphabet.clone()
        }

        fn output_symbols(&self) -> Vec<String> {
            self.outputs.clone()
        }
    }

    let mut outputs = match selector.output {
        Track::A => a.output_alphabet.clone(),
        Track::B => b.output_alphabet.clone(),
    };
    outputs.dedup();
    let product = Product { a: &ra, b: &rb, selector, alphabet: a.input_alphabet.clone(), outputs };
    crate::synth::materialize_closure(&product, &crate::synth::SynthLimits::default())
        .map_err(|e| EngineError::AlphabetMismatch(format!("product materialization failed: {e}")))
}

/// Splits `text` into a word over `alphabet`: per character when every
/// symbol is a single character, otherwise on whitespace.
pub fn parse_word(text: &str, alphabet: &[String]) -> Vec<String> {
    if alphabet.iter().all(|s| s.chars().count() == 1) {
        text.chars().map(|c| c.to_string()).collect()
    } else {
        text.split_whitespace().map(|s| s.to_string()).collect()
    }
}

/// Convenience: a word from ASCII text, one symbol per character.
pub fn word_of(text: &str) -> Vec<String> {
    text.chars().map(|c| c.to_string()).collect()
}

/// Runs any machine spec that can run standalone (CAT or IAT).
pub fn run_machine(spec: &MachineSpec, word: &[String], step_cap: usize) -> Result<RunTrace, EngineError> {
    match spec {
        MachineSpec::Cat(cat) => cat_run(&RunnableCat::new(cat)?, word, step_cap),
        MachineSpec::Iat(iat) => iat_run(&RunnableIat::new(iat)?, word, step_cap),
        MachineSpec::Seq(_) => Err(EngineError::AlphabetMismatch(
            "sequential transducers run through the harness oracles, not the cell engine".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{CatRule, CatSpec};
    use std::collections::BTreeSet;

    fn identity_one_cell() -> CatSpec {
        CatSpec {
            states: vec!["a".into()],
            accepting: BTreeSet::new(),
            input_alphabet: vec!["a".into()],
            output_alphabet: vec![],
            delta: vec![CatRule {
                left: Ctx::Boundary,
                center: "a".into(),
                right: Ctx::Boundary,
                next: "a".into(),
                out: None,
            }],
            default_rule: true,
        }
    }

    #[test]
    fn one_cell_identity_keeps_state_and_empty_register() {
        let cat = RunnableCat::new(&identity_one_cell()).unwrap();
        let word = word_of("a");
        let config = CatConfiguration {
            cells: vec![cat.state_id("a").unwrap()],
            outputs: vec![None],
            time: 0,
        };
        let next = cat_step(&cat, &config).unwrap();
        assert_eq!(next.cells, config.cells);
        assert_eq!(next.outputs, vec![None]);
        assert_eq!(next.time, 1);
        let _ = word;
    }

    #[test]
    fn three_cell_step_matches_hand_application() {
        // δ maps every window to a fixed successor; spot-check each cell of
        // a three-cell line against the displayed successor equations.
        let mut delta = Vec::new();
        let states = ["a", "b"];
        let ctxs = |s: &str| {
            if s == "#" {
                Ctx::Boundary
            } else {
                Ctx::State(s.into())
            }
        };
        // next = left-dependent: boundary -> flip, else copy the left state.
        for l in ["#", "a", "b"] {
            for c in states {
                for r in ["#", "a", "b"] {
                    let next = match l {
                        "#" => {
                            if c == "a" {
                                "b"
                            } else {
                                "a"
                            }
                        }
                        other => other,
                    };
                    delta.push(CatRule {
                        left: ctxs(l),
                        center: c.into(),
                        right: ctxs(r),
                        next: next.into(),
                        out: Some(c.into()),
                    });
                }
            }
        }
        let spec = CatSpec {
            states: vec!["a".into(), "b".into()],
            accepting: BTreeSet::from(["a".to_string()]),
            input_alphabet: vec!["a".into(), "b".into()],
            output_alphabet: vec!["a".into(), "b".into()],
            delta,
            default_rule: false,
        };
        let cat = RunnableCat::new(&spec).unwrap();
        let trace = cat_run(&cat, &word_of("bab"), 4).unwrap();
        // Hand application: cell 1 = δ(#, b, a) = a; cell 2 = δ(b, a, b) = b;
        // cell 3 = δ(a, b, #) = a. Every register fills with its old state.
        let names: Vec<&str> =
            trace.steps[1].cells.iter().map(|&c| trace.state_name(c)).collect();
        assert_eq!(names, ["a", "b", "a"]);
        let regs: Vec<Option<&str>> =
            trace.steps[1].outputs.iter().map(|o| o.as_deref()).collect();
        assert_eq!(regs, [Some("b"), Some("a"), Some("b")]);
    }

    #[test]
    fn compose_diagonal_behaves_like_the_factor() {
        let sort = crate::builtins::builtin_by_name("sort").unwrap();
        let product =
            compose_tracks(sort, sort, TrackSelector::ACCEPT_A_OUTPUT_B).unwrap();
        assert!(product.states.len() <= sort.states.len() * sort.states.len());
        let a = RunnableCat::new(sort).unwrap();
        let b = RunnableCat::new(&product).unwrap();
        for word in crate::harness::ShortlexWords::new(&sort.input_alphabet, 6) {
            let cap = default_step_cap(word.len());
            let ta = cat_run(&a, &word, cap).unwrap();
            let tb = cat_run(&b, &word, cap).unwrap();
            assert_eq!(ta.final_output, tb.final_output);
            assert_eq!(ta.accept_time, tb.accept_time);
        }
    }

    #[test]
    fn compose_sort_tracks_reproduces_the_builtin() {
        let acceptance = crate::builtins::build_sort_acceptance_track();
        let output = crate::builtins::build_sort_output_track();
        let product =
            compose_tracks(&acceptance, &output, TrackSelector::ACCEPT_A_OUTPUT_B).unwrap();
        let builtin = RunnableCat::new(crate::builtins::builtin_by_name("sort").unwrap()).unwrap();
        let composed = RunnableCat::new(&product).unwrap();
        for word in crate::harness::ShortlexWords::new(&product.input_alphabet, 6) {
            let cap = default_step_cap(word.len());
            let ta = cat_run(&builtin, &word, cap).unwrap();
            let tb = cat_run(&composed, &word, cap).unwrap();
            assert_eq!(ta.final_output, tb.final_output, "{word:?}");
            assert_eq!(ta.output_complete_time, tb.output_complete_time, "{word:?}");
        }
    }

    #[test]
    fn compose_rejects_mismatched_alphabets() {
        let sort = crate::builtins::builtin_by_name("sort").unwrap();
        let mut other = sort.clone();
        other.input_alphabet = vec!["a".into()];
        assert!(matches!(
            compose_tracks(sort, &other, TrackSelector::ACCEPT_A_OUTPUT_B),
            Err(EngineError::AlphabetMismatch(_))
        ));
    }
}
