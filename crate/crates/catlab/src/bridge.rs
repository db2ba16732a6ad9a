//! Compilers between the two machine families: IAT→CAT (the five-register
//! front construction with a lockstep acceptance track) and CAT→IAT (store
//! the input, synchronize, simulate in lockstep, collect the outputs), plus
//! the IAT normalizations they build on.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::fssp::{onegen_step, OneGen};
use crate::machine::{
    CatSpec, Ctx, IatCommRule, IatInteriorRule, IatSpec, TimeComplexity, TimeKind,
};
use crate::synth::{
    materialize_closure, materialize_iat_closure, IatSynthAutomaton, SynthAutomaton, SynthLimits,
};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("invalid machine: {0:?}")]
    Invalid(Vec<crate::machine::Violation>),
    #[error("time bound {0} is not real-time or linear-time")]
    UnfairComplexity(String),
    #[error("the construction supports at most {0} simulated steps per cell, needed {1}")]
    TooManySteps(usize, usize),
    #[error("state grouping of {0} cells would need {1} tuple states; the cap is {2}")]
    GroupingTooLarge(usize, u128, u128),
    #[error("table materialization failed: {0}")]
    Synth(#[from] crate::synth::SynthError),
}

// ---------------------------------------------------------------------------
// Normalization: no re-entry into the quiescent state, optional k-grouping.
// ---------------------------------------------------------------------------

const GROUPING_CAP: u128 = 2_000_000;

/// Returns an IAT computing the same transduction in which (a) no cell
/// reenters the quiescent state after leaving it (a fresh awake-idle state
/// stands in for it), and (b) for `k >= 2`, `k` original cells are simulated
/// per cell, compressing the non-quiescent width by a factor of `k`.
pub fn normalize_iat(spec: &IatSpec, k: usize) -> Result<IatSpec, BridgeError> {
    let report = crate::machine::validate_iat(spec);
    if !report.is_empty() {
        return Err(BridgeError::Invalid(report));
    }
    let dequiesced = remove_requiescence(spec);
    if k <= 1 {
        return Ok(dequiesced);
    }
    group_cells(&dequiesced, k)
}

/// The awake-idle construction: every transition that would send a woken
/// cell back to the quiescent state targets a fresh twin state instead.
fn remove_requiescence(spec: &IatSpec) -> IatSpec {
    let q0 = spec.quiescent.clone();
    let mut idle = format!("{q0}'");
    while spec.states.contains(&idle) {
        idle.push('\'');
    }
    // Substitute q0' for q0 in every context position; a woken center (or
    // the communication cell) never returns to true quiescence.
    let variants = |s: &str| -> Vec<String> {
        if s == q0 {
            vec![q0.clone(), idle.clone()]
        } else {
            vec![s.to_string()]
        }
    };
    let mut delta_interior = Vec::new();
    for rule in &spec.delta_interior {
        for l in variants(&rule.left) {
            for c in variants(&rule.center) {
                for r in variants(&rule.right) {
                    let woken = c == idle || c != q0;
                    let next = if rule.next == q0 && woken { idle.clone() } else { rule.next.clone() };
                    // A pristine center with a pristine rule stays as written.
                    delta_interior.push(IatInteriorRule {
                        left: l.clone(),
                        center: c.clone(),
                        right: r.clone(),
                        next,
                    });
                }
            }
        }
    }
    let mut delta_comm = Vec::new();
    for rule in &spec.delta_comm {
        for c in variants(&rule.comm) {
            for r in variants(&rule.right) {
                // The communication cell is awake from step one.
                let next = if rule.next == q0 { idle.clone() } else { rule.next.clone() };
                delta_comm.push(IatCommRule {
                    input: rule.input.clone(),
                    comm: c.clone(),
                    right: r.clone(),
                    out: rule.out.clone(),
                    next,
                });
            }
        }
    }
    let mut states = spec.states.clone();
    states.push(idle.clone());
    let mut accepting = spec.accepting.clone();
    if accepting.contains(&q0) {
        accepting.insert(idle.clone());
    }
    IatSpec {
        states,
        accepting,
        input_alphabet: spec.input_alphabet.clone(),
        output_alphabet: spec.output_alphabet.clone(),
        quiescent: q0,
        end_marker: spec.end_marker.clone(),
        delta_interior,
        default_interior: spec.default_interior,
        delta_comm,
    }
}

/// Simulates `k` original cells per cell: states are k-tuples, one original
/// step per step, so the non-quiescent width shrinks by a factor of `k`.
fn group_cells(spec: &IatSpec, k: usize) -> Result<IatSpec, BridgeError> {
    let n = spec.states.len() as u128;
    let tuples = n.pow(k as u32);
    if tuples.saturating_mul(tuples).saturating_mul(tuples) > GROUPING_CAP {
        return Err(BridgeError::GroupingTooLarge(k, tuples.pow(3), GROUPING_CAP));
    }
    let idx: BTreeMap<&str, usize> =
        spec.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let interior: HashMap<(usize, usize, usize), usize> = spec
        .delta_interior
        .iter()
        .map(|r| {
            (
                (idx[r.left.as_str()], idx[r.center.as_str()], idx[r.right.as_str()]),
                idx[r.next.as_str()],
            )
        })
        .collect();
    let comm: HashMap<(&str, usize, usize), (&str, usize)> = spec
        .delta_comm
        .iter()
        .map(|r| {
            (
                (r.input.as_str(), idx[r.comm.as_str()], idx[r.right.as_str()]),
                (r.out.as_str(), idx[r.to_owned().next.as_str()]),
            )
        })
        .collect();
    let step = |l: usize, c: usize, r: usize| -> usize {
        match interior.get(&(l, c, r)) {
            Some(&n) => n,
            None => c,
        }
    };
    let q0 = idx[spec.quiescent.as_str()];
    let name_of = |tuple: &[usize]| -> String {
        tuple.iter().map(|&i| spec.states[i].as_str()).collect::<Vec<_>>().join("·")
    };

    // Enumerate all k-tuples.
    let mut all: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &all {
            for s in 0..spec.states.len() {
                let mut t2 = t.clone();
                t2.push(s);
                next.push(t2);
            }
        }
        all = next;
    }

    let mut delta_interior = Vec::new();
    for l in &all {
        for c in &all {
            for r in &all {
                let mut next = Vec::with_capacity(k);
                for j in 0..k {
                    let left = if j == 0 { l[k - 1] } else { c[j - 1] };
                    let right = if j + 1 == k { r[0] } else { c[j + 1] };
                    next.push(step(left, c[j], right));
                }
                if next != *c {
                    delta_interior.push(IatInteriorRule {
                        left: name_of(l),
                        center: name_of(c),
                        right: name_of(r),
                        next: name_of(&next),
                    });
                }
            }
        }
    }
    let inputs: Vec<&str> = spec
        .input_alphabet
        .iter()
        .map(|s| s.as_str())
        .chain([spec.end_marker.as_str()])
        .collect();
    let mut delta_comm = Vec::new();
    for input in inputs {
        for c in &all {
            for r in &all {
                // Cell 1 of the tuple is the original communication cell.
                let Some(&(out, m1)) = comm.get(&(input, c[0], if k == 1 { r[0] } else { c[1] }))
                else {
                    continue;
                };
                let mut next = vec![m1];
                for j in 1..k {
                    let left = c[j - 1];
                    let right = if j + 1 == k { r[0] } else { c[j + 1] };
                    next.push(step(left, c[j], right));
                }
                delta_comm.push(IatCommRule {
                    input: input.to_string(),
                    comm: name_of(c),
                    right: name_of(r),
                    out: out.to_string(),
                    next: name_of(&next),
                });
            }
        }
    }
    let quiescent_tuple = name_of(&vec![q0; k]);
    let accepting = all
        .iter()
        .filter(|t| spec.accepting.contains(&spec.states[t[0]]))
        .map(|t| name_of(t))
        .collect();
    Ok(IatSpec {
        states: all.iter().map(|t| name_of(t)).collect(),
        accepting,
        input_alphabet: spec.input_alphabet.clone(),
        output_alphabet: spec.output_alphabet.clone(),
        quiescent: quiescent_tuple,
        end_marker: spec.end_marker.clone(),
        delta_interior,
        default_interior: true,
        delta_comm,
    })
}

// ---------------------------------------------------------------------------
// Interned views of the source machines.
// ---------------------------------------------------------------------------

struct IatTables {
    names: Vec<String>,
    q0: u32,
    interior: crate::synth::FxMap<(u32, u32, u32), u32>,
    comm: HashMap<(Option<u8>, u32, u32), (u16, u32)>,
    accepting: Vec<bool>,
    chunks: Vec<String>,
    inputs: Vec<String>,
}

impl IatTables {
    fn build(spec: &IatSpec) -> Self {
        let names = spec.states.clone();
        let index: HashMap<&str, u32> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
        let interior = spec
            .delta_interior
            .iter()
            .map(|r|

                ((index[r.left.as_str()], index[r.center.as_str()], index[r.right.as_str()]),
                 index[r.next.as_str()]))
            .collect();
        let mut chunks: Vec<String> = Vec::new();
        let mut chunk_idx: HashMap<String, u16> = HashMap::new();
        let mut intern_chunk = |w: &str| -> u16 {
            match chunk_idx.get(w) {
                Some(&i) => i,
                None => {
                    let i = chunks.len() as u16;
                    chunks.push(w.to_string());
                    chunk_idx.insert(w.to_string(), i);
                    i
                }
            }
        };
        let comm = spec
            .delta_comm
            .iter()
            .map(|r| {
                let input = if r.input == spec.end_marker {
                    None
                } else {
                    Some(spec.input_alphabet.iter().position(|a| *a == r.input).expect("validated")
                        as u8)
                };
                (
                    (input, index[r.comm.as_str()], index[r.right.as_str()]),
                    (intern_chunk(&r.out), index[r.next.as_str()]),
                )
            })
            .collect();
        let accepting = names.iter().map(|s| spec.accepting.contains(s)).collect();
        IatTables {
            q0: index[spec.quiescent.as_str()],
            names,
            interior,
            comm,
            accepting,
            chunks,
            inputs: spec.input_alphabet.clone(),
        }
    }

    fn interior_step(&self, l: u32, c: u32, r: u32) -> u32 {
        // The default rule is "stay".
        self.interior.get(&(l, c, r)).copied().unwrap_or(c)
    }

    fn comm_step(&self, input: Option<u8>, c: u32, r: u32) -> Option<(u16, u32)> {
        self.comm.get(&(input, c, r)).copied()
    }
}

// ---------------------------------------------------------------------------
// Theorem: IAT → CAT.
// ---------------------------------------------------------------------------

/// Maximum simulated communication steps per cell.
pub const MAX_STEPS_PER_CELL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T2In {
    Sym(u8),
    Marker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T2Phase {
    NotYet,
    Active { j: u8, single: bool },
    Done { on_marker: bool },
    Halted,
    /// Emitted the empty word (stop cell, prefilled cell, or fill-wave hit).
    Inert,
}

/// Buffered output chunk ids of the current front (one per simulated step).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ChunkBuf {
    len: u8,
    ids: [u16; MAX_STEPS_PER_CELL],
}

impl ChunkBuf {
    fn new() -> Self {
        ChunkBuf { len: 0, ids: [0; MAX_STEPS_PER_CELL] }
    }

    fn push(&mut self, id: u16) {
        self.ids[self.len as usize] = id;
        self.len += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct T2Cell {
    /// The five registers of the output track: the simulated-cell window,
    /// the buffered input, the modulo counter, and the pending outputs.
    regs: [u16; MAX_STEPS_PER_CELL],
    inp: T2In,
    cnt: u8,
    buf: ChunkBuf,
    phase: T2Phase,
    fillwave: bool,
    /// The acceptance track: this cell's simulated array cell, its input
    /// feed, and (in the leftmost cell) the acceptance and halt latches.
    acc_cell: u16,
    acc_in: T2In,
    acc_flag: bool,
    acc_halt: bool,
}

struct TheoremTwoAutomaton {
    src: IatTables,
    /// Simulated communication steps per cell.
    m: usize,
    /// Whether fronts stop at the end-marker meeting (real-time sources);
    /// linear-time sources run every cell's front to the halt.
    meeting_stop: bool,
}

impl TheoremTwoAutomaton {
    fn q0(&self) -> u16 {
        self.src.q0 as u16
    }

    /// slot(i) with slot(0) = left.regs[m-1], slot(-1) = left.regs[m-2].
    fn slot(&self, regs: &[u16], left: Option<&T2Cell>, i: isize) -> u16 {
        if i >= 1 {
            regs[(i - 1) as usize]
        } else {
            let m = self.m;
            match left {
                Some(l) => match i {
                    0 => l.regs[m - 1],
                    _ => l.regs[m - 2],
                },
                None => self.q0(),
            }
        }
    }

    fn words(&self, buf: &ChunkBuf) -> String {
        let mut out = String::new();
        for &id in &buf.ids[..buf.len as usize] {
            out.push_str(&self.src.chunks[id as usize]);
        }
        out
    }
}

impl SynthAutomaton for TheoremTwoAutomaton {
    type State = T2Cell;

    fn init(&self, symbol: &str) -> Option<T2Cell> {
        let idx = self.src.inputs.iter().position(|a| a == symbol)? as u8;
        Some(T2Cell {
            regs: [self.q0(); MAX_STEPS_PER_CELL],
            inp: T2In::Sym(idx),
            cnt: 0,
            buf: ChunkBuf::new(),
            phase: T2Phase::NotYet,
            fillwave: false,
            acc_cell: self.src.q0 as u16,
            acc_in: T2In::Sym(idx),
            acc_flag: self.src.accepting[self.src.q0 as usize],
            acc_halt: false,
        })
    }

    fn step(
        &self,
        left: Option<&T2Cell>,
        c: &T2Cell,
        right: Option<&T2Cell>,
    ) -> (T2Cell, Option<String>) {
        let m = self.m;
        let q0 = self.q0();

        // Global modulo counter; the input track skips its shift whenever
        // the new count is 1 so each front's first step reads in place.
        let cnt = ((c.cnt + 1) as usize % m) as u8;
        let shift = cnt != 1 % m as u8;
        let shift = if m == 1 { true } else { shift };
        let inp = if shift {
            right.map_or(T2In::Marker, |r| r.inp)
        } else {
            c.inp
        };

        // Acceptance track: full-speed feed plus a lockstep simulation of
        // the source array (cell i plays array cell i).
        let acc_in = right.map_or(T2In::Marker, |r| r.acc_in);
        let (acc_cell, acc_flag, acc_halt) = if left.is_none() {
            if c.acc_halt {
                (c.acc_cell, c.acc_flag, true)
            } else {
                let input = match c.acc_in {
                    T2In::Sym(s) => Some(s),
                    T2In::Marker => None,
                };
                let r2 = right.map_or(q0, |r| r.acc_cell);
                match self.src.comm_step(input, c.acc_cell as u32, r2 as u32) {
                    Some((_, next)) => {
                        let flag = c.acc_flag || self.src.accepting[next as usize];
                        (next as u16, flag, false)
                    }
                    None => (c.acc_cell, c.acc_flag, true),
                }
            }
        } else {
            let l = left.expect("interior").acc_cell;
            let r = right.map_or(q0, |x| x.acc_cell);
            (
                self.src.interior_step(l as u32, c.acc_cell as u32, r as u32) as u16,
                false,
                false,
            )
        };

        // Output track.
        let mut regs = [q0; MAX_STEPS_PER_CELL];
        let mut buf = c.buf;
        let mut phase = c.phase;
        let mut fillwave = false;
        let mut emit: Option<Option<String>> = None; // Some(word) = fill register

        let migrate = |cell: &T2Cell, left: Option<&T2Cell>, upto: usize| -> [u16; MAX_STEPS_PER_CELL] {
            let mut out = [q0; MAX_STEPS_PER_CELL];
            for i in 1..=upto {
                let lower = self.slot(&cell.regs, left, i as isize);
                let mid = self.slot(&cell.regs, left, i as isize - 1);
                let upper = self.slot(&cell.regs, left, i as isize - 2);
                out[i - 1] = self.src.interior_step(lower as u32, mid as u32, upper as u32) as u16;
            }
            out
        };

        match c.phase {
            T2Phase::NotYet => {
                let left_done = match left {
                    None => true,
                    Some(l) => matches!(l.phase, T2Phase::Done { .. }),
                };
                let left_on_marker =
                    matches!(left.map(|l| l.phase), Some(T2Phase::Done { on_marker: true }));
                let left_wave = left.is_some_and(|l| l.fillwave);
                let prefill = self.meeting_stop
                    && c.inp == T2In::Marker
                    && right.is_none_or(|r| matches!(r.phase, T2Phase::Inert))
                    && left.is_some_and(|l| matches!(l.phase, T2Phase::NotYet));
                if left_wave {
                    phase = T2Phase::Inert;
                    emit = Some(Some(String::new()));
                    fillwave = true;
                } else if left_done {
                    let marker_start = c.inp == T2In::Marker;
                    if marker_start && self.meeting_stop && left_on_marker {
                        // The end-marker era is already covered: stop here.
                        phase = T2Phase::Inert;
                        emit = Some(Some(String::new()));
                        fillwave = true;
                    } else {
                        // Start simulating the communication cell.
                        let input = match c.inp {
                            T2In::Sym(s) => Some(s),
                            T2In::Marker => None,
                        };
                        let comm_prev = self.slot(&c.regs, left, 0);
                        let ia2_prev = self.slot(&c.regs, left, -1);
                        match self.src.comm_step(input, comm_prev as u32, ia2_prev as u32) {
                            Some((out_id, next)) => {
                                buf = ChunkBuf::new();
                                buf.push(out_id);
                                regs = migrate(c, left, 0);
                                regs[0] = next as u16;
                                let single = marker_start && self.meeting_stop;
                                if m == 1 || single {
                                    phase = T2Phase::Done { on_marker: marker_start };
                                    emit = Some(Some(self.words(&buf)));
                                } else {
                                    phase = T2Phase::Active { j: 1, single };
                                }
                            }
                            None => {
                                phase = T2Phase::Halted;
                                emit = Some(Some(String::new()));
                                fillwave = true;
                            }
                        }
                    }
                } else if prefill {
                    phase = T2Phase::Inert;
                    emit = Some(Some(String::new()));
                }
            }
            T2Phase::Active { j, single: _ } => {
                let j = j as usize;
                // Sub-step j+1: the migration updates slots 1..=j and the
                // communication cell advances into slot j+1.
                let input_val = right.map_or(T2In::Marker, |r| r.inp);
                let input = match input_val {
                    T2In::Sym(s) => Some(s),
                    T2In::Marker => None,
                };
                let comm_prev = self.slot(&c.regs, left, j as isize);
                let ia2_prev = self.slot(&c.regs, left, j as isize - 1);
                regs = migrate(c, left, j);
                match self.src.comm_step(input, comm_prev as u32, ia2_prev as u32) {
                    Some((out_id, next)) => {
                        regs[j] = next as u16;
                        buf.push(out_id);
                        if j + 1 == m {
                            phase = T2Phase::Done { on_marker: input.is_none() };
                            emit = Some(Some(self.words(&buf)));
                        } else {
                            phase = T2Phase::Active { j: (j + 1) as u8, single: false };
                        }
                    }
                    None => {
                        phase = T2Phase::Halted;
                        emit = Some(Some(self.words(&buf)));
                        fillwave = true;
                    }
                }
            }
            T2Phase::Done { .. } => {
                regs = migrate(c, left, m);
            }
            T2Phase::Halted | T2Phase::Inert => {
                regs = c.regs;
                fillwave = false;
            }
        }
        // The fill wave keeps traveling right from its origin.
        if left.is_some_and(|l| l.fillwave) && matches!(phase, T2Phase::Inert) && emit.is_none() {
            fillwave = true;
        }

        let next = T2Cell {
            regs,
            inp,
            cnt,
            buf,
            phase,
            fillwave,
            acc_cell,
            acc_in,
            acc_flag,
            acc_halt,
        };
        (next, emit.flatten())
    }

    fn accepting(&self, s: &T2Cell) -> bool {
        s.acc_flag
    }

    fn name(&self, s: &T2Cell) -> String {
        let inp = |v: &T2In| match v {
            T2In::Sym(i) => self.src.inputs[*i as usize].clone(),
            T2In::Marker => "◁".to_string(),
        };
        if s.phase == T2Phase::NotYet
            && s.cnt == 0
            && s.buf.len == 0
            && !s.fillwave
            && !s.acc_halt
            && s.inp == s.acc_in
            && s.acc_cell == self.src.q0 as u16
            && s.regs.iter().all(|&r| r == self.q0())
        {
            if let T2In::Sym(i) = s.inp {
                return self.src.inputs[i as usize].clone();
            }
        }
        let regs: Vec<&str> = s.regs[..self.m]
            .iter()
            .map(|&r| self.src.names[r as usize].as_str())
            .collect();
        let phase = match s.phase {
            T2Phase::NotYet => "·".to_string(),
            T2Phase::Active { j, single } => format!("A{j}{}", if single { "s" } else { "" }),
            T2Phase::Done { on_marker } => format!("D{}", if on_marker { "m" } else { "" }),
            T2Phase::Halted => "H".to_string(),
            T2Phase::Inert => "E".to_string(),
        };
        let buf: Vec<String> = s.buf.ids[..s.buf.len as usize]
            .iter()
            .map(|id| format!("{id}"))
            .collect();
        format!(
            "[{}]{}/{}c{}b({}){}{}|{}{}{}{}",
            regs.join(","),
            phase,
            inp(&s.inp),
            s.cnt,
            buf.join("."),
            if s.fillwave { "w" } else { "" },
            "",
            self.src.names[s.acc_cell as usize],
            if s.acc_flag { "+" } else { "" },
            if s.acc_halt { "h" } else { "" },
            format!("/{}", inp(&s.acc_in)),
        )
    }

    fn input_symbols(&self) -> Vec<String> {
        self.src.inputs.clone()
    }

    fn output_symbols(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for chunk in &self.src.chunks {
            for ch in chunk.chars() {
                out.insert(ch.to_string());
            }
        }
        out.into_iter().collect()
    }
}

/// How a compiled table is materialized from the structured automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Materialization {
    /// Window-triple closure: length-independent, the default.
    Closure,
    /// Exact simulation of every word up to the given length. Used for
    /// doubly-compiled machines whose closure would explode; the table is
    /// exact on those lengths and falls back to the default rule beyond.
    Runs { max_len: usize },
}

/// Compiles an IAT with time complexity (`ti`, `to`) into a CAT computing
/// the same transduction. Real-time sources keep real-time output completion
/// (each cell simulates two communication steps and the right half fills at
/// the end-marker passage); linear-time sources simulate `⌈to⌉` steps per
/// cell and run every front to the halt.
pub fn compile_iat_to_cat(
    spec: &IatSpec,
    ti: TimeComplexity,
    to: TimeComplexity,
) -> Result<CatSpec, BridgeError> {
    compile_iat_to_cat_with(spec, ti, to, Materialization::Closure)
}

pub fn compile_iat_to_cat_with(
    spec: &IatSpec,
    ti: TimeComplexity,
    to: TimeComplexity,
    materialization: Materialization,
) -> Result<CatSpec, BridgeError> {
    let report = crate::machine::validate_iat(spec);
    if !report.is_empty() {
        return Err(BridgeError::Invalid(report));
    }
    for bound in [ti, to] {
        if bound.kind != TimeKind::RealTime && bound.factor.num < bound.factor.den {
            return Err(BridgeError::UnfairComplexity(bound.to_string()));
        }
    }
    let m = match to.kind {
        TimeKind::RealTime => 2,
        _ => {
            let f = (to.factor.num as usize).div_ceil(to.factor.den as usize);
            f.max(2)
        }
    };
    if m > MAX_STEPS_PER_CELL {
        return Err(BridgeError::TooManySteps(MAX_STEPS_PER_CELL, m));
    }
    let automaton = TheoremTwoAutomaton {
        src: IatTables::build(spec),
        m,
        meeting_stop: to.kind == TimeKind::RealTime,
    };
    let limits = SynthLimits::default();
    match materialization {
        Materialization::Closure => Ok(materialize_closure(&automaton, &limits)?),
        Materialization::Runs { max_len } => {
            let alphabet = spec.input_alphabet.clone();
            let words = crate::harness::ShortlexWords::new(&alphabet, max_len);
            Ok(crate::synth::materialize_runs(
                &automaton,
                words,
                move |n| (m + 2) * n + 24,
                &limits,
            )?)
        }
    }
}

// ---------------------------------------------------------------------------
// Theorem: CAT → IAT.
// ---------------------------------------------------------------------------

struct CatTables {
    names: Vec<String>,
    delta: crate::synth::FxMap<(u32, u32, u32), (u32, Option<u16>)>,
    default_rule: bool,
    accepting: Vec<bool>,
    chunks: Vec<String>,
    inputs: Vec<String>,
    input_ids: Vec<u32>,
    boundary: u32,
}

impl CatTables {
    fn build(spec: &CatSpec) -> Self {
        let names = spec.states.clone();
        let index: HashMap<&str, u32> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
        let boundary = names.len() as u32;
        let mut chunks: Vec<String> = Vec::new();
        let mut chunk_idx: HashMap<String, u16> = HashMap::new();
        let mut delta = crate::synth::FxMap::default();
        for rule in &spec.delta {
            let l = match &rule.left {
                Ctx::Boundary => boundary,
                Ctx::State(s) => index[s.as_str()],
            };
            let r = match &rule.right {
                Ctx::Boundary => boundary,
                Ctx::State(s) => index[s.as_str()],
            };
            let out = rule.out.as_ref().map(|w| match chunk_idx.get(w.as_str()) {
                Some(&i) => i,
                None => {
                    let i = chunks.len() as u16;
                    chunks.push(w.clone());
                    chunk_idx.insert(w.clone(), i);
                    i
                }
            });
            delta.insert((l, index[rule.center.as_str()], r), (index[rule.next.as_str()], out));
        }
        CatTables {
            accepting: names.iter().map(|s| spec.accepting.contains(s)).collect(),
            input_ids: spec.input_alphabet.iter().map(|s| index[s.as_str()]).collect(),
            inputs: spec.input_alphabet.clone(),
            names,
            delta,
            default_rule: spec.default_rule,
            chunks,
            boundary,
        }
    }

    fn step(&self, l: u32, c: u32, r: u32) -> (u32, Option<u16>) {
        match self.delta.get(&(l, c, r)) {
            Some(&entry) => entry,
            None => {
                debug_assert!(self.default_rule);
                (c, None)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T3Transit {
    Sym(u8),
    /// Follows the last symbol and marks the wall cell.
    Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PipeVal {
    Chunk(u16),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct T3Sim {
    cat: u32,
    chunk: Option<u16>,
    sent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct T3Cell {
    sym: Option<u8>,
    transit: Option<T3Transit>,
    wall: bool,
    sync: OneGen,
    sim: Option<T3Sim>,
    /// Collector token: 1 = forwarding, 2 = wall cell about to send End.
    coll: u8,
    pipe: Option<PipeVal>,
}

impl T3Cell {
    fn blank() -> Self {
        T3Cell {
            sym: None,
            transit: None,
            wall: false,
            sync: OneGen::Sym,
            sim: None,
            coll: 0,
            pipe: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T3CommPhase {
    Read,
    SyncPad,
    Sync,
    Drain,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct T3Comm {
    phase: T3CommPhase,
    first: Option<u8>,
    out_transit: Option<T3Transit>,
    sent_any: bool,
    selfwall: bool,
    sync: OneGen,
    sim: Option<T3Sim>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T3St {
    Q,
    Comm(T3Comm),
    Cell(T3Cell),
}

struct TheoremThreeAutomaton {
    src: CatTables,
    /// Counter bound of the embedded synchronization (covers inputs up to
    /// this length).
    max_cells: u16,
}

impl TheoremThreeAutomaton {
    fn cat_initial(&self, sym: u8) -> u32 {
        self.src.input_ids[sym as usize]
    }
}

impl IatSynthAutomaton for TheoremThreeAutomaton {
    type State = T3St;

    fn quiescent(&self) -> T3St {
        T3St::Q
    }

    fn comm_step(&self, input: Option<&str>, comm: &T3St, right: &T3St) -> Option<(String, T3St)> {
        let c = match comm {
            T3St::Q => T3Comm {
                phase: T3CommPhase::Read,
                first: None,
                out_transit: None,
                sent_any: false,
                selfwall: false,
                sync: OneGen::Sym,
                sim: None,
            },
            T3St::Comm(c) => *c,
            T3St::Cell(_) => return None,
        };
        let rcell = match right {
            T3St::Cell(cell) => Some(*cell),
            _ => None,
        };
        let mut next = c;
        next.out_transit = None;
        let mut out = String::new();
        match c.phase {
            T3CommPhase::Read => match input {
                Some(sym) => {
                    let idx =
                        self.src.inputs.iter().position(|a| a == sym).expect("validated") as u8;
                    if c.first.is_none() {
                        next.first = Some(idx);
                    } else {
                        next.out_transit = Some(T3Transit::Sym(idx));
                        next.sent_any = true;
                    }
                }
                None => {
                    if c.sent_any {
                        next.out_transit = Some(T3Transit::Term);
                        next.phase = T3CommPhase::SyncPad;
                    } else {
                        // Single-letter input: the communication cell is its
                        // own wall and synchronizes alone.
                        next.selfwall = true;
                        next.phase = T3CommPhase::Sync;
                        next.sync = OneGen::General;
                    }
                }
            },
            T3CommPhase::SyncPad => {
                next.phase = T3CommPhase::Sync;
                next.sync = OneGen::General;
            }
            T3CommPhase::Sync => {
                let rs = if c.selfwall { None } else { rcell.map(|r| r.sync) };
                let sync =
                    onegen_step(None, &c.sync, rs.as_ref(), 2 * self.max_cells + 4);
                next.sync = sync;
                if sync == OneGen::Fire {
                    // Junk window combinations explored by the closure may
                    // fire without a stored symbol; halting is safe there.
                    let Some(sym) = c.first else { return None };
                    next.sim = Some(T3Sim { cat: self.cat_initial(sym), chunk: None, sent: false });
                    next.phase = T3CommPhase::Drain;
                }
            }
            T3CommPhase::Drain | T3CommPhase::Done => {}
        }
        if matches!(next.phase, T3CommPhase::Drain) && c.phase == T3CommPhase::Drain {
            // Simulate this cell of the source CAT in lockstep.
            if let Some(sim) = c.sim {
                let rcat = match (c.selfwall, rcell.and_then(|r| r.sim)) {
                    (true, _) | (false, None) => self.src.boundary,
                    (false, Some(rs)) => rs.cat,
                };
                let (catn, emit) = self.src.step(self.src.boundary, sim.cat, rcat);
                let mut sim2 = T3Sim { cat: catn, ..sim };
                if sim2.chunk.is_none() {
                    sim2.chunk = emit;
                }
                // Emit the own chunk, then forward arrivals from the pipe.
                if !sim2.sent {
                    if let Some(id) = sim2.chunk {
                        out.push_str(&self.src.chunks[id as usize]);
                        sim2.sent = true;
                        if c.selfwall {
                            next.phase = T3CommPhase::Done;
                        }
                    }
                }
                next.sim = Some(sim2);
                if sim2.sent {
                    match rcell.and_then(|r| r.pipe) {
                        Some(PipeVal::Chunk(id)) => out.push_str(&self.src.chunks[id as usize]),
                        Some(PipeVal::End) => next.phase = T3CommPhase::Done,
                        None => {}
                    }
                }
            }
        }
        if c.phase == T3CommPhase::Done {
            return None;
        }
        Some((out, T3St::Comm(next)))
    }

    fn interior_step(&self, left: &T3St, center: &T3St, right: &T3St) -> T3St {
        let incoming = match left {
            T3St::Comm(c) => c.out_transit,
            T3St::Cell(c) => c.transit,
            T3St::Q => None,
        };
        let left_anchored = match left {
            T3St::Comm(_) => true,
            T3St::Cell(c) => c.sym.is_some(),
            T3St::Q => false,
        };
        let mut cell = match center {
            T3St::Q => {
                if incoming.is_none() {
                    return T3St::Q;
                }
                T3Cell::blank()
            }
            T3St::Cell(c) => *c,
            // Interior cells never hold the communication state.
            T3St::Comm(_) => return *center,
        };
        let was = cell;

        // Storage pipeline.
        cell.transit = None;
        match incoming {
            Some(T3Transit::Sym(s)) => {
                if was.sym.is_none() && left_anchored {
                    cell.sym = Some(s);
                } else {
                    cell.transit = Some(T3Transit::Sym(s));
                }
            }
            Some(T3Transit::Term) => {
                // The wall is the last settled cell: the terminator stops
                // when nothing is ahead of it any more.
                if was.sym.is_some() && was.transit.is_none() && matches!(right, T3St::Q) {
                    cell.wall = true;
                } else {
                    cell.transit = Some(T3Transit::Term);
                }
            }
            None => {}
        }

        // Synchronization: the communication cell is the general; the wall
        // cell sees a virtual boundary on its right.
        let lsync = match left {
            T3St::Comm(c) => Some(c.sync),
            T3St::Cell(c) => Some(c.sync),
            T3St::Q => None,
        };
        let rsync = if was.wall {
            None
        } else {
            match right {
                T3St::Cell(c) => Some(c.sync),
                _ => Some(OneGen::Sym),
            }
        };
        if was.sym.is_some() {
            cell.sync = onegen_step(
                lsync.as_ref(),
                &was.sync,
                rsync.as_ref(),
                2 * self.max_cells + 4,
            );
            if cell.sync == OneGen::Fire && was.sync != OneGen::Fire {
                if let Some(sym) = cell.sym {
                    cell.sim = Some(T3Sim { cat: self.cat_initial(sym), chunk: None, sent: false });
                }
            }
        }

        // Lockstep source-CAT simulation.
        if let (Some(sim), true) = (was.sim, was.sym.is_some()) {
            let lcat = match left {
                T3St::Comm(c) => c.sim.map_or(self.src.boundary, |s| s.cat),
                T3St::Cell(c) => c.sim.map_or(self.src.boundary, |s| s.cat),
                T3St::Q => self.src.boundary,
            };
            let rcat = if was.wall {
                self.src.boundary
            } else {
                match right {
                    T3St::Cell(c) => c.sim.map_or(self.src.boundary, |s| s.cat),
                    _ => self.src.boundary,
                }
            };
            let (catn, emit) = self.src.step(lcat, sim.cat, rcat);
            let mut sim2 = T3Sim { cat: catn, ..sim };
            if sim2.chunk.is_none() {
                sim2.chunk = emit;
            }
            cell.sim = Some(sim2);
        }

        // Collector token and output pipe.
        let token_arrives = match left {
            T3St::Comm(c) => {
                c.sim.is_some_and(|s| s.sent) && matches!(c.phase, T3CommPhase::Drain)
            }
            T3St::Cell(c) => c.coll == 1 && c.sim.is_some_and(|s| s.chunk.is_some()),
            T3St::Q => false,
        } && was.coll == 0
            && was.sim.is_none_or(|s| !s.sent);
        let mut pipe = match right {
            T3St::Cell(r) => r.pipe,
            _ => None,
        };
        let mut coll = was.coll;
        if was.coll == 2 {
            pipe = Some(PipeVal::End);
            coll = 0;
        } else if was.coll == 1 {
            if let Some(mut sim) = cell.sim {
                if let (Some(id), false) = (sim.chunk, sim.sent) {
                    pipe = Some(PipeVal::Chunk(id));
                    sim.sent = true;
                    cell.sim = Some(sim);
                    coll = if was.wall { 2 } else { 0 };
                }
            }
        }
        if token_arrives && coll == 0 && cell.sim.is_none_or(|s| !s.sent) {
            coll = 1;
        }
        cell.coll = coll;
        cell.pipe = pipe;
        T3St::Cell(cell)
    }

    fn accepting(&self, state: &T3St) -> bool {
        match state {
            T3St::Comm(c) => c.sim.is_some_and(|s| self.src.accepting[s.cat as usize]),
            _ => false,
        }
    }

    fn name(&self, state: &T3St) -> String {
        match state {
            T3St::Q => "q0".to_string(),
            T3St::Comm(c) => format!(
                "K{}{}{}{}{}{}|{}",
                match c.phase {
                    T3CommPhase::Read => "r",
                    T3CommPhase::SyncPad => "p",
                    T3CommPhase::Sync => "y",
                    T3CommPhase::Drain => "d",
                    T3CommPhase::Done => "z",
                },
                c.first.map_or("_".to_string(), |s| self.src.inputs[s as usize].clone()),
                match c.out_transit {
                    Some(T3Transit::Sym(s)) => format!(">{}", self.src.inputs[s as usize]),
                    Some(T3Transit::Term) => ">$".to_string(),
                    None => String::new(),
                },
                if c.sent_any { "" } else { "0" },
                if c.selfwall { "w" } else { "" },
                crate::fssp::sync_label_one(&c.sync),
                c.sim.map_or("-".to_string(), |s| format!(
                    "{}{}{}",
                    self.src.names[s.cat as usize],
                    s.chunk.map_or(String::new(), |i| format!(":{i}")),
                    if s.sent { "!" } else { "" }
                )),
            ),
            T3St::Cell(c) => format!(
                "C{}{}{}{}{}{}|{}{}",
                c.sym.map_or("_".to_string(), |s| self.src.inputs[s as usize].clone()),
                match c.transit {
                    Some(T3Transit::Sym(s)) => format!(">{}", self.src.inputs[s as usize]),
                    Some(T3Transit::Term) => ">$".to_string(),
                    None => String::new(),
                },
                if c.wall { "W" } else { "" },
                crate::fssp::sync_label_one(&c.sync),
                match c.coll {
                    0 => "",
                    1 => "t",
                    _ => "T",
                },
                match c.pipe {
                    Some(PipeVal::Chunk(i)) => format!("^{i}"),
                    Some(PipeVal::End) => "^$".to_string(),
                    None => String::new(),
                },
                c.sim.map_or("-".to_string(), |s| format!(
                    "{}{}{}",
                    self.src.names[s.cat as usize],
                    s.chunk.map_or(String::new(), |i| format!(":{i}")),
                    if s.sent { "!" } else { "" }
                )),
                "",
            ),
        }
    }

    fn input_symbols(&self) -> Vec<String> {
        self.src.inputs.clone()
    }

    fn output_symbols(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for chunk in &self.src.chunks {
            for ch in chunk.chars() {
                out.insert(ch.to_string());
            }
        }
        out.into_iter().collect()
    }
}

/// Default input-length coverage of the embedded synchronization track.
pub const T3_SYNC_CELLS: u16 = 48;

/// Compiles a CAT into an IAT computing the same transduction: the array
/// stores the input, a firing squad started at the communication cell
/// synchronizes the stored cells, all cells then simulate the CAT in
/// lockstep, and a collector wave forwards the output words to the
/// communication cell in cell order. Both time bounds are linear.
pub fn compile_cat_to_iat(spec: &CatSpec) -> Result<IatSpec, BridgeError> {
    compile_cat_to_iat_with(spec, T3_SYNC_CELLS)
}

/// As [`compile_cat_to_iat`], with an explicit input-length bound for the
/// embedded synchronization counters.
pub fn compile_cat_to_iat_with(spec: &CatSpec, max_cells: u16) -> Result<IatSpec, BridgeError> {
    let report = crate::machine::validate_cat(spec);
    if !report.is_empty() {
        return Err(BridgeError::Invalid(report));
    }
    let automaton = TheoremThreeAutomaton { src: CatTables::build(spec), max_cells };
    Ok(materialize_iat_closure(&automaton, &SynthLimits::default())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{default_step_cap, iat_run, word_of, RunnableIat};
    use crate::harness::{equiv_check, machine_oracle, Machine, ShortlexWords, Verdict};
    use crate::machine::{validate_iat, Rational};
    use crate::samples;

    fn ab() -> Vec<String> {
        vec!["a".to_string(), "b".to_string()]
    }

    #[test]
    fn normalize_identity_is_transduction_equivalent() {
        let src = samples::iat_identity();
        let normalized = normalize_iat(&src, 1).unwrap();
        assert!(validate_iat(&normalized).is_empty());
        let oracle = machine_oracle(Machine::Iat(&src)).unwrap();
        let report =
            equiv_check(Machine::Iat(&normalized), &oracle, &ab(), 8).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
    }

    #[test]
    fn normalize_removes_requiescence() {
        let src = samples::iat_blinker();
        let normalized = normalize_iat(&src, 1).unwrap();
        let oracle = machine_oracle(Machine::Iat(&src)).unwrap();
        let report =
            equiv_check(Machine::Iat(&normalized), &oracle, &ab(), 8).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
        // Trace scan: no cell moves from a non-quiescent state back to q0.
        let iat = RunnableIat::new(&normalized).unwrap();
        let q0 = normalized.quiescent.clone();
        for word in ShortlexWords::new(&ab(), 8) {
            let trace = iat_run(&iat, &word, default_step_cap(word.len())).unwrap();
            for t in 1..trace.steps.len() {
                for i in 1..trace.steps[t - 1].cells.len().min(trace.steps[t].cells.len()) {
                    let before = trace.state_name(trace.steps[t - 1].cells[i]);
                    let after = trace.state_name(trace.steps[t].cells[i]);
                    assert!(
                        !(before != q0 && after == q0),
                        "cell {i} re-entered quiescence at step {t}"
                    );
                }
            }
        }
    }

    #[test]
    fn grouping_preserves_the_transduction() {
        let src = samples::iat_identity();
        let grouped = normalize_iat(&src, 2).unwrap();
        assert!(validate_iat(&grouped).is_empty());
        // State count bound: |S|^k plus bookkeeping.
        assert!(grouped.states.len() <= (src.states.len() + 1).pow(2) + 2);
        let oracle = machine_oracle(Machine::Iat(&src)).unwrap();
        let report = equiv_check(Machine::Iat(&grouped), &oracle, &ab(), 8).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
    }

    #[test]
    fn theorem_two_identity_to_len_6() {
        let src = samples::iat_identity();
        let compiled =
            compile_iat_to_cat(&src, TimeComplexity::real_time(), TimeComplexity::real_time())
                .unwrap();
        let oracle = machine_oracle(Machine::Iat(&src)).unwrap();
        let report = equiv_check(Machine::Cat(&compiled), &oracle, &ab(), 6).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
        // Timing preservation: accept within n + 1, outputs within n + 1.
        for row in &report.timing {
            if let Some(t) = row.max_accept {
                assert!(t <= row.len + 1, "t_i({}) = {t}", row.len);
            }
            if let Some(t) = row.max_complete {
                assert!(t <= row.len + 1, "t_o({}) = {t}", row.len);
            }
        }
    }

    #[test]
    fn theorem_two_parity_and_blocks_to_len_5() {
        for src in [samples::iat_parity_annotator(), samples::iat_block_counter()] {
            let compiled =
                compile_iat_to_cat(&src, TimeComplexity::real_time(), TimeComplexity::real_time())
                    .unwrap();
            let oracle = machine_oracle(Machine::Iat(&src)).unwrap();
            let report = equiv_check(Machine::Cat(&compiled), &oracle, &ab(), 5).unwrap();
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
        }
    }

    #[test]
    fn theorem_two_front_schedule() {
        // Cell i simulates communication steps 2i-1 and 2i, so its register
        // fills at exactly step 2i in the left half.
        let src = samples::iat_identity();
        let compiled =
            compile_iat_to_cat(&src, TimeComplexity::real_time(), TimeComplexity::real_time())
                .unwrap();
        let cat = crate::engine::RunnableCat::new(&compiled).unwrap();
        let word = word_of("abababab");
        let trace = crate::engine::cat_run(&cat, &word, default_step_cap(8)).unwrap();
        for i in 0..4usize {
            assert_eq!(trace.fill_time(i), Some(2 * (i + 1)), "cell {}", i + 1);
        }
    }

    #[test]
    fn theorem_two_linear_time_mode_agrees_with_the_source() {
        // Compiling a real-time source under declared linear bounds takes
        // the three-steps-per-cell path (fronts run to the halt, the fill
        // wave completes the right side).
        let lt3 = TimeComplexity::linear(Rational::new(3, 1));
        for src in [samples::iat_identity(), samples::iat_parity_annotator()] {
            let compiled = compile_iat_to_cat(&src, lt3, lt3).unwrap();
            let oracle = machine_oracle(Machine::Iat(&src)).unwrap();
            let report = equiv_check(Machine::Cat(&compiled), &oracle, &ab(), 6).unwrap();
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
            for row in &report.timing {
                if let Some(t) = row.max_complete {
                    assert!(t <= 3 * row.len, "t_o({}) = {t}", row.len);
                }
            }
        }
    }

    #[test]
    fn theorem_two_front_geometry_decodes_to_the_source_run() {
        // At even times 2i, the first two registers of cells i..1 hold the
        // source's array cells 1..2i (the front cell's second register is
        // the communication cell). The blinker exercises a non-trivial
        // interior.
        let src = samples::iat_blinker();
        let compiled =
            compile_iat_to_cat(&src, TimeComplexity::real_time(), TimeComplexity::real_time())
                .unwrap();
        let cat = crate::engine::RunnableCat::new(&compiled).unwrap();
        let iat = RunnableIat::new(&src).unwrap();
        let word = word_of("abab");
        let n = word.len();
        let cat_trace = crate::engine::cat_run(&cat, &word, default_step_cap(n)).unwrap();
        let iat_trace = iat_run(&iat, &word, default_step_cap(n)).unwrap();
        for i in 1..=n / 2 {
            let t = 2 * i;
            let step = &cat_trace.steps[t];
            // Compiled state names start with "[reg1,reg2]".
            let regs_of = |cell: usize| -> Vec<String> {
                let name = cat_trace.state_name(step.cells[cell]);
                let inner = name
                    .strip_prefix('[')
                    .and_then(|rest| rest.split_once(']'))
                    .map(|(regs, _)| regs)
                    .unwrap_or_else(|| panic!("undecodable state `{name}`"));
                inner.split(',').map(|s| s.to_string()).collect()
            };
            // Source cells 1..2i, communication cell first.
            let mut simulated = Vec::new();
            for cell in (0..i).rev() {
                let regs = regs_of(cell);
                simulated.push(regs[1].clone());
                simulated.push(regs[0].clone());
            }
            let actual = &iat_trace.steps[t].cells;
            for (j, name) in simulated.iter().enumerate() {
                let expect = iat_trace.state_name(actual[j]);
                assert_eq!(name, expect, "source cell {} at step {t}", j + 1);
            }
        }
    }

    #[test]
    fn theorem_three_copy_to_len_5() {
        let src = crate::builtins::build_copy_cat();
        let compiled = compile_cat_to_iat_with(&src, 16).unwrap();
        let oracle = machine_oracle(Machine::Cat(&src)).unwrap();
        let report = equiv_check(Machine::Iat(&compiled), &oracle, &ab(), 5).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
    }

    #[test]
    fn round_trip_copy_len_4() {
        let src = crate::builtins::build_copy_cat();
        let as_iat = compile_cat_to_iat_with(&src, 12).unwrap();
        let k = Rational::new(8, 1);
        let back = compile_iat_to_cat_with(
            &as_iat,
            TimeComplexity::linear(k),
            TimeComplexity::linear(k),
            Materialization::Runs { max_len: 4 },
        )
        .unwrap();
        let oracle = machine_oracle(Machine::Cat(&src)).unwrap();
        let report = equiv_check(Machine::Cat(&back), &oracle, &ab(), 4).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
    }
}
