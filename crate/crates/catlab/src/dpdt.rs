//! Compiles deterministic pushdown transducers to CATs with real-time
//! acceptance and linear-time output: constants computation, cellular
//! pushdown and queue track gadgets, and the five-track compiled machine
//! with its final output sweep.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::machine::{CatSpec, Rational, SeqTransducerSpec, TransducerKind};
use crate::synth::{materialize_closure, SynthAutomaton, SynthLimits};

#[derive(Debug, Error)]
pub enum DpdtError {
    #[error("not a PDT")]
    NotAPdt,
    #[error("not deterministic: two rules apply in the same configuration ({0})")]
    Nondeterministic(String),
    #[error("not linear-time halting: a reachable λ-cycle exists through ({0})")]
    LambdaCycle(String),
    #[error("constants too large for the cell layout: {0}")]
    ConstantsTooLarge(String),
    #[error("table materialization failed: {0}")]
    Synth(#[from] crate::synth::SynthError),
}

/// The compiled machine's constants: `k1` bounds symbols pushed per move,
/// `k2` bounds consecutive λ-moves, `k = max(k1, k2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PdtConstants {
    pub k1: usize,
    pub k2: usize,
    pub k: usize,
}

/// Scans the rules for `k1` and searches the (state, stack-top) λ-closure
/// for the longest λ-chain; a reachable λ-cycle is an error.
pub fn compute_constants(spec: &SeqTransducerSpec) -> Result<PdtConstants, DpdtError> {
    if spec.kind != TransducerKind::Pdt {
        return Err(DpdtError::NotAPdt);
    }
    if !spec.is_deterministic() {
        return Err(DpdtError::Nondeterministic("duplicate (state, input, top) rule".into()));
    }
    let k1 = spec
        .rules
        .iter()
        .map(|r| r.push.as_deref().unwrap_or("").chars().count())
        .max()
        .unwrap_or(0);

    // Longest path in the λ-move graph over (state, top) nodes; a rule
    // pushing the empty word exposes an unknown symbol, so it conservatively
    // fans out to every stack symbol.
    let states: Vec<&str> = spec.states.iter().map(|s| s.as_str()).collect();
    let stack: Vec<char> = spec.stack_alphabet.iter().filter_map(|g| g.chars().next()).collect();
    let node = |q: usize, g: usize| q * stack.len() + g;
    let n_nodes = states.len() * stack.len();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for rule in &spec.rules {
        if rule.input.is_some() {
            continue;
        }
        let q = states.iter().position(|s| *s == rule.from).expect("validated");
        let q2 = states.iter().position(|s| *s == rule.to).expect("validated");
        let g = stack
            .iter()
            .position(|c| rule.pop.as_deref().and_then(|p| p.chars().next()) == Some(*c))
            .expect("validated");
        match rule.push.as_deref().unwrap_or("").chars().next() {
            Some(top) => {
                let g2 = stack.iter().position(|c| *c == top).expect("validated");
                edges[node(q, g)].push(node(q2, g2));
            }
            None => {
                for g2 in 0..stack.len() {
                    edges[node(q, g)].push(node(q2, g2));
                }
            }
        }
    }
    fn dfs(
        v: usize,
        edges: &[Vec<usize>],
        depth: &mut [usize],
        on_path: &mut [bool],
    ) -> Result<usize, usize> {
        if on_path[v] {
            return Err(v);
        }
        if depth[v] != usize::MAX {
            return Ok(depth[v]);
        }
        on_path[v] = true;
        let mut best = 0usize;
        for &w in &edges[v] {
            best = best.max(1 + dfs(w, edges, depth, on_path)?);
        }
        on_path[v] = false;
        depth[v] = best;
        Ok(best)
    }
    let mut depth = vec![usize::MAX; n_nodes];
    let mut on_path = vec![false; n_nodes];
    let mut k2 = 0usize;
    for v in 0..n_nodes {
        match dfs(v, &edges, &mut depth, &mut on_path) {
            Ok(d) => k2 = k2.max(d),
            Err(v) => {
                let q = v / stack.len();
                let g = v % stack.len();
                return Err(DpdtError::LambdaCycle(format!("{}, {}", states[q], stack[g])));
            }
        }
    }
    Ok(PdtConstants { k1, k2, k: k1.max(k2) })
}

// ---------------------------------------------------------------------------
// Track gadgets: a cellular pushdown store and a cellular queue.
// ---------------------------------------------------------------------------

/// Per-slot symbol group bound.
pub const MAX_SEG: usize = 8;
/// Leftmost-cell working buffer bound.
pub const MAX_BUF: usize = 32;

/// A bounded group of symbols (for stack slots the first symbol is nearest
/// the top; for queue slots it is the oldest transition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seg {
    pub len: u8,
    pub data: [u8; MAX_SEG],
}

impl Seg {
    pub fn new() -> Self {
        Seg { len: 0, data: [0; MAX_SEG] }
    }

    pub fn from_slice(syms: &[u8]) -> Self {
        assert!(syms.len() <= MAX_SEG);
        let mut seg = Seg::new();
        for (i, &s) in syms.iter().enumerate() {
            seg.data[i] = s;
        }
        seg.len = syms.len() as u8;
        seg
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data[..self.len as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, sym: u8) {
        self.data[self.len as usize] = sym;
        self.len += 1;
    }
}

impl Default for Seg {
    fn default() -> Self {
        Seg::new()
    }
}

/// One interior cell of the cellular pushdown store: two slot segments and
/// the rebalancing wave front addressed to the right neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackCell {
    pub a: Option<Seg>,
    pub b: Option<Seg>,
    pub wave: StackWave,
}

/// A slot-shift front: a cell's `wave` is processed by its right neighbor on
/// the next step. `Push` carries the displaced segment; `Pull` shifts the
/// suffix one slot left (the taker reads the giver's top slot in the same
/// step the front reaches the giver's left neighbor). Front spacing of at
/// least two steps is guaranteed by the head's hysteresis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackWave {
    None,
    Push(Seg),
    Pull,
}

impl StackCell {
    pub fn empty() -> Self {
        StackCell { a: None, b: None, wave: StackWave::None }
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_none() && self.b.is_none()
    }
}

/// Interior transition of the pushdown track.
pub fn stack_interior_step(left_wave: StackWave, c: &StackCell, right_a: Option<Seg>) -> StackCell {
    match left_wave {
        StackWave::Push(seg) => StackCell {
            a: Some(seg),
            b: c.a,
            wave: match c.b {
                Some(displaced) => StackWave::Push(displaced),
                None => StackWave::None,
            },
        },
        StackWave::Pull => StackCell {
            a: c.b,
            b: right_a,
            wave: if c.b.is_some() || right_a.is_some() { StackWave::Pull } else { StackWave::None },
        },
        StackWave::None => StackCell { a: c.a, b: c.b, wave: StackWave::None },
    }
}

/// The leftmost cell of a stack track: a bounded symbol buffer (top first)
/// with shed/pull hysteresis keeping wave fronts at least two steps apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackHead {
    pub len: u8,
    pub data: [u8; MAX_BUF],
    pub cooldown: bool,
    pub wave: StackWave,
}

impl StackHead {
    pub fn new() -> Self {
        StackHead { len: 0, data: [0; MAX_BUF], cooldown: false, wave: StackWave::None }
    }

    pub fn top(&self) -> Option<u8> {
        (self.len > 0).then(|| self.data[0])
    }

    pub fn pop(&mut self) -> Option<u8> {
        if self.len == 0 {
            return None;
        }
        let sym = self.data[0];
        self.data.copy_within(1..self.len as usize, 0);
        self.len -= 1;
        // Zero the vacated tail so equal stacks are equal states.
        self.data[self.len as usize] = 0;
        Some(sym)
    }

    pub fn push_word(&mut self, word: &[u8]) {
        assert!(self.len as usize + word.len() <= MAX_BUF, "head buffer overflow");
        let n = word.len();
        self.data.copy_within(0..self.len as usize, n);
        self.data[..n].copy_from_slice(word);
        self.len += n as u8;
    }

    /// Rebalances against the interior after this step's operations:
    /// sheds a full segment when brimming, pulls one when low.
    pub fn rebalance(&mut self, right_a: Option<Seg>, params: HeadParams) {
        self.wave = StackWave::None;
        let len = self.len as usize;
        if len > params.hi {
            let keep = len - params.seg;
            let mut shed = Seg::new();
            for &s in &self.data[keep..len] {
                shed.push(s);
            }
            self.data[keep..len].fill(0);
            self.len = keep as u8;
            self.wave = StackWave::Push(shed);
            self.cooldown = false;
        } else if len < params.lo && !self.cooldown {
            if let Some(seg) = right_a {
                for &s in seg.as_slice() {
                    self.data[self.len as usize] = s;
                    self.len += 1;
                }
                self.wave = StackWave::Pull;
                self.cooldown = true;
            }
        } else {
            self.cooldown = false;
        }
    }
}

impl Default for StackHead {
    fn default() -> Self {
        StackHead::new()
    }
}

/// Buffer hysteresis parameters: `seg` is the interior slot group size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadParams {
    pub seg: usize,
    pub lo: usize,
    pub hi: usize,
}

impl HeadParams {
    /// Sized for at most `max_pops` popped and `max_push` pushed symbols per
    /// step: pulls then stay two steps apart and never under-run.
    pub fn for_rates(max_pops: usize, max_push: usize) -> Result<Self, DpdtError> {
        let seg = (2 * max_pops).max(max_push).max(2);
        let lo = 2 * max_pops + 2;
        let hi = lo + 2 * seg;
        if seg > MAX_SEG || hi + max_push + seg > MAX_BUF {
            return Err(DpdtError::ConstantsTooLarge(format!(
                "segment {seg} / buffer {hi} exceed the cell layout"
            )));
        }
        Ok(HeadParams { seg, lo, hi })
    }
}

/// Kind marker for a built gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    Stack,
    Queue,
}

/// A reusable CAT track fragment: the leftmost-cell interface plus interior
/// rebalancing at speed 1. `capacity` is the per-slot symbol group size.
#[derive(Debug, Clone, Copy)]
pub struct TrackGadget {
    pub kind: GadgetKind,
    pub capacity: usize,
    pub params: HeadParams,
}

/// Pushdown track absorbing pushes of up to `k` symbols and one pop per step.
pub fn build_track_stack(k: usize) -> TrackGadget {
    let params = HeadParams::for_rates(1, k.max(1)).expect("gadget rates fit the layout");
    TrackGadget { kind: GadgetKind::Stack, capacity: k.max(1), params }
}

/// Queue track enqueueing one group of up to `k + 1` items per step.
pub fn build_track_queue(k: usize) -> TrackGadget {
    assert!(k < MAX_SEG);
    TrackGadget {
        kind: GadgetKind::Queue,
        capacity: k + 1,
        params: HeadParams { seg: k + 1, lo: 0, hi: MAX_BUF },
    }
}

/// One interface operation per step at the leftmost cell of a stack track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackOp {
    Nop,
    Push(Seg),
    Pop,
}

/// Whole-line simulator for the stack gadget, used by the replay tests; the
/// compiled machine embeds the same head and interior transitions.
pub struct StackLine {
    pub head: StackHead,
    pub cells: Vec<StackCell>,
    pub params: HeadParams,
}

impl StackLine {
    pub fn new(gadget: &TrackGadget, len: usize) -> Self {
        StackLine {
            head: StackHead::new(),
            cells: vec![StackCell::empty(); len],
            params: gadget.params,
        }
    }

    pub fn step(&mut self, op: StackOp) -> Option<u8> {
        let right_a = self.cells.first().and_then(|c| c.a);
        let mut head = self.head;
        let observed = match op {
            StackOp::Nop => None,
            StackOp::Push(seg) => {
                head.push_word(seg.as_slice());
                None
            }
            StackOp::Pop => head.pop(),
        };
        head.rebalance(right_a, self.params);
        let mut next = Vec::with_capacity(self.cells.len());
        for i in 0..self.cells.len() {
            let left_wave = if i == 0 { self.head.wave } else { self.cells[i - 1].wave };
            let right_a = self.cells.get(i + 1).and_then(|c| c.a);
            next.push(stack_interior_step(left_wave, &self.cells[i], right_a));
        }
        self.head = head;
        self.cells = next;
        observed
    }

    pub fn top(&self) -> Option<u8> {
        self.head.top()
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }
}

/// One interior cell of the cellular queue: a parked group and a group in
/// transit toward its parking slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueueCell {
    pub settled: Option<Seg>,
    pub transit: Option<Seg>,
}

impl QueueCell {
    pub fn empty() -> Self {
        QueueCell { settled: None, transit: None }
    }
}

/// Queue cell transition: groups move right one cell per step and park on
/// the first free cell whose left neighbor is already parked.
pub fn queue_cell_step(incoming: Option<Seg>, c: &QueueCell, anchored_left: bool) -> QueueCell {
    let mut settled = c.settled;
    let mut transit = None;
    if let Some(group) = incoming {
        if settled.is_none() && anchored_left {
            settled = Some(group);
        } else {
            transit = Some(group);
        }
    }
    QueueCell { settled, transit }
}

/// Whole-line queue simulator for the replay tests.
pub struct QueueLine {
    pub cells: Vec<QueueCell>,
}

impl QueueLine {
    pub fn new(len: usize) -> Self {
        QueueLine { cells: vec![QueueCell::empty(); len] }
    }

    pub fn step(&mut self, enqueue: Option<Seg>) {
        let mut next = Vec::with_capacity(self.cells.len());
        for i in 0..self.cells.len() {
            let (incoming, anchored_left) = if i == 0 {
                (enqueue, true)
            } else {
                (self.cells[i - 1].transit, self.cells[i - 1].settled.is_some())
            };
            next.push(queue_cell_step(incoming, &self.cells[i], anchored_left));
        }
        self.cells = next;
    }

    pub fn stable(&self) -> bool {
        self.cells.iter().all(|c| c.transit.is_none())
    }

    /// Parked groups in FIFO (cell) order.
    pub fn sweep(&self) -> Vec<Seg> {
        let mut out = Vec::new();
        for c in &self.cells {
            match c.settled {
                Some(g) => out.push(g),
                None => break,
            }
        }
        out
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.settled.is_some() || c.transit.is_some()).count()
    }
}

// ---------------------------------------------------------------------------
// The compiled CAT.
// ---------------------------------------------------------------------------

/// Compact form of the source DPDT used inside the compiled cells.
struct PdtTables {
    /// (state * n_syms + sym) * n_stack + top -> rule.
    input_rules: Vec<Option<u16>>,
    /// state * n_stack + top -> λ-rule.
    lambda_rules: Vec<Option<u16>>,
    n_syms: usize,
    n_stack: usize,
    initial: u16,
    initial_stack: u8,
    accepting: Vec<bool>,
    targets: Vec<u16>,
    pushes: Vec<Vec<u8>>,
    outputs: Vec<String>,
    k2: usize,
}

impl PdtTables {
    fn build(spec: &SeqTransducerSpec, constants: PdtConstants) -> Self {
        let states: Vec<&str> = spec.states.iter().map(|s| s.as_str()).collect();
        let syms: Vec<&str> = spec.input_alphabet.iter().map(|s| s.as_str()).collect();
        let stack: Vec<char> = spec.stack_alphabet.iter().filter_map(|g| g.chars().next()).collect();
        let n_states = states.len();
        let n_syms = syms.len();
        let n_stack = stack.len();
        let mut input_rules = vec![None; n_states * n_syms * n_stack];
        let mut lambda_rules = vec![None; n_states * n_stack];
        let mut targets = Vec::with_capacity(spec.rules.len());
        let mut pushes = Vec::with_capacity(spec.rules.len());
        let mut outputs = Vec::with_capacity(spec.rules.len());
        for (idx, rule) in spec.rules.iter().enumerate() {
            let q = states.iter().position(|s| *s == rule.from).expect("validated");
            let g = stack
                .iter()
                .position(|c| rule.pop.as_deref().and_then(|p| p.chars().next()) == Some(*c))
                .expect("validated");
            match &rule.input {
                Some(sym) => {
                    let s = syms.iter().position(|a| *a == sym).expect("validated");
                    input_rules[(q * n_syms + s) * n_stack + g] = Some(idx as u16);
                }
                None => lambda_rules[q * n_stack + g] = Some(idx as u16),
            }
            targets.push(states.iter().position(|s| *s == rule.to).expect("validated") as u16);
            pushes.push(
                rule.push
                    .as_deref()
                    .unwrap_or("")
                    .chars()
                    .map(|c| stack.iter().position(|g| *g == c).expect("validated") as u8)
                    .collect(),
            );
            outputs.push(rule.out.clone());
        }
        PdtTables {
            input_rules,
            lambda_rules,
            n_syms,
            n_stack,
            initial: states.iter().position(|s| *s == spec.initial).expect("validated") as u16,
            initial_stack: stack
                .iter()
                .position(|c| {
                    spec.initial_stack.as_deref().and_then(|z| z.chars().next()) == Some(*c)
                })
                .expect("validated") as u8,
            accepting: spec.states.iter().map(|s| spec.accepting.contains(s)).collect(),
            targets,
            pushes,
            outputs,
            k2: constants.k2,
        }
    }

    fn input_rule(&self, state: u16, sym: u8, top: u8) -> Option<u16> {
        self.input_rules[(state as usize * self.n_syms + sym as usize) * self.n_stack + top as usize]
    }

    fn lambda_rule(&self, state: u16, top: u8) -> Option<u16> {
        self.lambda_rules[state as usize * self.n_stack + top as usize]
    }
}

/// Acceptance-track head: a real-time DPDA simulation with λ-bursts
/// compressed into the consuming step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct AccHead {
    state: u16,
    started: bool,
    dead: bool,
    accepted: bool,
    buf: StackHead,
}

/// Simulation-track head: the true transducer run, one move per step,
/// assembling queue groups of transition ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SimHead {
    state: u16,
    started: bool,
    phase: SimPhase,
    /// λ-transitions taken since the previous consume.
    group: Seg,
    /// The last consume's completed group, enqueued one consume later so
    /// that trailing λ-moves can still join it.
    pending: Option<Seg>,
    buf: StackHead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SimPhase {
    Running,
    Done,
    Stuck,
}

/// A demand-conveyor slot: a symbol still to be consumed or the end marker
/// that flows in from the right boundary. Holes (`None` slots) are born at
/// the consuming cell and drift right one cell per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ConvVal {
    Sym(u8),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Sweep {
    No,
    Right,
    Left,
    Passed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct DpdtCell {
    /// Full-speed left shift feeding the acceptance head.
    ls: Option<u8>,
    /// Demand-driven conveyor feeding the simulation head.
    conv: Option<ConvVal>,
    acc: Option<AccHead>,
    sim: Option<SimHead>,
    acc_sc: StackCell,
    sim_sc: StackCell,
    q: QueueCell,
    sweep: Sweep,
}

struct DpdtAutomaton {
    tables: PdtTables,
    acc_params: HeadParams,
    sim_params: HeadParams,
    alphabet: Vec<String>,
    outputs: Vec<String>,
}

impl DpdtAutomaton {
    /// One compressed acceptance step: λ-moves until an input rule applies,
    /// then consume `sym`; on the final symbol also run the trailing
    /// λ-closure virtually for the acceptance verdict.
    fn acc_step(&self, head: &AccHead, sym: u8, last: bool, right_a: Option<Seg>) -> AccHead {
        let t = &self.tables;
        let mut h = *head;
        if !h.started {
            h.state = t.initial;
            h.buf.push_word(&[t.initial_stack]);
            h.started = true;
        }
        if h.dead {
            h.buf.rebalance(right_a, self.acc_params);
            return h;
        }
        // λ-burst before the consume.
        for _ in 0..=t.k2 {
            let Some(top) = h.buf.top() else {
                h.dead = true;
                h.buf.rebalance(right_a, self.acc_params);
                return h;
            };
            if t.input_rule(h.state, sym, top).is_some() {
                break;
            }
            match t.lambda_rule(h.state, top) {
                Some(rule) => {
                    h.buf.pop();
                    let push = &t.pushes[rule as usize];
                    h.buf.push_word(push);
                    h.state = t.targets[rule as usize];
                }
                None => {
                    h.dead = true;
                    h.buf.rebalance(right_a, self.acc_params);
                    return h;
                }
            }
        }
        let Some(top) = h.buf.top() else {
            h.dead = true;
            h.buf.rebalance(right_a, self.acc_params);
            return h;
        };
        match t.input_rule(h.state, sym, top) {
            Some(rule) => {
                h.buf.pop();
                h.buf.push_word(&t.pushes[rule as usize]);
                h.state = t.targets[rule as usize];
            }
            None => {
                h.dead = true;
                h.buf.rebalance(right_a, self.acc_params);
                return h;
            }
        }
        if last {
            // Trailing λ-closure, virtual: only the verdict matters.
            let mut state = h.state;
            let mut view: Vec<u8> = h.buf.data[..h.buf.len as usize].to_vec();
            for _ in 0..=t.k2 {
                if t.accepting[state as usize] {
                    h.accepted = true;
                    break;
                }
                let Some(&top) = view.first() else { break };
                match t.lambda_rule(state, top) {
                    Some(rule) => {
                        view.remove(0);
                        let mut pref: Vec<u8> = t.pushes[rule as usize].clone();
                        pref.extend_from_slice(&view);
                        view = pref;
                        state = t.targets[rule as usize];
                    }
                    None => break,
                }
            }
        }
        h.buf.rebalance(right_a, self.acc_params);
        h
    }

    /// One true simulation move: a λ-move whenever one applies (determinism
    /// makes it independent of the pending input symbol), otherwise a
    /// consume when the conveyor offers a symbol. Completed groups are
    /// enqueued one consume late so trailing λ-moves join the final group.
    fn sim_step(
        &self,
        head: &SimHead,
        conv: Option<ConvVal>,
        right_a: Option<Seg>,
    ) -> (SimHead, bool, Option<Seg>) {
        let t = &self.tables;
        let mut h = *head;
        if !h.started {
            h.state = t.initial;
            h.buf.push_word(&[t.initial_stack]);
            h.started = true;
        }
        if h.phase != SimPhase::Running {
            h.buf.rebalance(right_a, self.sim_params);
            return (h, false, None);
        }
        let mut consumed = false;
        let mut enqueue = None;
        let top = h.buf.top();
        let lambda = top.and_then(|g| t.lambda_rule(h.state, g));
        match conv {
            Some(ConvVal::End) if t.accepting[h.state as usize] => {
                // Input consumed and an accepting state reached: flush the
                // final group (last consume plus its trailing λ-moves).
                h.phase = SimPhase::Done;
                let mut last = h.pending.take().unwrap_or_default();
                for &r in h.group.as_slice() {
                    last.push(r);
                }
                h.group = Seg::new();
                if !last.is_empty() {
                    enqueue = Some(last);
                }
            }
            _ => match lambda {
                Some(rule) => {
                    h.buf.pop();
                    h.buf.push_word(&t.pushes[rule as usize]);
                    h.state = t.targets[rule as usize];
                    h.group.push(rule as u8);
                }
                None => match conv {
                    Some(ConvVal::Sym(sym)) => match top.and_then(|g| t.input_rule(h.state, sym, g)) {
                        Some(rule) => {
                            h.buf.pop();
                            h.buf.push_word(&t.pushes[rule as usize]);
                            h.state = t.targets[rule as usize];
                            h.group.push(rule as u8);
                            enqueue = h.pending.take();
                            h.pending = Some(h.group);
                            h.group = Seg::new();
                            consumed = true;
                        }
                        None => h.phase = SimPhase::Stuck,
                    },
                    Some(ConvVal::End) => h.phase = SimPhase::Stuck,
                    // A hole: the next symbol is still in flight.
                    None => {}
                },
            },
        }
        h.buf.rebalance(right_a, self.sim_params);
        (h, consumed, enqueue)
    }
}

impl SynthAutomaton for DpdtAutomaton {
    type State = DpdtCell;

    fn init(&self, symbol: &str) -> Option<DpdtCell> {
        let idx = self.alphabet.iter().position(|a| a == symbol)? as u8;
        Some(DpdtCell {
            ls: Some(idx),
            conv: Some(ConvVal::Sym(idx)),
            acc: None,
            sim: None,
            acc_sc: StackCell::empty(),
            sim_sc: StackCell::empty(),
            q: QueueCell::empty(),
            sweep: Sweep::No,
        })
    }

    fn step(
        &self,
        left: Option<&DpdtCell>,
        c: &DpdtCell,
        right: Option<&DpdtCell>,
    ) -> (DpdtCell, Option<String>) {
        let mut next = *c;

        // The acceptance feed shifts left unconditionally every step.
        next.ls = right.and_then(|r| r.ls);
        // Conveyor: a hole takes from the right (the boundary supplies the
        // end marker); a cell whose left neighbor is a hole gave its value
        // away and becomes the hole.
        let right_conv = right.map_or(Some(ConvVal::End), |r| r.conv);
        next.conv = if c.conv.is_none() {
            right_conv
        } else if left.is_some_and(|l| l.conv.is_none()) {
            None
        } else {
            c.conv
        };

        if left.is_none() {
            // Heads live in the leftmost cell. Both stacks' interior state
            // starts at the right neighbor, so the head's wave is stored in
            // this cell's stack fields for the neighbor to process.
            let acc0 = c.acc.unwrap_or(AccHead {
                state: 0,
                started: false,
                dead: false,
                accepted: false,
                buf: StackHead::new(),
            });
            let acc_right_a = right.and_then(|r| r.acc_sc.a);
            let acc = match c.ls {
                Some(sym) => {
                    let last = right.is_none_or(|r| r.ls.is_none());
                    self.acc_step(&acc0, sym, last, acc_right_a)
                }
                None => {
                    let mut h = acc0;
                    h.buf.rebalance(acc_right_a, self.acc_params);
                    h
                }
            };
            next.acc_sc = StackCell { a: None, b: None, wave: acc.buf.wave };
            let mut acc = acc;
            acc.buf.wave = StackWave::None;
            next.acc = Some(acc);

            let sim0 = c.sim.unwrap_or(SimHead {
                state: 0,
                started: false,
                phase: SimPhase::Running,
                group: Seg::new(),
                pending: None,
                buf: StackHead::new(),
            });
            let sim_right_a = right.and_then(|r| r.sim_sc.a);
            let (sim, consumed, enqueue) = self.sim_step(&sim0, c.conv, sim_right_a);
            next.sim_sc = StackCell { a: None, b: None, wave: sim.buf.wave };
            let mut sim = sim;
            sim.buf.wave = StackWave::None;
            next.sim = Some(sim);
            if consumed {
                next.conv = None;
            }
            next.q = queue_cell_step(enqueue, &c.q, true);

            // The output sweep starts once the word is accepted and the
            // simulation has flushed its last group.
            next.sweep = match c.sweep {
                Sweep::No => {
                    if next.acc.is_some_and(|a| a.accepted)
                        && next.sim.is_some_and(|s| s.phase == SimPhase::Done)
                        && next.q.transit.is_none()
                    {
                        Sweep::Right
                    } else {
                        Sweep::No
                    }
                }
                Sweep::Right => {
                    let handoff = next.q.transit.is_none()
                        && right.is_none_or(|r| r.q.transit.is_none());
                    if right.is_none() {
                        Sweep::Left
                    } else if handoff {
                        Sweep::Passed
                    } else {
                        Sweep::Right
                    }
                }
                Sweep::Passed => {
                    if right.is_some_and(|r| r.sweep == Sweep::Left) {
                        Sweep::Left
                    } else {
                        Sweep::Passed
                    }
                }
                other => other,
            };
        } else {
            // Interior cells: stack rebalancing, queue parking, sweep relay.
            let l = left.expect("interior");
            next.acc = None;
            next.sim = None;
            next.acc_sc =
                stack_interior_step(l.acc_sc.wave, &c.acc_sc, right.and_then(|r| r.acc_sc.a));
            next.sim_sc =
                stack_interior_step(l.sim_sc.wave, &c.sim_sc, right.and_then(|r| r.sim_sc.a));
            next.q = queue_cell_step(l.q.transit, &c.q, l.q.settled.is_some());
            next.sweep = match c.sweep {
                Sweep::No => {
                    let take = l.sweep == Sweep::Right
                        && l.q.transit.is_none()
                        && c.q.transit.is_none();
                    if take {
                        Sweep::Right
                    } else if right.is_some_and(|r| r.sweep == Sweep::Left) {
                        Sweep::Left
                    } else {
                        Sweep::No
                    }
                }
                Sweep::Right => {
                    if right.is_none() {
                        Sweep::Left
                    } else {
                        let handoff = next.q.transit.is_none()
                            && right.is_none_or(|r| r.q.transit.is_none());
                        if handoff {
                            Sweep::Passed
                        } else {
                            Sweep::Right
                        }
                    }
                }
                Sweep::Passed => {
                    if right.is_some_and(|r| r.sweep == Sweep::Left) {
                        Sweep::Left
                    } else {
                        Sweep::Passed
                    }
                }
                Sweep::Left => Sweep::Left,
            };
        }

        // Output: cells emit their queue group's outputs when the returning
        // sweep passes; cells without a group emit the empty word.
        let emits = next.sweep == Sweep::Left && c.sweep != Sweep::Left;
        let out = emits.then(|| {
            let mut s = String::new();
            if let Some(group) = c.q.settled {
                for &rule in group.as_slice() {
                    s.push_str(&self.tables.outputs[rule as usize]);
                }
            }
            s
        });
        (next, out)
    }

    fn accepting(&self, s: &DpdtCell) -> bool {
        s.acc.is_some_and(|a| a.accepted)
    }

    fn name(&self, s: &DpdtCell) -> String {
        let sym = |o: Option<u8>| match o {
            Some(i) => self.alphabet[i as usize].clone(),
            None => "_".to_string(),
        };
        let cv = |o: Option<ConvVal>| match o {
            Some(ConvVal::Sym(i)) => self.alphabet[i as usize].clone(),
            Some(ConvVal::End) => "$".to_string(),
            None => "_".to_string(),
        };
        if s.acc.is_none()
            && s.sim.is_none()
            && s.acc_sc == StackCell::empty()
            && s.sim_sc == StackCell::empty()
            && s.q == QueueCell::empty()
            && s.sweep == Sweep::No
            && s.ls.map(ConvVal::Sym) == s.conv
        {
            if let Some(i) = s.ls {
                return self.alphabet[i as usize].clone();
            }
        }
        let seg = |g: &Seg| {
            g.as_slice().iter().map(|v| v.to_string()).collect::<Vec<_>>().join("")
        };
        let slot = |o: &Option<Seg>| o.as_ref().map_or("-".to_string(), seg);
        let sc = |c: &StackCell| {
            format!(
                "{}.{}{}",
                slot(&c.a),
                slot(&c.b),
                match c.wave {
                    StackWave::None => String::new(),
                    StackWave::Push(s) => format!(">{}", seg(&s)),
                    StackWave::Pull => "<".to_string(),
                }
            )
        };
        let heads = match (&s.acc, &s.sim) {
            (Some(a), Some(m)) => format!(
                "A{}{}{}{}{}[{}]M{}{}{}{}[{}]g{}",
                a.state,
                if a.started { "" } else { "0" },
                if a.dead { "x" } else { "" },
                if a.accepted { "+" } else { "" },
                if a.buf.cooldown { "~" } else { "" },
                a.buf.data[..a.buf.len as usize]
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<String>(),
                m.state,
                if m.started { "" } else { "0" },
                match m.phase {
                    SimPhase::Running => "",
                    SimPhase::Done => "!",
                    SimPhase::Stuck => "x",
                },
                if m.buf.cooldown { "~" } else { "" },
                m.buf.data[..m.buf.len as usize]
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<String>(),
                format!(
                    "{}.{}",
                    seg(&m.group),
                    m.pending.as_ref().map_or("-".to_string(), seg)
                ),
            ),
            _ => String::new(),
        };
        format!(
            "{}/{}|{}|{}|{}.{}|{}{}",
            sym(s.ls),
            cv(s.conv),
            sc(&s.acc_sc),
            sc(&s.sim_sc),
            slot(&s.q.settled),
            slot(&s.q.transit),
            match s.sweep {
                Sweep::No => "",
                Sweep::Right => "R",
                Sweep::Left => "L",
                Sweep::Passed => "p",
            },
            heads,
        )
    }

    fn input_symbols(&self) -> Vec<String> {
        self.alphabet.clone()
    }

    fn output_symbols(&self) -> Vec<String> {
        self.outputs.clone()
    }
}

/// What the compiler reports alongside the machine.
#[derive(Debug, Clone)]
pub struct DpdtReport {
    pub constants: PdtConstants,
    /// Declared output-completion factor: measured `t_o` stays at or below
    /// `output_factor * n` on accepted words.
    pub output_factor: Rational,
}

/// Compiles a deterministic PDT into a CAT accepting `L(M)` in real time and
/// completing its output within a reported linear factor.
pub fn compile_dpdt_to_cat(
    spec: &SeqTransducerSpec,
) -> Result<(CatSpec, DpdtReport), DpdtError> {
    let constants = compute_constants(spec)?;
    let acc_params =
        HeadParams::for_rates(constants.k2 + 1, constants.k1 * (constants.k2 + 1).max(1))?;
    let sim_params = HeadParams::for_rates(1, constants.k1.max(1))?;
    if 2 * constants.k2 + 1 > MAX_SEG {
        return Err(DpdtError::ConstantsTooLarge(format!(
            "queue groups need {} slots",
            2 * constants.k2 + 1
        )));
    }
    let tables = PdtTables::build(spec, constants);
    let outputs: BTreeSet<String> = spec.output_alphabet.iter().cloned().collect();
    let automaton = DpdtAutomaton {
        tables,
        acc_params,
        sim_params,
        alphabet: spec.input_alphabet.clone(),
        outputs: outputs.into_iter().collect(),
    };
    let cat = materialize_closure(&automaton, &SynthLimits::default())?;
    let report = DpdtReport {
        constants,
        output_factor: Rational::new(constants.k2 as u64 + 8, 1),
    };
    Ok((cat, report))
}
