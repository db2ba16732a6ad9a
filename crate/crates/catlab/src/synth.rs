//! Turns structured cell automata (Rust state types plus a local rule) into
//! explicit CAT rule tables.
//!
//! Two materialization strategies:
//! - [`materialize_runs`] simulates a fixed family of initial words and
//!   records exactly the window triples that occur. Used when the initial
//!   configurations are known in advance (synchronization components).
//! - [`materialize_closure`] computes a sound over-approximation of every
//!   adjacent state pair reachable from any input word, by a fixpoint over
//!   consistent four-cell windows, and tabulates all pair-consistent
//!   triples. Used for machines that must run on arbitrary words.
//!
//! Both emit a table with the default rule set, so the result is total.

use std::collections::{HashMap, VecDeque};
use std::hash::{BuildHasherDefault, Hash, Hasher};

use thiserror::Error;

use crate::machine::{CatRule, CatSpec, Ctx};

/// Multiply-xor hasher for the small fixed-width keys of the closure tables.
#[derive(Default)]
pub(crate) struct FxHasher(u64);

impl Hasher for FxHasher {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(b as u64);
        }
    }

    fn write_u32(&mut self, v: u32) {
        self.write_u64(v as u64);
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x517c_c1b7_2722_0a95);
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

pub(crate) type FxMap<K, V> = HashMap<K, V, BuildHasherDefault<FxHasher>>;

/// A structured cellular automaton: the compiler-facing face of a CAT.
///
/// `init` maps an input symbol to its initial cell state; the state's `name`
/// must then equal the symbol itself, because input symbols double as states.
pub trait SynthAutomaton {
    type State: Clone + Eq + Hash + Ord;

    fn init(&self, symbol: &str) -> Option<Self::State>;
    /// `None` on either side is the boundary. Returns the successor state and
    /// the emitted output (`None` = no output).
    fn step(
        &self,
        left: Option<&Self::State>,
        center: &Self::State,
        right: Option<&Self::State>,
    ) -> (Self::State, Option<String>);
    fn accepting(&self, state: &Self::State) -> bool;
    /// Unique, stable, human-readable name.
    fn name(&self, state: &Self::State) -> String;
    fn input_symbols(&self) -> Vec<String>;
    fn output_symbols(&self) -> Vec<String>;
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("state budget exhausted: {0} states (limit {1})")]
    TooManyStates(usize, usize),
    #[error("pair budget exhausted: {0} pairs (limit {1})")]
    TooManyPairs(usize, usize),
    #[error("rule budget exhausted: {0} entries (limit {1})")]
    TooManyRules(usize, usize),
    #[error("two states share the name `{0}`")]
    NameCollision(String),
    #[error("input symbol `{0}` has no initial state")]
    UnknownSymbol(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SynthLimits {
    pub max_states: usize,
    pub max_pairs: usize,
    pub max_rules: usize,
}

impl Default for SynthLimits {
    fn default() -> Self {
        SynthLimits { max_states: 400_000, max_pairs: 4_000_000, max_rules: 12_000_000 }
    }
}

const B: u32 = u32::MAX;

struct Interner<S> {
    states: Vec<S>,
    names: Vec<String>,
    index: HashMap<S, u32>,
    seen_names: HashMap<String, u32>,
}

impl<S: Clone + Eq + Hash> Interner<S> {
    fn new() -> Self {
        Interner {
            states: Vec::new(),
            names: Vec::new(),
            index: HashMap::new(),
            seen_names: HashMap::new(),
        }
    }

    fn intern<A: SynthAutomaton<State = S>>(
        &mut self,
        a: &A,
        s: S,
        limits: &SynthLimits,
    ) -> Result<u32, SynthError> {
        if let Some(&id) = self.index.get(&s) {
            return Ok(id);
        }
        if self.states.len() >= limits.max_states {
            return Err(SynthError::TooManyStates(self.states.len() + 1, limits.max_states));
        }
        let id = self.states.len() as u32;
        let name = a.name(&s);
        if let Some(&other) = self.seen_names.get(&name) {
            if self.states[other as usize] != s {
                return Err(SynthError::NameCollision(name));
            }
        }
        self.seen_names.insert(name.clone(), id);
        self.names.push(name);
        self.index.insert(s.clone(), id);
        self.states.push(s);
        Ok(id)
    }
}

struct TableBuilder<S> {
    interner: Interner<S>,
    rules: FxMap<(u32, u32, u32), (u32, Option<String>)>,
}

impl<S: Clone + Eq + Hash + Ord> TableBuilder<S> {
    fn new() -> Self {
        TableBuilder { interner: Interner::new(), rules: FxMap::default() }
    }

    /// Evaluates the local rule on an interned triple, memoized.
    fn apply<A: SynthAutomaton<State = S>>(
        &mut self,
        a: &A,
        l: u32,
        c: u32,
        r: u32,
        limits: &SynthLimits,
    ) -> Result<u32, SynthError> {
        if let Some((next, _)) = self.rules.get(&(l, c, r)) {
            return Ok(*next);
        }
        if self.rules.len() >= limits.max_rules {
            return Err(SynthError::TooManyRules(self.rules.len() + 1, limits.max_rules));
        }
        let left = (l != B).then(|| self.interner.states[l as usize].clone());
        let right = (r != B).then(|| self.interner.states[r as usize].clone());
        let center = self.interner.states[c as usize].clone();
        let (next, out) = a.step(left.as_ref(), &center, right.as_ref());
        let next_id = self.interner.intern(a, next, limits)?;
        self.rules.insert((l, c, r), (next_id, out));
        Ok(next_id)
    }

    fn finish<A: SynthAutomaton<State = S>>(self, a: &A) -> CatSpec {
        let names = self.interner.names;
        let ctx = |id: u32| {
            if id == B {
                Ctx::Boundary
            } else {
                Ctx::State(names[id as usize].clone())
            }
        };
        let mut delta: Vec<CatRule> = self
            .rules
            .into_iter()
            // "Stay, emit nothing" entries are the default rule.
            .filter(|&((_, c, _), (next, ref out))| next != c || out.is_some())
            .map(|((l, c, r), (next, out))| CatRule {
                left: ctx(l),
                center: names[c as usize].clone(),
                right: ctx(r),
                next: names[next as usize].clone(),
                out,
            })
            .collect();
        delta.sort_by(|a, b| {
            (&a.center, &a.left, &a.right).cmp(&(&b.center, &b.left, &b.right))
        });
        let accepting = self
            .interner
            .states
            .iter()
            .zip(&names)
            .filter(|(s, _)| a.accepting(s))
            .map(|(_, n)| n.clone())
            .collect();
        CatSpec {
            states: names,
            accepting,
            input_alphabet: a.input_symbols(),
            output_alphabet: a.output_symbols(),
            delta,
            default_rule: true,
        }
    }
}

/// Materializes by simulating the given initial words and recording every
/// window encountered, running each word until `steps(n)` steps have passed.
pub fn materialize_runs<A: SynthAutomaton>(
    a: &A,
    words: impl IntoIterator<Item = Vec<String>>,
    steps: impl Fn(usize) -> usize,
    limits: &SynthLimits,
) -> Result<CatSpec, SynthError> {
    let mut tb = TableBuilder::new();
    for word in words {
        let n = word.len();
        let mut cells: Vec<u32> = Vec::with_capacity(n);
        for sym in &word {
            let st = a.init(sym).ok_or_else(|| SynthError::UnknownSymbol(sym.clone()))?;
            cells.push(tb.interner.intern(a, st, limits)?);
        }
        for _ in 0..steps(n) {
            let mut next = Vec::with_capacity(n);
            for i in 0..n {
                let l = if i == 0 { B } else { cells[i - 1] };
                let r = if i + 1 == n { B } else { cells[i + 1] };
                next.push(tb.apply(a, l, cells[i], r, limits)?);
            }
            cells = next;
        }
    }
    Ok(tb.finish(a))
}

/// Materializes by window-triple closure: computes a superset of every
/// `(left, center, right)` window that can ever occur in any configuration
/// reachable from any input word of any length. The rule table is exactly
/// that set, so the engine never falls back to the default rule on a
/// genuinely reachable window.
///
/// A triple's successors are derived from five-cell windows glued out of
/// three overlapping reachable triples, which keeps the approximation tight
/// enough for heavily-correlated tracks (counters, fronts, shift registers).
pub fn materialize_closure<A: SynthAutomaton>(
    a: &A,
    limits: &SynthLimits,
) -> Result<CatSpec, SynthError> {
    let mut tb = TableBuilder::new();
    // (w, x) -> ys with (w, x, y) known; (x, y) -> ws with (w, x, y) known.
    let mut by_prefix: FxMap<(u32, u32), Vec<u32>> = FxMap::default();
    let mut by_suffix: FxMap<(u32, u32), Vec<u32>> = FxMap::default();
    let mut queue: VecDeque<(u32, u32, u32)> = VecDeque::new();

    let mut inits = Vec::new();
    for sym in a.input_symbols() {
        let st = a.init(&sym).ok_or_else(|| SynthError::UnknownSymbol(sym.clone()))?;
        inits.push(tb.interner.intern(a, st, limits)?);
    }

    fn add_triple<A: SynthAutomaton>(
        a: &A,
        tb: &mut TableBuilder<A::State>,
        by_prefix: &mut FxMap<(u32, u32), Vec<u32>>,
        by_suffix: &mut FxMap<(u32, u32), Vec<u32>>,
        queue: &mut VecDeque<(u32, u32, u32)>,
        t: (u32, u32, u32),
        limits: &SynthLimits,
    ) -> Result<(), SynthError> {
        let (w, x, y) = t;
        if tb.rules.contains_key(&t) {
            return Ok(());
        }
        tb.apply(a, w, x, y, limits)?;
        by_prefix.entry((w, x)).or_default().push(y);
        by_suffix.entry((x, y)).or_default().push(w);
        queue.push_back(t);
        Ok(())
    }

    let init_ids = inits.clone();
    for &x in &init_ids {
        add_triple(a, &mut tb, &mut by_prefix, &mut by_suffix, &mut queue, (B, x, B), limits)?;
        for &y in &init_ids {
            add_triple(a, &mut tb, &mut by_prefix, &mut by_suffix, &mut queue, (B, x, y), limits)?;
            add_triple(a, &mut tb, &mut by_prefix, &mut by_suffix, &mut queue, (x, y, B), limits)?;
            for &z in &init_ids {
                add_triple(a, &mut tb, &mut by_prefix, &mut by_suffix, &mut queue, (x, y, z), limits)?;
            }
        }
    }

    // For a center triple (w, x, y) inside a five-cell window
    // (v, w, x, y, z), the successors are w' = δ(v,w,x), x' = δ(w,x,y),
    // y' = δ(x,y,z); the boundary stays in place. Each window is joined a
    // bounded number of times: fully when its center pops, and incrementally
    // when a later left or right extension arrives.
    while let Some((w, x, y)) = queue.pop_front() {
        // Successor state sets for a center triple's outer cells.
        macro_rules! w_nexts {
            ($cw:expr, $cx:expr) => {{
                let (cw, cx) = ($cw, $cx);
                if cw == B {
                    vec![B]
                } else {
                    let vs: Vec<u32> = by_suffix.get(&(cw, cx)).cloned().unwrap_or_default();
                    let mut outs = Vec::with_capacity(vs.len());
                    for v in vs {
                        outs.push(tb.apply(a, v, cw, cx, limits)?);
                    }
                    outs.sort_unstable();
                    outs.dedup();
                    outs
                }
            }};
        }
        macro_rules! y_nexts {
            ($cx:expr, $cy:expr) => {{
                let (cx, cy) = ($cx, $cy);
                if cy == B {
                    vec![B]
                } else {
                    let zs: Vec<u32> = by_prefix.get(&(cx, cy)).cloned().unwrap_or_default();
                    let mut outs = Vec::with_capacity(zs.len());
                    for z in zs {
                        outs.push(tb.apply(a, cx, cy, z, limits)?);
                    }
                    outs.sort_unstable();
                    outs.dedup();
                    outs
                }
            }};
        }
        macro_rules! emit {
            ($wn:expr, $xn:expr, $yn:expr) => {
                add_triple(a, &mut tb, &mut by_prefix, &mut by_suffix, &mut queue, ($wn, $xn, $yn), limits)?
            };
        }

        // Role 1: this triple as the window's center.
        {
            let x_next = tb.apply(a, w, x, y, limits)?;
            let wn = w_nexts!(w, x);
            let yn = y_nexts!(x, y);
            for &a1 in &wn {
                for &b1 in &yn {
                    emit!(a1, x_next, b1);
                }
            }
        }
        // Role 2: as a new left extension of existing centers (x, y, _).
        if y != B {
            let w_next = tb.apply(a, w, x, y, limits)?;
            let centers: Vec<u32> = by_prefix.get(&(x, y)).cloned().unwrap_or_default();
            for cy in centers {
                let x_next = tb.apply(a, x, y, cy, limits)?;
                let yn = y_nexts!(y, cy);
                for &b1 in &yn {
                    emit!(w_next, x_next, b1);
                }
            }
        }
        // Role 3: as a new right extension of existing centers (_, w, x).
        if w != B {
            let y_next = tb.apply(a, w, x, y, limits)?;
            let centers: Vec<u32> = by_suffix.get(&(w, x)).cloned().unwrap_or_default();
            for cw in centers {
                let x_next = tb.apply(a, cw, w, x, limits)?;
                let wn = w_nexts!(cw, w);
                for &a1 in &wn {
                    emit!(a1, x_next, y_next);
                }
            }
        }
    }
    Ok(tb.finish(a))
}

/// A structured iterative array transducer: the compiler-facing face of an
/// IAT. The leftmost (communication) cell steps by `comm_step` — `None`
/// means the machine halts there — and every other cell by `interior_step`.
pub trait IatSynthAutomaton {
    type State: Clone + Eq + Hash + Ord;

    fn quiescent(&self) -> Self::State;
    /// `input` is an input symbol or `None` for the end marker.
    fn comm_step(
        &self,
        input: Option<&str>,
        comm: &Self::State,
        right: &Self::State,
    ) -> Option<(String, Self::State)>;
    fn interior_step(
        &self,
        left: &Self::State,
        center: &Self::State,
        right: &Self::State,
    ) -> Self::State;
    fn accepting(&self, state: &Self::State) -> bool;
    fn name(&self, state: &Self::State) -> String;
    fn input_symbols(&self) -> Vec<String>;
    fn output_symbols(&self) -> Vec<String>;
}

struct IatBuilder<'a, A: IatSynthAutomaton> {
    a: &'a A,
    limits: &'a SynthLimits,
    interner: Interner<A::State>,
    inputs: Vec<String>,
    q0: u32,
    /// Interior window evaluations; doubles as the reachable-triple set.
    /// The left component may be a communication-cell state.
    interior: FxMap<(u32, u32, u32), u32>,
    by_prefix: FxMap<(u32, u32), Vec<u32>>,
    by_suffix: FxMap<(u32, u32), Vec<u32>>,
    /// Communication-cell evaluations per (input index or marker, comm, right).
    comm: FxMap<(Option<u16>, u32, u32), Option<(String, u32)>>,
    pairs: FxMap<(u32, u32), ()>,
    tqueue: VecDeque<(u32, u32, u32)>,
    pqueue: VecDeque<(u32, u32)>,
}

impl<'a, A: IatSynthAutomaton> IatBuilder<'a, A> {
    fn intern(&mut self, s: A::State) -> Result<u32, SynthError> {
        if let Some(&id) = self.interner.index.get(&s) {
            return Ok(id);
        }
        if self.interner.states.len() >= self.limits.max_states {
            return Err(SynthError::TooManyStates(
                self.interner.states.len() + 1,
                self.limits.max_states,
            ));
        }
        let id = self.interner.states.len() as u32;
        let name = self.a.name(&s);
        if let Some(&other) = self.interner.seen_names.get(&name) {
            if self.interner.states[other as usize] != s {
                return Err(SynthError::NameCollision(name));
            }
        }
        self.interner.seen_names.insert(name.clone(), id);
        self.interner.names.push(name);
        self.interner.index.insert(s.clone(), id);
        self.interner.states.push(s);
        Ok(id)
    }

    /// Evaluates (and records) the interior rule on a window triple.
    fn next_interior(&mut self, t: (u32, u32, u32)) -> Result<u32, SynthError> {
        self.add_triple(t)?;
        Ok(*self.interior.get(&t).expect("added"))
    }

    fn add_triple(&mut self, t: (u32, u32, u32)) -> Result<(), SynthError> {
        if self.interior.contains_key(&t) {
            return Ok(());
        }
        if self.interior.len() >= self.limits.max_rules {
            return Err(SynthError::TooManyRules(self.interior.len() + 1, self.limits.max_rules));
        }
        let (w, x, y) = t;
        let lw = self.interner.states[w as usize].clone();
        let cx = self.interner.states[x as usize].clone();
        let ry = self.interner.states[y as usize].clone();
        let next = self.a.interior_step(&lw, &cx, &ry);
        let id = self.intern(next)?;
        self.interior.insert(t, id);
        self.by_prefix.entry((w, x)).or_default().push(y);
        self.by_suffix.entry((x, y)).or_default().push(w);
        self.tqueue.push_back(t);
        // Any reachable adjacent pair may sit at the quiescent frontier.
        self.add_triple((x, y, self.q0))?;
        Ok(())
    }

    fn add_pair(&mut self, p: (u32, u32)) -> Result<(), SynthError> {
        if self.pairs.contains_key(&p) {
            return Ok(());
        }
        self.pairs.insert(p, ());
        self.pqueue.push_back(p);
        self.add_triple((p.0, p.1, self.q0))?;
        Ok(())
    }

    /// Evaluates the communication cell on every input for a (comm, right)
    /// pair, recording the table entries; returns the successor comm states.
    fn comm_successors(&mut self, c: u32, r2: u32) -> Result<Vec<u32>, SynthError> {
        let mut out = Vec::new();
        for idx in (0..self.inputs.len() as u16).map(Some).chain([None]) {
            let key = (idx, c, r2);
            if !self.comm.contains_key(&key) {
                let cs = self.interner.states[c as usize].clone();
                let rs = self.interner.states[r2 as usize].clone();
                let input_owned = idx.map(|i| self.inputs[i as usize].clone());
                let result = self.a.comm_step(input_owned.as_deref(), &cs, &rs);
                let entry = match result {
                    Some((word, next)) => {
                        let id = self.intern(next)?;
                        Some((word, id))
                    }
                    None => None,
                };
                self.comm.insert(key, entry);
            }
            if let Some(Some((_, next))) = self.comm.get(&key) {
                out.push(*next);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// All successor states of the left component of a window starting with
    /// (w, x): comm successors when (w, x) is a comm pair, interior
    /// successors for every known extension, and quiescent padding.
    fn left_nexts(&mut self, w: u32, x: u32) -> Result<Vec<u32>, SynthError> {
        let mut out = Vec::new();
        if self.pairs.contains_key(&(w, x)) {
            out.extend(self.comm_successors(w, x)?);
        }
        for v in self.by_suffix.get(&(w, x)).cloned().unwrap_or_default() {
            out.push(self.next_interior((v, w, x))?);
        }
        if w == self.q0 && x == self.q0 {
            out.push(self.q0);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn process_triple(&mut self, (w, x, y): (u32, u32, u32)) -> Result<(), SynthError> {
        // Role 1: this triple as the center of a five-cell window.
        {
            let x_next = self.next_interior((w, x, y))?;
            let w_nexts = self.left_nexts(w, x)?;
            let mut y_nexts = Vec::new();
            for z in self.by_prefix.get(&(x, y)).cloned().unwrap_or_default() {
                y_nexts.push(self.next_interior((x, y, z))?);
            }
            y_nexts.sort_unstable();
            y_nexts.dedup();
            for &wn in &w_nexts {
                for &yn in &y_nexts {
                    self.add_triple((wn, x_next, yn))?;
                }
            }
        }
        // Role 2: as a new right extension z = y of centers (v, w, x).
        {
            let y_next = self.next_interior((w, x, y))?;
            for v in self.by_suffix.get(&(w, x)).cloned().unwrap_or_default() {
                let x_next = self.next_interior((v, w, x))?;
                let w_nexts = self.left_nexts(v, w)?;
                for &wn in &w_nexts {
                    self.add_triple((wn, x_next, y_next))?;
                }
            }
            if self.pairs.contains_key(&(w, x)) {
                // (w, x) is the comm window: this triple supplies cell 2's
                // right context.
                let r2n = self.next_interior((w, x, y))?;
                let _ = r2n;
                for cn in self.comm_successors(w, x)? {
                    let r2n = self.next_interior((w, x, y))?;
                    self.add_pair((cn, r2n))?;
                }
            }
        }
        // Role 3: as a new left extension v-side of centers (x, y, _).
        {
            let w_next = self.next_interior((w, x, y))?;
            for y2 in self.by_prefix.get(&(x, y)).cloned().unwrap_or_default() {
                let x_next = self.next_interior((x, y, y2))?;
                let mut y_nexts = Vec::new();
                for z in self.by_prefix.get(&(y, y2)).cloned().unwrap_or_default() {
                    y_nexts.push(self.next_interior((y, y2, z))?);
                }
                y_nexts.sort_unstable();
                y_nexts.dedup();
                for &yn in &y_nexts {
                    self.add_triple((w_next, x_next, yn))?;
                }
            }
        }
        Ok(())
    }

    fn process_pair(&mut self, (c, r2): (u32, u32)) -> Result<(), SynthError> {
        let comm_nexts = self.comm_successors(c, r2)?;
        for y in self.by_prefix.get(&(c, r2)).cloned().unwrap_or_default() {
            let r2n = self.next_interior((c, r2, y))?;
            for &cn in &comm_nexts {
                self.add_pair((cn, r2n))?;
            }
        }
        Ok(())
    }
}

/// Materializes an IAT rule table by window-triple closure over the interior
/// plus a communication-cell closure over (comm, right-neighbor) pairs. The
/// array is semi-infinite: quiescent padding plays the role the boundary
/// plays for CAT closures.
pub fn materialize_iat_closure<A: IatSynthAutomaton>(
    a: &A,
    limits: &SynthLimits,
) -> Result<crate::machine::IatSpec, SynthError> {
    use crate::machine::{IatCommRule, IatInteriorRule, IatSpec};

    let mut b = IatBuilder {
        a,
        limits,
        interner: Interner::new(),
        inputs: a.input_symbols(),
        q0: 0,
        interior: FxMap::default(),
        by_prefix: FxMap::default(),
        by_suffix: FxMap::default(),
        comm: FxMap::default(),
        pairs: FxMap::default(),
        tqueue: VecDeque::new(),
        pqueue: VecDeque::new(),
    };
    b.q0 = b.intern(a.quiescent())?;
    b.add_pair((b.q0, b.q0))?;
    while !(b.tqueue.is_empty() && b.pqueue.is_empty()) {
        while let Some(p) = b.pqueue.pop_front() {
            b.process_pair(p)?;
        }
        if let Some(t) = b.tqueue.pop_front() {
            b.process_triple(t)?;
        }
    }

    let names = b.interner.names.clone();
    let accepting = b
        .interner
        .states
        .iter()
        .zip(&names)
        .filter(|(s, _)| a.accepting(s))
        .map(|(_, n)| n.clone())
        .collect();
    let q0_name = names[b.q0 as usize].clone();
    let mut delta_interior: Vec<IatInteriorRule> = b
        .interior
        .iter()
        // "Stay" entries are the default rule.
        .filter(|(&(_, c, _), &n)| n != c)
        .map(|(&(l, c, r), &n)| IatInteriorRule {
            left: names[l as usize].clone(),
            center: names[c as usize].clone(),
            right: names[r as usize].clone(),
            next: names[n as usize].clone(),
        })
        .collect();
    delta_interior.sort_by(|a, b| {
        (&a.center, &a.left, &a.right).cmp(&(&b.center, &b.left, &b.right))
    });
    let mut delta_comm: Vec<IatCommRule> = b
        .comm
        .iter()
        .filter_map(|(&(inp, c, r), entry)| {
            entry.as_ref().map(|(out, next)| IatCommRule {
                input: match inp {
                    Some(i) => b.inputs[i as usize].clone(),
                    None => crate::machine::END_MARKER.to_string(),
                },
                comm: names[c as usize].clone(),
                right: names[r as usize].clone(),
                out: out.clone(),
                next: names[*next as usize].clone(),
            })
        })
        .collect();
    delta_comm.sort_by(|a, b| {
        (&a.comm, &a.input, &a.right).cmp(&(&b.comm, &b.input, &b.right))
    });
    Ok(IatSpec {
        states: names,
        accepting,
        input_alphabet: a.input_symbols(),
        output_alphabet: a.output_symbols(),
        quiescent: q0_name,
        end_marker: crate::machine::END_MARKER.to_string(),
        delta_interior,
        default_interior: true,
        delta_comm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{cat_run, word_of, RunnableCat};

    /// One-bit shift register: every cell takes its right neighbor's bit and
    /// emits its own bit when the left neighbor is the boundary.
    struct Shifter;

    impl SynthAutomaton for Shifter {
        type State = char;

        fn init(&self, symbol: &str) -> Option<char> {
            let c = symbol.chars().next()?;
            ('0' == c || '1' == c).then_some(c)
        }

        fn step(&self, _left: Option<&char>, center: &char, right: Option<&char>) -> (char, Option<String>) {
            let next = right.copied().unwrap_or('0');
            (next, Some(center.to_string()))
        }

        fn accepting(&self, _: &char) -> bool {
            true
        }

        fn name(&self, state: &char) -> String {
            state.to_string()
        }

        fn input_symbols(&self) -> Vec<String> {
            vec!["0".into(), "1".into()]
        }

        fn output_symbols(&self) -> Vec<String> {
            vec!["0".into(), "1".into()]
        }
    }

    #[test]
    fn closure_table_runs_like_the_structured_rule() {
        let spec = materialize_closure(&Shifter, &SynthLimits::default()).unwrap();
        assert!(crate::machine::validate_cat(&spec).is_empty());
        let cat = RunnableCat::new(&spec).unwrap();
        let trace = cat_run(&cat, &word_of("101"), 16).unwrap();
        // Cell 1 emits at step 1 and the others only when the boundary is left.
        assert_eq!(trace.fill_time(0), Some(1));
        assert_eq!(trace.accept_time, Some(0));
    }

    #[test]
    fn runs_table_covers_the_simulated_words() {
        let spec = materialize_runs(
            &Shifter,
            (1..=6).map(|n| vec!["1".to_string(); n]),
            |n| 2 * n + 2,
            &SynthLimits::default(),
        )
        .unwrap();
        let cat = RunnableCat::new(&spec).unwrap();
        let trace = cat_run(&cat, &word_of("1111"), 16).unwrap();
        assert!(trace.complete);
    }
}
