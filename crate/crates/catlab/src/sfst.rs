//! Compiles single-valued finite-state transducers to real-time CATs:
//! NFA extraction, powerset determinization, the right-linear grammar, the
//! backward V-set wave, unique-path extraction, and timed output
//! distribution, synchronized so that every register fills at exactly step n.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fssp::{sync_label, twogen_cap, twogen_step, TwoGen};
use crate::harness::check_single_valued;
use crate::machine::{CatSpec, SeqTransducerSpec, TransducerKind};
use crate::synth::{materialize_closure, SynthAutomaton, SynthLimits};

#[derive(Debug, Error)]
pub enum SfstError {
    #[error("not an FST")]
    NotAnFst,
    #[error("rule #{0} ({1}) moves on empty input; λ-free input is a precondition")]
    LambdaRule(usize, String),
    #[error("source is not single-valued: word `{0}` has two outputs")]
    Ambiguous(String),
    #[error("word is not accepted")]
    NotAccepted,
    #[error("ambiguous source: two candidate productions at position {0}")]
    AmbiguousPath(usize),
    #[error("the compiler supports at most 63 grammar nonterminals, got {0}")]
    TooManyNonterminals(usize),
    #[error("table materialization failed: {0}")]
    Synth(#[from] crate::synth::SynthError),
    #[error("harness failure during the single-valuedness check: {0}")]
    Harness(#[from] crate::harness::HarnessError),
}

/// The input projection of an FST; transitions keep their rule's output word
/// so the grammar can carry it downstream.
#[derive(Debug, Clone)]
pub struct Nfa {
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<NfaTransition>,
}

#[derive(Debug, Clone)]
pub struct NfaTransition {
    pub from: usize,
    pub sym: usize,
    pub to: usize,
    pub out: String,
}

impl Nfa {
    pub fn accepts(&self, word: &[String]) -> bool {
        let mut live: BTreeSet<usize> = BTreeSet::from([self.initial]);
        for sym in word {
            let Some(s) = self.alphabet.iter().position(|a| a == sym) else {
                return false;
            };
            live = self
                .transitions
                .iter()
                .filter(|t| t.sym == s && live.contains(&t.from))
                .map(|t| t.to)
                .collect();
        }
        live.iter().any(|q| self.accepting.contains(q))
    }
}

/// Extracts the NFA accepting `L(M)` from a λ-free FST.
pub fn extract_nfa(spec: &SeqTransducerSpec) -> Result<Nfa, SfstError> {
    if spec.kind != TransducerKind::Fst {
        return Err(SfstError::NotAnFst);
    }
    let state_idx: BTreeMap<&str, usize> =
        spec.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut transitions = Vec::new();
    for (idx, rule) in spec.rules.iter().enumerate() {
        let Some(sym) = &rule.input else {
            return Err(SfstError::LambdaRule(idx, format!("{} -> {}", rule.from, rule.to)));
        };
        transitions.push(NfaTransition {
            from: state_idx[rule.from.as_str()],
            sym: spec.input_alphabet.iter().position(|a| a == sym).expect("validated rule"),
            to: state_idx[rule.to.as_str()],
            out: rule.out.clone(),
        });
    }
    Ok(Nfa {
        states: spec.states.clone(),
        initial: state_idx[spec.initial.as_str()],
        accepting: spec.accepting.iter().map(|s| state_idx[s.as_str()]).collect(),
        alphabet: spec.input_alphabet.clone(),
        transitions,
    })
}

/// A deterministic automaton from the powerset construction, with reachable
/// subsets only. State 0 is the initial subset.
#[derive(Debug, Clone)]
pub struct Dfa {
    pub subsets: Vec<BTreeSet<usize>>,
    pub accepting: Vec<bool>,
    pub alphabet: Vec<String>,
    /// `table[state * |alphabet| + sym]`
    pub table: Vec<usize>,
}

impl Dfa {
    pub fn step(&self, state: usize, sym: usize) -> usize {
        self.table[state * self.alphabet.len() + sym]
    }

    pub fn accepts(&self, word: &[String]) -> bool {
        let mut state = 0usize;
        for sym in word {
            let Some(s) = self.alphabet.iter().position(|a| a == sym) else {
                return false;
            };
            state = self.step(state, s);
        }
        self.accepting[state]
    }
}

pub fn powerset_dfa(nfa: &Nfa) -> Dfa {
    let mut subsets: Vec<BTreeSet<usize>> = vec![BTreeSet::from([nfa.initial])];
    let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    index.insert(subsets[0].clone(), 0);
    let k = nfa.alphabet.len();
    let mut table: Vec<usize> = Vec::new();
    let mut next = 0usize;
    while next < subsets.len() {
        let current = subsets[next].clone();
        for sym in 0..k {
            let image: BTreeSet<usize> = nfa
                .transitions
                .iter()
                .filter(|t| t.sym == sym && current.contains(&t.from))
                .map(|t| t.to)
                .collect();
            let id = *index.entry(image.clone()).or_insert_with(|| {
                subsets.push(image);
                subsets.len() - 1
            });
            table.push(id);
        }
        next += 1;
    }
    let accepting = subsets
        .iter()
        .map(|set| set.iter().any(|q| nfa.accepting.contains(q)))
        .collect();
    Dfa { subsets, accepting, alphabet: nfa.alphabet.clone(), table }
}

/// Nonterminal id: 0 is the axiom X, `1 + q` is `[q]` for NFA state `q`.
pub type NonTerminal = usize;
pub const AXIOM: NonTerminal = 0;

/// One production of the right-linear grammar: `X -> a [q']`,
/// `[q] -> a [q']`, or a terminal production (`rhs` = None). Each carries
/// the originating transducer rule's output word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub lhs: NonTerminal,
    pub sym: usize,
    pub rhs: Option<NonTerminal>,
    pub out: String,
}

#[derive(Debug, Clone)]
pub struct RightLinearGrammar {
    pub nonterminal_names: Vec<String>,
    pub alphabet: Vec<String>,
    pub productions: Vec<Production>,
}

/// Set of nonterminals as a bitmask.
pub type VSet = u64;

/// Converts the NFA into the equivalent right-linear grammar with axiom X.
/// Terminal productions exist for every transition into an accepting state;
/// the axiom also receives them, so single-letter words derive directly.
pub fn to_grammar(nfa: &Nfa) -> Result<RightLinearGrammar, SfstError> {
    if nfa.states.len() + 1 > 63 {
        return Err(SfstError::TooManyNonterminals(nfa.states.len() + 1));
    }
    let mut productions = Vec::new();
    for t in &nfa.transitions {
        if t.from == nfa.initial {
            productions.push(Production {
                lhs: AXIOM,
                sym: t.sym,
                rhs: Some(1 + t.to),
                out: t.out.clone(),
            });
            if nfa.accepting.contains(&t.to) {
                productions.push(Production { lhs: AXIOM, sym: t.sym, rhs: None, out: t.out.clone() });
            }
        }
        productions.push(Production {
            lhs: 1 + t.from,
            sym: t.sym,
            rhs: Some(1 + t.to),
            out: t.out.clone(),
        });
        if nfa.accepting.contains(&t.to) {
            productions.push(Production { lhs: 1 + t.from, sym: t.sym, rhs: None, out: t.out.clone() });
        }
    }
    let mut names = vec!["X".to_string()];
    names.extend(nfa.states.iter().map(|s| format!("[{s}]")));
    Ok(RightLinearGrammar {
        nonterminal_names: names,
        alphabet: nfa.alphabet.clone(),
        productions,
    })
}

impl RightLinearGrammar {
    pub fn contains(vset: VSet, nt: NonTerminal) -> bool {
        vset & (1u64 << nt) != 0
    }

    /// Nonterminals with a terminal production on `sym` (V_n).
    pub fn v_last(&self, sym: usize) -> VSet {
        let mut v = 0u64;
        for p in &self.productions {
            if p.sym == sym && p.rhs.is_none() {
                v |= 1 << p.lhs;
            }
        }
        v
    }

    /// `{Y : Y -> sym Z, Z in next}`: one step of the V recurrence.
    pub fn v_step(&self, sym: usize, next: VSet) -> VSet {
        let mut v = 0u64;
        for p in &self.productions {
            if p.sym == sym {
                if let Some(z) = p.rhs {
                    if Self::contains(next, z) {
                        v |= 1 << p.lhs;
                    }
                }
            }
        }
        v
    }

    /// Candidate productions `lhs -> sym Z` with `Z` in `val`, or terminal
    /// productions `lhs -> sym` when `val` is None.
    pub fn candidates(&self, lhs: NonTerminal, sym: usize, val: Option<VSet>) -> Vec<usize> {
        self.productions
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                p.lhs == lhs
                    && p.sym == sym
                    && match (val, p.rhs) {
                        (Some(vs), Some(z)) => Self::contains(vs, z),
                        (None, None) => true,
                        _ => false,
                    }
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// All words of the grammar's language up to `max_len`, by brute-force
    /// derivation enumeration (a language oracle for tests).
    pub fn language_upto(&self, max_len: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        let mut frontier: Vec<(NonTerminal, Vec<usize>)> = vec![(AXIOM, vec![])];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (nt, word) in frontier {
                for p in &self.productions {
                    if p.lhs == nt {
                        let mut w = word.clone();
                        w.push(p.sym);
                        match p.rhs {
                            Some(z) => next.push((z, w)),
                            None => {
                                out.insert(w);
                            }
                        }
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

/// Computes `V_1 .. V_n` right to left.
pub fn vsets(grammar: &RightLinearGrammar, word: &[usize]) -> Vec<VSet> {
    assert!(!word.is_empty());
    let n = word.len();
    let mut v = vec![0u64; n];
    v[n - 1] = grammar.v_last(word[n - 1]);
    for i in (0..n - 1).rev() {
        v[i] = grammar.v_step(word[i], v[i + 1]);
    }
    v
}

/// Extracts the unique accepting derivation's productions.
pub fn extract_unique_path(
    grammar: &RightLinearGrammar,
    word: &[usize],
    vsets: &[VSet],
) -> Result<Vec<usize>, SfstError> {
    let n = word.len();
    if !RightLinearGrammar::contains(vsets[0], AXIOM) {
        return Err(SfstError::NotAccepted);
    }
    let mut path = Vec::with_capacity(n);
    let mut lhs = AXIOM;
    for i in 0..n {
        let val = (i + 1 < n).then(|| vsets[i + 1]);
        let cands = grammar.candidates(lhs, word[i], val);
        match cands.as_slice() {
            [] => return Err(SfstError::NotAccepted),
            [p] => {
                path.push(*p);
                lhs = grammar.productions[*p].rhs.unwrap_or(AXIOM);
            }
            _ => return Err(SfstError::AmbiguousPath(i + 1)),
        }
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// The compiled CAT.
// ---------------------------------------------------------------------------

/// Sync counter bound of compiled machines: covers the exhaustive harness
/// checks (length 10) with headroom. Compiled tables are exact for inputs up
/// to this length.
pub const SFST_SYNC_CELLS: usize = 16;

type Slot = (u8, VSet);

/// The V-record a cell computes when the backward wave passes: two
/// consecutive (symbol, V-set) slots plus a copy of the right neighbor's
/// low slot, which sits one position above this record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct VRecord {
    lo: Slot,
    hi: Slot,
    above: Option<Slot>,
    /// Set on the odd-length center record (lo computed, hi/above copied).
    odd_center: bool,
    fresh: bool,
}

impl VRecord {
    /// A record holding V_1 in its low slot (where extraction starts).
    fn is_single_letter(&self) -> bool {
        self.odd_center && self.above.is_none() && self.lo == self.hi
    }
}

/// A determined or traveling production. `Dead` marks a non-derivable or
/// ambiguous position: the run is rejected and the register fills with ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PSlot {
    None,
    Dead,
    Prod(u16),
}

/// Pending output duties of an extraction cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ShipPlan {
    None,
    /// Ship this cell's own production next step, then the chained one.
    Own { odd: bool },
    /// Ship the next production of the chain.
    Next { odd: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SfstCell {
    /// Stream shifting left every step, feeding the DFA in cell 1.
    ls: Option<u8>,
    /// Stream shifting right every step, feeding the V wave.
    rs: Option<u8>,
    /// Cell 1 only: DFA subset-state, and the latch raised at exactly time n.
    dfa: Option<u16>,
    accepted: bool,
    rec: Option<VRecord>,
    /// Production this cell determined (anchor for the rightward chain).
    pmem: PSlot,
    /// Production chunk traveling left, one cell per step.
    ptrack: PSlot,
    /// Extraction signal moving right; carries the center parity (true = odd).
    rsig: Option<bool>,
    /// Pending ships after this cell's determination step; the parity
    /// selects which neighbor slots feed the chained production.
    plan: ShipPlan,
    sync: TwoGen,
}

struct SfstAutomaton {
    grammar: RightLinearGrammar,
    dfa: Dfa,
    alphabet: Vec<String>,
    outputs: Vec<String>,
}

impl SfstAutomaton {
    fn unique(&self, lhs: NonTerminal, sym: u8, val: Option<VSet>) -> PSlot {
        match self.grammar.candidates(lhs, sym as usize, val).as_slice() {
            [p] => PSlot::Prod(*p as u16),
            _ => PSlot::Dead,
        }
    }

    fn chain(&self, from: PSlot, sym: u8, val: Option<VSet>) -> PSlot {
        match from {
            PSlot::Prod(i) => {
                let lhs = self.grammar.productions[i as usize].rhs.unwrap_or(AXIOM);
                self.unique(lhs, sym, val)
            }
            _ => PSlot::Dead,
        }
    }

    /// p_1 from a center-shaped record: `X -> a_1 Z` with `Z` in V_2,
    /// provided the word is derivable at all (X in V_1).
    fn p1_from_center(&self, rec: &VRecord) -> PSlot {
        if !RightLinearGrammar::contains(rec.lo.1, AXIOM) {
            return PSlot::Dead;
        }
        if rec.is_single_letter() {
            return self.unique(AXIOM, rec.lo.0, None);
        }
        self.unique(AXIOM, rec.lo.0, Some(rec.hi.1))
    }

    /// p_2 from the center record: chain through V_3 (the `above` slot), or
    /// a terminal production on a two-letter line.
    fn p2_from_center(&self, rec: &VRecord) -> PSlot {
        let p1 = self.p1_from_center(rec);
        self.chain(p1, rec.hi.0, rec.above.map(|a| a.1))
    }
}

impl SynthAutomaton for SfstAutomaton {
    type State = SfstCell;

    fn init(&self, symbol: &str) -> Option<SfstCell> {
        let idx = self.alphabet.iter().position(|a| a == symbol)? as u8;
        Some(SfstCell {
            ls: Some(idx),
            rs: Some(idx),
            dfa: None,
            accepted: false,
            rec: None,
            pmem: PSlot::None,
            ptrack: PSlot::None,
            rsig: None,
            plan: ShipPlan::None,
            sync: TwoGen::Sym,
        })
    }

    fn step(
        &self,
        left: Option<&SfstCell>,
        c: &SfstCell,
        right: Option<&SfstCell>,
    ) -> (SfstCell, Option<String>) {
        let cap = twogen_cap(SFST_SYNC_CELLS);
        let sync = twogen_step(left.map(|s| &s.sync), &c.sync, right.map(|s| &s.sync), cap);
        let fires_now = sync == TwoGen::Fire && c.sync != TwoGen::Fire;

        let ls = right.and_then(|s| s.ls);
        let rs = left.and_then(|s| s.rs);

        // DFA at the leftmost cell; acceptance latched exactly when the
        // final input symbol is consumed.
        let (dfa, accepted) = if left.is_none() {
            match c.ls {
                Some(sym) => {
                    let state = c.dfa.map_or(0, |q| q as usize);
                    let next = self.dfa.step(state, sym as usize) as u16;
                    let last = right.is_none_or(|r| r.ls.is_none());
                    (Some(next), c.accepted || (last && self.dfa.accepting[next as usize]))
                }
                None => (c.dfa, c.accepted),
            }
        } else {
            (None, false)
        };

        // Backward V wave.
        let mut rec = c.rec.map(|mut r| {
            r.fresh = false;
            r
        });
        let mut fused_center: Option<VRecord> = None;
        if c.rec.is_none() {
            if let Some(own_sym) = c.rs {
                let right_rec = right.and_then(|r| r.rec);
                let wave_here = match right {
                    None => true,
                    Some(_) => right_rec.is_some_and(|rr| rr.fresh),
                };
                if wave_here {
                    let above = right_rec.map(|rr| rr.lo);
                    let hi_v = match above {
                        Some((_, v_next)) => self.grammar.v_step(own_sym as usize, v_next),
                        None => self.grammar.v_last(own_sym as usize),
                    };
                    let hi = (own_sym, hi_v);
                    let new_rec = match left.and_then(|l| l.rs) {
                        Some(left_sym) => {
                            let lo_v = self.grammar.v_step(left_sym as usize, hi_v);
                            VRecord {
                                lo: (left_sym, lo_v),
                                hi,
                                above,
                                odd_center: false,
                                fresh: true,
                            }
                        }
                        None => {
                            // Odd center (or single-letter line): the low slot
                            // is this cell's own V_1; hi and above are copies.
                            let r = VRecord {
                                lo: hi,
                                hi: above.unwrap_or(hi),
                                above: right_rec.map(|rr| rr.hi),
                                odd_center: true,
                                fresh: true,
                            };
                            fused_center = Some(r);
                            r
                        }
                    };
                    rec = Some(new_rec);
                }
            }
        }

        // Extraction events.
        let right_rec = right.and_then(|r| r.rec);
        let mut pmem = c.pmem;
        let mut ptrack = PSlot::None;
        let mut rsig = None;
        let mut plan = ShipPlan::None;

        // Chunks travel left one cell per step.
        if let Some(r) = right {
            if r.ptrack != PSlot::None {
                ptrack = r.ptrack;
            }
        }

        if let Some(center) = fused_center {
            // Odd center: determine p_2 now, ship over the next two steps.
            if !center.is_single_letter() {
                pmem = self.p2_from_center(&center);
                rsig = Some(true);
                plan = ShipPlan::Own { odd: true };
            }
        } else if pmem == PSlot::None
            && c.rec.is_some_and(|r| r.fresh && !r.odd_center)
            && left.is_none_or(|l| l.rs.is_none())
        {
            // Even center: determine and ship p_2, start the signal.
            let r = c.rec.expect("fresh record");
            pmem = self.p2_from_center(&r);
            ptrack = pmem;
            rsig = Some(false);
            plan = ShipPlan::Next { odd: false };
        } else if pmem == PSlot::None
            && c.rs.is_none()
            && c.rec.is_none()
            && rec.is_none()
            && right_rec.is_some_and(|r| r.fresh)
        {
            // The cell left of the center ships p_1.
            let r = right_rec.expect("checked fresh");
            pmem = self.p1_from_center(&r);
            ptrack = pmem;
        } else if pmem == PSlot::None
            && c.rec.is_some()
            && left.is_some_and(|l| l.rsig.is_some())
        {
            // Signal arrival: determine this cell's chain productions.
            let parity = left.and_then(|l| l.rsig).expect("checked");
            let l = left.expect("checked");
            let r = c.rec.expect("checked");
            rsig = Some(parity);
            if parity {
                // Odd phase: records hold (V_even, V_odd).
                let mid = self.chain(l.pmem, r.hi.0, r.above.map(|a| a.1));
                pmem = match r.above {
                    Some(a) => {
                        let val = right_rec.map(|rr| rr.hi.1);
                        self.chain(mid, a.0, val)
                    }
                    None => mid,
                };
                plan = ShipPlan::Own { odd: true };
            } else {
                // Even phase: records hold (V_odd, V_even).
                let mid = self.chain(l.pmem, r.lo.0, Some(r.hi.1));
                pmem = self.chain(mid, r.hi.0, r.above.map(|a| a.1));
                ptrack = pmem;
                plan = ShipPlan::Next { odd: false };
            }
        } else if let ShipPlan::Own { odd } = c.plan {
            // Ship this cell's own production now, the chained one next.
            ptrack = pmem;
            plan = ShipPlan::Next { odd };
        } else if let ShipPlan::Next { odd } = c.plan {
            // Ship the next production of the chain leftward.
            let ship = if odd {
                match right_rec {
                    Some(rr) => self.chain(pmem, rr.hi.0, rr.above.map(|a| a.1)),
                    None => PSlot::None,
                }
            } else {
                match c.rec.and_then(|r| r.above) {
                    Some(a) => {
                        let val = right_rec.map(|rr| rr.hi.1);
                        self.chain(pmem, a.0, val)
                    }
                    None => PSlot::None,
                }
            };
            if ship != PSlot::None {
                ptrack = ship;
            }
        }

        // Keep the signal marker only for one step per cell.
        let next = SfstCell { ls, rs, dfa, accepted, rec, pmem, ptrack, rsig, plan, sync };

        let out = fires_now.then(|| {
            let slot = if right.is_some_and(|r| r.ptrack != PSlot::None) {
                right.map(|r| r.ptrack).expect("checked")
            } else if next.ptrack != PSlot::None {
                next.ptrack
            } else if c.pmem == PSlot::None && next.pmem != PSlot::None {
                next.pmem
            } else if left.is_none() && right.is_none() {
                // Single-letter line: derive the terminal axiom production.
                match c.rs {
                    Some(sym) => self.unique(AXIOM, sym, None),
                    None => PSlot::Dead,
                }
            } else {
                PSlot::Dead
            };
            match slot {
                PSlot::Prod(p) => self.grammar.productions[p as usize].out.clone(),
                _ => String::new(),
            }
        });
        (next, out)
    }

    fn accepting(&self, s: &SfstCell) -> bool {
        s.accepted
    }

    fn name(&self, s: &SfstCell) -> String {
        let sym = |o: Option<u8>| match o {
            Some(i) => self.alphabet[i as usize].clone(),
            None => "_".to_string(),
        };
        if s.dfa.is_none()
            && !s.accepted
            && s.rec.is_none()
            && s.pmem == PSlot::None
            && s.ptrack == PSlot::None
            && s.rsig.is_none()
            && s.plan == ShipPlan::None
            && s.sync == TwoGen::Sym
            && s.ls == s.rs
        {
            if let Some(i) = s.ls {
                return self.alphabet[i as usize].clone();
            }
        }
        let slot = |p: &PSlot| match p {
            PSlot::None => "-".to_string(),
            PSlot::Dead => "!".to_string(),
            PSlot::Prod(i) => format!("p{i}"),
        };
        let rec = match &s.rec {
            None => "-".to_string(),
            Some(r) => format!(
                "V({}:{:x},{}:{:x}{}){}{}",
                sym(Some(r.lo.0)),
                r.lo.1,
                sym(Some(r.hi.0)),
                r.hi.1,
                r.above.map_or(String::new(), |a| format!(",{}:{:x}", sym(Some(a.0)), a.1)),
                if r.odd_center { "c" } else { "" },
                if r.fresh { "*" } else { "" },
            ),
        };
        format!(
            "{}/{}{}{}{}{}{}{}@{}|{}",
            sym(s.ls),
            sym(s.rs),
            s.dfa.map_or(String::new(), |d| format!(":D{d}")),
            if s.accepted { "+" } else { "" },
            s.rsig.map_or(String::new(), |p| if p { ":Ro".into() } else { ":Re".to_string() }),
            match s.plan {
                ShipPlan::None => String::new(),
                ShipPlan::Own { odd } => format!(":s1{}", if odd { "o" } else { "e" }),
                ShipPlan::Next { odd } => format!(":s2{}", if odd { "o" } else { "e" }),
            },
            format!(":{}", slot(&s.pmem)),
            format!(":{}", slot(&s.ptrack)),
            rec,
            sync_label(&s.sync),
        )
    }

    fn input_symbols(&self) -> Vec<String> {
        self.alphabet.clone()
    }

    fn output_symbols(&self) -> Vec<String> {
        self.outputs.clone()
    }
}

/// Options for the compilation pipeline.
#[derive(Debug, Clone, Copy)]
pub struct SfstOptions {
    /// Bound for the brute-force single-valuedness precondition check.
    pub sv_check_len: usize,
}

impl Default for SfstOptions {
    fn default() -> Self {
        SfstOptions { sv_check_len: 10 }
    }
}

/// Compiles a λ-free single-valued FST into a CAT computing the same
/// transduction with acceptance and output completion in real time.
pub fn compile_sfst_to_cat(
    spec: &SeqTransducerSpec,
    options: SfstOptions,
) -> Result<CatSpec, SfstError> {
    let nfa = extract_nfa(spec)?;
    if let Some(witness) = check_single_valued(spec, options.sv_check_len)? {
        return Err(SfstError::Ambiguous(witness));
    }
    let grammar = to_grammar(&nfa)?;
    let dfa = powerset_dfa(&nfa);
    let outputs: BTreeSet<String> = spec.output_alphabet.iter().cloned().collect();
    let automaton = SfstAutomaton {
        grammar,
        dfa,
        alphabet: spec.input_alphabet.clone(),
        outputs: outputs.into_iter().collect(),
    };
    Ok(materialize_closure(&automaton, &SynthLimits::default())?)
}

pub fn word_indices(alphabet: &[String], word: &[String]) -> Option<Vec<usize>> {
    word.iter().map(|w| alphabet.iter().position(|a| a == w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{cat_run, default_step_cap, RunnableCat};
    use crate::harness::{join_word, oracle_fst_all_paths, ShortlexWords};
    use crate::samples;

    #[test]
    fn nfa_and_dfa_agree_on_ab_plus() {
        let nfa = extract_nfa(&samples::fst_ab_plus()).unwrap();
        let dfa = powerset_dfa(&nfa);
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 10) {
            let expect = {
                // Brute-force: w in (ab)+ iff it alternates starting with a,
                // ends with b.
                let t = join_word(&word);
                t.len() % 2 == 0
                    && t.chars().enumerate().all(|(i, c)| c == if i % 2 == 0 { 'a' } else { 'b' })
            };
            assert_eq!(nfa.accepts(&word), expect, "nfa on {word:?}");
            assert_eq!(dfa.accepts(&word), expect, "dfa on {word:?}");
        }
    }

    #[test]
    fn dfa_state_count_is_bounded() {
        let nfa = extract_nfa(&samples::sfst_ends_in_b()).unwrap();
        let dfa = powerset_dfa(&nfa);
        assert!(dfa.subsets.len() <= 1 << nfa.states.len());
    }

    #[test]
    fn lambda_rule_is_named() {
        let mut spec = samples::fst_ab_plus();
        spec.rules[1].input = None;
        match extract_nfa(&spec) {
            Err(SfstError::LambdaRule(1, _)) => {}
            other => panic!("expected a named λ-rule error, got {other:?}"),
        }
    }

    #[test]
    fn grammar_language_matches_nfa() {
        let nfa = extract_nfa(&samples::fst_ab_plus()).unwrap();
        let grammar = to_grammar(&nfa).unwrap();
        let lang = grammar.language_upto(10);
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 10) {
            let idx = word_indices(&ab, &word).unwrap();
            assert_eq!(lang.contains(&idx), nfa.accepts(&word), "{word:?}");
        }
    }

    #[test]
    fn single_transition_grammar() {
        // q0 -a-> qf with qf accepting: the grammar's axiom productions are
        // X -> a [qf] and the terminal X -> a.
        let mut spec = samples::fst_ab_plus();
        spec.rules.truncate(1);
        spec.accepting = std::collections::BTreeSet::from(["q1".to_string()]);
        let nfa = extract_nfa(&spec).unwrap();
        let grammar = to_grammar(&nfa).unwrap();
        assert!(grammar
            .productions
            .iter()
            .any(|p| p.lhs == AXIOM && p.rhs.is_none() && p.sym == 0));
    }

    #[test]
    fn production_count_accounting() {
        let nfa = extract_nfa(&samples::fst_ab_plus()).unwrap();
        let grammar = to_grammar(&nfa).unwrap();
        let transitions = nfa.transitions.len();
        let initial_sourced =
            nfa.transitions.iter().filter(|t| t.from == nfa.initial).count();
        let accepting_targets =
            nfa.transitions.iter().filter(|t| nfa.accepting.contains(&t.to)).count();
        let accepting_from_initial = nfa
            .transitions
            .iter()
            .filter(|t| t.from == nfa.initial && nfa.accepting.contains(&t.to))
            .count();
        assert_eq!(
            grammar.productions.len(),
            transitions + initial_sourced + accepting_targets + accepting_from_initial
        );
    }

    #[test]
    fn unreachable_state_does_not_change_the_language() {
        let mut spec = samples::fst_ab_plus();
        spec.states.push("orphan".into());
        spec.rules.push(crate::machine::SeqRule {
            from: "orphan".into(),
            input: Some("a".into()),
            pop: None,
            to: "orphan".into(),
            out: String::new(),
            push: None,
        });
        let pruned = extract_nfa(&samples::fst_ab_plus()).unwrap();
        let padded = extract_nfa(&spec).unwrap();
        let dfa_pruned = powerset_dfa(&pruned);
        let dfa_padded = powerset_dfa(&padded);
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 8) {
            assert_eq!(dfa_pruned.accepts(&word), dfa_padded.accepts(&word));
        }
    }

    #[test]
    fn vsets_membership_criterion() {
        let nfa = extract_nfa(&samples::fst_ab_plus()).unwrap();
        let grammar = to_grammar(&nfa).unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 8) {
            let idx = word_indices(&ab, &word).unwrap();
            let v = vsets(&grammar, &idx);
            assert_eq!(
                RightLinearGrammar::contains(v[0], AXIOM),
                nfa.accepts(&word),
                "{word:?}"
            );
        }
    }

    #[test]
    fn unique_path_outputs_match_all_paths_oracle() {
        let spec = samples::sfst_ends_in_b();
        let nfa = extract_nfa(&spec).unwrap();
        let grammar = to_grammar(&nfa).unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 8) {
            let idx = word_indices(&ab, &word).unwrap();
            let v = vsets(&grammar, &idx);
            let oracle = oracle_fst_all_paths(&spec, &word).unwrap();
            match extract_unique_path(&grammar, &idx, &v) {
                Ok(path) => {
                    let out: String =
                        path.iter().map(|&p| grammar.productions[p].out.as_str()).collect();
                    assert_eq!(oracle.len(), 1, "{word:?}");
                    assert_eq!(out, *oracle.iter().next().unwrap(), "{word:?}");
                }
                Err(SfstError::NotAccepted) => assert!(oracle.is_empty(), "{word:?}"),
                Err(e) => panic!("unexpected {e} on {word:?}"),
            }
        }
    }

    #[test]
    fn ambiguous_source_is_detected_in_path_extraction() {
        let spec = samples::fst_ambiguous();
        let nfa = extract_nfa(&spec).unwrap();
        let grammar = to_grammar(&nfa).unwrap();
        let v = vsets(&grammar, &[0]);
        assert!(matches!(
            extract_unique_path(&grammar, &[0], &v),
            Err(SfstError::AmbiguousPath(_))
        ));
    }

    #[test]
    fn compile_rejects_ambiguous_sources() {
        assert!(matches!(
            compile_sfst_to_cat(&samples::fst_ambiguous(), SfstOptions::default()),
            Err(SfstError::Ambiguous(_))
        ));
    }

    #[test]
    fn compiled_dfst_matches_homomorphism_to_len_6() {
        let spec = samples::dfst_homomorphism();
        let compiled = compile_sfst_to_cat(&spec, SfstOptions::default()).unwrap();
        let cat = RunnableCat::new(&compiled).unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 6) {
            let n = word.len();
            let trace = cat_run(&cat, &word, default_step_cap(n)).unwrap();
            let expected: String = word
                .iter()
                .map(|s| if s == "a" { "0" } else { "11" })
                .collect();
            assert_eq!(
                trace.final_output.as_deref(),
                Some(expected.as_str()),
                "{} ->\n{}",
                join_word(&word),
                trace.to_text()
            );
            assert_eq!(trace.accept_time, Some(n), "{}", join_word(&word));
            assert_eq!(trace.output_complete_time, Some(n), "{}", join_word(&word));
            for i in 0..n {
                assert_eq!(trace.fill_time(i), Some(n), "cell {i} of {}", join_word(&word));
            }
        }
    }

    #[test]
    fn compiled_sfst_rejects_words_ending_in_a() {
        let spec = samples::sfst_ends_in_b();
        let compiled = compile_sfst_to_cat(&spec, SfstOptions::default()).unwrap();
        let cat = RunnableCat::new(&compiled).unwrap();
        let ab = vec!["a".to_string(), "b".to_string()];
        for word in ShortlexWords::new(&ab, 7) {
            let trace = cat_run(&cat, &word, default_step_cap(word.len())).unwrap();
            let expect = word.last().map(|s| s.as_str()) == Some("b");
            if expect {
                assert_eq!(
                    trace.final_output.as_deref(),
                    Some(join_word(&word).as_str()),
                    "{}\n{}",
                    join_word(&word),
                    trace.to_text()
                );
            } else {
                assert_eq!(trace.accept_time, None, "{}", join_word(&word));
            }
        }
    }
}
