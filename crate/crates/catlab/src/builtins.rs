//! Hand-constructed CATs realizing the worked example transductions:
//! copy `(w, ww)`, sort `(w, a^|w|_a b^|w|_b)`, reverse `(w, w^R)`, and the
//! square marker `(ww, wc^|w|)`, each with its stated time complexity.

use crate::fssp::{sync_label, twogen_cap, twogen_step, Side, TwoGen};
use crate::machine::CatSpec;
use crate::synth::{materialize_closure, SynthAutomaton, SynthLimits};

/// Counter bound for the synchronization track embedded in the builtins.
/// Covers every harness run (exhaustive checks to length 10, timing to 40).
pub const BUILTIN_SYNC_CELLS: u16 = 48;

fn sym_char(symbol: &str) -> Option<char> {
    let mut chars = symbol.chars();
    match (chars.next(), chars.next()) {
        (Some(c @ ('a' | 'b')), None) => Some(c),
        _ => None,
    }
}

fn opt_char(c: Option<char>) -> char {
    c.unwrap_or('_')
}

fn ab() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

// ---------------------------------------------------------------------------
// Copy: cell i and cell n-i+1 emit two symbols each at time i; the middle
// cell of an odd line emits the wrap-around pair at time ⌈n/2⌉.
// ---------------------------------------------------------------------------

/// Copy-transducer cell: a left-shifting and a right-shifting register, plus
/// flags recording that the end waves have passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CopySt {
    l: Option<char>,
    r: Option<char>,
    lw: bool,
    rw: bool,
}

impl CopySt {
    fn is_initial(&self) -> bool {
        !self.lw && !self.rw && self.l.is_some() && self.l == self.r
    }
}

struct CopyAutomaton;

impl SynthAutomaton for CopyAutomaton {
    type State = CopySt;

    fn init(&self, symbol: &str) -> Option<CopySt> {
        let c = sym_char(symbol)?;
        Some(CopySt { l: Some(c), r: Some(c), lw: false, rw: false })
    }

    fn step(
        &self,
        left: Option<&CopySt>,
        c: &CopySt,
        right: Option<&CopySt>,
    ) -> (CopySt, Option<String>) {
        let lwave_now = left.is_none_or(|s| s.lw) && !c.lw;
        let rwave_now = right.is_none_or(|s| s.rw) && !c.rw;
        let next = CopySt {
            l: right.and_then(|s| s.l),
            r: left.and_then(|s| s.r),
            lw: c.lw || left.is_none_or(|s| s.lw),
            rw: c.rw || right.is_none_or(|s| s.rw),
        };
        let out = match (lwave_now, rwave_now) {
            (true, true) => match (c.l, c.r) {
                (Some(x), Some(y)) => Some(format!("{x}{y}")),
                _ => None,
            },
            (true, false) => match (c.l, right.and_then(|s| s.l)) {
                (Some(x), Some(y)) => Some(format!("{x}{y}")),
                _ => None,
            },
            (false, true) => match (left.and_then(|s| s.r), c.r) {
                (Some(x), Some(y)) => Some(format!("{x}{y}")),
                _ => None,
            },
            (false, false) => None,
        };
        (next, out)
    }

    fn accepting(&self, s: &CopySt) -> bool {
        // The initial overlay accepts every word at time 0.
        s.is_initial()
    }

    fn name(&self, s: &CopySt) -> String {
        if s.is_initial() {
            return s.l.unwrap().to_string();
        }
        format!(
            "{}{}{}{}",
            opt_char(s.l),
            opt_char(s.r),
            if s.lw { 'L' } else { 'o' },
            if s.rw { 'R' } else { 'o' }
        )
    }

    fn input_symbols(&self) -> Vec<String> {
        ab()
    }

    fn output_symbols(&self) -> Vec<String> {
        ab()
    }
}

/// The copy transducer of the worked examples: realizes `{(w, ww)}` in
/// real time, with cell `i`'s register filling at exactly `min(i, n-i+1)`.
pub fn build_copy_cat() -> CatSpec {
    materialize_closure(&CopyAutomaton, &SynthLimits::default())
        .expect("copy table stays within budget")
}

// ---------------------------------------------------------------------------
// Shared synchronization plumbing for the tracked builtins.
// ---------------------------------------------------------------------------


// ---------------------------------------------------------------------------
// Sort: local transpositions swap every (b, a) pair of neighbors; the
// two-general synchronization fires at step n, at which each cell emits the
// value it then holds.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SortSt {
    val: char,
    sync: TwoGen,
}

struct SortAutomaton {
    /// When false, the accepting overlay is dropped (output-track variant).
    accepting: bool,
    /// When false, no output is written (acceptance-track variant).
    emitting: bool,
}

impl SynthAutomaton for SortAutomaton {
    type State = SortSt;

    fn init(&self, symbol: &str) -> Option<SortSt> {
        Some(SortSt { val: sym_char(symbol)?, sync: TwoGen::Sym })
    }

    fn step(
        &self,
        left: Option<&SortSt>,
        c: &SortSt,
        right: Option<&SortSt>,
    ) -> (SortSt, Option<String>) {
        // A (b, a) neighbor pair switches contents; such pairs never overlap,
        // so the simultaneous rule is well defined.
        let val = if c.val == 'a' && left.is_some_and(|s| s.val == 'b') {
            'b'
        } else if c.val == 'b' && right.is_some_and(|s| s.val == 'a') {
            'a'
        } else {
            c.val
        };
        let sync = twogen_step(
            left.map(|s| &s.sync),
            &c.sync,
            right.map(|s| &s.sync),
            twogen_cap(BUILTIN_SYNC_CELLS as usize),
        );
        let fires_now = sync == TwoGen::Fire && c.sync != TwoGen::Fire;
        let out = (self.emitting && fires_now).then(|| val.to_string());
        (SortSt { val, sync }, out)
    }

    fn accepting(&self, s: &SortSt) -> bool {
        self.accepting && s.sync == TwoGen::Sym
    }

    fn name(&self, s: &SortSt) -> String {
        if s.sync == TwoGen::Sym {
            s.val.to_string()
        } else {
            format!("{}|{}", s.val, sync_label(&s.sync))
        }
    }

    fn input_symbols(&self) -> Vec<String> {
        ab()
    }

    fn output_symbols(&self) -> Vec<String> {
        if self.emitting {
            ab()
        } else {
            Vec::new()
        }
    }
}

/// The sorting transducer of the worked examples: realizes
/// `{(w, a^{|w|_a} b^{|w|_b})}` with every register filling at exactly step n.
pub fn build_sort_cat() -> CatSpec {
    materialize_closure(&SortAutomaton { accepting: true, emitting: true }, &SynthLimits::default())
        .expect("sort table stays within budget")
}

/// The sort transducer's acceptance track alone: accepts everything at
/// time 0 and never writes an output.
pub fn build_sort_acceptance_track() -> CatSpec {
    materialize_closure(&SortAutomaton { accepting: true, emitting: false }, &SynthLimits::default())
        .expect("sort acceptance track stays within budget")
}

/// The sort transducer's output track alone: sorts and emits, accepts nothing.
pub fn build_sort_output_track() -> CatSpec {
    materialize_closure(&SortAutomaton { accepting: false, emitting: true }, &SynthLimits::default())
        .expect("sort output track stays within budget")
}

// ---------------------------------------------------------------------------
// Reverse: two-register circulation (upper track shifts left, lower track
// shifts right, copy-down at the left end, copy-up at the right end); after
// n steps the lower track holds w^R and the synchronization fires.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct RevSt {
    up: Option<char>,
    low: Option<char>,
    sync: TwoGen,
}

struct ReverseAutomaton;

impl SynthAutomaton for ReverseAutomaton {
    type State = RevSt;

    fn init(&self, symbol: &str) -> Option<RevSt> {
        Some(RevSt { up: Some(sym_char(symbol)?), low: None, sync: TwoGen::Sym })
    }

    fn step(
        &self,
        left: Option<&RevSt>,
        c: &RevSt,
        right: Option<&RevSt>,
    ) -> (RevSt, Option<String>) {
        let (up, low) = match (left, right) {
            (None, None) => (c.low, c.up),
            (None, Some(r)) => (r.up, c.up),
            (Some(l), None) => (c.low, l.low),
            (Some(l), Some(r)) => (r.up, l.low),
        };
        let sync = twogen_step(
            left.map(|s| &s.sync),
            &c.sync,
            right.map(|s| &s.sync),
            twogen_cap(BUILTIN_SYNC_CELLS as usize),
        );
        let fires_now = sync == TwoGen::Fire && c.sync != TwoGen::Fire;
        let out = fires_now.then(|| low.map(|v| v.to_string()).unwrap_or_default());
        (RevSt { up, low, sync }, out)
    }

    fn accepting(&self, s: &RevSt) -> bool {
        s.sync == TwoGen::Sym && s.up.is_some() && s.low.is_none()
    }

    fn name(&self, s: &RevSt) -> String {
        if s.sync == TwoGen::Sym && s.low.is_none() {
            if let Some(u) = s.up {
                return u.to_string();
            }
        }
        format!("{}{}|{}", opt_char(s.up), opt_char(s.low), sync_label(&s.sync))
    }

    fn input_symbols(&self) -> Vec<String> {
        ab()
    }

    fn output_symbols(&self) -> Vec<String> {
        ab()
    }
}

/// The reversal transducer: realizes `{(w, w^R)}` in real time via the
/// circulating two-track construction.
pub fn build_reverse_cat() -> CatSpec {
    materialize_closure(&ReverseAutomaton, &SynthLimits::default())
        .expect("reverse table stays within budget")
}

// ---------------------------------------------------------------------------
// Square marker: output track fires at step n (cells on the left side of the
// crossing emit their original symbol, the right side emits `c`); the
// acceptance track recognizes {ww} by center-finding fold-and-compare,
// accepting by step 2n - 1.
// ---------------------------------------------------------------------------

/// Fold-and-compare slot: a copy of a right-half symbol traveling left, or
/// the copy parked on its comparison target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum FoldSlot {
    None,
    /// Copy in transit, tagged when it is the rightmost cell's copy.
    Transit { sym: char, last: bool },
    /// Copy parked on its mirror cell; `ok` is the comparison verdict.
    Parked { ok: bool, last: bool },
}

/// Verdict sweep traveling left after the last copy parks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Sweep {
    None,
    Ok,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SqSt {
    sym: char,
    /// Release wave moving right from the crossing, spawning leftward copies.
    releasing: bool,
    released: bool,
    slot: FoldSlot,
    sweep: Sweep,
    /// Acceptance latch; only ever set in the leftmost cell.
    accept: bool,
    sync: TwoGen,
}

struct SquareMarkerAutomaton;

impl SynthAutomaton for SquareMarkerAutomaton {
    type State = SqSt;

    fn init(&self, symbol: &str) -> Option<SqSt> {
        Some(SqSt {
            sym: sym_char(symbol)?,
            releasing: false,
            released: false,
            slot: FoldSlot::None,
            sweep: Sweep::None,
            accept: false,
            sync: TwoGen::Sym,
        })
    }

    fn step(
        &self,
        left: Option<&SqSt>,
        c: &SqSt,
        right: Option<&SqSt>,
    ) -> (SqSt, Option<String>) {
        let sync = twogen_step(
            left.map(|s| &s.sync),
            &c.sync,
            right.map(|s| &s.sync),
            twogen_cap(BUILTIN_SYNC_CELLS as usize),
        );
        let fires_now = sync == TwoGen::Fire && c.sync != TwoGen::Fire;

        // The release wave starts where the fronts cross at a cell boundary:
        // the center-right cell of an even-length line. An odd line has a
        // shared-center meeting instead, so nothing is ever released.
        let crossing_here = matches!(c.sync, TwoGen::FrontR(_))
            && matches!(left.map(|s| &s.sync), Some(TwoGen::FrontL(_)));
        let releasing =
            (crossing_here || left.is_some_and(|s| s.releasing)) && !c.released;

        // Copies move one cell left per step; a copy entering a cell parks
        // when the cell to its left is the boundary or already parked.
        let incoming = match right.map(|s| s.slot) {
            Some(FoldSlot::Transit { sym, last }) => Some((sym, last)),
            _ => None,
        };
        let fresh = releasing.then_some((c.sym, right.is_none()));
        let mut slot = c.slot;
        match c.slot {
            FoldSlot::None | FoldSlot::Transit { .. } => {
                slot = match incoming.or(fresh) {
                    Some((sym, last)) => {
                        let park = !releasing
                            && left.is_none_or(|s| matches!(s.slot, FoldSlot::Parked { .. }));
                        if park {
                            FoldSlot::Parked { ok: sym == c.sym, last }
                        } else {
                            FoldSlot::Transit { sym, last }
                        }
                    }
                    None => FoldSlot::None,
                };
            }
            FoldSlot::Parked { .. } => {}
        }

        // Verdict sweep: starts at the freshly parked last copy and conjoins
        // the parked comparison verdicts while moving left.
        let parked_ok = |slot: &FoldSlot| matches!(slot, FoldSlot::Parked { ok: true, .. });
        let parked_last_now = matches!(slot, FoldSlot::Parked { last: true, .. })
            && !matches!(c.slot, FoldSlot::Parked { .. });
        let sweep = if parked_last_now {
            if parked_ok(&slot) {
                Sweep::Ok
            } else {
                Sweep::Fail
            }
        } else {
            match right.map(|s| s.sweep) {
                Some(Sweep::Ok) => {
                    if parked_ok(&c.slot) {
                        Sweep::Ok
                    } else {
                        Sweep::Fail
                    }
                }
                Some(Sweep::Fail) => Sweep::Fail,
                _ => Sweep::None,
            }
        };
        let accept = left.is_none() && (c.accept || sweep == Sweep::Ok);

        let next = SqSt {
            sym: c.sym,
            releasing,
            released: c.released || releasing,
            slot,
            sweep,
            accept,
            sync,
        };
        let out = fires_now.then(|| match c.sync.side().or(next.sync.side()) {
            Some(Side::Left) => c.sym.to_string(),
            _ => "c".to_string(),
        });
        (next, out)
    }

    fn accepting(&self, s: &SqSt) -> bool {
        s.accept
    }

    fn name(&self, s: &SqSt) -> String {
        if !s.releasing
            && !s.released
            && s.slot == FoldSlot::None
            && s.sweep == Sweep::None
            && !s.accept
            && s.sync == TwoGen::Sym
        {
            return s.sym.to_string();
        }
        let slot = match s.slot {
            FoldSlot::None => "-".into(),
            FoldSlot::Transit { sym, last } => format!("t{sym}{}", if last { "!" } else { "" }),
            FoldSlot::Parked { ok, last } => {
                format!("p{}{}", if ok { "1" } else { "0" }, if last { "!" } else { "" })
            }
        };
        format!(
            "{}{}{}{}{}{}|{}",
            s.sym,
            if s.releasing { "w" } else { "" },
            if s.released { "W" } else { "" },
            slot,
            match s.sweep {
                Sweep::None => "",
                Sweep::Ok => "+",
                Sweep::Fail => "x",
            },
            if s.accept { "A" } else { "" },
            sync_label(&s.sync)
        )
    }

    fn input_symbols(&self) -> Vec<String> {
        ab()
    }

    fn output_symbols(&self) -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }
}

/// The square-marker transducer: realizes `{(ww, w c^{|w|})}`. Registers all
/// fill at step n; acceptance of `{ww}` completes by step `2n - 1`, within
/// this builtin's documented linear-time acceptance relaxation.
pub fn build_square_marker_cat() -> CatSpec {
    materialize_closure(&SquareMarkerAutomaton, &SynthLimits::default())
        .expect("square-marker table stays within budget")
}

/// Builtins addressable by name in the CLI and the harness. Tables are
/// materialized once per process.
pub fn builtin_by_name(name: &str) -> Option<&'static CatSpec> {
    use std::sync::OnceLock;
    static COPY: OnceLock<CatSpec> = OnceLock::new();
    static SORT: OnceLock<CatSpec> = OnceLock::new();
    static REVERSE: OnceLock<CatSpec> = OnceLock::new();
    static SQUARE: OnceLock<CatSpec> = OnceLock::new();
    match name {
        "copy" => Some(COPY.get_or_init(build_copy_cat)),
        "sort" => Some(SORT.get_or_init(build_sort_cat)),
        "reverse" => Some(REVERSE.get_or_init(build_reverse_cat)),
        "square_marker" => Some(SQUARE.get_or_init(build_square_marker_cat)),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["copy", "sort", "reverse", "square_marker"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{cat_run, default_step_cap, word_of, RunnableCat};

    fn run(spec: &CatSpec, input: &str) -> crate::engine::RunTrace {
        let cat = RunnableCat::new(spec).unwrap();
        let word = word_of(input);
        cat_run(&cat, &word, default_step_cap(word.len())).unwrap()
    }

    #[test]
    fn copy_ab_gives_abab_at_step_one() {
        let spec = build_copy_cat();
        let trace = run(&spec, "ab");
        assert_eq!(trace.final_output.as_deref(), Some("abab"));
        assert_eq!(trace.output_complete_time, Some(1));
        assert_eq!(trace.accept_time, Some(0));
    }

    #[test]
    fn copy_single_letter() {
        let trace = run(&build_copy_cat(), "a");
        assert_eq!(trace.final_output.as_deref(), Some("aa"));
        assert_eq!(trace.output_complete_time, Some(1));
    }

    #[test]
    fn copy_eight_letter_schedule() {
        let spec = build_copy_cat();
        let trace = run(&spec, "abababab");
        // Cell 1's register becomes the first two input symbols after one step.
        assert_eq!(trace.steps[1].outputs[0].as_deref(), Some("ab"));
        for i in 0..8usize {
            let expected = (i + 1).min(8 - i);
            assert_eq!(trace.fill_time(i), Some(expected), "cell {}", i + 1);
        }
        assert_eq!(trace.final_output.as_deref(), Some("abababababababab"));
    }

    #[test]
    fn sort_paper_example() {
        let trace = run(&build_sort_cat(), "babaabba");
        assert_eq!(trace.final_output.as_deref(), Some("aaaabbbb"));
        assert_eq!(trace.output_complete_time, Some(8));
        for i in 0..8 {
            assert_eq!(trace.fill_time(i), Some(8));
        }
    }

    #[test]
    fn sort_single_letter() {
        let trace = run(&build_sort_cat(), "a");
        assert_eq!(trace.final_output.as_deref(), Some("a"));
        assert_eq!(trace.output_complete_time, Some(1));
    }

    #[test]
    fn reverse_small_words() {
        let spec = build_reverse_cat();
        assert_eq!(run(&spec, "ab").final_output.as_deref(), Some("ba"));
        assert_eq!(run(&spec, "aba").final_output.as_deref(), Some("aba"));
        assert_eq!(run(&spec, "aab").final_output.as_deref(), Some("baa"));
        assert_eq!(run(&spec, "a").final_output.as_deref(), Some("a"));
    }

    fn runnable(name: &str) -> &'static RunnableCat {
        use std::sync::OnceLock;
        static SORT: OnceLock<RunnableCat> = OnceLock::new();
        static REVERSE: OnceLock<RunnableCat> = OnceLock::new();
        let cell = match name {
            "sort" => &SORT,
            _ => &REVERSE,
        };
        cell.get_or_init(|| RunnableCat::new(builtin_by_name(name).unwrap()).unwrap())
    }

    fn run_cached(name: &str, input: &str) -> crate::engine::RunTrace {
        let word = word_of(input);
        cat_run(runnable(name), &word, default_step_cap(word.len())).unwrap()
    }

    proptest::proptest! {
        // Conservation: sorting emits the same multiset it was given.
        #[test]
        fn sort_conserves_the_symbol_multiset(word in "[ab]{1,10}") {
            let out = run_cached("sort", &word).final_output.expect("total transduction");
            let count = |s: &str, c: char| s.chars().filter(|&x| x == c).count();
            proptest::prop_assert_eq!(count(&out, 'a'), count(&word, 'a'));
            proptest::prop_assert_eq!(count(&out, 'b'), count(&word, 'b'));
        }

        // Involution: reversing the reversal returns the input.
        #[test]
        fn reverse_is_an_involution(word in "[ab]{1,10}") {
            let once = run_cached("reverse", &word).final_output.expect("total");
            let twice = run_cached("reverse", &once).final_output.expect("total");
            proptest::prop_assert_eq!(twice, word);
        }
    }

    #[test]
    fn square_marker_accepts_squares() {
        let spec = build_square_marker_cat();
        let trace = run(&spec, "abab");
        assert!(trace.accept_time.is_some(), "{}", trace.to_text());
        assert_eq!(trace.final_output.as_deref(), Some("abcc"));
        assert_eq!(trace.output_complete_time, Some(4));
        assert!(trace.accept_time.unwrap() <= 8);
    }

    #[test]
    fn square_marker_rejects_odd_and_nonsquare() {
        let spec = build_square_marker_cat();
        assert_eq!(run(&spec, "aba").accept_time, None);
        assert_eq!(run(&spec, "abba").accept_time, None);
        assert_eq!(run(&spec, "aabb").accept_time, None);
        assert!(run(&spec, "aa").accept_time.is_some());
    }
}
