//! Machine descriptions: cellular automaton transducers, iterative array
//! transducers, and sequential (finite-state / pushdown) transducers, with
//! validation and a canonical JSON serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub mod format;

/// Reserved boundary symbol, never a state.
pub const BOUNDARY: &str = "#";
/// Reserved spelling of the no-output mark in serialized transition tables.
pub const NO_OUTPUT: &str = "⊥";
/// Conventional end-of-input symbol for iterative array transducers.
pub const END_MARKER: &str = "◁";

/// Left or right context of a local transition: a neighbor state or the boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctx {
    Boundary,
    State(String),
}

impl Ctx {
    pub fn as_state(&self) -> Option<&str> {
        match self {
            Ctx::Boundary => None,
            Ctx::State(s) => Some(s),
        }
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctx::Boundary => f.write_str(BOUNDARY),
            Ctx::State(s) => f.write_str(s),
        }
    }
}

/// One entry of a CAT local transition table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatRule {
    pub left: Ctx,
    pub center: String,
    pub right: Ctx,
    pub next: String,
    /// `None` is the no-output mark; `Some(word)` is a (possibly empty) word
    /// over the output alphabet.
    pub out: Option<String>,
}

/// A cellular automaton transducer.
///
/// States double as input symbols for the initial configuration. The
/// transition table may be partial when `default_rule` is set, in which case
/// every unlisted triple behaves as "keep state, emit nothing".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatSpec {
    pub states: Vec<String>,
    pub accepting: BTreeSet<String>,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub delta: Vec<CatRule>,
    /// "elsewhere → self, no output"
    pub default_rule: bool,
}

/// One entry of an IAT interior transition table (three states to one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IatInteriorRule {
    pub left: String,
    pub center: String,
    pub right: String,
    pub next: String,
}

/// One entry of the partial communication-cell table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IatCommRule {
    /// Input symbol or the end-of-input marker.
    pub input: String,
    pub comm: String,
    pub right: String,
    pub out: String,
    pub next: String,
}

/// An iterative array transducer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IatSpec {
    pub states: Vec<String>,
    pub accepting: BTreeSet<String>,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub quiescent: String,
    pub end_marker: String,
    pub delta_interior: Vec<IatInteriorRule>,
    /// "elsewhere → self" for interior cells; preserves quiescence.
    pub default_interior: bool,
    /// Partial: a configuration with no matching entry halts the machine.
    pub delta_comm: Vec<IatCommRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransducerKind {
    Fst,
    Pdt,
}

/// One rule of a sequential transducer. FST rules carry no stack components;
/// PDT rules pop exactly one symbol and push a (possibly empty) stack word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqRule {
    pub from: String,
    /// `None` is a move on empty input (a λ-rule).
    pub input: Option<String>,
    /// PDT only: the popped top-of-stack symbol.
    pub pop: Option<String>,
    pub to: String,
    pub out: String,
    /// PDT only: pushed stack word, first symbol becomes the new top.
    pub push: Option<String>,
}

/// A finite-state or pushdown transducer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqTransducerSpec {
    pub kind: TransducerKind,
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: BTreeSet<String>,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub stack_alphabet: Vec<String>,
    pub initial_stack: Option<String>,
    pub rules: Vec<SeqRule>,
}

/// Any machine the workbench understands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineSpec {
    Cat(CatSpec),
    Iat(IatSpec),
    Seq(SeqTransducerSpec),
}

/// An exactly-representable non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational { num, den }
    }

    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// `t <= self * n`, compared exactly.
    pub fn bounds(&self, t: u64, n: u64) -> bool {
        (t as u128) * (self.den as u128) <= (self.num as u128) * (n as u128)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    RealTime,
    LinearTime,
    Explicit,
}

/// Acceptance or output-completion time bound: real time is the identity
/// (`n` for CAT, `n+1` for IAT), linear time is `k · n` for rational `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeComplexity {
    pub kind: TimeKind,
    pub factor: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeModel {
    Cat,
    Iat,
}

impl TimeComplexity {
    pub fn real_time() -> Self {
        TimeComplexity { kind: TimeKind::RealTime, factor: Rational::ONE }
    }

    pub fn linear(factor: Rational) -> Self {
        TimeComplexity { kind: TimeKind::LinearTime, factor }
    }

    /// Whether a measured time `t` on input length `n` is within the bound.
    pub fn allows(&self, t: u64, n: u64, model: TimeModel) -> bool {
        match self.kind {
            TimeKind::RealTime => match model {
                TimeModel::Cat => t <= n,
                TimeModel::Iat => t <= n + 1,
            },
            TimeKind::LinearTime | TimeKind::Explicit => self.factor.bounds(t, n),
        }
    }

    /// Largest allowed time on length `n` under this bound.
    pub fn bound(&self, n: u64, model: TimeModel) -> u64 {
        match self.kind {
            TimeKind::RealTime => match model {
                TimeModel::Cat => n,
                TimeModel::Iat => n + 1,
            },
            TimeKind::LinearTime | TimeKind::Explicit => {
                ((self.factor.num as u128 * n as u128) / self.factor.den as u128) as u64
            }
        }
    }
}

impl fmt::Display for TimeComplexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TimeKind::RealTime => f.write_str("rt"),
            TimeKind::LinearTime => write!(f, "lt:{}", self.factor),
            TimeKind::Explicit => write!(f, "explicit:{}", self.factor),
        }
    }
}

/// A single validation finding. Violations are data, not failures: an empty
/// report means the spec is valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

impl Violation {
    fn new(kind: &str, detail: String) -> Self {
        Violation { kind: kind.to_string(), detail }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

fn check_names(states: &[String], report: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for s in states {
        if s.is_empty() {
            report.push(Violation::new("empty name", "state name must be non-empty".into()));
        }
        if s == BOUNDARY {
            report.push(Violation::new(
                "reserved name",
                format!("`{BOUNDARY}` is the boundary symbol and cannot be a state"),
            ));
        }
        if s == NO_OUTPUT {
            report.push(Violation::new(
                "reserved name",
                format!("`{NO_OUTPUT}` is the no-output mark and cannot be a state"),
            ));
        }
        if !seen.insert(s) {
            report.push(Violation::new("duplicate state", format!("state `{s}` listed twice")));
        }
    }
}

fn check_word(word: &str, alphabet: &BTreeSet<char>, what: &str, report: &mut Vec<Violation>) {
    for ch in word.chars() {
        if !alphabet.contains(&ch) {
            report.push(Violation::new(
                "output symbol",
                format!("{what} uses `{ch}` which is not in the output alphabet"),
            ));
        }
    }
}

fn output_chars(output_alphabet: &[String], report: &mut Vec<Violation>) -> BTreeSet<char> {
    let mut set = BTreeSet::new();
    for sym in output_alphabet {
        let mut chars = sym.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                if sym == NO_OUTPUT {
                    report.push(Violation::new(
                        "reserved name",
                        format!("`{NO_OUTPUT}` cannot be an output symbol"),
                    ));
                }
                set.insert(c);
            }
            _ => report.push(Violation::new(
                "output symbol",
                format!("output symbol `{sym}` must be a single character"),
            )),
        }
    }
    set
}

/// Validates a CAT description. The report is empty iff every invariant
/// holds: accepting and input states are states, reserved names are unused,
/// outputs are words over the output alphabet, and the table is total
/// (directly or through the default rule).
pub fn validate_cat(spec: &CatSpec) -> Vec<Violation> {
    let mut report = Vec::new();
    check_names(&spec.states, &mut report);
    let states: BTreeSet<&str> = spec.states.iter().map(|s| s.as_str()).collect();
    for a in &spec.accepting {
        if !states.contains(a.as_str()) {
            report.push(Violation::new("accepting", format!("accepting state `{a}` is not a state")));
        }
    }
    for a in &spec.input_alphabet {
        if !states.contains(a.as_str()) {
            report.push(Violation::new(
                "input alphabet",
                format!("input symbol `{a}` is not a state (symbols double as initial cell states)"),
            ));
        }
    }
    let out_chars = output_chars(&spec.output_alphabet, &mut report);

    let mut keys: BTreeMap<(&Ctx, &str, &Ctx), usize> = BTreeMap::new();
    for (idx, rule) in spec.delta.iter().enumerate() {
        for ctx in [&rule.left, &rule.right] {
            if let Some(s) = ctx.as_state() {
                if !states.contains(s) {
                    report.push(Violation::new(
                        "delta",
                        format!("rule #{idx}: context `{s}` is not a state"),
                    ));
                }
            }
        }
        if !states.contains(rule.center.as_str()) {
            report.push(Violation::new("delta", format!("rule #{idx}: center `{}` is not a state", rule.center)));
        }
        if !states.contains(rule.next.as_str()) {
            report.push(Violation::new("delta", format!("rule #{idx}: successor `{}` is not a state", rule.next)));
        }
        if let Some(word) = &rule.out {
            check_word(word, &out_chars, &format!("rule #{idx} output `{word}`"), &mut report);
        }
        if let Some(prev) = keys.insert((&rule.left, &rule.center, &rule.right), idx) {
            report.push(Violation::new(
                "delta",
                format!(
                    "rules #{prev} and #{idx} both define ({}, {}, {})",
                    rule.left, rule.center, rule.right
                ),
            ));
        }
    }

    if !spec.default_rule {
        // Totality over (S ∪ {#}) × S × (S ∪ {#}).
        let needed = (spec.states.len() as u128 + 1).pow(2) * spec.states.len() as u128;
        if (keys.len() as u128) < needed {
            'search: for l in std::iter::once(Ctx::Boundary)
                .chain(spec.states.iter().cloned().map(Ctx::State))
            {
                for c in &spec.states {
                    for r in std::iter::once(Ctx::Boundary)
                        .chain(spec.states.iter().cloned().map(Ctx::State))
                    {
                        if !keys.contains_key(&(&l, c.as_str(), &r)) {
                            report.push(Violation::new(
                                "totality",
                                format!("delta has no entry for ({l}, {c}, {r}) and no default rule"),
                            ));
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    report
}

/// Validates an IAT description: quiescence preservation, end-marker
/// disjointness, and well-formed tables.
pub fn validate_iat(spec: &IatSpec) -> Vec<Violation> {
    let mut report = Vec::new();
    check_names(&spec.states, &mut report);
    let states: BTreeSet<&str> = spec.states.iter().map(|s| s.as_str()).collect();
    if !states.contains(spec.quiescent.as_str()) {
        report.push(Violation::new("quiescent", format!("quiescent `{}` is not a state", spec.quiescent)));
    }
    for a in &spec.accepting {
        if !states.contains(a.as_str()) {
            report.push(Violation::new("accepting", format!("accepting state `{a}` is not a state")));
        }
    }
    if spec.input_alphabet.contains(&spec.end_marker) {
        report.push(Violation::new(
            "end marker clash",
            format!("end marker `{}` is also an input symbol", spec.end_marker),
        ));
    }
    let out_chars = output_chars(&spec.output_alphabet, &mut report);

    let mut interior: BTreeMap<(&str, &str, &str), &str> = BTreeMap::new();
    for (idx, rule) in spec.delta_interior.iter().enumerate() {
        for s in [&rule.left, &rule.center, &rule.right, &rule.next] {
            if !states.contains(s.as_str()) {
                report.push(Violation::new("delta_interior", format!("rule #{idx}: `{s}` is not a state")));
            }
        }
        if interior.insert((&rule.left, &rule.center, &rule.right), &rule.next).is_some() {
            report.push(Violation::new(
                "delta_interior",
                format!("duplicate entry for ({}, {}, {})", rule.left, rule.center, rule.right),
            ));
        }
    }
    // Quiescence: δ(q0, q0, q0) = q0, whether written down or defaulted.
    let q = spec.quiescent.as_str();
    match interior.get(&(q, q, q)) {
        Some(next) if *next != q => report.push(Violation::new(
            "quiescence",
            format!("delta_interior({q}, {q}, {q}) = {next}, must be {q}"),
        )),
        None if !spec.default_interior => report.push(Violation::new(
            "quiescence",
            format!("delta_interior({q}, {q}, {q}) is undefined and there is no default rule"),
        )),
        _ => {}
    }
    if !spec.default_interior {
        let needed = (spec.states.len() as u128).pow(3);
        if (interior.len() as u128) < needed {
            report.push(Violation::new(
                "totality",
                format!(
                    "delta_interior has {} of {} entries and no default rule",
                    interior.len(),
                    needed
                ),
            ));
        }
    }

    let mut comm = BTreeSet::new();
    for (idx, rule) in spec.delta_comm.iter().enumerate() {
        if rule.input != spec.end_marker && !spec.input_alphabet.contains(&rule.input) {
            report.push(Violation::new(
                "delta_comm",
                format!("rule #{idx}: input `{}` is neither an input symbol nor the end marker", rule.input),
            ));
        }
        for s in [&rule.comm, &rule.right, &rule.next] {
            if !states.contains(s.as_str()) {
                report.push(Violation::new("delta_comm", format!("rule #{idx}: `{s}` is not a state")));
            }
        }
        check_word(&rule.out, &out_chars, &format!("comm rule #{idx} output `{}`", rule.out), &mut report);
        if !comm.insert((&rule.input, &rule.comm, &rule.right)) {
            report.push(Violation::new(
                "delta_comm",
                format!("duplicate entry for ({}, {}, {})", rule.input, rule.comm, rule.right),
            ));
        }
    }
    report
}

/// Validates a sequential transducer: rule shape per kind and, when asked,
/// the determinism condition.
pub fn validate_seq(spec: &SeqTransducerSpec) -> Vec<Violation> {
    let mut report = Vec::new();
    check_names(&spec.states, &mut report);
    let states: BTreeSet<&str> = spec.states.iter().map(|s| s.as_str()).collect();
    if !states.contains(spec.initial.as_str()) {
        report.push(Violation::new("initial", format!("initial state `{}` is not a state", spec.initial)));
    }
    for a in &spec.accepting {
        if !states.contains(a.as_str()) {
            report.push(Violation::new("accepting", format!("accepting state `{a}` is not a state")));
        }
    }
    let out_chars = output_chars(&spec.output_alphabet, &mut report);
    let stack: BTreeSet<&str> = spec.stack_alphabet.iter().map(|s| s.as_str()).collect();
    let mut stack_chars = BTreeSet::new();
    for sym in &spec.stack_alphabet {
        let mut chars = sym.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                stack_chars.insert(c);
            }
            _ => report.push(Violation::new(
                "stack alphabet",
                format!("stack symbol `{sym}` must be a single character"),
            )),
        }
    }
    match spec.kind {
        TransducerKind::Fst => {
            if !spec.stack_alphabet.is_empty() || spec.initial_stack.is_some() {
                report.push(Violation::new("kind", "an FST carries no stack alphabet".into()));
            }
        }
        TransducerKind::Pdt => match &spec.initial_stack {
            Some(z) if !stack.contains(z.as_str()) => {
                report.push(Violation::new("initial stack", format!("`{z}` is not a stack symbol")));
            }
            None => report.push(Violation::new("initial stack", "a PDT needs an initial stack symbol".into())),
            _ => {}
        },
    }
    for (idx, rule) in spec.rules.iter().enumerate() {
        if !states.contains(rule.from.as_str()) {
            report.push(Violation::new("rule", format!("rule #{idx}: source `{}` is not a state", rule.from)));
        }
        if !states.contains(rule.to.as_str()) {
            report.push(Violation::new("rule", format!("rule #{idx}: target `{}` is not a state", rule.to)));
        }
        if let Some(sym) = &rule.input {
            if !spec.input_alphabet.contains(sym) {
                report.push(Violation::new("rule", format!("rule #{idx}: input `{sym}` is not an input symbol")));
            }
        }
        check_word(&rule.out, &out_chars, &format!("rule #{idx} output `{}`", rule.out), &mut report);
        match spec.kind {
            TransducerKind::Fst => {
                if rule.pop.is_some() || rule.push.is_some() {
                    report.push(Violation::new("rule", format!("rule #{idx}: FST rules carry no stack components")));
                }
            }
            TransducerKind::Pdt => {
                match &rule.pop {
                    Some(g) if !stack.contains(g.as_str()) => {
                        report.push(Violation::new("rule", format!("rule #{idx}: pop `{g}` is not a stack symbol")));
                    }
                    None => report.push(Violation::new(
                        "rule",
                        format!("rule #{idx}: PDT rules consume exactly one top-of-stack symbol"),
                    )),
                    _ => {}
                }
                match &rule.push {
                    Some(word) => {
                        for ch in word.chars() {
                            if !stack_chars.contains(&ch) {
                                report.push(Violation::new(
                                    "rule",
                                    format!("rule #{idx}: pushed `{ch}` is not a stack symbol"),
                                ));
                            }
                        }
                    }
                    None => report.push(Violation::new(
                        "rule",
                        format!("rule #{idx}: PDT rules push a (possibly empty) stack word"),
                    )),
                }
            }
        }
    }
    report
}

impl SeqTransducerSpec {
    /// True when the spec is λ-free: no rule moves on empty input.
    pub fn is_lambda_free(&self) -> bool {
        self.rules.iter().all(|r| r.input.is_some())
    }

    /// Deterministic: at most one applicable rule per configuration and no
    /// state mixing a λ-rule with symbol-consuming rules on the same stack top.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        for rule in &self.rules {
            if !seen.insert((rule.from.clone(), rule.input.clone(), rule.pop.clone())) {
                return false;
            }
        }
        for rule in &self.rules {
            if rule.input.is_none() {
                let clash = self.rules.iter().any(|r| {
                    r.from == rule.from && r.pop == rule.pop && r.input.is_some()
                });
                if clash {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_cat() -> CatSpec {
        CatSpec {
            states: vec!["a".into(), "b".into()],
            accepting: BTreeSet::from(["a".to_string()]),
            input_alphabet: vec!["a".into(), "b".into()],
            output_alphabet: vec!["a".into(), "b".into()],
            delta: vec![],
            default_rule: true,
        }
    }

    #[test]
    fn well_formed_cat_is_valid() {
        assert!(validate_cat(&two_state_cat()).is_empty());
    }

    #[test]
    fn missing_triple_is_reported_without_default() {
        let mut spec = two_state_cat();
        spec.default_rule = false;
        let report = validate_cat(&spec);
        assert!(report.iter().any(|v| v.kind == "totality"), "{report:?}");
    }

    #[test]
    fn output_outside_alphabet_is_reported() {
        let mut spec = two_state_cat();
        spec.delta.push(CatRule {
            left: Ctx::Boundary,
            center: "a".into(),
            right: Ctx::Boundary,
            next: "a".into(),
            out: Some("z".into()),
        });
        let report = validate_cat(&spec);
        assert!(report.iter().any(|v| v.kind == "output symbol"), "{report:?}");
    }

    #[test]
    fn iat_quiescence_violation() {
        let spec = IatSpec {
            states: vec!["q0".into(), "x".into()],
            accepting: BTreeSet::new(),
            input_alphabet: vec!["a".into()],
            output_alphabet: vec![],
            quiescent: "q0".into(),
            end_marker: END_MARKER.into(),
            delta_interior: vec![IatInteriorRule {
                left: "q0".into(),
                center: "q0".into(),
                right: "q0".into(),
                next: "x".into(),
            }],
            default_interior: true,
            delta_comm: vec![],
        };
        let report = validate_iat(&spec);
        assert!(report.iter().any(|v| v.kind == "quiescence"), "{report:?}");
    }

    #[test]
    fn iat_end_marker_clash() {
        let spec = IatSpec {
            states: vec!["q0".into()],
            accepting: BTreeSet::new(),
            input_alphabet: vec![END_MARKER.into()],
            output_alphabet: vec![],
            quiescent: "q0".into(),
            end_marker: END_MARKER.into(),
            delta_interior: vec![],
            default_interior: true,
            delta_comm: vec![],
        };
        let report = validate_iat(&spec);
        assert!(report.iter().any(|v| v.kind == "end marker clash"), "{report:?}");
    }

    #[test]
    fn rational_bound_is_exact() {
        let k = Rational::new(3, 2);
        assert!(k.bounds(15, 10));
        assert!(!k.bounds(16, 10));
    }
}
