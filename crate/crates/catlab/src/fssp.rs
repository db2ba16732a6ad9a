//! Firing-squad synchronization components: reusable CAT tracks in which
//! every cell enters the distinguished FIRE state simultaneously, at exactly
//! step `n` for the two-general variant (generals at both ends from step 1)
//! and at exactly `2n - 2` for the single-general variant.
//!
//! The construction is counter-based: speed-1 fronts carry a hop count from
//! their end of the line, each cell stores its distance to the nearer end
//! when the first front passes, and the arrival of the opposite front (or of
//! the wall echo, for the single general) starts a countdown that reaches
//! zero in every cell at the same step. Cells hold counters bounded by the
//! component's `max_cells`, so each built table is exact for every line
//! length up to that bound; `verify_sync` checks this exhaustively.

use std::collections::BTreeSet;

use crate::engine::{cat_run, RunnableCat};
use crate::machine::CatSpec;
use crate::synth::{materialize_runs, SynthAutomaton, SynthLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncVariant {
    /// Generals at both ends from step 1; fires at `n` (`n >= 2`), and at
    /// step 1 for the degenerate single cell.
    TwoGeneral,
    /// General in the leftmost cell; fires at `2n - 2` (`n >= 2`), and at
    /// step 0 for the degenerate single cell (its initial state is FIRE).
    SingleGeneral,
}

/// Which end's front reached a cell first; `Mid` is the odd-length center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Mid,
}

/// Two-general synchronization cell state. Fronts move at speed 1 carrying
/// hop counts; `Cnt` counts down to the common firing step. The `fl`/`fr`
/// flags mark a front passing through a counting cell this step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TwoGen {
    Sym,
    FrontL(u16),
    FrontR(u16),
    StoredL(u16),
    StoredR(u16),
    Cnt { v: u16, fl: bool, fr: bool, side: Side },
    Fire,
    Junk,
}

impl TwoGen {
    pub fn side(&self) -> Option<Side> {
        match self {
            TwoGen::FrontL(_) | TwoGen::StoredL(_) => Some(Side::Left),
            TwoGen::FrontR(_) | TwoGen::StoredR(_) => Some(Side::Right),
            TwoGen::Cnt { side, .. } => Some(*side),
            _ => None,
        }
    }

    fn fl_passing(&self, cap: u16) -> Option<u16> {
        match self {
            TwoGen::FrontL(d) => Some((d + 1).min(cap)),
            TwoGen::Cnt { v, fl: true, .. } => Some(v.saturating_sub(1)),
            _ => None,
        }
    }

    fn fr_passing(&self, cap: u16) -> Option<u16> {
        match self {
            TwoGen::FrontR(d) => Some((d + 1).min(cap)),
            TwoGen::Cnt { v, fr: true, .. } => Some(v.saturating_sub(1)),
            _ => None,
        }
    }
}

fn enter(v: u16, fl: bool, fr: bool, side: Side) -> TwoGen {
    if v == 0 {
        TwoGen::Fire
    } else {
        TwoGen::Cnt { v, fl, fr, side }
    }
}

/// One step of the two-general track. `None` neighbors are the boundary.
/// Hop counters saturate at `cap`; stored distances and countdowns never
/// exceed half the line length, so the track is exact on lines of up to
/// `2 * (cap - 2)` cells.
pub fn twogen_step(l: Option<&TwoGen>, c: &TwoGen, r: Option<&TwoGen>, cap: u16) -> TwoGen {
    use TwoGen::*;
    // Hop count a front would deliver to this cell this step.
    let from_left: Option<u16> = l.map_or(Some(0), |st| st.fl_passing(cap));
    let from_right: Option<u16> = r.map_or(Some(0), |st| st.fr_passing(cap));
    match c {
        Sym => match (l.is_none(), r.is_none()) {
            (true, true) => Fire,
            (true, false) => FrontL(0),
            (false, true) => FrontR(0),
            (false, false) => match (from_left, from_right) {
                (Some(dl), Some(dr)) => enter(dl.min(dr), true, true, Side::Mid),
                (Some(dl), None) => FrontL(dl),
                (None, Some(dr)) => FrontR(dr),
                (None, None) => Sym,
            },
        },
        FrontL(d) | StoredL(d) => match from_right {
            Some(dr) => enter((*d).min(dr), false, true, Side::Left),
            None => StoredL(*d),
        },
        FrontR(d) | StoredR(d) => match from_left {
            Some(dl) => enter((*d).min(dl), true, false, Side::Right),
            None => StoredR(*d),
        },
        Cnt { v: 1, .. } => Fire,
        Cnt { v, side, .. } => Cnt { v: v - 1, fl: false, fr: false, side: *side },
        Fire => Fire,
        Junk => Junk,
    }
}

/// Saturation point covering every line of up to `max_cells` cells.
pub fn twogen_cap(max_cells: usize) -> u16 {
    (max_cells / 2 + 2) as u16
}

/// Short display form of a single-general track state.
pub fn sync_label_one(og: &OneGen) -> String {
    match og {
        OneGen::General => "G".into(),
        OneGen::Sym => "s".into(),
        OneGen::Front(d) => format!("F{d}"),
        OneGen::Stored(d) => format!("S{d}"),
        OneGen::Cnt { v, ret } => format!("C{v}{}", if *ret { "e" } else { "" }),
        OneGen::Fire => "FIRE".into(),
        OneGen::Junk => "J".into(),
    }
}

/// Short display form of a two-general track state, for composite state names.
pub fn sync_label(tg: &TwoGen) -> String {
    match tg {
        TwoGen::Sym => "·".into(),
        TwoGen::FrontL(d) => format!("L{d}"),
        TwoGen::FrontR(d) => format!("R{d}"),
        TwoGen::StoredL(d) => format!("l{d}"),
        TwoGen::StoredR(d) => format!("r{d}"),
        TwoGen::Cnt { v, fl, fr, side } => format!(
            "C{v}{}{}{}",
            if *fl { "l" } else { "" },
            if *fr { "r" } else { "" },
            match side {
                Side::Left => "<",
                Side::Right => ">",
                Side::Mid => "=",
            }
        ),
        TwoGen::Fire => "F".into(),
        TwoGen::Junk => "J".into(),
    }
}

/// Single-general synchronization cell state. The general's front carries a
/// hop count rightward, becomes a wall counter at the far end, and the echo
/// returns starting countdowns that all reach FIRE at `2n - 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OneGen {
    General,
    Sym,
    Front(u16),
    Stored(u16),
    Cnt { v: u16, ret: bool },
    Fire,
    Junk,
}

impl OneGen {
    fn front_d(&self) -> Option<u16> {
        match self {
            OneGen::General => Some(0),
            OneGen::Front(d) => Some(*d),
            _ => None,
        }
    }

    fn echo_here(&self) -> bool {
        matches!(self, OneGen::Cnt { ret: true, .. })
    }
}

/// One step of the single-general track.
pub fn onegen_step(l: Option<&OneGen>, c: &OneGen, r: Option<&OneGen>, max: u16) -> OneGen {
    use OneGen::*;
    match c {
        // Degenerate single cell run as "g" fires one step in.
        General => match (l, r) {
            (None, None) => Fire,
            _ => Stored(0),
        },
        Sym => match l.and_then(|s| s.front_d()) {
            Some(d) => {
                let nd = d + 1;
                if nd >= max {
                    Junk
                } else if r.is_none() {
                    // Wall reached: this cell is both front and echo origin.
                    Cnt { v: nd, ret: true }
                } else {
                    Front(nd)
                }
            }
            None => Sym,
        },
        Front(d) => Stored(*d),
        Stored(d) => {
            if r.is_some_and(|s| s.echo_here()) {
                if *d == 0 {
                    Fire
                } else {
                    Cnt { v: *d, ret: true }
                }
            } else {
                Stored(*d)
            }
        }
        Cnt { v: 1, .. } => Fire,
        Cnt { v, .. } => Cnt { v: v - 1, ret: false },
        Fire => Fire,
        Junk => Junk,
    }
}

struct SyncAutomaton {
    variant: SyncVariant,
    max: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SyncState {
    Two(TwoGen),
    One(OneGen),
    /// Degenerate single-cell general: already synchronized at step 0, so
    /// this input symbol counts as FIRE.
    OneDegenerate,
}

impl SyncAutomaton {
    fn is_fire(&self, state: &SyncState) -> bool {
        matches!(
            state,
            SyncState::Two(TwoGen::Fire) | SyncState::One(OneGen::Fire) | SyncState::OneDegenerate
        )
    }
}

impl SynthAutomaton for SyncAutomaton {
    type State = SyncState;

    fn init(&self, symbol: &str) -> Option<SyncState> {
        match (self.variant, symbol) {
            (SyncVariant::TwoGeneral, "x") => Some(SyncState::Two(TwoGen::Sym)),
            (SyncVariant::SingleGeneral, "g") => Some(SyncState::One(OneGen::General)),
            (SyncVariant::SingleGeneral, "s") => Some(SyncState::One(OneGen::Sym)),
            (SyncVariant::SingleGeneral, "g1") => Some(SyncState::OneDegenerate),
            _ => None,
        }
    }

    fn step(
        &self,
        l: Option<&SyncState>,
        c: &SyncState,
        r: Option<&SyncState>,
    ) -> (SyncState, Option<String>) {
        let next = match c {
            SyncState::Two(tg) => {
                let lt = l.map(|s| match s {
                    SyncState::Two(t) => *t,
                    _ => TwoGen::Junk,
                });
                let rt = r.map(|s| match s {
                    SyncState::Two(t) => *t,
                    _ => TwoGen::Junk,
                });
                SyncState::Two(twogen_step(lt.as_ref(), tg, rt.as_ref(), twogen_cap(self.max as usize)))
            }
            SyncState::One(og) => {
                let lt = l.map(|s| match s {
                    SyncState::One(t) => *t,
                    _ => OneGen::Junk,
                });
                let rt = r.map(|s| match s {
                    SyncState::One(t) => *t,
                    _ => OneGen::Junk,
                });
                SyncState::One(onegen_step(lt.as_ref(), og, rt.as_ref(), self.max))
            }
            SyncState::OneDegenerate => SyncState::OneDegenerate,
        };
        let fires_now = self.is_fire(&next) && !self.is_fire(c);
        (next, fires_now.then(String::new))
    }

    fn accepting(&self, state: &SyncState) -> bool {
        self.is_fire(state)
    }

    fn name(&self, state: &SyncState) -> String {
        match state {
            SyncState::Two(tg) => match tg {
                TwoGen::Sym => "x".into(),
                TwoGen::FrontL(d) => format!("L{d}"),
                TwoGen::FrontR(d) => format!("R{d}"),
                TwoGen::StoredL(d) => format!("sL{d}"),
                TwoGen::StoredR(d) => format!("sR{d}"),
                TwoGen::Cnt { v, fl, fr, side } => format!(
                    "C{v}{}{}{}",
                    if *fl { "l" } else { "" },
                    if *fr { "r" } else { "" },
                    match side {
                        Side::Left => "<",
                        Side::Right => ">",
                        Side::Mid => "=",
                    }
                ),
                TwoGen::Fire => "FIRE".into(),
                TwoGen::Junk => "junk".into(),
            },
            SyncState::One(og) => match og {
                OneGen::General => "g".into(),
                OneGen::Sym => "s".into(),
                OneGen::Front(d) => format!("F{d}"),
                OneGen::Stored(d) => format!("S{d}"),
                OneGen::Cnt { v, ret } => format!("C{v}{}", if *ret { "e" } else { "" }),
                OneGen::Fire => "FIRE".into(),
                OneGen::Junk => "junk".into(),
            },
            SyncState::OneDegenerate => "g1".into(),
        }
    }

    fn input_symbols(&self) -> Vec<String> {
        match self.variant {
            SyncVariant::TwoGeneral => vec!["x".into()],
            SyncVariant::SingleGeneral => vec!["g".into(), "s".into(), "g1".into()],
        }
    }

    fn output_symbols(&self) -> Vec<String> {
        Vec::new()
    }
}

/// A built synchronization track with its exact firing schedule.
#[derive(Debug, Clone)]
pub struct SyncComponent {
    pub variant: SyncVariant,
    /// Largest line length the table's counters cover.
    pub max_cells: usize,
    pub spec: CatSpec,
    pub fire_states: BTreeSet<String>,
}

impl SyncComponent {
    /// The exact step at which all `n` cells fire.
    pub fn fire_time(&self, n: usize) -> usize {
        fire_time(self.variant, n)
    }

    /// The initial word that runs this component on `n` cells.
    pub fn word_for(&self, n: usize) -> Vec<String> {
        sync_word(self.variant, n)
    }
}

/// Firing schedule: `n` for two generals (1 -> 1), `2n - 2` for one (1 -> 0).
pub fn fire_time(variant: SyncVariant, n: usize) -> usize {
    match variant {
        SyncVariant::TwoGeneral => {
            if n == 1 {
                1
            } else {
                n
            }
        }
        SyncVariant::SingleGeneral => {
            if n == 1 {
                0
            } else {
                2 * n - 2
            }
        }
    }
}

fn sync_word(variant: SyncVariant, n: usize) -> Vec<String> {
    match variant {
        SyncVariant::TwoGeneral => vec!["x".to_string(); n],
        SyncVariant::SingleGeneral => {
            if n == 1 {
                vec!["g1".to_string()]
            } else {
                let mut w = vec!["g".to_string()];
                w.extend(std::iter::repeat_n("s".to_string(), n - 1));
                w
            }
        }
    }
}

pub const DEFAULT_SYNC_CELLS: usize = 256;

/// Builds a synchronization component whose table is exact for every line
/// length up to [`DEFAULT_SYNC_CELLS`].
pub fn build_sync(variant: SyncVariant) -> SyncComponent {
    build_sync_with(variant, DEFAULT_SYNC_CELLS)
}

/// Builds a synchronization component covering lengths `1..=max_cells`.
pub fn build_sync_with(variant: SyncVariant, max_cells: usize) -> SyncComponent {
    assert!(max_cells >= 1 && max_cells < u16::MAX as usize);
    let automaton = SyncAutomaton { variant, max: max_cells as u16 };
    let words = (1..=max_cells).map(|n| sync_word(variant, n));
    let spec = materialize_runs(&automaton, words, |n| 2 * n + 4, &SynthLimits::default())
        .expect("sync tables stay within budget");
    let fire_states = spec
        .states
        .iter()
        .filter(|s| s.as_str() == "FIRE" || s.as_str() == "g1")
        .cloned()
        .collect();
    SyncComponent { variant, max_cells, spec, fire_states }
}

/// One problem found while verifying a synchronization component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncViolation {
    pub n: usize,
    pub detail: String,
}

/// Simulates every line length in `1..=n_max` and reports early firing,
/// non-simultaneous firing, or a wrong firing time.
pub fn verify_sync(component: &SyncComponent, n_max: usize) -> Vec<SyncViolation> {
    let mut report = Vec::new();
    let cat = match RunnableCat::new(&component.spec) {
        Ok(cat) => cat,
        Err(e) => {
            report.push(SyncViolation { n: 0, detail: format!("component spec invalid: {e}") });
            return report;
        }
    };
    for n in 1..=n_max {
        if n > component.max_cells {
            report.push(SyncViolation {
                n,
                detail: format!("line length {n} exceeds the table bound {}", component.max_cells),
            });
            continue;
        }
        let expected = component.fire_time(n);
        let word = component.word_for(n);
        let trace = match cat_run(&cat, &word, expected + 4) {
            Ok(trace) => trace,
            Err(e) => {
                report.push(SyncViolation { n, detail: format!("run failed: {e}") });
                continue;
            }
        };
        if trace.steps.len() <= expected {
            report.push(SyncViolation { n, detail: "trace ended before the firing step".into() });
            continue;
        }
        for (t, step) in trace.steps.iter().enumerate().take(expected + 1) {
            let firing: Vec<bool> = step
                .cells
                .iter()
                .map(|&c| component.fire_states.contains(trace.state_name(c)))
                .collect();
            let any = firing.iter().any(|&f| f);
            let all = firing.iter().all(|&f| f);
            if t < expected && any {
                report.push(SyncViolation {
                    n,
                    detail: format!("early firing at step {t} (expected {expected})"),
                });
                break;
            }
            if t == expected && !all {
                report.push(SyncViolation {
                    n,
                    detail: format!(
                        "at step {t}, only {} of {n} cells fire",
                        firing.iter().filter(|&&f| f).count()
                    ),
                });
                break;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_general_fires_at_n_small() {
        let comp = build_sync_with(SyncVariant::TwoGeneral, 40);
        let report = verify_sync(&comp, 40);
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn single_general_fires_at_2n_minus_2_small() {
        let comp = build_sync_with(SyncVariant::SingleGeneral, 40);
        let report = verify_sync(&comp, 40);
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn degenerate_lengths() {
        let two = build_sync_with(SyncVariant::TwoGeneral, 4);
        assert_eq!(two.fire_time(1), 1);
        let one = build_sync_with(SyncVariant::SingleGeneral, 4);
        assert_eq!(one.fire_time(1), 0);
        assert!(verify_sync(&two, 1).is_empty());
        assert!(verify_sync(&one, 1).is_empty());
    }

    #[test]
    fn corrupted_table_is_caught() {
        let mut comp = build_sync_with(SyncVariant::TwoGeneral, 12);
        let fire = "FIRE".to_string();
        let victim = comp
            .spec
            .delta
            .iter_mut()
            .find(|r| r.center == "x" && r.next != fire)
            .expect("some soldier rule");
        victim.next = fire;
        let report = verify_sync(&comp, 12);
        assert!(!report.is_empty());
    }
}
