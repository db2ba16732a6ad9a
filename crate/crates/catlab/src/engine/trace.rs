//! Space-time traces and their line-oriented text export.

use std::fmt::Write as _;
use std::sync::Arc;

/// One row of a space-time trace.
#[derive(Debug, Clone)]
pub struct TraceStep {
    /// Cell states at this time (for IAT runs, index 0 is the communication cell).
    pub cells: Vec<u32>,
    /// CAT: per-cell output registers. IAT: the chunk emitted at each past step.
    pub outputs: Vec<Option<Arc<str>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Cat,
    Iat,
}

/// The full record of a run: per-step cell states and output registers,
/// acceptance and output-completion times, and the final output when the run
/// is a successful transduction.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub kind: TraceKind,
    names: Arc<Vec<String>>,
    pub steps: Vec<TraceStep>,
    pub accept_time: Option<usize>,
    pub output_complete_time: Option<usize>,
    pub final_output: Option<String>,
    /// False when the step cap was reached before the run finished.
    pub complete: bool,
}

impl RunTrace {
    pub(crate) fn cat(
        names: Arc<Vec<String>>,
        steps: Vec<TraceStep>,
        accept_time: Option<usize>,
        output_complete_time: Option<usize>,
        final_output: Option<String>,
        complete: bool,
    ) -> Self {
        RunTrace { kind: TraceKind::Cat, names, steps, accept_time, output_complete_time, final_output, complete }
    }

    pub(crate) fn iat(
        names: Arc<Vec<String>>,
        steps: Vec<TraceStep>,
        accept_time: Option<usize>,
        output_complete_time: Option<usize>,
        final_output: Option<String>,
        complete: bool,
    ) -> Self {
        RunTrace { kind: TraceKind::Iat, names, steps, accept_time, output_complete_time, final_output, complete }
    }

    /// Rebuilds a renderable trace from parsed rows (used by the CLI's
    /// render command). Times and outputs are display-only here.
    pub fn from_parts(names: Vec<String>, steps: Vec<(Vec<u32>, Vec<Option<Arc<str>>>)>) -> Self {
        RunTrace {
            kind: TraceKind::Cat,
            names: Arc::new(names),
            steps: steps
                .into_iter()
                .map(|(cells, outputs)| TraceStep { cells, outputs })
                .collect(),
            accept_time: None,
            output_complete_time: None,
            final_output: None,
            complete: true,
        }
    }

    pub fn state_name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    /// Whether the run is a successful transduction.
    pub fn transduced(&self) -> bool {
        self.final_output.is_some()
    }

    /// The step at which cell `i` (0-based) first holds an output word.
    /// Only meaningful for CAT traces.
    pub fn fill_time(&self, i: usize) -> Option<usize> {
        self.steps.iter().position(|s| s.outputs.get(i).is_some_and(|o| o.is_some()))
    }

    /// Line-oriented text export: one row per step, one column per cell,
    /// emitted chunks bracketed in the step where the register filled.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# catlab trace v1");
        let kind = match self.kind {
            TraceKind::Cat => "cat",
            TraceKind::Iat => "iat",
        };
        let cells = self.steps.first().map_or(0, |s| s.cells.len());
        let _ = writeln!(out, "# kind: {kind} cells: {cells} steps: {}", self.steps.len());
        for (t, step) in self.steps.iter().enumerate() {
            let states: Vec<&str> = step.cells.iter().map(|&c| self.state_name(c)).collect();
            let mut regs: Vec<String> = Vec::with_capacity(step.outputs.len());
            for (i, o) in step.outputs.iter().enumerate() {
                match o {
                    Some(w) => {
                        let fresh = match self.kind {
                            TraceKind::Cat => t > 0
                                && self.steps[t - 1].outputs.get(i).is_none_or(|p| p.is_none()),
                            TraceKind::Iat => i + 1 == t,
                        };
                        if fresh {
                            regs.push(format!("[{w}]"));
                        } else {
                            regs.push(w.to_string());
                        }
                    }
                    None => regs.push("⊥".into()),
                }
            }
            let _ = writeln!(out, "{t} | {} | {}", states.join(" "), regs.join(" "));
        }
        let fmt_opt = |v: Option<usize>| v.map_or("-".to_string(), |t| t.to_string());
        let _ = writeln!(
            out,
            "# accept_time: {} output_complete_time: {} complete: {}",
            fmt_opt(self.accept_time),
            fmt_opt(self.output_complete_time),
            self.complete,
        );
        if let Some(v) = &self.final_output {
            let _ = writeln!(out, "# final_output: {v}");
        }
        out
    }
}
