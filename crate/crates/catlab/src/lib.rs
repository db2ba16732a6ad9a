//! catlab: an executable workbench for cellular automaton transducers (CAT)
//! and iterative array transducers (IAT).
//!
//! The crate provides the machine model and its canonical serialization, a
//! step-by-step engine with space-time traces, firing-squad synchronization
//! components with exact firing times, hand-built example transducers
//! (copy, sort, reverse, square-marker), compilers between the machine
//! families (IAT→CAT, CAT→IAT, single-valued FST→CAT, deterministic
//! PDT→CAT), and a brute-force verification harness that checks every
//! machine against sequential oracles and measures its time complexity.

pub mod bridge;
pub mod builtins;
pub mod dpdt;
pub mod engine;
pub mod fssp;
pub mod harness;
pub mod machine;
pub mod samples;
pub mod sfst;
pub mod synth;

pub use engine::{cat_run, cat_step, compose_tracks, iat_run, RunTrace, RunnableCat, RunnableIat};
pub use machine::format::{parse_machine, serialize_machine};
pub use machine::{validate_cat, validate_iat, validate_seq, MachineSpec};
