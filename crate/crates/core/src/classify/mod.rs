//! Invariant profiles, the `V_E` decision procedure and pairwise comparison.

pub mod automaton;
pub mod compare;
pub mod profile;
pub mod topology;

pub use automaton::{touch_table, ve_witness, vsc_check, PairAutomaton, VeWitness};
pub use compare::{compare, Certificate, CompareOptions, Outcome, Verdict};
pub use profile::{
    class_flags, dim_ve, multifractal_equal, profile, FiberClass, InvariantProfile, MultifractalCheck, Route,
    SigmaWitness, StructureFlags, DEFAULT_TOPOLOGY_DEPTH,
};
pub use topology::{totally_disconnected, Tristate};
