//! Configuration-driven experiment runs: CSV traces, SVG panels and
//! run-to-run comparison.

pub mod compare;
pub mod config;
pub mod run;
pub mod svg;
pub mod table;

pub use compare::{compare, CompareReport};
pub use config::{parse_kv, ExperimentConfig, Panel, ProblemKind, Scale};
pub use run::{compute, compute_for, read_summary, recompute_summary, run, RunArtifact, RunResults, Summary};
pub use table::SCHEMA;
