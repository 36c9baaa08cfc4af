//! Surrogate-assisted metaheuristic optimization with component-scoped
//! energy, time, and memory profiling.
//!
//! The crate bundles everything needed to study *when a learned surrogate
//! pays for itself* on a costly simulation-backed objective:
//!
//! - [`traffic`] — a deterministic queue-based traffic microsimulator and
//!   the scalar objective it induces (the expensive black box under study),
//!   plus a synthetic instance generator.
//! - [`surrogate`] — a from-scratch two-hidden-layer ReLU perceptron with
//!   an Adam trainer, checkpointing, and activation-sparsity introspection.
//! - [`optim`] — integer-encoded PSO and GA search cores with three
//!   evaluation strategies: true objective only, pre-trained surrogate,
//!   and periodically retrained surrogate.
//! - [`profile`] — RAPL/powercap energy readings (with a watts×time proxy
//!   fallback), wall time, and allocation high-water marks, attributed to
//!   the five optimization components.
//! - [`stats`] — log-normal fitting, NMSE/MAPE, Kruskal–Wallis and
//!   pairwise Mann–Whitney tests, OLS regression, polynomial cost models,
//!   and break-even arithmetic.
//! - [`harness`] — experiment drivers emitting versioned CSV results.
//!
//! Most capabilities have a runnable demo under `examples/`; the `samo`
//! binary exposes the same drivers as CLI subcommands.

pub mod harness;
pub mod optim;
pub mod profile;
pub mod stats;
pub mod surrogate;
pub mod traffic;

pub use profile::TrackingAllocator;
