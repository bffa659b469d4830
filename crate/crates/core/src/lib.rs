//! Fitness-level runtime analysis of the (1+1) EA.
//!
//! The crate has five layers:
//!
//! * [`ea`] and [`bitstring`]: the algorithm itself.
//! * [`benchmarks`]: OneMax, LeadingOnes, Jump and long k-paths with their
//!   canonical level partitions.
//! * [`level_chain`] and [`full_state`]: exact Markov-chain oracles.
//! * [`bounds`] and [`closed_forms`]: fitness-level bound calculators and
//!   per-benchmark formulas.
//! * [`experiment`], [`report`], [`output`], [`cli`]: the Monte Carlo harness
//!   and the `flm` command line tool.

pub mod benchmarks;
pub mod bitstring;
pub mod bounds;
pub mod cli;
pub mod closed_forms;
pub mod ea;
pub mod error;
pub mod experiment;
pub mod full_state;
pub mod level_chain;
pub mod numeric;
pub mod output;
pub mod report;

pub use benchmarks::{Benchmark, BenchmarkKind, LevelFunction, LongKPath};
pub use bitstring::BitString;
pub use bounds::{BoundKind, BoundResult, FlmInput, Theorem};
pub use ea::{run_ea, EaConfig, Init, RunResult};
pub use error::{Error, Result};
pub use level_chain::{LevelChain, StartMode};
