//! TIR compiler toolchain.
//!
//! TIR is a small, strongly typed, SSA-based intermediate language for FPGA
//! kernels. A program is split into a *manage* section (`launch { ... }`)
//! that declares memory objects, data streams, and index counters, and a
//! *compute* section of functions (`pipe` / `par` / `seq` / `comb`) that
//! describe the datapath. From that single description this crate can:
//!
//! * parse and validate programs ([`parser`], [`analysis`]),
//! * classify them into the configuration classes `C0`..`C6` of the FPGA
//!   design space ([`analysis::classify_config`]),
//! * estimate resource cost (ALUTs, REGs, BRAM bits, DSPs) and throughput
//!   (cycles per kernel, effective work-group throughput) against a device
//!   profile, without synthesis ([`cost`], [`perf`], [`report`]),
//! * execute programs on a reference stream interpreter that doubles as the
//!   functional and cycle-count oracle ([`interp`]).
//!
//! The `tirc` binary fronts all of this with `check`, `estimate`, `compare`
//! and `run` subcommands.

pub mod analysis;
pub mod cost;
pub mod device;
pub mod diag;
pub mod interp;
pub mod ir;
pub mod lexer;
pub mod parser;
pub mod perf;
pub mod report;

/// Throughput values (work-groups per second) as reported by the estimator.
///
/// The performance formulas in [`perf`] are generic over the scalar type;
/// this is the concrete instantiation used everywhere outside of tests.
pub type Rate = f64;

/// Exact cycles-per-instruction value. CPI enters the throughput model as
/// the mean over a function body, so it is kept as a rational, not a float.
pub type Cpi = num_rational::Ratio<u64>;

pub use diag::{Diagnostic, Severity, SourceSpan};
pub use ir::{ConfigClass, CostVector, EstimateReport, PerfParams, Program};
