//! Static analysis: validation, dataflow graphs, ASAP scheduling,
//! design-space classification, and performance-parameter extraction.
//!
//! Everything here is a pure function of an immutable [`Program`], so
//! concurrent analysis of shared programs needs no coordination.

mod classify;
mod params;
pub mod schedule;
mod structure;
mod validate;

pub use classify::classify_config;
pub use params::{extract_perf_params, ParamError};
pub use schedule::{
    asap_stages, build_dfg, call_latency, schedule_asap, schedule_function, DataflowGraph,
    LatencyModel, ScheduledPipeline, UnitLatency,
};
pub use structure::{
    kernel_structure, resolve_call, resolve_signature, KernelStructure, Lane, ResolvedBinding,
    StructureError,
};
pub use validate::validate;

use crate::ir::Program;

/// Parses and validates in one step, merging diagnostics.
pub fn check_source(
    file: &str,
    source: &str,
) -> Result<(Program, Vec<crate::diag::Diagnostic>), Vec<crate::diag::Diagnostic>> {
    let program = crate::parser::parse_program(file, source)?;
    let warnings = validate(&program)?;
    Ok((program, warnings))
}
