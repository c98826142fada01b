//! Extraction of the nine throughput-model symbols from a validated program.
//!
//! * `L` — lane count when the replicated function is a pipe or comb, else 1.
//! * `D_V` — lane count when the replicated function is a seq, else 1.
//! * `N_I` — instruction count of a seq kernel, else 1.
//! * `N_to` — mean CPI over a seq kernel's instructions (exact rational),
//!   1 for pipelined and combinatorial kernels (initiation interval 1).
//! * `P` — ASAP depth for pipes; 1 for seq/comb kernels.
//! * `I` — product of the counter ranges when counters are declared,
//!   otherwise the common length of the kernel's input streams. Lane
//!   replication does not divide `I`; the per-lane split happens inside the
//!   throughput and cycle formulas.
//! * `N_R`, `T_R` — configuration count and reconfiguration time; 1 and 0
//!   unless the program declares multiple repeat-partitioned configurations.
//! * `T` — device clock period.

use std::fmt;

use crate::device::{DeviceProfile, LookupError};
use crate::ir::{ConfigClass, FuncKind, FunctionDef, PerfParams, Program};
use crate::Cpi;

use super::classify::classify_config;
use super::schedule::schedule_function;
use super::structure::{kernel_structure, Lane, ResolvedBinding, StructureError};

#[derive(Debug)]
pub enum ParamError {
    Structure(StructureError),
    Lookup(LookupError),
    InconsistentStreamLengths { lengths: Vec<(String, u64)> },
    NoIndexSpace,
    ZeroLengthStream { stream: String },
    Invalid(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::Structure(e) => write!(f, "{e}"),
            ParamError::Lookup(e) => write!(f, "{e}"),
            ParamError::InconsistentStreamLengths { lengths } => {
                write!(f, "input streams disagree on length:")?;
                for (name, len) in lengths {
                    write!(f, " @{name}={len}")?;
                }
                Ok(())
            }
            ParamError::NoIndexSpace => {
                write!(f, "program has neither counters nor input streams to define an index space")
            }
            ParamError::ZeroLengthStream { stream } => {
                write!(f, "stream `@{stream}` has zero length")
            }
            ParamError::Invalid(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ParamError {}

impl From<StructureError> for ParamError {
    fn from(e: StructureError) -> Self {
        ParamError::Structure(e)
    }
}

impl From<LookupError> for ParamError {
    fn from(e: LookupError) -> Self {
        ParamError::Lookup(e)
    }
}

/// Mean CPI over a function's own instructions; 1 for an empty body.
fn mean_cpi(f: &FunctionDef, device: &DeviceProfile) -> Result<Cpi, ParamError> {
    let mut total = 0u64;
    let mut count = 0u64;
    for i in f.instructions() {
        total += device.entry(i.opcode, i.dtype)?.cpi;
        count += 1;
    }
    if count == 0 {
        Ok(Cpi::from_integer(1))
    } else {
        Ok(Cpi::new(total, count))
    }
}

/// The index-space size: product of all counter ranges, or the common input
/// stream length of the kernel lanes.
fn work_items(program: &Program, lanes: &[Lane<'_>]) -> Result<u64, ParamError> {
    let mut counter_space: Option<u64> = None;
    for c in program.counters() {
        let acc = counter_space.get_or_insert(1);
        *acc = acc
            .checked_mul(c.range)
            .ok_or_else(|| ParamError::Invalid("counter index space overflows".into()))?;
    }
    if let Some(space) = counter_space {
        return Ok(space);
    }

    let mut lengths: Vec<(String, u64)> = Vec::new();
    for lane in lanes {
        for (port, binding) in lane.callee.ports.iter().zip(&lane.bindings) {
            if port.kind != crate::ir::PortKind::StreamIn {
                continue;
            }
            if let ResolvedBinding::Stream(name) = binding {
                if let Some(stream) = program.stream(name) {
                    if let Some(mem) = program.memory(&stream.source) {
                        if mem.length == 0 {
                            return Err(ParamError::ZeroLengthStream { stream: name.clone() });
                        }
                        lengths.push((name.clone(), mem.length));
                    }
                }
            }
        }
    }
    let Some((_, first)) = lengths.first() else {
        return Err(ParamError::NoIndexSpace);
    };
    if lengths.iter().any(|(_, l)| l != first) {
        return Err(ParamError::InconsistentStreamLengths { lengths });
    }
    Ok(*first)
}

/// Extracts [`PerfParams`] for a validated program against a device profile.
pub fn extract_perf_params(
    program: &Program,
    device: &DeviceProfile,
) -> Result<PerfParams, ParamError> {
    let class = classify_config(program);

    // Multi-configuration programs: parameters come from the first
    // configuration; N_R counts them all.
    let (lanes, repeat_calls) = if class == ConfigClass::C6 {
        let main = program.main().ok_or(StructureError::NoMain)?;
        let calls: Vec<_> = main.calls().collect();
        let first = program
            .function(&calls[0].target)
            .ok_or_else(|| StructureError::Unsupported("unknown configuration target".into()))?;
        let sub = sub_structure(program, first)?;
        (sub, calls.len() as u64)
    } else {
        let ks = kernel_structure(program)?;
        (ks.lanes, 1)
    };

    let leaf = lanes[0].callee;
    let k = lanes.len() as u64;
    let (l, d_v) = match leaf.kind {
        FuncKind::Seq => (1, k),
        _ => (k, 1),
    };
    let (n_i, cpi) = if leaf.kind == FuncKind::Seq {
        let count = leaf.instructions().count() as u64;
        (count.max(1), mean_cpi(leaf, device)?)
    } else {
        (1, Cpi::from_integer(1))
    };
    let pipeline_depth = if leaf.kind == FuncKind::Pipe {
        schedule_function(program, leaf, device)?.depth
    } else {
        1
    };
    let work_items = work_items(program, &lanes)?;

    let params = PerfParams {
        lanes: l,
        vector_degree: d_v,
        num_configs: repeat_calls,
        reconfig_time_s: if class == ConfigClass::C6 { device.reconfig_time_s } else { 0.0 },
        seq_instr_count: n_i,
        cpi,
        clock_period_s: device.clock_period_s,
        pipeline_depth,
        work_items,
    };
    params.validate().map_err(ParamError::Invalid)?;
    Ok(params)
}

/// Lanes of a function taken as a kernel top (used for C6 configurations).
fn sub_structure<'p>(
    program: &'p Program,
    top: &'p FunctionDef,
) -> Result<Vec<Lane<'p>>, ParamError> {
    if top.kind == FuncKind::Par {
        // Reuse the main resolver by treating the par's own bindings as env.
        let ks = kernel_structure_from(program, top)?;
        Ok(ks)
    } else {
        let lane = super::structure::resolve_signature(program, top)?;
        Ok(vec![lane])
    }
}

fn kernel_structure_from<'p>(
    program: &'p Program,
    par: &'p FunctionDef,
) -> Result<Vec<Lane<'p>>, ParamError> {
    let par_inst = super::structure::resolve_signature(program, par)?;
    let env: Vec<(String, ResolvedBinding)> = par
        .ports
        .iter()
        .zip(&par_inst.bindings)
        .map(|(p, b)| (p.name.clone(), b.clone()))
        .collect();
    let mut lanes = Vec::new();
    for call in par.calls() {
        let callee = program.function(&call.target).ok_or_else(|| {
            ParamError::Structure(StructureError::Unsupported(format!(
                "unknown function `@{}`",
                call.target
            )))
        })?;
        lanes.push(super::structure::resolve_call(program, callee, &call.args, &env)?);
    }
    if lanes.is_empty() {
        return Err(ParamError::Structure(StructureError::NotSingleKernel(
            "`par` wrapper contains no calls".into(),
        )));
    }
    Ok(lanes)
}
