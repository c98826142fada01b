//! Dataflow graphs and as-soon-as-possible pipeline scheduling.
//!
//! A pipe function's body is a dependence DAG: one node per instruction or
//! call, with an edge `u -> v` whenever `v` consumes a value `u` defines.
//! ASAP places every node at the earliest cycle its predecessors allow;
//! the latency-weighted depth of the schedule is the pipeline depth `P`.

use std::collections::HashMap;

use crate::device::{DeviceProfile, LookupError};
use crate::ir::{
    BodyItem, DataType, FuncKind, FunctionDef, Opcode, Operand, PortKind, Program,
};

/// Supplies the cycle latency of one instruction. The device profile's CPI
/// column doubles as the latency source; [`UnitLatency`] is the
/// device-independent model the interpreter uses.
pub trait LatencyModel {
    fn latency(&self, opcode: Opcode, dtype: DataType) -> Result<u64, LookupError>;
}

/// Every instruction takes one cycle.
pub struct UnitLatency;

impl LatencyModel for UnitLatency {
    fn latency(&self, _opcode: Opcode, _dtype: DataType) -> Result<u64, LookupError> {
        Ok(1)
    }
}

impl LatencyModel for DeviceProfile {
    fn latency(&self, opcode: Opcode, dtype: DataType) -> Result<u64, LookupError> {
        Ok(self.entry(opcode, dtype)?.cpi)
    }
}

/// The SSA dependence DAG of one function body. Node indices follow body
/// order, which is topological (definitions precede uses).
#[derive(Debug)]
pub struct DataflowGraph<'p> {
    pub function: &'p FunctionDef,
    /// Predecessors (dependencies) per node.
    pub preds: Vec<Vec<usize>>,
    /// Successors (consumers) per node.
    pub succs: Vec<Vec<usize>>,
    /// Values each node defines: `(name, type)`. Instructions define one;
    /// calls define one per output-port argument.
    pub defs: Vec<Vec<(String, DataType)>>,
    /// Value uses per node: `(defining node, value name)`.
    pub uses: Vec<Vec<(usize, String)>>,
}

impl<'p> DataflowGraph<'p> {
    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    /// Nodes with no in-body dependencies (fed by ports/constants only).
    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| self.preds[v].is_empty())
    }

    /// Nodes no other node consumes (their results leave through ports).
    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| self.succs[v].is_empty())
    }

    /// Edge list `(u, v)` with `u` feeding `v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, ps) in self.preds.iter().enumerate() {
            for &u in ps {
                out.push((u, v));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Builds the dependence DAG of `f`'s body. Expects a validated function
/// (definitions precede uses, call arities match).
pub fn build_dfg<'p>(program: &'p Program, f: &'p FunctionDef) -> DataflowGraph<'p> {
    let n = f.body.len();
    let mut def_site: HashMap<String, usize> = HashMap::new();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut defs: Vec<Vec<(String, DataType)>> = vec![Vec::new(); n];
    let mut uses: Vec<Vec<(usize, String)>> = vec![Vec::new(); n];

    for (v, item) in f.body.iter().enumerate() {
        match item {
            BodyItem::Instr(i) => {
                for op in &i.operands {
                    if let Operand::Local(name) = op {
                        if let Some(&u) = def_site.get(name.as_str()) {
                            uses[v].push((u, name.clone()));
                            preds[v].push(u);
                        }
                    }
                }
                defs[v].push((i.result.clone(), i.dtype));
                def_site.insert(i.result.clone(), v);
            }
            BodyItem::Call(c) => {
                let callee = program.function(&c.target);
                for (k, arg) in c.args.iter().enumerate() {
                    let port = callee.and_then(|g| g.ports.get(k));
                    let is_output = matches!(port.map(|p| p.kind), Some(PortKind::StreamOut));
                    match arg {
                        Operand::Local(name) if is_output => {
                            let dtype = port.map(|p| p.elem_type).unwrap_or(DataType::unsigned(1));
                            defs[v].push((name.clone(), dtype));
                        }
                        Operand::Local(name) => {
                            if let Some(&u) = def_site.get(name.as_str()) {
                                uses[v].push((u, name.clone()));
                                preds[v].push(u);
                            }
                        }
                        _ => {}
                    }
                }
                for (name, _) in &defs[v] {
                    def_site.insert(name.clone(), v);
                }
            }
        }
    }

    let mut preds_dedup: Vec<Vec<usize>> = Vec::with_capacity(n);
    for mut ps in preds {
        ps.sort_unstable();
        ps.dedup();
        preds_dedup.push(ps);
    }
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, ps) in preds_dedup.iter().enumerate() {
        for &u in ps {
            succs[u].push(v);
        }
    }
    DataflowGraph { function: f, preds: preds_dedup, succs, defs, uses }
}

/// Core ASAP recurrence on an abstract DAG. `preds[v]` must only contain
/// indices less than `v` (topological node order). Returns the 1-based start
/// stage per node and the total latency-weighted depth
/// (`max_v stage(v) + lat(v) - 1`; 0 for the empty graph).
pub fn asap_stages(preds: &[Vec<usize>], lat: &[u64]) -> (Vec<u64>, u64) {
    assert_eq!(preds.len(), lat.len());
    let mut stage = vec![1u64; preds.len()];
    let mut depth = 0u64;
    for v in 0..preds.len() {
        for &u in &preds[v] {
            debug_assert!(u < v, "nodes must be in topological order");
            stage[v] = stage[v].max(stage[u] + lat[u]);
        }
        depth = depth.max(stage[v] + lat[v] - 1);
    }
    (stage, depth)
}

/// A pipe function's ASAP schedule.
#[derive(Debug, Clone)]
pub struct ScheduledPipeline {
    /// Start cycle (1-based) per body item.
    pub node_stage: Vec<u64>,
    /// Node indices grouped by start cycle; source order within a stage.
    pub stages: Vec<Vec<usize>>,
    /// Pipeline depth P in cycles (at least 1).
    pub depth: u64,
    /// Bits of live values crossing each cycle boundary; entry `c` is the
    /// boundary after cycle `c + 1`, so there are `depth - 1` entries.
    pub stage_widths: Vec<u64>,
}

impl ScheduledPipeline {
    /// Total pipeline-register bits implied by the schedule.
    pub fn register_bits(&self) -> u64 {
        self.stage_widths.iter().sum()
    }
}

/// Latency of calling `f` from a pipeline stage: `comb` and `par`-of-`comb`
/// blocks take one cycle, a nested pipe takes its own depth, a seq block its
/// serialized instruction latency.
pub fn call_latency(
    program: &Program,
    f: &FunctionDef,
    model: &dyn LatencyModel,
) -> Result<u64, LookupError> {
    let lat = match f.kind {
        FuncKind::Comb => 1,
        FuncKind::Pipe => schedule_function(program, f, model)?.depth,
        FuncKind::Seq | FuncKind::Par => {
            let mut total = 0u64;
            let mut maxed = 0u64;
            for item in &f.body {
                let l = match item {
                    BodyItem::Instr(i) => model.latency(i.opcode, i.dtype)?,
                    BodyItem::Call(c) => match program.function(&c.target) {
                        Some(g) => call_latency(program, g, model)?,
                        None => 1,
                    },
                };
                total += l;
                maxed = maxed.max(l);
            }
            // par runs its calls side by side; seq strings them together
            if f.kind == FuncKind::Par {
                maxed
            } else {
                total
            }
        }
    };
    Ok(lat.max(1))
}

/// Schedules one function body ASAP under the given latency model and
/// derives the register bits crossing each cycle boundary.
pub fn schedule_function(
    program: &Program,
    f: &FunctionDef,
    model: &dyn LatencyModel,
) -> Result<ScheduledPipeline, LookupError> {
    let dfg = build_dfg(program, f);
    schedule_asap(program, &dfg, model)
}

/// ASAP-schedules an already-built dataflow graph.
pub fn schedule_asap(
    program: &Program,
    dfg: &DataflowGraph<'_>,
    model: &dyn LatencyModel,
) -> Result<ScheduledPipeline, LookupError> {
    let n = dfg.len();
    let mut lat = Vec::with_capacity(n);
    for item in &dfg.function.body {
        let l = match item {
            BodyItem::Instr(i) => model.latency(i.opcode, i.dtype)?,
            BodyItem::Call(c) => match program.function(&c.target) {
                Some(g) => call_latency(program, g, model)?,
                None => 1,
            },
        };
        lat.push(l);
    }
    let (node_stage, raw_depth) = asap_stages(&dfg.preds, &lat);
    let depth = raw_depth.max(1);

    let mut stages: Vec<Vec<usize>> = Vec::new();
    for (v, &s) in node_stage.iter().enumerate() {
        let idx = (s - 1) as usize;
        if stages.len() <= idx {
            stages.resize_with(idx + 1, Vec::new);
        }
        stages[idx].push(v);
    }

    // Register accounting: a value produced by node u (available at the end
    // of cycle stage(u)+lat(u)-1) and last consumed by a node starting at
    // cycle s occupies every boundary in [avail, s-1]. Stream input ports
    // count as available in cycle 1; scalar constants are hardwired.
    let mut widths = vec![0u64; depth.saturating_sub(1) as usize];
    let mut span = |avail: u64, last_use: u64, bits: u64| {
        let mut c = avail;
        while c < last_use {
            if (1..depth).contains(&c) {
                widths[(c - 1) as usize] += bits;
            }
            c += 1;
        }
    };
    for v in 0..n {
        let avail = node_stage[v] + lat[v] - 1;
        for (name, dtype) in &dfg.defs[v] {
            let last_use = dfg
                .succs[v]
                .iter()
                .filter(|&&w| dfg.uses[w].iter().any(|(u, n2)| *u == v && n2 == name))
                .map(|&w| node_stage[w])
                .max();
            if let Some(last) = last_use {
                span(avail, last, u64::from(dtype.total_bits));
            }
        }
    }
    for port in &dfg.function.ports {
        if port.kind != PortKind::StreamIn {
            continue;
        }
        let consumed_at = dfg
            .function
            .body
            .iter()
            .enumerate()
            .filter(|(_, item)| {
                let ops: Vec<&Operand> = match item {
                    BodyItem::Instr(i) => i.operands.iter().collect(),
                    BodyItem::Call(c) => c.args.iter().collect(),
                };
                ops.iter().any(|op| matches!(op, Operand::Local(n) if *n == port.name))
            })
            .map(|(v, _)| node_stage[v])
            .max();
        if let Some(last) = consumed_at {
            span(1, last, u64::from(port.elem_type.total_bits));
        }
    }

    Ok(ScheduledPipeline { node_stage, stages, depth, stage_widths: widths })
}
