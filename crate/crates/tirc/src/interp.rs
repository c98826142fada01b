//! Reference stream interpreter.
//!
//! Executes a validated program on concrete data, element by element over
//! the index space (the product of the counter ranges, or the input stream
//! length when no counters are declared). It is the functional oracle for
//! the estimator: configuration choices change the cycle count, never the
//! values.
//!
//! Semantics:
//!
//! * a stream with offset `o` delivers element `n + o` at index `n`; an
//!   output index where any offset access of any input stream is out of
//!   range copies the zero-offset input element unchanged (stencil boundary
//!   pass-through);
//! * arithmetic wraps around at the type's total bit width, exactly like the
//!   hardware units (fixed-point multiplies/divides rescale by the
//!   fractional bits);
//! * a top-level `par` wrapper partitions the index space into contiguous
//!   slices, one per call, preserving index order within each lane;
//! * `repeat R` re-runs the kernel R times; a memory bound to both a read
//!   and a write stream double-buffers, so each iteration reads the previous
//!   iteration's output.
//!
//! Cycle accounting assumes unit-latency units: a pipelined kernel of depth
//! `P` over `I` items costs `ceil((P + I) / lanes)` per iteration (fill time
//! amortized across lanes), a combinatorial kernel `1 + I` (or `ceil(I /
//! lanes)` when replicated), and a sequential kernel the executed
//! instruction count of its longest lane.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::analysis::{
    kernel_structure, schedule_function, validate, Lane, ResolvedBinding, StructureError,
    UnitLatency,
};
use crate::diag::Diagnostic;
use crate::ir::*;

/// Concrete input data: one integer column per memory object, raw values in
/// the memory's element type.
#[derive(Debug, Clone, Default)]
pub struct DataSet {
    pub columns: BTreeMap<String, Vec<i128>>,
}

impl DataSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, values: Vec<i128>) {
        self.columns.insert(name.into(), values);
    }

    /// Parses the CSV form: a header row of memory names, then one value row
    /// per element. Shorter columns leave trailing cells empty.
    pub fn from_csv(text: &str) -> Result<DataSet, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or("empty CSV: missing header row")?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if names.iter().any(|n| n.is_empty()) {
            return Err("CSV header contains an empty column name".into());
        }
        let mut columns: Vec<Vec<i128>> = vec![Vec::new(); names.len()];
        for (lineno, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() > names.len() {
                return Err(format!(
                    "CSV row {} has {} cells but the header has {} columns",
                    lineno + 2,
                    cells.len(),
                    names.len()
                ));
            }
            for (j, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    continue;
                }
                let v: i128 = cell
                    .parse()
                    .map_err(|_| format!("CSV row {}: bad integer `{cell}`", lineno + 2))?;
                columns[j].push(v);
            }
        }
        let mut ds = DataSet::new();
        for (name, col) in names.into_iter().zip(columns) {
            if ds.columns.insert(name.clone(), col).is_some() {
                return Err(format!("CSV header repeats column `{name}`"));
            }
        }
        Ok(ds)
    }
}

/// Serializes columns as CSV (header row, then value rows padded to the
/// longest column).
pub fn to_csv(columns: &BTreeMap<String, Vec<i128>>) -> String {
    let names: Vec<&String> = columns.keys().collect();
    let mut out = String::new();
    out.push_str(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","));
    out.push('\n');
    let rows = columns.values().map(|c| c.len()).max().unwrap_or(0);
    for r in 0..rows {
        let mut first = true;
        for name in &names {
            if !first {
                out.push(',');
            }
            first = false;
            if let Some(v) = columns[*name].get(r) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// The product of one execution: final contents of every written memory,
/// the total cycle count, and how many kernel iterations ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub outputs: BTreeMap<String, Vec<i128>>,
    pub cycles: u64,
    pub repeats_executed: u64,
}

impl RunResult {
    /// Cycles of a single kernel iteration (one work-group pass).
    pub fn cycles_per_iteration(&self) -> u64 {
        self.cycles / self.repeats_executed.max(1)
    }
}

#[derive(Debug)]
pub enum RunError {
    Diagnostics(Vec<Diagnostic>),
    Structure(StructureError),
    Shape(String),
    DivisionByZero { function: String, index: u64 },
    NoPassThroughSource { function: String, index: u64 },
    Unsupported(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Diagnostics(ds) => {
                write!(f, "program does not validate ({} diagnostics)", ds.len())
            }
            RunError::Structure(e) => write!(f, "{e}"),
            RunError::Shape(m) => write!(f, "data shape mismatch: {m}"),
            RunError::DivisionByZero { function, index } => {
                write!(f, "division by zero in `@{function}` at index {index}")
            }
            RunError::NoPassThroughSource { function, index } => write!(
                f,
                "boundary at index {index} in `@{function}` but no zero-offset input stream to copy from"
            ),
            RunError::Unsupported(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<StructureError> for RunError {
    fn from(e: StructureError) -> Self {
        RunError::Structure(e)
    }
}

// ---------------------------------------------------------------------------
// wrap-around word arithmetic

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Truncates a wide intermediate to the type's bit width.
pub fn wrap(value: i128, dtype: DataType) -> u64 {
    (value as u64) & mask(dtype.total_bits)
}

/// Reads a raw word back as a signed/unsigned quantity per the type.
pub fn decode(raw: u64, dtype: DataType) -> i128 {
    let raw = raw & mask(dtype.total_bits);
    if dtype.is_signed() && dtype.total_bits < 64 {
        let sign_bit = 1u64 << (dtype.total_bits - 1);
        if raw & sign_bit != 0 {
            return i128::from(raw) - (1i128 << dtype.total_bits);
        }
    } else if dtype.is_signed() {
        return raw as i64 as i128;
    }
    i128::from(raw)
}

/// Encodes a checked in-range value into its raw word.
pub fn encode(value: i128, dtype: DataType) -> u64 {
    wrap(value, dtype)
}

enum ArithError {
    DivByZero,
}

/// Evaluates one opcode on raw words with wrap-around semantics.
fn eval_op(opcode: Opcode, dtype: DataType, ops: &[u64]) -> Result<u64, ArithError> {
    let w = dtype.total_bits;
    let sx = |r: u64| decode(r, dtype);
    let frac = dtype.frac_bits;
    let v = match opcode {
        Opcode::Add => wrap(i128::from(ops[0]).wrapping_add(i128::from(ops[1])), dtype),
        Opcode::Sub => wrap(i128::from(ops[0]).wrapping_sub(i128::from(ops[1])), dtype),
        Opcode::Mul => {
            let prod = sx(ops[0]) * sx(ops[1]);
            let scaled = if dtype.kind == TypeKind::Fixed { prod >> frac } else { prod };
            wrap(scaled, dtype)
        }
        Opcode::Div => {
            if ops[1] & mask(w) == 0 {
                return Err(ArithError::DivByZero);
            }
            match dtype.kind {
                TypeKind::Unsigned => (ops[0] & mask(w)) / (ops[1] & mask(w)),
                TypeKind::Signed => wrap(sx(ops[0]) / sx(ops[1]), dtype),
                TypeKind::Fixed => wrap((sx(ops[0]) << frac) / sx(ops[1]), dtype),
            }
        }
        Opcode::Shl => {
            let amt = ops[1] & mask(w);
            if amt >= 64 {
                0
            } else {
                wrap(i128::from(ops[0]) << amt, dtype)
            }
        }
        Opcode::Shr => {
            let amt = (ops[1] & mask(w)).min(127) as u32;
            if dtype.is_signed() {
                wrap(sx(ops[0]) >> amt, dtype)
            } else if amt >= 64 {
                0
            } else {
                (ops[0] & mask(w)) >> amt
            }
        }
        Opcode::And => ops[0] & ops[1] & mask(w),
        Opcode::Or => (ops[0] | ops[1]) & mask(w),
        Opcode::Xor => (ops[0] ^ ops[1]) & mask(w),
        Opcode::Cmp => {
            if sx(ops[0]) < sx(ops[1]) {
                1
            } else {
                0
            }
        }
        Opcode::Select => {
            if ops[0] & mask(w) != 0 {
                ops[1] & mask(w)
            } else {
                ops[2] & mask(w)
            }
        }
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// engine

/// Counters linearized outer-to-inner with their index strides.
struct CounterTable {
    rows: Vec<(String, u64, u64)>, // name, range, stride
    space: Option<u64>,
}

impl CounterTable {
    fn build(program: &Program) -> CounterTable {
        let counters: Vec<&CounterSpec> = program.counters().collect();
        if counters.is_empty() {
            return CounterTable { rows: Vec::new(), space: None };
        }
        // chains ordered by root declaration; outer before inner
        let mut ordered: Vec<&CounterSpec> = Vec::new();
        for c in &counters {
            if c.nest_parent.is_none() {
                ordered.push(c);
            }
        }
        let mut i = 0;
        while i < ordered.len() {
            let name = ordered[i].name.clone();
            for c in &counters {
                if c.nest_parent.as_deref() == Some(name.as_str()) {
                    ordered.push(c);
                }
            }
            i += 1;
        }
        let mut rows = Vec::with_capacity(ordered.len());
        let mut stride = 1u64;
        for c in ordered.iter().rev() {
            rows.push((c.name.clone(), c.range, stride));
            stride = stride.saturating_mul(c.range);
        }
        rows.reverse();
        CounterTable { rows, space: Some(stride) }
    }

    fn value(&self, name: &str, index: u64) -> Option<u64> {
        self.rows
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, range, stride)| (index / stride) % range)
    }
}

struct Engine<'p> {
    program: &'p Program,
    counters: CounterTable,
    /// Current (readable) buffer per memory.
    current: HashMap<String, Vec<u64>>,
    /// Shadow buffers for memories that are both read and written.
    shadow: HashMap<String, Vec<u64>>,
    index: u64,
    instr_count: u64,
}

impl Engine<'_> {
    fn counter_value(&self, name: &str, dtype: DataType) -> Result<u64, RunError> {
        let v = self
            .counters
            .value(name, self.index)
            .ok_or_else(|| RunError::Unsupported(format!("`@{name}` is not a counter")))?;
        Ok(encode(i128::from(v), dtype))
    }

    fn operand_value(
        &self,
        op: &Operand,
        dtype: DataType,
        env: &HashMap<String, u64>,
        fname: &str,
    ) -> Result<u64, RunError> {
        match op {
            Operand::Local(name) => env.get(name).copied().ok_or_else(|| {
                RunError::Unsupported(format!("`%{name}` undefined in `@{fname}`"))
            }),
            Operand::Global(name) => self.counter_value(name, dtype),
            Operand::Literal(v) => Ok(encode(*v, dtype)),
        }
    }

    /// Evaluates a function body over an environment seeded with its input
    /// port values; returns the full local environment.
    fn eval_function(
        &mut self,
        f: &FunctionDef,
        mut env: HashMap<String, u64>,
    ) -> Result<HashMap<String, u64>, RunError> {
        for item in &f.body {
            match item {
                BodyItem::Instr(i) => {
                    let mut vals = Vec::with_capacity(i.operands.len());
                    for op in &i.operands {
                        vals.push(self.operand_value(op, i.dtype, &env, &f.name)?);
                    }
                    self.instr_count += 1;
                    let v = eval_op(i.opcode, i.dtype, &vals).map_err(|ArithError::DivByZero| {
                        RunError::DivisionByZero { function: f.name.clone(), index: self.index }
                    })?;
                    env.insert(i.result.clone(), v);
                }
                BodyItem::Call(c) => {
                    let callee = self.program.function(&c.target).ok_or_else(|| {
                        RunError::Unsupported(format!("unknown function `@{}`", c.target))
                    })?;
                    if c.args.is_empty() {
                        return Err(RunError::Unsupported(format!(
                            "nested call of `@{}` without arguments inside `@{}`",
                            c.target, f.name
                        )));
                    }
                    let mut callee_env: HashMap<String, u64> = HashMap::new();
                    let mut out_map: Vec<(String, String)> = Vec::new(); // callee port -> caller name
                    for (arg, port) in c.args.iter().zip(&callee.ports) {
                        match port.kind {
                            PortKind::StreamIn | PortKind::ScalarIn => {
                                let v = self.operand_value(arg, port.elem_type, &env, &f.name)?;
                                callee_env.insert(port.name.clone(), v);
                            }
                            PortKind::StreamOut => {
                                if let Operand::Local(name) = arg {
                                    out_map.push((port.name.clone(), name.clone()));
                                }
                            }
                        }
                    }
                    let callee_out = self.eval_function(callee, callee_env)?;
                    for (port_name, caller_name) in out_map {
                        let v = *callee_out.get(&port_name).ok_or_else(|| {
                            RunError::Unsupported(format!(
                                "`@{}` did not produce output `%{port_name}`",
                                callee.name
                            ))
                        })?;
                        env.insert(caller_name, v);
                    }
                }
            }
        }
        Ok(env)
    }
}

/// Memories that are both read and written double-buffer between iterations.
fn double_buffered(program: &Program) -> Vec<String> {
    program
        .memories()
        .filter(|m| {
            let mut read = false;
            let mut written = false;
            for s in program.streams() {
                if s.source == m.name {
                    match s.direction {
                        Direction::Read => read = true,
                        Direction::Write => written = true,
                    }
                }
            }
            read && written
        })
        .map(|m| m.name.clone())
        .collect()
}

/// Executes a validated program on `data`.
pub fn run(program: &Program, data: &DataSet) -> Result<RunResult, RunError> {
    validate(program).map_err(RunError::Diagnostics)?;
    let ks = kernel_structure(program)?;

    // reject data columns that name nothing
    for name in data.columns.keys() {
        if program.memory(name).is_none() {
            return Err(RunError::Shape(format!("column `{name}` names no memory object")));
        }
    }

    // memory buffers
    let mut current: HashMap<String, Vec<u64>> = HashMap::new();
    for m in program.memories() {
        let is_read =
            program.streams().any(|s| s.source == m.name && s.direction == Direction::Read);
        let buf = match data.columns.get(&m.name) {
            Some(col) => {
                if col.len() != m.length as usize {
                    return Err(RunError::Shape(format!(
                        "memory `@{}` holds {} elements but the dataset column has {}",
                        m.name,
                        m.length,
                        col.len()
                    )));
                }
                let mut buf = Vec::with_capacity(col.len());
                for (i, v) in col.iter().enumerate() {
                    if !m.elem_type.contains_raw(*v) {
                        return Err(RunError::Shape(format!(
                            "value {v} at `@{}`[{i}] does not fit {}",
                            m.name, m.elem_type
                        )));
                    }
                    buf.push(encode(*v, m.elem_type));
                }
                buf
            }
            None if is_read => {
                return Err(RunError::Shape(format!(
                    "memory `@{}` is read but the dataset has no column for it",
                    m.name
                )))
            }
            None => vec![0u64; m.length as usize],
        };
        current.insert(m.name.clone(), buf);
    }

    let index_space = index_space(program, &ks.lanes)?;
    let lanes = &ks.lanes;
    let k = lanes.len() as u64;
    let slices: Vec<(u64, u64)> =
        (0..k).map(|j| (j * index_space / k, (j + 1) * index_space / k)).collect();

    let db_names = double_buffered(program);
    let leaf = ks.leaf();
    let pipe_depth = if leaf.kind == FuncKind::Pipe {
        schedule_function(program, leaf, &UnitLatency)
            .map_err(|e| RunError::Unsupported(e.to_string()))?
            .depth
    } else {
        1
    };

    let mut engine = Engine {
        program,
        counters: CounterTable::build(program),
        current,
        shadow: HashMap::new(),
        index: 0,
        instr_count: 0,
    };

    let mut total_cycles = 0u64;
    for _iteration in 0..ks.repeat {
        engine.shadow =
            db_names.iter().map(|n| (n.clone(), engine.current[n].clone())).collect();

        let mut lane_instr_counts = Vec::with_capacity(lanes.len());
        for (lane, &(lo, hi)) in lanes.iter().zip(&slices) {
            let before = engine.instr_count;
            for n in lo..hi {
                engine.index = n;
                step(&mut engine, lane, n)?;
            }
            lane_instr_counts.push(engine.instr_count - before);
        }

        for name in &db_names {
            let buf = engine.shadow.remove(name).expect("shadow buffer");
            engine.current.insert(name.clone(), buf);
        }

        let iter_cycles = match leaf.kind {
            FuncKind::Pipe => (pipe_depth + index_space).div_ceil(k),
            FuncKind::Comb => {
                if k == 1 {
                    1 + index_space
                } else {
                    index_space.div_ceil(k)
                }
            }
            FuncKind::Seq | FuncKind::Par => lane_instr_counts.iter().copied().max().unwrap_or(0),
        }
        .max(1);
        total_cycles += iter_cycles;
    }

    // outputs: every memory any write stream targets, decoded
    let mut outputs = BTreeMap::new();
    for m in program.memories() {
        let written =
            program.streams().any(|s| s.source == m.name && s.direction == Direction::Write);
        if written {
            let buf = &engine.current[&m.name];
            outputs.insert(m.name.clone(), buf.iter().map(|&r| decode(r, m.elem_type)).collect());
        }
    }

    Ok(RunResult { outputs, cycles: total_cycles, repeats_executed: ks.repeat })
}

/// One index step of one lane: gather stream reads, evaluate or pass
/// through, write outputs.
fn step(engine: &mut Engine<'_>, lane: &Lane<'_>, n: u64) -> Result<(), RunError> {
    let program = engine.program;
    let fname = &lane.callee.name;

    let mut env: HashMap<String, u64> = HashMap::new();
    let mut boundary = false;
    let mut pass_value: Option<u64> = None;
    let mut writes: Vec<(String, i64, String)> = Vec::new(); // (stream, offset, port name)

    for (port, binding) in lane.callee.ports.iter().zip(&lane.bindings) {
        match port.kind {
            PortKind::StreamIn => match binding {
                ResolvedBinding::Stream(sname) => {
                    let stream = program
                        .stream(sname)
                        .ok_or_else(|| RunError::Unsupported(format!("unknown stream `@{sname}`")))?;
                    let buf = &engine.current[&stream.source];
                    let idx = n as i64 + stream.offset;
                    if idx < 0 || idx as usize >= buf.len() {
                        boundary = true;
                        continue;
                    }
                    let v = buf[idx as usize];
                    if stream.offset == 0 && pass_value.is_none() {
                        pass_value = Some(v);
                    }
                    env.insert(port.name.clone(), v);
                }
                ResolvedBinding::Counter(cname) => {
                    let v = engine.counter_value(cname, port.elem_type)?;
                    env.insert(port.name.clone(), v);
                }
                ResolvedBinding::Literal(v) => {
                    env.insert(port.name.clone(), encode(*v, port.elem_type));
                }
            },
            PortKind::ScalarIn => {
                let v = match binding {
                    ResolvedBinding::Literal(v) => encode(*v, port.elem_type),
                    ResolvedBinding::Counter(cname) => engine.counter_value(cname, port.elem_type)?,
                    ResolvedBinding::Stream(sname) => {
                        return Err(RunError::Unsupported(format!(
                            "scalar port `%{}` bound to stream `@{sname}`",
                            port.name
                        )))
                    }
                };
                env.insert(port.name.clone(), v);
            }
            PortKind::StreamOut => match binding {
                ResolvedBinding::Stream(sname) => {
                    let stream = program
                        .stream(sname)
                        .ok_or_else(|| RunError::Unsupported(format!("unknown stream `@{sname}`")))?;
                    writes.push((sname.clone(), stream.offset, port.name.clone()));
                }
                _ => {
                    return Err(RunError::Unsupported(format!(
                        "output port `%{}` must be bound to a write stream",
                        port.name
                    )))
                }
            },
        }
    }

    let out_values: Vec<(String, u64)> = if boundary {
        let v = pass_value.ok_or_else(|| RunError::NoPassThroughSource {
            function: fname.clone(),
            index: n,
        })?;
        writes.iter().map(|(_, _, port)| (port.clone(), v)).collect()
    } else {
        let final_env = engine.eval_function(lane.callee, env)?;
        let mut outs = Vec::with_capacity(writes.len());
        for (_, _, port) in &writes {
            let v = *final_env.get(port).ok_or_else(|| {
                RunError::Unsupported(format!("`@{fname}` did not assign output `%{port}`"))
            })?;
            outs.push((port.clone(), v));
        }
        outs
    };

    for ((sname, offset, _), (_, v)) in writes.iter().zip(&out_values) {
        let stream = program.stream(sname).expect("stream resolved above");
        let target = stream.source.clone();
        let idx = n as i64 + offset;
        let buf = match engine.shadow.get_mut(&target) {
            Some(b) => b,
            None => engine
                .current
                .get_mut(&target)
                .ok_or_else(|| RunError::Unsupported(format!("unknown memory `@{target}`")))?,
        };
        if idx >= 0 && (idx as usize) < buf.len() {
            buf[idx as usize] = *v;
        }
    }
    Ok(())
}

/// Index-space size: counter product or the common input stream length.
fn index_space(program: &Program, lanes: &[Lane<'_>]) -> Result<u64, RunError> {
    let table = CounterTable::build(program);
    if let Some(space) = table.space {
        return Ok(space);
    }
    let mut len: Option<u64> = None;
    for lane in lanes {
        for (port, binding) in lane.callee.ports.iter().zip(&lane.bindings) {
            if port.kind != PortKind::StreamIn {
                continue;
            }
            if let ResolvedBinding::Stream(sname) = binding {
                let stream = program
                    .stream(sname)
                    .ok_or_else(|| RunError::Unsupported(format!("unknown stream `@{sname}`")))?;
                let mem = program.memory(&stream.source).ok_or_else(|| {
                    RunError::Unsupported(format!("unknown memory `@{}`", stream.source))
                })?;
                match len {
                    None => len = Some(mem.length),
                    Some(l) if l != mem.length => {
                        return Err(RunError::Shape(format!(
                            "input streams disagree on length: {l} vs {} (`@{sname}`)",
                            mem.length
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    len.ok_or_else(|| {
        RunError::Unsupported("program has neither counters nor input streams".into())
    })
}

/// The deterministic cycle count of a run.
pub fn cycle_count(program: &Program, data: &DataSet) -> Result<u64, RunError> {
    Ok(run(program, data)?.cycles)
}
