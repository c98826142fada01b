//! Core IR types. Everything downstream (analysis, cost, perf, interp)
//! operates on these. All values are immutable once constructed, so they can
//! be shared across concurrent analysis tasks without synchronization.

use std::fmt;

use crate::diag::SourceSpan;
use crate::{Cpi, Rate};

/// Scalar number representation. Only integer and fixed-point kinds exist;
/// floating point is rejected at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeKind {
    Unsigned,
    Signed,
    Fixed,
}

/// An element type: `ui<N>`, `i<N>`, or `fix<N>.<F>` with `F < N <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DataType {
    pub kind: TypeKind,
    pub total_bits: u32,
    pub frac_bits: u32,
}

impl DataType {
    pub fn unsigned(bits: u32) -> Self {
        DataType { kind: TypeKind::Unsigned, total_bits: bits, frac_bits: 0 }
    }

    pub fn signed(bits: u32) -> Self {
        DataType { kind: TypeKind::Signed, total_bits: bits, frac_bits: 0 }
    }

    pub fn fixed(total_bits: u32, frac_bits: u32) -> Self {
        DataType { kind: TypeKind::Fixed, total_bits, frac_bits }
    }

    pub fn is_valid(&self) -> bool {
        (1..=64).contains(&self.total_bits)
            && match self.kind {
                TypeKind::Fixed => self.frac_bits < self.total_bits,
                _ => self.frac_bits == 0,
            }
    }

    pub fn is_signed(&self) -> bool {
        !matches!(self.kind, TypeKind::Unsigned)
    }

    /// Smallest raw value representable in this type.
    pub fn min_raw(&self) -> i128 {
        if self.is_signed() {
            -(1i128 << (self.total_bits - 1))
        } else {
            0
        }
    }

    /// Largest raw value representable in this type.
    pub fn max_raw(&self) -> i128 {
        if self.is_signed() {
            (1i128 << (self.total_bits - 1)) - 1
        } else {
            (1i128 << self.total_bits) - 1
        }
    }

    pub fn contains_raw(&self, v: i128) -> bool {
        v >= self.min_raw() && v <= self.max_raw()
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TypeKind::Unsigned => write!(f, "ui{}", self.total_bits),
            TypeKind::Signed => write!(f, "i{}", self.total_bits),
            TypeKind::Fixed => write!(f, "fix{}.{}", self.total_bits, self.frac_bits),
        }
    }
}

/// Memory address spaces. Only `local` (block RAM) is supported by the
/// estimator; the others parse but are flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AddressSpace {
    Host,
    Global,
    Local,
    Private,
    Peer,
}

impl AddressSpace {
    /// Numeric codes used by the `addrspace(N)` qualifier.
    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(AddressSpace::Local),
            2 => Some(AddressSpace::Global),
            3 => Some(AddressSpace::Host),
            4 => Some(AddressSpace::Private),
            5 => Some(AddressSpace::Peer),
            _ => None,
        }
    }

    pub fn code(&self) -> u32 {
        match self {
            AddressSpace::Local => 1,
            AddressSpace::Global => 2,
            AddressSpace::Host => 3,
            AddressSpace::Private => 4,
            AddressSpace::Peer => 5,
        }
    }
}

/// A memory object declared in `launch`: source or sink of streaming data.
#[derive(Debug, Clone)]
pub struct MemoryObject {
    pub name: String,
    pub space: AddressSpace,
    pub elem_type: DataType,
    /// Length in elements.
    pub length: u64,
    /// Number of stream objects bound to this memory (reader/writer
    /// attachments). Filled in by the parser once all streams are known.
    pub ports: u32,
    pub span: SourceSpan,
}

impl MemoryObject {
    /// Block-RAM footprint of the declared storage.
    pub fn bram_bits(&self) -> u64 {
        self.length * u64::from(self.elem_type.total_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Read,
    Write,
}

/// A stream object: a view of a memory object as an index-ordered stream,
/// optionally shifted by a constant element offset (stencil neighbor access).
#[derive(Debug, Clone)]
pub struct StreamObject {
    pub name: String,
    /// Name of the source memory object.
    pub source: String,
    pub direction: Direction,
    pub elem_type: DataType,
    /// Element offset: at index `n` the stream touches element `n + offset`.
    pub offset: i64,
    pub span: SourceSpan,
}

/// An index counter. Nested counters (`nest` chains) describe a
/// multi-dimensional index space; the innermost counter varies fastest.
#[derive(Debug, Clone)]
pub struct CounterSpec {
    pub name: String,
    pub range: u64,
    pub nest_parent: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortKind {
    StreamIn,
    StreamOut,
    ScalarIn,
}

impl fmt::Display for PortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortKind::StreamIn => write!(f, "streamin"),
            PortKind::StreamOut => write!(f, "streamout"),
            PortKind::ScalarIn => write!(f, "scalarin"),
        }
    }
}

/// What a port is wired to. Ports may also be left unbound in the signature,
/// in which case every call site must supply the binding positionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// A stream object (stream-in/stream-out ports).
    Stream(String),
    /// A counter (stream-in ports; delivers the counter value per index).
    Counter(String),
    /// A literal constant (scalar-in ports), raw value in the port's type.
    Literal(i128),
}

/// A function port: named SSA value entering or leaving the datapath.
#[derive(Debug, Clone)]
pub struct Port {
    pub name: String,
    pub kind: PortKind,
    pub binding: Option<Binding>,
    pub elem_type: DataType,
    pub span: SourceSpan,
}

/// Datapath opcodes. `select` is ternary (cond, a, b); everything else is
/// binary. `cmp` is a less-than comparison in the instruction type's
/// signedness, yielding 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    Add,
    Sub,
    Mul,
    Div,
    Shl,
    Shr,
    And,
    Or,
    Xor,
    Select,
    Cmp,
}

impl Opcode {
    pub const ALL: [Opcode; 11] = [
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::Div,
        Opcode::Shl,
        Opcode::Shr,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Select,
        Opcode::Cmp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::Mul => "mul",
            Opcode::Div => "div",
            Opcode::Shl => "shl",
            Opcode::Shr => "shr",
            Opcode::And => "and",
            Opcode::Or => "or",
            Opcode::Xor => "xor",
            Opcode::Select => "select",
            Opcode::Cmp => "cmp",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Opcode::ALL.iter().copied().find(|op| op.as_str() == s)
    }

    /// Number of operands the opcode takes.
    pub fn arity(&self) -> usize {
        match self {
            Opcode::Select => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An instruction or call operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    /// A local SSA value (`%name`): a port, or a prior result.
    Local(String),
    /// A global (`@name`); must resolve to a counter.
    Global(String),
    /// An integer literal, raw value in the instruction type.
    Literal(i128),
}

/// One SSA instruction: `%result = opcode type op, op[, op]`.
#[derive(Debug, Clone)]
pub struct Instruction {
    pub result: String,
    pub opcode: Opcode,
    pub dtype: DataType,
    pub operands: Vec<Operand>,
    pub span: SourceSpan,
}

/// A call in a function body. Arguments bind positionally to the callee's
/// ports: input-port positions consume caller values, output-port positions
/// name the caller values the call defines. An empty argument list means the
/// callee's own port bindings apply.
#[derive(Debug, Clone)]
pub struct Call {
    pub target: String,
    pub args: Vec<Operand>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub enum BodyItem {
    Instr(Instruction),
    Call(Call),
}

impl BodyItem {
    pub fn span(&self) -> &SourceSpan {
        match self {
            BodyItem::Instr(i) => &i.span,
            BodyItem::Call(c) => &c.span,
        }
    }
}

/// Function kinds: pipelined datapath, parallel replication wrapper,
/// sequential instruction processor, single-cycle combinatorial block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FuncKind {
    Pipe,
    Par,
    Seq,
    Comb,
}

impl fmt::Display for FuncKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncKind::Pipe => write!(f, "pipe"),
            FuncKind::Par => write!(f, "par"),
            FuncKind::Seq => write!(f, "seq"),
            FuncKind::Comb => write!(f, "comb"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: String,
    pub kind: FuncKind,
    pub ports: Vec<Port>,
    pub body: Vec<BodyItem>,
    /// `repeat N` attribute if declared. Declared-ness matters for
    /// configuration classification, so the default of 1 is not folded in.
    pub repeat: Option<u64>,
    pub span: SourceSpan,
}

impl FunctionDef {
    pub fn effective_repeat(&self) -> u64 {
        self.repeat.unwrap_or(1)
    }

    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.body.iter().filter_map(|it| match it {
            BodyItem::Instr(i) => Some(i),
            BodyItem::Call(_) => None,
        })
    }

    pub fn calls(&self) -> impl Iterator<Item = &Call> {
        self.body.iter().filter_map(|it| match it {
            BodyItem::Call(c) => Some(c),
            BodyItem::Instr(_) => None,
        })
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }
}

/// A declaration inside `launch { ... }`, in source order.
#[derive(Debug, Clone)]
pub enum LaunchDecl {
    Memory(MemoryObject),
    Stream(StreamObject),
    Counter(CounterSpec),
}

/// A parsed compilation unit: the `launch` section plus compute functions,
/// with `main` as the entry point.
#[derive(Debug, Clone)]
pub struct Program {
    pub launch: Vec<LaunchDecl>,
    pub functions: Vec<FunctionDef>,
}

impl Program {
    pub fn memories(&self) -> impl Iterator<Item = &MemoryObject> {
        self.launch.iter().filter_map(|d| match d {
            LaunchDecl::Memory(m) => Some(m),
            _ => None,
        })
    }

    pub fn streams(&self) -> impl Iterator<Item = &StreamObject> {
        self.launch.iter().filter_map(|d| match d {
            LaunchDecl::Stream(s) => Some(s),
            _ => None,
        })
    }

    pub fn counters(&self) -> impl Iterator<Item = &CounterSpec> {
        self.launch.iter().filter_map(|d| match d {
            LaunchDecl::Counter(c) => Some(c),
            _ => None,
        })
    }

    pub fn memory(&self, name: &str) -> Option<&MemoryObject> {
        self.memories().find(|m| m.name == name)
    }

    pub fn stream(&self, name: &str) -> Option<&StreamObject> {
        self.streams().find(|s| s.name == name)
    }

    pub fn counter(&self, name: &str) -> Option<&CounterSpec> {
        self.counters().find(|c| c.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn main(&self) -> Option<&FunctionDef> {
        self.function("main")
    }

    /// Structural equality, ignoring source spans. This is the identity the
    /// parse/print round-trip preserves.
    pub fn structurally_eq(&self, other: &Program) -> bool {
        if self.launch.len() != other.launch.len() || self.functions.len() != other.functions.len()
        {
            return false;
        }
        let decls_eq = self.launch.iter().zip(&other.launch).all(|(a, b)| match (a, b) {
            (LaunchDecl::Memory(x), LaunchDecl::Memory(y)) => {
                x.name == y.name
                    && x.space == y.space
                    && x.elem_type == y.elem_type
                    && x.length == y.length
            }
            (LaunchDecl::Stream(x), LaunchDecl::Stream(y)) => {
                x.name == y.name
                    && x.source == y.source
                    && x.direction == y.direction
                    && x.elem_type == y.elem_type
                    && x.offset == y.offset
            }
            (LaunchDecl::Counter(x), LaunchDecl::Counter(y)) => {
                x.name == y.name && x.range == y.range && x.nest_parent == y.nest_parent
            }
            _ => false,
        });
        decls_eq && self.functions.iter().zip(&other.functions).all(|(a, b)| func_eq(a, b))
    }
}

fn func_eq(a: &FunctionDef, b: &FunctionDef) -> bool {
    a.name == b.name
        && a.kind == b.kind
        && a.repeat == b.repeat
        && a.ports.len() == b.ports.len()
        && a.body.len() == b.body.len()
        && a.ports.iter().zip(&b.ports).all(|(p, q)| {
            p.name == q.name && p.kind == q.kind && p.binding == q.binding && p.elem_type == q.elem_type
        })
        && a.body.iter().zip(&b.body).all(|(x, y)| match (x, y) {
            (BodyItem::Instr(i), BodyItem::Instr(j)) => {
                i.result == j.result
                    && i.opcode == j.opcode
                    && i.dtype == j.dtype
                    && i.operands == j.operands
            }
            (BodyItem::Call(c), BodyItem::Call(d)) => c.target == d.target && c.args == d.args,
            _ => false,
        })
}

/// Configuration classes of the FPGA design space.
///
/// `C0` generic fallback; `C1` replicated pipelines; `C2` single pipeline;
/// `C3` replicated non-pipelined cores; `C4` scalar instruction processor;
/// `C5` vector instruction processor; `C6` multiple run-time configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigClass {
    C0,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

impl ConfigClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConfigClass::C0 => "C0",
            ConfigClass::C1 => "C1",
            ConfigClass::C2 => "C2",
            ConfigClass::C3 => "C3",
            ConfigClass::C4 => "C4",
            ConfigClass::C5 => "C5",
            ConfigClass::C6 => "C6",
        }
    }
}

impl fmt::Display for ConfigClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The nine symbols of the generic throughput expression.
///
/// Fields are plain so that formula unit tests can build degenerate tuples
/// (e.g. zero work-items); production paths go through [`PerfParams::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerfParams {
    /// L: number of identical pipeline lanes.
    pub lanes: u64,
    /// D_V: degree of vectorization (replicated sequential processors).
    pub vector_degree: u64,
    /// N_R: number of device configurations needed to run the kernel.
    pub num_configs: u64,
    /// T_R: reconfiguration time in seconds (0 unless multi-configuration).
    pub reconfig_time_s: f64,
    /// N_I: instruction count delegated to the instruction processor.
    pub seq_instr_count: u64,
    /// N_to: mean cycles per instruction.
    pub cpi: Cpi,
    /// T: clock period in seconds.
    pub clock_period_s: f64,
    /// P: pipeline depth in cycles.
    pub pipeline_depth: u64,
    /// I: number of work-items in the kernel's index space.
    pub work_items: u64,
}

impl PerfParams {
    /// All-ones baseline; tests override individual fields.
    pub fn unit(clock_period_s: f64) -> Self {
        PerfParams {
            lanes: 1,
            vector_degree: 1,
            num_configs: 1,
            reconfig_time_s: 0.0,
            seq_instr_count: 1,
            cpi: Cpi::from_integer(1),
            clock_period_s,
            pipeline_depth: 1,
            work_items: 1,
        }
    }

    /// Checks the production invariants: everything strictly positive except
    /// the reconfiguration time, which may be zero.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("lanes", self.lanes),
            ("vector_degree", self.vector_degree),
            ("num_configs", self.num_configs),
            ("seq_instr_count", self.seq_instr_count),
            ("pipeline_depth", self.pipeline_depth),
            ("work_items", self.work_items),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.cpi < Cpi::from_integer(1) {
            return Err("cpi must be >= 1".into());
        }
        if self.clock_period_s.is_nan() || self.clock_period_s <= 0.0 {
            return Err("clock_period_s must be positive".into());
        }
        if self.reconfig_time_s.is_nan() || self.reconfig_time_s < 0.0 {
            return Err("reconfig_time_s must be >= 0".into());
        }
        Ok(())
    }
}

/// Componentwise overflow in cost arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverflowError;

impl fmt::Display for OverflowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arithmetic overflow in cost vector")
    }
}

impl std::error::Error for OverflowError {}

/// The four resource axes of the estimator. Forms a commutative monoid
/// under [`CostVector::cost_add`] with [`CostVector::ZERO`] as identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostVector {
    pub aluts: u64,
    pub regs: u64,
    pub bram_bits: u64,
    pub dsps: u64,
}

impl CostVector {
    pub const ZERO: CostVector = CostVector { aluts: 0, regs: 0, bram_bits: 0, dsps: 0 };

    pub fn new(aluts: u64, regs: u64, bram_bits: u64, dsps: u64) -> Self {
        CostVector { aluts, regs, bram_bits, dsps }
    }

    /// Componentwise sum; errors on overflow of any component.
    pub fn cost_add(self, other: CostVector) -> Result<CostVector, OverflowError> {
        Ok(CostVector {
            aluts: self.aluts.checked_add(other.aluts).ok_or(OverflowError)?,
            regs: self.regs.checked_add(other.regs).ok_or(OverflowError)?,
            bram_bits: self.bram_bits.checked_add(other.bram_bits).ok_or(OverflowError)?,
            dsps: self.dsps.checked_add(other.dsps).ok_or(OverflowError)?,
        })
    }

    /// Componentwise scale by `k >= 1`; errors on overflow.
    pub fn cost_scale(self, k: u64) -> Result<CostVector, OverflowError> {
        Ok(CostVector {
            aluts: self.aluts.checked_mul(k).ok_or(OverflowError)?,
            regs: self.regs.checked_mul(k).ok_or(OverflowError)?,
            bram_bits: self.bram_bits.checked_mul(k).ok_or(OverflowError)?,
            dsps: self.dsps.checked_mul(k).ok_or(OverflowError)?,
        })
    }

    /// Componentwise `<=` (used for the device capacity fit check).
    pub fn fits_within(&self, capacity: &CostVector) -> bool {
        self.aluts <= capacity.aluts
            && self.regs <= capacity.regs
            && self.bram_bits <= capacity.bram_bits
            && self.dsps <= capacity.dsps
    }

    /// Componentwise `>=` against another vector.
    pub fn dominates(&self, other: &CostVector) -> bool {
        other.fits_within(self)
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{aluts: {}, regs: {}, bram_bits: {}, dsps: {}}}",
            self.aluts, self.regs, self.bram_bits, self.dsps
        )
    }
}

/// Everything the estimator derives for one program on one device.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub config: ConfigClass,
    pub params: PerfParams,
    /// Whole-program cost (compute + memories + stream buffers).
    pub cost: CostVector,
    pub cycles_per_kernel: u64,
    /// Effective work-group throughput in work-groups per second.
    pub ewgt: Rate,
    pub device: String,
    /// Whether `cost` fits the device capacity componentwise.
    pub fits: bool,
}
