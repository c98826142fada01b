//! Resource costing: per-instruction lookup, structural accumulation per
//! function kind, and whole-program breakdowns.
//!
//! Accumulation rules:
//!
//! * `comb` — sum of instruction costs with the register component zeroed
//!   (a combinatorial block has no internal registers).
//! * `pipe` — sum of instruction and callee costs, plus one register bit for
//!   every bit of live value crossing every cycle boundary of the ASAP
//!   schedule.
//! * `seq` — functional units are re-used: one unit per opcode at the widest
//!   instance, plus per-instruction overhead for the instruction store
//!   (BRAM) and sequencing control logic (ALUTs/REGs).
//! * `par` — plain replication: the sum over its calls of the callee cost.
//!
//! Program totals add declared memories (`length x width` BRAM bits plus a
//! per-extra-port overhead on multi-ported memories) and stream offset
//! buffers (each read stream with a nonzero offset buffers the offset span
//! of its source group).

use std::collections::HashMap;
use std::fmt;

use crate::analysis::schedule_function;
use crate::device::{DeviceProfile, LookupError};
use crate::ir::*;

#[derive(Debug)]
pub enum CostError {
    Lookup(LookupError),
    Overflow,
    UnsupportedAddressSpace { memory: String, space: AddressSpace },
    UnknownFunction(String),
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::Lookup(e) => write!(f, "{e}"),
            CostError::Overflow => write!(f, "cost accumulation overflowed"),
            CostError::UnsupportedAddressSpace { memory, space } => write!(
                f,
                "memory `@{memory}` lives in addrspace({}); the estimator only supports local memory",
                space.code()
            ),
            CostError::UnknownFunction(name) => write!(f, "unknown function `@{name}`"),
        }
    }
}

impl std::error::Error for CostError {}

impl From<LookupError> for CostError {
    fn from(e: LookupError) -> Self {
        CostError::Lookup(e)
    }
}

impl From<OverflowError> for CostError {
    fn from(_: OverflowError) -> Self {
        CostError::Overflow
    }
}

/// Cost of one instruction from the device database (exact row or linear
/// interpolation between bracketing widths).
pub fn cost_instruction(i: &Instruction, device: &DeviceProfile) -> Result<CostVector, CostError> {
    Ok(device.entry(i.opcode, i.dtype)?.cost_vector())
}

/// Inclusive cost of a function: its own structure plus everything it calls.
pub fn cost_function(
    program: &Program,
    f: &FunctionDef,
    device: &DeviceProfile,
) -> Result<CostVector, CostError> {
    let mut total = own_cost(program, f, device)?;
    for call in f.calls() {
        let callee = program
            .function(&call.target)
            .ok_or_else(|| CostError::UnknownFunction(call.target.clone()))?;
        total = total.cost_add(cost_function(program, callee, device)?)?;
    }
    Ok(total)
}

/// Cost of a function's own structure, excluding callees.
fn own_cost(
    program: &Program,
    f: &FunctionDef,
    device: &DeviceProfile,
) -> Result<CostVector, CostError> {
    match f.kind {
        FuncKind::Comb => {
            let mut total = CostVector::ZERO;
            for i in f.instructions() {
                let mut c = cost_instruction(i, device)?;
                c.regs = 0;
                total = total.cost_add(c)?;
            }
            Ok(total)
        }
        FuncKind::Pipe => {
            let mut total = CostVector::ZERO;
            for i in f.instructions() {
                total = total.cost_add(cost_instruction(i, device)?)?;
            }
            let sched = schedule_function(program, f, device)?;
            total = total.cost_add(CostVector::new(0, sched.register_bits(), 0, 0))?;
            Ok(total)
        }
        FuncKind::Seq => {
            // one shared functional unit per opcode, sized for the widest use
            let mut units: HashMap<Opcode, CostVector> = HashMap::new();
            let mut n_i = 0u64;
            for i in f.instructions() {
                n_i += 1;
                let c = cost_instruction(i, device)?;
                let u = units.entry(i.opcode).or_insert(CostVector::ZERO);
                u.aluts = u.aluts.max(c.aluts);
                u.regs = u.regs.max(c.regs);
                u.bram_bits = u.bram_bits.max(c.bram_bits);
                u.dsps = u.dsps.max(c.dsps);
            }
            let mut total = CostVector::ZERO;
            let mut opcodes: Vec<_> = units.keys().copied().collect();
            opcodes.sort_unstable();
            for op in opcodes {
                total = total.cost_add(units[&op])?;
            }
            let oh = device.seq_overhead;
            let overhead = CostVector::new(
                oh.aluts_per_instr.checked_mul(n_i).ok_or(CostError::Overflow)?,
                oh.regs_per_instr.checked_mul(n_i).ok_or(CostError::Overflow)?,
                oh.instr_word_bits.checked_mul(n_i).ok_or(CostError::Overflow)?,
                0,
            );
            Ok(total.cost_add(overhead)?)
        }
        FuncKind::Par => Ok(CostVector::ZERO),
    }
}

/// Whole-program cost split into its parts; `total` is their exact sum.
#[derive(Debug, Clone)]
pub struct CostBreakdown {
    /// Per reachable function: own cost times instantiation count (a callee
    /// of a `par` wrapper is counted once per call).
    pub per_function: Vec<(String, CostVector)>,
    pub memories: CostVector,
    pub streams: CostVector,
    pub total: CostVector,
}

/// Costs every function reachable from `main`, plus memories and stream
/// offset buffers.
pub fn cost_program(program: &Program, device: &DeviceProfile) -> Result<CostBreakdown, CostError> {
    let mut mult: HashMap<&str, u64> = HashMap::new();
    fn visit<'p>(
        program: &'p Program,
        f: &'p FunctionDef,
        factor: u64,
        mult: &mut HashMap<&'p str, u64>,
    ) -> Result<(), CostError> {
        *mult.entry(f.name.as_str()).or_insert(0) += factor;
        for call in f.calls() {
            let callee = program
                .function(&call.target)
                .ok_or_else(|| CostError::UnknownFunction(call.target.clone()))?;
            visit(program, callee, factor, mult)?;
        }
        Ok(())
    }
    if let Some(main) = program.main() {
        visit(program, main, 1, &mut mult)?;
    }

    let mut per_function = Vec::new();
    let mut total = CostVector::ZERO;
    for f in &program.functions {
        let Some(&m) = mult.get(f.name.as_str()) else { continue };
        let cost = own_cost(program, f, device)?.cost_scale(m)?;
        total = total.cost_add(cost)?;
        per_function.push((f.name.clone(), cost));
    }

    let mut memories = CostVector::ZERO;
    for m in program.memories() {
        if m.space != AddressSpace::Local {
            return Err(CostError::UnsupportedAddressSpace {
                memory: m.name.clone(),
                space: m.space,
            });
        }
        memories = memories.cost_add(CostVector::new(0, 0, m.bram_bits(), 0))?;
        if m.ports > 1 {
            let extra = device
                .multiport_overhead_per_extra_port
                .cost_scale(u64::from(m.ports - 1))?;
            memories = memories.cost_add(extra)?;
        }
    }

    let streams = stream_buffer_cost(program)?;
    total = total.cost_add(memories)?.cost_add(streams)?;

    Ok(CostBreakdown { per_function, memories, streams, total })
}

/// BRAM for stream offset buffers. For each source memory, the offset span
/// is `max(offsets, 0) - min(offsets, 0)` over its read streams; every read
/// stream with a nonzero offset buffers that span at the element width.
fn stream_buffer_cost(program: &Program) -> Result<CostVector, CostError> {
    let mut spans: HashMap<&str, (i64, i64)> = HashMap::new();
    for s in program.streams() {
        if s.direction != Direction::Read {
            continue;
        }
        let e = spans.entry(s.source.as_str()).or_insert((0, 0));
        e.0 = e.0.min(s.offset);
        e.1 = e.1.max(s.offset);
    }
    let mut total = CostVector::ZERO;
    for s in program.streams() {
        if s.direction != Direction::Read || s.offset == 0 {
            continue;
        }
        let (lo, hi) = spans[s.source.as_str()];
        let span = (hi - lo).unsigned_abs();
        let bits = span
            .checked_mul(u64::from(s.elem_type.total_bits))
            .ok_or(CostError::Overflow)?;
        total = total.cost_add(CostVector::new(0, 0, bits, 0))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::parse_device_profile;
    use crate::parser::parse_program;

    fn profile() -> DeviceProfile {
        parse_device_profile(
            "name = cal\nclock_period_ns = 4.0\ncapacity_aluts = 100000\ncapacity_regs = 100000\n\
             capacity_bram_bits = 10000000\ncapacity_dsps = 100\n\
             seq_aluts_per_instr = 16\nseq_regs_per_instr = 8\nseq_instr_word_bits = 32\n\
             multiport_aluts = 50\nmultiport_regs = 20\n\
             op,width,aluts,regs,dsps,cpi\n\
             add,16,16,0,0,1\nadd,18,18,0,0,1\nadd,32,32,0,0,1\n\
             mul,18,28,118,1,1\n\
             shl,18,36,0,0,1\n",
        )
        .unwrap()
    }

    fn kernel(kind: &str, body: &str) -> Program {
        let src = format!(
            "launch {{\n\
             @a = memobj ui18, size 100, addrspace(1)\n\
             @y = memobj ui18, size 100, addrspace(1)\n\
             @sa = streamobj ui18, read @a\n\
             @sy = streamobj ui18, write @y\n\
             call @main\n}}\n\
             define {kind} void @k (ui18 %a, streamin @sa, ui18 %y, streamout @sy) {{\n{body}\n}}\n\
             define seq void @main () {{ call @k () }}"
        );
        let p = parse_program("t.tir", &src).unwrap();
        crate::analysis::validate(&p).unwrap();
        p
    }

    #[test]
    fn instruction_cost_from_exact_row() {
        let p = kernel("comb", "%y = add ui18 %a, %a");
        let f = p.function("k").unwrap();
        let i = f.instructions().next().unwrap();
        assert_eq!(cost_instruction(i, &profile()).unwrap(), CostVector::new(18, 0, 0, 0));
    }

    #[test]
    fn instruction_cost_interpolates_between_widths() {
        let i = Instruction {
            result: "y".into(),
            opcode: Opcode::Add,
            dtype: DataType::unsigned(24),
            operands: vec![Operand::Local("a".into()), Operand::Local("a".into())],
            span: crate::diag::SourceSpan::synthetic(),
        };
        // widths 18 and 32 bracket 24: 18 + 14*6/14 = 24
        assert_eq!(cost_instruction(&i, &profile()).unwrap().aluts, 24);
    }

    #[test]
    fn uncosted_opcode_is_an_error() {
        let p = kernel("comb", "%y = xor ui18 %a, %a");
        let f = p.function("k").unwrap();
        let i = f.instructions().next().unwrap();
        match cost_instruction(i, &profile()) {
            Err(CostError::Lookup(LookupError::UncostedOpcode { opcode })) => {
                assert_eq!(opcode, Opcode::Xor)
            }
            other => panic!("expected uncosted opcode, got {other:?}"),
        }
    }

    #[test]
    fn empty_comb_costs_nothing() {
        let src = "launch {\n@a = memobj ui18, size 4, addrspace(1)\n@sa = streamobj ui18, read @a\ncall @main\n}\n\
                   define comb void @k () {}\ndefine seq void @main () { call @k () }";
        let p = parse_program("t.tir", src).unwrap();
        let f = p.function("k").unwrap();
        assert_eq!(cost_function(&p, f, &profile()).unwrap(), CostVector::ZERO);
    }

    #[test]
    fn pipe_adds_stage_registers_and_dominates_comb() {
        let body = "%t1 = add ui18 %a, %a\n%t2 = mul ui18 %t1, %t1\n%y = add ui18 %t2, 1";
        let as_pipe = kernel("pipe", body);
        let as_comb = kernel("comb", body);
        let dev = profile();
        let pipe_cost = cost_function(&as_pipe, as_pipe.function("k").unwrap(), &dev).unwrap();
        let comb_cost = cost_function(&as_comb, as_comb.function("k").unwrap(), &dev).unwrap();
        assert!(pipe_cost.dominates(&comb_cost));
        // chain of 3: t1 crosses boundary 1, t2 crosses boundary 2 -> 36 regs
        // plus mul's own 118 internal registers
        assert_eq!(pipe_cost.regs, 118 + 36);
        assert_eq!(comb_cost.regs, 0);
    }

    #[test]
    fn seq_reuses_functional_units() {
        // three adds share one adder; BRAM grows linearly with N_I
        let body = "%t1 = add ui18 %a, %a\n%t2 = add ui18 %t1, %t1\n%y = add ui18 %t2, 1";
        let p = kernel("seq", body);
        let dev = profile();
        let cost = cost_function(&p, p.function("k").unwrap(), &dev).unwrap();
        // one ui18 adder (18) + 3 * 16 control aluts
        assert_eq!(cost.aluts, 18 + 3 * 16);
        assert_eq!(cost.bram_bits, 3 * 32);
        // a single-instruction body keeps the same unit cost
        let p1 = kernel("seq", "%y = add ui18 %a, %a");
        let cost1 = cost_function(&p1, p1.function("k").unwrap(), &dev).unwrap();
        assert_eq!(cost1.aluts, 18 + 16);
        assert_eq!(cost.aluts - 18, 3 * 16);
    }

    #[test]
    fn par_replication_is_linear() {
        let src = "launch {\n\
            @a = memobj ui18, size 100, addrspace(1)\n\
            @y = memobj ui18, size 100, addrspace(1)\n\
            @sa1 = streamobj ui18, read @a\n\
            @sa2 = streamobj ui18, read @a\n\
            @sa3 = streamobj ui18, read @a\n\
            @sy1 = streamobj ui18, write @y\n\
            @sy2 = streamobj ui18, write @y\n\
            @sy3 = streamobj ui18, write @y\n\
            call @main\n}\n\
            define pipe void @k (ui18 %a, streamin, ui18 %y, streamout) {\n\
            %t = mul ui18 %a, %a\n%y = add ui18 %t, 1\n}\n\
            define par void @w (ui18 %a1, streamin @sa1, ui18 %a2, streamin @sa2, ui18 %a3, streamin @sa3, ui18 %y1, streamout @sy1, ui18 %y2, streamout @sy2, ui18 %y3, streamout @sy3) {\n\
            call @k (%a1, %y1)\ncall @k (%a2, %y2)\ncall @k (%a3, %y3)\n}\n\
            define seq void @main () { call @w () }";
        let p = parse_program("t.tir", src).unwrap();
        crate::analysis::validate(&p).unwrap();
        let dev = profile();
        let single = cost_function(&p, p.function("k").unwrap(), &dev).unwrap();
        let wrapped = cost_function(&p, p.function("w").unwrap(), &dev).unwrap();
        assert_eq!(wrapped, single.cost_scale(3).unwrap());
    }

    #[test]
    fn program_breakdown_sums_exactly() {
        let body = "%t1 = add ui18 %a, %a\n%y = mul ui18 %t1, %t1";
        let p = kernel("pipe", body);
        let dev = profile();
        let breakdown = cost_program(&p, &dev).unwrap();
        let mut sum = breakdown.memories.cost_add(breakdown.streams).unwrap();
        for (_, c) in &breakdown.per_function {
            sum = sum.cost_add(*c).unwrap();
        }
        assert_eq!(sum, breakdown.total);
        // two 100-element ui18 memories
        assert_eq!(breakdown.memories.bram_bits, 2 * 100 * 18);
    }

    #[test]
    fn multiport_memories_pay_per_extra_port() {
        let src = "launch {\n\
            @a = memobj ui18, size 10, addrspace(1)\n\
            @s1 = streamobj ui18, read @a\n\
            @s2 = streamobj ui18, read @a\n\
            @s3 = streamobj ui18, read @a\n\
            call @main\n}\n\
            define seq void @main () {}";
        let p = parse_program("t.tir", src).unwrap();
        let breakdown = cost_program(&p, &profile()).unwrap();
        // 3 ports -> 2 extra
        assert_eq!(breakdown.memories.aluts, 2 * 50);
        assert_eq!(breakdown.memories.regs, 2 * 20);
        assert_eq!(breakdown.memories.bram_bits, 10 * 18);
    }

    #[test]
    fn offset_streams_buffer_their_span() {
        let src = "launch {\n\
            @u = memobj ui18, size 324, addrspace(1)\n\
            @c = streamobj ui18, read @u\n\
            @n = streamobj ui18, read @u, offset -18\n\
            @s = streamobj ui18, read @u, offset 18\n\
            @w = streamobj ui18, read @u, offset -1\n\
            @e = streamobj ui18, read @u, offset 1\n\
            @o = streamobj ui18, write @u\n\
            call @main\n}\n\
            define seq void @main () {}";
        let p = parse_program("t.tir", src).unwrap();
        let breakdown = cost_program(&p, &profile()).unwrap();
        // span 36 elements; four streams carry nonzero offsets
        assert_eq!(breakdown.streams.bram_bits, 4 * 36 * 18);
    }

    #[test]
    fn non_local_memory_is_rejected_by_the_estimator() {
        let src = "launch {\n\
            @a = memobj ui18, size 10, addrspace(2)\n\
            @s1 = streamobj ui18, read @a\n\
            call @main\n}\n\
            define seq void @main () {}";
        let p = parse_program("t.tir", src).unwrap();
        assert!(matches!(
            cost_program(&p, &profile()),
            Err(CostError::UnsupportedAddressSpace { .. })
        ));
    }

    #[test]
    fn program_without_memories_has_an_empty_memory_bucket() {
        let src = "launch {\n\
            @i = counter 8\n\
            call @main\n}\n\
            define seq void @main () {}";
        let p = parse_program("t.tir", src).unwrap();
        let breakdown = cost_program(&p, &profile()).unwrap();
        assert_eq!(breakdown.memories, CostVector::ZERO);
        assert_eq!(breakdown.streams, CostVector::ZERO);
    }

    #[test]
    fn monotonic_in_added_instructions() {
        let small = kernel("pipe", "%y = add ui18 %a, %a");
        let big = kernel("pipe", "%t = add ui18 %a, %a\n%y = mul ui18 %t, %t");
        let dev = profile();
        let c_small = cost_program(&small, &dev).unwrap().total;
        let c_big = cost_program(&big, &dev).unwrap().total;
        assert!(c_big.dominates(&c_small));
    }
}
