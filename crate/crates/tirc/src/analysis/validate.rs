//! Static validation: SSA single assignment, strong typing, binding-kind
//! agreement, body-shape restrictions, and call-graph acyclicity.
//!
//! Runs after parsing (which already guarantees name resolution) and before
//! anything that consumes a program. Returns the accumulated warnings on
//! success, or all diagnostics on failure.

use std::collections::{HashMap, HashSet};

use crate::diag::{codes, has_errors, Diagnostic};
use crate::ir::*;

pub fn validate(program: &Program) -> Result<Vec<Diagnostic>, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    check_launch(program, &mut diags);
    check_call_graph(program, &mut diags);
    for f in &program.functions {
        check_function(program, f, &mut diags);
    }
    if let Some(main) = program.main() {
        for port in &main.ports {
            if port.binding.is_none() {
                diags.push(Diagnostic::error(
                    port.span.clone(),
                    codes::UNBOUND_PORT,
                    format!("`@main` port `%{}` must be bound (launch calls it without arguments)", port.name),
                ));
            }
        }
    }

    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(diags)
    }
}

fn check_launch(program: &Program, diags: &mut Vec<Diagnostic>) {
    for s in program.streams() {
        if let Some(mem) = program.memory(&s.source) {
            if mem.elem_type != s.elem_type {
                diags.push(Diagnostic::error(
                    s.span.clone(),
                    codes::TYPE_MISMATCH,
                    format!(
                        "stream `@{}` is {} but memory `@{}` holds {}",
                        s.name, s.elem_type, s.source, mem.elem_type
                    ),
                ));
            }
            if s.offset.unsigned_abs() >= mem.length {
                diags.push(Diagnostic::error(
                    s.span.clone(),
                    codes::BAD_OFFSET,
                    format!(
                        "offset {} of stream `@{}` exceeds the length {} of memory `@{}`",
                        s.offset, s.name, mem.length, s.source
                    ),
                ));
            }
        }
    }

    for m in program.memories() {
        if m.ports == 0 {
            diags.push(Diagnostic::error(
                m.span.clone(),
                codes::UNUSED_MEMORY,
                format!("memory `@{}` has no stream objects bound to it", m.name),
            ));
        }
        if m.space != AddressSpace::Local {
            diags.push(Diagnostic::warning(
                m.span.clone(),
                codes::UNSUPPORTED_ADDRSPACE,
                format!(
                    "memory `@{}` uses addrspace({}); the estimator only supports local memory (addrspace(1))",
                    m.name,
                    m.space.code()
                ),
            ));
        }
    }

    // counter nesting must form a tree
    for c in program.counters() {
        let mut seen = HashSet::new();
        seen.insert(c.name.as_str());
        let mut cur = c.nest_parent.as_deref();
        while let Some(p) = cur {
            if !seen.insert(p) {
                diags.push(Diagnostic::error(
                    c.span.clone(),
                    codes::CYCLIC_NEST,
                    format!("counter `@{}` participates in a nesting cycle", c.name),
                ));
                break;
            }
            cur = program.counter(p).and_then(|pc| pc.nest_parent.as_deref());
        }
    }
}

fn check_call_graph(program: &Program, diags: &mut Vec<Diagnostic>) {
    // DFS over the call graph; gray nodes on the stack indicate a cycle.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let mut marks: HashMap<&str, Mark> = program
        .functions
        .iter()
        .map(|f| (f.name.as_str(), Mark::White))
        .collect();

    fn dfs<'p>(
        program: &'p Program,
        name: &'p str,
        marks: &mut HashMap<&'p str, Mark>,
        diags: &mut Vec<Diagnostic>,
    ) {
        marks.insert(name, Mark::Gray);
        if let Some(f) = program.function(name) {
            for call in f.calls() {
                match marks.get(call.target.as_str()) {
                    Some(Mark::Gray) => diags.push(Diagnostic::error(
                        call.span.clone(),
                        codes::CYCLIC_CALL,
                        format!("call graph cycle through `@{}`", call.target),
                    )),
                    Some(Mark::White) => {
                        if let Some(g) = program.function(&call.target) {
                            dfs(program, &g.name, marks, diags);
                        }
                    }
                    _ => {}
                }
            }
        }
        marks.insert(name, Mark::Black);
    }

    for f in &program.functions {
        if marks[f.name.as_str()] == Mark::White {
            dfs(program, &f.name, &mut marks, diags);
        }
    }
}

/// Value types visible inside a function body while walking it in order.
struct Env<'p> {
    program: &'p Program,
    types: HashMap<String, DataType>,
}

impl Env<'_> {
    fn counter_fits(&self, name: &str, dtype: DataType) -> Option<bool> {
        let c = self.program.counter(name)?;
        let max = c.range - 1;
        Some(i128::from(max) <= dtype.max_raw())
    }
}

fn check_function(program: &Program, f: &FunctionDef, diags: &mut Vec<Diagnostic>) {
    let mut port_names = HashSet::new();
    for port in &f.ports {
        if !port_names.insert(port.name.as_str()) {
            diags.push(Diagnostic::error(
                port.span.clone(),
                codes::DUPLICATE_NAME,
                format!("duplicate port `%{}` in `@{}`", port.name, f.name),
            ));
        }
        check_port_binding(program, port, diags);
    }

    // body-shape restrictions
    for item in &f.body {
        match (f.kind, item) {
            (FuncKind::Par, BodyItem::Instr(i)) => diags.push(Diagnostic::error(
                i.span.clone(),
                codes::ILLEGAL_BODY,
                format!("`par` function `@{}` may only contain calls", f.name),
            )),
            (FuncKind::Comb, BodyItem::Call(c)) => diags.push(Diagnostic::error(
                c.span.clone(),
                codes::ILLEGAL_BODY,
                format!("`comb` function `@{}` may only contain instructions", f.name),
            )),
            _ => {}
        }
    }

    let mut env = Env { program, types: HashMap::new() };
    let mut outputs: HashMap<&str, (DataType, bool)> = HashMap::new(); // name -> (type, assigned)
    for port in &f.ports {
        match port.kind {
            PortKind::StreamIn | PortKind::ScalarIn => {
                env.types.insert(port.name.clone(), port.elem_type);
            }
            PortKind::StreamOut => {
                outputs.insert(&port.name, (port.elem_type, false));
            }
        }
    }

    for item in &f.body {
        match item {
            BodyItem::Instr(i) => check_instr(program, f, i, &mut env, &mut outputs, diags),
            BodyItem::Call(c) => check_call(program, f, c, &mut env, &mut outputs, diags),
        }
    }

    for (name, (_, assigned)) in &outputs {
        if !assigned {
            diags.push(Diagnostic::error(
                f.span.clone(),
                codes::UNASSIGNED_OUTPUT,
                format!("output port `%{name}` of `@{}` is never assigned", f.name),
            ));
        }
    }
}

fn check_port_binding(program: &Program, port: &Port, diags: &mut Vec<Diagnostic>) {
    let Some(binding) = &port.binding else { return };
    match (port.kind, binding) {
        (PortKind::StreamIn, Binding::Stream(name)) => {
            if let Some(s) = program.stream(name) {
                if s.direction != Direction::Read {
                    diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::BINDING_KIND,
                        format!("stream-in port `%{}` must bind a read stream, `@{name}` is a write stream", port.name),
                    ));
                }
                if s.elem_type != port.elem_type {
                    diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::TYPE_MISMATCH,
                        format!(
                            "port `%{}` is {} but stream `@{name}` is {}",
                            port.name, port.elem_type, s.elem_type
                        ),
                    ));
                }
            }
        }
        (PortKind::StreamIn, Binding::Counter(name)) => {
            if let Some(c) = program.counter(name) {
                if i128::from(c.range - 1) > port.elem_type.max_raw() {
                    diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::TYPE_MISMATCH,
                        format!(
                            "counter `@{name}` counts to {} which does not fit port type {}",
                            c.range - 1,
                            port.elem_type
                        ),
                    ));
                }
            }
        }
        (PortKind::StreamOut, Binding::Stream(name)) => {
            if let Some(s) = program.stream(name) {
                if s.direction != Direction::Write {
                    diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::BINDING_KIND,
                        format!("stream-out port `%{}` must bind a write stream, `@{name}` is a read stream", port.name),
                    ));
                }
                if s.elem_type != port.elem_type {
                    diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::TYPE_MISMATCH,
                        format!(
                            "port `%{}` is {} but stream `@{name}` is {}",
                            port.name, port.elem_type, s.elem_type
                        ),
                    ));
                }
            }
        }
        (PortKind::ScalarIn, Binding::Literal(v)) => {
            if !port.elem_type.contains_raw(*v) {
                diags.push(Diagnostic::error(
                    port.span.clone(),
                    codes::TYPE_MISMATCH,
                    format!("literal {v} does not fit scalar port type {}", port.elem_type),
                ));
            }
        }
        (kind, bad) => {
            let what = match bad {
                Binding::Stream(n) | Binding::Counter(n) => format!("`@{n}`"),
                Binding::Literal(v) => format!("literal {v}"),
            };
            diags.push(Diagnostic::error(
                port.span.clone(),
                codes::BINDING_KIND,
                format!("{kind} port `%{}` cannot bind {what}", port.name),
            ));
        }
    }
}

fn check_operand(
    what: &str,
    op: &Operand,
    expected: DataType,
    env: &Env<'_>,
    span: &crate::diag::SourceSpan,
    diags: &mut Vec<Diagnostic>,
) {
    match op {
        Operand::Local(name) => match env.types.get(name) {
            Some(t) if *t == expected => {}
            Some(t) => diags.push(Diagnostic::error(
                span.clone(),
                codes::TYPE_MISMATCH,
                format!("{what} `%{name}` is {t}, expected {expected}"),
            )),
            None => diags.push(Diagnostic::error(
                span.clone(),
                codes::UNDEFINED_IDENTIFIER,
                format!("{what} `%{name}` is not defined at this point"),
            )),
        },
        Operand::Global(name) => match env.counter_fits(name, expected) {
            Some(true) => {}
            Some(false) => diags.push(Diagnostic::error(
                span.clone(),
                codes::TYPE_MISMATCH,
                format!("counter `@{name}` does not fit in {expected}"),
            )),
            None => diags.push(Diagnostic::error(
                span.clone(),
                codes::BINDING_KIND,
                format!("{what} `@{name}` must name a counter"),
            )),
        },
        Operand::Literal(v) => {
            if !expected.contains_raw(*v) {
                diags.push(Diagnostic::error(
                    span.clone(),
                    codes::TYPE_MISMATCH,
                    format!("literal {v} does not fit {expected}"),
                ));
            }
        }
    }
}

fn define_result(
    f: &FunctionDef,
    name: &str,
    dtype: DataType,
    span: &crate::diag::SourceSpan,
    env: &mut Env<'_>,
    outputs: &mut HashMap<&str, (DataType, bool)>,
    diags: &mut Vec<Diagnostic>,
) {
    if env.types.contains_key(name) {
        diags.push(Diagnostic::error(
            span.clone(),
            codes::DOUBLE_ASSIGNMENT,
            format!("`%{name}` is assigned more than once in `@{}`", f.name),
        ));
        return;
    }
    if let Some((out_ty, assigned)) = outputs.get_mut(name) {
        if *assigned {
            diags.push(Diagnostic::error(
                span.clone(),
                codes::DOUBLE_ASSIGNMENT,
                format!("output port `%{name}` is assigned more than once in `@{}`", f.name),
            ));
            return;
        }
        if *out_ty != dtype {
            diags.push(Diagnostic::error(
                span.clone(),
                codes::TYPE_MISMATCH,
                format!("output port `%{name}` is {out_ty} but is assigned a {dtype} value"),
            ));
        }
        *assigned = true;
    }
    env.types.insert(name.to_string(), dtype);
}

fn check_instr(
    _program: &Program,
    f: &FunctionDef,
    i: &Instruction,
    env: &mut Env<'_>,
    outputs: &mut HashMap<&str, (DataType, bool)>,
    diags: &mut Vec<Diagnostic>,
) {
    if i.operands.len() != i.opcode.arity() {
        diags.push(Diagnostic::error(
            i.span.clone(),
            codes::OP_ARITY,
            format!(
                "`{}` takes {} operands, {} given",
                i.opcode,
                i.opcode.arity(),
                i.operands.len()
            ),
        ));
    }
    for op in &i.operands {
        check_operand("operand", op, i.dtype, env, &i.span, diags);
    }
    define_result(f, &i.result, i.dtype, &i.span, env, outputs, diags);
}

fn check_call(
    program: &Program,
    f: &FunctionDef,
    c: &Call,
    env: &mut Env<'_>,
    outputs: &mut HashMap<&str, (DataType, bool)>,
    diags: &mut Vec<Diagnostic>,
) {
    let Some(callee) = program.function(&c.target) else { return };

    if c.args.is_empty() {
        for port in &callee.ports {
            if port.binding.is_none() {
                diags.push(Diagnostic::error(
                    c.span.clone(),
                    codes::UNBOUND_PORT,
                    format!(
                        "call of `@{}` passes no arguments but its port `%{}` is unbound",
                        callee.name, port.name
                    ),
                ));
            }
        }
        return;
    }

    if c.args.len() != callee.ports.len() {
        diags.push(Diagnostic::error(
            c.span.clone(),
            codes::CALL_ARITY,
            format!(
                "`@{}` has {} ports but the call passes {} arguments",
                callee.name,
                callee.ports.len(),
                c.args.len()
            ),
        ));
        return;
    }

    for (arg, port) in c.args.iter().zip(&callee.ports) {
        match port.kind {
            PortKind::StreamIn | PortKind::ScalarIn => {
                check_operand("argument", arg, port.elem_type, env, &c.span, diags);
            }
            PortKind::StreamOut => match arg {
                Operand::Local(name) => {
                    define_result(f, name, port.elem_type, &c.span, env, outputs, diags);
                }
                _ => diags.push(Diagnostic::error(
                    c.span.clone(),
                    codes::BINDING_KIND,
                    format!(
                        "output argument for port `%{}` of `@{}` must be a local name",
                        port.name, callee.name
                    ),
                )),
            },
        }
    }
}
