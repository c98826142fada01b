//! Kernel structure resolution: which function actually is the compute
//! kernel, how many lanes replicate it, and what each lane's ports are
//! wired to once call-site arguments are folded in.

use std::fmt;

use crate::ir::{Binding, FuncKind, FunctionDef, Operand, Program};

/// A port binding with call-site arguments resolved away.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedBinding {
    Stream(String),
    Counter(String),
    Literal(i128),
}

/// One instance of the leaf compute function: the callee plus one resolved
/// binding per port (same order as `callee.ports`).
#[derive(Debug, Clone)]
pub struct Lane<'p> {
    pub callee: &'p FunctionDef,
    pub bindings: Vec<ResolvedBinding>,
}

/// The kernel shape reachable from `main`: a single compute function,
/// optionally replicated by a `par` wrapper into lanes.
#[derive(Debug)]
pub struct KernelStructure<'p> {
    /// The function `main` invokes (the `par` wrapper, or the leaf itself).
    pub top: &'p FunctionDef,
    /// Lane instances; a single entry when there is no replication.
    pub lanes: Vec<Lane<'p>>,
    /// Kernel iterations requested via `repeat` on the top function.
    pub repeat: u64,
}

impl<'p> KernelStructure<'p> {
    /// The leaf compute function of the first lane.
    pub fn leaf(&self) -> &'p FunctionDef {
        self.lanes[0].callee
    }

    /// True when all lanes call one and the same function.
    pub fn uniform(&self) -> bool {
        self.lanes.iter().all(|l| std::ptr::eq(l.callee, self.lanes[0].callee))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StructureError {
    NoMain,
    /// `main` does not reduce to a single kernel invocation.
    NotSingleKernel(String),
    UnboundPort { function: String, port: String },
    Unsupported(String),
}

impl fmt::Display for StructureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureError::NoMain => write!(f, "program has no `@main` function"),
            StructureError::NotSingleKernel(m) => write!(f, "{m}"),
            StructureError::UnboundPort { function, port } => write!(
                f,
                "port `%{port}` of `@{function}` is unbound and the call site passes no arguments"
            ),
            StructureError::Unsupported(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for StructureError {}

/// Resolves `func` as called with the given arguments (or from its own
/// signature when `args` is empty), mapping caller-side names through
/// `caller_env` (the caller's resolved port bindings).
fn resolve_instance<'p>(
    program: &'p Program,
    func: &'p FunctionDef,
    args: &[Operand],
    caller_env: &[(String, ResolvedBinding)],
) -> Result<Lane<'p>, StructureError> {
    let mut bindings = Vec::with_capacity(func.ports.len());
    if args.is_empty() {
        for port in &func.ports {
            let b = match &port.binding {
                Some(Binding::Stream(s)) => ResolvedBinding::Stream(s.clone()),
                Some(Binding::Counter(c)) => ResolvedBinding::Counter(c.clone()),
                Some(Binding::Literal(v)) => ResolvedBinding::Literal(*v),
                None => {
                    return Err(StructureError::UnboundPort {
                        function: func.name.clone(),
                        port: port.name.clone(),
                    })
                }
            };
            bindings.push(b);
        }
    } else {
        if args.len() != func.ports.len() {
            return Err(StructureError::Unsupported(format!(
                "call of `@{}` passes {} arguments for {} ports",
                func.name,
                args.len(),
                func.ports.len()
            )));
        }
        for arg in args {
            let b = match arg {
                Operand::Local(name) => caller_env
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, b)| b.clone())
                    .ok_or_else(|| {
                        StructureError::Unsupported(format!(
                            "lane argument `%{name}` is not a caller port"
                        ))
                    })?,
                Operand::Global(name) => {
                    if program.counter(name).is_some() {
                        ResolvedBinding::Counter(name.clone())
                    } else if program.stream(name).is_some() {
                        ResolvedBinding::Stream(name.clone())
                    } else {
                        return Err(StructureError::Unsupported(format!(
                            "lane argument `@{name}` is neither a counter nor a stream"
                        )));
                    }
                }
                Operand::Literal(v) => ResolvedBinding::Literal(*v),
            };
            bindings.push(b);
        }
    }
    Ok(Lane { callee: func, bindings })
}

/// Resolves a function instance from its own signature bindings.
pub fn resolve_signature<'p>(
    program: &'p Program,
    func: &'p FunctionDef,
) -> Result<Lane<'p>, StructureError> {
    resolve_instance(program, func, &[], &[])
}

/// Resolves a call of `callee` with `args`, mapping caller names through
/// `caller_env`.
pub fn resolve_call<'p>(
    program: &'p Program,
    callee: &'p FunctionDef,
    args: &[Operand],
    caller_env: &[(String, ResolvedBinding)],
) -> Result<Lane<'p>, StructureError> {
    resolve_instance(program, callee, args, caller_env)
}

fn env_of(lane: &Lane<'_>) -> Vec<(String, ResolvedBinding)> {
    lane.callee
        .ports
        .iter()
        .zip(&lane.bindings)
        .map(|(p, b)| (p.name.clone(), b.clone()))
        .collect()
}

/// Identifies the kernel structure of a validated program. `main` must
/// reduce to exactly one call; when the callee is a `par` function its
/// calls become the lanes, otherwise the callee is the single lane.
pub fn kernel_structure(program: &Program) -> Result<KernelStructure<'_>, StructureError> {
    let main = program.main().ok_or(StructureError::NoMain)?;
    if main.instructions().next().is_some() {
        return Err(StructureError::NotSingleKernel(
            "`@main` computes directly; expected it to delegate to one kernel function".into(),
        ));
    }
    let calls: Vec<_> = main.calls().collect();
    if calls.len() != 1 {
        return Err(StructureError::NotSingleKernel(format!(
            "`@main` makes {} calls; expected exactly one kernel invocation",
            calls.len()
        )));
    }
    let main_inst = resolve_instance(program, main, &[], &[])?;
    let main_env = env_of(&main_inst);

    let top = program
        .function(&calls[0].target)
        .ok_or_else(|| StructureError::Unsupported(format!("unknown function `@{}`", calls[0].target)))?;
    let top_inst = resolve_instance(program, top, &calls[0].args, &main_env)?;

    let lanes = if top.kind == FuncKind::Par {
        let top_env = env_of(&top_inst);
        let mut lanes = Vec::new();
        for call in top.calls() {
            let callee = program.function(&call.target).ok_or_else(|| {
                StructureError::Unsupported(format!("unknown function `@{}`", call.target))
            })?;
            lanes.push(resolve_instance(program, callee, &call.args, &top_env)?);
        }
        if lanes.is_empty() {
            return Err(StructureError::NotSingleKernel(
                "`par` wrapper contains no calls".into(),
            ));
        }
        lanes
    } else {
        vec![top_inst]
    };

    Ok(KernelStructure { top, lanes, repeat: top.effective_repeat() })
}
