//! Deterministic, total classification of a program into the design-space
//! configuration classes.
//!
//! Rules, applied to `@main`'s body:
//!
//! * one call to a `pipe` function → `C2`; to a `seq` function → `C4`;
//! * one call to a `par` wrapper of k >= 2 identical calls: target `pipe` →
//!   `C1`, `seq` → `C5`, `comb` → `C3`;
//! * two or more calls, each target declaring `repeat` (explicitly
//!   partitioned configurations) → `C6`;
//! * anything else → `C0`.
//!
//! Classification looks at structure only, so it is invariant under
//! function renaming and declaration reordering.

use crate::ir::{BodyItem, ConfigClass, FuncKind, Program};

pub fn classify_config(program: &Program) -> ConfigClass {
    let Some(main) = program.main() else {
        return ConfigClass::C0;
    };
    if main.instructions().next().is_some() {
        return ConfigClass::C0;
    }
    let calls: Vec<_> = main.calls().collect();
    match calls.len() {
        1 => {
            let Some(top) = program.function(&calls[0].target) else {
                return ConfigClass::C0;
            };
            match top.kind {
                FuncKind::Pipe => ConfigClass::C2,
                FuncKind::Seq => ConfigClass::C4,
                FuncKind::Comb => ConfigClass::C0,
                FuncKind::Par => classify_par(program, top),
            }
        }
        n if n >= 2 => {
            let all_repeat = calls.iter().all(|c| {
                program.function(&c.target).is_some_and(|f| f.repeat.is_some())
            });
            if all_repeat {
                ConfigClass::C6
            } else {
                ConfigClass::C0
            }
        }
        _ => ConfigClass::C0,
    }
}

fn classify_par(program: &Program, par: &crate::ir::FunctionDef) -> ConfigClass {
    if par.body.iter().any(|it| matches!(it, BodyItem::Instr(_))) {
        return ConfigClass::C0;
    }
    let calls: Vec<_> = par.calls().collect();
    if calls.len() < 2 {
        return ConfigClass::C0;
    }
    let first = &calls[0].target;
    if !calls.iter().all(|c| &c.target == first) {
        return ConfigClass::C0;
    }
    match program.function(first).map(|f| f.kind) {
        Some(FuncKind::Pipe) => ConfigClass::C1,
        Some(FuncKind::Seq) => ConfigClass::C5,
        Some(FuncKind::Comb) => ConfigClass::C3,
        _ => ConfigClass::C0,
    }
}
