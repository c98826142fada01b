//! Source spans and diagnostics.
//!
//! Every diagnostic renders as `file:line:col: severity[code]: message`,
//! which is the format the CLI prints to stderr.

use std::fmt;
use std::sync::Arc;

/// A location in a source file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, line: u32, col: u32, len: u32) -> Self {
        SourceSpan { file, line, col, len }
    }

    /// Span for nodes that have no real source location (generated programs).
    pub fn synthetic() -> Self {
        SourceSpan { file: Arc::from("<synthetic>"), line: 1, col: 1, len: 0 }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// Diagnostic codes, kebab-case short identifiers.
pub mod codes {
    pub const ILLEGAL_TOKEN: &str = "illegal-token";
    pub const UNEXPECTED_TOKEN: &str = "unexpected-token";
    pub const DUPLICATE_NAME: &str = "duplicate-name";
    pub const MISSING_LAUNCH: &str = "missing-launch";
    pub const MISSING_MAIN: &str = "missing-main";
    pub const UNDEFINED_NAME: &str = "undefined-name";
    pub const BAD_WIDTH: &str = "bad-width";
    pub const BAD_VALUE: &str = "bad-value";
    pub const DOUBLE_ASSIGNMENT: &str = "double-assignment";
    pub const UNDEFINED_IDENTIFIER: &str = "undefined-identifier";
    pub const TYPE_MISMATCH: &str = "type-mismatch";
    pub const ILLEGAL_BODY: &str = "illegal-body";
    pub const CYCLIC_CALL: &str = "cyclic-call";
    pub const CYCLIC_NEST: &str = "cyclic-nest";
    pub const BINDING_KIND: &str = "binding-kind";
    pub const BAD_OFFSET: &str = "bad-offset";
    pub const OP_ARITY: &str = "op-arity";
    pub const CALL_ARITY: &str = "call-arity";
    pub const UNBOUND_PORT: &str = "unbound-port";
    pub const UNASSIGNED_OUTPUT: &str = "unassigned-output";
    pub const UNUSED_MEMORY: &str = "unused-memory";
    pub const UNSUPPORTED_ADDRSPACE: &str = "unsupported-addrspace";
}

/// A single parser or analysis finding. Error diagnostics prevent the
/// construction (or further processing) of a program; warnings do not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: SourceSpan, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, span, code, message: message.into() }
    }

    pub fn warning(span: SourceSpan, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, span, code, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}[{}]: {}", self.span, self.severity, self.code, self.message)
    }
}

/// True if any diagnostic in the slice is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
