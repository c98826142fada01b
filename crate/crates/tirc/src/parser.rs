//! Recursive-descent parser for TIR and the canonical pretty-printer.
//!
//! Grammar (LLVM-flavored surface; `;` comments run to end of line):
//!
//! ```text
//! program     := manage compute
//! manage      := "launch" "{" (memdecl | streamdecl | counterdecl)* "call" "@main" "}"
//! memdecl     := gid "=" "memobj" type "," "size" INT "," "addrspace" "(" INT ")"
//! streamdecl  := gid "=" "streamobj" type "," ("read"|"write") gid ["," "offset" SINT]
//! counterdecl := gid "=" "counter" INT ["," "nest" gid]
//! compute     := funcdef+
//! funcdef     := "define" kind "void" gid "(" params ")" ["repeat" INT] "{" body "}"
//! kind        := "pipe" | "par" | "seq" | "comb"
//! params      := [param ("," param)*]
//! param       := type lid "," ("streamin"|"streamout"|"scalarin") [gid | LITERAL]
//! body        := (instr | call)*
//! instr       := lid "=" opcode type operand ("," operand)+
//! call        := "call" gid "(" args ")"
//! operand     := lid | gid | LITERAL
//! type        := ("ui"|"i") INT | "fix" INT "." INT
//! ```
//!
//! A parameter binding may be omitted, in which case every call of the
//! function must pass bindings positionally (`call @f (%a, %b, %out)`); an
//! empty argument list uses the signature bindings instead. Address-space
//! codes: 1=local, 2=global, 3=host, 4=private, 5=peer.
//!
//! The parser enforces structure and name resolution (unique global names,
//! declared bindings, known call targets, one `main`); SSA and type checking
//! are deferred to [`crate::analysis::validate`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::diag::{codes, Diagnostic, SourceSpan};
use crate::ir::*;
use crate::lexer::{tokenize, Token, TokenKind};

struct Parser {
    file: Arc<str>,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn eof_span(&self) -> SourceSpan {
        self.tokens
            .last()
            .map(|t| t.span.clone())
            .unwrap_or_else(|| SourceSpan::new(self.file.clone(), 1, 1, 0))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => Diagnostic::error(
                t.span.clone(),
                codes::UNEXPECTED_TOKEN,
                format!("expected {expected}, found {}", t.describe()),
            ),
            None => Diagnostic::error(
                self.eof_span(),
                codes::UNEXPECTED_TOKEN,
                format!("expected {expected}, found end of file"),
            ),
        }
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Word(s), .. }) if s == w)
    }

    fn expect_word(&mut self, w: &str) -> PResult<SourceSpan> {
        if self.at_word(w) {
            Ok(self.bump().unwrap().span)
        } else {
            Err(self.err_here(&format!("`{w}`")))
        }
    }

    fn expect_kind(&mut self, kind: &TokenKind, what: &str) -> PResult<SourceSpan> {
        match self.peek() {
            Some(t) if t.kind == *kind => Ok(self.bump().unwrap().span),
            _ => Err(self.err_here(what)),
        }
    }

    fn expect_global(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token { kind: TokenKind::GlobalId(_), .. }) => {
                let t = self.bump().unwrap();
                match t.kind {
                    TokenKind::GlobalId(n) => Ok((n, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err_here("a global name (`@name`)")),
        }
    }

    fn expect_local(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token { kind: TokenKind::LocalId(_), .. }) => {
                let t = self.bump().unwrap();
                match t.kind {
                    TokenKind::LocalId(n) => Ok((n, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err_here("a local name (`%name`)")),
        }
    }

    fn expect_int(&mut self, what: &str) -> PResult<(i128, SourceSpan)> {
        match self.peek() {
            Some(Token { kind: TokenKind::Int(_), .. }) => {
                let t = self.bump().unwrap();
                match t.kind {
                    TokenKind::Int(v) => Ok((v, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err_here(what)),
        }
    }

    fn expect_positive(&mut self, what: &str) -> PResult<(u64, SourceSpan)> {
        let (v, span) = self.expect_int(what)?;
        if v < 1 || v > i128::from(u64::MAX) {
            return Err(Diagnostic::error(
                span,
                codes::BAD_VALUE,
                format!("{what} must be a positive integer, got {v}"),
            ));
        }
        Ok((v as u64, span))
    }

    fn parse_type(&mut self) -> PResult<DataType> {
        let (word, span) = match self.peek() {
            Some(Token { kind: TokenKind::Word(w), span }) => (w.clone(), span.clone()),
            _ => return Err(self.err_here("a type (`ui<N>`, `i<N>`, or `fix<N>.<F>`)")),
        };
        let Some(head) = parse_type_word(&word) else {
            return Err(self.err_here("a type (`ui<N>`, `i<N>`, or `fix<N>.<F>`)"));
        };
        self.bump();
        let dtype = match head {
            TypeWord::Unsigned(bits) => DataType::unsigned(bits),
            TypeWord::Signed(bits) => DataType::signed(bits),
            TypeWord::Fixed(total) => {
                self.expect_kind(&TokenKind::Dot, "`.` in fixed-point type")?;
                let (frac, fspan) = self.expect_int("fractional bit count")?;
                if !(0..=64).contains(&frac) {
                    return Err(Diagnostic::error(
                        fspan,
                        codes::BAD_WIDTH,
                        format!("fractional bits out of range: {frac}"),
                    ));
                }
                DataType::fixed(total, frac as u32)
            }
        };
        if !dtype.is_valid() {
            return Err(Diagnostic::error(
                span,
                codes::BAD_WIDTH,
                format!("invalid type `{dtype}`: total bits must be 1..=64 and fractional bits less than total"),
            ));
        }
        Ok(dtype)
    }

    fn parse_operand(&mut self) -> PResult<Operand> {
        match self.peek() {
            Some(Token { kind: TokenKind::LocalId(_), .. }) => {
                Ok(Operand::Local(self.expect_local()?.0))
            }
            Some(Token { kind: TokenKind::GlobalId(_), .. }) => {
                Ok(Operand::Global(self.expect_global()?.0))
            }
            Some(Token { kind: TokenKind::Int(_), .. }) => {
                Ok(Operand::Literal(self.expect_int("an operand")?.0))
            }
            _ => Err(self.err_here("an operand (`%name`, `@counter`, or a literal)")),
        }
    }

    fn parse_launch(&mut self) -> PResult<Vec<LaunchDecl>> {
        if !self.at_word("launch") {
            return Err(Diagnostic::error(
                self.peek().map(|t| t.span.clone()).unwrap_or_else(|| self.eof_span()),
                codes::MISSING_LAUNCH,
                "program must start with a `launch { ... }` section",
            ));
        }
        self.bump();
        self.expect_kind(&TokenKind::LBrace, "`{`")?;
        let mut decls = Vec::new();
        loop {
            if self.at_word("call") {
                self.bump();
                let (name, span) = self.expect_global()?;
                if name != "main" {
                    return Err(Diagnostic::error(
                        span,
                        codes::MISSING_MAIN,
                        format!("launch must invoke `@main`, found `@{name}`"),
                    ));
                }
                self.expect_kind(&TokenKind::RBrace, "`}`")?;
                return Ok(decls);
            }
            match self.peek() {
                Some(Token { kind: TokenKind::GlobalId(_), .. }) => {
                    decls.push(self.parse_launch_decl()?);
                }
                Some(Token { kind: TokenKind::RBrace, span }) => {
                    return Err(Diagnostic::error(
                        span.clone(),
                        codes::MISSING_MAIN,
                        "launch section must end with `call @main`",
                    ));
                }
                _ => return Err(self.err_here("a declaration (`@name = ...`) or `call @main`")),
            }
        }
    }

    fn parse_launch_decl(&mut self) -> PResult<LaunchDecl> {
        let (name, span) = self.expect_global()?;
        self.expect_kind(&TokenKind::Equals, "`=`")?;
        let kw = match self.peek() {
            Some(Token { kind: TokenKind::Word(w), .. }) => w.clone(),
            _ => return Err(self.err_here("`memobj`, `streamobj`, or `counter`")),
        };
        match kw.as_str() {
            "memobj" => {
                self.bump();
                let elem_type = self.parse_type()?;
                self.expect_kind(&TokenKind::Comma, "`,`")?;
                self.expect_word("size")?;
                let (length, _) = self.expect_positive("memory size")?;
                self.expect_kind(&TokenKind::Comma, "`,`")?;
                self.expect_word("addrspace")?;
                self.expect_kind(&TokenKind::LParen, "`(`")?;
                let (code, cspan) = self.expect_int("address-space code")?;
                let space = u32::try_from(code)
                    .ok()
                    .and_then(AddressSpace::from_code)
                    .ok_or_else(|| {
                        Diagnostic::error(
                            cspan,
                            codes::BAD_VALUE,
                            format!("unknown address space `{code}` (valid: 1..=5)"),
                        )
                    })?;
                self.expect_kind(&TokenKind::RParen, "`)`")?;
                Ok(LaunchDecl::Memory(MemoryObject {
                    name,
                    space,
                    elem_type,
                    length,
                    ports: 0,
                    span,
                }))
            }
            "streamobj" => {
                self.bump();
                let elem_type = self.parse_type()?;
                self.expect_kind(&TokenKind::Comma, "`,`")?;
                let direction = if self.at_word("read") {
                    self.bump();
                    Direction::Read
                } else if self.at_word("write") {
                    self.bump();
                    Direction::Write
                } else {
                    return Err(self.err_here("`read` or `write`"));
                };
                let (source, _) = self.expect_global()?;
                let mut offset = 0i64;
                if matches!(self.peek(), Some(Token { kind: TokenKind::Comma, .. })) {
                    self.bump();
                    self.expect_word("offset")?;
                    let (v, ospan) = self.expect_int("stream offset")?;
                    offset = i64::try_from(v).map_err(|_| {
                        Diagnostic::error(ospan, codes::BAD_VALUE, format!("offset {v} out of range"))
                    })?;
                }
                Ok(LaunchDecl::Stream(StreamObject { name, source, direction, elem_type, offset, span }))
            }
            "counter" => {
                self.bump();
                let (range, _) = self.expect_positive("counter range")?;
                let mut nest_parent = None;
                if matches!(self.peek(), Some(Token { kind: TokenKind::Comma, .. })) {
                    self.bump();
                    self.expect_word("nest")?;
                    nest_parent = Some(self.expect_global()?.0);
                }
                Ok(LaunchDecl::Counter(CounterSpec { name, range, nest_parent, span }))
            }
            other => Err(Diagnostic::error(
                self.peek().unwrap().span.clone(),
                codes::UNEXPECTED_TOKEN,
                format!("expected `memobj`, `streamobj`, or `counter`, found `{other}`"),
            )),
        }
    }

    fn parse_function(&mut self) -> PResult<FunctionDef> {
        self.expect_word("define")?;
        let kind = if self.at_word("pipe") {
            FuncKind::Pipe
        } else if self.at_word("par") {
            FuncKind::Par
        } else if self.at_word("seq") {
            FuncKind::Seq
        } else if self.at_word("comb") {
            FuncKind::Comb
        } else {
            return Err(self.err_here("a function kind (`pipe`, `par`, `seq`, or `comb`)"));
        };
        self.bump();
        self.expect_word("void")?;
        let (name, span) = self.expect_global()?;
        self.expect_kind(&TokenKind::LParen, "`(`")?;
        let mut ports = Vec::new();
        if !matches!(self.peek(), Some(Token { kind: TokenKind::RParen, .. })) {
            loop {
                ports.push(self.parse_param()?);
                if matches!(self.peek(), Some(Token { kind: TokenKind::Comma, .. })) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_kind(&TokenKind::RParen, "`)`")?;
        let mut repeat = None;
        if self.at_word("repeat") {
            self.bump();
            let (r, _) = self.expect_positive("repeat count")?;
            repeat = Some(r);
        }
        self.expect_kind(&TokenKind::LBrace, "`{`")?;
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Some(Token { kind: TokenKind::RBrace, .. }) => {
                    self.bump();
                    break;
                }
                Some(Token { kind: TokenKind::Word(w), .. }) if w == "call" => {
                    let cspan = self.bump().unwrap().span;
                    let (target, _) = self.expect_global()?;
                    self.expect_kind(&TokenKind::LParen, "`(`")?;
                    let mut args = Vec::new();
                    if !matches!(self.peek(), Some(Token { kind: TokenKind::RParen, .. })) {
                        loop {
                            args.push(self.parse_operand()?);
                            if matches!(self.peek(), Some(Token { kind: TokenKind::Comma, .. })) {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_kind(&TokenKind::RParen, "`)`")?;
                    body.push(BodyItem::Call(Call { target, args, span: cspan }));
                }
                Some(Token { kind: TokenKind::LocalId(_), .. }) => {
                    let (result, ispan) = self.expect_local()?;
                    self.expect_kind(&TokenKind::Equals, "`=`")?;
                    let opcode = match self.peek() {
                        Some(Token { kind: TokenKind::Word(w), .. }) => {
                            match Opcode::from_mnemonic(w) {
                                Some(op) => {
                                    self.bump();
                                    op
                                }
                                None => return Err(self.err_here("an opcode")),
                            }
                        }
                        _ => return Err(self.err_here("an opcode")),
                    };
                    let dtype = self.parse_type()?;
                    let mut operands = vec![self.parse_operand()?];
                    while matches!(self.peek(), Some(Token { kind: TokenKind::Comma, .. })) {
                        self.bump();
                        operands.push(self.parse_operand()?);
                    }
                    body.push(BodyItem::Instr(Instruction { result, opcode, dtype, operands, span: ispan }));
                }
                _ => return Err(self.err_here("an instruction, a call, or `}`")),
            }
        }
        Ok(FunctionDef { name, kind, ports, body, repeat, span })
    }

    fn parse_param(&mut self) -> PResult<Port> {
        let elem_type = self.parse_type()?;
        let (name, span) = self.expect_local()?;
        self.expect_kind(&TokenKind::Comma, "`,`")?;
        let kind = if self.at_word("streamin") {
            PortKind::StreamIn
        } else if self.at_word("streamout") {
            PortKind::StreamOut
        } else if self.at_word("scalarin") {
            PortKind::ScalarIn
        } else {
            return Err(self.err_here("`streamin`, `streamout`, or `scalarin`"));
        };
        self.bump();
        // Optional binding: a global, a literal, or nothing (bound per call).
        let binding = match self.peek() {
            Some(Token { kind: TokenKind::GlobalId(_), .. }) => {
                // Resolved to Stream/Counter after the launch table is built.
                Some(Binding::Stream(self.expect_global()?.0))
            }
            Some(Token { kind: TokenKind::Int(_), .. }) => {
                Some(Binding::Literal(self.expect_int("a literal binding")?.0))
            }
            _ => None,
        };
        Ok(Port { name, kind, binding, elem_type, span })
    }
}

enum TypeWord {
    Unsigned(u32),
    Signed(u32),
    Fixed(u32),
}

fn parse_type_word(w: &str) -> Option<TypeWord> {
    let (head, digits) = if let Some(rest) = w.strip_prefix("ui") {
        (0, rest)
    } else if let Some(rest) = w.strip_prefix("fix") {
        (2, rest)
    } else {
        (1, w.strip_prefix("i")?)
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let bits: u32 = digits.parse().ok()?;
    Some(match head {
        0 => TypeWord::Unsigned(bits),
        1 => TypeWord::Signed(bits),
        _ => TypeWord::Fixed(bits),
    })
}

/// Parses TIR source into a [`Program`]. On failure, at least one error
/// diagnostic is returned; errors and a program are mutually exclusive.
pub fn parse_program(file: &str, source: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = tokenize(file, source)?;
    let mut parser = Parser { file: Arc::from(file), tokens, pos: 0 };

    let launch = parser.parse_launch().map_err(|d| vec![d])?;

    let mut functions = Vec::new();
    while parser.peek().is_some() {
        functions.push(parser.parse_function().map_err(|d| vec![d])?);
    }

    let mut program = Program { launch, functions };
    let mut diags = Vec::new();
    resolve(&mut program, &mut diags);
    if crate::diag::has_errors(&diags) {
        Err(diags)
    } else {
        Ok(program)
    }
}

/// Name resolution and global-namespace checks; also classifies port
/// bindings as stream vs counter and fills in memory port counts.
fn resolve(program: &mut Program, diags: &mut Vec<Diagnostic>) {
    #[derive(Clone, Copy, PartialEq)]
    enum GlobalKind {
        Memory,
        Stream,
        Counter,
        Function,
    }

    fn declare(
        globals: &mut HashMap<String, (GlobalKind, SourceSpan)>,
        name: &str,
        kind: GlobalKind,
        span: &SourceSpan,
        diags: &mut Vec<Diagnostic>,
    ) {
        if let Some((_, first)) = globals.get(name) {
            diags.push(Diagnostic::error(
                span.clone(),
                codes::DUPLICATE_NAME,
                format!("duplicate global name `@{name}` (first declared at {first})"),
            ));
        } else {
            globals.insert(name.to_string(), (kind, span.clone()));
        }
    }

    let mut globals: HashMap<String, (GlobalKind, SourceSpan)> = HashMap::new();
    for decl in &program.launch {
        match decl {
            LaunchDecl::Memory(m) => declare(&mut globals, &m.name, GlobalKind::Memory, &m.span, diags),
            LaunchDecl::Stream(s) => declare(&mut globals, &s.name, GlobalKind::Stream, &s.span, diags),
            LaunchDecl::Counter(c) => declare(&mut globals, &c.name, GlobalKind::Counter, &c.span, diags),
        }
    }
    for f in &program.functions {
        declare(&mut globals, &f.name, GlobalKind::Function, &f.span, diags);
    }

    let kind_of = |name: &str| globals.get(name).map(|(k, _)| *k);

    if program.main().is_none() {
        let span = program
            .functions
            .first()
            .map(|f| f.span.clone())
            .unwrap_or_else(SourceSpan::synthetic);
        diags.push(Diagnostic::error(span, codes::MISSING_MAIN, "no function named `@main`"));
    }

    for decl in &program.launch {
        match decl {
            LaunchDecl::Stream(s) => match kind_of(&s.source) {
                Some(GlobalKind::Memory) => {}
                Some(_) => diags.push(Diagnostic::error(
                    s.span.clone(),
                    codes::BINDING_KIND,
                    format!("stream source `@{}` is not a memory object", s.source),
                )),
                None => diags.push(Diagnostic::error(
                    s.span.clone(),
                    codes::UNDEFINED_NAME,
                    format!("undefined memory object `@{}`", s.source),
                )),
            },
            LaunchDecl::Counter(c) => {
                if let Some(parent) = &c.nest_parent {
                    match kind_of(parent) {
                        Some(GlobalKind::Counter) => {}
                        Some(_) => diags.push(Diagnostic::error(
                            c.span.clone(),
                            codes::BINDING_KIND,
                            format!("nest parent `@{parent}` is not a counter"),
                        )),
                        None => diags.push(Diagnostic::error(
                            c.span.clone(),
                            codes::UNDEFINED_NAME,
                            format!("undefined counter `@{parent}`"),
                        )),
                    }
                }
            }
            LaunchDecl::Memory(_) => {}
        }
    }

    for f in &mut program.functions {
        for port in &mut f.ports {
            if let Some(Binding::Stream(name)) = &port.binding {
                match kind_of(name) {
                    Some(GlobalKind::Stream) => {}
                    Some(GlobalKind::Counter) => {
                        let n = name.clone();
                        port.binding = Some(Binding::Counter(n));
                    }
                    Some(_) => diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::BINDING_KIND,
                        format!("port binding `@{name}` must name a stream or counter"),
                    )),
                    None => diags.push(Diagnostic::error(
                        port.span.clone(),
                        codes::UNDEFINED_NAME,
                        format!("undefined stream or counter `@{name}`"),
                    )),
                }
            }
        }
        for item in &f.body {
            match item {
                BodyItem::Call(c) => {
                    match kind_of(&c.target) {
                        Some(GlobalKind::Function) => {}
                        Some(_) => diags.push(Diagnostic::error(
                            c.span.clone(),
                            codes::BINDING_KIND,
                            format!("call target `@{}` is not a function", c.target),
                        )),
                        None => diags.push(Diagnostic::error(
                            c.span.clone(),
                            codes::UNDEFINED_NAME,
                            format!("undefined function `@{}`", c.target),
                        )),
                    }
                    for arg in &c.args {
                        if let Operand::Global(g) = arg {
                            if kind_of(g).is_none() {
                                diags.push(Diagnostic::error(
                                    c.span.clone(),
                                    codes::UNDEFINED_NAME,
                                    format!("undefined global `@{g}`"),
                                ));
                            }
                        }
                    }
                }
                BodyItem::Instr(i) => {
                    for op in &i.operands {
                        if let Operand::Global(g) = op {
                            if kind_of(g).is_none() {
                                diags.push(Diagnostic::error(
                                    i.span.clone(),
                                    codes::UNDEFINED_NAME,
                                    format!("undefined global `@{g}`"),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // Memory port counts: one port per bound stream object.
    let mut counts: HashMap<String, u32> = HashMap::new();
    for s in program.streams() {
        *counts.entry(s.source.clone()).or_insert(0) += 1;
    }
    for decl in &mut program.launch {
        if let LaunchDecl::Memory(m) = decl {
            m.ports = counts.get(&m.name).copied().unwrap_or(0);
        }
    }
}

fn write_operand(out: &mut String, op: &Operand) {
    match op {
        Operand::Local(n) => {
            let _ = write!(out, "%{n}");
        }
        Operand::Global(n) => {
            let _ = write!(out, "@{n}");
        }
        Operand::Literal(v) => {
            let _ = write!(out, "{v}");
        }
    }
}

/// Prints a program in canonical form. Re-parsing the output yields a
/// structurally identical program.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    out.push_str("launch {\n");
    for decl in &program.launch {
        match decl {
            LaunchDecl::Memory(m) => {
                let _ = writeln!(
                    out,
                    "  @{} = memobj {}, size {}, addrspace({})",
                    m.name,
                    m.elem_type,
                    m.length,
                    m.space.code()
                );
            }
            LaunchDecl::Stream(s) => {
                let dir = match s.direction {
                    Direction::Read => "read",
                    Direction::Write => "write",
                };
                let _ = write!(out, "  @{} = streamobj {}, {} @{}", s.name, s.elem_type, dir, s.source);
                if s.offset != 0 {
                    let _ = write!(out, ", offset {}", s.offset);
                }
                out.push('\n');
            }
            LaunchDecl::Counter(c) => {
                let _ = write!(out, "  @{} = counter {}", c.name, c.range);
                if let Some(p) = &c.nest_parent {
                    let _ = write!(out, ", nest @{p}");
                }
                out.push('\n');
            }
        }
    }
    out.push_str("  call @main\n}\n");

    for f in &program.functions {
        let _ = write!(out, "\ndefine {} void @{} (", f.kind, f.name);
        for (i, p) in f.ports.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{} %{}, {}", p.elem_type, p.name, p.kind);
            match &p.binding {
                Some(Binding::Stream(s)) => {
                    let _ = write!(out, " @{s}");
                }
                Some(Binding::Counter(c)) => {
                    let _ = write!(out, " @{c}");
                }
                Some(Binding::Literal(v)) => {
                    let _ = write!(out, " {v}");
                }
                None => {}
            }
        }
        out.push(')');
        if let Some(r) = f.repeat {
            let _ = write!(out, " repeat {r}");
        }
        out.push_str(" {\n");
        for item in &f.body {
            match item {
                BodyItem::Instr(i) => {
                    let _ = write!(out, "  %{} = {} {} ", i.result, i.opcode, i.dtype);
                    for (k, op) in i.operands.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        write_operand(&mut out, op);
                    }
                    out.push('\n');
                }
                BodyItem::Call(c) => {
                    let _ = write!(out, "  call @{} (", c.target);
                    for (k, a) in c.args.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        write_operand(&mut out, a);
                    }
                    out.push_str(")\n");
                }
            }
        }
        out.push_str("}\n");
    }
    out
}
