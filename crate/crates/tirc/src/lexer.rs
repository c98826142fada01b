//! Tokenizer for TIR source text.
//!
//! Comments run from `;` to end of line. Globals are `@name`, locals are
//! `%name` (names may be purely numeric, LLVM-style). Tokenization is
//! context-free: concatenating two token streams tokenizes to their union.

use std::sync::Arc;

use crate::diag::{codes, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Bare word: keywords, opcodes, type names.
    Word(String),
    /// `@name`
    GlobalId(String),
    /// `%name`
    LocalId(String),
    /// Integer literal, possibly negative.
    Int(i128),
    Comma,
    Equals,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

impl Token {
    /// Short description for "expected X, found Y" messages.
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::GlobalId(n) => format!("`@{n}`"),
            TokenKind::LocalId(n) => format!("`%{n}`"),
            TokenKind::Int(v) => format!("`{v}`"),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Dot => "`.`".into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

struct Lexer<'s> {
    file: Arc<str>,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    src: std::marker::PhantomData<&'s str>,
}

impl Lexer<'_> {
    fn span(&self, line: u32, col: u32, len: u32) -> SourceSpan {
        SourceSpan::new(self.file.clone(), line, col, len)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if pred(c) {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }
}

/// Tokenizes `source`, discarding whitespace and comments. Returns every
/// lexical error found, or the full token stream.
pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lx = Lexer {
        file: Arc::from(file),
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        src: std::marker::PhantomData,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = lx.peek() {
        let (line, col) = (lx.line, lx.col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                lx.bump();
            }
            ';' => {
                while let Some(c) = lx.peek() {
                    if c == '\n' {
                        break;
                    }
                    lx.bump();
                }
            }
            ',' | '=' | '{' | '}' | '(' | ')' | '.' => {
                lx.bump();
                let kind = match c {
                    ',' => TokenKind::Comma,
                    '=' => TokenKind::Equals,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    _ => TokenKind::Dot,
                };
                tokens.push(Token { kind, span: lx.span(line, col, 1) });
            }
            '@' | '%' => {
                lx.bump();
                let name = lx.take_while(is_ident_char);
                if name.is_empty() {
                    diags.push(Diagnostic::error(
                        lx.span(line, col, 1),
                        codes::ILLEGAL_TOKEN,
                        format!("illegal token: `{c}` must be followed by an identifier"),
                    ));
                } else {
                    let len = name.len() as u32 + 1;
                    let kind = if c == '@' {
                        TokenKind::GlobalId(name)
                    } else {
                        TokenKind::LocalId(name)
                    };
                    tokens.push(Token { kind, span: lx.span(line, col, len) });
                }
            }
            '-' => {
                lx.bump();
                let digits = lx.take_while(|c| c.is_ascii_digit());
                if digits.is_empty() {
                    diags.push(Diagnostic::error(
                        lx.span(line, col, 1),
                        codes::ILLEGAL_TOKEN,
                        "illegal token: `-` must start a number".to_string(),
                    ));
                } else {
                    match digits.parse::<i128>() {
                        Ok(v) => tokens.push(Token {
                            kind: TokenKind::Int(-v),
                            span: lx.span(line, col, digits.len() as u32 + 1),
                        }),
                        Err(_) => diags.push(Diagnostic::error(
                            lx.span(line, col, digits.len() as u32 + 1),
                            codes::BAD_VALUE,
                            format!("integer literal -{digits} out of range"),
                        )),
                    }
                }
            }
            c if c.is_ascii_digit() => {
                let digits = lx.take_while(|c| c.is_ascii_digit());
                match digits.parse::<i128>() {
                    Ok(v) => tokens.push(Token {
                        kind: TokenKind::Int(v),
                        span: lx.span(line, col, digits.len() as u32),
                    }),
                    Err(_) => diags.push(Diagnostic::error(
                        lx.span(line, col, digits.len() as u32),
                        codes::BAD_VALUE,
                        format!("integer literal {digits} out of range"),
                    )),
                }
            }
            c if is_word_start(c) => {
                let word = lx.take_while(is_ident_char);
                tokens.push(Token {
                    kind: TokenKind::Word(word.clone()),
                    span: lx.span(line, col, word.len() as u32),
                });
            }
            other => {
                lx.bump();
                diags.push(Diagnostic::error(
                    lx.span(line, col, 1),
                    codes::ILLEGAL_TOKEN,
                    format!("illegal character `{other}`"),
                ));
            }
        }
    }

    if diags.is_empty() {
        Ok(tokens)
    } else {
        Err(diags)
    }
}
