//! Source positions and compiler diagnostics.

use std::fmt;

/// A 1-based line/column position in the source text.
///
/// Positions are metadata: they never take part in structural equality of
/// syntax trees, so that `parse(print(ast)) == ast` holds even though the
/// printed text lays things out differently.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }

    /// Position used for compiler-generated syntax.
    pub fn synthetic() -> Self {
        Pos { line: 0, col: 0 }
    }

    pub fn is_synthetic(&self) -> bool {
        self.line == 0
    }
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl std::hash::Hash for Pos {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    Lexical,
    Syntax,
    Duplicate,
    UnknownState,
    UnknownIdent,
    Reserved,
    TypeMismatch,
    Arity,
    Clock,
    Causality,
    UnlessMemory,
    Recursion,
    Undefined,
    MissingStateWrite,
    FunctionMemory,
    NoState,
    Config,
}

impl Code {
    pub fn as_str(&self) -> &'static str {
        match self {
            Code::Lexical => "E0001",
            Code::Syntax => "E0002",
            Code::Duplicate => "E0003",
            Code::UnknownState => "E0004",
            Code::UnknownIdent => "E0101",
            Code::Reserved => "E0102",
            Code::TypeMismatch => "E0103",
            Code::Arity => "E0104",
            Code::Clock => "E0201",
            Code::Causality => "E0301",
            Code::UnlessMemory => "E0302",
            Code::Recursion => "E0303",
            Code::Undefined => "E0401",
            Code::MissingStateWrite => "E0402",
            Code::FunctionMemory => "E0403",
            Code::NoState => "E0501",
            Code::Config => "E0601",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A diagnostic is a value: callers decide how to render or act on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub pos: Pos,
}

impl Diagnostic {
    pub fn new(code: Code, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            pos,
        }
    }

    /// Render as `file:line:col: error[CODE]: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: error[{}]: {}",
            file, self.pos.line, self.pos.col, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: error[{}]: {}", self.pos, self.code, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// Accumulated diagnostics of one compilation stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn new() -> Self {
        Diagnostics(Vec::new())
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn error(&mut self, code: Code, pos: Pos, message: impl Into<String>) {
        self.0.push(Diagnostic::new(code, pos, message));
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }

    pub fn has_code(&self, code: Code) -> bool {
        self.0.iter().any(|d| d.code == code)
    }

    /// `Ok(value)` when nothing was reported.
    pub fn into_result<T>(self, value: T) -> Result<T, Diagnostics> {
        if self.0.is_empty() {
            Ok(value)
        } else {
            Err(self)
        }
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl IntoIterator for Diagnostics {
    type Item = Diagnostic;
    type IntoIter = std::vec::IntoIter<Diagnostic>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}
