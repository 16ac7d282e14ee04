use std::fmt;

use crate::diag::{Code, Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    // keywords
    Node,
    Function,
    Returns,
    Var,
    Let,
    Tel,
    Type,
    Enum,
    Automaton,
    State,
    Unless,
    Until,
    Restart,
    Resume,
    When,
    Merge,
    Every,
    Pre,
    Clock,
    If,
    Then,
    Else,
    Not,
    And,
    Or,
    Xor,
    True,
    False,
    TyInt,
    TyBool,
    TyReal,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,
    Implies,
    Eof,
}

impl Tok {
    fn keyword(s: &str) -> Option<Tok> {
        Some(match s {
            "node" => Tok::Node,
            "function" => Tok::Function,
            "returns" => Tok::Returns,
            "var" => Tok::Var,
            "let" => Tok::Let,
            "tel" => Tok::Tel,
            "type" => Tok::Type,
            "enum" => Tok::Enum,
            "automaton" => Tok::Automaton,
            "state" => Tok::State,
            "unless" => Tok::Unless,
            "until" => Tok::Until,
            "restart" => Tok::Restart,
            "resume" => Tok::Resume,
            "when" => Tok::When,
            "merge" => Tok::Merge,
            "every" => Tok::Every,
            "pre" => Tok::Pre,
            "clock" => Tok::Clock,
            "if" => Tok::If,
            "then" => Tok::Then,
            "else" => Tok::Else,
            "not" => Tok::Not,
            "and" => Tok::And,
            "or" => Tok::Or,
            "xor" => Tok::Xor,
            "true" => Tok::True,
            "false" => Tok::False,
            "int" => Tok::TyInt,
            "bool" => Tok::TyBool,
            "real" => Tok::TyReal,
            _ => return None,
        })
    }

    /// Whether `s` is a reserved word of the language.
    pub fn is_keyword(s: &str) -> bool {
        Tok::keyword(s).is_some()
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(i) => return write!(f, "integer `{i}`"),
            Tok::Real(r) => return write!(f, "real `{r}`"),
            Tok::Node => "node",
            Tok::Function => "function",
            Tok::Returns => "returns",
            Tok::Var => "var",
            Tok::Let => "let",
            Tok::Tel => "tel",
            Tok::Type => "type",
            Tok::Enum => "enum",
            Tok::Automaton => "automaton",
            Tok::State => "state",
            Tok::Unless => "unless",
            Tok::Until => "until",
            Tok::Restart => "restart",
            Tok::Resume => "resume",
            Tok::When => "when",
            Tok::Merge => "merge",
            Tok::Every => "every",
            Tok::Pre => "pre",
            Tok::Clock => "clock",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Not => "not",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Xor => "xor",
            Tok::True => "true",
            Tok::False => "false",
            Tok::TyInt => "int",
            Tok::TyBool => "bool",
            Tok::TyReal => "real",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Neq => "<>",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Arrow => "->",
            Tok::Implies => "=>",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Split source text into tokens. The stream always ends with `Tok::Eof`.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    Lexer::new(text).run()
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            col: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn run(mut self) -> Result<Vec<Token>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = Pos::new(self.line, self.col);
            let Some((start, c)) = self.bump() else {
                out.push(Token { tok: Tok::Eof, pos });
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '=' => {
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Implies
                    } else {
                        Tok::Eq
                    }
                }
                '<' => match self.peek() {
                    Some('>') => {
                        self.bump();
                        Tok::Neq
                    }
                    Some('=') => {
                        self.bump();
                        Tok::Le
                    }
                    _ => Tok::Lt,
                },
                '>' => {
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                '-' => {
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        Tok::Minus
                    }
                }
                '|' if self.peek() == Some('|') => {
                    self.bump();
                    Tok::Or
                }
                '&' if self.peek() == Some('&') => {
                    self.bump();
                    Tok::And
                }
                c if c.is_ascii_digit() => self.number(start, pos)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut end = start + c.len_utf8();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            end += c.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let word = &self.src[start..end];
                    Tok::keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()))
                }
                c => {
                    return Err(Diagnostic::new(
                        Code::Lexical,
                        pos,
                        format!("illegal character {c:?}"),
                    ))
                }
            };
            out.push(Token { tok, pos });
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('-') if self.peek2() == Some('-') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn number(&mut self, start: usize, pos: Pos) -> Result<Tok, Diagnostic> {
        let mut end = start + 1;
        let mut is_real = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                end += 1;
                self.bump();
            } else if c == '.' && !is_real {
                is_real = true;
                end += 1;
                self.bump();
            } else {
                break;
            }
        }
        let text = &self.src[start..end];
        if is_real {
            text.parse::<f64>().map(Tok::Real).map_err(|_| {
                Diagnostic::new(Code::Lexical, pos, format!("bad real literal `{text}`"))
            })
        } else {
            text.parse::<i64>().map(Tok::Int).map_err(|_| {
                Diagnostic::new(
                    Code::Lexical,
                    pos,
                    format!("integer literal `{text}` out of range"),
                )
            })
        }
    }
}
