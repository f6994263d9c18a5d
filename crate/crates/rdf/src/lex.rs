//! Tokenizer shared by the Turtle reader and the SPARQL parser.

use crate::RdfError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Iri(String),
    PName {
        prefix: String,
        local: String,
    },
    Blank(String),
    Var(String),
    Str(String),
    /// `@word`: a language tag or a directive such as `@prefix`.
    At(String),
    Caret2,
    Integer(String),
    Decimal(String),
    Word(String),
    Dot,
    Semicolon,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Star,
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    Ne,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Iri(i) => format!("<{i}>"),
            Tok::PName { prefix, local } => format!("{prefix}:{local}"),
            Tok::Blank(b) => format!("_:{b}"),
            Tok::Var(v) => format!("?{v}"),
            Tok::Str(_) => "string literal".into(),
            Tok::At(w) => format!("@{w}"),
            Tok::Caret2 => "'^^'".into(),
            Tok::Integer(n) | Tok::Decimal(n) => n.clone(),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Dot => "'.'".into(),
            Tok::Semicolon => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Star => "'*'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Lt => "'<'".into(),
            Tok::Ge => "'>='".into(),
            Tok::Le => "'<='".into(),
            Tok::Eq => "'='".into(),
            Tok::Ne => "'!='".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    lookahead: Vec<char>,
    line: usize,
    column: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

pub(crate) fn syntax(line: usize, column: usize, reason: impl Into<String>) -> RdfError {
    RdfError::Syntax { line, column, reason: reason.into() }
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(input: &'a str) -> Self {
        Lexer { chars: input.chars().peekable(), lookahead: Vec::new(), line: 1, column: 1 }
    }

    pub(crate) fn position(&self) -> (usize, usize) {
        (self.line, self.column)
    }

    fn peek(&mut self) -> Option<char> {
        if let Some(&c) = self.lookahead.last() {
            return Some(c);
        }
        self.chars.peek().copied()
    }

    fn peek2(&mut self) -> Option<char> {
        self.peek()?;
        match self.lookahead.len() {
            0 => {
                let c = self.chars.next()?;
                let second = self.chars.peek().copied();
                self.lookahead.push(c);
                second
            }
            1 => self.chars.peek().copied(),
            n => Some(self.lookahead[n - 2]),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = match self.lookahead.pop() {
            Some(c) => Some(c),
            None => self.chars.next(),
        }?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Returns a consumed character to the stream. Only used for trailing dots,
    /// so the column bookkeeping stays on one line.
    fn unbump(&mut self, c: char) {
        self.lookahead.push(c);
        self.column -= 1;
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    pub(crate) fn tokenize(mut self) -> Result<Vec<Token>, RdfError> {
        let mut out = Vec::new();
        while let Some(token) = self.next_token()? {
            out.push(token);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<Token>, RdfError> {
        self.skip_trivia();
        let (line, column) = self.position();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => self.lex_angle(line, column)?,
            '"' | '\'' => Tok::Str(self.lex_string(line, column)?),
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if word.is_empty() {
                    return Err(syntax(line, column, "expected a word after '@'"));
                }
                Tok::At(word)
            }
            '^' => {
                self.bump();
                if self.peek() != Some('^') {
                    return Err(syntax(line, column, "expected '^^'"));
                }
                self.bump();
                Tok::Caret2
            }
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(syntax(line, column, "empty variable name"));
                }
                Tok::Var(name)
            }
            '.' => {
                self.bump();
                Tok::Dot
            }
            ';' => self.single(Tok::Semicolon),
            ',' => self.single(Tok::Comma),
            '{' => self.single(Tok::LBrace),
            '}' => self.single(Tok::RBrace),
            '(' => self.single(Tok::LParen),
            ')' => self.single(Tok::RParen),
            '[' => self.single(Tok::LBracket),
            ']' => self.single(Tok::RBracket),
            '*' => self.single(Tok::Star),
            '=' => self.single(Tok::Eq),
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '!' => {
                self.bump();
                if self.peek() != Some('=') {
                    return Err(syntax(line, column, "expected '!='"));
                }
                self.bump();
                Tok::Ne
            }
            '+' | '-' | '0'..='9' => self.lex_number(line, column)?,
            '_' if self.peek2() == Some(':') => {
                self.bump();
                self.bump();
                let label = self.take_name();
                if label.is_empty() {
                    return Err(syntax(line, column, "empty blank node label"));
                }
                Tok::Blank(label)
            }
            c if c.is_alphabetic() || c == '_' || c == ':' => {
                let head = self.take_name();
                if self.peek() == Some(':') {
                    self.bump();
                    let local = match self.peek() {
                        Some(c) if c.is_alphanumeric() || c == '_' => self.take_name(),
                        _ => String::new(),
                    };
                    Tok::PName { prefix: head, local }
                } else {
                    Tok::Word(head)
                }
            }
            other => return Err(syntax(line, column, format!("unexpected character '{other}'"))),
        };
        Ok(Some(Token { tok, line, column }))
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.bump();
        tok
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Name characters; trailing dots are handed back as statement terminators.
    fn take_name(&mut self) -> String {
        let mut s = self.take_while(is_name_char);
        let mut trailing = 0;
        while s.ends_with('.') {
            s.pop();
            trailing += 1;
        }
        for _ in 0..trailing {
            self.unbump('.');
        }
        s
    }

    fn lex_angle(&mut self, line: usize, column: usize) -> Result<Tok, RdfError> {
        self.bump();
        match self.peek() {
            Some('=') => {
                self.bump();
                return Ok(Tok::Le);
            }
            Some(c) if c.is_whitespace() => return Ok(Tok::Lt),
            _ => {}
        }
        let mut iri = String::new();
        loop {
            match self.peek() {
                None => return Err(syntax(line, column, "unterminated IRI")),
                Some('>') => {
                    self.bump();
                    return Ok(Tok::Iri(iri));
                }
                Some(c) if c.is_whitespace() => {
                    let (l, col) = self.position();
                    return Err(syntax(l, col, "whitespace inside IRI (unterminated '<')"));
                }
                Some(c @ ('<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')) => {
                    let (l, col) = self.position();
                    return Err(syntax(l, col, format!("character '{c}' not allowed in IRI")));
                }
                Some(c) => {
                    iri.push(c);
                    self.bump();
                }
            }
        }
    }

    fn lex_string(&mut self, line: usize, column: usize) -> Result<String, RdfError> {
        let quote = self.bump().expect("caller peeked a quote");
        if self.peek() == Some(quote) && self.peek2() == Some(quote) {
            return Err(syntax(line, column, "multi-line strings are not supported"));
        }
        let mut out = String::new();
        loop {
            let (l, col) = self.position();
            match self.bump() {
                None => return Err(syntax(line, column, "unterminated string")),
                Some('\n') => return Err(syntax(line, column, "unterminated string (newline)")),
                Some(c) if c == quote => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\'') => out.push('\''),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some(u @ ('u' | 'U')) => {
                        let width = if u == 'u' { 4 } else { 8 };
                        let hex: String = (0..width).filter_map(|_| self.bump()).collect();
                        let ch = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32);
                        match ch {
                            Some(ch) if hex.len() == width => out.push(ch),
                            _ => return Err(syntax(l, col, "invalid unicode escape")),
                        }
                    }
                    _ => return Err(syntax(l, col, "invalid escape sequence")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn lex_number(&mut self, line: usize, column: usize) -> Result<Tok, RdfError> {
        let mut s = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            s.push(sign);
            self.bump();
        }
        let int = self.take_while(|c| c.is_ascii_digit());
        s.push_str(&int);
        let is_decimal = self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit());
        if is_decimal {
            self.bump();
            s.push('.');
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            Ok(Tok::Decimal(s))
        } else if int.is_empty() {
            Err(syntax(line, column, "expected digits"))
        } else if self.peek().is_some_and(|c| c.is_alphabetic()) {
            Err(syntax(line, column, "unsupported numeric form"))
        } else {
            Ok(Tok::Integer(s))
        }
    }
}
