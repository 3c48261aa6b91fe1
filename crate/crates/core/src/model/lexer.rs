use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Str(String),
    Nat(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    DotDot,
    Star,
    DashDash,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Str(s) => format!("string {s:?}"),
            TokenKind::Nat(n) => format!("number {n}"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::DotDot => "`..`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::DashDash => "`--`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' {
                let (line, column) = (cur.line, cur.column);
                cur.bump();
                if cur.peek() != Some('/') {
                    return Err(ParseError::new(line, column, "`//` comment", "`/`"));
                }
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.bump() else {
            out.push(Token { kind: TokenKind::Eof, line, column });
            return Ok(out);
        };
        let single = |kind| Token { kind, line, column };
        let tok = match c {
            '{' => single(TokenKind::LBrace),
            '}' => single(TokenKind::RBrace),
            '(' => single(TokenKind::LParen),
            ')' => single(TokenKind::RParen),
            '[' => single(TokenKind::LBracket),
            ']' => single(TokenKind::RBracket),
            ':' => single(TokenKind::Colon),
            ',' => single(TokenKind::Comma),
            '*' => single(TokenKind::Star),
            '.' => {
                if cur.peek() == Some('.') {
                    cur.bump();
                    single(TokenKind::DotDot)
                } else {
                    return Err(ParseError::new(line, column, "`..`", "`.`"));
                }
            }
            '-' => {
                if cur.peek() == Some('-') {
                    cur.bump();
                    single(TokenKind::DashDash)
                } else {
                    return Err(ParseError::new(line, column, "`--`", "`-`"));
                }
            }
            '"' => single(TokenKind::Str(lex_string(&mut cur, line, column)?)),
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    cur.bump();
                }
                let n = digits
                    .parse::<u64>()
                    .map_err(|_| ParseError::new(line, column, "a number that fits in 64 bits", &digits))?;
                single(TokenKind::Nat(n))
            }
            c if is_ident_start(c) => {
                let mut ident = String::from(c);
                while let Some(d) = cur.peek().filter(|d| is_ident_continue(*d)) {
                    ident.push(d);
                    cur.bump();
                }
                single(TokenKind::Ident(ident))
            }
            other => {
                return Err(ParseError::new(line, column, "a token", &format!("{other:?}")));
            }
        };
        out.push(tok);
    }
}

fn lex_string(cur: &mut Cursor<'_>, line: usize, column: usize) -> Result<String, ParseError> {
    let mut s = String::new();
    loop {
        match cur.bump() {
            None => {
                return Err(ParseError::new(cur.line, cur.column, "closing `\"`", "end of input")
                    .with_context(format!("string opened at line {line}, column {column}")))
            }
            Some('"') => return Ok(s),
            Some('\\') => {
                let (l, c) = (cur.line, cur.column);
                match cur.bump() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(other) => {
                        return Err(ParseError::new(l, c, "escape `\\\"`, `\\\\`, `\\n` or `\\t`", &format!("{other:?}")))
                    }
                    None => return Err(ParseError::new(l, c, "escape character", "end of input")),
                }
            }
            Some(c) => s.push(c),
        }
    }
}
