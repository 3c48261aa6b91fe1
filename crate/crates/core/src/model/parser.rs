//! Recursive-descent parser for the `.mdl` grammar.
//!
//! Keywords are contextual: `class`, `attr` and friends are ordinary
//! identifiers wherever the grammar expects a name.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;

pub fn parse_model(source: &str) -> Result<ModelUnit, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let model = p.model()?;
    p.expect_eof()?;
    Ok(model)
}

/// Like [`parse_model`] but accepts arbitrary bytes; invalid UTF-8 is
/// reported at the position of the first offending byte.
pub fn parse_model_bytes(bytes: &[u8]) -> Result<ModelUnit, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_model(s),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(ParseError::new(line, column, "valid UTF-8", "invalid byte sequence"))
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        ParseError::new(tok.line, tok.column, expected, &tok.kind.describe())
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn punct(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        if self.peek().kind == kind {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&kind.describe()))
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().kind == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokenKind::Str(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(s) | TokenKind::Str(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        match self.peek().kind {
            TokenKind::Nat(n) => {
                self.advance();
                Ok(n)
            }
            _ => Err(self.error("a number")),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn model(&mut self) -> Result<ModelUnit, ParseError> {
        self.keyword("model")?;
        let name = self.ident("model name")?;
        self.punct(TokenKind::LBrace)?;
        let purpose = self.purpose()?;
        let mut classes = Vec::new();
        let mut associations = Vec::new();
        loop {
            if self.at_keyword("class") || self.at_keyword("abstract") {
                classes.push(self.class()?);
            } else if self.at_keyword("assoc") {
                associations.push(self.assoc()?);
            } else if self.eat(TokenKind::RBrace) {
                break;
            } else {
                return Err(self.error("`class`, `abstract`, `assoc` or `}`"));
            }
        }
        Ok(ModelUnit { name, purpose, classes, associations })
    }

    fn purpose(&mut self) -> Result<PurposeSpec, ParseError> {
        self.keyword("purpose")?;
        let text = self.string("purpose text string")?;
        let mut keywords: Vec<String> = Vec::new();
        if self.at_keyword("keywords") {
            self.advance();
            loop {
                let tok = self.peek().clone();
                let kw = self.ident("keyword")?;
                if kw.chars().any(|c| c.is_ascii_uppercase()) {
                    return Err(ParseError::new(tok.line, tok.column, "a lowercase keyword", &format!("`{kw}`")));
                }
                if keywords.contains(&kw) {
                    return Err(ParseError::new(tok.line, tok.column, "a keyword not listed before", &format!("duplicate `{kw}`")));
                }
                keywords.push(kw);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        Ok(PurposeSpec { text, keywords })
    }

    fn class(&mut self) -> Result<ClassDecl, ParseError> {
        let is_abstract = self.at_keyword("abstract");
        if is_abstract {
            self.advance();
        }
        self.keyword("class")?;
        let name = self.name("class name")?;
        let mut supertypes = Vec::new();
        if self.at_keyword("extends") {
            self.advance();
            loop {
                supertypes.push(self.ident("supertype name")?);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.punct(TokenKind::LBrace)?;
        let mut attributes = Vec::new();
        let mut operations = Vec::new();
        loop {
            if self.at_keyword("attr") {
                attributes.push(self.attr()?);
            } else if self.at_keyword("op") {
                operations.push(self.op()?);
            } else if self.eat(TokenKind::RBrace) {
                break;
            } else {
                return Err(self.error("`attr`, `op` or `}`"));
            }
        }
        Ok(ClassDecl { name, is_abstract, supertypes, attributes, operations })
    }

    fn attr(&mut self) -> Result<AttrDecl, ParseError> {
        self.keyword("attr")?;
        let name = self.name("attribute name")?;
        self.punct(TokenKind::Colon)?;
        let type_ref = self.ident("type name")?;
        let multiplicity = if self.eat(TokenKind::LBracket) {
            let lower = self.nat()?;
            self.punct(TokenKind::DotDot)?;
            let upper = if self.eat(TokenKind::Star) { Upper::Unbounded } else { Upper::Bounded(self.nat()?) };
            self.punct(TokenKind::RBracket)?;
            Some(Multiplicity::new(lower, upper))
        } else {
            None
        };
        Ok(AttrDecl { name, type_ref, multiplicity })
    }

    fn op(&mut self) -> Result<OpDecl, ParseError> {
        self.keyword("op")?;
        let name = self.name("operation name")?;
        self.punct(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.eat(TokenKind::RParen) {
            loop {
                let pname = self.name("parameter name")?;
                self.punct(TokenKind::Colon)?;
                let type_ref = self.ident("type name")?;
                params.push(Param { name: pname, type_ref });
                if self.eat(TokenKind::RParen) {
                    break;
                }
                self.punct(TokenKind::Comma)?;
            }
        }
        let return_type = if self.eat(TokenKind::Colon) { Some(self.ident("return type name")?) } else { None };
        Ok(OpDecl { name, params, return_type })
    }

    fn assoc(&mut self) -> Result<AssocDecl, ParseError> {
        self.keyword("assoc")?;
        let name = match (&self.peek().kind, self.peek_at(1)) {
            (TokenKind::Ident(_), TokenKind::Ident(_)) => Some(self.ident("association name")?),
            _ => None,
        };
        let end_a = self.assoc_end()?;
        self.punct(TokenKind::DashDash)?;
        let end_b = self.assoc_end()?;
        Ok(AssocDecl { name, end_a, end_b })
    }

    fn assoc_end(&mut self) -> Result<AssocEnd, ParseError> {
        let class_ref = self.ident("association end class")?;
        let tok = self.peek().clone();
        let raw = self.string("multiplicity string such as \"0..*\"")?;
        let multiplicity = Multiplicity::parse_shorthand(&raw).ok_or_else(|| {
            ParseError::new(tok.line, tok.column, "multiplicity `n`, `*`, `n..m` or `n..*`", &format!("{raw:?}"))
        })?;
        Ok(AssocEnd { class_ref, multiplicity, role: None })
    }
}
