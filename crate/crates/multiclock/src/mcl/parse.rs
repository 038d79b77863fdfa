//! Lexer and recursive-descent parser for the concrete MCL syntax.

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    At,
    Dot,
    Bang,
    AndAnd,
    OrOr,
    Arrow,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Caret,
    Plus,
    Minus,
    Star,
    Cmp(CmpOp),
    If,
    Then,
    Else,
    F,
    G,
    Inf,
    True,
    False,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let next = chars.get(i + 1).copied();
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let push = |tok: Tok, out: &mut Vec<Token>| out.push(Token { tok, line: start.0, col: start.1 });
        if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - s;
            let word: String = chars[s..i].iter().collect();
            let tok = match word.as_str() {
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "F" => Tok::F,
                "G" => Tok::G,
                "inf" => Tok::Inf,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            push(tok, &mut out);
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            col += i - s;
            let text: String = chars[s..i].iter().collect();
            let tok = if real {
                Tok::Real(text.parse().map_err(|_| ParseError { line: start.0, col: start.1, msg: format!("bad number `{text}`") })?)
            } else {
                match text.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => Tok::Real(text.parse().unwrap_or(f64::INFINITY)),
                }
            };
            push(tok, &mut out);
            continue;
        }
        let two: Option<Tok> = match (c, next) {
            ('&', Some('&')) => Some(Tok::AndAnd),
            ('|', Some('|')) => Some(Tok::OrOr),
            ('-', Some('>')) => Some(Tok::Arrow),
            ('<', Some('=')) => Some(Tok::Cmp(CmpOp::Le)),
            ('>', Some('=')) => Some(Tok::Cmp(CmpOp::Ge)),
            ('!', Some('=')) => Some(Tok::Cmp(CmpOp::Ne)),
            _ => None,
        };
        if let Some(t) = two {
            push(t, &mut out);
            advance(2, &mut i, &mut col);
            continue;
        }
        let one = match c {
            '@' => Tok::At,
            '.' => Tok::Dot,
            '!' => Tok::Bang,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '^' => Tok::Caret,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '<' => Tok::Cmp(CmpOp::Lt),
            '>' => Tok::Cmp(CmpOp::Gt),
            '=' => Tok::Cmp(CmpOp::Eq),
            _ => {
                return Err(ParseError { line, col, msg: format!("unexpected character `{c}`") });
            }
        };
        push(one, &mut out);
        advance(1, &mut i, &mut col);
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    binder: Option<String>,
    // furthest error seen while backtracking
    best: Option<ParseError>,
}

type PResult<T> = Result<T, ParseError>;

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Real(x) => format!("`{x}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, pos: usize, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[pos];
        ParseError { line: t.line, col: t.col, msg: msg.into() }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        self.err_at(self.pos, msg)
    }

    fn expected(&self, what: &str) -> ParseError {
        self.err(format!("expected {what}, found {}", describe(self.peek())))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.expected("an identifier")),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.expected("an integer")),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        let p = self.pos;
        let n = self.int()?;
        let n = i64::try_from(n).map_err(|_| self.err_at(p, "offset out of range"))?;
        Ok(if neg { -n } else { n })
    }

    fn record(&mut self, e: ParseError) {
        let better = match &self.best {
            None => true,
            Some(b) => (e.line, e.col) > (b.line, b.col),
        };
        if better {
            self.best = Some(e);
        }
    }

    /// True when the tokens from the current position start a global
    /// formula (`@`, possibly behind `!` and `(`).
    fn starts_global(&self, from: usize) -> bool {
        let mut k = from;
        loop {
            match self.peek_at(k) {
                Tok::Bang | Tok::LParen => k += 1,
                Tok::At => return true,
                _ => return false,
            }
        }
    }

    // ---- global level ----

    fn global(&mut self) -> PResult<Global> {
        let mut lhs = self.global_or()?;
        while self.eat(&Tok::Arrow) {
            let rhs = self.global_or()?;
            lhs = Global::Implies(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn global_or(&mut self) -> PResult<Global> {
        let mut lhs = self.global_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.global_and()?;
            lhs = Global::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn global_and(&mut self) -> PResult<Global> {
        let mut lhs = self.global_unary()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.global_unary()?;
            lhs = Global::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn global_unary(&mut self) -> PResult<Global> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Global::Not(Box::new(self.global_unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let g = self.global()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(g)
            }
            Tok::At => {
                self.bump();
                let clock = self.ident()?;
                self.expect(Tok::Dot, "`.` after the clock name")?;
                let saved = self.binder.replace(clock.clone());
                let body = self.local();
                self.binder = saved;
                Ok(Global::Bind { clock, body: body? })
            }
            _ => Err(self.expected("`@`, `!` or `(` to start a global formula")),
        }
    }

    // ---- local level ----

    fn local_binop(&mut self, t: &Tok) -> bool {
        if self.peek() == t && !self.starts_global(1) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn local(&mut self) -> PResult<Local> {
        let mut lhs = self.local_or()?;
        while self.local_binop(&Tok::Arrow) {
            let rhs = self.local_or()?;
            lhs = Local::Implies(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn local_or(&mut self) -> PResult<Local> {
        let mut lhs = self.local_and()?;
        while self.local_binop(&Tok::OrOr) {
            let rhs = self.local_and()?;
            lhs = Local::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn local_and(&mut self) -> PResult<Local> {
        let mut lhs = self.local_unary()?;
        while self.local_binop(&Tok::AndAnd) {
            let rhs = self.local_unary()?;
            lhs = Local::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn interval(&mut self) -> PResult<(u64, Option<u64>)> {
        if !self.eat(&Tok::LBrack) {
            return Ok((0, None));
        }
        let lo = self.int()?;
        self.expect(Tok::Comma, "`,`")?;
        let p = self.pos;
        let hi = if self.eat(&Tok::Inf) { None } else { Some(self.int()?) };
        self.expect(Tok::RBrack, "`]`")?;
        if let Some(h) = hi {
            if h < lo {
                return Err(self.err_at(p, format!("empty interval [{lo},{h}]")));
            }
        }
        Ok((lo, hi))
    }

    fn local_unary(&mut self) -> PResult<Local> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Local::Not(Box::new(self.local_unary()?)))
            }
            Tok::F | Tok::G => {
                let is_f = self.bump() == Tok::F;
                let (lo, hi) = self.interval()?;
                let body = Box::new(self.local_unary()?);
                Ok(if is_f { Local::Eventually { lo, hi, body } } else { Local::Globally { lo, hi, body } })
            }
            Tok::If => {
                self.bump();
                let c = self.local()?;
                self.expect(Tok::Then, "`then`")?;
                let a = self.local()?;
                self.expect(Tok::Else, "`else`")?;
                let b = self.local()?;
                Ok(Local::Ite(Box::new(c), Box::new(a), Box::new(b)))
            }
            Tok::True => {
                self.bump();
                Ok(Local::Const(true))
            }
            Tok::False => {
                self.bump();
                Ok(Local::Const(false))
            }
            Tok::LParen => {
                // Either a parenthesized formula or an atom whose left term
                // starts with a parenthesis.
                let start = self.pos;
                match self.comparison() {
                    Ok(a) => Ok(Local::Atom(a)),
                    Err(e) => {
                        self.record(e);
                        self.pos = start;
                        self.bump();
                        let inner = self.local();
                        let inner = match inner {
                            Ok(l) => l,
                            Err(e) => {
                                self.record(e);
                                return Err(self.best.clone().unwrap());
                            }
                        };
                        if let Err(e) = self.expect(Tok::RParen, "`)`") {
                            self.record(e);
                            return Err(self.best.clone().unwrap());
                        }
                        self.best = None;
                        Ok(inner)
                    }
                }
            }
            _ => Ok(Local::Atom(self.atom()?)),
        }
    }

    fn is_predicate_call(&self) -> bool {
        if !matches!(self.peek(), Tok::Ident(_)) || self.peek_at(1) != &Tok::LParen {
            return false;
        }
        let mut depth = 0usize;
        let mut k = 1;
        loop {
            match self.peek_at(k) {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                Tok::Semi if depth == 1 => return true,
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        if self.is_predicate_call() {
            let name = self.ident()?;
            self.expect(Tok::LParen, "`(`")?;
            let mut args = Vec::new();
            if self.peek() != &Tok::Semi {
                args.push(self.term()?);
                while self.eat(&Tok::Comma) {
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::Semi, "`;` before the parameter list")?;
            let mut params = Vec::new();
            if self.peek() != &Tok::RParen {
                params.push(self.param()?);
                while self.eat(&Tok::Comma) {
                    params.push(self.param()?);
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Atom::Pred { name, args, params });
        }
        self.comparison()
    }

    fn param(&mut self) -> PResult<Param> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Param::Num(if neg { -(n as f64) } else { n as f64 }))
            }
            Tok::Real(x) => {
                self.bump();
                Ok(Param::Num(if neg { -x } else { x }))
            }
            Tok::Ident(s) if !neg => {
                self.bump();
                Ok(Param::Name(s))
            }
            _ => Err(self.expected("a number or parameter name")),
        }
    }

    fn comparison(&mut self) -> PResult<Atom> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.expected("a comparison operator")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Atom::Cmp { op, lhs, rhs })
    }

    // ---- terms ----

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.term_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term_mul()?;
            lhs = Term::Arith { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn term_mul(&mut self) -> PResult<Term> {
        let mut lhs = self.term_primary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.term_primary()?;
            lhs = Term::Arith { op: ArithOp::Mul, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn term_primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Num(n as f64))
            }
            Tok::Real(x) => {
                self.bump();
                Ok(Term::Num(x))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.bump();
                        Ok(Term::Num(-(n as f64)))
                    }
                    Tok::Real(x) => {
                        self.bump();
                        Ok(Term::Num(-x))
                    }
                    _ => Err(self.expected("a number after unary `-`")),
                }
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                let at_name = self.pos;
                self.bump();
                if self.eat(&Tok::Caret) {
                    let target = self.ident()?;
                    self.expect(Tok::LParen, "`(` after the clock pair")?;
                    let offset = self.signed_int()?;
                    self.expect(Tok::RParen, "`)`")?;
                    if self.binder.as_deref() == Some(name.as_str()) {
                        return Err(self.err_at(
                            at_name,
                            format!("clock pair `{name}^{target}` reads through the binding clock `{name}`"),
                        ));
                    }
                    return Ok(Term::Pair { mid: name, target, offset });
                }
                if self.peek() != &Tok::LParen {
                    return Ok(Term::Ref { name, offset: 0, at: None });
                }
                self.bump();
                let offset = self.signed_int()?;
                self.expect(Tok::RParen, "`)` after the offset")?;
                let at = if self.peek() == &Tok::LParen {
                    self.bump();
                    let t = self.term()?;
                    self.expect(Tok::RParen, "`)` after the time argument")?;
                    Some(Box::new(t))
                } else {
                    None
                };
                Ok(Term::Ref { name, offset, at })
            }
            _ => Err(self.expected("a term")),
        }
    }
}

fn parser(src: &str) -> PResult<Parser> {
    Ok(Parser { toks: lex(src)?, pos: 0, binder: None, best: None })
}

/// Parses a global formula.
pub fn parse(src: &str) -> Result<Global, ParseError> {
    let mut p = parser(src)?;
    let g = p.global()?;
    if p.peek() != &Tok::Eof {
        return Err(p.expected("end of input"));
    }
    Ok(g)
}

/// Parses a local formula bound to `clock` (used by tools that evaluate
/// a body at an explicit position).
pub fn parse_local(src: &str, clock: &str) -> Result<Local, ParseError> {
    let mut p = parser(src)?;
    p.binder = Some(clock.to_string());
    let l = p.local()?;
    if p.peek() != &Tok::Eof {
        return Err(p.expected("end of input"));
    }
    Ok(l)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = parser(src)?;
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return Err(p.expected("end of input"));
    }
    Ok(t)
}
