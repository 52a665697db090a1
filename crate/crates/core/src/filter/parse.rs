use super::{preset, CmpOp, Field, FilterExpr, Literal, Slot};
use crate::error::{Error, Result};
use crate::taxonomy::TaxonomyField;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Preset(String),
    Str(String),
    Num(String),
    Op(CmpOp),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Expr {
        offset,
        message: message.into(),
    })
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let is_word = |c: char| c.is_alphanumeric() || c == '_' || c == '.';
    while let Some(&(i, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '(' | ')' | '{' | '}' | ',' => {
                chars.next();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    _ => Tok::Comma,
                }
            }
            '<' | '>' | '=' | '!' => {
                chars.next();
                let eq = chars.next_if(|&(_, c)| c == '=').is_some();
                Tok::Op(match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    ('>', true) => CmpOp::Ge,
                    ('=', _) => CmpOp::Eq,
                    ('!', true) => CmpOp::Ne,
                    _ => return err(i, "expected '!='"),
                })
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, c @ ('"' | '\\'))) => s.push(c),
                            Some((j, _)) => return err(j, "unknown escape"),
                            None => return err(i, "unterminated string"),
                        },
                        Some((_, c)) => s.push(c),
                        None => return err(i, "unterminated string"),
                    }
                }
                Tok::Str(s)
            }
            '@' => {
                chars.next();
                let mut name = String::new();
                while let Some((_, c)) = chars.next_if(|&(_, c)| c.is_alphanumeric() || c == '-' || c == '_') {
                    name.push(c);
                }
                if name.is_empty() {
                    return err(i, "expected preset name after '@'");
                }
                Tok::Preset(name)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut num = String::new();
                num.push(c);
                chars.next();
                let mut prev = c;
                while let Some((_, c)) = chars.next_if(|&(_, c)| {
                    c.is_ascii_alphanumeric() || c == '.' || ((c == '-' || c == '+') && matches!(prev, 'e' | 'E'))
                }) {
                    num.push(c);
                    prev = c;
                }
                Tok::Num(num)
            }
            c if is_word(c) => {
                let mut w = String::new();
                while let Some((_, c)) = chars.next_if(|&(_, c)| is_word(c)) {
                    w.push(c);
                }
                Tok::Word(w)
            }
            _ => return err(i, format!("unexpected character {c:?}")),
        };
        out.push((i, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.at_word(w);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let at = self.offset();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => err(at, format!("expected {what}")),
        }
    }

    fn expr(&mut self) -> Result<FilterExpr> {
        let mut parts = vec![self.and()?];
        while self.eat_word("or") {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FilterExpr::Or(parts) })
    }

    fn and(&mut self) -> Result<FilterExpr> {
        let mut parts = vec![self.unary()?];
        while self.eat_word("and") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FilterExpr::And(parts) })
    }

    fn unary(&mut self) -> Result<FilterExpr> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Word(w)) if w == "not" => Ok(FilterExpr::Not(Box::new(self.unary()?))),
            Some(Tok::Word(w)) if w == "true" => Ok(FilterExpr::Const(true)),
            Some(Tok::Word(w)) if w == "false" => Ok(FilterExpr::Const(false)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Preset(name)) => preset(&name).map_err(|e| match e {
                Error::UnknownPreset { .. } => Error::Expr {
                    offset: at,
                    message: e.to_string(),
                },
                other => other,
            }),
            Some(Tok::Word(w)) => {
                let field = resolve_field(&w).ok_or_else(|| Error::Expr {
                    offset: at,
                    message: format!("unknown field {w:?}"),
                })?;
                self.test(field)
            }
            _ => err(at, "expected a predicate"),
        }
    }

    fn test(&mut self, field: Field) -> Result<FilterExpr> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Op(op)) => {
                let lit_at = self.offset();
                let value = self.literal()?;
                match (&value, field.is_numeric()) {
                    (Literal::Str(_), false) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {}
                    (Literal::Str(_), false) => return err(at, format!("{field} is a label; use = or !=")),
                    (Literal::Num(_) | Literal::Int(_), true) => {}
                    _ => {
                        let kind = if field.is_numeric() { "number" } else { "quoted string" };
                        return err(lit_at, format!("{field} compares against a {kind}"));
                    }
                }
                Ok(FilterExpr::Compare { field, op, value })
            }
            Some(Tok::Word(w)) if w == "not" => {
                let inner = self.membership(field, at)?;
                Ok(FilterExpr::Not(Box::new(inner)))
            }
            Some(Tok::Word(w)) if w == "in" || w == "prefix_in" => {
                self.pos -= 1;
                self.membership(field, at)
            }
            Some(Tok::Word(w)) if w == "is" => {
                let e = FilterExpr::Absent(field);
                if self.eat_word("absent") {
                    Ok(e)
                } else if self.eat_word("present") {
                    Ok(FilterExpr::Not(Box::new(e)))
                } else {
                    err(self.offset(), "expected 'absent' or 'present'")
                }
            }
            _ => err(at, "expected a comparison, 'in', 'prefix_in' or 'is'"),
        }
    }

    fn membership(&mut self, field: Field, at: usize) -> Result<FilterExpr> {
        if field.is_numeric() {
            return err(at, format!("{field} is numeric; membership tests need a label field"));
        }
        if self.eat_word("in") {
            return Ok(FilterExpr::In {
                field,
                set: self.string_set()?,
            });
        }
        if self.eat_word("prefix_in") {
            let mut len = None;
            if self.peek() == Some(&Tok::LParen) {
                self.pos += 1;
                let n_at = self.offset();
                match self.next() {
                    Some(Tok::Num(n)) => match n.parse::<usize>() {
                        Ok(n) if n > 0 => len = Some(n),
                        _ => return err(n_at, "prefix length must be a positive integer"),
                    },
                    _ => return err(n_at, "expected prefix length"),
                }
                self.expect(Tok::RParen, "')'")?;
            }
            let keys_at = self.offset();
            let keys = self.string_set()?;
            if keys.iter().any(String::is_empty) {
                return err(keys_at, "prefix keys must be nonempty");
            }
            return Ok(FilterExpr::PrefixIn { field, len, keys });
        }
        err(self.offset(), "expected 'in' or 'prefix_in'")
    }

    fn literal(&mut self) -> Result<Literal> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Str(s)) => Ok(Literal::Str(s)),
            Some(Tok::Num(n)) => {
                if let Ok(i) = n.parse::<u64>() {
                    return Ok(Literal::Int(i));
                }
                match n.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(Literal::Num(x)),
                    _ => err(at, format!("invalid number {n:?}")),
                }
            }
            _ => err(at, "expected a literal"),
        }
    }

    fn string_set(&mut self) -> Result<Vec<String>> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut items = Vec::new();
        loop {
            if self.peek() == Some(&Tok::RBrace) {
                self.pos += 1;
                return Ok(items);
            }
            let at = self.offset();
            match self.next() {
                Some(Tok::Str(s)) => items.push(s),
                _ => return err(at, "set members are quoted strings"),
            }
            match self.next() {
                Some(Tok::Comma) => {}
                Some(Tok::RBrace) => return Ok(items),
                _ => return err(at, "expected ',' or '}'"),
            }
        }
    }
}

fn resolve_field(path: &str) -> Option<Field> {
    let parts: Vec<&str> = path.split('.').collect();
    match parts.as_slice() {
        ["url"] => Some(Field::Url),
        ["id"] => Some(Field::Id),
        ["quality_signals", name] | ["scores", name] if name.is_empty() => None,
        ["quality_signals", name] => Some(Field::Signal((*name).to_owned())),
        ["scores", name] => Some(Field::Score((*name).to_owned())),
        ["eai_taxonomy", rest @ ..] => label_field(rest),
        [name] if !name.is_empty() => Some(Field::Score((*name).to_owned())),
        rest => label_field(rest),
    }
}

fn label_field(parts: &[&str]) -> Option<Field> {
    let (field, slot, tail) = match parts {
        [f, s] => (f, s, None),
        [f, s, t] => (f, s, Some(*t)),
        _ => return None,
    };
    if tail.is_some_and(|t| t != "code") {
        return None;
    }
    let slot = match *slot {
        "primary" => Slot::Primary,
        "secondary" => Slot::Secondary,
        _ => return None,
    };
    Some(Field::Label(TaxonomyField::from_key(field)?, slot))
}

pub fn parse_filter(text: &str) -> Result<FilterExpr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    if p.toks.is_empty() {
        return err(0, "empty filter expression");
    }
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return err(p.offset(), "unexpected trailing input");
    }
    Ok(e)
}
