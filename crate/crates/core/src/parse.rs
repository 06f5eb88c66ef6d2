//! Text syntax for terms, types, annotated terms, trees, and the F side.
//!
//! Application binds tighter than `+`; `->` is right-associative and binds
//! tighter than `+`; `\`, `gen` and `forall` extend as far right as
//! possible. An unparenthesised chain `A + B + C` is one sum node.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::derivation::ArrowElim;
use crate::elaborate::ATerm;
use crate::sadd::{Labelling, TypeTree};
use crate::syntax::Term;
use crate::systemf::{FContext, FTerm, FType};
use crate::types::{Context, Type};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMS: &[&str] = &["->", "\\", ".", "(", ")", "+", ":", "[", "]", "{", "}", ";", ",", "<", ">", "*"];

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| c.is_alphanumeric() || c == '_' || c == '\'') {
                s.push(bump(&mut chars).unwrap());
            }
            let tok = if s == "λ" { Tok::Sym("\\") } else { Tok::Ident(s) };
            out.push(Spanned { tok, line: l, col: k });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars).unwrap());
            }
            let n = s.parse().map_err(|_| ParseError { line: l, col: k, msg: format!("number `{s}` is too large") })?;
            out.push(Spanned { tok: Tok::Num(n), line: l, col: k });
        } else if c == '∀' {
            bump(&mut chars);
            out.push(Spanned { tok: Tok::Ident("forall".into()), line: l, col: k });
        } else {
            let sym = match c {
                '-' => {
                    bump(&mut chars);
                    if chars.peek() != Some(&'>') {
                        return Err(ParseError { line: l, col: k, msg: "expected `->`".into() });
                    }
                    "->"
                }
                '→' => "->",
                'λ' => "\\",
                '⟨' => "<",
                '⟩' => ">",
                '×' => "*",
                _ => match SYMS.iter().find(|s| s.starts_with(c) && s.len() == 1) {
                    Some(s) => s,
                    None => return Err(ParseError { line: l, col: k, msg: format!("unexpected character `{c}`") }),
                },
            };
            bump(&mut chars);
            out.push(Spanned { tok: Tok::Sym(sym), line: l, col: k });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

type PResult<T> = Result<T, ParseError>;

const KEYWORDS: &[&str] = &["zero", "void", "forall", "gen", "inst", "star", "proj_l", "proj_r"];

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        let toks = lex(src)?;
        let lines: Vec<&str> = src.split('\n').collect();
        let end = (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1);
        Ok(Parser { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.col));
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Num(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        let hit = self.is_kw(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn number(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.err(format!("expected a number, found {}", self.describe())),
        }
    }

    fn done(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            return self.err(format!("unexpected {}", self.describe()));
        }
        Ok(())
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => !matches!(s.as_str(), "forall" | "gen" | "inst" | "proj_l" | "proj_r"),
            Some(Tok::Sym(s)) => matches!(*s, "(" | "<"),
            Some(Tok::Num(n)) => *n == 0,
            None => false,
        }
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<Type> {
        let first = self.arrow_ty()?;
        if !self.is_sym("+") {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat_sym("+") {
            parts.push(self.arrow_ty()?);
        }
        Ok(Type::Sum(parts))
    }

    fn arrow_ty(&mut self) -> PResult<Type> {
        if self.eat_kw("forall") {
            let x = self.name()?;
            self.expect_sym(".")?;
            let at = self.pos;
            let body = self.ty()?;
            if !body.is_unit() {
                self.pos = at;
                return self.err(format!("quantified body `{body}` is not a unit type"));
            }
            return Ok(Type::forall(x, body));
        }
        let at = self.pos;
        let dom = self.ty_atom()?;
        if self.eat_sym("->") {
            if !dom.is_unit() {
                self.pos = at;
                return self.err(format!("arrow domain `{dom}` is not a unit type"));
            }
            let cod = self.arrow_ty()?;
            return Ok(Type::arrow(dom, cod));
        }
        Ok(dom)
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        if self.eat_kw("void") {
            return Ok(Type::Zero);
        }
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_kw("forall") {
            return self.arrow_ty();
        }
        Ok(Type::var(self.name()?))
    }

    // ---- terms ----

    fn term(&mut self) -> PResult<Term> {
        let first = self.app_term()?;
        let mut parts = vec![first];
        while self.eat_sym("+") {
            parts.push(self.app_term()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Term::Sum(parts) })
    }

    fn app_term(&mut self) -> PResult<Term> {
        if self.eat_sym("\\") {
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(Term::lam(x, self.term()?));
        }
        let mut t = self.term_atom()?;
        loop {
            if self.is_sym("\\") {
                let arg = self.app_term()?;
                return Ok(Term::app(t, arg));
            }
            if !self.starts_atom() {
                return Ok(t);
            }
            t = Term::app(t, self.term_atom()?);
        }
    }

    fn term_atom(&mut self) -> PResult<Term> {
        if self.eat_kw("zero") {
            return Ok(Term::Zero);
        }
        if let Some(Tok::Num(0)) = self.peek() {
            self.pos += 1;
            return Ok(Term::Zero);
        }
        if self.eat_sym("(") {
            let t = self.term()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        Ok(Term::var(self.name()?))
    }

    // ---- annotated terms ----

    fn aterm(&mut self) -> PResult<ATerm> {
        let mut t = self.aapp()?;
        while self.eat_sym("+") {
            t = ATerm::plus(t, self.aapp()?);
        }
        Ok(t)
    }

    fn aapp(&mut self) -> PResult<ATerm> {
        if self.eat_sym("\\") {
            let x = self.name()?;
            self.expect_sym(":")?;
            let u = self.arrow_ty_no_forall()?;
            self.expect_sym(".")?;
            return Ok(ATerm::lam(&x, u, self.aterm()?));
        }
        if self.eat_kw("gen") {
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(ATerm::gen(&x, self.aterm()?));
        }
        let mut t = self.ahead()?;
        loop {
            if self.is_sym("\\") || self.is_kw("gen") {
                let arg = self.aapp()?;
                return Ok(ATerm::app(t, arg));
            }
            let arg = if self.is_kw("inst") {
                self.ahead()?
            } else if self.starts_atom() {
                self.aatom()?
            } else {
                return Ok(t);
            };
            t = match self.witness()? {
                Some(w) => ATerm::app_with(t, arg, w),
                None => ATerm::app(t, arg),
            };
        }
    }

    /// Lambda annotations stop at the `.`; a quantified domain needs parentheses.
    fn arrow_ty_no_forall(&mut self) -> PResult<Type> {
        if self.is_kw("forall") {
            return self.err("parenthesise a quantified binder type");
        }
        self.ty()
    }

    fn ahead(&mut self) -> PResult<ATerm> {
        if self.eat_kw("inst") {
            let t = if self.is_kw("inst") { self.ahead()? } else { self.aatom()? };
            self.expect_sym("[")?;
            let v = self.ty()?;
            self.expect_sym("]")?;
            return Ok(ATerm::inst(t, v));
        }
        self.aatom()
    }

    fn aatom(&mut self) -> PResult<ATerm> {
        if self.eat_kw("zero") {
            return Ok(ATerm::Zero);
        }
        if let Some(Tok::Num(0)) = self.peek() {
            self.pos += 1;
            return Ok(ATerm::Zero);
        }
        if self.eat_sym("(") {
            let t = self.aterm()?;
            if self.eat_sym(":") {
                let ty = self.ty()?;
                self.expect_sym(")")?;
                return Ok(ATerm::Ascribe(Box::new(t), ty));
            }
            self.expect_sym(")")?;
            return Ok(t);
        }
        Ok(ATerm::Var(self.name()?))
    }

    fn paren_types(&mut self, close: &str) -> PResult<Vec<Type>> {
        let mut out = Vec::new();
        if self.is_sym(close) || self.is_sym(";") || self.is_sym("}") {
            return Ok(out);
        }
        loop {
            out.push(self.ty()?);
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    /// `{alpha n; beta m; vars X Y; unit (U); results (T1), (T2); insts [(V)], [(W)]}`
    fn witness(&mut self) -> PResult<Option<ArrowElim>> {
        if !self.eat_sym("{") {
            return Ok(None);
        }
        self.expect_kw("alpha")?;
        let alpha = self.number()? as usize;
        self.expect_sym(";")?;
        self.expect_kw("beta")?;
        let beta = self.number()? as usize;
        self.expect_sym(";")?;
        self.expect_kw("vars")?;
        let mut binders = Vec::new();
        while !self.is_sym(";") {
            binders.push(self.name()?);
        }
        self.expect_sym(";")?;
        self.expect_kw("unit")?;
        let unit = self.ty()?;
        self.expect_sym(";")?;
        self.expect_kw("results")?;
        let results = self.paren_types(";")?;
        self.expect_sym(";")?;
        self.expect_kw("insts")?;
        let mut insts = Vec::new();
        while self.eat_sym("[") {
            insts.push(self.paren_types("]")?);
            self.expect_sym("]")?;
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        if results.len() != alpha || insts.len() != beta {
            return self.err(format!(
                "witness declares alpha {alpha}, beta {beta} but lists {} results and {} instantiations",
                results.len(),
                insts.len()
            ));
        }
        Ok(Some(ArrowElim { binders, unit, results, insts }))
    }

    // ---- trees ----

    fn tree(&mut self) -> PResult<TypeTree> {
        if self.eat_kw("L") {
            return Ok(TypeTree::Leaf);
        }
        if self.eat_kw("Z") {
            return Ok(TypeTree::ZeroLeaf);
        }
        self.expect_sym("(")?;
        let a = self.tree()?;
        self.expect_sym(".")?;
        let b = self.tree()?;
        self.expect_sym(")")?;
        Ok(TypeTree::node(a, b))
    }

    fn word(&mut self) -> PResult<String> {
        let w = self.name()?;
        if w == "eps" {
            return Ok(String::new());
        }
        if w.chars().all(|c| c == 'l' || c == 'r') {
            return Ok(w);
        }
        self.pos -= 1;
        self.err(format!("`{w}` is not a word over l and r"))
    }

    fn labelling(&mut self) -> PResult<Labelling> {
        self.expect_sym("{")?;
        let mut out = BTreeMap::new();
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            let w = self.word()?;
            self.expect_sym(":")?;
            out.insert(w, self.ty()?);
            if self.eat_sym("}") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    // ---- System F with pairs ----

    fn fty(&mut self) -> PResult<FType> {
        if self.eat_kw("forall") {
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(FType::forall(x, self.fty()?));
        }
        let dom = self.fprod()?;
        if self.eat_sym("->") {
            return Ok(FType::arrow(dom, self.fty()?));
        }
        Ok(dom)
    }

    fn fprod(&mut self) -> PResult<FType> {
        let mut t = self.fty_atom()?;
        while self.eat_sym("*") {
            t = FType::prod(t, self.fty_atom()?);
        }
        Ok(t)
    }

    fn fty_atom(&mut self) -> PResult<FType> {
        if let Some(Tok::Num(1)) = self.peek() {
            self.pos += 1;
            return Ok(FType::One);
        }
        if self.eat_sym("(") {
            let t = self.fty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_kw("forall") {
            return self.fty();
        }
        Ok(FType::var(self.name()?))
    }

    fn fterm(&mut self) -> PResult<FTerm> {
        if self.eat_sym("\\") {
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(FTerm::lam(x, self.fterm()?));
        }
        let mut t = self.fhead()?;
        loop {
            if self.is_sym("\\") {
                let arg = self.fterm()?;
                return Ok(FTerm::app(t, arg));
            }
            if !self.starts_atom() {
                return Ok(t);
            }
            t = FTerm::app(t, self.fatom()?);
        }
    }

    fn fhead(&mut self) -> PResult<FTerm> {
        if self.eat_kw("proj_l") {
            return Ok(FTerm::proj_l(self.fatom()?));
        }
        if self.eat_kw("proj_r") {
            return Ok(FTerm::proj_r(self.fatom()?));
        }
        self.fatom()
    }

    fn fatom(&mut self) -> PResult<FTerm> {
        if self.eat_kw("star") {
            return Ok(FTerm::Star);
        }
        if self.eat_sym("<") {
            let a = self.fterm()?;
            self.expect_sym(",")?;
            let b = self.fterm()?;
            self.expect_sym(">")?;
            return Ok(FTerm::pair(a, b));
        }
        if self.eat_sym("(") {
            let t = self.fterm()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_kw("proj_l") || self.is_kw("proj_r") {
            return self.fhead();
        }
        Ok(FTerm::var(self.name()?))
    }

    fn entries<T>(&mut self, item: fn(&mut Parser) -> PResult<T>) -> PResult<Vec<(String, T)>> {
        let mut out = Vec::new();
        if self.peek().is_none() {
            return Ok(out);
        }
        loop {
            let x = self.name()?;
            self.expect_sym(":")?;
            out.push((x, item(self)?));
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }
}

fn whole<T>(src: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
    let mut p = Parser::new(src)?;
    let out = f(&mut p)?;
    p.done()?;
    Ok(out)
}

/// Parses a term and returns its canonical form.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    whole(src, |p| p.term()).map(|t| t.canonicalize())
}

/// Parses a type, keeping the written sum structure.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    whole(src, |p| p.ty())
}

pub fn parse_aterm(src: &str) -> Result<ATerm, ParseError> {
    whole(src, |p| p.aterm())
}

/// `x : U, y : V`; the empty string is the empty context.
pub fn parse_context(src: &str) -> Result<Context, ParseError> {
    let pairs = whole(src, |p| p.entries(Parser::ty))?;
    Context::from_pairs(pairs).map_err(|e| ParseError { line: 1, col: 1, msg: e.to_string() })
}

pub fn parse_tree(src: &str) -> Result<TypeTree, ParseError> {
    whole(src, |p| p.tree())
}

pub fn parse_labelling(src: &str) -> Result<Labelling, ParseError> {
    whole(src, |p| p.labelling())
}

pub fn parse_fterm(src: &str) -> Result<FTerm, ParseError> {
    whole(src, |p| p.fterm())
}

pub fn parse_ftype(src: &str) -> Result<FType, ParseError> {
    whole(src, |p| p.fty())
}

pub fn parse_fcontext(src: &str) -> Result<FContext, ParseError> {
    let pairs = whole(src, |p| p.entries(Parser::fty))?;
    let mut ctx = FContext::new();
    for (x, a) in pairs {
        ctx = ctx.extend(x.clone(), a).ok_or_else(|| ParseError {
            line: 1,
            col: 1,
            msg: format!("`{x}` is declared twice"),
        })?;
    }
    Ok(ctx)
}

/// Helper for tests and fixtures: panics on malformed input.
pub fn ty(src: &str) -> Type {
    parse_type(src).unwrap_or_else(|e| panic!("bad type `{src}`: {e}"))
}

/// Helper for tests and fixtures: panics on malformed input.
pub fn term(src: &str) -> Term {
    parse_term(src).unwrap_or_else(|e| panic!("bad term `{src}`: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(term("\\x. x + zero"), Term::lam("x", Term::plus(Term::var("x"), Term::Zero)).canonicalize());
        assert_eq!(
            term("(t + u) s"),
            Term::app(Term::plus(Term::var("t"), Term::var("u")), Term::var("s")).canonicalize()
        );
        assert_eq!(term("f a b"), Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b")));
        assert_eq!(ty("forall X. X -> X"), Type::forall("X", Type::arrow(Type::var("X"), Type::var("X"))));
        assert_eq!(ty("A -> B -> C"), Type::arrow(Type::var("A"), Type::arrow(Type::var("B"), Type::var("C"))));
        assert_eq!(ty("A -> B + C"), Type::Sum(vec![Type::arrow(Type::var("A"), Type::var("B")), Type::var("C")]));
        assert_eq!(ty("(A + B) + void"), Type::plus(Type::plus(Type::var("A"), Type::var("B")), Type::Zero));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_term("\\x x").unwrap_err();
        assert_eq!((e.line, e.col), (1, 4));
        let e = parse_type("forall X. X + X").unwrap_err();
        assert!(e.msg.contains("not a unit type"));
        let e = parse_type("(A + B) -> C").unwrap_err();
        assert_eq!(e.col, 1);
        let e = parse_term("x\n  )").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
    }

    #[test]
    fn printing_round_trips() {
        for src in ["\\x. x + zero", "(t + u) s", "\\x. \\y. x (y y) + y", "f (\\x. x) + zero + zero", "f 0"] {
            let t = term(src);
            assert_eq!(term(&t.to_string()), t, "{src}");
        }
        for src in ["forall X. X -> X", "(A + void) + (B -> C)", "A + B + C", "(forall X. X) -> Y", "A -> (B + C)"] {
            let t = ty(src);
            assert_eq!(ty(&t.to_string()), t, "{src}");
        }
    }

    #[test]
    fn annotated_terms() {
        let src = "(\\f:A -> B. f a {alpha 1; beta 1; vars ; unit (A); results (B); insts []}) g";
        let t = parse_aterm(src).unwrap();
        assert_eq!(parse_aterm(&t.to_string()).unwrap(), t);
        let t = parse_aterm("inst (gen X. \\x:X. x) [A] a + (zero : void)").unwrap();
        assert_eq!(parse_aterm(&t.to_string()).unwrap(), t);
        assert!(parse_aterm("f a {alpha 2; beta 1; vars ; unit (A); results (B); insts []}").is_err());
    }

    #[test]
    fn trees_and_labellings() {
        let t = parse_tree("((L . (Z . L)) . L)").unwrap();
        assert_eq!(parse_tree(&t.to_string()).unwrap(), t);
        let l = parse_labelling("{ll: U1, lrr: U2, r: U3}").unwrap();
        assert_eq!(t.label_map(&l).unwrap().to_string(), "(U1 + (void + U2)) + U3");
        assert_eq!(parse_labelling("{eps: A}").unwrap()[""], ty("A"));
        assert!(parse_labelling("{lx: A}").is_err());
    }

    #[test]
    fn f_syntax() {
        for src in ["\\x. proj_l <x, star>", "proj_l x y", "f (proj_r (g x))", "<<a, b>, star>"] {
            let t = parse_fterm(src).unwrap();
            assert_eq!(parse_fterm(&t.to_string()).unwrap(), t, "{src}");
        }
        for src in ["A * 1 * B -> C", "forall X. X -> X * X", "A * (B * C)", "(A -> B) * C"] {
            let t = parse_ftype(src).unwrap();
            assert_eq!(parse_ftype(&t.to_string()).unwrap(), t, "{src}");
        }
        let ctx = parse_fcontext("x : A * B, y : 1").unwrap();
        assert_eq!(ctx.get("y"), Some(&FType::One));
    }

    #[test]
    fn contexts() {
        let c = parse_context("x : A -> B, y : forall X. X").unwrap();
        assert_eq!(parse_context(&c.to_string()).unwrap(), c);
        assert!(parse_context("").unwrap().is_empty());
    }
}
