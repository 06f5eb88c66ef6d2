//! Terms of the non-deterministic call-by-value calculus.
//!
//! Terms are stored locally nameless: bound variables are de Bruijn indices,
//! free variables carry their names. Binders keep a name hint for printing
//! only, so alpha-equivalent terms are structurally equal. Sums are n-ary and
//! kept flattened and sorted (AC-canonical form); `Zero` is never dropped from
//! a sum by canonicalisation, only by the `t + 0 -> t` reduction rule.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

/// A printing hint attached to a binder. Ignored by equality, ordering and hashing.
#[derive(Clone, Debug, Default)]
pub struct Binder(pub String);

impl Binder {
    pub fn new(name: impl Into<String>) -> Self {
        Binder(name.into())
    }
}

impl PartialEq for Binder {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Binder {}
impl PartialOrd for Binder {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Binder {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}
impl Hash for Binder {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// A variable occurrence: a de Bruijn index or a free name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Bound(u32),
    Free(String),
}

/// Constructor order (Var < Abs < App < Sum < Zero) is the derived order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Abs(Binder, Box<Term>),
    App(Box<Term>, Box<Term>),
    Sum(Vec<Term>),
    Zero,
}

/// Whether a term is a value, a pseudo-value (sum of abstractions) or neutral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermClass {
    Value,
    PseudoValue,
    Neutral,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(Var::Free(name.into()))
    }

    /// `\name. body`, closing `body` over the free variable `name`.
    pub fn lam(name: impl Into<String>, body: Term) -> Term {
        let name = name.into();
        let body = body.close(&name);
        Term::Abs(Binder(name), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Canonical sum of two terms.
    pub fn plus(a: Term, b: Term) -> Term {
        Term::Sum(vec![a, b]).canonicalize()
    }

    /// Canonical sum of a list; the empty list is not a sum and yields `Zero`.
    pub fn sum_of(mut items: Vec<Term>) -> Term {
        match items.len() {
            0 => Term::Zero,
            1 => items.pop().unwrap(),
            _ => Term::Sum(items).canonicalize(),
        }
    }

    /// Values are variables and abstractions.
    pub fn is_value(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Abs(..))
    }

    pub fn classify(&self) -> TermClass {
        match self {
            Term::Var(_) => TermClass::Value,
            Term::Abs(..) => TermClass::Value,
            Term::Sum(ts) if ts.iter().all(|t| t.is_pseudo_value()) => TermClass::PseudoValue,
            _ => TermClass::Neutral,
        }
    }

    fn is_pseudo_value(&self) -> bool {
        match self {
            Term::Abs(..) => true,
            Term::Sum(ts) => ts.iter().all(|t| t.is_pseudo_value()),
            _ => false,
        }
    }

    /// The summands of a sum, or the term itself.
    pub fn summands(&self) -> &[Term] {
        match self {
            Term::Sum(ts) => ts,
            t => std::slice::from_ref(t),
        }
    }

    /// AC-canonical representative: sums flattened and sorted, recursively.
    pub fn canonicalize(&self) -> Term {
        match self {
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Abs(b, body) => Term::Abs(b.clone(), Box::new(body.canonicalize())),
            Term::App(f, a) => Term::app(f.canonicalize(), a.canonicalize()),
            Term::Sum(ts) => {
                let mut flat = Vec::with_capacity(ts.len());
                for t in ts {
                    match t.canonicalize() {
                        Term::Sum(inner) => flat.extend(inner),
                        c => flat.push(c),
                    }
                }
                flat.sort();
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Term::Sum(flat)
                }
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonicalize()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(Var::Free(x)) => {
                out.insert(x.clone());
            }
            Term::Var(Var::Bound(_)) | Term::Zero => {}
            Term::Abs(_, b) => b.collect_free(out),
            Term::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
            Term::Sum(ts) => ts.iter().for_each(|t| t.collect_free(out)),
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(Var::Free(y)) => x == y,
            Term::Var(Var::Bound(_)) | Term::Zero => false,
            Term::Abs(_, b) => b.has_free(x),
            Term::App(f, a) => f.has_free(x) || a.has_free(x),
            Term::Sum(ts) => ts.iter().any(|t| t.has_free(x)),
        }
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Sum(ts) => 1 + ts.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Adds `by` to every index that escapes `cutoff` enclosing binders.
    pub fn shift(&self, by: u32, cutoff: u32) -> Term {
        if by == 0 {
            return self.clone();
        }
        match self {
            Term::Var(Var::Bound(i)) if *i >= cutoff => Term::Var(Var::Bound(i + by)),
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Abs(b, body) => Term::Abs(b.clone(), Box::new(body.shift(by, cutoff + 1))),
            Term::App(f, a) => Term::app(f.shift(by, cutoff), a.shift(by, cutoff)),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| t.shift(by, cutoff)).collect()),
        }
    }

    /// Replaces the outermost dangling index of an abstraction body by `v`
    /// (beta contraction); `v` may itself contain dangling indices.
    pub fn instantiate(&self, v: &Term) -> Term {
        self.instantiate_at(v, 0).canonicalize()
    }

    fn instantiate_at(&self, v: &Term, depth: u32) -> Term {
        match self {
            Term::Var(Var::Bound(i)) => match (*i).cmp(&depth) {
                Ordering::Equal => v.shift(depth, 0),
                Ordering::Greater => Term::Var(Var::Bound(i - 1)),
                Ordering::Less => self.clone(),
            },
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Abs(b, body) => Term::Abs(b.clone(), Box::new(body.instantiate_at(v, depth + 1))),
            Term::App(f, a) => Term::app(f.instantiate_at(v, depth), a.instantiate_at(v, depth)),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| t.instantiate_at(v, depth)).collect()),
        }
    }

    /// Opens an abstraction body with the free variable `name`.
    pub fn open(&self, name: &str) -> Term {
        self.instantiate(&Term::var(name))
    }

    /// Abstracts the free variable `name` as the index of a new outermost binder.
    pub fn close(&self, name: &str) -> Term {
        self.close_at(name, 0).canonicalize()
    }

    fn close_at(&self, name: &str, depth: u32) -> Term {
        match self {
            Term::Var(Var::Free(x)) if x == name => Term::Var(Var::Bound(depth)),
            Term::Var(Var::Bound(i)) if *i >= depth => Term::Var(Var::Bound(i + 1)),
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Abs(b, body) => Term::Abs(b.clone(), Box::new(body.close_at(name, depth + 1))),
            Term::App(f, a) => Term::app(f.close_at(name, depth), a.close_at(name, depth)),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| t.close_at(name, depth)).collect()),
        }
    }

    /// Capture-avoiding `self[v/x]`, canonical.
    pub fn substitute(&self, x: &str, v: &Term) -> Term {
        self.subst_at(x, v, 0).canonicalize()
    }

    fn subst_at(&self, x: &str, v: &Term, depth: u32) -> Term {
        match self {
            Term::Var(Var::Free(y)) if x == y => v.shift(depth, 0),
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Abs(b, body) => Term::Abs(b.clone(), Box::new(body.subst_at(x, v, depth + 1))),
            Term::App(f, a) => Term::app(f.subst_at(x, v, depth), a.subst_at(x, v, depth)),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| t.subst_at(x, v, depth)).collect()),
        }
    }

    /// True when no de Bruijn index escapes the term.
    pub fn is_locally_closed(&self) -> bool {
        fn go(t: &Term, depth: u32) -> bool {
            match t {
                Term::Var(Var::Bound(i)) => *i < depth,
                Term::Var(_) | Term::Zero => true,
                Term::Abs(_, b) => go(b, depth + 1),
                Term::App(f, a) => go(f, depth) && go(a, depth),
                Term::Sum(ts) => ts.iter().all(|t| go(t, depth)),
            }
        }
        go(self, 0)
    }

    /// The subterm at `path`, if the path is valid.
    pub fn at(&self, path: &[Step]) -> Option<&Term> {
        let mut cur = self;
        for step in path {
            cur = match (step, cur) {
                (Step::Body, Term::Abs(_, b)) => b,
                (Step::Fun, Term::App(f, _)) => f,
                (Step::Arg, Term::App(_, a)) => a,
                (Step::Summand(i), Term::Sum(ts)) => ts.get(*i)?,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Replaces the subterm at `path` and re-canonicalises.
    pub fn replace_at(&self, path: &[Step], new: Term) -> Option<Term> {
        Some(self.replace_raw(path, new)?.canonicalize())
    }

    fn replace_raw(&self, path: &[Step], new: Term) -> Option<Term> {
        let Some((step, rest)) = path.split_first() else {
            return Some(new);
        };
        Some(match (step, self) {
            (Step::Body, Term::Abs(b, body)) => Term::Abs(b.clone(), Box::new(body.replace_raw(rest, new)?)),
            (Step::Fun, Term::App(f, a)) => Term::App(Box::new(f.replace_raw(rest, new)?), a.clone()),
            (Step::Arg, Term::App(f, a)) => Term::App(f.clone(), Box::new(a.replace_raw(rest, new)?)),
            (Step::Summand(i), Term::Sum(ts)) if *i < ts.len() => {
                let mut ts = ts.clone();
                ts[*i] = ts[*i].replace_raw(rest, new)?;
                Term::Sum(ts)
            }
            _ => return None,
        })
    }
}

/// One step of a path into a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Body,
    Fun,
    Arg,
    Summand(usize),
}

/// A position in a canonical term.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<Step>);

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, ".");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                Step::Body => "b".to_string(),
                Step::Fun => "f".to_string(),
                Step::Arg => "a".to_string(),
                Step::Summand(i) => i.to_string(),
            })
            .collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Picks `base`, `base1`, `base2`, ... avoiding every name in `taken`.
pub fn fresh_name(base: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    if !taken(base) && !base.is_empty() {
        return base.to_string();
    }
    (1..).map(|i| format!("{stem}{i}")).find(|n| !taken(n)).unwrap()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let free = self.free_vars();
        let mut env = Vec::new();
        write_term(f, self, &free, &mut env, Prec::Top)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    Sum,
    App,
    Atom,
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    t: &Term,
    free: &BTreeSet<String>,
    env: &mut Vec<String>,
    prec: Prec,
) -> fmt::Result {
    match t {
        Term::Var(Var::Free(x)) => write!(f, "{x}"),
        Term::Var(Var::Bound(i)) => match env.len().checked_sub(*i as usize + 1) {
            Some(k) => write!(f, "{}", env[k]),
            None => write!(f, "#{i}"),
        },
        Term::Zero => write!(f, "zero"),
        Term::Abs(b, body) => {
            let hint = if b.0.is_empty() { "x" } else { b.0.as_str() };
            let name = fresh_name(hint, &|n| free.contains(n) || env.iter().any(|e| e == n));
            if prec > Prec::Top {
                write!(f, "(")?;
            }
            write!(f, "\\{name}. ")?;
            env.push(name);
            write_term(f, body, free, env, Prec::Top)?;
            env.pop();
            if prec > Prec::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::App(fun, arg) => {
            if prec > Prec::App {
                write!(f, "(")?;
            }
            write_term(f, fun, free, env, Prec::App)?;
            write!(f, " ")?;
            write_term(f, arg, free, env, Prec::Atom)?;
            if prec > Prec::App {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Sum(ts) => {
            if prec > Prec::Sum {
                write!(f, "(")?;
            }
            for (i, s) in ts.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                // summands are printed at application level so nested sums keep parentheses
                write_term(f, s, free, env, Prec::App)?;
            }
            if prec > Prec::Sum {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }
    fn y() -> Term {
        Term::var("y")
    }
    fn z() -> Term {
        Term::var("z")
    }

    #[test]
    fn sums_are_commutative_and_associative() {
        let a = Term::Sum(vec![x(), y()]).canonicalize();
        let b = Term::Sum(vec![y(), x()]).canonicalize();
        assert_eq!(a, b);
        let nested = Term::Sum(vec![x(), Term::Sum(vec![y(), z()])]).canonicalize();
        assert_eq!(nested, Term::Sum(vec![x(), y(), z()]));
    }

    #[test]
    fn alpha_variants_coincide() {
        assert_eq!(Term::lam("x", x()), Term::lam("y", y()));
    }

    #[test]
    fn zero_stays_in_sums() {
        let t = Term::Sum(vec![Term::Zero, x()]).canonicalize();
        assert_eq!(t, Term::Sum(vec![x(), Term::Zero]));
        let zz = Term::Sum(vec![Term::Zero, Term::Sum(vec![Term::Zero, Term::Zero])]).canonicalize();
        assert_eq!(zz, Term::Sum(vec![Term::Zero, Term::Zero, Term::Zero]));
    }

    #[test]
    fn substitution_examples() {
        let id = Term::lam("z", z());
        // (\y. x)[x := \z. z]
        let t = Term::lam("y", x()).substitute("x", &id);
        assert_eq!(t, Term::lam("y", id.clone()));
        // (x x)[x := \z. z]
        let t = Term::app(x(), x()).substitute("x", &id);
        assert_eq!(t, Term::app(id.clone(), id.clone()));
    }

    #[test]
    fn substitution_avoids_capture() {
        // (\y. y x)[x := y] is \w. w y, and not \y. y y
        let t = Term::lam("y", Term::app(y(), x())).substitute("x", &y());
        // oracle: rename the binder first, then substitute textually
        let renamed = Term::lam("w", Term::app(Term::var("w"), y()));
        assert_eq!(t, renamed);
        assert_ne!(t, Term::lam("y", Term::app(y(), y())));
        assert_eq!(t.to_string(), "\\y1. y1 y");
    }

    #[test]
    fn free_variable_examples() {
        let t = Term::lam("x", Term::app(x(), y()));
        assert_eq!(t.free_vars(), BTreeSet::from(["y".to_string()]));
        assert!(Term::Zero.free_vars().is_empty());
        let s = Term::plus(x(), Term::lam("x", x()));
        assert_eq!(s.free_vars(), BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn classification() {
        let id = Term::lam("x", x());
        assert_eq!(id.classify(), TermClass::Value);
        let s = Term::plus(id.clone(), Term::lam("y", y()));
        assert_eq!(s.classify(), TermClass::PseudoValue);
        assert!(!s.is_value());
        assert_eq!(Term::app(id.clone(), id).classify(), TermClass::Neutral);
        assert_eq!(Term::Zero.classify(), TermClass::Neutral);
    }

    #[test]
    fn instantiate_under_binders_shifts() {
        // \a. (\b. b a) c  with c = outer bound var a (index 0 from the redex position)
        let body = Term::app(Term::Var(Var::Bound(0)), Term::Var(Var::Bound(1)));
        let v = Term::Var(Var::Bound(0));
        let r = body.instantiate(&v);
        assert_eq!(r, Term::app(Term::Var(Var::Bound(0)), Term::Var(Var::Bound(0))));
    }
}
