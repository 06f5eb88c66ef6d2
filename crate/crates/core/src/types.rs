//! Types of the additive system: unit types, sums, the zero type, the
//! equivalence `≡` (commutativity, associativity, neutrality of the zero type),
//! substitution, and witnessed checking of the instance relation `≼`.
//!
//! Types are locally nameless like terms. A raw type keeps whatever binary
//! sum structure it was built with (the structured system relies on that);
//! [`Type::canonicalize`] produces the representative of its `≡`-class.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{fresh_name, Binder};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TyVar {
    Bound(u32),
    Free(String),
}

/// Constructor order (Var < Arrow < Forall < Sum < Zero) is the derived order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Var(TyVar),
    Arrow(Box<Type>, Box<Type>),
    Forall(Binder, Box<Type>),
    Sum(Vec<Type>),
    Zero,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("only unit types may be substituted for a type variable, got `{0}`")]
    NonUnitSubstitution(Type),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("ill-formed type `{0}`: {1}")]
    IllFormed(Type, &'static str),
    #[error("term variable `{0}` is already bound in the context")]
    DuplicateVariable(String),
}

impl Type {
    pub fn var(name: impl Into<String>) -> Type {
        Type::Var(TyVar::Free(name.into()))
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod))
    }

    /// `forall name. body`, closing `body` over the free type variable `name`.
    pub fn forall(name: impl Into<String>, body: Type) -> Type {
        let name = name.into();
        let body = body.close(&name);
        Type::Forall(Binder(name), Box::new(body))
    }

    /// Raw binary sum `a + b`.
    pub fn plus(a: Type, b: Type) -> Type {
        Type::Sum(vec![a, b])
    }

    /// Left-associated raw sum; `Zero` for an empty list.
    pub fn sum_of(items: Vec<Type>) -> Type {
        let mut it = items.into_iter();
        match it.next() {
            None => Type::Zero,
            Some(first) => it.fold(first, Type::plus),
        }
    }

    /// `Σ_{i=1..n} T_i` read literally: `Σ^0 = 0̄`, `Σ^n = Σ^{n-1} + T_n`.
    pub fn sigma(items: Vec<Type>) -> Type {
        items.into_iter().fold(Type::Zero, Type::plus)
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Type::Var(_) | Type::Arrow(..) | Type::Forall(..))
    }

    /// Grammar check: arrow domains and quantifier bodies are unit types,
    /// raw sums have at least two summands.
    pub fn well_formed(&self) -> Result<(), TypeError> {
        match self {
            Type::Var(_) | Type::Zero => Ok(()),
            Type::Arrow(d, c) => {
                if !d.is_unit() {
                    return Err(TypeError::IllFormed(self.clone(), "arrow domain is not a unit type"));
                }
                d.well_formed()?;
                c.well_formed()
            }
            Type::Forall(_, b) => {
                if !b.is_unit() {
                    return Err(TypeError::IllFormed(self.clone(), "quantifier body is not a unit type"));
                }
                b.well_formed()
            }
            Type::Sum(ts) => {
                if ts.len() < 2 {
                    return Err(TypeError::IllFormed(self.clone(), "sum with fewer than two summands"));
                }
                ts.iter().try_for_each(Type::well_formed)
            }
        }
    }

    /// Representative of the `≡`-class: sums flattened, sorted and rid of
    /// `0̄`; an empty residue is `0̄`, a single one is the unit itself.
    pub fn canonicalize(&self) -> Type {
        match self {
            Type::Var(_) | Type::Zero => self.clone(),
            Type::Arrow(d, c) => Type::arrow(d.canonicalize(), c.canonicalize()),
            Type::Forall(b, body) => Type::Forall(b.clone(), Box::new(body.canonicalize())),
            Type::Sum(ts) => {
                let mut units = Vec::new();
                for t in ts {
                    match t.canonicalize() {
                        Type::Sum(inner) => units.extend(inner),
                        Type::Zero => {}
                        u => units.push(u),
                    }
                }
                units.sort();
                match units.len() {
                    0 => Type::Zero,
                    1 => units.pop().unwrap(),
                    _ => Type::Sum(units),
                }
            }
        }
    }

    pub fn equiv(&self, other: &Type) -> bool {
        self == other || self.canonicalize() == other.canonicalize()
    }

    /// The unit summands of the canonical form; every type is equivalent to
    /// the sum of these.
    pub fn units(&self) -> Vec<Type> {
        match self.canonicalize() {
            Type::Zero => Vec::new(),
            Type::Sum(us) => us,
            u => vec![u],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Type::Var(TyVar::Free(x)) => {
                out.insert(x.clone());
            }
            Type::Var(TyVar::Bound(_)) | Type::Zero => {}
            Type::Arrow(d, c) => {
                d.collect_free(out);
                c.collect_free(out);
            }
            Type::Forall(_, b) => b.collect_free(out),
            Type::Sum(ts) => ts.iter().for_each(|t| t.collect_free(out)),
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Type::Var(TyVar::Free(y)) => x == y,
            Type::Var(TyVar::Bound(_)) | Type::Zero => false,
            Type::Arrow(d, c) => d.has_free(x) || c.has_free(x),
            Type::Forall(_, b) => b.has_free(x),
            Type::Sum(ts) => ts.iter().any(|t| t.has_free(x)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) | Type::Zero => 1,
            Type::Arrow(d, c) => 1 + d.size() + c.size(),
            Type::Forall(_, b) => 1 + b.size(),
            Type::Sum(ts) => 1 + ts.iter().map(Type::size).sum::<usize>(),
        }
    }

    fn shift(&self, by: u32, cutoff: u32) -> Type {
        if by == 0 {
            return self.clone();
        }
        self.map_vars(cutoff, &|v, depth| match v {
            TyVar::Bound(i) if *i >= depth => Type::Var(TyVar::Bound(i + by)),
            _ => Type::Var(v.clone()),
        })
    }

    /// Structure-preserving rewrite of variable occurrences; `depth` counts
    /// the binders crossed.
    fn map_vars(&self, depth: u32, f: &dyn Fn(&TyVar, u32) -> Type) -> Type {
        match self {
            Type::Var(v) => f(v, depth),
            Type::Zero => Type::Zero,
            Type::Arrow(d, c) => Type::arrow(d.map_vars(depth, f), c.map_vars(depth, f)),
            Type::Forall(b, body) => Type::Forall(b.clone(), Box::new(body.map_vars(depth + 1, f))),
            Type::Sum(ts) => Type::Sum(ts.iter().map(|t| t.map_vars(depth, f)).collect()),
        }
    }

    /// Raw instantiation of a quantifier body with `v`; keeps sum structure.
    pub fn instantiate(&self, v: &Type) -> Type {
        self.map_vars(0, &|var, depth| match var {
            TyVar::Bound(i) if *i == depth => v.shift(depth, 0),
            TyVar::Bound(i) if *i > depth => Type::Var(TyVar::Bound(i - 1)),
            _ => Type::Var(var.clone()),
        })
    }

    /// Opens a quantifier body with the free variable `name`.
    pub fn open(&self, name: &str) -> Type {
        self.instantiate(&Type::var(name))
    }

    /// Abstracts the free variable `name` as the index of a new outermost binder.
    pub fn close(&self, name: &str) -> Type {
        self.map_vars(0, &|var, depth| match var {
            TyVar::Free(x) if x == name => Type::Var(TyVar::Bound(depth)),
            TyVar::Bound(i) if *i >= depth => Type::Var(TyVar::Bound(i + 1)),
            _ => Type::Var(var.clone()),
        })
    }

    /// Raw, capture-free `self[u/x]`; keeps sum structure.
    pub fn subst_raw(&self, x: &str, u: &Type) -> Type {
        self.map_vars(0, &|var, depth| match var {
            TyVar::Free(y) if y == x => u.shift(depth, 0),
            _ => Type::Var(var.clone()),
        })
    }

    /// `self[u/x]` up to `≡`: only unit types may replace a type variable.
    pub fn subst(&self, x: &str, u: &Type) -> Result<Type, TypeError> {
        if !u.is_unit() {
            return Err(TypeError::NonUnitSubstitution(u.clone()));
        }
        Ok(self.subst_raw(x, u).canonicalize())
    }

    /// Raw sequential substitution `self[U1/X1]...[Un/Xn]`.
    pub fn subst_vec_raw(&self, xs: &[String], us: &[Type]) -> Type {
        xs.iter().zip(us).fold(self.clone(), |t, (x, u)| t.subst_raw(x, u))
    }

    /// Sequential vector substitution up to `≡`.
    pub fn subst_vec(&self, xs: &[String], us: &[Type]) -> Result<Type, TypeError> {
        if let Some(u) = us.iter().find(|u| !u.is_unit()) {
            return Err(TypeError::NonUnitSubstitution(u.clone()));
        }
        Ok(self.subst_vec_raw(xs, us).canonicalize())
    }

    /// `forall X1. ... forall Xn. self` with `X1` outermost.
    pub fn forall_many(xs: &[String], body: Type) -> Type {
        xs.iter().rev().fold(body, |acc, x| Type::forall(x.clone(), acc))
    }

    /// Peels exactly `n` leading quantifiers, opening them with `names`.
    pub fn open_foralls(&self, names: &[String]) -> Option<Type> {
        let mut cur = self.clone();
        for n in names {
            match cur {
                Type::Forall(_, body) => cur = body.open(n),
                _ => return None,
            }
        }
        Some(cur)
    }
}

/// A witness for one step of `⊏`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SsubWitness {
    /// `U ⊏ forall X. U`
    Gen { binder: String },
    /// `forall X. U' ⊏ U'[T/X]`
    Inst { ty: Type },
}

/// The type obtained from `u` by the `⊏`-step `w`.
pub fn ssub_apply(u: &Type, w: &SsubWitness) -> Result<Type, TypeError> {
    match w {
        SsubWitness::Gen { binder } => {
            if !u.is_unit() && !u.canonicalize().is_unit() {
                return Err(TypeError::MalformedWitness(format!("cannot generalise non-unit type `{u}`")));
            }
            Ok(Type::forall(binder.clone(), u.canonicalize()))
        }
        SsubWitness::Inst { ty } => match u.canonicalize() {
            Type::Forall(_, body) => {
                let out = body.instantiate(ty);
                out.well_formed()?;
                Ok(out.canonicalize())
            }
            other => Err(TypeError::MalformedWitness(format!("instantiation needs a quantified type, got `{other}`"))),
        },
    }
}

/// Checks the single step `u1 ⊏ u2` certified by `w`.
pub fn ssub_check(u1: &Type, u2: &Type, w: &SsubWitness) -> Result<bool, TypeError> {
    Ok(ssub_apply(u1, w)?.equiv(u2))
}

/// Checks `from ≼ to` along a witness chain; the empty chain is `≡`.
pub fn preceq_check(from: &Type, to: &Type, chain: &[SsubWitness]) -> Result<bool, TypeError> {
    let mut cur = from.clone();
    for w in chain {
        cur = ssub_apply(&cur, w)?;
    }
    Ok(cur.equiv(to))
}

/// A typing context: each term variable bound at most once, to a unit type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Context(BTreeMap<String, Type>);

impl Context {
    pub fn new() -> Self {
        Context(BTreeMap::new())
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, TypeError>
    where
        I: IntoIterator<Item = (S, Type)>,
        S: Into<String>,
    {
        let mut ctx = Context::new();
        for (x, t) in pairs {
            ctx = ctx.extend(x, t)?;
        }
        Ok(ctx)
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    /// `Γ, x : U`; fails if `x` is already bound.
    pub fn extend(&self, x: impl Into<String>, ty: Type) -> Result<Context, TypeError> {
        let x = x.into();
        if self.0.contains_key(&x) {
            return Err(TypeError::DuplicateVariable(x));
        }
        let mut m = self.0.clone();
        m.insert(x, ty);
        Ok(Context(m))
    }

    pub fn without(&self, x: &str) -> Context {
        let mut m = self.0.clone();
        m.remove(x);
        Context(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Type)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn free_type_vars(&self) -> BTreeSet<String> {
        self.0.values().flat_map(Type::free_vars).collect()
    }

    pub fn map_types(&self, f: impl Fn(&Type) -> Type) -> Context {
        Context(self.0.iter().map(|(k, v)| (k.clone(), f(v))).collect())
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(x, t)| format!("{x} : {t}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    Arrow,
    Atom,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let free = self.free_vars();
        let mut env = Vec::new();
        write_type(f, self, &free, &mut env, Prec::Top)
    }
}

fn write_type(
    f: &mut fmt::Formatter<'_>,
    t: &Type,
    free: &BTreeSet<String>,
    env: &mut Vec<String>,
    prec: Prec,
) -> fmt::Result {
    match t {
        Type::Var(TyVar::Free(x)) => write!(f, "{x}"),
        Type::Var(TyVar::Bound(i)) => match env.len().checked_sub(*i as usize + 1) {
            Some(k) => write!(f, "{}", env[k]),
            None => write!(f, "#{i}"),
        },
        Type::Zero => write!(f, "void"),
        Type::Arrow(d, c) => {
            if prec > Prec::Arrow {
                write!(f, "(")?;
            }
            write_type(f, d, free, env, Prec::Atom)?;
            write!(f, " -> ")?;
            write_type(f, c, free, env, Prec::Arrow)?;
            if prec > Prec::Arrow {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Forall(b, body) => {
            let hint = if b.0.is_empty() { "X" } else { b.0.as_str() };
            let name = fresh_name(hint, &|n| free.contains(n) || env.iter().any(|e| e == n));
            if prec > Prec::Top {
                write!(f, "(")?;
            }
            write!(f, "forall {name}. ")?;
            env.push(name);
            write_type(f, body, free, env, Prec::Top)?;
            env.pop();
            if prec > Prec::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Sum(ts) => {
            if prec > Prec::Top {
                write!(f, "(")?;
            }
            for (i, s) in ts.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                // nested sums keep their parentheses: structure matters in the structured system
                let p = if matches!(s, Type::Sum(_)) { Prec::Atom } else { Prec::Arrow };
                write_type(f, s, free, env, p)?;
            }
            if prec > Prec::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Type {
        Type::var("X")
    }
    fn y() -> Type {
        Type::var("Y")
    }
    fn z() -> Type {
        Type::var("Z")
    }

    #[test]
    fn equivalence_examples() {
        let u1 = Type::arrow(x(), x());
        let u2 = y();
        let u3 = Type::forall("W", Type::arrow(Type::var("W"), Type::var("W")));
        let lhs = Type::plus(Type::plus(u1.clone(), Type::plus(Type::Zero, u2.clone())), u3.clone());
        let rhs = Type::plus(u1.clone(), Type::plus(u2.clone(), u3.clone()));
        assert!(lhs.equiv(&rhs));
        let mut expected = vec![u1, u2, u3];
        expected.sort();
        assert_eq!(lhs.canonicalize(), Type::Sum(expected));

        assert_eq!(Type::plus(x(), Type::Zero).canonicalize(), x());
        assert_eq!(Type::plus(x(), y()).canonicalize(), Type::plus(y(), x()).canonicalize());
        assert!(Type::plus(Type::plus(x(), y()), z()).equiv(&Type::plus(x(), Type::plus(z(), y()))));
        assert!(Type::arrow(x(), Type::plus(y(), Type::Zero)).equiv(&Type::arrow(x(), y())));
        assert!(!Type::plus(x(), y()).equiv(&x()));
    }

    #[test]
    fn substitution_examples() {
        let yy = Type::arrow(y(), y());
        let t = Type::arrow(x(), x()).subst("X", &yy).unwrap();
        assert_eq!(t, Type::arrow(yy.clone(), yy.clone()));

        // (forall X. X -> Y)[Y := X] keeps the bound X distinct from the free X
        let t = Type::forall("X", Type::arrow(x(), y())).subst("Y", &x()).unwrap();
        let expected = Type::forall("W", Type::arrow(Type::var("W"), x()));
        assert_eq!(t, expected);
        assert_eq!(t.to_string(), "forall X1. X1 -> X");

        let t = Type::plus(x(), x()).subst("X", &yy).unwrap();
        assert_eq!(t, Type::Sum(vec![yy.clone(), yy]));

        assert!(matches!(x().subst("X", &Type::plus(x(), y())), Err(TypeError::NonUnitSubstitution(_))));
    }

    #[test]
    fn witnessed_instance_steps() {
        let xx = Type::arrow(x(), x());
        let gen = Type::forall("X", xx.clone());
        assert!(ssub_check(&xx, &gen, &SsubWitness::Gen { binder: "X".into() }).unwrap());
        let yy = Type::arrow(y(), y());
        let inst = Type::arrow(yy.clone(), yy.clone());
        assert!(ssub_check(&gen, &inst, &SsubWitness::Inst { ty: yy }).unwrap());
        // empty chain is reflexivity up to equivalence
        let a = Type::arrow(x(), Type::plus(y(), z()));
        let b = Type::arrow(x(), Type::plus(Type::plus(z(), Type::Zero), y()));
        assert!(preceq_check(&a, &b, &[]).unwrap());
        assert!(matches!(ssub_check(&xx, &gen, &SsubWitness::Inst { ty: y() }), Err(TypeError::MalformedWitness(_))));
    }

    #[test]
    fn context_rejects_duplicates() {
        let ctx = Context::new().extend("x", x()).unwrap();
        assert!(ctx.extend("x", y()).is_err());
    }

    #[test]
    fn well_formedness() {
        assert!(Type::arrow(Type::plus(x(), y()), z()).well_formed().is_err());
        assert!(Type::arrow(x(), Type::plus(y(), z())).well_formed().is_ok());
    }
}
