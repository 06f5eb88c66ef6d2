//! Annotated terms and their elaboration into additive derivations.
//!
//! Lambda binders carry their domain, quantifier rules are explicit
//! (`gen X. t`, `inst t [V]`), `(t : T)` asks for an equivalence step, and an
//! application may carry its elimination witness. When the witness is
//! omitted it is reconstructed by first-order matching of the argument
//! summands against the function's common domain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::derivation::{check_add, AddDerivation, ArrowElim};
use crate::syntax::{fresh_name, Term};
use crate::types::{Context, TyVar, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ATerm {
    Var(String),
    Zero,
    Lam(String, Type, Box<ATerm>),
    App(Box<ATerm>, Box<ATerm>, Option<ArrowElim>),
    Sum(Box<ATerm>, Box<ATerm>),
    Gen(String, Box<ATerm>),
    Inst(Box<ATerm>, Type),
    Ascribe(Box<ATerm>, Type),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("cannot elaborate `{at}`: {reason}")]
pub struct ElabError {
    pub at: String,
    pub reason: String,
}

impl ATerm {
    pub fn lam(x: &str, ty: Type, body: ATerm) -> ATerm {
        ATerm::Lam(x.to_string(), ty, Box::new(body))
    }

    pub fn app(f: ATerm, a: ATerm) -> ATerm {
        ATerm::App(Box::new(f), Box::new(a), None)
    }

    pub fn app_with(f: ATerm, a: ATerm, w: ArrowElim) -> ATerm {
        ATerm::App(Box::new(f), Box::new(a), Some(w))
    }

    pub fn plus(a: ATerm, b: ATerm) -> ATerm {
        ATerm::Sum(Box::new(a), Box::new(b))
    }

    pub fn gen(x: &str, t: ATerm) -> ATerm {
        ATerm::Gen(x.to_string(), Box::new(t))
    }

    pub fn inst(t: ATerm, v: Type) -> ATerm {
        ATerm::Inst(Box::new(t), v)
    }

    /// The bare term, in canonical form.
    pub fn erase(&self) -> Term {
        match self {
            ATerm::Var(x) => Term::var(x),
            ATerm::Zero => Term::Zero,
            ATerm::Lam(x, _, b) => Term::lam(x.clone(), b.erase()),
            ATerm::App(f, a, _) => Term::app(f.erase(), a.erase()),
            ATerm::Sum(a, b) => Term::plus(a.erase(), b.erase()).canonicalize(),
            ATerm::Gen(_, t) | ATerm::Inst(t, _) | ATerm::Ascribe(t, _) => t.erase(),
        }
    }

    fn rename(&self, from: &str, to: &str) -> ATerm {
        let r = |t: &ATerm| Box::new(t.rename(from, to));
        match self {
            ATerm::Var(x) if x == from => ATerm::Var(to.to_string()),
            ATerm::Var(_) | ATerm::Zero => self.clone(),
            ATerm::Lam(x, _, _) if x == from => self.clone(),
            ATerm::Lam(x, u, b) => ATerm::Lam(x.clone(), u.clone(), r(b)),
            ATerm::App(f, a, w) => ATerm::App(r(f), r(a), w.clone()),
            ATerm::Sum(a, b) => ATerm::Sum(r(a), r(b)),
            ATerm::Gen(x, t) => ATerm::Gen(x.clone(), r(t)),
            ATerm::Inst(t, v) => ATerm::Inst(r(t), v.clone()),
            ATerm::Ascribe(t, v) => ATerm::Ascribe(r(t), v.clone()),
        }
    }

    fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            ATerm::Var(x) => {
                out.insert(x.clone());
            }
            ATerm::Zero => {}
            ATerm::Lam(x, _, b) => {
                out.insert(x.clone());
                b.names(out);
            }
            ATerm::App(f, a, _) | ATerm::Sum(f, a) => {
                f.names(out);
                a.names(out);
            }
            ATerm::Gen(_, t) | ATerm::Inst(t, _) | ATerm::Ascribe(t, _) => t.names(out),
        }
    }
}

impl fmt::Display for ATerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &ATerm, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
            // ctx: 0 top, 1 summand, 2 function position, 3 argument position
            match t {
                ATerm::Var(x) => write!(f, "{x}"),
                ATerm::Zero => write!(f, "zero"),
                ATerm::Lam(x, u, b) => {
                    let open = ctx > 0;
                    if open {
                        write!(f, "(")?;
                    }
                    match u {
                        Type::Forall(..) => write!(f, "\\{x}:({u}). ")?,
                        _ => write!(f, "\\{x}:{u}. ")?,
                    }
                    go(b, f, 0)?;
                    if open {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                ATerm::Gen(x, b) => {
                    if ctx > 0 {
                        write!(f, "(")?;
                    }
                    write!(f, "gen {x}. ")?;
                    go(b, f, 0)?;
                    if ctx > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                ATerm::App(g, a, w) => {
                    let open = ctx == 3;
                    if open {
                        write!(f, "(")?;
                    }
                    go(g, f, 2)?;
                    write!(f, " ")?;
                    go(a, f, 3)?;
                    if let Some(w) = w {
                        write!(f, " {}", WitnessBlock(w))?;
                    }
                    if open {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                ATerm::Sum(a, b) => {
                    let open = ctx >= 2;
                    if open {
                        write!(f, "(")?;
                    }
                    go(a, f, 1)?;
                    write!(f, " + ")?;
                    go(b, f, 1)?;
                    if open {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                ATerm::Inst(t, v) => {
                    if ctx == 3 {
                        write!(f, "(")?;
                    }
                    write!(f, "inst ")?;
                    go(t, f, 3)?;
                    write!(f, " [{v}]")?;
                    if ctx == 3 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                ATerm::Ascribe(t, v) => {
                    write!(f, "(")?;
                    go(t, f, 0)?;
                    write!(f, " : {v})")
                }
            }
        }
        go(self, f, 0)
    }
}

/// Prints a witness in the `{alpha ..; beta ..; vars ..; unit ..; results ..; insts ..}` syntax.
pub struct WitnessBlock<'a>(pub &'a ArrowElim);

impl fmt::Display for WitnessBlock<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.0;
        let list = |ts: &[Type]| ts.iter().map(|t| format!("({t})")).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "{{alpha {}; beta {}; vars {}; unit ({}); results {}; insts {}}}",
            w.alpha(),
            w.beta(),
            w.binders.join(" "),
            w.unit,
            list(&w.results),
            w.insts.iter().map(|row| format!("[{}]", list(row))).collect::<Vec<_>>().join(", ")
        )
    }
}

/// Builds a derivation of `Γ ⊢ erase(t) : T` from the annotations.
pub fn elaborate(t: &ATerm, ctx: &Context) -> Result<AddDerivation, ElabError> {
    let d = elab(t, ctx)?;
    check_add(&d).map_err(|e| ElabError { at: t.erase().to_string(), reason: e.to_string() })?;
    Ok(d)
}

fn elab(t: &ATerm, ctx: &Context) -> Result<AddDerivation, ElabError> {
    let fail = |reason: String| ElabError { at: t.erase().to_string(), reason };
    match t {
        ATerm::Var(x) => AddDerivation::ax(ctx, x).ok_or_else(|| fail(format!("`{x}` is not in the context"))),
        ATerm::Zero => Ok(AddDerivation::ax0(ctx)),
        ATerm::Lam(x, u, body) => {
            if !u.canonicalize().is_unit() {
                return Err(fail(format!("binder type `{u}` is not a unit type")));
            }
            u.well_formed().map_err(|e| fail(e.to_string()))?;
            let (x, body) = if ctx.contains(x) {
                let mut taken: BTreeSet<String> = ctx.names().cloned().collect();
                body.names(&mut taken);
                let fresh = fresh_name(x, &|n| taken.contains(n));
                let renamed = body.rename(x, &fresh);
                (fresh, renamed)
            } else {
                (x.clone(), (**body).clone())
            };
            let inner = ctx.extend(x.clone(), u.clone()).map_err(|e| fail(e.to_string()))?;
            Ok(AddDerivation::arr_i(&x, elab(&body, &inner)?))
        }
        ATerm::App(f, a, w) => {
            let df = elab(f, ctx)?;
            let da = elab(a, ctx)?;
            let w = match w {
                Some(w) => w.clone(),
                None => infer_witness(&df.ty, &da.ty, ctx).map_err(&fail)?,
            };
            w.validate().map_err(&fail)?;
            if !df.ty.equiv(&w.fun_type()) {
                return Err(fail(format!("function type `{}` does not match `{}`", df.ty, w.fun_type())));
            }
            if !da.ty.equiv(&w.arg_type()) {
                return Err(fail(format!("argument type `{}` does not match `{}`", da.ty, w.arg_type())));
            }
            Ok(AddDerivation::arr_e(w, df, da))
        }
        ATerm::Sum(a, b) => Ok(AddDerivation::plus_i(elab(a, ctx)?, elab(b, ctx)?)),
        ATerm::Gen(x, b) => {
            if ctx.free_type_vars().contains(x) {
                return Err(fail(format!("`{x}` is free in the context")));
            }
            let d = elab(b, ctx)?;
            if !d.ty.canonicalize().is_unit() {
                return Err(fail(format!("cannot generalise non-unit type `{}`", d.ty)));
            }
            Ok(AddDerivation::forall_i(x, d))
        }
        ATerm::Inst(b, v) => {
            if !v.is_unit() {
                return Err(fail(format!("instantiating type `{v}` is not a unit type")));
            }
            let d = elab(b, ctx)?;
            if !matches!(d.ty.canonicalize(), Type::Forall(..)) {
                return Err(fail(format!("type `{}` is not quantified", d.ty)));
            }
            Ok(AddDerivation::forall_e(v.clone(), d))
        }
        ATerm::Ascribe(b, ty) => {
            let d = elab(b, ctx)?;
            if !d.ty.equiv(ty) {
                return Err(fail(format!("type `{}` is not equivalent to `{ty}`", d.ty)));
            }
            Ok(d.pin(ty))
        }
    }
}

/// Reconstructs an elimination witness from the premise types: every
/// function summand must be `forall X. (U -> T_i)` with the same `U`, and
/// every argument summand an instance of `U`.
pub fn infer_witness(fun: &Type, arg: &Type, ctx: &Context) -> Result<ArrowElim, String> {
    let funs = fun.units();
    let args = arg.units();
    let mut taken: BTreeSet<String> = ctx.free_type_vars();
    taken.extend(fun.free_vars());
    taken.extend(arg.free_vars());
    if funs.is_empty() {
        let x = fresh_name("X", &|n| taken.contains(n));
        return Ok(ArrowElim {
            binders: vec![x.clone()],
            unit: Type::var(x),
            results: vec![],
            insts: args.into_iter().map(|a| vec![a]).collect(),
        });
    }
    let depth = |mut u: &Type| {
        let mut n = 0;
        while let Type::Forall(_, b) = u {
            n += 1;
            u = b;
        }
        n
    };
    let n = depth(&funs[0]);
    if funs.iter().any(|u| depth(u) != n) {
        return Err("function summands have different numbers of quantifiers".into());
    }
    let mut binders = Vec::new();
    for k in 0..n {
        let x = fresh_name(&format!("X{k}"), &|s| taken.contains(s) || binders.contains(&s.to_string()));
        binders.push(x);
    }
    let mut unit = None;
    let mut results = Vec::new();
    for u in &funs {
        let Some(Type::Arrow(dom, cod)) = u.open_foralls(&binders) else {
            return Err(format!("`{u}` is not a quantified arrow"));
        };
        match &unit {
            None => unit = Some(*dom),
            Some(d) if *d == *dom => {}
            Some(d) => return Err(format!("function summands disagree on the domain: `{d}` and `{dom}`")),
        }
        results.push(*cod);
    }
    let unit = unit.expect("at least one summand");
    let mut insts = Vec::new();
    for a in &args {
        let mut sub = BTreeMap::new();
        if !matches(&unit, a, &binders, &mut sub) {
            return Err(format!("argument type `{a}` is not an instance of `{unit}`"));
        }
        insts.push(binders.iter().map(|x| sub.get(x).cloned().unwrap_or_else(|| Type::var(x))).collect());
    }
    Ok(ArrowElim { binders, unit, results, insts })
}

/// First-order matching of a canonical pattern against a canonical type.
fn matches(p: &Type, t: &Type, vars: &[String], sub: &mut BTreeMap<String, Type>) -> bool {
    match (p, t) {
        (Type::Var(TyVar::Free(x)), _) if vars.contains(x) => {
            if !t.is_unit() || !locally_closed(t) {
                return false;
            }
            match sub.get(x) {
                Some(bound) => bound == t,
                None => {
                    sub.insert(x.clone(), t.clone());
                    true
                }
            }
        }
        (Type::Var(a), Type::Var(b)) => a == b,
        (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => matches(d1, d2, vars, sub) && matches(c1, c2, vars, sub),
        (Type::Forall(_, b1), Type::Forall(_, b2)) => matches(b1, b2, vars, sub),
        (Type::Sum(xs), Type::Sum(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| matches(x, y, vars, sub))
        }
        (Type::Zero, Type::Zero) => true,
        _ => false,
    }
}

fn locally_closed(t: &Type) -> bool {
    fn go(t: &Type, depth: u32) -> bool {
        match t {
            Type::Var(TyVar::Bound(i)) => *i < depth,
            Type::Var(_) | Type::Zero => true,
            Type::Arrow(d, c) => go(d, depth) && go(c, depth),
            Type::Forall(_, b) => go(b, depth + 1),
            Type::Sum(ts) => ts.iter().all(|t| go(t, depth)),
        }
    }
    go(t, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(n: &str) -> Type {
        Type::var(n)
    }

    #[test]
    fn identity_on_a_sum_without_witness() {
        let ctx = Context::from_pairs([("a", tv("A")), ("b", tv("B"))]).unwrap();
        let id = ATerm::gen("X", ATerm::lam("x", tv("X"), ATerm::Var("x".into())));
        let t = ATerm::app(id, ATerm::plus(ATerm::Var("a".into()), ATerm::Var("b".into())));
        let d = elaborate(&t, &ctx).unwrap();
        assert!(d.ty.equiv(&Type::plus(tv("A"), tv("B"))));
        assert_eq!(d.term, t.erase());
    }

    #[test]
    fn zero_and_sums() {
        let ctx = Context::from_pairs([("a", tv("A"))]).unwrap();
        let d = elaborate(&ATerm::Zero, &ctx).unwrap();
        assert_eq!(d.ty, Type::Zero);
        let d = elaborate(&ATerm::plus(ATerm::Var("a".into()), ATerm::Zero), &ctx).unwrap();
        assert_eq!(d.ty, Type::plus(tv("A"), Type::Zero));
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let ctx = Context::from_pairs([("x", tv("A"))]).unwrap();
        let t = ATerm::lam("x", tv("B"), ATerm::Var("x".into()));
        let d = elaborate(&t, &ctx).unwrap();
        assert_eq!(d.ty, Type::arrow(tv("B"), tv("B")));
    }

    #[test]
    fn mismatched_argument_fails_with_location() {
        let ctx = Context::from_pairs([("a", tv("A"))]).unwrap();
        let t = ATerm::app(ATerm::lam("x", tv("B"), ATerm::Var("x".into())), ATerm::Var("a".into()));
        let e = elaborate(&t, &ctx).unwrap_err();
        assert!(e.at.contains("a"));
    }

    #[test]
    fn zero_function_gets_a_trivial_witness() {
        let ctx = Context::from_pairs([("a", tv("A"))]).unwrap();
        let d = elaborate(&ATerm::app(ATerm::Zero, ATerm::Var("a".into())), &ctx).unwrap();
        assert!(d.ty.equiv(&Type::Zero));
    }
}
