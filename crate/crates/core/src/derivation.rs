//! Typing derivations of the additive system and their checker.
//!
//! Every node stores its full conclusion `Γ ⊢ t : T`. Terms are kept
//! AC-canonical; types are stored as written and compared up to `≡`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Term, Var};
use crate::types::{Context, Type};

/// Witness of the generalised arrow elimination:
/// `t : Σ_i forall X. (U -> T_i)` and `u : Σ_j U[V_j/X]` give
/// `t u : Σ_i Σ_j T_i[V_j/X]`. The binders occur free in `unit` and `results`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArrowElim {
    pub binders: Vec<String>,
    pub unit: Type,
    pub results: Vec<Type>,
    pub insts: Vec<Vec<Type>>,
}

impl ArrowElim {
    pub fn alpha(&self) -> usize {
        self.results.len()
    }

    pub fn beta(&self) -> usize {
        self.insts.len()
    }

    /// `forall X. (U -> T_i)`
    pub fn fun_unit(&self, i: usize) -> Type {
        Type::forall_many(&self.binders, Type::arrow(self.unit.clone(), self.results[i].clone()))
    }

    /// `U[V_j/X]`
    pub fn arg_unit(&self, j: usize) -> Type {
        self.unit.subst_vec_raw(&self.binders, &self.insts[j])
    }

    pub fn fun_type(&self) -> Type {
        Type::sigma((0..self.alpha()).map(|i| self.fun_unit(i)).collect())
    }

    pub fn arg_type(&self) -> Type {
        Type::sigma((0..self.beta()).map(|j| self.arg_unit(j)).collect())
    }

    /// `Σ_i Σ_j T_i[V_j/X]`
    pub fn result_type(&self) -> Type {
        Type::sigma(
            (0..self.alpha())
                .map(|i| {
                    Type::sigma(
                        (0..self.beta())
                            .map(|j| self.results[i].subst_vec_raw(&self.binders, &self.insts[j]))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Grammar and capture side conditions of the witness itself.
    pub fn validate(&self) -> Result<(), String> {
        let distinct: BTreeSet<&String> = self.binders.iter().collect();
        if distinct.len() != self.binders.len() {
            return Err("quantified variables are not distinct".into());
        }
        if !self.unit.is_unit() {
            return Err(format!("`{}` is not a unit type", self.unit));
        }
        self.unit.well_formed().map_err(|e| e.to_string())?;
        for t in &self.results {
            t.well_formed().map_err(|e| e.to_string())?;
        }
        for row in &self.insts {
            if row.len() != self.binders.len() {
                return Err(format!("instantiation row has {} types for {} variables", row.len(), self.binders.len()));
            }
            for (k, v) in row.iter().enumerate() {
                if !v.is_unit() {
                    return Err(format!("instantiating type `{v}` is not a unit type"));
                }
                v.well_formed().map_err(|e| e.to_string())?;
                if let Some(x) = self.binders[k + 1..].iter().find(|x| v.has_free(x)) {
                    return Err(format!("`{x}` occurs free in `{v}`, which is substituted before it"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AddRule {
    Ax,
    Ax0,
    Equiv,
    ArrI { var: String },
    ArrE(ArrowElim),
    PlusI,
    ForallI { var: String },
    ForallE { inst: Type },
}

impl AddRule {
    pub fn name(&self) -> &'static str {
        match self {
            AddRule::Ax => "ax",
            AddRule::Ax0 => "ax0",
            AddRule::Equiv => "equiv",
            AddRule::ArrI { .. } => "arrI",
            AddRule::ArrE(_) => "arrE",
            AddRule::PlusI => "plusI",
            AddRule::ForallI { .. } => "forallI",
            AddRule::ForallE { .. } => "forallE",
        }
    }

    pub const NAMES: [&'static str; 8] = ["ax", "ax0", "equiv", "arrI", "arrE", "plusI", "forallI", "forallE"];
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AddDerivation {
    pub ctx: Context,
    pub term: Term,
    pub ty: Type,
    pub rule: AddRule,
    pub premises: Vec<AddDerivation>,
}

/// Position of a node: premise indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{rule} at {path}: {reason}")]
pub struct RuleViolation {
    pub path: NodePath,
    pub rule: &'static str,
    pub reason: String,
}

impl AddDerivation {
    pub fn ax(ctx: &Context, x: &str) -> Option<AddDerivation> {
        let ty = ctx.get(x)?.clone();
        Some(AddDerivation { ctx: ctx.clone(), term: Term::var(x), ty, rule: AddRule::Ax, premises: vec![] })
    }

    pub fn ax0(ctx: &Context) -> AddDerivation {
        AddDerivation { ctx: ctx.clone(), term: Term::Zero, ty: Type::Zero, rule: AddRule::Ax0, premises: vec![] }
    }

    /// `λx.t : U -> T` from a derivation of `Γ, x : U ⊢ t : T`.
    pub fn arr_i(x: &str, body: AddDerivation) -> AddDerivation {
        let dom = body.ctx.get(x).cloned().unwrap_or(Type::Zero);
        AddDerivation {
            ctx: body.ctx.without(x),
            term: Term::lam(x, body.term.clone()),
            ty: Type::arrow(dom, body.ty.clone()),
            rule: AddRule::ArrI { var: x.to_string() },
            premises: vec![body],
        }
    }

    pub fn arr_e(w: ArrowElim, fun: AddDerivation, arg: AddDerivation) -> AddDerivation {
        AddDerivation {
            ctx: fun.ctx.clone(),
            term: Term::app(fun.term.clone(), arg.term.clone()),
            ty: w.result_type(),
            rule: AddRule::ArrE(w),
            premises: vec![fun, arg],
        }
    }

    pub fn plus_i(a: AddDerivation, b: AddDerivation) -> AddDerivation {
        AddDerivation {
            ctx: a.ctx.clone(),
            term: Term::plus(a.term.clone(), b.term.clone()).canonicalize(),
            ty: Type::plus(a.ty.clone(), b.ty.clone()),
            rule: AddRule::PlusI,
            premises: vec![a, b],
        }
    }

    pub fn forall_i(x: &str, d: AddDerivation) -> AddDerivation {
        AddDerivation {
            ctx: d.ctx.clone(),
            term: d.term.clone(),
            ty: Type::forall(x, d.ty.canonicalize()),
            rule: AddRule::ForallI { var: x.to_string() },
            premises: vec![d],
        }
    }

    pub fn forall_e(inst: Type, d: AddDerivation) -> AddDerivation {
        let ty = match d.ty.canonicalize() {
            Type::Forall(_, body) => body.instantiate(&inst),
            other => other,
        };
        AddDerivation {
            ctx: d.ctx.clone(),
            term: d.term.clone(),
            ty,
            rule: AddRule::ForallE { inst },
            premises: vec![d],
        }
    }

    pub fn equiv(ty: Type, d: AddDerivation) -> AddDerivation {
        AddDerivation { ctx: d.ctx.clone(), term: d.term.clone(), ty, rule: AddRule::Equiv, premises: vec![d] }
    }

    /// `d` itself if it already concludes exactly `ty`, otherwise an `≡` node.
    pub fn pin(self, ty: &Type) -> AddDerivation {
        if &self.ty == ty {
            self
        } else {
            AddDerivation::equiv(ty.clone(), self)
        }
    }

    /// Left-nested `+I` over the given derivations; `None` if empty.
    pub fn sum_of(parts: Vec<AddDerivation>) -> Option<AddDerivation> {
        let mut it = parts.into_iter();
        let first = it.next()?;
        Some(it.fold(first, AddDerivation::plus_i))
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(AddDerivation::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(AddDerivation::depth).max().unwrap_or(0)
    }

    /// Names of the rules used anywhere in the derivation.
    pub fn rules_used(&self) -> BTreeSet<&'static str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |d| {
            out.insert(d.rule.name());
        });
        out
    }

    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a AddDerivation)) {
        f(self);
        for p in &self.premises {
            p.visit(f);
        }
    }

    /// Every free type variable mentioned anywhere, binders included.
    pub fn type_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |d| {
            out.extend(d.ctx.free_type_vars());
            out.extend(d.ty.free_vars());
            match &d.rule {
                AddRule::ForallI { var } => {
                    out.insert(var.clone());
                }
                AddRule::ForallE { inst } => out.extend(inst.free_vars()),
                AddRule::ArrE(w) => {
                    out.extend(w.binders.iter().cloned());
                    out.extend(w.unit.free_vars());
                    w.results.iter().for_each(|t| out.extend(t.free_vars()));
                    w.insts.iter().flatten().for_each(|t| out.extend(t.free_vars()));
                }
                _ => {}
            }
        });
        out
    }

    /// Every term variable mentioned anywhere: context entries, binders, free variables.
    pub fn term_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |d| {
            out.extend(d.ctx.names().cloned());
            out.extend(d.term.free_vars());
            if let AddRule::ArrI { var } = &d.rule {
                out.insert(var.clone());
            }
        });
        out
    }
}

fn ctx_equiv(a: &Context, b: &Context) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|((x, t), (y, u))| x == y && t.equiv(u))
}

/// Checks every node against its rule schema, with `≡` on types.
pub fn check_add(d: &AddDerivation) -> Result<(), RuleViolation> {
    check_node(d, &mut Vec::new())
}

fn check_node(d: &AddDerivation, path: &mut Vec<usize>) -> Result<(), RuleViolation> {
    let fail = |reason: String| RuleViolation { path: NodePath(path.clone()), rule: d.rule.name(), reason };
    if let Err(e) = d.ty.well_formed() {
        return Err(fail(e.to_string()));
    }
    for (x, u) in d.ctx.iter() {
        if !u.canonicalize().is_unit() {
            return Err(fail(format!("context entry `{x} : {u}` is not a unit type")));
        }
    }
    if !d.term.is_canonical() || !d.term.is_locally_closed() {
        return Err(fail(format!("subject `{}` is not a canonical closed term", d.term)));
    }
    let arity = match d.rule {
        AddRule::Ax | AddRule::Ax0 => 0,
        AddRule::ArrE(_) | AddRule::PlusI => 2,
        _ => 1,
    };
    if d.premises.len() != arity {
        return Err(fail(format!("expected {arity} premises, found {}", d.premises.len())));
    }
    let canon = d.ty.canonicalize();
    for p in &d.premises {
        let same_ctx = match &d.rule {
            AddRule::ArrI { .. } => true,
            _ => ctx_equiv(&p.ctx, &d.ctx),
        };
        if !same_ctx {
            return Err(fail(format!("premise context `{}` differs from `{}`", p.ctx, d.ctx)));
        }
    }
    let same_subject = |p: &AddDerivation| -> Result<(), RuleViolation> {
        if p.term != d.term {
            return Err(fail(format!("premise subject `{}` differs from `{}`", p.term, d.term)));
        }
        Ok(())
    };
    let expect_equiv = |what: &str, got: &Type, want: &Type| -> Result<(), RuleViolation> {
        if !got.equiv(want) {
            return Err(fail(format!("{what} `{got}` is not equivalent to `{want}`")));
        }
        Ok(())
    };
    match &d.rule {
        AddRule::Ax => {
            let Term::Var(Var::Free(x)) = &d.term else {
                return Err(fail(format!("subject `{}` is not a variable", d.term)));
            };
            let Some(u) = d.ctx.get(x) else {
                return Err(fail(format!("`{x}` is not in the context")));
            };
            expect_equiv("type", &d.ty, u)?;
        }
        AddRule::Ax0 => {
            if d.term != Term::Zero {
                return Err(fail(format!("subject `{}` is not zero", d.term)));
            }
            expect_equiv("type", &d.ty, &Type::Zero)?;
        }
        AddRule::Equiv => {
            let p = &d.premises[0];
            same_subject(p)?;
            expect_equiv("premise type", &p.ty, &d.ty)?;
        }
        AddRule::ArrI { var } => {
            let p = &d.premises[0];
            let Term::Abs(_, body) = &d.term else {
                return Err(fail(format!("subject `{}` is not an abstraction", d.term)));
            };
            let Type::Arrow(dom, cod) = &canon else {
                return Err(fail(format!("type `{}` is not an arrow", d.ty)));
            };
            if d.ctx.contains(var) || body.has_free(var) {
                return Err(fail(format!("bound variable `{var}` is not fresh")));
            }
            let Ok(ext) = d.ctx.extend(var.clone(), (**dom).clone()) else {
                return Err(fail(format!("bound variable `{var}` is not fresh")));
            };
            if !ctx_equiv(&p.ctx, &ext) {
                return Err(fail(format!("premise context `{}` is not `{}`", p.ctx, ext)));
            }
            if p.term != body.open(var) {
                return Err(fail(format!("premise subject `{}` is not the opened body", p.term)));
            }
            expect_equiv("premise type", &p.ty, cod)?;
        }
        AddRule::ArrE(w) => {
            let (f, a) = (&d.premises[0], &d.premises[1]);
            let Term::App(tf, ta) = &d.term else {
                return Err(fail(format!("subject `{}` is not an application", d.term)));
            };
            if f.term != **tf || a.term != **ta {
                return Err(fail("premise subjects do not match the application".into()));
            }
            w.validate().map_err(fail)?;
            expect_equiv("function type", &f.ty, &w.fun_type())?;
            expect_equiv("argument type", &a.ty, &w.arg_type())?;
            expect_equiv("type", &d.ty, &w.result_type())?;
        }
        AddRule::PlusI => {
            let (a, b) = (&d.premises[0], &d.premises[1]);
            if Term::plus(a.term.clone(), b.term.clone()).canonicalize() != d.term {
                return Err(fail(format!("subject `{}` is not `{} + {}`", d.term, a.term, b.term)));
            }
            expect_equiv("type", &d.ty, &Type::plus(a.ty.clone(), b.ty.clone()))?;
        }
        AddRule::ForallI { var } => {
            let p = &d.premises[0];
            same_subject(p)?;
            if d.ctx.free_type_vars().contains(var) {
                return Err(fail(format!("`{var}` is free in the context")));
            }
            let inner = p.ty.canonicalize();
            if !inner.is_unit() {
                return Err(fail(format!("premise type `{}` is not a unit type", p.ty)));
            }
            expect_equiv("type", &d.ty, &Type::forall(var.clone(), inner))?;
        }
        AddRule::ForallE { inst } => {
            let p = &d.premises[0];
            same_subject(p)?;
            if !inst.is_unit() {
                return Err(fail(format!("instantiating type `{inst}` is not a unit type")));
            }
            inst.well_formed().map_err(|e| fail(e.to_string()))?;
            let Type::Forall(_, body) = p.ty.canonicalize() else {
                return Err(fail(format!("premise type `{}` is not quantified", p.ty)));
            };
            expect_equiv("type", &d.ty, &body.instantiate(inst))?;
        }
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(p, path)?;
        path.pop();
    }
    Ok(())
}

impl fmt::Display for AddDerivation {
    /// Indented tree, conclusion first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(d: &AddDerivation, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let extra = match &d.rule {
                AddRule::ArrI { var } | AddRule::ForallI { var } => format!(" [{var}]"),
                AddRule::ForallE { inst } => format!(" [{inst}]"),
                AddRule::ArrE(w) => format!(" [alpha {} beta {}]", w.alpha(), w.beta()),
                _ => String::new(),
            };
            writeln!(f, "{:indent$}{}{extra}: {} |- {} : {}", "", d.rule.name(), d.ctx, d.term, d.ty)?;
            for p in &d.premises {
                go(p, indent + 2, f)?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(n: &str) -> Type {
        Type::var(n)
    }

    fn identity_poly(ctx: &Context) -> AddDerivation {
        let body = AddDerivation::ax(&ctx.extend("x", tv("X")).unwrap(), "x").unwrap();
        AddDerivation::forall_i("X", AddDerivation::arr_i("x", body))
    }

    #[test]
    fn identity_applied_to_a_sum() {
        let ctx = Context::from_pairs([("a", tv("A")), ("b", tv("B"))]).unwrap();
        let arg = AddDerivation::plus_i(AddDerivation::ax(&ctx, "a").unwrap(), AddDerivation::ax(&ctx, "b").unwrap());
        let w = ArrowElim {
            binders: vec!["X".into()],
            unit: tv("X"),
            results: vec![tv("X")],
            insts: vec![vec![tv("A")], vec![tv("B")]],
        };
        let d = AddDerivation::arr_e(w, identity_poly(&ctx), arg);
        check_add(&d).unwrap();
        assert!(d.ty.equiv(&Type::plus(tv("A"), tv("B"))));
    }

    #[test]
    fn zero_typed_at_a_unit_is_rejected() {
        let ctx = Context::new();
        let d = AddDerivation::equiv(tv("X"), AddDerivation::ax0(&ctx));
        let err = check_add(&d).unwrap_err();
        assert_eq!(err.rule, "equiv");
        assert_eq!(err.path, NodePath(vec![]));
    }

    #[test]
    fn generalising_a_context_variable_is_rejected() {
        let ctx = Context::from_pairs([("a", tv("X"))]).unwrap();
        let d = AddDerivation::forall_i("X", AddDerivation::ax(&ctx, "a").unwrap());
        assert!(check_add(&d).unwrap_err().reason.contains("free in the context"));
    }

    #[test]
    fn capture_in_sequential_instantiation_is_rejected() {
        let w = ArrowElim {
            binders: vec!["X".into(), "Y".into()],
            unit: tv("X"),
            results: vec![tv("Y")],
            insts: vec![vec![tv("Y"), tv("Z")]],
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn instantiation_of_the_polymorphic_identity() {
        let ctx = Context::new();
        let d = AddDerivation::forall_e(Type::arrow(tv("Y"), tv("Y")), identity_poly(&ctx));
        check_add(&d).unwrap();
        let yy = Type::arrow(tv("Y"), tv("Y"));
        assert_eq!(d.ty, Type::arrow(yy.clone(), yy));
    }

    #[test]
    fn empty_sums_of_witnesses_give_void() {
        let w = ArrowElim { binders: vec![], unit: tv("X"), results: vec![], insts: vec![vec![]] };
        assert_eq!(w.fun_type(), Type::Zero);
        assert!(w.result_type().equiv(&Type::Zero));
        let ctx = Context::from_pairs([("a", tv("X"))]).unwrap();
        let d = AddDerivation::arr_e(w, AddDerivation::ax0(&ctx), AddDerivation::ax(&ctx, "a").unwrap());
        check_add(&d).unwrap();
    }
}
