//! Constructive transformations of additive derivations: type and term
//! substitution, generation analysis, and one-step subject reduction.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::derivation::{AddDerivation, AddRule, ArrowElim};
use crate::reduction::{enumerate_redexes, step, Redex, ReductionError, Rule};
use crate::syntax::{fresh_name, Step, Term};
use crate::types::{preceq_check, SsubWitness, Type};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("unsupported derivation shape: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Stale(#[from] ReductionError),
    #[error("premise mismatch: {0}")]
    Mismatch(String),
}

fn unsupported(msg: impl Into<String>) -> TransformError {
    TransformError::Unsupported(msg.into())
}

fn fresh_avoiding(base: &str, avoid: &BTreeSet<String>) -> String {
    fresh_name(base, &|n| avoid.contains(n))
}

/// `D[U/X]`: substitutes a unit type for a free type variable throughout,
/// renaming quantifier binders that would capture.
pub fn type_subst_derivation(d: &AddDerivation, x: &str, u: &Type) -> Result<AddDerivation, TransformError> {
    if !u.is_unit() {
        return Err(TransformError::Mismatch(format!("`{u}` is not a unit type")));
    }
    Ok(tsubst(d, x, u))
}

fn tsubst(d: &AddDerivation, x: &str, u: &Type) -> AddDerivation {
    let s = |t: &Type| t.subst_raw(x, u);
    let avoid = || {
        let mut a = d.type_names();
        a.extend(u.free_vars());
        a.insert(x.to_string());
        a
    };
    let (rule, premises) = match &d.rule {
        AddRule::ForallI { var } if var == x || u.has_free(var) => {
            let fresh = fresh_avoiding(var, &avoid());
            let renamed = tsubst(&d.premises[0], var, &Type::var(&fresh));
            (AddRule::ForallI { var: fresh }, vec![tsubst(&renamed, x, u)])
        }
        AddRule::ForallE { inst } => {
            (AddRule::ForallE { inst: s(inst) }, d.premises.iter().map(|p| tsubst(p, x, u)).collect())
        }
        AddRule::ArrE(w) => {
            let mut w = w.clone();
            let mut taken = avoid();
            for k in 0..w.binders.len() {
                let b = w.binders[k].clone();
                if b == x || u.has_free(&b) {
                    let fresh = fresh_avoiding(&b, &taken);
                    taken.insert(fresh.clone());
                    let fv = Type::var(&fresh);
                    w.unit = w.unit.subst_raw(&b, &fv);
                    w.results = w.results.iter().map(|t| t.subst_raw(&b, &fv)).collect();
                    w.binders[k] = fresh;
                }
            }
            w.unit = s(&w.unit);
            w.results = w.results.iter().map(s).collect();
            w.insts = w.insts.iter().map(|row| row.iter().map(s).collect()).collect();
            (AddRule::ArrE(w), d.premises.iter().map(|p| tsubst(p, x, u)).collect())
        }
        rule => (rule.clone(), d.premises.iter().map(|p| tsubst(p, x, u)).collect()),
    };
    AddDerivation { ctx: d.ctx.map_types(s), term: d.term.clone(), ty: s(&d.ty), rule, premises }
}

/// Renames the free term variable `from` to the fresh name `to`.
fn rename_free(d: &AddDerivation, from: &str, to: &str) -> AddDerivation {
    let mut ctx = d.ctx.clone();
    if let Some(u) = d.ctx.get(from) {
        ctx = d.ctx.without(from).extend(to, u.clone()).expect("fresh name");
    }
    AddDerivation {
        ctx,
        term: d.term.substitute(from, &Term::var(to)),
        ty: d.ty.clone(),
        rule: d.rule.clone(),
        premises: d.premises.iter().map(|p| rename_free(p, from, to)).collect(),
    }
}

/// Adds `y : uy` to every context of `d`, renaming binders in the way.
fn weaken(d: &AddDerivation, y: &str, uy: &Type) -> AddDerivation {
    let ctx = d.ctx.extend(y, uy.clone()).expect("weakening variable is fresh");
    let (rule, premises) = match &d.rule {
        AddRule::ArrI { var } if var == y => {
            let mut avoid = d.term_names();
            avoid.insert(y.to_string());
            let fresh = fresh_avoiding(var, &avoid);
            let renamed = rename_free(&d.premises[0], var, &fresh);
            (AddRule::ArrI { var: fresh }, vec![weaken(&renamed, y, uy)])
        }
        AddRule::ForallI { var } if uy.has_free(var) => {
            let mut avoid = d.type_names();
            avoid.extend(uy.free_vars());
            let fresh = fresh_avoiding(var, &avoid);
            let renamed = tsubst(&d.premises[0], var, &Type::var(&fresh));
            (AddRule::ForallI { var: fresh }, vec![weaken(&renamed, y, uy)])
        }
        rule => (rule.clone(), d.premises.iter().map(|p| weaken(p, y, uy)).collect()),
    };
    AddDerivation { ctx, term: d.term.clone(), ty: d.ty.clone(), rule, premises }
}

/// From `Γ, x : U ⊢ t : T` and `Γ ⊢ v : U` builds `Γ ⊢ t[v/x] : T`.
pub fn subst_derivation(d: &AddDerivation, x: &str, dv: &AddDerivation) -> Result<AddDerivation, TransformError> {
    let Some(u) = d.ctx.get(x) else {
        return Err(TransformError::Mismatch(format!("`{x}` is not in the context")));
    };
    if !dv.ty.equiv(u) {
        return Err(TransformError::Mismatch(format!("`{}` does not have type `{u}`", dv.term)));
    }
    let rest = d.ctx.without(x);
    if dv.ctx.len() != rest.len() || dv.ctx.iter().zip(rest.iter()).any(|(a, b)| a.0 != b.0 || !a.1.equiv(b.1)) {
        return Err(TransformError::Mismatch("contexts differ".into()));
    }
    if !dv.term.is_value() {
        return Err(TransformError::Mismatch(format!("`{}` is not a value", dv.term)));
    }
    Ok(subst(d, x, dv))
}

fn subst(d: &AddDerivation, x: &str, dv: &AddDerivation) -> AddDerivation {
    if d.rule == AddRule::Ax && d.term == Term::var(x) {
        return dv.clone().pin(&d.ty);
    }
    let premises = match &d.rule {
        AddRule::ArrI { var } => {
            let p = &d.premises[0];
            let uy = p.ctx.get(var).expect("arrow introduction binds its variable").clone();
            vec![subst(p, x, &weaken(dv, var, &uy))]
        }
        _ => d.premises.iter().map(|p| subst(p, x, dv)).collect(),
    };
    AddDerivation {
        ctx: d.ctx.without(x),
        term: d.term.substitute(x, &dv.term),
        ty: d.ty.clone(),
        rule: d.rule.clone(),
        premises,
    }
}

/// The shape of the structural rule found below a stack of `≡`/`∀` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenerationShape {
    Var { declared: Type },
    Zero,
    App { witness: ArrowElim },
    Abs { dom: Type, cod: Type },
    Sum { left: Type, right: Type },
}

/// Decomposition of a derivation into its structural rule plus the `≼`
/// chain leading from that rule's type to the conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationReport {
    pub shape: GenerationShape,
    pub core_type: Type,
    pub chain: Vec<SsubWitness>,
}

impl GenerationReport {
    /// Number of function summands (α) and argument summands (β) of an application.
    pub fn app_counts(&self) -> Option<(usize, usize)> {
        match &self.shape {
            GenerationShape::App { witness } => Some((witness.alpha(), witness.beta())),
            _ => None,
        }
    }

    /// Re-checks the chain against the derivation's conclusion.
    pub fn chain_holds(&self, conclusion: &Type) -> bool {
        preceq_check(&self.core_type, conclusion, &self.chain).unwrap_or(false)
    }
}

pub fn generation_analyze(d: &AddDerivation) -> GenerationReport {
    let mut wrappers = Vec::new();
    let mut core = d;
    while matches!(core.rule, AddRule::Equiv | AddRule::ForallI { .. } | AddRule::ForallE { .. }) {
        wrappers.push(core);
        core = &core.premises[0];
    }
    let chain = wrappers
        .iter()
        .rev()
        .filter_map(|w| match &w.rule {
            AddRule::ForallI { var } => Some(SsubWitness::Gen { binder: var.clone() }),
            AddRule::ForallE { inst } => Some(SsubWitness::Inst { ty: inst.clone() }),
            _ => None,
        })
        .collect();
    let shape = match &core.rule {
        AddRule::Ax => GenerationShape::Var { declared: core.ty.clone() },
        AddRule::Ax0 => GenerationShape::Zero,
        AddRule::ArrE(w) => GenerationShape::App { witness: w.clone() },
        AddRule::ArrI { var } => GenerationShape::Abs {
            dom: core.premises[0].ctx.get(var).cloned().unwrap_or(Type::Zero),
            cod: core.premises[0].ty.clone(),
        },
        AddRule::PlusI => {
            GenerationShape::Sum { left: core.premises[0].ty.clone(), right: core.premises[1].ty.clone() }
        }
        _ => unreachable!("wrappers were stripped"),
    };
    GenerationReport { shape, core_type: core.ty.clone(), chain }
}

/// Splits a derivation of a sum into derivations of its summands (as a
/// multiset) whose types add up to the original one. Quantifier nodes over
/// a sum are pushed into its only summand of non-void type.
pub fn decompose(d: &AddDerivation) -> Result<Vec<AddDerivation>, TransformError> {
    let parts_of = |p: &AddDerivation| {
        if matches!(p.term, Term::Sum(_)) {
            decompose(p)
        } else {
            Ok(vec![p.clone()])
        }
    };
    match &d.rule {
        AddRule::PlusI => {
            let mut parts = parts_of(&d.premises[0])?;
            parts.extend(parts_of(&d.premises[1])?);
            Ok(parts)
        }
        AddRule::Equiv => decompose(&d.premises[0]),
        AddRule::ForallI { .. } | AddRule::ForallE { .. } => {
            let mut parts = decompose(&d.premises[0])?;
            let live: Vec<usize> = (0..parts.len()).filter(|&k| !parts[k].ty.equiv(&Type::Zero)).collect();
            let [k] = live[..] else {
                return Err(unsupported(format!("quantifier over `{}` with {} live summands", d.term, live.len())));
            };
            let inner = parts[k].clone();
            parts[k] = match &d.rule {
                AddRule::ForallI { var } => AddDerivation::forall_i(var, inner),
                AddRule::ForallE { inst } => AddDerivation::forall_e(inst.clone(), inner),
                _ => unreachable!(),
            };
            Ok(parts)
        }
        _ => Err(unsupported(format!("`{}` derived by {} is not a sum", d.term, d.rule.name()))),
    }
}

/// Subject reduction: a derivation of `Γ ⊢ u : T` where `u` is the reduct
/// of the subject of `d` (typed `T`) along `r`.
pub fn step_derivation(d: &AddDerivation, r: &Redex) -> Result<AddDerivation, TransformError> {
    let target = step(&d.term, r)?;
    let out = step_at(d, r)?;
    if out.term != target {
        return Err(unsupported(format!("rebuilt subject `{}` differs from reduct `{target}`", out.term)));
    }
    Ok(out.pin(&d.ty))
}

fn with_premise(d: &AddDerivation, i: usize, p: AddDerivation, term: Term) -> AddDerivation {
    let mut premises = d.premises.clone();
    premises[i] = p;
    AddDerivation { ctx: d.ctx.clone(), term, ty: d.ty.clone(), rule: d.rule.clone(), premises }
}

fn step_at(d: &AddDerivation, r: &Redex) -> Result<AddDerivation, TransformError> {
    let Some((first, rest)) = r.path.0.split_first() else {
        return Ok(contract_at(d, r)?.pin(&d.ty));
    };
    let sub = |path: Vec<Step>| Redex { path: crate::syntax::Path(path), rule: r.rule, choice: r.choice };
    match (&d.rule, first) {
        (AddRule::Equiv | AddRule::ForallI { .. } | AddRule::ForallE { .. }, _) => {
            let p = step_at(&d.premises[0], r)?;
            let term = p.term.clone();
            Ok(with_premise(d, 0, p, term))
        }
        (AddRule::ArrI { var }, Step::Body) => {
            let Term::Abs(_, body) = &d.term else { unreachable!() };
            let inner = sub(rest.to_vec());
            let target = step(body, &inner)?;
            let premise = &d.premises[0];
            let opened = enumerate_redexes(&premise.term)
                .into_iter()
                .filter(|c| c.rule == r.rule)
                .find(|c| step(&premise.term, c).map(|u| u.close(var)) == Ok(target.clone()))
                .ok_or_else(|| unsupported("redex not found under the binder"))?;
            let p = step_at(premise, &opened)?;
            let term = Term::lam(var.clone(), p.term.clone());
            Ok(with_premise(d, 0, p, term))
        }
        (AddRule::ArrE(_), Step::Fun | Step::Arg) => {
            let i = usize::from(*first == Step::Arg);
            let p = step_at(&d.premises[i], &sub(rest.to_vec()))?;
            let (f, a) = if i == 0 { (&p.term, &d.premises[1].term) } else { (&d.premises[0].term, &p.term) };
            let term = Term::app(f.clone(), a.clone());
            Ok(with_premise(d, i, p, term))
        }
        (AddRule::PlusI, Step::Summand(i)) => {
            let s = d.term.summands().get(*i).ok_or_else(|| unsupported("summand out of range"))?;
            for k in 0..2 {
                let pt = &d.premises[k].term;
                let path = match pt {
                    Term::Sum(ts) => match ts.iter().position(|t| t == s) {
                        Some(j) => [vec![Step::Summand(j)], rest.to_vec()].concat(),
                        None => continue,
                    },
                    t if t == s => rest.to_vec(),
                    _ => continue,
                };
                let p = step_at(&d.premises[k], &sub(path))?;
                let (a, b) = if k == 0 { (&p.term, &d.premises[1].term) } else { (&d.premises[0].term, &p.term) };
                let term = Term::plus(a.clone(), b.clone()).canonicalize();
                return Ok(with_premise(d, k, p, term));
            }
            Err(unsupported("summand not found in either premise"))
        }
        _ => Err(ReductionError::StaleRedex(r.to_string()).into()),
    }
}

fn contract_at(d: &AddDerivation, r: &Redex) -> Result<AddDerivation, TransformError> {
    match r.rule {
        Rule::SumZero => {
            let mut parts = decompose(d)?;
            let k = parts.iter().position(|p| p.term == Term::Zero).ok_or_else(|| unsupported("no zero summand"))?;
            parts.remove(k);
            Ok(AddDerivation::sum_of(parts).expect("a sum has at least two summands"))
        }
        Rule::ZeroFun | Rule::ZeroArg => {
            if !d.ty.equiv(&Type::Zero) {
                return Err(unsupported(format!("application of zero typed `{}`", d.ty)));
            }
            Ok(AddDerivation::ax0(&d.ctx))
        }
        Rule::DistRight | Rule::DistLeft | Rule::Beta => {
            let mut wrappers = Vec::new();
            let mut core = d;
            while matches!(core.rule, AddRule::Equiv | AddRule::ForallI { .. } | AddRule::ForallE { .. }) {
                wrappers.push(core);
                core = &core.premises[0];
            }
            let AddRule::ArrE(w) = &core.rule else {
                return Err(unsupported(format!("application derived by {}", core.rule.name())));
            };
            let new_core = match r.rule {
                Rule::DistRight => distribute(core, w, r.choice, true)?,
                Rule::DistLeft => distribute(core, w, r.choice, false)?,
                _ => beta(core, w)?,
            }
            .pin(&core.ty);
            Ok(wrappers.iter().rev().fold(new_core, |acc, wr| {
                let term = acc.term.clone();
                with_premise(wr, 0, acc, term)
            }))
        }
    }
}

/// Assigns every part's unit summands to distinct indices whose canonical
/// unit matches.
fn assign(parts: &[AddDerivation], units: &[Type]) -> Result<Vec<Vec<usize>>, TransformError> {
    let mut used = vec![false; units.len()];
    parts
        .iter()
        .map(|p| {
            p.ty.units()
                .iter()
                .map(|u| {
                    let i = (0..units.len())
                        .find(|&i| !used[i] && units[i] == *u)
                        .ok_or_else(|| unsupported(format!("summand type `{u}` not covered by the witness")))?;
                    used[i] = true;
                    Ok(i)
                })
                .collect()
        })
        .collect()
}

fn distribute(
    core: &AddDerivation,
    w: &ArrowElim,
    choice: usize,
    right: bool,
) -> Result<AddDerivation, TransformError> {
    let (sum_d, other) =
        if right { (&core.premises[0], &core.premises[1]) } else { (&core.premises[1], &core.premises[0]) };
    let Term::Sum(ts) = &sum_d.term else {
        return Err(unsupported("distributed operand is not a sum"));
    };
    let chosen = ts.get(choice).ok_or_else(|| unsupported("split choice out of range"))?;
    let parts = decompose(sum_d)?;
    let units: Vec<Type> = if right {
        (0..w.alpha()).map(|i| w.fun_unit(i).canonicalize()).collect()
    } else {
        (0..w.beta()).map(|j| w.arg_unit(j).canonicalize()).collect()
    };
    let idx = assign(&parts, &units)?;
    let k = parts.iter().position(|p| p.term == *chosen).expect("chosen summand is a part");
    let (mut one, mut rest) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
    for (n, (p, is)) in parts.into_iter().zip(idx).enumerate() {
        let group = if n == k { &mut one } else { &mut rest };
        group.0.push(p);
        group.1.extend(is);
    }
    let build = |(ps, mut is): (Vec<AddDerivation>, Vec<usize>)| {
        is.sort_unstable();
        let mut wg = w.clone();
        if right {
            wg.results = is.iter().map(|&i| w.results[i].clone()).collect();
        } else {
            wg.insts = is.iter().map(|&j| w.insts[j].clone()).collect();
        }
        let part = AddDerivation::sum_of(ps).expect("nonempty group");
        if right {
            let fun = part.pin(&wg.fun_type());
            AddDerivation::arr_e(wg, fun, other.clone())
        } else {
            let arg = part.pin(&wg.arg_type());
            AddDerivation::arr_e(wg, other.clone(), arg)
        }
    };
    Ok(AddDerivation::plus_i(build(one), build(rest)))
}

fn beta(core: &AddDerivation, w: &ArrowElim) -> Result<AddDerivation, TransformError> {
    let (df, da) = (&core.premises[0], &core.premises[1]);
    let mut chain = Vec::new();
    let mut lam = df;
    while matches!(lam.rule, AddRule::Equiv | AddRule::ForallI { .. } | AddRule::ForallE { .. }) {
        chain.push(lam);
        lam = &lam.premises[0];
    }
    let AddRule::ArrI { var: x } = &lam.rule else {
        return Err(unsupported(format!("abstraction derived by {}", lam.rule.name())));
    };
    if w.alpha() != 1 || w.beta() != 1 {
        return Err(unsupported("beta redex with a non-unit witness"));
    }
    let mut body = lam.premises[0].clone();
    let mut avoid = core.type_names();
    let mut stack: Vec<String> = Vec::new();
    for node in chain.iter().rev() {
        match &node.rule {
            AddRule::ForallI { var } => {
                let fresh = fresh_avoiding(var, &avoid);
                avoid.insert(fresh.clone());
                body = tsubst(&body, var, &Type::var(&fresh));
                stack.push(fresh);
            }
            AddRule::ForallE { inst } => {
                let xv = stack.pop().ok_or_else(|| unsupported("instantiation without generalisation"))?;
                body = tsubst(&body, &xv, inst);
            }
            _ => {}
        }
    }
    for v in &w.insts[0] {
        let xv = stack.pop().ok_or_else(|| unsupported("witness instantiates too many variables"))?;
        body = tsubst(&body, &xv, v);
    }
    if !stack.is_empty() {
        return Err(unsupported("witness instantiates too few variables"));
    }
    let out = subst_derivation(&body, x, da)?;
    if !out.ty.equiv(&core.ty) {
        return Err(unsupported(format!("contractum typed `{}`, expected `{}`", out.ty, core.ty)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::check_add;
    use crate::types::Context;

    fn tv(n: &str) -> Type {
        Type::var(n)
    }

    fn ctx() -> Context {
        Context::from_pairs([("a", tv("A")), ("b", tv("B"))]).unwrap()
    }

    fn poly_id(ctx: &Context) -> AddDerivation {
        let body = AddDerivation::ax(&ctx.extend("x", tv("X")).unwrap(), "x").unwrap();
        AddDerivation::forall_i("X", AddDerivation::arr_i("x", body))
    }

    fn id_on_sum() -> AddDerivation {
        let c = ctx();
        let arg = AddDerivation::plus_i(AddDerivation::ax(&c, "a").unwrap(), AddDerivation::ax(&c, "b").unwrap());
        let w = ArrowElim {
            binders: vec!["X".into()],
            unit: tv("X"),
            results: vec![tv("X")],
            insts: vec![vec![tv("A")], vec![tv("B")]],
        };
        AddDerivation::arr_e(w, poly_id(&c), arg)
    }

    fn reduce_all(d: &AddDerivation) -> AddDerivation {
        let mut d = d.clone();
        while let Some(r) = crate::reduction::strategy_redex(&d.term) {
            let next = step_derivation(&d, &r).unwrap();
            check_add(&next).unwrap();
            assert_eq!(next.ty, d.ty);
            d = next;
        }
        d
    }

    #[test]
    fn identity_on_sum_steps_preserve_typing() {
        let d = id_on_sum();
        for r in enumerate_redexes(&d.term) {
            let out = step_derivation(&d, &r).unwrap();
            check_add(&out).unwrap();
            assert!(out.ty.equiv(&Type::plus(tv("A"), tv("B"))));
        }
        let nf = reduce_all(&d);
        assert_eq!(nf.term, Term::plus(Term::var("a"), Term::var("b")));
    }

    #[test]
    fn generation_of_identity_application() {
        let g = generation_analyze(&id_on_sum());
        assert_eq!(g.app_counts(), Some((1, 2)));
        assert!(g.chain.is_empty());
        let g = generation_analyze(&poly_id(&ctx()));
        assert_eq!(g.chain, vec![SsubWitness::Gen { binder: "X".into() }]);
        assert!(g.chain_holds(&poly_id(&ctx()).ty));
    }

    #[test]
    fn substituting_into_a_variable_returns_the_value() {
        let c = ctx();
        let d = AddDerivation::ax(&c.extend("x", tv("A")).unwrap(), "x").unwrap();
        let dv = AddDerivation::ax(&c, "a").unwrap();
        assert_eq!(subst_derivation(&d, "x", &dv).unwrap(), dv);
    }

    #[test]
    fn substitution_under_a_clashing_binder() {
        // x : B -> B ⊢ \y. x y, then x := \y. y
        let bb = Type::arrow(tv("B"), tv("B"));
        let inner = Context::from_pairs([("x", bb.clone()), ("y", tv("B"))]).unwrap();
        let app = AddDerivation::arr_e(
            ArrowElim { binders: vec![], unit: tv("B"), results: vec![tv("B")], insts: vec![vec![]] },
            AddDerivation::ax(&inner, "x").unwrap(),
            AddDerivation::ax(&inner, "y").unwrap(),
        );
        let d = AddDerivation::arr_i("y", app);
        check_add(&d).unwrap();
        let yctx = Context::from_pairs([("y", tv("B"))]).unwrap();
        let dv = AddDerivation::arr_i("y", AddDerivation::ax(&yctx, "y").unwrap());
        let out = subst_derivation(&d, "x", &dv).unwrap();
        check_add(&out).unwrap();
        let id = Term::lam("z", Term::var("z"));
        assert_eq!(out.term, Term::lam("y", Term::app(id, Term::var("y"))));
    }

    #[test]
    fn type_substitution_renames_capturing_binders() {
        let d = poly_id(&Context::new());
        let out = type_subst_derivation(&d, "Y", &tv("X")).unwrap();
        check_add(&out).unwrap();
        assert_eq!(out.ty, d.ty);
        let c = Context::from_pairs([("a", tv("Y"))]).unwrap();
        let d = AddDerivation::plus_i(poly_id(&c), AddDerivation::ax(&c, "a").unwrap());
        let out = type_subst_derivation(&d, "Y", &tv("X")).unwrap();
        check_add(&out).unwrap();
        assert!(out.ctx.get("a") == Some(&tv("X")));
    }

    #[test]
    fn sum_zero_drops_the_zero_summand() {
        let c = ctx();
        let d = AddDerivation::plus_i(AddDerivation::ax(&c, "a").unwrap(), AddDerivation::ax0(&c));
        let r = enumerate_redexes(&d.term).pop().unwrap();
        let out = step_derivation(&d, &r).unwrap();
        check_add(&out).unwrap();
        assert_eq!(out.term, Term::var("a"));
        assert_eq!(out.ty, d.ty);
    }

    #[test]
    fn beta_through_instantiation() {
        // (inst (gen X. \x:X. x) [A]) a  : A
        let c = ctx();
        let f = AddDerivation::forall_e(tv("A"), poly_id(&c));
        let w = ArrowElim { binders: vec![], unit: tv("A"), results: vec![tv("A")], insts: vec![vec![]] };
        let d = AddDerivation::arr_e(w, f, AddDerivation::ax(&c, "a").unwrap());
        check_add(&d).unwrap();
        let nf = reduce_all(&d);
        assert_eq!(nf.term, Term::var("a"));
    }
}
