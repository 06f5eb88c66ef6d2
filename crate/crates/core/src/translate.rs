//! Translation of structured derivations into System F with pairs, the
//! partial reverse translation, and the coercions between translated types.

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::derivation::AddDerivation;
use crate::reduction::{Redex, Rule};
use crate::sadd::{add_to_sadd, check_sadd, sadd_to_add, ConversionError, SaddDerivation, SaddRule, TypeTree};
use crate::syntax::{fresh_name, Term, Var};
use crate::systemf::{f_path_valid, f_reaches, proj_path, FContext, FDerivation, FTerm, FType};
use crate::transform::{step_derivation, TransformError};
use crate::types::{Context, Type};

/// Default number of terms the reduction search may visit.
pub const DEFAULT_SEARCH_BUDGET: usize = 10_000;

pub fn trans_type(t: &Type) -> FType {
    match t {
        Type::Var(v) => FType::Var(v.clone()),
        Type::Zero => FType::One,
        Type::Arrow(a, b) => FType::arrow(trans_type(a), trans_type(b)),
        Type::Forall(x, b) => FType::Forall(x.clone(), Box::new(trans_type(b))),
        Type::Sum(ts) => {
            let mut it = ts.iter().map(trans_type);
            match it.next() {
                None => FType::One,
                Some(first) => it.fold(first, FType::prod),
            }
        }
    }
}

pub fn trans_context(ctx: &Context) -> FContext {
    ctx.iter().map(|(x, u)| (x.clone(), trans_type(u))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationResult {
    pub fterm: FTerm,
    pub ftype: FType,
    pub fderivation: FDerivation,
}

/// Translates a checked structured derivation along with its typing.
pub fn trans_term(d: &SaddDerivation) -> TranslationResult {
    let fd = trans_derivation(d);
    TranslationResult { fterm: fd.term.clone(), ftype: fd.ty.clone(), fderivation: fd }
}

fn trans_derivation(d: &SaddDerivation) -> FDerivation {
    let ctx = trans_context(&d.ctx);
    let p = |k: usize| trans_derivation(&d.premises[k]);
    match &d.rule {
        SaddRule::Ax => {
            let Term::Var(Var::Free(x)) = &d.term else { unreachable!("checked ax") };
            FDerivation::ax(&ctx, x).expect("checked ax")
        }
        SaddRule::Ax0 => FDerivation::unit(&ctx),
        SaddRule::PlusI => FDerivation::prod_i(p(0), p(1)),
        SaddRule::ArrI { var } => FDerivation::arr_i(var, p(0)),
        SaddRule::ForallI { var } => FDerivation::forall_i(var, p(0)),
        SaddRule::ForallE { inst } => FDerivation::forall_e(trans_type(inst), p(0)),
        SaddRule::StructArrE(w) => {
            let (df, da) = (p(0), p(1));
            let fun_leaves = w.fun_tree.leaves();
            let tree = w.fun_tree.compose(&w.arg_tree);
            FDerivation::tree(&tree, &ctx, &|wv| {
                let fw = fun_leaves.iter().find(|f| wv.starts_with(f.as_str()))?;
                let v = &wv[fw.len()..];
                let mut fun = FDerivation::project(df.clone(), fw);
                for inst in w.insts.get(v)? {
                    fun = FDerivation::forall_e(trans_type(inst), fun);
                }
                Some(FDerivation::arr_e(fun, FDerivation::project(da.clone(), v)))
            })
            .expect("checked witness")
        }
    }
}

/// Structures an additive derivation and translates it.
pub fn translate_add(d: &AddDerivation) -> Result<(SaddDerivation, TranslationResult), ConversionError> {
    let s = add_to_sadd(d)?;
    let t = trans_term(&s);
    Ok((s, t))
}

/// Partial inverse on types; `None` where the image has no preimage.
pub fn rev_type(a: &FType) -> Option<Type> {
    Some(match a {
        FType::Var(v) => Type::Var(v.clone()),
        FType::One => Type::Zero,
        FType::Prod(x, y) => Type::plus(rev_type(x)?, rev_type(y)?),
        FType::Arrow(x, y) => {
            let d = rev_type(x)?;
            if !d.is_unit() {
                return None;
            }
            Type::arrow(d, rev_type(y)?)
        }
        FType::Forall(x, b) => {
            let b = rev_type(b)?;
            if !b.is_unit() {
                return None;
            }
            Type::Forall(x.clone(), Box::new(b))
        }
    })
}

/// Partial inverse on terms; the result is canonical.
pub fn rev_term(t: &FTerm) -> Option<Term> {
    rev_raw(t).map(|t| t.canonicalize())
}

fn rev_raw(t: &FTerm) -> Option<Term> {
    Some(match t {
        FTerm::Var(v) => Term::Var(v.clone()),
        FTerm::Star => Term::Zero,
        FTerm::Abs(x, b) => Term::Abs(x.clone(), Box::new(rev_raw(b)?)),
        FTerm::App(f, a) => Term::app(rev_raw(f)?, rev_raw(a)?),
        FTerm::Pair(a, b) => match tree_pattern(t) {
            Some((f, u)) => Term::app(rev_raw(&f)?, rev_raw(&u)?),
            None => Term::plus(rev_raw(a)?, rev_raw(b)?),
        },
        FTerm::ProjL(_) | FTerm::ProjR(_) => return None,
    })
}

enum PairLeaf<'a> {
    Zero,
    Term(&'a FTerm),
}

fn pair_tree<'a>(t: &'a FTerm, w: &mut String, leaves: &mut Vec<(String, PairLeaf<'a>)>) -> TypeTree {
    match t {
        FTerm::Pair(a, b) => {
            w.push('l');
            let x = pair_tree(a, w, leaves);
            w.pop();
            w.push('r');
            let y = pair_tree(b, w, leaves);
            w.pop();
            TypeTree::node(x, y)
        }
        FTerm::Star => {
            leaves.push((w.clone(), PairLeaf::Zero));
            TypeTree::ZeroLeaf
        }
        other => {
            leaves.push((w.clone(), PairLeaf::Term(other)));
            TypeTree::Leaf
        }
    }
}

/// Peels outer projections; returns the base and the word `w` with
/// `t = π_w̄(base)`.
fn peel(t: &FTerm) -> Vec<(&FTerm, String)> {
    let mut out = vec![(t, String::new())];
    let mut cur = t;
    let mut rev_word = String::new();
    loop {
        let (c, inner) = match cur {
            FTerm::ProjL(x) => ('l', &**x),
            FTerm::ProjR(x) => ('r', &**x),
            _ => break,
        };
        rev_word.push(c);
        cur = inner;
        out.push((cur, rev_word.chars().rev().collect()));
    }
    out
}

/// Matches `A[wv ↦ π_w̄(t) π_v̄(u)]` on the whole pair tree of `p`, returning
/// `(t, u)`.
fn tree_pattern(p: &FTerm) -> Option<(FTerm, FTerm)> {
    let mut leaves = Vec::new();
    let tree = pair_tree(p, &mut String::new(), &mut leaves);
    let apps: Vec<(&String, &FTerm, &FTerm)> = leaves
        .iter()
        .filter_map(|(w, l)| match l {
            PairLeaf::Term(FTerm::App(f, a)) => Some((w, &**f, &**a)),
            _ => None,
        })
        .collect();
    let (_, f0, a0) = apps.first()?;
    if apps.len() != leaves.iter().filter(|(_, l)| matches!(l, PairLeaf::Term(_))).count() {
        return None;
    }
    // deepest peel first
    for (tb, _) in peel(f0).into_iter().rev() {
        for (ub, _) in peel(a0).into_iter().rev() {
            if let Some(ok) = try_split(&tree, &apps, tb, ub) {
                if ok {
                    return Some((tb.clone(), ub.clone()));
                }
            }
        }
    }
    None
}

fn try_split(tree: &TypeTree, apps: &[(&String, &FTerm, &FTerm)], t: &FTerm, u: &FTerm) -> Option<bool> {
    let mut split: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (addr, f, a) in apps {
        let (_, w) = peel(f).into_iter().find(|(b, _)| *b == t)?;
        let (_, v) = peel(a).into_iter().find(|(b, _)| *b == u)?;
        if format!("{w}{v}") != **addr {
            return Some(false);
        }
        split.entry(w).or_default().push(v);
    }
    let a2 = subtree(tree, split.keys().next()?)?;
    let a2_leaves = a2.leaves();
    for (w, vs) in &split {
        if subtree(tree, w)? != a2 || *vs != a2_leaves {
            return Some(false);
        }
    }
    let Some(a1) = cut(tree, &mut String::new(), &|w| split.contains_key(w)) else {
        return Some(false);
    };
    Some(a1.compose(a2) == *tree)
}

fn subtree<'a>(t: &'a TypeTree, w: &str) -> Option<&'a TypeTree> {
    w.chars().try_fold(t, |cur, c| match cur {
        TypeTree::Node(a, b) => Some(if c == 'l' { &**a } else { &**b }),
        _ => None,
    })
}

/// `A1`: the tree cut at the split points; `None` if a plain leaf remains.
fn cut(t: &TypeTree, w: &mut String, at: &dyn Fn(&str) -> bool) -> Option<TypeTree> {
    if at(w) {
        return Some(TypeTree::Leaf);
    }
    match t {
        TypeTree::Node(a, b) => {
            w.push('l');
            let x = cut(a, w, at);
            w.pop();
            w.push('r');
            let y = cut(b, w, at);
            w.pop();
            Some(TypeTree::node(x?, y?))
        }
        TypeTree::Leaf => None,
        TypeTree::ZeroLeaf => Some(TypeTree::ZeroLeaf),
    }
}

/// Which part of a sequent failed to come back unchanged.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{component} differs: expected `{expected}`, got `{got}`")]
pub struct RoundTripMismatch {
    pub component: String,
    pub expected: String,
    pub got: String,
}

/// Translates and reverses the conclusion of `d`, comparing syntactically.
pub fn round_trip(d: &SaddDerivation) -> Result<(), RoundTripMismatch> {
    let tr = trans_term(d);
    let mismatch = |component: &str, expected: String, got: Option<String>| RoundTripMismatch {
        component: component.to_string(),
        expected,
        got: got.unwrap_or_else(|| "undefined".into()),
    };
    for (x, u) in d.ctx.iter() {
        let back = rev_type(&trans_type(u));
        if back.as_ref() != Some(u) {
            return Err(mismatch(&format!("context entry {x}"), u.to_string(), back.map(|t| t.to_string())));
        }
    }
    let term = rev_term(&tr.fterm);
    if term.as_ref() != Some(&d.term) {
        return Err(mismatch("term", d.term.to_string(), term.map(|t| t.to_string())));
    }
    let ty = rev_type(&tr.ftype);
    if ty.as_ref() != Some(&d.ty) {
        return Err(mismatch("type", d.ty.to_string(), ty.map(|t| t.to_string())));
    }
    Ok(())
}

/// The two isomorphism terms between `[[T + void]]` and `[[T]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Epsilon {
    /// `λx.π_l x : [[T]] × 1 → [[T]]`
    pub drop: FDerivation,
    /// `λx.⟨x, ⋆⟩ : [[T]] → [[T]] × 1`
    pub lift: FDerivation,
}

pub fn epsilon_terms(t: &Type) -> Epsilon {
    let a = trans_type(t);
    let with_x = |ty: FType| FContext::new().extend("x", ty).expect("empty context");
    let c1 = with_x(FType::prod(a.clone(), FType::One));
    let drop = FDerivation::arr_i("x", FDerivation::proj_l(FDerivation::ax(&c1, "x").expect("declared")));
    let c2 = with_x(a);
    let lift = FDerivation::arr_i(
        "x",
        FDerivation::prod_i(FDerivation::ax(&c2, "x").expect("declared"), FDerivation::unit(&c2)),
    );
    Epsilon { drop, lift }
}

/// A term `c` with `c : [[from]] → [[to]]` for `from ≡ to`, built from pair
/// shuffles, `ε`, and wrappers under arrows. `None` if the types are not
/// equivalent.
pub fn coercion(from: &Type, to: &Type) -> Option<FTerm> {
    if !from.equiv(to) {
        return None;
    }
    Some(match coerce(from, to) {
        Some(c) => c,
        None => FTerm::lam("x", FTerm::var("x")),
    })
}

/// `None` stands for the identity.
fn coerce(from: &Type, to: &Type) -> Option<FTerm> {
    if from == to {
        return None;
    }
    let (ta, la) = TypeTree::of_type(from);
    let (tb, lb) = TypeTree::of_type(to);
    if ta == TypeTree::Leaf && tb == TypeTree::Leaf {
        return coerce_unit(&la[""], &lb[""]);
    }
    let canon: Vec<(String, Type)> = la.iter().map(|(w, u)| (w.clone(), u.canonicalize())).collect();
    let used = RefCell::new(vec![false; canon.len()]);
    let x = FTerm::var("x");
    let body = crate::systemf::ftree_term(&tb, &|w2| {
        let target = &lb[w2];
        let want = target.canonicalize();
        let k = (0..canon.len()).find(|&k| !used.borrow()[k] && canon[k].1 == want)?;
        used.borrow_mut()[k] = true;
        let projected = proj_path(&x, &canon[k].0);
        Some(match coerce_unit(&la[&canon[k].0], target) {
            Some(c) => FTerm::app(c, projected),
            None => projected,
        })
    })?;
    Some(FTerm::lam("x", body))
}

fn coerce_unit(from: &Type, to: &Type) -> Option<FTerm> {
    match (from, to) {
        _ if from == to => None,
        (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
            let back = coerce(d2, d1);
            let fwd = coerce(c1, c2);
            if back.is_none() && fwd.is_none() {
                return None;
            }
            let mut arg = FTerm::var("y");
            if let Some(b) = back {
                arg = FTerm::app(b, arg);
            }
            let mut res = FTerm::app(FTerm::var("f"), arg);
            if let Some(c) = fwd {
                res = FTerm::app(c, res);
            }
            Some(FTerm::lam("f", FTerm::lam("y", res)))
        }
        (Type::Forall(_, b1), Type::Forall(_, b2)) => {
            let mut taken = from.free_vars();
            taken.extend(to.free_vars());
            let z = fresh_name("Z", &|n| taken.contains(n));
            coerce(&b1.open(&z), &b2.open(&z))
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimulationError {
    #[error("the rule t + 0 -> t is not simulated")]
    ExcludedRule,
    #[error("unsupported derivation shape: {0}")]
    Unsupported(String),
}

impl From<TransformError> for SimulationError {
    fn from(e: TransformError) -> Self {
        SimulationError::Unsupported(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simulation {
    pub next: SaddDerivation,
    /// Starts at `[[t]]_D` and ends at `[[u]]_D'`.
    pub path: Vec<FTerm>,
}

/// Regroupings of the reduct tried per step.
const MAX_RESHAPINGS: usize = 16;

/// Builds `D'` for the reduct and a reduction path between the translations.
/// Every regrouping of the reduct's top-level sum at the original type is a
/// candidate; the first one reachable from `[[t]]_D` is returned.
pub fn simulate_step(d: &SaddDerivation, r: &Redex, budget: usize) -> Result<Simulation, SimulationError> {
    if r.rule == Rule::SumZero {
        return Err(SimulationError::ExcludedRule);
    }
    let stepped = step_derivation(&sadd_to_add(d), r)?;
    let structured = add_to_sadd(&stepped).map_err(|e| SimulationError::Unsupported(e.to_string()))?;
    let candidates = reshapings(structured, &d.ty, MAX_RESHAPINGS);
    if candidates.is_empty() {
        return Err(SimulationError::Unsupported(format!("no structured derivation of the reduct at `{}`", d.ty)));
    }
    let from = trans_term(d).fterm;
    for next in candidates {
        check_sadd(&next).map_err(|e| SimulationError::Unsupported(e.to_string()))?;
        let to = trans_term(&next).fterm;
        if let Some(path) = f_reaches(&from, &to, budget) {
            if path.len() < 2 || !f_path_valid(&path) {
                return Err(SimulationError::Unsupported("translations coincide".into()));
            }
            return Ok(Simulation { next, path });
        }
    }
    Err(SimulationError::Unsupported(format!("no reduction path found within {budget} terms")))
}

/// Regroups the top-level sum nodes of `d` so that it concludes exactly `ty`.
pub fn reshape(d: SaddDerivation, ty: &Type) -> Option<SaddDerivation> {
    reshapings(d, ty, 1).pop()
}

/// Up to `limit` distinct regroupings of the top-level sum of `d` at `ty`.
pub fn reshapings(d: SaddDerivation, ty: &Type, limit: usize) -> Vec<SaddDerivation> {
    let mut out = Vec::new();
    if d.ty == *ty {
        out.push(d.clone());
    }
    let mut parts = Vec::new();
    flatten(d, &mut parts);
    if parts.len() <= 12 {
        rebuild(&parts, ty, limit, &mut out);
    }
    out.truncate(limit);
    out
}

fn flatten(d: SaddDerivation, out: &mut Vec<SaddDerivation>) {
    if d.rule == SaddRule::PlusI {
        for p in d.premises {
            flatten(p, out);
        }
    } else {
        out.push(d);
    }
}

fn rebuild(parts: &[SaddDerivation], ty: &Type, limit: usize, out: &mut Vec<SaddDerivation>) {
    let push = |d: SaddDerivation, out: &mut Vec<SaddDerivation>| {
        if out.len() < limit && !out.contains(&d) {
            out.push(d);
        }
    };
    if let [one] = parts {
        if one.ty == *ty {
            push(one.clone(), out);
        }
        return;
    }
    let Type::Sum(ts) = ty else { return };
    let [t1, t2] = &ts[..] else { return };
    let n = parts.len();
    for mask in 1..(1u32 << n) - 1 {
        if out.len() >= limit {
            return;
        }
        let (a, b): (Vec<_>, Vec<_>) = (0..n).partition(|k| mask & (1 << k) != 0);
        let pick = |ix: &[usize]| ix.iter().map(|&k| parts[k].clone()).collect::<Vec<_>>();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        rebuild(&pick(&a), t1, limit, &mut xs);
        if xs.is_empty() {
            continue;
        }
        rebuild(&pick(&b), t2, limit, &mut ys);
        for x in &xs {
            for y in &ys {
                push(SaddDerivation::plus_i(x.clone(), y.clone()), out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sadd::StructElim;
    use crate::systemf::{f_check, f_normalize};

    fn tv(n: &str) -> Type {
        Type::var(n)
    }

    #[test]
    fn type_translation() {
        assert_eq!(trans_type(&Type::Zero), FType::One);
        let u = tv("U");
        let t = Type::plus(Type::arrow(u.clone(), tv("T1")), Type::arrow(u.clone(), tv("T2")));
        assert_eq!(
            trans_type(&t),
            FType::prod(
                FType::arrow(FType::var("U"), FType::var("T1")),
                FType::arrow(FType::var("U"), FType::var("T2"))
            )
        );
        let id = Type::forall("X", Type::arrow(tv("X"), tv("X")));
        assert_eq!(trans_type(&id), FType::forall("X", FType::arrow(FType::var("X"), FType::var("X"))));
    }

    #[test]
    fn reverse_types() {
        assert_eq!(rev_type(&FType::One), Some(Type::Zero));
        let ab = FType::prod(FType::var("A"), FType::var("B"));
        assert_eq!(rev_type(&ab), Some(Type::plus(tv("A"), tv("B"))));
        assert_eq!(rev_type(&FType::arrow(ab, FType::var("C"))), None);
    }

    /// t : (U -> T1) + (U -> T2), u : (U + void) + U
    fn product_application() -> SaddDerivation {
        let u = tv("U");
        let ctx = Context::from_pairs([
            ("f", Type::arrow(u.clone(), tv("T1"))),
            ("g", Type::arrow(u.clone(), tv("T2"))),
            ("a", u.clone()),
            ("b", u.clone()),
        ])
        .unwrap();
        let ax = |x| SaddDerivation::ax(&ctx, x).unwrap();
        let fun = SaddDerivation::plus_i(ax("f"), ax("g"));
        let arg = SaddDerivation::plus_i(SaddDerivation::plus_i(ax("a"), SaddDerivation::ax0(&ctx)), ax("b"));
        use TypeTree::{Leaf as L, ZeroLeaf as Z};
        let w = StructElim {
            fun_tree: TypeTree::node(L, L),
            arg_tree: TypeTree::node(TypeTree::node(L, Z), L),
            binders: vec![],
            unit: u,
            results: [("l".to_string(), tv("T1")), ("r".to_string(), tv("T2"))].into(),
            insts: [("ll".to_string(), vec![]), ("r".to_string(), vec![])].into(),
        };
        let d = SaddDerivation::struct_arr_e(w, fun, arg);
        check_sadd(&d).unwrap();
        d
    }

    #[test]
    fn application_of_a_sum_to_a_sum() {
        let d = product_application();
        let tr = trans_term(&d);
        f_check(&tr.fderivation).unwrap();
        assert_eq!(tr.ftype, trans_type(&d.ty));
        let v = FTerm::var;
        let (t, u) = (FTerm::pair(v("f"), v("g")), FTerm::pair(FTerm::pair(v("a"), FTerm::Star), v("b")));
        let t1 = FTerm::proj_l(t.clone());
        let t2 = FTerm::proj_r(t);
        let u1 = FTerm::proj_l(FTerm::proj_l(u.clone()));
        let u2 = FTerm::proj_r(u);
        let row = |ti: &FTerm| {
            FTerm::pair(
                FTerm::pair(FTerm::app(ti.clone(), u1.clone()), FTerm::Star),
                FTerm::app(ti.clone(), u2.clone()),
            )
        };
        assert_eq!(tr.fterm, FTerm::pair(row(&t1), row(&t2)));
        assert_eq!(rev_term(&tr.fterm), Some(d.term.clone()));
        round_trip(&d).unwrap();
    }

    #[test]
    fn zero_and_pairs() {
        let ctx = Context::from_pairs([("x", tv("U")), ("y", tv("V"))]).unwrap();
        let z = SaddDerivation::ax0(&ctx);
        let tr = trans_term(&z);
        assert_eq!((tr.fterm, tr.ftype), (FTerm::Star, FType::One));
        round_trip(&z).unwrap();
        let p = SaddDerivation::plus_i(SaddDerivation::ax(&ctx, "x").unwrap(), SaddDerivation::ax(&ctx, "y").unwrap());
        let tr = trans_term(&p);
        assert_eq!(tr.fterm, FTerm::pair(FTerm::var("x"), FTerm::var("y")));
        assert_eq!(rev_term(&tr.fterm), Some(Term::plus(Term::var("x"), Term::var("y"))));
    }

    #[test]
    fn epsilon_round_trip() {
        let e = epsilon_terms(&tv("T"));
        f_check(&e.drop).unwrap();
        f_check(&e.lift).unwrap();
        let t = FTerm::var("t");
        let with_star = FTerm::pair(t.clone(), FTerm::Star);
        assert_eq!(f_normalize(&FTerm::app(e.drop.term.clone(), with_star.clone()), 10).0, t);
        let both = FTerm::app(e.lift.term.clone(), FTerm::app(e.drop.term.clone(), with_star.clone()));
        assert!(f_reaches(&both, &with_star, 1000).is_some());
    }

    #[test]
    fn coercions_compose_to_identity() {
        let a = Type::plus(Type::plus(tv("A"), Type::Zero), tv("B"));
        let b = Type::plus(tv("B"), tv("A"));
        let c = coercion(&a, &b).unwrap();
        let back = coercion(&b, &a).unwrap();
        let s = FTerm::pair(FTerm::pair(FTerm::var("p"), FTerm::Star), FTerm::var("q"));
        let there = f_normalize(&FTerm::app(c.clone(), s.clone()), 100).0;
        assert_eq!(there, FTerm::pair(FTerm::var("q"), FTerm::var("p")));
        assert!(f_reaches(&FTerm::app(back, there), &s, 1000).is_some());
        assert!(coercion(&a, &tv("A")).is_none());
    }

    #[test]
    fn coercion_under_an_arrow() {
        let a = Type::arrow(tv("U"), Type::plus(tv("T"), Type::Zero));
        let b = Type::arrow(tv("U"), tv("T"));
        let c = coercion(&a, &b).unwrap();
        let back = coercion(&b, &a).unwrap();
        // no eta rule for 1, so apply to a function returning a pair tree
        let f = FTerm::lam("z", FTerm::pair(FTerm::app(FTerm::var("g"), FTerm::var("z")), FTerm::Star));
        let round = FTerm::app(back, FTerm::app(c, f.clone()));
        assert_eq!(f_normalize(&round, 100).0, f);
    }

    #[test]
    fn simulating_a_sum_argument() {
        let d = product_application();
        let redexes = crate::reduction::enumerate_redexes(&d.term);
        assert!(!redexes.is_empty());
        let r = redexes.iter().find(|r| r.rule == Rule::DistRight).unwrap();
        let sim = simulate_step(&d, r, DEFAULT_SEARCH_BUDGET).unwrap();
        assert!(sim.path.len() >= 2);
        assert_eq!(sim.next.ty, d.ty);
    }
}
