//! The structured type system: sums are rigid binary trees, there is no
//! type equivalence, and application uses tree composition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::derivation::{AddDerivation, AddRule, NodePath, RuleViolation};
use crate::syntax::{fresh_name, Term, Var};
use crate::types::{Context, TyVar, Type};

/// Binary trees with plain leaves `L` and zero leaves `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTree {
    Leaf,
    ZeroLeaf,
    Node(Box<TypeTree>, Box<TypeTree>),
}

/// Partial map from leaf addresses (words over `l`, `r`) to types.
pub type Labelling = BTreeMap<String, Type>;

impl TypeTree {
    pub fn node(a: TypeTree, b: TypeTree) -> TypeTree {
        TypeTree::Node(Box::new(a), Box::new(b))
    }

    /// Addresses of the plain leaves, left to right.
    pub fn leaves(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut String::new(), &mut |w, t| {
            if *t == TypeTree::Leaf {
                out.push(w.to_string());
            }
        });
        out
    }

    pub fn zero_leaves(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut String::new(), &mut |w, t| {
            if *t == TypeTree::ZeroLeaf {
                out.push(w.to_string());
            }
        });
        out
    }

    fn walk(&self, w: &mut String, f: &mut dyn FnMut(&str, &TypeTree)) {
        match self {
            TypeTree::Node(a, b) => {
                w.push('l');
                a.walk(w, f);
                w.pop();
                w.push('r');
                b.walk(w, f);
                w.pop();
            }
            leaf => f(w, leaf),
        }
    }

    /// `A ∘ A'`: grafts `other` on every plain leaf.
    pub fn compose(&self, other: &TypeTree) -> TypeTree {
        match self {
            TypeTree::Leaf => other.clone(),
            TypeTree::ZeroLeaf => TypeTree::ZeroLeaf,
            TypeTree::Node(a, b) => TypeTree::node(a.compose(other), b.compose(other)),
        }
    }

    /// `A[ℓ]`; labels may be arbitrary types, which are grafted in place.
    pub fn label(&self, lab: &dyn Fn(&str) -> Option<Type>) -> Option<Type> {
        fn go(t: &TypeTree, w: &mut String, lab: &dyn Fn(&str) -> Option<Type>) -> Option<Type> {
            match t {
                TypeTree::Leaf => lab(w),
                TypeTree::ZeroLeaf => Some(Type::Zero),
                TypeTree::Node(a, b) => {
                    w.push('l');
                    let l = go(a, w, lab);
                    w.pop();
                    w.push('r');
                    let r = go(b, w, lab);
                    w.pop();
                    Some(Type::plus(l?, r?))
                }
            }
        }
        go(self, &mut String::new(), lab)
    }

    pub fn label_map(&self, lab: &Labelling) -> Option<Type> {
        self.label(&|w| lab.get(w).cloned())
    }

    /// The unique tree and unit labelling with `T = A_T[ℓ_T]`. Wider raw sums
    /// are read left-associated.
    pub fn of_type(t: &Type) -> (TypeTree, Labelling) {
        fn go(t: &Type, w: &mut String, lab: &mut Labelling) -> TypeTree {
            match t {
                Type::Zero => TypeTree::ZeroLeaf,
                Type::Sum(ts) if ts.is_empty() => TypeTree::ZeroLeaf,
                Type::Sum(ts) if ts.len() == 1 => go(&ts[0], w, lab),
                Type::Sum(ts) => {
                    let (init, last) = ts.split_at(ts.len() - 1);
                    let left = if init.len() == 1 { init[0].clone() } else { Type::Sum(init.to_vec()) };
                    w.push('l');
                    let a = go(&left, w, lab);
                    w.pop();
                    w.push('r');
                    let b = go(&last[0], w, lab);
                    w.pop();
                    TypeTree::node(a, b)
                }
                u => {
                    lab.insert(w.clone(), u.clone());
                    TypeTree::Leaf
                }
            }
        }
        let mut lab = Labelling::new();
        let tree = go(t, &mut String::new(), &mut lab);
        (tree, lab)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }
}

impl fmt::Display for TypeTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTree::Leaf => f.write_str("L"),
            TypeTree::ZeroLeaf => f.write_str("Z"),
            TypeTree::Node(a, b) => write!(f, "({a} . {b})"),
        }
    }
}

/// Prints a labelling as `{ll: U1, lrr: U2}`; the empty word is `eps`.
pub struct ShowLabelling<'a>(pub &'a Labelling);

impl fmt::Display for ShowLabelling<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().map(|(w, t)| format!("{}: {t}", if w.is_empty() { "eps" } else { w })).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Witness of the tree-composition arrow elimination.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructElim {
    pub fun_tree: TypeTree,
    pub arg_tree: TypeTree,
    pub binders: Vec<String>,
    pub unit: Type,
    /// `w ↦ T_w` for every plain leaf `w` of the function tree.
    pub results: BTreeMap<String, Type>,
    /// `v ↦ V_v` for every plain leaf `v` of the argument tree.
    pub insts: BTreeMap<String, Vec<Type>>,
}

impl StructElim {
    pub fn fun_type(&self) -> Option<Type> {
        self.fun_tree.label(&|w| {
            let t = self.results.get(w)?;
            Some(Type::forall_many(&self.binders, Type::arrow(self.unit.clone(), t.clone())))
        })
    }

    pub fn arg_type(&self) -> Option<Type> {
        self.arg_tree.label(&|v| Some(self.unit.subst_vec_raw(&self.binders, self.insts.get(v)?)))
    }

    /// `A∘A'[wv ↦ T_w[V_v/X]]`
    pub fn result_type(&self) -> Option<Type> {
        let fun_leaves = self.fun_tree.leaves();
        self.fun_tree.compose(&self.arg_tree).label(&|wv| {
            let w = fun_leaves.iter().find(|w| wv.starts_with(w.as_str()))?;
            let v = &wv[w.len()..];
            Some(self.results.get(w)?.subst_vec_raw(&self.binders, self.insts.get(v)?))
        })
    }

    fn validate(&self) -> Result<(), String> {
        let fl: BTreeSet<String> = self.fun_tree.leaves().into_iter().collect();
        let al: BTreeSet<String> = self.arg_tree.leaves().into_iter().collect();
        if fl != self.results.keys().cloned().collect() {
            return Err("result labels do not match the function tree".into());
        }
        if al != self.insts.keys().cloned().collect() {
            return Err("instantiation labels do not match the argument tree".into());
        }
        let as_add = crate::derivation::ArrowElim {
            binders: self.binders.clone(),
            unit: self.unit.clone(),
            results: self.results.values().cloned().collect(),
            insts: self.insts.values().cloned().collect(),
        };
        as_add.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SaddRule {
    Ax,
    Ax0,
    ArrI { var: String },
    PlusI,
    ForallI { var: String },
    ForallE { inst: Type },
    StructArrE(StructElim),
}

impl SaddRule {
    pub fn name(&self) -> &'static str {
        match self {
            SaddRule::Ax => "ax",
            SaddRule::Ax0 => "ax0",
            SaddRule::ArrI { .. } => "arrI",
            SaddRule::PlusI => "plusI",
            SaddRule::ForallI { .. } => "forallI",
            SaddRule::ForallE { .. } => "forallE",
            SaddRule::StructArrE(_) => "structArrE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SaddDerivation {
    pub ctx: Context,
    pub term: Term,
    pub ty: Type,
    pub rule: SaddRule,
    pub premises: Vec<SaddDerivation>,
}

impl SaddDerivation {
    pub fn ax(ctx: &Context, x: &str) -> Option<SaddDerivation> {
        let ty = ctx.get(x)?.clone();
        Some(SaddDerivation { ctx: ctx.clone(), term: Term::var(x), ty, rule: SaddRule::Ax, premises: vec![] })
    }

    pub fn ax0(ctx: &Context) -> SaddDerivation {
        SaddDerivation { ctx: ctx.clone(), term: Term::Zero, ty: Type::Zero, rule: SaddRule::Ax0, premises: vec![] }
    }

    pub fn arr_i(x: &str, body: SaddDerivation) -> SaddDerivation {
        let dom = body.ctx.get(x).cloned().unwrap_or(Type::Zero);
        SaddDerivation {
            ctx: body.ctx.without(x),
            term: Term::lam(x, body.term.clone()),
            ty: Type::arrow(dom, body.ty.clone()),
            rule: SaddRule::ArrI { var: x.to_string() },
            premises: vec![body],
        }
    }

    pub fn plus_i(a: SaddDerivation, b: SaddDerivation) -> SaddDerivation {
        SaddDerivation {
            ctx: a.ctx.clone(),
            term: Term::plus(a.term.clone(), b.term.clone()).canonicalize(),
            ty: Type::plus(a.ty.clone(), b.ty.clone()),
            rule: SaddRule::PlusI,
            premises: vec![a, b],
        }
    }

    pub fn forall_i(x: &str, d: SaddDerivation) -> SaddDerivation {
        SaddDerivation {
            ctx: d.ctx.clone(),
            term: d.term.clone(),
            ty: Type::forall(x, d.ty.clone()),
            rule: SaddRule::ForallI { var: x.to_string() },
            premises: vec![d],
        }
    }

    pub fn forall_e(inst: Type, d: SaddDerivation) -> SaddDerivation {
        let ty = match &d.ty {
            Type::Forall(_, body) => body.instantiate(&inst),
            other => other.clone(),
        };
        SaddDerivation {
            ctx: d.ctx.clone(),
            term: d.term.clone(),
            ty,
            rule: SaddRule::ForallE { inst },
            premises: vec![d],
        }
    }

    pub fn struct_arr_e(w: StructElim, fun: SaddDerivation, arg: SaddDerivation) -> SaddDerivation {
        SaddDerivation {
            ctx: fun.ctx.clone(),
            term: Term::app(fun.term.clone(), arg.term.clone()),
            ty: w.result_type().unwrap_or(Type::Zero),
            rule: SaddRule::StructArrE(w),
            premises: vec![fun, arg],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(SaddDerivation::size).sum::<usize>()
    }

    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a SaddDerivation)) {
        f(self);
        for p in &self.premises {
            p.visit(f);
        }
    }

    pub fn type_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |d| {
            out.extend(d.ctx.free_type_vars());
            out.extend(d.ty.free_vars());
            match &d.rule {
                SaddRule::ForallI { var } => {
                    out.insert(var.clone());
                }
                SaddRule::ForallE { inst } => out.extend(inst.free_vars()),
                SaddRule::StructArrE(w) => {
                    out.extend(w.binders.iter().cloned());
                    out.extend(w.unit.free_vars());
                    w.results.values().for_each(|t| out.extend(t.free_vars()));
                    w.insts.values().flatten().for_each(|t| out.extend(t.free_vars()));
                }
                _ => {}
            }
        });
        out
    }
}

impl fmt::Display for SaddDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(d: &SaddDerivation, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let extra = match &d.rule {
                SaddRule::ArrI { var } | SaddRule::ForallI { var } => format!(" [{var}]"),
                SaddRule::ForallE { inst } => format!(" [{inst}]"),
                SaddRule::StructArrE(w) => format!(" [{} o {}]", w.fun_tree, w.arg_tree),
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

fn binary(t: &Type) -> bool {
    match t {
        Type::Var(_) | Type::Zero => true,
        Type::Arrow(d, c) => binary(d) && binary(c),
        Type::Forall(_, b) => binary(b),
        Type::Sum(ts) => ts.len() == 2 && ts.iter().all(binary),
    }
}

/// Checks every node syntactically: no equivalence anywhere.
pub fn check_sadd(d: &SaddDerivation) -> Result<(), RuleViolation> {
    check_node(d, &mut Vec::new())
}

fn check_node(d: &SaddDerivation, path: &mut Vec<usize>) -> Result<(), RuleViolation> {
    let fail = |reason: String| RuleViolation { path: NodePath(path.clone()), rule: d.rule.name(), reason };
    if let Err(e) = d.ty.well_formed() {
        return Err(fail(e.to_string()));
    }
    if !binary(&d.ty) {
        return Err(fail(format!("type `{}` has a non-binary sum", d.ty)));
    }
    for (x, u) in d.ctx.iter() {
        if !u.is_unit() || !binary(u) {
            return Err(fail(format!("context entry `{x} : {u}` is not a unit type")));
        }
    }
    if !d.term.is_canonical() || !d.term.is_locally_closed() {
        return Err(fail(format!("subject `{}` is not a canonical closed term", d.term)));
    }
    let arity = match d.rule {
        SaddRule::Ax | SaddRule::Ax0 => 0,
        SaddRule::StructArrE(_) | SaddRule::PlusI => 2,
        _ => 1,
    };
    if d.premises.len() != arity {
        return Err(fail(format!("expected {arity} premises, found {}", d.premises.len())));
    }
    if !matches!(d.rule, SaddRule::ArrI { .. }) {
        if let Some(p) = d.premises.iter().find(|p| p.ctx != d.ctx) {
            return Err(fail(format!("premise context `{}` differs from `{}`", p.ctx, d.ctx)));
        }
    }
    let expect = |what: &str, got: &Type, want: &Type| -> Result<(), RuleViolation> {
        if got != want {
            return Err(fail(format!("{what} `{got}` is not `{want}`")));
        }
        Ok(())
    };
    let same_subject = |p: &SaddDerivation| -> Result<(), RuleViolation> {
        if p.term != d.term {
            return Err(fail(format!("premise subject `{}` differs from `{}`", p.term, d.term)));
        }
        Ok(())
    };
    match &d.rule {
        SaddRule::Ax => {
            let Term::Var(Var::Free(x)) = &d.term else {
                return Err(fail(format!("subject `{}` is not a variable", d.term)));
            };
            let Some(u) = d.ctx.get(x) else {
                return Err(fail(format!("`{x}` is not in the context")));
            };
            expect("type", &d.ty, u)?;
        }
        SaddRule::Ax0 => {
            if d.term != Term::Zero {
                return Err(fail(format!("subject `{}` is not zero", d.term)));
            }
            expect("type", &d.ty, &Type::Zero)?;
        }
        SaddRule::ArrI { var } => {
            let p = &d.premises[0];
            let Term::Abs(_, body) = &d.term else {
                return Err(fail(format!("subject `{}` is not an abstraction", d.term)));
            };
            let Type::Arrow(dom, cod) = &d.ty else {
                return Err(fail(format!("type `{}` is not an arrow", d.ty)));
            };
            if d.ctx.contains(var) || body.has_free(var) {
                return Err(fail(format!("bound variable `{var}` is not fresh")));
            }
            let ext = d.ctx.extend(var.clone(), (**dom).clone()).map_err(|e| fail(e.to_string()))?;
            if p.ctx != ext {
                return Err(fail(format!("premise context `{}` is not `{}`", p.ctx, ext)));
            }
            if p.term != body.open(var) {
                return Err(fail(format!("premise subject `{}` is not the opened body", p.term)));
            }
            expect("premise type", &p.ty, cod)?;
        }
        SaddRule::PlusI => {
            let (a, b) = (&d.premises[0], &d.premises[1]);
            if Term::plus(a.term.clone(), b.term.clone()).canonicalize() != d.term {
                return Err(fail(format!("subject `{}` is not `{} + {}`", d.term, a.term, b.term)));
            }
            expect("type", &d.ty, &Type::plus(a.ty.clone(), b.ty.clone()))?;
        }
        SaddRule::ForallI { var } => {
            let p = &d.premises[0];
            same_subject(p)?;
            if d.ctx.free_type_vars().contains(var) {
                return Err(fail(format!("`{var}` is free in the context")));
            }
            if !p.ty.is_unit() {
                return Err(fail(format!("premise type `{}` is not a unit type", p.ty)));
            }
            expect("type", &d.ty, &Type::forall(var.clone(), p.ty.clone()))?;
        }
        SaddRule::ForallE { inst } => {
            let p = &d.premises[0];
            same_subject(p)?;
            if !inst.is_unit() {
                return Err(fail(format!("instantiating type `{inst}` is not a unit type")));
            }
            let Type::Forall(_, body) = &p.ty else {
                return Err(fail(format!("premise type `{}` is not quantified", p.ty)));
            };
            expect("type", &d.ty, &body.instantiate(inst))?;
        }
        SaddRule::StructArrE(w) => {
            let (f, a) = (&d.premises[0], &d.premises[1]);
            let Term::App(tf, ta) = &d.term else {
                return Err(fail(format!("subject `{}` is not an application", d.term)));
            };
            if f.term != **tf || a.term != **ta {
                return Err(fail("premise subjects do not match the application".into()));
            }
            w.validate().map_err(fail)?;
            expect("function type", &f.ty, &w.fun_type().expect("validated"))?;
            expect("argument type", &a.ty, &w.arg_type().expect("validated"))?;
            expect("type", &d.ty, &w.result_type().expect("validated"))?;
        }
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(p, path)?;
        path.pop();
    }
    Ok(())
}

/// Reads a structured derivation as an additive one; the tree elimination
/// becomes a plain elimination followed by an equivalence step back to the
/// structured type.
pub fn sadd_to_add(d: &SaddDerivation) -> AddDerivation {
    let premises: Vec<AddDerivation> = d.premises.iter().map(sadd_to_add).collect();
    let rule = match &d.rule {
        SaddRule::Ax => AddRule::Ax,
        SaddRule::Ax0 => AddRule::Ax0,
        SaddRule::ArrI { var } => AddRule::ArrI { var: var.clone() },
        SaddRule::PlusI => AddRule::PlusI,
        SaddRule::ForallI { var } => AddRule::ForallI { var: var.clone() },
        SaddRule::ForallE { inst } => AddRule::ForallE { inst: inst.clone() },
        SaddRule::StructArrE(w) => {
            let fl = w.fun_tree.leaves();
            let al = w.arg_tree.leaves();
            let aw = crate::derivation::ArrowElim {
                binders: w.binders.clone(),
                unit: w.unit.clone(),
                results: fl.iter().map(|l| w.results[l].clone()).collect(),
                insts: al.iter().map(|l| w.insts[l].clone()).collect(),
            };
            let mut it = premises.into_iter();
            let (f, a) = (it.next().unwrap(), it.next().unwrap());
            return AddDerivation::arr_e(aw, f, a).pin(&d.ty);
        }
    };
    AddDerivation { ctx: d.ctx.clone(), term: d.term.clone(), ty: d.ty.clone(), rule, premises }
}

/// Conversion failure from the additive to the structured system.
#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot structure `{at}`: {reason}")]
pub struct ConversionError {
    pub at: String,
    pub reason: String,
}

/// Drops equivalence steps and rebuilds every elimination as a tree
/// composition. The result types `T'` with `T' ≡ T`.
pub fn add_to_sadd(d: &AddDerivation) -> Result<SaddDerivation, ConversionError> {
    let ctx = unit_context(&d.ctx);
    let out = conv(d, &ctx)?;
    if !out.ty.equiv(&d.ty) {
        return Err(ConversionError {
            at: d.term.to_string(),
            reason: format!("structured type `{}` drifted", out.ty),
        });
    }
    check_sadd(&out).map_err(|e| ConversionError { at: d.term.to_string(), reason: e.to_string() })?;
    Ok(out)
}

fn unit_context(ctx: &Context) -> Context {
    ctx.map_types(|u| if u.is_unit() && binary(u) { u.clone() } else { u.canonicalize() })
}

fn conv(d: &AddDerivation, ctx: &Context) -> Result<SaddDerivation, ConversionError> {
    let fail = |reason: String| ConversionError { at: d.term.to_string(), reason };
    match &d.rule {
        AddRule::Ax => {
            let Term::Var(Var::Free(x)) = &d.term else { unreachable!() };
            SaddDerivation::ax(ctx, x).ok_or_else(|| fail(format!("`{x}` is not in the context")))
        }
        AddRule::Ax0 => Ok(SaddDerivation::ax0(ctx)),
        AddRule::Equiv => conv(&d.premises[0], ctx),
        AddRule::ArrI { var } => {
            let dom = d.premises[0].ctx.get(var).cloned().unwrap_or(Type::Zero);
            let dom = if dom.is_unit() && binary(&dom) { dom } else { dom.canonicalize() };
            let inner = ctx.extend(var.clone(), dom).map_err(|e| fail(e.to_string()))?;
            Ok(SaddDerivation::arr_i(var, conv(&d.premises[0], &inner)?))
        }
        AddRule::PlusI => Ok(SaddDerivation::plus_i(conv(&d.premises[0], ctx)?, conv(&d.premises[1], ctx)?)),
        AddRule::ForallI { var } => {
            let p = conv(&d.premises[0], ctx)?;
            push_quantifier(p, &|q| {
                if q.ty.is_unit() {
                    Some(SaddDerivation::forall_i(var, q))
                } else {
                    None
                }
            })
            .ok_or_else(|| fail("generalisation over a structured sum".into()))
        }
        AddRule::ForallE { inst } => {
            let p = conv(&d.premises[0], ctx)?;
            push_quantifier(p, &|q| {
                if matches!(q.ty, Type::Forall(..)) {
                    Some(SaddDerivation::forall_e(inst.clone(), q))
                } else {
                    None
                }
            })
            .ok_or_else(|| fail("instantiation of a structured sum".into()))
        }
        AddRule::ArrE(w) => {
            let f = conv(&d.premises[0], ctx)?;
            let a = conv(&d.premises[1], ctx)?;
            let se = structure_elim(&f.ty, &a.ty, w, ctx).map_err(fail)?;
            Ok(SaddDerivation::struct_arr_e(se, f, a))
        }
    }
}

/// Applies a quantifier rule to `d`, or to the only premise of a sum node
/// whose type is not void.
fn push_quantifier(
    d: SaddDerivation,
    apply: &dyn Fn(SaddDerivation) -> Option<SaddDerivation>,
) -> Option<SaddDerivation> {
    if let Some(out) = apply(d.clone()) {
        return Some(out);
    }
    if d.rule != SaddRule::PlusI {
        return None;
    }
    let live: Vec<usize> = (0..2).filter(|&k| !d.premises[k].ty.equiv(&Type::Zero)).collect();
    let [k] = live[..] else { return None };
    let mut ps = d.premises;
    let pushed = push_quantifier(ps[k].clone(), apply)?;
    ps[k] = pushed;
    let mut it = ps.into_iter();
    let (a, b) = (it.next()?, it.next()?);
    Some(SaddDerivation::plus_i(a, b))
}

fn structure_elim(
    fun: &Type,
    arg: &Type,
    w: &crate::derivation::ArrowElim,
    ctx: &Context,
) -> Result<StructElim, String> {
    let (ft, fl) = TypeTree::of_type(fun);
    let (at, al) = TypeTree::of_type(arg);
    let mut taken: BTreeSet<String> = ctx.free_type_vars();
    taken.extend(fun.free_vars());
    taken.extend(arg.free_vars());
    taken.extend(w.insts.iter().flatten().flat_map(Type::free_vars));
    let mut binders = Vec::new();
    for b in &w.binders {
        let x = fresh_name(b, &|s| taken.contains(s) || binders.iter().any(|y: &String| y == s));
        binders.push(x);
    }
    let mut unit: Option<Type> = None;
    let mut results = BTreeMap::new();
    for (leaf, label) in &fl {
        let Some(Type::Arrow(dom, cod)) = label.open_foralls(&binders) else {
            return Err(format!("function label `{label}` is not a quantified arrow with {} binders", binders.len()));
        };
        if count_foralls(label) != binders.len() {
            return Err(format!("function label `{label}` has the wrong number of binders"));
        }
        match &unit {
            None => unit = Some(*dom),
            Some(u) if *u == *dom => {}
            Some(u) => return Err(format!("function labels disagree on the domain: `{u}` and `{dom}`")),
        }
        results.insert(leaf.clone(), *cod);
    }
    let unit = match unit {
        Some(u) => u,
        None => {
            // no function leaves: reuse the witness domain
            w.unit.subst_vec_raw(&w.binders, &binders.iter().map(Type::var).collect::<Vec<_>>())
        }
    };
    let rows: Vec<Type> = (0..w.beta()).map(|j| w.arg_unit(j).canonicalize()).collect();
    let mut used = vec![false; rows.len()];
    let mut insts = BTreeMap::new();
    for (leaf, label) in &al {
        let canon = label.canonicalize();
        let mut found = None;
        for j in (0..rows.len()).filter(|&j| !used[j] && rows[j] == canon) {
            let mut sub = BTreeMap::new();
            if !first_order_match(&unit, label, &binders, &mut sub) {
                continue;
            }
            let row: Vec<Type> = binders
                .iter()
                .zip(&w.insts[j])
                .map(|(b, v)| sub.get(b).cloned().unwrap_or_else(|| v.clone()))
                .collect();
            found = Some((j, row));
            break;
        }
        let Some((j, row)) = found else {
            return Err(format!("argument label `{label}` is not an instance of `{unit}`"));
        };
        used[j] = true;
        insts.insert(leaf.clone(), row);
    }
    Ok(StructElim { fun_tree: ft, arg_tree: at, binders, unit, results, insts })
}

fn count_foralls(mut t: &Type) -> usize {
    let mut n = 0;
    while let Type::Forall(_, b) = t {
        n += 1;
        t = b;
    }
    n
}

/// Syntactic first-order matching of `p` (with pattern variables `vars`)
/// against `t`.
pub fn first_order_match(p: &Type, t: &Type, vars: &[String], sub: &mut BTreeMap<String, Type>) -> bool {
    match (p, t) {
        (Type::Var(TyVar::Free(x)), _) if vars.contains(x) => {
            if !t.is_unit() || !closed(t) {
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
        (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
            first_order_match(d1, d2, vars, sub) && first_order_match(c1, c2, vars, sub)
        }
        (Type::Forall(_, b1), Type::Forall(_, b2)) => first_order_match(b1, b2, vars, sub),
        (Type::Sum(xs), Type::Sum(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| first_order_match(x, y, vars, sub))
        }
        (Type::Zero, Type::Zero) => true,
        _ => false,
    }
}

fn closed(t: &Type) -> bool {
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

    fn node(a: TypeTree, b: TypeTree) -> TypeTree {
        TypeTree::node(a, b)
    }

    use TypeTree::{Leaf as L, ZeroLeaf as Z};

    #[test]
    fn tree_of_a_nested_sum() {
        let t = Type::plus(Type::plus(tv("U1"), Type::plus(Type::Zero, tv("U2"))), tv("U3"));
        let (tree, lab) = TypeTree::of_type(&t);
        assert_eq!(tree, node(node(L, node(Z, L)), L));
        assert_eq!(tree.leaves(), vec!["ll", "lrr", "r"]);
        assert_eq!(tree.zero_leaves(), vec!["lrl"]);
        assert_eq!(lab["ll"], tv("U1"));
        assert_eq!(lab["lrr"], tv("U2"));
        assert_eq!(lab["r"], tv("U3"));
        assert_eq!(tree.label_map(&lab), Some(t));
    }

    #[test]
    fn trivial_trees() {
        assert_eq!(TypeTree::of_type(&Type::Zero), (Z, Labelling::new()));
        let (t, l) = TypeTree::of_type(&tv("U"));
        assert_eq!(t, L);
        assert_eq!(l[""], tv("U"));
    }

    #[test]
    fn composition_grafts_on_plain_leaves() {
        let a = node(node(L, Z), L);
        let b = node(L, Z);
        assert_eq!(a.compose(&b), node(node(node(L, Z), Z), node(L, Z)));
        assert_eq!(a.compose(&L), a);
        assert_eq!(L.compose(&b), b);
    }

    #[test]
    fn wide_raw_sums_read_left_associated() {
        let t = Type::Sum(vec![tv("A"), tv("B"), tv("C")]);
        let (tree, lab) = TypeTree::of_type(&t);
        assert_eq!(tree, node(node(L, L), L));
        assert_eq!(lab["ll"], tv("A"));
        assert_eq!(lab["lr"], tv("B"));
        assert_eq!(lab["r"], tv("C"));
    }

    #[test]
    fn commutativity_is_not_available() {
        let ctx = Context::from_pairs([("a", tv("A")), ("b", tv("B"))]).unwrap();
        let mut d =
            SaddDerivation::plus_i(SaddDerivation::ax(&ctx, "a").unwrap(), SaddDerivation::ax(&ctx, "b").unwrap());
        check_sadd(&d).unwrap();
        d.ty = Type::plus(tv("B"), tv("A"));
        assert!(check_sadd(&d).is_err());
    }

    #[test]
    fn composed_conclusion_keeps_zero_leaves() {
        let x = |n: &str| Type::var(n);
        let w = StructElim {
            fun_tree: node(node(L, L), Z),
            arg_tree: node(L, Z),
            binders: vec!["X".into()],
            unit: x("X"),
            results: [("ll".to_string(), x("T1")), ("lr".to_string(), x("T2"))].into(),
            insts: [("l".to_string(), vec![x("V")])].into(),
        };
        w.validate().unwrap();
        let want = Type::plus(Type::plus(Type::plus(x("T1"), Type::Zero), Type::plus(x("T2"), Type::Zero)), Type::Zero);
        assert_eq!(w.result_type(), Some(want));
        assert_eq!(w.arg_type(), Some(Type::plus(x("V"), Type::Zero)));
    }

    fn id_on_sum() -> AddDerivation {
        let c = Context::from_pairs([("a", tv("A")), ("b", tv("B"))]).unwrap();
        let body = AddDerivation::ax(&c.extend("x", tv("X")).unwrap(), "x").unwrap();
        let id = AddDerivation::forall_i("X", AddDerivation::arr_i("x", body));
        let arg = AddDerivation::plus_i(AddDerivation::ax(&c, "a").unwrap(), AddDerivation::ax(&c, "b").unwrap());
        let w = crate::derivation::ArrowElim {
            binders: vec!["X".into()],
            unit: tv("X"),
            results: vec![tv("X")],
            insts: vec![vec![tv("A")], vec![tv("B")]],
        };
        AddDerivation::arr_e(w, id, arg)
    }

    #[test]
    fn conversions_round_trip() {
        let d = id_on_sum();
        let s = add_to_sadd(&d).unwrap();
        assert_eq!(s.ty, Type::plus(tv("A"), tv("B")));
        assert!(matches!(s.rule, SaddRule::StructArrE(_)));
        let back = sadd_to_add(&s);
        crate::derivation::check_add(&back).unwrap();
        assert_eq!(back.ty, s.ty);
        assert_eq!(back.term, d.term);
    }
}
