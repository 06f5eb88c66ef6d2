//! System F with pairs: the target calculus of the translation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::derivation::{NodePath, RuleViolation};
use crate::sadd::TypeTree;
use crate::syntax::{fresh_name, Binder, Var};
use crate::types::TyVar;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FType {
    Var(TyVar),
    Arrow(Box<FType>, Box<FType>),
    Forall(Binder, Box<FType>),
    One,
    Prod(Box<FType>, Box<FType>),
}

impl FType {
    pub fn var(x: impl Into<String>) -> FType {
        FType::Var(TyVar::Free(x.into()))
    }

    pub fn arrow(a: FType, b: FType) -> FType {
        FType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn prod(a: FType, b: FType) -> FType {
        FType::Prod(Box::new(a), Box::new(b))
    }

    /// `∀x.body`, abstracting the free variable `x`.
    pub fn forall(x: impl Into<String>, body: FType) -> FType {
        let x = x.into();
        let closed = body.close(&x);
        FType::Forall(Binder(x), Box::new(closed))
    }

    fn map_vars(&self, depth: u32, f: &dyn Fn(&TyVar, u32) -> FType) -> FType {
        match self {
            FType::Var(v) => f(v, depth),
            FType::One => FType::One,
            FType::Arrow(a, b) => FType::arrow(a.map_vars(depth, f), b.map_vars(depth, f)),
            FType::Prod(a, b) => FType::prod(a.map_vars(depth, f), b.map_vars(depth, f)),
            FType::Forall(x, body) => FType::Forall(x.clone(), Box::new(body.map_vars(depth + 1, f))),
        }
    }

    pub fn shift(&self, by: u32, cutoff: u32) -> FType {
        self.map_vars(cutoff, &|v, depth| match v {
            TyVar::Bound(i) if *i >= depth => FType::Var(TyVar::Bound(i + by)),
            _ => FType::Var(v.clone()),
        })
    }

    pub fn instantiate(&self, b: &FType) -> FType {
        self.map_vars(0, &|v, depth| match v {
            TyVar::Bound(i) if *i == depth => b.shift(depth, 0),
            TyVar::Bound(i) if *i > depth => FType::Var(TyVar::Bound(i - 1)),
            _ => FType::Var(v.clone()),
        })
    }

    pub fn open(&self, x: &str) -> FType {
        self.instantiate(&FType::var(x))
    }

    pub fn close(&self, x: &str) -> FType {
        self.map_vars(0, &|v, depth| match v {
            TyVar::Free(y) if y == x => FType::Var(TyVar::Bound(depth)),
            TyVar::Bound(i) if *i >= depth => FType::Var(TyVar::Bound(i + 1)),
            _ => FType::Var(v.clone()),
        })
    }

    pub fn subst(&self, x: &str, b: &FType) -> FType {
        self.map_vars(0, &|v, depth| match v {
            TyVar::Free(y) if y == x => b.shift(depth, 0),
            _ => FType::Var(v.clone()),
        })
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            FType::Var(TyVar::Free(x)) => {
                out.insert(x.clone());
            }
            FType::Var(_) | FType::One => {}
            FType::Arrow(a, b) | FType::Prod(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            FType::Forall(_, b) => b.collect(out),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            FType::Var(_) | FType::One => 1,
            FType::Arrow(a, b) | FType::Prod(a, b) => 1 + a.size() + b.size(),
            FType::Forall(_, b) => 1 + b.size(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    Arrow,
    Prod,
    App,
    Atom,
}

impl fmt::Display for FType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            f: &mut fmt::Formatter<'_>,
            t: &FType,
            free: &BTreeSet<String>,
            env: &mut Vec<String>,
            p: Prec,
        ) -> fmt::Result {
            match t {
                FType::Var(TyVar::Free(x)) => write!(f, "{x}"),
                FType::Var(TyVar::Bound(i)) => match env.len().checked_sub(*i as usize + 1) {
                    Some(k) => write!(f, "{}", env[k]),
                    None => write!(f, "#{i}"),
                },
                FType::One => f.write_str("1"),
                FType::Arrow(a, b) => {
                    if p > Prec::Arrow {
                        f.write_str("(")?;
                    }
                    go(f, a, free, env, Prec::Prod)?;
                    f.write_str(" -> ")?;
                    go(f, b, free, env, Prec::Arrow)?;
                    if p > Prec::Arrow {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                FType::Prod(a, b) => {
                    if p > Prec::Prod {
                        f.write_str("(")?;
                    }
                    go(f, a, free, env, Prec::Prod)?;
                    f.write_str(" * ")?;
                    go(f, b, free, env, Prec::App)?;
                    if p > Prec::Prod {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                FType::Forall(x, body) => {
                    let hint = if x.0.is_empty() { "X" } else { x.0.as_str() };
                    let name = fresh_name(hint, &|n| free.contains(n) || env.iter().any(|e| e == n));
                    if p > Prec::Top {
                        f.write_str("(")?;
                    }
                    write!(f, "forall {name}. ")?;
                    env.push(name);
                    go(f, body, free, env, Prec::Top)?;
                    env.pop();
                    if p > Prec::Top {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(f, self, &self.free_vars(), &mut Vec::new(), Prec::Top)
    }
}

/// Curry-style terms; binders are de Bruijn indices like the source calculus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FTerm {
    Var(Var),
    Abs(Binder, Box<FTerm>),
    App(Box<FTerm>, Box<FTerm>),
    Star,
    Pair(Box<FTerm>, Box<FTerm>),
    ProjL(Box<FTerm>),
    ProjR(Box<FTerm>),
}

impl FTerm {
    pub fn var(x: impl Into<String>) -> FTerm {
        FTerm::Var(Var::Free(x.into()))
    }

    pub fn lam(x: impl Into<String>, body: FTerm) -> FTerm {
        let x = x.into();
        let closed = body.close(&x);
        FTerm::Abs(Binder(x), Box::new(closed))
    }

    pub fn app(f: FTerm, a: FTerm) -> FTerm {
        FTerm::App(Box::new(f), Box::new(a))
    }

    pub fn pair(a: FTerm, b: FTerm) -> FTerm {
        FTerm::Pair(Box::new(a), Box::new(b))
    }

    pub fn proj_l(t: FTerm) -> FTerm {
        FTerm::ProjL(Box::new(t))
    }

    pub fn proj_r(t: FTerm) -> FTerm {
        FTerm::ProjR(Box::new(t))
    }

    fn map_vars(&self, depth: u32, f: &dyn Fn(&Var, u32) -> FTerm) -> FTerm {
        match self {
            FTerm::Var(v) => f(v, depth),
            FTerm::Star => FTerm::Star,
            FTerm::Abs(x, b) => FTerm::Abs(x.clone(), Box::new(b.map_vars(depth + 1, f))),
            FTerm::App(a, b) => FTerm::app(a.map_vars(depth, f), b.map_vars(depth, f)),
            FTerm::Pair(a, b) => FTerm::pair(a.map_vars(depth, f), b.map_vars(depth, f)),
            FTerm::ProjL(a) => FTerm::proj_l(a.map_vars(depth, f)),
            FTerm::ProjR(a) => FTerm::proj_r(a.map_vars(depth, f)),
        }
    }

    pub fn shift(&self, by: u32, cutoff: u32) -> FTerm {
        self.map_vars(cutoff, &|v, depth| match v {
            Var::Bound(i) if *i >= depth => FTerm::Var(Var::Bound(i + by)),
            _ => FTerm::Var(v.clone()),
        })
    }

    /// Substitutes `u` for the outermost dangling index.
    pub fn instantiate(&self, u: &FTerm) -> FTerm {
        self.map_vars(0, &|v, depth| match v {
            Var::Bound(i) if *i == depth => u.shift(depth, 0),
            Var::Bound(i) if *i > depth => FTerm::Var(Var::Bound(i - 1)),
            _ => FTerm::Var(v.clone()),
        })
    }

    pub fn open(&self, x: &str) -> FTerm {
        self.instantiate(&FTerm::var(x))
    }

    pub fn close(&self, x: &str) -> FTerm {
        self.map_vars(0, &|v, depth| match v {
            Var::Free(y) if y == x => FTerm::Var(Var::Bound(depth)),
            Var::Bound(i) if *i >= depth => FTerm::Var(Var::Bound(i + 1)),
            _ => FTerm::Var(v.clone()),
        })
    }

    pub fn subst(&self, x: &str, u: &FTerm) -> FTerm {
        self.map_vars(0, &|v, depth| match v {
            Var::Free(y) if y == x => u.shift(depth, 0),
            _ => FTerm::Var(v.clone()),
        })
    }

    fn has_index(&self, k: u32) -> bool {
        match self {
            FTerm::Var(Var::Bound(i)) => *i == k,
            FTerm::Var(_) | FTerm::Star => false,
            FTerm::Abs(_, b) => b.has_index(k + 1),
            FTerm::App(a, b) | FTerm::Pair(a, b) => a.has_index(k) || b.has_index(k),
            FTerm::ProjL(a) | FTerm::ProjR(a) => a.has_index(k),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let FTerm::Var(Var::Free(x)) = t {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, FTerm::Var(Var::Free(y)) if y == x));
        found
    }

    fn visit(&self, f: &mut dyn FnMut(&FTerm)) {
        f(self);
        match self {
            FTerm::Var(_) | FTerm::Star => {}
            FTerm::Abs(_, b) | FTerm::ProjL(b) | FTerm::ProjR(b) => b.visit(f),
            FTerm::App(a, b) | FTerm::Pair(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn is_locally_closed(&self) -> bool {
        fn go(t: &FTerm, depth: u32) -> bool {
            match t {
                FTerm::Var(Var::Bound(i)) => *i < depth,
                FTerm::Var(_) | FTerm::Star => true,
                FTerm::Abs(_, b) => go(b, depth + 1),
                FTerm::App(a, b) | FTerm::Pair(a, b) => go(a, depth) && go(b, depth),
                FTerm::ProjL(a) | FTerm::ProjR(a) => go(a, depth),
            }
        }
        go(self, 0)
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for FTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            f: &mut fmt::Formatter<'_>,
            t: &FTerm,
            free: &BTreeSet<String>,
            env: &mut Vec<String>,
            p: Prec,
        ) -> fmt::Result {
            match t {
                FTerm::Var(Var::Free(x)) => write!(f, "{x}"),
                FTerm::Var(Var::Bound(i)) => match env.len().checked_sub(*i as usize + 1) {
                    Some(k) => write!(f, "{}", env[k]),
                    None => write!(f, "#{i}"),
                },
                FTerm::Star => f.write_str("star"),
                FTerm::Pair(a, b) => {
                    f.write_str("<")?;
                    go(f, a, free, env, Prec::Top)?;
                    f.write_str(", ")?;
                    go(f, b, free, env, Prec::Top)?;
                    f.write_str(">")
                }
                FTerm::Abs(x, body) => {
                    let hint = if x.0.is_empty() { "x" } else { x.0.as_str() };
                    let name = fresh_name(hint, &|n| free.contains(n) || env.iter().any(|e| e == n));
                    if p > Prec::Top {
                        f.write_str("(")?;
                    }
                    write!(f, "\\{name}. ")?;
                    env.push(name);
                    go(f, body, free, env, Prec::Top)?;
                    env.pop();
                    if p > Prec::Top {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                FTerm::App(..) | FTerm::ProjL(_) | FTerm::ProjR(_) => {
                    if p > Prec::App {
                        f.write_str("(")?;
                    }
                    match t {
                        FTerm::App(a, b) => {
                            go(f, a, free, env, Prec::App)?;
                            f.write_str(" ")?;
                            go(f, b, free, env, Prec::Atom)?;
                        }
                        FTerm::ProjL(a) => {
                            f.write_str("proj_l ")?;
                            go(f, a, free, env, Prec::Atom)?;
                        }
                        FTerm::ProjR(a) => {
                            f.write_str("proj_r ")?;
                            go(f, a, free, env, Prec::Atom)?;
                        }
                        _ => unreachable!(),
                    }
                    if p > Prec::App {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(f, self, &self.free_vars(), &mut Vec::new(), Prec::Top)
    }
}

/// Root contractions: beta, projections, and both eta rules.
fn root_reducts(t: &FTerm, out: &mut Vec<FTerm>) {
    match t {
        FTerm::App(f, u) => {
            if let FTerm::Abs(_, body) = &**f {
                out.push(body.instantiate(u));
            }
        }
        FTerm::ProjL(p) => {
            if let FTerm::Pair(a, _) = &**p {
                out.push((**a).clone());
            }
        }
        FTerm::ProjR(p) => {
            if let FTerm::Pair(_, b) = &**p {
                out.push((**b).clone());
            }
        }
        FTerm::Abs(_, body) => {
            if let FTerm::App(g, x) = &**body {
                if **x == FTerm::Var(Var::Bound(0)) && !g.has_index(0) {
                    out.push(g.instantiate(&FTerm::Star));
                }
            }
        }
        FTerm::Pair(a, b) => {
            if let (FTerm::ProjL(p), FTerm::ProjR(q)) = (&**a, &**b) {
                if p == q {
                    out.push((**p).clone());
                }
            }
        }
        _ => {}
    }
}

fn all_reducts(t: &FTerm, out: &mut Vec<FTerm>) {
    root_reducts(t, out);
    let mut inner = Vec::new();
    match t {
        FTerm::Var(_) | FTerm::Star => {}
        FTerm::Abs(x, b) => {
            all_reducts(b, &mut inner);
            out.extend(inner.drain(..).map(|b| FTerm::Abs(x.clone(), Box::new(b))));
        }
        FTerm::ProjL(a) => {
            all_reducts(a, &mut inner);
            out.extend(inner.drain(..).map(FTerm::proj_l));
        }
        FTerm::ProjR(a) => {
            all_reducts(a, &mut inner);
            out.extend(inner.drain(..).map(FTerm::proj_r));
        }
        FTerm::App(a, b) | FTerm::Pair(a, b) => {
            let rebuild = |x: FTerm, y: FTerm| match t {
                FTerm::App(..) => FTerm::app(x, y),
                _ => FTerm::pair(x, y),
            };
            all_reducts(a, &mut inner);
            out.extend(inner.drain(..).map(|x| rebuild(x, (**b).clone())));
            all_reducts(b, &mut inner);
            out.extend(inner.drain(..).map(|y| rebuild((**a).clone(), y)));
        }
    }
}

/// Every one-step reduct, at every position.
pub fn f_reducts(t: &FTerm) -> BTreeSet<FTerm> {
    let mut out = Vec::new();
    all_reducts(t, &mut out);
    out.into_iter().collect()
}

/// Breadth-first search for a path `t →* u` visiting at most `budget` terms.
/// The returned path starts with `t` and ends with `u`.
pub fn f_reaches(t: &FTerm, u: &FTerm, budget: usize) -> Option<Vec<FTerm>> {
    let mut parent: HashMap<FTerm, Option<FTerm>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(t.clone(), None);
    queue.push_back(t.clone());
    while let Some(cur) = queue.pop_front() {
        if cur == *u {
            let mut path = vec![cur.clone()];
            let mut at = cur;
            while let Some(Some(p)) = parent.get(&at) {
                path.push(p.clone());
                at = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        for next in f_reducts(&cur) {
            if parent.len() >= budget {
                break;
            }
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some(cur.clone()));
                queue.push_back(next);
            }
        }
    }
    None
}

/// Checks that consecutive terms are one-step reducts.
pub fn f_path_valid(path: &[FTerm]) -> bool {
    path.windows(2).all(|w| f_reducts(&w[0]).contains(&w[1]))
}

/// Leftmost-outermost contraction with beta and projections only.
pub fn f_step(t: &FTerm) -> Option<FTerm> {
    match t {
        FTerm::App(f, u) => {
            if let FTerm::Abs(_, body) = &**f {
                return Some(body.instantiate(u));
            }
            f_step(f).map(|f| FTerm::app(f, (**u).clone())).or_else(|| f_step(u).map(|u| FTerm::app((**f).clone(), u)))
        }
        FTerm::ProjL(p) | FTerm::ProjR(p) => {
            if let FTerm::Pair(a, b) = &**p {
                return Some(if matches!(t, FTerm::ProjL(_)) { (**a).clone() } else { (**b).clone() });
            }
            let inner = f_step(p)?;
            Some(if matches!(t, FTerm::ProjL(_)) { FTerm::proj_l(inner) } else { FTerm::proj_r(inner) })
        }
        FTerm::Pair(a, b) => f_step(a)
            .map(|a| FTerm::pair(a, (**b).clone()))
            .or_else(|| f_step(b).map(|b| FTerm::pair((**a).clone(), b))),
        FTerm::Abs(x, b) => f_step(b).map(|b| FTerm::Abs(x.clone(), Box::new(b))),
        FTerm::Var(_) | FTerm::Star => None,
    }
}

/// Normalizes with [`f_step`]; the flag is false when fuel ran out.
pub fn f_normalize(t: &FTerm, fuel: usize) -> (FTerm, usize, bool) {
    let mut cur = t.clone();
    for n in 0..fuel {
        match f_step(&cur) {
            Some(next) => cur = next,
            None => return (cur, n, true),
        }
    }
    let done = f_step(&cur).is_none();
    (cur, fuel, done)
}

/// `π_w̄(t)`: the last letter of `w` is the outermost projection.
pub fn proj_path(t: &FTerm, w: &str) -> FTerm {
    w.chars().fold(t.clone(), |acc, c| if c == 'l' { FTerm::proj_l(acc) } else { FTerm::proj_r(acc) })
}

/// `A[φ]` with products for nodes and `1` for zero leaves.
pub fn ftree_label(a: &TypeTree, phi: &dyn Fn(&str) -> Option<FType>) -> Option<FType> {
    fold_tree(a, &mut String::new(), &|w| phi(w), &|| FType::One, &FType::prod)
}

/// The term analogue of [`ftree_label`]: pairs and `star`.
pub fn ftree_term(a: &TypeTree, tau: &dyn Fn(&str) -> Option<FTerm>) -> Option<FTerm> {
    fold_tree(a, &mut String::new(), &|w| tau(w), &|| FTerm::Star, &FTerm::pair)
}

fn fold_tree<T>(
    a: &TypeTree,
    w: &mut String,
    leaf: &dyn Fn(&str) -> Option<T>,
    zero: &dyn Fn() -> T,
    node: &dyn Fn(T, T) -> T,
) -> Option<T> {
    match a {
        TypeTree::Leaf => leaf(w),
        TypeTree::ZeroLeaf => Some(zero()),
        TypeTree::Node(x, y) => {
            w.push('l');
            let l = fold_tree(x, w, leaf, zero, node);
            w.pop();
            w.push('r');
            let r = fold_tree(y, w, leaf, zero, node);
            w.pop();
            Some(node(l?, r?))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FContext(BTreeMap<String, FType>);

impl FContext {
    pub fn new() -> Self {
        FContext::default()
    }

    pub fn get(&self, x: &str) -> Option<&FType> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    /// `None` when `x` is already declared.
    pub fn extend(&self, x: impl Into<String>, a: FType) -> Option<FContext> {
        let x = x.into();
        if self.0.contains_key(&x) {
            return None;
        }
        let mut m = self.0.clone();
        m.insert(x, a);
        Some(FContext(m))
    }

    pub fn without(&self, x: &str) -> FContext {
        let mut m = self.0.clone();
        m.remove(x);
        FContext(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &FType)> {
        self.0.iter()
    }

    pub fn free_type_vars(&self) -> BTreeSet<String> {
        self.0.values().flat_map(FType::free_vars).collect()
    }
}

impl FromIterator<(String, FType)> for FContext {
    fn from_iter<I: IntoIterator<Item = (String, FType)>>(it: I) -> Self {
        FContext(it.into_iter().collect())
    }
}

impl fmt::Display for FContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(x, a)| format!("{x} : {a}")).collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FRule {
    Ax,
    UnitI,
    ArrI { var: String },
    ArrE,
    ProdI,
    ProdEl,
    ProdEr,
    ForallI { var: String },
    ForallE { inst: FType },
}

impl FRule {
    pub fn name(&self) -> &'static str {
        match self {
            FRule::Ax => "ax",
            FRule::UnitI => "unit",
            FRule::ArrI { .. } => "arrI",
            FRule::ArrE => "arrE",
            FRule::ProdI => "prodI",
            FRule::ProdEl => "prodEl",
            FRule::ProdEr => "prodEr",
            FRule::ForallI { .. } => "forallI",
            FRule::ForallE { .. } => "forallE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FDerivation {
    pub ctx: FContext,
    pub term: FTerm,
    pub ty: FType,
    pub rule: FRule,
    pub premises: Vec<FDerivation>,
}

impl FDerivation {
    pub fn ax(ctx: &FContext, x: &str) -> Option<FDerivation> {
        Some(FDerivation {
            ctx: ctx.clone(),
            term: FTerm::var(x),
            ty: ctx.get(x)?.clone(),
            rule: FRule::Ax,
            premises: vec![],
        })
    }

    pub fn unit(ctx: &FContext) -> FDerivation {
        FDerivation { ctx: ctx.clone(), term: FTerm::Star, ty: FType::One, rule: FRule::UnitI, premises: vec![] }
    }

    pub fn arr_i(x: &str, body: FDerivation) -> FDerivation {
        let dom = body.ctx.get(x).cloned().unwrap_or(FType::One);
        FDerivation {
            ctx: body.ctx.without(x),
            term: FTerm::lam(x, body.term.clone()),
            ty: FType::arrow(dom, body.ty.clone()),
            rule: FRule::ArrI { var: x.to_string() },
            premises: vec![body],
        }
    }

    pub fn arr_e(f: FDerivation, a: FDerivation) -> FDerivation {
        let ty = match &f.ty {
            FType::Arrow(_, c) => (**c).clone(),
            other => other.clone(),
        };
        FDerivation {
            ctx: f.ctx.clone(),
            term: FTerm::app(f.term.clone(), a.term.clone()),
            ty,
            rule: FRule::ArrE,
            premises: vec![f, a],
        }
    }

    pub fn prod_i(a: FDerivation, b: FDerivation) -> FDerivation {
        FDerivation {
            ctx: a.ctx.clone(),
            term: FTerm::pair(a.term.clone(), b.term.clone()),
            ty: FType::prod(a.ty.clone(), b.ty.clone()),
            rule: FRule::ProdI,
            premises: vec![a, b],
        }
    }

    pub fn proj_l(d: FDerivation) -> FDerivation {
        let ty = match &d.ty {
            FType::Prod(a, _) => (**a).clone(),
            other => other.clone(),
        };
        FDerivation {
            ctx: d.ctx.clone(),
            term: FTerm::proj_l(d.term.clone()),
            ty,
            rule: FRule::ProdEl,
            premises: vec![d],
        }
    }

    pub fn proj_r(d: FDerivation) -> FDerivation {
        let ty = match &d.ty {
            FType::Prod(_, b) => (**b).clone(),
            other => other.clone(),
        };
        FDerivation {
            ctx: d.ctx.clone(),
            term: FTerm::proj_r(d.term.clone()),
            ty,
            rule: FRule::ProdEr,
            premises: vec![d],
        }
    }

    pub fn forall_i(x: &str, d: FDerivation) -> FDerivation {
        FDerivation {
            ctx: d.ctx.clone(),
            term: d.term.clone(),
            ty: FType::forall(x, d.ty.clone()),
            rule: FRule::ForallI { var: x.to_string() },
            premises: vec![d],
        }
    }

    pub fn forall_e(inst: FType, d: FDerivation) -> FDerivation {
        let ty = match &d.ty {
            FType::Forall(_, b) => b.instantiate(&inst),
            other => other.clone(),
        };
        FDerivation { ctx: d.ctx.clone(), term: d.term.clone(), ty, rule: FRule::ForallE { inst }, premises: vec![d] }
    }

    /// Follows the leaf address `w` with projections.
    pub fn project(d: FDerivation, w: &str) -> FDerivation {
        w.chars().fold(d, |acc, c| if c == 'l' { FDerivation::proj_l(acc) } else { FDerivation::proj_r(acc) })
    }

    /// Pairs up leaf derivations along `a`; zero leaves become `star`.
    pub fn tree(a: &TypeTree, ctx: &FContext, leaves: &dyn Fn(&str) -> Option<FDerivation>) -> Option<FDerivation> {
        fold_tree(a, &mut String::new(), leaves, &|| FDerivation::unit(ctx), &FDerivation::prod_i)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(FDerivation::size).sum::<usize>()
    }
}

impl fmt::Display for FDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(d: &FDerivation, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let extra = match &d.rule {
                FRule::ArrI { var } | FRule::ForallI { var } => format!(" [{var}]"),
                FRule::ForallE { inst } => format!(" [{inst}]"),
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

/// Checks every node against the typing rules, syntactically.
pub fn f_check(d: &FDerivation) -> Result<(), RuleViolation> {
    check_node(d, &mut Vec::new())
}

fn check_node(d: &FDerivation, path: &mut Vec<usize>) -> Result<(), RuleViolation> {
    let fail = |reason: String| RuleViolation { path: NodePath(path.clone()), rule: d.rule.name(), reason };
    let arity = match d.rule {
        FRule::Ax | FRule::UnitI => 0,
        FRule::ArrE | FRule::ProdI => 2,
        _ => 1,
    };
    if d.premises.len() != arity {
        return Err(fail(format!("expected {arity} premises, found {}", d.premises.len())));
    }
    if !matches!(d.rule, FRule::ArrI { .. }) {
        if let Some(p) = d.premises.iter().find(|p| p.ctx != d.ctx) {
            return Err(fail(format!("premise context `{}` differs from `{}`", p.ctx, d.ctx)));
        }
    }
    let expect = |what: &str, got: &FType, want: &FType| -> Result<(), RuleViolation> {
        if got == want {
            Ok(())
        } else {
            Err(fail(format!("{what} `{got}` is not `{want}`")))
        }
    };
    let same_subject = |p: &FDerivation| -> Result<(), RuleViolation> {
        if p.term == d.term {
            Ok(())
        } else {
            Err(fail(format!("premise subject `{}` differs from `{}`", p.term, d.term)))
        }
    };
    let p = |k: usize| &d.premises[k];
    match &d.rule {
        FRule::Ax => {
            let FTerm::Var(Var::Free(x)) = &d.term else {
                return Err(fail(format!("subject `{}` is not a variable", d.term)));
            };
            let Some(a) = d.ctx.get(x) else {
                return Err(fail(format!("`{x}` is not in the context")));
            };
            expect("type", &d.ty, a)?;
        }
        FRule::UnitI => {
            if d.term != FTerm::Star {
                return Err(fail(format!("subject `{}` is not star", d.term)));
            }
            expect("type", &d.ty, &FType::One)?;
        }
        FRule::ArrI { var } => {
            let FTerm::Abs(_, body) = &d.term else {
                return Err(fail(format!("subject `{}` is not an abstraction", d.term)));
            };
            let FType::Arrow(dom, cod) = &d.ty else {
                return Err(fail(format!("type `{}` is not an arrow", d.ty)));
            };
            if body.has_free(var) {
                return Err(fail(format!("bound variable `{var}` is not fresh")));
            }
            let Some(ext) = d.ctx.extend(var.clone(), (**dom).clone()) else {
                return Err(fail(format!("`{var}` is already declared")));
            };
            if p(0).ctx != ext {
                return Err(fail(format!("premise context `{}` is not `{ext}`", p(0).ctx)));
            }
            if p(0).term != body.open(var) {
                return Err(fail(format!("premise subject `{}` is not the opened body", p(0).term)));
            }
            expect("premise type", &p(0).ty, cod)?;
        }
        FRule::ArrE => {
            if d.term != FTerm::app(p(0).term.clone(), p(1).term.clone()) {
                return Err(fail("subject is not the application of the premises".into()));
            }
            let FType::Arrow(dom, cod) = &p(0).ty else {
                return Err(fail(format!("function type `{}` is not an arrow", p(0).ty)));
            };
            expect("argument type", &p(1).ty, dom)?;
            expect("type", &d.ty, cod)?;
        }
        FRule::ProdI => {
            if d.term != FTerm::pair(p(0).term.clone(), p(1).term.clone()) {
                return Err(fail("subject is not the pair of the premises".into()));
            }
            expect("type", &d.ty, &FType::prod(p(0).ty.clone(), p(1).ty.clone()))?;
        }
        FRule::ProdEl | FRule::ProdEr => {
            let left = d.rule == FRule::ProdEl;
            let want = if left { FTerm::proj_l(p(0).term.clone()) } else { FTerm::proj_r(p(0).term.clone()) };
            if d.term != want {
                return Err(fail("subject is not a projection of the premise".into()));
            }
            let FType::Prod(a, b) = &p(0).ty else {
                return Err(fail(format!("premise type `{}` is not a product", p(0).ty)));
            };
            expect("type", &d.ty, if left { a } else { b })?;
        }
        FRule::ForallI { var } => {
            same_subject(p(0))?;
            if d.ctx.free_type_vars().contains(var) {
                return Err(fail(format!("`{var}` is free in the context")));
            }
            expect("type", &d.ty, &FType::forall(var.clone(), p(0).ty.clone()))?;
        }
        FRule::ForallE { inst } => {
            same_subject(p(0))?;
            let FType::Forall(_, body) = &p(0).ty else {
                return Err(fail(format!("premise type `{}` is not quantified", p(0).ty)));
            };
            expect("type", &d.ty, &body.instantiate(inst))?;
        }
    }
    for (i, q) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(q, path)?;
        path.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use TypeTree::{Leaf as L, ZeroLeaf as Z};

    fn v(x: &str) -> FTerm {
        FTerm::var(x)
    }

    fn example_tree() -> TypeTree {
        TypeTree::node(TypeTree::node(L, TypeTree::node(L, L)), Z)
    }

    fn example_term() -> FTerm {
        let tau = |w: &str| match w {
            "ll" => Some(v("u1")),
            "lrl" => Some(v("u2")),
            "lrr" => Some(v("u3")),
            _ => None,
        };
        ftree_term(&example_tree(), &tau).unwrap()
    }

    #[test]
    fn tree_terms_pair_up_leaves() {
        assert_eq!(example_term(), FTerm::pair(FTerm::pair(v("u1"), FTerm::pair(v("u2"), v("u3"))), FTerm::Star));
        assert_eq!(ftree_label(&Z, &|_| None), Some(FType::One));
        assert_eq!(ftree_term(&Z, &|_| None), Some(FTerm::Star));
    }

    #[test]
    fn projection_paths_follow_the_mirror_word() {
        let t = example_term();
        let p = proj_path(&t, "lrr");
        assert_eq!(p, FTerm::proj_r(FTerm::proj_r(FTerm::proj_l(t.clone()))));
        let path = f_reaches(&p, &v("u3"), 1000).unwrap();
        assert!(f_path_valid(&path));
        assert_eq!(proj_path(&t, ""), t);
        for (w, x) in [("ll", "u1"), ("lrl", "u2")] {
            assert_eq!(f_normalize(&proj_path(&t, w), 100).0, v(x));
        }
    }

    #[test]
    fn reducts_at_the_root() {
        let pair = FTerm::pair(v("a"), v("b"));
        assert_eq!(f_reducts(&FTerm::proj_l(pair)), [v("a")].into());
        let p = FTerm::app(v("f"), v("x"));
        let sp = FTerm::pair(FTerm::proj_l(p.clone()), FTerm::proj_r(p.clone()));
        assert!(f_reducts(&sp).contains(&p));
        assert!(f_reducts(&v("x")).is_empty());
        let eta = FTerm::lam("x", FTerm::app(v("f"), v("x")));
        assert_eq!(f_reducts(&eta), [v("f")].into());
        let not_eta = FTerm::lam("x", FTerm::app(v("x"), v("x")));
        assert!(f_reducts(&not_eta).is_empty());
    }

    #[test]
    fn reachability() {
        assert_eq!(f_reaches(&v("t"), &v("t"), 1), Some(vec![v("t")]));
        assert_eq!(f_reaches(&FTerm::Star, &FTerm::pair(FTerm::Star, FTerm::Star), 100), None);
        let id = FTerm::lam("x", v("x"));
        let t = FTerm::app(id.clone(), FTerm::app(id, v("y")));
        let path = f_reaches(&t, &v("y"), 100).unwrap();
        assert_eq!(path.len(), 3);
        assert!(f_path_valid(&path));
    }

    #[test]
    fn checking() {
        let ctx = FContext::new();
        f_check(&FDerivation::unit(&ctx)).unwrap();
        let inner = FContext::new().extend("x", FType::var("X")).unwrap();
        let id = FDerivation::forall_i("X", FDerivation::arr_i("x", FDerivation::ax(&inner, "x").unwrap()));
        f_check(&id).unwrap();
        assert_eq!(id.ty.to_string(), "forall X. X -> X");
        let bad = FDerivation::proj_l(FDerivation::unit(&ctx));
        assert!(f_check(&bad).is_err());
    }

    #[test]
    fn tree_derivations_and_projections() {
        let ctx: FContext =
            [("u1", "A"), ("u2", "B"), ("u3", "C")].into_iter().map(|(x, a)| (x.to_string(), FType::var(a))).collect();
        let leaf = |w: &str| {
            let x = match w {
                "ll" => "u1",
                "lrl" => "u2",
                _ => "u3",
            };
            FDerivation::ax(&ctx, x)
        };
        let d = FDerivation::tree(&example_tree(), &ctx, &leaf).unwrap();
        f_check(&d).unwrap();
        assert_eq!(d.term, example_term());
        let phi = |w: &str| leaf(w).map(|d| d.ty);
        assert_eq!(Some(d.ty.clone()), ftree_label(&example_tree(), &phi));
        for w in example_tree().leaves() {
            let p = FDerivation::project(d.clone(), &w);
            f_check(&p).unwrap();
            assert_eq!(Some(p.ty), phi(&w));
        }
    }

    #[test]
    fn display() {
        let t = FTerm::lam("x", FTerm::proj_l(FTerm::pair(v("x"), FTerm::Star)));
        assert_eq!(t.to_string(), "\\x. proj_l <x, star>");
        let a = FType::arrow(FType::prod(FType::prod(FType::var("A"), FType::One), FType::var("B")), FType::var("C"));
        assert_eq!(a.to_string(), "A * 1 * B -> C");
    }
}
