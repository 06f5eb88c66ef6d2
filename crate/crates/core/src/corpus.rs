//! Seeded random generation of checked derivations, plus pinned fixtures.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derivation::{check_add, AddDerivation, ArrowElim};
use crate::elaborate::{elaborate, ATerm};
use crate::sadd::{add_to_sadd, check_sadd, SaddDerivation, StructElim, TypeTree};
use crate::syntax::fresh_name;
use crate::types::{Context, Type};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub add: AddDerivation,
    /// `None` when the derivation has no structured counterpart.
    pub sadd: Option<SaddDerivation>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seed: u64,
    pub budget: usize,
    pub entries: Vec<CorpusEntry>,
    /// Generated derivations dropped because they failed to check.
    pub rejected: usize,
}

const MAX_ATTEMPTS: usize = 64;

/// `count` generated derivations whose terms have at most `budget` nodes,
/// preceded by the pinned fixtures.
pub fn generate_corpus(seed: u64, count: usize, budget: usize) -> Corpus {
    let mut entries = fixtures();
    let mut rejected = 0;
    for i in 0..count {
        let d = (0..MAX_ATTEMPTS)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((i * MAX_ATTEMPTS + k) as u64);
                Generator { rng, budget, nodes: 0 }.derivation()
            })
            .find(|d| d.term.size() <= budget)
            .unwrap_or_else(|| AddDerivation::ax(&base_context(), "a").expect("declared"));
        if check_add(&d).is_err() {
            rejected += 1;
            continue;
        }
        let sadd = add_to_sadd(&d).ok();
        entries.push(CorpusEntry { id: format!("gen-{i}"), add: d, sadd });
    }
    Corpus { seed, budget, entries, rejected }
}

fn tv(x: &str) -> Type {
    Type::var(x)
}

fn base_context() -> Context {
    Context::from_pairs([("a", tv("A")), ("b", tv("B")), ("c", tv("C"))]).expect("distinct")
}

fn entry(id: &str, add: AddDerivation) -> CorpusEntry {
    let sadd = add_to_sadd(&add).ok();
    CorpusEntry { id: id.to_string(), add, sadd }
}

fn sadd_entry(id: &str, s: SaddDerivation) -> CorpusEntry {
    check_sadd(&s).expect("pinned structured fixture checks");
    CorpusEntry { id: id.to_string(), add: crate::sadd::sadd_to_add(&s), sadd: Some(s) }
}

pub fn fixtures() -> Vec<CorpusEntry> {
    vec![
        entry("pair-of-abstractions-on-sum", pair_of_abstractions_on_sum()),
        entry("identity-on-sum", identity_on_sum()),
        sadd_entry("sum-on-padded-sum", sum_on_padded_sum()),
        sadd_entry("padded-elimination", padded_elimination()),
    ]
}

fn poly_id() -> ATerm {
    ATerm::gen("X", ATerm::lam("x", tv("X"), ATerm::Var("x".into())))
}

/// `(\x.x + \y.c)(a + b) : A + B + C + C`
pub fn pair_of_abstractions_on_sum() -> AddDerivation {
    let ctx = base_context();
    let konst = ATerm::gen("X", ATerm::lam("y", tv("X"), ATerm::Var("c".into())));
    let fun = ATerm::plus(poly_id(), konst);
    let arg = ATerm::plus(ATerm::Var("a".into()), ATerm::Var("b".into()));
    let w = ArrowElim {
        binders: vec!["X".into()],
        unit: tv("X"),
        results: vec![tv("X"), tv("C")],
        insts: vec![vec![tv("A")], vec![tv("B")]],
    };
    elaborate(&ATerm::app_with(fun, arg, w), &ctx).expect("pinned fixture elaborates")
}

/// `(\x.x)(a + b) : A + B`
pub fn identity_on_sum() -> AddDerivation {
    let ctx = base_context();
    let arg = ATerm::plus(ATerm::Var("a".into()), ATerm::Var("b".into()));
    let w = ArrowElim {
        binders: vec!["X".into()],
        unit: tv("X"),
        results: vec![tv("X")],
        insts: vec![vec![tv("A")], vec![tv("B")]],
    };
    elaborate(&ATerm::app_with(poly_id(), arg, w), &ctx).expect("pinned fixture elaborates")
}

/// `(f + g)((a + 0) + b)` with `f : U -> T1`, `g : U -> T2`, `a, b : U`.
pub fn sum_on_padded_sum() -> SaddDerivation {
    use TypeTree::{Leaf as L, ZeroLeaf as Z};
    let u = tv("U");
    let ctx = Context::from_pairs([
        ("f", Type::arrow(u.clone(), tv("T1"))),
        ("g", Type::arrow(u.clone(), tv("T2"))),
        ("a", u.clone()),
        ("b", u.clone()),
    ])
    .expect("distinct");
    let ax = |x| SaddDerivation::ax(&ctx, x).expect("declared");
    let fun = SaddDerivation::plus_i(ax("f"), ax("g"));
    let arg = SaddDerivation::plus_i(SaddDerivation::plus_i(ax("a"), SaddDerivation::ax0(&ctx)), ax("b"));
    let w = StructElim {
        fun_tree: TypeTree::node(L, L),
        arg_tree: TypeTree::node(TypeTree::node(L, Z), L),
        binders: vec![],
        unit: u,
        results: [("l".to_string(), tv("T1")), ("r".to_string(), tv("T2"))].into(),
        insts: [("ll".to_string(), vec![]), ("r".to_string(), vec![])].into(),
    };
    SaddDerivation::struct_arr_e(w, fun, arg)
}

/// `((\x.x + \y.c) + 0)(a + 0) : ((A + void) + (C + void)) + void`
pub fn padded_elimination() -> SaddDerivation {
    use TypeTree::{Leaf as L, ZeroLeaf as Z};
    let ctx = base_context();
    let lam = |x: &str, body: &str| {
        let inner = ctx.extend(x.to_string(), tv("X")).expect("fresh");
        let b = SaddDerivation::ax(&inner, body).expect("declared");
        SaddDerivation::forall_i("X", SaddDerivation::arr_i(x, b))
    };
    let fun = SaddDerivation::plus_i(SaddDerivation::plus_i(lam("x", "x"), lam("y", "c")), SaddDerivation::ax0(&ctx));
    let arg = SaddDerivation::plus_i(SaddDerivation::ax(&ctx, "a").expect("declared"), SaddDerivation::ax0(&ctx));
    let w = StructElim {
        fun_tree: TypeTree::node(TypeTree::node(L, L), Z),
        arg_tree: TypeTree::node(L, Z),
        binders: vec!["X".into()],
        unit: tv("X"),
        results: [("ll".to_string(), tv("X")), ("lr".to_string(), tv("C"))].into(),
        insts: [("l".to_string(), vec![tv("A")])].into(),
    };
    SaddDerivation::struct_arr_e(w, fun, arg)
}

struct Generator {
    rng: ChaCha8Rng,
    budget: usize,
    nodes: usize,
}

impl Generator {
    fn derivation(mut self) -> AddDerivation {
        let mut ctx = base_context();
        if self.rng.gen_bool(0.5) {
            ctx = ctx.extend("f".to_string(), Type::arrow(tv("A"), tv("A"))).expect("fresh");
        }
        if self.rng.gen_bool(0.5) {
            let id = Type::forall("X", Type::arrow(tv("X"), tv("X")));
            ctx = ctx.extend("id".to_string(), id).expect("fresh");
        }
        if self.rng.gen_bool(0.6) {
            self.app(&ctx, 3)
        } else {
            self.any(&ctx, 3)
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes < self.budget
    }

    fn weighted(&mut self, weights: &[u32]) -> usize {
        let total: u32 = weights.iter().sum();
        let mut x = self.rng.gen_range(0..total);
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                return i;
            }
            x -= w;
        }
        weights.len() - 1
    }

    fn small_count(&mut self) -> usize {
        1 + self.weighted(&[50, 35, 15])
    }

    fn var(&mut self, ctx: &Context) -> AddDerivation {
        let names: Vec<&String> = ctx.names().collect();
        let x = names.choose(&mut self.rng).expect("nonempty context");
        AddDerivation::ax(ctx, x).expect("declared")
    }

    fn pool_unit(&mut self, ctx: &Context) -> Type {
        let mut pool = vec![tv("A"), tv("B"), tv("C"), Type::arrow(tv("A"), tv("A"))];
        pool.extend(ctx.free_type_vars().into_iter().map(Type::var));
        pool.choose(&mut self.rng).expect("nonempty").clone()
    }

    fn fresh_var(&self, ctx: &Context, base: &str) -> String {
        fresh_name(base, &|n| ctx.contains(n))
    }

    fn fresh_tyvar(&self, ctx: &Context, extra: &BTreeSet<String>) -> String {
        let taken = ctx.free_type_vars();
        let pool = ["X", "Y", "Z"];
        for p in pool {
            if !taken.contains(p) && !extra.contains(p) {
                return p.to_string();
            }
        }
        fresh_name("X", &|n| taken.contains(n) || extra.contains(n))
    }

    fn any(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        if depth == 0 || !self.tick() {
            return if self.rng.gen_bool(0.85) { self.var(ctx) } else { AddDerivation::ax0(ctx) };
        }
        match self.weighted(&[30, 25, 20, 5, 5, 15]) {
            0 => self.unit(ctx, depth),
            1 => self.app(ctx, depth),
            2 => self.plus(ctx, depth),
            3 => AddDerivation::ax0(ctx),
            4 => {
                let d = self.any(ctx, depth - 1);
                self.equiv(d)
            }
            _ => self.var(ctx),
        }
    }

    fn plus(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        let width = 2 + self.weighted(&[60, 30, 10]);
        let parts: Vec<AddDerivation> = (0..width).map(|_| self.any(ctx, depth - 1)).collect();
        AddDerivation::sum_of(parts).expect("nonempty")
    }

    fn equiv(&mut self, d: AddDerivation) -> AddDerivation {
        let t = d.ty.clone();
        let target = match (&t, self.rng.gen_bool(0.5)) {
            (Type::Sum(ts), true) => Type::Sum(ts.iter().rev().cloned().collect()),
            (_, true) => Type::plus(Type::Zero, t),
            _ => Type::plus(t, Type::Zero),
        };
        AddDerivation::equiv(target, d)
    }

    /// A derivation whose type is a unit type.
    fn unit(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        if depth == 0 || !self.tick() {
            return self.var(ctx);
        }
        match self.weighted(&[35, 25, 20, 20]) {
            0 => self.var(ctx),
            1 => {
                let x = self.fresh_var(ctx, "x");
                let dom = self.pool_unit(ctx);
                let inner = ctx.extend(x.clone(), dom).expect("fresh");
                let body = self.any(&inner, depth - 1);
                AddDerivation::arr_i(&x, body)
            }
            2 => self.poly_lambda(ctx, depth),
            _ => {
                let inst = self.pool_unit(ctx);
                let poly = match ctx.get("id") {
                    Some(_) if self.rng.gen_bool(0.5) => AddDerivation::ax(ctx, "id").expect("declared"),
                    _ => self.poly_lambda(ctx, depth),
                };
                AddDerivation::forall_e(inst, poly)
            }
        }
    }

    /// `gen X. \x:X. body`
    fn poly_lambda(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        let big = self.fresh_tyvar(ctx, &BTreeSet::new());
        let (x, body) = self.body_over(ctx, &tv(&big), depth);
        AddDerivation::forall_i(&big, AddDerivation::arr_i(&x, body))
    }

    fn body_over(&mut self, ctx: &Context, dom: &Type, depth: usize) -> (String, AddDerivation) {
        let x = self.fresh_var(ctx, "x");
        let inner = ctx.extend(x.clone(), dom.clone()).expect("fresh");
        let body = if self.rng.gen_bool(0.35) {
            AddDerivation::ax(&inner, &x).expect("declared")
        } else {
            self.any(&inner, depth.saturating_sub(1))
        };
        (x, body)
    }

    fn app(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        if depth == 0 || !self.tick() {
            return self.var(ctx);
        }
        match self.weighted(&[60, 20, 20]) {
            0 => self.app_poly(ctx, depth),
            1 => self.app_poly_arrow(ctx, depth),
            _ => self.app_mono(ctx, depth),
        }
    }

    fn maybe_zero(&mut self, ctx: &Context, mut parts: Vec<AddDerivation>, p: f64) -> Vec<AddDerivation> {
        if parts.len() < 3 && self.rng.gen_bool(p) {
            let at = self.rng.gen_range(0..=parts.len());
            parts.insert(at, AddDerivation::ax0(ctx));
        }
        parts
    }

    /// Functions of type `forall X.(X -> T_i)` applied to unit-typed arguments.
    fn app_poly(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        let beta = self.small_count();
        let args: Vec<AddDerivation> = (0..beta).map(|_| self.unit(ctx, depth - 1)).collect();
        let insts: Vec<Vec<Type>> = args.iter().map(|a| vec![a.ty.clone()]).collect();
        let mut taken: BTreeSet<String> = insts.iter().flatten().flat_map(Type::free_vars).collect();
        taken.extend(ctx.free_type_vars());
        let big = self.fresh_tyvar(ctx, &taken);
        let alpha = self.small_count();
        let mut funs = Vec::new();
        let mut results = Vec::new();
        for _ in 0..alpha {
            if ctx.contains("id") && self.rng.gen_bool(0.2) {
                funs.push(AddDerivation::ax(ctx, "id").expect("declared"));
                results.push(tv(&big));
                continue;
            }
            let (x, body) = self.body_over(ctx, &tv(&big), depth);
            results.push(body.ty.clone());
            funs.push(AddDerivation::forall_i(&big, AddDerivation::arr_i(&x, body)));
        }
        let funs = self.maybe_zero(ctx, funs, 0.1);
        let args = self.maybe_zero(ctx, args, 0.1);
        let w = ArrowElim { binders: vec![big.clone()], unit: tv(&big), results, insts };
        AddDerivation::arr_e(
            w,
            AddDerivation::sum_of(funs).expect("nonempty"),
            AddDerivation::sum_of(args).expect("nonempty"),
        )
    }

    /// Functions of type `forall X.((X -> X) -> T_i)`.
    fn app_poly_arrow(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        let beta = self.small_count();
        let mut args = Vec::new();
        let mut insts = Vec::new();
        for _ in 0..beta {
            let w = self.pool_unit(ctx);
            let arg = match self.weighted(&[50, 25, 25]) {
                1 if ctx.contains("id") => {
                    AddDerivation::forall_e(w.clone(), AddDerivation::ax(ctx, "id").expect("declared"))
                }
                2 if ctx.contains("f") && w == tv("A") => AddDerivation::ax(ctx, "f").expect("declared"),
                _ => {
                    let z = self.fresh_var(ctx, "z");
                    let inner = ctx.extend(z.clone(), w.clone()).expect("fresh");
                    AddDerivation::arr_i(&z, AddDerivation::ax(&inner, &z).expect("declared"))
                }
            };
            args.push(arg);
            insts.push(vec![w]);
        }
        let mut taken: BTreeSet<String> = insts.iter().flatten().flat_map(Type::free_vars).collect();
        taken.extend(ctx.free_type_vars());
        let big = self.fresh_tyvar(ctx, &taken);
        let unit = Type::arrow(tv(&big), tv(&big));
        let alpha = self.small_count();
        let mut funs = Vec::new();
        let mut results = Vec::new();
        for _ in 0..alpha {
            let (x, body) = self.body_over(ctx, &unit, depth);
            results.push(body.ty.clone());
            funs.push(AddDerivation::forall_i(&big, AddDerivation::arr_i(&x, body)));
        }
        let w = ArrowElim { binders: vec![big], unit, results, insts };
        AddDerivation::arr_e(
            w,
            AddDerivation::sum_of(funs).expect("nonempty"),
            AddDerivation::sum_of(args).expect("nonempty"),
        )
    }

    /// Monomorphic functions on the type of a context variable.
    fn app_mono(&mut self, ctx: &Context, depth: usize) -> AddDerivation {
        let v = self.var(ctx);
        let dom = v.ty.clone();
        if !dom.is_unit() || matches!(dom, Type::Forall(..)) {
            return self.app_poly(ctx, depth);
        }
        let same: Vec<String> = ctx.iter().filter(|(_, u)| **u == dom).map(|(x, _)| x.clone()).collect();
        let beta = self.small_count();
        let args: Vec<AddDerivation> = (0..beta)
            .map(|_| AddDerivation::ax(ctx, same.choose(&mut self.rng).expect("contains v")).expect("declared"))
            .collect();
        let alpha = self.small_count();
        let mut funs = Vec::new();
        let mut results = Vec::new();
        for _ in 0..alpha {
            let arrows: Vec<(String, Type)> = ctx
                .iter()
                .filter_map(|(x, u)| match u {
                    Type::Arrow(d, c) if **d == dom => Some((x.clone(), (**c).clone())),
                    _ => None,
                })
                .collect();
            if !arrows.is_empty() && self.rng.gen_bool(0.3) {
                let (f, cod) = arrows.choose(&mut self.rng).expect("nonempty").clone();
                funs.push(AddDerivation::ax(ctx, &f).expect("declared"));
                results.push(cod);
                continue;
            }
            let (x, body) = self.body_over(ctx, &dom, depth);
            results.push(body.ty.clone());
            funs.push(AddDerivation::arr_i(&x, body));
        }
        let args = self.maybe_zero(ctx, args, 0.15);
        let w = ArrowElim { binders: vec![], unit: dom, results, insts: vec![vec![]; beta] };
        AddDerivation::arr_e(
            w,
            AddDerivation::sum_of(funs).expect("nonempty"),
            AddDerivation::sum_of(args).expect("nonempty"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_check() {
        for e in fixtures() {
            check_add(&e.add).unwrap_or_else(|v| panic!("{}: {v}", e.id));
            assert!(e.sadd.is_some(), "{}", e.id);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_corpus(1, 20, 40);
        let b = generate_corpus(1, 20, 40);
        let show = |c: &Corpus| c.entries.iter().map(|e| e.add.to_string()).collect::<Vec<_>>();
        assert_eq!(show(&a), show(&b));
        let c = generate_corpus(2, 20, 40);
        assert_ne!(show(&a), show(&c));
    }

    #[test]
    fn generated_derivations_check() {
        let c = generate_corpus(7, 200, 40);
        assert_eq!(c.rejected, 0);
        let mut rules = BTreeSet::new();
        for e in &c.entries {
            rules.extend(e.add.rules_used());
        }
        for r in crate::derivation::AddRule::NAMES {
            assert!(rules.contains(r), "rule {r} never generated");
        }
    }
}
