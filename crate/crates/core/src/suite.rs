//! Property suites over a corpus, with machine-readable reports.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::derivation::{check_add, AddDerivation, AddRule};
use crate::parse::parse_term;
use crate::reduction::{check_sn, enumerate_redexes, Rule, SnOutcome, DEFAULT_SN_BUDGET};
use crate::sadd::{SaddDerivation, TypeTree};
use crate::syntax::{Binder, Term};
use crate::systemf::{f_check, f_reaches, ftree_label, FTerm};
use crate::transform::step_derivation;
use crate::translate::{
    epsilon_terms, round_trip, simulate_step, trans_context, trans_term, trans_type, DEFAULT_SEARCH_BUDGET,
};
use crate::types::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Ac,
    Equiv,
    Sr,
    Sn,
    TransType,
    TransRed,
    Roundtrip,
    Epsilon,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Ac,
        Suite::Equiv,
        Suite::Sr,
        Suite::Sn,
        Suite::TransType,
        Suite::TransRed,
        Suite::Roundtrip,
        Suite::Epsilon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ac => "ac",
            Suite::Equiv => "equiv",
            Suite::Sr => "sr",
            Suite::Sn => "sn",
            Suite::TransType => "trans-type",
            Suite::TransRed => "trans-red",
            Suite::Roundtrip => "roundtrip",
            Suite::Epsilon => "epsilon",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite `{0}`")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub id: String,
    pub stage: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub millis: u128,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} cases, {} failures, {} ms", self.suite, self.cases, self.failures.len(), self.millis)?;
        for x in &self.failures {
            writeln!(f, "  {} [{}] {}", x.id, x.stage, x.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// State budget for the normalisation search.
    pub sn_budget: usize,
    /// Term budget for each reduction path search in the target calculus.
    pub search_budget: usize,
    /// Number of random checks for the algebraic suites.
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, sn_budget: DEFAULT_SN_BUDGET, search_budget: DEFAULT_SEARCH_BUDGET, samples: 10_000 }
    }
}

struct Run {
    cases: usize,
    failures: Vec<Failure>,
}

impl Run {
    fn check(&mut self, id: &str, stage: &str, r: Result<(), String>) {
        self.cases += 1;
        if let Err(detail) = r {
            self.failures.push(Failure { id: id.to_string(), stage: stage.to_string(), detail });
        }
    }
}

pub fn run_suite(suite: Suite, corpus: &Corpus, cfg: &SuiteConfig) -> Report {
    let start = Instant::now();
    let mut run = Run { cases: 0, failures: Vec::new() };
    match suite {
        Suite::Ac => ac_suite(&mut run, cfg),
        Suite::Equiv => equiv_suite(&mut run, corpus, cfg),
        Suite::Sr => sr_suite(&mut run, corpus),
        Suite::Sn => sn_suite(&mut run, corpus, cfg),
        Suite::TransType => trans_type_suite(&mut run, corpus),
        Suite::TransRed => trans_red_suite(&mut run, corpus, cfg),
        Suite::Roundtrip => roundtrip_suite(&mut run, corpus),
        Suite::Epsilon => epsilon_suite(&mut run, corpus, cfg),
    }
    Report {
        suite: suite.name().to_string(),
        seed: cfg.seed,
        cases: run.cases,
        failures: run.failures,
        millis: start.elapsed().as_millis(),
    }
}

/// `(\x. x x)(\x. x x)`
pub fn omega() -> Term {
    let delta = Term::lam("x", Term::app(Term::var("x"), Term::var("x")));
    Term::app(delta.clone(), delta)
}

fn hash_of<T: Hash>(t: &T) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

const NAMES: [&str; 4] = ["x", "y", "z", "a"];

/// A random raw term, not necessarily canonical.
pub fn random_term(rng: &mut impl Rng, depth: usize, bound: &mut Vec<String>) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return if rng.gen_bool(0.1) { Term::Zero } else { Term::var(*NAMES.choose(rng).expect("nonempty")) };
    }
    match rng.gen_range(0..3) {
        0 => {
            let x = NAMES[rng.gen_range(0..3)].to_string();
            bound.push(x.clone());
            let body = random_term(rng, depth - 1, bound);
            bound.pop();
            Term::lam(x, body)
        }
        1 => Term::app(random_term(rng, depth - 1, bound), random_term(rng, depth - 1, bound)),
        _ => {
            let n = rng.gen_range(2..=4);
            Term::Sum((0..n).map(|_| random_term(rng, depth - 1, bound)).collect())
        }
    }
}

/// Reorders and regroups every sum in `t` at random.
pub fn scramble(t: &Term, rng: &mut impl Rng) -> Term {
    match t {
        Term::Var(_) | Term::Zero => t.clone(),
        Term::Abs(b, body) => Term::Abs(b.clone(), Box::new(scramble(body, rng))),
        Term::App(f, a) => Term::app(scramble(f, rng), scramble(a, rng)),
        Term::Sum(ts) => {
            let mut flat: Vec<Term> = Vec::new();
            for u in ts {
                match u.canonicalize() {
                    Term::Sum(inner) => flat.extend(inner.iter().map(|v| scramble(v, rng))),
                    _ => flat.push(scramble(u, rng)),
                }
            }
            flat.shuffle(rng);
            regroup(flat, rng)
        }
    }
}

fn regroup(mut ts: Vec<Term>, rng: &mut impl Rng) -> Term {
    if ts.len() == 1 {
        return ts.pop().expect("one");
    }
    if ts.len() == 2 || rng.gen_bool(0.3) {
        return Term::Sum(ts);
    }
    let cut = rng.gen_range(1..ts.len());
    let right = ts.split_off(cut);
    Term::Sum(vec![regroup(ts, rng), regroup(right, rng)])
}

/// Renames every binder of `t` without touching the body indices.
pub fn rename_binders(t: &Term, suffix: &str) -> Term {
    match t {
        Term::Var(_) | Term::Zero => t.clone(),
        Term::Abs(b, body) => Term::Abs(Binder(format!("{}{suffix}", b.0)), Box::new(rename_binders(body, suffix))),
        Term::App(f, a) => Term::app(rename_binders(f, suffix), rename_binders(a, suffix)),
        Term::Sum(ts) => Term::Sum(ts.iter().map(|u| rename_binders(u, suffix)).collect()),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac_suite(run: &mut Run, cfg: &SuiteConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let per_round = 4;
    for i in 0..cfg.samples.div_ceil(per_round) {
        let id = format!("ac-{i}");
        let t = random_term(&mut rng, 4, &mut Vec::new());
        let c = t.canonicalize();
        run.check(&id, "idempotence", ensure(c.canonicalize() == c, || format!("`{c}` is not stable")));
        let s = scramble(&t, &mut rng);
        run.check(&id, "congruence", ensure(s.canonicalize() == c, || format!("`{s}` and `{t}` canonicalise apart")));
        let r = rename_binders(&t, "'");
        run.check(
            &id,
            "alpha",
            ensure(r == t && hash_of(&r) == hash_of(&t) && r.canonicalize() == c, || {
                format!("renaming binders of `{t}` changed it")
            }),
        );
        let printed = c.to_string();
        run.check(
            &id,
            "print-parse",
            match parse_term(&printed) {
                Ok(p) if p == c => Ok(()),
                Ok(p) => Err(format!("`{printed}` reparsed as `{p}`")),
                Err(e) => Err(format!("`{printed}`: {e}")),
            },
        );
    }
}

/// A random raw type over a few variables, with sums of width up to 3.
pub fn random_type(rng: &mut impl Rng, depth: usize) -> Type {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.1) { Type::Zero } else { Type::var(["A", "B", "C"][rng.gen_range(0..3)]) };
    }
    match rng.gen_range(0..3) {
        0 => {
            let dom = random_unit(rng, depth - 1);
            Type::arrow(dom, random_type(rng, depth - 1))
        }
        1 => Type::forall("X", Type::arrow(Type::var("X"), random_type(rng, depth - 1))),
        _ => {
            let n = rng.gen_range(2..=3);
            Type::Sum((0..n).map(|_| random_type(rng, depth - 1)).collect())
        }
    }
}

fn random_unit(rng: &mut impl Rng, depth: usize) -> Type {
    loop {
        let t = random_type(rng, depth);
        if t.is_unit() {
            return t;
        }
    }
}

fn scramble_type(t: &Type, rng: &mut impl Rng) -> Type {
    match t {
        Type::Sum(ts) => {
            let mut ts: Vec<Type> = ts.iter().map(|u| scramble_type(u, rng)).collect();
            ts.shuffle(rng);
            if rng.gen_bool(0.3) {
                ts.push(Type::Zero);
            }
            Type::Sum(ts)
        }
        Type::Arrow(d, c) => Type::arrow(scramble_type(d, rng), scramble_type(c, rng)),
        _ => t.clone(),
    }
}

fn equiv_suite(run: &mut Run, corpus: &Corpus, cfg: &SuiteConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    for i in 0..cfg.samples.div_ceil(4) {
        let id = format!("equiv-{i}");
        let t = random_type(&mut rng, 3);
        let c = t.canonicalize();
        run.check(&id, "idempotence", ensure(c.canonicalize() == c, || format!("`{c}` is not stable")));
        let s = scramble_type(&t, &mut rng);
        run.check(
            &id,
            "congruence",
            ensure(s.equiv(&t) && t.equiv(&s), || format!("`{s}` is not equivalent to `{t}`")),
        );
        let padded = Type::plus(t.clone(), Type::Zero);
        run.check(&id, "zero-neutral", ensure(padded.equiv(&t), || format!("`{padded}` is not equivalent to `{t}`")));
        let grown = Type::plus(t.clone(), Type::var("D"));
        run.check(&id, "discrimination", ensure(!grown.equiv(&t), || format!("`{grown}` equivalent to `{t}`")));
    }
    for e in &corpus.entries {
        run.check(&e.id, "check", check_add(&e.add).map_err(|v| v.to_string()));
        let mut nodes = Vec::new();
        e.add.visit(&mut |n| {
            if n.rule == AddRule::Equiv {
                nodes.push((n.ty.clone(), n.premises[0].ty.clone()));
            }
        });
        for (to, from) in nodes {
            run.check(&e.id, "equiv-node", ensure(from.equiv(&to), || format!("`{from}` vs `{to}`")));
        }
    }
}

fn sr_suite(run: &mut Run, corpus: &Corpus) {
    for e in &corpus.entries {
        for r in enumerate_redexes(&e.add.term) {
            let stage = format!("{r}");
            let res = step_derivation(&e.add, &r).map_err(|x| x.to_string()).and_then(|d| {
                check_add(&d).map_err(|v| v.to_string())?;
                ensure(d.ty.equiv(&e.add.ty), || format!("type `{}` drifted from `{}`", d.ty, e.add.ty))
            });
            run.check(&e.id, &stage, res);
        }
    }
}

fn sn_suite(run: &mut Run, corpus: &Corpus, cfg: &SuiteConfig) {
    for e in &corpus.entries {
        let out = check_sn(&e.add.term, cfg.sn_budget);
        run.check(
            &e.id,
            "sn",
            ensure(out.terminates(), || format!("no finite reduction graph within {} states", cfg.sn_budget)),
        );
    }
    let out = check_sn(&omega(), cfg.sn_budget);
    run.check(
        "omega",
        "negative-control",
        ensure(matches!(out, SnOutcome::BudgetExhausted { .. }), || "the divergent control terminated".into()),
    );
}

fn sadd_entries(corpus: &Corpus) -> impl Iterator<Item = (&str, &SaddDerivation)> {
    corpus.entries.iter().filter_map(|e| e.sadd.as_ref().map(|s| (e.id.as_str(), s)))
}

fn all_types(d: &AddDerivation) -> Vec<Type> {
    let mut out = Vec::new();
    d.visit(&mut |n| {
        out.push(n.ty.clone());
        out.extend(n.ctx.iter().map(|(_, u)| u.clone()));
    });
    out
}

fn trans_type_suite(run: &mut Run, corpus: &Corpus) {
    for e in &corpus.entries {
        if e.sadd.is_none() {
            run.check(&e.id, "to-sadd", Err("no structured counterpart".into()));
        }
        for t in all_types(&e.add) {
            let (tree, lab) = TypeTree::of_type(&t);
            let direct = trans_type(&tree.label(&|w| lab.get(w).cloned()).expect("complete labelling"));
            let via = ftree_label(&tree, &|w| lab.get(w).map(trans_type));
            run.check(
                &e.id,
                "labelling",
                ensure(via.as_ref() == Some(&direct), || format!("translation of `{t}` does not commute")),
            );
        }
    }
    for (id, d) in sadd_entries(corpus) {
        let tr = trans_term(d);
        let fd = &tr.fderivation;
        let res = f_check(fd).map_err(|v| v.to_string()).and_then(|()| {
            ensure(fd.ty == trans_type(&d.ty), || format!("concluded `{}`", fd.ty))?;
            ensure(fd.ctx == trans_context(&d.ctx), || format!("context `{}`", fd.ctx))
        });
        run.check(id, "f-check", res);
    }
}

fn trans_red_suite(run: &mut Run, corpus: &Corpus, cfg: &SuiteConfig) {
    for (id, d) in sadd_entries(corpus) {
        for r in enumerate_redexes(&d.term) {
            if r.rule == Rule::SumZero {
                continue;
            }
            let res = simulate_step(d, &r, cfg.search_budget).map(|_| ()).map_err(|e| e.to_string());
            run.check(id, &r.to_string(), res);
        }
    }
}

fn roundtrip_suite(run: &mut Run, corpus: &Corpus) {
    for (id, d) in sadd_entries(corpus) {
        run.check(id, "roundtrip", round_trip(d).map_err(|m| m.to_string()));
    }
}

/// Sub-derivations of `t + 0` or `0 + t` at a padded sum type.
fn padded_sums(d: &SaddDerivation, out: &mut Vec<(SaddDerivation, bool)>) {
    if let [l, r] = &d.premises[..] {
        if d.rule == crate::sadd::SaddRule::PlusI {
            if r.ty == Type::Zero {
                out.push((l.clone(), true));
            } else if l.ty == Type::Zero {
                out.push((r.clone(), false));
            }
        }
    }
    for p in &d.premises {
        padded_sums(p, out);
    }
}

fn epsilon_suite(run: &mut Run, corpus: &Corpus, cfg: &SuiteConfig) {
    for (id, d) in sadd_entries(corpus) {
        let mut found = Vec::new();
        let mut whole = Vec::new();
        padded_sums(d, &mut whole);
        found.extend(whole);
        for (inner, left) in found {
            let padded = if left {
                crate::sadd::SaddDerivation::plus_i(inner.clone(), crate::sadd::SaddDerivation::ax0(&inner.ctx))
            } else {
                crate::sadd::SaddDerivation::plus_i(crate::sadd::SaddDerivation::ax0(&inner.ctx), inner.clone())
            };
            let from = trans_term(&padded).fterm;
            let to = trans_term(&inner).fterm;
            let drop =
                if left { epsilon_terms(&inner.ty).drop.term } else { FTerm::lam("x", FTerm::proj_r(FTerm::var("x"))) };
            let applied = FTerm::app(drop, from);
            let res = ensure(f_reaches(&applied, &to, cfg.search_budget).is_some(), || {
                format!("`{applied}` does not reach `{to}`")
            });
            run.check(id, "epsilon", res);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_corpus;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn omega_is_a_negative_control() {
        assert!(!check_sn(&omega(), 1_000).terminates());
    }

    #[test]
    fn small_suites_pass() {
        let corpus = generate_corpus(3, 30, 14);
        let cfg = SuiteConfig { seed: 3, samples: 200, ..SuiteConfig::default() };
        for s in [Suite::Ac, Suite::Equiv, Suite::Sr, Suite::Sn, Suite::Roundtrip, Suite::Epsilon] {
            let r = run_suite(s, &corpus, &cfg);
            assert!(r.passed(), "{r}");
        }
    }
}
