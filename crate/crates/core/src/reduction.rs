//! Small-step reduction: the two distributivity rules, the three zero rules
//! and call-by-value beta, applied in any context and modulo AC of `+`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{Path, Step, Term};

pub const DEFAULT_FUEL: usize = 10_000;
pub const DEFAULT_SN_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `(t + u) s -> t s + u s`
    DistRight,
    /// `t (u + s) -> t u + t s`
    DistLeft,
    /// `0 t -> 0`
    ZeroFun,
    /// `t 0 -> 0`
    ZeroArg,
    /// `t + 0 -> t`
    SumZero,
    /// `(\x. t) v -> t[v/x]`
    Beta,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DistRight => "dist-right",
            Rule::DistLeft => "dist-left",
            Rule::ZeroFun => "zero-fun",
            Rule::ZeroArg => "zero-arg",
            Rule::SumZero => "sum-zero",
            Rule::Beta => "beta",
        }
    }

    fn priority(self) -> u8 {
        match self {
            Rule::DistRight | Rule::DistLeft => 0,
            Rule::ZeroFun | Rule::ZeroArg => 1,
            Rule::SumZero => 2,
            Rule::Beta => 3,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A redex occurrence. For the distributivity rules `choice` is the index of
/// the summand split off from the rest; for `t + 0 -> t` it is the index of a
/// `Zero` summand.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Redex {
    pub path: Path,
    pub rule: Rule,
    pub choice: usize,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Rule::DistRight | Rule::DistLeft | Rule::SumZero => {
                write!(f, "{} @ {} [{}]", self.rule, self.path, self.choice)
            }
            _ => write!(f, "{} @ {}", self.rule, self.path),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("stale redex {0}: the subterm does not match the rule")]
    StaleRedex(String),
}

/// Split choices for an n-ary sum: one per distinct summand, and a single one
/// for two summands (both singletons give the same split).
fn split_choices(ts: &[Term]) -> Vec<usize> {
    if ts.len() == 2 {
        return vec![0];
    }
    (0..ts.len()).filter(|&i| !ts[..i].contains(&ts[i])).collect()
}

/// Every redex of a canonical term, in post-order (innermost first, left to right).
pub fn enumerate_redexes(t: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect(t, &mut path, &mut out);
    out
}

fn collect(t: &Term, path: &mut Vec<Step>, out: &mut Vec<Redex>) {
    match t {
        Term::Var(_) | Term::Zero => {}
        Term::Abs(_, body) => {
            path.push(Step::Body);
            collect(body, path, out);
            path.pop();
        }
        Term::App(f, a) => {
            path.push(Step::Fun);
            collect(f, path, out);
            path.pop();
            path.push(Step::Arg);
            collect(a, path, out);
            path.pop();
            let here = |rule, choice| Redex { path: Path(path.clone()), rule, choice };
            if let Term::Sum(ts) = &**f {
                out.extend(split_choices(ts).into_iter().map(|i| here(Rule::DistRight, i)));
            }
            if let Term::Sum(ts) = &**a {
                out.extend(split_choices(ts).into_iter().map(|i| here(Rule::DistLeft, i)));
            }
            if **f == Term::Zero {
                out.push(here(Rule::ZeroFun, 0));
            }
            if **a == Term::Zero {
                out.push(here(Rule::ZeroArg, 0));
            }
            if matches!(**f, Term::Abs(..)) && a.is_value() {
                out.push(here(Rule::Beta, 0));
            }
        }
        Term::Sum(ts) => {
            for (i, s) in ts.iter().enumerate() {
                path.push(Step::Summand(i));
                collect(s, path, out);
                path.pop();
            }
            if let Some(i) = ts.iter().position(|s| *s == Term::Zero) {
                out.push(Redex { path: Path(path.clone()), rule: Rule::SumZero, choice: i });
            }
        }
    }
}

/// Splits `ts` into the chosen summand and the sum of the others.
pub fn split_sum(ts: &[Term], choice: usize) -> (Term, Term) {
    let rest: Vec<Term> = ts.iter().enumerate().filter(|(i, _)| *i != choice).map(|(_, t)| t.clone()).collect();
    (ts[choice].clone(), Term::sum_of(rest))
}

/// The contractum of `r` applied to the subterm `sub` it addresses.
pub fn contract(sub: &Term, r: &Redex) -> Result<Term, ReductionError> {
    let stale = || ReductionError::StaleRedex(r.to_string());
    match (r.rule, sub) {
        (Rule::DistRight, Term::App(f, s)) => match &**f {
            Term::Sum(ts) if r.choice < ts.len() => {
                let (one, rest) = split_sum(ts, r.choice);
                Ok(Term::plus(Term::app(one, (**s).clone()), Term::app(rest, (**s).clone())))
            }
            _ => Err(stale()),
        },
        (Rule::DistLeft, Term::App(t, a)) => match &**a {
            Term::Sum(ts) if r.choice < ts.len() => {
                let (one, rest) = split_sum(ts, r.choice);
                Ok(Term::plus(Term::app((**t).clone(), one), Term::app((**t).clone(), rest)))
            }
            _ => Err(stale()),
        },
        (Rule::ZeroFun, Term::App(f, _)) if **f == Term::Zero => Ok(Term::Zero),
        (Rule::ZeroArg, Term::App(_, a)) if **a == Term::Zero => Ok(Term::Zero),
        (Rule::SumZero, Term::Sum(ts)) if ts.get(r.choice) == Some(&Term::Zero) => {
            let (_, rest) = split_sum(ts, r.choice);
            Ok(rest)
        }
        (Rule::Beta, Term::App(f, v)) if v.is_value() => match &**f {
            Term::Abs(_, body) => Ok(body.instantiate(v)),
            _ => Err(stale()),
        },
        _ => Err(stale()),
    }
}

/// Performs one reduction step; the result is canonical.
pub fn step(t: &Term, r: &Redex) -> Result<Term, ReductionError> {
    let sub = t.at(&r.path.0).ok_or_else(|| ReductionError::StaleRedex(r.to_string()))?;
    let new = contract(sub, r)?;
    t.replace_at(&r.path.0, new).ok_or_else(|| ReductionError::StaleRedex(r.to_string()))
}

/// The one-step reducts of `t`, deduplicated up to AC.
pub fn reducts(t: &Term) -> BTreeSet<Term> {
    enumerate_redexes(t).iter().filter_map(|r| step(t, r).ok()).collect()
}

/// The redex the deterministic strategy contracts next: innermost-leftmost,
/// distributivity before the zero rules before `t + 0 -> t` before beta.
pub fn strategy_redex(t: &Term) -> Option<Redex> {
    let all = enumerate_redexes(t);
    let best = all.iter().map(|r| r.rule.priority()).min()?;
    all.into_iter().find(|r| r.rule.priority() == best)
}

/// One line of a reduction trace.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub redex: Redex,
    pub before: Term,
    pub after: Term,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {} : {} ==> {}", self.redex.rule, self.redex.path, self.before, self.after)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    Normal { term: Term, steps: usize },
    FuelExhausted { term: Term, steps: usize },
}

impl Normalized {
    pub fn term(&self) -> &Term {
        match self {
            Normalized::Normal { term, .. } | Normalized::FuelExhausted { term, .. } => term,
        }
    }
}

pub fn normalize(t: &Term, fuel: usize) -> Normalized {
    normalize_traced(t, fuel, &mut |_| {})
}

/// Normalises with the deterministic strategy, reporting each step.
pub fn normalize_traced(t: &Term, fuel: usize, on_step: &mut dyn FnMut(&TraceStep)) -> Normalized {
    let mut cur = t.canonicalize();
    for steps in 0..fuel {
        let Some(r) = strategy_redex(&cur) else {
            return Normalized::Normal { term: cur, steps };
        };
        let next = step(&cur, &r).expect("strategy redexes are never stale");
        on_step(&TraceStep { redex: r, before: cur, after: next.clone() });
        cur = next;
    }
    if strategy_redex(&cur).is_none() {
        Normalized::Normal { term: cur, steps: fuel }
    } else {
        Normalized::FuelExhausted { term: cur, steps: fuel }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnOutcome {
    /// The reduction graph is finite; `max_depth` is the longest path length.
    Terminates { max_depth: usize, states: usize, normal_forms: BTreeSet<Term> },
    /// The search visited `states` terms without closing the graph. `cycle`
    /// records that a term reduces back to itself.
    BudgetExhausted { states: usize, cycle: bool },
}

impl SnOutcome {
    pub fn terminates(&self) -> bool {
        matches!(self, SnOutcome::Terminates { .. })
    }
}

/// Exhaustive memoised search of the reduction graph of `t`.
pub fn check_sn(t: &Term, budget: usize) -> SnOutcome {
    struct Search {
        depth: HashMap<Term, usize>,
        on_stack: HashSet<Term>,
        normal_forms: BTreeSet<Term>,
        budget: usize,
        cycle: bool,
    }
    impl Search {
        fn visit(&mut self, t: &Term) -> Option<usize> {
            if let Some(d) = self.depth.get(t) {
                return Some(*d);
            }
            if self.on_stack.contains(t) {
                self.cycle = true;
                return None;
            }
            if self.depth.len() + self.on_stack.len() >= self.budget {
                return None;
            }
            self.on_stack.insert(t.clone());
            let mut best = 0;
            let next = reducts(t);
            if next.is_empty() {
                self.normal_forms.insert(t.clone());
            }
            for u in &next {
                best = best.max(1 + self.visit(u)?);
            }
            self.on_stack.remove(t);
            self.depth.insert(t.clone(), best);
            Some(best)
        }
    }
    let mut s =
        Search { depth: HashMap::new(), on_stack: HashSet::new(), normal_forms: BTreeSet::new(), budget, cycle: false };
    let t = t.canonicalize();
    match s.visit(&t) {
        Some(max_depth) => SnOutcome::Terminates { max_depth, states: s.depth.len(), normal_forms: s.normal_forms },
        None => SnOutcome::BudgetExhausted { states: s.depth.len() + s.on_stack.len(), cycle: s.cycle },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn id() -> Term {
        Term::lam("x", v("x"))
    }
    fn delta() -> Term {
        Term::lam("x", Term::app(v("x"), v("x")))
    }

    #[test]
    fn delta_on_a_sum_has_one_distributivity_redex_and_no_beta() {
        let t = Term::app(delta(), Term::plus(v("a"), v("b")));
        let rs = enumerate_redexes(&t);
        assert_eq!(rs.iter().filter(|r| r.rule == Rule::DistLeft).count(), 1);
        assert_eq!(rs.iter().filter(|r| r.rule == Rule::Beta).count(), 0);
    }

    #[test]
    fn delta_copies_each_summand() {
        let t = Term::app(delta(), Term::plus(v("a"), v("b")));
        let nf = normalize(&t, 100);
        let expected = Term::plus(Term::app(v("a"), v("a")), Term::app(v("b"), v("b")));
        assert_eq!(nf, Normalized::Normal { term: expected, steps: 3 });
    }

    #[test]
    fn simple_redexes() {
        assert_eq!(enumerate_redexes(&Term::app(id(), Term::lam("y", v("y")))).len(), 1);
        let t = Term::plus(v("t"), Term::Zero);
        let rs = enumerate_redexes(&t);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].rule, Rule::SumZero);
        assert_eq!(step(&t, &rs[0]).unwrap(), v("t"));
        let z = Term::app(Term::Zero, v("t"));
        assert_eq!(reducts(&z), BTreeSet::from([Term::Zero]));
    }

    #[test]
    fn identity_on_a_sum_distributes() {
        let t = Term::app(id(), Term::plus(v("a"), v("b")));
        let r = enumerate_redexes(&t).into_iter().find(|r| r.rule == Rule::DistLeft).unwrap();
        let expected = Term::plus(Term::app(id(), v("a")), Term::app(id(), v("b")));
        assert_eq!(step(&t, &r).unwrap(), expected);
    }

    #[test]
    fn normal_forms_have_no_reducts() {
        assert!(reducts(&Term::Zero).is_empty());
        assert!(reducts(&v("x")).is_empty());
    }

    #[test]
    fn all_splits_collapse_to_one_reduct() {
        // oracle: every nontrivial bipartition of {t, u} applied to s
        let t = Term::app(Term::plus(v("t"), v("u")), v("s"));
        let brute: BTreeSet<Term> = [(v("t"), v("u")), (v("u"), v("t"))]
            .into_iter()
            .map(|(a, b)| Term::plus(Term::app(a, v("s")), Term::app(b, v("s"))))
            .collect();
        assert_eq!(reducts(&t), brute);
        assert_eq!(brute.len(), 1);
    }

    #[test]
    fn stale_redexes_are_rejected() {
        let r = Redex { path: Path::default(), rule: Rule::Beta, choice: 0 };
        assert!(step(&v("x"), &r).is_err());
    }

    #[test]
    fn omega_diverges() {
        let omega = Term::app(delta(), delta());
        assert!(matches!(normalize(&omega, 50), Normalized::FuelExhausted { .. }));
        assert!(matches!(check_sn(&omega, 1000), SnOutcome::BudgetExhausted { cycle: true, .. }));
    }

    #[test]
    fn zero_plus_identity_normalises() {
        let t = Term::plus(Term::Zero, id());
        assert_eq!(normalize(&t, 10).term(), &id());
    }

    #[test]
    fn sn_depths() {
        assert!(matches!(check_sn(&Term::Zero, 10), SnOutcome::Terminates { max_depth: 0, .. }));
        let t = Term::app(id(), Term::lam("y", v("y")));
        assert!(matches!(check_sn(&t, 10), SnOutcome::Terminates { max_depth: 1, .. }));
        // oracle by hand: d(a+b) -> da+db -> aa+db -> aa+bb and symmetrically; no longer path
        let t = Term::app(delta(), Term::plus(v("a"), v("b")));
        assert!(matches!(check_sn(&t, 100), SnOutcome::Terminates { max_depth: 3, states: 5, .. }));
    }

    #[test]
    fn beta_under_a_binder_respects_outer_variables() {
        // \a. (\b. b a) a  ->  \a. a a
        let t = Term::lam("a", Term::app(Term::lam("b", Term::app(v("b"), v("a"))), v("a")));
        let nf = normalize(&t, 10);
        assert_eq!(nf.term(), &Term::lam("a", Term::app(v("a"), v("a"))));
    }
}
