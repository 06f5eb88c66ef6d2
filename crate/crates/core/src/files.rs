//! JSON files holding derivations of the three systems.
//!
//! Only the root records its context, subject, and type; inner conclusions
//! are recomputed from the rule nodes and the root is checked against them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{AddDerivation, AddRule, ArrowElim};
use crate::parse::{self, ParseError};
use crate::sadd::{SaddDerivation, SaddRule, StructElim};
use crate::syntax::{Term, Var};
use crate::systemf::{FContext, FDerivation, FRule, FTerm};
use crate::types::{Context, Type};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {field}: {source}")]
    Syntax { field: String, source: ParseError },
    #[error("{0}")]
    Shape(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "camelCase")]
pub enum AddNode {
    Ax {
        var: String,
    },
    Ax0,
    Equiv {
        #[serde(rename = "type")]
        ty: String,
        premise: Box<AddNode>,
    },
    ArrI {
        var: String,
        dom: String,
        premise: Box<AddNode>,
    },
    ArrE {
        vars: Vec<String>,
        unit: String,
        results: Vec<String>,
        insts: Vec<Vec<String>>,
        fun: Box<AddNode>,
        arg: Box<AddNode>,
    },
    PlusI {
        left: Box<AddNode>,
        right: Box<AddNode>,
    },
    ForallI {
        var: String,
        premise: Box<AddNode>,
    },
    ForallE {
        inst: String,
        premise: Box<AddNode>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "camelCase")]
pub enum SaddNode {
    Ax {
        var: String,
    },
    Ax0,
    ArrI {
        var: String,
        dom: String,
        premise: Box<SaddNode>,
    },
    StructArrE {
        fun_tree: String,
        arg_tree: String,
        vars: Vec<String>,
        unit: String,
        results: BTreeMap<String, String>,
        insts: BTreeMap<String, Vec<String>>,
        fun: Box<SaddNode>,
        arg: Box<SaddNode>,
    },
    PlusI {
        left: Box<SaddNode>,
        right: Box<SaddNode>,
    },
    ForallI {
        var: String,
        premise: Box<SaddNode>,
    },
    ForallE {
        inst: String,
        premise: Box<SaddNode>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "camelCase")]
pub enum FNode {
    Ax { var: String },
    Unit,
    ArrI { var: String, dom: String, premise: Box<FNode> },
    ArrE { fun: Box<FNode>, arg: Box<FNode> },
    ProdI { left: Box<FNode>, right: Box<FNode> },
    ProdEl { premise: Box<FNode> },
    ProdEr { premise: Box<FNode> },
    ForallI { var: String, premise: Box<FNode> },
    ForallE { inst: String, premise: Box<FNode> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Root<N> {
    pub ctx: BTreeMap<String, String>,
    pub term: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub proof: N,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum ProofFile {
    Add(Root<AddNode>),
    Sadd(Root<SaddNode>),
    F(Root<FNode>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Proof {
    Add(AddDerivation),
    Sadd(SaddDerivation),
    F(FDerivation),
}

fn word_out(w: &str) -> String {
    if w.is_empty() {
        "eps".into()
    } else {
        w.to_string()
    }
}

fn word_in(w: &str) -> String {
    if w == "eps" {
        String::new()
    } else {
        w.to_string()
    }
}

fn strs(ts: &[Type]) -> Vec<String> {
    ts.iter().map(Type::to_string).collect()
}

fn var_name(t: &Term) -> String {
    match t {
        Term::Var(Var::Free(x)) => x.clone(),
        other => other.to_string(),
    }
}

fn root<N>(ctx: &BTreeMap<String, String>, term: String, ty: String, proof: N) -> Root<N> {
    Root { ctx: ctx.clone(), term, ty, proof }
}

pub fn add_to_file(d: &AddDerivation) -> ProofFile {
    fn node(d: &AddDerivation) -> AddNode {
        let p = |k: usize| Box::new(node(&d.premises[k]));
        match &d.rule {
            AddRule::Ax => AddNode::Ax { var: var_name(&d.term) },
            AddRule::Ax0 => AddNode::Ax0,
            AddRule::Equiv => AddNode::Equiv { ty: d.ty.to_string(), premise: p(0) },
            AddRule::ArrI { var } => AddNode::ArrI {
                var: var.clone(),
                dom: d.premises[0].ctx.get(var).map(Type::to_string).unwrap_or_default(),
                premise: p(0),
            },
            AddRule::ArrE(w) => AddNode::ArrE {
                vars: w.binders.clone(),
                unit: w.unit.to_string(),
                results: strs(&w.results),
                insts: w.insts.iter().map(|r| strs(r)).collect(),
                fun: p(0),
                arg: p(1),
            },
            AddRule::PlusI => AddNode::PlusI { left: p(0), right: p(1) },
            AddRule::ForallI { var } => AddNode::ForallI { var: var.clone(), premise: p(0) },
            AddRule::ForallE { inst } => AddNode::ForallE { inst: inst.to_string(), premise: p(0) },
        }
    }
    let ctx = d.ctx.iter().map(|(x, u)| (x.clone(), u.to_string())).collect();
    ProofFile::Add(root(&ctx, d.term.to_string(), d.ty.to_string(), node(d)))
}

pub fn sadd_to_file(d: &SaddDerivation) -> ProofFile {
    fn node(d: &SaddDerivation) -> SaddNode {
        let p = |k: usize| Box::new(node(&d.premises[k]));
        match &d.rule {
            SaddRule::Ax => SaddNode::Ax { var: var_name(&d.term) },
            SaddRule::Ax0 => SaddNode::Ax0,
            SaddRule::ArrI { var } => SaddNode::ArrI {
                var: var.clone(),
                dom: d.premises[0].ctx.get(var).map(Type::to_string).unwrap_or_default(),
                premise: p(0),
            },
            SaddRule::StructArrE(w) => SaddNode::StructArrE {
                fun_tree: w.fun_tree.to_string(),
                arg_tree: w.arg_tree.to_string(),
                vars: w.binders.clone(),
                unit: w.unit.to_string(),
                results: w.results.iter().map(|(k, t)| (word_out(k), t.to_string())).collect(),
                insts: w.insts.iter().map(|(k, r)| (word_out(k), strs(r))).collect(),
                fun: p(0),
                arg: p(1),
            },
            SaddRule::PlusI => SaddNode::PlusI { left: p(0), right: p(1) },
            SaddRule::ForallI { var } => SaddNode::ForallI { var: var.clone(), premise: p(0) },
            SaddRule::ForallE { inst } => SaddNode::ForallE { inst: inst.to_string(), premise: p(0) },
        }
    }
    let ctx = d.ctx.iter().map(|(x, u)| (x.clone(), u.to_string())).collect();
    ProofFile::Sadd(root(&ctx, d.term.to_string(), d.ty.to_string(), node(d)))
}

pub fn f_to_file(d: &FDerivation) -> ProofFile {
    fn node(d: &FDerivation) -> FNode {
        let p = |k: usize| Box::new(node(&d.premises[k]));
        match &d.rule {
            FRule::Ax => FNode::Ax {
                var: match &d.term {
                    FTerm::Var(Var::Free(x)) => x.clone(),
                    other => other.to_string(),
                },
            },
            FRule::UnitI => FNode::Unit,
            FRule::ArrI { var } => FNode::ArrI {
                var: var.clone(),
                dom: d.premises[0].ctx.get(var).map(ToString::to_string).unwrap_or_default(),
                premise: p(0),
            },
            FRule::ArrE => FNode::ArrE { fun: p(0), arg: p(1) },
            FRule::ProdI => FNode::ProdI { left: p(0), right: p(1) },
            FRule::ProdEl => FNode::ProdEl { premise: p(0) },
            FRule::ProdEr => FNode::ProdEr { premise: p(0) },
            FRule::ForallI { var } => FNode::ForallI { var: var.clone(), premise: p(0) },
            FRule::ForallE { inst } => FNode::ForallE { inst: inst.to_string(), premise: p(0) },
        }
    }
    let ctx = d.ctx.iter().map(|(x, a)| (x.clone(), a.to_string())).collect();
    ProofFile::F(root(&ctx, d.term.to_string(), d.ty.to_string(), node(d)))
}

pub fn to_json(f: &ProofFile) -> String {
    serde_json::to_string_pretty(f).expect("plain data")
}

fn field<T>(name: &str, r: Result<T, ParseError>) -> Result<T, FileError> {
    r.map_err(|source| FileError::Syntax { field: name.to_string(), source })
}

fn ty(name: &str, s: &str) -> Result<Type, FileError> {
    field(name, parse::parse_type(s))
}

fn tys(name: &str, ss: &[String]) -> Result<Vec<Type>, FileError> {
    ss.iter().map(|s| ty(name, s)).collect()
}

fn build_add(n: &AddNode, ctx: &Context) -> Result<AddDerivation, FileError> {
    Ok(match n {
        AddNode::Ax { var } => {
            AddDerivation::ax(ctx, var).ok_or_else(|| FileError::Shape(format!("`{var}` is not in the context")))?
        }
        AddNode::Ax0 => AddDerivation::ax0(ctx),
        AddNode::Equiv { ty: t, premise } => AddDerivation::equiv(ty("equiv type", t)?, build_add(premise, ctx)?),
        AddNode::ArrI { var, dom, premise } => {
            let inner =
                ctx.extend(var.clone(), ty("binder type", dom)?).map_err(|e| FileError::Shape(e.to_string()))?;
            AddDerivation::arr_i(var, build_add(premise, &inner)?)
        }
        AddNode::ArrE { vars, unit, results, insts, fun, arg } => {
            let w = ArrowElim {
                binders: vars.clone(),
                unit: ty("unit", unit)?,
                results: tys("results", results)?,
                insts: insts.iter().map(|r| tys("insts", r)).collect::<Result<_, _>>()?,
            };
            AddDerivation::arr_e(w, build_add(fun, ctx)?, build_add(arg, ctx)?)
        }
        AddNode::PlusI { left, right } => AddDerivation::plus_i(build_add(left, ctx)?, build_add(right, ctx)?),
        AddNode::ForallI { var, premise } => AddDerivation::forall_i(var, build_add(premise, ctx)?),
        AddNode::ForallE { inst, premise } => AddDerivation::forall_e(ty("inst", inst)?, build_add(premise, ctx)?),
    })
}

fn build_sadd(n: &SaddNode, ctx: &Context) -> Result<SaddDerivation, FileError> {
    Ok(match n {
        SaddNode::Ax { var } => {
            SaddDerivation::ax(ctx, var).ok_or_else(|| FileError::Shape(format!("`{var}` is not in the context")))?
        }
        SaddNode::Ax0 => SaddDerivation::ax0(ctx),
        SaddNode::ArrI { var, dom, premise } => {
            let inner =
                ctx.extend(var.clone(), ty("binder type", dom)?).map_err(|e| FileError::Shape(e.to_string()))?;
            SaddDerivation::arr_i(var, build_sadd(premise, &inner)?)
        }
        SaddNode::StructArrE { fun_tree, arg_tree, vars, unit, results, insts, fun, arg } => {
            let w = StructElim {
                fun_tree: field("fun_tree", parse::parse_tree(fun_tree))?,
                arg_tree: field("arg_tree", parse::parse_tree(arg_tree))?,
                binders: vars.clone(),
                unit: ty("unit", unit)?,
                results: results
                    .iter()
                    .map(|(k, t)| Ok((word_in(k), ty("results", t)?)))
                    .collect::<Result<_, FileError>>()?,
                insts: insts
                    .iter()
                    .map(|(k, r)| Ok((word_in(k), tys("insts", r)?)))
                    .collect::<Result<_, FileError>>()?,
            };
            SaddDerivation::struct_arr_e(w, build_sadd(fun, ctx)?, build_sadd(arg, ctx)?)
        }
        SaddNode::PlusI { left, right } => SaddDerivation::plus_i(build_sadd(left, ctx)?, build_sadd(right, ctx)?),
        SaddNode::ForallI { var, premise } => SaddDerivation::forall_i(var, build_sadd(premise, ctx)?),
        SaddNode::ForallE { inst, premise } => SaddDerivation::forall_e(ty("inst", inst)?, build_sadd(premise, ctx)?),
    })
}

fn build_f(n: &FNode, ctx: &FContext) -> Result<FDerivation, FileError> {
    let fty = |name: &str, s: &str| field(name, parse::parse_ftype(s));
    Ok(match n {
        FNode::Ax { var } => {
            FDerivation::ax(ctx, var).ok_or_else(|| FileError::Shape(format!("`{var}` is not in the context")))?
        }
        FNode::Unit => FDerivation::unit(ctx),
        FNode::ArrI { var, dom, premise } => {
            let inner = ctx
                .extend(var.clone(), fty("binder type", dom)?)
                .ok_or_else(|| FileError::Shape(format!("`{var}` is already declared")))?;
            FDerivation::arr_i(var, build_f(premise, &inner)?)
        }
        FNode::ArrE { fun, arg } => FDerivation::arr_e(build_f(fun, ctx)?, build_f(arg, ctx)?),
        FNode::ProdI { left, right } => FDerivation::prod_i(build_f(left, ctx)?, build_f(right, ctx)?),
        FNode::ProdEl { premise } => FDerivation::proj_l(build_f(premise, ctx)?),
        FNode::ProdEr { premise } => FDerivation::proj_r(build_f(premise, ctx)?),
        FNode::ForallI { var, premise } => FDerivation::forall_i(var, build_f(premise, ctx)?),
        FNode::ForallE { inst, premise } => FDerivation::forall_e(fty("inst", inst)?, build_f(premise, ctx)?),
    })
}

fn mismatch(what: &str, declared: &str, built: String) -> FileError {
    FileError::Shape(format!("declared {what} `{declared}` differs from the derived `{built}`"))
}

/// Rebuilds a derivation; the declared root conclusion must match exactly.
pub fn from_file(f: &ProofFile) -> Result<Proof, FileError> {
    match f {
        ProofFile::Add(r) => {
            let ctx = source_context(&r.ctx)?;
            let d = build_add(&r.proof, &ctx)?;
            check_root(&d.term, &d.ty, &r.term, &r.ty)?;
            Ok(Proof::Add(d))
        }
        ProofFile::Sadd(r) => {
            let ctx = source_context(&r.ctx)?;
            let d = build_sadd(&r.proof, &ctx)?;
            check_root(&d.term, &d.ty, &r.term, &r.ty)?;
            Ok(Proof::Sadd(d))
        }
        ProofFile::F(r) => {
            let mut ctx = FContext::new();
            for (x, a) in &r.ctx {
                let a = field(&format!("context entry {x}"), parse::parse_ftype(a))?;
                ctx = ctx.extend(x.clone(), a).expect("map keys are distinct");
            }
            let d = build_f(&r.proof, &ctx)?;
            let term = field("term", parse::parse_fterm(&r.term))?;
            let t = field("type", parse::parse_ftype(&r.ty))?;
            if d.term != term {
                return Err(mismatch("term", &r.term, d.term.to_string()));
            }
            if d.ty != t {
                return Err(mismatch("type", &r.ty, d.ty.to_string()));
            }
            Ok(Proof::F(d))
        }
    }
}

fn source_context(m: &BTreeMap<String, String>) -> Result<Context, FileError> {
    let pairs = m
        .iter()
        .map(|(x, u)| Ok((x.clone(), ty(&format!("context entry {x}"), u)?)))
        .collect::<Result<Vec<_>, FileError>>()?;
    Context::from_pairs(pairs).map_err(|e| FileError::Shape(e.to_string()))
}

fn check_root(term: &Term, t: &Type, declared_term: &str, declared_ty: &str) -> Result<(), FileError> {
    if *term != field("term", parse::parse_term(declared_term))? {
        return Err(mismatch("term", declared_term, term.to_string()));
    }
    if *t != ty("type", declared_ty)? {
        return Err(mismatch("type", declared_ty, t.to_string()));
    }
    Ok(())
}

pub fn read_proof(text: &str) -> Result<Proof, FileError> {
    from_file(&serde_json::from_str(text)?)
}

pub fn write_proof(p: &Proof) -> String {
    to_json(&match p {
        Proof::Add(d) => add_to_file(d),
        Proof::Sadd(d) => sadd_to_file(d),
        Proof::F(d) => f_to_file(d),
    })
}
