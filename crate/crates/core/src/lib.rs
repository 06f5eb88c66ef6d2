//! A workbench for the non-deterministic call-by-value lambda calculus with
//! sums: AC-canonical syntax, small-step reduction, the additive type system
//! and its structured variant, and a typed translation into System F with
//! pairs.

pub mod corpus;
pub mod derivation;
pub mod elaborate;
pub mod files;
pub mod parse;
pub mod reduction;
pub mod sadd;
pub mod suite;
pub mod syntax;
pub mod systemf;
pub mod transform;
pub mod translate;
pub mod types;
