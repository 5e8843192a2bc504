//! Generalized tensor products of finite sets.
//!
//! `X ⊗ Y` is built as the quotient of the free commutative word space over
//! `X × Y` by rewrite rules drawn from operations or relations on each factor.
//! This crate computes that quotient by bounded equality saturation, decides
//! entanglement (classes without a single-pair member), audits group actions
//! on the quotient, and provides exhaustive checkers for the closure and
//! `alpha_Q` characterizations on small carriers.

pub mod action;
pub mod canon;
pub mod carrier;
pub mod engine;
pub mod error;
mod par;
pub mod quotient;
pub mod rules;
pub mod structlab;
pub mod words;

pub use canon::{Canonicalizer, FamilyKind};
pub use carrier::{Carrier, CarrierKind, Elem};
pub use engine::{saturate, ClassIndex, SaturationOptions, Stability};
pub use error::{Error, Result};
pub use par::is_parallel;
pub use rules::{BinaryOp, BuiltinOp, QRelation, RelationalRule, RuleSystem};
pub use words::{Pair, Word, WordSpace};
