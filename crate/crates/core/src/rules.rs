//! Rewrite-rule generators: binary operations, multi-arity relations, the
//! `alpha_Q` construction, and equivariance under permutation actions.
//!
//! Every rule is stored relationally. A binary operation `op` lifts to the
//! `(1, 2)`-ary relation `{(op(x, x'), x, x')}`; applying that relation in both
//! directions is exactly the contraction/expansion pair for `op`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::action::{Perm, PermAction};
use crate::carrier::{Carrier, CarrierKind, Elem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinOp {
    /// First projection.
    Lambda,
    /// Second projection.
    Rho,
    Min,
    Max,
    /// Addition modulo p.
    Add,
}

impl FromStr for BuiltinOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(BuiltinOp::Lambda),
            "rho" => Ok(BuiltinOp::Rho),
            "min" => Ok(BuiltinOp::Min),
            "max" => Ok(BuiltinOp::Max),
            "add" => Ok(BuiltinOp::Add),
            other => Err(Error::Parse(format!(
                "unknown builtin operation `{other}` (expected lambda, rho, min, max, add)"
            ))),
        }
    }
}

impl fmt::Display for BuiltinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuiltinOp::Lambda => "lambda",
            BuiltinOp::Rho => "rho",
            BuiltinOp::Min => "min",
            BuiltinOp::Max => "max",
            BuiltinOp::Add => "add",
        })
    }
}

/// A total binary operation on a carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryOp {
    carrier: Arc<Carrier>,
    name: String,
    table: Vec<Elem>,
}

impl BinaryOp {
    /// Row-major table: `table[a * n + b] = op(a, b)`.
    pub fn from_table(
        carrier: Arc<Carrier>,
        name: impl Into<String>,
        table: Vec<Elem>,
    ) -> Result<Self> {
        let n = carrier.len();
        if table.len() != n * n {
            return Err(Error::Invalid(format!(
                "operation table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        if let Some(&v) = table.iter().find(|&&v| v as usize >= n) {
            return Err(Error::Invalid(format!(
                "operation table entry {v} is not an element"
            )));
        }
        Ok(BinaryOp {
            carrier,
            name: name.into(),
            table,
        })
    }

    pub fn from_fn(
        carrier: Arc<Carrier>,
        name: impl Into<String>,
        f: impl Fn(Elem, Elem) -> Elem,
    ) -> Result<Self> {
        let table = carrier
            .elements()
            .flat_map(|a| carrier.elements().map(move |b| (a, b)))
            .map(|(a, b)| f(a, b))
            .collect();
        BinaryOp::from_table(carrier, name, table)
    }

    pub fn builtin(which: BuiltinOp, carrier: Arc<Carrier>) -> Result<Self> {
        let name = which.to_string();
        match which {
            BuiltinOp::Lambda => BinaryOp::from_fn(carrier, name, |a, _| a),
            BuiltinOp::Rho => BinaryOp::from_fn(carrier, name, |_, b| b),
            BuiltinOp::Min => {
                let c = carrier.clone();
                if !matches!(c.kind(), CarrierKind::Chain | CarrierKind::Lattice) {
                    return Err(Error::MissingStructure(format!(
                        "min needs a chain or lattice, found {}",
                        c.kind()
                    )));
                }
                BinaryOp::from_fn(carrier, name, move |a, b| {
                    c.meet(a, b).expect("ordered carrier has a meet")
                })
            }
            BuiltinOp::Max => {
                if !matches!(carrier.kind(), CarrierKind::Chain | CarrierKind::Lattice) {
                    return Err(Error::MissingStructure(format!(
                        "max needs a chain or lattice, found {}",
                        carrier.kind()
                    )));
                }
                let dual = carrier.dual()?;
                BinaryOp::from_fn(carrier, name, move |a, b| {
                    dual.meet(a, b).expect("dual has a meet")
                })
            }
            BuiltinOp::Add => {
                let p = match (carrier.kind(), carrier.modulus()) {
                    (CarrierKind::ModRing, Some(p)) => p,
                    _ => {
                        return Err(Error::MissingStructure(format!(
                            "add needs a modring carrier, found {}",
                            carrier.kind()
                        )))
                    }
                };
                BinaryOp::from_fn(carrier, name, move |a, b| {
                    ((a as usize + b as usize) % p) as Elem
                })
            }
        }
    }

    #[inline]
    pub fn apply(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.carrier.len() + b as usize]
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// A relation `A ⊆ X^n × X^m` used as a rewrite rule: `n` same-fiber pairs with
/// the left components may be replaced by `m` pairs with the right components,
/// and vice versa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalRule {
    carrier: Arc<Carrier>,
    name: String,
    left_arity: usize,
    right_arity: usize,
    tuples: BTreeSet<Vec<Elem>>,
    source: Option<BinaryOp>,
}

impl RelationalRule {
    pub fn new(
        carrier: Arc<Carrier>,
        name: impl Into<String>,
        left_arity: usize,
        right_arity: usize,
        tuples: impl IntoIterator<Item = Vec<Elem>>,
    ) -> Result<Self> {
        if left_arity == 0 || right_arity == 0 {
            return Err(Error::Invalid("rule arities must be at least 1".into()));
        }
        let n = carrier.len();
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != left_arity + right_arity {
                return Err(Error::Invalid(format!(
                    "tuple {t:?} has length {}, expected {}",
                    t.len(),
                    left_arity + right_arity
                )));
            }
            if let Some(&v) = t.iter().find(|&&v| v as usize >= n) {
                return Err(Error::Invalid(format!("tuple entry {v} is not an element")));
            }
            set.insert(t);
        }
        Ok(RelationalRule {
            carrier,
            name: name.into(),
            left_arity,
            right_arity,
            tuples: set,
            source: None,
        })
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn left_arity(&self) -> usize {
        self.left_arity
    }

    pub fn right_arity(&self) -> usize {
        self.right_arity
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<Elem>> {
        &self.tuples
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        self.tuples.contains(tuple)
    }

    /// The binary operation this rule was lifted from, if any.
    pub fn source_op(&self) -> Option<&BinaryOp> {
        self.source.as_ref()
    }
}

/// Lifts `op` to the relation `{(op(x, x'), x, x')}` with arities `(1, 2)`.
pub fn lift_binary_op(op: &BinaryOp) -> RelationalRule {
    let c = op.carrier();
    let tuples: BTreeSet<Vec<Elem>> = c
        .elements()
        .flat_map(|a| c.elements().map(move |b| (a, b)))
        .map(|(a, b)| vec![op.apply(a, b), a, b])
        .collect();
    RelationalRule {
        carrier: c.clone(),
        name: op.name().to_string(),
        left_arity: 1,
        right_arity: 2,
        tuples,
        source: Some(op.clone()),
    }
}

/// `{(x, x', x'') : 2x = x' + x'' (mod p)}` on an odd modular ring.
pub fn midpoint_relation(carrier: Arc<Carrier>) -> Result<RelationalRule> {
    carrier.require_odd_modulus()?;
    let mut tuples = Vec::new();
    for a in carrier.elements() {
        for b in carrier.elements() {
            tuples.push(vec![carrier.midpoint(a, b)?, a, b]);
        }
    }
    RelationalRule::new(carrier, "midpoint", 1, 2, tuples)
}

/// Rule families over both factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSystem {
    x: Arc<Carrier>,
    y: Arc<Carrier>,
    x_rules: Vec<RelationalRule>,
    y_rules: Vec<RelationalRule>,
}

impl RuleSystem {
    pub fn new(
        x: Arc<Carrier>,
        y: Arc<Carrier>,
        x_rules: Vec<RelationalRule>,
        y_rules: Vec<RelationalRule>,
    ) -> Result<Self> {
        if x_rules.is_empty() || y_rules.is_empty() {
            return Err(Error::Invalid("both rule families must be nonempty".into()));
        }
        if let Some(r) = x_rules.iter().find(|r| !r.carrier().same_as(&x)) {
            return Err(Error::CarrierMismatch(format!(
                "x-rule `{}` is not over X",
                r.name()
            )));
        }
        if let Some(r) = y_rules.iter().find(|r| !r.carrier().same_as(&y)) {
            return Err(Error::CarrierMismatch(format!(
                "y-rule `{}` is not over Y",
                r.name()
            )));
        }
        Ok(RuleSystem {
            x,
            y,
            x_rules,
            y_rules,
        })
    }

    /// Convenience: one lifted binary operation per factor.
    pub fn from_ops(alpha: &BinaryOp, beta: &BinaryOp) -> Result<Self> {
        RuleSystem::new(
            alpha.carrier().clone(),
            beta.carrier().clone(),
            vec![lift_binary_op(alpha)],
            vec![lift_binary_op(beta)],
        )
    }

    pub fn x(&self) -> &Arc<Carrier> {
        &self.x
    }

    pub fn y(&self) -> &Arc<Carrier> {
        &self.y
    }

    pub fn x_rules(&self) -> &[RelationalRule] {
        &self.x_rules
    }

    pub fn y_rules(&self) -> &[RelationalRule] {
        &self.y_rules
    }

    /// Tuple-wise inclusion: every `(arity, tuple)` of `self` occurs in `other`.
    pub fn is_subsystem_of(&self, other: &RuleSystem) -> bool {
        fn included(small: &[RelationalRule], big: &[RelationalRule]) -> bool {
            small.iter().all(|r| {
                r.tuples().iter().all(|t| {
                    big.iter().any(|b| {
                        b.left_arity() == r.left_arity()
                            && b.right_arity() == r.right_arity()
                            && b.contains(t)
                    })
                })
            })
        }
        self.x.same_as(&other.x)
            && self.y.same_as(&other.y)
            && included(&self.x_rules, &other.x_rules)
            && included(&self.y_rules, &other.y_rules)
    }
}

/// A relation `Q ⊆ X × X`, stored without its diagonal pairs: only `Q \ Δ`
/// affects `alpha_Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QRelation {
    carrier: Arc<Carrier>,
    pairs: BTreeSet<(Elem, Elem)>,
}

impl QRelation {
    pub fn new(
        carrier: Arc<Carrier>,
        pairs: impl IntoIterator<Item = (Elem, Elem)>,
    ) -> Result<Self> {
        let n = carrier.len();
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a as usize >= n || b as usize >= n {
                return Err(Error::Invalid(format!(
                    "pair ({a},{b}) is not over the carrier"
                )));
            }
            if a != b {
                set.insert((a, b));
            }
        }
        Ok(QRelation {
            carrier,
            pairs: set,
        })
    }

    /// `X × X`.
    pub fn full(carrier: Arc<Carrier>) -> Self {
        let pairs: Vec<_> = carrier
            .elements()
            .flat_map(|a| carrier.elements().map(move |b| (a, b)))
            .collect();
        QRelation::new(carrier, pairs).expect("pairs are in range")
    }

    pub fn empty(carrier: Arc<Carrier>) -> Self {
        QRelation {
            carrier,
            pairs: BTreeSet::new(),
        }
    }

    /// `{(x, x') : x <= x'}` on an ordered carrier.
    pub fn upper(carrier: Arc<Carrier>) -> Result<Self> {
        let mut pairs = Vec::new();
        for a in carrier.elements() {
            for b in carrier.elements() {
                let le = carrier.leq(a, b).ok_or_else(|| {
                    Error::MissingStructure("upper set needs an ordered carrier".into())
                })?;
                if le {
                    pairs.push((a, b));
                }
            }
        }
        QRelation::new(carrier, pairs)
    }

    /// Recovers `Q = {(x, x') : op(x, x') = x}` when `op` always returns one of
    /// its arguments; `None` otherwise.
    pub fn from_op(op: &BinaryOp) -> Option<Self> {
        let c = op.carrier();
        let mut pairs = Vec::new();
        for a in c.elements() {
            for b in c.elements() {
                let v = op.apply(a, b);
                if v == a {
                    pairs.push((a, b));
                } else if v != b {
                    return None;
                }
            }
        }
        Some(QRelation::new(c.clone(), pairs).expect("pairs are in range"))
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    /// Off-diagonal pairs.
    pub fn pairs(&self) -> &BTreeSet<(Elem, Elem)> {
        &self.pairs
    }

    /// `Q ∪ Δ`.
    pub fn with_diagonal(&self) -> BTreeSet<(Elem, Elem)> {
        let mut s = self.pairs.clone();
        s.extend(self.carrier.elements().map(|a| (a, a)));
        s
    }

    pub fn contains(&self, a: Elem, b: Elem) -> bool {
        a == b || self.pairs.contains(&(a, b))
    }
}

/// `alpha_Q(x, x') = x` if `(x, x') ∈ Q ∪ Δ`, else `x'`.
pub fn alpha_from_q(q: &QRelation) -> BinaryOp {
    BinaryOp::from_fn(q.carrier().clone(), "alpha_Q", |a, b| {
        if q.contains(a, b) {
            a
        } else {
            b
        }
    })
    .expect("alpha_Q stays inside the carrier")
}

/// Witness that an action does not preserve a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CompatibilityCounterexample {
    /// `op(g x, g x') != g op(x, x')`.
    Binary {
        g: Vec<Elem>,
        x: Elem,
        x2: Elem,
        lhs: Elem,
        rhs: Elem,
    },
    /// The componentwise image of `tuple` under `g` is not in the relation.
    Tuple {
        g: Vec<Elem>,
        tuple: Vec<Elem>,
        image: Vec<Elem>,
    },
}

impl fmt::Display for CompatibilityCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompatibilityCounterexample::Binary { g, x, x2, lhs, rhs } => write!(
                f,
                "g={g:?}, (x,x')=({x},{x2}): op(gx,gx')={lhs} but g·op(x,x')={rhs}"
            ),
            CompatibilityCounterexample::Tuple { g, tuple, image } => {
                write!(
                    f,
                    "g={g:?} maps tuple {tuple:?} to {image:?}, which is not in the relation"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Compatibility {
    Compatible,
    Incompatible {
        counterexample: CompatibilityCounterexample,
    },
}

impl Compatibility {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Compatibility::Compatible)
    }
}

/// Checks that every group element commutes with the rule.
///
/// For lifted binary operations this is `op(g x, g x') = g op(x, x')`. For
/// general relations it is componentwise preservation of tuples, which is an
/// extension of the binary notion and reduces to it on lifted operations.
pub fn compatibility_check(action: &PermAction, rule: &RelationalRule) -> Result<Compatibility> {
    if !action.carrier().same_as(rule.carrier()) {
        return Err(Error::CarrierMismatch(format!(
            "action is on {} but rule `{}` is on {}",
            action.carrier(),
            rule.name(),
            rule.carrier()
        )));
    }
    let c = rule.carrier();
    for g in action.elements() {
        if let Some(op) = rule.source_op() {
            for x in c.elements() {
                for x2 in c.elements() {
                    let lhs = op.apply(g.apply(x), g.apply(x2));
                    let rhs = g.apply(op.apply(x, x2));
                    if lhs != rhs {
                        return Ok(Compatibility::Incompatible {
                            counterexample: CompatibilityCounterexample::Binary {
                                g: g.images().to_vec(),
                                x,
                                x2,
                                lhs,
                                rhs,
                            },
                        });
                    }
                }
            }
        } else if let Some(cx) = first_unpreserved_tuple(g, rule) {
            return Ok(Compatibility::Incompatible { counterexample: cx });
        }
    }
    Ok(Compatibility::Compatible)
}

fn first_unpreserved_tuple(g: &Perm, rule: &RelationalRule) -> Option<CompatibilityCounterexample> {
    rule.tuples().iter().find_map(|t| {
        let image: Vec<Elem> = t.iter().map(|&e| g.apply(e)).collect();
        (!rule.contains(&image)).then(|| CompatibilityCounterexample::Tuple {
            g: g.images().to_vec(),
            tuple: t.clone(),
            image,
        })
    })
}
