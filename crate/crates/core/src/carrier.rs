//! Finite carriers with optional order, meet-semilattice, or modular structure.
//!
//! Elements are small integer indices into the label list. The label order is
//! the canonical enumeration order used for every tie-break in the crate.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of a carrier element.
pub type Elem = u8;

/// Largest supported carrier. Elements are stored as `u8`.
pub const MAX_CARRIER_SIZE: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CarrierKind {
    Plain,
    Chain,
    Lattice,
    #[serde(rename = "modring")]
    ModRing,
}

impl fmt::Display for CarrierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CarrierKind::Plain => "plain",
            CarrierKind::Chain => "chain",
            CarrierKind::Lattice => "lattice",
            CarrierKind::ModRing => "modring",
        };
        f.write_str(s)
    }
}

/// A structural invariant that a carrier fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum CarrierViolation {
    Empty,
    TooLarge {
        size: usize,
    },
    DuplicateLabel {
        label: String,
    },
    MissingTable {
        table: &'static str,
    },
    TableShape {
        table: &'static str,
        expected: usize,
        found: usize,
    },
    OutOfRange {
        table: &'static str,
        value: usize,
    },
    NotReflexive {
        a: Elem,
    },
    NotAntisymmetric {
        a: Elem,
        b: Elem,
    },
    NotTransitive {
        a: Elem,
        b: Elem,
        c: Elem,
    },
    NotTotal {
        a: Elem,
        b: Elem,
    },
    NotIdempotent {
        a: Elem,
    },
    NotCommutative {
        a: Elem,
        b: Elem,
    },
    NotAssociative {
        a: Elem,
        b: Elem,
        c: Elem,
    },
    MeetDisagreesWithOrder {
        a: Elem,
        b: Elem,
    },
    ModulusMismatch {
        modulus: usize,
        size: usize,
    },
}

impl fmt::Display for CarrierViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CarrierViolation::*;
        match self {
            Empty => write!(f, "carrier is empty"),
            TooLarge { size } => write!(
                f,
                "carrier has {size} elements, limit is {MAX_CARRIER_SIZE}"
            ),
            DuplicateLabel { label } => write!(f, "duplicate label `{label}`"),
            MissingTable { table } => write!(f, "{table} table is required for this kind"),
            TableShape {
                table,
                expected,
                found,
            } => {
                write!(f, "{table} table has {found} entries, expected {expected}")
            }
            OutOfRange { table, value } => {
                write!(f, "{table} table entry {value} is not an element")
            }
            NotReflexive { a } => write!(f, "order is not reflexive at ({a},{a})"),
            NotAntisymmetric { a, b } => write!(f, "order is not antisymmetric at ({a},{b})"),
            NotTransitive { a, b, c } => write!(f, "order is not transitive at ({a},{b},{c})"),
            NotTotal { a, b } => write!(f, "order is not total: {a} and {b} are incomparable"),
            NotIdempotent { a } => write!(f, "meet is not idempotent at {a}"),
            NotCommutative { a, b } => write!(f, "meet is not commutative at ({a},{b})"),
            NotAssociative { a, b, c } => write!(f, "meet is not associative at ({a},{b},{c})"),
            MeetDisagreesWithOrder { a, b } => {
                write!(f, "meet of ({a},{b}) is not the order minimum")
            }
            ModulusMismatch { modulus, size } => {
                write!(f, "modulus {modulus} differs from carrier size {size}")
            }
        }
    }
}

/// A finite carrier set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Carrier {
    labels: Vec<String>,
    kind: CarrierKind,
    /// Row-major `n * n`; `order[a * n + b]` means `a <= b`.
    order: Option<Vec<bool>>,
    /// Row-major `n * n` meet table.
    meet: Option<Vec<Elem>>,
    modulus: Option<usize>,
}

fn numeric_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize(
            "carrier must have at least one element".into(),
        ));
    }
    if n > MAX_CARRIER_SIZE {
        return Err(Error::InvalidSize(format!(
            "carrier has {n} elements, limit is {MAX_CARRIER_SIZE}"
        )));
    }
    Ok(())
}

impl Carrier {
    /// Assembles a carrier without checking any invariant. Use
    /// [`Carrier::validate`] to inspect the result.
    pub fn from_parts(
        labels: Vec<String>,
        kind: CarrierKind,
        order: Option<Vec<bool>>,
        meet: Option<Vec<Elem>>,
        modulus: Option<usize>,
    ) -> Carrier {
        Carrier {
            labels,
            kind,
            order,
            meet,
            modulus,
        }
    }

    pub fn plain(labels: Vec<String>) -> Result<Carrier> {
        let c = Carrier::from_parts(labels, CarrierKind::Plain, None, None, None);
        c.into_valid()
    }

    pub fn plain_sized(n: usize) -> Result<Carrier> {
        check_size(n)?;
        Carrier::plain(numeric_labels(n))
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Result<Carrier> {
        check_size(n)?;
        Carrier::chain_labeled(numeric_labels(n))
    }

    /// A chain ordered by label declaration order.
    pub fn chain_labeled(labels: Vec<String>) -> Result<Carrier> {
        let n = labels.len();
        check_size(n)?;
        let mut order = vec![false; n * n];
        let mut meet = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                order[a * n + b] = a <= b;
                meet[a * n + b] = a.min(b) as Elem;
            }
        }
        Carrier::from_parts(labels, CarrierKind::Chain, Some(order), Some(meet), None).into_valid()
    }

    /// A meet-semilattice given by its meet table (`meet[a][b]`). The order is
    /// derived as `a <= b` iff `meet(a, b) = a`.
    pub fn lattice(labels: Vec<String>, meet_rows: &[Vec<Elem>]) -> Result<Carrier> {
        let n = labels.len();
        check_size(n)?;
        if meet_rows.len() != n || meet_rows.iter().any(|r| r.len() != n) {
            return Err(Error::AxiomViolation(format!("meet table must be {n}x{n}")));
        }
        let meet: Vec<Elem> = meet_rows.iter().flatten().copied().collect();
        if let Some(&bad) = meet.iter().find(|&&v| v as usize >= n) {
            return Err(Error::AxiomViolation(format!(
                "meet table entry {bad} is not an element"
            )));
        }
        let order = (0..n * n).map(|i| meet[i] as usize == i / n).collect();
        Carrier::from_parts(labels, CarrierKind::Lattice, Some(order), Some(meet), None)
            .into_valid()
    }

    /// Residues modulo `p`; element `i` represents residue `i`.
    pub fn modring(p: usize) -> Result<Carrier> {
        check_size(p)?;
        Carrier::from_parts(numeric_labels(p), CarrierKind::ModRing, None, None, Some(p))
            .into_valid()
    }

    fn into_valid(self) -> Result<Carrier> {
        match self.validate().into_iter().next() {
            None => Ok(self),
            Some(v @ (CarrierViolation::Empty | CarrierViolation::TooLarge { .. })) => {
                Err(Error::InvalidSize(v.to_string()))
            }
            Some(v) => Err(Error::AxiomViolation(v.to_string())),
        }
    }

    /// Lists every violated structural invariant; empty iff the carrier is valid.
    pub fn validate(&self) -> Vec<CarrierViolation> {
        use CarrierViolation::*;
        let n = self.labels.len();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Empty);
            return out;
        }
        if n > MAX_CARRIER_SIZE {
            out.push(TooLarge { size: n });
            return out;
        }
        let mut seen = std::collections::HashSet::new();
        for l in &self.labels {
            if !seen.insert(l.as_str()) {
                out.push(DuplicateLabel { label: l.clone() });
            }
        }

        let order_ok = match &self.order {
            Some(o) if o.len() != n * n => {
                out.push(TableShape {
                    table: "order",
                    expected: n * n,
                    found: o.len(),
                });
                false
            }
            Some(_) => true,
            None => false,
        };
        let meet_ok = match &self.meet {
            Some(m) if m.len() != n * n => {
                out.push(TableShape {
                    table: "meet",
                    expected: n * n,
                    found: m.len(),
                });
                false
            }
            Some(m) => match m.iter().find(|&&v| v as usize >= n) {
                Some(&v) => {
                    out.push(OutOfRange {
                        table: "meet",
                        value: v as usize,
                    });
                    false
                }
                None => true,
            },
            None => false,
        };

        match self.kind {
            CarrierKind::Plain => {}
            CarrierKind::Chain => {
                if self.order.is_none() {
                    out.push(MissingTable { table: "order" });
                }
                if order_ok {
                    self.check_order(true, &mut out);
                }
            }
            CarrierKind::Lattice => {
                if self.meet.is_none() {
                    out.push(MissingTable { table: "meet" });
                }
                if meet_ok {
                    self.check_meet(&mut out);
                }
                if order_ok {
                    self.check_order(false, &mut out);
                }
            }
            CarrierKind::ModRing => match self.modulus {
                None => out.push(MissingTable { table: "modulus" }),
                Some(p) if p != n => out.push(ModulusMismatch {
                    modulus: p,
                    size: n,
                }),
                Some(_) => {}
            },
        }

        if order_ok && meet_ok && matches!(self.kind, CarrierKind::Chain | CarrierKind::Lattice) {
            let o = self.order.as_ref().unwrap();
            let m = self.meet.as_ref().unwrap();
            for a in 0..n {
                for b in 0..n {
                    let expected_min = if o[a * n + b] {
                        Some(a)
                    } else if o[b * n + a] {
                        Some(b)
                    } else {
                        None
                    };
                    let mab = m[a * n + b] as usize;
                    // meet must be a lower bound, and agree with the minimum when comparable
                    let lower = o[mab * n + a] && o[mab * n + b];
                    if !lower || expected_min.is_some_and(|e| e != mab) {
                        out.push(MeetDisagreesWithOrder {
                            a: a as Elem,
                            b: b as Elem,
                        });
                    }
                }
            }
        }
        out
    }

    fn check_order(&self, total: bool, out: &mut Vec<CarrierViolation>) {
        use CarrierViolation::*;
        let n = self.labels.len();
        let o = self.order.as_ref().unwrap();
        let le = |a: usize, b: usize| o[a * n + b];
        for a in 0..n {
            if !le(a, a) {
                out.push(NotReflexive { a: a as Elem });
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if le(a, b) && le(b, a) {
                    out.push(NotAntisymmetric {
                        a: a as Elem,
                        b: b as Elem,
                    });
                }
                if total && !le(a, b) && !le(b, a) {
                    out.push(NotTotal {
                        a: a as Elem,
                        b: b as Elem,
                    });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !le(a, b) {
                    continue;
                }
                for c in 0..n {
                    if le(b, c) && !le(a, c) {
                        out.push(NotTransitive {
                            a: a as Elem,
                            b: b as Elem,
                            c: c as Elem,
                        });
                    }
                }
            }
        }
    }

    fn check_meet(&self, out: &mut Vec<CarrierViolation>) {
        use CarrierViolation::*;
        let n = self.labels.len();
        let m = self.meet.as_ref().unwrap();
        let f = |a: usize, b: usize| m[a * n + b] as usize;
        for a in 0..n {
            if f(a, a) != a {
                out.push(NotIdempotent { a: a as Elem });
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if f(a, b) != f(b, a) {
                    out.push(NotCommutative {
                        a: a as Elem,
                        b: b as Elem,
                    });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if f(f(a, b), c) != f(a, f(b, c)) {
                        out.push(NotAssociative {
                            a: a as Elem,
                            b: b as Elem,
                            c: c as Elem,
                        });
                    }
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn kind(&self) -> CarrierKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, e: Elem) -> &str {
        &self.labels[e as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<Elem> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as Elem)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.labels.len()).map(|i| i as Elem)
    }

    pub fn modulus(&self) -> Option<usize> {
        self.modulus
    }

    pub fn order_table(&self) -> Option<&[bool]> {
        self.order.as_deref()
    }

    pub fn meet_table(&self) -> Option<&[Elem]> {
        self.meet.as_deref()
    }

    pub fn leq(&self, a: Elem, b: Elem) -> Option<bool> {
        let n = self.len();
        self.order.as_ref().map(|o| o[a as usize * n + b as usize])
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Option<Elem> {
        let n = self.len();
        self.meet.as_ref().map(|m| m[a as usize * n + b as usize])
    }

    /// The unique `m` with `2m = a + b (mod p)`.
    pub fn midpoint(&self, a: Elem, b: Elem) -> Result<Elem> {
        let p = self.require_odd_modulus()?;
        // 2^{-1} = (p + 1) / 2 for odd p
        let half = p.div_ceil(2);
        Ok((((a as usize + b as usize) % p) * half % p) as Elem)
    }

    pub(crate) fn require_odd_modulus(&self) -> Result<usize> {
        match (self.kind, self.modulus) {
            (CarrierKind::ModRing, Some(p)) if p % 2 == 1 => Ok(p),
            (CarrierKind::ModRing, Some(p)) => Err(Error::EvenModulus(p)),
            _ => Err(Error::MissingStructure(format!(
                "a modring carrier is required, found {}",
                self.kind
            ))),
        }
    }

    /// The order-dual carrier: `a <=' b` iff `b <= a`. The new meet is the old
    /// join, which must exist for every pair.
    pub fn dual(&self) -> Result<Carrier> {
        let n = self.len();
        let o = match (self.kind, &self.order) {
            (CarrierKind::Chain | CarrierKind::Lattice, Some(o)) => o,
            _ => {
                return Err(Error::MissingStructure(format!(
                    "dual needs an ordered carrier, found {}",
                    self.kind
                )))
            }
        };
        let rev: Vec<bool> = (0..n * n).map(|i| o[(i % n) * n + i / n]).collect();
        let mut join = vec![0 as Elem; n * n];
        for a in 0..n {
            for b in 0..n {
                let uppers: Vec<usize> = (0..n).filter(|&u| o[a * n + u] && o[b * n + u]).collect();
                let least = uppers
                    .iter()
                    .copied()
                    .find(|&u| uppers.iter().all(|&v| o[u * n + v]))
                    .ok_or_else(|| {
                        Error::MissingStructure(format!(
                            "no join for ({a},{b}); dual is not a meet-semilattice"
                        ))
                    })?;
                join[a * n + b] = least as Elem;
            }
        }
        Carrier::from_parts(self.labels.clone(), self.kind, Some(rev), Some(join), None)
            .into_valid()
    }

    pub(crate) fn same_as(&self, other: &Carrier) -> bool {
        self == other
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.kind, self.labels.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn chain_basics() {
        let c = Carrier::chain(2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.leq(0, 1), Some(true));
        assert_eq!(c.leq(1, 0), Some(false));
        assert!(c.validate().is_empty());

        let one = Carrier::chain(1).unwrap();
        assert_eq!(one.leq(0, 0), Some(true));

        let c3 = Carrier::chain(3).unwrap();
        assert_eq!(c3.meet(1, 2), Some(1));
    }

    #[test]
    fn chain_of_zero_is_rejected() {
        assert!(matches!(Carrier::chain(0), Err(Error::InvalidSize(_))));
        assert!(matches!(Carrier::modring(0), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn diamond_lattice() {
        // 0 < a, b < 1 with a ∧ b = 0
        let m = vec![
            vec![0, 0, 0, 0],
            vec![0, 1, 0, 1],
            vec![0, 0, 2, 2],
            vec![0, 1, 2, 3],
        ];
        let d = Carrier::lattice(labels(&["0", "a", "b", "1"]), &m).unwrap();
        assert_eq!(d.meet(1, 2), Some(0));
        assert_eq!(d.leq(1, 2), Some(false));
        assert_eq!(d.leq(1, 3), Some(true));
    }

    #[test]
    fn chain_meet_table_is_a_lattice() {
        let m = vec![vec![0, 0, 0], vec![0, 1, 1], vec![0, 1, 2]];
        assert!(Carrier::lattice(labels(&["x", "y", "z"]), &m).is_ok());
    }

    #[test]
    fn commutativity_violation_is_named() {
        // a∧b = a but b∧a = b
        let m = vec![vec![0, 0], vec![1, 1]];
        let err = Carrier::lattice(labels(&["a", "b"]), &m).unwrap_err();
        match err {
            Error::AxiomViolation(msg) => assert!(msg.contains("commutative"), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn modring() {
        let z5 = Carrier::modring(5).unwrap();
        assert_eq!(z5.len(), 5);
        assert_eq!(z5.midpoint(1, 3).unwrap(), 2);
        assert_eq!(Carrier::modring(1).unwrap().len(), 1);
        assert_eq!(
            Carrier::modring(4).unwrap().midpoint(0, 1),
            Err(Error::EvenModulus(4))
        );
    }

    #[test]
    fn missing_reflexive_pair_is_reported() {
        let order = vec![true, true, false, false];
        let c = Carrier::from_parts(
            labels(&["0", "1"]),
            CarrierKind::Chain,
            Some(order),
            None,
            None,
        );
        assert_eq!(c.validate(), vec![CarrierViolation::NotReflexive { a: 1 }]);
    }

    #[test]
    fn non_associative_meet_names_triple() {
        // idempotent and commutative, but (0∧1)∧2 = 2∧2... built to fail associativity
        let m: Vec<Elem> = vec![0, 2, 1, 2, 1, 0, 1, 0, 2];
        let c = Carrier::from_parts(
            labels(&["0", "1", "2"]),
            CarrierKind::Lattice,
            None,
            Some(m),
            None,
        );
        let report = c.validate();
        assert!(
            report
                .iter()
                .any(|v| matches!(v, CarrierViolation::NotAssociative { .. })),
            "{report:?}"
        );
        assert_eq!(c.validate(), report);
    }

    #[test]
    fn dual_of_chain_uses_max() {
        let c = Carrier::chain(3).unwrap().dual().unwrap();
        assert_eq!(c.meet(0, 2), Some(2));
        assert_eq!(c.leq(2, 0), Some(true));
    }
}
