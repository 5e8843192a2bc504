//! Stable sets, closures, generators, and exhaustive audits of the `alpha_Q`
//! characterizations on small carriers.
//!
//! Subsets are bitmasks. Tables indexed by subsets are capped at
//! [`MAX_GENERATOR_CARRIER`] elements; audits that enumerate every binary
//! operation (`n^(n^2)` of them) are capped at [`MAX_ENUMERATION_CARRIER`].
//! Audits report what they find; they do not assume the claimed equivalences.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::carrier::{Carrier, Elem};
use crate::error::{Error, Result};
use crate::par;
use crate::rules::BinaryOp;

pub const MAX_SUBSET_CARRIER: usize = 32;
pub const MAX_GENERATOR_CARRIER: usize = 8;
pub const MAX_ENUMERATION_CARRIER: usize = 3;

/// A subset of a carrier as a bitmask over element indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(n: usize) -> Subset {
        Subset(if n >= 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    pub fn from_elems(elems: impl IntoIterator<Item = Elem>) -> Subset {
        Subset(elems.into_iter().fold(0, |acc, e| acc | (1 << e)))
    }

    #[inline]
    pub fn contains(self, e: Elem) -> bool {
        self.0 >> e & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, e: Elem) {
        self.0 |= 1 << e;
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Elem> {
        (0..32u8).filter(move |&e| self.contains(e))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

fn check_subset_size(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit {
        return Err(Error::ResourceLimit {
            what,
            needed: n as u128,
            limit: limit as u128,
        });
    }
    Ok(())
}

#[inline]
fn apply(table: &[Elem], n: usize, a: Elem, b: Elem) -> Elem {
    table[a as usize * n + b as usize]
}

/// Least superset of `a` closed under the table, by worklist.
fn closure_raw(table: &[Elem], n: usize, a: Subset) -> Subset {
    let mut set = a;
    let mut members: Vec<Elem> = a.iter().collect();
    let mut next = 0;
    while next < members.len() {
        let x = members[next];
        next += 1;
        // pair the new element with everything seen so far, itself included
        let mut k = 0;
        while k < next {
            let y = members[k];
            k += 1;
            for z in [apply(table, n, x, y), apply(table, n, y, x)] {
                if !set.contains(z) {
                    set.insert(z);
                    members.push(z);
                }
            }
        }
    }
    set
}

fn is_stable_raw(table: &[Elem], n: usize, s: Subset) -> bool {
    s.iter()
        .all(|x| s.iter().all(|y| s.contains(apply(table, n, x, y))))
}

/// The smallest `op`-stable subset containing `a`.
pub fn closure(a: Subset, op: &BinaryOp) -> Result<Subset> {
    let n = op.carrier().len();
    check_subset_size(n, MAX_SUBSET_CARRIER, "carrier size for subsets")?;
    if !a.is_subset_of(Subset::full(n)) {
        return Err(Error::Invalid(format!(
            "{a} is not a subset of the carrier"
        )));
    }
    Ok(closure_raw(op.table(), n, a))
}

/// True iff `op` maps `s × s` into `s`.
pub fn is_stable(s: Subset, op: &BinaryOp) -> bool {
    is_stable_raw(op.table(), op.carrier().len(), s)
}

/// A map from subsets to subsets, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorTable {
    n: usize,
    map: Vec<Subset>,
}

impl GeneratorTable {
    pub fn new(n: usize, map: Vec<Subset>) -> Result<Self> {
        check_subset_size(n, MAX_GENERATOR_CARRIER, "carrier size for subset tables")?;
        if map.len() != 1 << n {
            return Err(Error::Invalid(format!(
                "table has {} entries, expected {}",
                map.len(),
                1 << n
            )));
        }
        if let Some(s) = map.iter().find(|s| !s.is_subset_of(Subset::full(n))) {
            return Err(Error::Invalid(format!(
                "{s} is not a subset of the carrier"
            )));
        }
        Ok(GeneratorTable { n, map })
    }

    pub fn from_fn(n: usize, f: impl Fn(Subset) -> Subset) -> Result<Self> {
        check_subset_size(n, MAX_GENERATOR_CARRIER, "carrier size for subset tables")?;
        GeneratorTable::new(n, (0..1u32 << n).map(|m| f(Subset(m))).collect())
    }

    pub fn identity(n: usize) -> Result<Self> {
        GeneratorTable::from_fn(n, |a| a)
    }

    /// Every subset goes to the whole carrier.
    pub fn constant_full(n: usize) -> Result<Self> {
        GeneratorTable::from_fn(n, |_| Subset::full(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: Subset) -> Subset {
        self.map[a.0 as usize]
    }

    pub fn entries(&self) -> impl Iterator<Item = (Subset, Subset)> + '_ {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &s)| (Subset(i as u32), s))
    }

    pub fn is_identity(&self) -> bool {
        self.entries().all(|(a, s)| a == s)
    }

    /// `ψ(ψ(A)) = ψ(A)` for every `A`.
    pub fn is_idempotent(&self) -> bool {
        self.entries().all(|(_, s)| self.get(s) == s)
    }
}

fn psi_raw(table: &[Elem], n: usize) -> Vec<Subset> {
    (0..1u32 << n)
        .map(|m| closure_raw(table, n, Subset(m)))
        .collect()
}

/// `A -> [A]_op` for every subset.
pub fn psi_alpha(op: &BinaryOp) -> Result<GeneratorTable> {
    let n = op.carrier().len();
    check_subset_size(n, MAX_GENERATOR_CARRIER, "carrier size for subset tables")?;
    Ok(GeneratorTable {
        n,
        map: psi_raw(op.table(), n),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorReport {
    pub is_generator: bool,
    /// Some `A` with `A ⊄ ψ(A)`.
    pub extensivity_violation: Option<Subset>,
    /// Some `A ⊆ A'` with `ψ(A) ⊄ ψ(A')`.
    pub monotonicity_violation: Option<(Subset, Subset)>,
}

/// Checks extensivity and monotonicity over all subsets and subset pairs.
pub fn is_generator(t: &GeneratorTable) -> GeneratorReport {
    let extensivity_violation = t
        .entries()
        .find(|&(a, s)| !a.is_subset_of(s))
        .map(|(a, _)| a);
    let mut monotonicity_violation = None;
    'outer: for (a, sa) in t.entries() {
        for (b, sb) in t.entries() {
            if a.is_subset_of(b) && !sa.is_subset_of(sb) {
                monotonicity_violation = Some((a, b));
                break 'outer;
            }
        }
    }
    GeneratorReport {
        is_generator: extensivity_violation.is_none() && monotonicity_violation.is_none(),
        extensivity_violation,
        monotonicity_violation,
    }
}

fn require_same_size(op: &BinaryOp, t: &GeneratorTable) -> Result<()> {
    if op.carrier().len() != t.n() {
        return Err(Error::CarrierMismatch(format!(
            "operation is on {} elements, generator on {}",
            op.carrier().len(),
            t.n()
        )));
    }
    Ok(())
}

/// Compatibility as "every `ψ(A)` is `op`-stable".
pub fn compatible_by_stability(op: &BinaryOp, t: &GeneratorTable) -> Result<bool> {
    require_same_size(op, t)?;
    Ok(t.entries().all(|(_, s)| is_stable(s, op)))
}

/// Compatibility as `[A]_op ⊆ ψ(A)`, with `[A]_op` computed as the
/// intersection of every `op`-stable superset of `A`.
pub fn compatible_by_intersection(op: &BinaryOp, t: &GeneratorTable) -> Result<bool> {
    require_same_size(op, t)?;
    let n = t.n();
    let stable: Vec<Subset> = (0..1u32 << n)
        .map(Subset)
        .filter(|&s| is_stable(s, op))
        .collect();
    Ok(t.entries().all(|(a, psi_a)| {
        let hull = stable
            .iter()
            .filter(|&&s| a.is_subset_of(s))
            .fold(Subset::full(n), |acc, s| Subset(acc.0 & s.0));
        hull.is_subset_of(psi_a)
    }))
}

/// Compatibility as `ψ_op(A) ⊆ ψ(A)` for every `A`.
pub fn is_compatible(op: &BinaryOp, t: &GeneratorTable) -> Result<bool> {
    require_same_size(op, t)?;
    let psi = psi_alpha(op)?;
    Ok(t.entries().all(|(a, s)| psi.get(a).is_subset_of(s)))
}

/// Every binary operation on `n` elements compatible with `t`, as tables in
/// enumeration order.
pub fn compatible_ops(t: &GeneratorTable) -> Result<Vec<Vec<Elem>>> {
    let n = t.n();
    let total = op_count(n)?;
    let hits: Vec<Option<Vec<Elem>>> = par::map_range(total as usize, |k| {
        let table = decode_op(k as u64, n);
        let ok = t
            .entries()
            .all(|(a, s)| closure_raw(&table, n, a).is_subset_of(s));
        ok.then_some(table)
    });
    Ok(hits.into_iter().flatten().collect())
}

/// True iff the closure of a union is the union of closures.
pub fn kuratowski_union_check(op: &BinaryOp, a: Subset, b: Subset) -> Result<bool> {
    Ok(closure(a.union(b), op)? == closure(a, op)?.union(closure(b, op)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KuratowskiScan {
    pub pairs_checked: u64,
    pub violations: u64,
    /// First failing `(A, B)` in enumeration order.
    pub first_violation: Option<(Subset, Subset)>,
}

/// Scans every `(A, B)` for a failure of closure-distributes-over-union.
pub fn kuratowski_scan(op: &BinaryOp) -> Result<KuratowskiScan> {
    let psi = psi_alpha(op)?;
    let size = 1u32 << psi.n();
    let mut out = KuratowskiScan {
        pairs_checked: 0,
        violations: 0,
        first_violation: None,
    };
    for a in (0..size).map(Subset) {
        for b in (0..size).map(Subset) {
            out.pairs_checked += 1;
            if psi.get(a.union(b)) != psi.get(a).union(psi.get(b)) {
                out.violations += 1;
                out.first_violation.get_or_insert((a, b));
            }
        }
    }
    Ok(out)
}

fn op_count(n: usize) -> Result<u64> {
    check_subset_size(
        n,
        MAX_ENUMERATION_CARRIER,
        "carrier size for operation enumeration",
    )?;
    Ok((n as u64).pow((n * n) as u32))
}

/// The `k`-th table in base-`n` enumeration order (entry 0 is the least
/// significant digit).
fn decode_op(mut k: u64, n: usize) -> Vec<Elem> {
    (0..n * n)
        .map(|_| {
            let d = (k % n as u64) as Elem;
            k /= n as u64;
            d
        })
        .collect()
}

pub fn is_associative(op: &BinaryOp) -> bool {
    associativity_witness(op.table(), op.carrier().len()).is_none()
}

pub fn is_commutative(op: &BinaryOp) -> bool {
    let n = op.carrier().len();
    (0..n as Elem).all(|a| (0..n as Elem).all(|b| op.apply(a, b) == op.apply(b, a)))
}

fn associativity_witness(table: &[Elem], n: usize) -> Option<[Elem; 3]> {
    for a in 0..n as Elem {
        for b in 0..n as Elem {
            let ab = apply(table, n, a, b);
            for c in 0..n as Elem {
                if apply(table, n, ab, c) != apply(table, n, a, apply(table, n, b, c)) {
                    return Some([a, b, c]);
                }
            }
        }
    }
    None
}

/// `op(x, x') = x` everywhere except `op(a, b) = c`, with `a, b, c` distinct.
pub fn redirect_op(
    carrier: std::sync::Arc<Carrier>,
    a: Elem,
    b: Elem,
    c: Elem,
) -> Result<BinaryOp> {
    if a == b || b == c || a == c {
        return Err(Error::Invalid("a, b, c must be pairwise distinct".into()));
    }
    BinaryOp::from_fn(
        carrier,
        "redirect",
        |x, y| if (x, y) == (a, b) { c } else { x },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThreeWay {
    /// `ψ_op` is the identity generator.
    pub psi_identity: bool,
    /// `op(x, x') ∈ {x, x'}` for all arguments.
    pub conservative: bool,
    /// `op = alpha_Q` for some `Q ⊆ X × X`.
    pub alpha_q_form: bool,
}

impl ThreeWay {
    pub fn agree(&self) -> bool {
        self.psi_identity == self.conservative && self.conservative == self.alpha_q_form
    }
}

/// All `alpha_Q` tables on `n` elements, one per `Q ⊆ X × X`.
fn all_alpha_q_tables(n: usize) -> HashSet<Vec<Elem>> {
    let pairs = n * n;
    (0..1u64 << pairs)
        .map(|mask| alpha_q_table(mask, n))
        .collect()
}

fn alpha_q_table(mask: u64, n: usize) -> Vec<Elem> {
    (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            // the diagonal never matters: alpha_Q(x, x) = x either way
            if mask >> k & 1 == 1 {
                a as Elem
            } else {
                b as Elem
            }
        })
        .collect()
}

fn three_way_raw(table: &[Elem], n: usize, alpha_qs: &HashSet<Vec<Elem>>) -> ThreeWay {
    let psi = psi_raw(table, n);
    ThreeWay {
        psi_identity: psi.iter().enumerate().all(|(i, s)| s.0 == i as u32),
        conservative: (0..n * n).all(|k| {
            let v = table[k] as usize;
            v == k / n || v == k % n
        }),
        alpha_q_form: alpha_qs.contains(table),
    }
}

/// The three properties for one operation (`n <= 3`, since the `∃Q` check
/// enumerates every `Q`).
pub fn three_way_properties(op: &BinaryOp) -> Result<ThreeWay> {
    let n = op.carrier().len();
    op_count(n)?;
    Ok(three_way_raw(op.table(), n, &all_alpha_q_tables(n)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub n: usize,
    pub total_ops: u64,
    pub identity_generator_ops: u64,
    /// `n^(n^2)`
    pub formula_total: u64,
    /// `2^(n^2 - n)`
    pub formula_identity: u64,
}

impl CountReport {
    pub fn matches_formulas(&self) -> bool {
        self.total_ops == self.formula_total && self.identity_generator_ops == self.formula_identity
    }
}

/// Enumerates every operation on `n` elements and counts those whose closure
/// map is the identity.
pub fn enumerate_ops_audit(c: &Carrier) -> Result<CountReport> {
    let n = c.len();
    let total = op_count(n)?;
    let flags: Vec<bool> = par::map_range(total as usize, |k| {
        let table = decode_op(k as u64, n);
        (0..1u32 << n).all(|m| closure_raw(&table, n, Subset(m)) == Subset(m))
    });
    Ok(CountReport {
        n,
        total_ops: flags.len() as u64,
        identity_generator_ops: flags.iter().filter(|&&f| f).count() as u64,
        formula_total: total,
        formula_identity: 1u64 << (n * n - n),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreeWayCounterexample {
    pub table: Vec<Elem>,
    pub properties: ThreeWay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreeWayReport {
    pub n: usize,
    pub ops: u64,
    pub psi_identity: u64,
    pub conservative: u64,
    pub alpha_q_form: u64,
    pub counterexamples: Vec<ThreeWayCounterexample>,
}

/// Over every operation: is `ψ_op = id` ⟺ conservative ⟺ of `alpha_Q` form?
pub fn audit_three_way(c: &Carrier) -> Result<ThreeWayReport> {
    let n = c.len();
    let total = op_count(n)?;
    let alpha_qs = all_alpha_q_tables(n);
    let props: Vec<ThreeWay> = par::map_range(total as usize, |k| {
        three_way_raw(&decode_op(k as u64, n), n, &alpha_qs)
    });
    let count = |f: fn(&ThreeWay) -> bool| props.iter().filter(|p| f(p)).count() as u64;
    Ok(ThreeWayReport {
        n,
        ops: total,
        psi_identity: count(|p| p.psi_identity),
        conservative: count(|p| p.conservative),
        alpha_q_form: count(|p| p.alpha_q_form),
        counterexamples: props
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.agree())
            .map(|(k, p)| ThreeWayCounterexample {
                table: decode_op(k as u64, n),
                properties: *p,
            })
            .collect(),
    })
}

/// Pairs of a raw `Q` mask (bit `a * n + b` is `(a, b)`).
fn mask_pairs(mask: u64, n: usize) -> Vec<(Elem, Elem)> {
    (0..n * n)
        .filter(|k| mask >> k & 1 == 1)
        .map(|k| ((k / n) as Elem, (k % n) as Elem))
        .collect()
}

fn diagonal_mask(n: usize) -> u64 {
    (0..n).fold(0, |acc, i| acc | 1 << (i * n + i))
}

/// `Q ∘ Q ⊆ Q` on a raw mask.
fn composition_closed(mask: u64, n: usize) -> bool {
    let has = |a: usize, b: usize| mask >> (a * n + b) & 1 == 1;
    (0..n).all(|a| (0..n).all(|b| !has(a, b) || (0..n).all(|c| !has(b, c) || has(a, c))))
}

/// For `u != v`, exactly one of `(u, v)`, `(v, u)` is in `Q`.
fn is_tournament(mask: u64, n: usize) -> bool {
    let has = |a: usize, b: usize| mask >> (a * n + b) & 1 == 1;
    (0..n).all(|a| (a + 1..n).all(|b| has(a, b) != has(b, a)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssociativityRow {
    /// The `Q` as given, before adding the diagonal.
    pub q_mask: u64,
    /// `Q ∪ Δ`.
    pub pairs: Vec<(Elem, Elem)>,
    pub associative: bool,
    pub composition_closed: bool,
    /// Off-diagonal part has exactly one of `(u, v)`, `(v, u)` for each `u != v`.
    pub tournament: bool,
    pub witness: Option<[Elem; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssociativityReport {
    pub n: usize,
    pub relations: u64,
    pub agreements: u64,
    /// Masks where associativity and `Q ∘ Q ⊆ Q` differ.
    pub disagreements: Vec<u64>,
    pub tournament_relations: u64,
    pub tournament_disagreements: u64,
    pub rows: Vec<AssociativityRow>,
}

fn associativity_row(mask: u64, n: usize) -> AssociativityRow {
    let aug = mask | diagonal_mask(n);
    let table = alpha_q_table(aug, n);
    let witness = associativity_witness(&table, n);
    AssociativityRow {
        q_mask: mask,
        pairs: mask_pairs(aug, n),
        associative: witness.is_none(),
        composition_closed: composition_closed(aug, n),
        tournament: is_tournament(aug, n),
        witness,
    }
}

/// For every `Q ⊆ X × X`, with the diagonal added: does associativity of
/// `alpha_Q` coincide with `Q ∘ Q ⊆ Q`?
pub fn audit_associativity(c: &Carrier) -> Result<AssociativityReport> {
    let n = c.len();
    op_count(n)?;
    let relations = 1u64 << (n * n);
    let masks: Vec<u64> = (0..relations).collect();
    let rows = par::map(&masks, |&m| associativity_row(m, n));
    let disagreements: Vec<u64> = rows
        .iter()
        .filter(|r| r.associative != r.composition_closed)
        .map(|r| r.q_mask)
        .collect();
    let tournament_rows: Vec<&AssociativityRow> = rows.iter().filter(|r| r.tournament).collect();
    Ok(AssociativityReport {
        n,
        relations,
        agreements: relations - disagreements.len() as u64,
        tournament_relations: tournament_rows.len() as u64,
        tournament_disagreements: tournament_rows
            .iter()
            .filter(|r| r.associative != r.composition_closed)
            .count() as u64,
        disagreements,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutativityRow {
    pub q_mask: u64,
    pub pairs: Vec<(Elem, Elem)>,
    /// `alpha_Q(x, x') = alpha_Q(x', x)` for all arguments.
    pub commutative: bool,
    /// `Q` equals the diagonal.
    pub q_is_diagonal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutativityReport {
    pub n: usize,
    pub relations: u64,
    pub commutative: u64,
    pub q_is_diagonal: u64,
    /// Masks where the two columns differ.
    pub discrepancies: Vec<u64>,
    pub rows: Vec<CommutativityRow>,
}

/// For every `Q ⊆ X × X`: definition-level commutativity of `alpha_Q` next to
/// the criterion `Q = Δ`.
pub fn audit_commutativity(c: &Carrier) -> Result<CommutativityReport> {
    let n = c.len();
    op_count(n)?;
    let relations = 1u64 << (n * n);
    let masks: Vec<u64> = (0..relations).collect();
    let diag = diagonal_mask(n);
    let rows = par::map(&masks, |&m| {
        let t = alpha_q_table(m, n);
        CommutativityRow {
            q_mask: m,
            pairs: mask_pairs(m, n),
            commutative: (0..n).all(|a| (0..n).all(|b| t[a * n + b] == t[b * n + a])),
            q_is_diagonal: m == diag,
        }
    });
    Ok(CommutativityReport {
        n,
        relations,
        commutative: rows.iter().filter(|r| r.commutative).count() as u64,
        q_is_diagonal: rows.iter().filter(|r| r.q_is_diagonal).count() as u64,
        discrepancies: rows
            .iter()
            .filter(|r| r.commutative != r.q_is_diagonal)
            .map(|r| r.q_mask)
            .collect(),
        rows,
    })
}

/// Bitmask of a relation given as pairs (for looking up audit rows).
pub fn q_mask(pairs: &[(Elem, Elem)], n: usize) -> u64 {
    pairs
        .iter()
        .fold(0, |acc, &(a, b)| acc | 1 << (a as usize * n + b as usize))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::rules::{alpha_from_q, BuiltinOp, QRelation};

    fn z5() -> Arc<Carrier> {
        Arc::new(Carrier::modring(5).unwrap())
    }

    fn chain(n: usize) -> Arc<Carrier> {
        Arc::new(Carrier::chain(n).unwrap())
    }

    #[test]
    fn closures_under_addition() {
        let add = BinaryOp::builtin(BuiltinOp::Add, z5()).unwrap();
        assert_eq!(
            closure(Subset::from_elems([0]), &add).unwrap(),
            Subset::from_elems([0])
        );
        assert_eq!(
            closure(Subset::from_elems([1]), &add).unwrap(),
            Subset::full(5)
        );
        assert_eq!(closure(Subset::EMPTY, &add).unwrap(), Subset::EMPTY);
    }

    #[test]
    fn identity_generators() {
        let c = chain(3);
        for which in [
            BuiltinOp::Lambda,
            BuiltinOp::Rho,
            BuiltinOp::Min,
            BuiltinOp::Max,
        ] {
            let op = BinaryOp::builtin(which, c.clone()).unwrap();
            assert!(psi_alpha(&op).unwrap().is_identity(), "{which}");
        }
    }

    #[test]
    fn generator_checks() {
        assert!(is_generator(&GeneratorTable::identity(3).unwrap()).is_generator);
        let add = BinaryOp::builtin(BuiltinOp::Add, z5()).unwrap();
        assert!(is_generator(&psi_alpha(&add).unwrap()).is_generator);
        // {0,1} -> {0}
        let shrink =
            GeneratorTable::from_fn(2, |a| if a == Subset(0b11) { Subset(0b01) } else { a })
                .unwrap();
        let r = is_generator(&shrink);
        assert!(!r.is_generator);
        assert_eq!(r.extensivity_violation, Some(Subset(0b11)));
    }

    #[test]
    fn compatibility_examples() {
        let c = chain(3);
        let id = GeneratorTable::identity(3).unwrap();
        let q = QRelation::new(c.clone(), [(0, 1), (2, 0)]).unwrap();
        assert!(is_compatible(&alpha_from_q(&q), &id).unwrap());

        let redirect = redirect_op(c.clone(), 0, 1, 2).unwrap();
        assert!(!is_compatible(&redirect, &id).unwrap());
        assert!(closure(Subset::from_elems([0, 1]), &redirect)
            .unwrap()
            .contains(2));

        let full = GeneratorTable::constant_full(3).unwrap();
        assert!(is_compatible(&redirect, &full).unwrap());
        assert!(compatible_by_stability(&redirect, &full).unwrap());
        assert!(compatible_by_intersection(&redirect, &full).unwrap());
    }

    #[test]
    fn stability_form_is_stronger_for_non_idempotent_generators() {
        let z3 = Arc::new(Carrier::modring(3).unwrap());
        let add = BinaryOp::builtin(BuiltinOp::Add, z3).unwrap();
        let t = GeneratorTable::from_fn(3, |a| match a.0 {
            0 => Subset::EMPTY,
            0b001 => Subset(0b011),
            _ => Subset::full(3),
        })
        .unwrap();
        assert!(is_generator(&t).is_generator);
        assert!(!t.is_idempotent());
        assert!(is_compatible(&add, &t).unwrap());
        assert!(compatible_by_intersection(&add, &t).unwrap());
        assert!(!compatible_by_stability(&add, &t).unwrap());
    }

    #[test]
    fn counting_n2() {
        let r = enumerate_ops_audit(&Carrier::plain_sized(2).unwrap()).unwrap();
        assert_eq!((r.total_ops, r.identity_generator_ops), (16, 4));
        assert!(r.matches_formulas());
        assert!(enumerate_ops_audit(&Carrier::plain_sized(4).unwrap())
            .unwrap_err()
            .is_resource_limit());
    }

    #[test]
    fn three_way_single_ops() {
        let c = chain(3);
        let p = three_way_properties(&redirect_op(c.clone(), 0, 1, 2).unwrap()).unwrap();
        assert_eq!(
            p,
            ThreeWay {
                psi_identity: false,
                conservative: false,
                alpha_q_form: false
            }
        );
        let l = three_way_properties(&BinaryOp::builtin(BuiltinOp::Lambda, c).unwrap()).unwrap();
        assert_eq!(
            l,
            ThreeWay {
                psi_identity: true,
                conservative: true,
                alpha_q_form: true
            }
        );
    }

    #[test]
    fn redirect_op_is_neither_associative_nor_commutative() {
        let op = redirect_op(chain(3), 0, 1, 2).unwrap();
        assert!(!is_associative(&op));
        assert!(!is_commutative(&op));
    }

    #[test]
    fn associativity_rows() {
        // chain order relation: transitive, alpha_Q = min
        let row = associativity_row(q_mask(&[(0, 1), (0, 2), (1, 2)], 3), 3);
        assert!(row.associative && row.composition_closed);
        // a<b, b<c without a<c
        let row = associativity_row(q_mask(&[(0, 1), (1, 2)], 3), 3);
        assert!(!row.associative && !row.composition_closed);
        // Δ ∪ {(a,b)}: transitive, yet alpha_Q(alpha_Q(a,c),b) = b != a = alpha_Q(a,alpha_Q(c,b))
        let row = associativity_row(q_mask(&[(0, 1)], 3), 3);
        assert!(row.composition_closed);
        assert!(!row.associative);
        assert_eq!(row.witness, Some([0, 2, 1]));
    }

    #[test]
    fn commutativity_rows() {
        let r = audit_commutativity(&Carrier::plain_sized(2).unwrap()).unwrap();
        // min on chain2 is alpha of {(0,0),(0,1),(1,1)}
        let min_row = &r.rows[q_mask(&[(0, 0), (0, 1), (1, 1)], 2) as usize];
        assert!(min_row.commutative);
        assert!(!min_row.q_is_diagonal);
        let rho_row = &r.rows[0];
        assert!(!rho_row.commutative);
        assert!(!r.discrepancies.is_empty());
    }

    #[test]
    fn kuratowski() {
        let c = chain(3);
        let l = BinaryOp::builtin(BuiltinOp::Lambda, c.clone()).unwrap();
        assert!(kuratowski_union_check(&l, Subset(0b001), Subset(0b110)).unwrap());
        assert_eq!(kuratowski_scan(&l).unwrap().violations, 0);
        let min = BinaryOp::builtin(BuiltinOp::Min, c).unwrap();
        assert_eq!(kuratowski_scan(&min).unwrap().violations, 0);

        let add = BinaryOp::builtin(BuiltinOp::Add, z5()).unwrap();
        assert!(
            kuratowski_union_check(&add, Subset::from_elems([1]), Subset::from_elems([0])).unwrap()
        );
        assert!(
            kuratowski_union_check(&add, Subset::from_elems([2]), Subset::from_elems([3])).unwrap()
        );
        // nonzero residues generate everything in Z_5, so a failure needs {0} ∪ {0}-free sets... none exist
        let scan = kuratowski_scan(&add).unwrap();
        assert_eq!(scan.pairs_checked, 1024);
        assert_eq!(scan.violations, 0);
    }

    #[test]
    fn kuratowski_failure_in_z6() {
        // {2} and {3} generate subgroups of Z_6 whose union is not closed
        let z6 = Arc::new(Carrier::modring(6).unwrap());
        let add = BinaryOp::builtin(BuiltinOp::Add, z6).unwrap();
        assert!(
            !kuratowski_union_check(&add, Subset::from_elems([2]), Subset::from_elems([3]))
                .unwrap()
        );
        assert!(kuratowski_scan(&add).unwrap().first_violation.is_some());
    }

    #[test]
    fn compatible_ops_of_identity_are_the_alpha_qs() {
        let ops = compatible_ops(&GeneratorTable::identity(2).unwrap()).unwrap();
        assert_eq!(ops.len(), 4);
    }
}
