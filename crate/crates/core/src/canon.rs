//! Normal forms for four rule families, with freeness predicates and an audit
//! against the saturation oracle.
//!
//! Every canonicalizer step is a composition of rule applications, so the
//! output is equivalent to the input. Steps scan pairs in canonical order and
//! apply the first reduction that fits; the result is deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::carrier::{Carrier, CarrierKind, Elem};
use crate::engine::{saturate, ClassIndex, SaturationOptions, Stability};
use crate::error::{Error, Result};
use crate::par;
use crate::rules::{midpoint_relation, BinaryOp, BuiltinOp, RuleSystem};
use crate::words::{Pair, Word, WordSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `min` on two chains.
    MinMin,
    /// Meet on two meet-semilattices.
    LatticeMinMin,
    /// `lambda` on two plain sets.
    LambdaLambda,
    /// The midpoint relation `2x = x' + x''` on two odd modular rings.
    Midpoint,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::MinMin,
        FamilyKind::LatticeMinMin,
        FamilyKind::LambdaLambda,
        FamilyKind::Midpoint,
    ];

    pub fn freeness_name(self) -> &'static str {
        match self {
            FamilyKind::MinMin => "path-free",
            FamilyKind::LatticeMinMin => "wedge-free",
            FamilyKind::LambdaLambda => "repetition-free",
            FamilyKind::Midpoint => "median-free",
        }
    }

    /// Extra word size the canonicalizer passes through above its input.
    pub fn detour_headroom(self) -> usize {
        match self {
            FamilyKind::Midpoint => 1,
            _ => 0,
        }
    }

    pub fn check_carrier(self, c: &Carrier) -> Result<()> {
        match self {
            FamilyKind::MinMin if c.kind() != CarrierKind::Chain => Err(Error::MissingStructure(
                format!("{self} needs chain carriers, found {}", c.kind()),
            )),
            FamilyKind::LatticeMinMin
                if !matches!(c.kind(), CarrierKind::Chain | CarrierKind::Lattice) =>
            {
                Err(Error::MissingStructure(format!(
                    "{self} needs chain or lattice carriers, found {}",
                    c.kind()
                )))
            }
            FamilyKind::Midpoint => c.require_odd_modulus().map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn rule_system(self, x: Arc<Carrier>, y: Arc<Carrier>) -> Result<RuleSystem> {
        self.check_carrier(&x)?;
        self.check_carrier(&y)?;
        match self {
            FamilyKind::MinMin | FamilyKind::LatticeMinMin => RuleSystem::from_ops(
                &BinaryOp::builtin(BuiltinOp::Min, x)?,
                &BinaryOp::builtin(BuiltinOp::Min, y)?,
            ),
            FamilyKind::LambdaLambda => RuleSystem::from_ops(
                &BinaryOp::builtin(BuiltinOp::Lambda, x)?,
                &BinaryOp::builtin(BuiltinOp::Lambda, y)?,
            ),
            FamilyKind::Midpoint => {
                let (rx, ry) = (midpoint_relation(x.clone())?, midpoint_relation(y.clone())?);
                RuleSystem::new(x, y, vec![rx], vec![ry])
            }
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::MinMin => "min-min",
            FamilyKind::LatticeMinMin => "lattice-min-min",
            FamilyKind::LambdaLambda => "lambda-lambda",
            FamilyKind::Midpoint => "midpoint",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family `{s}`")))
    }
}

/// The relation `(x, y) ⊣ (x', y')`: same `x` and `y <= y'`, or same `y` and
/// `x <= x'`.
#[derive(Debug, Clone)]
pub struct DominancePredicate {
    ny: usize,
    np: usize,
    /// indexed by `pair_index(p) * |X||Y| + pair_index(q)`
    table: Vec<bool>,
}

impl DominancePredicate {
    pub fn new(x: &Carrier, y: &Carrier) -> Result<Self> {
        if x.order_table().is_none() || y.order_table().is_none() {
            return Err(Error::MissingStructure(
                "dominance needs ordered carriers".into(),
            ));
        }
        let (nx, ny) = (x.len(), y.len());
        let np = nx * ny;
        let mut table = vec![false; np * np];
        for a in 0..np {
            let (ax, ay) = ((a / ny) as Elem, (a % ny) as Elem);
            for b in 0..np {
                let (bx, by) = ((b / ny) as Elem, (b % ny) as Elem);
                table[a * np + b] = (ax == bx && y.leq(ay, by) == Some(true))
                    || (ay == by && x.leq(ax, bx) == Some(true));
            }
        }
        Ok(DominancePredicate { ny, np, table })
    }

    fn index(&self, p: Pair) -> usize {
        p.x as usize * self.ny + p.y as usize
    }

    pub fn dashv(&self, p: Pair, q: Pair) -> bool {
        self.table[self.index(p) * self.np + self.index(q)]
    }

    /// Neither `p ⊣ q` nor `q ⊣ p`.
    pub fn bowtie(&self, p: Pair, q: Pair) -> bool {
        !self.dashv(p, q) && !self.dashv(q, p)
    }
}

/// Wedges: `((x', y), (x'', y)) ∈ V_X(x, y)` iff `x = meet(x', x'')`, and
/// symmetrically for `V_Y`.
#[derive(Debug, Clone)]
pub struct WedgePredicate {
    x: Arc<Carrier>,
    y: Arc<Carrier>,
}

impl WedgePredicate {
    pub fn new(x: Arc<Carrier>, y: Arc<Carrier>) -> Result<Self> {
        if x.meet_table().is_none() || y.meet_table().is_none() {
            return Err(Error::MissingStructure(
                "wedges need carriers with a meet".into(),
            ));
        }
        Ok(WedgePredicate { x, y })
    }

    pub fn in_x_wedge(&self, at: Pair, p: Pair, q: Pair) -> bool {
        p.y == at.y && q.y == at.y && self.x.meet(p.x, q.x) == Some(at.x)
    }

    pub fn in_y_wedge(&self, at: Pair, p: Pair, q: Pair) -> bool {
        p.x == at.x && q.x == at.x && self.y.meet(p.y, q.y) == Some(at.y)
    }

    /// Some ordering `(i, j, k)` of the three has `(p_i, p_j)` in a wedge at `p_k`.
    pub fn wedge_related(&self, a: Pair, b: Pair, c: Pair) -> bool {
        [(a, b, c), (a, c, b), (b, c, a)]
            .into_iter()
            .any(|(p, q, at)| {
                // wedges are symmetric in their two arms
                self.in_x_wedge(at, p, q) || self.in_y_wedge(at, p, q)
            })
    }
}

/// Canonicalizer and freeness test for one family over fixed carriers.
#[derive(Debug, Clone)]
pub struct Canonicalizer {
    family: FamilyKind,
    space: WordSpace,
    dominance: Option<DominancePredicate>,
    wedges: Option<WedgePredicate>,
}

impl Canonicalizer {
    pub fn new(family: FamilyKind, x: Arc<Carrier>, y: Arc<Carrier>) -> Result<Self> {
        family.check_carrier(&x)?;
        family.check_carrier(&y)?;
        let dominance = match family {
            FamilyKind::MinMin => Some(DominancePredicate::new(&x, &y)?),
            _ => None,
        };
        let wedges = match family {
            FamilyKind::LatticeMinMin => Some(WedgePredicate::new(x.clone(), y.clone())?),
            _ => None,
        };
        Ok(Canonicalizer {
            family,
            space: WordSpace::new(x, y),
            dominance,
            wedges,
        })
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn rule_system(&self) -> Result<RuleSystem> {
        self.family
            .rule_system(self.space.x().clone(), self.space.y().clone())
    }

    fn check(&self, w: &Word) -> Result<()> {
        if self.space.contains(w) {
            Ok(())
        } else {
            Err(Error::CarrierMismatch(format!(
                "word {w} is not over {} × {}",
                self.space.x(),
                self.space.y()
            )))
        }
    }

    /// The family's freeness condition. Repeated pairs fail it for every
    /// family except midpoint.
    pub fn is_free(&self, w: &Word) -> Result<bool> {
        self.check(w)?;
        let p = w.pairs();
        let n = p.len();
        if self.family != FamilyKind::Midpoint && w.has_duplicates() {
            return Ok(false);
        }
        let distinct_pairs = || (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)));
        Ok(match self.family {
            FamilyKind::MinMin => {
                let d = self.dominance.as_ref().expect("min-min has dominance");
                distinct_pairs().all(|(i, j)| d.bowtie(p[i], p[j]))
            }
            FamilyKind::LatticeMinMin => {
                let v = self.wedges.as_ref().expect("lattice family has wedges");
                (0..n).all(|i| {
                    (i + 1..n).all(|j| (j + 1..n).all(|k| !v.wedge_related(p[i], p[j], p[k])))
                })
            }
            FamilyKind::LambdaLambda => {
                distinct_pairs().all(|(i, j)| p[i].x != p[j].x && p[i].y != p[j].y)
            }
            FamilyKind::Midpoint => self.median_triple(p).is_none(),
        })
    }

    /// First `(i, j, k, on_x)` with `2 p_i = p_j + p_k` on one coordinate,
    /// `i, j, k` distinct and `j < k`.
    fn median_triple(&self, p: &[Pair]) -> Option<(usize, usize, usize, bool)> {
        let px = self
            .space
            .x()
            .modulus()
            .expect("midpoint carriers are rings");
        let py = self
            .space
            .y()
            .modulus()
            .expect("midpoint carriers are rings");
        let med = |m: usize, a: Elem, b: Elem, c: Elem| {
            (2 * a as usize) % m == (b as usize + c as usize) % m
        };
        let n = p.len();
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                for k in (j + 1..n).filter(|&k| k != i) {
                    if med(px, p[i].x, p[j].x, p[k].x) {
                        return Some((i, j, k, true));
                    }
                    if med(py, p[i].y, p[j].y, p[k].y) {
                        return Some((i, j, k, false));
                    }
                }
            }
        }
        None
    }

    /// Reduces to a fixpoint. Output is free, no longer than the input, and
    /// equivalent to it.
    pub fn canonicalize(&self, w: &Word) -> Result<Word> {
        self.check(w)?;
        let mut pairs = w.pairs().to_vec();
        while self.step(&mut pairs) {
            pairs.sort_unstable();
        }
        Word::new(pairs)
    }

    /// One reduction; false at a fixpoint.
    fn step(&self, p: &mut Vec<Pair>) -> bool {
        let n = p.len();
        if self.family == FamilyKind::MinMin {
            let d = self.dominance.as_ref().expect("min-min has dominance");
            // p_j ⊣ p_i lets p_j absorb p_i
            for i in 0..n {
                if (0..n).any(|j| j != i && d.dashv(p[j], p[i])) {
                    p.remove(i);
                    return true;
                }
            }
            return false;
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (p[i], p[j]);
                if a.x != b.x && a.y != b.y {
                    continue;
                }
                let merged = if a.y == b.y {
                    Pair::new(self.merge_x(a.x, b.x), a.y)
                } else {
                    Pair::new(a.x, self.merge_y(a.y, b.y))
                };
                p.remove(j);
                p[i] = merged;
                return true;
            }
        }
        if self.family == FamilyKind::Midpoint {
            if let Some((i, j, k, on_x)) = self.median_triple(p) {
                // expand p_i along the median coordinate, then merge each half into p_j and p_k
                let (a, b, c) = (p[i], p[j], p[k]);
                let (nj, nk) = if on_x {
                    (
                        Pair::new(b.x, self.mid_y(a.y, b.y)),
                        Pair::new(c.x, self.mid_y(a.y, c.y)),
                    )
                } else {
                    (
                        Pair::new(self.mid_x(a.x, b.x), b.y),
                        Pair::new(self.mid_x(a.x, c.x), c.y),
                    )
                };
                p[j] = nj;
                p[k] = nk;
                p.remove(i);
                return true;
            }
        }
        false
    }

    fn merge_x(&self, a: Elem, b: Elem) -> Elem {
        match self.family {
            FamilyKind::LatticeMinMin => self.space.x().meet(a, b).expect("lattice meet"),
            FamilyKind::LambdaLambda => a.min(b),
            FamilyKind::Midpoint => self.mid_x(a, b),
            FamilyKind::MinMin => unreachable!("min-min uses dominance"),
        }
    }

    fn merge_y(&self, a: Elem, b: Elem) -> Elem {
        match self.family {
            FamilyKind::LatticeMinMin => self.space.y().meet(a, b).expect("lattice meet"),
            FamilyKind::LambdaLambda => a.min(b),
            FamilyKind::Midpoint => self.mid_y(a, b),
            FamilyKind::MinMin => unreachable!("min-min uses dominance"),
        }
    }

    fn mid_x(&self, a: Elem, b: Elem) -> Elem {
        self.space.x().midpoint(a, b).expect("midpoint carrier")
    }

    fn mid_y(&self, a: Elem, b: Elem) -> Elem {
        self.space.y().midpoint(a, b).expect("midpoint carrier")
    }
}

pub fn canonicalize(
    w: &Word,
    family: FamilyKind,
    x: Arc<Carrier>,
    y: Arc<Carrier>,
) -> Result<Word> {
    Canonicalizer::new(family, x, y)?.canonicalize(w)
}

pub fn freeness(w: &Word, family: FamilyKind, x: Arc<Carrier>, y: Arc<Carrier>) -> Result<bool> {
    Canonicalizer::new(family, x, y)?.is_free(w)
}

const MAX_EXAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniquenessProbe {
    /// Classes containing at least one free word of size `<= bound`.
    pub classes_with_free_words: usize,
    /// Classes containing two or more distinct free words.
    pub classes_with_several_free_words: usize,
    /// Classes whose words canonicalize to more than one form.
    pub classes_with_several_canonical_forms: usize,
    pub examples: Vec<(Word, Word)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntanglementCrossCheck {
    /// Words where "oracle says entangled" equals "canonical form has length >= 2".
    pub agree: usize,
    pub disagree: usize,
    /// Oracle-entangled words whose canonical form is a single pair.
    pub entangled_with_single_pair_form: usize,
    /// Canonical form of length >= 2, yet the class has a singleton.
    pub separable_with_long_form: usize,
    pub examples: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonAuditReport {
    pub family: FamilyKind,
    pub bound: usize,
    pub oracle_bound: usize,
    pub oracle_stability: Stability,
    pub words: usize,
    pub sound: usize,
    pub free: usize,
    pub idempotent: usize,
    pub size_monotone: usize,
    pub unsound_examples: Vec<Word>,
    pub uniqueness: UniquenessProbe,
    pub entanglement: EntanglementCrossCheck,
    pub findings: Vec<String>,
}

impl CanonAuditReport {
    pub fn all_sound(&self) -> bool {
        self.sound == self.words
    }

    pub fn all_free(&self) -> bool {
        self.free == self.words
    }

    pub fn all_idempotent(&self) -> bool {
        self.idempotent == self.words
    }
}

/// Saturates at `bound + headroom` and audits every word of size `<= bound`.
pub fn canon_oracle_audit(
    family: FamilyKind,
    x: Arc<Carrier>,
    y: Arc<Carrier>,
    bound: usize,
    opts: &SaturationOptions,
) -> Result<CanonAuditReport> {
    let canon = Canonicalizer::new(family, x.clone(), y.clone())?;
    let rules = Arc::new(family.rule_system(x, y)?);
    let oracle = saturate(rules, bound + family.detour_headroom(), opts)?;
    canon_oracle_audit_with(&canon, &oracle, bound)
}

/// As [`canon_oracle_audit`] with a precomputed oracle. The oracle must use
/// the family's rules and reach `bound + headroom`.
pub fn canon_oracle_audit_with(
    canon: &Canonicalizer,
    oracle: &ClassIndex,
    bound: usize,
) -> Result<CanonAuditReport> {
    let family = canon.family();
    let needed = bound + family.detour_headroom();
    if oracle.bound() < needed {
        return Err(Error::Precondition(format!(
            "oracle bound {} is below the {needed} this audit needs",
            oracle.bound()
        )));
    }
    if *oracle.rules().as_ref() != canon.rule_system()? {
        return Err(Error::Precondition(format!(
            "oracle rules are not the {family} rules"
        )));
    }
    let count = oracle.universe().partition_point(|w| w.len() <= bound);
    let words = &oracle.universe()[..count];

    struct Row {
        canon: Word,
        sound: bool,
        free: bool,
        idempotent: bool,
        class: usize,
    }
    let rows: Vec<Result<Row>> = par::map(words, |w| {
        let c = canon.canonicalize(w)?;
        Ok(Row {
            sound: oracle.equivalent(w, &c)?,
            free: canon.is_free(&c)?,
            idempotent: canon.canonicalize(&c)? == c,
            class: oracle.class_id(w)?,
            canon: c,
        })
    });
    let rows: Vec<Row> = rows.into_iter().collect::<Result<_>>()?;

    let mut unsound_examples = Vec::new();
    let mut entanglement = EntanglementCrossCheck {
        agree: 0,
        disagree: 0,
        entangled_with_single_pair_form: 0,
        separable_with_long_form: 0,
        examples: Vec::new(),
    };
    let mut forms: BTreeMap<usize, Vec<&Word>> = BTreeMap::new();
    let mut free_words: BTreeMap<usize, Vec<&Word>> = BTreeMap::new();
    for (w, r) in words.iter().zip(&rows) {
        if !r.sound && unsound_examples.len() < MAX_EXAMPLES {
            unsound_examples.push(w.clone());
        }
        let entangled = !oracle.classes()[r.class].has_singleton;
        let long = r.canon.len() >= 2;
        if entangled == long {
            entanglement.agree += 1;
        } else {
            entanglement.disagree += 1;
            if entangled {
                entanglement.entangled_with_single_pair_form += 1;
            } else {
                entanglement.separable_with_long_form += 1;
            }
            if entanglement.examples.len() < MAX_EXAMPLES {
                entanglement.examples.push(w.clone());
            }
        }
        let f = forms.entry(r.class).or_default();
        if !f.contains(&&r.canon) {
            f.push(&r.canon);
        }
        if canon.is_free(w)? {
            free_words.entry(r.class).or_default().push(w);
        }
    }

    let several: Vec<&Vec<&Word>> = free_words.values().filter(|v| v.len() > 1).collect();
    let uniqueness = UniquenessProbe {
        classes_with_free_words: free_words.len(),
        classes_with_several_free_words: several.len(),
        classes_with_several_canonical_forms: forms.values().filter(|v| v.len() > 1).count(),
        examples: several
            .iter()
            .take(MAX_EXAMPLES)
            .map(|v| (v[0].clone(), v[1].clone()))
            .collect(),
    };

    let count_of = |f: fn(&Row) -> bool| rows.iter().filter(|r| f(r)).count();
    let mut findings = Vec::new();
    if entanglement.separable_with_long_form > 0 {
        findings.push(format!(
            "{} words have a {} canonical form of length at least two, yet their class contains a single pair \
             {}; a long free form does not witness entanglement for {family}",
            entanglement.separable_with_long_form,
            family.freeness_name(),
            crate::quotient::qualifier(oracle.bound(), oracle.stability()),
        ));
    }
    if entanglement.entangled_with_single_pair_form > 0 {
        findings.push(format!(
            "{} entangled words canonicalize to a single pair",
            entanglement.entangled_with_single_pair_form
        ));
    }
    if uniqueness.classes_with_several_free_words > 0 {
        findings.push(format!(
            "{} classes contain more than one {} word; free forms are not unique",
            uniqueness.classes_with_several_free_words,
            family.freeness_name()
        ));
    }
    Ok(CanonAuditReport {
        family,
        bound,
        oracle_bound: oracle.bound(),
        oracle_stability: oracle.stability(),
        words: words.len(),
        sound: count_of(|r| r.sound),
        free: count_of(|r| r.free),
        idempotent: count_of(|r| r.idempotent),
        size_monotone: words
            .iter()
            .zip(&rows)
            .filter(|(w, r)| r.canon.len() <= w.len())
            .count(),
        unsound_examples,
        uniqueness,
        entanglement,
        findings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<Carrier> {
        Arc::new(Carrier::chain(n).unwrap())
    }

    fn z5() -> Arc<Carrier> {
        Arc::new(Carrier::modring(5).unwrap())
    }

    fn w(p: &[(Elem, Elem)]) -> Word {
        Word::from_tuples(p)
    }

    #[test]
    fn family_names_round_trip() {
        for f in FamilyKind::ALL {
            assert_eq!(f.to_string().parse::<FamilyKind>().unwrap(), f);
        }
        assert!("max-max".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn carrier_requirements() {
        let plain = Arc::new(Carrier::plain_sized(2).unwrap());
        assert!(Canonicalizer::new(FamilyKind::MinMin, plain.clone(), plain.clone()).is_err());
        assert!(Canonicalizer::new(FamilyKind::LambdaLambda, plain.clone(), plain).is_ok());
        let z4 = Arc::new(Carrier::modring(4).unwrap());
        assert_eq!(
            Canonicalizer::new(FamilyKind::Midpoint, z4.clone(), z4).unwrap_err(),
            Error::EvenModulus(4)
        );
    }

    #[test]
    fn path_freeness() {
        let c = Canonicalizer::new(FamilyKind::MinMin, chain(2), chain(2)).unwrap();
        assert!(c.is_free(&w(&[(0, 1), (1, 0)])).unwrap());
        assert!(!c.is_free(&w(&[(0, 0), (0, 1)])).unwrap());
        assert!(!c.is_free(&w(&[(1, 1), (1, 1)])).unwrap());
        assert!(c.is_free(&w(&[(0, 0), (1, 1)])).unwrap());
    }

    #[test]
    fn dominance_relation() {
        let d = DominancePredicate::new(&Carrier::chain(3).unwrap(), &Carrier::chain(3).unwrap())
            .unwrap();
        let p = |x, y| Pair::new(x, y);
        assert!(d.dashv(p(1, 1), p(1, 1)));
        assert!(d.dashv(p(0, 2), p(2, 2)));
        assert!(!d.dashv(p(2, 2), p(0, 2)));
        assert!(d.bowtie(p(0, 1), p(1, 0)));
        // not transitive
        assert!(
            d.dashv(p(0, 0), p(0, 1)) && d.dashv(p(0, 1), p(1, 1)) && !d.dashv(p(0, 0), p(1, 1))
        );
    }

    #[test]
    fn min_min_examples() {
        let c = Canonicalizer::new(FamilyKind::MinMin, chain(2), chain(2)).unwrap();
        assert_eq!(c.canonicalize(&w(&[(0, 0), (0, 1)])).unwrap(), w(&[(0, 0)]));
        assert_eq!(c.canonicalize(&w(&[(1, 1), (1, 1)])).unwrap(), w(&[(1, 1)]));
        assert_eq!(
            c.canonicalize(&w(&[(0, 1), (1, 0)])).unwrap(),
            w(&[(0, 1), (1, 0)])
        );
    }

    #[test]
    fn reversed_chain_absorbs_downward() {
        let rev = Arc::new(Carrier::chain(2).unwrap().dual().unwrap());
        let c = Canonicalizer::new(FamilyKind::MinMin, rev.clone(), rev).unwrap();
        assert_eq!(c.canonicalize(&w(&[(0, 0), (0, 1)])).unwrap(), w(&[(0, 1)]));
    }

    #[test]
    fn lattice_merge_and_wedges() {
        // diamond: 0 bottom, 1 and 2 incomparable, 3 top
        let meet = vec![
            vec![0, 0, 0, 0],
            vec![0, 1, 0, 1],
            vec![0, 0, 2, 2],
            vec![0, 1, 2, 3],
        ];
        let labels = ["0", "a", "b", "1"].map(String::from).to_vec();
        let d = Arc::new(Carrier::lattice(labels, &meet).unwrap());
        let c = Canonicalizer::new(FamilyKind::LatticeMinMin, d.clone(), d.clone()).unwrap();
        assert_eq!(c.canonicalize(&w(&[(1, 3), (2, 3)])).unwrap(), w(&[(0, 3)]));
        let v = WedgePredicate::new(d.clone(), d).unwrap();
        assert!(v.wedge_related(Pair::new(0, 3), Pair::new(1, 3), Pair::new(2, 3)));
        assert!(!c.is_free(&w(&[(0, 3), (1, 3), (2, 3)])).unwrap());
        assert!(c.is_free(&w(&[(1, 3), (2, 3)])).unwrap());
    }

    #[test]
    fn lambda_keeps_smaller() {
        let plain = Arc::new(Carrier::plain_sized(3).unwrap());
        let c = Canonicalizer::new(FamilyKind::LambdaLambda, plain.clone(), plain).unwrap();
        assert_eq!(c.canonicalize(&w(&[(2, 0), (1, 0)])).unwrap(), w(&[(1, 0)]));
        assert_eq!(
            c.canonicalize(&w(&[(0, 0), (1, 1)])).unwrap(),
            w(&[(0, 0), (1, 1)])
        );
        assert_eq!(
            c.canonicalize(&w(&[(0, 0), (0, 1), (1, 1)])).unwrap(),
            w(&[(0, 0), (1, 1)])
        );
    }

    #[test]
    fn midpoint_examples() {
        let c = Canonicalizer::new(FamilyKind::Midpoint, z5(), z5()).unwrap();
        assert_eq!(c.canonicalize(&w(&[(1, 4), (3, 4)])).unwrap(), w(&[(2, 4)]));
        let diag = w(&[(0, 0), (1, 1), (2, 2)]);
        assert!(!c.is_free(&diag).unwrap());
        let out = c.canonicalize(&diag).unwrap();
        assert!(out.len() <= 2);
        assert!(c.is_free(&out).unwrap());
    }

    #[test]
    fn audit_min_min_chain2() {
        let r = canon_oracle_audit(
            FamilyKind::MinMin,
            chain(2),
            chain(2),
            3,
            &SaturationOptions::default(),
        )
        .unwrap();
        assert_eq!(r.words, 34);
        assert!(r.all_sound() && r.all_free() && r.all_idempotent());
        assert_eq!(r.entanglement.entangled_with_single_pair_form, 0);
        // (0,0)+(1,1) is path-free yet equivalent to (0,0)
        assert_eq!(r.entanglement.separable_with_long_form, 5);
        assert_eq!(r.entanglement.examples[0], w(&[(0, 0), (1, 1)]));
    }

    #[test]
    fn audit_lambda_lambda_flags_long_forms() {
        let p = Arc::new(Carrier::plain_sized(2).unwrap());
        let r = canon_oracle_audit(
            FamilyKind::LambdaLambda,
            p.clone(),
            p,
            3,
            &SaturationOptions::default(),
        )
        .unwrap();
        assert!(r.all_sound());
        assert!(r.entanglement.separable_with_long_form > 0);
        assert!(!r.findings.is_empty());
    }

    #[test]
    fn audit_rejects_low_oracle() {
        let c = Canonicalizer::new(FamilyKind::Midpoint, z5(), z5()).unwrap();
        let rules = Arc::new(c.rule_system().unwrap());
        let oracle = saturate(rules, 2, &SaturationOptions::without_stability()).unwrap();
        assert!(matches!(
            canon_oracle_audit_with(&c, &oracle, 2),
            Err(Error::Precondition(_))
        ));
        assert!(canon_oracle_audit_with(&c, &oracle, 1).is_ok());
    }
}
