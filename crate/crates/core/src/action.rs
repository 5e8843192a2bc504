//! Permutation groups acting on carriers, the induced action on words, and
//! exhaustive audits that the action descends to the quotient and preserves
//! entanglement.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::carrier::{Carrier, CarrierKind, Elem};
use crate::engine::ClassIndex;
use crate::error::{Error, Result};
use crate::par;
use crate::quotient::{class_status, Separability};
use crate::rules::{compatibility_check, Compatibility};
use crate::words::{Pair, Word};

/// Default ceiling on materialized group order.
pub const DEFAULT_MAX_GROUP_ORDER: usize = 100_000;

/// A bijection of `0..n`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Perm(Vec<Elem>);

impl Perm {
    pub fn new(images: Vec<Elem>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i as usize >= n || std::mem::replace(&mut seen[i as usize], true) {
                return Err(Error::Invalid(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(Perm(images))
    }

    pub fn identity(n: usize) -> Self {
        Perm((0..n).map(|i| i as Elem).collect())
    }

    #[inline]
    pub fn apply(&self, e: Elem) -> Elem {
        self.0[e as usize]
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&e| self.0[e as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &e) in self.0.iter().enumerate() {
            inv[e as usize] = i as Elem;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &e)| i == e as usize)
    }

    pub fn images(&self) -> &[Elem] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The finite permutation group generated by `generators`, fully materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermAction {
    carrier: Arc<Carrier>,
    generators: Vec<Perm>,
    /// Sorted; the identity is first.
    elements: Vec<Perm>,
}

impl PermAction {
    pub fn generated(
        carrier: Arc<Carrier>,
        generators: Vec<Perm>,
        max_order: usize,
    ) -> Result<Self> {
        let n = carrier.len();
        if let Some(g) = generators.iter().find(|g| g.len() != n) {
            return Err(Error::CarrierMismatch(format!(
                "generator {:?} has length {}, carrier has {n} elements",
                g.images(),
                g.len()
            )));
        }
        let id = Perm::identity(n);
        let mut seen: BTreeSet<Perm> = BTreeSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(p) = queue.pop_front() {
            for g in &generators {
                let q = g.compose(&p);
                if seen.insert(q.clone()) {
                    if seen.len() > max_order {
                        return Err(Error::ResourceLimit {
                            what: "group order",
                            needed: seen.len() as u128,
                            limit: max_order as u128,
                        });
                    }
                    queue.push_back(q);
                }
            }
        }
        Ok(PermAction {
            carrier,
            generators,
            elements: seen.into_iter().collect(),
        })
    }

    pub fn trivial(carrier: Arc<Carrier>) -> Self {
        let n = carrier.len();
        PermAction {
            carrier,
            generators: Vec::new(),
            elements: vec![Perm::identity(n)],
        }
    }

    /// The cyclic group of translations `x -> x + t` on a modular ring.
    pub fn translations(carrier: Arc<Carrier>) -> Result<Self> {
        let p = match (carrier.kind(), carrier.modulus()) {
            (CarrierKind::ModRing, Some(p)) => p,
            _ => {
                return Err(Error::MissingStructure(
                    "translations need a modring carrier".into(),
                ))
            }
        };
        let shift = Perm::new((0..p).map(|i| ((i + 1) % p) as Elem).collect())?;
        PermAction::generated(carrier, vec![shift], p)
    }

    pub fn carrier(&self) -> &Arc<Carrier> {
        &self.carrier
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Actions of `G` on `X` and `H` on `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionPair {
    pub g: PermAction,
    pub h: PermAction,
}

impl ActionPair {
    pub fn new(g: PermAction, h: PermAction) -> Self {
        ActionPair { g, h }
    }

    pub fn trivial(x: Arc<Carrier>, y: Arc<Carrier>) -> Self {
        ActionPair {
            g: PermAction::trivial(x),
            h: PermAction::trivial(y),
        }
    }

    /// All `(g, h)` in `G × H`.
    pub fn elements(&self) -> impl Iterator<Item = (&Perm, &Perm)> + Clone {
        self.g
            .elements()
            .iter()
            .flat_map(move |g| self.h.elements().iter().map(move |h| (g, h)))
    }

    pub fn order(&self) -> usize {
        self.g.order() * self.h.order()
    }
}

/// `(g, h) · w`: the pointwise image multiset.
pub fn induced_action(g: &Perm, h: &Perm, w: &Word) -> Word {
    let mut pairs: Vec<Pair> = w
        .pairs()
        .iter()
        .map(|p| Pair::new(g.apply(p.x), h.apply(p.y)))
        .collect();
    pairs.sort_unstable();
    Word::from_sorted(pairs)
}

pub fn orbit(w: &Word, actions: &ActionPair) -> BTreeSet<Word> {
    actions
        .elements()
        .map(|(g, h)| induced_action(g, h, w))
        .collect()
}

/// A rewrite edge whose image under some `(g, h)` crosses classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WellDefinedViolation {
    pub z: Word,
    pub z2: Word,
    pub g: Perm,
    pub h: Perm,
    pub image: Word,
    pub image2: Word,
}

/// A class representative whose image under `(g, h)` changes verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceViolation {
    pub representative: Word,
    pub g: Perm,
    pub h: Perm,
    pub image: Word,
    pub verdict: Separability,
    pub image_verdict: Separability,
}

fn check_preconditions(actions: &ActionPair, idx: &ClassIndex) -> Result<()> {
    let rules = idx.rules();
    if !actions.g.carrier().same_as(rules.x()) || !actions.h.carrier().same_as(rules.y()) {
        return Err(Error::CarrierMismatch(
            "actions are not over the index's carriers".into(),
        ));
    }
    let sides = [(&actions.g, rules.x_rules()), (&actions.h, rules.y_rules())];
    for (action, side_rules) in sides {
        for rule in side_rules {
            if let Compatibility::Incompatible { counterexample } =
                compatibility_check(action, rule)?
            {
                return Err(Error::Incompatible {
                    rule: rule.name().to_string(),
                    counterexample: counterexample.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// For every in-universe rewrite edge `(z, z')` and every `(g, h)`, checks that
/// the images share a class. Refuses to run unless every rule is compatible
/// with the action.
pub fn well_defined_audit(
    actions: &ActionPair,
    idx: &ClassIndex,
) -> Result<Vec<WellDefinedViolation>> {
    check_preconditions(actions, idx)?;
    let universe = idx.universe();
    let group: Vec<(&Perm, &Perm)> = actions.elements().collect();
    let per_word: Vec<Vec<WellDefinedViolation>> = par::map_range(universe.len(), |i| {
        let z = &universe[i];
        let mut out = Vec::new();
        for z2 in idx.neighbors(z) {
            // each undirected edge once
            if &z2 <= z {
                continue;
            }
            for &(g, h) in &group {
                let image = induced_action(g, h, z);
                let image2 = induced_action(g, h, &z2);
                let same = match (idx.class_id(&image), idx.class_id(&image2)) {
                    (Ok(a), Ok(b)) => a == b,
                    _ => false,
                };
                if !same {
                    out.push(WellDefinedViolation {
                        z: z.clone(),
                        z2: z2.clone(),
                        g: g.clone(),
                        h: h.clone(),
                        image,
                        image2,
                    });
                }
            }
        }
        out
    });
    Ok(per_word.into_iter().flatten().collect())
}

/// For every class representative `w` and every `(g, h)`, checks that `w` and
/// `(g, h) w` get the same separable/entangled verdict.
pub fn invariance_audit(
    actions: &ActionPair,
    idx: &ClassIndex,
) -> Result<Vec<InvarianceViolation>> {
    let wd = well_defined_audit(actions, idx)?;
    if !wd.is_empty() {
        return Err(Error::Precondition(format!(
            "the action is not well defined on the quotient ({} violations)",
            wd.len()
        )));
    }
    let group: Vec<(&Perm, &Perm)> = actions.elements().collect();
    let per_class: Vec<Vec<InvarianceViolation>> = par::map(idx.classes(), |meta| {
        let rep = &idx.universe()[meta.representative];
        let verdict = class_status(idx, meta.id).expect("known class");
        let mut out = Vec::new();
        for &(g, h) in &group {
            let image = induced_action(g, h, rep);
            let image_class = idx
                .class_id(&image)
                .expect("the action preserves word size");
            let image_verdict = class_status(idx, image_class).expect("known class");
            if image_verdict != verdict {
                out.push(InvarianceViolation {
                    representative: rep.clone(),
                    g: g.clone(),
                    h: h.clone(),
                    image,
                    verdict,
                    image_verdict,
                });
            }
        }
        out
    });
    Ok(per_class.into_iter().flatten().collect())
}
