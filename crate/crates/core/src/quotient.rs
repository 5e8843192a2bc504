//! Entanglement verdicts, class censuses, and the refinement map between rule
//! systems.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::engine::{ClassIndex, Stability};
use crate::error::{Error, Result};
use crate::words::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separability {
    /// The class contains a single pair `x ⊗ y`.
    Separable,
    /// No singleton word was found in the class up to the bound.
    EntangledAtBound,
}

impl fmt::Display for Separability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Separability::Separable => "separable",
            Separability::EntangledAtBound => "entangled-at-bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntanglementVerdict {
    pub word: Word,
    pub class_id: usize,
    pub status: Separability,
    pub bound: usize,
    pub stability: Stability,
}

impl EntanglementVerdict {
    pub fn is_entangled(&self) -> bool {
        self.status == Separability::EntangledAtBound
    }

    /// `(at bound L, stable)` style qualifier.
    pub fn qualifier(&self) -> String {
        qualifier(self.bound, self.stability)
    }
}

pub fn qualifier(bound: usize, stability: Stability) -> String {
    format!("(at bound {bound}, {stability})")
}

fn status_of(idx: &ClassIndex, class_id: usize) -> Separability {
    if idx.classes()[class_id].has_singleton {
        Separability::Separable
    } else {
        Separability::EntangledAtBound
    }
}

/// Separable iff the word's class has a singleton member.
pub fn is_entangled(w: &Word, idx: &ClassIndex) -> Result<EntanglementVerdict> {
    let class_id = idx.class_id(w)?;
    Ok(EntanglementVerdict {
        word: w.clone(),
        class_id,
        status: status_of(idx, class_id),
        bound: idx.bound(),
        stability: idx.stability(),
    })
}

/// Verdict for a class id.
pub fn class_status(idx: &ClassIndex, class_id: usize) -> Result<Separability> {
    idx.class(class_id)?;
    Ok(status_of(idx, class_id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub words: usize,
    pub classes: usize,
    pub separable: usize,
    pub entangled: usize,
    /// class size -> number of classes of that size
    pub class_size_histogram: BTreeMap<usize, usize>,
    pub bound: usize,
    pub stability: Stability,
}

pub fn census(idx: &ClassIndex) -> Census {
    let separable = idx.classes().iter().filter(|c| c.has_singleton).count();
    let mut class_size_histogram = BTreeMap::new();
    for c in idx.classes() {
        *class_size_histogram.entry(c.members).or_insert(0) += 1;
    }
    Census {
        words: idx.universe().len(),
        classes: idx.classes().len(),
        separable,
        entangled: idx.classes().len() - separable,
        class_size_histogram,
        bound: idx.bound(),
        stability: idx.stability(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinementCounterexample {
    /// Two words in one class of the smaller system ...
    pub first: Word,
    pub second: Word,
    /// ... that land in different classes of the larger system.
    pub big_classes: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinementReport {
    pub holds: bool,
    pub small_classes: usize,
    pub big_classes: usize,
    pub counterexample: Option<RefinementCounterexample>,
}

/// Checks that every class under the smaller rule system lies inside a single
/// class under the larger one.
pub fn refinement_check(small: &ClassIndex, big: &ClassIndex) -> Result<RefinementReport> {
    if small.bound() != big.bound() {
        return Err(Error::Precondition(format!(
            "bounds differ: {} vs {}",
            small.bound(),
            big.bound()
        )));
    }
    if !small.rules().is_subsystem_of(big.rules()) {
        return Err(Error::Precondition(
            "the first rule system is not tuple-wise contained in the second".into(),
        ));
    }
    // same carriers and bound imply identical universes
    let mut image: Vec<Option<(usize, u32)>> = vec![None; small.classes().len()];
    let mut counterexample = None;
    for (i, (&s, &b)) in small.partition().iter().zip(big.partition()).enumerate() {
        match image[s as usize] {
            None => image[s as usize] = Some((i, b)),
            Some((first, fb)) if fb != b => {
                counterexample = Some(RefinementCounterexample {
                    first: small.universe()[first].clone(),
                    second: small.universe()[i].clone(),
                    big_classes: (fb as usize, b as usize),
                });
                break;
            }
            Some(_) => {}
        }
    }
    Ok(RefinementReport {
        holds: counterexample.is_none(),
        small_classes: small.classes().len(),
        big_classes: big.classes().len(),
        counterexample,
    })
}

/// The member minimal under (size, canonical linearization).
pub fn class_representative(class_id: usize, idx: &ClassIndex) -> Result<&Word> {
    let meta = idx.class(class_id)?;
    Ok(&idx.universe()[meta.representative])
}
