//! Bounded equality saturation over the truncated word space.
//!
//! The universe is every word of size `<= L` in canonical order. Rewrite edges
//! are generated on demand from the rule tables and merged into a union-find
//! in canonical order, so class ids and representatives are reproducible.
//! Edges whose endpoint exceeds the bound are dropped; a stability check
//! compares the induced partition against a run at `L + 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::carrier::Elem;
use crate::error::{Error, Result};
use crate::par;
use crate::rules::{RelationalRule, RuleSystem};
use crate::words::{Pair, Word, WordSpace, DEFAULT_MAX_WORDS};

#[derive(Debug, Clone)]
pub struct SaturationOptions {
    /// Also saturate at `L + 1` and compare induced partitions.
    pub check_stability: bool,
    pub max_words: usize,
}

impl Default for SaturationOptions {
    fn default() -> Self {
        SaturationOptions {
            check_stability: true,
            max_words: DEFAULT_MAX_WORDS,
        }
    }
}

impl SaturationOptions {
    pub fn without_stability() -> Self {
        SaturationOptions {
            check_stability: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    /// The partition at `L` equals the one induced from `L + 1`.
    Stable,
    Unstable,
    Unchecked,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Unchecked => "unchecked",
        })
    }
}

/// Minimal disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns true if the two sets were distinct.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    /// Class ids numbered by first occurrence in index order.
    pub fn canonical_labels(&mut self) -> Vec<u32> {
        let n = self.parent.len();
        let mut root_label: HashMap<u32, u32> = HashMap::new();
        (0..n as u32)
            .map(|i| {
                let r = self.find(i);
                let next = root_label.len() as u32;
                *root_label.entry(r).or_insert(next)
            })
            .collect()
    }
}

/// Relabels a partition so ids appear in first-occurrence order.
pub fn canonical_relabel(labels: &[u32]) -> Vec<u32> {
    let mut map: HashMap<u32, u32> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len() as u32;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// One side's rules, keyed by sorted component multisets. Each entry maps a
/// multiset to every multiset it may be replaced with (both directions).
#[derive(Debug, Clone, Default)]
struct SideTable {
    arities: Vec<usize>,
    map: HashMap<Vec<Elem>, Vec<Vec<Elem>>>,
}

impl SideTable {
    fn build(rules: &[RelationalRule]) -> Self {
        let mut map: HashMap<Vec<Elem>, BTreeSet<Vec<Elem>>> = HashMap::new();
        let mut arities = BTreeSet::new();
        for r in rules {
            arities.insert(r.left_arity());
            arities.insert(r.right_arity());
            for t in r.tuples() {
                let (l, rt) = t.split_at(r.left_arity());
                let mut l = l.to_vec();
                let mut rt = rt.to_vec();
                l.sort_unstable();
                rt.sort_unstable();
                if l == rt {
                    continue;
                }
                map.entry(l.clone()).or_default().insert(rt.clone());
                map.entry(rt).or_default().insert(l);
            }
        }
        SideTable {
            arities: arities.into_iter().collect(),
            map: map
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
        }
    }
}

/// Precompiled rewrite tables for a rule system.
#[derive(Debug, Clone)]
pub struct RewriteTable {
    x_side: SideTable,
    y_side: SideTable,
}

/// Distinct sub-multisets of a sorted slice with exactly `k` elements.
fn sub_multisets(items: &[Elem], k: usize, mut visit: impl FnMut(&[Elem])) {
    fn go(
        items: &[Elem],
        k: usize,
        start: usize,
        cur: &mut Vec<Elem>,
        visit: &mut dyn FnMut(&[Elem]),
    ) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        let mut i = start;
        while i < items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, visit);
            cur.pop();
            let v = items[i];
            while i < items.len() && items[i] == v {
                i += 1;
            }
        }
    }
    let mut cur = Vec::with_capacity(k);
    go(items, k, 0, &mut cur, &mut visit);
}

impl RewriteTable {
    pub fn new(rules: &RuleSystem) -> Self {
        RewriteTable {
            x_side: SideTable::build(rules.x_rules()),
            y_side: SideTable::build(rules.y_rules()),
        }
    }

    /// Every word reachable from `w` by one rule application in either
    /// direction, excluding `w` itself and anything larger than `bound`.
    pub fn neighbors(&self, w: &Word, bound: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        // X-side rules act within a fixed y (fiber over y), Y-side within a fixed x.
        self.side_neighbors(w, bound, &self.x_side, true, &mut out);
        self.side_neighbors(w, bound, &self.y_side, false, &mut out);
        out.remove(w);
        out
    }

    fn side_neighbors(
        &self,
        w: &Word,
        bound: usize,
        table: &SideTable,
        x_side: bool,
        out: &mut BTreeSet<Word>,
    ) {
        let mut fibers: BTreeMap<Elem, Vec<Elem>> = BTreeMap::new();
        for p in w.pairs() {
            let (fiber, comp) = if x_side { (p.y, p.x) } else { (p.x, p.y) };
            fibers.entry(fiber).or_default().push(comp);
        }
        let make = |fiber: Elem, comp: Elem| {
            if x_side {
                Pair::new(comp, fiber)
            } else {
                Pair::new(fiber, comp)
            }
        };
        for (&fiber, comps) in &mut fibers {
            comps.sort_unstable();
            for &k in &table.arities {
                if k > comps.len() {
                    break;
                }
                sub_multisets(comps, k, |sel| {
                    let Some(targets) = table.map.get(sel) else {
                        return;
                    };
                    for t in targets {
                        if w.len() - k + t.len() > bound {
                            continue;
                        }
                        let mut pairs: Vec<Pair> = w.pairs().to_vec();
                        for &c in sel {
                            let pos = pairs
                                .iter()
                                .position(|&p| p == make(fiber, c))
                                .expect("selected pair present");
                            pairs.remove(pos);
                        }
                        pairs.extend(t.iter().map(|&c| make(fiber, c)));
                        pairs.sort_unstable();
                        out.insert(Word::from_sorted(pairs));
                    }
                });
            }
        }
    }
}

/// All words one rewrite away from `w` with size `<= bound`.
pub fn rewrite_neighbors(w: &Word, rules: &RuleSystem, bound: usize) -> BTreeSet<Word> {
    RewriteTable::new(rules).neighbors(w, bound)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassMeta {
    pub id: usize,
    pub members: usize,
    pub min_size: usize,
    pub has_singleton: bool,
    /// Universe index of the minimal member.
    pub representative: usize,
}

/// A partition of the bounded word universe into rewrite classes.
#[derive(Debug, Clone)]
pub struct ClassIndex {
    rules: Arc<RuleSystem>,
    table: Arc<RewriteTable>,
    space: WordSpace,
    bound: usize,
    universe: Vec<Word>,
    class_of: Vec<u32>,
    classes: Vec<ClassMeta>,
    stability: Stability,
}

fn partition(table: &RewriteTable, universe: &[Word], bound: usize) -> Vec<u32> {
    let edges: Vec<Vec<u32>> = par::map_range(universe.len(), |i| {
        table
            .neighbors(&universe[i], bound)
            .iter()
            .filter_map(|n| universe.binary_search(n).ok())
            .filter(|&j| j > i)
            .map(|j| j as u32)
            .collect()
    });
    let mut uf = UnionFind::new(universe.len());
    for (i, js) in edges.iter().enumerate() {
        for &j in js {
            uf.union(i as u32, j);
        }
    }
    uf.canonical_labels()
}

fn build_meta(universe: &[Word], class_of: &[u32]) -> Vec<ClassMeta> {
    let mut classes: Vec<ClassMeta> = Vec::new();
    for (i, (w, &c)) in universe.iter().zip(class_of).enumerate() {
        let c = c as usize;
        if c == classes.len() {
            classes.push(ClassMeta {
                id: c,
                members: 0,
                min_size: w.len(),
                has_singleton: false,
                representative: i,
            });
        }
        let m = &mut classes[c];
        m.members += 1;
        m.has_singleton |= w.is_singleton();
    }
    classes
}

/// Computes the rewrite classes of all words of size `<= bound`.
pub fn saturate(
    rules: Arc<RuleSystem>,
    bound: usize,
    opts: &SaturationOptions,
) -> Result<ClassIndex> {
    let space = WordSpace::new(rules.x().clone(), rules.y().clone());
    let table = Arc::new(RewriteTable::new(&rules));
    let universe = space.enumerate(bound, opts.max_words)?;
    let class_of = partition(&table, &universe, bound);

    let stability = if opts.check_stability {
        let bigger = space.enumerate(bound + 1, opts.max_words)?;
        let big_classes = partition(&table, &bigger, bound + 1);
        // the L universe is a prefix of the L+1 universe
        if canonical_relabel(&big_classes[..universe.len()]) == class_of {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    } else {
        Stability::Unchecked
    };

    let classes = build_meta(&universe, &class_of);
    Ok(ClassIndex {
        rules,
        table,
        space,
        bound,
        universe,
        class_of,
        classes,
        stability,
    })
}

impl ClassIndex {
    /// Rebuilds an index from a stored partition (e.g. a cache entry). The
    /// partition must be canonically labeled and match the universe size.
    pub fn from_partition(
        rules: Arc<RuleSystem>,
        bound: usize,
        class_of: Vec<u32>,
        stability: Stability,
        max_words: usize,
    ) -> Result<ClassIndex> {
        let space = WordSpace::new(rules.x().clone(), rules.y().clone());
        let universe = space.enumerate(bound, max_words)?;
        if class_of.len() != universe.len() {
            return Err(Error::Invalid(format!(
                "stored partition has {} entries, universe has {}",
                class_of.len(),
                universe.len()
            )));
        }
        if canonical_relabel(&class_of) != class_of {
            return Err(Error::Invalid(
                "stored partition is not canonically labeled".into(),
            ));
        }
        let table = Arc::new(RewriteTable::new(&rules));
        let classes = build_meta(&universe, &class_of);
        Ok(ClassIndex {
            rules,
            table,
            space,
            bound,
            universe,
            class_of,
            classes,
            stability,
        })
    }

    pub fn rules(&self) -> &Arc<RuleSystem> {
        &self.rules
    }

    pub fn rewrite_table(&self) -> &RewriteTable {
        &self.table
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn stability(&self) -> Stability {
        self.stability
    }

    pub fn universe(&self) -> &[Word] {
        &self.universe
    }

    /// Class id per universe index.
    pub fn partition(&self) -> &[u32] {
        &self.class_of
    }

    pub fn classes(&self) -> &[ClassMeta] {
        &self.classes
    }

    pub fn class(&self, id: usize) -> Result<&ClassMeta> {
        self.classes.get(id).ok_or(Error::UnknownClass(id))
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.universe.binary_search(w).ok()
    }

    pub fn class_id(&self, w: &Word) -> Result<usize> {
        self.index_of(w)
            .map(|i| self.class_of[i] as usize)
            .ok_or_else(|| Error::OutOfBound(self.space.format(w)))
    }

    /// Universe indices of the members of a class, in canonical order.
    pub fn members(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.class_of
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c as usize == id)
            .map(|(i, _)| i)
    }

    /// True iff both words lie in one class at this bound. Out-of-universe
    /// words are an error, not `false`.
    pub fn equivalent(&self, w1: &Word, w2: &Word) -> Result<bool> {
        Ok(self.class_id(w1)? == self.class_id(w2)?)
    }

    /// Neighbors of `w` inside this index's universe.
    pub fn neighbors(&self, w: &Word) -> BTreeSet<Word> {
        self.table.neighbors(w, self.bound)
    }
}

pub fn equivalent(w1: &Word, w2: &Word, idx: &ClassIndex) -> Result<bool> {
    idx.equivalent(w1, w2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carrier::Carrier;
    use crate::rules::{midpoint_relation, BinaryOp, BuiltinOp};

    fn min_min(n: usize) -> Arc<RuleSystem> {
        let c = Arc::new(Carrier::chain(n).unwrap());
        let min = BinaryOp::builtin(BuiltinOp::Min, c).unwrap();
        Arc::new(RuleSystem::from_ops(&min, &min).unwrap())
    }

    fn w(p: &[(Elem, Elem)]) -> Word {
        Word::from_tuples(p)
    }

    #[test]
    fn sub_multisets_are_distinct() {
        let mut seen = Vec::new();
        sub_multisets(&[0, 0, 1], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn min_min_neighbors() {
        let rules = min_min(2);
        let n = rewrite_neighbors(&w(&[(0, 1), (1, 1)]), &rules, 4);
        assert!(n.contains(&w(&[(0, 1)])));
        let n = rewrite_neighbors(&w(&[(0, 0)]), &rules, 4);
        assert!(n.contains(&w(&[(0, 0), (1, 0)])));
        // bound drops expansions
        assert!(rewrite_neighbors(&w(&[(0, 0)]), &rules, 1).is_empty());
    }

    #[test]
    fn midpoint_neighbors() {
        let z5 = Arc::new(Carrier::modring(5).unwrap());
        let rules = RuleSystem::new(
            z5.clone(),
            z5.clone(),
            vec![midpoint_relation(z5.clone()).unwrap()],
            vec![midpoint_relation(z5).unwrap()],
        )
        .unwrap();
        for y in 0..5 {
            assert!(rewrite_neighbors(&w(&[(1, y), (3, y)]), &rules, 3).contains(&w(&[(2, y)])));
        }
    }

    #[test]
    fn min_min_chain2_classes() {
        let idx = saturate(min_min(2), 4, &SaturationOptions::default()).unwrap();
        assert_eq!(idx.classes().len(), 5);
        assert_eq!(idx.stability(), Stability::Stable);
        assert!(idx
            .equivalent(&w(&[(0, 0), (1, 1)]), &w(&[(0, 0)]))
            .unwrap());
        assert!(!idx.equivalent(&w(&[(0, 1)]), &w(&[(1, 0)])).unwrap());
        assert!(matches!(
            idx.equivalent(&w(&[(0, 0); 5]), &w(&[(0, 0)])),
            Err(Error::OutOfBound(_))
        ));
    }

    #[test]
    fn lambda_lambda_collapses() {
        let c = Arc::new(Carrier::plain_sized(2).unwrap());
        let l = BinaryOp::builtin(BuiltinOp::Lambda, c).unwrap();
        let rules = Arc::new(RuleSystem::from_ops(&l, &l).unwrap());
        let idx = saturate(rules.clone(), 3, &SaturationOptions::default()).unwrap();
        assert!(idx.classes().iter().all(|c| c.has_singleton));
        // the collapse of (a,y1)+(b,y2) needs a size-3 detour
        let idx2 = saturate(rules, 2, &SaturationOptions::default()).unwrap();
        assert_eq!(idx2.stability(), Stability::Unstable);
        assert!(!idx2
            .equivalent(&w(&[(0, 0), (1, 1)]), &w(&[(0, 0)]))
            .unwrap());
    }

    #[test]
    fn singleton_classes_contain_themselves() {
        let idx = saturate(min_min(2), 1, &SaturationOptions::without_stability()).unwrap();
        assert_eq!(idx.stability(), Stability::Unchecked);
        for (i, word) in idx.universe().iter().enumerate() {
            assert_eq!(idx.class_id(word).unwrap(), idx.partition()[i] as usize);
        }
        assert_eq!(idx.classes().len(), 4);
    }

    #[test]
    fn from_partition_round_trip() {
        let rules = min_min(2);
        let idx = saturate(rules.clone(), 3, &SaturationOptions::default()).unwrap();
        let again = ClassIndex::from_partition(
            rules.clone(),
            3,
            idx.partition().to_vec(),
            idx.stability(),
            1000,
        )
        .unwrap();
        assert_eq!(again.classes(), idx.classes());
        let mut bad = idx.partition().to_vec();
        bad.pop();
        assert!(ClassIndex::from_partition(rules, 3, bad, Stability::Stable, 1000).is_err());
    }

    #[test]
    fn union_find_labels() {
        let mut uf = UnionFind::new(4);
        uf.union(3, 1);
        assert_eq!(uf.canonical_labels(), vec![0, 1, 2, 1]);
        assert_eq!(canonical_relabel(&[7, 7, 2, 9, 2]), vec![0, 0, 1, 2, 1]);
    }
}
