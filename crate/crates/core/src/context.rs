//! Binary formal contexts, Galois derivations and concept lattices.
//!
//! A context is a set of objects, a set of features, and an incidence
//! relation between them. Extents and intents are kept as bitsets indexed
//! by the position of the identifier in the construction order; both the
//! per-object and per-feature index are built up front so derivations are
//! cheap in either direction. All values are immutable once constructed.

use std::collections::{BTreeMap, BTreeSet};

use bit_set::BitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary objects-by-features incidence structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ContextDoc", try_from = "ContextDoc")]
pub struct FormalContext {
    objects: Vec<String>,
    features: Vec<String>,
    object_index: BTreeMap<String, usize>,
    feature_index: BTreeMap<String, usize>,
    /// rows[a] = features of object a
    rows: Vec<BitSet>,
    /// cols[x] = objects carrying feature x (transpose of `rows`)
    cols: Vec<BitSet>,
}

/// On-disk form: `{objects, features, incidence: [[obj, feat], ...]}`
/// with the pair list sorted and deduplicated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextDoc {
    pub objects: Vec<String>,
    pub features: Vec<String>,
    pub incidence: Vec<(usize, usize)>,
}

impl From<FormalContext> for ContextDoc {
    fn from(ctx: FormalContext) -> Self {
        let mut incidence = Vec::new();
        for (a, row) in ctx.rows.iter().enumerate() {
            for x in row.iter() {
                incidence.push((a, x));
            }
        }
        incidence.sort_unstable();
        ContextDoc {
            objects: ctx.objects,
            features: ctx.features,
            incidence,
        }
    }
}

impl TryFrom<ContextDoc> for FormalContext {
    type Error = Error;

    fn try_from(doc: ContextDoc) -> Result<Self> {
        FormalContext::new(doc.objects, doc.features, &doc.incidence)
    }
}

impl FormalContext {
    /// Builds a context from identifier lists and index pairs.
    /// Identifiers must be unique; pairs must be in range.
    pub fn new(
        objects: Vec<String>,
        features: Vec<String>,
        incidence: &[(usize, usize)],
    ) -> Result<Self> {
        let object_index = index_of(&objects, "object")?;
        let feature_index = index_of(&features, "feature")?;
        let mut rows = vec![BitSet::with_capacity(features.len()); objects.len()];
        let mut cols = vec![BitSet::with_capacity(objects.len()); features.len()];
        for &(a, x) in incidence {
            if a >= objects.len() {
                return Err(Error::invalid(format!("object index {a} out of range")));
            }
            if x >= features.len() {
                return Err(Error::invalid(format!("feature index {x} out of range")));
            }
            rows[a].insert(x);
            cols[x].insert(a);
        }
        Ok(FormalContext {
            objects,
            features,
            object_index,
            feature_index,
            rows,
            cols,
        })
    }

    /// Same as [`FormalContext::new`] but with name pairs.
    pub fn from_pairs<'a, I>(objects: Vec<String>, features: Vec<String>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let object_index = index_of(&objects, "object")?;
        let feature_index = index_of(&features, "feature")?;
        let mut incidence = Vec::new();
        for (a, x) in pairs {
            let &ai = object_index
                .get(a)
                .ok_or_else(|| Error::unknown("object", a))?;
            let &xi = feature_index
                .get(x)
                .ok_or_else(|| Error::unknown("feature", x))?;
            incidence.push((ai, xi));
        }
        FormalContext::new(objects, features, &incidence)
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn has(&self, object: usize, feature: usize) -> bool {
        self.rows[object].contains(feature)
    }

    pub fn object_position(&self, name: &str) -> Result<usize> {
        self.object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::unknown("object", name))
    }

    pub fn feature_position(&self, name: &str) -> Result<usize> {
        self.feature_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::unknown("feature", name))
    }

    pub fn object_set(&self, names: &BTreeSet<String>) -> Result<BitSet> {
        let mut s = BitSet::with_capacity(self.objects.len());
        for n in names {
            s.insert(self.object_position(n)?);
        }
        Ok(s)
    }

    pub fn feature_set(&self, names: &BTreeSet<String>) -> Result<BitSet> {
        let mut s = BitSet::with_capacity(self.features.len());
        for n in names {
            s.insert(self.feature_position(n)?);
        }
        Ok(s)
    }

    pub fn object_names(&self, set: &BitSet) -> Vec<String> {
        set.iter().map(|i| self.objects[i].clone()).collect()
    }

    pub fn feature_names(&self, set: &BitSet) -> Vec<String> {
        set.iter().map(|i| self.features[i].clone()).collect()
    }

    /// Features common to every object in `set`. The empty set derives to
    /// all features.
    pub fn derive_object_set(&self, set: &BitSet) -> BitSet {
        let mut acc = full_set(self.features.len());
        for a in set.iter() {
            acc.intersect_with(&self.rows[a]);
        }
        acc
    }

    /// Objects carrying every feature in `set`. The empty set derives to
    /// all objects.
    pub fn derive_feature_set(&self, set: &BitSet) -> BitSet {
        let mut acc = full_set(self.objects.len());
        for x in set.iter() {
            acc.intersect_with(&self.cols[x]);
        }
        acc
    }

    /// Extent closure: objects sharing all features common to `set`.
    pub fn close_object_set(&self, set: &BitSet) -> BitSet {
        self.derive_feature_set(&self.derive_object_set(set))
    }

    /// Intent closure.
    pub fn close_feature_set(&self, set: &BitSet) -> BitSet {
        self.derive_object_set(&self.derive_feature_set(set))
    }

    /// Name-level derivation of an object set.
    pub fn derive_objects(&self, names: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let s = self.object_set(names)?;
        Ok(self
            .feature_names(&self.derive_object_set(&s))
            .into_iter()
            .collect())
    }

    /// Name-level derivation of a feature set.
    pub fn derive_features(&self, names: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let s = self.feature_set(names)?;
        Ok(self
            .object_names(&self.derive_feature_set(&s))
            .into_iter()
            .collect())
    }

    pub fn closure_objects(&self, names: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let s = self.object_set(names)?;
        Ok(self
            .object_names(&self.close_object_set(&s))
            .into_iter()
            .collect())
    }

    pub fn closure_features(&self, names: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let s = self.feature_set(names)?;
        Ok(self
            .feature_names(&self.close_feature_set(&s))
            .into_iter()
            .collect())
    }

    /// Whether an object set equals its own closure.
    pub fn is_galois_stable_set(&self, set: &BitSet) -> bool {
        self.close_object_set(set) == *set
    }

    /// Stability inside the sub-context on `features`, decided without
    /// materializing it. `features` must use this context's indices.
    pub fn is_stable_within(&self, set: &BitSet, features: &BitSet) -> bool {
        let mut common = features.clone();
        for a in set.iter() {
            common.intersect_with(&self.rows[a]);
        }
        // common is already inside `features`, so rows need no masking
        let mut extent = BitSet::with_capacity(self.objects.len());
        for a in 0..self.objects.len() {
            if common.is_subset(&self.rows[a]) {
                extent.insert(a);
            }
        }
        extent == *set
    }

    pub fn is_galois_stable(&self, names: &BTreeSet<String>) -> Result<bool> {
        let s = self.object_set(names)?;
        Ok(self.is_galois_stable_set(&s))
    }

    /// The sub-context on a feature subset: objects kept, incidence
    /// restricted, feature order inherited from the base.
    pub fn induced(&self, feature_names: &BTreeSet<String>) -> Result<FormalContext> {
        let keep = self.feature_set(feature_names)?;
        let features: Vec<String> = keep.iter().map(|x| self.features[x].clone()).collect();
        let remap: BTreeMap<usize, usize> = keep
            .iter()
            .enumerate()
            .map(|(new, old)| (old, new))
            .collect();
        let mut incidence = Vec::new();
        for (a, row) in self.rows.iter().enumerate() {
            for x in row.iter() {
                if let Some(&nx) = remap.get(&x) {
                    incidence.push((a, nx));
                }
            }
        }
        FormalContext::new(self.objects.clone(), features, &incidence)
    }

    /// The sub-context on an object subset, object order inherited.
    pub fn restrict_objects(&self, object_names: &BTreeSet<String>) -> Result<FormalContext> {
        let keep = self.object_set(object_names)?;
        let objects: Vec<String> = keep.iter().map(|a| self.objects[a].clone()).collect();
        let mut incidence = Vec::new();
        for (new_a, old_a) in keep.iter().enumerate() {
            for x in self.rows[old_a].iter() {
                incidence.push((new_a, x));
            }
        }
        FormalContext::new(objects, self.features.clone(), &incidence)
    }

    /// Information order between two contexts induced from one base:
    /// smaller means fewer features considered.
    pub fn info_leq(&self, other: &FormalContext) -> Result<bool> {
        self.check_same_objects(other)?;
        Ok(self
            .features
            .iter()
            .all(|x| other.feature_index.contains_key(x)))
    }

    /// Meet in the information order: restrict to the shared features.
    pub fn info_meet(&self, other: &FormalContext) -> Result<FormalContext> {
        self.check_same_objects(other)?;
        let shared: BTreeSet<String> = self
            .features
            .iter()
            .filter(|x| other.feature_index.contains_key(*x))
            .cloned()
            .collect();
        self.induced(&shared)
    }

    /// Join in the information order: union of the feature sets, with the
    /// left operand's feature order first.
    pub fn info_join(&self, other: &FormalContext) -> Result<FormalContext> {
        self.check_same_objects(other)?;
        let mut features = self.features.clone();
        for x in &other.features {
            if !self.feature_index.contains_key(x) {
                features.push(x.clone());
            }
        }
        let feature_index = index_of(&features, "feature")?;
        let mut incidence = Vec::new();
        for (a, row) in self.rows.iter().enumerate() {
            for x in row.iter() {
                incidence.push((a, x));
            }
        }
        for (a, row) in other.rows.iter().enumerate() {
            for x in row.iter() {
                incidence.push((a, feature_index[&other.features[x]]));
            }
        }
        FormalContext::new(self.objects.clone(), features, &incidence)
    }

    fn check_same_objects(&self, other: &FormalContext) -> Result<()> {
        if self.objects != other.objects {
            return Err(Error::Mismatch {
                what: "object sets",
                detail: format!(
                    "{} objects vs {} objects",
                    self.objects.len(),
                    other.objects.len()
                ),
            });
        }
        Ok(())
    }

    /// All formal concepts, enumerated by NextClosure in lectic order of
    /// intents. The first concept is the top (full extent), the last the
    /// bottom (full intent); this order is part of the output contract.
    pub fn concept_lattice(&self) -> ConceptLattice {
        let mut concepts = Vec::new();
        let mut intent = self.close_feature_set(&BitSet::new());
        loop {
            let extent = self.derive_feature_set(&intent);
            concepts.push(Concept {
                extent,
                intent: intent.clone(),
            });
            match self.next_intent(&intent) {
                Some(next) => intent = next,
                None => break,
            }
        }
        let covering = covering_pairs(&concepts);
        let top = 0;
        let bottom = concepts.len() - 1;
        ConceptLattice {
            concepts,
            covering,
            top,
            bottom,
        }
    }

    /// Smallest intent lectically above `a`, or None when `a` is the full
    /// feature set.
    fn next_intent(&self, a: &BitSet) -> Option<BitSet> {
        let n = self.features.len();
        let mut a = a.clone();
        for i in (0..n).rev() {
            if a.contains(i) {
                a.remove(i);
            } else {
                let mut candidate = a.clone();
                candidate.insert(i);
                let closed = self.close_feature_set(&candidate);
                let lectic = closed.iter().take_while(|&j| j < i).all(|j| a.contains(j));
                if lectic {
                    return Some(closed);
                }
            }
        }
        None
    }
}

/// A fixpoint of the two derivations: extent and intent determine each
/// other inside the owning context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub extent: BitSet,
    pub intent: BitSet,
}

impl Concept {
    /// Concept order: smaller extent means a more specific concept.
    pub fn leq(&self, other: &Concept) -> bool {
        self.extent.is_subset(&other.extent)
    }
}

/// All concepts of a context plus their covering relation (edges point
/// from the smaller to the larger extent).
#[derive(Debug, Clone)]
pub struct ConceptLattice {
    pub concepts: Vec<Concept>,
    pub covering: Vec<(usize, usize)>,
    pub top: usize,
    pub bottom: usize,
}

impl ConceptLattice {
    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Extents as sorted index lists, in enumeration order.
    pub fn extent_sets(&self) -> Vec<Vec<usize>> {
        self.concepts
            .iter()
            .map(|c| c.extent.iter().collect())
            .collect()
    }
}

fn covering_pairs(concepts: &[Concept]) -> Vec<(usize, usize)> {
    let n = concepts.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !concepts[i].extent.is_subset(&concepts[j].extent) {
                continue;
            }
            if concepts[i].extent == concepts[j].extent {
                continue;
            }
            let covered = (0..n).any(|k| {
                k != i
                    && k != j
                    && concepts[i].extent.is_subset(&concepts[k].extent)
                    && concepts[k].extent.is_subset(&concepts[j].extent)
                    && concepts[k].extent != concepts[i].extent
                    && concepts[k].extent != concepts[j].extent
            });
            if !covered {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

fn full_set(len: usize) -> BitSet {
    let mut s = BitSet::with_capacity(len);
    for i in 0..len {
        s.insert(i);
    }
    s
}

fn index_of(names: &[String], kind: &'static str) -> Result<BTreeMap<String, usize>> {
    let mut map = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(Error::invalid(format!("duplicate {kind} identifier {n:?}")));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    /// Two objects, three features, object `a` has everything, `b` only x2.
    fn toy() -> FormalContext {
        FormalContext::from_pairs(
            vec!["a".into(), "b".into()],
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec![("a", "x1"), ("a", "x2"), ("a", "x3"), ("b", "x2")],
        )
        .unwrap()
    }

    #[test]
    fn derive_both_sides() {
        let ctx = toy();
        assert_eq!(
            ctx.derive_objects(&names(&["a", "b"])).unwrap(),
            names(&["x2"])
        );
        assert_eq!(
            ctx.derive_features(&names(&["x1", "x2", "x3"])).unwrap(),
            names(&["a"])
        );
        // vacuous quantification
        assert_eq!(
            ctx.derive_objects(&BTreeSet::new()).unwrap(),
            names(&["x1", "x2", "x3"])
        );
        assert_eq!(
            ctx.derive_features(&BTreeSet::new()).unwrap(),
            names(&["a", "b"])
        );
    }

    #[test]
    fn derive_unknown_identifier() {
        let ctx = toy();
        assert!(ctx.derive_objects(&names(&["zz"])).is_err());
        assert!(ctx.derive_features(&names(&["x9"])).is_err());
    }

    #[test]
    fn closure_depends_on_induced_features() {
        let ctx = toy();
        assert_eq!(ctx.closure_objects(&names(&["a"])).unwrap(), names(&["a"]));
        let narrowed = ctx.induced(&names(&["x2"])).unwrap();
        assert_eq!(
            narrowed.closure_objects(&names(&["a"])).unwrap(),
            names(&["a", "b"])
        );
    }

    #[test]
    fn stability_toy_cases() {
        let ctx = toy();
        let on_x1x2 = ctx.induced(&names(&["x1", "x2"])).unwrap();
        assert!(on_x1x2.is_galois_stable(&names(&["a"])).unwrap());
        assert!(ctx.is_galois_stable(&names(&["a", "b"])).unwrap());
    }

    #[test]
    fn induced_identity_and_empty() {
        let ctx = toy();
        let same = ctx.induced(&names(&["x1", "x2", "x3"])).unwrap();
        assert_eq!(same, ctx);
        let empty = ctx.induced(&BTreeSet::new()).unwrap();
        let lat = empty.concept_lattice();
        assert_eq!(lat.len(), 1);
        assert_eq!(lat.concepts[0].extent.len(), 2);
    }

    #[test]
    fn empty_incidence_has_two_concepts() {
        let ctx = FormalContext::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            &[],
        )
        .unwrap();
        let lat = ctx.concept_lattice();
        assert_eq!(lat.len(), 2);
        assert_eq!(lat.concepts[lat.top].extent.len(), 2);
        assert_eq!(lat.concepts[lat.top].intent.len(), 0);
        assert_eq!(lat.concepts[lat.bottom].extent.len(), 0);
        assert_eq!(lat.concepts[lat.bottom].intent.len(), 2);
    }

    #[test]
    fn info_order_and_combinations() {
        let ctx = toy();
        let p1 = ctx.induced(&names(&["x1", "x2"])).unwrap();
        let p2 = ctx.induced(&names(&["x2", "x3"])).unwrap();
        let single = ctx.induced(&names(&["x1"])).unwrap();
        assert!(single.info_leq(&p1).unwrap());
        assert!(p1.info_leq(&p1).unwrap());
        assert!(!p1.info_leq(&p2).unwrap());
        assert!(!p2.info_leq(&p1).unwrap());

        let meet = p1.info_meet(&p2).unwrap();
        assert_eq!(meet.features(), &["x2".to_string()]);
        assert!(!meet.is_galois_stable(&names(&["a"])).unwrap());

        let join = p1.info_join(&p1).unwrap();
        assert_eq!(join, p1);
        let meet_full = p1.info_meet(&ctx.induced(&names(&["x1", "x2", "x3"])).unwrap());
        assert_eq!(meet_full.unwrap(), p1);
    }

    #[test]
    fn info_order_rejects_object_mismatch() {
        let ctx = toy();
        let other = FormalContext::new(vec!["z".into()], vec!["x1".into()], &[]).unwrap();
        assert!(ctx.info_leq(&other).is_err());
    }

    #[test]
    fn concept_order_examples() {
        let ctx = toy();
        let lat = ctx.concept_lattice();
        let bottom = &lat.concepts[lat.bottom];
        for c in &lat.concepts {
            assert!(bottom.leq(c));
        }
    }

    #[test]
    fn json_round_trip_is_normalized() {
        let ctx = toy();
        let text = serde_json::to_string(&ctx).unwrap();
        let back: FormalContext = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ctx);
        let again = serde_json::to_string(&back).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn rejects_duplicate_identifiers() {
        let dup = FormalContext::new(vec!["a".into(), "a".into()], vec!["x".into()], &[]);
        assert!(dup.is_err());
    }

    mod enumeration_props {
        use super::*;
        use proptest::prelude::*;

        fn context_strategy() -> impl Strategy<Value = FormalContext> {
            (1usize..=6, 1usize..=6)
                .prop_flat_map(|(n, m)| {
                    proptest::collection::vec(any::<bool>(), n * m)
                        .prop_map(move |bits| (n, m, bits))
                })
                .prop_map(|(n, m, bits)| {
                    let objects = (0..n).map(|i| format!("o{i}")).collect();
                    let features = (0..m).map(|i| format!("f{i}")).collect();
                    let incidence: Vec<(usize, usize)> = bits
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| **b)
                        .map(|(k, _)| (k / m, k % m))
                        .collect();
                    FormalContext::new(objects, features, &incidence).unwrap()
                })
        }

        proptest! {
            /// NextClosure finds exactly the closed object sets.
            #[test]
            fn enumeration_matches_subset_closure(ctx in context_strategy()) {
                let lattice = ctx.concept_lattice();
                let got: BTreeSet<Vec<usize>> = lattice.extent_sets().into_iter().collect();
                let mut expected = BTreeSet::new();
                let n = ctx.objects().len();
                for mask in 0u32..(1 << n) {
                    let mut g = BitSet::with_capacity(n);
                    for a in 0..n {
                        if mask & (1 << a) != 0 {
                            g.insert(a);
                        }
                    }
                    let closed = ctx.close_object_set(&g);
                    expected.insert(closed.iter().collect::<Vec<usize>>());
                }
                prop_assert_eq!(got, expected);
                // every concept is its own closure in both directions
                for c in &lattice.concepts {
                    prop_assert_eq!(ctx.derive_object_set(&c.extent), c.intent.clone());
                    prop_assert_eq!(ctx.derive_feature_set(&c.intent), c.extent.clone());
                }
            }
        }
    }
}
