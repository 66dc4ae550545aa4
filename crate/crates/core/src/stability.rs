//! Non-crisp categorization: a mass over feature subsets becomes a
//! probability over induced contexts, object sets get a stability index
//! (how much weight sits on contexts where the set is closed), and
//! thresholding the index collapses everything into one lattice.

use std::collections::{BTreeMap, BTreeSet};

use bit_set::BitSet;
use serde::{Deserialize, Serialize};

use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::evidential::MassFunction;

const INDEX_TOL: f64 = 1e-9;

/// A probability over contexts induced from one base, keyed by the focal
/// agenda that induces each context.
#[derive(Debug, Clone)]
pub struct ContextDistribution {
    base: FormalContext,
    /// (feature mask, weight), canonically ordered by the focal name set
    weights: Vec<(BitSet, f64)>,
}

impl ContextDistribution {
    /// Re-keys a mass over the base's features as context weights.
    /// The mass must be conflict-free and share the base feature set.
    pub fn from_mass(base: &FormalContext, mass: &MassFunction) -> Result<Self> {
        if mass.conflict() != 0.0 {
            return Err(Error::invalid(
                "context distributions need a mass with no weight on the empty agenda",
            ));
        }
        let base_feats: BTreeSet<&String> = base.features().iter().collect();
        let mass_feats: BTreeSet<&String> = mass.universe().iter().collect();
        if base_feats != mass_feats {
            return Err(Error::Mismatch {
                what: "universes",
                detail: "mass universe differs from the context features".into(),
            });
        }
        let mut weights = Vec::new();
        for (names, w) in mass.focal_sets() {
            weights.push((base.feature_set(&names)?, w));
        }
        Ok(ContextDistribution {
            base: base.clone(),
            weights,
        })
    }

    pub fn base(&self) -> &FormalContext {
        &self.base
    }

    /// Focal agendas with their weights, name-level.
    pub fn focal_agendas(&self) -> Vec<(BTreeSet<String>, f64)> {
        self.weights
            .iter()
            .map(|(mask, w)| (self.base.feature_names(mask).into_iter().collect(), *w))
            .collect()
    }

    /// Probability that `names` is Galois-stable in the induced context.
    pub fn stability_index(&self, names: &BTreeSet<String>) -> Result<f64> {
        let set = self.base.object_set(names)?;
        Ok(self.stability_index_set(&set))
    }

    pub fn stability_index_set(&self, set: &BitSet) -> f64 {
        self.weights
            .iter()
            .filter(|(mask, _)| self.base.is_stable_within(set, mask))
            .map(|(_, w)| w)
            .sum()
    }

    /// Same contract as [`ContextDistribution::stability_index`], decided
    /// by naive per-context closure over a plain boolean matrix. Kept
    /// free of the bitset machinery so the two paths check each other.
    pub fn stability_index_bruteforce(&self, names: &BTreeSet<String>) -> Result<f64> {
        let objects = self.base.objects().len();
        if objects > 16 {
            return Err(Error::SizeLimit(format!(
                "brute-force stability supports at most 16 objects, got {objects}"
            )));
        }
        let members: Vec<bool> = {
            let mut v = vec![false; objects];
            for n in names {
                v[self.base.object_position(n)?] = true;
            }
            v
        };
        let mut total = 0.0;
        for (mask, w) in &self.weights {
            let features: Vec<usize> = mask.iter().collect();
            let grid: Vec<Vec<bool>> = (0..objects)
                .map(|a| features.iter().map(|&x| self.base.has(a, x)).collect())
                .collect();
            // shared features of the candidate set
            let mut common = vec![true; features.len()];
            for (a, row) in grid.iter().enumerate() {
                if members[a] {
                    for (i, cell) in row.iter().enumerate() {
                        if !cell {
                            common[i] = false;
                        }
                    }
                }
            }
            // objects carrying all shared features
            let mut closure = vec![false; objects];
            for (a, row) in grid.iter().enumerate() {
                closure[a] = common.iter().enumerate().all(|(i, &c)| !c || row[i]);
            }
            if closure == members {
                total += w;
            }
        }
        Ok(total)
    }

    /// The induced context of the heaviest focal agenda. Ties prefer the
    /// larger agenda, then the lexicographically smaller feature list.
    pub fn most_likely_categorization(&self) -> Result<FormalContext> {
        let mut ranked = self.focal_agendas();
        if ranked.is_empty() {
            return Err(Error::invalid("empty context distribution"));
        }
        ranked.sort_by(|(ya, wa), (yb, wb)| {
            wb.partial_cmp(wa)
                .unwrap()
                .then(yb.len().cmp(&ya.len()))
                .then(ya.cmp(yb))
        });
        self.base.induced(&ranked[0].0)
    }

    /// The classes whose stability index reaches `beta`. Candidates are
    /// the concept extents of the focal induced contexts; any set stable
    /// somewhere is such an extent, and is already closed in the base.
    pub fn beta_categorization(&self, beta: f64) -> Result<BetaCategorization> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!("beta {beta} outside [0, 1]")));
        }
        let mut candidates: BTreeMap<Vec<usize>, BitSet> = BTreeMap::new();
        for (mask, _) in &self.weights {
            let names: BTreeSet<String> = self.base.feature_names(mask).into_iter().collect();
            let induced = self.base.induced(&names)?;
            for concept in induced.concept_lattice().concepts {
                let key: Vec<usize> = concept.extent.iter().collect();
                candidates.entry(key).or_insert(concept.extent);
            }
        }
        let mut classes = Vec::new();
        for (key, set) in candidates {
            let index = self.stability_index_set(&set);
            if index + INDEX_TOL >= beta {
                let intent = self.base.derive_object_set(&set);
                classes.push(StabilityClass {
                    extent: self.base.object_names(&set),
                    intent: self.base.feature_names(&intent),
                    index,
                    key,
                });
            }
        }
        classes.sort_by(|a, b| (a.key.len(), &a.key).cmp(&(b.key.len(), &b.key)));
        let edges = inclusion_covering(&classes);
        Ok(BetaCategorization {
            beta,
            classes,
            edges,
        })
    }
}

/// One class of a beta categorization: a base-closed object set, its
/// intent in the base context, and its stability index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub extent: Vec<String>,
    pub intent: Vec<String>,
    pub index: f64,
    #[serde(skip)]
    key: Vec<usize>,
}

/// Classes ordered by inclusion; `edges` is the covering relation,
/// pointing from the smaller class to the larger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCategorization {
    pub beta: f64,
    pub classes: Vec<StabilityClass>,
    pub edges: Vec<(usize, usize)>,
}

impl BetaCategorization {
    pub fn extents(&self) -> Vec<&[String]> {
        self.classes.iter().map(|c| c.extent.as_slice()).collect()
    }

    pub fn contains_extent(&self, extent: &BTreeSet<String>) -> bool {
        self.classes
            .iter()
            .any(|c| c.extent.iter().cloned().collect::<BTreeSet<_>>() == *extent)
    }
}

fn inclusion_covering(classes: &[StabilityClass]) -> Vec<(usize, usize)> {
    let sets: Vec<BTreeSet<&str>> = classes
        .iter()
        .map(|c| c.extent.iter().map(|s| s.as_str()).collect())
        .collect();
    let mut edges = Vec::new();
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i == j || !sets[i].is_subset(&sets[j]) || sets[i] == sets[j] {
                continue;
            }
            let covered = (0..sets.len()).any(|k| {
                k != i
                    && k != j
                    && sets[i].is_subset(&sets[k])
                    && sets[k].is_subset(&sets[j])
                    && sets[k] != sets[i]
                    && sets[k] != sets[j]
            });
            if !covered {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    edges
}
