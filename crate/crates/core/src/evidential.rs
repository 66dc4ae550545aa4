//! Mass functions over feature subsets: non-crisp agendas, their
//! belief/plausibility/quality readings, combination rules for
//! deliberation, and decidable orderings between masses.
//!
//! A mass distributes weight 1 over focal subsets of a fixed universe.
//! Normalized values keep the empty set at weight 0; the unnormalized
//! conjunctive rule can push weight onto the empty set, which is kept
//! apart in a `conflict` field rather than in the focal map.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::agendas::SubstitutionModel;
use crate::error::{Error, Result};
use crate::ledger::ScaledSchema;

pub const MASS_TOL: f64 = 1e-9;

/// A finitely supported weighting of feature subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    universe: Vec<String>,
    index: BTreeMap<String, usize>,
    focal: BTreeMap<BTreeSet<usize>, f64>,
    conflict: f64,
}

pub type NamedFocal = (BTreeSet<String>, f64);

impl MassFunction {
    /// Builds a mass from named focal sets. Weights are stored as given
    /// (zero-weight sets are dropped, the empty set goes to `conflict`);
    /// use [`MassFunction::validate`] to check the sum/positivity
    /// invariants.
    pub fn new(universe: Vec<String>, focal: Vec<NamedFocal>) -> Result<Self> {
        let index = unique_index(&universe)?;
        let mut out = MassFunction {
            universe,
            index,
            focal: BTreeMap::new(),
            conflict: 0.0,
        };
        for (names, w) in focal {
            if w == 0.0 {
                continue;
            }
            let set = out.to_indices(&names)?;
            if set.is_empty() {
                out.conflict += w;
            } else {
                *out.focal.entry(set).or_insert(0.0) += w;
            }
        }
        Ok(out)
    }

    /// The vacuous mass: everything on the full universe.
    pub fn vacuous(universe: Vec<String>) -> Result<Self> {
        let full: BTreeSet<String> = universe.iter().cloned().collect();
        MassFunction::new(universe, vec![(full, 1.0)])
    }

    /// Distrust of a feature set: weight `alpha` on its complement, the
    /// rest on the universe. Coinciding focal sets merge.
    pub fn irrelevance(
        universe: Vec<String>,
        dropped: &BTreeSet<String>,
        alpha: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("trust {alpha} outside [0, 1]")));
        }
        let full: BTreeSet<String> = universe.iter().cloned().collect();
        for f in dropped {
            if !full.contains(f) {
                return Err(Error::unknown("feature", f.clone()));
            }
        }
        let complement: BTreeSet<String> = full.difference(dropped).cloned().collect();
        MassFunction::new(universe, vec![(complement, alpha), (full, 1.0 - alpha)])
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    /// Mass trapped on the empty set by an unnormalized combination.
    pub fn conflict(&self) -> f64 {
        self.conflict
    }

    pub fn focal_len(&self) -> usize {
        self.focal.len()
    }

    /// Focal sets with their weights, names sorted, in canonical order.
    pub fn focal_sets(&self) -> Vec<NamedFocal> {
        self.focal
            .iter()
            .map(|(set, &w)| (self.to_names(set), w))
            .collect()
    }

    pub fn weight_of(&self, names: &BTreeSet<String>) -> Result<f64> {
        let set = self.to_indices(names)?;
        if set.is_empty() {
            return Ok(self.conflict);
        }
        Ok(self.focal.get(&set).copied().unwrap_or(0.0))
    }

    /// Violations of the mass invariants; empty iff well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut findings = Vec::new();
        let mut total = self.conflict;
        for (set, &w) in &self.focal {
            total += w;
            if w <= 0.0 {
                findings.push(format!(
                    "focal set {:?} has nonpositive weight {w}",
                    self.to_names(set)
                ));
            }
        }
        if self.conflict < 0.0 {
            findings.push(format!("negative conflict {}", self.conflict));
        }
        if (total - 1.0).abs() > MASS_TOL {
            findings.push(format!("weights sum to {total}, not 1"));
        }
        findings
    }

    /// Sum of weights of focal sets contained in `names`.
    pub fn belief_of(&self, names: &BTreeSet<String>) -> Result<f64> {
        let y = self.to_indices(names)?;
        Ok(self
            .focal
            .iter()
            .filter(|(set, _)| set.is_subset(&y))
            .map(|(_, &w)| w)
            .sum())
    }

    /// Sum of weights of focal sets meeting `names`.
    pub fn plausibility_of(&self, names: &BTreeSet<String>) -> Result<f64> {
        let y = self.to_indices(names)?;
        Ok(self
            .focal
            .iter()
            .filter(|(set, _)| !set.is_disjoint(&y))
            .map(|(_, &w)| w)
            .sum())
    }

    /// Sum of weights of focal sets containing `names`.
    pub fn quality_of(&self, names: &BTreeSet<String>) -> Result<f64> {
        let y = self.to_indices(names)?;
        Ok(self
            .focal
            .iter()
            .filter(|(set, _)| set.is_superset(&y))
            .map(|(_, &w)| w)
            .sum())
    }

    /// Shape flags: simple (at most one focal set besides the universe),
    /// consonant (focal sets form a chain), crisp (exactly one focal set).
    pub fn classify(&self) -> MassShape {
        let full: BTreeSet<usize> = (0..self.universe.len()).collect();
        let besides_full = self.focal.keys().filter(|s| **s != full).count();
        let sets: Vec<&BTreeSet<usize>> = self.focal.keys().collect();
        let consonant = sets.iter().enumerate().all(|(i, a)| {
            sets.iter()
                .skip(i + 1)
                .all(|b| a.is_subset(b) || b.is_subset(a))
        });
        MassShape {
            simple: besides_full <= 1 && self.conflict == 0.0,
            consonant: consonant && self.conflict == 0.0,
            crisp: self.focal.len() == 1 && self.conflict == 0.0,
        }
    }

    /// Normalized conjunctive combination: products land on focal
    /// intersections, empty intersections are dropped and the rest is
    /// rescaled. Errors when everything conflicts.
    pub fn combine_dempster(&self, other: &MassFunction) -> Result<MassFunction> {
        let raw = self.combine_conjunctive_unnormalized(other)?;
        let kept = 1.0 - raw.conflict;
        if kept <= MASS_TOL {
            return Err(Error::TotalConflict);
        }
        let mut focal = BTreeMap::new();
        for (set, w) in raw.focal {
            focal.insert(set, w / kept);
        }
        Ok(MassFunction {
            universe: raw.universe,
            index: raw.index,
            focal,
            conflict: 0.0,
        })
    }

    /// Unnormalized conjunctive combination; the weight of empty
    /// intersections accumulates in `conflict`.
    pub fn combine_conjunctive_unnormalized(&self, other: &MassFunction) -> Result<MassFunction> {
        self.check_same_universe(other)?;
        let mut focal: BTreeMap<BTreeSet<usize>, f64> = BTreeMap::new();
        let mut conflict = self.conflict + other.conflict - self.conflict * other.conflict;
        for (a, &wa) in &self.focal {
            for (b, &wb) in &other.focal {
                let meet: BTreeSet<usize> = a.intersection(b).copied().collect();
                if meet.is_empty() {
                    conflict += wa * wb;
                } else {
                    *focal.entry(meet).or_insert(0.0) += wa * wb;
                }
            }
        }
        Ok(MassFunction {
            universe: self.universe.clone(),
            index: self.index.clone(),
            focal,
            conflict,
        })
    }

    /// Disjunctive combination: products land on focal unions.
    pub fn combine_disjunctive(&self, other: &MassFunction) -> Result<MassFunction> {
        self.check_same_universe(other)?;
        if self.conflict != 0.0 || other.conflict != 0.0 {
            return Err(Error::invalid(
                "disjunctive combination expects conflict-free inputs",
            ));
        }
        let mut focal: BTreeMap<BTreeSet<usize>, f64> = BTreeMap::new();
        for (a, &wa) in &self.focal {
            for (b, &wb) in &other.focal {
                let join: BTreeSet<usize> = a.union(b).copied().collect();
                *focal.entry(join).or_insert(0.0) += wa * wb;
            }
        }
        Ok(MassFunction {
            universe: self.universe.clone(),
            index: self.index.clone(),
            focal,
            conflict: 0.0,
        })
    }

    /// Substitution-mediated combination between two named agents: each
    /// focal set is first rewritten by the other agent's substitution
    /// preferences, then combined per `rule`.
    pub fn combine_substitution(
        &self,
        own_agent: &str,
        other: &MassFunction,
        other_agent: &str,
        substitution: &SubstitutionModel,
        rule: SubstitutionRule,
    ) -> Result<MassFunction> {
        self.check_same_universe(other)?;
        if self.conflict != 0.0 || other.conflict != 0.0 {
            return Err(Error::invalid(
                "substitution combination expects conflict-free inputs",
            ));
        }
        let mut focal: BTreeMap<BTreeSet<usize>, f64> = BTreeMap::new();
        let mut conflict = 0.0;
        for (z1, &w1) in &self.focal {
            let rewritten1 = substitution.substitute(other_agent, &self.to_names(z1));
            let y1 = self.to_indices(&rewritten1)?;
            for (z2, &w2) in &other.focal {
                let rewritten2 = substitution.substitute(own_agent, &other.to_names(z2));
                let y2 = self.to_indices(&rewritten2)?;
                let target: BTreeSet<usize> = match rule {
                    SubstitutionRule::Disjunctive => y1.union(&y2).copied().collect(),
                    _ => y1.intersection(&y2).copied().collect(),
                };
                if target.is_empty() {
                    conflict += w1 * w2;
                } else {
                    *focal.entry(target).or_insert(0.0) += w1 * w2;
                }
            }
        }
        // a sparse substitution relation can rewrite both sides to nothing,
        // so either unnormalized variant may leave weight on the empty set
        if let SubstitutionRule::ConjunctiveNormalized = rule {
            let kept = 1.0 - conflict;
            if kept <= MASS_TOL {
                return Err(Error::TotalConflict);
            }
            for w in focal.values_mut() {
                *w /= kept;
            }
            conflict = 0.0;
        }
        Ok(MassFunction {
            universe: self.universe.clone(),
            index: self.index.clone(),
            focal,
            conflict,
        })
    }

    /// Re-orders the universe, keeping the same weights. The new universe
    /// must contain exactly the same names.
    pub fn reindex(&self, universe: &[String]) -> Result<MassFunction> {
        let as_set: BTreeSet<&String> = universe.iter().collect();
        let own: BTreeSet<&String> = self.universe.iter().collect();
        if as_set != own {
            return Err(Error::Mismatch {
                what: "universes",
                detail: "feature sets differ".into(),
            });
        }
        let mut out = MassFunction::new(universe.to_vec(), self.focal_sets())?;
        out.conflict = self.conflict;
        Ok(out)
    }

    /// Weight-wise comparison within tolerance.
    pub fn approx_eq(&self, other: &MassFunction, tol: f64) -> bool {
        if self.universe != other.universe || self.focal.len() != other.focal.len() {
            return false;
        }
        if (self.conflict - other.conflict).abs() > tol {
            return false;
        }
        self.focal.iter().all(|(set, w)| {
            other
                .focal
                .get(set)
                .map(|v| (w - v).abs() <= tol)
                .unwrap_or(false)
        })
    }

    fn to_indices(&self, names: &BTreeSet<String>) -> Result<BTreeSet<usize>> {
        names
            .iter()
            .map(|n| {
                self.index
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::unknown("feature", n.clone()))
            })
            .collect()
    }

    fn to_names(&self, set: &BTreeSet<usize>) -> BTreeSet<String> {
        set.iter().map(|&i| self.universe[i].clone()).collect()
    }

    fn check_same_universe(&self, other: &MassFunction) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::Mismatch {
                what: "universes",
                detail: "masses combine only over one feature universe".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MassShape {
    pub simple: bool,
    pub consonant: bool,
    pub crisp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutionRule {
    Disjunctive,
    ConjunctiveNormalized,
    ConjunctiveUnnormalized,
}

/// Recovers the mass whose belief function is `bel`, by Möbius inversion
/// over the subset lattice. `bel` is indexed by subset bitmask over the
/// universe order; the universe is capped at 16 features.
pub fn mass_from_belief(universe: Vec<String>, bel: &[f64]) -> Result<MassFunction> {
    let n = universe.len();
    if n > 16 {
        return Err(Error::SizeLimit(format!(
            "belief inversion supports at most 16 features, got {n}"
        )));
    }
    if bel.len() != 1 << n {
        return Err(Error::invalid(format!(
            "expected {} belief entries, got {}",
            1usize << n,
            bel.len()
        )));
    }
    let full = (1usize << n) - 1;
    if (bel[full] - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(format!(
            "not a belief function: bel(universe) = {}",
            bel[full]
        )));
    }
    let mut m = bel.to_vec();
    for i in 0..n {
        for mask in 0..=full {
            if mask & (1 << i) != 0 {
                m[mask] -= m[mask ^ (1 << i)];
            }
        }
    }
    let mut focal = Vec::new();
    for (mask, &w) in m.iter().enumerate() {
        if w < -MASS_TOL {
            return Err(Error::invalid(format!(
                "not a belief function: Möbius weight {w} on mask {mask:#b}"
            )));
        }
        if w > MASS_TOL {
            let names: BTreeSet<String> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| universe[i].clone())
                .collect();
            focal.push((names, w));
        }
    }
    MassFunction::new(universe, focal)
}

/// Belief values of a mass for every subset of its universe, bitmask
/// indexed; the inverse of [`mass_from_belief`] for small universes.
pub fn belief_table(m: &MassFunction) -> Result<Vec<f64>> {
    let n = m.universe.len();
    if n > 16 {
        return Err(Error::SizeLimit(format!(
            "belief tabulation supports at most 16 features, got {n}"
        )));
    }
    let mut table = vec![0.0; 1 << n];
    for (set, &w) in &m.focal {
        let mask: usize = set.iter().fold(0, |acc, &i| acc | (1 << i));
        table[mask] += w;
    }
    for i in 0..n {
        for mask in 0..table.len() {
            if mask & (1 << i) != 0 {
                table[mask] += table[mask ^ (1 << i)];
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    /// Pointwise plausibility comparison over all subsets.
    Pl,
    /// Pointwise quality comparison over all subsets.
    Q,
    /// Up-set restricted comparison: mass of every upward-closed family.
    Upset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    pub holds: bool,
    pub witness: Option<OrderWitness>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderWitness {
    /// A subset on which the pointwise comparison fails.
    Set(BTreeSet<String>),
    /// An upward-closed family of focal sets whose mass decreases.
    Family(Vec<BTreeSet<String>>),
}

/// Decides whether `m1 <= m2` in the chosen ordering, with a witness on
/// failure.
///
/// The pointwise pl and q comparisons quantify over every subset of the
/// universe, but are decided on finitely many representatives: the
/// quality pattern of any subset Y is reproduced by the intersection of
/// the focal sets containing Y, and the belief pattern of any W (which
/// determines pl on the complement) by the union of the focal sets
/// inside W. The up-set comparison only ever sums focal weights, so
/// enumerating upward-closed families of the joint focal poset is exact.
pub fn mass_order(m1: &MassFunction, m2: &MassFunction, kind: OrderKind) -> Result<OrderCheck> {
    let u1: BTreeSet<&String> = m1.universe.iter().collect();
    let u2: BTreeSet<&String> = m2.universe.iter().collect();
    if u1 != u2 {
        return Err(Error::Mismatch {
            what: "universes",
            detail: "orderings compare masses over one feature universe".into(),
        });
    }
    if m1.conflict != 0.0 || m2.conflict != 0.0 {
        return Err(Error::invalid("orderings expect conflict-free masses"));
    }
    let focal: BTreeSet<BTreeSet<String>> = m1
        .focal
        .keys()
        .map(|s| m1.to_names(s))
        .chain(m2.focal.keys().map(|s| m2.to_names(s)))
        .collect();
    let mut focal: Vec<BTreeSet<String>> = focal.into_iter().collect();
    focal.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    if focal.len() > 16 {
        return Err(Error::SizeLimit(format!(
            "ordering decision supports at most 16 distinct focal sets, got {}",
            focal.len()
        )));
    }

    match kind {
        OrderKind::Q => {
            let mut candidates: BTreeSet<BTreeSet<String>> = BTreeSet::new();
            candidates.insert(BTreeSet::new());
            for mask in 1usize..(1 << focal.len()) {
                let mut it = (0..focal.len()).filter(|i| mask & (1 << i) != 0);
                let first = it.next().unwrap();
                let mut meet = focal[first].clone();
                for i in it {
                    meet = meet.intersection(&focal[i]).cloned().collect();
                }
                candidates.insert(meet);
            }
            for y in candidates {
                if m1.quality_of(&y)? > m2.quality_of(&y)? + MASS_TOL {
                    return Ok(OrderCheck {
                        holds: false,
                        witness: Some(OrderWitness::Set(y)),
                    });
                }
            }
            Ok(OrderCheck {
                holds: true,
                witness: None,
            })
        }
        OrderKind::Pl => {
            let mut candidates: BTreeSet<BTreeSet<String>> = BTreeSet::new();
            candidates.insert(BTreeSet::new());
            for mask in 1usize..(1 << focal.len()) {
                let mut join = BTreeSet::new();
                for i in (0..focal.len()).filter(|i| mask & (1 << i) != 0) {
                    join.extend(focal[i].iter().cloned());
                }
                candidates.insert(join);
            }
            let full: BTreeSet<String> = m1.universe.iter().cloned().collect();
            for w in candidates {
                // pl1 <= pl2 everywhere iff bel2 <= bel1 everywhere
                if m2.belief_of(&w)? > m1.belief_of(&w)? + MASS_TOL {
                    let y: BTreeSet<String> = full.difference(&w).cloned().collect();
                    return Ok(OrderCheck {
                        holds: false,
                        witness: Some(OrderWitness::Set(y)),
                    });
                }
            }
            Ok(OrderCheck {
                holds: true,
                witness: None,
            })
        }
        OrderKind::Upset => {
            let weight =
                |m: &MassFunction, s: &BTreeSet<String>| -> f64 { m.weight_of(s).unwrap_or(0.0) };
            for mask in 0usize..(1 << focal.len()) {
                let in_family = |i: usize| mask & (1 << i) != 0;
                let up_closed = (0..focal.len()).all(|i| {
                    !in_family(i)
                        || (0..focal.len()).all(|j| !focal[i].is_subset(&focal[j]) || in_family(j))
                });
                if !up_closed {
                    continue;
                }
                let sum1: f64 = (0..focal.len())
                    .filter(|&i| in_family(i))
                    .map(|i| weight(m1, &focal[i]))
                    .sum();
                let sum2: f64 = (0..focal.len())
                    .filter(|&i| in_family(i))
                    .map(|i| weight(m2, &focal[i]))
                    .sum();
                if sum1 > sum2 + MASS_TOL {
                    let family: Vec<BTreeSet<String>> = (0..focal.len())
                        .filter(|&i| in_family(i))
                        .map(|i| focal[i].clone())
                        .collect();
                    return Ok(OrderCheck {
                        holds: false,
                        witness: Some(OrderWitness::Family(family)),
                    });
                }
            }
            Ok(OrderCheck {
                holds: true,
                witness: None,
            })
        }
    }
}

/// JSON shape for masses: `{universe, focal: [{set, w}], account_level}`.
/// Account-level documents name whole accounts and expand to scaled
/// feature blocks on demand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassDoc {
    pub universe: Vec<String>,
    pub focal: Vec<FocalDoc>,
    #[serde(default)]
    pub account_level: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FocalDoc {
    pub set: Vec<String>,
    pub w: f64,
}

impl MassDoc {
    pub fn from_mass(m: &MassFunction, account_level: bool) -> Self {
        let mut focal: Vec<FocalDoc> = m
            .focal_sets()
            .into_iter()
            .map(|(set, w)| FocalDoc {
                set: set.into_iter().collect(),
                w,
            })
            .collect();
        if m.conflict() > 0.0 {
            // conflict round-trips as an explicit empty focal set
            focal.push(FocalDoc {
                set: Vec::new(),
                w: m.conflict(),
            });
        }
        MassDoc {
            universe: m.universe().to_vec(),
            focal,
            account_level,
        }
    }

    /// The mass exactly as written, over the document's own universe.
    pub fn to_mass(&self) -> Result<MassFunction> {
        MassFunction::new(
            self.universe.clone(),
            self.focal
                .iter()
                .map(|f| (f.set.iter().cloned().collect(), f.w))
                .collect(),
        )
    }

    /// Expands an account-level document to the scaled feature universe
    /// with `intervals` buckets per account.
    pub fn expand(&self, intervals: u32) -> Result<MassFunction> {
        if !self.account_level {
            return self.to_mass();
        }
        let schema = ScaledSchema::new(self.universe.clone(), intervals)?;
        let mut focal = Vec::new();
        for f in &self.focal {
            let mut names = BTreeSet::new();
            for account in &f.set {
                names.extend(schema.block(account)?);
            }
            focal.push((names, f.w));
        }
        MassFunction::new(schema.features(), focal)
    }
}

fn unique_index(names: &[String]) -> Result<BTreeMap<String, usize>> {
    let mut map = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(Error::invalid(format!(
                "duplicate feature {n:?} in universe"
            )));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn accounts() -> Vec<String> {
        [
            "tax",
            "revenue",
            "cost of sales",
            "personal expenses",
            "inventory",
            "other expenses",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    fn full() -> BTreeSet<String> {
        accounts().into_iter().collect()
    }

    /// Account-level versions of the three agent masses used across the
    /// deliberation examples.
    fn m1() -> MassFunction {
        MassFunction::new(accounts(), vec![(set(&["tax"]), 0.6), (full(), 0.4)]).unwrap()
    }

    fn m2() -> MassFunction {
        MassFunction::new(
            accounts(),
            vec![
                (set(&["tax"]), 0.5),
                (set(&["tax", "revenue"]), 0.3),
                (full(), 0.2),
            ],
        )
        .unwrap()
    }

    fn m3() -> MassFunction {
        MassFunction::new(
            accounts(),
            vec![
                (set(&["tax", "revenue", "other expenses"]), 0.9),
                (full(), 0.1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validation_flags_bad_masses() {
        assert!(m1().validate().is_empty());
        let short = MassFunction::new(accounts(), vec![(set(&["tax"]), 0.9)]).unwrap();
        assert_eq!(short.validate().len(), 1);
        let negative =
            MassFunction::new(accounts(), vec![(set(&["tax"]), -0.2), (full(), 1.2)]).unwrap();
        assert!(!negative.validate().is_empty());
    }

    #[test]
    fn belief_plausibility_quality() {
        assert_relative_eq!(m2().belief_of(&set(&["tax", "revenue"])).unwrap(), 0.8);
        assert_relative_eq!(m1().plausibility_of(&set(&["revenue"])).unwrap(), 0.4);
        assert_relative_eq!(m1().quality_of(&BTreeSet::new()).unwrap(), 1.0);
        assert_relative_eq!(m1().belief_of(&full()).unwrap(), 1.0);
        assert_relative_eq!(m1().plausibility_of(&full()).unwrap(), 1.0);
        assert!(m1().belief_of(&set(&["cash"])).is_err());
    }

    #[test]
    fn shape_classification() {
        let s1 = m1().classify();
        assert!(s1.simple && s1.consonant && !s1.crisp);
        let s2 = m2().classify();
        assert!(!s2.simple && s2.consonant);
        let incomparable = MassFunction::new(
            accounts(),
            vec![(set(&["tax"]), 0.5), (set(&["revenue"]), 0.5)],
        )
        .unwrap();
        assert!(!incomparable.classify().consonant);
        let crisp = MassFunction::new(accounts(), vec![(set(&["tax"]), 1.0)]).unwrap();
        let sc = crisp.classify();
        assert!(sc.crisp && sc.simple && sc.consonant);
    }

    #[test]
    fn irrelevance_masses() {
        let merged = MassFunction::irrelevance(accounts(), &BTreeSet::new(), 0.5).unwrap();
        assert_eq!(merged.focal_len(), 1);
        assert_relative_eq!(merged.weight_of(&full()).unwrap(), 1.0);

        let hard = MassFunction::irrelevance(accounts(), &set(&["revenue"]), 1.0).unwrap();
        assert_eq!(hard.focal_len(), 1);
        let rest: BTreeSet<String> = full().difference(&set(&["revenue"])).cloned().collect();
        assert_relative_eq!(hard.weight_of(&rest).unwrap(), 1.0);

        let soft = MassFunction::irrelevance(accounts(), &set(&["revenue"]), 0.3).unwrap();
        assert_eq!(soft.focal_len(), 2);
        assert_relative_eq!(soft.weight_of(&rest).unwrap(), 0.3);
        assert_relative_eq!(soft.weight_of(&full()).unwrap(), 0.7);

        assert!(MassFunction::irrelevance(accounts(), &full(), 1.5).is_err());
    }

    #[test]
    fn dempster_pools_onto_intersections() {
        let m = m1()
            .combine_dempster(&m2())
            .unwrap()
            .combine_dempster(&m3())
            .unwrap();
        assert_relative_eq!(
            m.weight_of(&set(&["tax"])).unwrap(),
            0.8,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(
            m.weight_of(&set(&["tax", "revenue"])).unwrap(),
            0.12,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(
            m.weight_of(&set(&["tax", "revenue", "other expenses"]))
                .unwrap(),
            0.072,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(m.weight_of(&full()).unwrap(), 0.008, epsilon = MASS_TOL);
    }

    #[test]
    fn crisp_combination_matches_set_algebra() {
        let u: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let left = MassFunction::new(u.clone(), vec![(set(&["a", "b"]), 1.0)]).unwrap();
        let right = MassFunction::new(u.clone(), vec![(set(&["b", "c"]), 1.0)]).unwrap();
        let meet = left.combine_dempster(&right).unwrap();
        assert_relative_eq!(meet.weight_of(&set(&["b"])).unwrap(), 1.0);
        let join = left.combine_disjunctive(&right).unwrap();
        assert_relative_eq!(join.weight_of(&set(&["a", "b", "c"])).unwrap(), 1.0);

        let only_a = MassFunction::new(u.clone(), vec![(set(&["a"]), 1.0)]).unwrap();
        let only_b = MassFunction::new(u, vec![(set(&["b"]), 1.0)]).unwrap();
        assert!(matches!(
            only_a.combine_dempster(&only_b),
            Err(Error::TotalConflict)
        ));
        let raw = only_a.combine_conjunctive_unnormalized(&only_b).unwrap();
        assert_relative_eq!(raw.conflict(), 1.0);
        assert_eq!(raw.focal_len(), 0);
    }

    #[test]
    fn unnormalized_matches_dempster_without_conflict() {
        let raw = m1().combine_conjunctive_unnormalized(&m2()).unwrap();
        assert_relative_eq!(raw.conflict(), 0.0);
        let norm = m1().combine_dempster(&m2()).unwrap();
        assert!(raw.approx_eq(&norm, MASS_TOL));

        let vac = MassFunction::vacuous(accounts()).unwrap();
        let same = m2().combine_conjunctive_unnormalized(&vac).unwrap();
        assert!(same.approx_eq(&m2(), MASS_TOL));
    }

    #[test]
    fn disjunctive_absorbs_into_universe() {
        let m = m1()
            .combine_disjunctive(&m2())
            .unwrap()
            .combine_disjunctive(&m3())
            .unwrap();
        assert_relative_eq!(
            m.weight_of(&set(&["tax", "revenue", "other expenses"]))
                .unwrap(),
            0.432,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(m.weight_of(&full()).unwrap(), 0.568, epsilon = MASS_TOL);

        let vac = MassFunction::vacuous(accounts()).unwrap();
        let absorbed = m2().combine_disjunctive(&vac).unwrap();
        assert_relative_eq!(absorbed.weight_of(&full()).unwrap(), 1.0);
    }

    fn substitution_example() -> SubstitutionModel {
        SubstitutionModel::new(
            [
                ("tax", "j1", "tax"),
                ("revenue", "j1", "other expenses"),
                ("tax", "j2", "tax"),
                ("revenue", "j2", "revenue"),
                ("tax", "j2", "other expenses"),
                ("other expenses", "j2", "other expenses"),
            ]
            .iter()
            .map(|(n, j, m)| (n.to_string(), j.to_string(), m.to_string()))
            .collect(),
        )
    }

    #[test]
    fn substitution_combination_reproduces_deliberation_values() {
        let s = substitution_example();
        let disj = m1()
            .combine_substitution("j1", &m2(), "j2", &s, SubstitutionRule::Disjunctive)
            .unwrap();
        assert_relative_eq!(
            disj.weight_of(&set(&["tax", "other expenses"])).unwrap(),
            0.6,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(
            disj.weight_of(&set(&["tax", "revenue", "other expenses"]))
                .unwrap(),
            0.4,
            epsilon = MASS_TOL
        );

        let conj = m1()
            .combine_substitution(
                "j1",
                &m2(),
                "j2",
                &s,
                SubstitutionRule::ConjunctiveUnnormalized,
            )
            .unwrap();
        assert_relative_eq!(
            conj.weight_of(&set(&["tax"])).unwrap(),
            0.5,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(
            conj.weight_of(&set(&["tax", "other expenses"])).unwrap(),
            0.5,
            epsilon = MASS_TOL
        );
        assert_relative_eq!(conj.conflict(), 0.0);

        let norm = m1()
            .combine_substitution(
                "j1",
                &m2(),
                "j2",
                &s,
                SubstitutionRule::ConjunctiveNormalized,
            )
            .unwrap();
        assert!(norm.approx_eq(&conj, MASS_TOL));
    }

    #[test]
    fn identity_substitution_reduces_to_plain_rules() {
        let identity = SubstitutionModel::new(
            accounts()
                .iter()
                .flat_map(|a| {
                    ["j1", "j2"]
                        .iter()
                        .map(|j| (a.clone(), j.to_string(), a.clone()))
                        .collect::<Vec<_>>()
                })
                .collect(),
        );
        let disj = m1()
            .combine_substitution("j1", &m2(), "j2", &identity, SubstitutionRule::Disjunctive)
            .unwrap();
        assert!(disj.approx_eq(&m1().combine_disjunctive(&m2()).unwrap(), MASS_TOL));
        let conj = m1()
            .combine_substitution(
                "j1",
                &m2(),
                "j2",
                &identity,
                SubstitutionRule::ConjunctiveUnnormalized,
            )
            .unwrap();
        assert!(conj.approx_eq(
            &m1().combine_conjunctive_unnormalized(&m2()).unwrap(),
            MASS_TOL
        ));
    }

    fn remark_masses() -> (MassFunction, MassFunction) {
        let u: Vec<String> = vec!["y1".into(), "y2".into(), "y3".into()];
        let m1 = MassFunction::new(
            u.clone(),
            vec![
                (set(&["y1", "y3"]), 0.3),
                (set(&["y2", "y3"]), 0.3),
                (set(&["y1", "y2", "y3"]), 0.2),
                (set(&["y3"]), 0.2),
            ],
        )
        .unwrap();
        let m2 = MassFunction::new(
            u,
            vec![
                (set(&["y1", "y3"]), 0.1),
                (set(&["y2", "y3"]), 0.1),
                (set(&["y1", "y2", "y3"]), 0.5),
                (set(&["y3"]), 0.3),
            ],
        )
        .unwrap();
        (m1, m2)
    }

    #[test]
    fn ordering_counterexample_separates_kinds() {
        let (a, b) = remark_masses();
        assert!(mass_order(&a, &b, OrderKind::Q).unwrap().holds);

        let up = mass_order(&a, &b, OrderKind::Upset).unwrap();
        assert!(!up.holds);
        assert_eq!(
            up.witness,
            Some(OrderWitness::Family(vec![
                set(&["y1", "y3"]),
                set(&["y2", "y3"]),
                set(&["y1", "y2", "y3"]),
            ]))
        );

        // pl fails too: pl_a({y1,y2}) = 0.8 > 0.7 = pl_b({y1,y2})
        let pl = mass_order(&a, &b, OrderKind::Pl).unwrap();
        assert!(!pl.holds);
        assert_eq!(pl.witness, Some(OrderWitness::Set(set(&["y1", "y2"]))));
        assert_relative_eq!(a.plausibility_of(&set(&["y1", "y2"])).unwrap(), 0.8);
        assert_relative_eq!(b.plausibility_of(&set(&["y1", "y2"])).unwrap(), 0.7);
    }

    #[test]
    fn ordering_is_reflexive() {
        for kind in [OrderKind::Pl, OrderKind::Q, OrderKind::Upset] {
            assert!(mass_order(&m2(), &m2(), kind).unwrap().holds);
        }
    }

    #[test]
    fn ordering_rejects_mismatched_universes() {
        let other = MassFunction::vacuous(vec!["z".into()]).unwrap();
        assert!(mass_order(&m1(), &other, OrderKind::Q).is_err());
    }

    #[test]
    fn moebius_round_trips() {
        for m in [m1(), m2(), m3()] {
            let small = MassFunction::new(
                vec!["tax".into(), "revenue".into(), "other expenses".into()],
                m.focal_sets()
                    .into_iter()
                    .map(|(s, w)| {
                        let trimmed: BTreeSet<String> = s
                            .into_iter()
                            .filter(|f| ["tax", "revenue", "other expenses"].contains(&f.as_str()))
                            .collect();
                        (trimmed, w)
                    })
                    .collect(),
            )
            .unwrap();
            let table = belief_table(&small).unwrap();
            let back = mass_from_belief(small.universe().to_vec(), &table).unwrap();
            assert!(back.approx_eq(&small, 1e-9));
        }
    }

    #[test]
    fn moebius_point_and_vacuous_cases() {
        let u: Vec<String> = vec!["a".into(), "b".into()];
        // bel = 1 only on the full set
        let vacuous = mass_from_belief(u.clone(), &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(vacuous.weight_of(&set(&["a", "b"])).unwrap(), 1.0);
        // bel(Y) = [ {a} subset of Y ]
        let point = mass_from_belief(u.clone(), &[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(point.weight_of(&set(&["a"])).unwrap(), 1.0);
        assert!(mass_from_belief(u, &[0.0, 0.5, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn moebius_rejects_non_belief_tables() {
        let u: Vec<String> = vec!["a".into(), "b".into()];
        // bel({a}) + bel({b}) > bel({a,b}): some weight would go negative
        assert!(mass_from_belief(u.clone(), &[0.0, 0.6, 0.5, 1.0]).is_err());
        // bel of the universe must be 1
        assert!(mass_from_belief(u, &[0.0, 0.0, 0.0, 0.9]).is_err());
    }

    mod order_decision_props {
        use super::*;
        use proptest::prelude::*;

        fn universe(n: usize) -> Vec<String> {
            (0..n).map(|i| format!("u{i}")).collect()
        }

        fn name_set(n: usize, mask: usize) -> BTreeSet<String> {
            let u = universe(n);
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| u[i].clone())
                .collect()
        }

        fn mass_strategy(n: usize) -> impl Strategy<Value = MassFunction> {
            proptest::collection::btree_map(1usize..(1 << n), 0.05f64..1.0, 1..5).prop_map(
                move |raw| {
                    let total: f64 = raw.values().sum();
                    let focal = raw
                        .into_iter()
                        .map(|(mask, w)| (name_set(n, mask), w / total))
                        .collect();
                    MassFunction::new(universe(n), focal).unwrap()
                },
            )
        }

        proptest! {
            /// The restricted quantification inside `mass_order` decides
            /// the same pointwise orders as a sweep over every subset.
            #[test]
            fn pointwise_orders_match_exhaustive(m1 in mass_strategy(4), m2 in mass_strategy(4)) {
                let mut pl_all = true;
                let mut q_all = true;
                for mask in 0usize..16 {
                    let y = name_set(4, mask);
                    if m1.plausibility_of(&y).unwrap() > m2.plausibility_of(&y).unwrap() + MASS_TOL {
                        pl_all = false;
                    }
                    if m1.quality_of(&y).unwrap() > m2.quality_of(&y).unwrap() + MASS_TOL {
                        q_all = false;
                    }
                }
                prop_assert_eq!(mass_order(&m1, &m2, OrderKind::Pl).unwrap().holds, pl_all);
                prop_assert_eq!(mass_order(&m1, &m2, OrderKind::Q).unwrap().holds, q_all);
            }

            /// Up-closed families of the focal poset decide the same
            /// order as up-closed families of the whole powerset.
            #[test]
            fn upset_order_matches_exhaustive(m1 in mass_strategy(3), m2 in mass_strategy(3)) {
                let subsets: Vec<BTreeSet<String>> = (0usize..8).map(|m| name_set(3, m)).collect();
                let mut holds = true;
                'family: for fam in 0usize..(1 << 8) {
                    let inside = |i: usize| fam & (1 << i) != 0;
                    for i in 0..8 {
                        if inside(i) {
                            for j in 0..8 {
                                if subsets[i].is_subset(&subsets[j]) && !inside(j) {
                                    continue 'family;
                                }
                            }
                        }
                    }
                    let total = |m: &MassFunction| -> f64 {
                        (0..8).filter(|&i| inside(i)).map(|i| m.weight_of(&subsets[i]).unwrap()).sum()
                    };
                    if total(&m1) > total(&m2) + MASS_TOL {
                        holds = false;
                        break;
                    }
                }
                prop_assert_eq!(mass_order(&m1, &m2, OrderKind::Upset).unwrap().holds, holds);
            }
        }
    }

    #[test]
    fn mass_doc_round_trip_and_expansion() {
        let doc = MassDoc {
            universe: vec!["tax".into(), "revenue".into()],
            focal: vec![
                FocalDoc {
                    set: vec!["tax".into()],
                    w: 0.6,
                },
                FocalDoc {
                    set: vec!["tax".into(), "revenue".into()],
                    w: 0.4,
                },
            ],
            account_level: true,
        };
        let account_mass = doc.to_mass().unwrap();
        assert_eq!(account_mass.universe().len(), 2);
        let expanded = doc.expand(3).unwrap();
        assert_eq!(expanded.universe().len(), 6);
        assert_relative_eq!(
            expanded
                .weight_of(&set(&["tax#1", "tax#2", "tax#3"]))
                .unwrap(),
            0.6
        );
        let text = serde_json::to_string(&MassDoc::from_mass(&expanded, false)).unwrap();
        let back: MassDoc = serde_json::from_str(&text).unwrap();
        assert!(back.to_mass().unwrap().approx_eq(&expanded, 1e-12));
    }
}
