//! Probability transforms of masses and the flat clustering built on
//! top of them: per-feature or per-account importance estimates, an
//! importance-weighted dissimilarity between processes, and
//! average-linkage agglomeration into a partition.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidential::MassFunction;
use crate::ledger::{ManyValuedContext, ScaledSchema};

/// Granularity of an importance table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Feature,
    Account,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMethod {
    Pignistic,
    Plausibility,
}

/// A probability over identifiers, kept in universe order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceTable {
    pub level: Level,
    weights: Vec<(String, f64)>,
}

impl ImportanceTable {
    pub fn weights(&self) -> &[(String, f64)] {
        &self.weights
    }

    pub fn weight(&self, id: &str) -> Result<f64> {
        self.weights
            .iter()
            .find(|(n, _)| n == id)
            .map(|(_, w)| *w)
            .ok_or_else(|| Error::unknown("identifier", id))
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w).sum()
    }

    /// CSV with header `id,weight`, rows in table order.
    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "id,weight")?;
        for (id, w) in &self.weights {
            if id.contains(',') || id.contains('"') {
                writeln!(out, "\"{}\",{w}", id.replace('"', "\"\""))?;
            } else {
                writeln!(out, "{id},{w}")?;
            }
        }
        Ok(())
    }

    pub fn from_csv(bytes: &[u8], level: Level) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(bytes);
        let headers = reader.headers().map_err(|e| Error::Parse {
            row: 1,
            msg: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["id", "weight"] {
            return Err(Error::Parse {
                row: 1,
                msg: format!("expected header id,weight, got {headers:?}"),
            });
        }
        let mut weights = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::Parse {
                row,
                msg: e.to_string(),
            })?;
            let w: f64 = record[1].parse().map_err(|_| Error::Parse {
                row,
                msg: format!("bad weight {:?}", &record[1]),
            })?;
            weights.push((record[0].to_string(), w));
        }
        Ok(ImportanceTable { level, weights })
    }
}

/// Spreads each focal weight uniformly over the members of the focal
/// set, per feature of the universe.
pub fn pignistic(m: &MassFunction) -> Result<ImportanceTable> {
    reject_conflict(m)?;
    let mut weights: Vec<(String, f64)> = m.universe().iter().map(|f| (f.clone(), 0.0)).collect();
    for (set, w) in m.focal_sets() {
        let share = w / set.len() as f64;
        for (name, acc) in weights.iter_mut() {
            if set.contains(name) {
                *acc += share;
            }
        }
    }
    Ok(ImportanceTable {
        level: Level::Feature,
        weights,
    })
}

/// Normalized singleton plausibilities.
pub fn plausibility_transform(m: &MassFunction) -> Result<ImportanceTable> {
    reject_conflict(m)?;
    let mut weights = Vec::with_capacity(m.universe().len());
    for f in m.universe() {
        let single: BTreeSet<String> = [f.clone()].into();
        weights.push((f.clone(), m.plausibility_of(&single)?));
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::invalid("plausibility transform of an all-zero mass"));
    }
    for (_, w) in weights.iter_mut() {
        *w /= total;
    }
    Ok(ImportanceTable {
        level: Level::Feature,
        weights,
    })
}

/// Account-level importance of a mass over scaled features. Focal sets
/// must respect account blocks. Pignistic weights aggregate by summing
/// the feature-level transform per account; plausibility takes each
/// whole block's plausibility, normalized across accounts.
pub fn account_importance(m: &MassFunction, method: TransformMethod) -> Result<ImportanceTable> {
    reject_conflict(m)?;
    let schema = ScaledSchema::from_features(m.universe())?;
    for (set, _) in m.focal_sets() {
        for account in &schema.accounts {
            let block: BTreeSet<String> = schema.block(account)?.into_iter().collect();
            let hit = block.intersection(&set).count();
            if hit != 0 && hit != block.len() {
                return Err(Error::invalid(format!(
                    "focal set splits the block of account {account:?}"
                )));
            }
        }
    }
    let weights = match method {
        TransformMethod::Pignistic => {
            let per_feature = pignistic(m)?;
            schema
                .accounts
                .iter()
                .map(|account| {
                    let sum = per_feature
                        .weights()
                        .iter()
                        .filter(|(f, _)| {
                            schema.account_of(f).map(|a| a == account).unwrap_or(false)
                        })
                        .map(|(_, w)| w)
                        .sum();
                    (account.clone(), sum)
                })
                .collect()
        }
        TransformMethod::Plausibility => {
            let mut raw = Vec::new();
            for account in &schema.accounts {
                let block: BTreeSet<String> = schema.block(account)?.into_iter().collect();
                raw.push((account.clone(), m.plausibility_of(&block)?));
            }
            let total: f64 = raw.iter().map(|(_, w)| w).sum();
            if total <= 0.0 {
                return Err(Error::invalid("plausibility transform of an all-zero mass"));
            }
            raw.into_iter().map(|(a, w)| (a, w / total)).collect()
        }
    };
    Ok(ImportanceTable {
        level: Level::Account,
        weights,
    })
}

/// Importance-weighted L1 distance between two processes' share vectors.
pub fn weighted_dissimilarity(
    mvc: &ManyValuedContext,
    weights: &ImportanceTable,
    a: &str,
    b: &str,
) -> Result<f64> {
    let pa = mvc.process_position(a)?;
    let pb = mvc.process_position(b)?;
    let mut d = 0.0;
    for (x, account) in mvc.accounts().iter().enumerate() {
        let w = weights.weight(account)?;
        d += w * (mvc.share_at(pa, x) - mvc.share_at(pb, x)).abs();
    }
    Ok(d)
}

/// A partition of the processes with the linkage threshold that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatClustering {
    pub threshold: f64,
    pub clusters: Vec<Vec<String>>,
}

/// Average-linkage agglomeration over the weighted dissimilarity:
/// repeatedly merges the closest pair of clusters while the minimum
/// linkage does not exceed the threshold. Ties pick the pair whose
/// sorted member lists come first.
pub fn agglomerative_cluster(
    mvc: &ManyValuedContext,
    weights: &ImportanceTable,
    threshold: f64,
) -> Result<FlatClustering> {
    if threshold < 0.0 {
        return Err(Error::invalid(format!("threshold {threshold} is negative")));
    }
    let n = mvc.processes().len();
    let mut base = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = weighted_dissimilarity(mvc, weights, &mvc.processes()[i], &mvc.processes()[j])?;
            base[i * n + j] = d;
            base[j * n + i] = d;
        }
    }
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        if clusters.len() <= 1 {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let mut sum = 0.0;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        sum += base[a * n + b];
                    }
                }
                let link = sum / (clusters[i].len() * clusters[j].len()) as f64;
                let candidate = (link, i, j);
                best = match best {
                    None => Some(candidate),
                    Some(current) => {
                        if link < current.0
                            || (link == current.0
                                && key(&clusters, mvc, i, j)
                                    < key(&clusters, mvc, current.1, current.2))
                        {
                            Some(candidate)
                        } else {
                            Some(current)
                        }
                    }
                };
            }
        }
        match best {
            Some((link, i, j)) if link <= threshold => {
                let absorbed = clusters.remove(j);
                clusters[i].extend(absorbed);
                clusters[i].sort_unstable();
            }
            _ => break,
        }
    }
    let mut named: Vec<Vec<String>> = clusters
        .into_iter()
        .map(|members| {
            let mut names: Vec<String> = members
                .into_iter()
                .map(|i| mvc.processes()[i].clone())
                .collect();
            names.sort();
            names
        })
        .collect();
    named.sort();
    Ok(FlatClustering {
        threshold,
        clusters: named,
    })
}

fn key(
    clusters: &[Vec<usize>],
    mvc: &ManyValuedContext,
    i: usize,
    j: usize,
) -> (Vec<String>, Vec<String>) {
    let name = |c: &Vec<usize>| -> Vec<String> {
        let mut v: Vec<String> = c.iter().map(|&k| mvc.processes()[k].clone()).collect();
        v.sort();
        v
    };
    (name(&clusters[i]), name(&clusters[j]))
}

fn reject_conflict(m: &MassFunction) -> Result<()> {
    if m.conflict() != 0.0 {
        return Err(Error::invalid(
            "probability transforms need a mass with no weight on the empty set",
        ));
    }
    Ok(())
}
