//! Journal parsing, business-process extraction and interval scaling.
//!
//! A journal is a flat CSV of signed postings. Postings grouped by
//! transaction id form a business process; each account's share is its
//! value relative to the total posted on the same side (credits stay
//! negative, debits positive), so every process maps into [-1, 1] per
//! account. Interval scaling then turns the share matrix into a binary
//! context with one bucket feature per account.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::FormalContext;
use crate::error::{Error, Result};

const SIDE_SUM_TOL: f64 = 1e-9;
const BALANCE_REL_TOL: f64 = 1e-6;

/// One posting row of the journal.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalLine {
    pub id: u64,
    pub tid: u64,
    pub account: String,
    pub value: f64,
}

/// Parses journal CSV with header `ID,TID,FA name,Value`.
pub fn parse_journal(bytes: &[u8]) -> Result<Vec<JournalLine>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| Error::Parse {
        row: 1,
        msg: e.to_string(),
    })?;
    let expected = ["ID", "TID", "FA name", "Value"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            row: 1,
            msg: format!("expected header {expected:?}, got {headers:?}"),
        });
    }
    let mut lines = Vec::new();
    let mut seen_ids = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, header is row 1
        let record = record.map_err(|e| Error::Parse {
            row,
            msg: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(Error::Parse {
                row,
                msg: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let id: u64 = record[0].parse().map_err(|_| Error::Parse {
            row,
            msg: format!("bad ID {:?}", &record[0]),
        })?;
        let tid: u64 = record[1].parse().map_err(|_| Error::Parse {
            row,
            msg: format!("bad TID {:?}", &record[1]),
        })?;
        let account = record[2].to_string();
        if account.is_empty() {
            return Err(Error::Parse {
                row,
                msg: "empty account name".into(),
            });
        }
        let value: f64 = record[3].parse().map_err(|_| Error::Parse {
            row,
            msg: format!("bad value {:?}", &record[3]),
        })?;
        if value == 0.0 || !value.is_finite() {
            return Err(Error::Parse {
                row,
                msg: format!("value must be nonzero and finite, got {value}"),
            });
        }
        if let Some(prev) = seen_ids.insert(id, row) {
            return Err(Error::Parse {
                row,
                msg: format!("duplicate ID {id} (first at row {prev})"),
            });
        }
        lines.push(JournalLine {
            id,
            tid,
            account,
            value,
        });
    }
    Ok(lines)
}

/// Business processes as signed share vectors over accounts: the weighted
/// bipartite transaction network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkDoc", try_from = "NetworkDoc")]
pub struct ManyValuedContext {
    processes: Vec<String>,
    accounts: Vec<String>,
    process_index: BTreeMap<String, usize>,
    account_index: BTreeMap<String, usize>,
    /// dense, row-major: shares[p * accounts.len() + x]
    shares: Vec<f64>,
}

/// On-disk form: zero shares are omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub processes: Vec<String>,
    pub accounts: Vec<String>,
    pub shares: BTreeMap<String, BTreeMap<String, f64>>,
}

impl From<ManyValuedContext> for NetworkDoc {
    fn from(mvc: ManyValuedContext) -> Self {
        let mut shares: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (p, name) in mvc.processes.iter().enumerate() {
            let mut row = BTreeMap::new();
            for (x, account) in mvc.accounts.iter().enumerate() {
                let v = mvc.shares[p * mvc.accounts.len() + x];
                if v != 0.0 {
                    row.insert(account.clone(), v);
                }
            }
            shares.insert(name.clone(), row);
        }
        NetworkDoc {
            processes: mvc.processes,
            accounts: mvc.accounts,
            shares,
        }
    }
}

impl TryFrom<NetworkDoc> for ManyValuedContext {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let mut mvc = ManyValuedContext::zeroed(doc.processes, doc.accounts)?;
        for (process, row) in &doc.shares {
            let p = mvc.process_position(process)?;
            for (account, &v) in row {
                let x = mvc.account_position(account)?;
                mvc.shares[p * mvc.accounts.len() + x] = v;
            }
        }
        Ok(mvc)
    }
}

impl ManyValuedContext {
    fn zeroed(processes: Vec<String>, accounts: Vec<String>) -> Result<Self> {
        let process_index = unique_index(&processes, "process")?;
        let account_index = unique_index(&accounts, "account")?;
        let shares = vec![0.0; processes.len() * accounts.len()];
        Ok(ManyValuedContext {
            processes,
            accounts,
            process_index,
            account_index,
            shares,
        })
    }

    pub fn processes(&self) -> &[String] {
        &self.processes
    }

    pub fn accounts(&self) -> &[String] {
        &self.accounts
    }

    pub fn process_position(&self, name: &str) -> Result<usize> {
        self.process_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::unknown("process", name))
    }

    pub fn account_position(&self, name: &str) -> Result<usize> {
        self.account_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::unknown("account", name))
    }

    pub fn share_at(&self, process: usize, account: usize) -> f64 {
        self.shares[process * self.accounts.len() + account]
    }

    pub fn share(&self, process: &str, account: &str) -> Result<f64> {
        Ok(self.share_at(
            self.process_position(process)?,
            self.account_position(account)?,
        ))
    }

    /// Invariant violations: shares out of range, side sums off ±1.
    /// Empty iff the network is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut findings = Vec::new();
        for (p, name) in self.processes.iter().enumerate() {
            let mut pos = 0.0;
            let mut neg = 0.0;
            let mut has_pos = false;
            let mut has_neg = false;
            for x in 0..self.accounts.len() {
                let v = self.share_at(p, x);
                if !(-1.0..=1.0).contains(&v) {
                    findings.push(format!(
                        "process {name}: share {v} on {:?} outside [-1, 1]",
                        self.accounts[x]
                    ));
                }
                if v > 0.0 {
                    pos += v;
                    has_pos = true;
                } else if v < 0.0 {
                    neg += v;
                    has_neg = true;
                }
            }
            if has_pos && (pos - 1.0).abs() > SIDE_SUM_TOL {
                findings.push(format!(
                    "process {name}: positive shares sum to {pos}, not 1"
                ));
            }
            if has_neg && (neg + 1.0).abs() > SIDE_SUM_TOL {
                findings.push(format!(
                    "process {name}: negative shares sum to {neg}, not -1"
                ));
            }
            if has_pos != has_neg {
                findings.push(format!("process {name}: postings on one side only"));
            }
        }
        findings
    }
}

/// Groups journal lines by transaction and normalizes each side by its
/// total absolute value. Multiple lines on one (transaction, account)
/// pair are summed before normalization. Process `a<tid>` keeps the
/// journal's sign convention: credits negative, debits positive.
pub fn extract_processes(lines: &[JournalLine]) -> Result<ManyValuedContext> {
    let mut tids: Vec<u64> = Vec::new();
    let mut accounts: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<u64, BTreeMap<String, f64>> = BTreeMap::new();
    for line in lines {
        if !grouped.contains_key(&line.tid) {
            tids.push(line.tid);
        }
        if !accounts.contains(&line.account) {
            accounts.push(line.account.clone());
        }
        *grouped
            .entry(line.tid)
            .or_default()
            .entry(line.account.clone())
            .or_insert(0.0) += line.value;
    }

    let processes: Vec<String> = tids.iter().map(|tid| format!("a{tid}")).collect();
    let mut mvc = ManyValuedContext::zeroed(processes, accounts)?;
    for (p, tid) in tids.iter().enumerate() {
        let sums = &grouped[tid];
        let debit: f64 = sums.values().filter(|v| **v > 0.0).sum();
        let credit: f64 = -sums.values().filter(|v| **v < 0.0).sum::<f64>();
        if debit == 0.0 {
            return Err(Error::Extraction {
                tid: *tid,
                msg: "no debit side".into(),
            });
        }
        if credit == 0.0 {
            return Err(Error::Extraction {
                tid: *tid,
                msg: "no credit side".into(),
            });
        }
        let rel = (debit - credit).abs() / debit.max(credit);
        if rel > BALANCE_REL_TOL {
            return Err(Error::Extraction {
                tid: *tid,
                msg: format!("unbalanced: debits {debit} vs credits {credit}"),
            });
        }
        for (account, &v) in sums {
            if v == 0.0 {
                continue;
            }
            let x = mvc.account_position(account)?;
            let share = if v > 0.0 { v / debit } else { v / credit };
            mvc.shares[p * mvc.accounts.len() + x] = share;
        }
    }
    Ok(mvc)
}

/// Interval scaling parameters: `intervals` equal buckets over [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub intervals: u32,
}

impl ScalingSpec {
    pub fn new(intervals: u32) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::invalid("interval count must be at least 1"));
        }
        Ok(ScalingSpec { intervals })
    }

    /// 1-based bucket of a share. Buckets are half-open on the right
    /// except the last, which closes at 1, so every value lands in
    /// exactly one bucket.
    pub fn bucket(&self, value: f64) -> u32 {
        let s = self.intervals;
        let t = ((value + 1.0) * s as f64 / 2.0).floor() as i64 + 1;
        t.clamp(1, s as i64) as u32
    }
}

/// Canonical name of the scaled feature for an account bucket.
pub fn scaled_feature(account: &str, bucket: u32) -> String {
    format!("{account}#{bucket}")
}

/// Scales a share matrix into a binary context: feature `acct#k` marks a
/// share in bucket k, with absent accounts counted as share 0. Each
/// process gets exactly one feature per account.
pub fn interval_scale(mvc: &ManyValuedContext, spec: &ScalingSpec) -> FormalContext {
    let schema = ScaledSchema {
        accounts: mvc.accounts().to_vec(),
        intervals: spec.intervals,
    };
    let features = schema.features();
    let s = spec.intervals as usize;
    let mut incidence = Vec::new();
    for p in 0..mvc.processes().len() {
        for x in 0..mvc.accounts().len() {
            let k = spec.bucket(mvc.share_at(p, x));
            incidence.push((p, x * s + (k as usize - 1)));
        }
    }
    FormalContext::new(mvc.processes().to_vec(), features, &incidence)
        .expect("scaled context is well formed by construction")
}

/// The account-block layout of a scaled feature universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledSchema {
    pub accounts: Vec<String>,
    pub intervals: u32,
}

impl ScaledSchema {
    pub fn new(accounts: Vec<String>, intervals: u32) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::invalid("interval count must be at least 1"));
        }
        unique_index(&accounts, "account")?;
        Ok(ScaledSchema {
            accounts,
            intervals,
        })
    }

    /// All scaled features, account-major: `acc#1 .. acc#s` per account.
    pub fn features(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.accounts.len() * self.intervals as usize);
        for account in &self.accounts {
            for k in 1..=self.intervals {
                out.push(scaled_feature(account, k));
            }
        }
        out
    }

    /// The block of features belonging to one account.
    pub fn block(&self, account: &str) -> Result<Vec<String>> {
        if !self.accounts.iter().any(|a| a == account) {
            return Err(Error::unknown("account", account));
        }
        Ok((1..=self.intervals)
            .map(|k| scaled_feature(account, k))
            .collect())
    }

    /// The account a scaled feature belongs to.
    pub fn account_of(&self, feature: &str) -> Result<&str> {
        let (account, bucket) = feature.rsplit_once('#').ok_or_else(|| {
            Error::invalid(format!("feature {feature:?} is not of form account#k"))
        })?;
        let k: u32 = bucket
            .parse()
            .map_err(|_| Error::invalid(format!("feature {feature:?} has non-numeric bucket")))?;
        if k == 0 || k > self.intervals {
            return Err(Error::invalid(format!(
                "feature {feature:?} bucket out of range 1..={}",
                self.intervals
            )));
        }
        self.accounts
            .iter()
            .find(|a| a.as_str() == account)
            .map(|a| a.as_str())
            .ok_or_else(|| Error::unknown("account", account))
    }

    /// Recovers the schema from a full scaled feature list, requiring the
    /// exact account-major layout produced by [`ScaledSchema::features`].
    pub fn from_features(features: &[String]) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::invalid("empty feature list"));
        }
        let mut accounts: Vec<String> = Vec::new();
        let mut intervals = 0u32;
        for f in features {
            let (account, bucket) = f
                .rsplit_once('#')
                .ok_or_else(|| Error::invalid(format!("feature {f:?} is not of form account#k")))?;
            let k: u32 = bucket
                .parse()
                .map_err(|_| Error::invalid(format!("feature {f:?} has non-numeric bucket")))?;
            if k == 1 {
                accounts.push(account.to_string());
            }
            intervals = intervals.max(k);
        }
        let schema = ScaledSchema::new(accounts, intervals)?;
        if schema.features() != features {
            return Err(Error::invalid(
                "feature list is not an account-major interval scaling layout",
            ));
        }
        Ok(schema)
    }
}

fn unique_index(names: &[String], kind: &'static str) -> Result<BTreeMap<String, usize>> {
    let mut map = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(Error::invalid(format!("duplicate {kind} identifier {n:?}")));
        }
    }
    Ok(map)
}
