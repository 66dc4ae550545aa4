//! Crisp interrogative agendas: which features an agent wants to
//! categorize by, coalition operators over those choices, issue
//! substitution, and two-agent deliberation rules.
//!
//! An agenda is a plain feature subset of the base context. Coalition
//! operators reduce a set of agents to one agenda (shared interest,
//! pooled interest, and their irrelevance duals); substitution rewrites
//! an agenda through an agent's preference triples.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::ledger::ScaledSchema;

/// A crisp agenda: the features an agent considers relevant.
pub type Agenda = BTreeSet<String>;

/// Per-agent relevance and irrelevance over a fixed feature universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceModel {
    features: Vec<String>,
    agents: Vec<String>,
    relevant: BTreeMap<String, Agenda>,
    irrelevant: BTreeMap<String, Agenda>,
}

impl RelevanceModel {
    /// Builds the model, checking that every agent's relevant and
    /// irrelevant sets are disjoint subsets of the universe.
    pub fn new(features: Vec<String>, entries: Vec<(String, Agenda, Agenda)>) -> Result<Self> {
        let universe: BTreeSet<&String> = features.iter().collect();
        let mut agents = Vec::new();
        let mut relevant = BTreeMap::new();
        let mut irrelevant = BTreeMap::new();
        for (agent, rel, irr) in entries {
            if relevant.contains_key(&agent) {
                return Err(Error::invalid(format!("duplicate agent {agent:?}")));
            }
            for f in rel.iter().chain(irr.iter()) {
                if !universe.contains(f) {
                    return Err(Error::unknown("feature", f.clone()));
                }
            }
            if let Some(shared) = rel.intersection(&irr).next() {
                return Err(Error::invalid(format!(
                    "agent {agent:?} marks {shared:?} both relevant and irrelevant"
                )));
            }
            agents.push(agent.clone());
            relevant.insert(agent.clone(), rel);
            irrelevant.insert(agent, irr);
        }
        Ok(RelevanceModel {
            features,
            agents,
            relevant,
            irrelevant,
        })
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn relevant(&self, agent: &str) -> Result<&Agenda> {
        self.relevant
            .get(agent)
            .ok_or_else(|| Error::unknown("agent", agent))
    }

    pub fn irrelevant(&self, agent: &str) -> Result<&Agenda> {
        self.irrelevant
            .get(agent)
            .ok_or_else(|| Error::unknown("agent", agent))
    }

    fn universe(&self) -> Agenda {
        self.features.iter().cloned().collect()
    }

    /// Whether no agent's relevant set meets another agent's irrelevant
    /// set. Some order laws between relevance and irrelevance
    /// categorizations only hold under this stronger condition.
    pub fn cross_agent_disjoint(&self) -> bool {
        self.agents.iter().all(|j1| {
            self.agents.iter().all(|j2| {
                self.relevant[j1.as_str()]
                    .intersection(&self.irrelevant[j2.as_str()])
                    .next()
                    .is_none()
            })
        })
    }

    /// One agenda for a coalition. Intersections over an empty coalition
    /// return the whole universe; unions return the empty agenda.
    pub fn coalition_agenda(
        &self,
        coalition: &BTreeSet<String>,
        mode: CoalitionMode,
    ) -> Result<Agenda> {
        for j in coalition {
            if !self.relevant.contains_key(j) {
                return Err(Error::unknown("agent", j.clone()));
            }
        }
        let pick = |map: &BTreeMap<String, Agenda>, agents: Vec<&String>, common: bool| -> Agenda {
            if common {
                agents
                    .iter()
                    .map(|j| map[j.as_str()].clone())
                    .reduce(|acc, s| acc.intersection(&s).cloned().collect())
                    .unwrap_or_else(|| self.universe())
            } else {
                agents
                    .iter()
                    .flat_map(|j| map[j.as_str()].iter().cloned())
                    .collect()
            }
        };
        let members: Vec<&String> = self
            .agents
            .iter()
            .filter(|j| coalition.contains(*j))
            .collect();
        Ok(match mode {
            CoalitionMode::Common => pick(&self.relevant, members, true),
            CoalitionMode::Distributed => pick(&self.relevant, members, false),
            CoalitionMode::Box => {
                let outside: Vec<&String> = self
                    .agents
                    .iter()
                    .filter(|j| !coalition.contains(*j))
                    .collect();
                let blocked = pick(&self.relevant, outside, true);
                self.universe().difference(&blocked).cloned().collect()
            }
            CoalitionMode::IrrelevantCommon => pick(&self.irrelevant, members, true),
            CoalitionMode::IrrelevantDistributed => pick(&self.irrelevant, members, false),
        })
    }

    /// The categorization context a coalition induces on the base.
    pub fn induced_context(
        &self,
        base: &FormalContext,
        coalition: &BTreeSet<String>,
        mode: InducedMode,
    ) -> Result<FormalContext> {
        if base.features() != self.features {
            return Err(Error::Mismatch {
                what: "feature universes",
                detail: "relevance model and context were built over different features".into(),
            });
        }
        let agenda = match mode {
            InducedMode::Common => self.coalition_agenda(coalition, CoalitionMode::Common)?,
            InducedMode::Distributed => {
                self.coalition_agenda(coalition, CoalitionMode::Distributed)?
            }
            InducedMode::WithoutAnyIrrelevant => {
                let dropped =
                    self.coalition_agenda(coalition, CoalitionMode::IrrelevantDistributed)?;
                self.universe().difference(&dropped).cloned().collect()
            }
            InducedMode::WithoutSharedIrrelevant => {
                let dropped = self.coalition_agenda(coalition, CoalitionMode::IrrelevantCommon)?;
                self.universe().difference(&dropped).cloned().collect()
            }
        };
        base.induced(&agenda)
    }
}

/// Coalition operators on agendas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalitionMode {
    /// Features relevant to every member.
    Common,
    /// Features relevant to at least one member.
    Distributed,
    /// Features not shared by all outsiders.
    Box,
    /// Features irrelevant to every member.
    IrrelevantCommon,
    /// Features irrelevant to at least one member.
    IrrelevantDistributed,
}

/// Which agenda a coalition's induced categorization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InducedMode {
    Common,
    Distributed,
    /// Drop every feature some member finds irrelevant.
    WithoutAnyIrrelevant,
    /// Drop only features all members find irrelevant.
    WithoutSharedIrrelevant,
}

/// Triples (n, j, m): agent j would substitute issue m with issue n.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubstitutionModel {
    triples: BTreeSet<(String, String, String)>,
}

impl SubstitutionModel {
    pub fn new(triples: BTreeSet<(String, String, String)>) -> Self {
        SubstitutionModel { triples }
    }

    pub fn triples(&self) -> &BTreeSet<(String, String, String)> {
        &self.triples
    }

    pub fn contains(&self, n: &str, j: &str, m: &str) -> bool {
        self.triples
            .contains(&(n.to_string(), j.to_string(), m.to_string()))
    }

    /// Agent j's substituted version of agenda z: the issues j would
    /// replace by something inside z.
    pub fn substitute(&self, agent: &str, z: &Agenda) -> Agenda {
        self.triples
            .iter()
            .filter(|(n, j, _)| j == agent && z.contains(n))
            .map(|(_, _, m)| m.clone())
            .collect()
    }

    /// Pairs (agent, issue) where the issue is relevant but the agent
    /// would not keep it for itself. Empty iff coherent.
    pub fn check_coherence(&self, model: &RelevanceModel) -> Vec<String> {
        let mut findings = Vec::new();
        for j in model.agents() {
            if let Ok(rel) = model.relevant(j) {
                for m in rel {
                    if !self.contains(m, j, m) {
                        findings.push(format!(
                            "agent {j:?} considers {m:?} relevant but has no ({m:?}, {j:?}, {m:?}) triple"
                        ));
                    }
                }
            }
        }
        findings
    }
}

/// Two-agent deliberation rules over crisp agendas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliberationRule {
    Common,
    Distributed,
    SubstUnion,
    SubstIntersection,
}

/// Combines the agendas of two named agents. The substitution rules take
/// the union or intersection of each agent's substituted version of the
/// other's agenda.
pub fn crisp_deliberate(
    rule: DeliberationRule,
    first: (&str, &Agenda),
    second: (&str, &Agenda),
    substitution: Option<&SubstitutionModel>,
) -> Result<Agenda> {
    let (j1, a1) = first;
    let (j2, a2) = second;
    match rule {
        DeliberationRule::Common => Ok(a1.intersection(a2).cloned().collect()),
        DeliberationRule::Distributed => Ok(a1.union(a2).cloned().collect()),
        DeliberationRule::SubstUnion | DeliberationRule::SubstIntersection => {
            let subst = substitution
                .ok_or_else(|| Error::invalid("substitution rules need a substitution model"))?;
            let from_first = subst.substitute(j1, a2);
            let from_second = subst.substitute(j2, a1);
            Ok(match rule {
                DeliberationRule::SubstUnion => from_first.union(&from_second).cloned().collect(),
                _ => from_first.intersection(&from_second).cloned().collect(),
            })
        }
    }
}

/// Expands account names to their full scaled-feature blocks.
pub fn expand_agenda(schema: &ScaledSchema, accounts: &BTreeSet<String>) -> Result<Agenda> {
    let mut out = Agenda::new();
    for account in accounts {
        out.extend(schema.block(account)?);
    }
    Ok(out)
}

/// JSON shape for relevance/substitution configuration. With
/// `account_level` set, names are accounts that expand to whole blocks
/// against a scaled feature universe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgendaConfig {
    pub agents: BTreeMap<String, AgentEntry>,
    #[serde(default)]
    pub substitution: Vec<SubstitutionEntry>,
    #[serde(default)]
    pub account_level: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentEntry {
    #[serde(default)]
    pub relevant: Vec<String>,
    #[serde(default)]
    pub irrelevant: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstitutionEntry {
    pub n: String,
    pub j: String,
    pub m: String,
}

impl AgendaConfig {
    /// The substitution triples exactly as written, for combining
    /// account-level masses without expansion.
    pub fn raw_substitution(&self) -> Result<SubstitutionModel> {
        let mut triples = BTreeSet::new();
        for t in &self.substitution {
            if !self.agents.contains_key(&t.j) {
                return Err(Error::unknown("agent", t.j.clone()));
            }
            triples.insert((t.n.clone(), t.j.clone(), t.m.clone()));
        }
        Ok(SubstitutionModel::new(triples))
    }

    /// Resolves the config against a feature universe. Account-level
    /// configs expand through the universe's scaling schema; substitution
    /// triples expand bucket-wise, pairing equal bucket indices.
    pub fn resolve(&self, features: &[String]) -> Result<(RelevanceModel, SubstitutionModel)> {
        let schema = if self.account_level {
            Some(ScaledSchema::from_features(features)?)
        } else {
            None
        };
        let expand = |names: &[String]| -> Result<Agenda> {
            match &schema {
                Some(schema) => {
                    expand_agenda(schema, &names.iter().cloned().collect::<BTreeSet<_>>())
                }
                None => Ok(names.iter().cloned().collect()),
            }
        };
        let mut entries = Vec::new();
        for (agent, entry) in &self.agents {
            entries.push((
                agent.clone(),
                expand(&entry.relevant)?,
                expand(&entry.irrelevant)?,
            ));
        }
        let model = RelevanceModel::new(features.to_vec(), entries)?;

        let mut triples = BTreeSet::new();
        for t in &self.substitution {
            if !self.agents.contains_key(&t.j) {
                return Err(Error::unknown("agent", t.j.clone()));
            }
            match &schema {
                Some(schema) => {
                    schema.block(&t.n)?;
                    schema.block(&t.m)?;
                    for k in 1..=schema.intervals {
                        triples.insert((
                            crate::ledger::scaled_feature(&t.n, k),
                            t.j.clone(),
                            crate::ledger::scaled_feature(&t.m, k),
                        ));
                    }
                }
                None => {
                    for name in [&t.n, &t.m] {
                        if !features.contains(name) {
                            return Err(Error::unknown("feature", name.clone()));
                        }
                    }
                    triples.insert((t.n.clone(), t.j.clone(), t.m.clone()));
                }
            }
        }
        Ok((model, SubstitutionModel::new(triples)))
    }
}
