//! Command-line pipelines over the categorization library: ingest a
//! journal, scale it, build lattices under agendas, deliberate between
//! agents, collapse weighted agendas by stability, and derive importance
//! tables and clusterings. Every artifact is a file, so each run is
//! reproducible; diagnostics go to stderr.

mod dot;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use aglat_core::{
    account_importance, agglomerative_cluster, crisp_deliberate, extract_processes, interval_scale,
    parse_journal, pignistic, plausibility_transform, AgendaConfig, ContextDistribution,
    DeliberationRule, FormalContext, ImportanceTable, InducedMode, Level, ManyValuedContext,
    MassDoc, MassFunction, ScalingSpec, SubstitutionRule, TransformMethod,
};

#[derive(Parser)]
#[command(
    name = "aglat",
    version,
    about = "Agenda-driven categorization of transaction networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a journal CSV into a process/account share network
    Ingest {
        #[arg(long)]
        journal: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Interval-scale a share network into a binary context
    Scale {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 5)]
        intervals: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate the concept lattice of a context, optionally under an
    /// agenda and an object filter, and export its DOT structure
    Lattice {
        #[arg(long)]
        context: PathBuf,
        /// agenda/relevance config; together with --agent selects features
        #[arg(long, requires = "agent")]
        agenda: Option<PathBuf>,
        /// comma-separated coalition, e.g. j1 or j1,j2
        #[arg(long, requires = "agenda")]
        agent: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Common)]
        mode: ModeArg,
        /// a deliberated feature list, as written by `deliberate`
        #[arg(long, conflicts_with = "agenda")]
        features: Option<PathBuf>,
        /// comma-separated objects; ranges like a1..a6 expand
        #[arg(long)]
        objects: Option<String>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Combine two or more agendas: crisp set rules or mass combination
    Deliberate {
        #[arg(long, value_enum)]
        rule: RuleArg,
        /// mass files, for the mass combination rules
        #[arg(long, num_args = 1..)]
        masses: Vec<PathBuf>,
        /// agenda/relevance config, for crisp and substitution rules
        #[arg(long)]
        agenda: Option<PathBuf>,
        /// the two deliberating agents, e.g. j1,j2
        #[arg(long)]
        agents: Option<String>,
        /// context supplying the feature universe for crisp rules
        #[arg(long)]
        context: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Collapse a weighted agenda into one categorization by stability
    Stability {
        #[arg(long)]
        context: PathBuf,
        #[arg(long)]
        mass: PathBuf,
        /// bucket count used to expand account-level masses
        #[arg(long, default_value_t = 5)]
        intervals: u32,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// also write the context of the heaviest focal agenda
        #[arg(long)]
        most_likely: Option<PathBuf>,
    },
    /// Estimate feature or account importance from a mass
    Transform {
        #[arg(long)]
        mass: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = LevelArg::Account)]
        level: LevelArg,
        #[arg(long, default_value_t = 5)]
        intervals: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Importance-weighted average-linkage clustering of processes
    Cluster {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate networks, masses and agenda coherence; nonzero exit on
    /// any finding
    Check {
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long = "mass")]
        masses: Vec<PathBuf>,
        #[arg(long, requires = "context")]
        agenda: Option<PathBuf>,
        #[arg(long)]
        context: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Common,
    Distributed,
    WithoutAnyIrrelevant,
    WithoutSharedIrrelevant,
}

impl From<ModeArg> for InducedMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Common => InducedMode::Common,
            ModeArg::Distributed => InducedMode::Distributed,
            ModeArg::WithoutAnyIrrelevant => InducedMode::WithoutAnyIrrelevant,
            ModeArg::WithoutSharedIrrelevant => InducedMode::WithoutSharedIrrelevant,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum RuleArg {
    Common,
    Distributed,
    SubstUnion,
    SubstIntersection,
    Dempster,
    Disjunctive,
    ConjunctiveUnnorm,
    SubstDisjunctive,
    SubstConjunctive,
    SubstConjunctiveUnnorm,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pignistic,
    Plausibility,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum LevelArg {
    Feature,
    Account,
}

/// A deliberated crisp agenda on disk.
#[derive(Serialize, Deserialize)]
struct FeatureSetDoc {
    features: Vec<String>,
}

enum CliError {
    Usage(String),
    Failure(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Failure(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Ingest { journal, out } => {
            let bytes =
                fs::read(&journal).with_context(|| format!("reading {}", journal.display()))?;
            let mvc = extract_processes(&parse_journal(&bytes)?)?;
            write_json(&out, &mvc)?;
            eprintln!(
                "{} processes over {} accounts -> {}",
                mvc.processes().len(),
                mvc.accounts().len(),
                out.display()
            );
        }
        Command::Scale {
            network,
            intervals,
            out,
        } => {
            let mvc: ManyValuedContext = read_json(&network)?;
            let ctx = interval_scale(&mvc, &ScalingSpec::new(intervals)?);
            write_json(&out, &ctx)?;
            eprintln!("{} features -> {}", ctx.features().len(), out.display());
        }
        Command::Lattice {
            context,
            agenda,
            agent,
            mode,
            features,
            objects,
            dot,
        } => {
            let mut ctx: FormalContext = read_json(&context)?;
            if let Some(spec) = objects {
                ctx = ctx.restrict_objects(&parse_objects(&spec))?;
            }
            if let Some(path) = features {
                let doc: FeatureSetDoc = read_json(&path)?;
                ctx = ctx.induced(&doc.features.into_iter().collect())?;
            } else if let (Some(config_path), Some(agents)) = (agenda, agent) {
                let config: AgendaConfig = read_json(&config_path)?;
                let (model, _) = config.resolve(ctx.features())?;
                let coalition: BTreeSet<String> =
                    agents.split(',').map(|s| s.trim().to_string()).collect();
                ctx = model.induced_context(&ctx, &coalition, mode.into())?;
            }
            let lattice = ctx.concept_lattice();
            eprintln!(
                "{} concepts, {} covering edges",
                lattice.len(),
                lattice.covering.len()
            );
            if let Some(path) = dot {
                fs::write(&path, dot::lattice_dot(&ctx, &lattice))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Deliberate {
            rule,
            masses,
            agenda,
            agents,
            context,
            out,
        } => match rule {
            RuleArg::Common
            | RuleArg::Distributed
            | RuleArg::SubstUnion
            | RuleArg::SubstIntersection => {
                let config_path = agenda.ok_or_else(|| usage("crisp rules need --agenda"))?;
                let ctx_path = context
                    .ok_or_else(|| usage("crisp rules need --context for the feature universe"))?;
                let (j1, j2) = two_agents(agents.as_deref())?;
                let ctx: FormalContext = read_json(&ctx_path)?;
                let config: AgendaConfig = read_json(&config_path)?;
                let (model, subst) = config.resolve(ctx.features())?;
                let a1 = model.relevant(&j1)?;
                let a2 = model.relevant(&j2)?;
                let crisp_rule = match rule {
                    RuleArg::Common => DeliberationRule::Common,
                    RuleArg::Distributed => DeliberationRule::Distributed,
                    RuleArg::SubstUnion => DeliberationRule::SubstUnion,
                    _ => DeliberationRule::SubstIntersection,
                };
                let result = crisp_deliberate(crisp_rule, (&j1, a1), (&j2, a2), Some(&subst))?;
                write_json(
                    &out,
                    &FeatureSetDoc {
                        features: result.into_iter().collect(),
                    },
                )?;
            }
            RuleArg::Dempster | RuleArg::Disjunctive | RuleArg::ConjunctiveUnnorm => {
                if masses.len() < 2 {
                    return Err(usage("mass rules need at least two --masses files"));
                }
                let docs = load_mass_docs(&masses)?;
                let account_level = docs[0].0.account_level;
                let mut acc = docs[0].1.clone();
                for (_, next) in &docs[1..] {
                    acc = match rule {
                        RuleArg::Dempster => acc.combine_dempster(next)?,
                        RuleArg::Disjunctive => acc.combine_disjunctive(next)?,
                        _ => acc.combine_conjunctive_unnormalized(next)?,
                    };
                }
                report_conflict(&acc);
                write_json(&out, &MassDoc::from_mass(&acc, account_level))?;
            }
            RuleArg::SubstDisjunctive
            | RuleArg::SubstConjunctive
            | RuleArg::SubstConjunctiveUnnorm => {
                if masses.len() != 2 {
                    return Err(usage(
                        "substitution rules combine exactly two --masses files",
                    ));
                }
                let config_path =
                    agenda.ok_or_else(|| usage("substitution rules need --agenda"))?;
                let (j1, j2) = two_agents(agents.as_deref())?;
                let docs = load_mass_docs(&masses)?;
                let account_level = docs[0].0.account_level;
                let config: AgendaConfig = read_json(&config_path)?;
                let subst = if account_level {
                    config.raw_substitution()?
                } else {
                    config.resolve(docs[0].1.universe())?.1
                };
                let subst_rule = match rule {
                    RuleArg::SubstDisjunctive => SubstitutionRule::Disjunctive,
                    RuleArg::SubstConjunctive => SubstitutionRule::ConjunctiveNormalized,
                    _ => SubstitutionRule::ConjunctiveUnnormalized,
                };
                let combined = docs[0]
                    .1
                    .combine_substitution(&j1, &docs[1].1, &j2, &subst, subst_rule)?;
                report_conflict(&combined);
                write_json(&out, &MassDoc::from_mass(&combined, account_level))?;
            }
        },
        Command::Stability {
            context,
            mass,
            intervals,
            beta,
            out,
            dot,
            most_likely,
        } => {
            let ctx: FormalContext = read_json(&context)?;
            let doc: MassDoc = read_json(&mass)?;
            let mass = doc.expand(intervals)?;
            let dist = ContextDistribution::from_mass(&ctx, &mass)?;
            let cat = dist.beta_categorization(beta)?;
            eprintln!("{} classes at beta {beta}", cat.classes.len());
            write_json(&out, &cat)?;
            if let Some(path) = dot {
                fs::write(&path, dot::beta_dot(&cat))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = most_likely {
                write_json(&path, &dist.most_likely_categorization()?)?;
            }
        }
        Command::Transform {
            mass,
            method,
            level,
            intervals,
            out,
        } => {
            let doc: MassDoc = read_json(&mass)?;
            let mass = doc.expand(intervals)?;
            let table = match (level, method) {
                (LevelArg::Feature, MethodArg::Pignistic) => pignistic(&mass)?,
                (LevelArg::Feature, MethodArg::Plausibility) => plausibility_transform(&mass)?,
                (LevelArg::Account, MethodArg::Pignistic) => {
                    account_importance(&mass, TransformMethod::Pignistic)?
                }
                (LevelArg::Account, MethodArg::Plausibility) => {
                    account_importance(&mass, TransformMethod::Plausibility)?
                }
            };
            let mut buf = Vec::new();
            table.to_csv(&mut buf)?;
            fs::write(&out, buf).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Cluster {
            network,
            weights,
            threshold,
            out,
        } => {
            let mvc: ManyValuedContext = read_json(&network)?;
            let bytes =
                fs::read(&weights).with_context(|| format!("reading {}", weights.display()))?;
            let table = ImportanceTable::from_csv(&bytes, Level::Account)?;
            let flat = agglomerative_cluster(&mvc, &table, threshold)?;
            eprintln!("{} clusters at threshold {threshold}", flat.clusters.len());
            write_json(&out, &flat)?;
        }
        Command::Check {
            network,
            masses,
            agenda,
            context,
        } => {
            let mut findings = Vec::new();
            if let Some(path) = network {
                let mvc: ManyValuedContext = read_json(&path)?;
                for f in mvc.validate() {
                    findings.push(format!("{}: {f}", path.display()));
                }
            }
            for path in &masses {
                let doc: MassDoc = read_json(path)?;
                for f in doc.to_mass()?.validate() {
                    findings.push(format!("{}: {f}", path.display()));
                }
            }
            if let (Some(config_path), Some(ctx_path)) = (agenda, context) {
                let ctx: FormalContext = read_json(&ctx_path)?;
                let config: AgendaConfig = read_json(&config_path)?;
                let (model, subst) = config.resolve(ctx.features())?;
                for f in subst.check_coherence(&model) {
                    findings.push(format!("{}: {f}", config_path.display()));
                }
            }
            if !findings.is_empty() {
                for f in &findings {
                    eprintln!("{f}");
                }
                return Ok(ExitCode::from(1));
            }
            eprintln!("all checks passed");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_mass_docs(paths: &[PathBuf]) -> Result<Vec<(MassDoc, MassFunction)>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        let doc: MassDoc = read_json(path)?;
        let mass = doc.to_mass()?;
        let issues = mass.validate();
        if !issues.is_empty() {
            return Err(CliError::Failure(anyhow::anyhow!(
                "{}: {}",
                path.display(),
                issues.join("; ")
            )));
        }
        out.push((doc, mass));
    }
    let level = out[0].0.account_level;
    if out.iter().any(|(doc, _)| doc.account_level != level) {
        return Err(usage("cannot mix account-level and feature-level masses"));
    }
    Ok(out)
}

fn two_agents(spec: Option<&str>) -> Result<(String, String), CliError> {
    let spec = spec.ok_or_else(|| usage("this rule needs --agents j1,j2"))?;
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(usage("exactly two agents deliberate, e.g. --agents j1,j2"));
    }
    Ok((parts[0].to_string(), parts[1].to_string()))
}

/// Comma-separated object names with `a1..a6`-style range sugar.
fn parse_objects(spec: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some(expanded) = expand_range(token) {
            out.extend(expanded);
        } else {
            out.insert(token.to_string());
        }
    }
    out
}

fn expand_range(token: &str) -> Option<Vec<String>> {
    let (start, end) = token.split_once("..")?;
    let split_at = start.find(|c: char| c.is_ascii_digit())?;
    let (prefix, lo) = start.split_at(split_at);
    let hi = end.strip_prefix(prefix)?;
    let (lo, hi): (u64, u64) = (lo.parse().ok()?, hi.parse().ok()?);
    Some((lo..=hi).map(|i| format!("{prefix}{i}")).collect())
}

fn report_conflict(mass: &MassFunction) {
    if mass.conflict() > 0.0 {
        eprintln!(
            "note: combination left {} on the empty set",
            mass.conflict()
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn object_ranges_expand() {
        let got = parse_objects("a1..a3,a7, a9..a10");
        let want: BTreeSet<String> = ["a1", "a2", "a3", "a7", "a9", "a10"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn plain_names_pass_through() {
        let got = parse_objects("tax office,main");
        assert!(got.contains("tax office"));
        assert!(got.contains("main"));
    }
}
