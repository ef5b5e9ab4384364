//! Participation and strategyproofness audits.
//!
//! A participation audit runs the rule with and without one agent and asks
//! how that agent ranks the two outcomes under a lottery extension. Three
//! nested notions: *participation* (abstaining never strictly helps),
//! *strong* (participating always weakly helps), and *very strong* (strong,
//! plus participating strictly helps whenever the abstention outcome leaves
//! any room for strict improvement at all).
//!
//! A strategyproofness audit replays every possible misreport by one agent
//! and looks for one whose outcome the agent truly prefers (manipulability),
//! while also reporting whether the stronger contract — truth weakly
//! preferred to every misreport outcome — held throughout.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::extensions::{
    dl_compare, sd_compare, strict_improvement, ComparisonResult, Extension, ExtensionError,
};
use crate::prefs::{AgentId, Lottery, PrefsError, Profile, WeakOrder};
use crate::rules::{Rule, RuleError};
use crate::search::{self, SearchError};
use crate::Budgets;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("participation audits need at least two agents")]
    TooFewAgents,
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Prefs(#[from] PrefsError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Enumeration(#[from] SearchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParticipationLevel {
    Participation,
    Strong,
    VeryStrong,
}

impl fmt::Display for ParticipationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParticipationLevel::Participation => "participation",
            ParticipationLevel::Strong => "strong",
            ParticipationLevel::VeryStrong => "very-strong",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParticipationNotion {
    pub level: ParticipationLevel,
    pub extension: Extension,
}

impl fmt::Display for ParticipationNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}-participation", self.level, self.extension)
    }
}

/// The result of one audit, with everything needed to re-check it by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditVerdict {
    pub holds: bool,
    /// Outcome with the audited agent present / reporting truthfully.
    pub with_lottery: Lottery,
    /// Outcome without the agent (participation) or under the found
    /// misreport (strategyproofness; equals `with_lottery` if none).
    pub without_lottery: Lottery,
    /// How the agent ranks `with_lottery` against `without_lottery`.
    pub comparison: ComparisonResult,
    /// Whether any lottery strictly improves on `without_lottery` for the
    /// agent (participation audits; always `false` for strategyproofness).
    pub improvement_exists: bool,
    pub explanation: Explanation,
}

/// Structured reason attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Explanation {
    Participation { agent: AgentId, notion: ParticipationNotion },
    Strategyproofness {
        agent: AgentId,
        extension: Extension,
        /// A misreport whose outcome the agent strictly prefers, if found.
        manipulation: Option<Manipulation>,
        /// Truth weakly preferred to every misreport outcome.
        strong_contract_held: bool,
        misreports_checked: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manipulation {
    pub misreport: WeakOrder,
    pub outcome: Lottery,
}

impl AuditVerdict {
    /// Multi-line human-readable report.
    pub fn describe(&self, profile: &Profile) -> String {
        let mut out = String::new();
        match &self.explanation {
            Explanation::Participation { agent, notion } => {
                out.push_str(&format!(
                    "agent {agent}, {notion}: {}\n",
                    if self.holds { "holds" } else { "violated" }
                ));
                out.push_str(&format!(
                    "  with agent {agent}:    {}\n",
                    self.with_lottery.render_rational(profile)
                ));
                out.push_str(&format!(
                    "  without agent {agent}: {}\n",
                    self.without_lottery.render_rational(profile)
                ));
                out.push_str(&format!(
                    "  comparison (with vs without): {}\n",
                    self.comparison
                ));
                out.push_str(&format!(
                    "  strict improvement over the abstention outcome exists: {}\n",
                    if self.improvement_exists { "yes" } else { "no" }
                ));
            }
            Explanation::Strategyproofness {
                agent,
                extension,
                manipulation,
                strong_contract_held,
                misreports_checked,
            } => {
                out.push_str(&format!(
                    "agent {agent}, {extension}-strategyproofness: {}\n",
                    if self.holds { "holds (no beneficial misreport)" } else { "violated" }
                ));
                out.push_str(&format!(
                    "  truthful outcome: {}\n",
                    self.with_lottery.render_rational(profile)
                ));
                if let Some(manipulation) = manipulation {
                    out.push_str(&format!(
                        "  beneficial misreport: {}\n",
                        profile.render_order(&manipulation.misreport)
                    ));
                    out.push_str(&format!(
                        "  misreport outcome: {}\n",
                        manipulation.outcome.render_rational(profile)
                    ));
                }
                out.push_str(&format!(
                    "  truth weakly preferred across all {misreports_checked} misreports: {}\n",
                    if *strong_contract_held { "yes" } else { "no" }
                ));
            }
        }
        out
    }

    pub fn to_json(&self, profile: &Profile) -> serde_json::Value {
        let mut value = serde_json::json!({
            "holds": self.holds,
            "with": self.with_lottery.to_json(profile),
            "without": self.without_lottery.to_json(profile),
            "comparison": self.comparison.to_string(),
        });
        let obj = value.as_object_mut().expect("object literal");
        match &self.explanation {
            Explanation::Participation { agent, notion } => {
                obj.insert("kind".into(), "participation".into());
                obj.insert("agent".into(), agent.get().into());
                obj.insert("level".into(), notion.level.to_string().into());
                obj.insert("extension".into(), notion.extension.to_string().into());
                obj.insert("improvement_exists".into(), self.improvement_exists.into());
            }
            Explanation::Strategyproofness {
                agent,
                extension,
                manipulation,
                strong_contract_held,
                misreports_checked,
            } => {
                obj.insert("kind".into(), "strategyproofness".into());
                obj.insert("agent".into(), agent.get().into());
                obj.insert("extension".into(), extension.to_string().into());
                obj.insert("strong_contract_held".into(), (*strong_contract_held).into());
                obj.insert("misreports_checked".into(), (*misreports_checked).into());
                if let Some(manipulation) = manipulation {
                    obj.insert(
                        "misreport".into(),
                        profile.render_order(&manipulation.misreport).into(),
                    );
                    obj.insert(
                        "misreport_outcome".into(),
                        manipulation.outcome.to_json(profile),
                    );
                }
            }
        }
        value
    }
}

/// Both outcomes and both comparisons for one (rule, profile, agent), from
/// which every participation notion's verdict follows.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationSummary {
    pub agent: AgentId,
    pub with_lottery: Lottery,
    pub without_lottery: Lottery,
    pub comparison_sd: ComparisonResult,
    pub comparison_dl: ComparisonResult,
    pub improvement_exists: bool,
}

impl ParticipationSummary {
    pub fn comparison(&self, extension: Extension) -> ComparisonResult {
        match extension {
            Extension::Sd => self.comparison_sd,
            Extension::Dl => self.comparison_dl,
        }
    }

    pub fn holds(&self, notion: ParticipationNotion) -> bool {
        let comparison = self.comparison(notion.extension);
        match notion.level {
            // Abstention must not strictly beat participation.
            ParticipationLevel::Participation => {
                comparison != ComparisonResult::StrictlyDispreferred
            }
            ParticipationLevel::Strong => comparison.weakly_prefers(),
            ParticipationLevel::VeryStrong => {
                comparison.weakly_prefers()
                    && (!self.improvement_exists
                        || comparison == ComparisonResult::StrictlyPrefers)
            }
        }
    }

    /// Names of violated implications among the participation notions; empty
    /// when the verdict pattern is consistent.
    pub fn lattice_violations(&self) -> Vec<&'static str> {
        use Extension::{Dl, Sd};
        use ParticipationLevel::{Participation, Strong, VeryStrong};
        let holds = |level, extension| self.holds(ParticipationNotion { level, extension });
        let mut violated = Vec::new();
        let implications: [(&'static str, bool, bool); 9] = [
            ("very-strong sd => very-strong dl", holds(VeryStrong, Sd), holds(VeryStrong, Dl)),
            ("strong sd => strong dl", holds(Strong, Sd), holds(Strong, Dl)),
            ("very-strong sd => strong sd", holds(VeryStrong, Sd), holds(Strong, Sd)),
            ("very-strong dl => strong dl", holds(VeryStrong, Dl), holds(Strong, Dl)),
            ("strong sd => sd-participation", holds(Strong, Sd), holds(Participation, Sd)),
            ("strong dl => dl-participation", holds(Strong, Dl), holds(Participation, Dl)),
            ("dl-participation => sd-participation", holds(Participation, Dl), holds(Participation, Sd)),
            ("dl-participation => strong dl", holds(Participation, Dl), holds(Strong, Dl)),
            (
                "strong sd and very-strong dl => very-strong sd",
                holds(Strong, Sd) && holds(VeryStrong, Dl),
                holds(VeryStrong, Sd),
            ),
        ];
        for (name, premise, conclusion) in implications {
            if premise && !conclusion {
                violated.push(name);
            }
        }
        violated
    }
}

/// Compute the with/without outcomes and comparisons for one agent.
pub fn participation_summary(
    rule: &Rule,
    profile: &Profile,
    agent: AgentId,
    budgets: &Budgets,
) -> Result<ParticipationSummary, AuditError> {
    if profile.num_agents() < 2 {
        return Err(AuditError::TooFewAgents);
    }
    let order = profile.order(agent)?;
    let with_lottery = rule.compute(profile, budgets)?;
    let reduced = profile.remove_agent(agent)?;
    let without_lottery = rule.without_agent(agent).compute(&reduced, budgets)?;
    let comparison_sd = sd_compare(order, &with_lottery, &without_lottery)?;
    let comparison_dl = dl_compare(order, &with_lottery, &without_lottery)?;
    let improvement_exists = strict_improvement(order, &without_lottery)?.is_some();
    Ok(ParticipationSummary {
        agent,
        with_lottery,
        without_lottery,
        comparison_sd,
        comparison_dl,
        improvement_exists,
    })
}

/// Audit one participation notion for one agent.
pub fn audit_participation(
    rule: &Rule,
    profile: &Profile,
    agent: AgentId,
    notion: ParticipationNotion,
    budgets: &Budgets,
) -> Result<AuditVerdict, AuditError> {
    let summary = participation_summary(rule, profile, agent, budgets)?;
    Ok(AuditVerdict {
        holds: summary.holds(notion),
        comparison: summary.comparison(notion.extension),
        with_lottery: summary.with_lottery,
        without_lottery: summary.without_lottery,
        improvement_exists: summary.improvement_exists,
        explanation: Explanation::Participation { agent, notion },
    })
}

/// Audit one agent's incentive to misreport, enumerating every weak order.
pub fn audit_strategyproofness(
    rule: &Rule,
    profile: &Profile,
    agent: AgentId,
    extension: Extension,
    budgets: &Budgets,
) -> Result<AuditVerdict, AuditError> {
    let order = profile.order(agent)?.clone();
    let truthful = rule.compute(profile, budgets)?;
    let misreports = search::enumerate_weak_orders(profile.num_alts(), budgets)?;
    let mut manipulation: Option<Manipulation> = None;
    let mut strong_contract_held = true;
    for misreport in &misreports {
        if misreport == &order {
            continue;
        }
        let outcome = rule.compute(&profile.with_order(agent, misreport.clone())?, budgets)?;
        // Both questions are asked under the agent's true order.
        let truth_vs_lie = extension.compare(&order, &truthful, &outcome)?;
        if !truth_vs_lie.weakly_prefers() {
            strong_contract_held = false;
        }
        if manipulation.is_none() && truth_vs_lie == ComparisonResult::StrictlyDispreferred {
            manipulation = Some(Manipulation { misreport: misreport.clone(), outcome });
        }
    }
    let (holds, comparison, without_lottery) = match &manipulation {
        Some(found) => (false, ComparisonResult::StrictlyDispreferred, found.outcome.clone()),
        None => (true, ComparisonResult::Indifferent, truthful.clone()),
    };
    Ok(AuditVerdict {
        holds,
        with_lottery: truthful,
        without_lottery,
        comparison,
        improvement_exists: false,
        explanation: Explanation::Strategyproofness {
            agent,
            extension,
            manipulation,
            strong_contract_held,
            misreports_checked: misreports.len() - 1,
        },
    })
}

impl FromStr for ParticipationLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "participation" => Ok(ParticipationLevel::Participation),
            "strong" => Ok(ParticipationLevel::Strong),
            "very-strong" => Ok(ParticipationLevel::VeryStrong),
            other => Err(format!("unknown participation level {other:?}")),
        }
    }
}
