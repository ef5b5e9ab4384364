//! Exhaustive search over small preference domains.
//!
//! Enumerates every profile up to a size bound, runs an audit or an
//! efficiency check on each instance, and reports the violations. Useful in
//! two directions: confirming that a property holds everywhere at desk scale,
//! and hunting concrete counterexamples when it does not.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use thiserror::Error;

use crate::audit::{
    audit_participation, audit_strategyproofness, AuditError, AuditVerdict, ParticipationNotion,
};
use crate::efficiency::{ex_post_efficient, sd_efficient, EfficiencyVerdict};
use crate::extensions::Extension;
use crate::prefs::{AgentId, AltSet, Alternative, Lottery, Profile, WeakOrder};
use crate::rules::{Rule, RuleError};
use crate::Budgets;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("weak orders need at least one alternative")]
    EmptyDomain,
    #[error(
        "enumerating weak orders over {alts} alternatives exceeds the budget of {max} \
         (set {env} to raise it)",
        env = crate::Budgets::ENUM_ENV
    )]
    EnumBudget { alts: usize, max: usize },
    #[error("search ranges must be non-empty and start at 1 or above")]
    EmptyRange,
    #[error("instance evaluation failed: {0}")]
    Instance(String),
}

/// All weak orders over `m` alternatives, as ordered set partitions of
/// `{0, .., m-1}`, sorted by their class bitmask sequence. Counts follow the
/// ordered Bell numbers: 1, 3, 13, 75, 541, ...
pub fn enumerate_weak_orders(m: usize, budgets: &Budgets) -> Result<Vec<WeakOrder>, SearchError> {
    if m == 0 {
        return Err(SearchError::EmptyDomain);
    }
    if m > budgets.enum_max_alts {
        return Err(SearchError::EnumBudget { alts: m, max: budgets.enum_max_alts });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    collect_orders(AltSet::full(m), m, &mut prefix, &mut out);
    out.sort();
    Ok(out)
}

fn collect_orders(remaining: AltSet, m: usize, prefix: &mut Vec<AltSet>, out: &mut Vec<WeakOrder>) {
    if remaining.is_empty() {
        out.push(WeakOrder::new(prefix.clone(), m).expect("partitions by construction"));
        return;
    }
    // Every nonempty subset of `remaining` can be the next class.
    let bits = remaining.bits();
    let mut sub = bits;
    loop {
        prefix.push(AltSet::from_bits(sub));
        collect_orders(remaining.minus(AltSet::from_bits(sub)), m, prefix, out);
        prefix.pop();
        if sub == 0 {
            unreachable!("loop exits before the empty subset");
        }
        sub = (sub - 1) & bits;
        if sub == 0 {
            break;
        }
    }
}

/// What to check on every enumerated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Participation(ParticipationNotion),
    Strategyproofness(Extension),
    /// The rule's output puts no probability on Pareto-dominated alternatives.
    ExPostEfficiency,
    /// No lottery SD-dominates the rule's output.
    SdEfficiency,
}

impl Property {
    /// Participation compares a profile against itself minus one agent, so a
    /// lone agent is never an instance.
    fn needs_two_agents(self) -> bool {
        matches!(self, Property::Participation(_))
    }

    /// Audited agents for one profile: each agent in turn, or a single
    /// profile-wide check for the efficiency properties.
    fn targets(self, profile: &Profile) -> Vec<Option<AgentId>> {
        match self {
            Property::Participation(_) | Property::Strategyproofness(_) => {
                profile.agents().map(Some).collect()
            }
            Property::ExPostEfficiency | Property::SdEfficiency => vec![None],
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Participation(notion) => notion.fmt(f),
            Property::Strategyproofness(extension) => {
                write!(f, "{extension}-strategyproofness")
            }
            Property::ExPostEfficiency => f.write_str("ex-post efficiency"),
            Property::SdEfficiency => f.write_str("sd-efficiency"),
        }
    }
}

/// A rule at every profile size, since some searches quantify over a rule
/// parameter as well as the profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleFamily {
    /// One anonymous rule used at every size.
    Anonymous(Rule),
    /// Serial dictatorship with the identity permutation at each size.
    SerialDictatorshipIdentity,
    /// Serial dictatorship over all permutations for n ≤ 3, identity beyond
    /// (keeps the family from growing factorially).
    SerialDictatorshipAll,
    /// Serial dictatorship with one pinned permutation; profiles of any other
    /// size produce no instances.
    SerialDictatorshipPinned(Vec<AgentId>),
}

impl RuleFamily {
    /// Accepts the rule spec grammar plus the family forms `sd` (quantified
    /// over permutations) and `sd:identity`.
    pub fn from_spec(spec: &str) -> Result<RuleFamily, RuleError> {
        match spec.trim() {
            "sd" => Ok(RuleFamily::SerialDictatorshipAll),
            "sd:identity" => Ok(RuleFamily::SerialDictatorshipIdentity),
            other => match Rule::from_spec(other)? {
                Rule::SerialDictatorship(perm) => {
                    Ok(RuleFamily::SerialDictatorshipPinned(perm))
                }
                rule => Ok(RuleFamily::Anonymous(rule)),
            },
        }
    }

    pub fn is_anonymous(&self) -> bool {
        matches!(self, RuleFamily::Anonymous(_))
    }

    /// Concrete rules to audit on profiles with agents `1..=n`.
    pub fn instances(&self, n: usize) -> Vec<Rule> {
        let identity: Vec<AgentId> = agent_ids(n);
        match self {
            RuleFamily::Anonymous(rule) => vec![rule.clone()],
            RuleFamily::SerialDictatorshipIdentity => {
                vec![Rule::SerialDictatorship(identity)]
            }
            RuleFamily::SerialDictatorshipAll => {
                if n <= 3 {
                    permutations(&identity).into_iter().map(Rule::SerialDictatorship).collect()
                } else {
                    vec![Rule::SerialDictatorship(identity)]
                }
            }
            RuleFamily::SerialDictatorshipPinned(perm) => {
                if perm.len() == n {
                    vec![Rule::SerialDictatorship(perm.clone())]
                } else {
                    Vec::new()
                }
            }
        }
    }
}

impl fmt::Display for RuleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleFamily::Anonymous(rule) => rule.fmt(f),
            RuleFamily::SerialDictatorshipIdentity => f.write_str("sd:identity"),
            RuleFamily::SerialDictatorshipAll => f.write_str("sd"),
            RuleFamily::SerialDictatorshipPinned(perm) => {
                Rule::SerialDictatorship(perm.clone()).fmt(f)
            }
        }
    }
}

fn agent_ids(n: usize) -> Vec<AgentId> {
    (1..=n as u32).map(|i| AgentId::new(i).expect("positive id")).collect()
}

/// All permutations of `items`, lexicographic, identity first.
fn permutations<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    let mut remaining = items.to_vec();
    let mut prefix = Vec::with_capacity(items.len());
    let mut out = Vec::new();
    permute(&mut remaining, &mut prefix, &mut out);
    out
}

fn permute<T: Copy>(remaining: &mut Vec<T>, prefix: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
    if remaining.is_empty() {
        out.push(prefix.clone());
        return;
    }
    for i in 0..remaining.len() {
        let item = remaining.remove(i);
        prefix.push(item);
        permute(remaining, prefix, out);
        prefix.pop();
        remaining.insert(i, item);
    }
}

/// One slice of the instance space: instances whose index is `index` modulo
/// `total`. The default is the whole space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shard {
    pub index: usize,
    pub total: usize,
}

impl Default for Shard {
    fn default() -> Self {
        Shard { index: 0, total: 1 }
    }
}

impl FromStr for Shard {
    type Err = String;

    /// `k/K` with `1 <= k <= K`, e.g. `2/4` for the second of four slices.
    fn from_str(s: &str) -> Result<Self, String> {
        let (k, total) = s
            .split_once('/')
            .ok_or_else(|| format!("expected k/K, e.g. 2/4, got {s:?}"))?;
        let k: usize = k.trim().parse().map_err(|_| format!("bad shard index {k:?}"))?;
        let total: usize = total.trim().parse().map_err(|_| format!("bad shard count {total:?}"))?;
        if total == 0 || k == 0 || k > total {
            return Err(format!("shard {k}/{total} out of range (need 1 <= k <= K)"));
        }
        Ok(Shard { index: k - 1, total })
    }
}

impl fmt::Display for Shard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index + 1, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpec {
    pub rule: RuleFamily,
    pub property: Property,
    pub n_range: RangeInclusive<usize>,
    pub m_range: RangeInclusive<usize>,
    /// Quotient profiles by agent anonymity (sorted order multisets instead
    /// of order tuples). Ignored for non-anonymous rule families.
    pub canonicalize: bool,
    /// Stop after this many instances.
    pub budget: Option<u64>,
    pub shard: Shard,
}

impl SearchSpec {
    /// Whole-space search with canonicalization on and no instance budget.
    pub fn new(rule: RuleFamily, property: Property, max_agents: usize, max_alts: usize) -> Self {
        SearchSpec {
            rule,
            property,
            n_range: 1..=max_agents,
            m_range: 1..=max_alts,
            canonicalize: true,
            budget: None,
            shard: Shard::default(),
        }
    }

    pub fn describe(&self) -> String {
        let mut out = format!(
            "rule {}, property {}, agents {}..={}, alternatives {}..={}",
            self.rule,
            self.property,
            self.n_range.start(),
            self.n_range.end(),
            self.m_range.start(),
            self.m_range.end(),
        );
        if self.shard.total > 1 {
            out.push_str(&format!(", shard {}", self.shard));
        }
        out
    }
}

/// A failed instance: the concrete rule (the family member), the profile, the
/// audited agent if the property is per-agent, and the failing verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: Rule,
    pub profile: Profile,
    pub agent: Option<AgentId>,
    pub detail: ViolationDetail,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationDetail {
    Audit(AuditVerdict),
    Efficiency { lottery: Lottery, verdict: EfficiencyVerdict },
}

impl Violation {
    pub fn render(&self) -> String {
        let mut out = format!("rule {}\n", self.rule);
        for line in self.profile.render().lines() {
            out.push_str(&format!("  {line}\n"));
        }
        match &self.detail {
            ViolationDetail::Audit(verdict) => {
                for line in verdict.describe(&self.profile).lines() {
                    out.push_str(&format!("  {line}\n"));
                }
            }
            ViolationDetail::Efficiency { lottery, verdict } => {
                out.push_str(&format!("  outcome: {}\n", lottery.render_rational(&self.profile)));
                for line in verdict.describe(&self.profile).lines() {
                    out.push_str(&format!("  {line}\n"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    /// Instances evaluated to a verdict in this shard.
    pub instances_checked: u64,
    /// Instances skipped because the rule refused them over a budget.
    pub rule_budget_skips: u64,
    pub violations: Vec<Violation>,
    /// Every instance in this shard's slice was evaluated: the instance
    /// budget never triggered and nothing was skipped.
    pub exhausted: bool,
}

impl SearchReport {
    pub fn render(&self, spec: &SearchSpec) -> String {
        let mut out = format!("search: {}\n", spec.describe());
        out.push_str(&format!(
            "checked {} instances ({})",
            self.instances_checked,
            if self.exhausted { "exhausted" } else { "stopped early" }
        ));
        if self.rule_budget_skips > 0 {
            out.push_str(&format!(", skipped {} over rule budgets", self.rule_budget_skips));
        }
        match self.violations.len() {
            0 => out.push_str(": no violations\n"),
            n => out.push_str(&format!(": {n} violation{}\n", if n == 1 { "" } else { "s" })),
        }
        for (i, violation) in self.violations.iter().enumerate() {
            out.push_str(&format!("violation {}:\n", i + 1));
            for line in violation.render().lines() {
                out.push_str(&format!("  {line}\n"));
            }
        }
        out
    }

    pub fn to_json(&self, spec: &SearchSpec) -> serde_json::Value {
        let violations: Vec<serde_json::Value> = self
            .violations
            .iter()
            .map(|v| {
                let mut value = serde_json::json!({
                    "rule": v.rule.to_string(),
                    "profile": v.profile.render(),
                });
                let obj = value.as_object_mut().expect("object literal");
                if let Some(agent) = v.agent {
                    obj.insert("agent".into(), agent.get().into());
                }
                match &v.detail {
                    ViolationDetail::Audit(verdict) => {
                        obj.insert("verdict".into(), verdict.to_json(&v.profile));
                    }
                    ViolationDetail::Efficiency { lottery, verdict } => {
                        obj.insert("outcome".into(), lottery.to_json(&v.profile));
                        obj.insert("verdict".into(), verdict.to_json(&v.profile));
                    }
                }
                value
            })
            .collect();
        serde_json::json!({
            "spec": spec.describe(),
            "instances_checked": self.instances_checked,
            "rule_budget_skips": self.rule_budget_skips,
            "exhausted": self.exhausted,
            "violations": violations,
        })
    }
}

/// Run the search: enumerate profiles over the requested ranges, audit every
/// instance in this shard's slice, and report all violations found.
///
/// Instance indices run in a fixed deterministic order, so equal specs give
/// equal reports and the shards of a split partition the space exactly.
pub fn search(spec: &SearchSpec, budgets: &Budgets) -> Result<SearchReport, SearchError> {
    if spec.n_range.is_empty() || spec.m_range.is_empty() || *spec.n_range.start() == 0 {
        return Err(SearchError::EmptyRange);
    }
    if *spec.m_range.start() == 0 {
        return Err(SearchError::EmptyDomain);
    }
    let multiset = spec.canonicalize && spec.rule.is_anonymous();
    let mut next_index: u64 = 0;
    let mut attempted: u64 = 0;
    let mut skips: u64 = 0;
    let mut violations: Vec<Violation> = Vec::new();
    let mut budget_hit = false;

    'space: for m in spec.m_range.clone() {
        let orders = enumerate_weak_orders(m, budgets)?;
        let alternatives = alphabet_names(m);
        for n in spec.n_range.clone() {
            if spec.property.needs_two_agents() && n < 2 {
                continue;
            }
            let rules = spec.rule.instances(n);
            if rules.is_empty() {
                continue;
            }
            for assignment in OrderAssignments::new(orders.len(), n, multiset) {
                let profile = build_profile(&alternatives, &orders, &assignment);
                for rule in &rules {
                    for target in spec.property.targets(&profile) {
                        let index = next_index;
                        next_index += 1;
                        if index % spec.shard.total as u64 != spec.shard.index as u64 {
                            continue;
                        }
                        if spec.budget.is_some_and(|b| attempted >= b) {
                            budget_hit = true;
                            break 'space;
                        }
                        attempted += 1;
                        match evaluate(spec.property, rule, &profile, target, budgets) {
                            Ok(Some(detail)) => violations.push(Violation {
                                rule: rule.clone(),
                                profile: profile.clone(),
                                agent: target,
                                detail,
                            }),
                            Ok(None) => {}
                            Err(EvalError::Budget) => skips += 1,
                            Err(EvalError::Fatal(message)) => {
                                return Err(SearchError::Instance(message));
                            }
                        }
                    }
                }
            }
        }
    }

    // No false positives: every violation must reproduce on a fresh run.
    for violation in &violations {
        let replayed =
            evaluate(spec.property, &violation.rule, &violation.profile, violation.agent, budgets);
        assert_eq!(
            replayed.as_ref().ok().and_then(|d| d.as_ref()),
            Some(&violation.detail),
            "violation did not re-verify"
        );
    }
    violations.sort_by(|a, b| {
        (a.profile.render(), a.rule.to_string(), a.agent)
            .cmp(&(b.profile.render(), b.rule.to_string(), b.agent))
    });

    Ok(SearchReport {
        instances_checked: attempted - skips,
        rule_budget_skips: skips,
        violations,
        exhausted: !budget_hit && skips == 0,
    })
}

enum EvalError {
    /// The rule refused the instance over a resource budget.
    Budget,
    Fatal(String),
}

fn eval_error(err: AuditError) -> EvalError {
    match err {
        AuditError::Rule(RuleError::RsdBudget { .. }) => EvalError::Budget,
        other => EvalError::Fatal(other.to_string()),
    }
}

fn evaluate(
    property: Property,
    rule: &Rule,
    profile: &Profile,
    agent: Option<AgentId>,
    budgets: &Budgets,
) -> Result<Option<ViolationDetail>, EvalError> {
    match property {
        Property::Participation(notion) => {
            let agent = agent.expect("participation instances carry an agent");
            let verdict = audit_participation(rule, profile, agent, notion, budgets)
                .map_err(eval_error)?;
            Ok((!verdict.holds).then_some(ViolationDetail::Audit(verdict)))
        }
        Property::Strategyproofness(extension) => {
            let agent = agent.expect("strategyproofness instances carry an agent");
            let verdict = audit_strategyproofness(rule, profile, agent, extension, budgets)
                .map_err(eval_error)?;
            Ok((!verdict.holds).then_some(ViolationDetail::Audit(verdict)))
        }
        Property::ExPostEfficiency | Property::SdEfficiency => {
            let lottery = rule
                .compute(profile, budgets)
                .map_err(|e| eval_error(AuditError::Rule(e)))?;
            let verdict = match property {
                Property::ExPostEfficiency => ex_post_efficient(profile, &lottery),
                _ => sd_efficient(profile, &lottery),
            }
            .map_err(|e| EvalError::Fatal(e.to_string()))?;
            Ok((!verdict.efficient).then_some(ViolationDetail::Efficiency { lottery, verdict }))
        }
    }
}

/// `a, b, c, ...` — the fixed alternative table for generated profiles.
fn alphabet_names(m: usize) -> Vec<Alternative> {
    assert!(m <= 26, "generated profiles use single-letter names");
    (0..m)
        .map(|i| ((b'a' + i as u8) as char).to_string().parse().expect("letters are valid names"))
        .collect()
}

fn build_profile(alternatives: &[Alternative], orders: &[WeakOrder], assignment: &[usize]) -> Profile {
    let map: BTreeMap<AgentId, WeakOrder> = assignment
        .iter()
        .enumerate()
        .map(|(i, &o)| (AgentId::new(i as u32 + 1).expect("positive id"), orders[o].clone()))
        .collect();
    Profile::new(alternatives.to_vec(), map).expect("generated profiles are valid")
}

/// Index vectors of length `n` over `0..k`: all tuples, or only the
/// non-decreasing ones (multisets) when quotienting by agent anonymity.
struct OrderAssignments {
    k: usize,
    multiset: bool,
    next: Option<Vec<usize>>,
}

impl OrderAssignments {
    fn new(k: usize, n: usize, multiset: bool) -> Self {
        let next = (k > 0).then(|| vec![0; n]);
        OrderAssignments { k, multiset, next }
    }
}

impl Iterator for OrderAssignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            if succ[i] + 1 < self.k {
                succ[i] += 1;
                let floor = if self.multiset { succ[i] } else { 0 };
                for slot in succ.iter_mut().skip(i + 1) {
                    *slot = floor;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::ParticipationLevel;
    use crate::rules::borda_winners;

    fn ids(ids: &[u32]) -> Vec<AgentId> {
        ids.iter().map(|&i| AgentId::new(i).unwrap()).collect()
    }

    fn notion(level: ParticipationLevel, extension: Extension) -> Property {
        Property::Participation(ParticipationNotion { level, extension })
    }

    #[test]
    fn order_counts_follow_the_ordered_bell_numbers() {
        let budgets = Budgets::default();
        let expected = [1usize, 3, 13, 75, 541];
        for (m, &count) in expected.iter().enumerate().map(|(i, c)| (i + 1, c)) {
            let orders = enumerate_weak_orders(m, &budgets).unwrap();
            assert_eq!(orders.len(), count, "m = {m}");
            let mut sorted = orders.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted, orders, "canonical order, no duplicates");
            assert!(orders.iter().all(|o| o.num_alts() == m));
        }
    }

    #[test]
    fn enumeration_respects_the_budget() {
        let err = enumerate_weak_orders(6, &Budgets::default()).unwrap_err();
        assert_eq!(err, SearchError::EnumBudget { alts: 6, max: 5 });
        let raised = Budgets { enum_max_alts: 6, ..Budgets::default() };
        assert_eq!(enumerate_weak_orders(6, &raised).unwrap().len(), 4683);
        assert_eq!(enumerate_weak_orders(0, &Budgets::default()), Err(SearchError::EmptyDomain));
    }

    #[test]
    fn the_three_orders_on_two_alternatives() {
        let orders = enumerate_weak_orders(2, &Budgets::default()).unwrap();
        let a = AltSet::singleton(0);
        let b = AltSet::singleton(1);
        let expected = [
            WeakOrder::new(vec![a, b], 2).unwrap(),
            WeakOrder::new(vec![b, a], 2).unwrap(),
            WeakOrder::new(vec![a.union(b)], 2).unwrap(),
        ];
        assert_eq!(orders, expected);
    }

    #[test]
    fn plurality_shares_fail_ex_post_efficiency_at_two_by_two() {
        let spec = SearchSpec::new(
            RuleFamily::Anonymous(Rule::ProportionalPlurality),
            Property::ExPostEfficiency,
            2,
            2,
        );
        let report = search(&spec, &Budgets::default()).unwrap();
        assert!(report.exhausted);
        assert!(!report.violations.is_empty());
        // The smallest witness: one agent indifferent, the other not. The
        // outcome 3/4 a + 1/4 b puts weight on the dominated b.
        let wanted = Profile::parse("1: a, b\n2: {a,b}\n").unwrap();
        assert!(
            report.violations.iter().any(|v| v.profile == wanted),
            "{}",
            report.render(&spec)
        );
        for violation in &report.violations {
            match &violation.detail {
                ViolationDetail::Efficiency { verdict, .. } => assert!(!verdict.efficient),
                other => panic!("expected an efficiency violation, got {other:?}"),
            }
        }
    }

    #[test]
    fn identity_dictatorship_fails_very_strong_dl_at_three_by_three() {
        let mut spec = SearchSpec::new(
            RuleFamily::SerialDictatorshipIdentity,
            notion(ParticipationLevel::VeryStrong, Extension::Dl),
            3,
            3,
        );
        spec.n_range = 3..=3;
        spec.m_range = 3..=3;
        let report = search(&spec, &Budgets::default()).unwrap();
        assert!(report.exhausted);
        assert!(!report.violations.is_empty());
        for violation in &report.violations {
            assert_eq!(violation.rule, Rule::SerialDictatorship(ids(&[1, 2, 3])));
            match &violation.detail {
                ViolationDetail::Audit(verdict) => assert!(!verdict.holds),
                other => panic!("expected an audit violation, got {other:?}"),
            }
        }
    }

    #[test]
    fn canonicalized_and_tuple_searches_agree_on_existence() {
        let budgets = Budgets::default();
        let cases = [
            (Rule::ProportionalPlurality, Property::ExPostEfficiency, true),
            (
                Rule::RandomSerialDictatorship,
                notion(ParticipationLevel::VeryStrong, Extension::Sd),
                false,
            ),
        ];
        for (rule, property, expect_violation) in cases {
            let canonical = SearchSpec::new(RuleFamily::Anonymous(rule), property, 2, 2);
            let mut tuple = canonical.clone();
            tuple.canonicalize = false;
            let canonical_report = search(&canonical, &budgets).unwrap();
            let tuple_report = search(&tuple, &budgets).unwrap();
            assert_eq!(
                canonical_report.violations.is_empty(),
                tuple_report.violations.is_empty(),
                "the quotient must not change whether violations exist"
            );
            assert_eq!(!canonical_report.violations.is_empty(), expect_violation);
            assert!(canonical_report.instances_checked <= tuple_report.instances_checked);
            // Determinism: rerunning gives the identical report.
            assert_eq!(search(&canonical, &budgets).unwrap(), canonical_report);
        }
    }

    #[test]
    fn shards_partition_the_space() {
        let base = SearchSpec::new(
            RuleFamily::Anonymous(Rule::ProportionalPlurality),
            Property::ExPostEfficiency,
            2,
            2,
        );
        let whole = search(&base, &Budgets::default()).unwrap();
        let mut total_checked = 0;
        let mut merged: Vec<String> = Vec::new();
        for k in 1..=3 {
            let mut spec = base.clone();
            spec.shard = format!("{k}/3").parse().unwrap();
            let report = search(&spec, &Budgets::default()).unwrap();
            assert!(report.exhausted);
            total_checked += report.instances_checked;
            merged.extend(report.violations.iter().map(Violation::render));
        }
        assert_eq!(total_checked, whole.instances_checked);
        let mut expected: Vec<String> = whole.violations.iter().map(Violation::render).collect();
        expected.sort();
        merged.sort();
        assert_eq!(merged, expected);
    }

    #[test]
    fn the_instance_budget_stops_the_search() {
        let mut spec = SearchSpec::new(
            RuleFamily::Anonymous(Rule::ProportionalPlurality),
            Property::ExPostEfficiency,
            2,
            2,
        );
        spec.budget = Some(5);
        let report = search(&spec, &Budgets::default()).unwrap();
        assert_eq!(report.instances_checked, 5);
        assert!(!report.exhausted);
    }

    #[test]
    fn a_pinned_permutation_only_fits_its_own_size() {
        let spec = SearchSpec::new(
            RuleFamily::SerialDictatorshipPinned(ids(&[2, 1])),
            notion(ParticipationLevel::Strong, Extension::Sd),
            3,
            2,
        );
        let report = search(&spec, &Budgets::default()).unwrap();
        // Only n = 2 matches the permutation. m = 1 has a single (trivial)
        // profile with 2 agents; m = 2 has 3^2 order tuples with 2 agents.
        assert_eq!(report.instances_checked, 2 + 18);
        assert!(report.exhausted);
    }

    #[test]
    fn an_abstention_can_leave_the_borda_winners_unchanged() {
        // Hunt over n <= 3, m <= 3 for a profile and agent where removing
        // the agent does not move the Borda winner set at all.
        let budgets = Budgets::default();
        let mut found = None;
        'hunt: for m in 2..=3 {
            let orders = enumerate_weak_orders(m, &budgets).unwrap();
            let alternatives = alphabet_names(m);
            for n in 2..=3 {
                for assignment in OrderAssignments::new(orders.len(), n, true) {
                    let profile = build_profile(&alternatives, &orders, &assignment);
                    for agent in profile.agents().collect::<Vec<_>>() {
                        let reduced = profile.remove_agent(agent).unwrap();
                        if borda_winners(&profile) == borda_winners(&reduced) {
                            found = Some((profile, agent));
                            break 'hunt;
                        }
                    }
                }
            }
        }
        let (profile, agent) = found.expect("a witness exists at this scale");
        let reduced = profile.remove_agent(agent).unwrap();
        assert_eq!(borda_winners(&profile), borda_winners(&reduced));
    }

    #[test]
    fn reports_render_their_violations() {
        let spec = SearchSpec::new(
            RuleFamily::Anonymous(Rule::ProportionalPlurality),
            Property::ExPostEfficiency,
            2,
            2,
        );
        let report = search(&spec, &Budgets::default()).unwrap();
        let text = report.render(&spec);
        assert!(text.contains("rule pp, property ex-post efficiency"), "{text}");
        assert!(text.contains("violation 1:"), "{text}");
        assert!(text.contains("outcome: "), "{text}");
        let json = report.to_json(&spec);
        assert_eq!(json["exhausted"], serde_json::json!(true));
        assert!(!json["violations"].as_array().unwrap().is_empty());
        assert!(json["violations"][0]["verdict"]["efficient"].is_boolean());
    }

    #[test]
    fn rule_families_parse_and_render() {
        for (text, family) in [
            ("sd", RuleFamily::SerialDictatorshipAll),
            ("sd:identity", RuleFamily::SerialDictatorshipIdentity),
            ("sd:2,1", RuleFamily::SerialDictatorshipPinned(ids(&[2, 1]))),
            ("mr", RuleFamily::Anonymous(Rule::MaximalRecursive)),
        ] {
            let parsed = RuleFamily::from_spec(text).unwrap();
            assert_eq!(parsed, family);
            assert_eq!(parsed.to_string(), text);
        }
        assert!(RuleFamily::from_spec("plurality").is_err());
        assert_eq!(RuleFamily::SerialDictatorshipAll.instances(3).len(), 6);
        assert_eq!(RuleFamily::SerialDictatorshipAll.instances(4).len(), 1);
        assert_eq!(RuleFamily::SerialDictatorshipPinned(ids(&[2, 1])).instances(3).len(), 0);
    }

    #[test]
    fn shard_specs_validate() {
        assert_eq!("2/4".parse::<Shard>().unwrap(), Shard { index: 1, total: 4 });
        assert!("0/4".parse::<Shard>().is_err());
        assert!("5/4".parse::<Shard>().is_err());
        assert!("x".parse::<Shard>().is_err());
        assert_eq!(Shard { index: 1, total: 4 }.to_string(), "2/4");
    }
}
