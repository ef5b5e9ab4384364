//! Embedded worked examples, replayable as a regression gate.
//!
//! Each fixture bundles a profile, the values it must produce, and the audit
//! verdicts that go with them. `run` returns the mismatches instead of
//! panicking so a runner can report every fixture even when one breaks.

use crate::audit::{
    audit_participation, participation_summary, ParticipationLevel, ParticipationNotion,
};
use crate::esr::esr;
use crate::extensions::{dl_compare, sd_compare, ComparisonResult, Extension};
use crate::mr::mr;
use crate::prefs::{AgentId, Lottery, Profile};
use crate::rat;
use crate::rules::Rule;
use crate::Budgets;

/// Three agents over five alternatives; the first two tie whole groups, the
/// third tie-breaks. Maximal recursion resolves it in two levels.
pub const MR_THREE_AGENT: &str = "1: {a,b,c,d}, e\n2: {a,b}, {c,d}, e\n3: {c,e}, a, d, b\n";

/// One agent tops a pair, two agents push c. Under dictatorship order 1,2,3
/// the third agent never matters.
pub const DICTATORSHIP_THREE_AGENT: &str = "1: {a,b}, c\n2: c, b, a\n3: c, b, a\n";

/// Two against two on two alternatives; the fourth agent is redundant.
pub const ESR_FOUR_AGENT: &str = "1: a, b\n2: a, b\n3: b, a\n4: b, a\n";

/// Six agents over eight alternatives; withdrawing agent 2 reshuffles enough
/// mass that neither outcome stochastically dominates the other.
pub const ESR_SIX_AGENT: &str = "\
1: {b,c,f}, {a,d,e,g,h}
2: {a,h}, {c,d,e,f,g}, b
3: {b,c,d,e,h}, {a,f,g}
4: {a,d}, {b,c,g}, e, {f,h}
5: {a,d,e,f,h}, {b,g}, c
6: {e,h}, {a,c,f}, {b,d,g}
";

/// One strict agent and two block-indifferent ones, for comparing lotteries
/// that trade probability between the ends of the strict ranking.
pub const COMPARATOR_THREE_AGENT: &str = "1: a, b, c, d\n2: {a,b}, {c,d}\n3: {c,d}, {a,b}\n";

pub struct Fixture {
    pub id: &'static str,
    pub description: &'static str,
    pub run: fn(&Budgets) -> FixtureOutcome,
}

#[derive(Debug, Clone, Default)]
pub struct FixtureOutcome {
    /// Expectations that did not hold; empty means the fixture passed.
    pub failures: Vec<String>,
    /// Informational lines (reference values, side observations).
    pub notes: Vec<String>,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Every embedded fixture, in report order.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            id: "mr-three-agent",
            description: "maximal recursion: exact outcome and recursion tree",
            run: mr_three_agent,
        },
        Fixture {
            id: "mr-participation",
            description: "maximal recursion pays agent 2 a strict sd gain for voting",
            run: mr_participation,
        },
        Fixture {
            id: "esr-four-agent",
            description: "egalitarian reservation leaves the fourth agent flat at 1/2 a + 1/2 b",
            run: esr_four_agent,
        },
        Fixture {
            id: "esr-six-agent",
            description: "egalitarian reservation: sd-incomparable outcomes for agent 2",
            run: esr_six_agent,
        },
        Fixture {
            id: "esr-six-agent-values",
            description: "egalitarian reservation six-agent reference values (informational)",
            run: esr_six_agent_values,
        },
        Fixture {
            id: "dictatorship-abstention",
            description: "serial dictatorship 1,2,3 ignores agent 3 despite room to improve",
            run: dictatorship_abstention,
        },
        Fixture {
            id: "comparator-incomparable",
            description: "sd leaves a lottery pair incomparable that dl decides",
            run: comparator_incomparable,
        },
        Fixture {
            id: "lattice-smoke",
            description: "participation implications consistent across rules and profiles",
            run: lattice_smoke,
        },
        Fixture {
            id: "rsd-three-agent",
            description: "random serial dictatorship mixes to 1/3 b + 2/3 c",
            run: rsd_three_agent,
        },
        Fixture {
            id: "pp-shares",
            description: "proportional plurality splits top-class weight into exact shares",
            run: pp_shares,
        },
    ]
}

struct Checks {
    outcome: FixtureOutcome,
}

impl Checks {
    fn new() -> Self {
        Checks { outcome: FixtureOutcome::default() }
    }

    fn expect(&mut self, label: &str, ok: bool) {
        if !ok {
            self.outcome.failures.push(label.to_string());
        }
    }

    fn expect_eq<T: PartialEq + std::fmt::Debug>(&mut self, label: &str, got: &T, want: &T) {
        if got != want {
            self.outcome.failures.push(format!("{label}: got {got:?}, want {want:?}"));
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.outcome.notes.push(line.into());
    }

    fn finish(self) -> FixtureOutcome {
        self.outcome
    }
}

fn parse(text: &str) -> Profile {
    Profile::parse(text).expect("embedded profiles parse")
}

fn agent(id: u32) -> AgentId {
    AgentId::new(id).expect("positive id")
}

fn lottery(profile: &Profile, text: &str) -> Lottery {
    Lottery::parse(text, profile).expect("embedded lotteries parse")
}

fn notion(level: ParticipationLevel, extension: Extension) -> ParticipationNotion {
    ParticipationNotion { level, extension }
}

fn mr_three_agent(_budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(MR_THREE_AGENT);
    let (outcome, root) = mr(&p);
    c.expect_eq("outcome", &outcome, &lottery(&p, "a: 10/18, c: 8/18"));
    c.note(format!("outcome: {}", outcome.render_rational(&p)));
    // The tree: the full set splits between {a,b} and {c}, then {a,b}
    // collapses onto a.
    c.expect_eq("root weight", &root.weight, &rat(1, 1));
    c.expect_eq("root children", &root.children.len(), &2);
    if let [ab, sole_c] = root.children.as_slice() {
        c.expect_eq("first child weight", &ab.weight, &rat(10, 18));
        c.expect_eq("second child weight", &sole_c.weight, &rat(8, 18));
        c.expect_eq("first child set", &p.render_set(ab.set), &"{a,b}".to_string());
        c.expect_eq("second child set", &p.render_set(sole_c.set), &"{c}".to_string());
        c.expect_eq("first child children", &ab.children.len(), &1);
    }
    let reduced = p.remove_agent(agent(2)).expect("three agents");
    let (without, _) = mr(&reduced);
    c.expect_eq("outcome without agent 2", &without, &lottery(&p, "c: 1"));
    c.finish()
}

fn mr_participation(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(MR_THREE_AGENT);
    let verdict = audit_participation(
        &Rule::MaximalRecursive,
        &p,
        agent(2),
        notion(ParticipationLevel::VeryStrong, Extension::Sd),
        budgets,
    )
    .expect("audit runs");
    c.expect("very-strong sd-participation holds for agent 2", verdict.holds);
    c.expect_eq("comparison", &verdict.comparison, &ComparisonResult::StrictlyPrefers);
    c.note(format!("with agent 2:    {}", verdict.with_lottery.render_rational(&p)));
    c.note(format!("without agent 2: {}", verdict.without_lottery.render_rational(&p)));
    c.finish()
}

fn esr_four_agent(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(ESR_FOUR_AGENT);
    let summary = participation_summary(&Rule::EgalitarianReservation, &p, agent(4), budgets)
        .expect("audit runs");
    let half_half = lottery(&p, "a: 1/2, b: 1/2");
    c.expect_eq("outcome with agent 4", &summary.with_lottery, &half_half);
    c.expect_eq("outcome without agent 4", &summary.without_lottery, &half_half);
    c.expect(
        "very strong sd-participation violated",
        !summary.holds(notion(ParticipationLevel::VeryStrong, Extension::Sd)),
    );
    c.expect(
        "strong sd-participation holds",
        summary.holds(notion(ParticipationLevel::Strong, Extension::Sd)),
    );
    c.finish()
}

fn esr_six_agent(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(ESR_SIX_AGENT);
    let verdict = audit_participation(
        &Rule::EgalitarianReservation,
        &p,
        agent(2),
        notion(ParticipationLevel::Strong, Extension::Sd),
        budgets,
    )
    .expect("audit runs");
    c.expect("strong sd-participation violated for agent 2", !verdict.holds);
    c.expect_eq("comparison", &verdict.comparison, &ComparisonResult::Incomparable);
    // The telltale pair: b carries 1/6 when agent 2 votes but only 1/9 when
    // she abstains, while e moves the other way.
    let b = p.alt_index("b").expect("b exists");
    c.expect_eq("probability of b with agent 2", verdict.with_lottery.prob(b), &rat(1, 6));
    c.expect_eq("probability of b without agent 2", verdict.without_lottery.prob(b), &rat(1, 9));
    c.finish()
}

fn esr_six_agent_values(_budgets: &Budgets) -> FixtureOutcome {
    // The reference values are informational: they pin the recorded
    // tie-selection convention, while the verdict fixture above carries the
    // pass/fail weight.
    let mut c = Checks::new();
    let p = parse(ESR_SIX_AGENT);
    let (with, _) = esr(&p);
    let reduced = p.remove_agent(agent(2)).expect("six agents");
    let (without, _) = esr(&reduced);
    let want_with = "a: 0.333333, b: 0.166667, c: 0.166667, d: 0.000000, e: 0.000000, \
                     f: 0.000000, g: 0.000000, h: 0.333333";
    let want_without = "a: 0.222222, b: 0.111111, c: 0.222222, d: 0.111111, e: 0.333333, \
                        f: 0.000000, g: 0.000000, h: 0.000000";
    for (label, got, want) in [
        ("with agent 2", with.render_decimal(&p), want_with),
        ("without agent 2", without.render_decimal(&p), want_without),
    ] {
        if got == want {
            c.note(format!("{label}: reference decimals match exactly ({got})"));
        } else {
            c.note(format!("{label}: MISMATCH against reference\n  got  {got}\n  want {want}"));
        }
    }
    c.finish()
}

fn dictatorship_abstention(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(DICTATORSHIP_THREE_AGENT);
    let rule = Rule::SerialDictatorship(vec![agent(1), agent(2), agent(3)]);
    let summary = participation_summary(&rule, &p, agent(3), budgets).expect("audit runs");
    let point_b = lottery(&p, "b: 1");
    c.expect_eq("outcome with agent 3", &summary.with_lottery, &point_b);
    c.expect_eq("outcome without agent 3", &summary.without_lottery, &point_b);
    c.expect(
        "very strong dl-participation violated",
        !summary.holds(notion(ParticipationLevel::VeryStrong, Extension::Dl)),
    );
    c.expect(
        "very strong sd-participation violated",
        !summary.holds(notion(ParticipationLevel::VeryStrong, Extension::Sd)),
    );
    c.expect(
        "strong sd-participation still holds",
        summary.holds(notion(ParticipationLevel::Strong, Extension::Sd)),
    );
    c.finish()
}

fn comparator_incomparable(_budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(COMPARATOR_THREE_AGENT);
    let first = lottery(&p, "a: 2/3, d: 1/3");
    let second = lottery(&p, "a: 1/2, c: 1/2");
    let strict = p.order(agent(1)).expect("agent 1").clone();
    c.expect_eq(
        "sd leaves agent 1 undecided",
        &sd_compare(&strict, &first, &second).expect("same domain"),
        &ComparisonResult::Incomparable,
    );
    // dl is complete: agent 1's top singleton {a} already separates them,
    // and agent 3's top pair {c,d} separates them the other way.
    c.expect_eq(
        "dl decides for agent 1",
        &dl_compare(&strict, &first, &second).expect("same domain"),
        &ComparisonResult::StrictlyPrefers,
    );
    let pair_lover = p.order(agent(3)).expect("agent 3").clone();
    c.expect_eq(
        "dl decides against agent 3",
        &dl_compare(&pair_lover, &first, &second).expect("same domain"),
        &ComparisonResult::StrictlyDispreferred,
    );
    c.finish()
}

fn lattice_smoke(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let anonymous = [
        Rule::Constant,
        Rule::RandomSerialDictatorship,
        Rule::ProportionalPlurality,
        Rule::BordaUniform,
        Rule::MaximalRecursive,
        Rule::EgalitarianReservation,
    ];
    let mut checked = 0usize;
    for text in [MR_THREE_AGENT, DICTATORSHIP_THREE_AGENT, ESR_FOUR_AGENT] {
        let p = parse(text);
        let identity: Vec<AgentId> = p.agents().collect();
        let mut rules = anonymous.to_vec();
        rules.push(Rule::SerialDictatorship(identity));
        for rule in &rules {
            for agent in p.agents().collect::<Vec<_>>() {
                let summary =
                    participation_summary(rule, &p, agent, budgets).expect("audit runs");
                let violated = summary.lattice_violations();
                c.expect(
                    &format!("implications consistent (rule {rule}, agent {agent})"),
                    violated.is_empty(),
                );
                checked += 1;
            }
        }
    }
    c.note(format!("{checked} (rule, profile, agent) triples checked"));
    c.finish()
}

fn rsd_three_agent(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(DICTATORSHIP_THREE_AGENT);
    let outcome =
        Rule::RandomSerialDictatorship.compute(&p, budgets).expect("three agents fit the budget");
    c.expect_eq("outcome", &outcome, &lottery(&p, "b: 1/3, c: 2/3"));
    c.finish()
}

fn pp_shares(budgets: &Budgets) -> FixtureOutcome {
    let mut c = Checks::new();
    let p = parse(MR_THREE_AGENT);
    let outcome = Rule::ProportionalPlurality.compute(&p, budgets).expect("pp always computes");
    c.expect_eq(
        "outcome",
        &outcome,
        &lottery(&p, "a: 1/4, b: 1/4, c: 1/4, d: 1/12, e: 1/6"),
    );
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn at_least_eight_fixtures_with_unique_kebab_ids() {
        let all = fixtures();
        assert!(all.len() >= 8, "{} fixtures", all.len());
        let ids: BTreeSet<&str> = all.iter().map(|f| f.id).collect();
        assert_eq!(ids.len(), all.len(), "duplicate fixture ids");
        for fixture in &all {
            assert!(
                fixture.id.chars().all(|ch| ch.is_ascii_lowercase() || ch == '-' || ch.is_ascii_digit()),
                "id {:?}",
                fixture.id
            );
            assert!(!fixture.description.is_empty());
        }
    }

    #[test]
    fn every_fixture_passes() {
        let budgets = Budgets::default();
        for fixture in fixtures() {
            let outcome = (fixture.run)(&budgets);
            assert!(
                outcome.passed(),
                "fixture {} failed:\n{}",
                fixture.id,
                outcome.failures.join("\n")
            );
        }
    }

    #[test]
    fn the_values_fixture_reports_exact_decimal_matches() {
        let budgets = Budgets::default();
        let all = fixtures();
        let fixture = all.iter().find(|f| f.id == "esr-six-agent-values").unwrap();
        let outcome = (fixture.run)(&budgets);
        assert!(outcome.passed());
        assert_eq!(outcome.notes.len(), 2);
        for note in &outcome.notes {
            assert!(note.contains("match exactly"), "{note}");
            assert!(!note.contains("MISMATCH"), "{note}");
        }
        assert!(outcome.notes[0].contains("0.333333"), "{:?}", outcome.notes);
    }
}
