//! Efficiency verification for lotteries.
//!
//! *Ex post* efficiency asks that the lottery only touch Pareto optimal
//! alternatives. *SD-efficiency* asks that no other lottery stochastically
//! dominates it for every agent at once; that existential is decided by one
//! LP whose variables are a candidate lottery `q` and one slack per agent and
//! class prefix, with the slacks forced equal to `q`'s cumulative advantage
//! over `p`. Maximizing total slack finds a dominating `q` whenever one
//! exists (any dominator is feasible with positive objective); optimum zero
//! certifies efficiency.

use thiserror::Error;

use num::Zero;

use crate::extensions::{sd_compare, ComparisonResult, ExtensionError};
use crate::lp::{LinearProgram, Relation, VarId};
use crate::prefs::{AltSet, Lottery, PrefsError, Profile};
use crate::{rat, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EfficiencyError {
    #[error("lottery has {got} probabilities but the profile has {want} alternatives")]
    DomainMismatch { got: usize, want: usize },
    #[error(transparent)]
    Prefs(#[from] PrefsError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// Why a lottery failed a check.
#[derive(Debug, Clone, PartialEq)]
pub enum EfficiencyWitness {
    /// A support alternative and one that Pareto-dominates it.
    ParetoDominated { dominated: usize, dominator: usize },
    /// A lottery every agent weakly SD-prefers, at least one strictly.
    SdDominator(Lottery),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyVerdict {
    pub efficient: bool,
    pub witness: Option<EfficiencyWitness>,
}

impl EfficiencyVerdict {
    pub fn describe(&self, profile: &Profile) -> String {
        match &self.witness {
            None => "efficient\n".to_string(),
            Some(EfficiencyWitness::ParetoDominated { dominated, dominator }) => format!(
                "inefficient: positive probability on {}, which {} Pareto-dominates\n",
                profile.alt_name(*dominated),
                profile.alt_name(*dominator),
            ),
            Some(EfficiencyWitness::SdDominator(q)) => format!(
                "inefficient: sd-dominated by {}\n",
                q.render_rational(profile)
            ),
        }
    }

    pub fn to_json(&self, profile: &Profile) -> serde_json::Value {
        let mut value = serde_json::json!({ "efficient": self.efficient });
        let obj = value.as_object_mut().expect("object literal");
        match &self.witness {
            None => {}
            Some(EfficiencyWitness::ParetoDominated { dominated, dominator }) => {
                obj.insert("dominated".into(), profile.alt_name(*dominated).into());
                obj.insert("dominator".into(), profile.alt_name(*dominator).into());
            }
            Some(EfficiencyWitness::SdDominator(q)) => {
                obj.insert("dominator_lottery".into(), q.to_json(profile));
            }
        }
        value
    }
}

/// `true` when `b` is at least as good as `a` for every agent and strictly
/// better for at least one.
pub fn pareto_dominates(profile: &Profile, b: usize, a: usize) -> Result<bool, EfficiencyError> {
    let mut strict = false;
    for (_, order) in profile.orders() {
        let rank_b = order.class_of(b)?;
        let rank_a = order.class_of(a)?;
        if rank_b > rank_a {
            return Ok(false);
        }
        if rank_b < rank_a {
            strict = true;
        }
    }
    Ok(strict)
}

/// The Pareto optimal (undominated) alternatives.
pub fn pareto_optimal(profile: &Profile) -> AltSet {
    let m = profile.num_alts();
    AltSet::from_indices((0..m).filter(|&a| {
        !(0..m).any(|b| b != a && pareto_dominates(profile, b, a).expect("indices in domain"))
    }))
}

fn check_domain(profile: &Profile, p: &Lottery) -> Result<(), EfficiencyError> {
    if p.num_alts() != profile.num_alts() {
        return Err(EfficiencyError::DomainMismatch {
            got: p.num_alts(),
            want: profile.num_alts(),
        });
    }
    Ok(())
}

/// Is `p` supported only on Pareto optimal alternatives?
pub fn ex_post_efficient(
    profile: &Profile,
    p: &Lottery,
) -> Result<EfficiencyVerdict, EfficiencyError> {
    check_domain(profile, p)?;
    let optimal = pareto_optimal(profile);
    let bad = p.support().minus(optimal);
    match bad.min() {
        None => Ok(EfficiencyVerdict { efficient: true, witness: None }),
        Some(dominated) => {
            let dominator = (0..profile.num_alts())
                .find(|&b| b != dominated && pareto_dominates(profile, b, dominated).unwrap())
                .expect("a non-optimal alternative has a dominator");
            Ok(EfficiencyVerdict {
                efficient: false,
                witness: Some(EfficiencyWitness::ParetoDominated { dominated, dominator }),
            })
        }
    }
}

/// Is there no lottery that SD-dominates `p`?
pub fn sd_efficient(
    profile: &Profile,
    p: &Lottery,
) -> Result<EfficiencyVerdict, EfficiencyError> {
    check_domain(profile, p)?;
    let m = profile.num_alts();
    let mut lp = LinearProgram::new();
    let q: Vec<VarId> = (0..m).map(|_| lp.add_var(true)).collect();
    let ones: Vec<(VarId, Rational)> = q.iter().map(|&v| (v, rat(1, 1))).collect();
    lp.add_constraint(&ones, Relation::Eq, rat(1, 1));
    let mut slacks = Vec::new();
    for (_, order) in profile.orders() {
        let mut prefix = AltSet::EMPTY;
        for &class in order.classes() {
            prefix = prefix.union(class);
            // q(prefix) - slack = p(prefix), slack >= 0.
            let slack = lp.add_var(true);
            let mut terms: Vec<(VarId, Rational)> =
                prefix.iter().map(|a| (q[a], rat(1, 1))).collect();
            terms.push((slack, rat(-1, 1)));
            lp.add_constraint(&terms, Relation::Eq, p.mass(prefix)?);
            slacks.push(slack);
        }
    }
    let objective: Vec<(VarId, Rational)> = slacks.iter().map(|&s| (s, rat(1, 1))).collect();
    lp.set_objective(&objective);
    let (assignment, value) = lp.solve().optimal().expect("p itself is feasible");
    if value.is_zero() {
        return Ok(EfficiencyVerdict { efficient: true, witness: None });
    }
    let probs: Vec<Rational> = q.iter().map(|&v| assignment[v.index()].clone()).collect();
    let witness = Lottery::new(probs).expect("LP constrains q to the simplex");
    // The LP can only be trusted as far as the comparators confirm it: the
    // positive-slack solution must weakly SD-dominate for everyone and
    // strictly for someone.
    let mut someone_strict = false;
    for (_, order) in profile.orders() {
        match sd_compare(order, &witness, p)? {
            ComparisonResult::StrictlyPrefers => someone_strict = true,
            ComparisonResult::Indifferent => {}
            other => panic!("LP produced a non-dominating witness ({other})"),
        }
    }
    assert!(someone_strict, "positive slack without a strict gainer");
    Ok(EfficiencyVerdict {
        efficient: false,
        witness: Some(EfficiencyWitness::SdDominator(witness)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules;

    fn profile(text: &str) -> Profile {
        Profile::parse(text).unwrap()
    }

    #[test]
    fn pareto_set_of_the_dictatorship_profile() {
        // 1: {a,b} > c; 2,3: c > b > a. b dominates a (1 indifferent, 2 and 3
        // strict), nothing dominates b or c.
        let p = profile("1: {a,b}, c\n2: c, b, a\n3: c, b, a\n");
        assert_eq!(pareto_optimal(&p), AltSet::from_indices([1, 2]));
        assert!(pareto_dominates(&p, 1, 0).unwrap());
        assert!(!pareto_dominates(&p, 0, 1).unwrap());
        assert!(!pareto_dominates(&p, 2, 1).unwrap());
    }

    #[test]
    fn full_indifference_leaves_everything_optimal() {
        let p = profile("1: {a,b,c}\n2: {a,b,c}\n");
        assert_eq!(pareto_optimal(&p), p.full_set());
        // ... and every lottery is SD-efficient by symmetry.
        let lot = Lottery::parse("a: 1/6, b: 1/3, c: 1/2", &p).unwrap();
        assert!(sd_efficient(&p, &lot).unwrap().efficient);
    }

    #[test]
    fn mixed_top_class_mass_fails_ex_post() {
        // 1: {a,b}; 2: a > b — b is dominated yet gets mass 1/4 under
        // proportional plurality.
        let p = profile("1: {a,b}\n2: a, b\n");
        let lot = rules::proportional_plurality(&p);
        let verdict = ex_post_efficient(&p, &lot).unwrap();
        assert!(!verdict.efficient);
        assert_eq!(
            verdict.witness,
            Some(EfficiencyWitness::ParetoDominated { dominated: 1, dominator: 0 })
        );
    }

    #[test]
    fn point_lottery_on_a_top_is_efficient() {
        let p = profile("1: a, b\n");
        let lot = Lottery::point(0, 2);
        assert!(ex_post_efficient(&p, &lot).unwrap().efficient);
        assert!(sd_efficient(&p, &lot).unwrap().efficient);
    }

    #[test]
    fn split_mass_under_a_single_strict_agent_is_sd_dominated() {
        let p = profile("1: a, b\n");
        let lot = Lottery::parse("a: 1/2, b: 1/2", &p).unwrap();
        let verdict = sd_efficient(&p, &lot).unwrap();
        assert!(!verdict.efficient);
        match verdict.witness {
            Some(EfficiencyWitness::SdDominator(q)) => {
                assert_eq!(q, Lottery::point(0, 2));
            }
            other => panic!("expected an SD dominator, got {other:?}"),
        }
    }

    #[test]
    fn sd_efficiency_implies_ex_post_on_rule_outputs() {
        // Spot form of the implication; the exhaustive form lives in the
        // acceptance suite.
        let texts = [
            "1: {a,b}, c\n2: c, b, a\n3: c, b, a\n",
            "1: {a,b}\n2: a, b\n",
            "1: a, b, c\n2: {a,b,c}\n",
        ];
        for text in texts {
            let p = profile(text);
            for lot in [
                rules::proportional_plurality(&p),
                rules::borda_uniform(&p),
                crate::mr::mr(&p).0,
            ] {
                let sd = sd_efficient(&p, &lot).unwrap();
                if sd.efficient {
                    assert!(ex_post_efficient(&p, &lot).unwrap().efficient);
                }
            }
        }
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let p = profile("1: a, b, c\n");
        let narrow = profile("1: a, b\n");
        let lot = Lottery::parse("a: 1", &narrow).unwrap();
        assert!(matches!(
            sd_efficient(&p, &lot),
            Err(EfficiencyError::DomainMismatch { got: 2, want: 3 })
        ));
        assert!(matches!(
            ex_post_efficient(&p, &lot),
            Err(EfficiencyError::DomainMismatch { got: 2, want: 3 })
        ));
    }

    #[test]
    fn rsd_output_on_the_dictatorship_profile_is_ex_post_efficient() {
        let p = profile("1: {a,b}, c\n2: c, b, a\n3: c, b, a\n");
        let lot = rules::rsd(&p, 10).unwrap();
        assert!(ex_post_efficient(&p, &lot).unwrap().efficient);
    }
}
