//! Social decision schemes: maps from a profile to a lottery.
//!
//! The simple schemes live here; the two recursive/continuous constructions
//! have their own modules ([`crate::mr`], [`crate::esr`]) and are dispatched
//! through [`Rule`]. Everything is exact and deterministic — "randomized"
//! refers to the *output* being a lottery, never to coin flips at compute
//! time.

use std::collections::HashMap;
use std::fmt;

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::prefs::{AgentId, AltSet, Lottery, PrefsError, Profile};
use crate::{Budgets, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("permutation must list each of the profile's agents exactly once")]
    BadPermutation,
    #[error("random serial dictatorship over {agents} agents exceeds the budget of {budget} (set {env} to raise it)", env = crate::Budgets::RSD_ENV)]
    RsdBudget { agents: usize, budget: usize },
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
    #[error(transparent)]
    Prefs(#[from] PrefsError),
}

/// A named scheme, with its parameters if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Uniform lottery over all alternatives, ignoring preferences.
    Constant,
    /// Agents pick in the given order, each narrowing to their best among
    /// what is left; ties at the end resolve uniformly.
    SerialDictatorship(Vec<AgentId>),
    /// Average of serial dictatorship over all agent orderings.
    RandomSerialDictatorship,
    /// Each agent spreads 1/n over their most-preferred alternatives.
    ProportionalPlurality,
    /// Uniform lottery over the alternatives with maximal Borda score.
    BordaUniform,
    /// Maximal recursive scheme.
    MaximalRecursive,
    /// Egalitarian simultaneous reservation scheme.
    EgalitarianReservation,
}

impl Rule {
    /// Parse a compact rule spec: `constant`, `rsd`, `pp`, `bo`, `mr`, `esr`,
    /// or `sd:1,2,3` (serial dictatorship with its picking order).
    pub fn from_spec(spec: &str) -> Result<Rule, RuleError> {
        let spec = spec.trim();
        if let Some(perm) = spec.strip_prefix("sd:") {
            let ids: Result<Vec<AgentId>, RuleError> = perm
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<u32>()
                        .map_err(|_| RuleError::BadPermutation)
                        .and_then(|id| AgentId::new(id).map_err(RuleError::from))
                })
                .collect();
            return Ok(Rule::SerialDictatorship(ids?));
        }
        match spec {
            "constant" => Ok(Rule::Constant),
            "rsd" => Ok(Rule::RandomSerialDictatorship),
            "pp" => Ok(Rule::ProportionalPlurality),
            "bo" => Ok(Rule::BordaUniform),
            "mr" => Ok(Rule::MaximalRecursive),
            "esr" => Ok(Rule::EgalitarianReservation),
            other => Err(RuleError::UnknownRule(other.to_string())),
        }
    }

    /// `true` when the scheme treats agents symmetrically, i.e. carries no
    /// agent-specific parameters.
    pub fn is_anonymous(&self) -> bool {
        !matches!(self, Rule::SerialDictatorship(_))
    }

    /// The rule to apply to a profile from which `removed` is absent: serial
    /// dictatorship keeps its picking order minus the removed agent, every
    /// other scheme is unchanged.
    pub fn without_agent(&self, removed: AgentId) -> Rule {
        match self {
            Rule::SerialDictatorship(perm) => Rule::SerialDictatorship(
                perm.iter().copied().filter(|&a| a != removed).collect(),
            ),
            other => other.clone(),
        }
    }

    pub fn compute(&self, profile: &Profile, budgets: &Budgets) -> Result<Lottery, RuleError> {
        match self {
            Rule::Constant => Ok(constant(profile)),
            Rule::SerialDictatorship(perm) => Ok(serial_dictatorship(profile, perm)?.0),
            Rule::RandomSerialDictatorship => rsd(profile, budgets.rsd_max_agents),
            Rule::ProportionalPlurality => Ok(proportional_plurality(profile)),
            Rule::BordaUniform => Ok(borda_uniform(profile)),
            Rule::MaximalRecursive => Ok(crate::mr::mr(profile).0),
            Rule::EgalitarianReservation => Ok(crate::esr::esr(profile).0),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Constant => f.write_str("constant"),
            Rule::SerialDictatorship(perm) => {
                let ids: Vec<String> = perm.iter().map(|a| a.to_string()).collect();
                write!(f, "sd:{}", ids.join(","))
            }
            Rule::RandomSerialDictatorship => f.write_str("rsd"),
            Rule::ProportionalPlurality => f.write_str("pp"),
            Rule::BordaUniform => f.write_str("bo"),
            Rule::MaximalRecursive => f.write_str("mr"),
            Rule::EgalitarianReservation => f.write_str("esr"),
        }
    }
}

/// Uniform over all alternatives.
pub fn constant(profile: &Profile) -> Lottery {
    Lottery::uniform_over(profile.full_set(), profile.num_alts())
}

/// Serial dictatorship: agents refine the candidate set in `perm` order, each
/// keeping their most-preferred remaining alternatives; the final set (also
/// returned) is resolved by a uniform draw. `perm` must list the profile's
/// agents exactly once each.
pub fn serial_dictatorship(
    profile: &Profile,
    perm: &[AgentId],
) -> Result<(Lottery, AltSet), RuleError> {
    let mut expected: Vec<AgentId> = profile.agents().collect();
    let mut given = perm.to_vec();
    given.sort();
    expected.sort();
    if given != expected {
        return Err(RuleError::BadPermutation);
    }
    let mut remaining = profile.full_set();
    for &agent in perm {
        remaining = profile.order(agent)?.max_set(remaining)?;
    }
    Ok((Lottery::uniform_over(remaining, profile.num_alts()), remaining))
}

/// Random serial dictatorship: the exact average of [`serial_dictatorship`]
/// over all `n!` agent orderings.
///
/// Computed by recursion on (set of agents yet to pick, current candidate
/// set) with memoization, which collapses the factorial walk whenever
/// different pick orders reach the same state. Still exponential in the worst
/// case — the problem is #P-hard in general — hence the explicit budget.
pub fn rsd(profile: &Profile, max_agents: usize) -> Result<Lottery, RuleError> {
    let n = profile.num_agents();
    if n > max_agents {
        return Err(RuleError::RsdBudget { agents: n, budget: max_agents });
    }
    let agents: Vec<AgentId> = profile.agents().collect();
    let m = profile.num_alts();
    let mut memo: HashMap<(u64, AltSet), Vec<Rational>> = HashMap::new();

    fn go(
        profile: &Profile,
        agents: &[AgentId],
        left: u64,
        candidates: AltSet,
        memo: &mut HashMap<(u64, AltSet), Vec<Rational>>,
    ) -> Vec<Rational> {
        if let Some(hit) = memo.get(&(left, candidates)) {
            return hit.clone();
        }
        let m = profile.num_alts();
        let result = if left == 0 {
            Lottery::uniform_over(candidates, m).probs().to_vec()
        } else {
            let mut acc = vec![Rational::zero(); m];
            let count = left.count_ones() as usize;
            let share = Rational::new(BigInt::one(), BigInt::from(count));
            for (idx, &agent) in agents.iter().enumerate() {
                if left & (1 << idx) == 0 {
                    continue;
                }
                let narrowed = profile
                    .order(agent)
                    .expect("agent from profile")
                    .max_set(candidates)
                    .expect("candidates within domain");
                let sub = go(profile, agents, left & !(1 << idx), narrowed, memo);
                for (a, s) in acc.iter_mut().zip(&sub) {
                    *a += s * &share;
                }
            }
            acc
        };
        memo.insert((left, candidates), result.clone());
        result
    }

    let probs = go(profile, &agents, (1u64 << n) - 1, AltSet::full(m), &mut memo);
    Ok(Lottery::new(probs).expect("average of lotteries is a lottery"))
}

/// Proportional plurality: agent `i` contributes `1/(n * |top_i|)` to each of
/// their most-preferred alternatives.
pub fn proportional_plurality(profile: &Profile) -> Lottery {
    let m = profile.num_alts();
    let n = profile.num_agents();
    let mut probs = vec![Rational::zero(); m];
    for (_, order) in profile.orders() {
        let top = order.top();
        let share = Rational::new(BigInt::one(), BigInt::from(n * top.len()));
        for a in top.iter() {
            probs[a] += &share;
        }
    }
    Lottery::new(probs).expect("shares sum to one")
}

/// Borda scores for a weak order, symmetric tie handling: an alternative
/// scores one point per alternative strictly below it plus half a point per
/// indifferent other. Returned doubled so the table stays integral.
fn doubled_borda_scores(profile: &Profile) -> Vec<u64> {
    let m = profile.num_alts();
    let mut scores = vec![0u64; m];
    for (_, order) in profile.orders() {
        let mut below = 0usize; // strictly worse than the current class
        for &class in order.classes().iter().rev() {
            let size = class.len();
            for a in class.iter() {
                scores[a] += (2 * below + (size - 1)) as u64;
            }
            below += size;
        }
    }
    scores
}

/// Uniform lottery over the maximal-Borda-score alternatives.
pub fn borda_uniform(profile: &Profile) -> Lottery {
    let scores = doubled_borda_scores(profile);
    let best = *scores.iter().max().expect("at least one alternative");
    let winners =
        AltSet::from_indices((0..profile.num_alts()).filter(|&a| scores[a] == best));
    Lottery::uniform_over(winners, profile.num_alts())
}

/// The Borda winner set itself (handy for abstention experiments).
pub fn borda_winners(profile: &Profile) -> AltSet {
    let scores = doubled_borda_scores(profile);
    let best = *scores.iter().max().expect("at least one alternative");
    AltSet::from_indices((0..profile.num_alts()).filter(|&a| scores[a] == best))
}
