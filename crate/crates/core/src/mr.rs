//! The maximal recursive scheme.
//!
//! At each node the scheme scores alternatives by *generalized plurality*
//! within the current candidate set `S`: `s1(a)` counts the agents whose
//! most-preferred alternatives within `S` include `a`. Each agent `i` then
//! endorses `T(i)`, the top scorers among their own favorites, with weight
//! `1/|T(i)|` each; an alternative's share of the node's mass is proportional
//! to the total endorsement `gamma(a)`. The recursion descends into the
//! inclusion-minimal nonempty intersections of the agents' favorite sets,
//! each child carrying the mass its members received; an alternative's final
//! probability is its share in the deepest node containing it.

use std::collections::BTreeMap;

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::prefs::{cmp_by_members, AgentId, AltSet, Lottery, Profile};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MrError {
    #[error("candidate set must be non-empty")]
    EmptySet,
    #[error("intersection family must be non-empty")]
    EmptyFamily,
}

/// Per-node scoring data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable {
    /// `s1[a]`: number of agents whose favorites within `S` include `a`
    /// (zero outside `S`).
    pub s1: Vec<u32>,
    /// `T(i)`: the agent's favorites that carry the maximal `s1`.
    pub t_sets: BTreeMap<AgentId, AltSet>,
    /// `gamma[a] = Σ_i t(i, a)` where `t(i, a) = 1/|T(i)|` on `T(i)`.
    pub gamma: Vec<Rational>,
}

impl ScoreTable {
    /// The endorsement weight `t(agent, alt)`.
    pub fn t(&self, agent: AgentId, alt: usize) -> Rational {
        match self.t_sets.get(&agent) {
            Some(set) if set.contains(alt) => {
                Rational::new(BigInt::one(), BigInt::from(set.len()))
            }
            _ => Rational::zero(),
        }
    }
}

/// Score the candidate set `s` under the profile.
pub fn generalized_plurality(profile: &Profile, s: AltSet) -> Result<ScoreTable, MrError> {
    if s.is_empty() {
        return Err(MrError::EmptySet);
    }
    let m = profile.num_alts();
    let favorites: Vec<(AgentId, AltSet)> = profile
        .orders()
        .map(|(agent, order)| (agent, order.max_set(s).expect("s within domain")))
        .collect();
    let mut s1 = vec![0u32; m];
    for (_, fav) in &favorites {
        for a in fav.iter() {
            s1[a] += 1;
        }
    }
    let mut t_sets = BTreeMap::new();
    let mut gamma = vec![Rational::zero(); m];
    for (agent, fav) in &favorites {
        let best = fav.iter().map(|a| s1[a]).max().expect("favorites non-empty");
        let t = AltSet::from_indices(fav.iter().filter(|&a| s1[a] == best));
        let share = Rational::new(BigInt::one(), BigInt::from(t.len()));
        for a in t.iter() {
            gamma[a] += &share;
        }
        t_sets.insert(*agent, t);
    }
    debug_assert_eq!(
        gamma.iter().sum::<Rational>(),
        Rational::from_integer(BigInt::from(profile.num_agents())),
        "endorsements sum to n"
    );
    Ok(ScoreTable { s1, t_sets, gamma })
}

/// Inclusion-minimal elements of the set of all nonempty intersections of
/// subfamilies of `sets`.
///
/// Rather than walking all `2^k` subfamilies, observe that for any element
/// `x`, `D(x)` — the intersection of every input set containing `x` — is the
/// smallest intersection containing `x`: each nonempty intersection `I ∋ x`
/// uses only sets containing `x`, so `D(x) ⊆ I`. The minimal intersections
/// are therefore exactly the minimal `D(x)` values. The result is pairwise
/// disjoint: a nonempty overlap of two intersections would itself be a
/// strictly smaller intersection.
pub fn ims(sets: &[AltSet]) -> Result<Vec<AltSet>, MrError> {
    if sets.is_empty() {
        return Err(MrError::EmptyFamily);
    }
    assert!(sets.iter().all(|s| !s.is_empty()), "input sets must be non-empty");
    let union = sets.iter().fold(AltSet::EMPTY, |acc, &s| acc.union(s));
    let mut candidates: Vec<AltSet> = Vec::new();
    for x in union.iter() {
        let d = sets
            .iter()
            .filter(|s| s.contains(x))
            .fold(union, |acc, &s| acc.intersect(s));
        if !candidates.contains(&d) {
            candidates.push(d);
        }
    }
    let mut minimal: Vec<AltSet> = candidates
        .iter()
        .copied()
        .filter(|&d| !candidates.iter().any(|&other| other != d && other.is_subset_of(d)))
        .collect();
    minimal.sort_by(|&a, &b| cmp_by_members(a, b));
    for (i, &a) in minimal.iter().enumerate() {
        for &b in &minimal[i + 1..] {
            assert!(a.intersect(b).is_empty(), "minimal intersections must be disjoint");
        }
    }
    Ok(minimal)
}

/// One node of the recursion tree.
#[derive(Debug, Clone, PartialEq)]
pub struct MrNode {
    pub set: AltSet,
    pub weight: Rational,
    /// This node's division of `weight` among its members. Children overwrite
    /// it on their own sets; members outside every child keep these values.
    pub assignment: BTreeMap<usize, Rational>,
    pub children: Vec<MrNode>,
}

impl MrNode {
    /// Mass this node assigns to `set` (used for child weights).
    fn assigned_mass(&self, set: AltSet) -> Rational {
        set.iter().map(|a| self.assignment.get(&a).expect("member of node set")).sum()
    }

    /// Indented tree rendering; each non-root line shows the members with the
    /// mass they received from the parent, then the node's total weight.
    pub fn render_tree(&self, profile: &Profile) -> String {
        let mut out = format!("{} @ {}\n", profile.render_set(self.set), self.weight);
        self.render_children(profile, "", &mut out);
        out
    }

    fn render_children(&self, profile: &Profile, indent: &str, out: &mut String) {
        let count = self.children.len();
        for (i, child) in self.children.iter().enumerate() {
            let last = i + 1 == count;
            let branch = if last { "└─ " } else { "├─ " };
            let members: Vec<String> = child
                .set
                .iter()
                .map(|a| format!("{} ({})", profile.alt_name(a), self.assignment[&a]))
                .collect();
            out.push_str(&format!(
                "{indent}{branch}{{{}}} @ {}\n",
                members.join(", "),
                child.weight
            ));
            let next_indent = format!("{indent}{}", if last { "   " } else { "│  " });
            child.render_children(profile, &next_indent, out);
        }
    }
}

/// Run the scheme: the final lottery plus the full recursion tree.
pub fn mr(profile: &Profile) -> (Lottery, MrNode) {
    let m = profile.num_alts();
    let mut probs = vec![Rational::zero(); m];
    let root = build_node(profile, profile.full_set(), Rational::one(), &mut probs);
    let lottery = Lottery::new(probs).expect("node masses sum to the root weight 1");
    (lottery, root)
}

fn build_node(profile: &Profile, s: AltSet, weight: Rational, out: &mut [Rational]) -> MrNode {
    let favorites: Vec<AltSet> = profile
        .orders()
        .map(|(_, order)| order.max_set(s).expect("s within domain"))
        .collect();

    if favorites.iter().all(|&f| f == s) {
        // Base case: everyone is indifferent across all of S.
        let share = &weight / Rational::from_integer(BigInt::from(s.len()));
        let mut assignment = BTreeMap::new();
        for a in s.iter() {
            out[a] = share.clone();
            assignment.insert(a, share.clone());
        }
        return MrNode { set: s, weight, assignment, children: Vec::new() };
    }

    let table = generalized_plurality(profile, s).expect("s non-empty");
    let n = Rational::from_integer(BigInt::from(profile.num_agents()));
    let mut assignment = BTreeMap::new();
    for a in s.iter() {
        let mass = &weight * &table.gamma[a] / &n;
        out[a] = mass.clone();
        assignment.insert(a, mass);
    }
    debug_assert_eq!(
        assignment.values().sum::<Rational>(),
        weight,
        "node assignment conserves mass"
    );

    let children_sets = ims(&favorites).expect("favorite family non-empty");
    let node = MrNode { set: s, weight, assignment, children: Vec::new() };
    let mut children = Vec::with_capacity(children_sets.len());
    for child_set in children_sets {
        assert!(
            child_set.is_subset_of(s) && child_set != s,
            "children are strict subsets of a non-leaf node"
        );
        let child_weight = node.assigned_mass(child_set);
        children.push(build_node(profile, child_set, child_weight, out));
    }
    MrNode { children, ..node }
}
