//! Lifting a weak order over alternatives to a (partial) order over lotteries.
//!
//! Two liftings are provided. *Stochastic dominance* (SD): `p` is weakly
//! preferred to `q` when, for every alternative `y`, `p` puts at least as much
//! probability on the upper contour set `{x : x ≽ y}` as `q` does; since the
//! upper contour sets of a weak order are exactly the prefixes of its
//! indifference classes, it suffices to compare cumulative class masses. SD is
//! partial — two lotteries can be incomparable. *Downward lexicographic* (DL):
//! walk the indifference classes from best to worst and let the first class
//! whose masses differ decide. DL is complete and refines SD.

use std::fmt;

use num::{One, Zero};
use thiserror::Error;

use crate::prefs::{Lottery, PrefsError, WeakOrder};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("lottery has {got} probabilities but the order covers {want} alternatives")]
    DomainMismatch { got: usize, want: usize },
    #[error(transparent)]
    Prefs(#[from] PrefsError),
}

/// How an agent ranks lottery `p` against lottery `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonResult {
    /// `p` strictly better than `q`.
    StrictlyPrefers,
    Indifferent,
    /// `p` strictly worse than `q`.
    StrictlyDispreferred,
    /// Neither dominates (possible under SD only).
    Incomparable,
}

impl ComparisonResult {
    /// `p` at least as good as `q`.
    pub fn weakly_prefers(self) -> bool {
        matches!(self, ComparisonResult::StrictlyPrefers | ComparisonResult::Indifferent)
    }

    fn flip(self) -> ComparisonResult {
        match self {
            ComparisonResult::StrictlyPrefers => ComparisonResult::StrictlyDispreferred,
            ComparisonResult::StrictlyDispreferred => ComparisonResult::StrictlyPrefers,
            other => other,
        }
    }
}

impl fmt::Display for ComparisonResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComparisonResult::StrictlyPrefers => "strictly-prefers",
            ComparisonResult::Indifferent => "indifferent",
            ComparisonResult::StrictlyDispreferred => "strictly-dispreferred",
            ComparisonResult::Incomparable => "incomparable",
        })
    }
}

/// Which lifting to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extension {
    Sd,
    Dl,
}

impl Extension {
    pub fn compare(
        self,
        order: &WeakOrder,
        p: &Lottery,
        q: &Lottery,
    ) -> Result<ComparisonResult, ExtensionError> {
        match self {
            Extension::Sd => sd_compare(order, p, q),
            Extension::Dl => dl_compare(order, p, q),
        }
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Extension::Sd => "sd",
            Extension::Dl => "dl",
        })
    }
}

impl std::str::FromStr for Extension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sd" => Ok(Extension::Sd),
            "dl" => Ok(Extension::Dl),
            other => Err(format!("unknown extension {other:?} (expected sd or dl)")),
        }
    }
}

fn check_domains(order: &WeakOrder, p: &Lottery, q: &Lottery) -> Result<(), ExtensionError> {
    for lot in [p, q] {
        if lot.num_alts() != order.num_alts() {
            return Err(ExtensionError::DomainMismatch {
                got: lot.num_alts(),
                want: order.num_alts(),
            });
        }
    }
    Ok(())
}

/// Stochastic-dominance comparison of `p` against `q` under `order`.
pub fn sd_compare(
    order: &WeakOrder,
    p: &Lottery,
    q: &Lottery,
) -> Result<ComparisonResult, ExtensionError> {
    check_domains(order, p, q)?;
    let mut cum_p = Rational::zero();
    let mut cum_q = Rational::zero();
    let mut p_ahead = false;
    let mut q_ahead = false;
    for &class in order.classes() {
        cum_p += p.mass(class)?;
        cum_q += q.mass(class)?;
        match cum_p.cmp(&cum_q) {
            std::cmp::Ordering::Greater => p_ahead = true,
            std::cmp::Ordering::Less => q_ahead = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(match (p_ahead, q_ahead) {
        (false, false) => ComparisonResult::Indifferent,
        (true, false) => ComparisonResult::StrictlyPrefers,
        (false, true) => ComparisonResult::StrictlyDispreferred,
        (true, true) => ComparisonResult::Incomparable,
    })
}

/// Downward-lexicographic comparison of `p` against `q` under `order`: the
/// best class with different masses decides. Never returns `Incomparable`.
pub fn dl_compare(
    order: &WeakOrder,
    p: &Lottery,
    q: &Lottery,
) -> Result<ComparisonResult, ExtensionError> {
    check_domains(order, p, q)?;
    for &class in order.classes() {
        let mp = p.mass(class)?;
        let mq = q.mass(class)?;
        match mp.cmp(&mq) {
            std::cmp::Ordering::Greater => return Ok(ComparisonResult::StrictlyPrefers),
            std::cmp::Ordering::Less => return Ok(ComparisonResult::StrictlyDispreferred),
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(ComparisonResult::Indifferent)
}

/// A lottery strictly preferred to `q` under `order`, when one exists.
///
/// One exists iff `q` puts mass below the top indifference class; the witness
/// keeps `q`'s top-class probabilities and moves all remaining mass onto the
/// smallest-index top-class member. That lottery strictly dominates `q` under
/// SD (every cumulative prefix is 1 from the top class on), hence also under
/// DL, so the same witness certifies improvability for both liftings.
pub fn strict_improvement(order: &WeakOrder, q: &Lottery) -> Result<Option<Lottery>, ExtensionError> {
    if q.num_alts() != order.num_alts() {
        return Err(ExtensionError::DomainMismatch { got: q.num_alts(), want: order.num_alts() });
    }
    let top = order.top();
    let top_mass = q.mass(top)?;
    if top_mass.is_one() {
        return Ok(None);
    }
    let target = top.min().expect("classes are non-empty");
    let mut probs = vec![Rational::zero(); q.num_alts()];
    for i in top.iter() {
        probs[i] = q.prob(i).clone();
    }
    probs[target] += Rational::one() - top_mass;
    let witness = Lottery::new(probs).expect("witness is a valid lottery");
    debug_assert_eq!(sd_compare(order, &witness, q), Ok(ComparisonResult::StrictlyPrefers));
    Ok(Some(witness))
}

/// Antisymmetry helper used by property tests: comparing `q` against `p` must
/// mirror comparing `p` against `q`.
pub fn flipped(result: ComparisonResult) -> ComparisonResult {
    result.flip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefs::Profile;
    use crate::rat;

    fn order_of(text: &str, agent: u32) -> (Profile, WeakOrder) {
        let p = Profile::parse(text).unwrap();
        let order = p.order(crate::prefs::AgentId::new(agent).unwrap()).unwrap().clone();
        (p, order)
    }

    #[test]
    fn sd_detects_incomparability() {
        // Order b > c > d > a; p = 1/3 b + 1/3 c + 1/3 d vs q = 1/2 b + 1/2 a.
        // Cumulative masses: p (1/3, 2/3, 1, 1) vs q (1/2, 1/2, 1/2, 1).
        let (profile, order) = order_of("1: b, c, d, a\n", 1);
        let p = Lottery::parse("b: 1/3, c: 1/3, d: 1/3", &profile).unwrap();
        let q = Lottery::parse("b: 1/2, a: 1/2", &profile).unwrap();
        assert_eq!(sd_compare(&order, &p, &q).unwrap(), ComparisonResult::Incomparable);
        assert_eq!(sd_compare(&order, &q, &p).unwrap(), ComparisonResult::Incomparable);
        // DL is complete: the top class already decides for q.
        assert_eq!(dl_compare(&order, &q, &p).unwrap(), ComparisonResult::StrictlyPrefers);
        assert_eq!(dl_compare(&order, &p, &q).unwrap(), ComparisonResult::StrictlyDispreferred);
    }

    #[test]
    fn sd_strict_and_indifferent() {
        let (profile, order) = order_of("1: a, b, c\n", 1);
        let better = Lottery::parse("a: 1/2, b: 1/2", &profile).unwrap();
        let worse = Lottery::parse("a: 1/2, c: 1/2", &profile).unwrap();
        assert_eq!(sd_compare(&order, &better, &worse).unwrap(), ComparisonResult::StrictlyPrefers);
        assert_eq!(
            sd_compare(&order, &worse, &better).unwrap(),
            ComparisonResult::StrictlyDispreferred
        );
        assert_eq!(sd_compare(&order, &better, &better).unwrap(), ComparisonResult::Indifferent);
    }

    #[test]
    fn indifference_classes_pool_mass() {
        // a ~ b on top: moving mass between a and b changes nothing.
        let (profile, order) = order_of("1: {a,b}, c\n", 1);
        let p = Lottery::parse("a: 1", &profile).unwrap();
        let q = Lottery::parse("b: 1", &profile).unwrap();
        assert_eq!(sd_compare(&order, &p, &q).unwrap(), ComparisonResult::Indifferent);
        assert_eq!(dl_compare(&order, &p, &q).unwrap(), ComparisonResult::Indifferent);
    }

    #[test]
    fn improvement_exists_iff_top_mass_below_one() {
        let (profile, order) = order_of("1: {a,b}, c\n", 1);
        let at_top = Lottery::parse("a: 1/3, b: 2/3", &profile).unwrap();
        assert_eq!(strict_improvement(&order, &at_top).unwrap(), None);
        let q = Lottery::parse("b: 1/3, c: 2/3", &profile).unwrap();
        let witness = strict_improvement(&order, &q).unwrap().expect("improvable");
        // Keeps b's 1/3, moves the rest onto a (smallest top-class member).
        assert_eq!(witness.prob(0), &rat(2, 3));
        assert_eq!(witness.prob(1), &rat(1, 3));
        assert_eq!(sd_compare(&order, &witness, &q).unwrap(), ComparisonResult::StrictlyPrefers);
        assert_eq!(dl_compare(&order, &witness, &q).unwrap(), ComparisonResult::StrictlyPrefers);
    }

    #[test]
    fn domain_mismatch_is_an_error() {
        let (_, order) = order_of("1: a, b, c\n", 1);
        let two = Profile::parse("1: a, b\n").unwrap();
        let p = Lottery::parse("a: 1", &two).unwrap();
        assert!(matches!(
            sd_compare(&order, &p, &p),
            Err(ExtensionError::DomainMismatch { got: 2, want: 3 })
        ));
    }
}
