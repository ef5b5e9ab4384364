//! Exact-arithmetic toolkit for randomized social choice.
//!
//! A *social decision scheme* maps a profile of weak preference orders to a
//! lottery over alternatives. This crate implements several such schemes
//! (constant, serial dictatorship, random serial dictatorship, proportional
//! plurality, uniform-over-Borda-winners, a maximal recursive scheme, and an
//! egalitarian simultaneous-reservation scheme), the stochastic-dominance and
//! downward-lexicographic lottery comparators, efficiency verifiers, an
//! auditor for participation and strategyproofness properties, and a
//! brute-force counterexample search over small preference domains.
//!
//! All probabilities are `BigRational`; there is no floating point anywhere in
//! a decision path, so every answer is exact and reproducible.

pub mod audit;
pub mod cli;
pub mod efficiency;
pub mod esr;
pub mod extensions;
pub mod fixtures;
pub mod lp;
pub mod mr;
pub mod prefs;
pub mod rules;
pub mod search;

pub use num::BigRational as Rational;

use num::BigInt;

/// Shorthand rational constructor, mostly for tests and fixtures.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Resource limits for the potentially explosive operations.
///
/// Everything else in the crate is polynomial in the profile size; random
/// serial dictatorship is factorial in the number of agents and misreport
/// enumeration is super-exponential in the number of alternatives, so both are
/// fenced by explicit budgets rather than left to run away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets {
    /// Maximum number of agents for random serial dictatorship.
    pub rsd_max_agents: usize,
    /// Maximum number of alternatives for weak-order enumeration (misreports,
    /// search domains).
    pub enum_max_alts: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { rsd_max_agents: 10, enum_max_alts: 5 }
    }
}

impl Budgets {
    /// Environment variable overriding [`Budgets::rsd_max_agents`].
    pub const RSD_ENV: &'static str = "SDS_RSD_MAX_AGENTS";
    /// Environment variable overriding [`Budgets::enum_max_alts`].
    pub const ENUM_ENV: &'static str = "SDS_MAX_ENUM_ALTS";

    /// Default budgets, overridden by `SDS_RSD_MAX_AGENTS` /
    /// `SDS_MAX_ENUM_ALTS` when those are set to valid numbers.
    pub fn from_env() -> Self {
        let mut budgets = Budgets::default();
        if let Some(n) = read_env_usize(Self::RSD_ENV) {
            budgets.rsd_max_agents = n;
        }
        if let Some(n) = read_env_usize(Self::ENUM_ENV) {
            budgets.enum_max_alts = n;
        }
        budgets
    }
}

fn read_env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok()?.trim().parse().ok()
}
