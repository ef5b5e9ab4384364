//! Preference profiles, weak orders, and lotteries.
//!
//! Alternatives are stored once per profile in a sorted name table and
//! everything downstream works with indices into that table; sets of
//! alternatives are a `u64` bitmask, which caps a profile at 64 alternatives
//! (plenty for a desk-scale exact tool and it keeps set algebra branch-free).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use crate::Rational;

/// Hard cap on the number of alternatives, imposed by the bitmask set.
pub const MAX_ALTERNATIVES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrefsError {
    #[error("alternative id {0:?} is invalid (want non-empty [a-z0-9_]+)")]
    BadAlternativeId(String),
    #[error("agent ids start at 1")]
    BadAgentId,
    #[error("a profile needs at least one alternative")]
    NoAlternatives,
    #[error("at most {MAX_ALTERNATIVES} alternatives are supported, got {0}")]
    TooManyAlternatives(usize),
    #[error("a profile needs at least one agent")]
    NoAgents,
    #[error("duplicate alternative {0:?}")]
    DuplicateAlternative(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("agent {0} already present")]
    DuplicateAgent(AgentId),
    #[error("removing agent {0} would leave no agents")]
    LastAgent(AgentId),
    #[error("indifference classes must be non-empty")]
    EmptyClass,
    #[error("indifference classes must not overlap")]
    OverlappingClasses,
    #[error("order covers {covered} of {expected} alternatives")]
    IncompleteOrder { covered: usize, expected: usize },
    #[error("restriction set is empty")]
    EmptyRestriction,
    #[error("alternative index {index} is outside a domain of size {size}")]
    OutOfDomain { index: usize, size: usize },
    #[error("domain sizes differ: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("probabilities must be non-negative, got {0} for {1:?}")]
    NegativeProbability(String, String),
    #[error("probabilities sum to {0}, expected 1")]
    BadProbabilitySum(String),
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

/// A named alternative. Ids are non-empty strings over `[a-z0-9_]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alternative(String);

impl Alternative {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Alternative {
    type Err = PrefsError;

    fn from_str(s: &str) -> Result<Self, PrefsError> {
        let valid = !s.is_empty()
            && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if valid {
            Ok(Alternative(s.to_string()))
        } else {
            Err(PrefsError::BadAlternativeId(s.to_string()))
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Agent identifier; positive and unique within a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(u32);

impl AgentId {
    pub fn new(id: u32) -> Result<Self, PrefsError> {
        if id == 0 {
            Err(PrefsError::BadAgentId)
        } else {
            Ok(AgentId(id))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Set of alternative indices as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AltSet(u64);

impl AltSet {
    pub const EMPTY: AltSet = AltSet(0);

    /// `{0, 1, .., m-1}`.
    pub fn full(m: usize) -> AltSet {
        assert!(m <= MAX_ALTERNATIVES);
        if m == MAX_ALTERNATIVES {
            AltSet(u64::MAX)
        } else {
            AltSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(index: usize) -> AltSet {
        assert!(index < MAX_ALTERNATIVES);
        AltSet(1u64 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> AltSet {
        let mut set = AltSet::EMPTY;
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Raw bitmask; bit `i` is set iff index `i` is a member.
    pub fn bits(self) -> u64 {
        self.0
    }

    /// Set with exactly the given bits.
    pub fn from_bits(bits: u64) -> AltSet {
        AltSet(bits)
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < MAX_ALTERNATIVES);
        self.0 |= 1u64 << index;
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_ALTERNATIVES && self.0 & (1u64 << index) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: AltSet) -> AltSet {
        AltSet(self.0 | other.0)
    }

    pub fn intersect(self, other: AltSet) -> AltSet {
        AltSet(self.0 & other.0)
    }

    pub fn minus(self, other: AltSet) -> AltSet {
        AltSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: AltSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest member, if any.
    pub fn min(self) -> Option<usize> {
        if self.is_empty() {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// Members in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

/// Compare two sets as their ascending member sequences. For sibling sets in a
/// recursion tree (always disjoint) this is the same as ordering by smallest
/// member, i.e. the order their renderings would sort in.
pub fn cmp_by_members(a: AltSet, b: AltSet) -> std::cmp::Ordering {
    a.iter().cmp(b.iter())
}

/// A weak order: indifference classes from best to worst, partitioning
/// `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeakOrder {
    classes: Vec<AltSet>,
    num_alts: usize,
}

impl WeakOrder {
    pub fn new(classes: Vec<AltSet>, num_alts: usize) -> Result<Self, PrefsError> {
        let mut seen = AltSet::EMPTY;
        for &class in &classes {
            if class.is_empty() {
                return Err(PrefsError::EmptyClass);
            }
            if !seen.intersect(class).is_empty() {
                return Err(PrefsError::OverlappingClasses);
            }
            seen = seen.union(class);
        }
        if seen != AltSet::full(num_alts) {
            return Err(PrefsError::IncompleteOrder { covered: seen.len(), expected: num_alts });
        }
        Ok(WeakOrder { classes, num_alts })
    }

    /// Best-to-worst indifference classes.
    pub fn classes(&self) -> &[AltSet] {
        &self.classes
    }

    pub fn num_alts(&self) -> usize {
        self.num_alts
    }

    /// Most-preferred class.
    pub fn top(&self) -> AltSet {
        self.classes[0]
    }

    /// Index of the class containing `alt` (0 = best).
    pub fn class_of(&self, alt: usize) -> Result<usize, PrefsError> {
        if alt >= self.num_alts {
            return Err(PrefsError::OutOfDomain { index: alt, size: self.num_alts });
        }
        Ok(self.classes.iter().position(|c| c.contains(alt)).expect("partition covers domain"))
    }

    /// `true` when every alternative of `a` is weakly preferred to every
    /// alternative of `b` under this order.
    pub fn weakly_prefers(&self, a: usize, b: usize) -> Result<bool, PrefsError> {
        Ok(self.class_of(a)? <= self.class_of(b)?)
    }

    /// Most-preferred alternatives within `within`: the intersection of
    /// `within` with the best class that meets it.
    pub fn max_set(&self, within: AltSet) -> Result<AltSet, PrefsError> {
        self.check_domain(within)?;
        for &class in &self.classes {
            let hit = class.intersect(within);
            if !hit.is_empty() {
                return Ok(hit);
            }
        }
        Err(PrefsError::EmptyRestriction)
    }

    /// The order restricted to `within`, dropping classes that become empty.
    /// The result is an order over the *same* index space; only membership
    /// shrinks. Use [`WeakOrder::classes`] of the result for class structure.
    pub fn restrict(&self, within: AltSet) -> Result<Vec<AltSet>, PrefsError> {
        self.check_domain(within)?;
        if within.is_empty() {
            return Err(PrefsError::EmptyRestriction);
        }
        Ok(self
            .classes
            .iter()
            .filter_map(|&c| {
                let hit = c.intersect(within);
                if hit.is_empty() {
                    None
                } else {
                    Some(hit)
                }
            })
            .collect())
    }

    fn check_domain(&self, set: AltSet) -> Result<(), PrefsError> {
        if set.is_subset_of(AltSet::full(self.num_alts)) {
            Ok(())
        } else {
            Err(PrefsError::OutOfDomain {
                index: set.iter().find(|&i| i >= self.num_alts).unwrap_or(self.num_alts),
                size: self.num_alts,
            })
        }
    }
}

/// A preference profile: a sorted alternative table plus one weak order per
/// agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    alternatives: Vec<Alternative>,
    orders: BTreeMap<AgentId, WeakOrder>,
}

impl Profile {
    pub fn new(
        alternatives: Vec<Alternative>,
        orders: BTreeMap<AgentId, WeakOrder>,
    ) -> Result<Self, PrefsError> {
        if alternatives.is_empty() {
            return Err(PrefsError::NoAlternatives);
        }
        if alternatives.len() > MAX_ALTERNATIVES {
            return Err(PrefsError::TooManyAlternatives(alternatives.len()));
        }
        let mut sorted = alternatives;
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(PrefsError::DuplicateAlternative(w[0].as_str().to_string()));
        }
        if orders.is_empty() {
            return Err(PrefsError::NoAgents);
        }
        let m = sorted.len();
        for order in orders.values() {
            if order.num_alts() != m {
                return Err(PrefsError::DomainMismatch { left: order.num_alts(), right: m });
            }
        }
        Ok(Profile { alternatives: sorted, orders })
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn num_alts(&self) -> usize {
        self.alternatives.len()
    }

    /// All alternatives as a set.
    pub fn full_set(&self) -> AltSet {
        AltSet::full(self.num_alts())
    }

    pub fn alt_name(&self, index: usize) -> &str {
        self.alternatives[index].as_str()
    }

    pub fn alt_index(&self, name: &str) -> Option<usize> {
        self.alternatives.binary_search_by(|a| a.as_str().cmp(name)).ok()
    }

    pub fn num_agents(&self) -> usize {
        self.orders.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.orders.keys().copied()
    }

    pub fn order(&self, agent: AgentId) -> Result<&WeakOrder, PrefsError> {
        self.orders.get(&agent).ok_or(PrefsError::UnknownAgent(agent))
    }

    pub fn orders(&self) -> impl Iterator<Item = (AgentId, &WeakOrder)> {
        self.orders.iter().map(|(&a, o)| (a, o))
    }

    /// The profile with `agent` removed. The alternative table is unchanged,
    /// so lotteries stay comparable across the two profiles.
    pub fn remove_agent(&self, agent: AgentId) -> Result<Profile, PrefsError> {
        if !self.orders.contains_key(&agent) {
            return Err(PrefsError::UnknownAgent(agent));
        }
        if self.orders.len() == 1 {
            return Err(PrefsError::LastAgent(agent));
        }
        let mut orders = self.orders.clone();
        orders.remove(&agent);
        Ok(Profile { alternatives: self.alternatives.clone(), orders })
    }

    /// The profile with `agent`'s order replaced (for misreports).
    pub fn with_order(&self, agent: AgentId, order: WeakOrder) -> Result<Profile, PrefsError> {
        if !self.orders.contains_key(&agent) {
            return Err(PrefsError::UnknownAgent(agent));
        }
        if order.num_alts() != self.num_alts() {
            return Err(PrefsError::DomainMismatch {
                left: order.num_alts(),
                right: self.num_alts(),
            });
        }
        let mut orders = self.orders.clone();
        orders.insert(agent, order);
        Ok(Profile { alternatives: self.alternatives.clone(), orders })
    }

    /// Render a set as `{a,b}` (braces regardless of size).
    pub fn render_set(&self, set: AltSet) -> String {
        let names: Vec<&str> = set.iter().map(|i| self.alt_name(i)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Render a weak order over this profile's alternatives as a class list,
    /// e.g. `{a,b}, c` — the body of a profile line without the agent prefix.
    pub fn render_order(&self, order: &WeakOrder) -> String {
        assert_eq!(order.num_alts(), self.num_alts(), "order/profile domain mismatch");
        let classes: Vec<String> =
            order.classes().iter().map(|&c| self.render_class(c)).collect();
        classes.join(", ")
    }

    fn render_class(&self, class: AltSet) -> String {
        if class.len() == 1 {
            self.alt_name(class.min().unwrap()).to_string()
        } else {
            self.render_set(class)
        }
    }

    /// Canonical text form; [`Profile::parse`] of the result is the identity.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.alternatives.iter().map(|a| a.as_str()).collect();
        out.push_str("alternatives: ");
        out.push_str(&names.join(", "));
        out.push('\n');
        for (agent, order) in &self.orders {
            out.push_str(&format!("{}: {}\n", agent, self.render_order(order)));
        }
        out
    }

    /// Parse the line-oriented profile format:
    ///
    /// ```text
    /// # optional comment
    /// alternatives: a, b, c      # optional header fixing the domain
    /// 1: {a,b}, c                # agent 1: a ~ b, both above c
    /// 2: c, b, a
    /// ```
    ///
    /// Braces group an indifference class; a bare name is a singleton class.
    /// Without a header the domain is the union of all mentioned names.
    /// Whitespace is insignificant, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Profile, ParseError> {
        parse_profile(text)
    }
}

/// A probability distribution over a profile's alternatives, indexed like the
/// alternative table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lottery {
    probs: Vec<Rational>,
}

impl Lottery {
    pub fn new(probs: Vec<Rational>) -> Result<Self, PrefsError> {
        if probs.is_empty() {
            return Err(PrefsError::NoAlternatives);
        }
        for (i, p) in probs.iter().enumerate() {
            if p.is_negative() {
                return Err(PrefsError::NegativeProbability(p.to_string(), format!("#{i}")));
            }
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(PrefsError::BadProbabilitySum(sum.to_string()));
        }
        Ok(Lottery { probs })
    }

    /// Degenerate lottery on one alternative.
    pub fn point(alt: usize, m: usize) -> Lottery {
        assert!(alt < m);
        let mut probs = vec![Rational::zero(); m];
        probs[alt] = Rational::one();
        Lottery { probs }
    }

    /// Uniform lottery over a non-empty set.
    pub fn uniform_over(set: AltSet, m: usize) -> Lottery {
        assert!(!set.is_empty() && set.is_subset_of(AltSet::full(m)));
        let share = Rational::new(BigInt::one(), BigInt::from(set.len()));
        let mut probs = vec![Rational::zero(); m];
        for i in set.iter() {
            probs[i] = share.clone();
        }
        Lottery { probs }
    }

    pub fn num_alts(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, alt: usize) -> &Rational {
        &self.probs[alt]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// Total probability of a set of alternatives.
    pub fn mass(&self, set: AltSet) -> Result<Rational, PrefsError> {
        if !set.is_subset_of(AltSet::full(self.probs.len())) {
            return Err(PrefsError::OutOfDomain {
                index: set.iter().find(|&i| i >= self.probs.len()).unwrap_or(self.probs.len()),
                size: self.probs.len(),
            });
        }
        Ok(set.iter().map(|i| &self.probs[i]).sum())
    }

    /// Alternatives with positive probability.
    pub fn support(&self) -> AltSet {
        AltSet::from_indices(
            self.probs.iter().enumerate().filter(|(_, p)| p.is_positive()).map(|(i, _)| i),
        )
    }

    /// `a: 5/18, b: 0, c: 8/18` — every alternative, table order, exact.
    pub fn render_rational(&self, profile: &Profile) -> String {
        self.render_with(profile, |p| p.to_string())
    }

    /// Same layout with six decimal digits, ties rounded to even.
    pub fn render_decimal(&self, profile: &Profile) -> String {
        self.render_with(profile, render_decimal_6)
    }

    fn render_with(&self, profile: &Profile, f: impl Fn(&Rational) -> String) -> String {
        assert_eq!(profile.num_alts(), self.probs.len(), "lottery/profile domain mismatch");
        let parts: Vec<String> = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{}: {}", profile.alt_name(i), f(p)))
            .collect();
        parts.join(", ")
    }

    pub fn to_json(&self, profile: &Profile) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (i, p) in self.probs.iter().enumerate() {
            map.insert(
                profile.alt_name(i).to_string(),
                serde_json::Value::String(p.to_string()),
            );
        }
        serde_json::Value::Object(map)
    }

    /// Parse a lottery literal like `a: 1/2, b: 1/2` against a profile's
    /// alternative table. Omitted alternatives get probability zero.
    pub fn parse(text: &str, profile: &Profile) -> Result<Lottery, ParseError> {
        parse_lottery(text, profile)
    }
}

/// Six-fractional-digit decimal rendering with round-half-to-even, computed
/// exactly on the rational (no float detour).
pub fn render_decimal_6(value: &Rational) -> String {
    let scaled = value * Rational::from_integer(BigInt::from(1_000_000));
    let num = scaled.numer().clone();
    let den = scaled.denom().clone();
    // Round num/den to the nearest integer, ties to even. Values here are
    // non-negative in practice, but keep the sign logic correct anyway.
    let (floor, rem) = num.div_mod_floor(&den);
    let twice = &rem * BigInt::from(2);
    let rounded = match twice.cmp(&den) {
        std::cmp::Ordering::Less => floor,
        std::cmp::Ordering::Greater => floor + 1,
        std::cmp::Ordering::Equal => {
            if (&floor % BigInt::from(2)).is_zero() {
                floor
            } else {
                floor + 1
            }
        }
    };
    let negative = rounded.is_negative();
    let abs = rounded.abs();
    let million = BigInt::from(1_000_000);
    let int_part = &abs / &million;
    let frac_part = &abs % &million;
    format!("{}{}.{:06}", if negative { "-" } else { "" }, int_part, frac_part)
}

use num::Integer;

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct LineScanner {
    chars: Vec<char>,
    pos: usize,
    line_no: usize,
}

impl LineScanner {
    fn new(text: &str, line_no: usize) -> Self {
        LineScanner { chars: text.chars().collect(), pos: 0, line_no }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line_no, self.col(), message)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected '{want}', found '{c}'"))),
            None => Err(self.err(format!("expected '{want}', found end of line"))),
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `[a-z0-9_]+` with its starting column.
    fn alt_token(&mut self) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let start = self.col();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            Err(ParseError::new(
                self.line_no,
                start,
                match self.peek() {
                    Some(c) => format!("expected alternative id, found '{c}'"),
                    None => "expected alternative id, found end of line".to_string(),
                },
            ))
        } else {
            Ok((s, start))
        }
    }

    /// `[1-9][0-9]*`.
    fn agent_token(&mut self) -> Result<(u32, usize), ParseError> {
        self.skip_ws();
        let start = self.col();
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        if digits.is_empty() {
            return Err(ParseError::new(
                self.line_no,
                start,
                match self.peek() {
                    Some(c) => format!("expected agent id, found '{c}'"),
                    None => "expected agent id".to_string(),
                },
            ));
        }
        if digits.starts_with('0') {
            return Err(ParseError::new(self.line_no, start, "agent ids start at 1, without leading zeros"));
        }
        let id: u32 = digits
            .parse()
            .map_err(|_| ParseError::new(self.line_no, start, "agent id out of range"))?;
        Ok((id, start))
    }
}

enum Line {
    Header(Vec<(String, usize)>),
    Order { agent: u32, agent_col: usize, classes: Vec<Vec<(String, usize)>> },
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_line(text: &str, line_no: usize) -> Result<Option<Line>, ParseError> {
    let mut sc = LineScanner::new(text, line_no);
    if sc.at_end() {
        return Ok(None);
    }
    // Header? Agent lines start with a digit, so an identifier start means a
    // header keyword (or garbage).
    sc.skip_ws();
    if matches!(sc.peek(), Some(c) if c.is_ascii_lowercase() || c == '_') {
        let kw_col = sc.col();
        let (word, _) = sc.alt_token()?;
        if word != "alternatives" {
            return Err(ParseError::new(
                line_no,
                kw_col,
                format!("expected agent id or 'alternatives:' header, found {word:?}"),
            ));
        }
        sc.expect(':')?;
        let mut names = Vec::new();
        loop {
            names.push(sc.alt_token()?);
            if !sc.eat(',') {
                break;
            }
        }
        if !sc.at_end() {
            return Err(sc.err(format!("unexpected '{}'", sc.peek().unwrap())));
        }
        return Ok(Some(Line::Header(names)));
    }
    let (agent, agent_col) = sc.agent_token()?;
    sc.expect(':')?;
    let mut classes = Vec::new();
    loop {
        if sc.eat('{') {
            let mut members = Vec::new();
            loop {
                members.push(sc.alt_token()?);
                if !sc.eat(',') {
                    break;
                }
            }
            sc.expect('}')?;
            classes.push(members);
        } else {
            classes.push(vec![sc.alt_token()?]);
        }
        if !sc.eat(',') {
            break;
        }
    }
    if !sc.at_end() {
        return Err(sc.err(format!("unexpected '{}'", sc.peek().unwrap())));
    }
    Ok(Some(Line::Order { agent, agent_col, classes }))
}

/// An order line waiting for alternative-name resolution:
/// (agent id, column of the agent id, line number, indifference classes of (name, column)).
type PendingOrderLine = (u32, usize, usize, Vec<Vec<(String, usize)>>);

fn parse_profile(text: &str) -> Result<Profile, ParseError> {
    let mut header: Option<(Vec<(String, usize)>, usize)> = None;
    let mut order_lines: Vec<PendingOrderLine> = Vec::new();
    let mut saw_significant = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let parsed = parse_line(strip_comment(raw), line_no)?;
        match parsed {
            None => {}
            Some(Line::Header(names)) => {
                if saw_significant {
                    return Err(ParseError::new(
                        line_no,
                        1,
                        "'alternatives:' header must be the first non-comment line",
                    ));
                }
                saw_significant = true;
                header = Some((names, line_no));
            }
            Some(Line::Order { agent, agent_col, classes }) => {
                saw_significant = true;
                order_lines.push((agent, agent_col, line_no, classes));
            }
        }
    }

    if order_lines.is_empty() {
        return Err(ParseError::new(1, 1, "profile has no agent lines"));
    }

    // Fix the alternative table.
    let mut names: Vec<String> = Vec::new();
    if let Some((header_names, line_no)) = &header {
        for (name, col) in header_names {
            if names.contains(name) {
                return Err(ParseError::new(
                    *line_no,
                    *col,
                    format!("duplicate alternative {name:?} in header"),
                ));
            }
            names.push(name.clone());
        }
    } else {
        for (_, _, _, classes) in &order_lines {
            for class in classes {
                for (name, _) in class {
                    if !names.contains(name) {
                        names.push(name.clone());
                    }
                }
            }
        }
    }
    names.sort();
    let m = names.len();
    if m > MAX_ALTERNATIVES {
        return Err(ParseError::new(
            1,
            1,
            format!("at most {MAX_ALTERNATIVES} alternatives are supported, got {m}"),
        ));
    }
    let index_of = |name: &str| names.binary_search_by(|n| n.as_str().cmp(name)).ok();

    let mut orders: BTreeMap<AgentId, WeakOrder> = BTreeMap::new();
    for (agent_no, agent_col, line_no, classes) in &order_lines {
        let agent = AgentId::new(*agent_no)
            .map_err(|e| ParseError::new(*line_no, *agent_col, e.to_string()))?;
        if orders.contains_key(&agent) {
            return Err(ParseError::new(
                *line_no,
                *agent_col,
                format!("duplicate agent id {agent}"),
            ));
        }
        let mut seen = AltSet::EMPTY;
        let mut class_sets = Vec::new();
        for class in classes {
            let mut set = AltSet::EMPTY;
            for (name, col) in class {
                let index = index_of(name).ok_or_else(|| {
                    ParseError::new(
                        *line_no,
                        *col,
                        format!("alternative {name:?} is not in the header"),
                    )
                })?;
                if seen.contains(index) || set.contains(index) {
                    return Err(ParseError::new(
                        *line_no,
                        *col,
                        format!("duplicate alternative {name:?} in order for agent {agent}"),
                    ));
                }
                set.insert(index);
            }
            seen = seen.union(set);
            class_sets.push(set);
        }
        if seen != AltSet::full(m) {
            let missing: Vec<&str> = AltSet::full(m)
                .minus(seen)
                .iter()
                .map(|i| names[i].as_str())
                .collect();
            return Err(ParseError::new(
                *line_no,
                *agent_col,
                format!("incomplete order for agent {agent}: missing {}", missing.join(", ")),
            ));
        }
        let order = WeakOrder::new(class_sets, m)
            .map_err(|e| ParseError::new(*line_no, *agent_col, e.to_string()))?;
        orders.insert(agent, order);
    }

    let alternatives: Result<Vec<Alternative>, PrefsError> =
        names.iter().map(|n| n.parse()).collect();
    let alternatives = alternatives.map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    Profile::new(alternatives, orders).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

fn parse_rational(sc: &mut LineScanner) -> Result<Rational, ParseError> {
    sc.skip_ws();
    let start = sc.col();
    let mut digits = String::new();
    while matches!(sc.peek(), Some(c) if c.is_ascii_digit()) {
        digits.push(sc.bump().unwrap());
    }
    if digits.is_empty() {
        return Err(ParseError::new(sc.line_no, start, "expected a probability like 0, 1, or 5/18"));
    }
    let numer: BigInt = digits.parse().expect("digits");
    if !sc.eat('/') {
        return Ok(Rational::from_integer(numer));
    }
    sc.skip_ws();
    let den_start = sc.col();
    let mut den_digits = String::new();
    while matches!(sc.peek(), Some(c) if c.is_ascii_digit()) {
        den_digits.push(sc.bump().unwrap());
    }
    if den_digits.is_empty() {
        return Err(ParseError::new(sc.line_no, den_start, "expected a denominator"));
    }
    let denom: BigInt = den_digits.parse().expect("digits");
    if denom.is_zero() {
        return Err(ParseError::new(sc.line_no, den_start, "denominator must be non-zero"));
    }
    Ok(Rational::new(numer, denom))
}

fn parse_lottery(text: &str, profile: &Profile) -> Result<Lottery, ParseError> {
    let mut sc = LineScanner::new(strip_comment(text), 1);
    let mut probs = vec![Rational::zero(); profile.num_alts()];
    let mut assigned = AltSet::EMPTY;
    if sc.at_end() {
        return Err(sc.err("empty lottery"));
    }
    loop {
        let (name, col) = sc.alt_token()?;
        let index = profile.alt_index(&name).ok_or_else(|| {
            ParseError::new(1, col, format!("unknown alternative {name:?}"))
        })?;
        if assigned.contains(index) {
            return Err(ParseError::new(1, col, format!("duplicate alternative {name:?}")));
        }
        sc.expect(':')?;
        probs[index] = parse_rational(&mut sc)?;
        assigned.insert(index);
        if !sc.eat(',') {
            break;
        }
    }
    if !sc.at_end() {
        return Err(sc.err(format!("unexpected '{}'", sc.peek().unwrap())));
    }
    Lottery::new(probs).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

// ---------------------------------------------------------------------------
