//! Core model types: alternatives, approval votes, profiles, committees, the
//! scoring-function pair domain, and the two scoring-function families
//! (bivariate committee-scoring functions and univariate Thiele functions).

use crate::{q, Q};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("committee size k={k} must satisfy 1 < k < m (m={m})")]
    BadCommitteeSize { m: usize, k: usize },
    #[error("alternative index {index} out of range for m={m}")]
    AlternativeOutOfRange { m: usize, index: usize },
    #[error("approval votes must have between 1 and m-1 alternatives (m={m}, got {size})")]
    BadVoteSize { m: usize, size: usize },
    #[error("vote multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("profile must contain at least one vote")]
    EmptyProfile,
    #[error("committee must be non-empty with distinct alternatives")]
    BadCommittee,
    #[error("pair ({x},{y}) outside the scoring domain for m={m}, k={k}")]
    PairOutOfDomain { m: usize, k: usize, x: usize, y: usize },
    #[error("scoring values must be nonnegative (got {value} at {at})")]
    NegativeValue { at: String, value: String },
    #[error("scoring values must be monotone in the intersection size ({lo} > {hi} at {at})")]
    NotMonotone { at: String, lo: String, hi: String },
    #[error("univariate scoring must have s(0) = 0")]
    NonzeroAtZero,
    #[error("univariate scoring needs exactly k+1 values (k={k}, got {got})")]
    BadLength { k: usize, got: usize },
    #[error("alternative names must be unique, non-empty tokens without whitespace or '#'")]
    BadNames,
    #[error("expected {expected} alternative names, got {got}")]
    BadNameCount { expected: usize, got: usize },
}

/// An alternative, identified by a dense index `0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alternative(pub usize);

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Display names for alternatives; defaults to `a0..a(m-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Names {
    names: Vec<String>,
}

impl Names {
    pub fn default_for(m: usize) -> Self {
        Names { names: (0..m).map(|i| format!("a{i}")).collect() }
    }

    pub fn new(names: Vec<String>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for n in &names {
            let ok = !n.is_empty()
                && !n.contains(char::is_whitespace)
                && !n.contains('#')
                && seen.insert(n.clone());
            if !ok {
                return Err(ModelError::BadNames);
            }
        }
        Ok(Names { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, a: Alternative) -> &str {
        &self.names[a.0]
    }

    pub fn index_of(&self, name: &str) -> Option<Alternative> {
        self.names.iter().position(|n| n == name).map(Alternative)
    }
}

/// A set of approved alternatives with a positive multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApprovalVote {
    pub alternatives: BTreeSet<Alternative>,
    pub multiplicity: u64,
}

impl ApprovalVote {
    pub fn new(
        alternatives: impl IntoIterator<Item = usize>,
        multiplicity: u64,
    ) -> Result<Self, ModelError> {
        if multiplicity == 0 {
            return Err(ModelError::ZeroMultiplicity);
        }
        let alternatives = alternatives.into_iter().map(Alternative).collect();
        Ok(ApprovalVote { alternatives, multiplicity })
    }

    pub fn size(&self) -> usize {
        self.alternatives.len()
    }

    /// Bitmask over alternative indices. Panics if any index is >= 128;
    /// callers working with masks must check `m <= 128` first.
    pub fn bitmask(&self) -> u128 {
        mask_of(self.alternatives.iter().copied())
    }
}

pub(crate) fn mask_of(alts: impl IntoIterator<Item = Alternative>) -> u128 {
    let mut mask = 0u128;
    for a in alts {
        assert!(a.0 < 128, "alternative index {} does not fit a 128-bit mask", a.0);
        mask |= 1u128 << a.0;
    }
    mask
}

/// A multiset of approval votes over `m` alternatives. Votes with equal
/// alternative sets are merged into one entry (multiplicities added); the
/// first-seen order of distinct votes is preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    m: usize,
    votes: Vec<ApprovalVote>,
}

impl Profile {
    pub fn new(m: usize, votes: Vec<ApprovalVote>) -> Result<Self, ModelError> {
        if votes.is_empty() {
            return Err(ModelError::EmptyProfile);
        }
        let mut merged: Vec<ApprovalVote> = Vec::new();
        for v in votes {
            if v.multiplicity == 0 {
                return Err(ModelError::ZeroMultiplicity);
            }
            let size = v.size();
            if size == 0 || size >= m {
                return Err(ModelError::BadVoteSize { m, size });
            }
            if let Some(a) = v.alternatives.iter().find(|a| a.0 >= m) {
                return Err(ModelError::AlternativeOutOfRange { m, index: a.0 });
            }
            match merged.iter_mut().find(|u| u.alternatives == v.alternatives) {
                Some(u) => u.multiplicity += v.multiplicity,
                None => merged.push(v),
            }
        }
        Ok(Profile { m, votes: merged })
    }

    /// Convenience constructor from index lists with multiplicities.
    pub fn from_votes(
        m: usize,
        votes: impl IntoIterator<Item = (Vec<usize>, u64)>,
    ) -> Result<Self, ModelError> {
        let votes = votes
            .into_iter()
            .map(|(alts, mult)| ApprovalVote::new(alts, mult))
            .collect::<Result<Vec<_>, _>>()?;
        Profile::new(m, votes)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Distinct votes (multiplicities merged).
    pub fn votes(&self) -> &[ApprovalVote] {
        &self.votes
    }

    /// Total number of voters, counting multiplicities.
    pub fn voter_count(&self) -> u64 {
        self.votes.iter().map(|v| v.multiplicity).sum()
    }
}

/// A committee: a non-empty set of distinct alternatives, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Committee {
    members: Vec<Alternative>,
}

impl Committee {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Result<Self, ModelError> {
        let set: BTreeSet<Alternative> = members.into_iter().map(Alternative).collect();
        if set.is_empty() {
            return Err(ModelError::BadCommittee);
        }
        Ok(Committee { members: set.into_iter().collect() })
    }

    pub fn members(&self) -> &[Alternative] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: Alternative) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    /// Bitmask over member indices (requires indices < 128).
    pub fn bitmask(&self) -> u128 {
        mask_of(self.members.iter().copied())
    }
}

/// The domain of a bivariate scoring function for `m` alternatives and
/// committee size `k`: pairs (x, y) with y in [1, m-1] and
/// max(0, y-m+k) <= x <= min(k, y), ordered by ascending (y, x).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairDomain {
    m: usize,
    k: usize,
    pairs: Vec<(usize, usize)>,
}

/// Smallest feasible intersection size for a vote of size `y`.
pub fn x_min(m: usize, k: usize, y: usize) -> usize {
    (y + k).saturating_sub(m)
}

/// Largest feasible intersection size for a vote of size `y`.
pub fn x_max(k: usize, y: usize) -> usize {
    k.min(y)
}

pub fn pair_domain(m: usize, k: usize) -> Result<PairDomain, ModelError> {
    if k <= 1 || k >= m {
        return Err(ModelError::BadCommitteeSize { m, k });
    }
    let mut pairs = Vec::new();
    for y in 1..m {
        for x in x_min(m, k, y)..=x_max(k, y) {
            pairs.push((x, y));
        }
    }
    Ok(PairDomain { m, k, pairs })
}

impl PairDomain {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Pairs in ascending (y, x) order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        y >= 1 && y < self.m && x >= x_min(self.m, self.k, y) && x <= x_max(self.k, y)
    }
}

/// A bivariate committee-scoring function: a nonnegative value for every
/// domain pair (x, y), monotone in x for each fixed y. A function is
/// *normalized* when the smallest-x entry of every row is zero (any function
/// is winner-equivalent to its normalization) and *trivial* when all values
/// are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariateScoring {
    domain: PairDomain,
    values: BTreeMap<(usize, usize), Q>,
}

impl BivariateScoring {
    /// Build from the given entries; pairs not listed default to zero.
    pub fn new(
        m: usize,
        k: usize,
        entries: impl IntoIterator<Item = ((usize, usize), Q)>,
    ) -> Result<Self, ModelError> {
        let domain = pair_domain(m, k)?;
        let mut values: BTreeMap<(usize, usize), Q> =
            domain.pairs().iter().map(|&p| (p, Q::zero())).collect();
        for ((x, y), v) in entries {
            if !domain.contains(x, y) {
                return Err(ModelError::PairOutOfDomain { m, k, x, y });
            }
            values.insert((x, y), v);
        }
        let f = BivariateScoring { domain, values };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (m, k) = (self.domain.m, self.domain.k);
        for y in 1..m {
            let mut prev: Option<&Q> = None;
            for x in x_min(m, k, y)..=x_max(k, y) {
                let v = &self.values[&(x, y)];
                if v < &Q::zero() {
                    return Err(ModelError::NegativeValue {
                        at: format!("({x},{y})"),
                        value: v.to_string(),
                    });
                }
                if let Some(p) = prev {
                    if p > v {
                        return Err(ModelError::NotMonotone {
                            at: format!("({x},{y})"),
                            lo: p.to_string(),
                            hi: v.to_string(),
                        });
                    }
                }
                prev = Some(v);
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.domain.m
    }

    pub fn k(&self) -> usize {
        self.domain.k
    }

    pub fn domain(&self) -> &PairDomain {
        &self.domain
    }

    /// Value at a domain pair; panics outside the domain.
    pub fn value(&self, x: usize, y: usize) -> &Q {
        &self.values[&(x, y)]
    }

    pub fn get(&self, x: usize, y: usize) -> Option<&Q> {
        self.values.get(&(x, y))
    }

    pub fn is_trivial(&self) -> bool {
        self.values.values().all(|v| v.is_zero())
    }

    pub fn is_normalized(&self) -> bool {
        let (m, k) = (self.domain.m, self.domain.k);
        (1..m).all(|y| self.values[&(x_min(m, k, y), y)].is_zero())
    }

    /// Winner-equivalent normalization: subtract each row's smallest-x value.
    pub fn normalized(&self) -> Self {
        let (m, k) = (self.domain.m, self.domain.k);
        let mut values = self.values.clone();
        for y in 1..m {
            let base = values[&(x_min(m, k, y), y)].clone();
            if !base.is_zero() {
                for x in x_min(m, k, y)..=x_max(k, y) {
                    let v = values.get_mut(&(x, y)).unwrap();
                    *v = &*v - &base;
                }
            }
        }
        BivariateScoring { domain: self.domain.clone(), values }
    }

    /// Chamberlin-Courant: one point per vote containing a committee member.
    pub fn cc(m: usize, k: usize) -> Result<Self, ModelError> {
        let domain = pair_domain(m, k)?;
        let values = domain
            .pairs()
            .iter()
            .map(|&(x, y)| ((x, y), if x > 0 { q(1) } else { Q::zero() }))
            .collect();
        Ok(BivariateScoring { domain, values })
    }

    /// Approval voting: one point per approved committee member.
    pub fn av(m: usize, k: usize) -> Result<Self, ModelError> {
        let domain = pair_domain(m, k)?;
        let values = domain.pairs().iter().map(|&(x, y)| ((x, y), q(x as i64))).collect();
        Ok(BivariateScoring { domain, values })
    }

    /// The all-zero scoring function (every committee wins).
    pub fn trivial(m: usize, k: usize) -> Result<Self, ModelError> {
        Ok(BivariateScoring {
            domain: pair_domain(m, k)?,
            values: pair_domain(m, k)?.pairs.into_iter().map(|p| (p, Q::zero())).collect(),
        })
    }

    /// Lift a univariate scoring function: f(x, y) = s(x).
    pub fn from_univariate(m: usize, s: &UnivariateScoring) -> Result<Self, ModelError> {
        let domain = pair_domain(m, s.k())?;
        let values =
            domain.pairs().iter().map(|&(x, y)| ((x, y), s.value(x).clone())).collect();
        Ok(BivariateScoring { domain, values })
    }
}

/// A univariate (Thiele) scoring function: s(0) = 0, nonnegative, monotone.
/// Trivial iff s(k) = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnivariateScoring {
    values: Vec<Q>,
}

impl UnivariateScoring {
    pub fn new(k: usize, values: Vec<Q>) -> Result<Self, ModelError> {
        if values.len() != k + 1 {
            return Err(ModelError::BadLength { k, got: values.len() });
        }
        if !values[0].is_zero() {
            return Err(ModelError::NonzeroAtZero);
        }
        for i in 0..values.len() {
            if values[i] < Q::zero() {
                return Err(ModelError::NegativeValue {
                    at: format!("s({i})"),
                    value: values[i].to_string(),
                });
            }
            if i > 0 && values[i - 1] > values[i] {
                return Err(ModelError::NotMonotone {
                    at: format!("s({i})"),
                    lo: values[i - 1].to_string(),
                    hi: values[i].to_string(),
                });
            }
        }
        Ok(UnivariateScoring { values })
    }

    pub fn from_ints(k: usize, values: &[i64]) -> Result<Self, ModelError> {
        UnivariateScoring::new(k, values.iter().map(|&v| q(v)).collect())
    }

    pub fn k(&self) -> usize {
        self.values.len() - 1
    }

    /// s(x); panics if x > k.
    pub fn value(&self, x: usize) -> &Q {
        &self.values[x]
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values[self.values.len() - 1].is_zero()
    }

    pub fn cc(k: usize) -> Self {
        let mut values = vec![q(1); k + 1];
        values[0] = Q::zero();
        UnivariateScoring { values }
    }

    pub fn av(k: usize) -> Self {
        UnivariateScoring { values: (0..=k as i64).map(q).collect() }
    }

    pub fn trivial(k: usize) -> Self {
        UnivariateScoring { values: vec![Q::zero(); k + 1] }
    }
}
