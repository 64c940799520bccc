//! Rule evaluation: scores and winner sets for bivariate committee-scoring
//! rules, Thiele scores, and the sequential greedy procedure (all argmax
//! branches). Winner scans run on scaled integers for speed but every scale
//! factor is exact, so results equal the rational computation.

use crate::model::{
    Alternative, BivariateScoring, Committee, ModelError, Profile, UnivariateScoring,
};
use crate::Q;
use itertools::Itertools;
use num::{BigInt, Integer, One, ToPrimitive, Zero};
use std::collections::{BTreeSet, HashSet};
use thiserror::Error;

/// Alternative-count limit for mask-based winner scans.
pub const MASK_LIMIT: usize = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("profile is over m={got} alternatives but the rule expects m={expected}")]
    MismatchedM { expected: usize, got: usize },
    #[error("committee has {got} members but the rule expects {expected}")]
    WrongCommitteeSize { expected: usize, got: usize },
    #[error("committee member index {index} out of range for m={m}")]
    MemberOutOfRange { m: usize, index: usize },
    #[error("winner scans support at most {limit} alternatives (got m={m})")]
    TooManyAlternatives { m: usize, limit: usize },
    #[error("scoring values too large for the scaled integer scan")]
    NumericOverflow,
    #[error("set has {got} alternatives but the scoring function stops at {limit}")]
    SetTooLarge { limit: usize, got: usize },
}

/// All size-k committees over m alternatives, in lexicographic order.
pub fn all_committees(m: usize, k: usize) -> impl Iterator<Item = Committee> {
    (0..m).combinations(k).map(|c| Committee::new(c).expect("nonempty"))
}

fn check_committee(c: &Committee, m: usize, k: usize) -> Result<(), EvalError> {
    if c.len() != k {
        return Err(EvalError::WrongCommitteeSize { expected: k, got: c.len() });
    }
    if let Some(a) = c.members().iter().find(|a| a.0 >= m) {
        return Err(EvalError::MemberOutOfRange { m, index: a.0 });
    }
    Ok(())
}

/// Score of `committee` under `f` on `profile`:
/// sum over votes of multiplicity * f(|C ∩ vote|, |vote|).
pub fn abcs_score(
    f: &BivariateScoring,
    committee: &Committee,
    profile: &Profile,
) -> Result<Q, EvalError> {
    if profile.m() != f.m() {
        return Err(EvalError::MismatchedM { expected: f.m(), got: profile.m() });
    }
    check_committee(committee, f.m(), f.k())?;
    let members: BTreeSet<Alternative> = committee.members().iter().copied().collect();
    let mut total = Q::zero();
    for v in profile.votes() {
        let x = v.alternatives.intersection(&members).count();
        let val = f.value(x, v.size());
        total += val * Q::from_integer(v.multiplicity.into());
    }
    Ok(total)
}

pub(crate) struct PreppedVote {
    pub mask: u128,
    pub y: usize,
    pub mult: i128,
}

pub(crate) fn prep_votes(profile: &Profile) -> Result<Vec<PreppedVote>, EvalError> {
    if profile.m() > MASK_LIMIT {
        return Err(EvalError::TooManyAlternatives { m: profile.m(), limit: MASK_LIMIT });
    }
    Ok(profile
        .votes()
        .iter()
        .map(|v| PreppedVote { mask: v.bitmask(), y: v.size(), mult: v.multiplicity as i128 })
        .collect())
}

/// Scale a set of rationals to integers by their denominators' lcm.
/// Returns (scaled values, scale) or None when they do not fit the headroom.
fn scale_to_i128(values: &[Q], headroom: i128) -> Option<Vec<i128>> {
    let mut lcm = BigInt::one();
    for v in values {
        lcm = lcm.lcm(v.denom());
    }
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let scaled: BigInt = v.numer() * (&lcm / v.denom());
        let s = scaled.to_i128()?;
        if s.checked_abs()? >= headroom {
            return None;
        }
        out.push(s);
    }
    Some(out)
}

/// Dense [y][x] table of f scaled to integers; exact up to one global factor.
pub(crate) fn scaled_rule_table(
    f: &BivariateScoring,
    profile: &Profile,
) -> Result<Vec<Vec<i128>>, EvalError> {
    let total: i128 = profile.votes().iter().map(|v| v.multiplicity as i128).sum();
    let headroom = i128::MAX / (4 * total.max(1));
    let flat: Vec<Q> = f.domain().pairs().iter().map(|&(x, y)| f.value(x, y).clone()).collect();
    let scaled = scale_to_i128(&flat, headroom).ok_or(EvalError::NumericOverflow)?;
    let mut table = vec![vec![0i128; f.k() + 1]; f.m()];
    for (&(x, y), s) in f.domain().pairs().iter().zip(scaled) {
        table[y][x] = s;
    }
    Ok(table)
}

pub(crate) fn scan_scores(
    f: &BivariateScoring,
    profile: &Profile,
) -> Result<impl Iterator<Item = (Committee, i128)>, EvalError> {
    if profile.m() != f.m() {
        return Err(EvalError::MismatchedM { expected: f.m(), got: profile.m() });
    }
    let table = scaled_rule_table(f, profile)?;
    let votes = prep_votes(profile)?;
    let k = f.k();
    Ok(all_committees(profile.m(), k).map(move |c| {
        let cmask = c.bitmask();
        let mut score = 0i128;
        for v in &votes {
            let x = (cmask & v.mask).count_ones() as usize;
            score += v.mult * table[v.y][x];
        }
        (c, score)
    }))
}

/// All maximum-score committees under `f`, sorted lexicographically.
pub fn abcs_winners(f: &BivariateScoring, profile: &Profile) -> Result<Vec<Committee>, EvalError> {
    let mut best: Option<i128> = None;
    let mut winners: Vec<Committee> = Vec::new();
    for (c, score) in scan_scores(f, profile)? {
        match best {
            Some(b) if score < b => {}
            Some(b) if score == b => winners.push(c),
            _ => {
                best = Some(score);
                winners.clear();
                winners.push(c);
            }
        }
    }
    Ok(winners)
}

/// Does `committee` achieve the maximum score under `f` (ties allowed)?
pub fn verify_abcs_winner(
    f: &BivariateScoring,
    profile: &Profile,
    committee: &Committee,
) -> Result<bool, EvalError> {
    check_committee(committee, f.m(), f.k())?;
    let target_mask = committee.bitmask();
    let mut target: Option<i128> = None;
    let mut max = i128::MIN;
    for (c, score) in scan_scores(f, profile)? {
        if score > max {
            max = score;
        }
        if c.bitmask() == target_mask {
            target = Some(score);
        }
    }
    Ok(target.expect("committee enumerated") == max)
}

/// Thiele score of an alternative set (any size up to k) on a profile.
pub fn thiele_score(
    s: &UnivariateScoring,
    alternatives: &BTreeSet<Alternative>,
    profile: &Profile,
) -> Result<Q, EvalError> {
    if alternatives.len() > s.k() {
        return Err(EvalError::SetTooLarge { limit: s.k(), got: alternatives.len() });
    }
    if let Some(a) = alternatives.iter().find(|a| a.0 >= profile.m()) {
        return Err(EvalError::MemberOutOfRange { m: profile.m(), index: a.0 });
    }
    let mut total = Q::zero();
    for v in profile.votes() {
        let x = v.alternatives.intersection(alternatives).count();
        total += s.value(x) * Q::from_integer(v.multiplicity.into());
    }
    Ok(total)
}

/// Incremental greedy-gain engine: maintains, for the current chosen set, the
/// score increase of adding each alternative, on exactly scaled integers.
pub(crate) struct SeqEngine {
    votes: Vec<PreppedVote>,
    inter: Vec<usize>,
    by_alt: Vec<Vec<u32>>,
    d: Vec<i128>,
    pub gains: Vec<i128>,
    pub m: usize,
    pub k: usize,
}

impl SeqEngine {
    pub fn new(s: &UnivariateScoring, profile: &Profile) -> Result<Self, EvalError> {
        let votes = prep_votes(profile)?;
        let m = profile.m();
        let k = s.k();
        let total: i128 = votes.iter().map(|v| v.mult).sum();
        let headroom = i128::MAX / (4 * (k as i128 + 1) * total.max(1));
        let scaled =
            scale_to_i128(s.values(), headroom).ok_or(EvalError::NumericOverflow)?;
        // d[j] = scaled s(j) - s(j-1); index 0 unused.
        let mut d = vec![0i128; k + 2];
        for j in 1..=k {
            d[j] = scaled[j] - scaled[j - 1];
        }
        let mut by_alt = vec![Vec::new(); m];
        for (i, v) in votes.iter().enumerate() {
            for a in 0..m {
                if v.mask >> a & 1 == 1 {
                    by_alt[a].push(i as u32);
                }
            }
        }
        let mut gains = vec![0i128; m];
        for v in &votes {
            for a in 0..m {
                if v.mask >> a & 1 == 1 {
                    gains[a] += v.mult * d[1];
                }
            }
        }
        let inter = vec![0; votes.len()];
        Ok(SeqEngine { votes, inter, by_alt, d, gains, m, k })
    }

    fn d_at(&self, j: usize) -> i128 {
        if j < self.d.len() {
            self.d[j]
        } else {
            0
        }
    }

    pub fn push(&mut self, c: usize) {
        for &vi in &self.by_alt[c] {
            let vi = vi as usize;
            let old = self.inter[vi];
            self.inter[vi] = old + 1;
            let delta = self.d_at(old + 2) - self.d_at(old + 1);
            if delta != 0 {
                let mult = self.votes[vi].mult;
                let mask = self.votes[vi].mask;
                for a in 0..self.m {
                    if mask >> a & 1 == 1 {
                        self.gains[a] += mult * delta;
                    }
                }
            }
        }
    }

    pub fn pop(&mut self, c: usize) {
        for &vi in &self.by_alt[c] {
            let vi = vi as usize;
            let old = self.inter[vi] - 1;
            self.inter[vi] = old;
            let delta = self.d_at(old + 2) - self.d_at(old + 1);
            if delta != 0 {
                let mult = self.votes[vi].mult;
                let mask = self.votes[vi].mask;
                for a in 0..self.m {
                    if mask >> a & 1 == 1 {
                        self.gains[a] -= mult * delta;
                    }
                }
            }
        }
    }

    /// Maximum gain over alternatives outside `chosen`.
    pub fn max_gain(&self, chosen: u128) -> i128 {
        let mut best = i128::MIN;
        for a in 0..self.m {
            if chosen >> a & 1 == 0 && self.gains[a] > best {
                best = self.gains[a];
            }
        }
        best
    }
}

fn committee_from_mask(mask: u128, m: usize) -> Committee {
    Committee::new((0..m).filter(|&a| mask >> a & 1 == 1)).expect("nonempty mask")
}

/// All committees reachable by the sequential greedy procedure for `s`:
/// start empty, repeatedly add any alternative whose score increase is
/// maximal, for k steps. Branches over the full argmax set with memoization
/// on chosen sets; winners sorted lexicographically.
pub fn seq_winners(
    s: &UnivariateScoring,
    profile: &Profile,
) -> Result<BTreeSet<Committee>, EvalError> {
    let mut engine = SeqEngine::new(s, profile)?;
    let k = engine.k;
    let mut visited: HashSet<u128> = HashSet::new();
    let mut winners: BTreeSet<u128> = BTreeSet::new();
    let mut stack: Vec<usize> = Vec::new();

    fn explore(
        engine: &mut SeqEngine,
        chosen: u128,
        depth: usize,
        k: usize,
        visited: &mut HashSet<u128>,
        winners: &mut BTreeSet<u128>,
        stack: &mut Vec<usize>,
    ) {
        if depth == k {
            winners.insert(chosen);
            return;
        }
        if !visited.insert(chosen) {
            return;
        }
        let best = engine.max_gain(chosen);
        let argmax: Vec<usize> = (0..engine.m)
            .filter(|&a| chosen >> a & 1 == 0 && engine.gains[a] == best)
            .collect();
        for c in argmax {
            engine.push(c);
            stack.push(c);
            explore(engine, chosen | 1u128 << c, depth + 1, k, visited, winners, stack);
            stack.pop();
            engine.pop(c);
        }
    }

    explore(&mut engine, 0, 0, k, &mut visited, &mut winners, &mut stack);
    let m = profile.m();
    Ok(winners.into_iter().map(|w| committee_from_mask(w, m)).collect())
}

/// Can the sequential greedy procedure for `s` produce `committee`?
/// Reachability over subsets of the committee: from chosen set S, an
/// extension c in C\S is feasible iff its gain weakly dominates every
/// alternative outside S.
pub fn verify_seq_winner(
    s: &UnivariateScoring,
    profile: &Profile,
    committee: &Committee,
) -> Result<bool, EvalError> {
    check_committee(committee, profile.m(), s.k())?;
    let mut engine = SeqEngine::new(s, profile)?;
    let k = engine.k;
    let target = committee.bitmask();
    let mut visited: HashSet<u128> = HashSet::new();

    fn reach(
        engine: &mut SeqEngine,
        chosen: u128,
        depth: usize,
        k: usize,
        target: u128,
        visited: &mut HashSet<u128>,
    ) -> bool {
        if depth == k {
            return true;
        }
        if !visited.insert(chosen) {
            return false;
        }
        let best = engine.max_gain(chosen);
        let candidates: Vec<usize> = (0..engine.m)
            .filter(|&a| {
                target >> a & 1 == 1 && chosen >> a & 1 == 0 && engine.gains[a] == best
            })
            .collect();
        for c in candidates {
            engine.push(c);
            let found = reach(engine, chosen | 1u128 << c, depth + 1, k, target, visited);
            engine.pop(c);
            if found {
                return true;
            }
        }
        false
    }

    Ok(reach(&mut engine, 0, 0, k, target, &mut visited))
}
