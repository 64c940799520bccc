//! Families of profiles that a class of rules can shatter, used to probe
//! the combinatorial richness (Natarajan / graph dimension) of the bivariate
//! and sequential rule classes, together with exhaustive verifiers.

use crate::eval::EvalError;
use crate::model::{
    x_max, x_min, BivariateScoring, Committee, ModelError, Profile, UnivariateScoring,
};
use crate::{q, Q};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Default cap on the number of shattered points for exhaustive checks
/// (2^points hypotheses get evaluated).
pub const SHATTER_ENUM_CAP: usize = 16;

/// Hard internal limit for subset enumeration.
const ENUM_LIMIT: usize = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("need m >= 3 and 2 <= k <= m-1, got m={m} k={k}")]
    BadPairDimensions { m: usize, k: usize },
    #[error("need k >= 2 for the greedy family, got k={k}")]
    BadSeqDimensions { k: usize },
    #[error("{got} points exceed the exhaustive verification limit {limit}")]
    TooManyPoints { got: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The (x, y) pairs a bivariate family can flip independently: every domain
/// pair except each row's smallest-x entry, the whole y=1 row, and (k, k).
pub fn shatterable_pairs(m: usize, k: usize) -> Result<Vec<(usize, usize)>, ConstructionError> {
    if m < 3 || k < 2 || k >= m {
        return Err(ConstructionError::BadPairDimensions { m, k });
    }
    let mut pairs = Vec::new();
    for y in 2..m {
        for x in 1 + x_min(m, k, y)..=x_max(k, y) {
            if (x, y) != (k, k) {
                pairs.push((x, y));
            }
        }
    }
    Ok(pairs)
}

/// One shattered point: a profile plus the two committees that tell the
/// hypothesis sides apart (each expected as the unique winner on its side).
pub struct ShatterPoint {
    pub coords: Vec<usize>,
    pub profile: Profile,
    pub pos: Committee,
    pub neg: Committee,
}

/// A set of profiles together with a hypothesis builder: for each subset S
/// of point indices, `build(S)` is a rule whose unique winner on point i is
/// `pos[i]` when i is in S and `neg[i]` otherwise.
pub struct ShatterFamily<R> {
    pub m: usize,
    pub k: usize,
    pub points: Vec<ShatterPoint>,
    builder: Box<dyn Fn(&BTreeSet<usize>) -> R>,
}

impl<R> ShatterFamily<R> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn build(&self, subset: &BTreeSet<usize>) -> R {
        (self.builder)(subset)
    }
}

/// The bivariate shatter family over alternatives a, b_1..b_{k-1}, c,
/// d_1..d_{m-k-1} (in that index order). Point (x, y) carries the profile
/// {a}, A, C, {b_1..b_{x-1}, c, d_1..d_{y-x}} with A = {a, b's} as the
/// positive committee and C = {b's, c} as the negative one.
pub fn abcs_shatter_family(
    m: usize,
    k: usize,
) -> Result<ShatterFamily<BivariateScoring>, ConstructionError> {
    let pairs = shatterable_pairs(m, k)?;
    // Index layout: a = 0, b_i = i for i in 1..k, c = k, d_j = k + j.
    let committee_a: Vec<usize> = (0..k).collect();
    let committee_c: Vec<usize> = (1..=k).collect();
    let pos = Committee::new(committee_a.clone())?;
    let neg = Committee::new(committee_c.clone())?;

    let mut points = Vec::new();
    for &(x, y) in &pairs {
        let mut fourth: Vec<usize> = (1..x).collect();
        fourth.push(k);
        fourth.extend(k + 1..=k + (y - x));
        let profile = Profile::from_votes(
            m,
            [
                (vec![0], 1),
                (committee_a.clone(), 1),
                (committee_c.clone(), 1),
                (fourth, 1),
            ],
        )?;
        points.push(ShatterPoint {
            coords: vec![x, y],
            profile,
            pos: pos.clone(),
            neg: neg.clone(),
        });
    }

    let index_of: BTreeMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let builder = move |subset: &BTreeSet<usize>| {
        let mut entries: Vec<((usize, usize), Q)> = Vec::new();
        for y in 1..m {
            let mut prev = Q::zero();
            for x in x_min(m, k, y)..=x_max(k, y) {
                let v = if x == x_min(m, k, y) {
                    Q::zero()
                } else if (x, y) == (1, 1) {
                    &prev + q(1)
                } else if (x, y) == (k, k) {
                    q(4 * k as i64 - 1)
                } else {
                    let step = if subset.contains(&index_of[&(x, y)]) { 0 } else { 2 };
                    &prev + q(step)
                };
                entries.push(((x, y), v.clone()));
                prev = v;
            }
        }
        BivariateScoring::new(m, k, entries).expect("family hypothesis is a valid rule")
    };
    Ok(ShatterFamily { m, k, points, builder: Box::new(builder) })
}

/// The greedy-rule shatter family over m = k+1 alternatives b_1..b_{k-1},
/// a, c (in that index order). Point x (for x = 2..k) carries the profile
/// with three {b_i} votes per i, one {a}, and one {b_1..b_{x-1}, c}; the
/// positive committee is {b's, a}, the negative one {b's, c}.
pub fn seq_shatter_family(
    k: usize,
) -> Result<ShatterFamily<UnivariateScoring>, ConstructionError> {
    if k < 2 {
        return Err(ConstructionError::BadSeqDimensions { k });
    }
    let m = k + 1;
    // Index layout: b_i = i - 1 for i in 1..k, a = k - 1, c = k.
    let pos = Committee::new((0..k - 1).chain([k - 1]))?;
    let neg = Committee::new((0..k - 1).chain([k]))?;

    let mut points = Vec::new();
    for x in 2..=k {
        let mut votes: Vec<(Vec<usize>, u64)> = (0..k - 1).map(|b| (vec![b], 3)).collect();
        votes.push((vec![k - 1], 1));
        let fifth: Vec<usize> = (0..x - 1).chain([k]).collect();
        votes.push((fifth, 1));
        points.push(ShatterPoint {
            coords: vec![x],
            profile: Profile::from_votes(m, votes)?,
            pos: pos.clone(),
            neg: neg.clone(),
        });
    }

    let builder = move |subset: &BTreeSet<usize>| {
        let mut values = vec![Q::zero(), q(1)];
        for x in 2..=k {
            let step = if subset.contains(&(x - 2)) { 0 } else { 2 };
            let next = &values[x - 1] + q(step);
            values.push(next);
        }
        UnivariateScoring::new(k, values).expect("family hypothesis is a valid rule")
    };
    Ok(ShatterFamily { m, k, points, builder: Box::new(builder) })
}

fn enum_guard(n: usize) -> Result<(), ConstructionError> {
    if n > ENUM_LIMIT {
        return Err(ConstructionError::TooManyPoints { got: n, limit: ENUM_LIMIT });
    }
    Ok(())
}

/// Exhaustively check N-shattering: the two sides differ on every point and
/// for every subset S the built hypothesis makes `pos` the unique winner on
/// points inside S and `neg` the unique winner outside.
pub fn verify_n_shattering<R, F>(
    family: &ShatterFamily<R>,
    winners: F,
) -> Result<bool, ConstructionError>
where
    F: Fn(&R, &Profile) -> Result<BTreeSet<Committee>, EvalError>,
{
    let n = family.len();
    enum_guard(n)?;
    if family.points.iter().any(|p| p.pos == p.neg) {
        return Ok(false);
    }
    for mask in 0u32..1u32 << n {
        let subset: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let h = family.build(&subset);
        for (i, point) in family.points.iter().enumerate() {
            let w = winners(&h, &point.profile)?;
            let expected = if subset.contains(&i) { &point.pos } else { &point.neg };
            if w.len() != 1 || !w.contains(expected) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustively check G-shattering against the all-positive labeling: for
/// every subset S the built hypothesis reproduces {pos} exactly on points in
/// S and something else elsewhere.
pub fn verify_g_shattering<R, F>(
    family: &ShatterFamily<R>,
    winners: F,
) -> Result<bool, ConstructionError>
where
    F: Fn(&R, &Profile) -> Result<BTreeSet<Committee>, EvalError>,
{
    let n = family.len();
    enum_guard(n)?;
    for mask in 0u32..1u32 << n {
        let subset: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let h = family.build(&subset);
        for (i, point) in family.points.iter().enumerate() {
            let w = winners(&h, &point.profile)?;
            let matches_pos = w.len() == 1 && w.contains(&point.pos);
            if matches_pos != subset.contains(&i) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Winner adapter for bivariate rules.
pub fn bivariate_winner_sets(
    f: &BivariateScoring,
    p: &Profile,
) -> Result<BTreeSet<Committee>, EvalError> {
    Ok(crate::eval::abcs_winners(f, p)?.into_iter().collect())
}

/// Winner adapter for greedy univariate rules.
pub fn seq_winner_sets(
    s: &UnivariateScoring,
    p: &Profile,
) -> Result<BTreeSet<Committee>, EvalError> {
    crate::eval::seq_winners(s, p)
}
