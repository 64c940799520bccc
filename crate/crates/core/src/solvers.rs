//! Decision procedures for the two target-rule problems — does some
//! non-trivial rule of the class make a given committee winning? — plus
//! exact learners that fit a rule to labeled winner-set samples.

use crate::eval::{
    abcs_score, all_committees, scan_scores, seq_winners, verify_abcs_winner, verify_seq_winner,
    EvalError, MASK_LIMIT,
};
use crate::lp::{LinearSystem, LpOutcome, Rel};
use crate::model::{
    pair_domain, x_min, BivariateScoring, Committee, ModelError, Profile, UnivariateScoring,
};
use crate::Q;
use num::integer::gcd;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Largest integer value the grid learner for sequential rules will try.
pub const DEFAULT_GRID_BOUND: i64 = 3;

/// New rival rows admitted per separation round in `target_abcs`.
const SEPARATION_BATCH: usize = 64;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("committee has {got} members, need {expected}")]
    CommitteeSize { expected: usize, got: usize },
    #[error("committee member {member} out of range for {m} alternatives")]
    MemberOutOfRange { member: usize, m: usize },
    #[error("winner label must be nonempty")]
    EmptyLabel,
    #[error("sample {index} has m={got_m}, k={got_k}; expected m={m}, k={k}")]
    SampleMismatch { index: usize, m: usize, k: usize, got_m: usize, got_k: usize },
    #[error("increment index {index} out of range 1..={k}")]
    BadIncrementIndex { index: usize, k: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One training example: a profile together with the full winner set the
/// unknown rule produced on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub profile: Profile,
    pub winners: BTreeSet<Committee>,
}

impl LabeledSample {
    pub fn new(
        profile: Profile,
        winners: impl IntoIterator<Item = Committee>,
    ) -> Result<Self, SolverError> {
        let winners: BTreeSet<Committee> = winners.into_iter().collect();
        let Some(first) = winners.iter().next() else {
            return Err(SolverError::EmptyLabel);
        };
        let k = first.len();
        for w in &winners {
            if w.len() != k {
                return Err(SolverError::CommitteeSize { expected: k, got: w.len() });
            }
            if let Some(a) = w.members().last() {
                if a.0 >= profile.m() {
                    return Err(SolverError::MemberOutOfRange { member: a.0, m: profile.m() });
                }
            }
        }
        Ok(LabeledSample { profile, winners })
    }

    pub fn k(&self) -> usize {
        self.winners.iter().next().map_or(0, |w| w.len())
    }
}

fn check_inputs(profile: &Profile, committee: &Committee, k: usize) -> Result<(), SolverError> {
    pair_domain(profile.m(), k)?;
    if profile.m() > MASK_LIMIT {
        return Err(EvalError::TooManyAlternatives { m: profile.m(), limit: MASK_LIMIT }.into());
    }
    if committee.len() != k {
        return Err(SolverError::CommitteeSize { expected: k, got: committee.len() });
    }
    if let Some(a) = committee.members().last() {
        if a.0 >= profile.m() {
            return Err(SolverError::MemberOutOfRange { member: a.0, m: profile.m() });
        }
    }
    Ok(())
}

/// Increment coordinates for normalized monotone bivariate rules: one
/// nonnegative variable per non-base domain pair, with
/// f(x, y) = sum of increments at (x', y) for x' <= x. Normalization and
/// monotonicity are then structural rather than explicit rows.
struct GCoords {
    m: usize,
    k: usize,
    vars: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
}

impl GCoords {
    fn new(m: usize, k: usize) -> Result<Self, ModelError> {
        let dom = pair_domain(m, k)?;
        let mut vars = Vec::new();
        let mut index = BTreeMap::new();
        for &(x, y) in dom.pairs() {
            if x > x_min(m, k, y) {
                index.insert((x, y), vars.len());
                vars.push((x, y));
            }
        }
        Ok(GCoords { m, k, vars, index })
    }

    fn len(&self) -> usize {
        self.vars.len()
    }

    /// Coefficients of sc(c) - sc(d) over the increment variables.
    fn score_diff_row(&self, profile: &Profile, c: &Committee, d: &Committee) -> Vec<i64> {
        let mut row = vec![0i64; self.vars.len()];
        let (cmask, dmask) = (c.bitmask(), d.bitmask());
        for v in profile.votes() {
            let vm = v.bitmask();
            let y = v.size();
            let xc = (cmask & vm).count_ones() as usize;
            let xd = (dmask & vm).count_ones() as usize;
            let mult = v.multiplicity as i64;
            for x in xd.min(xc) + 1..=xd.max(xc) {
                row[self.index[&(x, y)]] += if xc > xd { mult } else { -mult };
            }
        }
        row
    }

    /// A rule is non-trivial iff some increment is positive: the all-ones
    /// row >= 1 (valid by homogeneity of the other rows).
    fn push_nontriviality(&self, sys: &mut LinearSystem) {
        sys.push_ints(&vec![1; self.len()], Rel::Ge, 1);
    }

    fn rule_from(&self, witness: &[Q]) -> Result<BivariateScoring, ModelError> {
        let mut entries: Vec<((usize, usize), Q)> = Vec::new();
        let mut current_y = usize::MAX;
        let mut acc = Q::zero();
        for (i, &(x, y)) in self.vars.iter().enumerate() {
            if y != current_y {
                current_y = y;
                acc = Q::zero();
            }
            acc += &witness[i];
            entries.push(((x, y), acc.clone()));
        }
        BivariateScoring::new(self.m, self.k, entries)
    }
}

/// Is there a non-trivial bivariate rule under which `committee` is winning
/// on `profile`? Returns a normalized witness rule, or None when the full
/// constraint system (winner rows against every rival committee,
/// monotonicity, normalization, non-triviality) is infeasible.
///
/// Rival rows are generated lazily: solve, scan all committees exactly for
/// violations, add the worst offenders, repeat. Infeasibility of a row
/// subset already proves infeasibility of the whole system.
pub fn target_abcs(
    profile: &Profile,
    committee: &Committee,
    k: usize,
) -> Result<Option<BivariateScoring>, SolverError> {
    check_inputs(profile, committee, k)?;
    let coords = GCoords::new(profile.m(), k)?;
    let mut sys = LinearSystem::new(coords.len());
    coords.push_nontriviality(&mut sys);
    let target_mask = committee.bitmask();
    let mut added: BTreeSet<u128> = BTreeSet::new();

    loop {
        let witness = match sys.feasible() {
            LpOutcome::Feasible(x) => x,
            LpOutcome::Infeasible(_) => return Ok(None),
        };
        let f = coords.rule_from(&witness)?;

        let mut target_score: Option<i128> = None;
        let mut scored: Vec<(Committee, i128)> = Vec::new();
        for (c, s) in scan_scores(&f, profile)? {
            if c.bitmask() == target_mask {
                target_score = Some(s);
            }
            scored.push((c, s));
        }
        let target_score = target_score.expect("target committee enumerated");
        let mut violators: Vec<(Committee, i128)> = scored
            .into_iter()
            .filter(|(c, s)| *s > target_score && !added.contains(&c.bitmask()))
            .collect();
        if violators.is_empty() {
            debug_assert!(verify_abcs_winner(&f, profile, committee)?);
            return Ok(Some(f));
        }
        violators.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.bitmask().cmp(&b.0.bitmask())));
        for (d, _) in violators.into_iter().take(SEPARATION_BATCH) {
            added.insert(d.bitmask());
            sys.push_ints(&coords.score_diff_row(profile, committee, &d), Rel::Ge, 0);
        }
    }
}

/// Extra constraints for the sequential target solver, used to probe what
/// every feasible rule must look like on an instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeqTargetOptions {
    /// 1-based increment indices j with s(j) forced equal to s(j-1).
    pub forced_zero: BTreeSet<usize>,
    /// Require s(j) > s(j-1) for this 1-based increment index.
    pub require_positive: Option<usize>,
}

impl SeqTargetOptions {
    fn is_default(&self) -> bool {
        self.forced_zero.is_empty() && self.require_positive.is_none()
    }
}

/// Accumulated chain constraints over the increments d_j = s(j) - s(j-1),
/// all implicitly nonnegative. Rows with no negative coefficient are
/// implied and dropped; rows with no positive coefficient force their
/// negative-coefficient increments to zero; only mixed-sign rows are kept,
/// gcd-reduced and pruned of pointwise-dominated entries, as the canonical
/// state.
#[derive(Clone, PartialEq, Eq)]
struct RowState {
    zeros: u128,
    rows: BTreeSet<Vec<i64>>,
}

impl RowState {
    fn new() -> Self {
        RowState { zeros: 0, rows: BTreeSet::new() }
    }

    fn add(&mut self, mut row: Vec<i64>) {
        for (j, c) in row.iter_mut().enumerate() {
            if self.zeros >> j & 1 == 1 {
                *c = 0;
            }
        }
        if row.iter().all(|&c| c >= 0) {
            return;
        }
        if row.iter().all(|&c| c <= 0) {
            let mut forced = 0u128;
            for (j, &c) in row.iter().enumerate() {
                if c < 0 {
                    forced |= 1 << j;
                }
            }
            self.force_zero(forced);
            return;
        }
        let g = row.iter().map(|c| c.unsigned_abs()).fold(0u64, gcd);
        if g > 1 {
            for c in row.iter_mut() {
                *c /= g as i64;
            }
        }
        // A row pointwise above a kept row is implied (increments are
        // nonnegative); a kept row pointwise above the new one is dropped.
        if self.rows.iter().any(|r| dominates(r, &row)) {
            return;
        }
        self.rows.retain(|r| !dominates(&row, r));
        self.rows.insert(row);
    }

    fn force_zero(&mut self, mask: u128) {
        if mask & !self.zeros == 0 {
            return;
        }
        self.zeros |= mask;
        let old = std::mem::take(&mut self.rows);
        for row in old {
            self.add(row);
        }
    }
}

/// Does row `lo` imply row `hi` given nonnegative variables (lo <= hi
/// pointwise)?
fn dominates(lo: &[i64], hi: &[i64]) -> bool {
    lo.iter().zip(hi).all(|(a, b)| a <= b)
}

struct SeqSolver {
    m: usize,
    k: usize,
    members: Vec<usize>,
    votes: Vec<(u128, i64)>,
    by_alt: Vec<Vec<usize>>,
    require_positive: Option<usize>,
    /// Per chosen-set: constraint states already refuted there. A state at
    /// least as constrained as a refuted one is refuted too.
    refuted: BTreeMap<u128, Vec<(u128, BTreeSet<Vec<i64>>)>>,
    /// Feasibility of (zeros, rows) systems, independent of the chosen set.
    lp_cache: BTreeMap<(u128, Vec<Vec<i64>>), bool>,
}

impl SeqSolver {
    fn gain_vec(&self, a: usize, prefix: u128, zeros: u128) -> Vec<i64> {
        let mut v = vec![0i64; self.k];
        for &vi in &self.by_alt[a] {
            let (mask, mult) = self.votes[vi];
            let j = (mask & prefix).count_ones() as usize;
            if zeros >> j & 1 == 0 {
                v[j] += mult;
            }
        }
        v
    }

    /// Cheap consistency: non-triviality needs an unforced increment, and a
    /// required-positive increment must not be forced to zero.
    fn consistent(&self, st: &RowState) -> bool {
        (st.zeros.count_ones() as usize) < self.k
            && self.require_positive.is_none_or(|j| st.zeros >> (j - 1) & 1 == 0)
    }

    fn lp_system(&self, st: &RowState) -> LinearSystem {
        let mut sys = LinearSystem::new(self.k);
        sys.push_ints(&vec![1; self.k], Rel::Ge, 1);
        if let Some(j) = self.require_positive {
            let mut row = vec![0i64; self.k];
            row[j - 1] = 1;
            sys.push_ints(&row, Rel::Ge, 1);
        }
        for j in 0..self.k {
            if st.zeros >> j & 1 == 1 {
                let mut row = vec![0i64; self.k];
                row[j] = 1;
                sys.push_ints(&row, Rel::Eq, 0);
            }
        }
        for row in &st.rows {
            sys.push_ints(row, Rel::Ge, 0);
        }
        sys
    }

    /// Cached feasibility of a state's system. States with no kept rows are
    /// feasible whenever `consistent` holds: set the unforced increments
    /// to one.
    fn state_feasible(&mut self, st: &RowState) -> bool {
        if !self.consistent(st) {
            return false;
        }
        if st.rows.is_empty() {
            return true;
        }
        let key = (st.zeros, st.rows.iter().cloned().collect::<Vec<_>>());
        if let Some(&known) = self.lp_cache.get(&key) {
            return known;
        }
        let feasible = self.lp_system(st).feasible().is_feasible();
        self.lp_cache.insert(key, feasible);
        feasible
    }

    /// A witness for a state already known feasible.
    fn state_witness(&self, st: &RowState) -> Vec<Q> {
        if st.rows.is_empty() {
            return (0..self.k)
                .map(|j| if st.zeros >> j & 1 == 1 { Q::zero() } else { Q::one() })
                .collect();
        }
        match self.lp_system(st).feasible() {
            LpOutcome::Feasible(x) => x,
            LpOutcome::Infeasible(_) => unreachable!("state checked feasible"),
        }
    }

    fn already_refuted(&self, prefix: u128, st: &RowState) -> bool {
        self.refuted.get(&prefix).is_some_and(|entries| {
            entries.iter().any(|(zeros, rows)| {
                zeros & !st.zeros == 0 && rows.iter().all(|r| st.rows.contains(r))
            })
        })
    }

    fn record_refuted(&mut self, prefix: u128, st: &RowState) {
        let entries = self.refuted.entry(prefix).or_default();
        entries.retain(|(zeros, rows)| {
            !(st.zeros & !zeros == 0 && st.rows.iter().all(|r| rows.contains(r)))
        });
        entries.push((st.zeros, st.rows.clone()));
    }

    fn dfs(&mut self, prefix: u128, depth: usize, st: &RowState) -> Option<Vec<Q>> {
        if depth == self.k {
            // Reachable only through states already proven feasible.
            return Some(self.state_witness(st));
        }
        if self.already_refuted(prefix, st) {
            return None;
        }
        let masked_gains: Vec<Option<Vec<i64>>> = (0..self.m)
            .map(|a| (prefix >> a & 1 == 0).then(|| self.gain_vec(a, prefix, st.zeros)))
            .collect();
        // Gains are nonnegative, so a rival with an all-zero masked gain
        // can never generate a binding row.
        let active: Vec<usize> = (0..self.m)
            .filter(|&a| masked_gains[a].as_ref().is_some_and(|g| g.iter().any(|&c| c != 0)))
            .collect();
        let members = self.members.clone();
        for &c in &members {
            if prefix >> c & 1 == 1 {
                continue;
            }
            let gain_c = masked_gains[c].as_ref().expect("candidate outside prefix");
            let mut child = st.clone();
            for &a in &active {
                if a == c {
                    continue;
                }
                let gain_a = masked_gains[a].as_ref().expect("active outside prefix");
                child.add(gain_c.iter().zip(gain_a).map(|(x, y)| x - y).collect());
            }
            if !self.state_feasible(&child) {
                continue;
            }
            if let Some(w) = self.dfs(prefix | 1 << c, depth + 1, &child) {
                return Some(w);
            }
        }
        self.record_refuted(prefix, st);
        None
    }
}

/// Non-trivial monotone rules likely to witness reachability, tried before
/// the chain search: one point per covered vote, the linear rule, and each
/// step rule (0 below a threshold, 1 from it on).
fn quick_witnesses(k: usize) -> Vec<UnivariateScoring> {
    let mut rules = vec![UnivariateScoring::cc(k), UnivariateScoring::av(k)];
    for t in 2..=k {
        let values: Vec<i64> = (0..=k).map(|i| i64::from(i >= t)).collect();
        rules.push(UnivariateScoring::from_ints(k, &values).expect("step rule is valid"));
    }
    rules
}

/// Is there a non-trivial univariate rule whose greedy procedure can reach
/// `committee` on `profile`? Decides the disjunction over all insertion
/// orders of the per-order linear systems, exploring orders as a DFS with
/// shared-prefix merging: equivalent (chosen-set, constraint-state) nodes
/// are solved once. A returned rule is always re-verified.
pub fn target_seq_thiele(
    profile: &Profile,
    committee: &Committee,
    k: usize,
) -> Result<Option<UnivariateScoring>, SolverError> {
    target_seq_thiele_with(profile, committee, k, &SeqTargetOptions::default())
}

/// `target_seq_thiele` with extra constraints on the rule's increments.
pub fn target_seq_thiele_with(
    profile: &Profile,
    committee: &Committee,
    k: usize,
    options: &SeqTargetOptions,
) -> Result<Option<UnivariateScoring>, SolverError> {
    check_inputs(profile, committee, k)?;
    for &j in options.forced_zero.iter().chain(&options.require_positive) {
        if j == 0 || j > k {
            return Err(SolverError::BadIncrementIndex { index: j, k });
        }
    }
    if options.is_default() {
        for rule in quick_witnesses(k) {
            if verify_seq_winner(&rule, profile, committee)? {
                return Ok(Some(rule));
            }
        }
    }

    let votes: Vec<(u128, i64)> = profile
        .votes()
        .iter()
        .map(|v| (v.bitmask(), v.multiplicity as i64))
        .collect();
    let mut by_alt: Vec<Vec<usize>> = vec![Vec::new(); profile.m()];
    for (i, &(mask, _)) in votes.iter().enumerate() {
        for (a, list) in by_alt.iter_mut().enumerate() {
            if mask >> a & 1 == 1 {
                list.push(i);
            }
        }
    }
    let mut solver = SeqSolver {
        m: profile.m(),
        k,
        members: committee.members().iter().map(|a| a.0).collect(),
        votes,
        by_alt,
        require_positive: options.require_positive,
        refuted: BTreeMap::new(),
        lp_cache: BTreeMap::new(),
    };
    let mut start = RowState::new();
    let mut forced = 0u128;
    for &j in &options.forced_zero {
        forced |= 1 << (j - 1);
    }
    start.force_zero(forced);
    if !solver.consistent(&start) {
        return Ok(None);
    }

    let Some(d) = solver.dfs(0, 0, &start) else {
        return Ok(None);
    };
    let mut values = vec![Q::zero()];
    let mut acc = Q::zero();
    for dj in d {
        acc += dj;
        values.push(acc.clone());
    }
    let rule = UnivariateScoring::new(k, values)?;
    assert!(
        verify_seq_winner(&rule, profile, committee)?,
        "chain witness must verify"
    );
    Ok(Some(rule))
}

/// Fit a normalized bivariate rule exactly consistent with every labeled
/// sample: equal scores among labeled co-winners, margin at least one over
/// every unlabeled committee, plus non-triviality. None iff infeasible.
/// With no samples the baseline system (non-triviality alone) is solved.
pub fn erm_abcs(
    m: usize,
    k: usize,
    samples: &[LabeledSample],
) -> Result<Option<BivariateScoring>, SolverError> {
    let coords = GCoords::new(m, k)?;
    for (index, s) in samples.iter().enumerate() {
        if s.profile.m() != m || s.k() != k {
            return Err(SolverError::SampleMismatch {
                index,
                m,
                k,
                got_m: s.profile.m(),
                got_k: s.k(),
            });
        }
        if s.profile.m() > MASK_LIMIT {
            return Err(EvalError::TooManyAlternatives { m, limit: MASK_LIMIT }.into());
        }
    }
    let mut sys = LinearSystem::new(coords.len());
    coords.push_nontriviality(&mut sys);
    let mut eager: BTreeSet<Vec<i64>> = BTreeSet::new();
    for s in samples {
        let w0 = s.winners.iter().next().expect("label nonempty");
        for w in s.winners.iter().skip(1) {
            let row = coords.score_diff_row(&s.profile, w0, w);
            if row.iter().any(|&c| c != 0) && eager.insert(row.clone()) {
                sys.push_ints(&row, Rel::Eq, 0);
            }
        }
    }

    // Margin rows are separated lazily: solve, find the (sample, rival)
    // pairs the current rule fails, add the worst batch, repeat. Already
    // satisfied rows can never re-violate, so no bookkeeping is needed
    // beyond per-round deduplication.
    loop {
        let witness = match sys.feasible() {
            LpOutcome::Feasible(x) => x,
            LpOutcome::Infeasible(_) => return Ok(None),
        };
        let f = coords.rule_from(&witness)?;
        let mut violations: Vec<(Q, Vec<i64>)> = Vec::new();
        for s in samples {
            let w0 = s.winners.iter().next().expect("label nonempty");
            let base = abcs_score(&f, w0, &s.profile)?;
            for d in all_committees(m, k) {
                if s.winners.contains(&d) {
                    continue;
                }
                let margin = &base - &abcs_score(&f, &d, &s.profile)?;
                if margin < Q::one() {
                    violations.push((margin, coords.score_diff_row(&s.profile, w0, &d)));
                }
            }
        }
        if violations.is_empty() {
            debug_assert!(samples.iter().all(|s| {
                crate::eval::abcs_winners(&f, &s.profile)
                    .map(|w| w.into_iter().collect::<BTreeSet<_>>() == s.winners)
                    .unwrap_or(false)
            }));
            return Ok(Some(f));
        }
        violations.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut pushed: BTreeSet<Vec<i64>> = BTreeSet::new();
        for (_, row) in violations {
            if pushed.len() == SEPARATION_BATCH {
                break;
            }
            if pushed.insert(row.clone()) {
                sys.push_ints(&row, Rel::Ge, 1);
            }
        }
    }
}

/// Grid learner for sequential rules: try every monotone integer rule with
/// values in [0, bound] in ascending lexicographic order and return the
/// first whose greedy winner sets match every label exactly. Sound but
/// incomplete beyond the grid.
pub fn erm_seq_with_bound(
    k: usize,
    samples: &[LabeledSample],
    bound: i64,
) -> Result<Option<UnivariateScoring>, SolverError> {
    for (index, s) in samples.iter().enumerate() {
        if s.k() != k {
            return Err(SolverError::SampleMismatch {
                index,
                m: s.profile.m(),
                k,
                got_m: s.profile.m(),
                got_k: s.k(),
            });
        }
    }
    let mut values = vec![0i64; k];
    loop {
        let mut full = vec![0i64];
        full.extend_from_slice(&values);
        let rule = UnivariateScoring::from_ints(k, &full)?;
        let mut consistent = true;
        for s in samples {
            if seq_winners(&rule, &s.profile)? != s.winners {
                consistent = false;
                break;
            }
        }
        if consistent {
            return Ok(Some(rule));
        }
        if !next_monotone(&mut values, bound) {
            return Ok(None);
        }
    }
}

pub fn erm_seq(
    k: usize,
    samples: &[LabeledSample],
) -> Result<Option<UnivariateScoring>, SolverError> {
    erm_seq_with_bound(k, samples, DEFAULT_GRID_BOUND)
}

/// Advance to the next nondecreasing vector over [0, bound] in lexicographic
/// order; false when exhausted.
fn next_monotone(values: &mut [i64], bound: i64) -> bool {
    for i in (0..values.len()).rev() {
        if values[i] < bound {
            values[i] += 1;
            let v = values[i];
            for tail in values[i + 1..].iter_mut() {
                *tail = v;
            }
            return true;
        }
    }
    false
}
