//! Sample-based learning experiments: draw random profiles, label them with
//! a target rule, fit a hypothesis with the matching empirical-risk
//! minimizer, and measure how often the hypothesis disagrees with the target
//! on fresh profiles. Everything is driven by a single seed so reports are
//! reproducible byte for byte.

use crate::eval::{abcs_winners, seq_winners, EvalError};
use crate::model::{
    pair_domain, ApprovalVote, BivariateScoring, Committee, ModelError, Profile,
    UnivariateScoring,
};
use crate::solvers::{erm_abcs, erm_seq, LabeledSample, SolverError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PacError {
    #[error("budget list must not be empty")]
    EmptyBudgets,
    #[error("test set size must be at least 1")]
    ZeroTestCount,
    #[error("profiles need at least one voter")]
    ZeroVoters,
    #[error("constant vote size {size} outside [1, {max}]")]
    BadConstantSize { size: usize, max: usize },
    #[error("only uniform subset sampling is supported")]
    UnsupportedDistribution,
    #[error("target rule is for m={target_m}, k={target_k}, config has m={m}, k={k}")]
    TargetMismatch {
        target_m: usize,
        target_k: usize,
        m: usize,
        k: usize,
    },
    #[error("exact learner failed on realizable data at budget {budget}")]
    ErmInfeasible { budget: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Law for the size of a sampled vote, always restricted to [1, m-1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoteSizeLaw {
    /// Every vote has exactly this many approvals.
    Constant(usize),
    /// Size uniform on [1, m-1] (impartial culture).
    Uniform,
}

/// Vote distribution: a size law plus the subset-sampling mode. Only
/// uniform subset sampling is implemented; the flag exists so configs are
/// explicit about it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteDistribution {
    pub size_law: VoteSizeLaw,
    pub uniform_subset: bool,
}

impl Default for VoteDistribution {
    fn default() -> Self {
        VoteDistribution {
            size_law: VoteSizeLaw::Uniform,
            uniform_subset: true,
        }
    }
}

/// The rule that labels training and test profiles.
#[derive(Debug, Clone)]
pub enum TargetRule {
    Abcs(BivariateScoring),
    Seq(UnivariateScoring),
}

/// One experiment: for each training budget, fit a hypothesis and estimate
/// its disagreement rate with the target on a shared fresh test set.
#[derive(Debug, Clone)]
pub struct PacConfig {
    pub m: usize,
    pub k: usize,
    /// Voters per sampled profile.
    pub n: usize,
    /// Training-set sizes to report on, one row each; 0 means the learner
    /// sees no data and returns its baseline.
    pub budgets: Vec<usize>,
    pub test_count: usize,
    pub distribution: VoteDistribution,
    pub seed: u64,
    pub target: TargetRule,
}

impl PacConfig {
    pub fn new(
        m: usize,
        k: usize,
        n: usize,
        budgets: Vec<usize>,
        test_count: usize,
        distribution: VoteDistribution,
        seed: u64,
        target: TargetRule,
    ) -> Result<Self, PacError> {
        pair_domain(m, k)?;
        if n == 0 {
            return Err(PacError::ZeroVoters);
        }
        if budgets.is_empty() {
            return Err(PacError::EmptyBudgets);
        }
        if test_count == 0 {
            return Err(PacError::ZeroTestCount);
        }
        if !distribution.uniform_subset {
            return Err(PacError::UnsupportedDistribution);
        }
        if let VoteSizeLaw::Constant(size) = distribution.size_law {
            if size == 0 || size >= m {
                return Err(PacError::BadConstantSize { size, max: m - 1 });
            }
        }
        let (target_m, target_k) = match &target {
            TargetRule::Abcs(f) => (f.domain().m(), f.domain().k()),
            TargetRule::Seq(s) => (m, s.k()),
        };
        if target_m != m || target_k != k {
            return Err(PacError::TargetMismatch {
                target_m,
                target_k,
                m,
                k,
            });
        }
        Ok(PacConfig {
            m,
            k,
            n,
            budgets,
            test_count,
            distribution,
            seed,
            target,
        })
    }
}

/// One report row: hypothesis quality at a given training budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacRow {
    pub budget: usize,
    pub seed: u64,
    pub mismatches: usize,
    pub test_count: usize,
    /// Whether the hypothesis reproduces every training label. Always true
    /// for the exact bivariate learner; the grid-based sequential learner
    /// may fail off-grid and then reports its fallback as inconsistent.
    pub train_consistent: bool,
}

impl PacRow {
    pub fn empirical_error(&self) -> f64 {
        self.mismatches as f64 / self.test_count as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacReport {
    pub rows: Vec<PacRow>,
}

impl PacReport {
    /// CSV lines `budget,seed,empirical_error,train_consistent`, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{}\n",
                row.budget,
                row.seed,
                row.empirical_error(),
                row.train_consistent
            ));
        }
        out
    }
}

/// Independent random stream derived from the experiment seed.
fn stream_rng(seed: u64, stream: u8) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = stream;
    ChaCha8Rng::from_seed(key)
}

/// Draw one profile: n votes i.i.d., size from the configured law, then a
/// uniform subset of that size. Duplicate votes merge into multiplicities.
pub fn sample_profile(cfg: &PacConfig, rng: &mut ChaCha8Rng) -> Profile {
    let votes = (0..cfg.n)
        .map(|_| {
            let size = match cfg.distribution.size_law {
                VoteSizeLaw::Constant(s) => s,
                VoteSizeLaw::Uniform => rng.gen_range(1..cfg.m),
            };
            let picked = rand::seq::index::sample(rng, cfg.m, size).into_vec();
            ApprovalVote::new(picked, 1).expect("sampled vote is valid")
        })
        .collect();
    Profile::new(cfg.m, votes).expect("sampled profile is valid")
}

fn target_label(target: &TargetRule, profile: &Profile) -> Result<BTreeSet<Committee>, PacError> {
    Ok(match target {
        TargetRule::Abcs(f) => abcs_winners(f, profile)?.into_iter().collect(),
        TargetRule::Seq(s) => seq_winners(s, profile)?,
    })
}

fn hypothesis_label(
    hypothesis: &TargetRule,
    profile: &Profile,
) -> Result<BTreeSet<Committee>, PacError> {
    target_label(hypothesis, profile)
}

/// Run the experiment: training samples are drawn once from a dedicated
/// stream and each budget uses a prefix, so larger budgets extend smaller
/// ones; the test set comes from a second stream and is shared by every
/// row.
pub fn pac_experiment(cfg: &PacConfig) -> Result<PacReport, PacError> {
    let max_budget = *cfg.budgets.iter().max().expect("budgets nonempty");
    let mut train_rng = stream_rng(cfg.seed, 0);
    let mut train: Vec<LabeledSample> = Vec::with_capacity(max_budget);
    for _ in 0..max_budget {
        let profile = sample_profile(cfg, &mut train_rng);
        let winners = target_label(&cfg.target, &profile)?;
        train.push(LabeledSample::new(profile, winners)?);
    }
    let mut test_rng = stream_rng(cfg.seed, 1);
    let mut test: Vec<(Profile, BTreeSet<Committee>)> = Vec::with_capacity(cfg.test_count);
    for _ in 0..cfg.test_count {
        let profile = sample_profile(cfg, &mut test_rng);
        let winners = target_label(&cfg.target, &profile)?;
        test.push((profile, winners));
    }

    let mut rows = Vec::with_capacity(cfg.budgets.len());
    for &budget in &cfg.budgets {
        let seen = &train[..budget.min(max_budget)];
        let (hypothesis, mut train_consistent) = match &cfg.target {
            TargetRule::Abcs(_) => match erm_abcs(cfg.m, cfg.k, seen)? {
                Some(f) => (TargetRule::Abcs(f), true),
                None => return Err(PacError::ErmInfeasible { budget }),
            },
            TargetRule::Seq(_) => match erm_seq(cfg.k, seen)? {
                Some(s) => (TargetRule::Seq(s), true),
                // Off-grid target: fall back to the trivial rule and flag
                // the row rather than abort the experiment.
                None => (TargetRule::Seq(UnivariateScoring::trivial(cfg.k)), false),
            },
        };
        if train_consistent {
            for sample in seen {
                if hypothesis_label(&hypothesis, &sample.profile)? != sample.winners {
                    train_consistent = false;
                    break;
                }
            }
        }
        let mut mismatches = 0;
        for (profile, winners) in &test {
            if hypothesis_label(&hypothesis, profile)? != *winners {
                mismatches += 1;
            }
        }
        rows.push(PacRow {
            budget,
            seed: cfg.seed,
            mismatches,
            test_count: cfg.test_count,
            train_consistent,
        });
    }
    Ok(PacReport { rows })
}
