//! Command-line front end for the committee-scoring workbench. Every
//! subcommand is a thin adapter over `abcs-core`: parse inputs, call one
//! library entry point, print its result.
//!
//! Exit codes: 0 success (or "yes"), 1 semantic "no" (not a winner, no
//! witness rule, learner infeasible, failed construction check), 2 usage or
//! input errors, 3 capacity-cap refusals.

use abcs_core::constructions::{
    abcs_shatter_family, bivariate_winner_sets, seq_shatter_family, seq_winner_sets,
    ConstructionError, ShatterFamily, SHATTER_ENUM_CAP,
};
use abcs_core::eval::{abcs_winners, seq_winners, verify_abcs_winner, verify_seq_winner};
use abcs_core::io::{
    emit_bivariate, emit_profile, emit_univariate, parse_profile, parse_rule, parse_samples,
    ParsedRule, ProfileBlock,
};
use abcs_core::model::{BivariateScoring, Committee, Names, UnivariateScoring};
use abcs_core::pac::{
    pac_experiment, PacConfig, TargetRule, VoteDistribution, VoteSizeLaw,
};
use abcs_core::reductions::{
    parse_cnf, parse_graph, reduce_is_to_cc_verification, reduce_is_to_target_abcs,
    reduce_sat_to_seqcc_verification, reduce_sat_to_target_seq, ReductionError,
};
use abcs_core::solvers::{erm_abcs, erm_seq, target_abcs, target_seq_thiele, LabeledSample};
use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "abcs",
    version,
    about = "Exact workbench for approval-based committee scoring rules"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Score committees with a bivariate rule.
    Abcs,
    /// Build the committee greedily with a univariate rule.
    Seq,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Reduction {
    /// Graph + K -> profile/committee asking for a distinguishing bivariate rule.
    AbcsTarget,
    /// Graph + K -> profile/committee whose CC-winner status encodes independence.
    AbcsCc,
    /// 2P2N CNF -> profile/committee asking for a distinguishing greedy rule.
    SeqTarget,
    /// 2P2N CNF -> profile/committee whose greedy-CC status encodes satisfiability.
    SeqCc,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the winning committees of a profile under a rule.
    Winners {
        /// cc, av, trivial, seq-cc, or a rule file path.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        profile: PathBuf,
        /// Force bivariate or greedy semantics (default: inferred from the rule).
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Check whether a committee wins; prints yes/no, exits 0/1.
    Verify {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        profile: PathBuf,
        /// Committee as space-separated alternative names (default: the
        /// profile file's `committee` line).
        #[arg(long)]
        committee: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Find a non-trivial bivariate rule making the committee win, or "none".
    TargetAbcs {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        committee: Option<String>,
        /// Write the witness rule here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a non-trivial greedy rule reaching the committee, or "none".
    TargetSeq {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        committee: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a rule to labeled sample profiles, or "none" if impossible.
    Learn {
        /// Sample file: profile blocks, each with a `winners` section.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learning-curve experiment; emits CSV rows budget,seed,error,consistent.
    Pac {
        /// cc, av, trivial, seq-cc, or a rule file path.
        #[arg(long)]
        target: String,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Voters per sampled profile.
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Comma-separated training budgets, one CSV row each.
        #[arg(long, required = true, value_delimiter = ',')]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        test_count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// "uniform" or "constant:<size>".
        #[arg(long, default_value = "uniform")]
        size_law: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a hardness instance from a graph or CNF file.
    GenReduction {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        which: Reduction,
        /// Independent-set size (graph reductions only).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a shattered profile family to a directory.
    GenShatter {
        /// With --m: the bivariate family on m alternatives. Without: the
        /// greedy family for committee size k.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Re-verify a generated family directory; prints pass/fail per check.
    CheckConstruction {
        #[arg(long)]
        dir: PathBuf,
    },
}

/// Everything a subcommand can fail with, tagged with the exit code it maps
/// to. Semantic outcomes are not errors; they come back as exit codes.
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 2 }
    }

    fn cap(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 3 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

macro_rules! from_input_error {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::input(e.to_string())
            }
        }
    )*};
}

from_input_error!(
    abcs_core::io::IoError,
    abcs_core::model::ModelError,
    abcs_core::eval::EvalError,
    abcs_core::solvers::SolverError,
    abcs_core::pac::PacError,
    std::io::Error
);

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::CapExceeded { .. } => CliError::cap(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::TooManyPoints { .. } => CliError::cap(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// A rule with its evaluation semantics settled.
enum ResolvedRule {
    Bivariate(BivariateScoring),
    Univariate(UnivariateScoring),
}

/// Resolve a named built-in or rule file against the election dimensions.
/// `--mode` overrides the natural reading: cc/av/trivial become greedy
/// univariate rules under `seq`, and a univariate rule file under `abcs` is
/// lifted to its bivariate form.
fn resolve_rule(spec: &str, m: usize, k: usize, mode: Option<Mode>) -> Result<ResolvedRule, CliError> {
    let named: Option<ResolvedRule> = match spec {
        "cc" => Some(match mode {
            Some(Mode::Seq) => ResolvedRule::Univariate(UnivariateScoring::cc(k)),
            _ => ResolvedRule::Bivariate(BivariateScoring::cc(m, k)?),
        }),
        "av" => Some(match mode {
            Some(Mode::Seq) => ResolvedRule::Univariate(UnivariateScoring::av(k)),
            _ => ResolvedRule::Bivariate(BivariateScoring::av(m, k)?),
        }),
        "trivial" => Some(match mode {
            Some(Mode::Seq) => ResolvedRule::Univariate(UnivariateScoring::trivial(k)),
            _ => ResolvedRule::Bivariate(BivariateScoring::trivial(m, k)?),
        }),
        "seq-cc" => match mode {
            Some(Mode::Abcs) => {
                return Err(CliError::input("seq-cc is a greedy rule; drop --mode abcs"))
            }
            _ => Some(ResolvedRule::Univariate(UnivariateScoring::cc(k))),
        },
        _ => None,
    };
    if let Some(rule) = named {
        return Ok(rule);
    }
    let text = read_file(Path::new(spec))?;
    Ok(match (parse_rule(&text)?, mode) {
        (ParsedRule::Bivariate(_), Some(Mode::Seq)) => {
            return Err(CliError::input("bivariate rule file cannot run in seq mode"))
        }
        (r @ ParsedRule::Bivariate(_), _) => ResolvedRule::Bivariate(r.to_bivariate(m, k)?),
        (r @ ParsedRule::Univariate(_), Some(Mode::Abcs)) => {
            ResolvedRule::Bivariate(BivariateScoring::from_univariate(m, &r.to_univariate(k)?)?)
        }
        (r @ ParsedRule::Univariate(_), _) => ResolvedRule::Univariate(r.to_univariate(k)?),
    })
}

fn parse_committee_arg(names: &Names, text: &str) -> Result<Committee, CliError> {
    let mut members = BTreeSet::new();
    for token in text.split_whitespace() {
        let a = names
            .index_of(token)
            .ok_or_else(|| CliError::input(format!("unknown alternative '{token}'")))?;
        members.insert(a.0);
    }
    if members.is_empty() {
        return Err(CliError::input("empty committee"));
    }
    Ok(Committee::new(members)?)
}

/// The committee to act on: the flag if given, else the profile file's own
/// `committee` label.
fn committee_for(block: &ProfileBlock, flag: &Option<String>) -> Result<Committee, CliError> {
    match flag {
        Some(text) => parse_committee_arg(&block.names, text),
        None => block.committee.clone().ok_or_else(|| {
            CliError::input("no committee: pass --committee or label the profile file")
        }),
    }
}

fn format_committee(c: &Committee, names: &Names) -> String {
    let parts: Vec<&str> = c.members().iter().map(|&a| names.name(a)).collect();
    parts.join(" ")
}

fn shatter_cap() -> Result<usize, CliError> {
    match std::env::var("ABCS_SHATTER_CAP") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::input(format!("bad ABCS_SHATTER_CAP value '{v}'"))),
        Err(_) => Ok(SHATTER_ENUM_CAP),
    }
}

fn run(cmd: Cmd) -> Result<u8, CliError> {
    match cmd {
        Cmd::Winners { rule, profile, mode } => {
            let block = parse_profile(&read_file(&profile)?)?;
            let committees: Vec<Committee> =
                match resolve_rule(&rule, block.profile.m(), block.k, mode)? {
                    ResolvedRule::Bivariate(f) => abcs_winners(&f, &block.profile)?,
                    ResolvedRule::Univariate(s) => {
                        seq_winners(&s, &block.profile)?.into_iter().collect()
                    }
                };
            let mut out = String::new();
            for c in &committees {
                out.push_str(&format_committee(c, &block.names));
                out.push('\n');
            }
            print!("{out}");
            Ok(0)
        }
        Cmd::Verify { rule, profile, committee, mode } => {
            let block = parse_profile(&read_file(&profile)?)?;
            let target = committee_for(&block, &committee)?;
            let wins = match resolve_rule(&rule, block.profile.m(), block.k, mode)? {
                ResolvedRule::Bivariate(f) => verify_abcs_winner(&f, &block.profile, &target)?,
                ResolvedRule::Univariate(s) => verify_seq_winner(&s, &block.profile, &target)?,
            };
            println!("{}", if wins { "yes" } else { "no" });
            Ok(u8::from(!wins))
        }
        Cmd::TargetAbcs { profile, committee, out } => {
            let block = parse_profile(&read_file(&profile)?)?;
            let target = committee_for(&block, &committee)?;
            match target_abcs(&block.profile, &target, block.k)? {
                Some(f) => {
                    write_output(&out, &emit_bivariate(&f))?;
                    Ok(0)
                }
                None => {
                    println!("none");
                    Ok(1)
                }
            }
        }
        Cmd::TargetSeq { profile, committee, out } => {
            let block = parse_profile(&read_file(&profile)?)?;
            let target = committee_for(&block, &committee)?;
            match target_seq_thiele(&block.profile, &target, block.k)? {
                Some(s) => {
                    write_output(&out, &emit_univariate(&s))?;
                    Ok(0)
                }
                None => {
                    println!("none");
                    Ok(1)
                }
            }
        }
        Cmd::Learn { samples, mode, out } => {
            let blocks = parse_samples(&read_file(&samples)?)?;
            let first = blocks
                .first()
                .ok_or_else(|| CliError::input("sample file holds no profiles"))?;
            let (m, k) = (first.profile.m(), first.k);
            let mut labeled = Vec::with_capacity(blocks.len());
            for (i, b) in blocks.iter().enumerate() {
                let winners = b.winners.clone().ok_or_else(|| {
                    CliError::input(format!("sample {} has no winners section", i + 1))
                })?;
                labeled.push(LabeledSample::new(b.profile.clone(), winners)?);
            }
            let fitted = match mode {
                Mode::Abcs => erm_abcs(m, k, &labeled)?.map(|f| emit_bivariate(&f)),
                Mode::Seq => erm_seq(k, &labeled)?.map(|s| emit_univariate(&s)),
            };
            match fitted {
                Some(text) => {
                    write_output(&out, &text)?;
                    Ok(0)
                }
                None => {
                    println!("none");
                    Ok(1)
                }
            }
        }
        Cmd::Pac {
            target,
            mode,
            m,
            k,
            n,
            budgets,
            test_count,
            seed,
            size_law,
            out,
        } => {
            let size_law = match size_law.as_str() {
                "uniform" => VoteSizeLaw::Uniform,
                other => match other.strip_prefix("constant:").and_then(|s| s.parse().ok()) {
                    Some(size) => VoteSizeLaw::Constant(size),
                    None => {
                        return Err(CliError::input(format!(
                            "bad --size-law '{other}': use uniform or constant:<size>"
                        )))
                    }
                },
            };
            let target = match resolve_rule(&target, m, k, mode)? {
                ResolvedRule::Bivariate(f) => TargetRule::Abcs(f),
                ResolvedRule::Univariate(s) => TargetRule::Seq(s),
            };
            let cfg = PacConfig::new(
                m,
                k,
                n,
                budgets,
                test_count,
                VoteDistribution { size_law, uniform_subset: true },
                seed,
                target,
            )?;
            let report = pac_experiment(&cfg)?;
            write_output(&out, &report.to_csv())?;
            Ok(0)
        }
        Cmd::GenReduction { input, which, k, out } => {
            let text = read_file(&input)?;
            let need_k = || {
                k.ok_or_else(|| CliError::input("graph reductions need --k (independent-set size)"))
            };
            let instance = match which {
                Reduction::AbcsTarget => reduce_is_to_target_abcs(&parse_graph(&text)?, need_k()?)?,
                Reduction::AbcsCc => {
                    reduce_is_to_cc_verification(&parse_graph(&text)?, need_k()?)?
                }
                Reduction::SeqTarget => {
                    if k.is_some() {
                        return Err(CliError::input("--k is fixed by the CNF; drop it"));
                    }
                    reduce_sat_to_target_seq(&parse_cnf(&text)?)?
                }
                Reduction::SeqCc => {
                    if k.is_some() {
                        return Err(CliError::input("--k is fixed by the CNF; drop it"));
                    }
                    reduce_sat_to_seqcc_verification(&parse_cnf(&text)?)?
                }
            };
            let block = ProfileBlock {
                profile: instance.profile,
                k: instance.k,
                names: instance.names,
                committee: Some(instance.committee),
                winners: None,
            };
            write_output(&out, &emit_profile(&block))?;
            Ok(0)
        }
        Cmd::GenShatter { m, k, out_dir } => {
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", out_dir.display())))?;
            let (header, points) = match m {
                Some(m) => {
                    let family = abcs_shatter_family(m, k)?;
                    (format!("abcs {m} {k}"), family_blocks(&family))
                }
                None => {
                    let family = seq_shatter_family(k)?;
                    (format!("seq {k}"), family_blocks(&family))
                }
            };
            let mut manifest = format!("{header}\n");
            for (i, (coords, block)) in points.iter().enumerate() {
                let filename = format!("profile_{i:03}.txt");
                let coord_text: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
                manifest.push_str(&format!("{filename} {}\n", coord_text.join(" ")));
                std::fs::write(out_dir.join(&filename), emit_profile(block))
                    .map_err(|e| CliError::input(format!("cannot write {filename}: {e}")))?;
            }
            std::fs::write(out_dir.join("manifest.txt"), manifest)
                .map_err(|e| CliError::input(format!("cannot write manifest: {e}")))?;
            println!("{} profiles", points.len());
            Ok(0)
        }
        Cmd::CheckConstruction { dir } => check_construction(&dir),
    }
}

/// Serialize each shattered point as a profile block: the `winners` section
/// lists the positive committee first, the negative one second.
fn family_blocks<R>(family: &ShatterFamily<R>) -> Vec<(Vec<usize>, ProfileBlock)> {
    family
        .points
        .iter()
        .map(|p| {
            (
                p.coords.clone(),
                ProfileBlock {
                    profile: p.profile.clone(),
                    k: family.k,
                    names: Names::default_for(family.m),
                    committee: None,
                    winners: Some(vec![p.pos.clone(), p.neg.clone()]),
                },
            )
        })
        .collect()
}

/// Rebuild the family named by the manifest, confirm the directory matches
/// it file by file, then run both exhaustive shattering checks.
fn check_construction(dir: &Path) -> Result<u8, CliError> {
    let manifest = read_file(&dir.join("manifest.txt"))?;
    let mut lines = manifest.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let parse_dim = |s: &&str| -> Result<usize, CliError> {
        s.parse()
            .map_err(|_| CliError::input(format!("bad manifest dimension '{s}'")))
    };
    enum Family {
        Abcs(ShatterFamily<BivariateScoring>),
        Seq(ShatterFamily<UnivariateScoring>),
    }
    let family = match header.as_slice() {
        ["abcs", m, k] => Family::Abcs(abcs_shatter_family(parse_dim(&m)?, parse_dim(&k)?)?),
        ["seq", k] => Family::Seq(seq_shatter_family(parse_dim(&k)?)?),
        _ => return Err(CliError::input("manifest header must be 'abcs <m> <k>' or 'seq <k>'")),
    };
    let (len, blocks) = match &family {
        Family::Abcs(f) => (f.len(), family_blocks(f)),
        Family::Seq(f) => (f.len(), family_blocks(f)),
    };
    let cap = shatter_cap()?;
    if len > cap {
        return Err(CliError::cap(format!(
            "family has {len} points; exhaustive check capped at {cap} (ABCS_SHATTER_CAP)"
        )));
    }

    let mut listed = 0usize;
    for (i, line) in lines.enumerate() {
        let mut parts = line.split_whitespace();
        let filename = parts
            .next()
            .ok_or_else(|| CliError::input(format!("manifest line {} is empty", i + 2)))?;
        let coords: Vec<usize> = parts
            .map(|t| parse_dim(&t))
            .collect::<Result<_, _>>()?;
        let (expected_coords, expected) = blocks
            .get(i)
            .ok_or_else(|| CliError::input("manifest lists more points than the family has"))?;
        if coords != *expected_coords {
            println!("integrity fail ({filename}: unexpected coordinates)");
            return Ok(1);
        }
        let block = parse_profile(&read_file(&dir.join(filename))?)?;
        if block.profile != expected.profile
            || block.k != expected.k
            || block.winners != expected.winners
        {
            println!("integrity fail ({filename} differs from the rebuilt point)");
            return Ok(1);
        }
        listed += 1;
    }
    if listed != len {
        println!("integrity fail (manifest lists {listed} of {len} points)");
        return Ok(1);
    }
    println!("integrity pass ({len} points)");

    let (n_ok, g_ok) = match &family {
        Family::Abcs(f) => (
            abcs_core::constructions::verify_n_shattering(f, bivariate_winner_sets)?,
            abcs_core::constructions::verify_g_shattering(f, bivariate_winner_sets)?,
        ),
        Family::Seq(f) => (
            abcs_core::constructions::verify_n_shattering(f, seq_winner_sets)?,
            abcs_core::constructions::verify_g_shattering(f, seq_winner_sets)?,
        ),
    };
    println!("n-shattering {}", if n_ok { "pass" } else { "fail" });
    println!("g-shattering {}", if g_ok { "pass" } else { "fail" });
    Ok(u8::from(!(n_ok && g_ok)))
}
