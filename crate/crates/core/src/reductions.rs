//! Reductions from graph independence and structured satisfiability to
//! rule-learning and winner-verification instances, with brute-force oracles
//! and DIMACS-style parsing for both input kinds.

use crate::model::{pair_domain, x_min, Committee, ModelError, Names, Profile};
use itertools::Itertools;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

/// Default size cap for the brute-force oracles.
pub const DEFAULT_BRUTE_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {v} out of range for {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("self-loop at vertex {v}")]
    SelfLoop { v: usize },
    #[error("maximum degree is {delta}, need at least 2")]
    MaxDegreeTooSmall { delta: usize },
    #[error("committee size {k} must satisfy 2 <= k <= {n}")]
    BadCommitteeSize { k: usize, n: usize },
    #[error("variable {var} occurs {pos} times positively and {neg} negatively, need 2 and 2")]
    NotTwoPosTwoNeg { var: usize, pos: usize, neg: usize },
    #[error("clause {index} has {size} literals, need exactly 3")]
    BadClauseSize { index: usize, size: usize },
    #[error("literal {lit} out of range for {r} variables")]
    LiteralOutOfRange { lit: i32, r: usize },
    #[error("formula has no variables")]
    NoVariables,
    #[error("instance size {got} exceeds the brute-force cap {cap}")]
    CapExceeded { got: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn perr(line: usize, msg: impl Into<String>) -> ReductionError {
    ReductionError::Parse { line, msg: msg.into() }
}

/// A simple undirected graph on vertices `0..n`, edges stored as (u, v)
/// with u < v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ReductionError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(ReductionError::SelfLoop { v });
            }
            if u >= n || v >= n {
                return Err(ReductionError::VertexOutOfRange { v: u.max(v), n });
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }
}

/// Parse a DIMACS-style graph: `c` comments, `p edge <n> <m>` header, then
/// `e <u> <v>` lines with 1-based endpoints. The declared edge count is not
/// enforced; duplicate edges collapse.
pub fn parse_graph(text: &str) -> Result<Graph, ReductionError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "p" => {
                if n.is_some() {
                    return Err(perr(no, "second problem line"));
                }
                if tokens.len() != 4 || tokens[1] != "edge" {
                    return Err(perr(no, "expected 'p edge <vertices> <edges>'"));
                }
                let v: usize = tokens[2]
                    .parse()
                    .map_err(|_| perr(no, format!("bad vertex count '{}'", tokens[2])))?;
                tokens[3]
                    .parse::<usize>()
                    .map_err(|_| perr(no, format!("bad edge count '{}'", tokens[3])))?;
                n = Some(v);
            }
            "e" => {
                let n = n.ok_or_else(|| perr(no, "edge before problem line"))?;
                if tokens.len() != 3 {
                    return Err(perr(no, "expected 'e <u> <v>'"));
                }
                let u: usize = tokens[1]
                    .parse()
                    .map_err(|_| perr(no, format!("bad endpoint '{}'", tokens[1])))?;
                let v: usize = tokens[2]
                    .parse()
                    .map_err(|_| perr(no, format!("bad endpoint '{}'", tokens[2])))?;
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(perr(no, format!("endpoint out of range 1..={n}")));
                }
                if u == v {
                    return Err(perr(no, format!("self-loop at vertex {u}")));
                }
                edges.push((u - 1, v - 1));
            }
            other => return Err(perr(no, format!("unexpected line kind '{other}'"))),
        }
    }
    let n = n.ok_or_else(|| perr(text.lines().count().max(1), "missing problem line"))?;
    Graph::new(n, edges)
}

pub fn emit_graph(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "p edge {} {}", g.n, g.edges.len()).unwrap();
    for &(u, v) in &g.edges {
        writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
    }
    out
}

/// A 3-CNF formula in which every variable occurs exactly twice positively
/// and twice negatively (so the clause count is 4r/3). Clauses keep their
/// three literal slots as given; repeated literals within a clause are legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf2p2n {
    r: usize,
    clauses: Vec<[i32; 3]>,
}

impl Cnf2p2n {
    pub fn new(r: usize, clauses: Vec<[i32; 3]>) -> Result<Self, ReductionError> {
        if r == 0 {
            return Err(ReductionError::NoVariables);
        }
        let mut pos = vec![0usize; r + 1];
        let mut neg = vec![0usize; r + 1];
        for clause in &clauses {
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > r {
                    return Err(ReductionError::LiteralOutOfRange { lit, r });
                }
                if lit > 0 {
                    pos[var] += 1;
                } else {
                    neg[var] += 1;
                }
            }
        }
        for var in 1..=r {
            if pos[var] != 2 || neg[var] != 2 {
                return Err(ReductionError::NotTwoPosTwoNeg {
                    var,
                    pos: pos[var],
                    neg: neg[var],
                });
            }
        }
        Ok(Cnf2p2n { r, clauses })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn t(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }
}

/// Parse a DIMACS CNF: `c` comments, `p cnf <vars> <clauses>`, then
/// 0-terminated literal lists (line breaks are not significant). Enforces
/// three literals per clause and the two-positive/two-negative occurrence
/// pattern.
pub fn parse_cnf(text: &str) -> Result<Cnf2p2n, ReductionError> {
    let mut r: Option<usize> = None;
    let mut clauses: Vec<[i32; 3]> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        last_line = no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if r.is_some() {
                return Err(perr(no, "second problem line"));
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 4 || tokens[1] != "cnf" {
                return Err(perr(no, "expected 'p cnf <variables> <clauses>'"));
            }
            let vars: usize = tokens[2]
                .parse()
                .map_err(|_| perr(no, format!("bad variable count '{}'", tokens[2])))?;
            tokens[3]
                .parse::<usize>()
                .map_err(|_| perr(no, format!("bad clause count '{}'", tokens[3])))?;
            r = Some(vars);
            continue;
        }
        let r_known = r.ok_or_else(|| perr(no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let lit: i32 =
                tok.parse().map_err(|_| perr(no, format!("bad literal '{tok}'")))?;
            if lit == 0 {
                let size = current.len();
                let arr: [i32; 3] = current
                    .clone()
                    .try_into()
                    .map_err(|_| ReductionError::BadClauseSize { index: clauses.len() + 1, size })?;
                clauses.push(arr);
                current.clear();
            } else {
                if lit.unsigned_abs() as usize > r_known {
                    return Err(ReductionError::LiteralOutOfRange { lit, r: r_known });
                }
                current.push(lit);
            }
        }
    }
    let r = r.ok_or_else(|| perr(last_line, "missing problem line"))?;
    if !current.is_empty() {
        return Err(perr(last_line, "unterminated clause (missing trailing 0)"));
    }
    Cnf2p2n::new(r, clauses)
}

pub fn emit_cnf(phi: &Cnf2p2n) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", phi.r, phi.clauses.len()).unwrap();
    for clause in &phi.clauses {
        writeln!(out, "{} {} {} 0", clause[0], clause[1], clause[2]).unwrap();
    }
    out
}

/// Equalize original-vertex degrees: give every original vertex pendant
/// dummy neighbors until it reaches the maximum degree. Original indices are
/// preserved as a prefix; dummies follow in vertex-scan order.
pub fn pad_graph(g: &Graph) -> Result<Graph, ReductionError> {
    let delta = g.max_degree();
    if delta < 2 {
        return Err(ReductionError::MaxDegreeTooSmall { delta });
    }
    let mut edges: Vec<(usize, usize)> = g.edges.iter().copied().collect();
    let mut next = g.n;
    for v in 0..g.n {
        for _ in g.degree(v)..delta {
            edges.push((v, next));
            next += 1;
        }
    }
    Graph::new(next, edges)
}

/// A generated decision instance: an election, the committee whose winning
/// status is in question, and display names for emission.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub profile: Profile,
    pub committee: Committee,
    pub k: usize,
    pub names: Names,
}

fn graph_names(r: usize, with_d: bool) -> Names {
    let mut names: Vec<String> = (1..=r).map(|i| format!("a{i}")).collect();
    names.extend((1..=r).map(|i| format!("b{i}")));
    names.push("c".into());
    if with_d {
        names.push("d".into());
    }
    Names::new(names).expect("generated names are valid")
}

/// Map an independence question to a bivariate-rule learnability question:
/// the graph has an independent set of size k if and only if NO non-trivial
/// bivariate rule makes the returned committee winning.
///
/// Alternatives: a_1..a_r, b_1..b_r, c, d over the degree-padded graph.
/// Part 1 holds one {b_u, b_v} vote per edge; part 2 holds kΔ-1 copies of
/// {a_i, b_j} for all i, j, {a_i, c} and {b_i, d} for all i, {a_1, d} and
/// {c, d}; part 3 holds, for every non-base domain pair (x, y) other than
/// (1,2) and (2,2), a vote {d, a_1..a_{x-1}} filled to size y from the pool
/// a_{k+1}..a_r, b_1..b_r, c in that order. (The pool needs c: at (1, m-k)
/// it must supply m-k-1 = 2r-k+1 alternatives, one more than the a- and
/// b-parts hold.)
pub fn reduce_is_to_target_abcs(
    g: &Graph,
    k: usize,
) -> Result<ReducedInstance, ReductionError> {
    if k < 2 || k > g.n() {
        return Err(ReductionError::BadCommitteeSize { k, n: g.n() });
    }
    let delta = g.max_degree();
    let padded = pad_graph(g)?;
    let r = padded.n();
    let m = 2 * r + 2;
    let (c, d) = (2 * r, 2 * r + 1);
    let w = (k * delta - 1) as u64;

    let mut votes: Vec<(Vec<usize>, u64)> = Vec::new();
    for &(u, v) in padded.edges() {
        votes.push((vec![r + u, r + v], 1));
    }
    for i in 0..r {
        for j in 0..r {
            votes.push((vec![i, r + j], w));
        }
    }
    for i in 0..r {
        votes.push((vec![i, c], w));
    }
    for j in 0..r {
        votes.push((vec![r + j, d], w));
    }
    votes.push((vec![0, d], w));
    votes.push((vec![c, d], w));

    let pool: Vec<usize> = (k..r).chain(r..2 * r).chain([c]).collect();
    for &(x, y) in pair_domain(m, k)?.pairs() {
        if x == x_min(m, k, y) || (x, y) == (1, 2) || (x, y) == (2, 2) {
            continue;
        }
        let mut vote = vec![d];
        vote.extend(0..x - 1);
        vote.extend(pool[..y - x].iter().copied());
        votes.push((vote, 1));
    }

    Ok(ReducedInstance {
        profile: Profile::from_votes(m, votes)?,
        committee: Committee::new(0..k)?,
        k,
        names: graph_names(r, true),
    })
}

/// The winner-verification variant: the graph has an independent set of
/// size k if and only if the returned committee is NOT winning under the
/// one-point-per-covered-vote rule. Alternatives a_1..a_r, b_1..b_r, c;
/// part 1 as above; part 2 holds kΔ-1 copies of {a_i, b_j} for all i, j
/// and of {a_1, c}.
pub fn reduce_is_to_cc_verification(
    g: &Graph,
    k: usize,
) -> Result<ReducedInstance, ReductionError> {
    if k < 2 || k > g.n() {
        return Err(ReductionError::BadCommitteeSize { k, n: g.n() });
    }
    let delta = g.max_degree();
    let padded = pad_graph(g)?;
    let r = padded.n();
    let m = 2 * r + 1;
    let w = (k * delta - 1) as u64;

    let mut votes: Vec<(Vec<usize>, u64)> = Vec::new();
    for &(u, v) in padded.edges() {
        votes.push((vec![r + u, r + v], 1));
    }
    for i in 0..r {
        for j in 0..r {
            votes.push((vec![i, r + j], w));
        }
    }
    votes.push((vec![0, 2 * r], w));

    Ok(ReducedInstance {
        profile: Profile::from_votes(m, votes)?,
        committee: Committee::new(0..k)?,
        k,
        names: graph_names(r, false),
    })
}

struct SeqLayout {
    r: usize,
    t: usize,
}

impl SeqLayout {
    // Index layout: p, w_1..w_7, then per variable the positive and negative
    // literal, then clauses, specials, z, and dummies (literal dummies
    // interleaved, then special, padding, and w dummies).
    fn literal(&self, lit: i32) -> usize {
        let var = lit.unsigned_abs() as usize - 1;
        8 + 2 * var + usize::from(lit < 0)
    }

    fn clause(&self, j: usize) -> usize {
        8 + 2 * self.r + j
    }

    fn special(&self, j: usize) -> usize {
        8 + 2 * self.r + self.t + j
    }

    fn z(&self) -> usize {
        8 + 2 * self.r + 2 * self.t
    }

    fn literal_dummy(&self, lit: i32) -> usize {
        self.z() + 1 + (self.literal(lit) - 8)
    }

    fn special_dummy(&self, j: usize) -> usize {
        self.z() + 1 + 2 * self.r + j
    }

    fn p_dummy(&self, j: usize) -> usize {
        self.z() + 1 + 2 * self.r + self.t + j
    }

    fn w_dummy(&self, i: usize, j: usize) -> usize {
        self.z() + 1 + 2 * self.r + self.t + 9 + 6 * i + j
    }
}

fn seq_names(r: usize, t: usize) -> Names {
    let mut names: Vec<String> = vec!["p".into()];
    names.extend((1..=7).map(|i| format!("w{i}")));
    for i in 1..=r {
        names.push(format!("x{i}"));
        names.push(format!("nx{i}"));
    }
    names.extend((1..=t).map(|j| format!("c{j}")));
    names.extend((1..=t).map(|j| format!("s{j}")));
    names.push("z".into());
    for i in 1..=r {
        names.push(format!("dx{i}"));
        names.push(format!("dnx{i}"));
    }
    names.extend((1..=t).map(|j| format!("ds{j}")));
    names.extend((1..=9).map(|j| format!("dp{j}")));
    for i in 1..=7 {
        names.extend((1..=6).map(|j| format!("dw{i}_{j}")));
    }
    Names::new(names).expect("generated names are valid")
}

/// The clause-and-literal votes shared by both satisfiability reductions:
/// per variable, a triple-weight {x, nx} vote and one dummy vote per
/// literal; per clause, one vote with each literal occurrence, a
/// double-weight vote with its special alternative, and the special's dummy
/// vote.
fn sat_core_votes(
    phi: &Cnf2p2n,
    lit: impl Fn(i32) -> usize,
    clause: impl Fn(usize) -> usize,
    special: impl Fn(usize) -> usize,
    lit_dummy: impl Fn(i32) -> usize,
    special_dummy: impl Fn(usize) -> usize,
) -> Vec<(Vec<usize>, u64)> {
    let mut votes: Vec<(Vec<usize>, u64)> = Vec::new();
    for i in 1..=phi.r() as i32 {
        votes.push((vec![lit(i), lit(-i)], 3));
        votes.push((vec![lit(i), lit_dummy(i)], 1));
        votes.push((vec![lit(-i), lit_dummy(-i)], 1));
    }
    for (j, cl) in phi.clauses().iter().enumerate() {
        for &l in cl {
            votes.push((vec![clause(j), lit(l)], 1));
        }
        votes.push((vec![clause(j), special(j)], 2));
        votes.push((vec![special(j), special_dummy(j)], 1));
    }
    votes
}

/// Map structured satisfiability to a greedy-rule learnability question:
/// the formula is satisfiable if and only if SOME non-trivial univariate
/// rule can reach the returned committee greedily.
///
/// Committee size is 2r+t+8; the committee holds the eight padding
/// alternatives, all literals, and all clause alternatives. Part 1 encodes
/// the formula; part 2 ties padding alternatives to z and private dummies;
/// part 3 holds, for each of the k+t committee-or-special alternatives, one
/// size-(k+t) vote replacing that alternative with z.
pub fn reduce_sat_to_target_seq(phi: &Cnf2p2n) -> Result<ReducedInstance, ReductionError> {
    let (r, t) = (phi.r(), phi.t());
    let lay = SeqLayout { r, t };
    let k = 2 * r + t + 8;
    let m = 4 * r + 3 * t + 60;

    let mut votes = sat_core_votes(
        phi,
        |l| lay.literal(l),
        |j| lay.clause(j),
        |j| lay.special(j),
        |l| lay.literal_dummy(l),
        |j| lay.special_dummy(j),
    );
    votes.push((vec![0, lay.z()], 1));
    for j in 0..9 {
        votes.push((vec![0, lay.p_dummy(j)], 1));
    }
    for i in 0..7 {
        votes.push((vec![1 + i, lay.z()], 1));
        for j in 0..6 {
            votes.push((vec![1 + i, lay.w_dummy(i, j)], 1));
        }
    }
    // The committee-or-special prefix 0..k+t, with z sitting at index k+t.
    for i in 0..k + t {
        let vote: Vec<usize> = (0..=k + t).filter(|&a| a != i).collect();
        votes.push((vote, 1));
    }

    Ok(ReducedInstance {
        profile: Profile::from_votes(m, votes)?,
        committee: Committee::new(0..k)?,
        k,
        names: seq_names(r, t),
    })
}

/// The winner-verification variant for the greedy one-point rule: the
/// formula is satisfiable if and only if the returned committee (all
/// literals and clause alternatives, k = 2r+t) is greedily reachable.
/// The profile is the formula part alone, over m = 4r+3t alternatives.
pub fn reduce_sat_to_seqcc_verification(
    phi: &Cnf2p2n,
) -> Result<ReducedInstance, ReductionError> {
    let (r, t) = (phi.r(), phi.t());
    let k = 2 * r + t;
    let m = 4 * r + 3 * t;
    let lit = |l: i32| 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0);
    let clause = |j: usize| 2 * r + j;
    let special = |j: usize| 2 * r + t + j;
    let lit_dummy = move |l: i32| 2 * r + 2 * t + lit(l);
    let special_dummy = move |j: usize| 4 * r + 2 * t + j;

    let votes = sat_core_votes(phi, lit, clause, special, lit_dummy, special_dummy);

    let mut names: Vec<String> = Vec::new();
    for i in 1..=r {
        names.push(format!("x{i}"));
        names.push(format!("nx{i}"));
    }
    names.extend((1..=t).map(|j| format!("c{j}")));
    names.extend((1..=t).map(|j| format!("s{j}")));
    for i in 1..=r {
        names.push(format!("dx{i}"));
        names.push(format!("dnx{i}"));
    }
    names.extend((1..=t).map(|j| format!("ds{j}")));

    Ok(ReducedInstance {
        profile: Profile::from_votes(m, votes)?,
        committee: Committee::new(0..k)?,
        k,
        names: Names::new(names).expect("generated names are valid"),
    })
}

/// Does the graph contain an independent set of the given size? Exhaustive;
/// refuses graphs larger than the cap.
pub fn brute_independent_set_with_cap(
    g: &Graph,
    k: usize,
    cap: usize,
) -> Result<bool, ReductionError> {
    if g.n() > cap {
        return Err(ReductionError::CapExceeded { got: g.n(), cap });
    }
    if k > g.n() {
        return Ok(false);
    }
    let mut adj = vec![0u64; g.n()];
    for &(u, v) in g.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    Ok((0..g.n()).combinations(k).any(|set| {
        let mask: u64 = set.iter().map(|&v| 1u64 << v).sum();
        set.iter().all(|&v| adj[v] & mask == 0)
    }))
}

pub fn brute_independent_set(g: &Graph, k: usize) -> Result<bool, ReductionError> {
    brute_independent_set_with_cap(g, k, DEFAULT_BRUTE_CAP)
}

/// First satisfying assignment in ascending binary order (variable 1 is the
/// least-significant bit), or None. Refuses formulas beyond the cap.
pub fn brute_sat_with_cap(
    phi: &Cnf2p2n,
    cap: usize,
) -> Result<Option<Vec<bool>>, ReductionError> {
    let r = phi.r();
    if r > cap {
        return Err(ReductionError::CapExceeded { got: r, cap });
    }
    for mask in 0u64..1 << r {
        let assignment: Vec<bool> = (0..r).map(|i| mask >> i & 1 == 1).collect();
        if phi.satisfied_by(&assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

pub fn brute_sat(phi: &Cnf2p2n) -> Result<Option<Vec<bool>>, ReductionError> {
    brute_sat_with_cap(phi, DEFAULT_BRUTE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{abcs_score, verify_abcs_winner, verify_seq_winner};
    use crate::model::{BivariateScoring, UnivariateScoring};
    use crate::q;

    fn k3() -> Graph {
        Graph::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    /// Two all-positive and two all-negative clauses over three variables.
    fn phi_sat() -> Cnf2p2n {
        Cnf2p2n::new(3, vec![[1, 2, 3], [1, 2, 3], [-1, -2, -3], [-1, -2, -3]]).unwrap()
    }

    /// Pivot structure that is unsatisfiable: clauses force x2 and not-x2.
    fn phi_unsat() -> Cnf2p2n {
        Cnf2p2n::new(3, vec![[1, 1, 2], [-1, -1, 2], [3, 3, -2], [-3, -3, -2]]).unwrap()
    }

    #[test]
    fn graph_roundtrip_and_errors() {
        let g = k3();
        assert_eq!(parse_graph(&emit_graph(&g)).unwrap(), g);
        assert_eq!(parse_graph("c hi\np edge 3 3\ne 1 2\ne 1 3\ne 2 3\n").unwrap(), g);
        // Duplicate edges collapse.
        assert_eq!(parse_graph("p edge 2 2\ne 1 2\ne 2 1\n").unwrap().edges().len(), 1);
        for bad in ["p edge 2 1\ne 1 3\n", "p edge 2 0\ne 1 1\n", "e 1 2\n", "p foo 1 0\n", ""] {
            assert!(parse_graph(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn cnf_roundtrip_and_errors() {
        let phi = phi_sat();
        assert_eq!(parse_cnf(&emit_cnf(&phi)).unwrap(), phi);
        // Clauses may span lines.
        let split = "p cnf 3 4\n1 2\n3 0 1 2 3 0\n-1 -2 -3 0\n-1 -2 -3 0\n";
        assert_eq!(parse_cnf(split).unwrap(), phi);
        for bad in [
            "p cnf 3 1\n1 2 3 0\n",            // occurrence counts off
            "p cnf 3 4\n1 2 3 0 1 2 3 0 -1 -2 -3 0 -1 -2 -3\n", // unterminated
            "p cnf 2 1\n1 2 3 0\n",            // literal out of range
            "p cnf 3 2\n1 2 0\n",              // short clause
            "1 2 3 0\n",                       // missing header
            "p cnf 0 0\n",                     // no variables
        ] {
            assert!(parse_cnf(bad).is_err(), "{bad:?}");
        }
        // Three positive occurrences of x1.
        let err = Cnf2p2n::new(3, vec![[1, 2, 3], [1, 2, 3], [1, -2, -3], [-1, -2, -3]]);
        assert!(matches!(
            err,
            Err(ReductionError::NotTwoPosTwoNeg { var: 1, pos: 3, neg: 1 })
        ));
    }

    #[test]
    fn padding_examples() {
        assert_eq!(pad_graph(&k3()).unwrap(), k3());

        let padded = pad_graph(&path3()).unwrap();
        assert_eq!(padded.n(), 5);
        assert_eq!(padded.edges().len(), 4);
        assert!((0..3).all(|v| padded.degree(v) == 2));

        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let padded = pad_graph(&star).unwrap();
        assert_eq!(padded.n(), 10);
        assert_eq!(padded.edges().len(), 9);
        assert!((0..4).all(|v| padded.degree(v) == 3));

        let lonely_edge = Graph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            pad_graph(&lonely_edge),
            Err(ReductionError::MaxDegreeTooSmall { delta: 1 })
        ));
    }

    /// The rule every feasible bivariate witness is forced into: one point
    /// for any intersection with a size-2 vote.
    fn forced_rule(m: usize, k: usize) -> BivariateScoring {
        BivariateScoring::new(m, k, [((1, 2), q(1)), ((2, 2), q(1))]).unwrap()
    }

    #[test]
    fn target_abcs_instance_shape() {
        let inst = reduce_is_to_target_abcs(&k3(), 2).unwrap();
        assert_eq!(inst.profile.m(), 8);
        assert_eq!(inst.k, 2);
        assert_eq!(inst.committee, Committee::new([0, 1]).unwrap());
        // 3 edge votes + 17 weighted pair kinds + 10 domain votes.
        assert_eq!(inst.profile.votes().len(), 30);
        assert_eq!(inst.profile.voter_count(), 3 + 3 * 17 + 10);
        let long_votes =
            inst.profile.votes().iter().filter(|v| v.size() > 2).count();
        let singleton_d =
            inst.profile.votes().iter().filter(|v| v.size() == 1).count();
        assert_eq!(long_votes + singleton_d, 10);
        assert_eq!(singleton_d, 1);
    }

    #[test]
    fn target_abcs_forced_rule_scores() {
        // No 2-independent set in a triangle: the committee stays winning.
        let inst = reduce_is_to_target_abcs(&k3(), 2).unwrap();
        let f = forced_rule(8, 2);
        let score = abcs_score(&f, &inst.committee, &inst.profile).unwrap();
        assert_eq!(score, q(27)); // (kΔ-1)(kr+k+1) = 3 * 9
        assert!(verify_abcs_winner(&f, &inst.profile, &inst.committee).unwrap());

        // A path has the 2-independent set {0, 2}: its b-committee overtakes.
        let inst = reduce_is_to_target_abcs(&path3(), 2).unwrap();
        let f = forced_rule(12, 2);
        let score = abcs_score(&f, &inst.committee, &inst.profile).unwrap();
        assert_eq!(score, q(3 * (2 * 5 + 2 + 1)));
        let b_committee = Committee::new([5, 7]).unwrap();
        assert_eq!(
            abcs_score(&f, &b_committee, &inst.profile).unwrap(),
            q(1 + 3 * (2 * 5 + 2 + 1))
        );
        assert!(!verify_abcs_winner(&f, &inst.profile, &inst.committee).unwrap());
    }

    #[test]
    fn target_abcs_rejects_bad_k() {
        assert!(reduce_is_to_target_abcs(&k3(), 1).is_err());
        assert!(reduce_is_to_target_abcs(&k3(), 4).is_err());
    }

    #[test]
    fn cc_verification_matches_independence() {
        // sc_CC(A, P) = (kΔ-1)(kr+1) and A wins iff no 2-independent set.
        let inst = reduce_is_to_cc_verification(&k3(), 2).unwrap();
        assert_eq!(inst.profile.m(), 7);
        let cc = BivariateScoring::cc(7, 2).unwrap();
        let score = abcs_score(&cc, &inst.committee, &inst.profile).unwrap();
        assert_eq!(score, q(3 * 7));
        assert!(verify_abcs_winner(&cc, &inst.profile, &inst.committee).unwrap());

        let inst = reduce_is_to_cc_verification(&path3(), 2).unwrap();
        let cc = BivariateScoring::cc(11, 2).unwrap();
        assert!(!verify_abcs_winner(&cc, &inst.profile, &inst.committee).unwrap());
    }

    #[test]
    fn target_seq_instance_shape() {
        let inst = reduce_sat_to_target_seq(&phi_sat()).unwrap();
        assert_eq!(inst.profile.m(), 84);
        assert_eq!(inst.k, 18);
        assert_eq!(inst.committee, Committee::new(0..18).unwrap());
        // Formula part: 9 variable votes (weight 15) + 20 clause votes
        // (weight 24); padding part: 59; prefix part: 22 votes of size 22.
        assert_eq!(inst.profile.voter_count(), 39 + 59 + 22);
        assert_eq!(inst.profile.votes().len(), 29 + 59 + 22);
        let big: Vec<&crate::model::ApprovalVote> =
            inst.profile.votes().iter().filter(|v| v.size() > 2).collect();
        assert_eq!(big.len(), 22);
        assert!(big.iter().all(|v| v.size() == 22));

        // Appearance counts that drive the first greedy step.
        let count = |a: usize| -> u64 {
            inst.profile
                .votes()
                .iter()
                .filter(|v| v.alternatives.contains(&crate::model::Alternative(a)))
                .map(|v| v.multiplicity)
                .sum()
        };
        assert_eq!(count(0), 31); // p
        assert_eq!(count(1), 28); // w_1
        assert_eq!(count(8), 27); // x_1
        assert_eq!(count(14), 26); // c_1
        assert_eq!(count(18), 24); // s_1
        assert_eq!(count(22), 30); // z
    }

    #[test]
    fn seqcc_verification_tracks_satisfiability() {
        let yes = reduce_sat_to_seqcc_verification(&phi_sat()).unwrap();
        assert_eq!(yes.profile.m(), 24);
        assert_eq!(yes.k, 10);
        let cc = UnivariateScoring::cc(10);
        assert!(verify_seq_winner(&cc, &yes.profile, &yes.committee).unwrap());

        let no = reduce_sat_to_seqcc_verification(&phi_unsat()).unwrap();
        assert!(!verify_seq_winner(&cc, &no.profile, &no.committee).unwrap());
    }

    #[test]
    fn brute_independent_set_examples() {
        assert!(!brute_independent_set(&k3(), 2).unwrap());
        assert!(brute_independent_set(&k3(), 1).unwrap());
        assert!(brute_independent_set(&path3(), 2).unwrap());
        assert!(!brute_independent_set(&path3(), 3).unwrap());
        let empty = Graph::new(4, []).unwrap();
        assert!(brute_independent_set(&empty, 4).unwrap());
        let big = Graph::new(21, []).unwrap();
        assert!(matches!(
            brute_independent_set(&big, 2),
            Err(ReductionError::CapExceeded { got: 21, cap: 20 })
        ));
        assert!(brute_independent_set_with_cap(&big, 2, 21).unwrap());
    }

    #[test]
    fn brute_sat_examples() {
        // Ascending binary order: 0b001 = x1 true already satisfies.
        assert_eq!(brute_sat(&phi_sat()).unwrap(), Some(vec![true, false, false]));
        assert_eq!(brute_sat(&phi_unsat()).unwrap(), None);
    }
}
