//! Shared oracles and enumerators for the acceptance suite: an independent
//! Fourier-Motzkin feasibility decision, exhaustive small grids of scoring
//! rules, canonical graph and formula enumeration, and seeded random
//! instances. Everything here is deliberately naive so that agreement with
//! the library's optimized paths is meaningful evidence.

use std::collections::BTreeSet;

use abcs_core::lp::{LinearSystem, Rel};
use abcs_core::model::{BivariateScoring, Committee, Profile, UnivariateScoring};
use abcs_core::model::{pair_domain, x_max, x_min};
use abcs_core::reductions::{Cnf2p2n, Graph};
use abcs_core::{q, Q};
use itertools::Itertools;
use num::{BigInt, Integer, One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Divide an integer row by the gcd of its entries, keeping signs.
fn reduce_ints(mut ints: Vec<BigInt>) -> Vec<BigInt> {
    let gcd = ints
        .iter()
        .fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !gcd.is_zero() && !gcd.is_one() {
        for v in &mut ints {
            *v /= &gcd;
        }
    }
    ints
}

/// Scale a rational row `a . x <= b` (stored as [a_1..a_n, b]) to coprime
/// integers so that rows equal up to positive scaling coincide.
fn normalize_row(row: Vec<Q>) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    reduce_ints(row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect())
}

/// Decide feasibility of `sys` over nonnegative variables by
/// Fourier-Motzkin elimination: rewrite every constraint in `<=` form, add
/// the implicit `-x_j <= 0` bounds, eliminate one variable at a time by
/// combining each positive-coefficient row with each negative-coefficient
/// row, and read the answer off the surviving constant rows.
pub fn fm_feasible(sys: &LinearSystem) -> bool {
    let n = sys.num_vars();
    let mut rows: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let le_row = |rows: &mut BTreeSet<Vec<BigInt>>, coeffs: Vec<Q>, rhs: Q| {
        let mut row = coeffs;
        row.push(rhs);
        rows.insert(normalize_row(row));
    };
    for c in sys.rows() {
        if c.rel != Rel::Ge {
            le_row(&mut rows, c.coeffs.clone(), c.rhs.clone());
        }
        if c.rel != Rel::Le {
            le_row(&mut rows, c.coeffs.iter().map(|v| -v).collect(), -c.rhs.clone());
        }
    }
    for j in 0..n {
        let mut coeffs = vec![Q::zero(); n];
        coeffs[j] = -Q::one();
        le_row(&mut rows, coeffs, Q::zero());
    }

    for j in 0..n {
        let mut next: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        let mut pos: Vec<Vec<BigInt>> = Vec::new();
        let mut neg: Vec<Vec<BigInt>> = Vec::new();
        for row in rows {
            if row[j].is_positive() {
                pos.push(row);
            } else if row[j].is_negative() {
                neg.push(row);
            } else {
                next.insert(row);
            }
        }
        for p in &pos {
            for q in &neg {
                let a = -&q[j];
                let b = &p[j];
                let combined: Vec<BigInt> =
                    p.iter().zip(q).map(|(x, y)| x * &a + y * b).collect();
                next.insert(reduce_ints(combined));
            }
        }
        for row in &next {
            if row[..n].iter().all(|v| v.is_zero()) && row[n].is_negative() {
                return false;
            }
        }
        rows = next;
    }
    rows.iter().all(|row| !row[n].is_negative())
}

/// All nondecreasing integer vectors of the given length over `0..=bound`.
fn monotone_vectors(len: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; len];
    'next: loop {
        out.push(cur.clone());
        for i in (0..len).rev() {
            if cur[i] < bound {
                cur[i] += 1;
                let v = cur[i];
                for tail in cur[i + 1..].iter_mut() {
                    *tail = v;
                }
                continue 'next;
            }
        }
        return out;
    }
}

/// Every non-trivial nondecreasing integer rule with values in `0..=bound`.
pub fn grid_univariate_rules(k: usize, bound: i64) -> Vec<UnivariateScoring> {
    monotone_vectors(k, bound)
        .into_iter()
        .filter(|values| values.iter().any(|&v| v != 0))
        .map(|values| {
            let mut with_base = vec![0i64];
            with_base.extend(values);
            UnivariateScoring::from_ints(k, &with_base).expect("grid values are valid")
        })
        .collect()
}

/// Every non-trivial bivariate rule with integer values in `0..=bound`,
/// nondecreasing in the intersection size and zero at each vote size's
/// smallest feasible intersection.
pub fn grid_bivariate_rules(m: usize, k: usize, bound: i64) -> Vec<BivariateScoring> {
    let domain = pair_domain(m, k).expect("grid dimensions are valid");
    let per_size: Vec<(usize, Vec<Vec<i64>>)> = (1..m)
        .map(|y| {
            let len = x_max(k, y) - x_min(m, k, y) + 1;
            let mut options = monotone_vectors(len, bound);
            options.retain(|row| row[0] == 0);
            (y, options)
        })
        .collect();
    per_size
        .iter()
        .map(|(_, options)| options.iter())
        .multi_cartesian_product()
        .filter(|choice| choice.iter().any(|row| row.iter().any(|&v| v != 0)))
        .map(|choice| {
            let mut entries = Vec::new();
            for ((y, _), row) in per_size.iter().zip(&choice) {
                for (i, &v) in row.iter().enumerate() {
                    entries.push(((x_min(m, k, *y) + i, *y), q(v)));
                }
            }
            BivariateScoring::new(domain.m(), domain.k(), entries)
                .expect("grid values are valid")
        })
        .collect()
}

/// One representative per isomorphism class of graphs on 3..=max_n labeled
/// vertices (isolated vertices included) whose maximum degree is at least 2.
/// A graph is kept when its edge bitmask is minimal among all vertex
/// relabelings.
pub fn canonical_graphs(max_n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 3..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut slot = vec![vec![0usize; n]; n];
        for (e, &(i, j)) in pairs.iter().enumerate() {
            slot[i][j] = e;
            slot[j][i] = e;
        }
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        'mask: for mask in 0u32..1u32 << pairs.len() {
            for perm in &perms {
                let mut mapped = 0u32;
                for (e, &(i, j)) in pairs.iter().enumerate() {
                    if mask >> e & 1 == 1 {
                        mapped |= 1 << slot[perm[i]][perm[j]];
                    }
                }
                if mapped < mask {
                    continue 'mask;
                }
            }
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(e, _)| mask >> e & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            let g = Graph::new(n, edges).expect("enumerated edges are valid");
            if g.max_degree() >= 2 {
                out.push(g);
            }
        }
    }
    out
}

const VAR_PERMS: [[i32; 3]; 6] =
    [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];

/// Minimal image of a four-clause formula under variable renamings and
/// polarity flips, with clauses and literals sorted.
fn canonical_form(formula: &[[i32; 3]; 4]) -> Vec<[i32; 3]> {
    let mut best: Option<Vec<[i32; 3]>> = None;
    for perm in &VAR_PERMS {
        for flips in 0..8u8 {
            let mut mapped: Vec<[i32; 3]> = formula
                .iter()
                .map(|clause| {
                    let mut image = clause.map(|l| {
                        let var = l.unsigned_abs() as usize;
                        let sign = if flips >> (var - 1) & 1 == 1 { -1 } else { 1 };
                        l.signum() * sign * perm[var - 1]
                    });
                    image.sort();
                    image
                })
                .collect();
            mapped.sort();
            if best.as_ref().is_none_or(|b| &mapped < b) {
                best = Some(mapped);
            }
        }
    }
    best.expect("transform set is nonempty")
}

/// Every three-variable formula in which each variable occurs exactly twice
/// positively and twice negatively (so exactly four clauses), one
/// representative per equivalence class under variable renaming and
/// polarity flips.
pub fn canonical_2p2n_r3() -> Vec<Cnf2p2n> {
    let lits = [-3i32, -2, -1, 1, 2, 3];
    let mut clauses: Vec<[i32; 3]> = Vec::new();
    for a in 0..6 {
        for b in a..6 {
            for c in b..6 {
                clauses.push([lits[a], lits[b], lits[c]]);
            }
        }
    }
    let mut canon: BTreeSet<Vec<[i32; 3]>> = BTreeSet::new();
    let nc = clauses.len();
    for a in 0..nc {
        for b in a..nc {
            for c in b..nc {
                'last: for d in c..nc {
                    let formula = [clauses[a], clauses[b], clauses[c], clauses[d]];
                    let mut pos = [0u8; 3];
                    let mut neg = [0u8; 3];
                    for clause in &formula {
                        for &l in clause {
                            let var = l.unsigned_abs() as usize - 1;
                            if l > 0 {
                                pos[var] += 1;
                            } else {
                                neg[var] += 1;
                            }
                            if pos[var] > 2 || neg[var] > 2 {
                                continue 'last;
                            }
                        }
                    }
                    if pos == [2; 3] && neg == [2; 3] {
                        canon.insert(canonical_form(&formula));
                    }
                }
            }
        }
    }
    canon
        .into_iter()
        .map(|cls| Cnf2p2n::new(3, cls).expect("canonical formulas stay balanced"))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random profile with 1..=max_votes proper nonempty votes and
/// multiplicities in 1..=max_mult.
pub fn random_profile(
    rng: &mut ChaCha8Rng,
    m: usize,
    max_votes: usize,
    max_mult: u64,
) -> Profile {
    let count = rng.gen_range(1..=max_votes);
    let votes: Vec<(Vec<usize>, u64)> = (0..count)
        .map(|_| {
            let size = rng.gen_range(1..m);
            let alts = rand::seq::index::sample(rng, m, size).into_vec();
            (alts, rng.gen_range(1..=max_mult))
        })
        .collect();
    Profile::from_votes(m, votes).expect("generated votes are valid")
}

pub fn random_committee(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Committee {
    Committee::new(rand::seq::index::sample(rng, m, k).into_vec())
        .expect("sampled committee is valid")
}

/// A random valid bivariate rule: within each vote size the values start at
/// a random level and grow by random steps in `0..=step`.
pub fn random_bivariate_rule(
    rng: &mut ChaCha8Rng,
    m: usize,
    k: usize,
    step: i64,
) -> BivariateScoring {
    let mut entries = Vec::new();
    for y in 1..m {
        let mut level = rng.gen_range(0..=step);
        for x in x_min(m, k, y)..=x_max(k, y) {
            entries.push(((x, y), q(level)));
            level += rng.gen_range(0..=step);
        }
    }
    BivariateScoring::new(m, k, entries).expect("generated values are valid")
}

/// A random small system over nonnegative variables: up to `max_rows`
/// constraints with coefficients in -3..=3 and right-hand sides in -4..=4.
pub fn random_system(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> LinearSystem {
    let n = rng.gen_range(1..=max_vars);
    let mut sys = LinearSystem::new(n);
    for _ in 0..rng.gen_range(0..=max_rows) {
        let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        let rel = match rng.gen_range(0..3) {
            0 => Rel::Le,
            1 => Rel::Ge,
            _ => Rel::Eq,
        };
        sys.push_ints(&coeffs, rel, rng.gen_range(-4..=4));
    }
    sys
}
