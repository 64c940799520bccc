//! Exact linear feasibility over the rationals.
//!
//! Variables are implicitly nonnegative. A system is a list of rows
//! `coeffs . x REL rhs` with REL one of >=, <=, =. Feasibility is decided by
//! a phase-1 simplex with Bland's rule on exact rational arithmetic, so
//! there is no tolerance anywhere: the answer is Feasible with a witness
//! that satisfies every row exactly, or Infeasible with a multiplier
//! certificate that proves it (checkable via [`FarkasCertificate::validates`]).

use crate::Q;
use num::{Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Le,
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Ge => ">=",
            Rel::Le => "<=",
            Rel::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub rel: Rel,
    pub rhs: Q,
}

/// A feasibility problem over nonnegative rational variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    num_vars: usize,
    rows: Vec<Constraint>,
}

/// Proof of infeasibility: multipliers y, nonnegative on >= rows,
/// nonpositive on <= rows, free on = rows, with y.A <= 0 componentwise
/// and y.b > 0. Any nonnegative x satisfying the rows would give
/// 0 < y.b <= y.Ax <= 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Q>),
    Infeasible(FarkasCertificate),
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

impl FarkasCertificate {
    pub fn validates(&self, sys: &LinearSystem) -> bool {
        if self.multipliers.len() != sys.rows.len() {
            return false;
        }
        for (y, row) in self.multipliers.iter().zip(&sys.rows) {
            match row.rel {
                Rel::Ge if y.is_negative() => return false,
                Rel::Le if y.is_positive() => return false,
                _ => {}
            }
        }
        let mut combo = vec![Q::zero(); sys.num_vars];
        let mut bound = Q::zero();
        for (y, row) in self.multipliers.iter().zip(&sys.rows) {
            if y.is_zero() {
                continue;
            }
            for (c, a) in combo.iter_mut().zip(&row.coeffs) {
                *c += y * a;
            }
            bound += y * &row.rhs;
        }
        combo.iter().all(|c| !c.is_positive()) && bound.is_positive()
    }
}

fn fmt_q(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            for c in &row.coeffs {
                write!(f, "{} ", fmt_q(c))?;
            }
            writeln!(f, "{} {}", row.rel, fmt_q(&row.rhs))?;
        }
        Ok(())
    }
}

enum Anchor {
    Slack(usize),
    Artificial(usize),
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem { num_vars, rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    /// Add a row; panics if the coefficient count is wrong (programming error).
    pub fn push(&mut self, coeffs: Vec<Q>, rel: Rel, rhs: Q) {
        assert_eq!(coeffs.len(), self.num_vars, "row length != variable count");
        self.rows.push(Constraint { coeffs, rel, rhs });
    }

    pub fn push_ints(&mut self, coeffs: &[i64], rel: Rel, rhs: i64) {
        self.push(coeffs.iter().map(|&c| crate::q(c)).collect(), rel, crate::q(rhs));
    }

    /// Does the witness satisfy every row (and nonnegativity) exactly?
    pub fn satisfied_by(&self, x: &[Q]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.rows.iter().all(|row| {
            let lhs: Q = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match row.rel {
                Rel::Ge => lhs >= row.rhs,
                Rel::Le => lhs <= row.rhs,
                Rel::Eq => lhs == row.rhs,
            }
        })
    }

    /// Decide feasibility exactly.
    pub fn feasible(&self) -> LpOutcome {
        let n = self.num_vars;
        let m = self.rows.len();

        // Orient every row so its right side is nonnegative, then give each
        // one a slack (<=) or surplus+artificial (>=, positive rhs) or plain
        // artificial (=) column.
        struct PreppedRow {
            coeffs: Vec<Q>,
            rhs: Q,
            rel: Rel,
            negated: bool,
        }
        let prepped: Vec<PreppedRow> = self
            .rows
            .iter()
            .map(|row| {
                let flip = match row.rel {
                    Rel::Ge => !row.rhs.is_positive(),
                    Rel::Le => row.rhs.is_negative(),
                    Rel::Eq => row.rhs.is_negative(),
                };
                if flip {
                    PreppedRow {
                        coeffs: row.coeffs.iter().map(|c| -c).collect(),
                        rhs: -&row.rhs,
                        rel: match row.rel {
                            Rel::Ge => Rel::Le,
                            Rel::Le => Rel::Ge,
                            Rel::Eq => Rel::Eq,
                        },
                        negated: true,
                    }
                } else {
                    PreppedRow {
                        coeffs: row.coeffs.clone(),
                        rhs: row.rhs.clone(),
                        rel: row.rel,
                        negated: false,
                    }
                }
            })
            .collect();

        let extra: usize = prepped
            .iter()
            .map(|r| match r.rel {
                Rel::Ge => 2,
                Rel::Le | Rel::Eq => 1,
            })
            .sum();
        let cols = n + extra; // + rhs column appended last
        let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut anchors: Vec<Anchor> = Vec::with_capacity(m);
        let mut artificial: Vec<bool> = vec![false; cols];
        let mut next = n;
        for r in &prepped {
            let mut row = vec![Q::zero(); cols + 1];
            row[..n].clone_from_slice(&r.coeffs);
            row[cols] = r.rhs.clone();
            match r.rel {
                Rel::Le => {
                    row[next] = crate::q(1);
                    anchors.push(Anchor::Slack(next));
                    basis.push(next);
                    next += 1;
                }
                Rel::Ge => {
                    row[next] = crate::q(-1);
                    row[next + 1] = crate::q(1);
                    artificial[next + 1] = true;
                    anchors.push(Anchor::Artificial(next + 1));
                    basis.push(next + 1);
                    next += 2;
                }
                Rel::Eq => {
                    row[next] = crate::q(1);
                    artificial[next] = true;
                    anchors.push(Anchor::Artificial(next));
                    basis.push(next);
                    next += 1;
                }
            }
            tab.push(row);
        }

        // Reduced-cost row for phase 1 (minimize the artificial sum), with
        // the basic artificials already eliminated; zrow[cols] = -objective.
        let mut zrow = vec![Q::zero(); cols + 1];
        for (j, z) in zrow.iter_mut().enumerate().take(cols) {
            if artificial[j] {
                *z += crate::q(1);
            }
        }
        for (i, row) in tab.iter().enumerate() {
            if artificial[basis[i]] {
                for (z, v) in zrow.iter_mut().zip(row) {
                    *z -= v;
                }
            }
        }

        let mut iterations = 0usize;
        loop {
            iterations += 1;
            assert!(iterations < 1_000_000, "simplex iteration cap exceeded");

            // Bland: entering = lowest-index column with negative reduced cost.
            let Some(enter) = (0..cols).find(|&j| zrow[j].is_negative()) else {
                break;
            };
            // Leaving: positive pivot entries, minimum ratio, lowest basic
            // index on ties.
            let mut leave: Option<usize> = None;
            let mut best: Option<Q> = None;
            for i in 0..m {
                if tab[i][enter].is_positive() {
                    let ratio = &tab[i][cols] / &tab[i][enter];
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()])
                        }
                    };
                    if better {
                        best = Some(ratio);
                        leave = Some(i);
                    }
                }
            }
            let r = leave.expect("phase-1 objective is bounded below");

            // Pivot on (r, enter).
            let pivot = tab[r][enter].clone();
            for v in tab[r].iter_mut() {
                *v /= &pivot;
            }
            let prow = tab[r].clone();
            for (i, row) in tab.iter_mut().enumerate() {
                if i != r && !row[enter].is_zero() {
                    let factor = row[enter].clone();
                    for (v, p) in row.iter_mut().zip(&prow) {
                        *v -= &factor * p;
                    }
                }
            }
            if !zrow[enter].is_zero() {
                let factor = zrow[enter].clone();
                for (z, p) in zrow.iter_mut().zip(&prow) {
                    *z -= &factor * p;
                }
            }
            basis[r] = enter;
        }

        if zrow[cols].is_zero() {
            // Optimal with zero artificial sum: read off the witness.
            let mut x = vec![Q::zero(); n];
            for (i, &b) in basis.iter().enumerate() {
                if b < n {
                    x[b] = tab[i][cols].clone();
                }
            }
            assert!(self.satisfied_by(&x), "simplex witness failed exact re-check");
            LpOutcome::Feasible(x)
        } else {
            // y over the oriented rows, from the reduced costs of each row's
            // anchor column; flip back for rows that were negated.
            let multipliers: Vec<Q> = anchors
                .iter()
                .zip(&prepped)
                .map(|(anchor, r)| {
                    let y = match anchor {
                        Anchor::Slack(c) => -&zrow[*c],
                        Anchor::Artificial(c) => crate::q(1) - &zrow[*c],
                    };
                    if r.negated {
                        -y
                    } else {
                        y
                    }
                })
                .collect();
            let cert = FarkasCertificate { multipliers };
            assert!(cert.validates(self), "simplex certificate failed exact re-check");
            LpOutcome::Infeasible(cert)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qr};

    #[test]
    fn contradictory_signs_infeasible() {
        let mut sys = LinearSystem::new(1);
        sys.push_ints(&[1], Rel::Ge, 1);
        sys.push_ints(&[-1], Rel::Ge, 0);
        match sys.feasible() {
            LpOutcome::Infeasible(cert) => assert!(cert.validates(&sys)),
            LpOutcome::Feasible(x) => panic!("unexpected witness {x:?}"),
        }
    }

    #[test]
    fn equality_pin_feasible() {
        let mut sys = LinearSystem::new(1);
        sys.push_ints(&[1], Rel::Ge, 0);
        sys.push_ints(&[1], Rel::Eq, 2);
        match sys.feasible() {
            LpOutcome::Feasible(x) => assert_eq!(x, vec![q(2)]),
            LpOutcome::Infeasible(_) => panic!("feasible system reported infeasible"),
        }
    }

    #[test]
    fn sum_one_gap_infeasible() {
        // x + y = 1 with x, y >= 0 forces x - y <= 1 < 3.
        let mut sys = LinearSystem::new(2);
        sys.push_ints(&[1, 1], Rel::Eq, 1);
        sys.push_ints(&[1, -1], Rel::Ge, 3);
        match sys.feasible() {
            LpOutcome::Infeasible(cert) => assert!(cert.validates(&sys)),
            LpOutcome::Feasible(x) => panic!("unexpected witness {x:?}"),
        }
    }

    #[test]
    fn negative_rhs_paths() {
        // x - y = -1 needs the row negated before phase 1.
        let mut sys = LinearSystem::new(2);
        sys.push_ints(&[1, -1], Rel::Eq, -1);
        sys.push_ints(&[1, 1], Rel::Le, 5);
        assert!(sys.feasible().is_feasible());

        let mut bad = LinearSystem::new(1);
        bad.push_ints(&[1], Rel::Le, -1);
        match bad.feasible() {
            LpOutcome::Infeasible(cert) => assert!(cert.validates(&bad)),
            LpOutcome::Feasible(x) => panic!("unexpected witness {x:?}"),
        }

        let mut ok = LinearSystem::new(1);
        ok.push_ints(&[-1], Rel::Le, -1);
        match ok.feasible() {
            LpOutcome::Feasible(x) => assert!(x[0] >= q(1)),
            LpOutcome::Infeasible(_) => panic!("feasible system reported infeasible"),
        }
    }

    #[test]
    fn rational_bounds_exact() {
        // 3x >= 1 and 2x <= 2/3 pin x to exactly 1/3.
        let mut sys = LinearSystem::new(1);
        sys.push(vec![q(3)], Rel::Ge, q(1));
        sys.push(vec![q(2)], Rel::Le, qr(2, 3));
        match sys.feasible() {
            LpOutcome::Feasible(x) => assert_eq!(x, vec![qr(1, 3)]),
            LpOutcome::Infeasible(_) => panic!("feasible system reported infeasible"),
        }
        // Tighten the upper bound by any amount and it flips.
        let mut tight = LinearSystem::new(1);
        tight.push(vec![q(3)], Rel::Ge, q(1));
        tight.push(vec![q(2)], Rel::Le, qr(2, 3) - qr(1, 1_000_000));
        assert!(!tight.feasible().is_feasible());
    }

    #[test]
    fn empty_and_degenerate() {
        let sys = LinearSystem::new(3);
        assert_eq!(sys.feasible(), LpOutcome::Feasible(vec![q(0), q(0), q(0)]));

        let mut zero = LinearSystem::new(2);
        zero.push_ints(&[1, 1], Rel::Ge, 0);
        assert!(zero.feasible().is_feasible());

        let mut gap = LinearSystem::new(2);
        gap.push_ints(&[0, 0], Rel::Ge, 1);
        match gap.feasible() {
            LpOutcome::Infeasible(cert) => assert!(cert.validates(&gap)),
            LpOutcome::Feasible(x) => panic!("unexpected witness {x:?}"),
        }
    }

    #[test]
    fn chain_system_feasible_with_unit_steps() {
        // d1 >= d2, d1 + d2 >= 1, d2 >= 1/4: witness must satisfy all rows.
        let mut sys = LinearSystem::new(2);
        sys.push_ints(&[1, -1], Rel::Ge, 0);
        sys.push_ints(&[1, 1], Rel::Ge, 1);
        sys.push(vec![q(0), q(1)], Rel::Ge, qr(1, 4));
        match sys.feasible() {
            LpOutcome::Feasible(x) => assert!(sys.satisfied_by(&x)),
            LpOutcome::Infeasible(_) => panic!("feasible system reported infeasible"),
        }
    }

    #[test]
    fn display_dumps_rationals() {
        let mut sys = LinearSystem::new(2);
        sys.push(vec![q(1), qr(-2, 3)], Rel::Ge, qr(1, 2));
        sys.push_ints(&[0, 1], Rel::Eq, 4);
        assert_eq!(sys.to_string(), "1/1 -2/3 >= 1/2\n0/1 1/1 = 4/1\n");
    }

    #[test]
    fn certificate_shape_checks() {
        let mut sys = LinearSystem::new(1);
        sys.push_ints(&[1], Rel::Ge, 1);
        sys.push_ints(&[1], Rel::Le, 0);
        let LpOutcome::Infeasible(cert) = sys.feasible() else {
            panic!("expected infeasible");
        };
        assert!(cert.validates(&sys));
        // Wrong length or flipped signs must not validate.
        let short = FarkasCertificate { multipliers: vec![q(1)] };
        assert!(!short.validates(&sys));
        let flipped = FarkasCertificate { multipliers: vec![q(-1), q(1)] };
        assert!(!flipped.validates(&sys));
        let zero = FarkasCertificate { multipliers: vec![q(0), q(0)] };
        assert!(!zero.validates(&sys));
    }
}
