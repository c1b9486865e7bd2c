//! Exact rational simplex.
//!
//! Dense two-phase tableau with Bland's rule. The instances built by the
//! coupling distances have at most a few hundred columns, so no attempt is
//! made at sparsity or at a revised method.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

/// Sparse coefficients, relation and right-hand side.
type Row = (Vec<(usize, Rational)>, Relation, Rational);

/// `minimize c·x` subject to sparse rows and `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<Rational>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![Rational::zero(); vars],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn set_objective(&mut self, var: usize, coef: Rational) {
        self.objective[var] = coef;
    }

    pub fn add_row(&mut self, coefs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) {
        debug_assert!(coefs.iter().all(|(v, _)| *v < self.vars));
        self.rows.push((coefs, rel, rhs));
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// `rows[i]` has `cols + 1` entries, the last being the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    /// Columns at or past this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.rows.len();
        let slacks = lp.rows.iter().filter(|r| r.1 == Relation::Le).count();
        let first_artificial = lp.vars + slacks;
        let cols = first_artificial + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = lp.vars;
        for (i, (coefs, rel, rhs)) in lp.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); cols + 1];
            for (v, c) in coefs {
                row[*v] += c;
            }
            if *rel == Relation::Le {
                row[slack] = Rational::one();
                slack += 1;
            }
            row[cols] = rhs.clone();
            if rhs.is_negative() {
                for e in row.iter_mut() {
                    *e = -&*e;
                }
            }
            row[first_artificial + i] = Rational::one();
            rows.push(row);
            basis.push(first_artificial + i);
        }
        Tableau {
            rows,
            basis,
            cols,
            first_artificial,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for e in self.rows[r].iter_mut() {
            *e = &*e / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (e, pe) in row.iter_mut().zip(&pivot_row) {
                if !pe.is_zero() {
                    *e -= &(&f * pe);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on cost vector `cost` over columns `< allowed`.
    /// Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let reduced: Vec<Rational> = (0..allowed)
                .map(|j| {
                    let mut d = cost[j].clone();
                    for (row, &b) in self.rows.iter().zip(&self.basis) {
                        if !cost[b].is_zero() && !row[j].is_zero() {
                            d -= &(&cost[b] * &row[j]);
                        }
                    }
                    d
                })
                .collect();
            let entering = match (0..allowed).find(|&j| reduced[j].is_negative()) {
                Some(j) => j,
                None => return true,
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[entering].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[entering];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, entering),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let mut phase1 = vec![Rational::zero(); self.cols];
        for c in phase1.iter_mut().skip(self.first_artificial) {
            *c = Rational::one();
        }
        self.optimize(&phase1, self.cols);
        let infeasibility: Rational = self
            .rows
            .iter()
            .zip(&self.basis)
            .filter(|(_, &b)| b >= self.first_artificial)
            .map(|(row, _)| row[self.cols].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        let mut phase2 = vec![Rational::zero(); self.cols];
        phase2[..lp.vars].clone_from_slice(&lp.objective);
        if !self.optimize(&phase2, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); lp.vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < lp.vars {
                x[b] = row[self.cols].clone();
            }
        }
        let value = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn small_maximization() {
        // max 3x + 2y s.t. x + y ≤ 4, x + 3y ≤ 6, x ≤ 3  → (3, 1), value 11.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(-3, 1));
        lp.set_objective(1, q(-2, 1));
        lp.add_row(vec![(0, q(1, 1)), (1, q(1, 1))], Relation::Le, q(4, 1));
        lp.add_row(vec![(0, q(1, 1)), (1, q(3, 1))], Relation::Le, q(6, 1));
        lp.add_row(vec![(0, q(1, 1))], Relation::Le, q(3, 1));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(3, 1), q(1, 1)]);
                assert_eq!(value, q(-11, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn equality_and_fractional_optimum() {
        // min x + y s.t. 2x + y = 1, x + 3y ≥ 1 (as -x - 3y ≤ -1).
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(1, 1));
        lp.set_objective(1, q(1, 1));
        lp.add_row(vec![(0, q(2, 1)), (1, q(1, 1))], Relation::Eq, q(1, 1));
        lp.add_row(vec![(0, q(-1, 1)), (1, q(-3, 1))], Relation::Le, q(-1, 1));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(2, 5), q(1, 5)]);
                assert_eq!(value, q(3, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, q(1, 1))], Relation::Eq, q(-1, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(-1, 1));
        lp.add_row(vec![(0, q(1, 1)), (1, q(-1, 1))], Relation::Le, q(1, 1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(1, 1));
        lp.add_row(vec![(0, q(1, 1)), (1, q(1, 1))], Relation::Eq, q(1, 1));
        lp.add_row(vec![(0, q(2, 1)), (1, q(2, 1))], Relation::Eq, q(2, 1));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(0, 1), q(1, 1)]);
                assert!(value.is_zero());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
