//! Small dense linear programs over exact rationals.
//!
//! Two-phase tableau simplex with Bland's rule, all variables nonnegative.
//! Sized for Newton-polyhedron work: a few dozen rows and columns at most.

use num_traits::{Signed, Zero};

use crate::rational::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

/// `minimize objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<Q>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<Q>, Q)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Q::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn minimize(mut self, objective: Vec<Q>) -> Self {
        assert_eq!(objective.len(), self.num_vars, "objective length");
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Q>, relation: Relation, rhs: Q) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars;
        let m = self.constraints.len();
        let num_slack = self
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let art0 = n + num_slack;
        let width = art0 + m;

        let mut rows = Vec::with_capacity(m);
        let mut slack = n;
        for (i, c) in self.constraints.iter().enumerate() {
            let mut row = vec![Q::zero(); width + 1];
            row[..n].clone_from_slice(&c.coeffs);
            match c.relation {
                Relation::Le => {
                    row[slack] = Q::from_integer(1.into());
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = Q::from_integer((-1).into());
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[width] = c.rhs.clone();
            if row[width].is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[art0 + i] = Q::from_integer(1.into());
            rows.push(row);
        }

        let mut tab = Tableau {
            rows,
            basis: (art0..art0 + m).collect(),
            width,
        };

        // Phase 1: drive the artificial variables to zero.
        let mut phase1 = vec![Q::zero(); width];
        for c in phase1.iter_mut().skip(art0) {
            *c = Q::from_integer(1.into());
        }
        if tab.optimize(&phase1, width).is_err() {
            // phase 1 is bounded below by zero
            unreachable!("phase-one objective cannot be unbounded");
        }
        let infeasibility: Q = tab
            .basis
            .iter()
            .zip(&tab.rows)
            .filter(|(&b, _)| b >= art0)
            .map(|(_, r)| r[width].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }

        // Pivot remaining (zero-valued) artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art0 {
                if let Some(col) = (0..art0).find(|&c| !tab.rows[r][c].is_zero()) {
                    tab.pivot(r, col);
                    r += 1;
                } else {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                }
            } else {
                r += 1;
            }
        }

        // Phase 2 over the structural and slack columns only.
        let mut cost = vec![Q::zero(); width];
        cost[..n].clone_from_slice(&self.objective);
        if tab.optimize(&cost, art0).is_err() {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![Q::zero(); n];
        for (row, &b) in tab.rows.iter().zip(&tab.basis) {
            if b < n {
                x[b] = row[width].clone();
            }
        }
        let value = x
            .iter()
            .zip(&self.objective)
            .map(|(a, b)| a * b)
            .sum();
        LpOutcome::Optimal { x, value }
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    /// Number of variable columns; column `width` holds the right-hand side.
    width: usize,
}

struct Unbounded;

impl Tableau {
    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = Q::from_integer(1.into()) / &self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[pr].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes `cost` using columns `< active`, Bland's rule throughout.
    fn optimize(&mut self, cost: &[Q], active: usize) -> Result<(), Unbounded> {
        loop {
            // reduced cost of column j: c_j - c_B . column_j
            let entering = (0..active).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        reduced -= &cost[b] * &row[j];
                    }
                }
                reduced.is_negative()
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Q)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[col].is_positive() {
                    let ratio = &row[self.width] / &row[col];
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => {
                            ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                        }
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return Err(Unbounded),
            }
        }
    }
}
