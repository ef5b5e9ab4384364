//! Exact linear programming over rationals.
//!
//! A dense two-phase primal simplex with Bland's anti-cycling rule. Every
//! number is a `BigRational`, so there are no tolerances: feasibility,
//! optimality, and unboundedness are decided exactly. Problem sizes here are
//! tiny (tens of variables and constraints), which makes the dense tableau the
//! simplest correct choice by a wide margin.
//!
//! Before an `Optimal` result is returned, the assignment is substituted back
//! into every original constraint and the objective; a violation panics, so a
//! solver bug can never masquerade as an answer.

use num::{One, Signed, Zero};

use crate::Rational;

/// Handle to a variable of one [`LinearProgram`]. Only valid for the program
/// that created it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(usize);

impl VarId {
    /// Position in the assignment vector of [`LpOutcome::Optimal`].
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Maximizer found: variable assignment (indexed by `VarId`) and the
    /// objective value.
    Optimal { assignment: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<Rational>, Rational)> {
        match self {
            LpOutcome::Optimal { assignment, value } => Some((assignment, value)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<Rational>,
    relation: Relation,
    rhs: Rational,
}

/// A maximization program built incrementally.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    nonneg: Vec<bool>,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram::default()
    }

    pub fn num_vars(&self) -> usize {
        self.nonneg.len()
    }

    /// Add a variable; `nonneg` constrains it to `>= 0`, otherwise it is free.
    pub fn add_var(&mut self, nonneg: bool) -> VarId {
        self.nonneg.push(nonneg);
        self.objective.push(Rational::zero());
        for c in &mut self.constraints {
            c.coeffs.push(Rational::zero());
        }
        VarId(self.nonneg.len() - 1)
    }

    /// Set the (maximization) objective; unmentioned variables get weight 0.
    pub fn set_objective(&mut self, terms: &[(VarId, Rational)]) {
        self.objective = vec![Rational::zero(); self.num_vars()];
        for (var, coeff) in terms {
            self.check_var(*var);
            self.objective[var.0] += coeff.clone();
        }
    }

    /// Add `sum(terms) relation rhs`. Repeated variables accumulate.
    pub fn add_constraint(&mut self, terms: &[(VarId, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for (var, coeff) in terms {
            self.check_var(*var);
            coeffs[var.0] += coeff.clone();
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    fn check_var(&self, var: VarId) {
        assert!(var.0 < self.num_vars(), "variable {} not declared in this program", var.0);
    }

    /// Maximize the objective.
    pub fn solve(&self) -> LpOutcome {
        let outcome = Tableau::run(self);
        if let LpOutcome::Optimal { assignment, value } = &outcome {
            self.check_solution(assignment, value);
        }
        outcome
    }

    /// A feasible point, if any (phase one only; the objective is ignored).
    pub fn feasible(&self) -> Option<Vec<Rational>> {
        let mut probe = self.clone();
        probe.objective = vec![Rational::zero(); probe.num_vars()];
        match probe.solve() {
            LpOutcome::Optimal { assignment, .. } => Some(assignment),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        }
    }

    /// Exact re-substitution of a claimed optimum; panics on any violation.
    fn check_solution(&self, assignment: &[Rational], value: &Rational) {
        assert_eq!(assignment.len(), self.num_vars());
        for (i, nn) in self.nonneg.iter().enumerate() {
            assert!(
                !nn || !assignment[i].is_negative(),
                "solver bug: nonnegative variable {i} got {}",
                assignment[i]
            );
        }
        for (k, c) in self.constraints.iter().enumerate() {
            let lhs: Rational =
                c.coeffs.iter().zip(assignment).map(|(a, x)| a * x).sum();
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            };
            assert!(ok, "solver bug: constraint {k} violated ({lhs} vs {})", c.rhs);
        }
        let obj: Rational = self.objective.iter().zip(assignment).map(|(a, x)| a * x).sum();
        assert_eq!(&obj, value, "solver bug: objective mismatch");
    }
}

/// Simplex working state. Columns are: one (or two, for free variables)
/// structural columns per user variable, then slack/surplus columns, then
/// artificial columns; the last column is the right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced-cost row and (negated) objective value.
    cost: Vec<Rational>,
    cost_value: Rational,
    num_cols: usize,
    first_artificial: usize,
    /// `pos_col[v]` and optional `neg_col[v]` for user variable `v`.
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
}

impl Tableau {
    fn run(lp: &LinearProgram) -> LpOutcome {
        let n = lp.num_vars();
        // Column layout.
        let mut pos_col = Vec::with_capacity(n);
        let mut neg_col = Vec::with_capacity(n);
        let mut next = 0usize;
        for &nn in &lp.nonneg {
            pos_col.push(next);
            next += 1;
            if nn {
                neg_col.push(None);
            } else {
                neg_col.push(Some(next));
                next += 1;
            }
        }
        let structural = next;
        let num_slack = lp
            .constraints
            .iter()
            .filter(|c| matches!(c.relation, Relation::Le | Relation::Ge))
            .count();
        // Worst case every row needs an artificial.
        let first_artificial = structural + num_slack;
        let num_cols = first_artificial + lp.constraints.len();

        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut rhs = Vec::with_capacity(lp.constraints.len());
        let mut basis = Vec::with_capacity(lp.constraints.len());
        let mut next_slack = structural;
        let mut next_artificial = first_artificial;
        let mut artificial_cols = Vec::new();

        for c in &lp.constraints {
            let mut row = vec![Rational::zero(); num_cols];
            let flip = c.rhs.is_negative();
            let sign = if flip { -Rational::one() } else { Rational::one() };
            for (v, coeff) in c.coeffs.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let val = coeff * &sign;
                row[pos_col[v]] = val.clone();
                if let Some(ncol) = neg_col[v] {
                    row[ncol] = -val;
                }
            }
            let b = if flip { -c.rhs.clone() } else { c.rhs.clone() };
            let relation = match (c.relation, flip) {
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
                (Relation::Eq, _) => Relation::Eq,
            };
            match relation {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_artificial] = Rational::one();
                    basis.push(next_artificial);
                    artificial_cols.push(next_artificial);
                    next_artificial += 1;
                }
                Relation::Eq => {
                    row[next_artificial] = Rational::one();
                    basis.push(next_artificial);
                    artificial_cols.push(next_artificial);
                    next_artificial += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }

        let mut tableau = Tableau {
            rows,
            rhs,
            basis,
            cost: vec![Rational::zero(); num_cols],
            cost_value: Rational::zero(),
            num_cols,
            first_artificial,
            pos_col,
            neg_col,
        };

        // Phase one: maximize minus the sum of artificials.
        if !artificial_cols.is_empty() {
            let mut phase1 = vec![Rational::zero(); num_cols];
            for &col in &artificial_cols {
                phase1[col] = -Rational::one();
            }
            tableau.load_cost(&phase1);
            match tableau.iterate(true) {
                Ok(()) => {}
                Err(()) => unreachable!("phase one is bounded by zero"),
            }
            if tableau.cost_value.is_negative() {
                return LpOutcome::Infeasible;
            }
            tableau.expel_artificials();
        }

        // Phase two: the real objective over structural columns.
        let mut phase2 = vec![Rational::zero(); num_cols];
        for (v, coeff) in lp.objective.iter().enumerate() {
            phase2[tableau.pos_col[v]] = coeff.clone();
            if let Some(ncol) = tableau.neg_col[v] {
                phase2[ncol] = -coeff.clone();
            }
        }
        tableau.load_cost(&phase2);
        if tableau.iterate(false).is_err() {
            return LpOutcome::Unbounded;
        }

        // Read the assignment back out.
        let mut col_value = vec![Rational::zero(); num_cols];
        for (r, &col) in tableau.basis.iter().enumerate() {
            col_value[col] = tableau.rhs[r].clone();
        }
        let assignment: Vec<Rational> = (0..n)
            .map(|v| {
                let pos = col_value[tableau.pos_col[v]].clone();
                match tableau.neg_col[v] {
                    Some(ncol) => pos - &col_value[ncol],
                    None => pos,
                }
            })
            .collect();
        LpOutcome::Optimal { assignment, value: tableau.cost_value.clone() }
    }

    /// Install a cost vector and price out the current basis.
    fn load_cost(&mut self, cost: &[Rational]) {
        self.cost = cost.to_vec();
        self.cost_value = Rational::zero();
        for (r, &col) in self.basis.iter().enumerate() {
            if self.cost[col].is_zero() {
                continue;
            }
            let factor = self.cost[col].clone();
            for j in 0..self.num_cols {
                let delta = &factor * &self.rows[r][j];
                self.cost[j] -= delta;
            }
            self.cost_value += &factor * &self.rhs[r];
        }
    }

    /// Bland-rule simplex iterations; `Err(())` means unbounded. During phase
    /// one (`allow_artificial`) artificial columns may still enter.
    fn iterate(&mut self, allow_artificial: bool) -> Result<(), ()> {
        loop {
            let limit = if allow_artificial { self.num_cols } else { self.first_artificial };
            let entering = (0..limit).find(|&j| self.cost[j].is_positive());
            let Some(enter) = entering else { return Ok(()) };

            let mut leave: Option<usize> = None;
            let mut best: Option<Rational> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][enter].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / &self.rows[r][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b
                            || (ratio == *b
                                && self.basis[r] < self.basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(r);
                }
            }
            let Some(leave) = leave else { return Err(()) };
            self.pivot(leave, enter);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        assert!(pivot.is_positive(), "pivot element must be positive");
        for j in 0..self.num_cols {
            self.rows[row][j] /= &pivot;
        }
        self.rhs[row] /= &pivot;
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for j in 0..self.num_cols {
                let delta = &factor * &self.rows[row][j];
                self.rows[r][j] -= delta;
            }
            let delta = &factor * &self.rhs[row];
            self.rhs[r] -= delta;
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for j in 0..self.num_cols {
                let delta = &factor * &self.rows[row][j];
                self.cost[j] -= delta;
            }
            self.cost_value += &factor * &self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// After a zero-value phase one, pivot artificial variables out of the
    /// basis (dropping redundant rows) so phase two never touches them.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            debug_assert!(self.rhs[r].is_zero(), "basic artificial with positive value");
            match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                Some(col) => {
                    // Degenerate pivot; the entry may be negative, which is
                    // fine because the row's rhs is zero.
                    if self.rows[r][col].is_negative() {
                        for j in 0..self.num_cols {
                            self.rows[r][j] = -self.rows[r][j].clone();
                        }
                        self.rhs[r] = -self.rhs[r].clone();
                    }
                    self.pivot(r, col);
                    r += 1;
                }
                None => {
                    // Redundant constraint.
                    self.rows.remove(r);
                    self.rhs.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    /// max delta s.t. pa + pb = 1, pa >= delta, pb >= delta, all >= 0.
    #[test]
    fn max_min_share_on_two_alternatives() {
        let mut lp = LinearProgram::new();
        let pa = lp.add_var(true);
        let pb = lp.add_var(true);
        let delta = lp.add_var(true);
        lp.add_constraint(&[(pa, rat(1, 1)), (pb, rat(1, 1))], Relation::Eq, rat(1, 1));
        lp.add_constraint(&[(pa, rat(1, 1)), (delta, rat(-1, 1))], Relation::Ge, rat(0, 1));
        lp.add_constraint(&[(pb, rat(1, 1)), (delta, rat(-1, 1))], Relation::Ge, rat(0, 1));
        lp.set_objective(&[(delta, rat(1, 1))]);
        let (assignment, value) = lp.solve().optimal().expect("optimal");
        assert_eq!(value, rat(1, 2));
        assert_eq!(assignment[pa.0], rat(1, 2));
        assert_eq!(assignment[pb.0], rat(1, 2));
    }

    /// max x + y s.t. x + 2y <= 4, 3x + y <= 6 has optimum 14/5 at (8/5, 6/5).
    #[test]
    fn textbook_optimum_is_exact() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        let y = lp.add_var(true);
        lp.add_constraint(&[(x, rat(1, 1)), (y, rat(2, 1))], Relation::Le, rat(4, 1));
        lp.add_constraint(&[(x, rat(3, 1)), (y, rat(1, 1))], Relation::Le, rat(6, 1));
        lp.set_objective(&[(x, rat(1, 1)), (y, rat(1, 1))]);
        let (assignment, value) = lp.solve().optimal().expect("optimal");
        assert_eq!(value, rat(14, 5));
        assert_eq!(assignment, vec![rat(8, 5), rat(6, 5)]);
    }

    #[test]
    fn infeasible_system_detected() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        lp.add_constraint(&[(x, rat(1, 1))], Relation::Le, rat(1, 1));
        lp.add_constraint(&[(x, rat(1, 1))], Relation::Ge, rat(2, 1));
        lp.set_objective(&[(x, rat(1, 1))]);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        assert_eq!(lp.feasible(), None);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        let y = lp.add_var(true);
        lp.add_constraint(&[(x, rat(1, 1)), (y, rat(-1, 1))], Relation::Le, rat(1, 1));
        lp.set_objective(&[(x, rat(1, 1))]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_go_negative() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(false);
        lp.add_constraint(&[(x, rat(1, 1))], Relation::Le, rat(-3, 1));
        lp.set_objective(&[(x, rat(1, 1))]);
        let (assignment, value) = lp.solve().optimal().expect("optimal");
        assert_eq!(value, rat(-3, 1));
        assert_eq!(assignment[0], rat(-3, 1));
    }

    /// Feasibility probe over an 8-alternative simplex with two lower bounds.
    #[test]
    fn simplex_with_lower_bounds_is_feasible() {
        let mut lp = LinearProgram::new();
        let vars: Vec<VarId> = (0..8).map(|_| lp.add_var(true)).collect();
        let ones: Vec<(VarId, Rational)> = vars.iter().map(|&v| (v, rat(1, 1))).collect();
        lp.add_constraint(&ones, Relation::Eq, rat(1, 1));
        // p({b,c,f}) >= 1/3 and p({a,h}) >= 2/3 (indices 1,2,5 and 0,7).
        lp.add_constraint(
            &[(vars[1], rat(1, 1)), (vars[2], rat(1, 1)), (vars[5], rat(1, 1))],
            Relation::Ge,
            rat(1, 3),
        );
        lp.add_constraint(&[(vars[0], rat(1, 1)), (vars[7], rat(1, 1))], Relation::Ge, rat(2, 3));
        let point = lp.feasible().expect("feasible");
        let total: Rational = point.iter().sum();
        assert_eq!(total, rat(1, 1));
        assert!(&point[1] + &point[2] + &point[5] >= rat(1, 3));
        assert!(&point[0] + &point[7] >= rat(2, 3));
    }

    #[test]
    fn equalities_with_redundant_rows() {
        // x + y = 2 written twice plus x - y = 0 forces x = y = 1.
        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        let y = lp.add_var(true);
        lp.add_constraint(&[(x, rat(1, 1)), (y, rat(1, 1))], Relation::Eq, rat(2, 1));
        lp.add_constraint(&[(x, rat(1, 1)), (y, rat(1, 1))], Relation::Eq, rat(2, 1));
        lp.add_constraint(&[(x, rat(1, 1)), (y, rat(-1, 1))], Relation::Eq, rat(0, 1));
        lp.set_objective(&[(x, rat(1, 1))]);
        let (assignment, value) = lp.solve().optimal().expect("optimal");
        assert_eq!(value, rat(1, 1));
        assert_eq!(assignment, vec![rat(1, 1), rat(1, 1)]);
    }

    #[test]
    fn repeated_terms_accumulate() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(true);
        // 2x <= 3 written as x + x <= 3.
        lp.add_constraint(&[(x, rat(1, 1)), (x, rat(1, 1))], Relation::Le, rat(3, 1));
        lp.set_objective(&[(x, rat(1, 1))]);
        let (_, value) = lp.solve().optimal().expect("optimal");
        assert_eq!(value, rat(3, 2));
    }

    #[test]
    fn solve_is_deterministic() {
        let build = || {
            let mut lp = LinearProgram::new();
            let vars: Vec<VarId> = (0..5).map(|_| lp.add_var(true)).collect();
            let ones: Vec<(VarId, Rational)> = vars.iter().map(|&v| (v, rat(1, 1))).collect();
            lp.add_constraint(&ones, Relation::Eq, rat(1, 1));
            lp.add_constraint(&[(vars[0], rat(2, 1)), (vars[3], rat(1, 1))], Relation::Ge, rat(1, 2));
            lp.set_objective(&[(vars[0], rat(1, 1)), (vars[4], rat(1, 3))]);
            lp.solve()
        };
        assert_eq!(build(), build());
    }
}
