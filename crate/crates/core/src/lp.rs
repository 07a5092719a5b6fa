//! Exact active-set simplex over the inequation system.
//!
//! The search space is the valuation space itself: a basis is a set of `|V|`
//! inequations held tight, and its valuation is the unique point where they
//! meet. Pivots swap one tight inequation for another (Bland's rule on edge
//! ids), so every visited point is a basis valuation of the fixed system.
//!
//! Feasible starting bases come from an auxiliary problem in which every
//! inequation is relaxed by a shared slack `t >= 0`, started at `val = 0` and
//! minimised down to `t = 0`. Points that are feasible but not yet a corner are
//! moved to one by walking along the null space of the tight rows without
//! increasing the objective.

use num_traits::{Signed, Zero};

use crate::constraints::{Basis, InequationSystem, OffsetFactors};
use crate::game::{EdgeId, JointStrategy, Valuation};
use crate::linalg::{self, Matrix, RowSpace};
use crate::rational::Rational;

/// Pivot limit for a single solve. Bland's rule cannot cycle, so reaching it is a bug.
pub const PIVOT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("pivot cap of {0} exceeded")]
    PivotCap(usize),
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("inequation system is infeasible")]
    Infeasible,
    #[error("basis is not a feasible corner: {0}")]
    BadBasis(String),
}

/// `coeffs · val + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearObjective {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl LinearObjective {
    /// The (biased) strategy objective `Σ_v α_σ(v) · offset_σ(v)` written as a linear form.
    pub fn for_strategy(system: &InequationSystem, sigma: &JointStrategy, alpha: &OffsetFactors) -> Self {
        let n = system.num_vertices();
        let mut coeffs = vec![Rational::zero(); n];
        let mut constant = Rational::zero();
        for v in 0..n {
            let e = sigma.edge(v);
            let ineq = system.get(e);
            let a = alpha.get(e);
            for (c, r) in coeffs.iter_mut().zip(ineq.offset_row(n)) {
                if !r.is_zero() {
                    *c += a * r;
                }
            }
            constant -= a * ineq.offset_constant();
        }
        LinearObjective { coeffs, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        linalg::dot(&self.coeffs, x) + &self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    One,
    Two,
}

/// Constraints `rows[i] · x >= rhs[i]`.
#[derive(Debug, Clone)]
struct Polytope {
    dim: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

impl Polytope {
    fn from_system(system: &InequationSystem) -> Self {
        let n = system.num_vertices();
        Polytope {
            dim: n,
            rows: system.iter().map(|i| i.offset_row(n)).collect(),
            rhs: system.iter().map(|i| i.offset_constant()).collect(),
        }
    }

    /// Every row relaxed by a shared slack `t` (last coordinate), plus `t >= 0`.
    fn relaxed(&self) -> Self {
        let mut rows: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.push(Rational::from_integer(1.into()));
                r
            })
            .collect();
        let mut t_row = vec![Rational::zero(); self.dim + 1];
        t_row[self.dim] = Rational::from_integer(1.into());
        rows.push(t_row);
        let mut rhs = self.rhs.clone();
        rhs.push(Rational::zero());
        Polytope { dim: self.dim + 1, rows, rhs }
    }

    fn slack(&self, i: usize, x: &[Rational]) -> Rational {
        linalg::dot(&self.rows[i], x) - &self.rhs[i]
    }

    /// Smallest step along `d` that makes a currently non-tight row tight; ties go to the lowest row.
    fn ratio_test(&self, x: &[Rational], d: &[Rational], skip: &[usize]) -> Option<(usize, Rational)> {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.rows.len() {
            if skip.contains(&i) {
                continue;
            }
            let ad = linalg::dot(&self.rows[i], d);
            if !ad.is_negative() {
                continue;
            }
            let t = self.slack(i, x) / -ad;
            if best.as_ref().is_none_or(|(_, bt)| t < *bt) {
                best = Some((i, t));
            }
        }
        best
    }

    /// Moves a feasible point to a corner without increasing `objective`.
    fn crash_to_corner(&self, mut x: Vec<Rational>, objective: &[Rational]) -> Result<(Vec<Rational>, Vec<usize>), LpError> {
        loop {
            let mut space = RowSpace::new(self.dim);
            let mut active = Vec::new();
            for i in 0..self.rows.len() {
                if space.rank() == self.dim {
                    break;
                }
                if self.slack(i, &x).is_zero() && space.insert(&self.rows[i]) {
                    active.push(i);
                }
            }
            if active.len() == self.dim {
                return Ok((x, active));
            }
            let tight_rows: Vec<Vec<Rational>> = active.iter().map(|&i| self.rows[i].clone()).collect();
            let mut d = linalg::null_vector(&tight_rows, self.dim).expect("rank below dimension");
            let gd = linalg::dot(objective, &d);
            if gd.is_positive() {
                d.iter_mut().for_each(|v| *v = -v.clone());
            }
            let step = match self.ratio_test(&x, &d, &active) {
                Some(s) => s,
                None if !gd.is_zero() => return Err(LpError::Unbounded),
                None => {
                    d.iter_mut().for_each(|v| *v = -v.clone());
                    // the polytope contains no line, so one of the two directions is blocked
                    self.ratio_test(&x, &d, &active).ok_or(LpError::Unbounded)?
                }
            };
            let (_, t) = step;
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi += &t * di;
            }
        }
    }
}

/// Corner state of the active-set method. `basis[k]` is the row held tight in
/// position `k`; `inverse` is `A_B^{-1}` for that row order.
#[derive(Debug, Clone)]
struct Corner {
    basis: Vec<usize>,
    inverse: Matrix,
    x: Vec<Rational>,
}

enum Step {
    Pivoted,
    Optimal,
}

impl Corner {
    fn new(poly: &Polytope, basis: Vec<usize>) -> Option<Self> {
        let rows: Vec<Vec<Rational>> = basis.iter().map(|&i| poly.rows[i].clone()).collect();
        let inverse = linalg::inverse(&rows)?;
        let x = (0..poly.dim)
            .map(|j| {
                basis
                    .iter()
                    .enumerate()
                    .filter(|(_, &i)| !poly.rhs[i].is_zero())
                    .map(|(k, &i)| &inverse[j][k] * &poly.rhs[i])
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect();
        Some(Corner { basis, inverse, x })
    }

    /// Column `k` of the inverse: moving along it loosens row `basis[k]` at unit rate
    /// and keeps every other basis row tight.
    fn direction(&self, k: usize) -> Vec<Rational> {
        self.inverse.iter().map(|row| row[k].clone()).collect()
    }

    /// Multipliers `y` with `A_B^T y = objective`; all nonnegative iff the corner is optimal.
    fn duals(&self, objective: &[Rational]) -> Vec<Rational> {
        (0..self.basis.len())
            .map(|k| {
                self.inverse
                    .iter()
                    .zip(objective)
                    .filter(|(_, g)| !g.is_zero())
                    .map(|(row, g)| &row[k] * g)
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }

    fn bland_step(&mut self, poly: &Polytope, objective: &[Rational]) -> Result<Step, LpError> {
        let y = self.duals(objective);
        let Some(k) = (0..self.basis.len())
            .filter(|&k| y[k].is_negative())
            .min_by_key(|&k| self.basis[k])
        else {
            return Ok(Step::Optimal);
        };
        let d = self.direction(k);
        let (entering, _) = poly.ratio_test(&self.x, &d, &self.basis).ok_or(LpError::Unbounded)?;
        let mut basis = self.basis.clone();
        basis[k] = entering;
        *self = Corner::new(poly, basis).expect("ratio-test swap keeps the basis nonsingular");
        Ok(Step::Pivoted)
    }
}

/// Outcome of [`SimplexState::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Pivoted,
    Optimal,
}

/// A feasible corner of the inequation system together with the objective being minimised.
#[derive(Debug, Clone)]
pub struct SimplexState {
    system: InequationSystem,
    poly: Polytope,
    corner: Corner,
    valuation: Valuation,
    objective: LinearObjective,
    phase: Phase,
    pivots: usize,
}

impl SimplexState {
    /// Finds a feasible corner from scratch via the relaxed auxiliary problem.
    pub fn initialize(system: &InequationSystem, objective: LinearObjective) -> Result<Self, LpError> {
        let poly = Polytope::from_system(system);
        let n = poly.dim;
        let relaxed = poly.relaxed();
        let mut aux_objective = vec![Rational::zero(); n + 1];
        aux_objective[n] = Rational::from_integer(1.into());

        let t0 = poly.rhs.iter().cloned().fold(Rational::zero(), |a, b| if b > a { b } else { a });
        let mut start = vec![Rational::zero(); n + 1];
        start[n] = t0;
        let (_, basis) = relaxed.crash_to_corner(start, &aux_objective)?;
        let mut aux = Corner::new(&relaxed, basis).expect("crash returns independent rows");
        let mut pivots = 0;
        while let Step::Pivoted = aux.bland_step(&relaxed, &aux_objective)? {
            pivots += 1;
            if pivots > PIVOT_CAP {
                return Err(LpError::PivotCap(PIVOT_CAP));
            }
        }
        if !aux.x[n].is_zero() {
            return Err(LpError::Infeasible);
        }
        let feasible = aux.x[..n].to_vec();
        let (_, basis) = poly.crash_to_corner(feasible, &objective.coeffs)?;
        let mut state = Self::with_corner(system, poly, basis, objective)?;
        state.pivots = pivots;
        Ok(state)
    }

    /// Warm start from a known feasible basis of the same system.
    pub fn from_basis(system: &InequationSystem, basis: &Basis, objective: LinearObjective) -> Result<Self, LpError> {
        let poly = Polytope::from_system(system);
        Self::with_corner(system, poly, basis.edges().to_vec(), objective)
    }

    fn with_corner(system: &InequationSystem, poly: Polytope, basis: Vec<usize>, objective: LinearObjective) -> Result<Self, LpError> {
        if basis.len() != poly.dim {
            return Err(LpError::BadBasis(format!("{} rows for {} vertices", basis.len(), poly.dim)));
        }
        let corner = Corner::new(&poly, basis).ok_or_else(|| LpError::BadBasis("singular".into()))?;
        if (0..poly.rows.len()).any(|i| poly.slack(i, &corner.x).is_negative()) {
            return Err(LpError::BadBasis("infeasible".into()));
        }
        let valuation = Valuation(corner.x.clone());
        Ok(SimplexState {
            system: system.clone(),
            poly,
            corner,
            valuation,
            objective,
            phase: Phase::Two,
            pivots: 0,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn system(&self) -> &InequationSystem {
        &self.system
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.corner.basis.clone())
    }

    pub fn objective(&self) -> &LinearObjective {
        &self.objective
    }

    pub fn objective_value(&self) -> Rational {
        self.objective.eval(self.valuation.values())
    }

    /// Pivots performed since construction (including the auxiliary phase).
    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn set_objective(&mut self, objective: LinearObjective) {
        self.objective = objective;
    }

    /// Multiplier of each basis inequation, keyed by edge id.
    pub fn reduced_costs(&self) -> Vec<(EdgeId, Rational)> {
        let y = self.corner.duals(&self.objective.coeffs);
        let mut out: Vec<_> = self.corner.basis.iter().copied().zip(y).collect();
        out.sort_by_key(|(e, _)| *e);
        out
    }

    pub fn is_optimal(&self) -> bool {
        self.reduced_costs().iter().all(|(_, y)| !y.is_negative())
    }

    /// One Bland pivot, or `Optimal` if none improves.
    pub fn step(&mut self) -> Result<StepOutcome, LpError> {
        match self.corner.bland_step(&self.poly, &self.objective.coeffs)? {
            Step::Optimal => Ok(StepOutcome::Optimal),
            Step::Pivoted => {
                self.pivots += 1;
                self.valuation = Valuation(self.corner.x.clone());
                Ok(StepOutcome::Pivoted)
            }
        }
    }

    pub fn run_to_optimum(&mut self) -> Result<(), LpError> {
        let start = self.pivots;
        while self.step()? == StepOutcome::Pivoted {
            if self.pivots - start > PIVOT_CAP {
                return Err(LpError::PivotCap(PIVOT_CAP));
            }
        }
        Ok(())
    }

    /// Inequations tight at the current valuation.
    pub fn tight_edges(&self) -> Vec<EdgeId> {
        self.system.tight_edges(&self.valuation)
    }

    /// More than `|V|` tight inequations: the corner is degenerate.
    pub fn detect_degeneracy(&self) -> bool {
        self.tight_edges().len() > self.poly.dim
    }

    /// Feasible corners one basis change away: for every basis inequation (in
    /// edge-id order) released along its edge of the polytope, the inequation
    /// that becomes tight first enters (lowest id on ties). Released directions
    /// that never meet another inequation are skipped.
    pub fn neighbouring_bases(&self) -> Vec<(Basis, Valuation)> {
        let mut order: Vec<usize> = (0..self.corner.basis.len()).collect();
        order.sort_by_key(|&k| self.corner.basis[k]);
        let mut out = Vec::new();
        for k in order {
            let d = self.corner.direction(k);
            let Some((entering, t)) = self.poly.ratio_test(&self.corner.x, &d, &self.corner.basis) else {
                continue;
            };
            let mut edges = self.corner.basis.clone();
            edges[k] = entering;
            let x: Vec<Rational> = self.corner.x.iter().zip(&d).map(|(xi, di)| xi + &t * di).collect();
            out.push((Basis::new(edges), Valuation(x)));
        }
        out
    }
}

/// Result of minimising a strategy objective over the inequation system.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub valuation: Valuation,
    pub basis: Basis,
    pub objective: Rational,
    pub pivots: usize,
}

/// Minimises the biased objective of `sigma` over the polytope, from scratch.
pub fn solve_lp(system: &InequationSystem, sigma: &JointStrategy, alpha: &OffsetFactors) -> Result<LpSolution, LpError> {
    let objective = LinearObjective::for_strategy(system, sigma, alpha);
    let mut state = SimplexState::initialize(system, objective)?;
    state.run_to_optimum()?;
    Ok(LpSolution {
        valuation: state.valuation().clone(),
        basis: state.basis(),
        objective: state.objective_value(),
        pivots: state.pivots(),
    })
}
