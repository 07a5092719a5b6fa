//! The per-edge inequation system, offsets and the strategy objective.
//!
//! Every edge `e = (v, v')` contributes the inequation
//! `val(v) >= w_e + λ_e val(v')` when `v` belongs to Max and
//! `val(v) <= w_e + λ_e val(v')` when it belongs to Min. The offset of `e` is the
//! slack of that inequation, signed so that it is nonnegative exactly when the
//! inequation holds.

use num_traits::{One, Signed, Zero};

use crate::game::{EdgeId, Game, JointStrategy, Player, Valuation, VertexId};
use crate::linalg;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Max source: `val(v) - λ val(v') - w >= 0`.
    Geq,
    /// Min source: `val(v) - λ val(v') - w <= 0`.
    Leq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequation {
    pub edge: EdgeId,
    pub direction: Direction,
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: Rational,
    pub discount: Rational,
}

impl Inequation {
    fn sign(&self) -> Rational {
        match self.direction {
            Direction::Geq => Rational::one(),
            Direction::Leq => -Rational::one(),
        }
    }

    /// Coefficients `a` such that `offset(val) = a · val - c`.
    pub fn offset_row(&self, n: usize) -> Vec<Rational> {
        let s = self.sign();
        let mut row = vec![Rational::zero(); n];
        row[self.src] += &s;
        row[self.dst] -= &s * &self.discount;
        row
    }

    /// The constant `c` in `offset(val) = a · val - c`.
    pub fn offset_constant(&self) -> Rational {
        self.sign() * &self.weight
    }

    pub fn offset(&self, val: &[Rational]) -> Rational {
        let rhs = &self.weight + &self.discount * &val[self.dst];
        match self.direction {
            Direction::Geq => &val[self.src] - rhs,
            Direction::Leq => rhs - &val[self.src],
        }
    }
}

/// All inequations of a game, indexed by edge id. Never modified once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequationSystem {
    num_vertices: usize,
    inequations: Vec<Inequation>,
}

impl InequationSystem {
    pub fn build(g: &Game) -> Self {
        let inequations = g
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| Inequation {
                edge: id,
                direction: match g.owner(e.src) {
                    Player::Max => Direction::Geq,
                    Player::Min => Direction::Leq,
                },
                src: e.src,
                dst: e.dst,
                weight: e.weight.clone(),
                discount: e.discount.clone(),
            })
            .collect();
        InequationSystem { num_vertices: g.num_vertices(), inequations }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn len(&self) -> usize {
        self.inequations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inequations.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> &Inequation {
        &self.inequations[e]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Inequation> {
        self.inequations.iter()
    }

    pub fn offset(&self, val: &Valuation, e: EdgeId) -> Rational {
        self.inequations[e].offset(val.values())
    }

    pub fn is_feasible(&self, val: &Valuation) -> bool {
        self.first_violation(val).is_none()
    }

    /// Lowest edge id whose inequation fails at `val`.
    pub fn first_violation(&self, val: &Valuation) -> Option<EdgeId> {
        self.inequations
            .iter()
            .position(|i| i.offset(val.values()).is_negative())
    }

    pub fn tight_edges(&self, val: &Valuation) -> Vec<EdgeId> {
        self.inequations
            .iter()
            .filter(|i| i.offset(val.values()).is_zero())
            .map(|i| i.edge)
            .collect()
    }
}

/// Positive per-edge multipliers on offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetFactors(pub Vec<Rational>);

impl OffsetFactors {
    pub fn ones(num_edges: usize) -> Self {
        OffsetFactors(vec![Rational::one(); num_edges])
    }

    pub fn get(&self, e: EdgeId) -> &Rational {
        &self.0[e]
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|a| a.is_positive())
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|a| a.is_one())
    }
}

/// Edges imposed as equations; kept sorted by edge id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis(Vec<EdgeId>);

impl Basis {
    pub fn new(mut edges: Vec<EdgeId>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Basis(edges)
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.binary_search(&e).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BasisError {
    #[error("basis has {got} inequations, need {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("basis equations are singular")]
    Singular,
}

pub fn offset(g: &Game, val: &Valuation, e: EdgeId) -> Rational {
    let edge = g.edge(e);
    let rhs = &edge.weight + &edge.discount * &val[edge.dst];
    match g.owner(edge.src) {
        Player::Max => &val[edge.src] - rhs,
        Player::Min => rhs - &val[edge.src],
    }
}

pub fn biased_offset(g: &Game, val: &Valuation, e: EdgeId, alpha: &OffsetFactors) -> Rational {
    alpha.get(e) * offset(g, val, e)
}

/// `Σ_v α_e · offset(val, e)` over the strategy edges `e = σ(v)`.
pub fn objective_value(g: &Game, val: &Valuation, sigma: &JointStrategy, alpha: &OffsetFactors) -> Rational {
    g.vertices()
        .map(|v| biased_offset(g, val, sigma.edge(v), alpha))
        .fold(Rational::zero(), |acc, x| acc + x)
}

pub fn basis_valuation(system: &InequationSystem, basis: &Basis) -> Result<Valuation, BasisError> {
    let n = system.num_vertices();
    if basis.edges().len() != n {
        return Err(BasisError::WrongSize { expected: n, got: basis.edges().len() });
    }
    let rows: Vec<Vec<Rational>> = basis.edges().iter().map(|&e| system.get(e).offset_row(n)).collect();
    let rhs: Vec<Rational> = basis.edges().iter().map(|&e| system.get(e).offset_constant()).collect();
    linalg::solve(&rows, &rhs).map(Valuation).ok_or(BasisError::Singular)
}

pub fn is_feasible(system: &InequationSystem, val: &Valuation) -> bool {
    system.is_feasible(val)
}

pub fn sharp_edges(g: &Game, val: &Valuation) -> Vec<EdgeId> {
    (0..g.num_edges()).filter(|&e| offset(g, val, e).is_zero()).collect()
}

/// For every vertex the lowest-id out-edge that is sharp at `val`, if all vertices have one.
pub fn strategies_defined_by(g: &Game, val: &Valuation) -> Option<JointStrategy> {
    let choice = g
        .vertices()
        .map(|v| g.out_edges(v).iter().copied().find(|&e| offset(g, val, e).is_zero()))
        .collect::<Option<Vec<_>>>()?;
    Some(JointStrategy::new(g, choice).expect("out-edges belong to their vertex"))
}

/// Why a valuation is not the game's valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionWitness {
    Violated(EdgeId),
    NoSharpEdge(VertexId),
}

/// The sharp strategy certificate on success, else the first failure found
/// (violations take precedence over missing sharp edges).
pub fn check_solution(g: &Game, val: &Valuation) -> Result<JointStrategy, SolutionWitness> {
    if let Some(e) = (0..g.num_edges()).find(|&e| offset(g, val, e).is_negative()) {
        return Err(SolutionWitness::Violated(e));
    }
    strategies_defined_by(g, val).ok_or_else(|| {
        let v = g
            .vertices()
            .find(|&v| g.out_edges(v).iter().all(|&e| !offset(g, val, e).is_zero()))
            .expect("some vertex lacks a sharp edge");
        SolutionWitness::NoSharpEdge(v)
    })
}

pub fn verify_solution(g: &Game, val: &Valuation) -> bool {
    val.len() == g.num_vertices() && check_solution(g, val).is_ok()
}
