//! Discounted payoff games: the graph, its plays under positional strategies,
//! and exact evaluation of those plays.

mod dpg;
mod generate;

use std::fmt;
use std::ops::Index;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::rational::{Fraction, Rational};

pub use dpg::{parse_game, serialize_game, ParseError};
pub use generate::{generate_random_game, GeneratorParams};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "MIN")]
    Min,
    #[serde(rename = "MAX")]
    Max,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Min => "MIN",
            Player::Max => "MAX",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: Rational,
    pub discount: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("edge endpoint {0} is not a vertex")]
    UnknownVertex(VertexId),
    #[error("invalid game: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("edge {edge} does not leave vertex {vertex}")]
    ForeignEdge { vertex: VertexId, edge: EdgeId },
    #[error("strategy covers {got} vertices, game has {expected}")]
    StrategyLength { expected: usize, got: usize },
    #[error("vertex without outgoing edge in restriction: {0}")]
    EmptyRestriction(String),
}

/// A structural defect reported by [`Game::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Sink { vertex: VertexId, label: String },
    DiscountOutOfRange { edge: EdgeId, discount: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Sink { label, .. } => write!(f, "vertex {label} has no outgoing edge"),
            Violation::DiscountOutOfRange { edge, discount } => {
                write!(f, "edge {edge}: discount not in [0,1) ({})", Fraction(discount))
            }
        }
    }
}

/// A game graph. Vertex and edge ids are dense indices. Construction does not
/// enforce the structural invariants; call [`Game::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    owners: Vec<Player>,
    names: Vec<Option<String>>,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
}

impl Game {
    pub fn new(owners: Vec<Player>) -> Self {
        let n = owners.len();
        Game {
            owners,
            names: vec![None; n],
            edges: Vec::new(),
            out: vec![Vec::new(); n],
        }
    }

    pub fn with_names(owners: Vec<Player>, names: Vec<Option<String>>) -> Self {
        assert_eq!(owners.len(), names.len());
        let mut g = Game::new(owners);
        g.names = names;
        g
    }

    pub fn add_edge(
        &mut self,
        src: VertexId,
        dst: VertexId,
        weight: Rational,
        discount: Rational,
    ) -> Result<EdgeId, GameError> {
        for v in [src, dst] {
            if v >= self.owners.len() {
                return Err(GameError::UnknownVertex(v));
            }
        }
        let id = self.edges.len();
        self.edges.push(Edge { src, dst, weight, discount });
        self.out[src].push(id);
        Ok(id)
    }

    pub fn num_vertices(&self) -> usize {
        self.owners.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn owner(&self, v: VertexId) -> Player {
        self.owners[v]
    }

    pub fn owners(&self) -> &[Player] {
        &self.owners
    }

    pub fn name(&self, v: VertexId) -> Option<&str> {
        self.names[v].as_deref()
    }

    /// The vertex name if it has one, else its id.
    pub fn label(&self, v: VertexId) -> String {
        self.names[v].clone().unwrap_or_else(|| v.to_string())
    }

    /// Looks up a vertex by name or numeric id.
    pub fn find_vertex(&self, key: &str) -> Option<VertexId> {
        self.names
            .iter()
            .position(|n| n.as_deref() == Some(key))
            .or_else(|| key.parse::<usize>().ok().filter(|&v| v < self.num_vertices()))
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.owners.len()
    }

    pub fn edge_label(&self, e: EdgeId) -> String {
        let edge = &self.edges[e];
        format!("e{e}({}->{})", self.label(edge.src), self.label(edge.dst))
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        for v in self.vertices() {
            if self.out[v].is_empty() {
                violations.push(Violation::Sink { vertex: v, label: self.label(v) });
            }
        }
        for (id, e) in self.edges.iter().enumerate() {
            if e.discount < Rational::zero() || e.discount >= Rational::one() {
                violations.push(Violation::DiscountOutOfRange { edge: id, discount: e.discount.clone() });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    pub fn ensure_valid(&self) -> Result<(), GameError> {
        self.validate().map_err(GameError::Invalid)
    }

    /// Same vertices and owners, keeping only `keep` edges (renumbered in id order).
    /// Returns the new game plus the original id of each kept edge.
    pub fn restrict(&self, keep: &[EdgeId]) -> Result<(Game, Vec<EdgeId>), GameError> {
        let mut ids: Vec<EdgeId> = keep.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut g = Game::with_names(self.owners.clone(), self.names.clone());
        for &e in &ids {
            let edge = &self.edges[e];
            g.add_edge(edge.src, edge.dst, edge.weight.clone(), edge.discount.clone())?;
        }
        if let Some(v) = g.vertices().find(|&v| g.out[v].is_empty()) {
            return Err(GameError::EmptyRestriction(self.label(v)));
        }
        Ok((g, ids))
    }

    /// A copy with every weight replaced by `f(edge id, weight)`.
    pub fn map_weights(&self, mut f: impl FnMut(EdgeId, &Rational) -> Rational) -> Game {
        let mut g = self.clone();
        for (id, e) in g.edges.iter_mut().enumerate() {
            e.weight = f(id, &e.weight);
        }
        g
    }

    /// Number of joint strategies, saturating at `u128::MAX`.
    pub fn strategy_count(&self) -> u128 {
        self.out
            .iter()
            .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128))
    }
}

/// One chosen out-edge per vertex, for both players at once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointStrategy {
    choice: Vec<EdgeId>,
}

impl JointStrategy {
    pub fn new(g: &Game, choice: Vec<EdgeId>) -> Result<Self, GameError> {
        if choice.len() != g.num_vertices() {
            return Err(GameError::StrategyLength { expected: g.num_vertices(), got: choice.len() });
        }
        for (v, &e) in choice.iter().enumerate() {
            if e >= g.num_edges() || g.edge(e).src != v {
                return Err(GameError::ForeignEdge { vertex: v, edge: e });
            }
        }
        Ok(JointStrategy { choice })
    }

    /// Picks the lowest-id out-edge at every vertex.
    pub fn lowest_edges(g: &Game) -> Self {
        JointStrategy { choice: g.vertices().map(|v| g.out_edges(v)[0]).collect() }
    }

    /// Builds a strategy from successor vertices, taking the lowest-id edge to each.
    pub fn from_successors(g: &Game, succ: &[VertexId]) -> Result<Self, GameError> {
        let choice = succ
            .iter()
            .enumerate()
            .map(|(v, &s)| {
                g.out_edges(v)
                    .iter()
                    .copied()
                    .find(|&e| g.edge(e).dst == s)
                    .ok_or(GameError::ForeignEdge { vertex: v, edge: usize::MAX })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JointStrategy { choice })
    }

    pub fn edge(&self, v: VertexId) -> EdgeId {
        self.choice[v]
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.choice
    }

    pub fn successor(&self, g: &Game, v: VertexId) -> VertexId {
        g.edge(self.choice[v]).dst
    }

    pub(crate) fn set(&mut self, v: VertexId, e: EdgeId) {
        self.choice[v] = e;
    }

    pub fn describe(&self, g: &Game) -> String {
        g.vertices()
            .map(|v| format!("{}->{}", g.label(v), g.label(self.successor(g, v))))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Enumerates every joint strategy in odometer order (vertex 0 fastest).
    pub fn enumerate(g: &Game) -> impl Iterator<Item = JointStrategy> + '_ {
        let n = g.num_vertices();
        let mut idx = vec![0usize; n];
        let mut done = n == 0 || g.vertices().any(|v| g.out_edges(v).is_empty());
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let s = JointStrategy { choice: (0..n).map(|v| g.out_edges(v)[idx[v]]).collect() };
            done = true;
            for (v, i) in idx.iter_mut().enumerate() {
                *i += 1;
                if *i < g.out_edges(v).len() {
                    done = false;
                    break;
                }
                *i = 0;
            }
            Some(s)
        })
    }
}

/// Exact value per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation(pub Vec<Rational>);

impl Valuation {
    pub fn zeros(n: usize) -> Self {
        Valuation(vec![Rational::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn describe(&self, g: &Game) -> String {
        g.vertices()
            .map(|v| format!("{} = {}", g.label(v), Fraction(&self.0[v])))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl Index<VertexId> for Valuation {
    type Output = Rational;
    fn index(&self, v: VertexId) -> &Rational {
        &self.0[v]
    }
}

/// The path-then-cycle shape of a play under a positional joint strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<EdgeId>,
    pub cycle: Vec<EdgeId>,
}

pub fn lasso_of(g: &Game, sigma: &JointStrategy, start: VertexId) -> Lasso {
    let mut seen_at = vec![usize::MAX; g.num_vertices()];
    let mut path = Vec::new();
    let mut v = start;
    while seen_at[v] == usize::MAX {
        seen_at[v] = path.len();
        let e = sigma.edge(v);
        path.push(e);
        v = g.edge(e).dst;
    }
    let cycle = path.split_off(seen_at[v]);
    Lasso { prefix: path, cycle }
}

/// Sum of the discounted weights along the infinite play described by `lasso`.
pub fn lasso_value(g: &Game, lasso: &Lasso) -> Rational {
    let mut total = Rational::zero();
    let mut reach = Rational::one();
    for &e in &lasso.prefix {
        let edge = g.edge(e);
        total += &reach * &edge.weight;
        reach *= &edge.discount;
    }
    let mut cycle_sum = Rational::zero();
    let mut along = Rational::one();
    for &e in &lasso.cycle {
        let edge = g.edge(e);
        cycle_sum += &along * &edge.weight;
        along *= &edge.discount;
    }
    total + reach * cycle_sum / (Rational::one() - along)
}

/// Solves `val(v) = w + λ val(σ(v))` for all vertices as one linear system.
pub fn joint_strategy_valuation(g: &Game, sigma: &JointStrategy) -> Valuation {
    let n = g.num_vertices();
    let mut a = vec![vec![Rational::zero(); n]; n];
    let mut b = Vec::with_capacity(n);
    for v in g.vertices() {
        let edge = g.edge(sigma.edge(v));
        a[v][v] += Rational::one();
        a[v][edge.dst] -= &edge.discount;
        b.push(edge.weight.clone());
    }
    // I - ΛP is strictly diagonally dominant by rows since every λ < 1.
    Valuation(linalg::solve(&a, &b).expect("strategy system is nonsingular for discounts < 1"))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn g1_is_valid() {
        assert!(g1().validate().is_ok());
        assert!(g2().validate().is_ok());
    }

    #[test]
    fn sink_is_reported() {
        let mut g = Game::with_names(vec![Player::Min, Player::Max], vec![Some("a".into()), Some("b".into())]);
        g.add_edge(1, 1, int(0), ratio(1, 2)).unwrap();
        g.add_edge(1, 0, int(0), ratio(1, 2)).unwrap();
        let v = g.validate().unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "vertex a has no outgoing edge");
    }

    #[test]
    fn discount_of_one_is_reported() {
        let mut g = Game::new(vec![Player::Min, Player::Max]);
        g.add_edge(0, 0, int(1), ratio(1, 2)).unwrap();
        g.add_edge(1, 1, int(0), int(1)).unwrap();
        g.add_edge(1, 0, int(0), ratio(1, 2)).unwrap();
        let v = g.validate().unwrap_err();
        assert!(matches!(v[0], Violation::DiscountOutOfRange { edge: 1, .. }));
        assert!(v[0].to_string().contains("discount not in [0,1)"));
    }

    #[test]
    fn unknown_endpoint() {
        let mut g = Game::new(vec![Player::Min]);
        assert_eq!(g.add_edge(0, 3, int(0), int(0)), Err(GameError::UnknownVertex(3)));
    }

    #[test]
    fn lassos_in_g1() {
        let g = g1();
        let to_a = strat(&g, &[0, 0]);
        let stay = strat(&g, &[0, 1]);
        assert_eq!(lasso_of(&g, &to_a, 1), Lasso { prefix: vec![2], cycle: vec![0] });
        assert_eq!(lasso_of(&g, &stay, 1), Lasso { prefix: vec![], cycle: vec![1] });
        for s in [&to_a, &stay] {
            assert_eq!(lasso_of(&g, s, 0), Lasso { prefix: vec![], cycle: vec![0] });
        }
    }

    #[test]
    fn lasso_values() {
        let g = g1();
        assert_eq!(lasso_value(&g, &Lasso { prefix: vec![], cycle: vec![0] }), int(2));
        assert_eq!(lasso_value(&g, &Lasso { prefix: vec![2], cycle: vec![0] }), int(1));
        let g = g2();
        assert_eq!(lasso_value(&g, &Lasso { prefix: vec![2], cycle: vec![0] }), int(2));
        // zero-weight cycle
        assert_eq!(lasso_value(&g, &Lasso { prefix: vec![], cycle: vec![1] }), int(0));
    }

    #[test]
    fn strategy_valuations() {
        let g = g1();
        assert_eq!(joint_strategy_valuation(&g, &strat(&g, &[0, 0])), vals(&g, &[int(2), int(1)]));
        assert_eq!(joint_strategy_valuation(&g, &strat(&g, &[0, 1])), vals(&g, &[int(2), int(0)]));
        // G2, self-loops: a = 1 + 2/3 a -> 3; b = 1/3 b -> 0
        let g = g2();
        assert_eq!(joint_strategy_valuation(&g, &strat(&g, &[0, 1])), vals(&g, &[int(3), int(0)]));
    }

    #[test]
    fn strategy_rejects_foreign_edges() {
        let g = g1();
        assert!(JointStrategy::new(&g, vec![0, 0]).is_err());
        assert!(JointStrategy::new(&g, vec![0]).is_err());
        assert!(JointStrategy::new(&g, vec![0, 2]).is_ok());
    }

    #[test]
    fn enumeration_covers_all() {
        let g = g1();
        let all: Vec<_> = JointStrategy::enumerate(&g).collect();
        assert_eq!(all.len(), 2);
        assert_eq!(g.strategy_count(), 2);
        assert_ne!(all[0], all[1]);
    }

    #[test]
    fn restriction() {
        let g = g2();
        assert_eq!(g.restrict(&[0, 1, 2]).unwrap().0, g);
        let (sub, ids) = g1().restrict(&[0, 2]).unwrap();
        assert_eq!(ids, vec![0, 2]);
        assert_eq!(sub.out_edges(1).len(), 1);
        assert_eq!(sub.edge(sub.out_edges(1)[0]).dst, 0);
        assert!(matches!(g1().restrict(&[0]), Err(GameError::EmptyRestriction(_))));
    }
}
