//! Making games sharp and improving: contraction, gap bounds, weight noise and
//! offset factors, plus the exact transfer of strategies back to the original game.
//!
//! Random draws live on a rational grid with `2^32` steps so that everything
//! stays exact. A collision on that grid is detected by the driver (degenerate
//! corner or an empty neighbour scan) and answered with a fresh draw.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::constraints::{offset, verify_solution, OffsetFactors};
use crate::game::{joint_strategy_valuation, Game, JointStrategy, Valuation};
use crate::rational::{Fraction, Rational};
use crate::seeding::{self, Domain};

pub const GRID_BITS: u32 = 32;

/// Default enumeration cap for [`true_gap`].
pub const GAP_STRATEGY_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConditioningError {
    #[error("noise exceeds gap bound: epsilon {epsilon} > {bound}")]
    NoiseTooLarge { epsilon: String, bound: String },
    #[error("noise must be positive")]
    NonPositiveNoise,
    #[error("{count} joint strategies exceed the enumeration cap {cap}")]
    TooManyStrategies { count: u128, cap: u128 },
    #[error("perturbation too large or gap bound violated: recovered valuation does not solve the game")]
    RecoveryFailed,
}

/// What the solver did to condition a game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditioningReport {
    pub contraction: Rational,
    pub gap_lower_bound: Rational,
    /// Zero when no noise was applied.
    pub epsilon: Rational,
    pub noise_seed: Option<u64>,
    pub alpha_seed: Option<u64>,
    pub resamples: usize,
    /// Degenerate corners met while the weights were perturbed.
    pub degenerate_after_noise: usize,
}

impl ConditioningReport {
    pub fn for_game(g: &Game) -> Self {
        ConditioningReport {
            contraction: contraction(g),
            gap_lower_bound: gap_lower_bound(g),
            epsilon: Rational::zero(),
            noise_seed: None,
            alpha_seed: None,
            resamples: 0,
            degenerate_after_noise: 0,
        }
    }
}

/// Largest discount factor.
pub fn contraction(g: &Game) -> Rational {
    g.edges()
        .iter()
        .map(|e| e.discount.clone())
        .max()
        .unwrap_or_else(Rational::zero)
}

fn denom(r: &Rational) -> BigInt {
    r.denom().clone()
}

/// `1 / (common · maxDenomProd)` with `common = ∏_v max denom(λ)² · max denom(w)`
/// over each vertex's out-edges and `maxDenomProd = max_e denom(λ_e w_e)`.
pub fn gap_lower_bound(g: &Game) -> Rational {
    let mut common = BigInt::one();
    for v in g.vertices() {
        let out = g.out_edges(v);
        let dl = out.iter().map(|&e| denom(&g.edge(e).discount)).max().unwrap_or_else(BigInt::one);
        let dw = out.iter().map(|&e| denom(&g.edge(e).weight)).max().unwrap_or_else(BigInt::one);
        common *= &dl * &dl * dw;
    }
    let prod = g
        .edges()
        .iter()
        .map(|e| denom(&(&e.discount * &e.weight)))
        .max()
        .unwrap_or_else(BigInt::one);
    Rational::new(BigInt::one(), common * prod)
}

/// Largest weight noise the gap estimate licenses: `(1 - λ*) / 3 · γ_lb`.
pub fn noise_bound(g: &Game) -> Rational {
    (Rational::one() - contraction(g)) / Rational::from_integer(3.into()) * gap_lower_bound(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gap {
    Gap(Rational),
    AllCoOptimal,
}

/// `γ_σ = -min_e offset(val(σ), e)` for one joint strategy; positive iff σ is not co-optimal.
pub fn strategy_gap(g: &Game, sigma: &JointStrategy) -> Rational {
    let val = joint_strategy_valuation(g, sigma);
    let min = (0..g.num_edges())
        .map(|e| offset(g, &val, e))
        .min()
        .expect("game has edges");
    -min
}

/// Exact gap by enumerating all joint strategies.
pub fn true_gap(g: &Game, cap: u128) -> Result<Gap, ConditioningError> {
    let count = g.strategy_count();
    if count > cap {
        return Err(ConditioningError::TooManyStrategies { count, cap });
    }
    let gap = JointStrategy::enumerate(g)
        .map(|s| strategy_gap(g, &s))
        .filter(|gs| gs.is_positive())
        .min();
    Ok(gap.map_or(Gap::AllCoOptimal, Gap::Gap))
}

fn grid() -> BigInt {
    BigInt::one() << GRID_BITS
}

/// Adds `k / 2^32 · ε` to every weight, `k` uniform in `(-2^32, 2^32)`, drawn
/// from a stream keyed by `(seed, edge id)`.
pub fn perturb_weights(g: &Game, epsilon: &Rational, seed: u64) -> Result<Game, ConditioningError> {
    if !epsilon.is_positive() {
        return Err(ConditioningError::NonPositiveNoise);
    }
    let bound = noise_bound(g);
    if *epsilon > bound {
        return Err(ConditioningError::NoiseTooLarge {
            epsilon: Fraction(epsilon).to_string(),
            bound: Fraction(&bound).to_string(),
        });
    }
    Ok(perturb_weights_unchecked(g, epsilon, seed))
}

/// [`perturb_weights`] without the gap-bound check, for callers holding a
/// better gap estimate (e.g. the exact gap of a small game).
pub fn perturb_weights_unchecked(g: &Game, epsilon: &Rational, seed: u64) -> Game {
    let m = 1i64 << GRID_BITS;
    g.map_weights(|e, w| {
        let mut rng = seeding::stream(seed, Domain::WeightNoise, e as u64);
        let k: i64 = rng.gen_range(-(m - 1)..=(m - 1));
        w + Rational::new(BigInt::from(k), grid()) * epsilon
    })
}

/// `α_e = 1 + k_e / 2^32`, `k_e` uniform in `{1, …, 2^32 - 1}`, one stream per edge.
pub fn sample_offset_factors(g: &Game, seed: u64) -> OffsetFactors {
    let m = 1u64 << GRID_BITS;
    OffsetFactors(
        (0..g.num_edges())
            .map(|e| {
                let mut rng = seeding::stream(seed, Domain::OffsetFactors, e as u64);
                let k: u64 = rng.gen_range(1..m);
                Rational::one() + Rational::new(BigInt::from(k), grid())
            })
            .collect(),
    )
}

/// The valuation of `sigma` on the unperturbed game, checked to be the game's valuation.
pub fn recover_exact_solution(original: &Game, sigma: &JointStrategy) -> Result<Valuation, ConditioningError> {
    let val = joint_strategy_valuation(original, sigma);
    if verify_solution(original, &val) {
        Ok(val)
    } else {
        Err(ConditioningError::RecoveryFailed)
    }
}
