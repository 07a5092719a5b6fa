//! Independent ground truth: exhaustive strategy enumeration and value iteration.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::conditioning::contraction;
use crate::game::{joint_strategy_valuation, Game, JointStrategy, Player, Valuation, VertexId};
use crate::rational::{abs_diff, floor_dyadic, Fraction, Rational};

pub const BRUTE_FORCE_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{count} joint strategies exceed the brute-force cap {cap}")]
    TooManyStrategies { count: u128, cap: u128 },
    #[error("max-min and min-max disagree at vertex {0}")]
    NotDetermined(VertexId),
    #[error("tolerance must be positive")]
    BadTolerance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForce {
    pub valuation: Valuation,
    /// Every joint strategy whose valuation equals the game's, in enumeration order.
    pub co_optimal: Vec<JointStrategy>,
}

fn pointwise(a: &mut [Rational], b: &[Rational], keep_max: bool) {
    for (x, y) in a.iter_mut().zip(b) {
        if (keep_max && y > x) || (!keep_max && y < x) {
            *x = y.clone();
        }
    }
}

/// Enumerates every pair of positional strategies. The value is the pointwise
/// max over Max strategies of the pointwise min over Min strategies; the dual
/// min-max order is computed too and must agree.
pub fn brute_force_solve(g: &Game, cap: u128) -> Result<BruteForce, OracleError> {
    let count = g.strategy_count();
    if count > cap {
        return Err(OracleError::TooManyStrategies { count, cap });
    }
    let max_vs: Vec<VertexId> = g.vertices().filter(|&v| g.owner(v) == Player::Max).collect();
    let min_vs: Vec<VertexId> = g.vertices().filter(|&v| g.owner(v) == Player::Min).collect();
    let choices = |vs: &[VertexId]| -> Vec<Vec<usize>> {
        let mut all = vec![Vec::new()];
        for &v in vs {
            all = all
                .into_iter()
                .flat_map(|prefix| {
                    g.out_edges(v).iter().map(move |&e| {
                        let mut p = prefix.clone();
                        p.push(e);
                        p
                    })
                })
                .collect();
        }
        all
    };
    let max_choices = choices(&max_vs);
    let min_choices = choices(&min_vs);

    let compose = |mx: &[usize], mn: &[usize]| {
        let mut edges = vec![0; g.num_vertices()];
        for (&v, &e) in max_vs.iter().zip(mx) {
            edges[v] = e;
        }
        for (&v, &e) in min_vs.iter().zip(mn) {
            edges[v] = e;
        }
        JointStrategy::new(g, edges).expect("edges leave their vertex")
    };

    let table: Vec<Vec<(JointStrategy, Vec<Rational>)>> = max_choices
        .iter()
        .map(|mx| {
            min_choices
                .iter()
                .map(|mn| {
                    let s = compose(mx, mn);
                    let v = joint_strategy_valuation(g, &s).0;
                    (s, v)
                })
                .collect()
        })
        .collect();

    let mut max_min: Option<Vec<Rational>> = None;
    for row in &table {
        let mut inner = row[0].1.clone();
        for (_, v) in &row[1..] {
            pointwise(&mut inner, v, false);
        }
        match max_min.as_mut() {
            None => max_min = Some(inner),
            Some(acc) => pointwise(acc, &inner, true),
        }
    }
    let mut min_max: Option<Vec<Rational>> = None;
    for j in 0..min_choices.len() {
        let mut inner = table[0][j].1.clone();
        for row in &table[1..] {
            pointwise(&mut inner, &row[j].1, true);
        }
        match min_max.as_mut() {
            None => min_max = Some(inner),
            Some(acc) => pointwise(acc, &inner, false),
        }
    }
    let value = max_min.expect("at least one strategy");
    let dual = min_max.expect("at least one strategy");
    if let Some(v) = (0..value.len()).find(|&v| value[v] != dual[v]) {
        return Err(OracleError::NotDetermined(v));
    }
    let co_optimal = table
        .into_iter()
        .flatten()
        .filter(|(_, v)| *v == value)
        .map(|(s, _)| s)
        .collect();
    Ok(BruteForce { valuation: Valuation(value), co_optimal })
}

fn bellman(g: &Game, x: &[Rational]) -> Vec<Rational> {
    g.vertices()
        .map(|v| {
            let candidates = g.out_edges(v).iter().map(|&e| {
                let edge = g.edge(e);
                &edge.weight + &edge.discount * &x[edge.dst]
            });
            match g.owner(v) {
                Player::Max => candidates.max(),
                Player::Min => candidates.min(),
            }
            .expect("no sinks")
        })
        .collect()
}

fn sup_norm_diff(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| abs_diff(x, y)).max().unwrap_or_else(Rational::zero)
}

/// Smallest `p` with `2^-p <= bound`.
fn bits_for(bound: &Rational) -> u32 {
    let mut p = 0u32;
    let mut step = Rational::one();
    while step > *bound {
        step /= Rational::from_integer(BigInt::from(2));
        p += 1;
    }
    p
}

/// Value iteration from `val ≡ 0` with every iterate rounded down to a dyadic
/// grid. The grid step `δ <= tol (1-λ*)² / 8` and the stopping threshold
/// `tol (1-λ*) / (2λ*)` keep the returned valuation within `tol` of the game's
/// valuation in sup norm. With `λ* = 0` one exact step is the answer.
pub fn value_iteration(g: &Game, tolerance: &Rational) -> Result<Valuation, OracleError> {
    if !tolerance.is_positive() {
        return Err(OracleError::BadTolerance);
    }
    let n = g.num_vertices();
    let lambda = contraction(g);
    let zero = vec![Rational::zero(); n];
    if lambda.is_zero() {
        return Ok(Valuation(bellman(g, &zero)));
    }
    let one = Rational::one();
    let slack = &one - &lambda;
    let bits = bits_for(&(tolerance * &slack * &slack / Rational::from_integer(8.into())));
    let stop = tolerance * &slack / (Rational::from_integer(2.into()) * &lambda);
    let mut x = zero;
    loop {
        let next: Vec<Rational> = bellman(g, &x).iter().map(|r| floor_dyadic(r, bits)).collect();
        let step = sup_norm_diff(&next, &x);
        x = next;
        if step <= stop {
            return Ok(Valuation(x));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    BruteForce,
    ValueIteration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { vertex: VertexId, expected: Rational, got: Rational },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub method: OracleMethod,
    pub valuation: Valuation,
    pub co_optimal: Option<Vec<JointStrategy>>,
    pub verdict: Verdict,
}

impl OracleReport {
    pub fn describe(&self, g: &Game) -> String {
        let method = match self.method {
            OracleMethod::BruteForce => "brute-force",
            OracleMethod::ValueIteration => "value-iteration",
        };
        match &self.verdict {
            Verdict::Pass => format!("PASS ({method})"),
            Verdict::Fail { vertex, expected, got } => format!(
                "FAIL ({method}): vertex {} expected {} got {}",
                g.label(*vertex),
                Fraction(expected),
                Fraction(got)
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrossCheckOptions {
    pub brute_force_cap: u128,
    pub tolerance: Rational,
}

impl Default for CrossCheckOptions {
    fn default() -> Self {
        CrossCheckOptions {
            brute_force_cap: 1 << 12,
            tolerance: Rational::new(BigInt::one(), BigInt::from(1_000_000)),
        }
    }
}

/// Compares `valuation` to brute force (exact) when the game is small enough,
/// else to value iteration (within the tolerance).
pub fn cross_check(g: &Game, valuation: &Valuation, opts: &CrossCheckOptions) -> Result<OracleReport, OracleError> {
    if g.strategy_count() <= opts.brute_force_cap {
        let bf = brute_force_solve(g, opts.brute_force_cap)?;
        let verdict = (0..g.num_vertices())
            .find(|&v| bf.valuation[v] != valuation[v])
            .map_or(Verdict::Pass, |v| Verdict::Fail {
                vertex: v,
                expected: bf.valuation[v].clone(),
                got: valuation[v].clone(),
            });
        Ok(OracleReport {
            method: OracleMethod::BruteForce,
            valuation: bf.valuation,
            co_optimal: Some(bf.co_optimal),
            verdict,
        })
    } else {
        let vi = value_iteration(g, &opts.tolerance)?;
        let verdict = (0..g.num_vertices())
            .find(|&v| abs_diff(&vi[v], &valuation[v]) > opts.tolerance)
            .map_or(Verdict::Pass, |v| Verdict::Fail {
                vertex: v,
                expected: vi[v].clone(),
                got: valuation[v].clone(),
            });
        Ok(OracleReport { method: OracleMethod::ValueIteration, valuation: vi, co_optimal: None, verdict })
    }
}
