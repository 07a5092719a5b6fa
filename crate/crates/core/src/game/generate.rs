use rand::seq::SliceRandom;
use rand::Rng;

use super::{Game, Player};
use crate::rational::{int, Rational};
use crate::seeding::{self, Domain};

#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub vertices: usize,
    pub out_degree: usize,
    pub weight_bound: i64,
    pub discounts: Vec<Rational>,
    pub seed: u64,
}

/// Random game with exactly `out_degree` edges per vertex. Targets are uniform
/// (self-loops and parallel edges allowed), weights are integers in
/// `[-weight_bound, weight_bound]`, discounts are drawn from the pool.
pub fn generate_random_game(p: &GeneratorParams) -> Game {
    assert!(p.vertices >= 1 && p.out_degree >= 1, "need at least one vertex and one edge per vertex");
    assert!(!p.discounts.is_empty(), "discount pool is empty");
    let mut rng = seeding::stream(p.seed, Domain::Generator, 0);
    let owners = (0..p.vertices)
        .map(|_| if rng.gen_bool(0.5) { Player::Max } else { Player::Min })
        .collect();
    let mut g = Game::new(owners);
    let bound = p.weight_bound.abs();
    for src in 0..p.vertices {
        for _ in 0..p.out_degree {
            let dst = rng.gen_range(0..p.vertices);
            let w = rng.gen_range(-bound..=bound);
            let l = p.discounts.choose(&mut rng).unwrap().clone();
            g.add_edge(src, dst, int(w), l).expect("endpoints in range");
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn params(vertices: usize, out_degree: usize, weight_bound: i64, seed: u64) -> GeneratorParams {
        GeneratorParams {
            vertices,
            out_degree,
            weight_bound,
            discounts: vec![ratio(1, 2), ratio(2, 3), ratio(3, 4)],
            seed,
        }
    }

    #[test]
    fn single_vertex_self_loop() {
        let mut p = params(1, 1, 0, 9);
        p.discounts = vec![ratio(1, 2)];
        let g = generate_random_game(&p);
        assert_eq!(g.num_edges(), 1);
        let e = g.edge(0);
        assert_eq!((e.src, e.dst), (0, 0));
        assert_eq!(e.weight, int(0));
        assert_eq!(e.discount, ratio(1, 2));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate_random_game(&params(6, 3, 4, 11)), generate_random_game(&params(6, 3, 4, 11)));
        assert_ne!(generate_random_game(&params(6, 3, 4, 11)), generate_random_game(&params(6, 3, 4, 12)));
    }

    #[test]
    fn generated_games_are_valid() {
        for seed in 0..50 {
            let g = generate_random_game(&params(6, 3, 4, seed));
            assert!(g.validate().is_ok());
            assert_eq!(g.num_edges(), 18);
            for e in g.edges() {
                assert!(e.weight >= int(-4) && e.weight <= int(4));
            }
        }
    }
}
