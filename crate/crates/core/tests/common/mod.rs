#![allow(dead_code)]

use dpg::game::{generate_random_game, parse_game, Game, GeneratorParams};
use dpg::rational::ratio;

pub const G1: &str = include_str!("../data/g1.dpg");
pub const G2: &str = include_str!("../data/g2.dpg");

pub fn g1() -> Game {
    parse_game(G1).unwrap()
}

pub fn g2() -> Game {
    parse_game(G2).unwrap()
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Random game with integer weights in `[-4, 4]` and discounts from `{1/2, 2/3, 3/4}`.
pub fn random_game(seed: u64, vertices: usize, degree: usize) -> Game {
    generate_random_game(&GeneratorParams {
        vertices,
        out_degree: degree,
        weight_bound: 4,
        discounts: vec![ratio(1, 2), ratio(2, 3), ratio(3, 4)],
        seed,
    })
}

/// Instance `i` of a sweep over `1..=max_vertices` vertices and out-degree `1..=3`.
pub fn sweep_game(i: u64, max_vertices: usize) -> Game {
    let vertices = 1 + (i as usize * 7 + i as usize / 3) % max_vertices;
    let degree = 1 + (i as usize / max_vertices) % 3;
    random_game(1000 + i, vertices, degree)
}
