//! Exact solver for discounted payoff games by objective improvement.
//!
//! The solver keeps one inequation per edge for the whole run and minimises,
//! by exact linear programming, the sum of the offsets of the edges picked by a
//! joint strategy of both players. The strategy is improved until that sum
//! reaches zero, at which point the minimiser is the game's valuation and the
//! strategy is co-optimal.
//!
//! ```
//! use dpg::{game::parse_game, improvement::{solve, SolverConfig}, rational::int};
//!
//! let g = parse_game("dpg 2\nvertex 0 MIN\nvertex 1 MAX\nedge 0 0 1 1/2\nedge 1 1 0 1/2\nedge 1 0 0 1/2\n").unwrap();
//! let sol = solve(&g, &SolverConfig::default()).unwrap();
//! assert_eq!(sol.valuation.0, vec![int(2), int(1)]);
//! ```

pub mod cli;
pub mod conditioning;
pub mod constraints;
pub mod game;
pub mod improvement;
pub mod linalg;
pub mod lp;
pub mod oracles;
pub mod rational;
pub mod seeding;
