//! Dense exact linear algebra over rationals (Gauss-Jordan elimination).
//!
//! Matrices here are small (one row per vertex), so everything is dense and
//! recomputed from scratch rather than updated.

use num_traits::{One, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

fn eliminate_row(target: &mut [Rational], pivot_row: &[Rational], factor: &Rational) {
    for (t, p) in target.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *t -= factor * p;
        }
    }
}

/// Reduces `aug` (n rows, width columns) to reduced row echelon form over the
/// first `cols` columns. Returns the pivot column of each pivot row, in order.
fn rref(aug: &mut Matrix, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == aug.len() {
            break;
        }
        let Some(found) = (row..aug.len()).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, found);
        let inv = aug[row][col].recip();
        for x in aug[row].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = aug[row].clone();
        for (r, other) in aug.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let factor = other[col].clone();
                eliminate_row(other, &pivot_row, &factor);
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    debug_assert_eq!(b.len(), n);
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            debug_assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Inverse of a square matrix; `None` when singular.
pub fn inverse(a: &[Vec<Rational>]) -> Option<Matrix> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// A nonzero `x` with `row · x = 0` for every row, if the rows have rank below `dim`.
pub fn null_vector(rows: &[Vec<Rational>], dim: usize) -> Option<Vec<Rational>> {
    let mut m: Matrix = rows.to_vec();
    let pivots = rref(&mut m, dim);
    let free = (0..dim).find(|c| !pivots.contains(c))?;
    let mut x = vec![Rational::zero(); dim];
    x[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = -m[r][free].clone();
    }
    Some(x)
}

/// Incrementally maintained row space, used to pick linearly independent rows.
#[derive(Debug, Clone)]
pub struct RowSpace {
    dim: usize,
    // rows in echelon form, each with its leading column
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RowSpace {
    pub fn new(dim: usize) -> Self {
        RowSpace { dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, row: &[Rational]) -> Vec<Rational> {
        let mut r = row.to_vec();
        for (lead, basis_row) in &self.rows {
            if !r[*lead].is_zero() {
                let factor = r[*lead].clone();
                eliminate_row(&mut r, basis_row, &factor);
            }
        }
        r
    }

    pub fn is_independent(&self, row: &[Rational]) -> bool {
        self.reduce(row).iter().any(|x| !x.is_zero())
    }

    /// Adds `row` if it is independent of the rows added so far.
    pub fn insert(&mut self, row: &[Rational]) -> bool {
        debug_assert_eq!(row.len(), self.dim);
        let mut r = self.reduce(row);
        let Some(lead) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[lead].recip();
        for x in r.iter_mut() {
            *x *= &inv;
        }
        self.rows.push((lead, r));
        true
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .fold(Rational::zero(), |acc, v| acc + v)
}
