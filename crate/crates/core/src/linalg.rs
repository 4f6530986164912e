//! Exact Gauss-Jordan elimination over the rationals.

use num_traits::Zero;

use crate::rational::{self, Rational};

pub type Matrix = Vec<Vec<Rational>>;

/// Reduces `m` in place to reduced row echelon form and returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut copy = m.clone();
    rref(&mut copy).len()
}

/// Solution set `{ x : A x = b }` as a particular solution plus a null-space basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
}

/// Solves `A x = b` exactly; `None` when the system is inconsistent.
pub fn solve_affine(a: &Matrix, b: &[Rational], cols: usize) -> Option<AffineSolution> {
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut particular = vec![rational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[r][cols].clone();
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![rational::zero(); cols];
            v[f] = rational::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug[r][f].clone();
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, basis })
}

/// Unique solution of a square system, if it is nonsingular.
pub fn solve_square(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let sol = solve_affine(a, b, n)?;
    sol.basis.is_empty().then_some(sol.particular)
}

/// Determinant by fraction-exact elimination.
pub fn determinant(a: &Matrix) -> Rational {
    let n = a.len();
    let mut m = a.clone();
    let mut det = rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        let pivot_row = m[c].clone();
        for row in m.iter_mut().skip(c + 1) {
            if row[c].is_zero() {
                continue;
            }
            let factor = &row[c] / &pivot_row[c];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x -= &factor * p;
            }
        }
    }
    det
}
