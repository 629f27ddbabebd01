//! Matrix permanents.
//!
//! [`permanent`] uses Ryser's inclusion–exclusion formula with Gray-code
//! subset iteration, so each step updates the row sums by a single column in
//! `O(d)` for a total cost of `O(2^d d)`. [`permanent_naive`] sums over all
//! permutations and serves as an independent check for small matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::limits::size_cap;
use crate::matrix::ComplexMatrix;

/// Largest dimension accepted by [`permanent_naive`].
pub const NAIVE_MAX_DIM: usize = 9;

/// Permanent of a square matrix, capped at [`size_cap`].
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64> {
    permanent_with_cap(m, size_cap())
}

/// Permanent of a square matrix of dimension at most `cap`. The 0×0 permanent is 1.
pub fn permanent_with_cap(m: &ComplexMatrix, cap: usize) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let d = m.rows();
    if d > cap {
        return Err(Error::SizeCap { size: d, cap });
    }
    Ok(ryser(m))
}

fn ryser(m: &ComplexMatrix) -> Complex64 {
    let d = m.rows();
    match d {
        0 => return Complex64::new(1.0, 0.0),
        1 => return m[(0, 0)],
        2 => return m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)],
        _ => {}
    }

    // Column-major copy so that toggling column j touches contiguous memory.
    let cols: Vec<Vec<Complex64>> = (0..d).map(|j| (0..d).map(|i| m[(i, j)]).collect()).collect();
    let mut row_sums = vec![Complex64::new(0.0, 0.0); d];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;

    for step in 1u64..(1u64 << d) {
        let j = step.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray & (1 << j) != 0 {
            for (s, &a) in row_sums.iter_mut().zip(&cols[j]) {
                *s += a;
            }
        } else {
            for (s, &a) in row_sums.iter_mut().zip(&cols[j]) {
                *s -= a;
            }
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }

    if d % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Permanent by explicit summation over all `d!` permutations (Heap's algorithm).
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let d = m.rows();
    if d > NAIVE_MAX_DIM {
        return Err(Error::SizeCap {
            size: d,
            cap: NAIVE_MAX_DIM,
        });
    }

    let term = |perm: &[usize]| {
        perm.iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (i, &j)| acc * m[(i, j)])
    };

    let mut perm: Vec<usize> = (0..d).collect();
    let mut counters = vec![0usize; d];
    let mut total = term(&perm);
    let mut i = 1;
    while i < d {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            total += term(&perm);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// Builds the square matrix whose row index `i` appears `row_mult[i]` times
/// and column index `j` appears `col_mult[j]` times, in ascending mode order.
pub fn expanded_submatrix(
    u: &ComplexMatrix,
    row_mult: &[usize],
    col_mult: &[usize],
) -> Result<ComplexMatrix> {
    if u.rows() != row_mult.len() || u.cols() != col_mult.len() {
        return Err(Error::Shape(format!(
            "multiplicities of length {}/{} for a {}x{} matrix",
            row_mult.len(),
            col_mult.len(),
            u.rows(),
            u.cols()
        )));
    }
    let rows = expand(row_mult);
    let cols = expand(col_mult);
    if rows.len() != cols.len() {
        return Err(Error::Shape(format!(
            "row multiplicities total {} but column multiplicities total {}",
            rows.len(),
            cols.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        u[(rows[r], cols[c])]
    }))
}

fn expand(mult: &[usize]) -> Vec<usize> {
    mult.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
        .collect()
}
