//! Separable two-dimensional DFT over an `rows x cols` grid stored row-major.
//!
//! Sizes here are tiny (tens of slots), so a direct evaluation with a
//! precomputed twiddle table is both exact enough and fast enough; no FFT
//! factorization is attempted.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Kernel `exp(-j 2 pi m n / L)`.
    Forward,
    /// Kernel `exp(+j 2 pi m n / L)`.
    Inverse,
}

fn twiddles(len: usize, direction: Direction) -> Vec<Complex64> {
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    (0..len)
        .map(|m| Complex64::from_polar(1.0, sign * 2.0 * PI * m as f64 / len as f64))
        .collect()
}

fn dft_1d(input: &[Complex64], table: &[Complex64], out: &mut [Complex64]) {
    let len = input.len();
    for (p, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &x) in input.iter().enumerate() {
            acc += x * table[(p * m) % len];
        }
        *o = acc;
    }
}

/// Unnormalized 2D DFT: `out[p,q] = sum_{m,l} data[m,l] w_rows^{pm} w_cols^{ql}`.
pub fn dft_2d(
    data: &[Complex64],
    rows: usize,
    cols: usize,
    direction: Direction,
) -> Vec<Complex64> {
    assert_eq!(data.len(), rows * cols, "dft_2d: buffer is not rows*cols");
    let row_table = twiddles(rows, direction);
    let col_table = twiddles(cols, direction);

    let mut stage = vec![Complex64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        dft_1d(
            &data[r * cols..(r + 1) * cols],
            &col_table,
            &mut stage[r * cols..(r + 1) * cols],
        );
    }

    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    let mut transformed = vec![Complex64::new(0.0, 0.0); rows];
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = stage[r * cols + c];
        }
        dft_1d(&column, &row_table, &mut transformed);
        for r in 0..rows {
            out[r * cols + c] = transformed[r];
        }
    }
    out
}

/// Unitary 2D DFT (scaled by `1/sqrt(rows*cols)`).
pub fn unitary_dft_2d(
    data: &[Complex64],
    rows: usize,
    cols: usize,
    direction: Direction,
) -> Vec<Complex64> {
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    let mut out = dft_2d(data, rows, cols, direction);
    out.iter_mut().for_each(|z| *z *= scale);
    out
}

/// `F * H * F^H` where `F` is the unitary forward 2D DFT on the slot grid.
///
/// Column `j` of `F H` is the transform of column `j` of `H`; right
/// multiplication by `F^H` is the same transform applied to the rows of the
/// adjoint.
pub fn conjugate_by_dft(matrix: &DMatrix<Complex64>, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let size = rows * cols;
    assert_eq!(matrix.nrows(), size);
    assert_eq!(matrix.ncols(), size);

    let left = transform_columns(matrix, rows, cols);
    let right = transform_columns(&left.adjoint(), rows, cols);
    right.adjoint()
}

fn transform_columns(matrix: &DMatrix<Complex64>, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let size = matrix.nrows();
    let mut out = DMatrix::zeros(size, matrix.ncols());
    for j in 0..matrix.ncols() {
        let column: Vec<Complex64> = matrix.column(j).iter().copied().collect();
        let t = unitary_dft_2d(&column, rows, cols, Direction::Forward);
        for i in 0..size {
            out[(i, j)] = t[i];
        }
    }
    out
}

/// Dense unitary 2D DFT matrix; used by tests and the joint-ML detector.
pub fn unitary_dft_matrix(rows: usize, cols: usize, direction: Direction) -> DMatrix<Complex64> {
    let size = rows * cols;
    let mut out = DMatrix::zeros(size, size);
    let mut unit = vec![Complex64::new(0.0, 0.0); size];
    for j in 0..size {
        unit[j] = Complex64::new(1.0, 0.0);
        let col = unitary_dft_2d(&unit, rows, cols, direction);
        unit[j] = Complex64::new(0.0, 0.0);
        for i in 0..size {
            out[(i, j)] = col[i];
        }
    }
    out
}
