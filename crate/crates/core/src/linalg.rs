//! Dense Cholesky factorization with pivot reporting.
//!
//! nalgebra's factorization only signals failure; the samplers need the
//! offending pivot for their error messages, so the factor is computed here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

const BLOCK: usize = 48;

impl Cholesky {
    /// Factors the lower triangle of `a` in place. The strict upper triangle
    /// is ignored and zeroed.
    ///
    /// Right-looking by column blocks: each block is factored left-looking,
    /// then the trailing matrix is updated with one matrix product.
    pub fn factor(mut a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "Cholesky needs a square matrix");
        let mut min_pivot = f64::INFINITY;
        let data = a.as_mut_slice();
        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + BLOCK).min(n);
            for j in k0..k1 {
                let (done, rest) = data.split_at_mut(j * n);
                let target = &mut rest[j..n];
                for k in k0..j {
                    let col_k = &done[k * n..(k + 1) * n];
                    let ljk = col_k[j];
                    if ljk == 0.0 {
                        continue;
                    }
                    for (d, s) in target.iter_mut().zip(&col_k[j..n]) {
                        *d -= ljk * s;
                    }
                }
                let pivot = target[0];
                min_pivot = min_pivot.min(pivot);
                if !(pivot > 0.0) || !pivot.is_finite() {
                    return Err(Error::NotPositiveDefinite {
                        min_pivot: if pivot.is_nan() { f64::NAN } else { min_pivot },
                    });
                }
                let d = pivot.sqrt();
                target[0] = d;
                for v in &mut target[1..] {
                    *v /= d;
                }
            }
            if k1 < n {
                // A22 -= P P', P = rows k1.., columns k0..k1.
                let m = n - k1;
                let (left, right) = data.split_at_mut(k1 * n);
                let panel = &left[k0 * n + k1..];
                gemm(
                    (m, k1 - k0, m),
                    -1.0,
                    Strided::new(panel, 1, n),
                    Strided::new(panel, n, 1),
                    1.0,
                    &mut right[k1..],
                    (1, n),
                );
            }
            k0 = k1;
        }
        for j in 1..n {
            for i in 0..j {
                a[(i, j)] = 0.0;
            }
        }
        Ok(Self { l: a })
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `L z = b` in place.
    pub fn forward_in_place(&self, b: &mut DVector<f64>) {
        let n = self.dim();
        let b = b.as_mut_slice();
        for j in 0..n {
            let col = &self.l.as_slice()[j * n..(j + 1) * n];
            let v = b[j] / col[j];
            b[j] = v;
            if v != 0.0 {
                for i in j + 1..n {
                    b[i] -= v * col[i];
                }
            }
        }
    }

    /// Solves `L^T z = b` in place.
    pub fn backward_in_place(&self, b: &mut DVector<f64>) {
        let n = self.dim();
        let b = b.as_mut_slice();
        for j in (0..n).rev() {
            let col = &self.l.as_slice()[j * n..(j + 1) * n];
            let mut s = b[j];
            for i in j + 1..n {
                s -= col[i] * b[i];
            }
            b[j] = s / col[j];
        }
    }

    /// Solves `A z = b` in place.
    pub fn solve_in_place(&self, b: &mut DVector<f64>) {
        self.forward_in_place(b);
        self.backward_in_place(b);
    }
}

/// Read-only strided view: element `(i, j)` sits at `i * row_stride + j * col_stride`.
#[derive(Clone, Copy)]
struct Strided<'a> {
    data: &'a [f64],
    row_stride: usize,
    col_stride: usize,
}

impl<'a> Strided<'a> {
    fn new(data: &'a [f64], row_stride: usize, col_stride: usize) -> Self {
        Self {
            data,
            row_stride,
            col_stride,
        }
    }

    fn check(&self, rows: usize, cols: usize) {
        if rows > 0 && cols > 0 {
            assert!((rows - 1) * self.row_stride + (cols - 1) * self.col_stride < self.data.len());
        }
    }
}

/// `C = alpha A B + beta C` for an `m x k` view `A` and `k x n` view `B`.
/// `C` is column-major-like with strides `c_strides`.
fn gemm(
    (m, k, n): (usize, usize, usize),
    alpha: f64,
    a: Strided<'_>,
    b: Strided<'_>,
    beta: f64,
    c: &mut [f64],
    c_strides: (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    a.check(m, k);
    b.check(k, n);
    Strided::new(c, c_strides.0, c_strides.1).check(m, n);
    // SAFETY: the checks above keep every addressed element inside its
    // slice, and `c` is a unique borrow distinct from `a` and `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.row_stride as isize,
            a.col_stride as isize,
            b.data.as_ptr(),
            b.row_stride as isize,
            b.col_stride as isize,
            beta,
            c.as_mut_ptr(),
            c_strides.0 as isize,
            c_strides.1 as isize,
        );
    }
}

/// Writes the lower triangle (diagonal included) of `S S'` into `out`,
/// computed block-row by block-row so the upper triangle is mostly skipped.
/// Entries above the diagonal are unspecified.
pub fn lower_gram_into(s: &DMatrix<f64>, out: &mut DMatrix<f64>) {
    let (n, p) = (s.nrows(), s.ncols());
    assert_eq!((out.nrows(), out.ncols()), (n, n), "gram output has the wrong shape");
    let src = s.as_slice();
    let mut i0 = 0;
    while i0 < n {
        let i1 = (i0 + BLOCK).min(n);
        gemm(
            (i1 - i0, p, i1),
            1.0,
            Strided::new(&src[i0..], 1, n),
            Strided::new(src, n, 1),
            0.0,
            &mut out.as_mut_slice()[i0..],
            (1, n),
        );
        i0 = i1;
    }
}
