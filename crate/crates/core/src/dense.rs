//! Minimal dense real matrix workspace shared by the solvers.
//! Row-major; no aliasing tricks, sizes here are tiny.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            debug_assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut best = 0.0;
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += math::abs(self[(i, j)]);
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(math::abs(x)))
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves the square system `M x = rhs` by LU with partial pivoting.
/// Returns the solution together with a cheap condition proxy
/// `max|U_ii| / min|U_ii|`; `None` when a pivot degenerates outright.
pub(crate) fn lu_solve(m: &Mat, rhs: &[f64]) -> Option<(Vec<f64>, f64)> {
    debug_assert_eq!(m.rows, m.cols);
    debug_assert_eq!(m.rows, rhs.len());
    let n = m.rows;
    let mut a = m.clone();
    let mut x: Vec<f64> = rhs.to_vec();
    let mut piv_max: f64 = 0.0;
    let mut piv_min = f64::INFINITY;

    for k in 0..n {
        let mut p = k;
        let mut best = math::abs(a[(k, k)]);
        for i in k + 1..n {
            let v = math::abs(a[(i, k)]);
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            x.swap(k, p);
        }
        piv_max = piv_max.max(best);
        piv_min = piv_min.min(best);
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= a[(k, j)] * x[j];
        }
        x[k] = s / a[(k, k)];
    }
    let cond = if piv_min > 0.0 { piv_max / piv_min } else { f64::INFINITY };
    Some((x, cond))
}

/// Numerical row rank of an arbitrary `rows x cols` matrix via Householder QR
/// with column pivoting; diagonal entries below `threshold` count as zero.
pub(crate) fn rank(m: &Mat, threshold: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let steps = rows.min(cols);
    let mut col_order: Vec<usize> = (0..cols).collect();
    let mut r = 0;
    for k in 0..steps {
        // Pivot the column with the largest remaining tail norm to front.
        let mut best_j = k;
        let mut best = -1.0;
        for j in k..cols {
            let mut s = 0.0;
            for i in k..rows {
                s += a[(i, col_order[j])] * a[(i, col_order[j])];
            }
            if s > best {
                best = s;
                best_j = j;
            }
        }
        col_order.swap(k, best_j);
        let c = col_order[k];
        let norm = math::sqrt(best.max(0.0));
        if norm <= threshold {
            break;
        }
        r += 1;
        // Householder vector for column c, rows k..
        let alpha = if a[(k, c)] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows];
        for i in k..rows {
            v[i] = a[(i, c)];
        }
        v[k] -= alpha;
        let vtv: f64 = v[k..].iter().map(|x| x * x).sum();
        if vtv <= 0.0 {
            continue;
        }
        for jj in k..cols {
            let j = col_order[jj];
            let mut dot = 0.0;
            for i in k..rows {
                dot += v[i] * a[(i, j)];
            }
            let f = 2.0 * dot / vtv;
            for i in k..rows {
                a[(i, j)] -= f * v[i];
            }
        }
    }
    r
}
