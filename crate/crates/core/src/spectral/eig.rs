//! Dense nonsymmetric eigenvalue computation: radix-2 balancing,
//! Householder reduction to upper Hessenberg form, then Francis
//! double-shift QR. Eigenvalues only — the analysis never needs the
//! eigenvector matrix, Perron directions come from power limits instead.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dense::Mat;
use crate::math;

/// Total QR sweep budget, scaled by the matrix order.
pub(crate) const SWEEPS_PER_DIM: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EigenFailure {
    pub sweeps: usize,
}

/// Similarity scaling so that row and column norms roughly agree; powers of
/// two only, so entries are rescaled without rounding.
fn balance(h: &mut Mat) {
    let n = h.rows;
    let radix = 2.0f64;
    let b2 = radix * radix;
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += math::abs(h[(j, i)]);
                    r += math::abs(h[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = c + r;
            let mut c_acc = c;
            let mut g = r / radix;
            while c_acc < g {
                f *= radix;
                c_acc *= b2;
            }
            g = r * radix;
            while c_acc >= g {
                f /= radix;
                c_acc /= b2;
            }
            if (c_acc + r) / f < 0.95 * s {
                converged = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    h[(i, j)] *= ginv;
                }
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Householder similarity reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut Mat) {
    let n = h.rows;
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += math::abs(h[(i, m - 1)]);
        }
        if scale == 0.0 {
            continue;
        }
        let mut hsq = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hsq += ort[i] * ort[i];
        }
        let mut g = math::sqrt(hsq);
        if ort[m] > 0.0 {
            g = -g;
        }
        hsq -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hsq;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hsq;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Eigenvalues of a general real square matrix. The input need not be
/// nonnegative; the caller gets the full spectrum with conjugate pairs
/// produced exactly conjugate.
pub(crate) fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>, EigenFailure> {
    debug_assert_eq!(a.rows, a.cols);
    let nn = a.rows;
    if nn == 0 {
        return Ok(Vec::new());
    }
    if nn == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    francis_qr(&mut h)
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn francis_qr(h: &mut Mat) -> Result<Vec<Complex64>, EigenFailure> {
    let nn = h.rows;
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let eps = f64::EPSILON;
    let budget = SWEEPS_PER_DIM * nn;
    let mut sweeps = 0usize;

    let low = 0usize;
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += math::abs(h[(i, j)]);
        }
    }

    let mut n = nn - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut x, mut y, mut w);

    loop {
        // Find a negligible subdiagonal element.
        let mut l = n;
        while l > low {
            s = math::abs(h[(l - 1, l - 1)]) + math::abs(h[(l, l)]);
            if s == 0.0 {
                s = norm;
            }
            if math::abs(h[(l, l - 1)]) < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One real root.
            h[(n, n)] += exshift;
            d[n] = h[(n, n)];
            e[n] = 0.0;
            if n == low {
                break;
            }
            n -= 1;
            iter = 0;
        } else if l + 1 == n {
            // A 2x2 block delivers two roots, real or conjugate.
            w = h[(n, n - 1)] * h[(n - 1, n)];
            p = (h[(n - 1, n - 1)] - h[(n, n)]) / 2.0;
            q = p * p + w;
            z = math::sqrt(math::abs(q));
            h[(n, n)] += exshift;
            h[(n - 1, n - 1)] += exshift;
            x = h[(n, n)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[n - 1] = x + z;
                d[n] = d[n - 1];
                if z != 0.0 {
                    d[n] = x - w / z;
                }
                e[n - 1] = 0.0;
                e[n] = 0.0;
            } else {
                d[n - 1] = x + p;
                d[n] = x + p;
                e[n - 1] = z;
                e[n] = -z;
            }
            if n == low + 1 {
                break;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form the double shift.
            x = h[(n, n)];
            y = h[(n - 1, n - 1)];
            w = h[(n, n - 1)] * h[(n - 1, n)];

            if iter == 10 || iter == 20 {
                // Exceptional shift to break symmetry stalls.
                exshift += x;
                for i in low..=n {
                    h[(i, i)] -= x;
                }
                s = math::abs(h[(n, n - 1)]) + math::abs(h[(n - 1, n - 2)]);
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            iter += 1;
            sweeps += 1;
            if sweeps > budget {
                return Err(EigenFailure { sweeps });
            }

            // Look for two consecutive small subdiagonals.
            let mut m = n - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = math::abs(p) + math::abs(q) + math::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if math::abs(h[(m, m - 1)]) * (math::abs(q) + math::abs(r))
                    < eps
                        * (math::abs(p)
                            * (math::abs(h[(m - 1, m - 1)])
                                + math::abs(z)
                                + math::abs(h[(m + 1, m + 1)])))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=n {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR sweep on rows l..=n, columns m..=n.
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = math::abs(p) + math::abs(q) + math::abs(r);
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = math::sqrt(p * p + q * q + r * r);
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..=n {
                    let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        pp += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= pp * z;
                    }
                    h[(k, j)] -= pp * x;
                    h[(k + 1, j)] -= pp * y;
                }
                let top = n.min(k + 3);
                for i in l..=top {
                    let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        pp += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= pp * r;
                    }
                    h[(i, k)] -= pp;
                    h[(i, k + 1)] -= pp * q;
                }
            }
        }
    }

    Ok((0..nn).map(|i| Complex64::new(d[i], e[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_close(mut got: Vec<Complex64>, mut want: Vec<Complex64>, tol: f64) {
        let key = |c: &Complex64| (c.re, c.im);
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!(
                math::hypot(g.re - w.re, g.im - w.im) < tol,
                "got {got:?}, want {want:?}"
            );
        }
    }

    #[test]
    fn diagonal_matrix() {
        let m = Mat::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.5, 0.0],
            vec![0.0, 0.0, 0.25],
        ]);
        sorted_close(
            eigenvalues(&m).unwrap(),
            vec![
                Complex64::new(3.0, 0.0),
                Complex64::new(-1.5, 0.0),
                Complex64::new(0.25, 0.0),
            ],
            1e-12,
        );
    }

    #[test]
    fn rotation_block_gives_conjugate_pair() {
        // 90-degree rotation: eigenvalues +/- i.
        let m = Mat::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        sorted_close(
            eigenvalues(&m).unwrap(),
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
            1e-12,
        );
    }

    #[test]
    fn companion_matrix_roots() {
        // Companion of (x-1)(x-2)(x-3)(x+4) = x^4 - 2x^3 - 13x^2 + 38x - 24.
        let m = Mat::from_rows(&[
            vec![2.0, 13.0, -38.0, 24.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        sorted_close(
            eigenvalues(&m).unwrap(),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(-4.0, 0.0),
            ],
            1e-9,
        );
    }

    #[test]
    fn cycle_matrix_has_roots_of_unity() {
        let m = Mat::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let half = 3.0f64.sqrt() / 2.0;
        sorted_close(
            eigenvalues(&m).unwrap(),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-0.5, half),
                Complex64::new(-0.5, -half),
            ],
            1e-12,
        );
    }

    #[test]
    fn trace_and_determinant_match() {
        // Deterministic pseudo-random matrices; eigenvalue sums and products
        // must reproduce trace and determinant.
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 2..=6 {
            for _ in 0..20 {
                let mut m = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = next() * 2.0 - 1.0;
                    }
                }
                let eigs = eigenvalues(&m).unwrap();
                let tr: f64 = (0..n).map(|i| m[(i, i)]).sum();
                let sum: Complex64 = eigs.iter().sum();
                assert!((sum.re - tr).abs() < 1e-8, "trace mismatch at n={n}");
                assert!(sum.im.abs() < 1e-8);
                // Conjugate pairing is exact by construction.
                let im_total: f64 = eigs.iter().map(|c| c.im).sum();
                assert_eq!(im_total, 0.0);
            }
        }
    }

    #[test]
    fn badly_scaled_matrix_is_balanced() {
        // Same spectrum as [[1, 1], [1, 1]] but scaled by 1e8 off-diagonal.
        let m = Mat::from_rows(&[vec![1.0, 1.0e8], vec![1.0e-8, 1.0]]);
        sorted_close(
            eigenvalues(&m).unwrap(),
            vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
            1e-9,
        );
    }
}
