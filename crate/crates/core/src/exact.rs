//! Exact rational certification of column absorption.
//!
//! Floating-point feasibility cannot tell a column that merely came
//! exponentially close to the cone of its predecessors from one that truly
//! entered it: once the gap shrinks below machine resolution the LP accepts
//! either way, and for a geometric gap `r^k` that happens within a few dozen
//! steps whenever `r < 1`. Matrix and vector entries are dyadic rationals,
//! so the Krylov columns and the membership question have exact
//! representations; this module answers it with no tolerances at all.

use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::posmat::{NonnegMatrix, NonnegVector};

/// Krylov column chain `b, Ab, A^2 b, ...` carried in exact arithmetic.
pub(crate) struct ExactKrylov {
    a: Vec<Vec<BigRational>>,
    cols: Vec<Vec<BigRational>>,
    head: Vec<BigRational>,
}

impl ExactKrylov {
    pub fn new(a: &NonnegMatrix, b: &NonnegVector) -> Self {
        let n = a.dim();
        let a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| rational(a.get(i, j))).collect())
            .collect();
        let head = b.as_slice().iter().map(|&v| rational(v)).collect();
        ExactKrylov {
            a,
            cols: Vec::new(),
            head,
        }
    }

    /// Append the head to the stored columns and advance it one power.
    pub fn step(&mut self) {
        let n = self.a.len();
        let next: Vec<BigRational> = (0..n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for j in 0..n {
                    acc += &self.a[i][j] * &self.head[j];
                }
                acc
            })
            .collect();
        self.cols.push(core::mem::replace(&mut self.head, next));
    }

    /// Is the head a nonnegative combination of the stored columns?
    pub fn head_member(&self) -> bool {
        cone_member(&self.cols, &self.head)
    }
}

/// Exact dyadic value of a float; finite inputs only.
fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite entry")
}

/// Phase-1 simplex with Bland's rule over the rationals: feasibility of
/// `cols * x = target, x >= 0`. Bland's pivoting cannot cycle, and with
/// exact arithmetic the zero test on the artificial objective is sharp.
fn cone_member(cols: &[Vec<BigRational>], target: &[BigRational]) -> bool {
    let n = target.len();
    let m = cols.len();
    if m == 0 {
        return target.iter().all(Zero::is_zero);
    }

    // Row-normalize signs so every right-hand side is nonnegative, then
    // adjoin one artificial column per row. `tab` is n x (m + n).
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(n);
    for i in 0..n {
        let flip = target[i].is_negative();
        let mut row: Vec<BigRational> = Vec::with_capacity(m + n);
        for col in cols {
            row.push(if flip { -&col[i] } else { col[i].clone() });
        }
        for j in 0..n {
            row.push(if j == i {
                BigRational::one()
            } else {
                BigRational::zero()
            });
        }
        tab.push(row);
        rhs.push(if flip {
            -&target[i]
        } else {
            target[i].clone()
        });
    }

    // Minimize the artificial sum. `obj[j]` carries z_j - c_j for the
    // all-artificial starting basis; `value` is the current artificial sum.
    let mut basis: Vec<usize> = (m..m + n).collect();
    let mut obj: Vec<BigRational> = (0..m + n)
        .map(|j| {
            let mut s = BigRational::zero();
            for row in &tab {
                s += &row[j];
            }
            if j >= m {
                s -= BigRational::one();
            }
            s
        })
        .collect();
    let mut value = rhs
        .iter()
        .fold(BigRational::zero(), |acc, v| acc + v);

    loop {
        let Some(enter) = (0..m + n).find(|&j| obj[j].is_positive()) else {
            return value.is_zero();
        };
        // Ratio test; ties resolved toward the smallest basic variable.
        let mut leave: Option<usize> = None;
        for i in 0..n {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    match (&rhs[i] * &tab[l][enter]).cmp(&(&rhs[l] * &tab[i][enter])) {
                        core::cmp::Ordering::Less => true,
                        core::cmp::Ordering::Equal => basis[i] < basis[l],
                        core::cmp::Ordering::Greater => false,
                    }
                }
            };
            if better {
                leave = Some(i);
            }
        }
        let Some(leave) = leave else {
            // Unbounded below cannot happen for a sum of nonnegative
            // artificials; defensively report infeasible.
            return false;
        };

        let pivot = tab[leave][enter].clone();
        for x in tab[leave].iter_mut() {
            *x /= &pivot;
        }
        rhs[leave] /= &pivot;
        for i in 0..n {
            if i == leave || tab[i][enter].is_zero() {
                continue;
            }
            let f = tab[i][enter].clone();
            for j in 0..m + n {
                let d = &f * &tab[leave][j];
                tab[i][j] -= d;
            }
            let d = &f * &rhs[leave];
            rhs[i] -= d;
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for j in 0..m + n {
                let d = &f * &tab[leave][j];
                obj[j] -= d;
            }
            let d = &f * &rhs[leave];
            value -= d;
        }
        basis[leave] = enter;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rats(vals: &[f64]) -> Vec<BigRational> {
        vals.iter().map(|&v| rational(v)).collect()
    }

    #[test]
    fn boundary_membership_is_accepted() {
        let cols = vec![rats(&[1.0, 0.0]), rats(&[1.0, 1.0])];
        assert!(cone_member(&cols, &rats(&[3.0, 0.0])));
        assert!(cone_member(&cols, &rats(&[2.0, 2.0])));
        assert!(cone_member(&cols, &rats(&[3.0, 1.0])));
    }

    #[test]
    fn tiny_outside_gap_is_rejected() {
        // A point 2^-80 outside the cone: far below any float tolerance,
        // but exactly resolvable.
        let half = BigRational::new(1.into(), 2.into());
        let mut eps = BigRational::one();
        for _ in 0..80 {
            eps *= &half;
        }
        let cols = vec![rats(&[1.0, 0.0]), rats(&[1.0, 1.0])];
        let mut p = rats(&[1.0, 0.0]);
        p[1] = -eps;
        assert!(!cone_member(&cols, &p));
    }

    #[test]
    fn krylov_chain_matches_float_powers() {
        let a = NonnegMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let b = NonnegVector::new(&[1.0, 0.0]).unwrap();
        let mut kry = ExactKrylov::new(&a, &b);
        kry.step();
        kry.step();
        // A^2 b = 2 b exactly: on the first stored ray.
        assert!(kry.head_member());
    }

    #[test]
    fn geometric_glide_never_absorbs() {
        // spec(A) = {1, 1/2} with full Krylov rank: the second column's
        // gap halves every step but never reaches the cone.
        let a = NonnegMatrix::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let b = NonnegVector::new(&[1.0, 0.0]).unwrap();
        let mut kry = ExactKrylov::new(&a, &b);
        for _ in 0..60 {
            kry.step();
            assert!(!kry.head_member());
        }
    }
}
