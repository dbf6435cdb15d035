//! Deterministic sampling of structured test systems: strictly positive
//! matrices, block-cyclic matrices with prescribed cyclicity, and weighted
//! single cycles. Used by the randomized verification suites; seeds are
//! explicit so every run is reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::posmat::{NonnegMatrix, NonnegVector};

/// SplitMix64: tiny, full-period, equidistributed enough for test sampling.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Strictly positive matrix: irreducible and primitive (`h = 1`) by
/// construction, entries bounded away from zero.
pub fn random_primitive(rng: &mut Rng, n: usize) -> NonnegMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.range(0.05, 1.05)).collect())
        .collect();
    NonnegMatrix::from_rows(&rows).expect("entries are positive")
}

/// Block-cyclic matrix with cyclicity exactly `h`: states split into `h`
/// near-equal classes, and every entry from class `c` into class `c+1 mod h`
/// is strictly positive. Requires `1 <= h <= n`.
pub fn random_cyclic(rng: &mut Rng, n: usize, h: usize) -> NonnegMatrix {
    assert!(h >= 1 && h <= n);
    if h == 1 {
        return random_primitive(rng, n);
    }
    let base = n / h;
    let rem = n % h;
    let mut class = vec![0usize; n];
    let mut idx = 0;
    for c in 0..h {
        let size = base + usize::from(c < rem);
        for _ in 0..size {
            class[idx] = c;
            idx += 1;
        }
    }
    let mut rows = vec![vec![0.0; n]; n];
    for col in 0..n {
        for row in 0..n {
            if class[row] == (class[col] + 1) % h {
                rows[row][col] = rng.range(0.1, 1.1);
            }
        }
    }
    NonnegMatrix::from_rows(&rows).expect("entries are nonnegative")
}

/// Single weighted `n`-cycle `1 -> 2 -> ... -> n -> 1` with positive
/// weights: irreducible with cyclicity `n`.
pub fn random_cycle_weighted(rng: &mut Rng, n: usize) -> NonnegMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[(i + 1) % n][i] = rng.range(0.2, 2.2);
    }
    NonnegMatrix::from_rows(&rows).expect("entries are nonnegative")
}

/// Strictly positive input vector.
pub fn random_positive_vector(rng: &mut Rng, n: usize) -> NonnegVector {
    let v: Vec<f64> = (0..n).map(|_| rng.range(0.1, 1.1)).collect();
    NonnegVector::new(&v).expect("entries are positive")
}

/// Input vector with a single positive entry at a random position.
pub fn random_axis_vector(rng: &mut Rng, n: usize) -> NonnegVector {
    let mut v = vec![0.0; n];
    v[rng.below(n)] = rng.range(0.5, 1.5);
    NonnegVector::new(&v).expect("entries are nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posmat;

    #[test]
    fn sequences_are_reproducible() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::new(43);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = Rng::new(7);
        for _ in 0..1000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn primitive_samples_have_cyclicity_one() {
        let mut rng = Rng::new(1);
        for n in 2..=5 {
            let a = random_primitive(&mut rng, n);
            assert!(posmat::is_irreducible(&a, 1e-12));
            assert_eq!(posmat::cyclicity_degree(&a, 1e-12).unwrap(), 1);
        }
    }

    #[test]
    fn cyclic_samples_have_requested_cyclicity() {
        let mut rng = Rng::new(2);
        for &(n, h) in &[(4, 2), (5, 3), (6, 2), (6, 3), (3, 3)] {
            let a = random_cyclic(&mut rng, n, h);
            assert!(posmat::is_irreducible(&a, 1e-12), "n={n} h={h}");
            assert_eq!(posmat::cyclicity_degree(&a, 1e-12).unwrap(), h, "n={n} h={h}");
        }
    }

    #[test]
    fn weighted_cycles_have_full_cyclicity() {
        let mut rng = Rng::new(3);
        for n in 2..=6 {
            let a = random_cycle_weighted(&mut rng, n);
            assert!(posmat::is_irreducible(&a, 1e-12));
            assert_eq!(posmat::cyclicity_degree(&a, 1e-12).unwrap(), n);
        }
    }

    #[test]
    fn axis_vectors_have_one_support_point() {
        let mut rng = Rng::new(4);
        for _ in 0..20 {
            let v = random_axis_vector(&mut rng, 5);
            let support = v.as_slice().iter().filter(|&&x| x > 0.0).count();
            assert_eq!(support, 1);
        }
    }
}
