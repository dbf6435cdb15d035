//! Finitely generated cones in the nonnegative orthant, represented by
//! their generator columns. Membership and inclusion questions reduce to
//! small feasibility programs; the simplicial enumeration solves every
//! `n x n` generator subsystem instead and reports all basic nonnegative
//! decompositions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dense::{self, Mat};
use crate::math;
use crate::linprog::{self, LPError};
use crate::posmat::NonnegMatrix;
use crate::Tolerances;

/// Condition estimate above which an enumeration subsystem is skipped.
const COND_CAP: f64 = 1e12;
/// Subset budget for the simplicial enumeration.
const SUBSET_CAP: u128 = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCone {
    dim: usize,
    /// Generator columns, each of length `dim`; zero columns are dropped at
    /// construction.
    generators: Vec<Vec<f64>>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeError {
    NegativeGenerator { col: usize, row: usize, value: f64 },
    DimMismatch { expected: usize, got: usize },
    /// Generators do not span the ambient space, so the simplicial
    /// enumeration cannot run.
    RankDeficient { rank: usize },
    /// `C(N, n)` exceeds the enumeration budget.
    CombinatorialBudget { subsets: u128 },
    Lp(LPError),
}

impl core::fmt::Display for ConeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConeError::NegativeGenerator { col, row, value } => {
                write!(f, "generator {col} has negative entry {value} at row {row}")
            }
            ConeError::DimMismatch { expected, got } => {
                write!(f, "expected dimension {expected}, got {got}")
            }
            ConeError::RankDeficient { rank } => {
                write!(f, "generators have rank {rank}, below the ambient dimension")
            }
            ConeError::CombinatorialBudget { subsets } => {
                write!(f, "enumeration over {subsets} subsets exceeds the budget")
            }
            ConeError::Lp(e) => write!(f, "membership program: {e}"),
        }
    }
}

impl core::error::Error for ConeError {}

impl From<LPError> for ConeError {
    fn from(e: LPError) -> Self {
        ConeError::Lp(e)
    }
}

/// One basic nonnegative decomposition found by the enumeration: the
/// generator subset used and the coefficients on those generators.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicDecomposition {
    pub subset: Vec<usize>,
    pub coefficients: Vec<f64>,
}

impl GeneratorCone {
    /// Builds a cone from generator columns; zero columns (below `tol_zero`
    /// in every entry) are dropped together with their labels.
    pub fn new(
        dim: usize,
        columns: &[Vec<f64>],
        labels: Option<&[String]>,
        tol_zero: f64,
    ) -> Result<Self, ConeError> {
        let mut generators = Vec::new();
        let mut kept_labels = Vec::new();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != dim {
                return Err(ConeError::DimMismatch { expected: dim, got: col.len() });
            }
            for (i, &v) in col.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(ConeError::NegativeGenerator { col: j, row: i, value: v });
                }
            }
            if col.iter().all(|&v| v <= tol_zero) {
                continue;
            }
            generators.push(col.clone());
            kept_labels.push(match labels {
                Some(ls) => ls.get(j).cloned().unwrap_or_else(|| format!("g{j}")),
                None => format!("g{j}"),
            });
        }
        Ok(GeneratorCone { dim, generators, labels: kept_labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn constraint_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.generators.iter().map(|g| g[i]).collect())
            .collect()
    }

    /// Whether `p` lies in the cone, with nonnegative combination
    /// coefficients as the witness. Unaffected by positive rescaling of any
    /// generator column (the program is equilibrated internally).
    pub fn member(&self, p: &[f64], tol: &Tolerances) -> Result<(bool, Option<Vec<f64>>), ConeError> {
        if p.len() != self.dim {
            return Err(ConeError::DimMismatch { expected: self.dim, got: p.len() });
        }
        let (ok, witness) = linprog::feasible(&self.constraint_rows(), p, tol.tol_lp)?;
        Ok((ok, witness))
    }

    /// Whether every generator of `other` lies in `self`.
    pub fn includes(&self, other: &GeneratorCone, tol: &Tolerances) -> Result<bool, ConeError> {
        if other.dim != self.dim {
            return Err(ConeError::DimMismatch { expected: self.dim, got: other.dim });
        }
        for g in &other.generators {
            if !self.member(g, tol)?.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether the cone is invariant under `A`: `A g` stays inside for every
    /// generator `g`.
    pub fn a_invariant(&self, a: &NonnegMatrix, tol: &Tolerances) -> Result<bool, ConeError> {
        if a.dim() != self.dim {
            return Err(ConeError::DimMismatch { expected: self.dim, got: a.dim() });
        }
        let am = a.as_mat();
        for g in &self.generators {
            let img = am.mat_vec(g);
            if !self.member(&img, tol)?.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All basic nonnegative decompositions of `p` over `n`-subsets of the
    /// generators. Requires full row rank; subsystems with a condition
    /// estimate above `1e12` are skipped. Membership holds iff the list is
    /// nonempty.
    pub fn decompose_by_enumeration(
        &self,
        p: &[f64],
        tol: &Tolerances,
    ) -> Result<Vec<BasicDecomposition>, ConeError> {
        let n = self.dim;
        if p.len() != n {
            return Err(ConeError::DimMismatch { expected: n, got: p.len() });
        }
        let gmat = self.generator_matrix();
        let rank = dense::rank(&gmat, tol.tol_rank * gmat.inf_norm().max(1.0));
        if rank < n {
            return Err(ConeError::RankDeficient { rank });
        }
        let total = binomial(self.generators.len() as u128, n as u128);
        if total > SUBSET_CAP {
            return Err(ConeError::CombinatorialBudget { subsets: total });
        }

        let accept = tol.tol_lp * (1.0 + p.iter().fold(0.0f64, |m, &v| m.max(math::abs(v))));
        let mut found = Vec::new();
        let mut subset: Vec<usize> = (0..n).collect();
        loop {
            let mut sub = Mat::zeros(n, n);
            for (c, &j) in subset.iter().enumerate() {
                for i in 0..n {
                    sub[(i, c)] = self.generators[j][i];
                }
            }
            if let Some((z, cond)) = dense::lu_solve(&sub, p) {
                if cond <= COND_CAP && z.iter().all(|&v| v >= -accept) {
                    found.push(BasicDecomposition {
                        subset: subset.clone(),
                        coefficients: z.iter().map(|&v| v.max(0.0)).collect(),
                    });
                }
            }
            if !advance_combination(&mut subset, self.generators.len()) {
                break;
            }
        }
        Ok(found)
    }

    /// Projections `g / sum(g)` of the generators onto the probability
    /// simplex; well-defined because zero generators were dropped.
    pub fn project_simplex(&self) -> Vec<Vec<f64>> {
        self.generators
            .iter()
            .map(|g| {
                let s: f64 = g.iter().sum();
                g.iter().map(|&v| v / s).collect()
            })
            .collect()
    }

    /// Merges generators that are equal after sup-norm normalization,
    /// within `merge_tol`; the first label of each group survives.
    pub fn dedup(&self, merge_tol: f64) -> GeneratorCone {
        let mut generators: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        let normalized = |g: &[f64]| {
            let m = g.iter().fold(0.0f64, |m, &v| m.max(v));
            g.iter().map(|&v| v / m).collect::<Vec<f64>>()
        };
        for (g, label) in self.generators.iter().zip(&self.labels) {
            let gn = normalized(g);
            let duplicate = generators.iter().any(|kept: &Vec<f64>| {
                let kn = normalized(kept);
                kn.iter().zip(&gn).all(|(&a, &b)| math::abs(a - b) <= merge_tol)
            });
            if !duplicate {
                generators.push(g.clone());
                labels.push(label.clone());
            }
        }
        GeneratorCone { dim: self.dim, generators, labels }
    }

    pub(crate) fn generator_matrix(&self) -> Mat {
        let mut m = Mat::zeros(self.dim, self.generators.len());
        for (j, g) in self.generators.iter().enumerate() {
            for i in 0..self.dim {
                m[(i, j)] = g[i];
            }
        }
        m
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Advances `subset` to the next lexicographic `k`-combination of `0..n`;
/// returns false when exhausted.
fn advance_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn cone(dim: usize, cols: &[&[f64]]) -> GeneratorCone {
        let cols: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
        GeneratorCone::new(dim, &cols, None, 1e-12).unwrap()
    }

    #[test]
    fn membership_with_unique_witness() {
        let c = cone(2, &[&[2.0, 1.0], &[12.0, 24.0]]);
        let (ok, w) = c.member(&[3.0, 2.0], &tol()).unwrap();
        assert!(ok);
        let w = w.unwrap();
        assert!((w[0] - 4.0 / 3.0).abs() < 1e-9);
        assert!((w[1] - 1.0 / 36.0).abs() < 1e-9);

        let (outside, w) = c.member(&[0.0, 1.0], &tol()).unwrap();
        assert!(!outside);
        assert!(w.is_none());
    }

    #[test]
    fn membership_ignores_generator_scaling() {
        let c1 = cone(2, &[&[1.0, 0.2], &[0.3, 1.0]]);
        let c2 = cone(2, &[&[1e8, 0.2e8], &[0.3e-6, 1e-6]]);
        for p in [[1.0, 1.0], [1.0, 0.1], [0.05, 1.0], [2.0, 0.1]] {
            assert_eq!(
                c1.member(&p, &tol()).unwrap().0,
                c2.member(&p, &tol()).unwrap().0
            );
        }
    }

    #[test]
    fn zero_generators_are_dropped() {
        let c = cone(2, &[&[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(c.num_generators(), 1);
        assert_eq!(c.labels(), &["g1".to_string()]);
    }

    #[test]
    fn empty_cone_contains_only_origin() {
        let c = cone(2, &[]);
        assert!(c.member(&[0.0, 0.0], &tol()).unwrap().0);
        assert!(!c.member(&[1.0, 0.0], &tol()).unwrap().0);
    }

    #[test]
    fn inclusion_is_ordered() {
        let orthant = cone(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let ray = cone(2, &[&[1.0, 1.0]]);
        assert!(orthant.includes(&ray, &tol()).unwrap());
        assert!(!ray.includes(&orthant, &tol()).unwrap());
    }

    #[test]
    fn invariance_under_identity_and_rotation() {
        let ray = cone(2, &[&[1.0, 0.0]]);
        let id = NonnegMatrix::identity(2);
        assert!(ray.a_invariant(&id, &tol()).unwrap());

        let swap = NonnegMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(!ray.a_invariant(&swap, &tol()).unwrap());
        let orthant = cone(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(orthant.a_invariant(&swap, &tol()).unwrap());
    }

    #[test]
    fn enumeration_agrees_with_lp_membership() {
        let mut state = 0xdeadbeefu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let t = tol();
        for _ in 0..40 {
            let n = 3;
            let big = 5;
            let cols: Vec<Vec<f64>> = (0..big)
                .map(|_| (0..n).map(|_| 0.2 + next()).collect())
                .collect();
            let c = GeneratorCone::new(n, &cols, None, 1e-12).unwrap();
            // Inside point by construction, outside candidate near an axis.
            let inside: Vec<f64> = (0..n)
                .map(|i| cols.iter().map(|g| g[i]).sum::<f64>() * 0.3)
                .collect();
            let outside = vec![1.0, 1e-3, 1e-3];
            for p in [inside, outside] {
                let lp = c.member(&p, &t).unwrap().0;
                let enumerated = !c.decompose_by_enumeration(&p, &t).unwrap().is_empty();
                assert_eq!(lp, enumerated, "disagreement on {p:?}");
            }
        }
    }

    #[test]
    fn enumeration_rejects_rank_deficient_generators() {
        let c = cone(2, &[&[1.0, 1.0], &[2.0, 2.0]]);
        match c.decompose_by_enumeration(&[1.0, 1.0], &tol()) {
            Err(ConeError::RankDeficient { rank }) => assert_eq!(rank, 1),
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let cols: Vec<Vec<f64>> = (0..80)
            .map(|j| {
                let t = j as f64;
                vec![1.0 + t, 2.0 + (t * 1.7) % 5.0, 3.0 + (t * 2.3) % 7.0]
            })
            .collect();
        let c = GeneratorCone::new(3, &cols, None, 1e-12).unwrap();
        match c.decompose_by_enumeration(&[1.0, 1.0, 1.0], &tol()) {
            Err(ConeError::CombinatorialBudget { subsets }) => {
                assert_eq!(subsets, 82_160);
            }
            other => panic!("expected CombinatorialBudget, got {other:?}"),
        }
    }

    #[test]
    fn projection_lands_on_the_simplex() {
        let c = cone(3, &[&[2.0, 1.0, 1.0], &[0.0, 5.0, 0.0]]);
        for p in c.project_simplex() {
            let s: f64 = p.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn dedup_merges_scaled_duplicates() {
        let c = cone(2, &[&[1.0, 2.0], &[2.0, 4.0], &[1.0, 0.0]]);
        let d = c.dedup(1e-9);
        assert_eq!(d.num_generators(), 2);
        assert_eq!(d.labels()[0], "g0");
    }

    #[test]
    fn combination_advancement_is_lexicographic() {
        let mut s = vec![0usize, 1];
        let mut all = vec![s.clone()];
        while advance_combination(&mut s, 4) {
            all.push(s.clone());
        }
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }
}
