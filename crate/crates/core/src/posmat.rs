//! Entrywise-nonnegative matrices and vectors, and the combinatorial
//! structure of the influence digraph: irreducibility, cyclicity degree,
//! and the cyclic normal form.
//!
//! Digraph convention: there is an edge `i -> j` exactly when `A[j][i]`
//! exceeds the structural-zero tolerance, i.e. state `i` feeds state `j`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::Mat;
use crate::math;

/// Dense square matrix with all entries finite and `>= 0`, enforced at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    n: usize,
    data: Vec<f64>, // row-major, n * n
}

/// Dense vector with all entries finite and `>= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegVector {
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PosmatError {
    /// A matrix entry was negative (or NaN).
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// A vector entry was negative (or NaN).
    NegativeVecEntry { index: usize, value: f64 },
    NonFinite { row: usize, col: usize },
    NotSquare { rows: usize, cols: usize },
    DimMismatch { expected: usize, got: usize },
    /// The influence digraph is not strongly connected; carries the
    /// strongly connected components for diagnostics.
    Reducible { components: Vec<Vec<usize>> },
}

impl core::fmt::Display for PosmatError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PosmatError::NegativeEntry { row, col, value } => {
                write!(f, "negative entry {value} at ({row}, {col})")
            }
            PosmatError::NegativeVecEntry { index, value } => {
                write!(f, "negative vector entry {value} at {index}")
            }
            PosmatError::NonFinite { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            PosmatError::NotSquare { rows, cols } => {
                write!(f, "expected a square matrix, got {rows} x {cols}")
            }
            PosmatError::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            PosmatError::Reducible { components } => {
                write!(f, "matrix is reducible ({} strongly connected components)", components.len())
            }
        }
    }
}

impl core::error::Error for PosmatError {}

impl NonnegMatrix {
    /// Builds from row slices, rejecting non-square shapes and negative or
    /// non-finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, PosmatError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(PosmatError::NotSquare { rows: n, cols: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    if v.is_nan() {
                        return Err(PosmatError::NegativeEntry { row: i, col: j, value: v });
                    }
                    return Err(PosmatError::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(PosmatError::NegativeEntry { row: i, col: j, value: v });
                }
                data.push(v);
            }
        }
        Ok(NonnegMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        NonnegMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn mul_vec(&self, v: &NonnegVector) -> NonnegVector {
        debug_assert_eq!(self.n, v.dim());
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.get(i, j) * v.data[j];
            }
            out[i] = s;
        }
        NonnegVector { data: out }
    }

    /// Product of two nonnegative matrices; closed under nonnegativity.
    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let m = self.as_mat().matmul(&other.as_mat());
        NonnegMatrix { n: self.n, data: m.data }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = NonnegMatrix::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        acc
    }

    /// Entrywise scaling by a nonnegative factor.
    pub fn scale(&self, s: f64) -> Self {
        debug_assert!(s >= 0.0);
        NonnegMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.as_mat().inf_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x))
    }

    pub(crate) fn as_mat(&self) -> Mat {
        Mat {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }
}

impl NonnegVector {
    pub fn new(entries: &[f64]) -> Result<Self, PosmatError> {
        for (i, &v) in entries.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(PosmatError::NegativeVecEntry { index: i, value: v });
            }
        }
        Ok(NonnegVector { data: entries.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(math::abs(x)))
    }
}

/// Combinatorial structure of the influence digraph of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureInfo {
    pub irreducible: bool,
    /// Cyclicity degree `h`: gcd of all cycle lengths of the digraph.
    pub cyclicity_h: usize,
    /// `permutation[new] = old`: relabeling that brings the matrix to
    /// cyclic normal form.
    pub permutation: Vec<usize>,
    /// Sizes of the `h` cyclic classes in the order they appear in the
    /// normal form.
    pub block_sizes: Vec<usize>,
}

/// Checks that `A` and `b` describe a well-formed single-input positive
/// system (matching dimensions; nonnegativity is enforced by the types).
pub fn validate_positive_system(a: &NonnegMatrix, b: &NonnegVector) -> Result<(), PosmatError> {
    if a.dim() != b.dim() {
        return Err(PosmatError::DimMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Successor lists of the influence digraph: `adj[i]` holds every `j` with
/// an edge `i -> j`, i.e. `A[j][i] > tol_zero`.
fn adjacency(a: &NonnegMatrix, tol_zero: f64) -> Vec<Vec<usize>> {
    let n = a.dim();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if a.get(j, i) > tol_zero {
                adj[i].push(j);
            }
        }
    }
    adj
}

/// Strongly connected components of the influence digraph (Kosaraju),
/// returned with each component's vertex list sorted.
pub fn strongly_connected_components(a: &NonnegMatrix, tol_zero: f64) -> Vec<Vec<usize>> {
    let n = a.dim();
    let adj = adjacency(a, tol_zero);
    let mut radj = vec![Vec::new(); n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            radj[v].push(u);
        }
    }

    // First pass: finish order on the forward graph, iterative DFS.
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        visited[start] = true;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < adj[u].len() {
                let v = adj[u][*next];
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }

    // Second pass: reverse graph in reverse finish order.
    let mut comp = vec![usize::MAX; n];
    let mut components = Vec::new();
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Whether the influence digraph is strongly connected. A `1 x 1` matrix is
/// irreducible exactly when its single entry is positive.
pub fn is_irreducible(a: &NonnegMatrix, tol_zero: f64) -> bool {
    if a.dim() == 1 {
        return a.get(0, 0) > tol_zero;
    }
    strongly_connected_components(a, tol_zero).len() == 1
}

/// BFS levels from vertex 0; requires every vertex reachable.
fn bfs_levels(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut level = vec![usize::MAX; n];
    let mut queue = alloc::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0usize);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    debug_assert!(level.iter().all(|&l| l != usize::MAX));
    level
}

/// Cyclicity degree of an irreducible matrix: the gcd of all cycle lengths,
/// computed as the gcd of `level[u] + 1 - level[v]` over all edges `u -> v`
/// of a BFS level labeling.
pub fn cyclicity_degree(a: &NonnegMatrix, tol_zero: f64) -> Result<usize, PosmatError> {
    let components = strongly_connected_components(a, tol_zero);
    if components.len() != 1 || !is_irreducible(a, tol_zero) {
        return Err(PosmatError::Reducible { components });
    }
    let adj = adjacency(a, tol_zero);
    let level = bfs_levels(&adj);
    let mut g: u64 = 0;
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            // BFS guarantees level[v] <= level[u] + 1.
            let diff = (level[u] + 1 - level[v]) as u64;
            g = math::gcd(g, diff);
        }
    }
    debug_assert!(g >= 1);
    Ok(g as usize)
}

/// Permutes an irreducible matrix into cyclic normal form: `h` zero diagonal
/// blocks with the nonzero blocks on the superdiagonal and in the bottom-left
/// corner. For `h = 1` the permutation is the identity and the matrix is
/// returned unchanged.
pub fn cyclic_normal_form(
    a: &NonnegMatrix,
    tol_zero: f64,
) -> Result<(StructureInfo, NonnegMatrix), PosmatError> {
    let n = a.dim();
    let h = cyclicity_degree(a, tol_zero)?;
    if h == 1 {
        return Ok((
            StructureInfo {
                irreducible: true,
                cyclicity_h: 1,
                permutation: (0..n).collect(),
                block_sizes: vec![n],
            },
            a.clone(),
        ));
    }

    let adj = adjacency(a, tol_zero);
    let level = bfs_levels(&adj);
    // Cyclic classes: vertices whose BFS levels agree mod h. Listing the
    // classes in descending order puts the nonzero blocks on the
    // superdiagonal.
    let mut classes = vec![Vec::new(); h];
    for v in 0..n {
        classes[level[v] % h].push(v);
    }
    let mut permutation = Vec::with_capacity(n);
    let mut block_sizes = Vec::with_capacity(h);
    for c in (0..h).rev() {
        block_sizes.push(classes[c].len());
        permutation.extend_from_slice(&classes[c]);
    }

    let mut data = vec![0.0; n * n];
    for new_i in 0..n {
        for new_j in 0..n {
            data[new_i * n + new_j] = a.get(permutation[new_i], permutation[new_j]);
        }
    }
    let info = StructureInfo {
        irreducible: true,
        cyclicity_h: h,
        permutation,
        block_sizes,
    };
    Ok((info, NonnegMatrix { n, data }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> NonnegMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        NonnegMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn rejects_negative_entry() {
        let err = NonnegMatrix::from_rows(&[vec![1.0, -0.1], vec![0.0, 1.0]]).unwrap_err();
        assert_eq!(
            err,
            PosmatError::NegativeEntry { row: 0, col: 1, value: -0.1 }
        );
    }

    #[test]
    fn rejects_nan_and_ragged() {
        assert!(NonnegMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(NonnegMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(NonnegVector::new(&[0.0, -1.0]).is_err());
    }

    #[test]
    fn zero_b_is_a_valid_system() {
        let a = NonnegMatrix::identity(3);
        let b = NonnegVector::new(&[0.0, 0.0, 0.0]).unwrap();
        assert!(validate_positive_system(&a, &b).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = NonnegMatrix::identity(3);
        let b = NonnegVector::new(&[1.0, 2.0]).unwrap();
        assert_eq!(
            validate_positive_system(&a, &b),
            Err(PosmatError::DimMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn identity_is_reducible() {
        let a = NonnegMatrix::identity(3);
        assert!(!is_irreducible(&a, 1e-12));
        let comps = strongly_connected_components(&a, 1e-12);
        assert_eq!(comps.len(), 3);
    }

    #[test]
    fn two_cycle_has_cyclicity_two() {
        let a = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(is_irreducible(&a, 1e-12));
        assert_eq!(cyclicity_degree(&a, 1e-12).unwrap(), 2);
    }

    #[test]
    fn self_loop_forces_cyclicity_one() {
        // 2-cycle plus a self loop: cycle lengths {1, 2}, gcd 1.
        let a = mat(&[&[0.5, 1.0], &[1.0, 0.0]]);
        assert_eq!(cyclicity_degree(&a, 1e-12).unwrap(), 1);
    }

    #[test]
    fn scalar_matrix_cases() {
        let pos = mat(&[&[2.0]]);
        assert!(is_irreducible(&pos, 1e-12));
        assert_eq!(cyclicity_degree(&pos, 1e-12).unwrap(), 1);

        let zero = mat(&[&[0.0]]);
        assert!(!is_irreducible(&zero, 1e-12));
        assert!(cyclicity_degree(&zero, 1e-12).is_err());
    }

    #[test]
    fn weighted_three_cycle() {
        let a = mat(&[
            &[0.0, 0.0, 2.5],
            &[0.7, 0.0, 0.0],
            &[0.0, 1.3, 0.0],
        ]);
        assert_eq!(cyclicity_degree(&a, 1e-12).unwrap(), 3);
        let (info, ahat) = cyclic_normal_form(&a, 1e-12).unwrap();
        assert_eq!(info.block_sizes, vec![1, 1, 1]);
        // All diagonal entries vanish in the normal form.
        for i in 0..3 {
            assert_eq!(ahat.get(i, i), 0.0);
        }
        // The permutation reproduces the original matrix.
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ahat.get(i, j), a.get(info.permutation[i], info.permutation[j]));
            }
        }
    }

    #[test]
    fn reducible_error_carries_partition() {
        // Block triangular: {0} feeds {1} but not back.
        let a = mat(&[&[1.0, 0.0], &[1.0, 1.0]]);
        match cyclicity_degree(&a, 1e-12) {
            Err(PosmatError::Reducible { components }) => {
                let mut flat: Vec<usize> = components.into_iter().flatten().collect();
                flat.sort_unstable();
                assert_eq!(flat, vec![0, 1]);
            }
            other => panic!("expected Reducible, got {other:?}"),
        }
    }

    #[test]
    fn normal_form_blocks_are_superdiagonal() {
        // 4 states in two cyclic classes {0, 2} and {1, 3}.
        let a = mat(&[
            &[0.0, 1.0, 0.0, 0.5],
            &[2.0, 0.0, 1.0, 0.0],
            &[0.0, 0.5, 0.0, 1.0],
            &[1.0, 0.0, 2.0, 0.0],
        ]);
        assert_eq!(cyclicity_degree(&a, 1e-12).unwrap(), 2);
        let (info, ahat) = cyclic_normal_form(&a, 1e-12).unwrap();
        assert_eq!(info.block_sizes, vec![2, 2]);
        // Diagonal blocks are zero.
        let (b0, b1) = (info.block_sizes[0], info.block_sizes[1]);
        for i in 0..b0 {
            for j in 0..b0 {
                assert_eq!(ahat.get(i, j), 0.0);
            }
        }
        for i in 0..b1 {
            for j in 0..b1 {
                assert_eq!(ahat.get(b0 + i, b0 + j), 0.0);
            }
        }
    }

    #[test]
    fn cyclicity_is_invariant_under_relabeling() {
        let a = mat(&[
            &[0.0, 0.0, 2.5],
            &[0.7, 0.0, 0.0],
            &[0.0, 1.3, 0.0],
        ]);
        // Swap states 0 and 2.
        let p = [2usize, 1, 0];
        let mut rows = vec![vec![0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = a.get(p[i], p[j]);
            }
        }
        let b = NonnegMatrix::from_rows(&rows).unwrap();
        assert_eq!(
            cyclicity_degree(&a, 1e-12).unwrap(),
            cyclicity_degree(&b, 1e-12).unwrap()
        );
    }
}
