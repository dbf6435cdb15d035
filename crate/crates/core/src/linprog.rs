//! Dense two-phase primal simplex for small equality-form programs
//! `min c'x  s.t.  A x = b, x >= 0`.
//!
//! Phase one minimizes the sum of artificial variables (no big-M); Bland's
//! rule fixes the pivot order, which makes the solver deterministic and
//! cycle-free. Rows and columns are equilibrated internally, so callers may
//! pass badly scaled data; solutions are reported in the original scale.
//!
//! Redundant equality rows are tolerated: artificials that cannot be driven
//! out of the basis after phase one have their rows dropped.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct LPProblem {
    /// Constraint rows of `A` (each of length `num_vars`).
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Cost vector `c` (length `num_vars`).
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LPStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPSolution {
    pub status: LPStatus,
    /// Primal point (all zeros unless `status == Optimal`); tiny negative
    /// round-off is clamped to zero.
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Basic variable indices, one per independent constraint row, sorted.
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LPError {
    /// Pivot budget `50 * (num_vars + num_rows)` exhausted.
    IterationLimit { pivots: usize },
    BadShape { detail: &'static str },
}

impl core::fmt::Display for LPError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LPError::IterationLimit { pivots } => {
                write!(f, "simplex pivot budget exhausted after {pivots} pivots")
            }
            LPError::BadShape { detail } => write!(f, "malformed LP: {detail}"),
        }
    }
}

impl core::error::Error for LPError {}

struct Tableau {
    /// `m` rows of length `n + m + 1` (original vars, artificials, rhs).
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, same length; the rhs slot holds minus the current
    /// objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    n: usize,
    tol: f64,
    pivots: usize,
    budget: usize,
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len() - 1)
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let cols = self.rows[r].len();
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][e] = 1.0;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][e];
            if f != 0.0 {
                for j in 0..cols {
                    self.rows[i][j] -= f * self.rows[r][j];
                }
                self.rows[i][e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for j in 0..cols {
                self.obj[j] -= f * self.rows[r][j];
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Bland's rule: entering column is the smallest index with a negative
    /// reduced cost; the leaving row breaks ratio ties by the smallest basic
    /// variable index.
    fn run(&mut self, active_cols: usize) -> Result<LoopEnd, LPError> {
        let rhs = self.rhs_col();
        loop {
            let mut entering = None;
            for j in 0..active_cols {
                if self.obj[j] < -self.tol {
                    entering = Some(j);
                    break;
                }
            }
            let Some(e) = entering else {
                return Ok(LoopEnd::Optimal);
            };

            let mut leave: Option<usize> = None;
            let mut best = f64::INFINITY;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a > self.tol {
                    let ratio = self.rows[i][rhs] / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best - self.tol
                                || (math::abs(ratio - best) <= self.tol && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        best = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(LoopEnd::Unbounded);
            };
            self.pivot(r, e);
            if self.pivots > self.budget {
                return Err(LPError::IterationLimit { pivots: self.pivots });
            }
        }
    }
}

struct Scaled {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// `x_original[j] = rhs_scale * col_scale[j] * x_scaled[j]`.
    col_scale: Vec<f64>,
    rhs_scale: f64,
    /// Scaled problem proved infeasible during preprocessing (a zero row
    /// with nonzero right-hand side).
    trivially_infeasible: bool,
}

fn equilibrate(rows: &[Vec<f64>], rhs: &[f64], tol: f64) -> Scaled {
    let n = rows.first().map_or(0, |r| r.len());
    let mut out_rows = Vec::new();
    let mut out_rhs = Vec::new();
    let mut trivially_infeasible = false;

    let rhs_norm = rhs.iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
    for (row, &b) in rows.iter().zip(rhs) {
        let r = row.iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
        if r == 0.0 {
            if math::abs(b) > tol * (1.0 + rhs_norm) {
                trivially_infeasible = true;
            }
            continue; // vacuous row either way
        }
        out_rows.push(row.iter().map(|&v| v / r).collect::<Vec<f64>>());
        out_rhs.push(b / r);
    }

    let mut col_scale = vec![1.0; n];
    for j in 0..n {
        let m = out_rows.iter().fold(0.0f64, |m, row| m.max(math::abs(row[j])));
        if m > 0.0 {
            col_scale[j] = 1.0 / m;
        }
    }
    for row in &mut out_rows {
        for j in 0..n {
            row[j] *= col_scale[j];
        }
    }
    // Bring the rhs to unit size in both directions: feasibility thresholds
    // downstream are absolute, so a uniformly tiny rhs must be scaled up,
    // not just a large one down.
    let m = out_rhs.iter().fold(0.0f64, |acc, &v| acc.max(math::abs(v)));
    let rhs_scale = if m > 0.0 { m } else { 1.0 };
    for b in &mut out_rhs {
        *b /= rhs_scale;
    }
    Scaled {
        rows: out_rows,
        rhs: out_rhs,
        col_scale,
        rhs_scale,
        trivially_infeasible,
    }
}

fn validate(p: &LPProblem) -> Result<usize, LPError> {
    let n = p.objective.len();
    if p.rows.len() != p.rhs.len() {
        return Err(LPError::BadShape { detail: "row/rhs count mismatch" });
    }
    if p.rows.iter().any(|r| r.len() != n) {
        return Err(LPError::BadShape { detail: "row length differs from objective length" });
    }
    if p.rhs.iter().chain(p.objective.iter()).any(|v| !v.is_finite())
        || p.rows.iter().flatten().any(|v| !v.is_finite())
    {
        return Err(LPError::BadShape { detail: "non-finite input" });
    }
    Ok(n)
}

/// Solves `min c'x  s.t.  A x = b, x >= 0`.
pub fn solve(p: &LPProblem, tol_lp: f64) -> Result<LPSolution, LPError> {
    let n = validate(p)?;
    let budget = 50 * (n + p.rows.len());
    match solve_inner(p, n, tol_lp, budget, false)? {
        Outcome::Solved(sol) => Ok(sol),
        Outcome::NotOptimal(status) => Ok(LPSolution {
            status,
            x: vec![0.0; n],
            objective_value: 0.0,
            basis: Vec::new(),
        }),
    }
}

/// Phase-one feasibility of `A x = b, x >= 0`; the witness is a feasible
/// point in the original scale.
pub fn feasible(
    rows: &[Vec<f64>],
    rhs: &[f64],
    tol_lp: f64,
) -> Result<(bool, Option<Vec<f64>>), LPError> {
    let n = rows.first().map_or(0, |r| r.len());
    let p = LPProblem {
        rows: rows.to_vec(),
        rhs: rhs.to_vec(),
        objective: vec![0.0; n],
    };
    let n = validate(&p)?;
    let budget = 50 * (n + rows.len());
    match solve_inner(&p, n, tol_lp, budget, true)? {
        Outcome::Solved(sol) => Ok((true, Some(sol.x))),
        Outcome::NotOptimal(_) => Ok((false, None)),
    }
}

enum Outcome {
    Solved(LPSolution),
    NotOptimal(LPStatus),
}

fn solve_inner(
    p: &LPProblem,
    n: usize,
    tol_lp: f64,
    budget: usize,
    phase_one_only: bool,
) -> Result<Outcome, LPError> {
    let scaled = equilibrate(&p.rows, &p.rhs, tol_lp);
    if scaled.trivially_infeasible {
        return Ok(Outcome::NotOptimal(LPStatus::Infeasible));
    }
    let m = scaled.rows.len();
    if m == 0 {
        // No constraints left: x = 0 is optimal for c >= 0, unbounded below
        // otherwise (any negative-cost variable can grow freely).
        if !phase_one_only && p.objective.iter().any(|&c| c < -tol_lp) {
            return Ok(Outcome::NotOptimal(LPStatus::Unbounded));
        }
        return Ok(Outcome::Solved(LPSolution {
            status: LPStatus::Optimal,
            x: vec![0.0; n],
            objective_value: 0.0,
            basis: Vec::new(),
        }));
    }

    // Assemble [A | I | b] with rhs flipped nonnegative.
    let cols = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; cols];
        let flip = if scaled.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = flip * scaled.rows[i][j];
        }
        row[n + i] = 1.0;
        row[cols - 1] = flip * scaled.rhs[i];
        rows.push(row);
    }

    // Phase-one reduced costs: minimize the artificial sum.
    let mut obj = vec![0.0; cols];
    for j in 0..n {
        obj[j] = -rows.iter().map(|r| r[j]).sum::<f64>();
    }
    obj[cols - 1] = -rows.iter().map(|r| r[cols - 1]).sum::<f64>();

    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        n,
        tol: tol_lp,
        pivots: 0,
        budget,
    };
    match t.run(n)? {
        LoopEnd::Optimal => {}
        // Phase one is bounded below by zero; an unbounded ray here means
        // numerical trouble, surfaced as a budget error.
        LoopEnd::Unbounded => return Err(LPError::IterationLimit { pivots: t.pivots }),
    }
    let rhs_col = t.rhs_col();
    let phase1_value = -t.obj[rhs_col];
    if phase1_value > tol_lp * 10.0 {
        return Ok(Outcome::NotOptimal(LPStatus::Infeasible));
    }

    // Leftover artificials sit at values bounded by the phase-one optimum.
    // Zero them before driving them out: a pivot would otherwise divide the
    // residue by its (possibly tiny, possibly negative) pivot element and
    // amplify it into a visibly negative basic value.
    for i in 0..t.rows.len() {
        if t.basis[i] >= t.n {
            t.rows[i][rhs_col] = 0.0;
        }
    }

    // Drive leftover artificials out of the basis (degenerate pivots on the
    // largest available column); rows with no usable column are numerically
    // dependent on the others and dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= t.n {
            let mut best_j = None;
            let mut best = 1e-7;
            for j in 0..t.n {
                let v = math::abs(t.rows[i][j]);
                if v > best {
                    best = v;
                    best_j = Some(j);
                }
            }
            match best_j {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    if !phase_one_only {
        // Phase-two reduced costs for the scaled cost vector.
        let c_scaled: Vec<f64> = (0..n)
            .map(|j| p.objective[j] * scaled.col_scale[j])
            .collect();
        let cols_now = t.rhs_col() + 1;
        let mut obj = vec![0.0; cols_now];
        for j in 0..n {
            obj[j] = c_scaled[j];
        }
        for (i, &bi) in t.basis.iter().enumerate() {
            debug_assert!(bi < t.n);
            let cb = c_scaled[bi];
            if cb != 0.0 {
                for j in 0..cols_now {
                    obj[j] -= cb * t.rows[i][j];
                }
            }
        }
        for &bi in &t.basis {
            obj[bi] = 0.0;
        }
        t.obj = obj;
        match t.run(n)? {
            LoopEnd::Optimal => {}
            LoopEnd::Unbounded => return Ok(Outcome::NotOptimal(LPStatus::Unbounded)),
        }
    }

    // Map the basic solution back to the original scale; roundoff negatives
    // are clamped at the scaled level, where the feasibility tolerance lives.
    let rhs_col = t.rhs_col();
    let mut x = vec![0.0; n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            let mut v = t.rows[i][rhs_col];
            if v < 0.0 {
                debug_assert!(v > -tol_lp * 1e3, "scaled basic value {v} too negative");
                v = 0.0;
            }
            x[bi] = v * scaled.rhs_scale * scaled.col_scale[bi];
        }
    }
    let objective_value = x
        .iter()
        .zip(&p.objective)
        .map(|(&xi, &ci)| xi * ci)
        .sum::<f64>();
    let mut basis: Vec<usize> = t.basis.iter().copied().filter(|&b| b < n).collect();
    basis.sort_unstable();
    Ok(Outcome::Solved(LPSolution {
        status: LPStatus::Optimal,
        x,
        objective_value,
        basis,
    }))
}
