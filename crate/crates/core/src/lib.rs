//! Analysis of single-input positive linear systems
//! `x(t+1) = A x(t) + b u(t)` with `A >= 0` entrywise, `b >= 0`, and
//! nonnegative scalar inputs.
//!
//! The crate decides whether the reachable sets of such a system — the cones
//! spanned by `b, Ab, A^2 b, ...`, either over all finite horizons or in the
//! limit — are finitely generated, computes generator representations when
//! they are, and certifies membership of target states via linear
//! programming.
//!
//! Organisation:
//!
//! * [`posmat`] — nonnegative matrix/vector types, irreducibility and
//!   cyclicity via the influence digraph, cyclic normal form.
//! * [`spectral`] — dense eigenvalue computation, Perron splits, rational
//!   angle classification, and the nonnegative-recursion machinery.
//! * [`linprog`] — a dense two-phase primal simplex solver.
//! * [`cones`] — finitely generated cones: membership, inclusion,
//!   invariance, and basic-solution enumeration.
//! * [`controllability`] — the system-level decision procedures tying the
//!   above together.
//! * [`sampling`] — deterministic random system generation for the
//!   verification suites.
//!
//! The crate is `no_std`-compatible (it allocates, but performs no IO); the
//! `std` feature is on by default and builds without it must enable `libm`
//! for float math.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("poscon-core requires either the `std` or the `libm` feature");

mod dense;
mod exact;
mod math;

pub mod cones;
pub mod controllability;
pub mod linprog;
pub mod posmat;
pub mod sampling;
pub mod spectral;

pub use controllability::SystemSI;
pub use posmat::{NonnegMatrix, NonnegVector};

/// Numerical tolerances and budgets used throughout the crate.
///
/// The defaults are the tuned values the analysis routines were validated
/// with; the CLI exposes each one as a flag and embeds the effective values
/// in every report.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Entries with absolute value at or below this count as structural zeros
    /// (digraph edges, generator dropping).
    pub tol_zero: f64,
    /// Absolute tolerance for eigenvalue comparisons (dominance, positivity).
    pub tol_eig: f64,
    /// Clustering width for eigenvalue multiplicity decisions.
    pub tol_cluster: f64,
    /// Rational-angle detection: accept `p/q` when within this of the
    /// normalized angle.
    pub tol_angle: f64,
    /// Largest denominator tried by rational-angle detection.
    pub q_max: u32,
    /// Pivot and feasibility tolerance of the simplex solver.
    pub tol_lp: f64,
    /// Convergence threshold for the normalized power limit.
    pub tol_lim: f64,
    /// Rank threshold factor: singular values of the reachability matrix
    /// below `tol_rank * norm` count as zero.
    pub tol_rank: f64,
    /// Simulation replay tolerance factor (scaled by `1 + ||target||`).
    pub tol_sim: f64,
    /// Residual factor allowed when replaying a recursion certificate.
    pub tol_recur: f64,
    /// Horizon bound for the direct polyhedrality iterations and the
    /// recursion degree search.
    pub k_max: usize,
}

impl Tolerances {
    /// Defaults with the horizon bound adjusted for an `n`-state system:
    /// `k_max = max(20, 5n)`.
    pub fn for_dim(n: usize) -> Self {
        Tolerances {
            k_max: 20usize.max(5 * n),
            ..Tolerances::default()
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_zero: 1e-12,
            tol_eig: 1e-8,
            tol_cluster: 1e-6,
            tol_angle: 1e-9,
            q_max: 64,
            tol_lp: 1e-9,
            tol_lim: 1e-10,
            tol_rank: 1e-10,
            tol_sim: 1e-8,
            tol_recur: 1e-6,
            k_max: 20,
        }
    }
}
