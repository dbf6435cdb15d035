//! System-level decision procedures for single-input positive systems:
//! reachability matrices, the limit cone, polyhedrality of the finite- and
//! infinite-horizon controllable sets, and target certification with input
//! reconstruction.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cones::{ConeError, GeneratorCone};
use crate::dense::{self, Mat};
use crate::exact::ExactKrylov;
use crate::linprog::{self, LPError, LPProblem, LPStatus};
use crate::math;
use crate::posmat::{
    self, NonnegMatrix, NonnegVector, PosmatError, StructureInfo,
};
use crate::spectral::{
    self, RecursionCertificate, SpectralError, SpectralSummary, SplitMode,
};
use crate::Tolerances;

/// Relative slack used when re-checking that the limit generators lie in a
/// computed polyhedral set; they come from an iterated limit, so they carry
/// more error than LP feasibility tolerates.
const LIMIT_CHECK_SLACK: f64 = 1e-6;
/// Squaring budget for the normalized power limit.
const LIMIT_SQUARINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    Structure(PosmatError),
    Spectral(SpectralError),
    Cone(ConeError),
    Lp(LPError),
    /// The reachability matrix has rank below `n`, so the generic-rank
    /// procedures don't apply (the invariant-direction special case may).
    RankDeficient { rank: usize },
    /// Spectral verdict and direct iteration contradict each other.
    Disagreement { detail: String },
    /// The normalized power iteration failed to settle within its budget.
    LimitDiverged { iterations: usize },
    /// Input reconstruction was asked for a witness that leans on limit
    /// generators, which no finite input sequence realizes.
    LimitGeneratorUsed { coefficient: f64 },
}

impl core::fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnalysisError::Structure(e) => write!(f, "{e}"),
            AnalysisError::Spectral(e) => write!(f, "{e}"),
            AnalysisError::Cone(e) => write!(f, "{e}"),
            AnalysisError::Lp(e) => write!(f, "{e}"),
            AnalysisError::RankDeficient { rank } => {
                write!(f, "reachability matrix has rank {rank} < state dimension")
            }
            AnalysisError::Disagreement { detail } => {
                write!(f, "spectral and direct verdicts disagree: {detail}")
            }
            AnalysisError::LimitDiverged { iterations } => {
                write!(f, "power limit did not settle after {iterations} squarings")
            }
            AnalysisError::LimitGeneratorUsed { coefficient } => write!(
                f,
                "witness uses a limit generator (weight {coefficient}); no finite input realizes it"
            ),
        }
    }
}

impl core::error::Error for AnalysisError {}

impl From<PosmatError> for AnalysisError {
    fn from(e: PosmatError) -> Self {
        AnalysisError::Structure(e)
    }
}

impl From<SpectralError> for AnalysisError {
    fn from(e: SpectralError) -> Self {
        AnalysisError::Spectral(e)
    }
}

impl From<ConeError> for AnalysisError {
    fn from(e: ConeError) -> Self {
        AnalysisError::Cone(e)
    }
}

impl From<LPError> for AnalysisError {
    fn from(e: LPError) -> Self {
        AnalysisError::Lp(e)
    }
}

/// A validated single-input positive system `x(t+1) = A x(t) + b u(t)` with
/// its structural and spectral summaries precomputed. Requires `A`
/// irreducible.
#[derive(Debug, Clone)]
pub struct SystemSI {
    a: NonnegMatrix,
    b: NonnegVector,
    tol: Tolerances,
    structure: StructureInfo,
    spectral: SpectralSummary,
    conmat_rank: usize,
}

/// Limit data of the normalized powers: the matrices
/// `A_f[i] = lim_k (A^{kh} / rho^{kh}) A^i`, the cone they push `b` into,
/// and the `h` Perron directions of `A^h`.
#[derive(Debug, Clone)]
pub struct LimitCone {
    pub a_f: Vec<NonnegMatrix>,
    pub c_lim: GeneratorCone,
    pub v_f: Vec<NonnegVector>,
}

/// Verdict on the finite-horizon controllable set.
#[derive(Debug, Clone)]
pub struct FinVerdict {
    pub polyhedral: bool,
    /// Smallest `k` with `A^k b` inside the span of the first `k` columns;
    /// the vertex number of the polyhedral set.
    pub k_vert: Option<usize>,
    /// Characteristic polynomial has no positive non-leading coefficient;
    /// the set is then simplicial with exactly `n` extreme rays.
    pub simplicial: Option<bool>,
    pub generators: Option<GeneratorCone>,
    /// Verdict of the eigenvalue test alone (authoritative).
    pub spectral_polyhedral: bool,
    /// Cross-check: the limit generators lie inside the computed set.
    pub limit_included: Option<bool>,
    /// Nonnegative recursion search outcome (run when polyhedral).
    pub recursion: Option<RecursionCertificate>,
}

/// Verdict on the closure of the full controllable set.
#[derive(Debug, Clone)]
pub struct InfVerdict {
    pub polyhedral: bool,
    pub k_vert_inf: Option<usize>,
    pub generators: Option<GeneratorCone>,
    /// Structural conditions on the split-off spectrum, with the first
    /// failing condition on the non-polyhedral side.
    pub certificate: RecursionCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Cone,
    Polytope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetStatus {
    /// Reached exactly by a finite nonnegative input sequence.
    ControllableFinite,
    /// In the closure but not the finite-horizon set: approachable, not
    /// attainable.
    AlmostControllable,
    /// Outside both (up to the horizon used when the finite set is not
    /// polyhedral).
    NotControllable,
}

#[derive(Debug, Clone)]
pub struct TargetVertexResult {
    pub vertex: Vec<f64>,
    pub status: TargetStatus,
    /// Coefficients over the reachability columns (and, for the almost case,
    /// the appended Perron directions).
    pub witness: Option<Vec<f64>>,
    pub used_limit_generators: bool,
    pub objective: Option<f64>,
    pub residual: Option<f64>,
    /// Input sequence `u(0..N-1)` replaying to the vertex (finite case).
    pub inputs: Option<Vec<f64>>,
    pub replay_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub kind: TargetKind,
    /// Horizon `N` of the membership systems.
    pub horizon: usize,
    /// True when the finite set is non-polyhedral, so "not controllable"
    /// only means "not within this horizon".
    pub bounded_horizon_only: bool,
    pub results: Vec<TargetVertexResult>,
}

impl SystemSI {
    /// Validates the pair and precomputes structure and spectrum. Errors on
    /// dimension mismatch, reducibility (with the component partition), and
    /// spectral failures.
    pub fn new(a: NonnegMatrix, b: NonnegVector, tol: Tolerances) -> Result<Self, AnalysisError> {
        posmat::validate_positive_system(&a, &b)?;
        let (structure, _) = posmat::cyclic_normal_form(&a, tol.tol_zero)?;
        let spectral = spectral::spectrum(&a, &tol)?;
        let conmat_cols = reach_columns(&a, &b, a.dim());
        let cm = columns_to_mat(a.dim(), &conmat_cols);
        let conmat_rank = dense::rank(&cm, tol.tol_rank * cm.inf_norm().max(1.0));
        Ok(SystemSI {
            a,
            b,
            tol,
            structure,
            spectral,
            conmat_rank,
        })
    }

    /// Like [`SystemSI::new`] with dimension-adjusted default tolerances.
    pub fn with_defaults(a: NonnegMatrix, b: NonnegVector) -> Result<Self, AnalysisError> {
        let tol = Tolerances::for_dim(a.dim());
        SystemSI::new(a, b, tol)
    }

    pub fn a(&self) -> &NonnegMatrix {
        &self.a
    }

    pub fn b(&self) -> &NonnegVector {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn structure(&self) -> &StructureInfo {
        &self.structure
    }

    pub fn spectral(&self) -> &SpectralSummary {
        &self.spectral
    }

    pub fn conmat_rank(&self) -> usize {
        self.conmat_rank
    }

    pub fn is_rank_full(&self) -> bool {
        self.conmat_rank == self.dim()
    }

    /// Reachability columns `b, Ab, ..., A^{k-1} b`.
    pub fn conmat_columns(&self, k: usize) -> Vec<Vec<f64>> {
        reach_columns(&self.a, &self.b, k)
    }

    /// The cone spanned by the first `k` reachability columns.
    pub fn conmat_cone(&self, k: usize) -> GeneratorCone {
        let cols = self.conmat_columns(k);
        let labels: Vec<String> = (0..k).map(power_label).collect();
        GeneratorCone::new(self.dim(), &cols, Some(&labels), self.tol.tol_zero)
            .expect("reachability columns are nonnegative")
    }

    /// Simulates from the origin; returns the trajectory `x(0), ..., x(N)`.
    pub fn simulate(&self, inputs: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let am = self.a.as_mat();
        let mut traj = Vec::with_capacity(inputs.len() + 1);
        let mut x = vec![0.0; n];
        traj.push(x.clone());
        for &u in inputs {
            let ax = am.mat_vec(&x);
            x = (0..n).map(|i| ax[i] + self.b.get(i) * u).collect();
            traj.push(x.clone());
        }
        traj
    }

    /// Limit matrices, limit cone, and Perron directions.
    pub fn limit_cone(&self) -> Result<LimitCone, AnalysisError> {
        let n = self.dim();
        let h = self.structure.cyclicity_h;
        let rho = self.spectral.rho;
        debug_assert!(rho > 0.0, "irreducible matrices have positive spectral radius");

        // P = lim (A/rho)^{h k} by repeated squaring; spectral radius one,
        // so the iterates stay bounded and settle geometrically.
        let normalized = self.a.scale(1.0 / rho);
        let mut p = normalized.pow(h);
        let mut iterations = 0;
        loop {
            let next = p.matmul(&p);
            let scale = p.max_abs().max(1.0);
            let mut diff = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    diff = diff.max(math::abs(next.get(i, j) - p.get(i, j)));
                }
            }
            p = next;
            iterations += 1;
            if diff <= self.tol.tol_lim * scale {
                break;
            }
            if iterations >= LIMIT_SQUARINGS || p.max_abs() > 1e12 {
                return Err(AnalysisError::LimitDiverged { iterations });
            }
        }

        // A_f[i] = P (A/rho)^i rho^i = P A^i; computed on the normalized
        // matrix and rescaled to keep intermediate magnitudes tame.
        let mut a_f = Vec::with_capacity(h);
        let mut current = p.clone();
        for i in 0..h {
            if i > 0 {
                current = current.matmul(&normalized);
            }
            a_f.push(current.scale(math::powi(rho, i)));
        }

        let c_lim_cols: Vec<Vec<f64>> = a_f
            .iter()
            .map(|m| m.mul_vec(&self.b).as_slice().to_vec())
            .collect();
        let c_lim_labels: Vec<String> = (0..h).map(|i| format!("A_f,{i} b")).collect();
        let c_lim = GeneratorCone::new(n, &c_lim_cols, Some(&c_lim_labels), self.tol.tol_zero)?;

        // Perron directions of A^h, one per cyclic block: within a block the
        // limit projection has rank one, so any of its columns points along
        // the block's Perron vector.
        let mut v_f = Vec::with_capacity(h);
        let mut offset = 0;
        for &size in &self.structure.block_sizes {
            let mut best_col = None;
            let mut best_norm = 0.0;
            for local in 0..size {
                let orig = self.structure.permutation[offset + local];
                let col: Vec<f64> = (0..n).map(|r| p.get(r, orig)).collect();
                let norm: f64 = col.iter().sum();
                if norm > best_norm {
                    best_norm = norm;
                    best_col = Some(col);
                }
            }
            let col = best_col.expect("limit projection has a nonzero column per block");
            let normalized_col: Vec<f64> = col.iter().map(|&v| v / best_norm).collect();
            v_f.push(NonnegVector::new(&normalized_col).expect("limit columns are nonnegative"));
            offset += size;
        }
        debug_assert_eq!(v_f.len(), h);

        Ok(LimitCone { a_f, c_lim, v_f })
    }

    /// Decides polyhedrality of the finite-horizon controllable set: the
    /// eigenvalue test is authoritative, the direct column iteration
    /// supplies the vertex number, and the two must agree.
    pub fn polyhedral_fin(&self) -> Result<FinVerdict, AnalysisError> {
        let n = self.dim();
        if !self.is_rank_full() {
            return Err(AnalysisError::RankDeficient { rank: self.conmat_rank });
        }
        let split = spectral::pf_split(&self.a, SplitMode::Finite, &self.tol)?;
        let thr = self.tol.tol_eig * (1.0 + split.rho);
        let spectral_polyhedral = !split
            .a2_spectrum
            .iter()
            .any(|lam| lam.re > thr && math::abs(lam.im) <= thr);

        let mut direct_k = self.first_absorbing_k_fin(true)?;
        if spectral_polyhedral && direct_k.is_none() {
            // The float prescreen can reject a boundary absorption on an
            // ill-conditioned column chain; certify the full range exactly
            // before declaring a contradiction.
            direct_k = self.first_absorbing_k_fin(false)?;
        }

        match (spectral_polyhedral, direct_k) {
            (true, Some(k_vert)) => {
                let generators = self.conmat_cone(k_vert).dedup(1e-9);
                let coeffs = spectral::char_poly(&self.spectral.eigenvalues);
                let coeff_scale = coeffs.iter().fold(1.0f64, |m, &c| m.max(math::abs(c)));
                let simplicial = coeffs[..n]
                    .iter()
                    .all(|&c| c <= 1e-8 * coeff_scale);

                let lim = self.limit_cone()?;
                let limit_included = self.limit_inclusion_check(&generators, &lim)?;
                let recursion = spectral::nonneg_recursion_coeffs(&self.a, &self.tol)?;
                if !limit_included {
                    return Err(AnalysisError::Disagreement {
                        detail: format!(
                            "finite set reported polyhedral at k={k_vert} but a limit generator falls outside"
                        ),
                    });
                }
                Ok(FinVerdict {
                    polyhedral: true,
                    k_vert: Some(k_vert),
                    simplicial: Some(simplicial),
                    generators: Some(generators),
                    spectral_polyhedral,
                    limit_included: Some(limit_included),
                    recursion: Some(recursion),
                })
            }
            (false, None) => Ok(FinVerdict {
                polyhedral: false,
                k_vert: None,
                simplicial: None,
                generators: None,
                spectral_polyhedral,
                limit_included: None,
                recursion: None,
            }),
            (true, None) => Err(AnalysisError::Disagreement {
                detail: format!(
                    "finite set spectrally polyhedral but no absorbing column through k_max={}",
                    self.tol.k_max
                ),
            }),
            (false, Some(k)) => Err(AnalysisError::Disagreement {
                detail: format!(
                    "finite set spectrally non-polyhedral but column {k} was absorbed"
                ),
            }),
        }
    }

    /// Decides polyhedrality of the closure of the controllable set. The
    /// structural conditions on the split-off spectrum are authoritative;
    /// the direct iteration (with the limit generators adjoined) supplies
    /// the vertex number.
    pub fn polyhedral_inf(&self) -> Result<InfVerdict, AnalysisError> {
        if !self.is_rank_full() {
            return Err(AnalysisError::RankDeficient { rank: self.conmat_rank });
        }
        let split = spectral::pf_split(&self.a, SplitMode::Infinite, &self.tol)?;
        let certificate =
            spectral::roitman_conditions(&split.a2_spectrum, self.structure.cyclicity_h, &self.tol);

        let direct_k = self.first_absorbing_k_inf()?;

        match (certificate.holds, direct_k) {
            (true, Some(k)) => {
                let lim = self.limit_cone()?;
                let mut cols = self.conmat_columns(k);
                let mut labels: Vec<String> = (0..k).map(power_label).collect();
                cols.extend(lim.c_lim.generators().iter().cloned());
                labels.extend(lim.c_lim.labels().iter().cloned());
                let generators =
                    GeneratorCone::new(self.dim(), &cols, Some(&labels), self.tol.tol_zero)?
                        .dedup(1e-9);
                Ok(InfVerdict {
                    polyhedral: true,
                    k_vert_inf: Some(k),
                    generators: Some(generators),
                    certificate,
                })
            }
            (false, None) => Ok(InfVerdict {
                polyhedral: false,
                k_vert_inf: None,
                generators: None,
                certificate,
            }),
            (true, None) => Err(AnalysisError::Disagreement {
                detail: format!(
                    "closure spectrally polyhedral but no absorbing column through k_max={}",
                    self.tol.k_max
                ),
            }),
            (false, Some(k)) => Err(AnalysisError::Disagreement {
                detail: format!("closure spectrally non-polyhedral but column {k} was absorbed"),
            }),
        }
    }

    /// Smallest `k <= k_max` such that `A^k b` lies in the cone of the first
    /// `k` columns, or `None`. A float LP screens candidates cheaply (pass
    /// `prescreen: false` to certify every step); membership itself is
    /// decided in exact rational arithmetic, because once the gap between
    /// `A^k b` and the cone shrinks below float resolution -- which a
    /// geometric gap does within a few dozen steps -- a float verdict cannot
    /// separate an approach from a genuine absorption.
    fn first_absorbing_k_fin(&self, prescreen: bool) -> Result<Option<usize>, AnalysisError> {
        let n = self.dim();
        let am = self.a.as_mat();
        let mut exact = ExactKrylov::new(&self.a, &self.b);
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut next = self.b.as_slice().to_vec();
        for k in 1..=self.tol.k_max {
            exact.step();
            cols.push(next.clone());
            next = am.mat_vec(&next);
            if prescreen {
                let rows: Vec<Vec<f64>> =
                    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
                let (inside, _) = linprog::feasible(&rows, &next, self.tol.tol_lp)?;
                if !inside {
                    continue;
                }
            }
            if exact.head_member() {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Smallest `k <= k_max` such that `A^k b` lies in the cone of the first
    /// `k` columns with the limit generators adjoined, or `None`. The limit
    /// generators are float approximations, so this test stays in float
    /// arithmetic at `tol_lp`.
    fn first_absorbing_k_inf(&self) -> Result<Option<usize>, AnalysisError> {
        let n = self.dim();
        let am = self.a.as_mat();
        let lim = self.limit_cone()?;
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut next = self.b.as_slice().to_vec();
        for k in 1..=self.tol.k_max {
            cols.push(next.clone());
            next = am.mat_vec(&next);
            let mut all = cols.clone();
            all.extend(lim.c_lim.generators().iter().cloned());
            let rows: Vec<Vec<f64>> = (0..n).map(|i| all.iter().map(|c| c[i]).collect()).collect();
            let (inside, _) = linprog::feasible(&rows, &next, self.tol.tol_lp)?;
            if inside {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Membership of the limit generators `A_{f,i} b` in the computed
    /// polyhedral set, tested with an interior-point slack to absorb the
    /// limit error. The per-block Perron directions themselves may spill
    /// outside the set when `h > 1` -- they span a superset of the limit
    /// cone -- so only the limit generators are binding.
    fn limit_inclusion_check(
        &self,
        generators: &GeneratorCone,
        lim: &LimitCone,
    ) -> Result<bool, AnalysisError> {
        let n = self.dim();
        let mut interior = vec![0.0; n];
        for g in generators.generators() {
            let norm = g.iter().fold(0.0f64, |m, &v| m.max(v)).max(1e-300);
            for i in 0..n {
                interior[i] += g[i] / norm;
            }
        }
        for c in lim.c_lim.generators() {
            let scale = c.iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
            let relaxed: Vec<f64> = (0..n)
                .map(|i| c[i] + LIMIT_CHECK_SLACK * scale * interior[i])
                .collect();
            if !generators.member(&relaxed, &self.tol)?.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The invariant-direction special case: when `b` itself lies in the
    /// cone of the Perron directions, the controllable set closes after `h`
    /// steps and equals the cone of the first `h` columns.
    pub fn special_case(&self) -> Result<Option<GeneratorCone>, AnalysisError> {
        let lim = self.limit_cone()?;
        let cols: Vec<Vec<f64>> = lim.v_f.iter().map(|v| v.as_slice().to_vec()).collect();
        let labels: Vec<String> = (0..cols.len()).map(|i| format!("v_f,{i}")).collect();
        let vf_cone = GeneratorCone::new(self.dim(), &cols, Some(&labels), self.tol.tol_zero)?;
        let (inside, _) = vf_cone.member(self.b.as_slice(), &self.tol)?;
        if inside {
            Ok(Some(self.conmat_cone(self.structure.cyclicity_h)))
        } else {
            Ok(None)
        }
    }

    /// Certifies each target vertex: reachable at horizon `N` (minimum-mass
    /// witness and replayed input sequence), approachable via the Perron
    /// directions, or neither. `N` defaults to the vertex number when the
    /// finite set is polyhedral and to `10 n` otherwise.
    pub fn check_target(
        &self,
        vertices: &[Vec<f64>],
        kind: TargetKind,
        horizon: Option<usize>,
    ) -> Result<CheckReport, AnalysisError> {
        let n = self.dim();
        let fin = self.polyhedral_fin()?;
        let horizon_n = match horizon {
            Some(h) => h.max(1),
            None => match fin.k_vert {
                Some(k) => k,
                None => 10 * n,
            },
        };
        let bounded_horizon_only = !fin.polyhedral;

        let m_f = self.conmat_columns(horizon_n);
        let lim = self.limit_cone()?;
        let mut m_inf = m_f.clone();
        for vf in &lim.v_f {
            m_inf.push(vf.as_slice().to_vec());
        }

        let mut results = Vec::with_capacity(vertices.len());
        for p in vertices {
            if p.len() != n {
                return Err(AnalysisError::Cone(ConeError::DimMismatch {
                    expected: n,
                    got: p.len(),
                }));
            }
            results.push(self.certify_vertex(p, &m_f, &m_inf, horizon_n)?);
        }
        Ok(CheckReport {
            kind,
            horizon: horizon_n,
            bounded_horizon_only,
            results,
        })
    }

    fn certify_vertex(
        &self,
        p: &[f64],
        m_f: &[Vec<f64>],
        m_inf: &[Vec<f64>],
        horizon_n: usize,
    ) -> Result<TargetVertexResult, AnalysisError> {
        let n = self.dim();
        let rows_f: Vec<Vec<f64>> = (0..n).map(|i| m_f.iter().map(|c| c[i]).collect()).collect();
        let problem = LPProblem {
            rows: rows_f.clone(),
            rhs: p.to_vec(),
            objective: vec![1.0; m_f.len()],
        };
        let sol = linprog::solve(&problem, self.tol.tol_lp)?;
        if sol.status == LPStatus::Optimal {
            let residual = max_residual(&rows_f, p, &sol.x);
            let inputs = reconstruct_inputs(&sol.x, horizon_n)?;
            let traj = self.simulate(&inputs);
            let last = traj.last().expect("trajectory is nonempty");
            let replay_error = last
                .iter()
                .zip(p)
                .map(|(&a, &b)| math::abs(a - b))
                .fold(0.0, f64::max);
            let p_norm = p.iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
            debug_assert!(replay_error <= self.tol.tol_sim * (1.0 + p_norm) * 10.0);
            return Ok(TargetVertexResult {
                vertex: p.to_vec(),
                status: TargetStatus::ControllableFinite,
                witness: Some(sol.x),
                used_limit_generators: false,
                objective: Some(sol.objective_value),
                residual: Some(residual),
                inputs: Some(inputs),
                replay_error: Some(replay_error),
            });
        }

        let rows_inf: Vec<Vec<f64>> =
            (0..n).map(|i| m_inf.iter().map(|c| c[i]).collect()).collect();
        let problem = LPProblem {
            rows: rows_inf.clone(),
            rhs: p.to_vec(),
            objective: vec![1.0; m_inf.len()],
        };
        let sol = linprog::solve(&problem, self.tol.tol_lp)?;
        if sol.status == LPStatus::Optimal {
            let residual = max_residual(&rows_inf, p, &sol.x);
            let limit_weight: f64 = sol.x[m_f.len()..].iter().sum();
            return Ok(TargetVertexResult {
                vertex: p.to_vec(),
                status: TargetStatus::AlmostControllable,
                witness: Some(sol.x),
                used_limit_generators: limit_weight > self.tol.tol_lp,
                objective: Some(sol.objective_value),
                residual: Some(residual),
                inputs: None,
                replay_error: None,
            });
        }
        Ok(TargetVertexResult {
            vertex: p.to_vec(),
            status: TargetStatus::NotControllable,
            witness: None,
            used_limit_generators: false,
            objective: None,
            residual: None,
            inputs: None,
            replay_error: None,
        })
    }
}

/// Reverses witness coefficients over `b, Ab, ..., A^{N-1} b` into the input
/// sequence `u(t) = c_{N-1-t}`. Coefficients beyond the reachability columns
/// (limit generators) must be absent.
pub fn reconstruct_inputs(witness: &[f64], horizon_n: usize) -> Result<Vec<f64>, AnalysisError> {
    if witness.len() > horizon_n {
        if let Some(&extra) = witness[horizon_n..].iter().find(|&&c| c > 0.0) {
            return Err(AnalysisError::LimitGeneratorUsed { coefficient: extra });
        }
    }
    let mut u = vec![0.0; horizon_n];
    for t in 0..horizon_n {
        u[t] = witness.get(horizon_n - 1 - t).copied().unwrap_or(0.0);
    }
    Ok(u)
}

fn power_label(j: usize) -> String {
    match j {
        0 => String::from("b"),
        1 => String::from("A b"),
        _ => format!("A^{j} b"),
    }
}

fn reach_columns(a: &NonnegMatrix, b: &NonnegVector, k: usize) -> Vec<Vec<f64>> {
    let am = a.as_mat();
    let mut cols = Vec::with_capacity(k);
    let mut current = b.as_slice().to_vec();
    for _ in 0..k {
        cols.push(current.clone());
        current = am.mat_vec(&current);
    }
    cols
}

fn columns_to_mat(n: usize, cols: &[Vec<f64>]) -> Mat {
    let mut m = Mat::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = c[i];
        }
    }
    m
}

fn max_residual(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> f64 {
    rows.iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let ax: f64 = row.iter().zip(x).map(|(&a, &xi)| a * xi).sum();
            math::abs(ax - b)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat(rows: &[&[f64]]) -> NonnegMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        NonnegMatrix::from_rows(&rows).unwrap()
    }

    fn system(rows: &[&[f64]], b: &[f64]) -> SystemSI {
        SystemSI::with_defaults(mat(rows), NonnegVector::new(b).unwrap()).unwrap()
    }

    /// 2-state system with one attracting and one repelling direction.
    fn small_system() -> SystemSI {
        system(&[&[4.0, 4.0], &[11.0, 2.0]], &[2.0, 1.0])
    }

    #[test]
    fn reachability_columns_and_rank() {
        let s = small_system();
        let cols = s.conmat_columns(2);
        assert_eq!(cols[0], vec![2.0, 1.0]);
        assert_eq!(cols[1], vec![12.0, 24.0]);
        assert_eq!(s.conmat_rank(), 2);
        assert!(s.is_rank_full());
    }

    #[test]
    fn reducible_systems_are_rejected() {
        let a = mat(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let b = NonnegVector::new(&[1.0, 0.0]).unwrap();
        match SystemSI::with_defaults(a, b) {
            Err(AnalysisError::Structure(PosmatError::Reducible { components })) => {
                assert_eq!(components.len(), 2);
            }
            other => panic!("expected Reducible, got {other:?}"),
        }
    }

    #[test]
    fn simulation_replays_reachability_columns() {
        let s = small_system();
        // u = (1, 0, 0): x(3) = A^2 b.
        let traj = s.simulate(&[1.0, 0.0, 0.0]);
        let cols = s.conmat_columns(3);
        assert_eq!(traj[3], cols[2]);
    }

    #[test]
    fn limit_cone_identities() {
        // Primitive case: h = 1, A A_f0 = rho A_f0.
        let s = small_system();
        let lim = s.limit_cone().unwrap();
        assert_eq!(lim.a_f.len(), 1);
        assert_eq!(lim.v_f.len(), 1);
        let rho = s.spectral().rho;
        let af0 = lim.a_f[0].as_mat();
        let prod = s.a().as_mat().matmul(&af0);
        let scale = rho * af0.max_abs().max(1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (prod[(i, j)] - rho * af0[(i, j)]).abs() <= 1e-8 * scale,
                    "limit identity violated at ({i},{j})"
                );
            }
        }
        // v_f is an eigenvector of A for rho.
        let av = s.a().mul_vec(&lim.v_f[0]);
        for i in 0..2 {
            assert_relative_eq!(av.get(i), rho * lim.v_f[0].get(i), epsilon = 1e-8 * (1.0 + rho));
        }
    }

    #[test]
    fn two_cycle_limit_directions() {
        let s = system(&[&[0.0, 1.0], &[1.0, 0.0]], &[1.0, 0.0]);
        let lim = s.limit_cone().unwrap();
        assert_eq!(lim.v_f.len(), 2);
        // Blocks are the two alternation classes; directions are the axes.
        let mut axes: Vec<Vec<f64>> = lim.v_f.iter().map(|v| v.as_slice().to_vec()).collect();
        axes.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_relative_eq!(axes[0][1], 1.0, epsilon = 1e-10);
        assert_relative_eq!(axes[1][0], 1.0, epsilon = 1e-10);
        // Limit generators: A_f0 b = b, A_f1 b = A b here.
        assert_eq!(lim.c_lim.num_generators(), 2);
    }

    #[test]
    fn finite_set_polyhedral_for_small_system() {
        let s = small_system();
        let fin = s.polyhedral_fin().unwrap();
        assert!(fin.polyhedral);
        assert_eq!(fin.k_vert, Some(2));
        assert_eq!(fin.limit_included, Some(true));
        // Spectrum {3 + sqrt(45), 3 - sqrt(45)}: char poly x^2 - 6x - 36,
        // no positive non-leading coefficient, so simplicial.
        assert_eq!(fin.simplicial, Some(true));
        let rec = fin.recursion.unwrap();
        assert!(rec.holds);
        assert_eq!(rec.degree_nm, Some(2));
    }

    #[test]
    fn special_case_detects_invariant_input_direction() {
        // 2-cycle with b on both Perron directions: b in cone(v_f).
        let s = system(&[&[0.0, 1.0], &[1.0, 0.0]], &[1.0, 1.0]);
        let special = s.special_case().unwrap();
        let cone = special.expect("b lies in the Perron cone");
        // Both columns collapse to the single ray through b.
        assert_eq!(cone.dim(), 2);

        let s = small_system();
        assert!(s.special_case().unwrap().is_none());
    }

    #[test]
    fn check_target_certifies_reachable_vertices() {
        let s = small_system();
        let report = s
            .check_target(&[vec![3.0, 2.0], vec![2.0, 3.0]], TargetKind::Cone, None)
            .unwrap();
        assert_eq!(report.horizon, 2);
        assert!(!report.bounded_horizon_only);
        for r in &report.results {
            assert_eq!(r.status, TargetStatus::ControllableFinite);
            let replay = r.replay_error.unwrap();
            assert!(replay <= 1e-8 * 4.0);
        }
        let w = report.results[0].witness.as_ref().unwrap();
        assert_relative_eq!(w[0], 4.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(w[1], 1.0 / 36.0, epsilon = 1e-9);
    }

    #[test]
    fn check_target_flags_unreachable_vertices() {
        let s = small_system();
        // (0, 1) sits outside the closure: the reachable directions lie
        // between b and the Perron direction.
        let report = s
            .check_target(&[vec![0.0, 1.0]], TargetKind::Cone, None)
            .unwrap();
        assert_eq!(report.results[0].status, TargetStatus::NotControllable);
    }

    #[test]
    fn input_reconstruction_reverses_witness() {
        let u = reconstruct_inputs(&[0.25, 0.0, 3.0], 3).unwrap();
        assert_eq!(u, vec![3.0, 0.0, 0.25]);

        let err = reconstruct_inputs(&[1.0, 0.0, 0.5], 2).unwrap_err();
        match err {
            AnalysisError::LimitGeneratorUsed { coefficient } => {
                assert_relative_eq!(coefficient, 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_polyhedral_finite_set_is_detected() {
        // Spectrum {1, 0.9, -0.8}: the positive subdominant eigenvalue
        // obstructs any nonnegative recursion.
        let s = system(
            &[
                &[0.9727, 0.0, 0.0263],
                &[0.0388, 0.1273, 0.2156],
                &[0.0, 3.4497, 0.0],
            ],
            &[0.0, 1.0, 1.0],
        );
        let fin = s.polyhedral_fin().unwrap();
        assert!(!fin.polyhedral);
        assert_eq!(fin.k_vert, None);

        let inf = s.polyhedral_inf().unwrap();
        assert!(inf.polyhedral, "closure wedge closes at the Perron direction");
        assert!(inf.k_vert_inf.is_some());
    }
}
