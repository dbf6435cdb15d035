//! Spectral analysis of nonnegative matrices: eigenvalues, dominant
//! (peripheral) spectrum, the two ways of splitting off the Perron part,
//! rational-angle classification, and nonnegative matrix recursions
//! `A^m = c_{m-1} A^{m-1} + ... + c_0 I` with `c >= 0`.

mod eig;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dense::Mat;
use crate::linprog::{self, LPError, LPProblem, LPStatus};
use crate::math;
use crate::posmat::{self, NonnegMatrix, PosmatError};
use crate::Tolerances;

pub fn modulus(c: Complex64) -> f64 {
    math::hypot(c.re, c.im)
}

/// Argument of `c` as a fraction of a full turn, in `[0, 1)`.
pub fn angle_turns(c: Complex64) -> f64 {
    if c.re == 0.0 && c.im == 0.0 {
        return 0.0;
    }
    let mut t = math::atan2(c.im, c.re) / (2.0 * core::f64::consts::PI);
    if t < 0.0 {
        t += 1.0;
    }
    if t >= 1.0 {
        t = 0.0;
    }
    t
}

/// Canonical eigenvalue order: modulus descending, then angle ascending.
fn sort_canonical(mut eigs: Vec<Complex64>) -> Vec<Complex64> {
    eigs.sort_by(|a, b| {
        modulus(*b)
            .partial_cmp(&modulus(*a))
            .unwrap()
            .then(angle_turns(*a).partial_cmp(&angle_turns(*b)).unwrap())
    });
    eigs
}

/// Which part of the spectrum is split off as the "rest" `A_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Remove the whole dominant circle (`h` eigenvalues of modulus `rho`).
    Infinite,
    /// Remove a single instance of the Perron root `rho` only.
    Finite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// All `n` eigenvalues, conjugate-paired, canonically ordered.
    pub eigenvalues: Vec<Complex64>,
    /// Spectral radius.
    pub rho: f64,
    /// Eigenvalues of modulus `rho` (up to `tol_eig`); exactly `h` of them.
    pub dominant: Vec<Complex64>,
    pub nondominant: Vec<Complex64>,
    /// Cyclicity degree from the influence digraph, cross-checked against
    /// the dominant count.
    pub h: usize,
    /// Spectrum of the split-off part; empty until `pf_split` fills it.
    pub a2_spectrum: Vec<Complex64>,
    pub split: Option<SplitMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    Structure(PosmatError),
    /// QR sweep budget exhausted without full deflation.
    EigenFailure { sweeps: usize },
    /// Graph cyclicity and the dominant eigenvalue count disagree — a sign
    /// of an ill-conditioned spectrum.
    CyclicityMismatch { graph_h: usize, dominant_count: usize },
    Lp(LPError),
}

impl core::fmt::Display for SpectralError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpectralError::Structure(e) => write!(f, "structural error: {e}"),
            SpectralError::EigenFailure { sweeps } => {
                write!(f, "eigenvalue iteration failed to converge after {sweeps} sweeps")
            }
            SpectralError::CyclicityMismatch { graph_h, dominant_count } => write!(
                f,
                "cyclicity {graph_h} from the digraph but {dominant_count} dominant eigenvalues"
            ),
            SpectralError::Lp(e) => write!(f, "recursion search: {e}"),
        }
    }
}

impl core::error::Error for SpectralError {}

impl From<PosmatError> for SpectralError {
    fn from(e: PosmatError) -> Self {
        SpectralError::Structure(e)
    }
}

impl From<LPError> for SpectralError {
    fn from(e: LPError) -> Self {
        SpectralError::Lp(e)
    }
}

/// Full spectrum of an irreducible nonnegative matrix with the dominant
/// circle identified; `a2_spectrum` stays empty here.
pub fn spectrum(a: &NonnegMatrix, tol: &Tolerances) -> Result<SpectralSummary, SpectralError> {
    let graph_h = posmat::cyclicity_degree(a, tol.tol_zero)?;
    let eigs = eig::eigenvalues(&a.as_mat())
        .map_err(|e| SpectralError::EigenFailure { sweeps: e.sweeps })?;
    let eigenvalues = sort_canonical(eigs);
    let rho = eigenvalues.iter().copied().map(modulus).fold(0.0, f64::max);
    let thr = tol.tol_eig * (1.0 + rho);
    let mut dominant = Vec::new();
    let mut nondominant = Vec::new();
    for &lam in &eigenvalues {
        if modulus(lam) >= rho - thr {
            dominant.push(lam);
        } else {
            nondominant.push(lam);
        }
    }
    if dominant.len() != graph_h {
        return Err(SpectralError::CyclicityMismatch {
            graph_h,
            dominant_count: dominant.len(),
        });
    }
    Ok(SpectralSummary {
        eigenvalues,
        rho,
        dominant,
        nondominant,
        h: graph_h,
        a2_spectrum: Vec::new(),
        split: None,
    })
}

/// Splits the spectrum into the Perron part and the rest `A_2`.
///
/// `Infinite` removes all `h` dominant eigenvalues; `Finite` removes one
/// instance of the Perron root `rho` only, so other dominant eigenvalues
/// (negative or complex of modulus `rho`) stay in `A_2`.
pub fn pf_split(
    a: &NonnegMatrix,
    mode: SplitMode,
    tol: &Tolerances,
) -> Result<SpectralSummary, SpectralError> {
    let mut s = spectrum(a, tol)?;
    s.split = Some(mode);
    s.a2_spectrum = match mode {
        SplitMode::Infinite => s.nondominant.clone(),
        SplitMode::Finite => {
            // Drop the eigenvalue closest to the point rho on the real axis;
            // for an irreducible matrix this is the (simple) Perron root.
            let mut rest = s.eigenvalues.clone();
            let mut best = 0;
            let mut dist = f64::INFINITY;
            for (i, &lam) in rest.iter().enumerate() {
                let d = math::hypot(lam.re - s.rho, lam.im);
                if d < dist {
                    dist = d;
                    best = i;
                }
            }
            rest.remove(best);
            rest
        }
    };
    Ok(s)
}

/// Rational-angle classification of one eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleClass {
    pub lambda: Complex64,
    /// `arg(lambda) / 2 pi` in `[0, 1)`.
    pub turns: f64,
    /// Reduced fraction `p/q` in `[0, 1)` when the angle is rational with
    /// denominator at most `q_max`.
    pub rational: Option<(u64, u64)>,
}

/// Detects whether `arg(lambda)/2pi` is a rational `p/q` with `q <= q_max`,
/// via continued-fraction convergents. Any fraction that close with such a
/// small denominator is necessarily a convergent, so scanning convergents
/// is exhaustive.
pub fn classify_angle(lambda: Complex64, q_max: u32, tol_angle: f64) -> AngleClass {
    let turns = angle_turns(lambda);
    AngleClass {
        lambda,
        turns,
        rational: rational_approx(turns, u64::from(q_max), tol_angle),
    }
}

fn rational_approx(theta: f64, q_max: u64, tol: f64) -> Option<(u64, u64)> {
    debug_assert!((0.0..1.0).contains(&theta));
    // Convergent recurrence p_k = a_k p_{k-1} + p_{k-2}, same for q,
    // seeded with the usual virtual terms p_{-2}/q_{-2} = 0/1 and
    // p_{-1}/q_{-1} = 1/0.
    let (mut p_prev, mut p_curr) = (0u64, 1u64);
    let (mut q_prev, mut q_curr) = (1u64, 0u64);
    let mut x = theta;
    for _ in 0..64 {
        let a = math::floor(x) as u64;
        let p_next = a.saturating_mul(p_curr).saturating_add(p_prev);
        let q_next = a.saturating_mul(q_curr).saturating_add(q_prev);
        if q_next > q_max {
            return None;
        }
        if q_next > 0 && math::abs(theta - p_next as f64 / q_next as f64) <= tol {
            let p_mod = p_next % q_next;
            let g = if p_mod == 0 { q_next } else { math::gcd(p_mod, q_next) };
            return Some((p_mod / g, q_next / g));
        }
        p_prev = p_curr;
        p_curr = p_next;
        q_prev = q_curr;
        q_curr = q_next;
        let frac = x - math::floor(x);
        if frac < 1e-15 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

/// Smallest `M >= 1` such that every given rational dominant angle `p/q`
/// is an `(M h)`-th root-of-unity angle, i.e. `q` divides `M h`.
pub fn minimal_m(dominant_rational: &[AngleClass], h: usize) -> u64 {
    let h = h.max(1) as u64;
    let mut m = 1u64;
    for class in dominant_rational {
        if let Some((_, q)) = class.rational {
            // q | M h  <=>  (q / gcd(q, h)) | M.
            m = math::lcm(m, q / math::gcd(q, h));
        }
    }
    m.max(1)
}

/// Which structural condition a recursion certificate failed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoitmanCondition {
    /// The spectral radius of `A_2` is not attained by a positive real
    /// eigenvalue.
    C1,
    /// A dominant eigenvalue of `A_2` has an irrational angle.
    C2,
    /// A dominant eigenvalue of `A_2` is multiple.
    C3,
    /// A non-dominant eigenvalue sits on a forbidden ray `2 pi j / (M h)`.
    C4,
}

/// Outcome of a nonnegative-recursion decision, either by spectral
/// conditions (`failing_condition` set on failure) or by the direct LP
/// search (`degree_nm` and `coefficients` set on success).
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionCertificate {
    pub holds: bool,
    pub failing_condition: Option<RoitmanCondition>,
    pub degree_nm: Option<usize>,
    /// `c_0..c_{nm-1}` with `A^{nm} = sum_i c_i A^i`.
    pub coefficients: Option<Vec<f64>>,
}

impl RecursionCertificate {
    fn pass() -> Self {
        RecursionCertificate {
            holds: true,
            failing_condition: None,
            degree_nm: None,
            coefficients: None,
        }
    }

    fn fail(c: RoitmanCondition) -> Self {
        RecursionCertificate {
            holds: false,
            failing_condition: Some(c),
            degree_nm: None,
            coefficients: None,
        }
    }
}

/// Decides from the split-off spectrum whether a nonnegative recursion can
/// exist. Vacuously true when `A_2` has no positive real eigenvalue;
/// otherwise all four conditions must hold, and the first failure is
/// reported.
pub fn roitman_conditions(
    a2_spectrum: &[Complex64],
    h: usize,
    tol: &Tolerances,
) -> RecursionCertificate {
    let rho2 = a2_spectrum.iter().copied().map(modulus).fold(0.0, f64::max);
    let thr = tol.tol_eig * (1.0 + rho2);
    let is_positive_real = |lam: Complex64| lam.re > thr && math::abs(lam.im) <= thr;

    if !a2_spectrum.iter().any(|&lam| is_positive_real(lam)) {
        return RecursionCertificate::pass();
    }

    let dominant: Vec<Complex64> = a2_spectrum
        .iter()
        .copied()
        .filter(|&lam| modulus(lam) >= rho2 - thr)
        .collect();

    // C1: the spectral radius of A_2 must itself be a positive eigenvalue.
    if !dominant.iter().any(|&lam| is_positive_real(lam)) {
        return RecursionCertificate::fail(RoitmanCondition::C1);
    }

    // C2: dominant angles must be rational.
    let mut classes = Vec::with_capacity(dominant.len());
    for &lam in &dominant {
        let class = classify_angle(lam, tol.q_max, tol.tol_angle);
        if class.rational.is_none() {
            return RecursionCertificate::fail(RoitmanCondition::C2);
        }
        classes.push(class);
    }

    // C3: dominant eigenvalues must be simple.
    let cluster = tol.tol_cluster * (1.0 + rho2);
    for i in 0..dominant.len() {
        for j in i + 1..dominant.len() {
            let d = math::hypot(dominant[i].re - dominant[j].re, dominant[i].im - dominant[j].im);
            if d <= cluster {
                return RecursionCertificate::fail(RoitmanCondition::C3);
            }
        }
    }

    // C4: no non-dominant eigenvalue on a ray 2 pi j / (M h).
    let m = minimal_m(&classes, h);
    let mh = (m * h.max(1) as u64) as f64;
    for &lam in a2_spectrum {
        let md = modulus(lam);
        if md >= rho2 - thr || md <= thr {
            continue;
        }
        let t = angle_turns(lam);
        let nearest = math::round(t * mh) / mh;
        if math::abs(t - nearest) <= tol.tol_angle {
            return RecursionCertificate::fail(RoitmanCondition::C4);
        }
    }

    RecursionCertificate::pass()
}

/// Searches degrees `n..=k_max` for a nonnegative recursion
/// `A^{nm} = sum_{i<nm} c_i A^i`, returning the first degree that admits
/// one together with the minimum-1-norm coefficient vector.
///
/// Each degree is a feasibility question over the stacked entrywise
/// equations; minimizing the coefficient sum makes the reported vector
/// deterministic.
pub fn nonneg_recursion_coeffs(
    a: &NonnegMatrix,
    tol: &Tolerances,
) -> Result<RecursionCertificate, SpectralError> {
    let n = a.dim();
    let mut powers: Vec<Mat> = Vec::with_capacity(tol.k_max + 1);
    powers.push(Mat::identity(n));
    for _ in 0..tol.k_max {
        let last = powers.last().unwrap();
        powers.push(last.matmul(&a.as_mat()));
    }

    for nm in n..=tol.k_max {
        let mut rows = Vec::with_capacity(n * n);
        let mut rhs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut row = Vec::with_capacity(nm);
                for p in 0..nm {
                    row.push(powers[p][(i, j)]);
                }
                rows.push(row);
                rhs.push(powers[nm][(i, j)]);
            }
        }
        let problem = LPProblem {
            rows,
            rhs,
            objective: vec![1.0; nm],
        };
        let sol = linprog::solve(&problem, tol.tol_lp)?;
        if sol.status == LPStatus::Optimal {
            // Defensive replay of the certificate.
            let mut residual = powers[nm].clone();
            for (p, &c) in sol.x.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        residual[(i, j)] -= c * powers[p][(i, j)];
                    }
                }
            }
            let scale = powers[nm].max_abs().max(1.0);
            debug_assert!(
                residual.max_abs() <= tol.tol_recur * scale,
                "recursion residual {} above {}",
                residual.max_abs(),
                tol.tol_recur * scale
            );
            return Ok(RecursionCertificate {
                holds: true,
                failing_condition: None,
                degree_nm: Some(nm),
                coefficients: Some(sol.x),
            });
        }
    }
    Ok(RecursionCertificate {
        holds: false,
        failing_condition: None,
        degree_nm: None,
        coefficients: None,
    })
}

/// Monic characteristic polynomial coefficients from the eigenvalue list,
/// ascending: `[a_0, ..., a_{n-1}, 1]` for `p(x) = x^n + a_{n-1} x^{n-1} +
/// ... + a_0`. The eigenvalues must be conjugate-closed.
pub fn char_poly(eigs: &[Complex64]) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &lam in eigs {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            // Multiply by (x - lam): shift up, subtract lam * c.
            next[k + 1] += c;
            next[k] -= lam * c;
        }
        coeffs = next;
    }
    // coeffs[k] is already the coefficient of x^k: ascending order.
    coeffs
        .iter()
        .map(|c| {
            debug_assert!(math::abs(c.im) <= 1e-6 * (1.0 + math::abs(c.re)));
            c.re
        })
        .collect()
}
