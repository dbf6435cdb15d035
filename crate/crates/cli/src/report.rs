//! Machine-readable analysis reports: a typed mirror of the library's
//! results with provenance, serialized to canonical JSON (fixed key order,
//! every float at 17 significant digits) so that re-ingesting and
//! re-serializing a report is byte-identical.

use std::fmt::Write as _;
use std::io;

use poscon_core::controllability::{
    CheckReport, FinVerdict, InfVerdict, LimitCone, SystemSI, TargetStatus,
};
use poscon_core::cones::GeneratorCone;
use poscon_core::spectral::RoitmanCondition;
use poscon_core::Tolerances;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub tool: ToolInfo,
    pub command: String,
    pub tolerances: TolerancesReport,
    pub system: SystemReport,
    pub analysis: AnalysisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TargetSetReport>>,
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Serialize)]
pub struct TolerancesReport {
    pub tol_zero: f64,
    pub tol_eig: f64,
    pub tol_cluster: f64,
    pub tol_angle: f64,
    pub q_max: u32,
    pub tol_lp: f64,
    pub tol_lim: f64,
    pub tol_rank: f64,
    pub tol_sim: f64,
    pub tol_recur: f64,
    pub k_max: usize,
}

#[derive(Debug, Serialize)]
pub struct SystemReport {
    pub n: usize,
    pub matrix: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub irreducible: bool,
    pub cyclicity_h: usize,
    pub conmat_rank: usize,
    pub spectral_radius: f64,
    /// `[re, im]` pairs in canonical order (modulus descending).
    pub eigenvalues: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub conset_f: ConsetFReport,
    pub conset_inf: ConsetInfReport,
    pub special_case: SpecialCaseReport,
    pub limit: LimitReport,
}

#[derive(Debug, Serialize)]
pub struct MethodAgreement {
    /// Eigenvalue-test verdict.
    pub spectral: bool,
    /// Direct column-iteration verdict.
    pub direct: bool,
    pub agree: bool,
}

#[derive(Debug, Serialize)]
pub struct ConsetFReport {
    pub polyhedral: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_vert: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simplicial: Option<bool>,
    pub method_agreement: MethodAgreement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recursion: Option<RecursionReport>,
}

#[derive(Debug, Serialize)]
pub struct ConsetInfReport {
    pub polyhedral: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_vert_inf: Option<usize>,
    pub certificate: CertificateReport,
    pub method_agreement: MethodAgreement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorReport>>,
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_condition: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RecursionReport {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct SpecialCaseReport {
    /// `b` lies in the cone of the Perron directions, so the controllable
    /// set closes after `h` steps.
    pub applies: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorReport>>,
}

#[derive(Debug, Serialize)]
pub struct LimitReport {
    pub v_f: Vec<Vec<f64>>,
    pub c_lim: Vec<GeneratorReport>,
}

#[derive(Debug, Serialize)]
pub struct GeneratorReport {
    pub label: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct TargetSetReport {
    pub kind: String,
    pub horizon: usize,
    /// The finite set is non-polyhedral, so "not controllable" only covers
    /// this horizon.
    pub bounded_horizon_only: bool,
    pub results: Vec<TargetResultReport>,
}

#[derive(Debug, Serialize)]
pub struct TargetResultReport {
    pub vertex: Vec<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    pub used_limit_generators: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay_error: Option<f64>,
}

fn generators_of(cone: &GeneratorCone) -> Vec<GeneratorReport> {
    cone.generators()
        .iter()
        .zip(cone.labels())
        .map(|(g, l)| GeneratorReport { label: l.clone(), coords: g.clone() })
        .collect()
}

fn condition_name(c: RoitmanCondition) -> String {
    match c {
        RoitmanCondition::C1 => "C1",
        RoitmanCondition::C2 => "C2",
        RoitmanCondition::C3 => "C3",
        RoitmanCondition::C4 => "C4",
    }
    .to_string()
}

fn status_name(s: TargetStatus) -> String {
    match s {
        TargetStatus::ControllableFinite => "controllable_finite",
        TargetStatus::AlmostControllable => "almost_controllable",
        TargetStatus::NotControllable => "not_controllable",
    }
    .to_string()
}

pub fn tolerances_report(tol: &Tolerances) -> TolerancesReport {
    TolerancesReport {
        tol_zero: tol.tol_zero,
        tol_eig: tol.tol_eig,
        tol_cluster: tol.tol_cluster,
        tol_angle: tol.tol_angle,
        q_max: tol.q_max,
        tol_lp: tol.tol_lp,
        tol_lim: tol.tol_lim,
        tol_rank: tol.tol_rank,
        tol_sim: tol.tol_sim,
        tol_recur: tol.tol_recur,
        k_max: tol.k_max,
    }
}

pub fn system_report(sys: &SystemSI) -> SystemReport {
    let n = sys.dim();
    let a = sys.a();
    SystemReport {
        n,
        matrix: (0..n)
            .map(|i| (0..n).map(|j| a.get(i, j)).collect())
            .collect(),
        b: sys.b().as_slice().to_vec(),
        irreducible: sys.structure().irreducible,
        cyclicity_h: sys.structure().cyclicity_h,
        conmat_rank: sys.conmat_rank(),
        spectral_radius: sys.spectral().rho,
        eigenvalues: sys
            .spectral()
            .eigenvalues
            .iter()
            .map(|l| [l.re, l.im])
            .collect(),
    }
}

pub fn analysis_report(
    fin: &FinVerdict,
    inf: &InfVerdict,
    special: &Option<GeneratorCone>,
    lim: &LimitCone,
) -> AnalysisReport {
    AnalysisReport {
        conset_f: ConsetFReport {
            polyhedral: fin.polyhedral,
            k_vert: fin.k_vert,
            simplicial: fin.simplicial,
            method_agreement: MethodAgreement {
                spectral: fin.spectral_polyhedral,
                direct: fin.k_vert.is_some(),
                agree: true,
            },
            generators: fin.generators.as_ref().map(generators_of),
            recursion: fin.recursion.as_ref().map(|r| RecursionReport {
                holds: r.holds,
                degree: r.degree_nm,
                coefficients: r.coefficients.clone(),
            }),
        },
        conset_inf: ConsetInfReport {
            polyhedral: inf.polyhedral,
            k_vert_inf: inf.k_vert_inf,
            certificate: CertificateReport {
                holds: inf.certificate.holds,
                failing_condition: inf.certificate.failing_condition.map(condition_name),
            },
            method_agreement: MethodAgreement {
                spectral: inf.certificate.holds,
                direct: inf.k_vert_inf.is_some(),
                agree: true,
            },
            generators: inf.generators.as_ref().map(generators_of),
        },
        special_case: SpecialCaseReport {
            applies: special.is_some(),
            generators: special.as_ref().map(generators_of),
        },
        limit: LimitReport {
            v_f: lim.v_f.iter().map(|v| v.as_slice().to_vec()).collect(),
            c_lim: generators_of(&lim.c_lim),
        },
    }
}

pub fn target_set_report(kind: &str, check: &CheckReport) -> TargetSetReport {
    TargetSetReport {
        kind: kind.to_string(),
        horizon: check.horizon,
        bounded_horizon_only: check.bounded_horizon_only,
        results: check
            .results
            .iter()
            .map(|r| TargetResultReport {
                vertex: r.vertex.clone(),
                status: status_name(r.status),
                witness: r.witness.clone(),
                used_limit_generators: r.used_limit_generators,
                objective: r.objective,
                residual: r.residual,
                inputs: r.inputs.clone(),
                replay_error: r.replay_error,
            })
            .collect(),
    }
}

pub fn tool_info() -> ToolInfo {
    ToolInfo {
        name: "poscon".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Formatter pinning every float to scientific notation with 17 significant
/// digits: enough to round-trip any f64 exactly, and a single canonical
/// spelling for each value.
struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Canonical JSON bytes of any serializable value (fixed key order from the
/// struct definitions, canonical float spelling, trailing newline).
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serializer emits UTF-8")
}

/// Terminal-facing summary of a report.
pub fn human_summary(r: &ReportFile) -> String {
    let mut s = String::new();
    let sys = &r.system;
    let _ = writeln!(
        s,
        "system: n = {}, irreducible, cyclicity h = {}, rank(conmat_n) = {}",
        sys.n, sys.cyclicity_h, sys.conmat_rank
    );
    let _ = writeln!(s, "spectral radius: {:.6}", sys.spectral_radius);
    let eigs: Vec<String> = sys
        .eigenvalues
        .iter()
        .map(|[re, im]| {
            if im.abs() > 1e-12 * (1.0 + re.abs()) {
                format!("{re:.6}{im:+.6}i")
            } else {
                format!("{re:.6}")
            }
        })
        .collect();
    let _ = writeln!(s, "eigenvalues: [{}]", eigs.join(", "));

    let f = &r.analysis.conset_f;
    if f.polyhedral {
        let _ = writeln!(
            s,
            "finite-horizon set: polyhedral, k_vert = {}, simplicial = {}",
            f.k_vert.unwrap_or(0),
            f.simplicial.unwrap_or(false)
        );
        if let Some(rec) = &f.recursion {
            if rec.holds {
                let coeffs: Vec<String> = rec
                    .coefficients
                    .iter()
                    .flatten()
                    .map(|c| format!("{c:.4}"))
                    .collect();
                let _ = writeln!(
                    s,
                    "nonnegative recursion: degree {} with coefficients [{}]",
                    rec.degree.unwrap_or(0),
                    coeffs.join(", ")
                );
            }
        }
    } else {
        let _ = writeln!(s, "finite-horizon set: not polyhedral");
    }

    let i = &r.analysis.conset_inf;
    if i.polyhedral {
        let _ = writeln!(
            s,
            "closure: polyhedral, k_vert_inf = {}",
            i.k_vert_inf.unwrap_or(0)
        );
    } else {
        let _ = writeln!(
            s,
            "closure: not polyhedral (failing condition {})",
            i.certificate.failing_condition.as_deref().unwrap_or("-")
        );
    }
    if r.analysis.special_case.applies {
        let _ = writeln!(s, "special case: b lies in the Perron cone; set closes after h steps");
    }

    if let Some(sets) = &r.targets {
        for set in sets {
            let _ = writeln!(
                s,
                "targets ({}, horizon N = {}{}):",
                set.kind,
                set.horizon,
                if set.bounded_horizon_only { ", bounded-horizon only" } else { "" }
            );
            for res in &set.results {
                let coords: Vec<String> = res.vertex.iter().map(|v| format!("{v}")).collect();
                let mut line = format!("  [{}] -> {}", coords.join(", "), res.status);
                if let Some(obj) = res.objective {
                    let _ = write!(line, ", objective {obj:.6}");
                }
                if res.used_limit_generators {
                    line.push_str(", uses limit generators (no finite input sequence)");
                }
                let _ = writeln!(s, "{line}");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        #[derive(Serialize)]
        struct V {
            x: f64,
        }
        let s = to_canonical_json(&V { x: 0.1 });
        assert_eq!(s, "{\"x\":1.0000000000000001e-1}\n");
        let s = to_canonical_json(&V { x: 1.0 });
        assert_eq!(s, "{\"x\":1.0000000000000000e0}\n");
    }

    #[test]
    fn reserializing_a_parsed_report_is_byte_identical() {
        #[derive(Serialize)]
        struct V {
            b: f64,
            a: Vec<f64>,
            n: usize,
        }
        let original = to_canonical_json(&V {
            b: 0.30000000000000004,
            a: vec![1.0 / 3.0, 2e-308, 9.70820393249937],
            n: 6,
        });
        let value: serde_json::Value = serde_json::from_str(&original).unwrap();
        let round = to_canonical_json(&value);
        assert_eq!(original, round);
    }

    #[test]
    fn every_f64_spelling_parses_back_to_the_same_bits() {
        for &x in &[0.1f64, 1.0 / 3.0, 1e-300, 123456.789, 5e-324, 0.9727] {
            let s = format!("{x:.16e}");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
