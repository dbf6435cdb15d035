//! Input file format: a versioned JSON description of the system, optional
//! targets, and option overrides.

use std::fmt;
use std::path::Path;

use poscon_core::controllability::TargetKind;
use poscon_core::posmat::{NonnegMatrix, NonnegVector};
use poscon_core::Tolerances;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecFile {
    pub schema: u32,
    /// Row-major system matrix.
    pub matrix: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    /// Intersection of homogeneous halfspaces, n = 2 only; converted to
    /// generator rays.
    #[serde(default)]
    pub halfspace_target: Option<HalfspaceTarget>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub kind: String,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceTarget {
    /// Rows `[a1, a2, rhs]` meaning `a1 x1 + a2 x2 >= rhs`; only `rhs = 0`
    /// keeps the target a cone.
    pub inequalities: Vec<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub k_max: Option<usize>,
    /// Horizon override for target checking.
    pub n: Option<usize>,
    pub q_max: Option<u32>,
    pub tol_zero: Option<f64>,
    pub tol_eig: Option<f64>,
    pub tol_cluster: Option<f64>,
    pub tol_angle: Option<f64>,
    pub tol_lp: Option<f64>,
    pub tol_lim: Option<f64>,
    pub tol_rank: Option<f64>,
    pub tol_sim: Option<f64>,
    pub tol_recur: Option<f64>,
}

/// Input-side failures; all of these exit with code 2.
#[derive(Debug)]
pub enum InputError {
    Io { path: String, detail: String },
    /// Parse failure with the location serde reports.
    Parse { detail: String },
    UnsupportedSchema { got: u32 },
    /// `NegativeEntry`: system data or target vertices leave the
    /// nonnegative orthant.
    NegativeEntry { context: String, detail: String },
    BadShape { detail: String },
    HalfspaceUnsupported { detail: String },
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io { path, detail } => write!(f, "error[Io]: {path}: {detail}"),
            InputError::Parse { detail } => write!(f, "error[Parse]: {detail}"),
            InputError::UnsupportedSchema { got } => {
                write!(f, "error[UnsupportedSchema]: schema {got} (expected 1)")
            }
            InputError::NegativeEntry { context, detail } => {
                write!(f, "error[NegativeEntry]: {context}: {detail}")
            }
            InputError::BadShape { detail } => write!(f, "error[BadShape]: {detail}"),
            InputError::HalfspaceUnsupported { detail } => {
                write!(f, "error[HalfspaceUnsupported]: {detail}")
            }
        }
    }
}

impl std::error::Error for InputError {}

/// A parsed and validated problem instance.
#[derive(Debug)]
pub struct ProblemInstance {
    pub a: NonnegMatrix,
    pub b: NonnegVector,
    pub targets: Vec<(TargetKind, Vec<Vec<f64>>)>,
    pub options: Options,
}

pub fn load(path: &Path) -> Result<ProblemInstance, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ProblemInstance, InputError> {
    let file: SystemSpecFile =
        serde_json::from_str(text).map_err(|e| InputError::Parse { detail: e.to_string() })?;
    if file.schema != 1 {
        return Err(InputError::UnsupportedSchema { got: file.schema });
    }

    let a = NonnegMatrix::from_rows(&file.matrix).map_err(|e| InputError::NegativeEntry {
        context: "matrix".into(),
        detail: e.to_string(),
    })?;
    let b = NonnegVector::new(&file.b).map_err(|e| InputError::NegativeEntry {
        context: "b".into(),
        detail: e.to_string(),
    })?;
    let n = a.dim();
    if b.dim() != n {
        return Err(InputError::BadShape {
            detail: format!("b has length {} but the matrix is {n}x{n}", b.dim()),
        });
    }

    let mut targets = Vec::new();
    for (ti, t) in file.targets.iter().enumerate() {
        let kind = match t.kind.as_str() {
            "cone" => TargetKind::Cone,
            "polytope" => TargetKind::Polytope,
            other => {
                return Err(InputError::BadShape {
                    detail: format!("target {ti}: unknown kind {other:?} (cone|polytope)"),
                })
            }
        };
        for (vi, v) in t.vertices.iter().enumerate() {
            if v.len() != n {
                return Err(InputError::BadShape {
                    detail: format!("target {ti} vertex {vi}: length {} != {n}", v.len()),
                });
            }
            if let Some(&bad) = v.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(InputError::NegativeEntry {
                    context: format!("target {ti} vertex {vi}"),
                    detail: format!("entry {bad} outside the nonnegative orthant"),
                });
            }
        }
        targets.push((kind, t.vertices.clone()));
    }

    if let Some(hs) = &file.halfspace_target {
        let rays = halfspace_to_rays(hs, n)?;
        targets.push((TargetKind::Cone, rays));
    }

    Ok(ProblemInstance { a, b, targets, options: file.options })
}

/// Boundary rays of the planar cone `{x >= 0 | a1 x1 + a2 x2 >= 0 for all
/// rows}`. Candidate rays are the axes and each constraint boundary
/// direction; survivors are ordered by angle and the two extremes kept.
/// Integer input data yields integer ray coordinates.
fn halfspace_to_rays(hs: &HalfspaceTarget, n: usize) -> Result<Vec<Vec<f64>>, InputError> {
    if n != 2 {
        return Err(InputError::HalfspaceUnsupported {
            detail: format!("halfspace targets require a 2-state system, got n = {n}"),
        });
    }
    let mut constraints = Vec::new();
    for (i, row) in hs.inequalities.iter().enumerate() {
        if row.len() != 3 {
            return Err(InputError::BadShape {
                detail: format!("halfspace row {i}: expected [a1, a2, rhs]"),
            });
        }
        if row[2] != 0.0 {
            return Err(InputError::HalfspaceUnsupported {
                detail: format!("halfspace row {i}: rhs {} != 0 does not describe a cone", row[2]),
            });
        }
        constraints.push([row[0], row[1]]);
    }

    let sat = |x: &[f64; 2]| -> bool {
        let scale = x[0].abs().max(x[1].abs());
        x[0] >= -1e-12 * scale
            && x[1] >= -1e-12 * scale
            && constraints
                .iter()
                .all(|c| c[0] * x[0] + c[1] * x[1] >= -1e-12 * scale * (c[0].abs() + c[1].abs()))
    };

    let mut candidates: Vec<[f64; 2]> = vec![[1.0, 0.0], [0.0, 1.0]];
    for c in &constraints {
        // Both orientations of the boundary direction of a1 x1 + a2 x2 = 0.
        candidates.push([-c[1], c[0]]);
        candidates.push([c[1], -c[0]]);
    }
    let mut rays: Vec<[f64; 2]> = candidates
        .into_iter()
        .filter(|x| (x[0] != 0.0 || x[1] != 0.0) && sat(x))
        .collect();
    if rays.is_empty() {
        return Err(InputError::HalfspaceUnsupported {
            detail: "halfspace intersection contains no nonnegative ray".into(),
        });
    }
    rays.sort_by(|p, q| {
        p[1].atan2(p[0])
            .partial_cmp(&q[1].atan2(q[0]))
            .unwrap()
    });
    let lo = rays[0];
    let hi = rays[rays.len() - 1];
    let mut out = vec![lo.to_vec()];
    let cross = lo[0] * hi[1] - lo[1] * hi[0];
    if cross.abs() > 1e-12 * (1.0 + lo[0].abs() + hi[1].abs()) {
        out.push(hi.to_vec());
    }
    Ok(out)
}

/// Effective tolerances: module defaults for the dimension, overridden by
/// file options, overridden by CLI flags (applied by the caller).
pub fn effective_tolerances(n: usize, options: &Options) -> Tolerances {
    let mut tol = Tolerances::for_dim(n);
    if let Some(v) = options.k_max {
        tol.k_max = v;
    }
    if let Some(v) = options.q_max {
        tol.q_max = v;
    }
    if let Some(v) = options.tol_zero {
        tol.tol_zero = v;
    }
    if let Some(v) = options.tol_eig {
        tol.tol_eig = v;
    }
    if let Some(v) = options.tol_cluster {
        tol.tol_cluster = v;
    }
    if let Some(v) = options.tol_angle {
        tol.tol_angle = v;
    }
    if let Some(v) = options.tol_lp {
        tol.tol_lp = v;
    }
    if let Some(v) = options.tol_lim {
        tol.tol_lim = v;
    }
    if let Some(v) = options.tol_rank {
        tol.tol_rank = v;
    }
    if let Some(v) = options.tol_sim {
        tol.tol_sim = v;
    }
    if let Some(v) = options.tol_recur {
        tol.tol_recur = v;
    }
    tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_parses() {
        let text = r#"{
            "schema": 1,
            "matrix": [[0.0, 1.0], [1.0, 0.0]],
            "b": [1.0, 0.0]
        }"#;
        let p = parse(text).unwrap();
        assert_eq!(p.a.dim(), 2);
        assert!(p.targets.is_empty());
    }

    #[test]
    fn parse_error_carries_location() {
        let err = parse("{\n  \"schema\": 1,\n  oops\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn negative_matrix_entry_is_rejected() {
        let text = r#"{"schema": 1, "matrix": [[1.0, -0.5], [1.0, 1.0]], "b": [1.0, 1.0]}"#;
        let msg = parse(text).unwrap_err().to_string();
        assert!(msg.contains("NegativeEntry"), "{msg}");
    }

    #[test]
    fn negative_target_vertex_is_rejected() {
        let text = r#"{
            "schema": 1,
            "matrix": [[1.0, 1.0], [1.0, 1.0]],
            "b": [1.0, 0.0],
            "targets": [{"kind": "cone", "vertices": [[1.0, -2.0]]}]
        }"#;
        let msg = parse(text).unwrap_err().to_string();
        assert!(msg.contains("NegativeEntry"), "{msg}");
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let text = r#"{"schema": 7, "matrix": [[1.0]], "b": [1.0]}"#;
        let msg = parse(text).unwrap_err().to_string();
        assert!(msg.contains("UnsupportedSchema"), "{msg}");
    }

    #[test]
    fn halfspaces_convert_to_integer_rays() {
        let text = r#"{
            "schema": 1,
            "matrix": [[4.0, 4.0], [11.0, 2.0]],
            "b": [2.0, 1.0],
            "halfspace_target": {"inequalities": [[3.0, -2.0, 0.0], [-2.0, 3.0, 0.0]]}
        }"#;
        let p = parse(text).unwrap();
        assert_eq!(p.targets.len(), 1);
        let (kind, rays) = &p.targets[0];
        assert_eq!(*kind, TargetKind::Cone);
        let mut rays = rays.clone();
        rays.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(rays, vec![vec![2.0, 3.0], vec![3.0, 2.0]]);
    }

    #[test]
    fn halfspace_rejects_higher_dimensions() {
        let text = r#"{
            "schema": 1,
            "matrix": [[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]],
            "b": [1.0, 0.0, 0.0],
            "halfspace_target": {"inequalities": [[1.0, 0.0, 0.0]]}
        }"#;
        let msg = parse(text).unwrap_err().to_string();
        assert!(msg.contains("HalfspaceUnsupported"), "{msg}");
    }

    #[test]
    fn nonzero_halfspace_rhs_is_rejected() {
        let text = r#"{
            "schema": 1,
            "matrix": [[1.0, 1.0], [1.0, 1.0]],
            "b": [1.0, 0.0],
            "halfspace_target": {"inequalities": [[1.0, 0.0, 2.0]]}
        }"#;
        let msg = parse(text).unwrap_err().to_string();
        assert!(msg.contains("rhs"), "{msg}");
    }

    #[test]
    fn options_override_defaults() {
        let mut opts = Options::default();
        opts.k_max = Some(33);
        opts.tol_lp = Some(1e-7);
        let tol = effective_tolerances(3, &opts);
        assert_eq!(tol.k_max, 33);
        assert_eq!(tol.tol_lp, 1e-7);
        assert_eq!(tol.tol_eig, 1e-8);
    }
}
