//! Cross-section exports of reachable cones: every generator is scaled onto
//! the unit simplex, then written either as CSV rows or, for three-state
//! systems, as a layered SVG of convex hulls in barycentric coordinates.

use core::fmt;
use std::fmt::Write as _;

use poscon_core::controllability::{AnalysisError, SystemSI};

#[derive(Debug)]
pub enum PlotError {
    /// The SVG view is a 2-simplex, so it only exists for n = 3.
    SvgUnsupportedDim { n: usize },
    Analysis(AnalysisError),
}

impl fmt::Display for PlotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlotError::SvgUnsupportedDim { n } => write!(
                f,
                "error[SvgUnsupportedDim]: the simplex cross-section plot needs n = 3, got n = {n}; use --format csv instead"
            ),
            PlotError::Analysis(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PlotError {}

impl From<AnalysisError> for PlotError {
    fn from(e: AnalysisError) -> Self {
        PlotError::Analysis(e)
    }
}

/// One simplex-projected generator.
pub struct ProjPoint {
    pub coords: Vec<f64>,
    pub label: String,
}

/// All generators of one reachability horizon, projected.
pub struct Layer {
    pub k: usize,
    pub points: Vec<ProjPoint>,
}

pub struct PlotData {
    pub n: usize,
    pub layers: Vec<Layer>,
    /// Projected Perron directions, drawn on every view.
    pub v_f: Vec<ProjPoint>,
}

/// Projects the reachability generators for each requested horizon plus the
/// Perron directions onto the unit simplex.
pub fn build(sys: &SystemSI, ks: &[usize]) -> Result<PlotData, PlotError> {
    let mut layers = Vec::with_capacity(ks.len());
    for &k in ks {
        let cone = sys.conmat_cone(k);
        let projected = cone.project_simplex();
        let points = projected
            .into_iter()
            .zip(cone.labels())
            .map(|(coords, label)| ProjPoint { coords, label: label.clone() })
            .collect();
        layers.push(Layer { k, points });
    }
    let lim = sys.limit_cone()?;
    let v_f = lim
        .v_f
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let s: f64 = v.as_slice().iter().sum();
            // Bracket index keeps the label comma-free for the CSV rows.
            ProjPoint {
                coords: v.as_slice().iter().map(|x| x / s).collect(),
                label: format!("v_f[{i}]"),
            }
        })
        .collect();
    Ok(PlotData { n: sys.dim(), layers, v_f })
}

/// CSV rows `k, generator_index, coord_1..coord_n, label`; the Perron
/// directions are tagged with the sentinel horizon `k = -1`.
pub fn to_csv(data: &PlotData) -> String {
    let mut s = String::new();
    s.push_str("k,generator_index");
    for i in 1..=data.n {
        let _ = write!(s, ",coord_{i}");
    }
    s.push_str(",label\n");
    let mut row = |k: i64, idx: usize, p: &ProjPoint| {
        let _ = write!(s, "{k},{idx}");
        for c in &p.coords {
            let _ = write!(s, ",{c:.16e}");
        }
        let _ = writeln!(s, ",{}", p.label);
    };
    for layer in &data.layers {
        for (idx, p) in layer.points.iter().enumerate() {
            row(layer.k as i64, idx, p);
        }
    }
    for (idx, p) in data.v_f.iter().enumerate() {
        row(-1, idx, p);
    }
    s
}

/// Barycentric map of a unit-simplex point onto the plane: `e1 -> (0,0)`,
/// `e2 -> (1,0)`, `e3 -> (1/2, sqrt(3)/2)`.
pub fn barycentric(p: &[f64]) -> (f64, f64) {
    let h = 3.0_f64.sqrt() / 2.0;
    (p[1] + 0.5 * p[2], h * p[2])
}

/// Gift-wrapping convex hull of planar points, counterclockwise. Handles
/// degenerate inputs: fewer than three distinct points come back as-is.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        if !distinct
            .iter()
            .any(|q| (q.0 - p.0).abs() < 1e-12 && (q.1 - p.1).abs() < 1e-12)
        {
            distinct.push(p);
        }
    }
    if distinct.len() < 3 {
        return distinct;
    }
    let start = distinct
        .iter()
        .copied()
        .min_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap())
        .unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut candidate = distinct[0];
        if candidate == current {
            candidate = distinct[1];
        }
        for &p in &distinct {
            if p == current {
                continue;
            }
            let cross = (candidate.0 - current.0) * (p.1 - current.1)
                - (candidate.1 - current.1) * (p.0 - current.0);
            let d_cand = (candidate.0 - current.0).powi(2) + (candidate.1 - current.1).powi(2);
            let d_p = (p.0 - current.0).powi(2) + (p.1 - current.1).powi(2);
            // Pick the most clockwise-extreme next point; on ties take the
            // farthest so collinear runs are swallowed in one step.
            if cross < -1e-15 || (cross.abs() <= 1e-15 && d_p > d_cand) {
                candidate = p;
            }
        }
        if candidate == start {
            break;
        }
        hull.push(candidate);
        current = candidate;
        if hull.len() > distinct.len() {
            break; // numerically degenerate ring; bail with what we have
        }
    }
    hull
}

const PALETTE: [&str; 3] = ["#d62728", "#1f77b4", "#2ca02c"];

/// Layered barycentric SVG: one translucent hull per horizon (palette order
/// red, blue, green), generators as asterisks, Perron directions as black
/// dots, the ambient simplex as a dashed outline. 1:1 unit aspect.
pub fn to_svg(data: &PlotData) -> Result<String, PlotError> {
    if data.n != 3 {
        return Err(PlotError::SvgUnsupportedDim { n: data.n });
    }
    const SIDE: f64 = 1000.0;
    const MARGIN: f64 = 80.0;
    let height = SIDE * 3.0_f64.sqrt() / 2.0;
    let w = SIDE + 2.0 * MARGIN;
    let h = height + 2.0 * MARGIN;
    // Screen map: y flips so the third axis points up.
    let sx = |x: f64| MARGIN + x * SIDE;
    let sy = |y: f64| MARGIN + (height - y * SIDE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w:.0} {h:.0}\" width=\"{w:.0}\" height=\"{h:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>");

    let corners = [
        barycentric(&[1.0, 0.0, 0.0]),
        barycentric(&[0.0, 1.0, 0.0]),
        barycentric(&[0.0, 0.0, 1.0]),
    ];
    let tri: Vec<String> = corners
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        s,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"#888\" stroke-width=\"2\" stroke-dasharray=\"8 6\"/>",
        tri.join(" ")
    );
    for (i, &(x, y)) in corners.iter().enumerate() {
        let (dx, dy) = match i {
            0 => (-40.0, 24.0),
            1 => (16.0, 24.0),
            _ => (-12.0, -16.0),
        };
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"30\" fill=\"#555\">e{}</text>",
            sx(x) + dx,
            sy(y) + dy,
            i + 1
        );
    }

    // Hull fills first, then all markers, so no polygon hides a point.
    for (li, layer) in data.layers.iter().enumerate() {
        let color = PALETTE[li % PALETTE.len()];
        let pts: Vec<(f64, f64)> = layer.points.iter().map(|p| barycentric(&p.coords)).collect();
        let hull = convex_hull(&pts);
        if hull.len() >= 2 {
            let coords: Vec<String> = hull
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"{color}\" stroke-width=\"3\"/>",
                coords.join(" ")
            );
        }
    }
    for (li, layer) in data.layers.iter().enumerate() {
        let color = PALETTE[li % PALETTE.len()];
        for p in &layer.points {
            let (x, y) = barycentric(&p.coords);
            asterisk(&mut s, sx(x), sy(y), 9.0, color);
        }
    }
    for p in &data.v_f {
        let (x, y) = barycentric(&p.coords);
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"8\" fill=\"black\" stroke=\"white\" stroke-width=\"2\"/>",
            sx(x),
            sy(y)
        );
    }

    // Legend, top-right.
    let lx = w - MARGIN - 170.0;
    let mut ly = MARGIN + 10.0;
    for (li, layer) in data.layers.iter().enumerate() {
        let color = PALETTE[li % PALETTE.len()];
        asterisk(&mut s, lx, ly, 9.0, color);
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"28\" fill=\"#333\">k = {}</text>",
            lx + 20.0,
            ly + 9.0,
            layer.k
        );
        ly += 40.0;
    }
    if !data.v_f.is_empty() {
        let _ = writeln!(
            s,
            "<circle cx=\"{lx:.2}\" cy=\"{ly:.2}\" r=\"8\" fill=\"black\" stroke=\"white\" stroke-width=\"2\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"28\" fill=\"#333\">v_f</text>",
            lx + 20.0,
            ly + 9.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn asterisk(s: &mut String, x: f64, y: f64, r: f64, color: &str) {
    let q = r * 0.7071;
    let _ = writeln!(
        s,
        "<path d=\"M {x0:.2} {y} L {x1:.2} {y} M {x} {y0:.2} L {x} {y1:.2} M {xa:.2} {ya:.2} L {xb:.2} {yb:.2} M {xa:.2} {yb:.2} L {xb:.2} {ya:.2}\" stroke=\"{color}\" stroke-width=\"3\" fill=\"none\"/>",
        x0 = x - r,
        x1 = x + r,
        y0 = y - r,
        y1 = y + r,
        xa = x - q,
        xb = x + q,
        ya = y - q,
        yb = y + q,
        x = x,
        y = y,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use poscon_core::posmat::{NonnegMatrix, NonnegVector};

    fn demo_system() -> SystemSI {
        let a = NonnegMatrix::from_rows(&[
            vec![0.9727, 0.0, 0.0263],
            vec![0.0388, 0.1273, 0.2156],
            vec![0.0, 3.4497, 0.0],
        ])
        .unwrap();
        let b = NonnegVector::new(&[0.0, 1.0, 1.0]).unwrap();
        SystemSI::with_defaults(a, b).unwrap()
    }

    #[test]
    fn barycentric_corners_map_to_triangle() {
        assert_eq!(barycentric(&[1.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(barycentric(&[0.0, 1.0, 0.0]), (1.0, 0.0));
        let (x, y) = barycentric(&[0.0, 0.0, 1.0]);
        assert!((x - 0.5).abs() < 1e-15 && (y - 3.0_f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn hull_of_square_has_four_vertices() {
        let pts = [
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (0.5, 0.5),
            (0.25, 0.5),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(hull.contains(&(0.0, 0.0)) && hull.contains(&(1.0, 1.0)));
    }

    #[test]
    fn hull_swallows_collinear_and_duplicate_points() {
        let pts = [
            (0.0, 0.0),
            (1.0, 0.0),
            (2.0, 0.0),
            (2.0, 0.0),
            (1.0, 1.0),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 3);
        assert!(!hull.contains(&(1.0, 0.0)));
    }

    #[test]
    fn hull_of_two_points_is_the_segment() {
        let hull = convex_hull(&[(0.0, 0.0), (1.0, 2.0), (0.0, 0.0)]);
        assert_eq!(hull.len(), 2);
    }

    #[test]
    fn csv_has_a_row_per_generator_and_sentinel_rows() {
        let sys = demo_system();
        let data = build(&sys, &[3, 8]).unwrap();
        let csv = to_csv(&data);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,generator_index,coord_1,coord_2,coord_3,label");
        assert_eq!(lines.len(), 1 + 3 + 8 + 1);
        assert!(lines.last().unwrap().starts_with("-1,0,"));
        assert!(lines[1].starts_with("3,0,") && lines[1].ends_with(",b"));
        // Projected rows sit on the unit simplex.
        for line in &lines[1..] {
            let cells: Vec<&str> = line.split(',').collect();
            let sum: f64 = cells[2..5].iter().map(|c| c.parse::<f64>().unwrap()).sum();
            assert!((sum - 1.0).abs() < 1e-12, "{line}");
        }
    }

    #[test]
    fn svg_emits_one_hull_polygon_per_layer() {
        let sys = demo_system();
        let data = build(&sys, &[3, 8, 19]).unwrap();
        let svg = to_svg(&data).unwrap();
        assert!(svg.starts_with("<svg"));
        // Ambient triangle plus three layer hulls.
        assert_eq!(svg.matches("<polygon").count(), 4);
        assert!(svg.contains("#d62728"));
        assert!(svg.contains("circle"));
    }

    #[test]
    fn svg_rejects_other_dimensions() {
        let a = NonnegMatrix::from_rows(&[vec![4.0, 4.0], vec![11.0, 2.0]]).unwrap();
        let b = NonnegVector::new(&[2.0, 1.0]).unwrap();
        let sys = SystemSI::with_defaults(a, b).unwrap();
        let data = build(&sys, &[2]).unwrap();
        let err = to_svg(&data).unwrap_err();
        assert!(err.to_string().contains("SvgUnsupportedDim"));
    }
}
