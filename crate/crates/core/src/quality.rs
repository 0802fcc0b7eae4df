//! Shape quality, volumes, per-mesh statistics and similarity classes.
//!
//! The shape quality of a simplex with vertices `p_0..p_n` is
//! `q = n |det S|^(2/n) / tr(S^T S)` where `S = D W^-1`, `D` holds the edge
//! vectors `p_i - p_0` as columns and `W` the same for the unit regular
//! simplex. It lies in `[0, 1]`, equals 1 exactly for regular simplices and
//! is invariant under rigid motions, scaling and vertex permutations.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::{edge_length_squared, Mesh, Simplex, VertexTable};

/// Vertices of a regular `n`-simplex with unit edges. Vertex `i + 1` sits
/// above the centroid of vertices `0..=i` in the new direction `e_i`, at
/// the height that makes it unit distance from all of them.
pub fn regular_simplex_vertices(n: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; n]];
    for i in 0..n {
        let count = pts.len() as f64;
        let mut c = vec![0.0; n];
        for p in &pts {
            for (ck, pk) in c.iter_mut().zip(p) {
                *ck += pk / count;
            }
        }
        let r2: f64 = c.iter().zip(&pts[0]).map(|(a, b)| (a - b) * (a - b)).sum();
        c[i] = (1.0 - r2).sqrt();
        pts.push(c);
    }
    pts
}

fn edge_matrix(points: &[&[f64]]) -> DMatrix<f64> {
    let n = points.len() - 1;
    DMatrix::from_fn(n, n, |r, c| points[c + 1][r] - points[0][r])
}

fn reference_inverse(n: usize) -> DMatrix<f64> {
    let reg = regular_simplex_vertices(n);
    let refs: Vec<&[f64]> = reg.iter().map(Vec::as_slice).collect();
    edge_matrix(&refs)
        .try_inverse()
        .expect("the regular simplex is non-degenerate")
}

/// Returns `(q, det S)` for the unsigned measure.
fn quality_and_det(points: &[&[f64]]) -> (f64, f64) {
    let n = points.len() - 1;
    if n == 0 {
        return (0.0, 0.0);
    }
    let s = edge_matrix(points) * reference_inverse(n);
    let det = s.determinant();
    let frob2 = s.norm_squared();
    if det == 0.0 || !det.is_finite() || frob2 == 0.0 {
        return (0.0, det);
    }
    let q = n as f64 * ((2.0 / n as f64) * det.abs().ln()).exp() / frob2;
    (q.clamp(0.0, 1.0), det)
}

/// Unsigned shape quality of the simplex spanned by `points` (`n + 1`
/// points in `R^n`). Degenerate simplices give 0.
pub fn shape_quality_of_points(points: &[&[f64]]) -> f64 {
    quality_and_det(points).0
}

/// Like [`shape_quality_of_points`] but 0 for negatively oriented
/// simplices (`det S <= 0`).
pub fn oriented_shape_quality_of_points(points: &[&[f64]]) -> f64 {
    match quality_and_det(points) {
        (q, det) if det > 0.0 => q,
        _ => 0.0,
    }
}

pub fn shape_quality(s: &Simplex, vt: &VertexTable) -> Result<f64> {
    Ok(shape_quality_of_points(&points_of(s, vt)?))
}

pub fn oriented_shape_quality(s: &Simplex, vt: &VertexTable) -> Result<f64> {
    Ok(oriented_shape_quality_of_points(&points_of(s, vt)?))
}

/// Unsigned volume `|det D| / n!`.
pub fn simplex_volume(s: &Simplex, vt: &VertexTable) -> Result<f64> {
    let pts = points_of(s, vt)?;
    let n = s.dim();
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(edge_matrix(&pts).determinant().abs() / fact)
}

fn points_of<'a>(s: &Simplex, vt: &'a VertexTable) -> Result<Vec<&'a [f64]>> {
    s.vertices().iter().map(|v| vt.coords(v)).collect()
}

/// Header of the per-iteration CSV.
pub const CSV_HEADER: &str = "iteration,elements,vertices,minQ,maxQ";

/// Element/vertex counts and quality extremes of one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub iteration: usize,
    pub elements: usize,
    pub vertices: usize,
    pub min_q: f64,
    pub max_q: f64,
}

impl QualityReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.iteration, self.elements, self.vertices, self.min_q, self.max_q
        )
    }
}

/// Writes the header followed by one row per report.
pub fn write_csv<W: Write>(mut out: W, reports: &[QualityReport]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Quality extremes of `mesh`, reported as iteration 0.
pub fn quality_stats(mesh: &Mesh) -> Result<QualityReport> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    for s in mesh.simplices() {
        let q = shape_quality(s, mesh.vertices())?;
        min_q = min_q.min(q);
        max_q = max_q.max(q);
    }
    Ok(QualityReport {
        iteration: 0,
        elements: mesh.element_count(),
        vertices: mesh.vertex_count(),
        min_q,
        max_q,
    })
}

/// Edge lengths sorted ascending and divided by the longest one.
pub fn similarity_descriptor(s: &Simplex, vt: &VertexTable) -> Result<Vec<f64>> {
    let mut lengths = s
        .edges()
        .iter()
        .map(|e| edge_length_squared(e, vt).map(f64::sqrt))
        .collect::<Result<Vec<f64>>>()?;
    lengths.sort_by(f64::total_cmp);
    let max = *lengths.last().unwrap_or(&1.0);
    if max > 0.0 {
        lengths.iter_mut().for_each(|l| *l /= max);
    }
    Ok(lengths)
}

/// Number of classes found by greedily clustering descriptors: a simplex
/// joins the first class whose representative differs from its descriptor
/// by less than `tol` in every component.
pub fn similarity_classes<'a>(
    simplices: impl IntoIterator<Item = &'a Simplex>,
    vt: &VertexTable,
    tol: f64,
) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let mut descriptors = simplices
        .into_iter()
        .map(|s| similarity_descriptor(s, vt))
        .collect::<Result<Vec<_>>>()?;
    descriptors.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for d in descriptors {
        let close = |r: &Vec<f64>| r.len() == d.len() && r.iter().zip(&d).all(|(x, y)| (x - y).abs() < tol);
        if !reps.iter().any(close) {
            reps.push(d);
        }
    }
    Ok(reps.len())
}
