//! Selection of the elements to refine: hypersphere intersection, a
//! curvature estimate of a potential, and seeded random subsets.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::driver::RefinementSet;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Simplex};

/// The half-space `x[axis] >= bound`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub axis: usize,
    pub bound: f64,
}

impl Halfspace {
    pub fn contains(&self, p: &[f64]) -> bool {
        p[self.axis] >= self.bound
    }
}

fn distance(p: &[f64], c: &[f64]) -> f64 {
    p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn check_point(mesh: &Mesh, c: &[f64]) -> Result<()> {
    if c.len() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            found: c.len(),
        });
    }
    Ok(())
}

/// Elements whose vertices have `||v - center|| - radius` of both signs
/// (or zero), optionally restricted to elements with at least one vertex in
/// `halfspace`. This samples the sphere test at the vertices only.
pub fn select_by_hypersphere(
    mesh: &Mesh,
    center: &[f64],
    radius: f64,
    halfspace: Option<Halfspace>,
) -> Result<RefinementSet> {
    check_point(mesh, center)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    if let Some(h) = halfspace {
        if h.axis >= mesh.dim() {
            return Err(Error::InvalidArgument(format!("half-space axis {} out of range", h.axis)));
        }
    }
    let mut set = RefinementSet::new();
    for (handle, s) in mesh.simplices().enumerate() {
        let pts = mesh.points(s)?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            let f = distance(p, center) - radius;
            lo = lo.min(f);
            hi = hi.max(f);
        }
        let crosses = lo <= 0.0 && 0.0 <= hi;
        let in_half = halfspace.map_or(true, |h| pts.iter().any(|p| h.contains(p)));
        if crosses && in_half {
            set.insert(handle);
        }
    }
    Ok(set)
}

/// Euclidean distance from `p` to the hemisphere
/// `{||x - c|| = r, x[axis] >= c[axis]}`.
pub fn distance_to_hemisphere(p: &[f64], center: &[f64], radius: f64, axis: usize) -> f64 {
    let d = p[axis] - center[axis];
    if d >= 0.0 {
        (distance(p, center) - radius).abs()
    } else {
        // The nearest point lies on the rim {x[axis] = c[axis]}.
        let rho2: f64 = p
            .iter()
            .zip(center)
            .enumerate()
            .filter(|&(k, _)| k != axis)
            .map(|(_, (a, b))| (a - b) * (a - b))
            .sum();
        (d * d + (rho2.sqrt() - radius).powi(2)).sqrt()
    }
}

/// Largest vertex-to-vertex distance of a simplex.
pub fn simplex_diameter(s: &Simplex, mesh: &Mesh) -> Result<f64> {
    let pts = mesh.points(s)?;
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            d = d.max(distance(pts[i], pts[j]));
        }
    }
    Ok(d)
}

/// A scalar field on `R^n`, the last coordinate usually being time.
pub trait Potential {
    fn dim(&self) -> usize;

    /// Value at `x`; an error where the field is singular.
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Hessian by second-order central differences with step `h`.
    ///
    /// Entries below the rounding error of their stencil are set to zero so
    /// that an affine field gives an exactly zero Hessian. A function value
    /// carries an error of about `eps (|f| + sum_k |df/dx_k| |x_k|)`, the
    /// second term coming from rounding `x + h` itself.
    fn hessian(&self, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut fmax: f64 = 0.0;
        let mut f = |dx: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(k, s) in dx {
                y[k] += s;
            }
            let v = self.value(&y)?;
            fmax = fmax.max(v.abs());
            Ok::<f64, Error>(v)
        };
        let f0 = f(&[])?;
        let mut m = DMatrix::zeros(n, n);
        let mut input_noise = 0.0;
        for i in 0..n {
            let (fp, fm) = (f(&[(i, h)])?, f(&[(i, -h)])?);
            input_noise += ((fp - fm) / (2.0 * h)).abs() * (x[i].abs() + h);
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let v = (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])?
                    + f(&[(i, -h), (j, -h)])?)
                    / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let floor = 16.0 * f64::EPSILON * (fmax + input_noise) / (h * h);
        m.iter_mut().filter(|v| v.abs() <= floor).for_each(|v| *v = 0.0);
        Ok(m)
    }
}

/// `V(x, t) = -G (m1 / |x - p1(t)| + m2 / |x - p2(t)|)` with
/// `p1(t) = p1 + (0, 0, v t)` and `p2(t) = p2 - (0, 0, v t)`, on
/// space-time points `(x, y, z, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GravitationalPotential {
    pub g: f64,
    pub m1: f64,
    pub m2: f64,
    pub p1: [f64; 3],
    pub p2: [f64; 3],
    pub v: f64,
}

impl Default for GravitationalPotential {
    fn default() -> Self {
        GravitationalPotential {
            g: 1.0,
            m1: 1.0,
            m2: 1.0,
            p1: [0.5, 0.5, 0.125],
            p2: [0.5, 0.5, 0.875],
            v: 0.375,
        }
    }
}

impl GravitationalPotential {
    /// Mass positions at time `t`.
    pub fn positions(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let mut a = self.p1;
        let mut b = self.p2;
        a[2] += self.v * t;
        b[2] -= self.v * t;
        (a, b)
    }
}

impl Potential for GravitationalPotential {
    fn dim(&self) -> usize {
        4
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: x.len(),
            });
        }
        let (a, b) = self.positions(x[3]);
        let da = distance(&x[..3], &a);
        let db = distance(&x[..3], &b);
        if da <= f64::EPSILON || db <= f64::EPSILON {
            return Err(Error::SingularPotential(x.to_vec()));
        }
        Ok(-self.g * (self.m1 / da + self.m2 / db))
    }
}

/// Space-time cylinder `{||x - center|| = radius} x [t_min, t_max]`; the
/// spatial part is every coordinate but the last.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for CylinderRegion {
    fn default() -> Self {
        CylinderRegion {
            center: vec![0.5, 0.5, 0.5],
            radius: 1.0,
            t_min: -0.1,
            t_max: 1.1,
        }
    }
}

impl CylinderRegion {
    /// Elements whose vertices straddle the spatial sphere and of which at
    /// least one vertex has its time in range.
    pub fn candidates(&self, mesh: &Mesh) -> Result<RefinementSet> {
        if self.center.len() + 1 != mesh.dim() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dim() - 1,
                found: self.center.len(),
            });
        }
        let t_axis = mesh.dim() - 1;
        let mut set = RefinementSet::new();
        for (handle, s) in mesh.simplices().enumerate() {
            let pts = mesh.points(s)?;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &pts {
                let f = distance(&p[..t_axis], &self.center) - self.radius;
                lo = lo.min(f);
                hi = hi.max(f);
            }
            let in_time = pts.iter().any(|p| (self.t_min..=self.t_max).contains(&p[t_axis]));
            if lo <= 0.0 && 0.0 <= hi && in_time {
                set.insert(handle);
            }
        }
        Ok(set)
    }
}

/// `e = sum_i |h_i^T H(x_i) h_i|` with `h_i = x_i - centroid`.
pub fn curvature_estimate(points: &[&[f64]], potential: &dyn Potential, step: f64) -> Result<f64> {
    let n = points[0].len();
    let count = points.len() as f64;
    let centroid: Vec<f64> = (0..n).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / count).collect();
    let mut e = 0.0;
    for p in points {
        let h = DVector::from_iterator(n, p.iter().zip(&centroid).map(|(a, b)| a - b));
        let hess = potential.hessian(p, step)?;
        e += (h.transpose() * hess * &h)[(0, 0)].abs();
    }
    Ok(e)
}

/// Finite-difference step: `1e-4` times the bounding-box diagonal.
pub fn hessian_step(mesh: &Mesh) -> f64 {
    let n = mesh.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (_, r) in mesh.vertices().iter() {
        for k in 0..n {
            lo[k] = lo[k].min(r.coords[k]);
            hi[k] = hi[k].max(r.coords[k]);
        }
    }
    1e-4 * distance(&lo, &hi)
}

/// The `ceil(fraction * |F|)` candidates of `region` with the largest
/// curvature estimate; equal estimates are ordered by element handle.
pub fn select_by_curvature(
    mesh: &Mesh,
    potential: &dyn Potential,
    region: &CylinderRegion,
    fraction: f64,
) -> Result<RefinementSet> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction {fraction} must lie in (0, 1]")));
    }
    if potential.dim() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            found: potential.dim(),
        });
    }
    let candidates = region.candidates(mesh)?;
    let step = hessian_step(mesh);
    let mut scored = Vec::with_capacity(candidates.len());
    for h in candidates.iter() {
        let pts = mesh.points(mesh.elements()[h].simplex())?;
        scored.push((curvature_estimate(&pts, potential, step)?, h));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let keep = (fraction * scored.len() as f64).ceil() as usize;
    Ok(scored.into_iter().take(keep).map(|(_, h)| h).collect())
}

/// `count` distinct handles drawn uniformly (capped at the element count).
pub fn select_random(mesh: &Mesh, rng: &mut impl Rng, count: usize) -> RefinementSet {
    let total = mesh.element_count();
    rand::seq::index::sample(rng, total, count.min(total)).into_iter().collect()
}
