//! Deterministic generators for test and experiment meshes.
//!
//! All generators emit unmarked elements whose vertices carry length-1
//! multi-ids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{Element, Mesh, MultiId, Simplex, VertexTable};
use crate::quality::{regular_simplex_vertices, shape_quality_of_points};

/// Draws allowed before [`random_simplex_mesh`] gives up.
pub const MAX_REJECTIONS: usize = 10_000;

/// An axis-aligned box `origin + [0, extent]^n` split into `divisions`
/// cells per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub divisions: usize,
    pub origin: Vec<f64>,
    pub extent: f64,
}

impl GridSpec {
    /// The unit cube `[0, 1]^n` with `k` cells per axis.
    pub fn unit(dim: usize, divisions: usize) -> Self {
        GridSpec {
            dim,
            divisions,
            origin: vec![0.0; dim],
            extent: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.divisions == 0 {
            return Err(Error::InvalidArgument("grid needs dim >= 1 and divisions >= 1".into()));
        }
        if self.origin.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.origin.len(),
            });
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid extent {} must be positive", self.extent)));
        }
        Ok(())
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        // Standard next-permutation step.
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

/// Coxeter–Freudenthal–Kuhn triangulation of a grid: every cell is split
/// into `n!` simplices `x_0 = corner, x_i = x_{i-1} + h e_{pi(i)}`, one per
/// permutation `pi` in lexicographic order. Vertices are numbered
/// lexicographically by grid coordinate with the first axis most
/// significant; cells are visited in the same order.
pub fn kuhn_mesh(g: &GridSpec) -> Result<Mesh> {
    g.validate()?;
    let (n, k) = (g.dim, g.divisions);
    let side = k + 1;
    let h = g.extent / k as f64;
    let vertex_count = side
        .checked_pow(n as u32)
        .filter(|&c| c <= u32::MAX as usize)
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;

    let index = |coords: &[usize]| coords.iter().fold(0usize, |acc, &c| acc * side + c) as u32;
    let unrank = |mut id: usize, base: usize| {
        let mut c = vec![0usize; n];
        for d in (0..n).rev() {
            c[d] = id % base;
            id /= base;
        }
        c
    };

    let mut vertices = VertexTable::new(n);
    for id in 0..vertex_count {
        let c = unrank(id, side);
        let p = (0..n).map(|d| g.origin[d] + c[d] as f64 * h).collect();
        vertices.insert(MultiId::single(id as u32), p)?;
    }

    let perms = permutations(n);
    let cells = k.pow(n as u32);
    let mut elements = Vec::with_capacity(cells * perms.len());
    for cell in 0..cells {
        let corner = unrank(cell, k);
        for pi in &perms {
            let mut x = corner.clone();
            let mut ids = Vec::with_capacity(n + 1);
            ids.push(index(&x));
            for &axis in pi {
                x[axis] += 1;
                ids.push(index(&x));
            }
            elements.push(Element::Unmarked(Simplex::from_ids(&ids)?));
        }
    }
    Mesh::from_parts(vertices, elements)
}

/// One regular `n`-simplex with the given edge length.
pub fn regular_simplex_mesh(n: usize, edge: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(edge > 0.0 && edge.is_finite()) {
        return Err(Error::InvalidArgument(format!("edge length {edge} must be positive")));
    }
    let points: Vec<Vec<f64>> = regular_simplex_vertices(n)
        .into_iter()
        .map(|p| p.into_iter().map(|x| x * edge).collect())
        .collect();
    let cell: Vec<u32> = (0..=n as u32).collect();
    Mesh::from_cells(n, &points, &[cell])
}

/// One simplex with vertices drawn uniformly from the unit cube by a
/// ChaCha8 generator seeded with `seed`, redrawn until its shape quality
/// is at least `min_quality`.
pub fn random_simplex_mesh(n: usize, seed: u64, min_quality: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(min_quality > 0.0 && min_quality < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "minimum quality {min_quality} must lie in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REJECTIONS {
        let points: Vec<Vec<f64>> = (0..=n)
            .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
        if shape_quality_of_points(&refs) >= min_quality {
            let cell: Vec<u32> = (0..=n as u32).collect();
            return Mesh::from_cells(n, &points, &[cell]);
        }
    }
    Err(Error::TooManyRejections {
        min_quality,
        attempts: MAX_REJECTIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::{shape_quality, simplex_volume};
    use crate::verify::{get_faces, is_mesh_conformal};

    #[test]
    fn permutations_are_lexicographic() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(
            permutations(3),
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(permutations(5).len(), 120);
    }

    #[test]
    fn kuhn_counts() {
        let m = kuhn_mesh(&GridSpec::unit(4, 2)).unwrap();
        assert_eq!((m.element_count(), m.vertex_count()), (384, 81));
        let m = kuhn_mesh(&GridSpec::unit(2, 1)).unwrap();
        assert_eq!((m.element_count(), m.vertex_count()), (2, 4));
        let m = kuhn_mesh(&GridSpec::unit(3, 3)).unwrap();
        assert_eq!((m.element_count(), m.vertex_count()), (27 * 6, 64));
    }

    #[test]
    fn kuhn_square_layout() {
        // ids: (0,0)=0 (0,1)=1 (1,0)=2 (1,1)=3.
        let m = kuhn_mesh(&GridSpec::unit(2, 1)).unwrap();
        let cells: Vec<Vec<u32>> = m
            .simplices()
            .map(|s| s.vertices().iter().map(|v| v.ids()[0]).collect())
            .collect();
        assert_eq!(cells, vec![vec![0, 2, 3], vec![0, 1, 3]]);
        assert_eq!(m.vertices().coords(&MultiId::single(2)).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn kuhn_volumes_and_conformity() {
        for (n, k) in [(1, 3), (2, 2), (3, 2), (4, 1)] {
            let m = kuhn_mesh(&GridSpec::unit(n, k)).unwrap();
            let h = 1.0 / k as f64;
            let expected = h.powi(n as i32) / (1..=n).product::<usize>() as f64;
            let mut total = 0.0;
            for s in m.simplices() {
                let v = simplex_volume(s, m.vertices()).unwrap();
                assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
                total += v;
            }
            assert!((total - 1.0).abs() < 1e-12);
            get_faces(&m).unwrap();
            assert!(is_mesh_conformal(&m, &m).unwrap());
        }
    }

    #[test]
    fn regular_simplex_edges() {
        for n in 1..=6 {
            let m = regular_simplex_mesh(n, 2.5).unwrap();
            assert_eq!(m.vertex_count(), n + 1);
            let s = &m.elements()[0].simplex().clone();
            for e in s.edges() {
                let l = crate::mesh::edge_length_squared(&e, m.vertices()).unwrap().sqrt();
                assert!((l - 2.5).abs() <= 1e-12 * 2.5);
            }
            assert_eq!(s.edges().len(), n * (n + 1) / 2);
            assert!((shape_quality(s, m.vertices()).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(regular_simplex_mesh(0, 1.0).is_err());
        assert!(regular_simplex_mesh(2, -1.0).is_err());
    }

    #[test]
    fn random_simplex_is_deterministic_and_good_enough() {
        for n in 1..=4 {
            let a = random_simplex_mesh(n, 7, 0.2).unwrap();
            let b = random_simplex_mesh(n, 7, 0.2).unwrap();
            assert_eq!(a, b);
            let q = shape_quality(a.elements()[0].simplex(), a.vertices()).unwrap();
            assert!(q >= 0.2);
            for (_, r) in a.vertices().iter() {
                assert!(r.coords.iter().all(|x| (0.0..1.0).contains(x)));
            }
        }
        assert_ne!(random_simplex_mesh(3, 1, 0.1).unwrap(), random_simplex_mesh(3, 2, 0.1).unwrap());
        assert!(matches!(
            random_simplex_mesh(4, 0, 0.999_999),
            Err(Error::TooManyRejections { .. })
        ));
    }
}
