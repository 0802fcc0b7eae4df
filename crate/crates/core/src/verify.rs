//! Face dictionaries and the conformity and reflectivity checks.

use std::collections::{HashMap, HashSet};

use log::debug;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, MultiId};

/// A face as its `n` vertices sorted ascending.
pub type Face = Vec<MultiId>;

/// Map from sorted face to the handles of the elements containing it.
pub type FaceDict = HashMap<Face, SmallVec<[usize; 2]>>;

/// Faces of a mesh split by incidence count.
#[derive(Clone, Debug, Default)]
pub struct Faces {
    /// Faces shared by two elements.
    pub inner: FaceDict,
    /// Faces of exactly one element.
    pub boundary: FaceDict,
}

/// Collects every face of every element. A face found in more than two
/// elements is a structural error.
pub fn get_faces(mesh: &Mesh) -> Result<Faces> {
    let mut all: FaceDict = HashMap::with_capacity(mesh.element_count() * (mesh.dim() + 1));
    for (h, s) in mesh.simplices().enumerate() {
        let sorted = s.sorted_vertices();
        for j in 0..sorted.len() {
            let mut face = sorted.clone();
            face.remove(j);
            all.entry(face).or_default().push(h);
        }
    }
    let mut faces = Faces::default();
    for (face, owners) in all {
        match owners.len() {
            1 => {
                faces.boundary.insert(face, owners);
            }
            2 => {
                faces.inner.insert(face, owners);
            }
            count => {
                return Err(Error::OverSharedFace {
                    face: format_face(&face),
                    count,
                })
            }
        }
    }
    Ok(faces)
}

fn format_face(face: &[MultiId]) -> String {
    let parts: Vec<String> = face.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// All integer ids occurring in `face`, deduplicated, sorted and wrapped as
/// length-1 multi-ids.
pub fn get_fathers_vertices(face: &[MultiId]) -> Vec<MultiId> {
    let mut ids: Vec<u32> = face.iter().flat_map(|v| v.ids().iter().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().map(MultiId::single).collect()
}

/// Father face of `face` in the root mesh, computed from the vertex
/// lineages so that it survives renumbering.
fn root_fathers(mesh: &Mesh, face: &[MultiId]) -> Result<Vec<MultiId>> {
    let roots = face
        .iter()
        .map(|v| mesh.vertices().roots(v).cloned())
        .collect::<Result<Vec<_>>>()?;
    Ok(get_fathers_vertices(&roots))
}

/// True iff no face of `m1` is over-shared (that case is an error) and
/// every boundary face of `m1` lies in a boundary face of `m0`: its father
/// vertices are exactly `n` ids forming a boundary face of `m0`. Both
/// meshes must descend from the same root mesh.
pub fn is_mesh_conformal(m1: &Mesh, m0: &Mesh) -> Result<bool> {
    if m1.dim() != m0.dim() {
        return Err(Error::DimensionMismatch {
            expected: m0.dim(),
            found: m1.dim(),
        });
    }
    let n = m1.dim();
    let f0 = get_faces(m0)?;
    let f1 = get_faces(m1)?;
    let mut boundary0 = HashSet::with_capacity(f0.boundary.len());
    for face in f0.boundary.keys() {
        boundary0.insert(root_fathers(m0, face)?);
    }
    for face in f1.boundary.keys() {
        let fathers = root_fathers(m1, face)?;
        if fathers.len() != n {
            debug!(
                "boundary face {} has {} father vertices, expected {n}",
                format_face(face),
                fathers.len()
            );
            return Ok(false);
        }
        if !boundary0.contains(&fathers) {
            debug!("boundary face {} is not on the initial boundary", format_face(face));
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff every inner face appears in the same vertex order in both of
/// its elements.
pub fn is_reflected(mesh: &Mesh) -> Result<bool> {
    let faces = get_faces(mesh)?;
    let elements = mesh.elements();
    for (face, owners) in &faces.inner {
        let ordered = |h: usize| -> Vec<&MultiId> {
            elements[h]
                .simplex()
                .vertices()
                .iter()
                .filter(|v| face.binary_search(v).is_ok())
                .collect()
        };
        if ordered(owners[0]) != ordered(owners[1]) {
            debug!(
                "elements {} and {} are not reflected across {}",
                owners[0],
                owners[1],
                format_face(face)
            );
            return Ok(false);
        }
    }
    Ok(true)
}
