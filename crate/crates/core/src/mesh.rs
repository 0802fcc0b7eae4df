//! Core mesh model: multi-ids, simplices, global edges, the vertex table and
//! the mesh container itself.
//!
//! Vertices are named by [`MultiId`]s. An original vertex `v` is the
//! one-element multi-id `[v]`; a vertex created by bisecting the edge
//! `(a, b)` is the sorted merge of `a` and `b`. Because the name of a
//! mid-vertex depends only on the edge, two elements that split the same
//! edge create the same vertex without talking to each other.

use std::collections::HashMap;
use std::fmt;

use smallvec::SmallVec;

use crate::bisect::{MaubachSimplex, TreeSimplex};
use crate::error::{Error, Result};

/// Sorted list of original vertex ids naming a mesh vertex.
///
/// The derived ordering is lexicographic, with a strict prefix ordered
/// before any of its extensions (`[1] < [1, 2]`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiId(SmallVec<[u32; 4]>);

impl MultiId {
    /// The multi-id of an original vertex.
    pub fn single(id: u32) -> Self {
        let mut ids = SmallVec::new();
        ids.push(id);
        MultiId(ids)
    }

    /// Builds a multi-id from arbitrary ids, sorting them. Duplicates are kept.
    pub fn from_ids(ids: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut ids: SmallVec<[u32; 4]> = ids.into_iter().collect();
        if ids.is_empty() {
            return Err(Error::InvalidArgument("empty multi-id".into()));
        }
        ids.sort_unstable();
        Ok(MultiId(ids))
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True for vertices that existed when the current refinement pass started.
    pub fn is_original(&self) -> bool {
        self.0.len() == 1
    }

    /// The distinct ids of this multi-id, ascending.
    pub(crate) fn dedup(&self) -> MultiId {
        let mut ids = self.0.clone();
        ids.dedup();
        MultiId(ids)
    }
}

impl From<u32> for MultiId {
    fn from(id: u32) -> Self {
        MultiId::single(id)
    }
}

impl fmt::Debug for MultiId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MultiId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "]")
    }
}

/// Multi-id of the vertex created by bisecting the edge `(a, b)`.
pub fn mid_vertex(a: &MultiId, b: &MultiId) -> Result<MultiId> {
    if a == b {
        return Err(Error::DegenerateEdge(a.clone()));
    }
    let (x, y) = (a.ids(), b.ids());
    let mut merged = SmallVec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        if x[i] <= y[j] {
            merged.push(x[i]);
            i += 1;
        } else {
            merged.push(y[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&x[i..]);
    merged.extend_from_slice(&y[j..]);
    Ok(MultiId(merged))
}

/// An edge with canonical orientation `a < b`.
///
/// The derived ordering compares `a` first and then `b`, which is the
/// "lower global index" order used to break length ties.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalEdge {
    a: MultiId,
    b: MultiId,
}

impl GlobalEdge {
    pub fn new(a: MultiId, b: MultiId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(GlobalEdge { a, b }),
            std::cmp::Ordering::Greater => Ok(GlobalEdge { a: b, b: a }),
            std::cmp::Ordering::Equal => Err(Error::DegenerateEdge(a)),
        }
    }

    pub fn a(&self) -> &MultiId {
        &self.a
    }

    pub fn b(&self) -> &MultiId {
        &self.b
    }

    pub fn mid_vertex(&self) -> MultiId {
        mid_vertex(&self.a, &self.b).expect("global edge endpoints are distinct")
    }
}

impl fmt::Debug for GlobalEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GlobalEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Ordered tuple of `n + 1` distinct vertices.
///
/// Vertex order matters once an element has been cast to a Maubach simplex.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    vertices: Vec<MultiId>,
}

impl Simplex {
    pub fn new(vertices: Vec<MultiId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("a simplex needs at least one vertex".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::InvalidArgument(format!("repeated vertex {v} in simplex")));
            }
        }
        Ok(Simplex { vertices })
    }

    /// Simplex over original vertex ids.
    pub fn from_ids(ids: &[u32]) -> Result<Self> {
        Simplex::new(ids.iter().copied().map(MultiId::single).collect())
    }

    pub(crate) fn from_vec_unchecked(vertices: Vec<MultiId>) -> Self {
        debug_assert!(Simplex::new(vertices.clone()).is_ok());
        Simplex { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[MultiId] {
        &self.vertices
    }

    pub fn position(&self, v: &MultiId) -> Option<usize> {
        self.vertices.iter().position(|w| w == v)
    }

    pub fn contains(&self, v: &MultiId) -> bool {
        self.position(v).is_some()
    }

    /// The `n(n+1)/2` edges in row-major order
    /// `(v0,v1), (v0,v2), ..., (v0,vn), (v1,v2), ..., (v_{n-1},v_n)`.
    pub fn edges(&self) -> Vec<GlobalEdge> {
        let n = self.vertices.len();
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                edges.push(
                    GlobalEdge::new(self.vertices[i].clone(), self.vertices[j].clone())
                        .expect("simplex vertices are distinct"),
                );
            }
        }
        edges
    }

    /// The face opposite `v`, keeping the order of the remaining vertices.
    pub fn opposite_face(&self, v: &MultiId) -> Result<Simplex> {
        let i = self.position(v).ok_or_else(|| Error::VertexNotInSimplex(v.clone()))?;
        let mut vertices = self.vertices.clone();
        vertices.remove(i);
        Ok(Simplex { vertices })
    }

    /// Vertices sorted by multi-id.
    pub fn sorted_vertices(&self) -> Vec<MultiId> {
        let mut v = self.vertices.clone();
        v.sort();
        v
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub fn simplex_edges(s: &Simplex) -> Vec<GlobalEdge> {
    s.edges()
}

pub fn opposite_face(s: &Simplex, v: &MultiId) -> Result<Simplex> {
    s.opposite_face(v)
}

/// Coordinates and lineage of one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexRecord {
    pub coords: Vec<f64>,
    /// Distinct ids of the original-mesh vertices spanning the smallest
    /// original entity that contains this vertex. Unchanged by renumbering.
    pub roots: MultiId,
}

/// Map from multi-id to coordinates in `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexTable {
    dim: usize,
    records: HashMap<MultiId, VertexRecord>,
}

impl VertexTable {
    pub fn new(dim: usize) -> Self {
        VertexTable {
            dim,
            records: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Inserts a vertex whose lineage is its own set of ids.
    pub fn insert(&mut self, id: MultiId, coords: Vec<f64>) -> Result<()> {
        let roots = id.dedup();
        self.insert_with_roots(id, coords, roots)
    }

    pub fn insert_with_roots(&mut self, id: MultiId, coords: Vec<f64>, roots: MultiId) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        self.records.insert(id, VertexRecord { coords, roots });
        Ok(())
    }

    pub fn contains(&self, id: &MultiId) -> bool {
        self.records.contains_key(id)
    }

    pub fn get(&self, id: &MultiId) -> Result<&VertexRecord> {
        self.records.get(id).ok_or_else(|| Error::MissingVertex(id.clone()))
    }

    pub fn coords(&self, id: &MultiId) -> Result<&[f64]> {
        Ok(&self.get(id)?.coords)
    }

    pub fn roots(&self, id: &MultiId) -> Result<&MultiId> {
        Ok(&self.get(id)?.roots)
    }

    /// Creates the midpoint of `(a, b)` if it does not exist yet and returns
    /// its multi-id. The first insertion wins; later ones only check that
    /// they would have produced the same point.
    pub fn insert_mid(&mut self, a: &MultiId, b: &MultiId) -> Result<MultiId> {
        let id = mid_vertex(a, b)?;
        let ra = self.get(a)?;
        let rb = self.get(b)?;
        let coords: Vec<f64> = ra
            .coords
            .iter()
            .zip(&rb.coords)
            .map(|(x, y)| (x + y) * 0.5)
            .collect();
        if let Some(existing) = self.records.get(&id) {
            let gap = squared_distance(&existing.coords, &coords);
            let scale = squared_distance(&ra.coords, &rb.coords);
            if gap > 1e-18 * scale {
                return Err(Error::MultiIdCollision(id));
            }
            return Ok(id);
        }
        let roots = merge_roots(&ra.roots, &rb.roots);
        self.records.insert(id.clone(), VertexRecord { coords, roots });
        Ok(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &MultiId> {
        self.records.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiId, &VertexRecord)> {
        self.records.iter()
    }

    /// Multi-ids in ascending order.
    pub fn sorted_ids(&self) -> Vec<MultiId> {
        let mut ids: Vec<MultiId> = self.records.keys().cloned().collect();
        ids.sort();
        ids
    }
}

fn merge_roots(a: &MultiId, b: &MultiId) -> MultiId {
    let mut ids: SmallVec<[u32; 4]> = a.ids().iter().chain(b.ids()).copied().collect();
    ids.sort_unstable();
    ids.dedup();
    MultiId(ids)
}

fn squared_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared length of a global edge, accumulated in coordinate order from
/// `a` to `b`. The same edge always gives the same bits.
pub fn edge_length_squared(e: &GlobalEdge, vt: &VertexTable) -> Result<f64> {
    let pa = vt.coords(e.a())?;
    let pb = vt.coords(e.b())?;
    let mut acc = 0.0;
    for k in 0..pa.len() {
        let d = pb[k] - pa[k];
        acc += d * d;
    }
    Ok(acc)
}

/// One mesh element in one of its three lifecycle states.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    /// Not yet marked; only found in freshly generated or imported meshes.
    Unmarked(Simplex),
    Tree(TreeSimplex),
    Maubach(MaubachSimplex),
}

impl Element {
    pub fn simplex(&self) -> &Simplex {
        match self {
            Element::Unmarked(s) => s,
            Element::Tree(t) => &t.simplex,
            Element::Maubach(m) => &m.simplex,
        }
    }

    pub fn level(&self) -> usize {
        match self {
            Element::Unmarked(_) => 0,
            Element::Tree(t) => t.level,
            Element::Maubach(m) => m.level,
        }
    }

    pub fn is_marked(&self) -> bool {
        !matches!(self, Element::Unmarked(_))
    }
}

/// A simplicial mesh of dimension `n`: the vertex table plus elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: VertexTable,
    elements: Vec<Element>,
}

impl Mesh {
    pub fn new(dim: usize) -> Self {
        Mesh {
            dim,
            vertices: VertexTable::new(dim),
            elements: Vec::new(),
        }
    }

    pub fn from_parts(vertices: VertexTable, elements: Vec<Element>) -> Result<Self> {
        let dim = vertices.dim();
        for e in &elements {
            let s = e.simplex();
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            for v in s.vertices() {
                if !vertices.contains(v) {
                    return Err(Error::MissingVertex(v.clone()));
                }
            }
        }
        Ok(Mesh {
            dim,
            vertices,
            elements,
        })
    }

    /// Builds an unmarked mesh; vertex `i` gets the multi-id `[i]`.
    pub fn from_cells(dim: usize, points: &[Vec<f64>], cells: &[Vec<u32>]) -> Result<Self> {
        let mut vertices = VertexTable::new(dim);
        for (i, p) in points.iter().enumerate() {
            vertices.insert(MultiId::single(i as u32), p.clone())?;
        }
        let elements = cells
            .iter()
            .map(|c| Simplex::from_ids(c).map(Element::Unmarked))
            .collect::<Result<Vec<_>>>()?;
        Mesh::from_parts(vertices, elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &VertexTable {
        &self.vertices
    }

    pub fn vertices_mut(&mut self) -> &mut VertexTable {
        &mut self.vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True when every element carries a mark. An empty mesh is not marked.
    pub fn is_marked(&self) -> bool {
        !self.elements.is_empty() && self.elements.iter().all(Element::is_marked)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.elements.iter().map(Element::simplex)
    }

    /// Coordinates of the vertices of `s`, in simplex order.
    pub fn points(&self, s: &Simplex) -> Result<Vec<&[f64]>> {
        s.vertices().iter().map(|v| self.vertices.coords(v)).collect()
    }

    pub(crate) fn into_parts(self) -> (VertexTable, Vec<Element>) {
        (self.vertices, self.elements)
    }
}
