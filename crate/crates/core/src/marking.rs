//! Co-dimensional marking of a conformal mesh.
//!
//! All edges of the initial mesh are put in a strict total order (longest
//! first, ties broken by the lexicographic order of the global edges). The
//! consistent bisection edge of any sub-simplex is its first edge in that
//! order, so every sub-simplex gets the same mark from every element that
//! contains it. Each element stores a bisection tree: the root is its own
//! consistent edge and the two branches mark the faces opposite the
//! endpoints of that edge, recursively down to single edges.

use std::collections::{BTreeSet, HashMap};

use crate::bisect::TreeSimplex;
use crate::error::{Error, Result};
use crate::mesh::{edge_length_squared, Element, GlobalEdge, Mesh, MultiId, Simplex};

/// Rank of every edge of the initial mesh; rank 0 is bisected first.
#[derive(Clone, Debug, Default)]
pub struct EdgeOrder {
    rank: HashMap<GlobalEdge, usize>,
}

impl EdgeOrder {
    pub fn rank(&self, e: &GlobalEdge) -> Option<usize> {
        self.rank.get(e).copied()
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    /// Edges sorted by rank.
    pub fn ordered_edges(&self) -> Vec<GlobalEdge> {
        let mut edges: Vec<(usize, &GlobalEdge)> = self.rank.iter().map(|(e, r)| (*r, e)).collect();
        edges.sort_unstable_by_key(|(r, _)| *r);
        edges.into_iter().map(|(_, e)| e.clone()).collect()
    }
}

/// Binary tree of edges prescribing the first bisections of an element and
/// its descendants. Both branches are present or both absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisectionTree {
    edge: GlobalEdge,
    branches: Option<Box<(BisectionTree, BisectionTree)>>,
}

impl BisectionTree {
    pub fn leaf(edge: GlobalEdge) -> Self {
        BisectionTree { edge, branches: None }
    }

    pub fn node(edge: GlobalEdge, left: BisectionTree, right: BisectionTree) -> Self {
        BisectionTree {
            edge,
            branches: Some(Box::new((left, right))),
        }
    }

    pub fn root(&self) -> &GlobalEdge {
        &self.edge
    }

    pub fn is_leaf(&self) -> bool {
        self.branches.is_none()
    }

    pub fn left(&self) -> Option<&BisectionTree> {
        self.branches.as_deref().map(|(l, _)| l)
    }

    pub fn right(&self) -> Option<&BisectionTree> {
        self.branches.as_deref().map(|(_, r)| r)
    }

    /// Number of node levels; a leaf has height 1.
    pub fn height(&self) -> usize {
        match self.branches.as_deref() {
            None => 1,
            Some((l, r)) => 1 + l.height().max(r.height()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self.branches.as_deref() {
            None => 1,
            Some((l, r)) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Edges in pre-order (node, left subtree, right subtree).
    pub fn preorder(&self) -> Vec<&GlobalEdge> {
        let mut out = Vec::with_capacity(self.node_count());
        self.collect_preorder(&mut out);
        out
    }

    fn collect_preorder<'a>(&'a self, out: &mut Vec<&'a GlobalEdge>) {
        out.push(&self.edge);
        if let Some((l, r)) = self.branches.as_deref() {
            l.collect_preorder(out);
            r.collect_preorder(out);
        }
    }

    /// Rebuilds a perfect tree of the given height from pre-order edges.
    pub fn from_preorder(edges: &[GlobalEdge], height: usize) -> Result<Self> {
        let expected = (1usize << height) - 1;
        if height == 0 || edges.len() != expected {
            return Err(Error::MalformedMark(format!(
                "a tree of height {height} needs {expected} edges, got {}",
                edges.len()
            )));
        }
        let mut it = edges.iter();
        Ok(Self::take_preorder(&mut it, height))
    }

    fn take_preorder<'a>(it: &mut impl Iterator<Item = &'a GlobalEdge>, height: usize) -> Self {
        let edge = it.next().expect("length checked").clone();
        if height == 1 {
            BisectionTree::leaf(edge)
        } else {
            let left = Self::take_preorder(it, height - 1);
            let right = Self::take_preorder(it, height - 1);
            BisectionTree::node(edge, left, right)
        }
    }

    /// Applies `f` to every stored edge.
    pub fn try_map_edges(&self, f: &mut impl FnMut(&GlobalEdge) -> Result<GlobalEdge>) -> Result<Self> {
        let edge = f(&self.edge)?;
        let branches = match self.branches.as_deref() {
            None => None,
            Some((l, r)) => Some(Box::new((l.try_map_edges(f)?, r.try_map_edges(f)?))),
        };
        Ok(BisectionTree { edge, branches })
    }

    pub(crate) fn into_branches(self) -> Option<(BisectionTree, BisectionTree)> {
        self.branches.map(|b| *b)
    }
}

/// Ranks all edges of `mesh`: sorted by global index, then stably sorted by
/// decreasing length.
pub fn build_edge_order(mesh: &Mesh) -> Result<EdgeOrder> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut edges = BTreeSet::new();
    for s in mesh.simplices() {
        if let Some(v) = s.vertices().iter().find(|v| !v.is_original()) {
            return Err(Error::NotOriginalVertex(v.clone()));
        }
        edges.extend(s.edges());
    }
    let mut measured = edges
        .into_iter()
        .map(|e| edge_length_squared(&e, mesh.vertices()).map(|l| (e, l)))
        .collect::<Result<Vec<_>>>()?;
    // `sort_by` is stable: equal lengths keep the lexicographic order.
    measured.sort_by(|(_, x), (_, y)| y.total_cmp(x));
    let rank = measured.into_iter().enumerate().map(|(r, (e, _))| (e, r)).collect();
    Ok(EdgeOrder { rank })
}

/// The edge of `s` with the lowest rank.
pub fn consistent_bisection_edge(s: &Simplex, order: &EdgeOrder) -> Result<GlobalEdge> {
    let mut best: Option<(usize, GlobalEdge)> = None;
    for e in s.edges() {
        let r = order.rank(&e).ok_or_else(|| Error::UnrankedEdge(e.clone()))?;
        if best.as_ref().map_or(true, |(b, _)| r < *b) {
            best = Some((r, e));
        }
    }
    best.map(|(_, e)| e)
        .ok_or_else(|| Error::InvalidArgument("a 0-simplex has no edges".into()))
}

/// Bisection tree of a `k`-simplex: its consistent edge `(v1, v2)` at the
/// root, the tree of the face opposite `v1` on the left and of the face
/// opposite `v2` on the right.
pub fn stage_one_tree(s: &Simplex, order: &EdgeOrder) -> Result<BisectionTree> {
    if s.dim() == 0 {
        return Err(Error::InvalidArgument("cannot mark a 0-simplex".into()));
    }
    if let Some(v) = s.vertices().iter().find(|v| !v.is_original()) {
        return Err(Error::NotOriginalVertex(v.clone()));
    }
    let edge = consistent_bisection_edge(s, order)?;
    if s.dim() == 1 {
        return Ok(BisectionTree::leaf(edge));
    }
    let left = stage_one_tree(&s.opposite_face(edge.a())?, order)?;
    let right = stage_one_tree(&s.opposite_face(edge.b())?, order)?;
    Ok(BisectionTree::node(edge, left, right))
}

/// Turns every element of an unmarked conformal mesh into a level-0
/// tree-simplex.
pub fn mark_mesh(mesh: Mesh) -> Result<Mesh> {
    if mesh.elements().iter().any(Element::is_marked) {
        return Err(Error::AlreadyMarked);
    }
    let order = build_edge_order(&mesh)?;
    let (vertices, elements) = mesh.into_parts();
    let marked = elements
        .into_iter()
        .map(|e| {
            let simplex = e.simplex().clone();
            let tree = stage_one_tree(&simplex, &order)?;
            Ok(Element::Tree(TreeSimplex {
                simplex,
                reflected: Vec::new(),
                tree,
                level: 0,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Mesh::from_parts(vertices, marked)
}

/// Endpoints of an edge as plain ids; both must be original vertices.
pub(crate) fn original_endpoints(e: &GlobalEdge) -> Result<(&MultiId, &MultiId)> {
    for v in [e.a(), e.b()] {
        if !v.is_original() {
            return Err(Error::NotOriginalVertex(v.clone()));
        }
    }
    Ok((e.a(), e.b()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::{kuhn_mesh, regular_simplex_mesh, GridSpec};

    fn edge(a: u32, b: u32) -> GlobalEdge {
        GlobalEdge::new(MultiId::single(a), MultiId::single(b)).unwrap()
    }

    fn right_triangle() -> Mesh {
        Mesh::from_cells(
            2,
            &[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn ties_are_broken_lexicographically() {
        let m = Mesh::from_cells(
            2,
            &[vec![9.0, 9.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1, 2, 3]],
        )
        .unwrap();
        let ord = build_edge_order(&m).unwrap();
        assert_eq!(ord.rank(&edge(1, 2)), Some(1));
        assert_eq!(ord.rank(&edge(1, 3)), Some(2));
    }

    #[test]
    fn right_triangle_hypotenuse_first() {
        // squared lengths: (1,2) -> 1, (1,3) -> 1, (2,3) -> 2
        let m = right_triangle();
        let ord = build_edge_order(&m).unwrap();
        assert_eq!(ord.rank(&edge(2, 3)), Some(0));
        assert_eq!(ord.rank(&edge(1, 2)), Some(1));
        assert_eq!(ord.rank(&edge(1, 3)), Some(2));
        let s = Simplex::from_ids(&[1, 2, 3]).unwrap();
        assert_eq!(consistent_bisection_edge(&s, &ord).unwrap(), edge(2, 3));
    }

    #[test]
    fn longer_edge_ranks_first() {
        let m = Mesh::from_cells(1, &[vec![0.0], vec![2.0], vec![3.0]], &[vec![0, 1], vec![1, 2]]).unwrap();
        let ord = build_edge_order(&m).unwrap();
        assert_eq!(ord.rank(&edge(0, 1)), Some(0));
        assert_eq!(ord.rank(&edge(1, 2)), Some(1));
    }

    #[test]
    fn empty_mesh_is_an_error() {
        assert!(matches!(build_edge_order(&Mesh::new(2)), Err(Error::EmptyMesh)));
    }

    #[test]
    fn unranked_edge_is_an_error() {
        let ord = build_edge_order(&right_triangle()).unwrap();
        let s = Simplex::from_ids(&[1, 2, 7]).unwrap();
        assert!(matches!(consistent_bisection_edge(&s, &ord), Err(Error::UnrankedEdge(_))));
    }

    #[test]
    fn equilateral_triangle_tree() {
        // All three lengths tie, so the order is the lexicographic one.
        let ord = EdgeOrder {
            rank: [edge(1, 2), edge(1, 3), edge(2, 3)]
                .into_iter()
                .enumerate()
                .map(|(r, e)| (e, r))
                .collect(),
        };
        let s = Simplex::from_ids(&[1, 2, 3]).unwrap();
        assert_eq!(consistent_bisection_edge(&s, &ord).unwrap(), edge(1, 2));
        let t = stage_one_tree(&s, &ord).unwrap();
        assert_eq!(t.root(), &edge(1, 2));
        assert_eq!(t.left().unwrap(), &BisectionTree::leaf(edge(2, 3)));
        assert_eq!(t.right().unwrap(), &BisectionTree::leaf(edge(1, 3)));
    }

    #[test]
    fn segment_tree_is_a_leaf() {
        let m = Mesh::from_cells(1, &[vec![0.0], vec![1.0]], &[vec![0, 1]]).unwrap();
        let ord = build_edge_order(&m).unwrap();
        let t = stage_one_tree(&Simplex::from_ids(&[0, 1]).unwrap(), &ord).unwrap();
        assert!(t.is_leaf());
        assert_eq!(t.root(), &edge(0, 1));
    }

    #[test]
    fn tree_sizes_follow_dimension() {
        for n in 1..=5 {
            let m = regular_simplex_mesh(n, 1.0).unwrap();
            let ord = build_edge_order(&m).unwrap();
            let t = stage_one_tree(m.elements()[0].simplex(), &ord).unwrap();
            assert_eq!(t.height(), n);
            assert_eq!(t.node_count(), (1 << n) - 1);
        }
    }

    #[test]
    fn ranks_are_a_permutation_sorted_by_length() {
        let m = kuhn_mesh(&GridSpec::unit(3, 2)).unwrap();
        let ord = build_edge_order(&m).unwrap();
        let edges = ord.ordered_edges();
        assert_eq!(edges.len(), ord.len());
        for (r, e) in edges.iter().enumerate() {
            assert_eq!(ord.rank(e), Some(r));
        }
        for w in edges.windows(2) {
            let l0 = edge_length_squared(&w[0], m.vertices()).unwrap();
            let l1 = edge_length_squared(&w[1], m.vertices()).unwrap();
            assert!(l0 > l1 || (l0 == l1 && w[0] < w[1]));
        }
    }

    #[test]
    fn shared_faces_get_identical_subtrees() {
        let m = kuhn_mesh(&GridSpec::unit(3, 2)).unwrap();
        let ord = build_edge_order(&m).unwrap();
        // The subtree stored for a face inside any element equals the tree
        // computed for the face on its own.
        let mut checked = 0;
        for s in m.simplices() {
            let t = stage_one_tree(s, &ord).unwrap();
            let (a, b) = (t.root().a().clone(), t.root().b().clone());
            let fa = s.opposite_face(&a).unwrap();
            let fb = s.opposite_face(&b).unwrap();
            assert_eq!(t.left().unwrap(), &stage_one_tree(&fa, &ord).unwrap());
            assert_eq!(t.right().unwrap(), &stage_one_tree(&fb, &ord).unwrap());
            checked += 1;
        }
        assert_eq!(checked, 48);
    }

    #[test]
    fn mark_mesh_produces_level_zero_tree_simplices() {
        let m = mark_mesh(regular_simplex_mesh(2, 1.0).unwrap()).unwrap();
        assert_eq!(m.element_count(), 1);
        match &m.elements()[0] {
            Element::Tree(t) => {
                assert_eq!(t.level, 0);
                assert!(t.reflected.is_empty());
                assert_eq!(t.tree.height(), 2);
            }
            other => panic!("unexpected element {other:?}"),
        }
        assert!(matches!(mark_mesh(m), Err(Error::AlreadyMarked)));
    }

    #[test]
    fn preorder_round_trip() {
        let m = regular_simplex_mesh(4, 1.0).unwrap();
        let ord = build_edge_order(&m).unwrap();
        let t = stage_one_tree(m.elements()[0].simplex(), &ord).unwrap();
        let edges: Vec<GlobalEdge> = t.preorder().into_iter().cloned().collect();
        assert_eq!(BisectionTree::from_preorder(&edges, 4).unwrap(), t);
        assert!(BisectionTree::from_preorder(&edges[1..], 4).is_err());
    }
}
