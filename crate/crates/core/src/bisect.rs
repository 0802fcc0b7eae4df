//! The three-stage bisection kernel.
//!
//! The stage is picked by the descendant level `l` of an element of an
//! `n`-dimensional mesh:
//!
//! * `l < n - 1`: the root of the stored bisection tree is split and the
//!   new mid-vertex is pushed onto the front of the reflected list;
//! * `l = n - 1`: the last tree edge is split and each child is reordered as
//!   `(edge endpoint, newest mid-vertex, ..., oldest mid-vertex)`, which makes
//!   it a Maubach simplex with tag `n`;
//! * `l >= n`: newest vertex bisection (Maubach) on the stored vertex order.

use crate::driver::RefinementSet;
use crate::error::{Error, Result};
use crate::marking::{original_endpoints, BisectionTree};
use crate::mesh::{mid_vertex, Element, GlobalEdge, Mesh, MultiId, Simplex, VertexTable};

/// Element during the first `n - 1` bisections.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeSimplex {
    pub simplex: Simplex,
    /// Mid-vertices created so far, newest first. Its length equals `level`.
    pub reflected: Vec<MultiId>,
    pub tree: BisectionTree,
    pub level: usize,
}

/// Tagged simplex refined by newest vertex bisection.
#[derive(Clone, Debug, PartialEq)]
pub struct MaubachSimplex {
    pub simplex: Simplex,
    /// Position of the far endpoint of the refinement edge `(v0, v_tag)`.
    pub tag: usize,
    pub level: usize,
}

/// Children of a tree-simplex bisection before any stage-specific handling.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeSplit {
    pub mid: MultiId,
    pub first: Simplex,
    pub first_reflected: Vec<MultiId>,
    pub second: Simplex,
    pub second_reflected: Vec<MultiId>,
}

/// Splits `s` at the midpoint `m` of `edge = (v1, v2)`: the first child
/// replaces `v2` by `m`, the second replaces `v1`. Both lists get `m` in
/// front.
pub fn bisect_tree_simplex(
    s: &Simplex,
    reflected: &[MultiId],
    edge: &GlobalEdge,
    level: usize,
) -> Result<TreeSplit> {
    if reflected.len() != level {
        return Err(Error::MalformedMark(format!(
            "level {level} tree-simplex carries {} reflected vertices",
            reflected.len()
        )));
    }
    let (v1, v2) = original_endpoints(edge)?;
    let i1 = s.position(v1).ok_or_else(|| Error::VertexNotInSimplex(v1.clone()))?;
    let i2 = s.position(v2).ok_or_else(|| Error::VertexNotInSimplex(v2.clone()))?;
    let mid = mid_vertex(v1, v2)?;

    let mut first = s.vertices().to_vec();
    first[i2] = mid.clone();
    let mut second = s.vertices().to_vec();
    second[i1] = mid.clone();

    let mut list = Vec::with_capacity(reflected.len() + 1);
    list.push(mid.clone());
    list.extend_from_slice(reflected);

    Ok(TreeSplit {
        mid,
        first: Simplex::from_vec_unchecked(first),
        first_reflected: list.clone(),
        second: Simplex::from_vec_unchecked(second),
        second_reflected: list,
    })
}

/// First stage: bisect along the root of the tree.
///
/// The first child keeps `v1` and loses `v2`, so what remains of the
/// original simplex in it is the face opposite `v2`, which is marked by the
/// right branch. The second child correspondingly takes the left branch.
pub fn bisect_stage_one(t: &TreeSimplex) -> Result<(TreeSimplex, TreeSimplex)> {
    let n = t.simplex.dim();
    if t.level + 1 >= n {
        return Err(Error::MalformedMark(format!(
            "stage one needs level < {}, found {}",
            n.saturating_sub(1),
            t.level
        )));
    }
    let (left, right) = t.tree.clone().into_branches().ok_or_else(|| {
        Error::MalformedMark(format!("leaf bisection tree at level {} of an {n}-simplex", t.level))
    })?;
    let split = bisect_tree_simplex(&t.simplex, &t.reflected, t.tree.root(), t.level)?;
    Ok((
        TreeSimplex {
            simplex: split.first,
            reflected: split.first_reflected,
            tree: right,
            level: t.level + 1,
        },
        TreeSimplex {
            simplex: split.second,
            reflected: split.second_reflected,
            tree: left,
            level: t.level + 1,
        },
    ))
}

/// Reorders the two children of the last tree bisection as
/// `(v1, L1[0], ..., L1[n-1])` and `(v2, L2[0], ..., L2[n-1])`.
pub fn cast_to_maubach(
    edge: &GlobalEdge,
    first: &[MultiId],
    second: &[MultiId],
    dim: usize,
) -> Result<(Simplex, Simplex)> {
    for list in [first, second] {
        if list.len() != dim {
            return Err(Error::MalformedMark(format!(
                "cast needs {dim} accumulated mid-vertices, found {}",
                list.len()
            )));
        }
    }
    let (v1, v2) = original_endpoints(edge)?;
    let build = |head: &MultiId, tail: &[MultiId]| {
        let mut v = Vec::with_capacity(dim + 1);
        v.push(head.clone());
        v.extend_from_slice(tail);
        Simplex::new(v)
    };
    Ok((build(v1, first)?, build(v2, second)?))
}

/// Second stage: the `n`-th bisection, producing two Maubach simplices with
/// tag `n`.
pub fn bisect_to_maubach(t: &TreeSimplex) -> Result<(MaubachSimplex, MaubachSimplex)> {
    let n = t.simplex.dim();
    if t.level + 1 != n {
        return Err(Error::MalformedMark(format!(
            "cast needs level {}, found {}",
            n - 1,
            t.level
        )));
    }
    if !t.tree.is_leaf() {
        return Err(Error::MalformedMark("cast needs a leaf bisection tree".into()));
    }
    let edge = t.tree.root();
    let split = bisect_tree_simplex(&t.simplex, &t.reflected, edge, t.level)?;
    let (r1, r2) = cast_to_maubach(edge, &split.first_reflected, &split.second_reflected, n)?;
    Ok((
        MaubachSimplex {
            simplex: r1,
            tag: n,
            level: n,
        },
        MaubachSimplex {
            simplex: r2,
            tag: n,
            level: n,
        },
    ))
}

/// Third stage: Maubach's newest vertex bisection of `(v0, ..., vn)_d`
/// along `(v0, vd)`.
pub fn bisect_maubach(m: &MaubachSimplex) -> Result<(MaubachSimplex, MaubachSimplex)> {
    let n = m.simplex.dim();
    let d = m.tag;
    if d == 0 || d > n {
        return Err(Error::MalformedMark(format!("Maubach tag {d} outside 1..={n}")));
    }
    let v = m.simplex.vertices();
    let w = mid_vertex(&v[0], &v[d])?;

    let mut first = Vec::with_capacity(n + 1);
    first.extend_from_slice(&v[..d]);
    first.push(w.clone());
    first.extend_from_slice(&v[d + 1..]);

    let mut second = Vec::with_capacity(n + 1);
    second.extend_from_slice(&v[1..=d]);
    second.push(w);
    second.extend_from_slice(&v[d + 1..]);

    let tag = if d > 1 { d - 1 } else { n };
    Ok((
        MaubachSimplex {
            simplex: Simplex::from_vec_unchecked(first),
            tag,
            level: m.level + 1,
        },
        MaubachSimplex {
            simplex: Simplex::from_vec_unchecked(second),
            tag,
            level: m.level + 1,
        },
    ))
}

/// The edge a marked element will split next.
pub fn refinement_edge(e: &Element) -> Result<GlobalEdge> {
    match e {
        Element::Unmarked(_) => Err(Error::MalformedMark("element is not marked".into())),
        Element::Tree(t) => Ok(t.tree.root().clone()),
        Element::Maubach(m) => {
            let v = m.simplex.vertices();
            let d = m.tag.min(v.len() - 1);
            GlobalEdge::new(v[0].clone(), v[d].clone())
        }
    }
}

/// Bisects one marked element, dispatching on its level, and records the
/// new mid-vertex in `vertices` (a no-op when a neighbour already did).
pub fn bisect_simplex(e: &Element, vertices: &mut VertexTable) -> Result<(Element, Element)> {
    let n = e.simplex().dim();
    let edge = refinement_edge(e)?;
    let children = match e {
        Element::Unmarked(_) => unreachable!("refinement_edge rejects unmarked elements"),
        Element::Tree(t) if t.level + 1 < n => {
            let (a, b) = bisect_stage_one(t)?;
            (Element::Tree(a), Element::Tree(b))
        }
        Element::Tree(t) if t.level + 1 == n => {
            let (a, b) = bisect_to_maubach(t)?;
            (Element::Maubach(a), Element::Maubach(b))
        }
        Element::Tree(t) => {
            return Err(Error::MalformedMark(format!(
                "tree-simplex at level {} in dimension {n}",
                t.level
            )))
        }
        Element::Maubach(m) if m.level < n => {
            return Err(Error::MalformedMark(format!(
                "Maubach simplex at level {} in dimension {n}",
                m.level
            )))
        }
        Element::Maubach(m) => {
            let (a, b) = bisect_maubach(m)?;
            (Element::Maubach(a), Element::Maubach(b))
        }
    };
    vertices.insert_mid(edge.a(), edge.b())?;
    Ok(children)
}

/// Hook called once per bisection with the parent and its two children.
pub trait BisectionObserver {
    fn on_bisection(&mut self, parent: &Element, first: &Element, second: &Element, vertices: &VertexTable);
}

impl BisectionObserver for () {
    fn on_bisection(&mut self, _: &Element, _: &Element, _: &Element, _: &VertexTable) {}
}

impl<F> BisectionObserver for F
where
    F: FnMut(&Element, &Element, &Element, &VertexTable),
{
    fn on_bisection(&mut self, parent: &Element, first: &Element, second: &Element, vertices: &VertexTable) {
        self(parent, first, second, vertices)
    }
}

/// Replaces every element of `set` by its two children, in place order.
pub fn bisect_simplices(mesh: Mesh, set: &RefinementSet) -> Result<Mesh> {
    bisect_simplices_observed(mesh, set, &mut ())
}

pub fn bisect_simplices_observed(
    mesh: Mesh,
    set: &RefinementSet,
    observer: &mut dyn BisectionObserver,
) -> Result<Mesh> {
    if let Some(h) = set.iter().find(|&h| h >= mesh.element_count()) {
        return Err(Error::UnknownHandle(h));
    }
    if set.is_empty() {
        return Ok(mesh);
    }
    let (mut vertices, elements) = mesh.into_parts();
    let mut out = Vec::with_capacity(elements.len() + set.len());
    for (h, e) in elements.into_iter().enumerate() {
        if set.contains(h) {
            let (a, b) = bisect_simplex(&e, &mut vertices)?;
            observer.on_bisection(&e, &a, &b, &vertices);
            out.push(a);
            out.push(b);
        } else {
            out.push(e);
        }
    }
    Mesh::from_parts(vertices, out)
}
