//! Refinement orchestration: mark if needed, bisect the requested
//! elements, close hanging vertices, renumber.

use std::collections::BTreeSet;

use log::{debug, trace};

use crate::bisect::{bisect_simplices_observed, BisectionObserver, MaubachSimplex, TreeSimplex};
use crate::error::{Error, Result};
use crate::marking::mark_mesh;
use crate::mesh::{Element, GlobalEdge, Mesh, MultiId, Simplex, VertexTable};

/// Default cap on refine-to-conformity rounds.
pub const DEFAULT_MAX_CLOSURE_ROUNDS: usize = 1000;

/// A set of element handles (indices into the current element list).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefinementSet(BTreeSet<usize>);

impl RefinementSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every element of `mesh`.
    pub fn all(mesh: &Mesh) -> Self {
        (0..mesh.element_count()).collect()
    }

    pub fn insert(&mut self, handle: usize) -> bool {
        self.0.insert(handle)
    }

    pub fn contains(&self, handle: usize) -> bool {
        self.0.contains(&handle)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Handles in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for RefinementSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        RefinementSet(iter.into_iter().collect())
    }
}

/// Tuning knobs of [`local_refine_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefineOptions {
    pub max_closure_rounds: usize,
    /// Replace multi-ids by length-1 ids at the end. Skipped while the mesh
    /// still has hanging vertices, because a later bisection from the other
    /// side must be able to find the existing mid-vertex by its multi-id.
    pub renumber: bool,
    /// Run refine-to-conformity after bisecting the requested set. When
    /// off, only the requested elements are bisected.
    pub conform: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_closure_rounds: DEFAULT_MAX_CLOSURE_ROUNDS,
            renumber: true,
            conform: true,
        }
    }
}

/// Result of one local refinement with its bookkeeping.
#[derive(Clone, Debug)]
pub struct RefineOutcome {
    pub mesh: Mesh,
    /// Number of refine-to-conformity rounds that bisected something.
    pub closure_rounds: usize,
    /// Total bisections, requested plus closure.
    pub bisections: usize,
}

/// Marks `mesh` if it carries no marks yet, then refines `set` locally.
pub fn refine_mesh(mesh: Mesh, set: &RefinementSet) -> Result<Mesh> {
    let mesh = if mesh.elements().iter().any(Element::is_marked) {
        mesh
    } else {
        mark_mesh(mesh)?
    };
    local_refine(mesh, set)
}

/// Bisects `set`, refines to conformity and renumbers.
pub fn local_refine(mesh: Mesh, set: &RefinementSet) -> Result<Mesh> {
    Ok(local_refine_with(mesh, set, &RefineOptions::default(), &mut ())?.mesh)
}

pub fn local_refine_with(
    mesh: Mesh,
    set: &RefinementSet,
    options: &RefineOptions,
    observer: &mut dyn BisectionObserver,
) -> Result<RefineOutcome> {
    if let Some(h) = mesh.elements().iter().position(|e| !e.is_marked()) {
        return Err(Error::Unmarked(h));
    }
    let requested = set.len();
    let mesh = bisect_simplices_observed(mesh, set, observer)?;
    let (mesh, closure_rounds, closure) = if options.conform {
        close(mesh, options.max_closure_rounds, observer)?
    } else {
        (mesh, 0, 0)
    };
    debug!(
        "local refinement: {requested} requested + {closure} closure bisections in {closure_rounds} rounds"
    );
    let mesh = if options.renumber && (options.conform || get_non_conformal_simplices(&mesh).is_empty()) {
        renumber_mesh(mesh)?
    } else {
        mesh
    };
    Ok(RefineOutcome {
        mesh,
        closure_rounds,
        bisections: requested + closure,
    })
}

/// One uniform bisection pass: every element is bisected once and no
/// closure is run, so the element count doubles exactly. Starting from a
/// marked conformal mesh, the result after `n` passes is conformal and
/// reflected even when intermediate passes leave hanging vertices.
pub fn uniform_refine(mesh: Mesh) -> Result<Mesh> {
    uniform_refine_with(mesh, &mut ())
}

pub fn uniform_refine_with(mesh: Mesh, observer: &mut dyn BisectionObserver) -> Result<Mesh> {
    let options = RefineOptions {
        conform: false,
        ..RefineOptions::default()
    };
    let all = RefinementSet::all(&mesh);
    Ok(local_refine_with(mesh, &all, &options, observer)?.mesh)
}

/// Bisects elements with hanging vertices until there are none.
pub fn refine_to_conformity(mesh: Mesh) -> Result<Mesh> {
    Ok(close(mesh, DEFAULT_MAX_CLOSURE_ROUNDS, &mut ())?.0)
}

fn close(
    mut mesh: Mesh,
    max_rounds: usize,
    observer: &mut dyn BisectionObserver,
) -> Result<(Mesh, usize, usize)> {
    let mut bisections = 0;
    for round in 0..max_rounds {
        let hanging = get_non_conformal_simplices(&mesh);
        if hanging.is_empty() {
            return Ok((mesh, round, bisections));
        }
        trace!("closure round {round}: {} elements", hanging.len());
        bisections += hanging.len();
        mesh = bisect_simplices_observed(mesh, &hanging, observer)?;
    }
    if get_non_conformal_simplices(&mesh).is_empty() {
        return Ok((mesh, max_rounds, bisections));
    }
    Err(Error::ClosureDidNotTerminate(max_rounds))
}

/// Elements with an edge whose mid-vertex already exists in the mesh.
pub fn get_non_conformal_simplices(mesh: &Mesh) -> RefinementSet {
    let vt = mesh.vertices();
    mesh.simplices()
        .enumerate()
        .filter(|(_, s)| s.edges().iter().any(|e| vt.contains(&e.mid_vertex())))
        .map(|(h, _)| h)
        .collect()
}

/// Renames the `i`-th multi-id in ascending order to `[i]` everywhere.
/// Coordinates and vertex lineages are kept.
pub fn renumber_mesh(mesh: Mesh) -> Result<Mesh> {
    let (vt, elements) = mesh.into_parts();
    let sorted = vt.sorted_ids();
    let map: std::collections::HashMap<&MultiId, MultiId> = sorted
        .iter()
        .enumerate()
        .map(|(i, id)| (id, MultiId::single(i as u32)))
        .collect();
    let remap = |v: &MultiId| map.get(v).cloned().ok_or_else(|| Error::MissingVertex(v.clone()));
    let remap_simplex =
        |s: &Simplex| -> Result<Simplex> { Ok(Simplex::from_vec_unchecked(s.vertices().iter().map(remap).collect::<Result<_>>()?)) };

    let mut table = VertexTable::new(vt.dim());
    for id in &sorted {
        let rec = vt.get(id)?;
        table.insert_with_roots(remap(id)?, rec.coords.clone(), rec.roots.clone())?;
    }
    let elements = elements
        .into_iter()
        .map(|e| {
            Ok(match e {
                Element::Unmarked(s) => Element::Unmarked(remap_simplex(&s)?),
                Element::Tree(t) => Element::Tree(TreeSimplex {
                    simplex: remap_simplex(&t.simplex)?,
                    reflected: t.reflected.iter().map(remap).collect::<Result<_>>()?,
                    tree: t
                        .tree
                        .try_map_edges(&mut |e: &GlobalEdge| GlobalEdge::new(remap(e.a())?, remap(e.b())?))?,
                    level: t.level,
                }),
                Element::Maubach(m) => Element::Maubach(MaubachSimplex {
                    simplex: remap_simplex(&m.simplex)?,
                    ..m
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Mesh::from_parts(table, elements)
}
