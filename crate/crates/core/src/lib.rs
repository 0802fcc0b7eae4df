//! Conformal marked bisection for local refinement of `n`-dimensional
//! simplicial meshes.
//!
//! A conformal mesh is first *marked*: every simplex receives a bisection
//! tree built from a mesh-wide strict total order of edges (longest first).
//! The first `n - 1` bisections of each element follow that tree, the
//! `n`-th one reorders the children into tagged simplices, and all later
//! bisections use Maubach's newest vertex bisection. Hanging vertices are
//! removed by refining to conformity.

pub mod bisect;
pub mod campaign;
pub mod criteria;
pub mod driver;
pub mod error;
pub mod io;
pub mod marking;
pub mod mesh;
pub mod meshgen;
pub mod quality;
pub mod verify;

pub use bisect::{bisect_simplex, bisect_simplices, BisectionObserver, MaubachSimplex, TreeSimplex};
pub use driver::{
    get_non_conformal_simplices, local_refine, local_refine_with, refine_mesh, refine_to_conformity,
    renumber_mesh, uniform_refine, RefineOptions, RefineOutcome, RefinementSet,
};
pub use campaign::{run_campaign, CampaignConfig, CampaignOutcome, Criterion};
pub use criteria::{select_by_curvature, select_by_hypersphere, select_random, Halfspace};
pub use error::{Error, Result};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use marking::{build_edge_order, mark_mesh, BisectionTree, EdgeOrder};
pub use mesh::{Element, GlobalEdge, Mesh, MultiId, Simplex, VertexTable};
pub use meshgen::{kuhn_mesh, random_simplex_mesh, regular_simplex_mesh, GridSpec};
pub use quality::{quality_stats, shape_quality, similarity_classes, simplex_volume, QualityReport};
pub use verify::{get_faces, is_mesh_conformal, is_reflected};
