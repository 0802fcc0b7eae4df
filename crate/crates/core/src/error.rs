use thiserror::Error;

use crate::mesh::{GlobalEdge, MultiId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building, refining, checking or
/// serializing a mesh.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate edge: both endpoints are {0}")]
    DegenerateEdge(MultiId),

    #[error("vertex {0} is not in the vertex table")]
    MissingVertex(MultiId),

    #[error("vertex {0} is not a vertex of the simplex")]
    VertexNotInSimplex(MultiId),

    #[error("expected an original vertex (multi-id of length one), found {0}")]
    NotOriginalVertex(MultiId),

    #[error("edge {0} has no rank in the edge order")]
    UnrankedEdge(GlobalEdge),

    #[error("mesh has no elements")]
    EmptyMesh,

    #[error("mesh is already marked")]
    AlreadyMarked,

    #[error("element {0} is not marked")]
    Unmarked(usize),

    #[error("inconsistent mark: {0}")]
    MalformedMark(String),

    #[error("element handle {0} is not in the mesh")]
    UnknownHandle(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("closure did not terminate after {0} rounds")]
    ClosureDidNotTerminate(usize),

    #[error("A face cannot be shared by more than two simplices. Face {face} is shared by {count}.")]
    OverSharedFace { face: String, count: usize },

    #[error("multi-id {0} was derived from two edges with different midpoints")]
    MultiIdCollision(MultiId),

    #[error("potential is singular at {0:?}")]
    SingularPotential(Vec<f64>),

    #[error("no simplex with quality >= {min_quality} after {attempts} draws")]
    TooManyRejections { min_quality: f64, attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
