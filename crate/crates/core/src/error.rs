use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),
    #[error("vertex {vertex} out of range 1..={vertex_count}")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("empty vertex sequence")]
    EmptyCycle,
    #[error("sequence is a {repetitions}-fold repetition of a shorter cycle")]
    NotPrimitive { repetitions: usize },
    #[error("missing edge {from}->{to}")]
    MissingEdge { from: usize, to: usize },
    #[error("invalid spanning tree: {0}")]
    InvalidTree(String),
    #[error("no chord value for edge {from}->{to}")]
    MissingChordValue { from: usize, to: usize },
    #[error("no weight for edge {from}->{to}")]
    MissingEdgeWeight { from: usize, to: usize },
    #[error("missing observable value for edge index {0}")]
    MissingEdgeValue(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("matrix support is not primitive (period {period}, irreducible: {irreducible})")]
    ImprimitiveMatrix { period: usize, irreducible: bool },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("direction lies outside the interior of the direction set ({0})")]
    OutsideCone(String),
    #[error("pressure is not strictly convex: class observable is degenerate")]
    DegenerateModel,
    #[error("singular Hessian")]
    SingularHessian,
    #[error("model has no meridian coordinates")]
    NoMeridians,
    #[error("enumeration needs symbolic period {needed}, above the cap {cap}")]
    BudgetExceeded { needed: usize, cap: usize },
    #[error("exact trace counting needs every roof equal to 1")]
    RoofNotUnit,
    #[error("no cycle satisfies the query")]
    EmptySelection,
    #[error("quotient is not finite: {0}")]
    InfiniteQuotient(String),
    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
}
