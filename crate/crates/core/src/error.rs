use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("point has a non-finite coordinate: {0:?}")]
    NonFinite(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} is only supported for p = 2 (got p = {p})")]
    UnsupportedDimension { what: &'static str, p: usize },
    #[error("directional normals admit no strictly positive combination summing to zero")]
    NormalsNotPositivelySpanning,
    #[error("box basis is not orthonormal")]
    BasisNotOrthonormal,
    #[error("intersection operands must use the identity warp")]
    WarpedIntersection,
    #[error("warp map is invalid: {0}")]
    InvalidWarp(String),
    #[error("hull kinds differ")]
    KindMismatch,
    #[error("point {0:?} lies outside the hull")]
    OutsideHull(Vec<f64>),
    #[error("point {0:?} is not a member of the hull's source set")]
    NotInSource(Vec<f64>),
    #[error("node set is empty")]
    EmptyNodeSet,
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("invalid arc ((k={from}, j={delay}), l={to}) for n = {n}, h = {h}")]
    InvalidArc {
        from: usize,
        delay: usize,
        to: usize,
        n: usize,
        h: usize,
    },
    #[error("graph shape (n = {n}, h = {h}) does not match expected (n = {expected_n}, h = {expected_h})")]
    GraphShape {
        n: usize,
        h: usize,
        expected_n: usize,
        expected_h: usize,
    },
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(usize, usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("node groups overlap or are empty")]
    InvalidGroups,
    #[error("state is a singleton; diagnostic undefined")]
    SingletonState,
    #[error("trace has {len} states but at least {needed} are required")]
    TraceTooShort { len: usize, needed: usize },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
