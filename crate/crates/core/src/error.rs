use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node id {id} out of range for {num_nodes} nodes")]
    OutOfRangeId { id: usize, num_nodes: usize },
    #[error("index {index} out of range (length {len})")]
    OutOfRangeIndex { index: usize, len: usize },
    #[error("hyperedge {index} has cardinality {cardinality}, need at least 2")]
    EdgeTooSmall { index: usize, cardinality: usize },
    #[error("permutation is not a bijection on the node ids")]
    NotABijection,
    #[error("attack order is not a permutation of the node ids")]
    InvalidOrder,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("no connected hypergraph after {attempts} attempts")]
    DisconnectedRetryExceeded { attempts: usize },
    #[error("iteration {iter} out of range ({available} recorded)")]
    OutOfRangeIteration { iter: usize, available: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("malformed model document: {0}")]
    Parse(String),
}
