use std::path::PathBuf;

use thiserror::Error;

use crate::navgraph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: node {0} unreachable from node 0")]
    DisconnectedGraph(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("node id out of range: {0}")]
    BadIdRange(String),
    #[error("feature dimension mismatch at node {node}: expected {expected}, got {got}")]
    FeatureDim { node: NodeId, expected: usize, got: usize },
    #[error("edge {0}-{1} length does not match endpoint positions")]
    BadEdgeLength(NodeId, NodeId),
    #[error("nodes {0} and {1} share a position")]
    CoincidentPositions(NodeId, NodeId),
    #[error("empty graph")]
    EmptyGraph,

    #[error("unsatisfiable world config: {0}")]
    UnsatisfiableConfig(String),
    #[error("no connected instance after {0} retries")]
    ConnectivityRetriesExhausted(usize),

    #[error("node {candidate} is not a neighbor of {origin}")]
    NotANeighbor { origin: NodeId, candidate: NodeId },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("graph has {nodes} nodes, above the recursion cap of {cap}")]
    GraphTooLarge { nodes: usize, cap: usize },
    #[error("operation requires a shortest-path rollout mode")]
    ShortestModeRequired,
    #[error("invalid oracle config: {0}")]
    InvalidConfig(String),
    #[error("sampling retries exhausted after {0} attempts")]
    RetriesExhausted(usize),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite loss at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("empty dataset")]
    EmptyDataset,

    #[error("frontier is empty")]
    EmptyFrontier,
    #[error("node {0} is not on the frontier")]
    UnknownFrontier(NodeId),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Schema { path: path.into(), message: message.to_string() }
    }
}
