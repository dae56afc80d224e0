//! Hoeffding tree (VFDT): an incremental decision tree for the binary
//! recommendation label.
//!
//! Each leaf keeps class counts and, per attribute, a (branch × class)
//! contingency table. Every `grace` records a leaf compares the information
//! gain of its two best attributes; it splits on the best one when the gain
//! advantage exceeds the Hoeffding bound ε(R, δ, n), or when ε has shrunk
//! below the tie threshold τ. Attributes are nominal (ratings) or binned
//! numeric (sentiment), each with an explicit absent branch, so a split
//! creates one child per branch.

mod attribute;
mod gain;
mod model_file;
mod tree;

pub use attribute::{AttributeKind, AttributeSpec};
pub use gain::{entropy, hoeffding_bound, info_gain};
pub use model_file::{load, save, MODEL_VERSION};
pub use tree::{
    Class, HoeffdingTree, LeafStats, Node, NodeId, Prediction, SplitRecord, TrainOutcome,
    TreeParams,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid attribute: {0}")]
    InvalidAttribute(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("value {value} is not in the domain of attribute `{attribute}`")]
    UnknownValue { attribute: String, value: f64 },
    #[error("expected {expected} feature values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("training record has no label")]
    LabelAbsent,
    #[error("model file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("model file i/o: {0}")]
    Io(String),
}
