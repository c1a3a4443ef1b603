pub mod effects;
pub mod error;
pub mod graph;
pub mod harness;
pub mod net;
pub mod separating;
pub mod tracker;

pub use effects::{CandidateSet, CutConfig};
pub use error::{Error, Result};
pub use graph::{shd, BucketOrdering, EdgeMark, GraphKind, MixedGraph};
pub use net::{kl, DiscreteNet, Factor, Intervention};
pub use separating::TargetFamily;
