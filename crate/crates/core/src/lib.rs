//! Irreducibility of a predictor set with respect to a target, measured
//! with partial-information-decomposition union information.

pub mod corpus;
pub mod distribution;
pub mod error;
pub mod info_order;
pub mod irreducibility;
pub mod parts;
pub mod union_info;

pub use distribution::{JointDistribution, VariableSelector};
pub use error::{Error, Result};
pub use irreducibility::{full_report, IrreducibilityReport};
pub use parts::{PartFamily, PartSpec, PartitionSpec};
pub use union_info::{LabeledPart, MeasureKind, UnionMeasure, UnionSettings};
