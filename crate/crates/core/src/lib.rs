//! Transfer matrices, connecting operators and finitely checkable gluing
//! certificates for two-dimensional shifts of finite type given by 2×2 windows.
//!
//! Indices at the API boundary are 1-based, as produced by [`psi`]; storage is 0-based.

pub mod basic_set;
pub mod catalog;
pub mod certify;
pub mod connect;
pub mod edge;
pub mod error;
pub mod holefill;
pub mod matrix;
pub mod oracle;
pub mod primitivity;
pub mod structure;
pub mod transfer;

pub use basic_set::{pattern_coords, psi, unpsi, BasicSet, BasicSetDoc, Mode, Symbol, VertexPattern};
pub use error::{Error, Result};
pub use matrix::{power_with_saturation, BoolMatrix, CountMatrix};
pub use transfer::{build_transition, elementary_pattern, verify_reduction, BlockPath, Direction};
pub use connect::{build_connecting, connector_entry_pattern, verify_connect_reduction, ConnectorFamily, ConnectorKind};
