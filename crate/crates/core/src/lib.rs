//! Congruence quotients, section dynamics and entropy invariants of
//! self-similar groups acting on regular rooted trees.

pub mod dynamics;
pub mod error;
pub mod group;
pub mod invariants;
pub mod perm;
pub mod tree;

pub use error::{Error, Result};
pub use group::{GroupSpec, Tower};
pub use invariants::{DisplayBase, LogQuantity};
pub use perm::{Perm, StabChain};
pub use tree::{Portrait, Vertex};
