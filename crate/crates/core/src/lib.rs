//! Exact algebraic entropy of endomorphisms of locally finite groups.
//!
//! The crate models concrete ambient groups (cyclic groups, `Q8`, direct
//! products, restricted direct sums, semidirect products with power or table
//! actions, subgroup views and quotients), their endomorphisms, and the
//! entropy of an endomorphism along a finite subgroup computed exactly from
//! trajectories or from the limit-free formula.

pub mod builders;
pub mod documents;
pub mod elem;
pub mod entropy;
pub mod error;
pub mod group;
pub mod laws;
pub mod morphism;
pub mod numtheory;
pub mod structure;
pub mod subgroup;
pub mod witness;

pub use elem::{Elem, ElementCode};
pub use error::{Error, Result};
pub use group::{Group, IndexSet, IwasawaParams};
pub use morphism::Endomorphism;
pub use subgroup::{FiniteSubgroup, ProductSet};
pub use witness::Witness;
