//! Multi-objective planning of employee commutes into a restricted zone.
//!
//! Employees either drive a carpool to a grey-zone entry, where electric or
//! hybrid shuttles collect them, or walk to a bus station. A five-array
//! genotype encodes such a plan; NSGA-II and an exact enumerator search the
//! trade-off between cost, dissatisfaction and emissions.

pub mod encoding;
mod error;
pub mod evaluator;
pub mod exact;
pub mod front_io;
pub mod instance;
pub mod moo;
pub mod nsga2;
pub mod sensitivity;

#[cfg(test)]
pub(crate) mod testing;

pub use encoding::{decode, encode, Genotype, Plan};
pub use error::{BindingResource, Error, Result};
pub use evaluator::{evaluate, ObjectiveVector};
pub use instance::{generate_instance, Instance, InstanceSpec};
pub use moo::ParetoFront;
