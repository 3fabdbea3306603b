//! Numerical verification of identities between Chern–Simons forms on SU(n)
//! and their transgressions to loop groups.
//!
//! Forms are evaluators on tuples of group elements or discretized loops in
//! left trivialization. Identities are checked by evaluating both sides at
//! random configurations and reporting a scale-aware relative residual.

pub mod forms;
pub mod geometry;
pub mod lie;
pub mod loops;
pub mod seed;
pub mod spectral;
pub mod suite;

pub use forms::{Arity, FdConfig, Form, FormError, GroupForm, GroupMap, LoopForm, VecForm};
pub use lie::{AlgebraVector, GroupPoint, InnerProduct, LieError};
pub use loops::{Cylinder, DiscreteLoop, DiscretePath, LoopError, TangentField};
