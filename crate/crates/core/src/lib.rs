//! Range and Roots global constraints.
//!
//! The crate is a small constraint solver built around two set-based global
//! constraints:
//!
//! * `Range(X, S, T)`: `T = { X_i | i ∈ S }`
//! * `Roots(X, S, T)`: `S = { i | X_i ∈ T }`
//!
//! Range is propagated with a flow-based algorithm ([`range`]), Roots with a
//! decomposition into implications ([`roots`]). Most counting and occurrence
//! constraints can be written with these two plus a handful of set
//! primitives; [`catalog`] holds those decompositions. [`oracle`] checks every
//! consistency claim by brute-force enumeration and [`harness`] reruns the
//! random-instance experiments.

pub mod arith;
pub mod catalog;
pub mod domain;
pub mod engine;
pub mod flow;
pub mod harness;
pub mod oracle;
pub mod par;
pub mod range;
pub mod roots;
pub mod search;
pub mod sets;
pub mod store;

pub use domain::{IntDomain, SetBounds, Value, ValueSet};
pub use engine::{Model, PropId, Propagator};
pub use store::{Event, Inconsistency, IntVar, Level, Outcome, SetVar, Store};
