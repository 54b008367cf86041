//! Exact branch-and-cut for the multi-agent rural postman problem with
//! temporal arc unavailability.
//!
//! The crate is `no_std` (with `alloc`) and contains only algorithms; file
//! formats, the CLI and wall-clock timing live in the `rpptu` crate.
//!
//! Pipeline: an [`Instance`](graph::Instance) is expanded into a layered,
//! cascaded [`ReplicatedGraph`](replicated::ReplicatedGraph); the
//! [`bnc`] driver solves LP relaxations of the spatial routing problem
//! ([`spatial`]) with the in-house simplex ([`lp`]), schedules integral
//! routes in time ([`temporal`]) and tightens relaxations with the cuts from
//! [`separation`]. [`polyhedra`] and [`oracle`] are verification tools.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bnc;
pub mod gen;
pub mod graph;
pub mod lp;
pub mod oracle;
pub mod polyhedra;
pub mod replicated;
pub mod separation;
pub mod spatial;
pub mod temporal;

mod reach;

pub use graph::{ArcId, Instance, InstanceError, RawInstance, Time, VertexId};
pub use replicated::ReplicatedGraph;
