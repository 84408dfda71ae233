//! Inverse travel time problems on graphs: given the pairwise distances
//! between a set of boundary vertices, find a graph on n vertices realizing
//! them. This crate provides:
//!
//! * the classical side: adjacency vectors, layered path tables, the
//!   distance test, and brute-force enumeration oracles ([`graph`]);
//! * a quantum-circuit search for the problem: a statevector simulator with
//!   a fast basis mode ([`statevector`]), compilation of the reversible
//!   distance-checking oracle and the diffusion operator ([`circuits`]),
//!   and the amplitude-amplification driver with the iteration schedule for
//!   an unknown number of solutions ([`grover`]);
//! * a boundary-rigidity toolkit for trees: reconstruction from leaf
//!   distances and exhaustive rigidity verification ([`rigidity`]);
//! * the NP-completeness side: the restricted problem, the CNF gadget
//!   reduction with witness maps in both directions, and the
//!   decision-to-search wrapper ([`reduction`]).
//!
//! Heavy sweeps are data-parallel via rayon behind the default `parallel`
//! feature; [`exec::ExecMode`] selects the strategy at run time and both
//! paths produce identical results.

pub mod circuits;
pub mod exec;
pub mod graph;
pub mod grover;
pub mod reduction;
pub mod rigidity;
pub mod statevector;

pub use exec::ExecMode;
