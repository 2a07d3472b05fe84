//! Exact simulation and analysis of non-uniform cellular automata.
//!
//! A non-uniform automaton assigns each lattice cell its own local rule from
//! a finite set. This crate evolves such systems exactly on finite windows,
//! using dependency cones to decide which initial states matter, and ships
//! the three-state odometer, its planar spiral embedding and a
//! shift/toggle example together with verifiers for their properties.

pub mod cli;
pub mod dynamics;
pub mod engine;
pub mod lattice;
pub mod odometer;
pub mod rules;
pub mod spiral;
