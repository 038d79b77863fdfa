//! Multiclock logic monitoring, assume-guarantee contracts and a two-layer
//! pendulum controller running on separate clocks.
//!
//! * [`behaviors`]: recorded executions with synchronization maps.
//! * [`mcl`]: the logic's parser, printer and three-valued evaluator.
//! * [`predicates`]: the atomic predicate vocabulary.
//! * [`contracts`]: satisfaction, composition and refinement.
//! * [`plant`], [`controllers`]: pendulum, tracking law and MPC.
//! * [`executive`]: deterministic multiclock simulation.
//! * [`analysis`]: closed-form parameter constraints.
//! * [`cli`]: the `mclk` command-line front end.

pub mod analysis;
pub mod behaviors;
pub mod cli;
pub mod contracts;
pub mod controllers;
pub mod executive;
pub mod mcl;
pub mod plant;
pub mod predicates;
