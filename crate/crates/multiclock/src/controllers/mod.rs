//! The two control layers and their numerical building blocks.

pub mod estimate;
pub mod fbl;
pub mod mpc;
pub mod qp;
pub mod trajectory;

pub use estimate::Estimator;
pub use fbl::{fbl_control, Envelope, FblGains};
pub use mpc::{Mpc, MpcConfig, MpcError, MpcSolution};
pub use trajectory::Trajectory;
