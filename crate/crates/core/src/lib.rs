//! Certified upper bounds on the optimal fidelity of pure-state estimation.

pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod problems;
pub mod sdp;
pub mod seesaw;

pub use error::{Error, Result};
