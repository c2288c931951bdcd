//! Exact analysis of weighted MDPs: stochastic shortest paths, conditional value-at-risk,
//! weighted long-run frequency and the hardness gadgets relating them.

pub mod cvar;
pub mod error;
pub mod gadget;
pub mod graph;
pub mod longrun;
pub mod matrix;
pub mod mdp;
pub mod oracle;
pub mod rat;
pub mod sspp;

pub use error::{Error, Result};
pub use mdp::{Mdp, MdpBuilder};
pub use rat::Rat;
