//! Leaderless multi-agent consensus under bounded communication delays.
//!
//! Agents in `R^p` update by choosing a point in the relative interior of
//! a hull (`sigma`) of the positions they receive, possibly delayed. The
//! hull of all current and delayed positions is a set-valued Lyapunov
//! function; this crate simulates the dynamics and checks its decrease
//! properties on concrete traces.

pub mod assumptions;
pub mod error;
pub mod dynamics;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod lyapunov;
pub mod scenarios;
pub mod sigma;

pub use error::{Error, Result};
