//! Workbench for LTL objectives in reinforcement learning.
//!
//! Formulas, their automata and hierarchy classification, exact model
//! checking on MDPs, the reward-scheme reductions and tabular learners used
//! to study them, and the LTL-PAC experiment harness.

pub mod automata;
pub mod error;
pub mod family;
pub mod graph;
pub mod harness;
pub mod learn;
pub mod ltl;
pub mod mdp;
pub mod probcheck;
pub mod schemes;
pub mod witness;

pub use error::{Error, Result};
