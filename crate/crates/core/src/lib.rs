//! Geometric quantisation on explicit local models: holonomy of circle
//! actions, the Kostant complex operators, Bohr-Sommerfeld enumeration and
//! dimension counting.

pub mod bohr_sommerfeld;
pub mod circle_action;
pub mod cli_io;
pub mod error;
pub mod forms;
pub mod models;
pub mod numerics;
pub mod polytope;
pub mod quantisation;

pub use error::{Error, Result};
