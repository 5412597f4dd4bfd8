//! Numerical laboratory for the Davie-Reeds Grothendieck game: Gaussian
//! special functions, exact Hermite calculus of one-dimensional sign
//! functions, game values and their semidefinite relaxations, randomized
//! searches over strip functions, and discretized finite instances.

// `!(x > 0.0)` is used deliberately so that NaN takes the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cli;
pub mod davie_reeds;
pub mod discretized;
pub mod error;
pub mod game;
pub mod numfmt;
pub mod search;
pub mod special;
pub mod strip;

pub use error::{Error, Result};
