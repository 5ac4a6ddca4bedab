// Errors carry exact rationals; boxing them buys nothing on cold paths.
#![allow(clippy::result_large_err)]

pub mod cli;
pub mod market;
pub mod purecircuit;
pub mod reduction;
pub mod solver;
pub mod rational;

pub use rational::{q, Rational};
