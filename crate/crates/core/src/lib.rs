//! A finite-model laboratory for team semantics.

pub mod atoms;
pub mod cli;
pub mod lab;
pub mod model;
pub mod syntax;
pub mod tarski;
pub mod teamsem;
pub mod ucalc;
