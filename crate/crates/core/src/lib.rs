//! Colored-timed Petri net model of a flexible manufacturing system with
//! AGV transport and shared tools, together with an instance generator,
//! scheduling solvers and benchmark tooling.

pub mod bench;
pub mod cli;
pub mod env;
pub mod fms;
pub mod instance;
pub mod petri;
pub mod solvers;
