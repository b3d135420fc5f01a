//! Simulation of analog networks built from constants, adders, multipliers,
//! integrators and continuous-limit modules, over real and function-valued
//! streams.

pub mod constructions;
pub mod dsl;
pub mod formula;
pub mod frechet;
pub mod limits;
pub mod network;
pub mod simulator;
