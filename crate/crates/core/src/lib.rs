pub mod asymptotics;
pub mod cli;
pub mod corpus;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod gramian;
pub mod integrate;
pub mod limitk;
pub mod linalg;
pub mod model;
pub mod selftest;

pub use error::{Error, Result};
