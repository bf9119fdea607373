pub mod agreement;
pub mod artifact;
pub mod balance;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod seed;
pub mod synthetic;
pub mod text;
pub mod topics;

pub use error::{Error, Result};
