pub mod checker;
pub mod cli;
mod error;
pub mod expand;
pub mod frontend;
pub mod ground;
pub mod logic;
pub mod ltl;
pub mod model;
pub mod pipeline;
pub mod smv;

pub use error::Error;
