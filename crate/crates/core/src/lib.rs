pub mod analyze;
pub mod embed;
pub mod export;
pub mod fixture;
pub mod error;
pub mod ingest;
pub mod knowledge;
pub mod mapper;
pub mod normalize;
pub mod pipeline;
pub mod run;

pub use error::{Error, Result};
