//! Query-by-humming over onset times: WAV input, the JSON song database,
//! detection power analysis and the `hum` command line.

pub mod cli;
pub mod export;
pub mod pipeline;
pub mod power;
pub mod store;
pub mod wav;
