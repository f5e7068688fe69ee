//! File formats, experiment harnesses and table output built on
//! `conjunction-core`.

pub mod error;
pub mod experiments;
pub mod kvn;
pub mod output;
pub mod samples;

pub use error::{ToolError, ToolResult};
