//! File formats, reports and the command-line front end for `tubal-core`.

pub mod args;
pub mod cli;
pub mod io;
pub mod report;

pub use io::{load_image_stack, load_mask, load_tensor, save_image_stack, save_mask, save_tensor, IoError};
pub use report::{RunManifest, RunReport};
