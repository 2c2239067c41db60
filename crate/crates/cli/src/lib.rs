pub mod app;
pub mod format;

pub use app::{run, Exit, Outcome};
