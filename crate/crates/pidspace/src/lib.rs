//! File formats, batch commands and the HTTP service around
//! [`pidspace_core`].

pub mod error;
pub mod export;
pub mod parallel;
pub mod project;
pub mod schema;
pub mod service;
pub mod svg;

pub use error::{AppError, AppResult};
pub use project::{Overrides, Project, ProjectConfig, Reference};
