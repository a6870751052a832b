//! HTTP service, task store and command line for the gavis pipeline.

pub mod api;
pub mod cli;
pub mod compile;
pub mod record;
pub mod runner;
pub mod store;

pub use api::{router, AppState};
pub use record::{TaskRecord, TaskStatus};
pub use store::TaskStore;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/service.md")]
mod book {}
