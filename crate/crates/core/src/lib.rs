//! Profile-driven contextual query reformulation.
//!
//! A user's identification profile (static context) and the terms they
//! validated from earlier result titles (dynamic context) are kept as
//! attribute → value pairs. When the user types a query, pairs whose
//! attribute matches the last word offer their values as expansion terms.
//! Searches run twice, with and without the expansion, so the benefit can be
//! compared side by side and scored with a three-criterion protocol.

pub mod clock;
pub mod reformulate;
pub mod store;
pub mod text;
pub mod eval;
pub mod gateway;
pub mod config;
pub mod service;
pub mod cli;

use thiserror::Error;

/// Any failure of the library's composite operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Store(#[from] store::StoreError),
    #[error(transparent)]
    Search(#[from] gateway::SearchError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}
