//! Credibility inference for news articles, their creators and their
//! subjects.
//!
//! Text of every node is encoded by a hybrid feature unit (explicit word
//! counts plus a GRU summary), gated diffusive units exchange state across
//! the article/creator/subject graph, and per-category softmax heads are
//! trained jointly by full-batch gradient descent on a small reverse-mode
//! tape.

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod gdu;
pub mod gradcheck;
pub mod graph;
pub mod numgrad;
pub mod params;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
