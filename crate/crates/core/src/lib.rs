//! Corpus analytics for comparing scary stories with baseline stories.
//!
//! - [`corpus`]: ingestion, cleaning, length filtering, posting-time statistics
//! - [`lexicon`]: the SSToP odds-ratio lexicon
//! - [`embed`]: embedding tables, the human reference vector, distance profiles
//! - [`fear`]: labeled sentences and the logistic fear classifier
//! - [`modes`]: decile profiles and their SVD story-mode decomposition
//! - [`topics`]: Porter stemming, collapsed-Gibbs LDA, topic and disease trends

pub mod corpus;
pub mod embed;
pub mod error;
pub mod fear;
pub mod format;
pub mod lexicon;
pub mod metrics;
pub mod modes;
pub mod topics;

pub use error::{Error, Result};
