//! Explaining and predicting traveler satisfaction from airline reviews.
//!
//! - [`review`]: the four Skytrax review categories, CSV ingestion, statistics.
//! - [`stats`]: Pearson correlation matrices with p-values.
//! - [`sentiment`]: lexicon sentiment scoring and a cached remote client.
//! - [`hoeffding`]: an incremental Hoeffding (VFDT) decision tree.
//! - [`cluster`]: suffix tree clustering of review texts.
//! - [`eval`]: chronological train/test experiments with F1 and AUC.

pub mod review;
pub mod stats;
pub mod sentiment;
pub mod hoeffding;
pub mod cluster;
pub mod eval;
