//! Comparative topic analysis for collections of similarly structured
//! documents: per-section topic models, distances and clustering over topic
//! distributions, significance testing, term ranking, hybrid summaries and a
//! read-only HTTP API over an exported analysis bundle.

pub mod analysis;
pub mod corpus;
pub mod rng;
pub mod service;
pub mod summarize;
pub mod topics;
