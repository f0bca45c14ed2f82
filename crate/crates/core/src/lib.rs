//! Journal citation environments: edition deduplication, citation matrices,
//! factor analysis, cosine-similarity networks and their layout and export.

pub mod cli;
pub mod config;
pub mod dedup;
pub mod environment;
pub mod export;
pub mod factor;
pub mod fixtures;
pub mod ingest;
pub mod layout;
pub mod linalg;
pub mod network;
