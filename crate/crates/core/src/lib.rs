pub mod dataset;
pub mod experiment;
pub mod fcm;
pub mod inference;
pub mod membership;
pub mod metrics;
pub mod report;
pub mod rulegen;
pub mod sampling;
pub mod seed;
pub mod stats;
