//! Random-forest intrusion detector.

pub mod forest;
pub mod grid;
pub mod metrics;
pub mod tree;

pub use forest::{predict, train_random_forest, FeatureStrategy, ForestModel, ForestParams};
pub use grid::{grid_search, CvRow, GridSearchResult, GridSearchSpec};
pub use metrics::{evaluate, ClassifierMetrics, Confusion};
