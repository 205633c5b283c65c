//! Scene ingestion, co-occurrence statistics, synthetic data and checkpoints.

pub mod checkpoint;
pub mod scenes;
pub mod stats;
pub mod synthetic;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, Checkpoint, OptimizerState};
pub use scenes::{load_predictions, load_scenes, save_predictions, save_scenes, truncate_objects};
pub use stats::{build_cooccurrence_stats, CooccurrenceStats};
pub use synthetic::{generate_synthetic_dataset, synthetic_ontology, RuleRow, SyntheticConfig};
