//! Scene graph generation over heterogeneous and dual graphs with
//! relation-type-aware message passing.

pub mod autodiff;
pub mod baseline;
pub mod commands;
pub mod data;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod graph;
pub mod inference;
pub mod message_passing;
pub mod model;
pub mod ontology;
pub mod params;
pub mod scene;
pub mod training;

pub use error::{Error, Result};
