//! Simulation of annotator selection for pool-based active learning.
//!
//! Synthetic annotators with chronotype-driven moods and work-induced fatigue
//! label the instances an uncertainty-sampling learner queries. A
//! knowledge-based recommender picks the annotator for each query using what
//! it knows in each test mode, and the harness measures how many labels come
//! back correct and how the model fares.

pub mod behavior;
pub mod dataio;
pub mod error;
pub mod harness;
pub mod learner;
pub mod population;
pub mod rng;
pub mod selector;

pub use error::{Error, Result};
