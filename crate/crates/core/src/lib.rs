//! Validation-curve forecasting and benchmark distillation for tabular
//! learning experiments.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`data`] loads datasets, validation-curve corpora and result tables.
//! * [`metafeatures`] turns a dataset into the fixed-width descriptor used as
//!   predictor input.
//! * [`curves`] holds the four-term curve law, the power-law baselines and
//!   their fitting routines.
//! * [`predictor`] learns the mapping from (meta-features, first epochs) to
//!   curve parameters, and scores predictions.
//! * [`distill`] ranks methods over datasets and picks small benchmark subsets.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise. Results never
//! depend on the number of threads.

pub mod curves;
pub mod data;
pub mod distill;
pub mod error;
pub mod metafeatures;
pub mod par;
pub mod predictor;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};

/// Tasks a dataset can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskType {
    Binclass,
    Multiclass,
    Regression,
}

impl TaskType {
    pub fn is_classification(self) -> bool {
        !matches!(self, TaskType::Regression)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::Binclass => "binclass",
            TaskType::Multiclass => "multiclass",
            TaskType::Regression => "regression",
        }
    }
}

impl std::str::FromStr for TaskType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "binclass" => Ok(TaskType::Binclass),
            "multiclass" => Ok(TaskType::Multiclass),
            "regression" => Ok(TaskType::Regression),
            other => Err(Error::invalid(format!("unknown task type `{other}`"))),
        }
    }
}

impl std::fmt::Display for TaskType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
