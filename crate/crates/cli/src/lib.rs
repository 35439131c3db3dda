//! Experiment driver: start from the first `t` documents of a collection,
//! append the rest in groups of `p` under each configured policy, and record
//! mean average precision and cumulative update time after every group.

mod config;
mod experiment;
mod output;

pub use config::{DataSource, ExperimentConfig, PolicySpec, Preset};
pub use experiment::{
    load_collection, run_experiment, Collection, ExperimentOutput, PolicyStep, StepRecord,
    CUTOFFS, DENSE_INITIAL_LIMIT,
};
pub use output::{emit_csv, emit_plot_data, CsvWriter, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] lsi_update::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
