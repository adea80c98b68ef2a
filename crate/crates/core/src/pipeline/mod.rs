//! Configuration and the batch commands behind the command-line tool.

mod commands;
mod config;
mod lock;

pub use commands::{
    build_brirs, encode_dataset, eval_dataset, gen_dataset, plan_bank, report, write_features,
    BankSummary, Estimator, FeatureIndex, FeatureIndexEntry, FEATURE_INDEX_FILE,
};
pub use config::{
    standard_rooms, BankConfig, CorpusSource, EvalConfig, HrirSource, Paths, PipelineConfig,
};
pub use lock::DirLock;
