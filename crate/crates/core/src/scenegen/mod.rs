//! Labelled multi-source dataset synthesis.

mod activity;
mod corpus;
mod dataset;
mod labels;
mod render;

pub use activity::{
    sample_activity, sample_activity_with, ActivityInterval, ActivityParams, ActivityTimeline,
};
pub use corpus::SpeechCorpus;
pub use dataset::{
    build_dataset, dataset_config_hash, DatasetManifest, Derivation, GenerationConfig,
    SegmentRecord, SnrLevel, SnrSpec, DATASET_FORMAT, MANIFEST_FILE,
};
pub use labels::{azimuth_class, read_labels, write_labels, DoaLabelGrid, LabelSidecar, N_CLASSES};
pub use render::{render_segment, SegmentConfig};
