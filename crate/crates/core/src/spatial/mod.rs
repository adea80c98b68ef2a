//! Directions, HRIR sets and the BTE microphone array.

mod direction;
mod geometry;
mod hrir;

pub use direction::{fibonacci_sphere, horizontal_grid, normalize_azimuth, Direction};
pub use geometry::{
    synth_free_field, synth_spherical_head, BteArrayGeometry, Microphone, Side,
    DEFAULT_EAR_AZIMUTH_DEG, DEFAULT_HEAD_RADIUS_M, DEFAULT_MIC_SPACING_M,
};
pub use hrir::{nearest_direction, HrirEntry, HrirManifest, HrirSet, BTE_CHANNEL_NAMES};
