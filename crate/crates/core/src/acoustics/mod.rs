//! Image-source BRIR synthesis on top of an HRIR set, and binaural diffuse
//! noise.

mod bank;
mod brir;
mod diffuse;
mod image;
mod room;

pub use bank::{
    generate_poses, resolve_source_position, BankPlanItem, BrirBank, BrirBankEntry, BrirBankIndex,
    DistanceSpec,
};
pub use brir::{render_brir, Brir, BrirConfig};
pub use diffuse::{generate_diffuse_noise, DiffuseNoiseGenerator};
pub use image::{compute_image_sources, default_max_order, image_count, ImageSource};
pub use room::{
    t60_to_absorption, t60_to_absorption_eyring, AbsorptionModel, ArrayPose, Room, RoomSpec,
    MIN_WALL_CLEARANCE_M,
};
