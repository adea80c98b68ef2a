use serde::{Deserialize, Serialize};

use super::Room;
use crate::{Error, Result};

/// Upper bound on the reflection order regardless of reverberation time.
const MAX_ORDER_CAP: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSource {
    pub position_m: [f64; 3],
    /// Product of the reflection coefficients along the path.
    pub amplitude: f64,
    pub order: usize,
}

/// Coordinate of the image with signed reflection index `i` along one axis of
/// length `len`, for a source at `s`. Odd indices are mirrored copies.
fn axis_image(i: i64, len: f64, s: f64) -> f64 {
    if i % 2 == 0 {
        i as f64 * len + s
    } else {
        (i + 1) as f64 * len - s
    }
}

/// Number of images with total reflection order `<= order` in a shoebox:
/// lattice points of the L1 ball in Z^3.
pub fn image_count(order: usize) -> usize {
    let o = order;
    (2 * o + 1) * (2 * o * o + 2 * o + 3) / 3
}

/// Reflection order reaching the T60 horizon: `ceil(c T60 / min(dims)) + 1`,
/// capped at 40. Anechoic rooms need order 0 only.
pub fn default_max_order(room: &Room, speed_of_sound: f64) -> usize {
    if room.absorption >= 1.0 {
        return 0;
    }
    let min_dim = room
        .dimensions_m
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let t60 = room.t60_s.unwrap_or_else(|| {
        let [x, y, z] = room.dimensions_m;
        let v = x * y * z;
        let s = 2.0 * (x * y + x * z + y * z);
        0.161 * v / (-s * (1.0 - room.absorption).ln())
    });
    let order = (speed_of_sound * t60 / min_dim).ceil() as usize + 1;
    order.min(MAX_ORDER_CAP)
}

/// All mirror images of `source` with total reflection order `<= max_order`,
/// ordered by reflection index. Each bounce multiplies the amplitude by the
/// room's reflection coefficient `sqrt(1 - alpha)`.
pub fn compute_image_sources(
    room: &Room,
    source: [f64; 3],
    max_order: usize,
) -> Result<Vec<ImageSource>> {
    if !room.contains(source, 0.0) {
        return Err(Error::OutsideRoom(source));
    }
    let beta = room.reflection_coefficient();
    let o = max_order as i64;
    let [lx, ly, lz] = room.dimensions_m;
    let mut images = Vec::with_capacity(image_count(max_order));
    for i in -o..=o {
        let ri = o - i.abs();
        let x = axis_image(i, lx, source[0]);
        for j in -ri..=ri {
            let rj = ri - j.abs();
            let y = axis_image(j, ly, source[1]);
            for k in -rj..=rj {
                let order = (i.abs() + j.abs() + k.abs()) as usize;
                images.push(ImageSource {
                    position_m: [x, y, axis_image(k, lz, source[2])],
                    amplitude: beta.powi(order as i32),
                    order,
                });
            }
        }
    }
    Ok(images)
}
