use serde::{Deserialize, Serialize};

use super::image::{compute_image_sources, default_max_order};
use super::{ArrayPose, Room};
use crate::dsp::{add_fractionally_delayed, convolve, MultichannelAudio, FRACTIONAL_DELAY_TAPS};
use crate::spatial::{Direction, HrirSet};
use crate::{Error, Result, SPEED_OF_SOUND};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrirConfig {
    /// Reflection order; `None` uses [`default_max_order`].
    pub max_order: Option<usize>,
    pub speed_of_sound_m_s: f64,
}

impl Default for BrirConfig {
    fn default() -> Self {
        Self {
            max_order: None,
            speed_of_sound_m_s: SPEED_OF_SOUND,
        }
    }
}

/// A multichannel binaural room impulse response for one room, array pose and
/// source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Brir {
    pub ir: MultichannelAudio,
    pub source_azimuth_room_deg: f64,
    pub source_azimuth_head_deg: f64,
    pub source_distance_m: f64,
    pub room_id: String,
}

/// Renders a BRIR: every image source is mapped to the single nearest HRIR
/// direction (shared by all channels), scaled by
/// `amplitude * reference_distance / r` and placed at a fractional delay of
/// `r * fs / c`.
pub fn render_brir(
    room: &Room,
    source_m: [f64; 3],
    pose: &ArrayPose,
    hrirs: &HrirSet,
    config: &BrirConfig,
) -> Result<Brir> {
    pose.validate(room)?;
    if hrirs.is_empty() {
        return Err(Error::invalid("HRIR set is empty"));
    }
    let c = config.speed_of_sound_m_s;
    let fs = f64::from(hrirs.sample_rate_hz());
    let max_order = config
        .max_order
        .unwrap_or_else(|| default_max_order(room, c));
    let images = compute_image_sources(room, source_m, max_order)?;

    let head = pose.head_center_m;
    let rel = |p: [f64; 3]| [p[0] - head[0], p[1] - head[1], p[2] - head[2]];
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();

    let direct = rel(source_m);
    let distance = norm(direct);
    if distance == 0.0 {
        return Err(Error::invalid("source coincides with the head centre"));
    }

    let half = (FRACTIONAL_DELAY_TAPS / 2) as f64;
    let max_delay = images
        .iter()
        .filter(|i| i.amplitude > 0.0)
        .map(|i| norm(rel(i.position_m)) * fs / c)
        .fold(0.0_f64, f64::max);
    let echo_len = (max_delay + half).ceil() as usize + 1;
    let min_len = room.t60_s.map_or(0, |t| (t * fs).ceil() as usize);
    let out_len = (echo_len + hrirs.ir_length() - 1).max(min_len);

    // Sparse per-direction echograms, convolved with each direction's HRIRs once.
    let mut echograms: Vec<Option<Vec<f64>>> = vec![None; hrirs.len()];
    let reference = hrirs.reference_distance_m();
    for img in images.iter().filter(|i| i.amplitude > 0.0) {
        let v = rel(img.position_m);
        let r = norm(v);
        let dir = hrirs.nearest_to_vector(pose.to_head_frame(v));
        let buf = echograms[dir].get_or_insert_with(|| vec![0.0; echo_len]);
        add_fractionally_delayed(buf, &[1.0], r * fs / c, img.amplitude * reference / r);
    }

    let mut channels = vec![vec![0.0; out_len]; hrirs.n_channels()];
    for (dir, echo) in echograms.iter().enumerate() {
        let Some(echo) = echo else { continue };
        for (ch, out) in channels.iter_mut().enumerate() {
            let part = convolve(echo, hrirs.ir(dir, ch))?;
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
    }

    let head_dir = Direction::from_vector(pose.to_head_frame(direct));
    let room_dir = Direction::from_vector(direct);
    Ok(Brir {
        ir: MultichannelAudio::new(channels, hrirs.sample_rate_hz())?,
        source_azimuth_room_deg: room_dir.azimuth_deg,
        source_azimuth_head_deg: head_dir.azimuth_deg,
        source_distance_m: distance,
        room_id: room.id.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::{AbsorptionModel, RoomSpec};
    use crate::spatial::{
        horizontal_grid, synth_free_field, synth_spherical_head, BteArrayGeometry,
    };

    fn delta_hrirs() -> HrirSet {
        synth_free_field(&horizontal_grid(5.0), &[[0.0; 3]; 6], 0.0, 16, 16000).unwrap()
    }

    fn anechoic() -> Room {
        Room::anechoic("anechoic", [10.0, 10.0, 3.0])
    }

    fn pose() -> ArrayPose {
        ArrayPose {
            head_center_m: [5.0, 5.0, 1.5],
            yaw_deg: 0.0,
        }
    }

    fn peak_index(x: &[f64]) -> usize {
        (0..x.len())
            .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
            .unwrap()
    }

    #[test]
    fn anechoic_peak_at_propagation_delay() {
        let brir = render_brir(
            &anechoic(),
            [6.0, 5.0, 1.5],
            &pose(),
            &delta_hrirs(),
            &BrirConfig::default(),
        )
        .unwrap();
        // 16000 / 343 = 46.65 samples
        let expected = (16000.0 / 343.0_f64).round() as i64;
        for ch in brir.ir.channels() {
            assert!((peak_index(ch) as i64 - expected).abs() <= 1);
        }
        assert!((brir.source_distance_m - 1.0).abs() < 1e-12);
        assert!(brir.source_azimuth_head_deg.abs() < 1e-9);
    }

    #[test]
    fn anechoic_brir_is_scaled_hrir() {
        let hrirs = synth_spherical_head(
            &horizontal_grid(5.0),
            &BteArrayGeometry::default(),
            128,
            16000,
        )
        .unwrap();
        let brir = render_brir(
            &anechoic(),
            [6.0, 5.0, 1.5],
            &pose(),
            &hrirs,
            &BrirConfig::default(),
        )
        .unwrap();
        // Direct check against the az-0 HRIR delayed by the propagation time.
        let delay = 16000.0 / 343.0;
        for ch in 0..6 {
            let mut expected = vec![0.0; brir.ir.n_samples()];
            add_fractionally_delayed(&mut expected, hrirs.ir(0, ch), delay, 1.0);
            for (a, b) in brir.ir.channel(ch).iter().zip(&expected) {
                assert!((a - b).abs() < 1e-9);
            }
            let shift = peak_index(brir.ir.channel(ch)) as i64 - peak_index(hrirs.ir(0, ch)) as i64;
            assert!((shift - 47).abs() <= 1);
        }
    }

    #[test]
    fn doubling_distance_halves_amplitude() {
        let hrirs = delta_hrirs();
        let near = render_brir(
            &anechoic(),
            [6.0, 5.0, 1.5],
            &pose(),
            &hrirs,
            &BrirConfig::default(),
        )
        .unwrap();
        let far = render_brir(
            &anechoic(),
            [7.0, 5.0, 1.5],
            &pose(),
            &hrirs,
            &BrirConfig::default(),
        )
        .unwrap();
        // Peak height depends on the sub-sample offset; the L2 norm does not.
        for ch in 0..6 {
            let en: f64 = near.ir.channel(ch).iter().map(|x| x * x).sum();
            let ef: f64 = far.ir.channel(ch).iter().map(|x| x * x).sum();
            assert!(
                ((ef / en).sqrt() - 0.5).abs() < 0.005,
                "{}",
                (ef / en).sqrt()
            );
        }
    }

    #[test]
    fn rendering_is_linear_in_hrir_gain() {
        let hrirs = synth_spherical_head(
            &horizontal_grid(10.0),
            &BteArrayGeometry::default(),
            96,
            16000,
        )
        .unwrap();
        let room = Room::with_absorption("r", [4.0, 3.0, 2.5], 0.6).unwrap();
        let p = ArrayPose {
            head_center_m: [2.0, 1.5, 1.2],
            yaw_deg: 30.0,
        };
        let cfg = BrirConfig {
            max_order: Some(4),
            ..BrirConfig::default()
        };
        let base = render_brir(&room, [3.0, 2.0, 1.2], &p, &hrirs, &cfg).unwrap();
        let doubled = render_brir(&room, [3.0, 2.0, 1.2], &p, &hrirs.scaled(2.0), &cfg).unwrap();
        for (a, b) in base
            .ir
            .channels()
            .iter()
            .flatten()
            .zip(doubled.ir.channels().iter().flatten())
        {
            assert_eq!(2.0 * a, *b);
        }
        let g = 0.37;
        let scaled = render_brir(&room, [3.0, 2.0, 1.2], &p, &hrirs.scaled(g), &cfg).unwrap();
        for (a, b) in base
            .ir
            .channels()
            .iter()
            .flatten()
            .zip(scaled.ir.channels().iter().flatten())
        {
            assert!((g * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotating_pose_and_source_together_is_invariant() {
        let hrirs = synth_spherical_head(
            &horizontal_grid(5.0),
            &BteArrayGeometry::default(),
            128,
            16000,
        )
        .unwrap();
        let room = anechoic();
        let head = pose().head_center_m;
        let render = |yaw: f64, az: f64| {
            let a = az.to_radians();
            let src = [head[0] + 1.5 * a.cos(), head[1] + 1.5 * a.sin(), head[2]];
            let p = ArrayPose {
                head_center_m: head,
                yaw_deg: yaw,
            };
            render_brir(&room, src, &p, &hrirs, &BrirConfig::default()).unwrap()
        };
        let a = render(0.0, 40.0);
        let b = render(25.0, 65.0);
        assert!((a.source_azimuth_head_deg - b.source_azimuth_head_deg).abs() < 1e-9);
        for (x, y) in
            a.ir.channels()
                .iter()
                .flatten()
                .zip(b.ir.channels().iter().flatten())
        {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_falls_as_absorption_rises() {
        let hrirs = delta_hrirs();
        let p = ArrayPose {
            head_center_m: [2.0, 1.5, 1.2],
            yaw_deg: 0.0,
        };
        let cfg = BrirConfig {
            max_order: Some(10),
            ..BrirConfig::default()
        };
        let energies: Vec<f64> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&alpha| {
                let room = Room::with_absorption("r", [5.0, 4.0, 2.5], alpha).unwrap();
                let b = render_brir(&room, [3.5, 2.5, 1.2], &p, &hrirs, &cfg).unwrap();
                crate::dsp::energy(&b.ir)
            })
            .collect();
        assert!(
            energies[0] > energies[1] && energies[1] > energies[2],
            "{energies:?}"
        );
    }

    #[test]
    fn length_covers_t60() {
        let spec = RoomSpec::new("R14", [5.0, 4.0, 2.5], 0.2);
        let room = Room::from_spec(&spec, AbsorptionModel::Eyring).unwrap();
        let p = ArrayPose {
            head_center_m: [2.0, 1.5, 1.2],
            yaw_deg: 0.0,
        };
        let cfg = BrirConfig {
            max_order: Some(3),
            ..BrirConfig::default()
        };
        let b = render_brir(&room, [3.0, 2.0, 1.2], &p, &delta_hrirs(), &cfg).unwrap();
        assert!(b.ir.n_samples() >= 3200);
    }
}
