use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::direction::normalize_azimuth;
use super::{Direction, HrirSet, BTE_CHANNEL_NAMES};
use crate::dsp::{add_fractionally_delayed, FRACTIONAL_DELAY_TAPS};
use crate::{Error, Result, SPEED_OF_SOUND};

pub const DEFAULT_HEAD_RADIUS_M: f64 = 0.0875;
pub const DEFAULT_EAR_AZIMUTH_DEG: f64 = 100.0;
pub const DEFAULT_MIC_SPACING_M: f64 = 0.0076;

const IPSILATERAL_CUTOFF_HZ: f64 = 8000.0;
const CONTRALATERAL_CUTOFF_HZ: f64 = 1500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One microphone on the head surface. `lateral_azimuth_deg` is measured on
/// the microphone's own side: the physical azimuth is `+lateral` on the left
/// and `-lateral` on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Microphone {
    pub name: String,
    pub side: Side,
    pub lateral_azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Microphone {
    pub fn direction(&self) -> Direction {
        match self.side {
            Side::Left => Direction::new(self.lateral_azimuth_deg, self.elevation_deg),
            Side::Right => Direction::new(-self.lateral_azimuth_deg, self.elevation_deg),
        }
    }

    /// A source direction expressed in the frame of this microphone's side.
    /// Right-side microphones see the median-plane mirror image, which keeps
    /// left/right responses exactly symmetric.
    fn source_in_side_frame(&self, source: &Direction) -> Direction {
        match self.side {
            Side::Left => *source,
            Side::Right => Direction {
                azimuth_deg: normalize_azimuth(-source.azimuth_deg),
                elevation_deg: source.elevation_deg,
            },
        }
    }
}

/// Two three-microphone BTE devices on a spherical head. Microphones sit on
/// the sphere around ear azimuths +-`ear_azimuth_deg`, with neighbouring
/// microphones of a device `spacing_m` apart (chord length) along the
/// front-back direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BteArrayGeometry {
    pub head_radius_m: f64,
    pub microphones: Vec<Microphone>,
}

impl Default for BteArrayGeometry {
    fn default() -> Self {
        Self::bte(
            DEFAULT_HEAD_RADIUS_M,
            DEFAULT_EAR_AZIMUTH_DEG,
            DEFAULT_MIC_SPACING_M,
        )
    }
}

impl BteArrayGeometry {
    pub fn bte(head_radius_m: f64, ear_azimuth_deg: f64, spacing_m: f64) -> Self {
        let step = (2.0 * (spacing_m / (2.0 * head_radius_m)).asin()).to_degrees();
        let lateral = [
            ear_azimuth_deg - step,
            ear_azimuth_deg,
            ear_azimuth_deg + step,
        ];
        let microphones = BTE_CHANNEL_NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| Microphone {
                name: (*name).to_string(),
                side: if i < 3 { Side::Left } else { Side::Right },
                lateral_azimuth_deg: lateral[i % 3],
                elevation_deg: 0.0,
            })
            .collect();
        Self {
            head_radius_m,
            microphones,
        }
    }

    /// Microphone positions in metres, head centre at the origin.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.microphones
            .iter()
            .map(|m| {
                let u = m.direction().unit_vector();
                [
                    self.head_radius_m * u[0],
                    self.head_radius_m * u[1],
                    self.head_radius_m * u[2],
                ]
            })
            .collect()
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.microphones.iter().map(|m| m.name.clone()).collect()
    }

    /// Arrival time (s) of a plane wave from `source` at microphone `mic`,
    /// relative to arrival at the head centre, following the Woodworth
    /// rigid-sphere path: direct projection on the lit side, tangent plus arc
    /// in the shadow.
    pub fn arrival_time(&self, mic: usize, source: &Direction) -> f64 {
        let gamma = self.incidence_angle(mic, source);
        let a = self.head_radius_m / SPEED_OF_SOUND;
        if gamma <= FRAC_PI_2 {
            -a * gamma.cos()
        } else {
            a * (gamma - FRAC_PI_2)
        }
    }

    /// Angle between the source direction and the microphone's surface normal.
    pub fn incidence_angle(&self, mic: usize, source: &Direction) -> f64 {
        let m = &self.microphones[mic];
        let s = m.source_in_side_frame(source);
        let normal = Direction::new(m.lateral_azimuth_deg, m.elevation_deg);
        s.angle_to(&normal)
    }

    /// Head-shadow low-pass cutoff: 8 kHz when lit, falling linearly with the
    /// shadow angle to 1.5 kHz when the microphone faces away from the source.
    pub fn shadow_cutoff_hz(&self, mic: usize, source: &Direction) -> f64 {
        let gamma = self.incidence_angle(mic, source);
        let shadow = ((gamma - FRAC_PI_2) / FRAC_PI_2).clamp(0.0, 1.0);
        IPSILATERAL_CUTOFF_HZ - (IPSILATERAL_CUTOFF_HZ - CONTRALATERAL_CUTOFF_HZ) * shadow
    }
}

/// First-order bilinear low-pass with unity DC gain, applied in place.
fn one_pole_lowpass(x: &mut [f64], cutoff_hz: f64, fs: f64) {
    if cutoff_hz >= 0.5 * fs * (1.0 - 1e-9) {
        return;
    }
    let k = (std::f64::consts::PI * cutoff_hz / fs).tan();
    let b = k / (1.0 + k);
    let a = (k - 1.0) / (k + 1.0);
    let (mut x1, mut y1) = (0.0, 0.0);
    for v in x.iter_mut() {
        let y = b * (*v + x1) - a * y1;
        x1 = *v;
        y1 = y;
        *v = y;
    }
}

const KERNEL_HALF: usize = (FRACTIONAL_DELAY_TAPS - 1) / 2;

/// Analytic rigid-sphere HRIRs for the BTE array. Every response is a
/// fractionally delayed impulse at `onset + arrival_time * fs` followed by a
/// head-shadow low-pass; `onset` keeps the whole interpolation kernel causal.
pub fn synth_spherical_head(
    grid: &[Direction],
    geometry: &BteArrayGeometry,
    ir_length: usize,
    sample_rate_hz: u32,
) -> Result<HrirSet> {
    if grid.is_empty() {
        return Err(Error::invalid("direction grid is empty"));
    }
    let fs = f64::from(sample_rate_hz);
    let lead = (geometry.head_radius_m * fs / SPEED_OF_SOUND).ceil();
    let onset = KERNEL_HALF as f64 + lead;
    let max_lag = geometry.head_radius_m * FRAC_PI_2 * fs / SPEED_OF_SOUND;
    let needed = (onset + max_lag).ceil() as usize + KERNEL_HALF + 1;
    if ir_length < needed {
        return Err(Error::invalid(format!(
            "ir_length {ir_length} cannot hold the maximum delay; need at least {needed}"
        )));
    }
    let irs = grid
        .iter()
        .map(|dir| {
            (0..geometry.microphones.len())
                .map(|mic| {
                    let mut h = vec![0.0; ir_length];
                    let delay = onset + geometry.arrival_time(mic, dir) * fs;
                    add_fractionally_delayed(&mut h, &[1.0], delay, 1.0);
                    one_pole_lowpass(&mut h, geometry.shadow_cutoff_hz(mic, dir), fs);
                    h
                })
                .collect()
        })
        .collect();
    HrirSet::new(
        grid.to_vec(),
        irs,
        sample_rate_hz,
        1.0,
        geometry.channel_names(),
    )
}

/// Free-field plane-wave responses for point microphones at `positions`
/// (metres, head centre at origin): pure delays of
/// `onset_samples - (p . u) * fs / c`. Co-located microphones give identical
/// channels.
pub fn synth_free_field(
    grid: &[Direction],
    positions: &[[f64; 3]],
    onset_samples: f64,
    ir_length: usize,
    sample_rate_hz: u32,
) -> Result<HrirSet> {
    if grid.is_empty() {
        return Err(Error::invalid("direction grid is empty"));
    }
    let fs = f64::from(sample_rate_hz);
    let irs = grid
        .iter()
        .map(|dir| {
            let u = dir.unit_vector();
            positions
                .iter()
                .map(|p| {
                    let lead = (p[0] * u[0] + p[1] * u[1] + p[2] * u[2]) / SPEED_OF_SOUND;
                    let delay = onset_samples - lead * fs;
                    if delay < 0.0 {
                        return Err(Error::invalid("onset too small for array aperture"));
                    }
                    let mut h = vec![0.0; ir_length];
                    add_fractionally_delayed(&mut h, &[1.0], delay, 1.0);
                    Ok(h)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let names = (0..positions.len()).map(|i| format!("M{i}")).collect();
    HrirSet::new(grid.to_vec(), irs, sample_rate_hz, 1.0, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::horizontal_grid;

    const C: f64 = SPEED_OF_SOUND;

    #[test]
    fn neighbour_spacing_is_7_6_mm() {
        let g = BteArrayGeometry::default();
        let p = g.positions();
        for (a, b) in [(0, 1), (1, 2), (3, 4), (4, 5)] {
            let d = ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2)).sqrt();
            assert!((d - 0.0076).abs() < 1e-12, "{d}");
        }
        // mirror symmetric across the median plane
        for i in 0..3 {
            assert!((p[i][0] - p[i + 3][0]).abs() < 1e-15);
            assert!((p[i][1] + p[i + 3][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn frontal_source_gives_equal_front_delays() {
        let g = BteArrayGeometry::default();
        let front = Direction::horizontal(0.0);
        let dl = g.arrival_time(0, &front);
        let dr = g.arrival_time(3, &front);
        assert!((dl - dr).abs() < 1e-6);
    }

    #[test]
    fn lateral_itd_follows_woodworth() {
        let g = BteArrayGeometry::default();
        let left = Direction::horizontal(90.0);
        let tl = g.arrival_time(1, &left);
        let tr = g.arrival_time(4, &left);
        assert!(tl < tr);
        let itd = tr - tl;
        // Independent evaluation with the microphones at +-100 degrees: the lit
        // one sees cos(10 deg), the shadowed one an arc of 170 - 90 degrees.
        let r = 0.0875;
        let expected = r / C * (10f64.to_radians().cos() + 80f64.to_radians());
        assert!((itd - expected).abs() < 1e-12);
        // Classic ears-at-90 Woodworth value r(theta + sin theta)/c = 0.656 ms.
        let classic = r * (FRAC_PI_2 + 1.0) / C;
        assert!((classic - 0.656e-3).abs() < 1e-6);
        assert!((itd - classic).abs() < 0.06e-3, "itd {itd}");
    }

    #[test]
    fn broadside_source_gives_equal_device_delays() {
        let g = BteArrayGeometry::default();
        let broadside = Direction::horizontal(DEFAULT_EAR_AZIMUTH_DEG);
        let t: Vec<f64> = (0..3).map(|m| g.arrival_time(m, &broadside)).collect();
        assert!((t[0] - t[1]).abs() < 1e-6);
        assert!((t[2] - t[1]).abs() < 1e-6);
        assert_eq!(t[0], t[2]);
    }

    #[test]
    fn spherical_head_is_mirror_symmetric() {
        let grid = horizontal_grid(5.0);
        let set = synth_spherical_head(&grid, &BteArrayGeometry::default(), 128, 16000).unwrap();
        for (i, d) in grid.iter().enumerate() {
            let j = set.find(&d.mirrored()).unwrap();
            for c in 0..3 {
                assert_eq!(set.ir(i, c), set.ir(j, c + 3), "dir {i} ch {c}");
            }
        }
    }

    #[test]
    fn spherical_head_energy_is_finite_and_nonzero() {
        let set = synth_spherical_head(
            &horizontal_grid(15.0),
            &BteArrayGeometry::default(),
            96,
            16000,
        )
        .unwrap();
        for d in 0..set.len() {
            for c in 0..6 {
                let e: f64 = set.ir(d, c).iter().map(|x| x * x).sum();
                assert!(e.is_finite() && e > 0.0);
            }
        }
    }

    #[test]
    fn short_ir_is_rejected() {
        let err = synth_spherical_head(
            &horizontal_grid(5.0),
            &BteArrayGeometry::default(),
            20,
            16000,
        );
        assert!(err.is_err());
        assert!(synth_spherical_head(&[], &BteArrayGeometry::default(), 128, 16000).is_err());
    }

    #[test]
    fn colocated_free_field_channels_are_identical() {
        let set = synth_free_field(&horizontal_grid(30.0), &[[0.0; 3]; 3], 0.0, 8, 16000).unwrap();
        for d in 0..set.len() {
            assert_eq!(set.ir(d, 0)[0], 1.0);
            assert_eq!(set.ir(d, 0), set.ir(d, 2));
        }
    }
}
