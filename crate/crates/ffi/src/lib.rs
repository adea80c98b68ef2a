//! C interface to `binaural-doa`.
//!
//! Every function returns a [`BdStatus`]; on failure a description is
//! available from [`bd_last_error_message`] on the same thread. Objects are
//! opaque handles created by `bd_*_new`/`bd_*_load` and released with the
//! matching `bd_*_free`. Multichannel audio is passed planar: channel 0's
//! samples, then channel 1's, and so on.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use binaural_doa::codec::{apply_topology, codec_roundtrip, CodecConfig, Topology};
use binaural_doa::doa::{decode_topk, srp_phat_with, DoaGrid, SectorScores, SteeringVectors};
use binaural_doa::dsp::{stft, MultichannelAudio, StftConfig};
use binaural_doa::features::{features_of_segment, segment_frames, N_FEATURES};
use binaural_doa::spatial::{horizontal_grid, synth_spherical_head, BteArrayGeometry, HrirSet};
use binaural_doa::{Error, PIPELINE_SAMPLE_RATE};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    BufferTooSmall = 4,
    Io = 5,
    Format = 6,
    Codec = 7,
    MissingDirection = 8,
    Panic = 9,
}

/// HRIR set.
pub struct BdHrirs(HrirSet);

/// SRP-PHAT localiser over the 72 five-degree sectors.
pub struct BdSrp {
    steering: SteeringVectors,
    grid: DoaGrid,
    sample_rate_hz: u32,
    n_channels: usize,
}

/// Codec configuration used for round trips.
pub struct BdCodec(CodecConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BdStatus {
    match e {
        Error::InsufficientSamples { .. } | Error::InvalidArgument(_) | Error::ZeroEnergy(_) => {
            BdStatus::InvalidArgument
        }
        Error::ShapeMismatch(_) | Error::ChannelMismatch { .. } | Error::RateMismatch { .. } => {
            BdStatus::ShapeMismatch
        }
        Error::MissingDirection { .. } => BdStatus::MissingDirection,
        Error::Codec(_) | Error::ExternalCodec { .. } => BdStatus::Codec,
        Error::Io { .. } => BdStatus::Io,
        Error::Wav { .. }
        | Error::Json { .. }
        | Error::Dataset(_)
        | Error::DuplicateDirection { .. } => BdStatus::Format,
        _ => BdStatus::InvalidArgument,
    }
}

struct Failure(BdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: BdStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, recording any error or panic for [`bd_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BdStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(
        || fail(BdStatus::NullPointer, format!("{what} is null")),
        Ok,
    )
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(BdStatus::NullPointer, format!("{what} is null"));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return fail(BdStatus::NullPointer, format!("{what} is null"));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn planar(
    samples: *const f64,
    n_channels: usize,
    n_samples: usize,
    fs: u32,
) -> Result<MultichannelAudio, Failure> {
    let total = n_channels
        .checked_mul(n_samples)
        .ok_or_else(|| Failure(BdStatus::InvalidArgument, "audio size overflows".into()))?;
    let data = input(samples, total, "samples")?;
    let channels = data
        .chunks(n_samples.max(1))
        .take(n_channels)
        .map(<[f64]>::to_vec)
        .collect();
    Ok(MultichannelAudio::new(channels, fs)?)
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(BdStatus::NullPointer, "output handle pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version, a static nul-terminated string.
#[no_mangle]
pub extern "C" fn bd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn bd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads an HRIR set from its JSON manifest.
///
/// # Safety
/// `manifest_path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bd_hrirs_load(
    manifest_path: *const c_char,
    out: *mut *mut BdHrirs,
) -> BdStatus {
    guard(|| {
        let path = reference(manifest_path, "manifest_path")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(BdStatus::InvalidArgument, "path is not UTF-8".into()))?;
        store(out, BdHrirs(HrirSet::load(Path::new(path))?))
    })
}

/// Analytic rigid-sphere HRIRs of the six-microphone array on a horizontal
/// grid of `step_deg`, 16 kHz.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bd_hrirs_spherical_head(
    step_deg: f64,
    ir_length: usize,
    out: *mut *mut BdHrirs,
) -> BdStatus {
    guard(|| {
        if !(step_deg > 0.0 && step_deg <= 360.0) {
            return fail(BdStatus::InvalidArgument, "step_deg must be in (0, 360]");
        }
        let set = synth_spherical_head(
            &horizontal_grid(step_deg),
            &BteArrayGeometry::default(),
            ir_length,
            PIPELINE_SAMPLE_RATE,
        )?;
        store(out, BdHrirs(set))
    })
}

/// Number of directions, or 0 for NULL.
///
/// # Safety
/// `hrirs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bd_hrirs_n_directions(hrirs: *const BdHrirs) -> usize {
    hrirs.as_ref().map_or(0, |h| h.0.len())
}

/// Number of channels, or 0 for NULL.
///
/// # Safety
/// `hrirs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bd_hrirs_n_channels(hrirs: *const BdHrirs) -> usize {
    hrirs.as_ref().map_or(0, |h| h.0.n_channels())
}

/// # Safety
/// `hrirs` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bd_hrirs_free(hrirs: *mut BdHrirs) {
    if !hrirs.is_null() {
        drop(Box::from_raw(hrirs));
    }
}

/// Number of STFT frames (512-sample window, 160-sample hop) in `n_samples`.
#[no_mangle]
pub extern "C" fn bd_stft_frame_count(n_samples: usize) -> usize {
    StftConfig::default().n_frames(n_samples)
}

/// Builds an SRP-PHAT localiser. The HRIR set must contain every sector
/// direction (0, 5, ..., 355 degrees azimuth).
///
/// # Safety
/// `hrirs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bd_srp_new(hrirs: *const BdHrirs, out: *mut *mut BdSrp) -> BdStatus {
    guard(|| {
        let h = &reference(hrirs, "hrirs")?.0;
        let grid = DoaGrid::default();
        let cfg = StftConfig::default();
        let steering = SteeringVectors::new(h, &grid, cfg.fft_size, h.sample_rate_hz())?;
        store(
            out,
            BdSrp {
                steering,
                grid,
                sample_rate_hz: h.sample_rate_hz(),
                n_channels: h.n_channels(),
            },
        )
    })
}

/// SRP-PHAT sector scores, row-major `[frame][sector]` with 72 sectors.
/// `*n_frames` receives the frame count even when `capacity` is too small.
///
/// # Safety
/// `samples` must hold `n_channels * n_samples` values, `scores` `capacity`.
#[no_mangle]
pub unsafe extern "C" fn bd_srp_scores(
    srp: *const BdSrp,
    samples: *const f64,
    n_channels: usize,
    n_samples: usize,
    scores: *mut f64,
    capacity: usize,
    n_frames: *mut usize,
) -> BdStatus {
    guard(|| {
        let srp = reference(srp, "srp")?;
        if n_channels != srp.n_channels {
            return fail(
                BdStatus::ShapeMismatch,
                format!("expected {} channels, got {n_channels}", srp.n_channels),
            );
        }
        let audio = planar(samples, n_channels, n_samples, srp.sample_rate_hz)?;
        let spec = stft(&audio, &StftConfig::default())?;
        let s = srp_phat_with(&spec, &srp.steering, &srp.grid)?;
        if !n_frames.is_null() {
            *n_frames = s.n_frames();
        }
        let values = s.as_slice();
        if capacity < values.len() {
            return fail(
                BdStatus::BufferTooSmall,
                format!(
                    "scores need {} values, buffer holds {capacity}",
                    values.len()
                ),
            );
        }
        output(scores, values.len(), "scores")?.copy_from_slice(values);
        Ok(())
    })
}

/// # Safety
/// `srp` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bd_srp_free(srp: *mut BdSrp) {
    if !srp.is_null() {
        drop(Box::from_raw(srp));
    }
}

/// The `k` highest-scoring sectors of each frame, best first; ties go to the
/// lower sector. `estimates` receives `n_frames * k` values.
///
/// # Safety
/// `scores` must hold `n_frames * 72` values and `estimates` `n_frames * k`.
#[no_mangle]
pub unsafe extern "C" fn bd_decode_topk(
    scores: *const f64,
    n_frames: usize,
    k: usize,
    estimates: *mut u32,
) -> BdStatus {
    guard(|| {
        let n_sectors = DoaGrid::default().n_sectors();
        let values = input(scores, n_frames * n_sectors, "scores")?;
        let s = SectorScores::from_rows(values.to_vec(), n_frames)?;
        let top = decode_topk(&s, k)?;
        let out = output(estimates, n_frames * k, "estimates")?;
        for (dst, src) in out.chunks_mut(k.max(1)).zip(&top) {
            for (d, &v) in dst.iter_mut().zip(src) {
                *d = v as u32;
            }
        }
        Ok(())
    })
}

/// Number of feature frames produced for a segment of `n_samples`.
#[no_mangle]
pub extern "C" fn bd_feature_frame_count(n_samples: usize) -> usize {
    segment_frames(n_samples, &StftConfig::default())
}

/// Network input features of six-channel 16 kHz audio, laid out
/// `[frame][feature (sin, cos, magnitude)][channel][bin]` with 257 bins.
/// `*n_frames` receives the frame count even when `capacity` is too small.
///
/// # Safety
/// `samples` must hold `n_channels * n_samples` values, `features` `capacity`.
#[no_mangle]
pub unsafe extern "C" fn bd_features(
    samples: *const f64,
    n_channels: usize,
    n_samples: usize,
    features: *mut f32,
    capacity: usize,
    n_frames: *mut usize,
) -> BdStatus {
    guard(|| {
        let audio = planar(samples, n_channels, n_samples, PIPELINE_SAMPLE_RATE)?;
        let f = features_of_segment(&audio, &StftConfig::default())?;
        if !n_frames.is_null() {
            *n_frames = f.n_frames();
        }
        let values = f.as_slice();
        debug_assert_eq!(
            values.len(),
            f.n_frames() * N_FEATURES * n_channels * StftConfig::default().n_bins()
        );
        if capacity < values.len() {
            return fail(
                BdStatus::BufferTooSmall,
                format!(
                    "features need {} values, buffer holds {capacity}",
                    values.len()
                ),
            );
        }
        output(features, values.len(), "features")?.copy_from_slice(values);
        Ok(())
    })
}

/// Built-in reference lossy codec at `bitrate_bps` per channel (10 ms
/// frames, 16 kHz). A bitrate of 0 selects the bit-exact identity codec.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bd_codec_new(bitrate_bps: u32, out: *mut *mut BdCodec) -> BdStatus {
    guard(|| {
        let cfg = if bitrate_bps == 0 {
            CodecConfig::identity()
        } else {
            CodecConfig::reference(bitrate_bps)
        };
        cfg.validate()?;
        store(out, BdCodec(cfg))
    })
}

/// Encodes and decodes one 16 kHz channel; `output` is time-aligned with
/// `input` and has the same length. The buffers may not overlap.
///
/// # Safety
/// `input` and `output` must each hold `n_samples` values.
#[no_mangle]
pub unsafe extern "C" fn bd_codec_roundtrip(
    codec: *const BdCodec,
    input_samples: *const f64,
    output_samples: *mut f64,
    n_samples: usize,
) -> BdStatus {
    guard(|| {
        let codec = reference(codec, "codec")?;
        let x = input(input_samples, n_samples, "input")?;
        let y = codec_roundtrip(x, PIPELINE_SAMPLE_RATE, &codec.0)?;
        output(output_samples, n_samples, "output")?.copy_from_slice(&y);
        Ok(())
    })
}

/// Passes six-channel audio through an exchange topology in place:
/// `"none"`, `"encode-3"` (= `"encode-3-right"`), `"encode-3-left"` or
/// `"encode-6"`. The side named by `encode-3` is the processing device; the
/// other ear's three channels are coded.
///
/// # Safety
/// `topology` must be a nul-terminated string and `samples` must hold
/// `n_channels * n_samples` values.
#[no_mangle]
pub unsafe extern "C" fn bd_codec_apply_topology(
    codec: *const BdCodec,
    topology: *const c_char,
    samples: *mut f64,
    n_channels: usize,
    n_samples: usize,
) -> BdStatus {
    guard(|| {
        let codec = reference(codec, "codec")?;
        let name = CStr::from_ptr(reference(topology, "topology")?)
            .to_str()
            .map_err(|_| Failure(BdStatus::InvalidArgument, "topology is not UTF-8".into()))?;
        let topology: Topology = name.parse()?;
        let audio = planar(samples, n_channels, n_samples, PIPELINE_SAMPLE_RATE)?;
        let coded = apply_topology(&audio, topology, &codec.0)?;
        let out = output(samples, n_channels * n_samples, "samples")?;
        for (dst, src) in out.chunks_mut(n_samples.max(1)).zip(coded.channels()) {
            dst.copy_from_slice(src);
        }
        Ok(())
    })
}

/// # Safety
/// `codec` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bd_codec_free(codec: *mut BdCodec) {
    if !codec.is_null() {
        drop(Box::from_raw(codec));
    }
}
