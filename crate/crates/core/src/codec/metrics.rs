/// Segmental SNR in dB: the mean over `frame_len` frames of the per-frame SNR
/// clamped to [-10, 35] dB. Frames where the reference is silent are skipped.
/// Returns `None` when no frame qualifies.
pub fn segmental_snr_db(reference: &[f64], test: &[f64], frame_len: usize) -> Option<f64> {
    assert!(frame_len > 0, "frame length must be positive");
    let n = reference.len().min(test.len());
    let (mut sum, mut count) = (0.0, 0usize);
    for start in (0..n).step_by(frame_len) {
        let end = (start + frame_len).min(n);
        let (mut sig, mut err) = (0.0, 0.0);
        for i in start..end {
            sig += reference[i] * reference[i];
            let d = reference[i] - test[i];
            err += d * d;
        }
        if sig <= 1e-10 * (end - start) as f64 {
            continue;
        }
        let snr = if err == 0.0 {
            35.0
        } else {
            10.0 * (sig / err).log10()
        };
        sum += snr.clamp(-10.0, 35.0);
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}
