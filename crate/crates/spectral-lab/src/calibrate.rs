use crate::error::SpectralError;
use crate::psd::Psd;

/// Displacement calibration against a reference tone of known amplitude.
///
/// `reference` is `(frequency Hz, known displacement ASD in m·Hz^{-1/2})`,
/// the tone's amplitude spectral density quoted at this spectrum's
/// resolution bandwidth (for a tone of amplitude A that is A/√(2·rbw)).
/// Returns the multiplicative scale that maps the raw PSD into absolute
/// m²/Hz so the measured reference peak equals the known value. The scale
/// applies to each probe channel independently.
///
/// Fails if the tone is absent from the grid or sits less than 10 dB above
/// the local floor.
pub fn calibrate(psd: &Psd, reference: (f64, f64)) -> Result<f64, SpectralError> {
    let (f_ref, known_asd) = reference;
    if !(known_asd > 0.0) || !known_asd.is_finite() {
        return Err(SpectralError::invalid(
            "reference",
            "known displacement ASD must be finite and positive",
        ));
    }
    let lo = psd.frequency_hz[0];
    let hi = *psd.frequency_hz.last().unwrap();
    if !(lo..=hi).contains(&f_ref) {
        return Err(SpectralError::ToneNotFound(format!(
            "{f_ref} Hz is outside the spectrum [{lo}, {hi}] Hz"
        )));
    }
    let df = psd.bin_width();
    let center = ((f_ref - lo) / df).round() as usize;

    // Window smearing can shift the maximum by a bin or two.
    let peak_lo = center.saturating_sub(2);
    let peak_hi = (center + 2).min(psd.values.len() - 1);
    let (peak_idx, peak) = (peak_lo..=peak_hi)
        .map(|i| (i, psd.values[i]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();

    // Local floor: median of nearby bins, excluding the tone's skirt.
    let floor_lo = peak_idx.saturating_sub(60);
    let floor_hi = (peak_idx + 60).min(psd.values.len() - 1);
    let mut neighborhood: Vec<f64> = (floor_lo..=floor_hi)
        .filter(|i| peak_idx.abs_diff(*i) > 6)
        .map(|i| psd.values[i])
        .collect();
    if neighborhood.is_empty() {
        return Err(SpectralError::ToneNotFound(
            "spectrum too small to separate the tone from its floor".into(),
        ));
    }
    neighborhood.sort_by(f64::total_cmp);
    let floor = neighborhood[neighborhood.len() / 2];

    if peak < 10.0 * floor {
        return Err(SpectralError::ToneNotFound(format!(
            "peak at {:.3} Hz is only {:.1} dB above the local floor (need ≥ 10 dB)",
            psd.frequency_hz[peak_idx],
            10.0 * (peak / floor).log10()
        )));
    }
    Ok(known_asd * known_asd / peak)
}
