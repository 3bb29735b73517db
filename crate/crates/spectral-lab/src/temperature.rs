use crate::error::SpectralError;
use crate::psd::Psd;
use physics_core::MechanicalMode;
use serde::{Deserialize, Serialize};

/// Mode temperature inferred from the spectral area above the noise floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemperatureEstimate {
    /// Kelvin; signed — heavy noise squashing can drive it below zero.
    pub value: f64,
    /// Area of the feedback-off reference spectrum over its band, m².
    pub reference_area: f64,
    /// Signed area of this spectrum above the floor over `band`, m².
    pub area: f64,
    /// Integration band in Hz.
    pub band: (f64, f64),
    /// Set when `value` ≤ 0: the band-area proxy stopped being a
    /// temperature.
    pub unphysical: bool,
}

/// Default integration band: resonance ± 10 closed-loop linewidths, so the
/// gain-broadened peak is always captured. Returned in Hz.
pub fn default_band(mode: &MechanicalMode, gain: f64) -> (f64, f64) {
    let half = 10.0 * (1.0 + gain) * mode.damping / (2.0 * std::f64::consts::PI);
    let center = mode.frequency_hz();
    (center - half, center + half)
}

/// Area-based temperature inference against a feedback-off reference.
///
/// `area = Σ (psd − noise_floor)·Δf` over `band` (signed), and
/// `value = T0 · area / reference_area`. The caller is responsible for
/// choosing `band` to cover at least ten closed-loop linewidths around the
/// resonance and for supplying `reference_area` from a gain-zero run of the
/// same channel.
pub fn infer_temperature(
    psd: &Psd,
    noise_floor: f64,
    band: (f64, f64),
    reference_area: f64,
    t0: f64,
) -> Result<TemperatureEstimate, SpectralError> {
    if !(reference_area > 0.0) || !reference_area.is_finite() {
        return Err(SpectralError::NonPositiveReference(reference_area));
    }
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(SpectralError::invalid(
            "t0",
            "bath temperature must be finite and positive",
        ));
    }
    if !(noise_floor >= 0.0) || !noise_floor.is_finite() {
        return Err(SpectralError::invalid(
            "noise_floor",
            "must be finite and non-negative",
        ));
    }
    let min = psd.frequency_hz[0];
    let max = *psd.frequency_hz.last().unwrap();
    if !(band.0 < band.1) || band.0 < min || band.1 > max {
        return Err(SpectralError::BandOutsideSupport {
            lo: band.0,
            hi: band.1,
            min,
            max,
        });
    }
    let area = psd.band_area_above_floor(noise_floor, band);
    let value = t0 * area / reference_area;
    Ok(TemperatureEstimate {
        value,
        reference_area,
        area,
        band,
        unphysical: value <= 0.0,
    })
}
