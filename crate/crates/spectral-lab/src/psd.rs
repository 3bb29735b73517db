use crate::error::SpectralError;
use crate::window::Window;
use serde::{Deserialize, Serialize};

/// A single-sided power spectral density on a uniform hertz grid, in m²/Hz.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Psd {
    /// Frequency axis in Hz, uniform and strictly increasing from 0.
    pub frequency_hz: Vec<f64>,
    /// Density values in m²/Hz (single-sided).
    pub values: Vec<f64>,
    /// Resolution bandwidth in Hz implied by the window and segment length.
    pub rbw_hz: f64,
    /// Taper the estimate was formed with.
    pub window: Window,
    /// Number of (possibly overlapping) segments averaged.
    pub segments_averaged: usize,
}

impl Psd {
    /// Construct with invariant checks: matching lengths, a strictly
    /// increasing uniform axis, non-negative values, and a resolution
    /// bandwidth consistent with the window's noise bandwidth.
    pub fn new(
        frequency_hz: Vec<f64>,
        values: Vec<f64>,
        rbw_hz: f64,
        window: Window,
        segments_averaged: usize,
    ) -> Result<Self, SpectralError> {
        if frequency_hz.len() != values.len() {
            return Err(SpectralError::invalid(
                "values",
                format!(
                    "length {} does not match frequency axis length {}",
                    values.len(),
                    frequency_hz.len()
                ),
            ));
        }
        if frequency_hz.len() < 2 {
            return Err(SpectralError::invalid(
                "frequency_hz",
                "need at least two bins",
            ));
        }
        let df = frequency_hz[1] - frequency_hz[0];
        if !(df > 0.0) {
            return Err(SpectralError::invalid(
                "frequency_hz",
                "axis must be strictly increasing",
            ));
        }
        for pair in frequency_hz.windows(2) {
            if ((pair[1] - pair[0]) - df).abs() > 1e-6 * df {
                return Err(SpectralError::invalid(
                    "frequency_hz",
                    "axis must be uniform",
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SpectralError::invalid(
                "values",
                "densities must be finite and non-negative",
            ));
        }
        let expected_rbw = window.enbw_bins() * df;
        if (rbw_hz - expected_rbw).abs() > 1e-9 * expected_rbw {
            return Err(SpectralError::invalid(
                "rbw_hz",
                format!("expected {expected_rbw} Hz for this window and grid, got {rbw_hz}"),
            ));
        }
        Ok(Psd {
            frequency_hz,
            values,
            rbw_hz,
            window,
            segments_averaged,
        })
    }

    /// Grid spacing in Hz.
    pub fn bin_width(&self) -> f64 {
        self.frequency_hz[1] - self.frequency_hz[0]
    }

    /// Total power Σ values·Δf, in m².
    pub fn total_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width()
    }

    /// Indices of the bins whose centers lie in `[lo, hi]` (Hz).
    pub fn band_indices(&self, band: (f64, f64)) -> std::ops::Range<usize> {
        let df = self.bin_width();
        let f0 = self.frequency_hz[0];
        let lo = ((band.0 - f0) / df).ceil().max(0.0) as usize;
        let hi = (((band.1 - f0) / df).floor() as isize + 1).max(0) as usize;
        lo.min(self.values.len())..hi.min(self.values.len())
    }

    /// Signed area Σ (value − floor)·Δf over the band, in m².
    pub fn band_area_above_floor(&self, noise_floor: f64, band: (f64, f64)) -> f64 {
        let range = self.band_indices(band);
        let df = self.bin_width();
        self.values[range]
            .iter()
            .map(|v| v - noise_floor)
            .sum::<f64>()
            * df
    }

    /// A copy containing only the bins whose centers lie inside `band`.
    pub fn restricted(&self, band: (f64, f64)) -> Result<Psd, SpectralError> {
        let range = self.band_indices(band);
        if range.len() < 2 {
            return Err(SpectralError::BandOutsideSupport {
                lo: band.0,
                hi: band.1,
                min: self.frequency_hz[0],
                max: *self.frequency_hz.last().unwrap(),
            });
        }
        Psd::new(
            self.frequency_hz[range.clone()].to_vec(),
            self.values[range].to_vec(),
            self.rbw_hz,
            self.window,
            self.segments_averaged,
        )
    }

    /// Highest bin in the band: (frequency Hz, value m²/Hz).
    pub fn peak_in_band(&self, band: (f64, f64)) -> Option<(f64, f64)> {
        let range = self.band_indices(band);
        range
            .map(|i| (self.frequency_hz[i], self.values[i]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, df: f64, level: f64) -> Psd {
        Psd::new(
            (0..n).map(|i| i as f64 * df).collect(),
            vec![level; n],
            1.5 * df,
            Window::Hann,
            16,
        )
        .unwrap()
    }

    #[test]
    fn rejects_inconsistent_construction() {
        assert!(Psd::new(vec![0.0, 1.0], vec![1.0], 1.5, Window::Hann, 1).is_err());
        assert!(Psd::new(vec![0.0, 1.0, 1.5], vec![1.0; 3], 1.5, Window::Hann, 1).is_err());
        assert!(Psd::new(vec![0.0, 1.0, 2.0], vec![1.0, -1.0, 0.0], 1.5, Window::Hann, 1).is_err());
        // Wrong rbw for a hann window on a 1 Hz grid.
        assert!(Psd::new(vec![0.0, 1.0, 2.0], vec![1.0; 3], 1.0, Window::Hann, 1).is_err());
    }

    #[test]
    fn band_selection_and_area() {
        let psd = flat(101, 2.0, 3.0);
        // Band [10, 20] Hz → bins at 10,12,...,20 → 6 bins.
        let idx = psd.band_indices((10.0, 20.0));
        assert_eq!(idx, 5..11);
        let area = psd.band_area_above_floor(1.0, (10.0, 20.0));
        assert!((area - 6.0 * 2.0 * 2.0).abs() < 1e-12);
        // Signed: floor above the data gives a negative area.
        let neg = psd.band_area_above_floor(5.0, (10.0, 20.0));
        assert!((neg + 6.0 * 2.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn peak_lookup() {
        let mut psd = flat(100, 1.0, 1.0);
        psd.values[42] = 7.0;
        let (f, v) = psd.peak_in_band((30.0, 60.0)).unwrap();
        assert_eq!(f, 42.0);
        assert_eq!(v, 7.0);
        assert!(psd.peak_in_band((200.0, 300.0)).is_none());
    }

    #[test]
    fn total_power_is_riemann_sum() {
        let psd = flat(50, 0.5, 2.0);
        assert!((psd.total_power() - 50.0 * 2.0 * 0.5).abs() < 1e-12);
    }
}
