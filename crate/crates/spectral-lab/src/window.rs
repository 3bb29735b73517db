use serde::{Deserialize, Serialize};

/// Taper applied to each segment before the FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    /// Window samples for a segment of `n` points (periodic form, the right
    /// one for spectral averaging).
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }

    /// Equivalent noise bandwidth in bins: the factor between the bin width
    /// and the resolution bandwidth reported on spectra.
    pub fn enbw_bins(self) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 1.5,
        }
    }
}
