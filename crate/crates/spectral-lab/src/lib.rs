//! Spectral estimation and inference for displacement records: streaming
//! Welch PSD estimation, reference-tone calibration, multi-Lorentzian
//! weighted least-squares fitting, and area-based temperature inference.
//!
//! All spectra produced here are **single-sided densities on a hertz axis**
//! (m²/Hz); the conversion helpers in `physics-core` bridge to its internal
//! double-sided angular convention.

mod calibrate;
mod error;
mod fit;
mod io;
mod psd;
mod temperature;
mod welch;
mod window;

pub use calibrate::calibrate;
pub use error::SpectralError;
pub use fit::{fit_spectrum, FittedMode, ModeGuess, SpectrumFit, SpectrumGuess};
pub use io::{read_psd_csv, write_fit_json, write_psd_csv, PsdSidecar};
pub use psd::Psd;
pub use temperature::{default_band, infer_temperature, TemperatureEstimate};
pub use welch::{welch_psd, WelchAccumulator};
pub use window::Window;
