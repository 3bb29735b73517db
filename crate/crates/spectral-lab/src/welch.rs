use crate::error::SpectralError;
use crate::psd::Psd;
use crate::window::Window;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Streaming Welch estimator: feed samples in chunks of any size, read the
/// averaged single-sided PSD at the end. Memory use is bounded by the
/// segment length, so arbitrarily long records never need to be resident.
pub struct WelchAccumulator {
    sample_rate: f64,
    segment_length: usize,
    hop: usize,
    window: Window,
    coeffs: Vec<f64>,
    sum_sq_window: f64,
    fft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    carry: Vec<f64>,
    accum: Vec<f64>,
    segments: usize,
    total_pushed: usize,
}

impl WelchAccumulator {
    pub fn new(
        sample_rate: f64,
        segment_length: usize,
        overlap_fraction: f64,
        window: Window,
    ) -> Result<Self, SpectralError> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(SpectralError::invalid(
                "sample_rate",
                "must be finite and positive",
            ));
        }
        if segment_length < 4 || !segment_length.is_power_of_two() {
            return Err(SpectralError::invalid(
                "segment_length",
                format!("must be a power of two ≥ 4, got {segment_length}"),
            ));
        }
        if !(0.0..1.0).contains(&overlap_fraction) {
            return Err(SpectralError::invalid(
                "overlap_fraction",
                format!("must lie in [0, 1), got {overlap_fraction}"),
            ));
        }
        let hop = ((segment_length as f64) * (1.0 - overlap_fraction)).round() as usize;
        let hop = hop.clamp(1, segment_length);
        let coeffs = window.coefficients(segment_length);
        let sum_sq_window: f64 = coeffs.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(segment_length);
        Ok(WelchAccumulator {
            sample_rate,
            segment_length,
            hop,
            window,
            coeffs,
            sum_sq_window,
            fft,
            scratch: vec![Complex64::default(); segment_length],
            carry: Vec::with_capacity(2 * segment_length),
            accum: vec![0.0; segment_length / 2 + 1],
            segments: 0,
            total_pushed: 0,
        })
    }

    /// Append samples; complete segments are consumed eagerly.
    pub fn push(&mut self, samples: &[f64]) {
        self.total_pushed += samples.len();
        self.carry.extend_from_slice(samples);
        while self.carry.len() >= self.segment_length {
            for (slot, (x, w)) in self
                .scratch
                .iter_mut()
                .zip(self.carry.iter().zip(self.coeffs.iter()))
            {
                *slot = Complex64::new(x * w, 0.0);
            }
            self.fft.process(&mut self.scratch);
            let norm = 1.0 / (self.sample_rate * self.sum_sq_window);
            let half = self.segment_length / 2;
            for k in 0..=half {
                // Single-sided: double every bin except DC and Nyquist.
                let fold = if k == 0 || k == half { 1.0 } else { 2.0 };
                self.accum[k] += fold * self.scratch[k].norm_sqr() * norm;
            }
            self.segments += 1;
            self.carry.drain(..self.hop);
        }
    }

    /// Number of segments consumed so far.
    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Average the accumulated periodograms into a PSD.
    pub fn finish(self) -> Result<Psd, SpectralError> {
        if self.segments == 0 {
            return Err(SpectralError::SeriesTooShort {
                len: self.total_pushed,
                segment: self.segment_length,
            });
        }
        let n = self.segment_length as f64;
        let df = self.sample_rate / n;
        let freq: Vec<f64> = (0..self.accum.len()).map(|k| k as f64 * df).collect();
        let values: Vec<f64> = self
            .accum
            .iter()
            .map(|a| a / self.segments as f64)
            .collect();
        Psd::new(
            freq,
            values,
            self.window.enbw_bins() * df,
            self.window,
            self.segments,
        )
    }
}

/// One-shot Welch PSD of an in-memory series.
pub fn welch_psd(
    series: &[f64],
    sample_rate: f64,
    segment_length: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<Psd, SpectralError> {
    if series.len() < segment_length {
        return Err(SpectralError::SeriesTooShort {
            len: series.len(),
            segment: segment_length,
        });
    }
    let mut acc = WelchAccumulator::new(sample_rate, segment_length, overlap_fraction, window)?;
    acc.push(series);
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect()
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(WelchAccumulator::new(1e6, 1000, 0.5, Window::Hann).is_err());
        assert!(WelchAccumulator::new(1e6, 1024, 1.0, Window::Hann).is_err());
        assert!(WelchAccumulator::new(0.0, 1024, 0.5, Window::Hann).is_err());
        assert!(matches!(
            welch_psd(&[0.0; 100], 1e6, 1024, 0.5, Window::Hann),
            Err(SpectralError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn unit_variance_white_noise_sits_at_two_over_fs() {
        let fs = 1.0e6;
        let series = white_noise(1 << 19, 7);
        let psd = welch_psd(&series, fs, 1 << 10, 0.5, Window::Hann).unwrap();
        assert!(psd.segments_averaged > 1000);
        let expected = 2.0 / fs;
        // Mean level over the interior bins.
        let interior = &psd.values[1..psd.values.len() - 1];
        let mean: f64 = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!(
            (mean - expected).abs() / expected < 0.01,
            "mean {mean} vs {expected}"
        );
        // Flatness: eight coarse chunks each within 5%.
        for chunk in interior.chunks(interior.len() / 8) {
            let level: f64 = chunk.iter().sum::<f64>() / chunk.len() as f64;
            assert!((level - expected).abs() / expected < 0.05);
        }
    }

    #[test]
    fn on_bin_tone_integrates_to_half_amplitude_squared() {
        let fs = 1.0e6;
        let n_seg = 1 << 14;
        let f0 = 200.0 * fs / n_seg as f64;
        let a = 3.0e-3;
        let series: Vec<f64> = (0..(1 << 17))
            .map(|i| a * (2.0 * std::f64::consts::PI * f0 * i as f64 / fs).cos())
            .collect();
        let psd = welch_psd(&series, fs, n_seg, 0.5, Window::Hann).unwrap();
        let (f_peak, _) = psd.peak_in_band((f0 - 1000.0, f0 + 1000.0)).unwrap();
        assert!((f_peak - f0).abs() < psd.bin_width() / 2.0);
        // A windowed on-bin tone occupies exactly the peak bin ± 2 bins;
        // integrate a safely wider patch.
        let power = psd.band_area_above_floor(0.0, (f0 - 5.0 * psd.bin_width(), f0 + 5.0 * psd.bin_width()));
        let expected = a * a / 2.0;
        assert!(
            (power - expected).abs() / expected < 0.01,
            "tone power {power} vs {expected}"
        );
    }

    #[test]
    fn dc_and_nyquist_bins_obey_parseval() {
        // A constant series is pure DC; an alternating series is pure
        // Nyquist. Both must integrate to the mean square exactly with a
        // rectangular window.
        let fs = 1000.0;
        let c = 2.5;
        let dc: Vec<f64> = vec![c; 4096];
        let psd = welch_psd(&dc, fs, 512, 0.0, Window::Rectangular).unwrap();
        assert!((psd.total_power() - c * c).abs() < 1e-9 * c * c);

        let alt: Vec<f64> = (0..4096).map(|i| if i % 2 == 0 { c } else { -c }).collect();
        let psd = welch_psd(&alt, fs, 512, 0.0, Window::Rectangular).unwrap();
        assert!((psd.total_power() - c * c).abs() < 1e-9 * c * c);
    }

    #[test]
    fn parseval_within_window_bias_for_hann() {
        let series = white_noise(1 << 16, 21);
        let variance =
            series.iter().map(|x| x * x).sum::<f64>() / series.len() as f64;
        let psd = welch_psd(&series, 2.0e5, 1 << 11, 0.5, Window::Hann).unwrap();
        assert!(psd.segments_averaged >= 16);
        let power = psd.total_power();
        assert!(
            (power - variance).abs() / variance < 0.02,
            "power {power} vs variance {variance}"
        );
    }

    #[test]
    fn streaming_chunks_match_one_shot_bitwise() {
        let series = white_noise(1 << 15, 3);
        let one_shot = welch_psd(&series, 1.0e5, 1 << 11, 0.5, Window::Hann).unwrap();
        let mut acc = WelchAccumulator::new(1.0e5, 1 << 11, 0.5, Window::Hann).unwrap();
        for chunk in series.chunks(777) {
            acc.push(chunk);
        }
        let streamed = acc.finish().unwrap();
        assert_eq!(one_shot.segments_averaged, streamed.segments_averaged);
        assert_eq!(one_shot.values, streamed.values);
    }

    #[test]
    fn rbw_reflects_window_noise_bandwidth() {
        let series = white_noise(1 << 14, 5);
        let hann = welch_psd(&series, 1.0e5, 1 << 10, 0.5, Window::Hann).unwrap();
        assert!((hann.rbw_hz - 1.5 * hann.bin_width()).abs() < 1e-12);
        let rect = welch_psd(&series, 1.0e5, 1 << 10, 0.5, Window::Rectangular).unwrap();
        assert!((rect.rbw_hz - rect.bin_width()).abs() < 1e-12);
    }
}
