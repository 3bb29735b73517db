//! Derivative feedback realized as a delayed displacement measurement.
//!
//! Differentiating a noisy measurement amplifies high-frequency noise, so
//! the controller instead exploits the narrowband character of the
//! oscillator: delaying the position signal by a quarter of a resonance
//! period turns cos(ω_m t) into sin(ω_m t) ∝ −ẋ/ω_m. Scaling by +g·m·Γ·ω_m
//! then yields the cold-damping force −g·m·Γ·ẋ for on-resonance motion.
//! When several modes share the sensor, a bandpass centered on the
//! controlled mode keeps the quarter-period trick from mis-phasing the
//! bystanders.

use crate::error::SimError;
use physics_core::{FeedbackConfig, MechanicalMode};
use std::collections::VecDeque;

/// Fixed-length FIFO of past sensor samples.
#[derive(Debug, Clone)]
pub struct DelayLine {
    buf: VecDeque<f64>,
    len: usize,
}

impl DelayLine {
    /// A line that reproduces its input `delay_samples` steps later.
    /// Until filled, reads return the zero initial contents.
    pub fn new(delay_samples: usize) -> Self {
        let len = delay_samples.max(1);
        DelayLine {
            buf: VecDeque::from(vec![0.0; len]),
            len,
        }
    }

    /// Push the newest sample and pop the one from `delay_samples` ago.
    pub fn push_and_read(&mut self, sample: f64) -> f64 {
        self.buf.push_back(sample);
        // Length is maintained at `len`, so exactly one element pops.
        self.buf.pop_front().unwrap_or(0.0)
    }

    pub fn delay_samples(&self) -> usize {
        self.len
    }
}

/// Second-order resonator bandpass (constant 0 dB peak gain) in direct
/// form I. At the center frequency the filter has unit gain and zero
/// phase, so it is transparent to the controlled mode.
#[derive(Debug, Clone)]
pub struct Biquad {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl Biquad {
    /// `center_hz` and `width_hz` are the passband center and full width
    /// (−3 dB) in hertz; `sample_rate` in Hz.
    pub fn bandpass(center_hz: f64, width_hz: f64, sample_rate: f64) -> Result<Self, SimError> {
        if !(center_hz > 0.0 && center_hz < 0.5 * sample_rate) {
            return Err(SimError::invalid(
                "bandpass_center",
                "center frequency must lie below Nyquist",
            ));
        }
        if !(width_hz > 0.0 && width_hz < center_hz) {
            return Err(SimError::invalid(
                "bandpass_width",
                "width must be positive and below the center frequency",
            ));
        }
        let w0 = 2.0 * std::f64::consts::PI * center_hz / sample_rate;
        let q = center_hz / width_hz;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        Ok(Biquad {
            b0: alpha / a0,
            b2: -alpha / a0,
            a1: -2.0 * w0.cos() / a0,
            a2: (1.0 - alpha) / a0,
            x1: 0.0,
            x2: 0.0,
            y1: 0.0,
            y2: 0.0,
        })
    }

    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b2 * self.x2 - self.a1 * self.y1 - self.a2 * self.y2;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Runtime state of the feedback loop: optional mode-selection filter
/// followed by the quarter-period delay and the gain stage.
#[derive(Debug, Clone)]
pub struct FeedbackLoop {
    /// +g·m·Γ·ω_m. Combined with the quarter-period delay this produces
    /// −g·m·Γ·ẋ for a tone at the controlled resonance.
    coefficient: f64,
    delay: DelayLine,
    bandpass: Option<Biquad>,
    enabled: bool,
}

impl FeedbackLoop {
    /// Build the loop for the controlled `mode`. A bandpass is inserted
    /// only when `select_mode` is set (multi-mode sensing); single-mode
    /// runs keep the raw sensor path so the loop adds no filter phase.
    pub fn new(
        config: &FeedbackConfig,
        mode: &MechanicalMode,
        sample_rate: f64,
        select_mode: bool,
    ) -> Result<Self, SimError> {
        let active = config.enabled && config.gain != 0.0;
        let resonance_hz = mode.resonance / (2.0 * std::f64::consts::PI);
        let period_samples = sample_rate / resonance_hz;
        let requested = config.delay * period_samples;
        let delay_samples = requested.round() as i64;
        if active && delay_samples < 1 {
            return Err(SimError::DelayTooShort {
                requested_samples: requested,
            });
        }
        let bandpass = if active && select_mode {
            let center = if config.bandpass_center > 0.0 {
                config.bandpass_center
            } else {
                mode.resonance
            } / (2.0 * std::f64::consts::PI);
            let width = if config.bandpass_width > 0.0 {
                config.bandpass_width
            } else {
                20.0 * mode.damping
            } / (2.0 * std::f64::consts::PI);
            Some(Biquad::bandpass(center, width, sample_rate)?)
        } else {
            None
        };
        Ok(FeedbackLoop {
            coefficient: config.gain * mode.effective_mass * mode.damping * mode.resonance,
            delay: DelayLine::new(delay_samples.max(1) as usize),
            bandpass,
            enabled: active,
        })
    }

    /// Ingest the current in-loop sensor sample and return the force to
    /// hold over the next step. Returns 0 while disabled, but still clocks
    /// the delay line so enabling mid-run would not replay stale history.
    pub fn force_from_sample(&mut self, sensor_sample: f64) -> f64 {
        let filtered = match self.bandpass.as_mut() {
            Some(f) => f.process(sensor_sample),
            None => sensor_sample,
        };
        let delayed = self.delay.push_and_read(filtered);
        if self.enabled {
            self.coefficient * delayed
        } else {
            0.0
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn delay_samples(&self) -> usize {
        self.delay.delay_samples()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn delay_line_reproduces_input_shifted() {
        let mut line = DelayLine::new(3);
        let input = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut out = Vec::new();
        for &s in &input {
            out.push(line.push_and_read(s));
        }
        assert_eq!(out, vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn bandpass_is_transparent_at_center() {
        let fs = 1.0e6;
        let f0 = 1.0e4;
        let mut filt = Biquad::bandpass(f0, 400.0, fs).unwrap();
        // Drive with a unit tone at f0 and compare the steady-state output
        // against the input: unit gain, zero phase.
        let n = 200_000;
        let mut max_err: f64 = 0.0;
        for i in 0..n {
            let t = i as f64 / fs;
            let x = (2.0 * PI * f0 * t).sin();
            let y = filt.process(x);
            if i > n / 2 {
                max_err = max_err.max((y - x).abs());
            }
        }
        assert!(max_err < 1e-6, "center-tone distortion {max_err}");
    }

    #[test]
    fn bandpass_rejects_far_tone() {
        let fs = 1.0e6;
        let mut filt = Biquad::bandpass(1.0e4, 400.0, fs).unwrap();
        let f_far = 5.0e4;
        let n = 200_000;
        let mut max_out: f64 = 0.0;
        for i in 0..n {
            let t = i as f64 / fs;
            let y = filt.process((2.0 * PI * f_far * t).sin());
            if i > n / 2 {
                max_out = max_out.max(y.abs());
            }
        }
        assert!(max_out < 0.05, "far tone leaked {max_out}");
    }

    #[test]
    fn quarter_period_delay_gives_velocity_damping_for_tone() {
        // For x = A·cos(ω t): force = +gmΓω·x(t − T/4) = +gmΓω·A·cos(ωt − π/2)
        // = gmΓω·A·sin(ωt) = −g·m·Γ·ẋ. Exercised with an exact integer
        // quarter period so the delay has no rounding error.
        let fs = 1.0e6;
        let f0 = 1.0e4; // quarter period = 25 samples exactly
        let mode =
            MechanicalMode::new("m", 1.0e-12, 2.0 * PI * f0, 2.0 * PI * 20.0).unwrap();
        let config = FeedbackConfig::new(3.0, 0.25).unwrap();
        let mut lp = FeedbackLoop::new(&config, &mode, fs, false).unwrap();
        assert_eq!(lp.delay_samples(), 25);
        let amp = 1.0e-9;
        let gm = 3.0 * mode.effective_mass * mode.damping;
        let mut worst: f64 = 0.0;
        for i in 0..10_000 {
            let t = i as f64 / fs;
            let force = lp.force_from_sample(amp * (2.0 * PI * f0 * t).cos());
            if i > 100 {
                let velocity = -amp * 2.0 * PI * f0 * (2.0 * PI * f0 * t).sin();
                let ideal = -gm * velocity;
                worst = worst.max((force - ideal).abs() / (gm * amp * 2.0 * PI * f0));
            }
        }
        assert!(worst < 1e-12, "tone damping mismatch {worst}");
    }

    #[test]
    fn disabled_loop_outputs_zero() {
        let mode =
            MechanicalMode::new("m", 1.0e-12, 2.0 * PI * 1.0e4, 2.0 * PI * 20.0).unwrap();
        let mut lp =
            FeedbackLoop::new(&FeedbackConfig::off(), &mode, 1.0e6, false).unwrap();
        for i in 0..100 {
            assert_eq!(lp.force_from_sample(i as f64), 0.0);
        }
    }

    #[test]
    fn sub_sample_delay_is_rejected_when_active() {
        let mode =
            MechanicalMode::new("m", 1.0e-12, 2.0 * PI * 1.0e4, 2.0 * PI * 20.0).unwrap();
        // 0.001 of a 100 µs period at 1 MHz is 0.1 samples → rounds to 0.
        let config = FeedbackConfig::new(1.0, 0.001).unwrap();
        let err = FeedbackLoop::new(&config, &mode, 1.0e6, false).unwrap_err();
        assert!(matches!(err, SimError::DelayTooShort { .. }));
    }
}
