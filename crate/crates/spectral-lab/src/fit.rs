use crate::error::SpectralError;
use crate::psd::Psd;
use nalgebra::{Cholesky, DMatrix, DVector};
use physics_core::{Environment, BOLTZMANN};
use serde::{Deserialize, Serialize};

/// Starting point for one Brownian mode: SI units, angular rates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModeGuess {
    /// Effective mass in kg.
    pub mass: f64,
    /// Energy damping rate Γ in rad/s.
    pub damping: f64,
    /// Resonance ω_m in rad/s.
    pub resonance: f64,
}

/// Starting point for a full spectrum fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumGuess {
    pub modes: Vec<ModeGuess>,
    /// White noise floor in m²/Hz (single-sided).
    pub noise_floor: f64,
}

/// One fitted mode with absolute 1σ standard errors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FittedMode {
    pub mass: f64,
    pub damping: f64,
    pub resonance: f64,
    pub mass_err: f64,
    pub damping_err: f64,
    pub resonance_err: f64,
}

/// Result of a weighted multi-Lorentzian fit at fixed temperature.
///
/// When `converged` is false the fields hold the last iterate, not a
/// trustworthy estimate; heed the flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFit {
    pub modes: Vec<FittedMode>,
    /// Fitted white floor in m²/Hz (single-sided).
    pub noise_floor: f64,
    pub noise_floor_err: f64,
    /// Bath temperature the displacement scale was anchored to (kelvin).
    /// Displacement spectra constrain only T/m per mode, so the fit holds
    /// the temperature fixed and extracts masses.
    pub assumed_temperature: f64,
    /// √Σr² of the relative residuals at the optimum.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SpectrumFit {
    /// True when every parameter of mode `j` is determined better than its
    /// own magnitude. A floor-only spectrum fit with a phantom mode fails
    /// this even if the optimizer technically settled.
    pub fn mode_resolved(&self, j: usize) -> bool {
        let m = &self.modes[j];
        [
            (m.mass, m.mass_err),
            (m.damping, m.damping_err),
            (m.resonance, m.resonance_err),
        ]
        .iter()
        .all(|(value, err)| err.is_finite() && err < value)
    }
}

/// Evaluate the model and, optionally, its log-parameter gradient rows.
///
/// Model (single-sided, hertz axis, ω = 2πf):
///   S(f) = S_N + Σ_j 4·k_B·T·Γ_j / (m_j·[(ω_j² − ω²)² + Γ_j²ω²])
struct ModelEval<'a> {
    theta: &'a [f64],
    n_modes: usize,
    temperature: f64,
}

impl ModelEval<'_> {
    fn value(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let mut s = self.theta[3 * self.n_modes].exp();
        for j in 0..self.n_modes {
            let mass = self.theta[3 * j].exp();
            let gamma = self.theta[3 * j + 1].exp();
            let wm = self.theta[3 * j + 2].exp();
            let det = wm * wm - w2;
            let d = det * det + gamma * gamma * w2;
            s += 4.0 * BOLTZMANN * self.temperature * gamma / (mass * d);
        }
        s
    }

    /// Writes ∂S/∂θ_k into `grad` and returns S.
    fn value_and_grad(&self, omega: f64, grad: &mut [f64]) -> f64 {
        let w2 = omega * omega;
        let floor = self.theta[3 * self.n_modes].exp();
        let mut s = floor;
        grad[3 * self.n_modes] = floor;
        for j in 0..self.n_modes {
            let mass = self.theta[3 * j].exp();
            let gamma = self.theta[3 * j + 1].exp();
            let wm = self.theta[3 * j + 2].exp();
            let det = wm * wm - w2;
            let d = det * det + gamma * gamma * w2;
            let line = 4.0 * BOLTZMANN * self.temperature * gamma / (mass * d);
            s += line;
            grad[3 * j] = -line;
            grad[3 * j + 1] = line * (1.0 - 2.0 * gamma * gamma * w2 / d);
            grad[3 * j + 2] = -line * 4.0 * wm * wm * det / d;
        }
        s
    }
}

/// Weighted nonlinear least squares of a sum of Brownian Lorentzians plus a
/// white floor, Levenberg–Marquardt on log-parameters with relative
/// (1/model²-weighted) residuals. The temperature is held fixed at the bath
/// value from `env`. Initial guesses within a factor of ~3 of the truth are
/// the documented requirement for reliable convergence.
pub fn fit_spectrum(
    psd: &Psd,
    n_modes: usize,
    env: &Environment,
    guess: &SpectrumGuess,
) -> Result<SpectrumFit, SpectralError> {
    if n_modes == 0 {
        return Err(SpectralError::invalid("n_modes", "must be ≥ 1"));
    }
    if guess.modes.len() != n_modes {
        return Err(SpectralError::invalid(
            "initial_guesses",
            format!("{} mode guesses for n_modes = {n_modes}", guess.modes.len()),
        ));
    }
    let n_params = 3 * n_modes + 1;
    if psd.values.len() <= n_params {
        return Err(SpectralError::invalid(
            "psd",
            format!(
                "{} bins cannot constrain {n_params} parameters",
                psd.values.len()
            ),
        ));
    }
    let mut theta = Vec::with_capacity(n_params);
    for (j, g) in guess.modes.iter().enumerate() {
        for (name, v) in [("mass", g.mass), ("damping", g.damping), ("resonance", g.resonance)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SpectralError::invalid(
                    "initial_guesses",
                    format!("mode {j} {name} must be finite and positive"),
                ));
            }
        }
        theta.extend_from_slice(&[g.mass.ln(), g.damping.ln(), g.resonance.ln()]);
    }
    if !(guess.noise_floor > 0.0) || !guess.noise_floor.is_finite() {
        return Err(SpectralError::invalid(
            "initial_guesses",
            "noise floor guess must be finite and positive",
        ));
    }
    theta.push(guess.noise_floor.ln());

    let omegas: Vec<f64> = psd
        .frequency_hz
        .iter()
        .map(|f| 2.0 * std::f64::consts::PI * f)
        .collect();
    let data = &psd.values;
    let n_pts = data.len();

    let cost_of = |theta: &[f64]| -> f64 {
        let eval = ModelEval {
            theta,
            n_modes,
            temperature: env.bath_temperature,
        };
        omegas
            .iter()
            .zip(data.iter())
            .map(|(&w, &d)| {
                let s = eval.value(w);
                let r = (d - s) / s;
                r * r
            })
            .sum()
    };

    let mut cost = cost_of(&theta);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let max_iterations = 300;

    let mut jt_j = DMatrix::<f64>::zeros(n_params, n_params);
    let mut jt_r = DVector::<f64>::zeros(n_params);
    let mut grad = vec![0.0; n_params];

    while iterations < max_iterations {
        iterations += 1;

        // Accumulate normal equations with J_ik = (∂S_i/∂θ_k)/S_i and
        // r_i = (d_i − S_i)/S_i.
        jt_j.fill(0.0);
        jt_r.fill(0.0);
        let eval = ModelEval {
            theta: &theta,
            n_modes,
            temperature: env.bath_temperature,
        };
        for (&w, &d) in omegas.iter().zip(data.iter()) {
            let s = eval.value_and_grad(w, &mut grad);
            let r = (d - s) / s;
            for k in 0..n_params {
                let gk = grad[k] / s;
                jt_r[k] += gk * r;
                for l in 0..=k {
                    jt_j[(k, l)] += gk * grad[l] / s;
                }
            }
        }
        for k in 0..n_params {
            for l in (k + 1)..n_params {
                jt_j[(k, l)] = jt_j[(l, k)];
            }
        }

        // Damped step, retrying with stiffer damping until the cost drops.
        let max_diag = (0..n_params).map(|k| jt_j[(k, k)]).fold(0.0, f64::max);
        let mut stepped = false;
        while lambda < 1e14 {
            let mut damped = jt_j.clone();
            for k in 0..n_params {
                damped[(k, k)] += lambda * jt_j[(k, k)].max(1e-12 * max_diag.max(1e-300));
            }
            if let Some(chol) = Cholesky::new(damped) {
                let delta = chol.solve(&jt_r);
                let trial: Vec<f64> = theta
                    .iter()
                    .zip(delta.iter())
                    .map(|(t, d)| t + d)
                    .collect();
                if trial.iter().all(|t| t.is_finite()) {
                    let trial_cost = cost_of(&trial);
                    if trial_cost.is_finite() && trial_cost <= cost {
                        let step = delta.amax();
                        let drop = (cost - trial_cost) / cost.max(1e-300);
                        theta = trial;
                        cost = trial_cost;
                        lambda = (lambda / 3.0).max(1e-12);
                        stepped = true;
                        if step < 1e-10 || drop < 1e-14 {
                            converged = true;
                        }
                        break;
                    }
                }
            }
            lambda *= 4.0;
        }
        if !stepped || converged {
            break;
        }
    }

    // Standard errors from the quadratic model at the final iterate:
    // cov(θ) = (JᵀJ)⁻¹ · s², s² = Σr²/(n − p), propagated out of log space.
    jt_j.fill(0.0);
    let eval = ModelEval {
        theta: &theta,
        n_modes,
        temperature: env.bath_temperature,
    };
    for &w in &omegas {
        let s = eval.value_and_grad(w, &mut grad);
        for k in 0..n_params {
            let gk = grad[k] / s;
            for l in 0..=k {
                jt_j[(k, l)] += gk * grad[l] / s;
            }
        }
    }
    for k in 0..n_params {
        for l in (k + 1)..n_params {
            jt_j[(k, l)] = jt_j[(l, k)];
        }
    }
    let s2 = cost / (n_pts - n_params) as f64;
    let log_errs: Vec<f64> = match Cholesky::new(jt_j.clone()) {
        Some(chol) => {
            let cov = chol.inverse() * s2;
            (0..n_params).map(|k| cov[(k, k)].max(0.0).sqrt()).collect()
        }
        None => vec![f64::INFINITY; n_params],
    };

    let modes = (0..n_modes)
        .map(|j| {
            let mass = theta[3 * j].exp();
            let damping = theta[3 * j + 1].exp();
            let resonance = theta[3 * j + 2].exp();
            FittedMode {
                mass,
                damping,
                resonance,
                mass_err: mass * log_errs[3 * j],
                damping_err: damping * log_errs[3 * j + 1],
                resonance_err: resonance * log_errs[3 * j + 2],
            }
        })
        .collect();
    let noise_floor = theta[3 * n_modes].exp();
    Ok(SpectrumFit {
        modes,
        noise_floor,
        noise_floor_err: noise_floor * log_errs[3 * n_modes],
        assumed_temperature: env.bath_temperature,
        residual_norm: cost.sqrt(),
        converged,
        iterations,
    })
}
