//! One-step updates for a single damped mode driven by white thermal force
//! plus a zero-order-held external force.
//!
//! The exact update discretizes the linear stochastic system
//!   d[x,v] = A[x,v]dt + [0, F/m]dt + [0, √(2k_BTΓ/m)]dW
//! with its exact one-step transition matrix Φ = e^{A·dt} and exact process
//! covariance, so the free oscillator statistics carry no timestep bias at
//! any dt. The semi-implicit (symplectic Euler) scheme is first-order and
//! serves as an independent cross-check.

use physics_core::{MechanicalMode, BOLTZMANN};

/// Mode state: displacement (m) and velocity (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeState {
    pub x: f64,
    pub v: f64,
}

/// Precomputed exact one-step propagator for a fixed (mode, dt, T).
#[derive(Debug, Clone)]
pub struct ExactGaussian {
    phi: [[f64; 2]; 2],
    /// Cholesky factor of the one-step process covariance.
    chol: [[f64; 2]; 2],
    /// 1/(m·ω_m²): static compliance mapping a held force to its fixed point.
    compliance: f64,
    /// Stationary standard deviations, for drawing initial conditions.
    sigma_x: f64,
    sigma_v: f64,
}

impl ExactGaussian {
    pub fn new(mode: &MechanicalMode, temperature: f64, dt: f64) -> Self {
        let omega = mode.resonance;
        let gamma = mode.damping;
        let mass = mode.effective_mass;
        let a = 0.5 * gamma;
        // Underdamped by construction (mode validation enforces ω_m > Γ/2...
        // specifically quality factor > 1/2).
        let wd = (omega * omega - a * a).sqrt();
        let e = (-a * dt).exp();
        let c = (wd * dt).cos();
        let s = (wd * dt).sin();
        let phi = [
            [e * (c + a / wd * s), e * s / wd],
            [-omega * omega * e * s / wd, e * (c - a / wd * s)],
        ];

        // Stationary covariance P = diag(k_B T/(mω²), k_B T/m); the one-step
        // process covariance follows from stationarity: Q = P − Φ P Φᵀ.
        let p_x = BOLTZMANN * temperature / (mass * omega * omega);
        let p_v = BOLTZMANN * temperature / mass;
        let q00 = p_x - (phi[0][0] * phi[0][0] * p_x + phi[0][1] * phi[0][1] * p_v);
        let q01 = -(phi[0][0] * phi[1][0] * p_x + phi[0][1] * phi[1][1] * p_v);
        let q11 = p_v - (phi[1][0] * phi[1][0] * p_x + phi[1][1] * phi[1][1] * p_v);

        // 2×2 Cholesky, tolerant of the T = 0 degenerate case.
        let l00 = q00.max(0.0).sqrt();
        let l10 = if l00 > 0.0 { q01 / l00 } else { 0.0 };
        let l11 = (q11 - l10 * l10).max(0.0).sqrt();
        ExactGaussian {
            phi,
            chol: [[l00, 0.0], [l10, l11]],
            compliance: 1.0 / (mass * omega * omega),
            sigma_x: p_x.sqrt(),
            sigma_v: p_v.sqrt(),
        }
    }

    /// Advance one step under a force held constant across the step.
    /// `z` are two independent standard-normal draws.
    pub fn step(&self, state: ModeState, force: f64, z: [f64; 2]) -> ModeState {
        // The held force shifts the fixed point to (F/(mω²), 0); propagate
        // the deviation from it, then add the process noise.
        let xp = force * self.compliance;
        let dx = state.x - xp;
        let dv = state.v;
        ModeState {
            x: xp + self.phi[0][0] * dx + self.phi[0][1] * dv + self.chol[0][0] * z[0],
            v: self.phi[1][0] * dx
                + self.phi[1][1] * dv
                + self.chol[1][0] * z[0]
                + self.chol[1][1] * z[1],
        }
    }

    /// Draw from the zero-force stationary (thermal equilibrium)
    /// distribution; exact initial conditions remove any equilibration
    /// transient for feedback-off runs.
    pub fn stationary_draw(&self, z: [f64; 2]) -> ModeState {
        ModeState {
            x: self.sigma_x * z[0],
            v: self.sigma_v * z[1],
        }
    }
}

/// Precomputed semi-implicit (symplectic) Euler update.
#[derive(Debug, Clone)]
pub struct SemiImplicitEuler {
    dt: f64,
    omega_sq: f64,
    gamma: f64,
    inv_mass: f64,
    /// √(2k_BTΓ/m · dt): standard deviation of the per-step velocity kick.
    kick_sigma: f64,
}

impl SemiImplicitEuler {
    pub fn new(mode: &MechanicalMode, temperature: f64, dt: f64) -> Self {
        let accel_psd = 2.0 * BOLTZMANN * temperature * mode.damping / mode.effective_mass;
        SemiImplicitEuler {
            dt,
            omega_sq: mode.resonance * mode.resonance,
            gamma: mode.damping,
            inv_mass: 1.0 / mode.effective_mass,
            kick_sigma: (accel_psd * dt).sqrt(),
        }
    }

    /// Advance one step: velocity first (with the thermal kick), then
    /// position from the updated velocity. `kick` is the unit-variance
    /// Gaussian draw for the thermal impulse; pass a Brownian-bridge split
    /// of the same Wiener path to study timestep convergence under common
    /// random numbers.
    pub fn step(&self, state: ModeState, force: f64, kick: f64) -> ModeState {
        let accel = -self.omega_sq * state.x - self.gamma * state.v + force * self.inv_mass;
        let v = state.v + self.dt * accel + self.kick_sigma * kick;
        ModeState {
            x: state.x + self.dt * v,
            v,
        }
    }
}
