//! Inverted pendulum dynamics and RK4 integration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `(θ, θ̇)`, with θ = 0 upright.
pub type State = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumParams {
    pub m: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub g_c: f64,
    #[serde(rename = "U")]
    pub u_max: f64,
    pub theta_max: f64,
    pub omega_max: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        PendulumParams {
            m: 1.0,
            length: 1.0,
            g_c: 9.81,
            u_max: 12.0,
            theta_max: std::f64::consts::FRAC_PI_4,
            omega_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lipschitz {
    pub l_f: f64,
    pub l_g: f64,
    /// Bound on ‖g(x)‖.
    pub g: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("non-finite state {state:?} after stepping with u = {u}")]
    NonFiniteState { state: State, u: f64 },
    #[error("invalid plant parameters: {0}")]
    Invalid(String),
}

impl PendulumParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let fields = [
            ("m", self.m),
            ("L", self.length),
            ("g_c", self.g_c),
            ("U", self.u_max),
            ("theta_max", self.theta_max),
            ("omega_max", self.omega_max),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlantError::Invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// g_c / L.
    pub fn omega0_sq(&self) -> f64 {
        self.g_c / self.length
    }

    /// 1 / (m L²).
    pub fn input_gain(&self) -> f64 {
        1.0 / (self.m * self.length * self.length)
    }

    /// `(f(x), g(x))` of ẋ = f(x) + g(x) u.
    pub fn drift_and_actuation(&self, x: &State) -> ([f64; 2], [f64; 2]) {
        ([x[1], self.omega0_sq() * x[0].sin()], [0.0, self.input_gain()])
    }

    pub fn field(&self, x: &State, u: f64) -> [f64; 2] {
        let (f, g) = self.drift_and_actuation(x);
        [f[0] + g[0] * u, f[1] + g[1] * u]
    }

    pub fn saturate(&self, u: f64) -> f64 {
        u.clamp(-self.u_max, self.u_max)
    }

    /// One RK4 step with the input held at `u` (saturated to ±U).
    pub fn step(&self, x: &State, u: f64, h: f64) -> Result<State, PlantError> {
        let us = self.saturate(u);
        if us != u {
            log::warn!("input {u} saturated to {us}");
        }
        let add = |a: &State, k: &[f64; 2], s: f64| [a[0] + s * k[0], a[1] + s * k[1]];
        let k1 = self.field(x, us);
        let k2 = self.field(&add(x, &k1, h / 2.0), us);
        let k3 = self.field(&add(x, &k2, h / 2.0), us);
        let k4 = self.field(&add(x, &k3, h), us);
        let next = [
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(PlantError::NonFiniteState { state: next, u: us })
        }
    }

    /// Jacobian bound of f over the state box, Lipschitz constant of g
    /// (zero: g is constant) and the bound G on ‖g‖.
    pub fn lipschitz_constants(&self) -> Lipschitz {
        Lipschitz { l_f: 1f64.max(self.omega0_sq()), l_g: 0.0, g: self.input_gain() }
    }

    pub fn in_box(&self, x: &State) -> bool {
        x[0].abs() <= self.theta_max && x[1].abs() <= self.omega_max
    }

    /// sup ‖f(x) + g(x)u‖ over the state box and |u| ≤ U.
    pub fn max_speed(&self) -> f64 {
        let acc = self.omega0_sq() * self.theta_max.min(std::f64::consts::FRAC_PI_2).sin() + self.input_gain() * self.u_max;
        self.omega_max.hypot(acc)
    }

    /// Total energy per unit m L² of the unforced pendulum; conserved by
    /// the exact flow.
    pub fn energy(&self, x: &State) -> f64 {
        0.5 * x[1] * x[1] + self.omega0_sq() * x[0].cos()
    }
}
