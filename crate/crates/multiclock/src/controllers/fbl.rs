//! Feedback-linearizing tracker and its exponential error envelope.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trajectory::Trajectory;
use crate::plant::{PendulumParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FblGains {
    #[serde(rename = "K")]
    pub k: [f64; 2],
}

/// ‖e^{A_cl t}‖ ≤ M e^{−λt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub m: f64,
    pub lambda: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FblError {
    #[error("closed-loop matrix is not Hurwitz for K = {0:?}")]
    NotHurwitz([f64; 2]),
}

/// Fraction of the spectral abscissa kept as the decay rate.
const LAMBDA_MARGIN: f64 = 0.05;

pub fn spectral_norm(a: &Matrix2<f64>) -> f64 {
    let ata = a.transpose() * a;
    let (p, q) = (ata.trace(), ata.determinant());
    let disc = (p * p / 4.0 - q).max(0.0).sqrt();
    (p / 2.0 + disc).sqrt()
}

impl FblGains {
    pub fn a_cl(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, -self.k[0], -self.k[1])
    }

    pub fn a_cl_norm(&self) -> f64 {
        spectral_norm(&self.a_cl())
    }

    pub fn envelope(&self) -> Result<Envelope, FblError> {
        if !(self.k[0] > 0.0 && self.k[1] > 0.0) {
            return Err(FblError::NotHurwitz(self.k));
        }
        envelope_of(&self.a_cl()).ok_or(FblError::NotHurwitz(self.k))
    }
}

/// Largest real part of the eigenvalues of `a`.
pub fn spectral_abscissa(a: &Matrix2<f64>) -> f64 {
    let (tr, det) = (a.trace(), a.determinant());
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        tr / 2.0 + disc.sqrt()
    } else {
        tr / 2.0
    }
}

/// λ is the spectral abscissa shrunk by a 5 % margin; M is the supremum of
/// ‖e^{At}‖e^{λt}, sampled up to a time `T` where the sampled function is
/// at most 1. Submultiplicativity then bounds every later window
/// `[kT, (k+1)T]` by the same maximum. `None` when `a` is not Hurwitz.
pub fn envelope_of(a: &Matrix2<f64>) -> Option<Envelope> {
    let alpha = -spectral_abscissa(a);
    if !(alpha > 0.0) {
        return None;
    }
    let lambda = alpha * (1.0 - LAMBDA_MARGIN);
    let g = |t: f64| spectral_norm(&(a * t).exp()) * (lambda * t).exp();
    let mut horizon = 20.0 / (alpha - lambda);
    loop {
        let n = 20_000;
        let step = horizon / n as f64;
        let samples: Vec<f64> = (0..=n).map(|i| g(step * i as f64)).collect();
        let coarse = samples.iter().copied().fold(1.0f64, f64::max);
        let mut m = coarse;
        // Refine every near-maximal sampled peak by golden-section search.
        for i in 1..n {
            if samples[i] >= samples[i - 1] && samples[i] >= samples[i + 1] && samples[i] >= 0.9 * coarse {
                m = m.max(golden_max(&g, step * (i - 1) as f64, step * (i + 1) as f64));
            }
        }
        if g(horizon) <= 1.0 {
            return Some(Envelope { m: m * (1.0 + 1e-9), lambda });
        }
        horizon *= 2.0;
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = f(a).max(f(b));
    for _ in 0..60 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        let (fc, fd) = (f(c), f(d));
        best = best.max(fc).max(fd);
        if fc > fd {
            b = d;
        } else {
            a = c;
        }
    }
    best
}

/// Torque of the tracking law at time `t` after the trajectory start;
/// the flag reports a query past the horizon (final point held).
pub fn fbl_control(x: &State, traj: &Trajectory, t: f64, gains: &FblGains, plant: &PendulumParams) -> (f64, bool) {
    let d = traj.sample(t);
    let e = [x[0] - d.theta, x[1] - d.theta_dot];
    let v = -plant.omega0_sq() * x[0].sin() + d.theta_ddot - gains.k[0] * e[0] - gains.k[1] * e[1];
    (v / plant.input_gain(), d.expired)
}
