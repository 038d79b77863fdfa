//! Piecewise cubic Bézier reference trajectories for the pendulum angle.

/// θ_d(t) on `[0, dt * segments]`, one cubic Bézier per interval with
/// shared endpoints: `points` has `3 * segments + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub points: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub theta: f64,
    pub theta_dot: f64,
    pub theta_ddot: f64,
    /// Set when the query time lies past the horizon; the sample is then
    /// the final point held at rest.
    pub expired: bool,
}

impl Trajectory {
    /// Hermite fit through knot angles and rates sampled every `dt`.
    pub fn from_knots(dt: f64, theta: &[f64], omega: &[f64]) -> Self {
        assert_eq!(theta.len(), omega.len());
        assert!(theta.len() >= 2 && dt > 0.0);
        let mut points = Vec::with_capacity(3 * (theta.len() - 1) + 1);
        points.push(theta[0]);
        for k in 0..theta.len() - 1 {
            points.push(theta[k] + dt * omega[k] / 3.0);
            points.push(theta[k + 1] - dt * omega[k + 1] / 3.0);
            points.push(theta[k + 1]);
        }
        Trajectory { dt, points }
    }

    /// A trajectory resting at `theta` for `segments` intervals.
    pub fn constant(theta: f64, dt: f64, segments: usize) -> Self {
        Trajectory { dt, points: vec![theta; 3 * segments + 1] }
    }

    pub fn segments(&self) -> usize {
        (self.points.len() - 1) / 3
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.segments() as f64
    }

    pub fn sample(&self, t: f64) -> Sample {
        let n = self.segments();
        if t > self.horizon() {
            let theta = self.points[3 * n];
            return Sample { theta, theta_dot: 0.0, theta_ddot: 0.0, expired: true };
        }
        let t = t.max(0.0);
        let k = ((t / self.dt).floor() as usize).min(n - 1);
        let s = (t - k as f64 * self.dt) / self.dt;
        let p = &self.points[3 * k..3 * k + 4];
        let u = 1.0 - s;
        let theta = u * u * u * p[0] + 3.0 * u * u * s * p[1] + 3.0 * u * s * s * p[2] + s * s * s * p[3];
        let d1 = 3.0 * (u * u * (p[1] - p[0]) + 2.0 * u * s * (p[2] - p[1]) + s * s * (p[3] - p[2]));
        let d2 = 6.0 * (u * (p[2] - 2.0 * p[1] + p[0]) + s * (p[3] - 2.0 * p[2] + p[1]));
        Sample { theta, theta_dot: d1 / self.dt, theta_ddot: d2 / (self.dt * self.dt), expired: false }
    }

    /// State (θ_d, θ̇_d) at time `t` after the trajectory start.
    pub fn state(&self, t: f64) -> [f64; 2] {
        let s = self.sample(t);
        [s.theta, s.theta_dot]
    }

    /// Grid instants `0, h, 2h, ...` covering the horizon, endpoint included.
    pub fn grid(&self, h: f64) -> impl Iterator<Item = f64> {
        let horizon = self.horizon();
        let steps = (horizon / h).round() as usize;
        (0..=steps).map(move |i| (i as f64 * h).min(horizon))
    }
}
