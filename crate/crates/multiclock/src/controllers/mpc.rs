//! Condensed linear MPC about the upright equilibrium.
//!
//! Decision vector `z = (x₀, u₀, …, u_{N−1})`. The start state is free in
//! the box `x̂ ⊕ 𝓔` (intersected with the state box), states follow the
//! exactly discretized linearization, the terminal state is pinned to the
//! origin and the cost is Σ xₖᵀQxₖ + R uₖ².

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::qp::{self, Kkt, Qp, QpError, QpOptions};
use super::trajectory::Trajectory;
use crate::plant::{PendulumParams, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpcConfig {
    /// Horizon length in seconds.
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub steps: usize,
    #[serde(rename = "Q")]
    pub q: [f64; 2],
    #[serde(rename = "R")]
    pub r: f64,
    /// Input bound used by the planner (at most the plant's U).
    pub u_max: f64,
    /// Half-widths of the planner's state box.
    pub state_box: [f64; 2],
    /// Half-widths of the box 𝓔 around the goal; the plan may start
    /// anywhere in `x̂ ⊕ 𝓔`.
    pub e_radius: [f64; 2],
    pub eps_qp: f64,
    pub max_iter: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpcError {
    #[error("MPC problem infeasible")]
    Infeasible,
    #[error("MPC solver hit its iteration limit ({0})")]
    IterLimit(usize),
    #[error("invalid MPC configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct MpcSolution {
    pub trajectory: Trajectory,
    /// Discrete states `x₀ … x_N`.
    pub states: Vec<State>,
    pub inputs: Vec<f64>,
    pub cost: f64,
    pub kkt: Kkt,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Mpc {
    pub cfg: MpcConfig,
    pub ad: Matrix2<f64>,
    pub bd: Vector2<f64>,
    // x_k = maps[k] * z, k = 0..=N, each 2 x (2 + N)
    maps: Vec<DMatrix<f64>>,
    hessian: DMatrix<f64>,
    // inequality rows that do not depend on x̂: state box for k = 1..N-1 and input box
    static_a: DMatrix<f64>,
    static_b: DVector<f64>,
}

/// Zero-order-hold discretization of ẋ = Ax + Bu over `dt`.
pub fn discretize(a: &Matrix2<f64>, b: &Vector2<f64>, dt: f64) -> (Matrix2<f64>, Vector2<f64>) {
    let mut big = nalgebra::Matrix3::zeros();
    big.fixed_view_mut::<2, 2>(0, 0).copy_from(&(a * dt));
    big.fixed_view_mut::<2, 1>(0, 2).copy_from(&(b * dt));
    let e = big.exp();
    (e.fixed_view::<2, 2>(0, 0).into(), e.fixed_view::<2, 1>(0, 2).into())
}

impl Mpc {
    pub fn new(cfg: MpcConfig, plant: &PendulumParams) -> Result<Self, MpcError> {
        let n = cfg.steps;
        if n == 0 || !(cfg.horizon > 0.0) {
            return Err(MpcError::Invalid("horizon and steps must be positive".into()));
        }
        if !(cfg.r > 0.0) || cfg.q.iter().any(|q| !(*q >= 0.0)) {
            return Err(MpcError::Invalid("need Q >= 0 and R > 0".into()));
        }
        if !(cfg.u_max > 0.0 && cfg.u_max <= plant.u_max) {
            return Err(MpcError::Invalid(format!("u_max must lie in (0, U = {}]", plant.u_max)));
        }
        if cfg.e_radius.iter().any(|r| !(*r >= 0.0)) {
            return Err(MpcError::Invalid("box radii must be nonnegative".into()));
        }
        let a = Matrix2::new(0.0, 1.0, plant.omega0_sq(), 0.0);
        let b = Vector2::new(0.0, plant.input_gain());
        let (ad, bd) = discretize(&a, &b, cfg.horizon / n as f64);

        let dim = 2 + n;
        let mut maps = Vec::with_capacity(n + 1);
        let mut m = DMatrix::zeros(2, dim);
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        maps.push(m.clone());
        for k in 0..n {
            let ad_dyn = DMatrix::from_column_slice(2, 2, ad.as_slice());
            let mut next = &ad_dyn * &m;
            next[(0, 2 + k)] += bd[0];
            next[(1, 2 + k)] += bd[1];
            maps.push(next.clone());
            m = next;
        }

        let qm = DMatrix::from_diagonal(&DVector::from_row_slice(&cfg.q));
        let mut hessian = DMatrix::zeros(dim, dim);
        for mk in maps.iter().take(n) {
            hessian += mk.transpose() * &qm * mk;
        }
        for k in 0..n {
            hessian[(2 + k, 2 + k)] += cfg.r;
        }
        hessian *= 2.0;

        let rows = 4 * (n - 1) + 2 * n;
        let mut static_a = DMatrix::zeros(rows, dim);
        let mut static_b = DVector::zeros(rows);
        let mut r = 0;
        for mk in maps.iter().take(n).skip(1) {
            for i in 0..2 {
                for s in [1.0, -1.0] {
                    static_a.row_mut(r).copy_from(&(mk.row(i) * s));
                    static_b[r] = cfg.state_box[i];
                    r += 1;
                }
            }
        }
        for k in 0..n {
            for s in [1.0, -1.0] {
                static_a[(r, 2 + k)] = s;
                static_b[r] = cfg.u_max;
                r += 1;
            }
        }
        Ok(Mpc { cfg, ad, bd, maps, hessian, static_a, static_b })
    }

    pub fn dt(&self) -> f64 {
        self.cfg.horizon / self.cfg.steps as f64
    }

    fn problem(&self, x0_lo: [f64; 2], x0_hi: [f64; 2], fixed: Option<State>) -> Qp {
        let n = self.cfg.steps;
        let dim = 2 + n;
        let n_eq = if fixed.is_some() { 4 } else { 2 };
        let mut a_eq = DMatrix::zeros(n_eq, dim);
        let mut b_eq = DVector::zeros(n_eq);
        a_eq.rows_mut(0, 2).copy_from(&self.maps[n]);
        if let Some(p) = fixed {
            a_eq[(2, 0)] = 1.0;
            a_eq[(3, 1)] = 1.0;
            b_eq[2] = p[0];
            b_eq[3] = p[1];
        }
        let extra = if fixed.is_some() { 0 } else { 4 };
        let rows = self.static_a.nrows() + extra;
        let mut a_in = DMatrix::zeros(rows, dim);
        let mut b_in = DVector::zeros(rows);
        for i in 0..2 {
            if fixed.is_none() {
                a_in[(2 * i, i)] = 1.0;
                b_in[2 * i] = x0_hi[i];
                a_in[(2 * i + 1, i)] = -1.0;
                b_in[2 * i + 1] = -x0_lo[i];
            }
        }
        a_in.rows_mut(extra, self.static_a.nrows()).copy_from(&self.static_a);
        b_in.rows_mut(extra, self.static_b.len()).copy_from(&self.static_b);
        Qp { h: self.hessian.clone(), c: DVector::zeros(dim), a_eq, b_eq, a_in, b_in }
    }

    fn run(&self, qp: &Qp) -> Result<MpcSolution, MpcError> {
        let opts = QpOptions { tol: self.cfg.eps_qp, max_iter: self.cfg.max_iter };
        let sol = qp::solve(qp, &opts).map_err(|e| match e {
            QpError::IterLimit { iterations } => MpcError::IterLimit(iterations),
            QpError::Infeasible { .. } => MpcError::Infeasible,
            other => MpcError::Invalid(other.to_string()),
        })?;
        let n = self.cfg.steps;
        let states: Vec<State> = self
            .maps
            .iter()
            .map(|m| {
                let x = m * &sol.z;
                [x[0], x[1]]
            })
            .collect();
        let inputs: Vec<f64> = (0..n).map(|k| sol.z[2 + k]).collect();
        let theta: Vec<f64> = states.iter().map(|x| x[0]).collect();
        let omega: Vec<f64> = states.iter().map(|x| x[1]).collect();
        let trajectory = Trajectory::from_knots(self.dt(), &theta, &omega);
        Ok(MpcSolution { trajectory, states, inputs, cost: sol.objective, kkt: sol.kkt, iterations: sol.iterations })
    }

    /// Plans from the estimate `xhat`: the start state ranges over
    /// `xhat ⊕ 𝓔` within the state box.
    pub fn solve(&self, xhat: &State) -> Result<MpcSolution, MpcError> {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for i in 0..2 {
            lo[i] = (xhat[i] - self.cfg.e_radius[i]).max(-self.cfg.state_box[i]);
            hi[i] = (xhat[i] + self.cfg.e_radius[i]).min(self.cfg.state_box[i]);
            if lo[i] > hi[i] {
                return Err(MpcError::Infeasible);
            }
        }
        self.run(&self.problem(lo, hi, None))
    }

    /// Optimal cost with the start state pinned to `p`; `None` when no
    /// admissible plan starts there.
    pub fn value(&self, p: &State) -> Option<f64> {
        if (0..2).any(|i| p[i].abs() > self.cfg.state_box[i]) {
            return None;
        }
        self.run(&self.problem([0.0; 2], [0.0; 2], Some(*p))).ok().map(|s| s.cost)
    }

    /// Largest ‖ẋ_d‖ the planner's boxes allow for the linearized model.
    pub fn max_speed_bound(&self, plant: &PendulumParams) -> f64 {
        let acc = plant.omega0_sq() * self.cfg.state_box[0] + plant.input_gain() * self.cfg.u_max;
        self.cfg.state_box[1].hypot(acc)
    }
}
