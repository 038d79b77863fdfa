//! Atomic predicates of the contract vocabulary.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex};

use crate::behaviors::Value;
use crate::controllers::{Mpc, Trajectory};
use crate::mcl::eval::{EvalError, Failure};
use crate::plant::{PendulumParams, State};

/// Access to the arguments of one predicate occurrence at one position.
pub trait Call {
    /// Argument `i` evaluated `shift` ticks after the current position.
    fn arg_at(&mut self, i: usize, shift: i64) -> Result<Value, Failure>;
    fn arg(&mut self, i: usize) -> Result<Value, Failure> {
        self.arg_at(i, 0)
    }
    fn arg_text(&self, i: usize) -> String;
    fn params(&self) -> &[f64];
    /// Physical time of the observer tick `shift` ticks after the current one.
    fn time(&mut self, shift: i64) -> Result<f64, Failure>;
    fn grid_step(&self) -> f64;
}

pub trait Predicate: Send + Sync {
    /// Accepted numbers of terms and of parameters.
    fn arity(&self) -> (RangeInclusive<usize>, RangeInclusive<usize>);
    fn eval(&self, call: &mut dyn Call) -> Result<bool, Failure>;
}

fn type_error(msg: impl Into<String>) -> Failure {
    Failure::Error(EvalError::Type(msg.into()))
}

fn vector(v: &Value, what: &str) -> Result<Vec<f64>, Failure> {
    v.as_slice().map(<[f64]>::to_vec).ok_or_else(|| type_error(format!("{what} must be a scalar or vector")))
}

fn state(v: &Value, what: &str) -> Result<State, Failure> {
    match v.as_slice() {
        Some([a, b]) => Ok([*a, *b]),
        _ => Err(type_error(format!("{what} must be a 2-vector"))),
    }
}

fn trajectory(v: &Value, what: &str) -> Result<Arc<Trajectory>, Failure> {
    v.as_trajectory().cloned().ok_or_else(|| type_error(format!("{what} must be a trajectory")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CloseError {
    DimensionMismatch(usize, usize),
}

/// ‖a − b‖₂ ≤ δ.
pub fn close(a: &[f64], b: &[f64], delta: f64) -> Result<bool, CloseError> {
    if a.len() != b.len() {
        return Err(CloseError::DimensionMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() <= delta)
}

/// Trajectory endpoints within `limits` and feedforward torque within U at
/// every grid point of the horizon.
pub fn respect_dynamics(traj: &Trajectory, plant: &PendulumParams, h: f64) -> bool {
    traj.grid(h).all(|t| {
        let s = traj.sample(t);
        let u_ff = (-plant.omega0_sq() * s.theta.sin() + s.theta_ddot) / plant.input_gain();
        s.theta.abs() <= plant.theta_max && s.theta_dot.abs() <= plant.omega_max && u_ff.abs() <= plant.u_max
    })
}

/// Largest ratio ‖x_d(t_{k+1}) − x_d(t_k)‖ / h over the grid.
pub fn trajectory_variation(traj: &Trajectory, h: f64) -> f64 {
    let mut prev: Option<(f64, State)> = None;
    let mut worst = 0.0f64;
    for t in traj.grid(h) {
        let x = traj.state(t);
        if let Some((tp, xp)) = prev {
            if t > tp {
                worst = worst.max((x[0] - xp[0]).hypot(x[1] - xp[1]) / (t - tp));
            }
        }
        prev = Some((t, x));
    }
    worst
}

/// `⌈v / q⌉` as a well-ordered level.
pub fn quantize(v: f64, q: f64) -> u64 {
    let l = (v / q).ceil();
    if l >= u64::MAX as f64 {
        u64::MAX
    } else {
        l.max(0.0) as u64
    }
}

/// Quantized MPC value, zero on the closed box 𝓔 around the goal.
pub struct CostFunction {
    pub center: State,
    pub radius: [f64; 2],
    pub q: f64,
    mpc: Arc<Mpc>,
    cache: Mutex<HashMap<[u64; 2], u64>>,
}

impl std::fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CostFunction").field("center", &self.center).field("radius", &self.radius).field("q", &self.q).finish()
    }
}

impl CostFunction {
    pub fn new(mpc: Arc<Mpc>, q: f64) -> Self {
        let radius = mpc.cfg.e_radius;
        CostFunction { center: [0.0, 0.0], radius, q, mpc, cache: Mutex::new(HashMap::new()) }
    }

    pub fn in_set(&self, p: &State) -> bool {
        (0..2).all(|i| (p[i] - self.center[i]).abs() <= self.radius[i])
    }

    /// The unquantized value V; `None` when no admissible plan starts at `p`.
    pub fn value(&self, p: &State) -> Option<f64> {
        self.mpc.value(&[p[0] - self.center[0], p[1] - self.center[1]])
    }

    pub fn cost(&self, p: &State) -> u64 {
        if self.in_set(p) {
            return 0;
        }
        let key = [p[0].to_bits(), p[1].to_bits()];
        if let Some(c) = self.cache.lock().unwrap().get(&key) {
            return *c;
        }
        let c = match self.value(p) {
            Some(v) => quantize(v, self.q).max(1),
            None => u64::MAX,
        };
        self.cache.lock().unwrap().insert(key, c);
        c
    }

    /// The δ-inflation of the trajectory image lies in 𝓔: every grid point
    /// sits at least δ inside the box.
    pub fn inflate_cost_zero(&self, traj: &Trajectory, delta: f64, h: f64) -> bool {
        traj.grid(h).all(|t| {
            let x = traj.state(t);
            (0..2).all(|i| (x[i] - self.center[i]).abs() + delta <= self.radius[i] + 1e-12)
        })
    }
}

struct ClosePred;

impl Predicate for ClosePred {
    fn arity(&self) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
        (2..=2, 1..=1)
    }

    fn eval(&self, call: &mut dyn Call) -> Result<bool, Failure> {
        let a = vector(&call.arg(0)?, "first argument of Close")?;
        let b = vector(&call.arg(1)?, "second argument of Close")?;
        close(&a, &b, call.params()[0]).map_err(|CloseError::DimensionMismatch(p, q)| {
            type_error(format!("Close({}, {}): dimensions {p} and {q} differ", call.arg_text(0), call.arg_text(1)))
        })
    }
}

struct BoundedVariationPred;

impl Predicate for BoundedVariationPred {
    fn arity(&self) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
        (1..=1, 1..=1)
    }

    fn eval(&self, call: &mut dyn Call) -> Result<bool, Failure> {
        let d = call.params()[0];
        let now = call.arg(0)?;
        if let Value::Trajectory(tr) = &now {
            return Ok(trajectory_variation(tr, call.grid_step()) <= d);
        }
        let next = call.arg_at(0, 1)?;
        let (a, b) = (vector(&now, "BoundedVariation argument")?, vector(&next, "BoundedVariation argument")?);
        let dt = (call.time(1)? - call.time(0)?).abs();
        let dist = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        Ok(dist <= d * dt)
    }
}

struct RespectDynamicsPred {
    plant: PendulumParams,
}

impl Predicate for RespectDynamicsPred {
    fn arity(&self) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
        (1..=1, 0..=0)
    }

    fn eval(&self, call: &mut dyn Call) -> Result<bool, Failure> {
        let tr = trajectory(&call.arg(0)?, "RespectDynamics argument")?;
        Ok(respect_dynamics(&tr, &self.plant, call.grid_step()))
    }
}

/// `Cost(p; n)`: cost(p) = n. `Cost(a, b;)`: cost(a) > cost(b).
struct CostPred {
    cost: Arc<CostFunction>,
}

impl Predicate for CostPred {
    fn arity(&self) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
        (1..=2, 0..=1)
    }

    fn eval(&self, call: &mut dyn Call) -> Result<bool, Failure> {
        match call.params().len() {
            1 => {
                let n = call.params()[0];
                let p = state(&call.arg(0)?, "Cost argument")?;
                if n == 0.0 {
                    return Ok(self.cost.in_set(&p));
                }
                Ok(self.cost.cost(&p) as f64 == n)
            }
            _ => {
                let a = state(&call.arg(0)?, "Cost argument")?;
                let b = state(&call.arg(1)?, "Cost argument")?;
                Ok(self.cost.cost(&a) > self.cost.cost(&b))
            }
        }
    }
}

struct CostZeroInflatedPred {
    cost: Arc<CostFunction>,
}

impl Predicate for CostZeroInflatedPred {
    fn arity(&self) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
        (1..=1, 1..=1)
    }

    fn eval(&self, call: &mut dyn Call) -> Result<bool, Failure> {
        let tr = trajectory(&call.arg(0)?, "CostZeroInflated argument")?;
        Ok(self.cost.inflate_cost_zero(&tr, call.params()[0], call.grid_step()))
    }
}

/// Name → predicate table, built once and then shared read-only.
#[derive(Default)]
pub struct Registry {
    preds: BTreeMap<String, Box<dyn Predicate>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// `Close` and `BoundedVariation`, plus `RespectDynamics` when a plant
    /// is given and `Cost` / `CostZeroInflated` when a cost function is.
    pub fn standard(plant: Option<PendulumParams>, cost: Option<Arc<CostFunction>>) -> Self {
        let mut r = Registry::empty();
        r.insert("Close", ClosePred);
        r.insert("BoundedVariation", BoundedVariationPred);
        if let Some(plant) = plant {
            r.insert("RespectDynamics", RespectDynamicsPred { plant });
        }
        if let Some(cost) = cost {
            r.insert("Cost", CostPred { cost: cost.clone() });
            r.insert("CostZeroInflated", CostZeroInflatedPred { cost });
        }
        r
    }

    pub fn insert(&mut self, name: &str, p: impl Predicate + 'static) {
        self.preds.insert(name.to_string(), Box::new(p));
    }

    pub fn get(&self, name: &str) -> Option<&dyn Predicate> {
        self.preds.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.preds.keys().map(String::as_str)
    }
}
