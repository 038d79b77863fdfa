//! Deterministic multiclock simulation of the two-layer controller.
//!
//! Time advances on the physical grid `r` of step `h`. At each grid
//! instant the tracking clock `l` fires first (estimate, trajectory
//! delivery, held input), then the planning clock `m` (read the freshest
//! delivered estimate, solve, send), then the physical tick is recorded
//! and the plant integrated over one step.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{compute_delta_w, gronwall_bound, DerivedConstants, ParameterSet};
use crate::behaviors::{ClockId, ClockKind, Shape, SystemBehavior, Value, VariableDecl};
use crate::controllers::{fbl_control, Estimator, FblGains, Mpc, MpcConfig, MpcError, Trajectory};
use crate::plant::{PendulumParams, PlantError, State};
use crate::predicates::{CostFunction, Registry};

pub const R: usize = 0;
pub const L: usize = 1;
pub const M: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Jitter {
    None,
    Uniform,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConfig {
    pub T_min: f64,
    pub T_max: f64,
    pub T_avg: f64,
    pub jitter: Jitter,
    #[serde(default)]
    pub seed: u64,
}

/// A delay in seconds, fixed or drawn per message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Delay {
    Fixed(f64),
    Uniform { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Trajectory delivery, planner to tracker; includes solve time.
    pub delay_ml: Delay,
    /// Estimate delivery, tracker to planner.
    pub delay_lm: Delay,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub h: f64,
    pub duration: f64,
    pub x_i: [f64; 2],
    /// Quantization step of the well-ordered cost.
    pub q: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clocks {
    pub m: ClockConfig,
    pub l: ClockConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub plant: PendulumParams,
    pub fbl: FblGains,
    pub mpc: MpcConfig,
    pub clock: Clocks,
    pub network: NetworkConfig,
    pub run: RunConfig,
    pub params: ParameterSet,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error("solver failure at {clock} tick {tick} (t = {time:.4} s): {source}")]
    SolverFailure {
        clock: &'static str,
        tick: usize,
        time: f64,
        source: MpcError,
    },
    #[error("plant failure at grid step {step}: {source}")]
    Plant { step: usize, source: PlantError },
}

fn invalid(msg: impl Into<String>) -> ExecError {
    ExecError::ScenarioInvalid(msg.into())
}

impl ClockConfig {
    /// Admissible gaps in grid steps.
    fn step_range(&self, h: f64) -> (usize, usize) {
        ((self.T_min / h - 1e-9).ceil() as usize, (self.T_max / h + 1e-9).floor() as usize)
    }
}

impl Delay {
    fn steps(&self, h: f64, rng: &mut ChaCha8Rng) -> usize {
        match *self {
            Delay::Fixed(d) => (d / h).round() as usize,
            Delay::Uniform { min, max } => {
                let lo = (min / h - 1e-9).ceil() as usize;
                let hi = (max / h + 1e-9).floor() as usize;
                rng.gen_range(lo..=hi.max(lo))
            }
        }
    }

    fn validate(&self, name: &str) -> Result<(), ExecError> {
        let ok = match *self {
            Delay::Fixed(d) => d.is_finite() && d >= 0.0,
            Delay::Uniform { min, max } => min.is_finite() && max.is_finite() && 0.0 <= min && min <= max,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("{name} must be a nonnegative delay")))
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ExecError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    /// Reseeds every random stream from one seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.run.seed = seed;
        self.clock.l.seed = seed.wrapping_add(1);
        self.clock.m.seed = seed.wrapping_add(2);
        self.network.seed = seed.wrapping_add(3);
        self
    }

    /// Plant and controller constants implied by this scenario.
    pub fn derived_constants(&self) -> Result<DerivedConstants, ExecError> {
        let mpc = Mpc::new(self.mpc.clone(), &self.plant).map_err(|e| invalid(e.to_string()))?;
        DerivedConstants::compute(&self.plant, &self.fbl, &mpc).map_err(|e| invalid(e.to_string()))
    }

    /// Predicate registry for monitoring behaviors of this scenario.
    pub fn registry(&self) -> Result<Registry, ExecError> {
        let mpc = Mpc::new(self.mpc.clone(), &self.plant).map_err(|e| invalid(e.to_string()))?;
        let cost = CostFunction::new(Arc::new(mpc), self.run.q);
        Ok(Registry::standard(Some(self.plant), Some(Arc::new(cost))))
    }

    pub fn grid_steps(&self) -> usize {
        (self.run.duration / self.run.h).round() as usize
    }

    pub fn validate(&self) -> Result<(), ExecError> {
        self.plant.validate().map_err(|e| invalid(e.to_string()))?;
        self.params.validate().map_err(|e| invalid(e.to_string()))?;
        let h = self.run.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("h must be positive"));
        }
        if !(self.run.q > 0.0) {
            return Err(invalid("q must be positive"));
        }
        if self.run.duration < 3.0 * self.mpc.horizon - 1e-9 {
            return Err(invalid("duration must cover at least three MPC horizons"));
        }
        if self.mpc.horizon / (self.mpc.steps as f64) < h - 1e-12 {
            return Err(invalid("MPC step T/N must be at least h"));
        }
        let p = &self.params;
        for (name, c, (lo, hi, avg)) in [
            ("clock.m", &self.clock.m, (p.t_min_m, p.t_max_m, p.t_avg_m)),
            ("clock.l", &self.clock.l, (p.t_min_l, p.t_max_l, p.t_avg_l)),
        ] {
            if !(0.0 < c.T_min && c.T_min <= c.T_avg && c.T_avg <= c.T_max) {
                return Err(invalid(format!("{name}: need 0 < T_min <= T_avg <= T_max")));
            }
            let (a, b) = c.step_range(h);
            if a == 0 || a > b {
                return Err(invalid(format!("{name}: no whole number of grid steps lies in [T_min, T_max]")));
            }
            if ((c.T_avg / h).round() - c.T_avg / h).abs() > 1.0 {
                return Err(invalid(format!("{name}: T_avg is not a whole number of grid steps")));
            }
            if (c.T_min - lo).abs() > 1e-12 || (c.T_max - hi).abs() > 1e-12 || (c.T_avg - avg).abs() > 1e-12 {
                return Err(invalid(format!("{name}: periods differ from the parameter set")));
            }
        }
        self.network.delay_ml.validate("delay_ml")?;
        self.network.delay_lm.validate("delay_lm")?;
        Mpc::new(self.mpc.clone(), &self.plant).map_err(|e| invalid(e.to_string()))?;
        self.fbl.envelope().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }
}

struct Jitterer {
    cfg: ClockConfig,
    rng: ChaCha8Rng,
    range: (usize, usize),
}

impl Jitterer {
    fn new(cfg: ClockConfig, h: f64) -> Self {
        Jitterer { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), range: cfg.step_range(h) }
    }

    fn gap(&mut self, h: f64) -> usize {
        match self.cfg.jitter {
            Jitter::None => ((self.cfg.T_avg / h).round() as usize).clamp(self.range.0, self.range.1),
            Jitter::Uniform => self.rng.gen_range(self.range.0..=self.range.1),
        }
    }
}

/// Empty behavior with the case-study clocks and variables.
pub fn empty_behavior(h: f64) -> SystemBehavior {
    let clocks = vec![
        ClockId { name: "r".into(), kind: ClockKind::Physical { h } },
        ClockId { name: "l".into(), kind: ClockKind::Discrete },
        ClockId { name: "m".into(), kind: ClockKind::Discrete },
    ];
    let var = |name: &str, clock: &str, shape| VariableDecl { name: name.into(), clock: clock.into(), shape };
    let variables = vec![
        var("x", "r", Shape::Vector(2)),
        var("u", "r", Shape::Scalar),
        var("xhat", "l", Shape::Vector(2)),
        var("upd", "l", Shape::Scalar),
        var("x_d", "m", Shape::Trajectory),
        var("J", "m", Shape::Scalar),
    ];
    let mut beh = SystemBehavior::new(clocks, variables).expect("fixed declarations are valid");
    for s in [R, L, M] {
        for t in [R, L, M] {
            if s != t {
                beh.set_sync(s, t, Vec::new());
            }
        }
    }
    beh
}

/// Uniform draw from the closed disk of radius `r`.
fn disk(rng: &mut ChaCha8Rng, r: f64) -> [f64; 2] {
    let rad = r * rng.gen::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.gen::<f64>();
    [rad * phi.cos(), rad * phi.sin()]
}

/// Solver statistics of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunStats {
    pub solves: usize,
    /// Largest KKT residual over all solves.
    pub kkt_max: f64,
}

/// Runs the scenario with the tracking input held between `l` ticks.
pub fn run(sc: &Scenario) -> Result<SystemBehavior, ExecError> {
    simulate(sc, false).map(|(b, _)| b)
}

/// Like [`run`], also returning solver statistics.
pub fn run_with_stats(sc: &Scenario) -> Result<(SystemBehavior, RunStats), ExecError> {
    simulate(sc, false)
}

/// Runs the scenario with the tracking input recomputed at every grid
/// step; deliveries and planning still follow the clocks.
pub fn run_reference_continuous(sc: &Scenario) -> Result<SystemBehavior, ExecError> {
    simulate(sc, true).map(|(b, _)| b)
}

fn simulate(sc: &Scenario, continuous: bool) -> Result<(SystemBehavior, RunStats), ExecError> {
    sc.validate()?;
    let h = sc.run.h;
    let n = sc.grid_steps();
    let mpc = Mpc::new(sc.mpc.clone(), &sc.plant).map_err(|e| invalid(e.to_string()))?;
    let mut l_clock = Jitterer::new(sc.clock.l, h);
    let mut m_clock = Jitterer::new(sc.clock.m, h);
    let mut net = ChaCha8Rng::seed_from_u64(sc.network.seed);
    let mut init = ChaCha8Rng::seed_from_u64(sc.run.seed);
    let mut est = Estimator::new(sc.params.delta_sensor_Est, sc.run.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1));

    let eta = disk(&mut init, sc.params.delta_A_init);
    let mut x: State = [sc.run.x_i[0] + eta[0], sc.run.x_i[1] + eta[1]];

    let mut beh = empty_behavior(h);
    let (mut l_r, mut l_m, mut m_r, mut m_l, mut r_l, mut r_m) = (vec![], vec![], vec![], vec![], vec![], vec![]);
    let mut l_grid: Vec<usize> = vec![];
    let mut l_visible: Vec<usize> = vec![];
    let mut xhats: Vec<State> = vec![];
    let mut m_grid: Vec<usize> = vec![];
    let mut m_deliver: Vec<usize> = vec![];
    let mut plans: Vec<Arc<Trajectory>> = vec![];
    let (mut next_l, mut next_m) = (0usize, 0usize);
    let mut upd: i64 = -1;
    let mut upd_grid = 0usize;
    let mut u = 0.0;
    let mut expired_warned = false;
    let mut stats = RunStats::default();

    let mut control = |x: &State, plan: Option<&Arc<Trajectory>>, since: usize| -> f64 {
        match plan {
            None => 0.0,
            Some(tr) => {
                let (u, expired) = fbl_control(x, tr, since as f64 * h, &sc.fbl, &sc.plant);
                if expired && !expired_warned {
                    log::warn!("trajectory expired; holding its final point");
                    expired_warned = true;
                }
                sc.plant.saturate(u)
            }
        }
    };

    for i in 0..n {
        if i == next_l {
            let k = l_grid.len();
            let xhat = est.estimate(&x);
            let latest = (0..m_grid.len()).rev().find(|&j| m_grid[j] < i && m_deliver[j] <= i).map_or(-1, |j| j as i64);
            let prev = l_m.last().copied().unwrap_or(-1);
            if latest != prev && latest >= 0 {
                upd = k as i64;
                upd_grid = i;
            }
            l_m.push(latest);
            if !continuous {
                u = control(&x, (latest >= 0).then(|| &plans[latest as usize]), i - upd_grid);
            }
            beh.push_tick(L, vec![Value::Vector(xhat.to_vec()), Value::Scalar(upd as f64)]).expect("row matches declarations");
            xhats.push(xhat);
            l_r.push(i as i64);
            l_grid.push(i);
            l_visible.push(i + sc.network.delay_lm.steps(h, &mut net));
            next_l = i + l_clock.gap(h);
        }
        if i == next_m {
            let j = m_grid.len();
            let seen = (0..l_grid.len()).rev().find(|&k| l_visible[k] <= i);
            let xhat = xhats[seen.unwrap_or(0)];
            let sol = mpc.solve(&xhat).map_err(|source| ExecError::SolverFailure { clock: "m", tick: j, time: i as f64 * h, source })?;
            stats.solves += 1;
            stats.kkt_max = stats.kkt_max.max(sol.kkt.max());
            if sol.kkt.max() > 1e-6 {
                log::warn!("m tick {j}: KKT residual {:e}", sol.kkt.max());
            }
            let plan = Arc::new(sol.trajectory);
            beh.push_tick(M, vec![Value::Trajectory(plan.clone()), Value::Scalar(sol.cost)]).expect("row matches declarations");
            plans.push(plan);
            m_r.push(i as i64);
            m_l.push(seen.map_or(-1, |k| k as i64));
            m_grid.push(i);
            let due = i + sc.network.delay_ml.steps(h, &mut net);
            m_deliver.push(due.max(m_deliver.last().copied().unwrap_or(0)));
            next_m = i + m_clock.gap(h);
        }
        if continuous {
            let latest = l_m.last().copied().unwrap_or(-1);
            u = control(&x, (latest >= 0).then(|| &plans[latest as usize]), i - upd_grid);
        }
        beh.push_tick(R, vec![Value::Vector(x.to_vec()), Value::Scalar(u)]).expect("row matches declarations");
        r_l.push(l_grid.len() as i64 - 1);
        r_m.push(m_grid.len() as i64 - 1);
        x = sc.plant.step(&x, u, h).map_err(|source| ExecError::Plant { step: i, source })?;
    }

    for (s, t, v) in [(L, R, l_r), (L, M, l_m), (M, R, m_r), (M, L, m_l), (R, L, r_l), (R, M, r_m)] {
        beh.set_sync(s, t, v);
    }
    debug_assert!(beh.validate().is_ok(), "{:?}", beh.validate());
    Ok((beh, stats))
}

fn scalar(beh: &SystemBehavior, clock: usize, tick: usize, col: usize) -> f64 {
    beh.trace(clock).ticks[tick][col].as_scalar().expect("scalar column")
}

fn state(beh: &SystemBehavior, tick: usize) -> State {
    let v = beh.trace(R).ticks[tick][0].as_slice().expect("vector column");
    [v[0], v[1]]
}

/// The plan in force at grid step `i` and the time since its delivery.
pub fn plan_at(beh: &SystemBehavior, i: usize) -> Option<(Arc<Trajectory>, f64)> {
    let (_, h) = beh.physical_clock();
    let l = *beh.sync(R, L)?.get(i)?;
    if l < 0 {
        return None;
    }
    let m = beh.sync(L, M)?[l as usize];
    if m < 0 {
        return None;
    }
    let upd = scalar(beh, L, l as usize, 1) as usize;
    let upd_grid = beh.sync(L, R)?[upd] as usize;
    let tr = beh.trace(M).ticks[m as usize][0].as_trajectory()?.clone();
    Some((tr, (i - upd_grid) as f64 * h))
}

pub const CSV_HEADER: &str = "t_r,theta,theta_dot,u,theta_d,e_norm,m_tick,l_tick,upd";

/// One row per grid step; `theta_d` and `e_norm` are empty before the
/// first delivery.
pub fn to_csv(beh: &SystemBehavior) -> String {
    let (_, h) = beh.physical_clock();
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    let r_l = beh.sync(R, L).unwrap_or(&[]);
    let l_m = beh.sync(L, M).unwrap_or(&[]);
    for i in 0..beh.len(R) {
        let x = state(beh, i);
        let u = scalar(beh, R, i, 1);
        let l = r_l.get(i).copied().unwrap_or(-1);
        let m = if l >= 0 { l_m.get(l as usize).copied().unwrap_or(-1) } else { -1 };
        let upd = if l >= 0 { scalar(beh, L, l as usize, 1) as i64 } else { -1 };
        let (td, en) = match plan_at(beh, i) {
            Some((tr, t)) => {
                let d = tr.state(t);
                (format!("{}", d[0]), format!("{}", (x[0] - d[0]).hypot(x[1] - d[1])))
            }
            None => (String::new(), String::new()),
        };
        let _ = writeln!(s, "{},{},{},{},{td},{en},{m},{l},{upd}", i as f64 * h, x[0], x[1], u);
    }
    s
}

/// Largest |θ| over the run.
pub fn max_abs_theta(beh: &SystemBehavior) -> f64 {
    (0..beh.len(R)).map(|i| state(beh, i)[0].abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZohSample {
    pub l_tick: usize,
    pub t: f64,
    pub deviation: f64,
    pub bound: f64,
}

/// Restarts a continuously recomputed tracking law from the recorded
/// state at every `l` tick and compares it with the recorded held-input
/// run over the following interval.
pub fn zoh_deviation(sc: &Scenario, beh: &SystemBehavior) -> Result<Vec<ZohSample>, ExecError> {
    let h = sc.run.h;
    let l_r = beh.sync(L, R).unwrap_or(&[]);
    let mut out = Vec::new();
    for k in 0..l_r.len() {
        let g0 = l_r[k] as usize;
        let g1 = l_r.get(k + 1).map_or(beh.len(R), |&g| g as usize);
        let Some((tr, t0)) = plan_at(beh, g0) else { continue };
        let mut y = state(beh, g0);
        for s in 1..=(g1 - g0) {
            let t = t0 + (s - 1) as f64 * h;
            let (u, _) = fbl_control(&y, &tr, t, &sc.fbl, &sc.plant);
            y = sc.plant.step(&y, sc.plant.saturate(u), h).map_err(|source| ExecError::Plant { step: g0 + s, source })?;
            if g0 + s >= beh.len(R) {
                break;
            }
            let x = state(beh, g0 + s);
            let dt = s as f64 * h;
            out.push(ZohSample {
                l_tick: k,
                t: dt,
                deviation: (x[0] - y[0]).hypot(x[1] - y[1]),
                bound: gronwall_bound(&sc.params, dt),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSegment {
    /// `l` tick of the delivery.
    pub upd: usize,
    pub e0: f64,
    /// Whether the plan start was within δ_dyn_FL of the state.
    pub dynamics_held: bool,
    /// Largest `‖e(t)‖ − (‖e(0)‖ M e^{−λt} + T_max_l δ_w)` on the segment.
    pub worst_margin: f64,
}

/// Checks the exponential tracking envelope at every `l` tick of every
/// delivery segment.
pub fn tracking_envelope(beh: &SystemBehavior, p: &ParameterSet) -> Vec<TrackingSegment> {
    let floor = p.t_max_l * compute_delta_w(p);
    let l_r = beh.sync(L, R).unwrap_or(&[]);
    let mut out: Vec<TrackingSegment> = Vec::new();
    for (l, &g) in l_r.iter().enumerate() {
        let Some((tr, t)) = plan_at(beh, g as usize) else { continue };
        let upd = scalar(beh, L, l, 1) as usize;
        let x = state(beh, g as usize);
        let d = tr.state(t);
        let e = (x[0] - d[0]).hypot(x[1] - d[1]);
        if out.last().map(|s| s.upd) != Some(upd) {
            let d0 = tr.state(0.0);
            let xg = state(beh, l_r[upd] as usize);
            let e0 = (xg[0] - d0[0]).hypot(xg[1] - d0[1]);
            out.push(TrackingSegment { upd, e0, dynamics_held: e0 <= p.delta_dyn_FL, worst_margin: f64::NEG_INFINITY });
        }
        let seg = out.last_mut().expect("pushed above");
        let bound = seg.e0 * p.M * (-p.lambda * t).exp() + floor;
        seg.worst_margin = seg.worst_margin.max(e - bound);
    }
    out
}
