//! Closed-form parameter constraints linking the component contracts, and
//! the bounds used to check the tracking layer on recorded runs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behaviors::Value;
use crate::contracts::Contract;
use crate::controllers::{FblGains, Mpc};
use crate::mcl::{parse, Params};
use crate::plant::PendulumParams;

/// Every timing, distance and plant constant the constraints mention.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    #[serde(rename = "T_min_m")]
    pub t_min_m: f64,
    #[serde(rename = "T_max_m")]
    pub t_max_m: f64,
    #[serde(rename = "T_avg_m")]
    pub t_avg_m: f64,
    #[serde(rename = "T_fresh_m")]
    pub t_fresh_m: f64,
    #[serde(rename = "T_min_l")]
    pub t_min_l: f64,
    #[serde(rename = "T_max_l")]
    pub t_max_l: f64,
    #[serde(rename = "T_avg_l")]
    pub t_avg_l: f64,
    #[serde(rename = "T_fresh_l")]
    pub t_fresh_l: f64,
    pub delta_A_init: f64,
    pub delta_G_init: f64,
    pub delta_sensor_MPC: f64,
    pub delta_sensor_Est: f64,
    pub delta_dyn_MPC: f64,
    pub delta_dyn_FL: f64,
    pub delta_tracking: f64,
    pub delta_progress: f64,
    pub D_x: f64,
    pub D_d: f64,
    pub M: f64,
    pub lambda: f64,
    pub U: f64,
    pub G: f64,
    pub L_f: f64,
    pub L_g: f64,
    pub A_cl_norm: f64,
    /// Radii of the box 𝓔.
    pub E_radius: [f64; 2],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("infeasible parameters: {} violated", .0.join(", "))]
    InfeasibleParameters(Vec<String>),
}

const FIELDS: [&str; 26] = [
    "T_min_m",
    "T_max_m",
    "T_avg_m",
    "T_fresh_m",
    "T_min_l",
    "T_max_l",
    "T_avg_l",
    "T_fresh_l",
    "delta_A_init",
    "delta_G_init",
    "delta_sensor_MPC",
    "delta_sensor_Est",
    "delta_dyn_MPC",
    "delta_dyn_FL",
    "delta_tracking",
    "delta_progress",
    "D_x",
    "D_d",
    "M",
    "lambda",
    "U",
    "G",
    "L_f",
    "L_g",
    "A_cl_norm",
    "E_radius",
];

/// Plant and controller constants the constraints take as given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub d_x: f64,
    pub d_d: f64,
    pub m: f64,
    pub lambda: f64,
    pub u: f64,
    pub g: f64,
    pub l_f: f64,
    pub l_g: f64,
    pub a_cl_norm: f64,
    pub e_radius: [f64; 2],
}

impl DerivedConstants {
    pub fn compute(plant: &PendulumParams, gains: &FblGains, mpc: &Mpc) -> Result<Self, AnalysisError> {
        let env = gains.envelope().map_err(|e| AnalysisError::Invalid(e.to_string()))?;
        let lip = plant.lipschitz_constants();
        Ok(DerivedConstants {
            d_x: plant.max_speed(),
            d_d: mpc.max_speed_bound(plant),
            m: env.m,
            lambda: env.lambda,
            u: plant.u_max,
            g: lip.g,
            l_f: lip.l_f,
            l_g: lip.l_g,
            a_cl_norm: gains.a_cl_norm(),
            e_radius: mpc.cfg.e_radius,
        })
    }
}

impl ParameterSet {
    pub fn from_toml(text: &str) -> Result<Self, AnalysisError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| AnalysisError::Invalid(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, AnalysisError> {
        if let Some(missing) = FIELDS.iter().find(|f| !table.contains_key(**f)) {
            return Err(AnalysisError::MissingParameter(missing.to_string()));
        }
        let p: ParameterSet = table.try_into().map_err(|e: toml::de::Error| AnalysisError::Invalid(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("parameter sets always serialize")
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let t = toml::Table::try_from(self).expect("parameter sets always serialize");
        for (k, v) in &t {
            let bad = match v {
                toml::Value::Float(x) => !(x.is_finite() && *x >= 0.0),
                toml::Value::Array(xs) => xs.iter().any(|x| !x.as_float().is_some_and(|x| x.is_finite() && x >= 0.0)),
                _ => false,
            };
            if bad {
                return Err(AnalysisError::Invalid(format!("{k} must be finite and nonnegative")));
            }
        }
        for (c, lo, avg, hi) in [("m", self.t_min_m, self.t_avg_m, self.t_max_m), ("l", self.t_min_l, self.t_avg_l, self.t_max_l)] {
            if !(lo <= avg && avg <= hi) {
                return Err(AnalysisError::Invalid(format!("clock {c}: need T_min <= T_avg <= T_max")));
            }
        }
        Ok(())
    }

    /// Overwrites the plant and controller constants.
    pub fn with_derived(mut self, d: &DerivedConstants) -> Self {
        self.D_x = d.d_x;
        self.D_d = d.d_d;
        self.M = d.m;
        self.lambda = d.lambda;
        self.U = d.u;
        self.G = d.g;
        self.L_f = d.l_f;
        self.L_g = d.l_g;
        self.A_cl_norm = d.a_cl_norm;
        self.E_radius = d.e_radius;
        self
    }

    /// The constants under the names the contract formulas use.
    pub fn contract_params(&self, x_i: [f64; 2]) -> Params {
        let t = toml::Table::try_from(self).expect("parameter sets always serialize");
        let mut out = Params::new();
        for (k, v) in t {
            let value = match v {
                toml::Value::Float(x) => Value::Scalar(x),
                toml::Value::Array(xs) => Value::Vector(xs.iter().filter_map(toml::Value::as_float).collect()),
                _ => continue,
            };
            out.insert(k, value);
        }
        out.insert("x_i".into(), Value::Vector(x_i.to_vec()));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaT {
    pub value: f64,
    /// Set when `T_min_m < T_fresh_m + T_fresh_l`; the floor then acts on
    /// a negative argument.
    pub negative_floor_arg: bool,
}

/// `T_max_m − T_avg_l · ⌊(T_min_m − (T_fresh_m + T_fresh_l)) / T_max_l⌋`.
pub fn delta_t_m(p: &ParameterSet) -> Result<DeltaT, AnalysisError> {
    if !(p.t_max_l > 0.0) {
        return Err(AnalysisError::Invalid("T_max_l must be positive".into()));
    }
    let arg = p.t_min_m - (p.t_fresh_m + p.t_fresh_l);
    let negative_floor_arg = arg < 0.0;
    if negative_floor_arg {
        log::warn!("NegativeFloorArg: T_min_m < T_fresh_m + T_fresh_l ({} < {})", p.t_min_m, p.t_fresh_m + p.t_fresh_l);
    }
    // The nudge keeps exact multiples from flooring one short.
    let k = (arg / p.t_max_l + 1e-9).floor();
    Ok(DeltaT { value: p.t_max_m - p.t_avg_l * k, negative_floor_arg })
}

/// `t ρ(t) = U G t² e^{(L_f + L_g U) t}`: the deviation of a held input
/// from continuously recomputed control after time `t`.
pub fn gronwall_bound(p: &ParameterSet, t: f64) -> f64 {
    p.U * p.G * t * t * ((p.L_f + p.L_g * p.U) * t).exp()
}

/// `δ_w = T((L_f + 2 L_g U + ‖A_cl‖) ρ(T) + G U)` at `T = T_max_l`.
pub fn compute_delta_w(p: &ParameterSet) -> f64 {
    let t = p.t_max_l;
    let rho = p.U * p.G * t * ((p.L_f + p.L_g * p.U) * t).exp();
    t * ((p.L_f + 2.0 * p.L_g * p.U + p.A_cl_norm) * rho + p.G * p.U)
}

/// Same as [`compute_delta_w`] but with ρ from the integral form of the
/// Gronwall inequality, `α(t) + ∫₀ᵗ a α(s) e^{a(t−s)} ds` with
/// `α(t) = U G t²`, evaluated by Simpson quadrature.
pub fn delta_w_numerical(p: &ParameterSet) -> f64 {
    let t = p.t_max_l;
    let a = p.L_f + p.L_g * p.U;
    let alpha = |s: f64| p.U * p.G * s * s;
    let n = 2000;
    let step = t / n as f64;
    let f = |s: f64| a * alpha(s) * (a * (t - s)).exp();
    let mut integral = f(0.0) + f(t);
    for i in 1..n {
        integral += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * step);
    }
    integral *= step / 3.0;
    let rho = if t > 0.0 { (alpha(t) + integral) / t } else { 0.0 };
    t * ((p.L_f + 2.0 * p.L_g * p.U + p.A_cl_norm) * rho + p.G * p.U)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub id: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
}

impl Constraint {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn satisfied(&self) -> bool {
        match self.relation {
            Relation::Le => self.lhs <= self.rhs,
            Relation::Lt => self.lhs < self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub constraints: Vec<Constraint>,
    pub delta_t_m: DeltaT,
    pub delta_w: f64,
}

impl ConstraintReport {
    pub fn feasible(&self) -> bool {
        self.constraints.iter().all(Constraint::satisfied)
    }

    pub fn violated(&self) -> Vec<String> {
        self.constraints.iter().filter(|c| !c.satisfied()).map(|c| c.id.to_string()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for c in &self.constraints {
            let rel = if c.relation == Relation::Lt { "<" } else { "<=" };
            let status = if c.satisfied() { "ok" } else { "VIOLATED" };
            let _ = writeln!(s, "{:<12} {:>14.6e} {rel:<2} {:>14.6e}  slack {:>+14.6e}  {status}", c.id, c.lhs, c.rhs, c.slack());
        }
        let _ = writeln!(s, "delta_T_m = {:.6e}{}", self.delta_t_m.value, if self.delta_t_m.negative_floor_arg { " (NegativeFloorArg)" } else { "" });
        let _ = writeln!(s, "delta_w = {:.6e}", self.delta_w);
        let _ = writeln!(s, "feasible: {}", self.feasible());
        s
    }

    pub fn render_csv(&self) -> String {
        let mut s = String::from("id,lhs,rhs,slack,status\n");
        for c in &self.constraints {
            let _ = writeln!(s, "{},{:e},{:e},{:e},{}", c.id, c.lhs, c.rhs, c.slack(), if c.satisfied() { "ok" } else { "violated" });
        }
        s
    }
}

/// Evaluates the six constraints.
pub fn check_constraints(p: &ParameterSet) -> Result<ConstraintReport, AnalysisError> {
    p.validate()?;
    let dt = delta_t_m(p)?;
    let delta_w = compute_delta_w(p);
    let le = |id, lhs, rhs| Constraint { id, lhs, rhs, relation: Relation::Le };
    let constraints = vec![
        le("sensor_chain", p.delta_sensor_Est + p.t_fresh_m * p.D_x, p.delta_sensor_MPC),
        le("init_tracking", p.delta_G_init + p.delta_A_init + p.D_x * p.t_fresh_l, p.delta_dyn_FL),
        le(
            "inductive_tracking",
            p.delta_tracking + p.delta_dyn_MPC + (p.t_fresh_m + p.t_fresh_l) * p.D_x + p.D_d * dt.value,
            p.delta_dyn_FL,
        ),
        le("progress", p.delta_dyn_FL, p.delta_progress),
        le(
            "fl_gate",
            p.delta_dyn_FL * p.M * (-p.lambda * p.t_min_l).exp() + p.t_max_l * delta_w,
            p.delta_tracking,
        ),
        Constraint {
            id: "E_contains",
            lhs: p.delta_tracking,
            rhs: p.E_radius[0].min(p.E_radius[1]),
            relation: Relation::Lt,
        },
    ];
    Ok(ConstraintReport { constraints, delta_t_m: dt, delta_w })
}

const SYSTEM_ASSUME: &str = "(@m. Close(x, x_i; delta_A_init)) && (@m. G BoundedVariation(x; D_x))";
const SYSTEM_GUARANTEE: &str = "@l. F G Cost(x; 0)";

/// The relaxed system contract: the top-level stability objective under
/// the initial-condition and variation assumptions.
pub fn system_contract(p: &ParameterSet, x_i: [f64; 2]) -> Contract {
    let mut c = Contract::new(
        "C_sys",
        parse(SYSTEM_ASSUME).expect("fixed formula"),
        parse(SYSTEM_GUARANTEE).expect("fixed formula"),
    );
    let all = p.contract_params(x_i);
    for k in ["delta_A_init", "D_x", "x_i"] {
        c.params.insert(k.into(), all[k].clone());
    }
    c
}

/// Contract file text of [`system_contract`], annotated with the slack of
/// every constraint it rests on; refuses infeasible parameters.
pub fn system_contract_summary(p: &ParameterSet, x_i: [f64; 2]) -> Result<String, AnalysisError> {
    let report = check_constraints(p)?;
    if !report.feasible() {
        return Err(AnalysisError::InfeasibleParameters(report.violated()));
    }
    let mut s = String::new();
    for c in &report.constraints {
        let _ = writeln!(s, "// {} slack {:e}", c.id, c.slack());
    }
    s.push_str(&system_contract(p, x_i).to_file_string());
    Ok(s)
}
