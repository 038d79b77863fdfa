//! Recorded multiclock executions: per-clock tick traces plus sampled
//! synchronization maps, and shifted views of them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::controllers::trajectory::Trajectory;

pub mod codec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClockKind {
    Discrete,
    /// Uniform grid with step `h` seconds.
    Physical { h: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockId {
    pub name: String,
    pub kind: ClockKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(usize),
    Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableDecl {
    pub name: String,
    pub clock: String,
    pub shape: Shape,
}

#[derive(Debug, Clone)]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
    Trajectory(Arc<Trajectory>),
}

impl Value {
    pub fn shape(&self) -> Shape {
        match self {
            Value::Scalar(_) => Shape::Scalar,
            Value::Vector(v) => Shape::Vector(v.len()),
            Value::Trajectory(_) => Shape::Trajectory,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            Value::Vector(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    /// Scalars are treated as 1-vectors.
    pub fn as_slice(&self) -> Option<&[f64]> {
        match self {
            Value::Scalar(x) => Some(std::slice::from_ref(x)),
            Value::Vector(v) => Some(v),
            Value::Trajectory(_) => None,
        }
    }

    pub fn as_trajectory(&self) -> Option<&Arc<Trajectory>> {
        match self {
            Value::Trajectory(t) => Some(t),
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => a.to_bits() == b.to_bits(),
            (Value::Vector(a), Value::Vector(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Value::Trajectory(a), Value::Trajectory(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClockTrace {
    /// One row per tick; columns follow the declaration order of the
    /// clock's variables.
    pub ticks: Vec<Vec<Value>>,
}

impl ClockTrace {
    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }
}

/// `samples[t]` is the target tick observed at source tick `t`, or `-1`
/// when no target tick has been observed yet.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncMap {
    pub source: String,
    pub target: String,
    pub samples: Vec<i64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReadError {
    #[error("read outside the recorded trace")]
    OutOfTrace,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("no synchronization map from `{0}` to `{1}`")]
    MissingSyncMap(String, String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BehaviorError {
    #[error("duplicate clock `{0}`")]
    DuplicateClock(String),
    #[error("expected exactly one physical clock, found {0}")]
    PhysicalClockCount(usize),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` is clocked by undeclared clock `{1}`")]
    UndeclaredClock(String, String),
    #[error("tick {tick} of clock `{clock}`: {msg}")]
    BadTick { clock: String, tick: usize, msg: String },
    #[error("sync map {0}->{1}: {2}")]
    BadSync(String, String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemBehavior {
    clocks: Vec<ClockId>,
    variables: Vec<VariableDecl>,
    traces: Vec<ClockTrace>,
    syncs: BTreeMap<(usize, usize), Vec<i64>>,
    // variable name -> (clock index, column)
    var_index: BTreeMap<String, (usize, usize)>,
}

impl SystemBehavior {
    pub fn new(clocks: Vec<ClockId>, variables: Vec<VariableDecl>) -> Result<Self, BehaviorError> {
        for (i, c) in clocks.iter().enumerate() {
            if clocks[..i].iter().any(|d| d.name == c.name) {
                return Err(BehaviorError::DuplicateClock(c.name.clone()));
            }
        }
        let physical = clocks.iter().filter(|c| matches!(c.kind, ClockKind::Physical { .. })).count();
        if physical != 1 {
            return Err(BehaviorError::PhysicalClockCount(physical));
        }
        let mut var_index = BTreeMap::new();
        let mut columns = vec![0usize; clocks.len()];
        for v in &variables {
            let ci = clocks
                .iter()
                .position(|c| c.name == v.clock)
                .ok_or_else(|| BehaviorError::UndeclaredClock(v.name.clone(), v.clock.clone()))?;
            if var_index.insert(v.name.clone(), (ci, columns[ci])).is_some() {
                return Err(BehaviorError::DuplicateVariable(v.name.clone()));
            }
            columns[ci] += 1;
        }
        let traces = vec![ClockTrace::default(); clocks.len()];
        Ok(SystemBehavior { clocks, variables, traces, syncs: BTreeMap::new(), var_index })
    }

    pub fn clocks(&self) -> &[ClockId] {
        &self.clocks
    }

    pub fn variables(&self) -> &[VariableDecl] {
        &self.variables
    }

    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c.name == name)
    }

    pub fn clock(&self, name: &str) -> Option<&ClockId> {
        self.clocks.iter().find(|c| c.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn physical_clock(&self) -> (usize, f64) {
        self.clocks
            .iter()
            .enumerate()
            .find_map(|(i, c)| match c.kind {
                ClockKind::Physical { h } => Some((i, h)),
                ClockKind::Discrete => None,
            })
            .expect("validated at construction")
    }

    /// Variables of `clock` in column order.
    pub fn clock_variables(&self, clock: usize) -> Vec<&VariableDecl> {
        let name = &self.clocks[clock].name;
        self.variables.iter().filter(|v| &v.clock == name).collect()
    }

    pub fn trace(&self, clock: usize) -> &ClockTrace {
        &self.traces[clock]
    }

    pub fn len(&self, clock: usize) -> usize {
        self.traces[clock].len()
    }

    pub fn push_tick(&mut self, clock: usize, row: Vec<Value>) -> Result<(), BehaviorError> {
        let vars = self.clock_variables(clock);
        let tick = self.traces[clock].len();
        let bad = |msg: String| BehaviorError::BadTick { clock: self.clocks[clock].name.clone(), tick, msg };
        if vars.len() != row.len() {
            return Err(bad(format!("expected {} valuations, got {}", vars.len(), row.len())));
        }
        for (v, val) in vars.iter().zip(&row) {
            if v.shape != val.shape() {
                return Err(bad(format!("variable `{}` has shape {:?}, got {:?}", v.name, v.shape, val.shape())));
            }
        }
        self.traces[clock].ticks.push(row);
        Ok(())
    }

    pub fn set_sync(&mut self, source: usize, target: usize, samples: Vec<i64>) {
        self.syncs.insert((source, target), samples);
    }

    pub fn sync(&self, source: usize, target: usize) -> Option<&[i64]> {
        self.syncs.get(&(source, target)).map(|v| v.as_slice())
    }

    pub fn sync_maps(&self) -> impl Iterator<Item = SyncMap> + '_ {
        self.syncs.iter().map(|(&(s, t), samples)| SyncMap {
            source: self.clocks[s].name.clone(),
            target: self.clocks[t].name.clone(),
            samples: samples.clone(),
        })
    }

    /// Checks trace shapes, sync-map lengths, monotonicity and causality
    /// with respect to the physical clock.
    pub fn validate(&self) -> Result<(), BehaviorError> {
        for (&(s, t), samples) in &self.syncs {
            let (sn, tn) = (self.clocks[s].name.clone(), self.clocks[t].name.clone());
            let err = |m: String| BehaviorError::BadSync(sn.clone(), tn.clone(), m);
            if samples.len() != self.len(s) {
                return Err(err(format!("{} samples for {} source ticks", samples.len(), self.len(s))));
            }
            if s == t {
                if samples.iter().enumerate().any(|(i, &x)| x != i as i64) {
                    return Err(err("self map is not the identity".into()));
                }
                continue;
            }
            for w in samples.windows(2) {
                if w[1] < w[0] {
                    return Err(err("not monotone".into()));
                }
            }
            if samples.iter().any(|&x| x < -1 || x >= self.len(t) as i64) {
                return Err(err("sample outside the target trace".into()));
            }
            for (i, &x) in samples.iter().enumerate() {
                if x < 0 {
                    continue;
                }
                if let (Some(src), Some(dst)) = (self.grid_tick(s, i), self.grid_tick(t, x as usize)) {
                    if dst > src {
                        return Err(err(format!("source tick {i} observes target tick {x} from the future")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Grid index of the physical instant of tick `i` of `clock`, when known.
    pub fn grid_tick(&self, clock: usize, i: usize) -> Option<i64> {
        let (phys, _) = self.physical_clock();
        if clock == phys {
            return Some(i as i64);
        }
        self.sync(clock, phys).and_then(|v| v.get(i).copied())
    }

    pub fn view(&self) -> View<'_> {
        View { beh: self, shift: vec![0; self.clocks.len()] }
    }
}

/// A read-only view of a behavior in which the synchronization maps out of
/// each clock `c` are advanced by `shift[c]` source ticks.
#[derive(Clone)]
pub struct View<'a> {
    beh: &'a SystemBehavior,
    shift: Vec<i64>,
}

impl fmt::Debug for View<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("View").field("shift", &self.shift).finish()
    }
}

impl<'a> View<'a> {
    pub fn behavior(&self) -> &'a SystemBehavior {
        self.beh
    }

    pub fn shift_of(&self, clock: usize) -> i64 {
        self.shift[clock]
    }

    /// The (clock, t)-execution of this view.
    pub fn shift_execution(&self, clock: usize, t: i64) -> View<'a> {
        let mut shift = self.shift.clone();
        shift[clock] += t;
        View { beh: self.beh, shift }
    }

    /// Number of positions of `clock` that exist in this view.
    pub fn len(&self, clock: usize) -> i64 {
        self.beh.len(clock) as i64 - self.shift[clock]
    }

    fn source(&self, clock: usize, at: i64) -> Result<usize, ReadError> {
        let s = at + self.shift[clock];
        if s < 0 || s >= self.beh.len(clock) as i64 {
            return Err(ReadError::OutOfTrace);
        }
        Ok(s as usize)
    }

    /// Shifted map τ̃_c^d evaluated at view position `at`; returns a raw
    /// target tick index.
    fn tau(&self, c: usize, d: usize, at: i64) -> Result<i64, ReadError> {
        let s = self.source(c, at)?;
        self.tau_raw(c, d, s)
    }

    /// Unshifted τ_c^d at recorded tick `s`.
    fn tau_raw(&self, c: usize, d: usize, s: usize) -> Result<i64, ReadError> {
        if c == d {
            return Ok(s as i64);
        }
        let samples = self.beh.sync(c, d).ok_or_else(|| {
            ReadError::MissingSyncMap(self.beh.clocks[c].name.clone(), self.beh.clocks[d].name.clone())
        })?;
        Ok(samples[s])
    }

    fn clock_value(&self, d: usize, tick: i64) -> f64 {
        match self.beh.clocks[d].kind {
            ClockKind::Physical { h } => tick as f64 * h,
            ClockKind::Discrete => tick as f64,
        }
    }

    fn clock_idx(&self, name: &str) -> Result<usize, ReadError> {
        self.beh.clock_index(name).ok_or_else(|| ReadError::UnknownClock(name.to_string()))
    }

    /// Value of `var` as observed by `observer` at view position `at`.
    pub fn read_variable(&self, observer: &str, var: &str, at: i64) -> Result<Value, ReadError> {
        let c = self.clock_idx(observer)?;
        let &(d, col) = self
            .beh
            .var_index
            .get(var)
            .ok_or_else(|| ReadError::UnknownVariable(var.to_string()))?;
        let target = self.tau(c, d, at)?;
        if target < 0 || target >= self.beh.len(d) as i64 {
            return Err(ReadError::OutOfTrace);
        }
        Ok(self.beh.traces[d].ticks[target as usize][col].clone())
    }

    /// τ_observer^target at view position `at`; seconds for a physical
    /// target, a tick index otherwise.
    pub fn read_clock(&self, observer: &str, target: &str, at: i64) -> Result<f64, ReadError> {
        let c = self.clock_idx(observer)?;
        let d = self.clock_idx(target)?;
        let tick = self.tau(c, d, at)?;
        if tick < 0 {
            return Err(ReadError::OutOfTrace);
        }
        Ok(self.clock_value(d, tick))
    }

    /// τ_mid^target ∘ τ_observer^mid at view position `at`. A missing
    /// intermediate tick reads as out of trace.
    pub fn read_clock_pair(&self, observer: &str, mid: &str, target: &str, at: i64) -> Result<f64, ReadError> {
        let c = self.clock_idx(observer)?;
        let d = self.clock_idx(mid)?;
        let e = self.clock_idx(target)?;
        let y = self.tau(c, d, at)?;
        if y < 0 || y >= self.beh.len(d) as i64 {
            return Err(ReadError::OutOfTrace);
        }
        let tick = self.tau_raw(d, e, y as usize)?;
        if tick < 0 {
            return Err(ReadError::OutOfTrace);
        }
        Ok(self.clock_value(e, tick))
    }

    /// Physical time in seconds of the observer's tick at view position `at`.
    pub fn physical_time(&self, observer: &str, at: i64) -> Result<f64, ReadError> {
        let (p, _) = self.beh.physical_clock();
        let name = self.beh.clocks[p].name.clone();
        self.read_clock(observer, &name, at)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_clock() -> SystemBehavior {
        let clocks = vec![
            ClockId { name: "c".into(), kind: ClockKind::Discrete },
            ClockId { name: "d".into(), kind: ClockKind::Physical { h: 0.5 } },
        ];
        let vars = vec![
            VariableDecl { name: "x".into(), clock: "c".into(), shape: Shape::Scalar },
            VariableDecl { name: "y".into(), clock: "d".into(), shape: Shape::Scalar },
        ];
        let mut b = SystemBehavior::new(clocks, vars).unwrap();
        b.push_tick(0, vec![Value::Scalar(1.0)]).unwrap();
        b.push_tick(0, vec![Value::Scalar(2.0)]).unwrap();
        b.push_tick(1, vec![Value::Scalar(7.0)]).unwrap();
        b.push_tick(1, vec![Value::Scalar(9.0)]).unwrap();
        b.set_sync(0, 1, vec![0, 0]);
        b.set_sync(1, 0, vec![0, 1]);
        b
    }

    #[test]
    fn identity_read_at_current_tick() {
        let b = two_clock();
        assert_eq!(b.view().read_variable("c", "x", 1).unwrap(), Value::Scalar(2.0));
    }

    #[test]
    fn read_through_sync_map() {
        let b = two_clock();
        assert_eq!(b.view().read_variable("c", "y", 1).unwrap(), Value::Scalar(7.0));
    }

    #[test]
    fn offset_past_end_is_out_of_trace() {
        let b = two_clock();
        assert_eq!(b.view().read_variable("c", "x", 2), Err(ReadError::OutOfTrace));
        assert_eq!(b.view().read_variable("c", "x", -1), Err(ReadError::OutOfTrace));
    }

    #[test]
    fn unknown_names() {
        let b = two_clock();
        assert!(matches!(b.view().read_variable("c", "z", 0), Err(ReadError::UnknownVariable(_))));
        assert!(matches!(b.view().read_clock("q", "c", 0), Err(ReadError::UnknownClock(_))));
    }

    #[test]
    fn clock_reads() {
        let b = two_clock();
        let v = b.view();
        assert_eq!(v.read_clock("c", "c", 1).unwrap(), 1.0);
        assert_eq!(v.read_clock("d", "d", 1).unwrap(), 0.5);
        assert_eq!(v.read_clock("c", "d", 1).unwrap(), 0.0);
    }

    #[test]
    fn missing_sync_map() {
        let mut b = two_clock();
        b.syncs.clear();
        assert!(matches!(b.view().read_clock("c", "d", 0), Err(ReadError::MissingSyncMap(..))));
    }

    #[test]
    fn clock_pair_composes_two_maps() {
        let clocks = vec![
            ClockId { name: "m".into(), kind: ClockKind::Discrete },
            ClockId { name: "l".into(), kind: ClockKind::Discrete },
            ClockId { name: "r".into(), kind: ClockKind::Physical { h: 0.001 } },
        ];
        let mut b = SystemBehavior::new(clocks, vec![]).unwrap();
        b.push_tick(0, vec![]).unwrap();
        for _ in 0..3 {
            b.push_tick(1, vec![]).unwrap();
        }
        for _ in 0..31 {
            b.push_tick(2, vec![]).unwrap();
        }
        b.set_sync(0, 1, vec![2]);
        b.set_sync(1, 2, vec![0, 10, 20]);
        let v = b.view();
        assert!((v.read_clock_pair("m", "l", "r", 0).unwrap() - 0.020).abs() < 1e-12);
    }

    #[test]
    fn shift_coherence_on_reads() {
        let b = two_clock();
        let v = b.view();
        let s = v.shift_execution(0, 1);
        assert_eq!(v.read_variable("c", "x", 1).unwrap(), s.read_variable("c", "x", 0).unwrap());
        assert_eq!(v.read_clock("c", "c", 1).unwrap(), s.read_clock("c", "c", 0).unwrap());
        let s0 = v.shift_execution(0, 0);
        assert_eq!(v.read_variable("c", "y", 0).unwrap(), s0.read_variable("c", "y", 0).unwrap());
    }

    #[test]
    fn validate_detects_future_reads() {
        let mut b = two_clock();
        assert!(b.validate().is_ok());
        // c-tick 0 sits at physical tick 0 and cannot observe d-tick 1.
        b.set_sync(0, 1, vec![1, 1]);
        assert!(matches!(b.validate(), Err(BehaviorError::BadSync(..))));
    }

    #[test]
    fn single_physical_clock_required() {
        let clocks = vec![ClockId { name: "c".into(), kind: ClockKind::Discrete }];
        assert_eq!(SystemBehavior::new(clocks, vec![]), Err(BehaviorError::PhysicalClockCount(0)));
    }
}
