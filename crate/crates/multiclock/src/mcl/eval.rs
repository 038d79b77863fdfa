//! Three-valued finite-trace evaluation of MCL formulas.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::ast::*;
use crate::behaviors::{ClockKind, ReadError, Shape, SystemBehavior, Value, View};
use crate::predicates::{Call, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Inconclusive,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Inconclusive => Truth::Inconclusive,
        }
    }

    pub fn and(self, other: Truth) -> Self {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Inconclusive,
        }
    }

    pub fn or(self, other: Truth) -> Self {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Truth) -> Self {
        self.not().or(other)
    }

    pub fn label(self) -> &'static str {
        match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Truth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A truth value plus the tick position (of the bound clock) that decided
/// it, when a temporal operator did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub truth: Truth,
    pub witness: Option<i64>,
}

impl Verdict {
    pub fn new(truth: Truth) -> Self {
        Verdict { truth, witness: None }
    }

    fn not(self) -> Self {
        Verdict { truth: self.truth.not(), witness: self.witness }
    }

    // The deciding operand supplies the witness.
    fn and(self, other: Verdict) -> Self {
        let truth = self.truth.and(other.truth);
        let witness = match truth {
            Truth::False if self.truth == Truth::False => self.witness,
            Truth::False => other.witness,
            Truth::True => other.witness.or(self.witness),
            Truth::Inconclusive => None,
        };
        Verdict { truth, witness }
    }

    fn or(self, other: Verdict) -> Self {
        self.not().and(other.not()).not()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("`{0}` is not a variable, clock or parameter")]
    UnknownName(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{name}` expects {expected}, got {got}")]
    Arity { name: String, expected: String, got: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("no synchronization map from `{0}` to `{1}`")]
    MissingSyncMap(String, String),
    #[error("predicate `{0}`: {1}")]
    Predicate(String, String),
}

/// Why a term or predicate argument could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    OutOfTrace,
    Error(EvalError),
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::Error(e)
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::OutOfTrace => Failure::OutOfTrace,
            ReadError::UnknownVariable(v) => Failure::Error(EvalError::UnknownName(v)),
            ReadError::UnknownClock(c) => Failure::Error(EvalError::UnknownClock(c)),
            ReadError::MissingSyncMap(a, b) => Failure::Error(EvalError::MissingSyncMap(a, b)),
        }
    }
}

pub type Params = BTreeMap<String, Value>;

/// Everything an evaluation needs besides the formula and the trace.
pub struct Env<'a> {
    pub registry: &'a Registry,
    pub params: &'a Params,
    /// Tolerance of `=` and `!=` on reals.
    pub eq_tol: f64,
}

impl<'a> Env<'a> {
    pub fn new(registry: &'a Registry, params: &'a Params) -> Self {
        Env { registry, params, eq_tol: 1e-9 }
    }
}

/// Resolves every name of `f` against `beh`, `env.params` and the predicate
/// registry.
pub fn bind(f: &Global, beh: &SystemBehavior, env: &Env) -> Result<(), EvalError> {
    for (clock, body) in f.leaves() {
        let c = beh.clock_index(clock).ok_or_else(|| EvalError::UnknownClock(clock.to_string()))?;
        bind_local(body, c, beh, env)?;
    }
    Ok(())
}

fn need_sync(beh: &SystemBehavior, c: usize, d: usize) -> Result<(), EvalError> {
    if c != d && beh.sync(c, d).is_none() {
        return Err(EvalError::MissingSyncMap(beh.clocks()[c].name.clone(), beh.clocks()[d].name.clone()));
    }
    Ok(())
}

fn bind_local(l: &Local, c: usize, beh: &SystemBehavior, env: &Env) -> Result<(), EvalError> {
    match l {
        Local::Const(_) => Ok(()),
        Local::Atom(Atom::Cmp { lhs, rhs, .. }) => {
            bind_term(lhs, c, beh, env)?;
            bind_term(rhs, c, beh, env)
        }
        Local::Atom(Atom::Pred { name, args, params }) => {
            let pred = env.registry.get(name).ok_or_else(|| EvalError::UnknownPredicate(name.clone()))?;
            let (na, np) = pred.arity();
            if !na.contains(&args.len()) || !np.contains(&params.len()) {
                return Err(EvalError::Arity {
                    name: name.clone(),
                    expected: format!("{na:?} terms and {np:?} parameters"),
                    got: format!("{} and {}", args.len(), params.len()),
                });
            }
            for a in args {
                bind_term(a, c, beh, env)?;
            }
            for p in params {
                param_value(p, env)?;
            }
            Ok(())
        }
        Local::Not(a) | Local::Eventually { body: a, .. } | Local::Globally { body: a, .. } => bind_local(a, c, beh, env),
        Local::And(a, b) | Local::Or(a, b) | Local::Implies(a, b) => {
            bind_local(a, c, beh, env)?;
            bind_local(b, c, beh, env)
        }
        Local::Ite(a, b, d) => {
            bind_local(a, c, beh, env)?;
            bind_local(b, c, beh, env)?;
            bind_local(d, c, beh, env)
        }
    }
}

fn bind_term(t: &Term, c: usize, beh: &SystemBehavior, env: &Env) -> Result<(), EvalError> {
    match t {
        Term::Num(_) => Ok(()),
        Term::Arith { lhs, rhs, .. } => {
            bind_term(lhs, c, beh, env)?;
            bind_term(rhs, c, beh, env)
        }
        Term::Pair { mid, target, .. } => {
            let d = beh.clock_index(mid).ok_or_else(|| EvalError::UnknownClock(mid.clone()))?;
            let e = beh.clock_index(target).ok_or_else(|| EvalError::UnknownClock(target.clone()))?;
            need_sync(beh, c, d)?;
            need_sync(beh, d, e)
        }
        Term::Ref { name, offset, at } => {
            if let Some(v) = beh.variable(name) {
                let d = beh.clock_index(&v.clock).expect("validated behavior");
                need_sync(beh, c, d)?;
                match (at, v.shape) {
                    (Some(t), Shape::Trajectory) => bind_term(t, c, beh, env),
                    (Some(_), _) => Err(EvalError::Type(format!("`{name}` is not trajectory-valued"))),
                    (None, _) => Ok(()),
                }
            } else if let Some(d) = beh.clock_index(name) {
                if at.is_some() {
                    return Err(EvalError::Type(format!("clock `{name}` takes no time argument")));
                }
                need_sync(beh, c, d)
            } else if env.params.contains_key(name) {
                if *offset != 0 || at.is_some() {
                    return Err(EvalError::Type(format!("parameter `{name}` takes no offset")));
                }
                Ok(())
            } else {
                Err(EvalError::UnknownName(name.clone()))
            }
        }
    }
}

pub(crate) fn param_value(p: &Param, env: &Env) -> Result<f64, EvalError> {
    match p {
        Param::Num(x) => Ok(*x),
        Param::Name(n) => match env.params.get(n) {
            Some(v) => v.as_scalar().ok_or_else(|| EvalError::Type(format!("parameter `{n}` is not a scalar"))),
            None => Err(EvalError::UnknownName(n.clone())),
        },
    }
}

/// Evaluates a global formula on a behavior; bindings start at position 0.
pub fn eval_global(f: &Global, beh: &SystemBehavior, env: &Env) -> Result<Verdict, EvalError> {
    bind(f, beh, env)?;
    eval_global_view(f, &beh.view(), env)
}

/// Like [`eval_global`] on an arbitrary view, without the bind step.
pub fn eval_global_view(f: &Global, view: &View, env: &Env) -> Result<Verdict, EvalError> {
    Ok(match f {
        Global::Bind { clock, body } => eval_local(body, view, clock, 0, env)?,
        Global::Not(a) => eval_global_view(a, view, env)?.not(),
        Global::And(a, b) => eval_global_view(a, view, env)?.and(eval_global_view(b, view, env)?),
        Global::Or(a, b) => eval_global_view(a, view, env)?.or(eval_global_view(b, view, env)?),
        Global::Implies(a, b) => eval_global_view(a, view, env)?.not().or(eval_global_view(b, view, env)?),
    })
}

/// Evaluates a local formula at position `pos` of `clock` in `view`.
pub fn eval_local(phi: &Local, view: &View, clock: &str, pos: i64, env: &Env) -> Result<Verdict, EvalError> {
    let c = view.behavior().clock_index(clock).ok_or_else(|| EvalError::UnknownClock(clock.to_string()))?;
    Evaluator::new(view, c, env).local(phi, pos)
}

/// Finite-trace witness for `@c. F G body`: the earliest tick `w` of the
/// bound clock such that `body` is True at every tick from `w` to the end.
/// `None` when the formula has another shape or no such tick exists.
pub fn eventually_always_witness(f: &Global, beh: &SystemBehavior, env: &Env) -> Result<Option<i64>, EvalError> {
    let Global::Bind { clock, body } = f else { return Ok(None) };
    let Local::Eventually { lo: 0, hi: None, body: inner } = body else { return Ok(None) };
    let Local::Globally { lo: 0, hi: None, body: core } = inner.as_ref() else { return Ok(None) };
    bind(f, beh, env)?;
    let view = beh.view();
    let c = beh.clock_index(clock).ok_or_else(|| EvalError::UnknownClock(clock.clone()))?;
    let mut ev = Evaluator::new(&view, c, env);
    let mut witness = None;
    for pos in (0..view.len(c)).rev() {
        if ev.local(core, pos)?.truth != Truth::True {
            break;
        }
        witness = Some(pos);
    }
    Ok(witness)
}

/// Evaluates a term as observed from `clock` at `pos`.
pub fn eval_term(t: &Term, view: &View, clock: &str, pos: i64, env: &Env) -> Result<Value, Failure> {
    let c = view.behavior().clock_index(clock).ok_or_else(|| EvalError::UnknownClock(clock.to_string()))?;
    Evaluator::new(view, c, env).term(t, pos)
}

/// Memoizing evaluator for one (view, clock) pair.
pub struct Evaluator<'v, 'a> {
    view: &'v View<'a>,
    env: &'v Env<'v>,
    clock: usize,
    clock_name: String,
    memo: HashMap<(usize, i64), Verdict>,
    // Suffix tables of unbounded modalities, keyed by node address.
    suffix: HashMap<usize, Vec<Verdict>>,
}

fn key<T>(node: &T) -> usize {
    node as *const T as usize
}

impl<'v, 'a> Evaluator<'v, 'a> {
    pub fn new(view: &'v View<'a>, clock: usize, env: &'v Env<'v>) -> Self {
        let clock_name = view.behavior().clocks()[clock].name.clone();
        Evaluator { view, env, clock, clock_name, memo: HashMap::new(), suffix: HashMap::new() }
    }

    fn len(&self) -> i64 {
        self.view.len(self.clock)
    }

    pub fn local(&mut self, phi: &Local, pos: i64) -> Result<Verdict, EvalError> {
        if let Some(v) = self.memo.get(&(key(phi), pos)) {
            return Ok(*v);
        }
        let v = match phi {
            Local::Const(b) => Verdict::new(Truth::from_bool(*b)),
            Local::Atom(a) => Verdict::new(self.atom(a, pos)?),
            Local::Not(a) => self.local(a, pos)?.not(),
            Local::And(a, b) => self.local(a, pos)?.and(self.local(b, pos)?),
            Local::Or(a, b) => self.local(a, pos)?.or(self.local(b, pos)?),
            Local::Implies(a, b) => self.local(a, pos)?.not().or(self.local(b, pos)?),
            Local::Ite(c, a, b) => {
                let cv = self.local(c, pos)?;
                let then = cv.not().or(self.local(a, pos)?);
                let other = cv.or(self.local(b, pos)?);
                then.and(other)
            }
            Local::Eventually { lo, hi: Some(hi), body } => self.bounded(body, pos, *lo, *hi, true)?,
            Local::Globally { lo, hi: Some(hi), body } => self.bounded(body, pos, *lo, *hi, false)?,
            Local::Eventually { lo, hi: None, body } => self.unbounded(phi, body, pos, *lo, true)?,
            Local::Globally { lo, hi: None, body } => self.unbounded(phi, body, pos, *lo, false)?,
        };
        self.memo.insert((key(phi), pos), v);
        Ok(v)
    }

    /// F (`exists`) or G over `pos+lo ..= pos+hi`.
    fn bounded(&mut self, body: &Local, pos: i64, lo: u64, hi: u64, exists: bool) -> Result<Verdict, EvalError> {
        let (decisive, other) = if exists { (Truth::True, Truth::False) } else { (Truth::False, Truth::True) };
        let mut all_other = true;
        for t in lo..=hi {
            let p = pos + t as i64;
            if p >= self.len() {
                all_other = false;
                break;
            }
            let v = self.local(body, p)?;
            if v.truth == decisive {
                return Ok(Verdict { truth: decisive, witness: Some(p) });
            }
            all_other &= v.truth == other;
        }
        Ok(Verdict::new(if all_other { other } else { Truth::Inconclusive }))
    }

    /// Unbounded F or G via a suffix table: the verdict at `p` combines the
    /// body at `p` with the verdict at `p + 1`; past the end nothing is
    /// decided.
    fn unbounded(&mut self, node: &Local, body: &Local, pos: i64, lo: u64, exists: bool) -> Result<Verdict, EvalError> {
        let start = pos + lo as i64;
        let n = self.len();
        if start >= n {
            return Ok(Verdict::new(Truth::Inconclusive));
        }
        let decisive = if exists { Truth::True } else { Truth::False };
        if !self.suffix.contains_key(&key(node)) {
            let mut table = vec![Verdict::new(Truth::Inconclusive); n.max(0) as usize + 1];
            for p in (0..n).rev() {
                let v = self.local(body, p)?;
                table[p as usize] = if v.truth == decisive {
                    Verdict { truth: decisive, witness: Some(p) }
                } else {
                    table[p as usize + 1]
                };
            }
            self.suffix.insert(key(node), table);
        }
        Ok(self.suffix[&key(node)][start as usize])
    }

    fn atom(&mut self, a: &Atom, pos: i64) -> Result<Truth, EvalError> {
        let r = match a {
            Atom::Cmp { op, lhs, rhs } => self.compare(*op, lhs, rhs, pos).map(Truth::from_bool),
            Atom::Pred { name, args, params } => {
                let pred = self.env.registry.get(name).ok_or_else(|| EvalError::UnknownPredicate(name.clone()))?;
                let params = params.iter().map(|p| param_value(p, self.env)).collect::<Result<Vec<_>, _>>()?;
                let mut call = PredCall { ev: self, args, params, pos };
                pred.eval(&mut call).map(Truth::from_bool).map_err(|f| match f {
                    Failure::Error(EvalError::Type(m)) => Failure::Error(EvalError::Predicate(name.clone(), m)),
                    other => other,
                })
            }
        };
        match r {
            Ok(t) => Ok(t),
            Err(Failure::OutOfTrace) => Ok(Truth::Inconclusive),
            Err(Failure::Error(e)) => Err(e),
        }
    }

    fn compare(&mut self, op: CmpOp, lhs: &Term, rhs: &Term, pos: i64) -> Result<bool, Failure> {
        let a = self.term(lhs, pos)?;
        let b = self.term(rhs, pos)?;
        let tol = self.env.eq_tol;
        if matches!(op, CmpOp::Eq | CmpOp::Ne) {
            let (x, y) = match (a.as_slice(), b.as_slice()) {
                (Some(x), Some(y)) if x.len() == y.len() => (x.to_vec(), y.to_vec()),
                _ => return Err(EvalError::Type(format!("cannot compare {:?} with {:?}", a.shape(), b.shape())).into()),
            };
            let eq = x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol);
            return Ok(if op == CmpOp::Eq { eq } else { !eq });
        }
        let (x, y) = match (a.as_scalar(), b.as_scalar()) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(EvalError::Type(format!("ordering needs scalars, got {:?} and {:?}", a.shape(), b.shape())).into()),
        };
        Ok(match op {
            CmpOp::Lt => x < y - tol,
            CmpOp::Le => x <= y + tol,
            CmpOp::Gt => x > y + tol,
            CmpOp::Ge => x >= y - tol,
            CmpOp::Eq | CmpOp::Ne => unreachable!(),
        })
    }

    pub fn term(&mut self, t: &Term, pos: i64) -> Result<Value, Failure> {
        let beh = self.view.behavior();
        match t {
            Term::Num(x) => Ok(Value::Scalar(*x)),
            Term::Arith { op, lhs, rhs } => {
                let a = self.term(lhs, pos)?;
                let b = self.term(rhs, pos)?;
                arith(*op, &a, &b).map_err(Failure::from)
            }
            Term::Pair { mid, target, offset } => {
                Ok(Value::Scalar(self.view.read_clock_pair(&self.clock_name, mid, target, pos + offset)?))
            }
            Term::Ref { name, offset, at } => {
                if beh.variable(name).is_some() {
                    let v = self.view.read_variable(&self.clock_name, name, pos + offset)?;
                    let Some(at) = at else { return Ok(v) };
                    let Value::Trajectory(tr) = v else {
                        return Err(EvalError::Type(format!("`{name}` is not trajectory-valued")).into());
                    };
                    let time = self
                        .term(at, pos)?
                        .as_scalar()
                        .ok_or_else(|| EvalError::Type("trajectory time must be a scalar".into()))?;
                    if !(time >= 0.0) {
                        return Err(Failure::OutOfTrace);
                    }
                    Ok(Value::Vector(tr.state(time).to_vec()))
                } else if beh.clock_index(name).is_some() {
                    Ok(Value::Scalar(self.view.read_clock(&self.clock_name, name, pos + offset)?))
                } else if let Some(v) = self.env.params.get(name) {
                    Ok(v.clone())
                } else {
                    Err(EvalError::UnknownName(name.clone()).into())
                }
            }
        }
    }

    pub fn view(&self) -> &View<'a> {
        self.view
    }

    pub fn clock_name(&self) -> &str {
        &self.clock_name
    }
}

pub(crate) fn arith(op: ArithOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    let f = |x: f64, y: f64| match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
    };
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(f(*x, *y))),
        (Value::Vector(x), Value::Vector(y)) if x.len() == y.len() && op != ArithOp::Mul => {
            Ok(Value::Vector(x.iter().zip(y).map(|(p, q)| f(*p, *q)).collect()))
        }
        (Value::Scalar(s), Value::Vector(v)) | (Value::Vector(v), Value::Scalar(s)) if op == ArithOp::Mul => {
            Ok(Value::Vector(v.iter().map(|x| x * s).collect()))
        }
        _ => Err(EvalError::Type(format!("cannot apply {op:?} to {:?} and {:?}", a.shape(), b.shape()))),
    }
}

struct PredCall<'e, 'v, 'a> {
    ev: &'e mut Evaluator<'v, 'a>,
    args: &'e [Term],
    params: Vec<f64>,
    pos: i64,
}

impl Call for PredCall<'_, '_, '_> {
    fn arg_at(&mut self, i: usize, shift: i64) -> Result<Value, Failure> {
        self.ev.term(&self.args[i], self.pos + shift)
    }

    fn arg_text(&self, i: usize) -> String {
        self.args[i].to_string()
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn time(&mut self, shift: i64) -> Result<f64, Failure> {
        let name = self.ev.clock_name.clone();
        Ok(self.ev.view.physical_time(&name, self.pos + shift)?)
    }

    fn grid_step(&self) -> f64 {
        let beh = self.ev.view.behavior();
        let (p, h) = beh.physical_clock();
        debug_assert!(matches!(beh.clocks()[p].kind, ClockKind::Physical { .. }));
        h
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;
    use crate::behaviors::{ClockId, VariableDecl};

    fn single(ys: &[f64]) -> SystemBehavior {
        let mut b = SystemBehavior::new(
            vec![ClockId { name: "c".into(), kind: ClockKind::Physical { h: 0.1 } }],
            vec![VariableDecl { name: "y".into(), clock: "c".into(), shape: Shape::Scalar }],
        )
        .unwrap();
        for y in ys {
            b.push_tick(0, vec![Value::Scalar(*y)]).unwrap();
        }
        b
    }

    fn run(src: &str, beh: &SystemBehavior) -> Verdict {
        let reg = Registry::empty();
        let params = Params::new();
        eval_global(&parse(src).unwrap(), beh, &Env::new(&reg, &params)).unwrap()
    }

    #[test]
    fn bounded_eventually_finds_witness() {
        let v = run("@c. F[0,2] (y(0) > 1)", &single(&[0.0, 1.0, 2.0]));
        assert_eq!(v, Verdict { truth: Truth::True, witness: Some(2) });
    }

    #[test]
    fn unbounded_modalities_stay_open() {
        let b = single(&[0.0, 1.0, 2.0]);
        assert_eq!(run("@c. G (y(0) >= 0)", &b).truth, Truth::Inconclusive);
        assert_eq!(run("@c. F (y(0) > 5)", &b).truth, Truth::Inconclusive);
        assert_eq!(run("@c. G (y < 1)", &b), Verdict { truth: Truth::False, witness: Some(1) });
    }

    #[test]
    fn bounded_false_needs_every_position() {
        let b = single(&[0.0, 0.0, 0.0]);
        assert_eq!(run("@c. F[0,2] y > 1", &b).truth, Truth::False);
        assert_eq!(run("@c. F[1,3] y > 1", &b).truth, Truth::Inconclusive);
        assert_eq!(run("@c. G[1,3] y > 1", &b).truth, Truth::False);
    }

    #[test]
    fn kleene_connectives() {
        let b = single(&[0.0]);
        assert_eq!(run("@c. true", &b).truth, Truth::True);
        assert_eq!(run("!(@c. y(1) > 0)", &b).truth, Truth::Inconclusive);
        assert_eq!(run("(@c. true) && (@c. y(1) > 0)", &b).truth, Truth::Inconclusive);
        assert_eq!(run("(@c. false) && (@c. y(1) > 0)", &b).truth, Truth::False);
        assert_eq!(run("(@c. y(1) > 0) -> @c. true", &b).truth, Truth::True);
    }

    #[test]
    fn equality_tolerance_and_clock_reads() {
        let b = single(&[0.3, 0.1 + 0.2]);
        assert_eq!(run("@c. y(1) = y", &b).truth, Truth::True);
        assert_eq!(run("@c. c(1) - c = 0.1", &b).truth, Truth::True);
        assert_eq!(run("@c. y(-1) = 0", &b).truth, Truth::Inconclusive);
    }

    #[test]
    fn bind_rejects_unknown_names() {
        let reg = Registry::empty();
        let params = Params::new();
        let env = Env::new(&reg, &params);
        let b = single(&[0.0]);
        assert!(matches!(bind(&parse("@q. true").unwrap(), &b, &env), Err(EvalError::UnknownClock(_))));
        assert!(matches!(bind(&parse("@c. z > 0").unwrap(), &b, &env), Err(EvalError::UnknownName(_))));
        assert!(matches!(bind(&parse("@c. P(y;)").unwrap(), &b, &env), Err(EvalError::UnknownPredicate(_))));
    }

    #[test]
    fn parameters_resolve_after_variables_and_clocks() {
        let reg = Registry::empty();
        let mut params = Params::new();
        params.insert("k".into(), Value::Scalar(0.5));
        let env = Env::new(&reg, &params);
        let b = single(&[0.0, 1.0]);
        let v = eval_global(&parse("@c. F[0,1] y > k").unwrap(), &b, &env).unwrap();
        assert_eq!(v, Verdict { truth: Truth::True, witness: Some(1) });
    }
}
