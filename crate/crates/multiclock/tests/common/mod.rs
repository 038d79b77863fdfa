//! Random traces, random formulas and a brute-force reference evaluator
//! that materializes shifted executions.

#![allow(dead_code)]

use multiclock::behaviors::{ClockId, ClockKind, Shape, SystemBehavior, Value, VariableDecl, View};
use multiclock::mcl::Truth;
use rand::Rng;

pub const TOL: f64 = 1e-9;
pub const H: f64 = 0.25;
/// Clock names by index: a discrete clock and the physical clock.
pub const CLOCKS: [&str; 2] = ["c", "r"];
/// One scalar variable per clock.
pub const VARS: [&str; 2] = ["y", "z"];

/// Raw data of a two-clock behavior.
#[derive(Debug, Clone)]
pub struct Raw {
    pub len: [usize; 2],
    pub vals: [Vec<f64>; 2],
    /// `sync[a][b][i]`: target tick on `b` seen by tick `i` of `a`.
    pub sync: [[Vec<i64>; 2]; 2],
}

pub fn random_raw(rng: &mut impl Rng, max_len: usize) -> Raw {
    let len = [rng.gen_range(0..=max_len), rng.gen_range(0..=max_len)];
    let vals = [0, 1].map(|c| (0..len[c]).map(|_| rng.gen_range(0..4) as f64).collect::<Vec<_>>());
    let mut sync: [[Vec<i64>; 2]; 2] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            sync[a][b] = if a == b {
                (0..len[a] as i64).collect()
            } else {
                let mut cur = -1i64;
                (0..len[a])
                    .map(|_| {
                        if rng.gen_bool(0.6) {
                            cur = (cur + rng.gen_range(0..=2)).min(len[b] as i64 - 1);
                        }
                        cur
                    })
                    .collect()
            };
        }
    }
    Raw { len, vals, sync }
}

pub fn to_behavior(raw: &Raw) -> SystemBehavior {
    let clocks = vec![
        ClockId { name: CLOCKS[0].into(), kind: ClockKind::Discrete },
        ClockId { name: CLOCKS[1].into(), kind: ClockKind::Physical { h: H } },
    ];
    let vars = (0..2)
        .map(|c| VariableDecl { name: VARS[c].into(), clock: CLOCKS[c].into(), shape: Shape::Scalar })
        .collect();
    let mut b = SystemBehavior::new(clocks, vars).unwrap();
    for c in 0..2 {
        for &v in &raw.vals[c] {
            b.push_tick(c, vec![Value::Scalar(v)]).unwrap();
        }
    }
    b.set_sync(0, 1, raw.sync[0][1].clone());
    b.set_sync(1, 0, raw.sync[1][0].clone());
    b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T3 {
    T,
    F,
    U,
}

impl T3 {
    fn not(self) -> T3 {
        match self {
            T3::T => T3::F,
            T3::F => T3::T,
            T3::U => T3::U,
        }
    }
    fn and(self, o: T3) -> T3 {
        match (self, o) {
            (T3::F, _) | (_, T3::F) => T3::F,
            (T3::T, T3::T) => T3::T,
            _ => T3::U,
        }
    }
    fn or(self, o: T3) -> T3 {
        self.not().and(o.not()).not()
    }
    pub fn matches(self, t: Truth) -> bool {
        matches!((self, t), (T3::T, Truth::True) | (T3::F, Truth::False) | (T3::U, Truth::Inconclusive))
    }
}

#[derive(Debug, Clone)]
pub enum Tm {
    Var(usize, i64),
    Clock(usize, i64),
    Pair(usize, usize, i64),
    Num(f64),
    Add(Box<Tm>, Box<Tm>),
    Sub(Box<Tm>, Box<Tm>),
    Mul(Box<Tm>, Box<Tm>),
}

#[derive(Debug, Clone, Copy)]
pub enum Op {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

#[derive(Debug, Clone)]
pub enum Fm {
    Const(bool),
    Cmp(Op, Tm, Tm),
    Not(Box<Fm>),
    And(Box<Fm>, Box<Fm>),
    Or(Box<Fm>, Box<Fm>),
    Imp(Box<Fm>, Box<Fm>),
    Ite(Box<Fm>, Box<Fm>, Box<Fm>),
    F(u64, Option<u64>, Box<Fm>),
    G(u64, Option<u64>, Box<Fm>),
}

#[derive(Debug, Clone)]
pub enum Gl {
    Bind(usize, Fm),
    Not(Box<Gl>),
    And(Box<Gl>, Box<Gl>),
    Or(Box<Gl>, Box<Gl>),
    Imp(Box<Gl>, Box<Gl>),
}

pub fn tm_text(t: &Tm) -> String {
    match t {
        Tm::Var(c, k) => format!("{}({k})", VARS[*c]),
        Tm::Clock(c, k) => format!("{}({k})", CLOCKS[*c]),
        Tm::Pair(m, d, k) => format!("{}^{}({k})", CLOCKS[*m], CLOCKS[*d]),
        Tm::Num(x) => format!("{x}"),
        Tm::Add(a, b) => format!("({} + {})", tm_text(a), tm_text(b)),
        Tm::Sub(a, b) => format!("({} - {})", tm_text(a), tm_text(b)),
        Tm::Mul(a, b) => format!("({} * {})", tm_text(a), tm_text(b)),
    }
}

fn interval(lo: u64, hi: Option<u64>) -> String {
    match hi {
        Some(h) => format!("[{lo},{h}]"),
        None => format!("[{lo},inf]"),
    }
}

pub fn fm_text(f: &Fm) -> String {
    match f {
        Fm::Const(b) => b.to_string(),
        Fm::Cmp(op, a, b) => {
            let o = match op {
                Op::Lt => "<",
                Op::Le => "<=",
                Op::Eq => "=",
                Op::Ne => "!=",
                Op::Gt => ">",
                Op::Ge => ">=",
            };
            format!("({} {o} {})", tm_text(a), tm_text(b))
        }
        Fm::Not(a) => format!("!({})", fm_text(a)),
        Fm::And(a, b) => format!("({} && {})", fm_text(a), fm_text(b)),
        Fm::Or(a, b) => format!("({} || {})", fm_text(a), fm_text(b)),
        Fm::Imp(a, b) => format!("({} -> {})", fm_text(a), fm_text(b)),
        Fm::Ite(c, a, b) => format!("(if {} then {} else {})", fm_text(c), fm_text(a), fm_text(b)),
        Fm::F(lo, hi, a) => format!("F{} ({})", interval(*lo, *hi), fm_text(a)),
        Fm::G(lo, hi, a) => format!("G{} ({})", interval(*lo, *hi), fm_text(a)),
    }
}

pub fn gl_text(g: &Gl) -> String {
    match g {
        Gl::Bind(c, f) => format!("(@{}. {})", CLOCKS[*c], fm_text(f)),
        Gl::Not(a) => format!("!{}", gl_text(a)),
        Gl::And(a, b) => format!("({} && {})", gl_text(a), gl_text(b)),
        Gl::Or(a, b) => format!("({} || {})", gl_text(a), gl_text(b)),
        Gl::Imp(a, b) => format!("({} -> {})", gl_text(a), gl_text(b)),
    }
}

fn random_term(rng: &mut impl Rng, observer: usize, depth: usize) -> Tm {
    let k = rng.gen_range(-1..=2);
    match rng.gen_range(0..if depth == 0 { 4 } else { 7 }) {
        0 => Tm::Var(rng.gen_range(0..2), k),
        1 => Tm::Clock(rng.gen_range(0..2), k),
        2 => Tm::Pair(1 - observer, rng.gen_range(0..2), k),
        3 => Tm::Num(rng.gen_range(0..8) as f64 * 0.5),
        4 => Tm::Add(Box::new(random_term(rng, observer, depth - 1)), Box::new(random_term(rng, observer, depth - 1))),
        5 => Tm::Sub(Box::new(random_term(rng, observer, depth - 1)), Box::new(random_term(rng, observer, depth - 1))),
        _ => Tm::Mul(Box::new(random_term(rng, observer, depth - 1)), Box::new(random_term(rng, observer, depth - 1))),
    }
}

fn random_atom(rng: &mut impl Rng, observer: usize) -> Fm {
    if rng.gen_bool(0.1) {
        return Fm::Const(rng.gen_bool(0.5));
    }
    let op = [Op::Lt, Op::Le, Op::Eq, Op::Ne, Op::Gt, Op::Ge][rng.gen_range(0..6)];
    Fm::Cmp(op, random_term(rng, observer, 1), random_term(rng, observer, 1))
}

/// A local formula for `observer` of depth at most `depth`; unbounded
/// modalities only when `unbounded` is set.
pub fn random_local(rng: &mut impl Rng, observer: usize, depth: usize, unbounded: bool) -> Fm {
    if depth == 0 || rng.gen_bool(0.2) {
        return random_atom(rng, observer);
    }
    let sub = |rng: &mut _| Box::new(random_local(rng, observer, depth - 1, unbounded));
    let bounds = |rng: &mut dyn rand::RngCore| {
        let lo = rng.gen_range(0..=2);
        if unbounded && rng.gen_bool(0.3) {
            (lo, None)
        } else {
            (lo, Some(lo + rng.gen_range(0..=3)))
        }
    };
    match rng.gen_range(0..8) {
        0 => Fm::Not(sub(rng)),
        1 => Fm::And(sub(rng), sub(rng)),
        2 => Fm::Or(sub(rng), sub(rng)),
        3 => Fm::Imp(sub(rng), sub(rng)),
        4 => Fm::Ite(sub(rng), sub(rng), sub(rng)),
        5 | 6 => {
            let (lo, hi) = bounds(rng);
            Fm::F(lo, hi, sub(rng))
        }
        _ => {
            let (lo, hi) = bounds(rng);
            Fm::G(lo, hi, sub(rng))
        }
    }
}

pub fn random_global(rng: &mut impl Rng, depth: usize, unbounded: bool) -> Gl {
    if depth == 0 || rng.gen_bool(0.6) {
        let c = rng.gen_range(0..2);
        return Gl::Bind(c, random_local(rng, c, 4, unbounded));
    }
    let sub = |rng: &mut _| Box::new(random_global(rng, depth - 1, unbounded));
    match rng.gen_range(0..4) {
        0 => Gl::Not(sub(rng)),
        1 => Gl::And(sub(rng), sub(rng)),
        2 => Gl::Or(sub(rng), sub(rng)),
        _ => Gl::Imp(sub(rng), sub(rng)),
    }
}

/// A materialized execution: the maps out of clock `a` are the recorded
/// ones precomposed with `x ↦ x + origin[a]`.
#[derive(Debug, Clone, Copy)]
pub struct Exec<'a> {
    pub raw: &'a Raw,
    pub origin: [i64; 2],
}

impl<'a> Exec<'a> {
    pub fn new(raw: &'a Raw) -> Self {
        Exec { raw, origin: [0, 0] }
    }

    pub fn shift(self, c: usize, t: i64) -> Self {
        let mut origin = self.origin;
        origin[c] += t;
        Exec { raw: self.raw, origin }
    }

    fn tau(&self, a: usize, b: usize, x: i64) -> Option<i64> {
        let i = x + self.origin[a];
        (0..self.raw.len[a] as i64).contains(&i).then(|| self.raw.sync[a][b][i as usize])
    }

    fn exists(&self, a: usize) -> bool {
        self.tau(a, a, 0).is_some()
    }

    fn term(&self, a: usize, t: &Tm) -> Option<f64> {
        let clock_value = |b: usize, tick: i64| if b == 1 { tick as f64 * H } else { tick as f64 };
        match t {
            Tm::Var(b, k) => {
                let i = self.tau(a, *b, *k)?;
                (0..self.raw.len[*b] as i64).contains(&i).then(|| self.raw.vals[*b][i as usize])
            }
            Tm::Clock(b, k) => {
                let i = self.tau(a, *b, *k)?;
                (i >= 0).then(|| clock_value(*b, i))
            }
            Tm::Pair(m, d, k) => {
                let y = self.tau(a, *m, *k)?;
                if !(0..self.raw.len[*m] as i64).contains(&y) {
                    return None;
                }
                let i = self.tau(*m, *d, y)?;
                (i >= 0).then(|| clock_value(*d, i))
            }
            Tm::Num(x) => Some(*x),
            Tm::Add(p, q) => Some(self.term(a, p)? + self.term(a, q)?),
            Tm::Sub(p, q) => Some(self.term(a, p)? - self.term(a, q)?),
            Tm::Mul(p, q) => Some(self.term(a, p)? * self.term(a, q)?),
        }
    }

    /// Verdict of `f` at the current position of clock `a`.
    pub fn local(&self, a: usize, f: &Fm) -> T3 {
        match f {
            Fm::Const(b) => if *b { T3::T } else { T3::F },
            Fm::Cmp(op, p, q) => match (self.term(a, p), self.term(a, q)) {
                (Some(x), Some(y)) => {
                    let b = match op {
                        Op::Lt => x < y - TOL,
                        Op::Le => x <= y + TOL,
                        Op::Eq => (x - y).abs() <= TOL,
                        Op::Ne => (x - y).abs() > TOL,
                        Op::Gt => x > y + TOL,
                        Op::Ge => x >= y - TOL,
                    };
                    if b { T3::T } else { T3::F }
                }
                _ => T3::U,
            },
            Fm::Not(p) => self.local(a, p).not(),
            Fm::And(p, q) => self.local(a, p).and(self.local(a, q)),
            Fm::Or(p, q) => self.local(a, p).or(self.local(a, q)),
            Fm::Imp(p, q) => self.local(a, p).not().or(self.local(a, q)),
            Fm::Ite(c, p, q) => {
                let cv = self.local(a, c);
                cv.not().or(self.local(a, p)).and(cv.or(self.local(a, q)))
            }
            Fm::F(lo, hi, p) => self.modal(a, *lo, *hi, p, T3::T),
            Fm::G(lo, hi, p) => self.modal(a, *lo, *hi, p, T3::F),
        }
    }

    /// Enumerates the shifted executions `t ∈ [lo, hi]` that exist.
    fn modal(&self, a: usize, lo: u64, hi: Option<u64>, p: &Fm, decisive: T3) -> T3 {
        let mut all_other = hi.is_some();
        let mut t = lo as i64;
        loop {
            if hi.is_some_and(|h| t > h as i64) {
                break;
            }
            let shifted = self.shift(a, t);
            if !shifted.exists(a) {
                all_other = false;
                break;
            }
            let v = shifted.local(a, p);
            if v == decisive {
                return decisive;
            }
            all_other &= v == decisive.not();
            t += 1;
        }
        if all_other { decisive.not() } else { T3::U }
    }

    pub fn global(&self, g: &Gl) -> T3 {
        match g {
            Gl::Bind(c, f) => self.local(*c, f),
            Gl::Not(p) => self.global(p).not(),
            Gl::And(p, q) => self.global(p).and(self.global(q)),
            Gl::Or(p, q) => self.global(p).or(self.global(q)),
            Gl::Imp(p, q) => self.global(p).not().or(self.global(q)),
        }
    }
}

/// One-tick behavior over propositional atoms `a0, a1, ...` (0 or 1) on
/// clock `c`.
pub fn prop_behavior(vals: &[bool]) -> SystemBehavior {
    let clocks = vec![
        ClockId { name: "c".into(), kind: ClockKind::Discrete },
        ClockId { name: "r".into(), kind: ClockKind::Physical { h: 1.0 } },
    ];
    let vars = (0..vals.len())
        .map(|i| VariableDecl { name: format!("a{i}"), clock: "c".into(), shape: Shape::Scalar })
        .collect();
    let mut b = SystemBehavior::new(clocks, vars).unwrap();
    b.push_tick(0, vals.iter().map(|&v| Value::Scalar(if v { 1.0 } else { 0.0 })).collect()).unwrap();
    b.push_tick(1, vec![]).unwrap();
    b.set_sync(0, 1, vec![0]);
    b.set_sync(1, 0, vec![0]);
    b
}

/// All `2^n` one-tick behaviors over `n` atoms, valuation `i` at index `i`.
pub fn prop_corpus(n: usize) -> Vec<SystemBehavior> {
    (0..1usize << n).map(|i| prop_behavior(&(0..n).map(|k| i >> k & 1 == 1).collect::<Vec<_>>())).collect()
}

/// Text of the Boolean function with truth table `table` over `n` atoms,
/// as a disjunction of minterms.
pub fn dnf_text(table: u32, n: usize) -> String {
    let terms: Vec<String> = (0..1usize << n)
        .filter(|i| table >> i & 1 == 1)
        .map(|i| {
            let lits: Vec<String> = (0..n).map(|k| format!("a{k} = {}", i >> k & 1)).collect();
            format!("({})", lits.join(" && "))
        })
        .collect();
    if terms.is_empty() {
        "false".into()
    } else {
        terms.join(" || ")
    }
}

fn same_value(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => x.to_bits() == y.to_bits(),
        (Value::Vector(x), Value::Vector(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()),
        (Value::Trajectory(x), Value::Trajectory(y)) => x == y,
        _ => false,
    }
}

/// Whether every variable, clock and clock-pair read from every observer
/// at offsets `-1..=len` agrees bit for bit between `a` and `b`.
pub fn read_equivalent(beh: &SystemBehavior, a: &View, b: &View) -> bool {
    let names: Vec<&str> = beh.clocks().iter().map(|c| c.name.as_str()).collect();
    for (ci, obs) in names.iter().enumerate() {
        for at in -1..=a.len(ci).max(b.len(ci)) {
            for v in beh.variables() {
                let ok = match (a.read_variable(obs, &v.name, at), b.read_variable(obs, &v.name, at)) {
                    (Ok(p), Ok(q)) => same_value(&p, &q),
                    (Err(p), Err(q)) => p == q,
                    _ => false,
                };
                if !ok {
                    return false;
                }
            }
            for target in &names {
                if a.read_clock(obs, target, at).map(f64::to_bits) != b.read_clock(obs, target, at).map(f64::to_bits) {
                    return false;
                }
                for mid in names.iter().filter(|m| *m != obs) {
                    let (x, y) = (a.read_clock_pair(obs, mid, target, at), b.read_clock_pair(obs, mid, target, at));
                    if x.map(f64::to_bits) != y.map(f64::to_bits) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
