//! Deterministic text encoding of recorded behaviors.
//!
//! ```text
//! multiclock-trace 1
//! [clocks]
//! m discrete
//! r physical 1e-3
//! [variables]
//! x r vector 2
//! x_d m trajectory
//! [ticks.m]
//! 0: bezier(1e-1;5e-1,4.9e-1,...)
//! [ticks.r]
//! 0: [5e-1,1e-1]
//! [sync.m.r]
//! 0 20 41
//! ```
//!
//! Numbers use Rust's shortest round-trip exponent form, so decoding an
//! encoded behavior reproduces every value bit for bit.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use super::{BehaviorError, ClockId, ClockKind, Shape, SystemBehavior, Value, VariableDecl};
use crate::controllers::trajectory::Trajectory;

const MAGIC: &str = "multiclock-trace 1";
const SYNC_PER_LINE: usize = 32;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Scalar(x) => out.push_str(&num(*x)),
        Value::Vector(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&num(*x));
            }
            out.push(']');
        }
        Value::Trajectory(t) => {
            let _ = write!(out, "bezier({};", num(t.dt));
            for (i, p) in t.points.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&num(*p));
            }
            out.push(')');
        }
    }
}

pub fn encode(beh: &SystemBehavior) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str("[clocks]\n");
    for c in beh.clocks() {
        match c.kind {
            ClockKind::Discrete => {
                let _ = writeln!(out, "{} discrete", c.name);
            }
            ClockKind::Physical { h } => {
                let _ = writeln!(out, "{} physical {}", c.name, num(h));
            }
        }
    }
    out.push_str("[variables]\n");
    for v in beh.variables() {
        let shape = match v.shape {
            Shape::Scalar => "scalar".to_string(),
            Shape::Vector(n) => format!("vector {n}"),
            Shape::Trajectory => "trajectory".to_string(),
        };
        let _ = writeln!(out, "{} {} {}", v.name, v.clock, shape);
    }
    for (ci, c) in beh.clocks().iter().enumerate() {
        let _ = writeln!(out, "[ticks.{}]", c.name);
        for (i, row) in beh.trace(ci).ticks.iter().enumerate() {
            let _ = write!(out, "{i}:");
            for v in row {
                out.push(' ');
                write_value(&mut out, v);
            }
            out.push('\n');
        }
    }
    for map in beh.sync_maps() {
        let _ = writeln!(out, "[sync.{}.{}]", map.source, map.target);
        for chunk in map.samples.chunks(SYNC_PER_LINE) {
            let line: Vec<String> = chunk.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner.next().map(|(i, l)| (i + 1, l))
    }

    fn peek_is_header(&mut self) -> bool {
        matches!(self.inner.peek(), Some((_, l)) if l.starts_with('['))
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> DecodeError {
    DecodeError::Syntax { line, msg: msg.into() }
}

fn parse_f64(line: usize, s: &str) -> Result<f64, DecodeError> {
    s.parse::<f64>().map_err(|_| syntax(line, format!("bad number `{s}`")))
}

fn parse_value(line: usize, s: &str, shape: Shape) -> Result<Value, DecodeError> {
    match shape {
        Shape::Scalar => Ok(Value::Scalar(parse_f64(line, s)?)),
        Shape::Vector(n) => {
            let body = s
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| syntax(line, "expected `[...]`"))?;
            let xs = if body.is_empty() {
                Vec::new()
            } else {
                body.split(',').map(|p| parse_f64(line, p)).collect::<Result<Vec<_>, _>>()?
            };
            if xs.len() != n {
                return Err(syntax(line, format!("expected {n} components, got {}", xs.len())));
            }
            Ok(Value::Vector(xs))
        }
        Shape::Trajectory => {
            let body = s
                .strip_prefix("bezier(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| syntax(line, "expected `bezier(...)`"))?;
            let (dt, pts) = body.split_once(';').ok_or_else(|| syntax(line, "missing `;` in bezier block"))?;
            let dt = parse_f64(line, dt)?;
            let points = pts.split(',').map(|p| parse_f64(line, p)).collect::<Result<Vec<_>, _>>()?;
            if points.len() < 4 || (points.len() - 1) % 3 != 0 || !(dt > 0.0) {
                return Err(syntax(line, "malformed bezier block"));
            }
            Ok(Value::Trajectory(Arc::new(Trajectory { dt, points })))
        }
    }
}

pub fn decode(text: &str) -> Result<SystemBehavior, DecodeError> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable() };
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        Some((n, _)) => return Err(syntax(n, format!("expected `{MAGIC}`"))),
        None => return Err(syntax(1, "empty input")),
    }
    let mut clocks = Vec::new();
    let mut variables = Vec::new();
    let mut beh: Option<SystemBehavior> = None;
    while let Some((n, header)) = lines.next() {
        let header = header.trim();
        if header.is_empty() {
            continue;
        }
        let name = header
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| syntax(n, "expected a section header"))?;
        match name {
            "clocks" => {
                while !lines.peek_is_header() {
                    let Some((n, l)) = lines.next() else { break };
                    let parts: Vec<&str> = l.split_whitespace().collect();
                    let kind = match parts.as_slice() {
                        [_, "discrete"] => ClockKind::Discrete,
                        [_, "physical", h] => ClockKind::Physical { h: parse_f64(n, h)? },
                        [] => continue,
                        _ => return Err(syntax(n, "expected `<name> discrete|physical <h>`")),
                    };
                    if !is_ident(parts[0]) {
                        return Err(syntax(n, format!("bad clock name `{}`", parts[0])));
                    }
                    clocks.push(ClockId { name: parts[0].to_string(), kind });
                }
            }
            "variables" => {
                while !lines.peek_is_header() {
                    let Some((n, l)) = lines.next() else { break };
                    let parts: Vec<&str> = l.split_whitespace().collect();
                    let shape = match parts.as_slice() {
                        [_, _, "scalar"] => Shape::Scalar,
                        [_, _, "trajectory"] => Shape::Trajectory,
                        [_, _, "vector", k] => {
                            Shape::Vector(k.parse().map_err(|_| syntax(n, "bad vector length"))?)
                        }
                        [] => continue,
                        _ => return Err(syntax(n, "expected `<name> <clock> <shape>`")),
                    };
                    if !is_ident(parts[0]) {
                        return Err(syntax(n, format!("bad variable name `{}`", parts[0])));
                    }
                    variables.push(VariableDecl { name: parts[0].into(), clock: parts[1].into(), shape });
                }
                beh = Some(SystemBehavior::new(std::mem::take(&mut clocks), std::mem::take(&mut variables))?);
            }
            _ => {
                let b = beh.as_mut().ok_or_else(|| syntax(n, "data section before `[variables]`"))?;
                if let Some(clock) = name.strip_prefix("ticks.") {
                    let ci = b.clock_index(clock).ok_or_else(|| syntax(n, format!("unknown clock `{clock}`")))?;
                    let shapes: Vec<Shape> = b.clock_variables(ci).iter().map(|v| v.shape).collect();
                    while !lines.peek_is_header() {
                        let Some((n, l)) = lines.next() else { break };
                        if l.trim().is_empty() {
                            continue;
                        }
                        let (idx, rest) = l.split_once(':').ok_or_else(|| syntax(n, "expected `<tick>:`"))?;
                        if idx.trim().parse::<usize>().ok() != Some(b.len(ci)) {
                            return Err(syntax(n, format!("expected tick {}", b.len(ci))));
                        }
                        let fields: Vec<&str> = rest.split_whitespace().collect();
                        if fields.len() != shapes.len() {
                            return Err(syntax(n, format!("expected {} values", shapes.len())));
                        }
                        let row = fields
                            .iter()
                            .zip(&shapes)
                            .map(|(f, s)| parse_value(n, f, *s))
                            .collect::<Result<Vec<_>, _>>()?;
                        b.push_tick(ci, row)?;
                    }
                } else if let Some(pair) = name.strip_prefix("sync.") {
                    let (s, t) = pair.split_once('.').ok_or_else(|| syntax(n, "expected `sync.<c>.<d>`"))?;
                    let si = b.clock_index(s).ok_or_else(|| syntax(n, format!("unknown clock `{s}`")))?;
                    let ti = b.clock_index(t).ok_or_else(|| syntax(n, format!("unknown clock `{t}`")))?;
                    let mut samples = Vec::new();
                    while !lines.peek_is_header() {
                        let Some((n, l)) = lines.next() else { break };
                        for tok in l.split_whitespace() {
                            samples.push(tok.parse::<i64>().map_err(|_| syntax(n, format!("bad tick `{tok}`")))?);
                        }
                    }
                    b.set_sync(si, ti, samples);
                } else {
                    return Err(syntax(n, format!("unknown section `{name}`")));
                }
            }
        }
    }
    let beh = match beh {
        Some(b) => b,
        None => SystemBehavior::new(clocks, variables)?,
    };
    beh.validate()?;
    Ok(beh)
}
