//! Assume-guarantee contracts over MCL: satisfaction on recorded
//! behaviors, composition, and corpus-relative refinement.

use std::fmt::Write as _;

use thiserror::Error;

use crate::behaviors::{SystemBehavior, Value};
use crate::mcl::eval::{bind, eval_global, Env, EvalError, Params, Truth, Verdict};
use crate::mcl::{parse, Global, ParseError};
use crate::predicates::Registry;

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub name: String,
    pub assumptions: Global,
    pub guarantees: Global,
    /// Constants referenced by name in the formulas.
    pub params: Params,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("{block} formula: {err}")]
    Formula { block: &'static str, err: ParseError },
    #[error("parameter `{0}` has conflicting values")]
    ParamConflict(String),
}

fn parse_value(text: &str) -> Option<Value> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let v: Result<Vec<f64>, _> = inner.split(',').map(|x| x.trim().parse::<f64>()).collect();
        return v.ok().map(Value::Vector);
    }
    t.parse::<f64>().ok().map(Value::Scalar)
}

fn format_value(v: &Value) -> String {
    match v {
        Value::Scalar(x) => format!("{x:?}"),
        Value::Vector(xs) => format!("[{}]", xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")),
        Value::Trajectory(_) => "<trajectory>".into(),
    }
}

impl Contract {
    pub fn new(name: &str, assumptions: Global, guarantees: Global) -> Self {
        Contract { name: name.to_string(), assumptions, guarantees, params: Params::new() }
    }

    /// Parses the contract file format:
    ///
    /// ```text
    /// name: C_Est
    /// params:
    ///   delta_sensor_Est = 0.001
    /// assume:
    ///   @l. true
    /// guarantee:
    ///   @l. G Close(xhat, x; delta_sensor_Est)
    /// ```
    ///
    /// Block headers start at column 0; `//` and `#` start comments.
    pub fn parse_file(text: &str) -> Result<Self, ContractError> {
        let mut name = None;
        let mut block: Option<&'static str> = None;
        let mut assume = String::new();
        let mut guarantee = String::new();
        let mut params = Params::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split("//").next().unwrap_or("");
            if line.trim_start().starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let header = ["name", "params", "assume", "guarantee"]
                .into_iter()
                .find(|h| !raw.starts_with(char::is_whitespace) && line.starts_with(&format!("{h}:")));
            let body = if let Some(h) = header {
                block = Some(h);
                &line[h.len() + 1..]
            } else {
                line
            };
            if body.trim().is_empty() {
                continue;
            }
            match block {
                Some("name") => name = Some(body.trim().to_string()),
                Some("params") => {
                    let (k, v) = body.split_once('=').ok_or_else(|| ContractError::Format {
                        line: line_no,
                        msg: "expected `name = value`".into(),
                    })?;
                    let value = parse_value(v).ok_or_else(|| ContractError::Format {
                        line: line_no,
                        msg: format!("bad value `{}`", v.trim()),
                    })?;
                    params.insert(k.trim().to_string(), value);
                }
                Some("assume") => {
                    assume.push_str(body);
                    assume.push('\n');
                }
                Some("guarantee") => {
                    guarantee.push_str(body);
                    guarantee.push('\n');
                }
                _ => {
                    return Err(ContractError::Format { line: line_no, msg: "text outside of any block".into() });
                }
            }
        }
        let name = name.ok_or(ContractError::Format { line: 0, msg: "missing `name:`".into() })?;
        if assume.trim().is_empty() || guarantee.trim().is_empty() {
            return Err(ContractError::Format { line: 0, msg: "both `assume:` and `guarantee:` are required".into() });
        }
        let assumptions = parse(&assume).map_err(|err| ContractError::Formula { block: "assume", err })?;
        let guarantees = parse(&guarantee).map_err(|err| ContractError::Formula { block: "guarantee", err })?;
        Ok(Contract { name, assumptions, guarantees, params })
    }

    /// Canonical file text; top-level conjuncts go on separate lines.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("name: {}\n", self.name);
        if !self.params.is_empty() {
            s.push_str("params:\n");
            for (k, v) in &self.params {
                let _ = writeln!(s, "  {k} = {}", format_value(v));
            }
        }
        for (label, f) in [("assume", &self.assumptions), ("guarantee", &self.guarantees)] {
            let _ = writeln!(s, "{label}:");
            let parts = f.conjuncts();
            // Splitting is only faithful for a left-nested chain.
            if parts.len() > 1 && Global::conj(parts.iter().map(|g| (*g).clone())).as_ref() == Some(f) {
                for (i, g) in parts.iter().enumerate() {
                    let lead = if i == 0 { "  " } else { "  && " };
                    let _ = writeln!(s, "{lead}({g})");
                }
            } else {
                let _ = writeln!(s, "  {f}");
            }
        }
        s
    }

    /// `a → g`.
    pub fn implication(&self) -> Global {
        self.assumptions.clone().implies(self.guarantees.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjunctVerdict {
    pub side: &'static str,
    pub formula: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorReport {
    pub assumptions: Verdict,
    pub guarantees: Verdict,
    pub implication: Verdict,
    /// Verdict of every top-level conjunct of both sides.
    pub conjuncts: Vec<ConjunctVerdict>,
}

impl BehaviorReport {
    /// Conjuncts evaluating to False, with their deciding positions.
    pub fn failing(&self) -> impl Iterator<Item = &ConjunctVerdict> {
        self.conjuncts.iter().filter(|c| c.verdict.truth == Truth::False)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionReport {
    pub contract: String,
    pub behaviors: Vec<BehaviorReport>,
    /// Kleene conjunction of `a → g` over all behaviors.
    pub aggregate: Truth,
}

impl SatisfactionReport {
    pub fn render(&self) -> String {
        let mut s = format!("contract {}: {}\n", self.contract, self.aggregate);
        for (i, b) in self.behaviors.iter().enumerate() {
            let _ = writeln!(
                s,
                "  behavior {i}: assume {} guarantee {} assume->guarantee {}",
                b.assumptions.truth, b.guarantees.truth, b.implication.truth
            );
            for c in &b.conjuncts {
                let w = c.verdict.witness.map(|w| format!(" @{w}")).unwrap_or_default();
                let _ = writeln!(s, "    [{}] {}{}: {}", c.side, c.verdict.truth, w, c.formula);
            }
        }
        s
    }
}

fn env<'a>(reg: &'a Registry, params: &'a Params) -> Env<'a> {
    Env::new(reg, params)
}

/// Evaluates `a`, `g`, `a → g` and every top-level conjunct on each behavior.
pub fn satisfies(corpus: &[SystemBehavior], c: &Contract, reg: &Registry) -> Result<SatisfactionReport, EvalError> {
    let e = env(reg, &c.params);
    let mut behaviors = Vec::with_capacity(corpus.len());
    let mut aggregate = Truth::True;
    for beh in corpus {
        bind(&c.assumptions, beh, &e)?;
        bind(&c.guarantees, beh, &e)?;
        let mut conjuncts = Vec::new();
        let mut side_verdict = |side: &'static str, f: &Global| -> Result<Verdict, EvalError> {
            let parts = f.conjuncts();
            if parts.len() == 1 {
                let v = eval_global(f, beh, &e)?;
                conjuncts.push(ConjunctVerdict { side, formula: f.to_string(), verdict: v });
                return Ok(v);
            }
            for p in &parts {
                let v = eval_global(p, beh, &e)?;
                conjuncts.push(ConjunctVerdict { side, formula: p.to_string(), verdict: v });
            }
            eval_global(f, beh, &e)
        };
        let a = side_verdict("assume", &c.assumptions)?;
        let g = side_verdict("guarantee", &c.guarantees)?;
        let implication = eval_global(&c.implication(), beh, &e)?;
        aggregate = aggregate.and(implication.truth);
        behaviors.push(BehaviorReport { assumptions: a, guarantees: g, implication, conjuncts });
    }
    Ok(SatisfactionReport { contract: c.name.clone(), behaviors, aggregate })
}

fn merge_params(a: &Params, b: &Params) -> Result<Params, ContractError> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(w) if w != v => return Err(ContractError::ParamConflict(k.clone())),
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(out)
}

/// `((a∧a′) ∨ (a∧¬g) ∨ (a′∧¬g′), (a→g) ∧ (a′→g′))`, kept syntactic.
pub fn compose(c1: &Contract, c2: &Contract) -> Result<Contract, ContractError> {
    let (a1, g1, a2, g2) = (&c1.assumptions, &c1.guarantees, &c2.assumptions, &c2.guarantees);
    let assumptions = a1
        .clone()
        .and(a2.clone())
        .or(a1.clone().and(g1.clone().not()))
        .or(a2.clone().and(g2.clone().not()));
    let guarantees = c1.implication().and(c2.implication());
    Ok(Contract {
        name: format!("{}||{}", c1.name, c2.name),
        assumptions,
        guarantees,
        params: merge_params(&c1.params, &c2.params)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Refinement {
    Holds,
    Counterexample { behavior: usize, reason: String },
}

impl Refinement {
    pub fn holds(&self) -> bool {
        matches!(self, Refinement::Holds)
    }
}

/// Corpus-relative check of `c ≤ c2`: no behavior has `a′` True with `a`
/// not True, or `a → g` True with `a′ → g′` not True.
pub fn refines_on(c: &Contract, c2: &Contract, corpus: &[SystemBehavior], reg: &Registry) -> Result<Refinement, EvalError> {
    let e1 = env(reg, &c.params);
    let e2 = env(reg, &c2.params);
    for (i, beh) in corpus.iter().enumerate() {
        let a = eval_global(&c.assumptions, beh, &e1)?.truth;
        let a2 = eval_global(&c2.assumptions, beh, &e2)?.truth;
        if a2 == Truth::True && a != Truth::True {
            return Ok(Refinement::Counterexample {
                behavior: i,
                reason: format!("assumption of {} holds but assumption of {} is {a}", c2.name, c.name),
            });
        }
        let ag = eval_global(&c.implication(), beh, &e1)?.truth;
        let ag2 = eval_global(&c2.implication(), beh, &e2)?.truth;
        if ag == Truth::True && ag2 != Truth::True {
            return Ok(Refinement::Counterexample {
                behavior: i,
                reason: format!("{} is satisfied but {} is {ag2}", c.name, c2.name),
            });
        }
    }
    Ok(Refinement::Holds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessReport {
    /// Whether `compose(c1, c2) ≤ c3` held on the corpus.
    pub refinement: Refinement,
    /// Behaviors satisfying both components.
    pub checked: usize,
    /// Behaviors satisfying both components but not `c3` although the
    /// refinement held.
    pub violations: Vec<usize>,
}

/// If M ⊨ C, M′ ⊨ C′ and C∥C′ ≤ C″ then M∥M′ ⊨ C″, checked on a corpus.
pub fn check_composition_soundness(
    c1: &Contract,
    c2: &Contract,
    c3: &Contract,
    corpus: &[SystemBehavior],
    reg: &Registry,
) -> Result<SoundnessReport, EvalError> {
    let composite = compose(c1, c2).map_err(|e| EvalError::Type(e.to_string()))?;
    let refinement = refines_on(&composite, c3, corpus, reg)?;
    let mut checked = 0;
    let mut violations = Vec::new();
    if refinement.holds() {
        let (e1, e2, e3) = (env(reg, &c1.params), env(reg, &c2.params), env(reg, &c3.params));
        for (i, beh) in corpus.iter().enumerate() {
            let s1 = eval_global(&c1.implication(), beh, &e1)?.truth;
            let s2 = eval_global(&c2.implication(), beh, &e2)?.truth;
            if s1 == Truth::True && s2 == Truth::True {
                checked += 1;
                if eval_global(&c3.implication(), beh, &e3)?.truth != Truth::True {
                    violations.push(i);
                }
            }
        }
    }
    Ok(SoundnessReport { refinement, checked, violations })
}
