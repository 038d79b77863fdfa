/// Global formulas: clock bindings under Boolean connectives.
#[derive(Debug, Clone, PartialEq)]
pub enum Global {
    Bind { clock: String, body: Local },
    Not(Box<Global>),
    And(Box<Global>, Box<Global>),
    Or(Box<Global>, Box<Global>),
    Implies(Box<Global>, Box<Global>),
}

/// Local formulas, evaluated at a tick position of the binding clock.
#[derive(Debug, Clone, PartialEq)]
pub enum Local {
    Atom(Atom),
    Const(bool),
    Not(Box<Local>),
    And(Box<Local>, Box<Local>),
    Or(Box<Local>, Box<Local>),
    Implies(Box<Local>, Box<Local>),
    Ite(Box<Local>, Box<Local>, Box<Local>),
    /// `hi = None` is an unbounded interval.
    Eventually { lo: u64, hi: Option<u64>, body: Box<Local> },
    Globally { lo: u64, hi: Option<u64>, body: Box<Local> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Pred { name: String, args: Vec<Term>, params: Vec<Param> },
    Cmp { op: CmpOp, lhs: Term, rhs: Term },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Num(f64),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// A variable, clock or parameter name read at a tick offset;
    /// `at` evaluates a trajectory-valued variable at a time.
    Ref { name: String, offset: i64, at: Option<Box<Term>> },
    /// `mid^target(offset)`.
    Pair { mid: String, target: String, offset: i64 },
    Num(f64),
    Arith { op: ArithOp, lhs: Box<Term>, rhs: Box<Term> },
}

impl Global {
    pub fn bind(clock: &str, body: Local) -> Self {
        Global::Bind { clock: clock.to_string(), body }
    }

    pub fn not(self) -> Self {
        Global::Not(Box::new(self))
    }

    pub fn and(self, other: Global) -> Self {
        Global::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Global) -> Self {
        Global::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Global) -> Self {
        Global::Implies(Box::new(self), Box::new(other))
    }

    /// Left-nested conjunction of the operands.
    pub fn conj(items: impl IntoIterator<Item = Global>) -> Option<Global> {
        items.into_iter().reduce(Global::and)
    }

    /// The clock-bound leaves, left to right.
    pub fn leaves(&self) -> Vec<(&str, &Local)> {
        let mut out = Vec::new();
        fn walk<'a>(g: &'a Global, out: &mut Vec<(&'a str, &'a Local)>) {
            match g {
                Global::Bind { clock, body } => out.push((clock, body)),
                Global::Not(a) => walk(a, out),
                Global::And(a, b) | Global::Or(a, b) | Global::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Top-level conjuncts of a left- or right-nested conjunction.
    pub fn conjuncts(&self) -> Vec<&Global> {
        match self {
            Global::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            g => vec![g],
        }
    }
}

impl Local {
    pub fn not(self) -> Self {
        Local::Not(Box::new(self))
    }

    pub fn and(self, other: Local) -> Self {
        Local::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Local) -> Self {
        Local::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Local) -> Self {
        Local::Implies(Box::new(self), Box::new(other))
    }

    pub fn eventually(lo: u64, hi: Option<u64>, body: Local) -> Self {
        Local::Eventually { lo, hi, body: Box::new(body) }
    }

    pub fn globally(lo: u64, hi: Option<u64>, body: Local) -> Self {
        Local::Globally { lo, hi, body: Box::new(body) }
    }

    /// Nesting depth of connectives and modalities; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Local::Atom(_) | Local::Const(_) => 0,
            Local::Not(a) => 1 + a.depth(),
            Local::Eventually { body, .. } | Local::Globally { body, .. } => 1 + body.depth(),
            Local::And(a, b) | Local::Or(a, b) | Local::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Local::Ite(a, b, c) => 1 + a.depth().max(b.depth()).max(c.depth()),
        }
    }
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Ref { name: name.to_string(), offset: 0, at: None }
    }

    pub fn at_offset(name: &str, offset: i64) -> Self {
        Term::Ref { name: name.to_string(), offset, at: None }
    }
}
