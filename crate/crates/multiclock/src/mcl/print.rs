//! Canonical concrete syntax. `parse(&f.to_string()) == f` for every AST.

use std::fmt;

use super::ast::*;

fn global_prec(g: &Global) -> u8 {
    match g {
        Global::Implies(..) => 1,
        Global::Or(..) => 2,
        Global::And(..) => 3,
        Global::Not(_) => 4,
        // A binding body extends as far as possible, so it is wrapped
        // whenever it appears as an operand.
        Global::Bind { .. } => 0,
    }
}

/// Integral values print without a fractional part.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.fract() == 0.0 && self.0.abs() < 1e15 {
            write!(f, "{}", self.0 as i64)
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

fn local_prec(l: &Local) -> u8 {
    match l {
        Local::Ite(..) => 0,
        Local::Implies(..) => 1,
        Local::Or(..) => 2,
        Local::And(..) => 3,
        Local::Not(_) | Local::Eventually { .. } | Local::Globally { .. } => 4,
        Local::Atom(_) | Local::Const(_) => 5,
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Arith { op: ArithOp::Add | ArithOp::Sub, .. } => 1,
        Term::Arith { op: ArithOp::Mul, .. } => 2,
        _ => 3,
    }
}

struct Wrap<'a, T>(&'a T, bool);

impl<T: fmt::Display> fmt::Display for Wrap<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Global {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = global_prec(self);
        let bin = |f: &mut fmt::Formatter<'_>, a: &Global, op: &str, b: &Global| {
            write!(f, "{} {op} {}", Wrap(a, global_prec(a) < p), Wrap(b, global_prec(b) <= p))
        };
        match self {
            Global::Bind { clock, body } => write!(f, "@{clock}. {body}"),
            Global::Not(a) => write!(f, "!{}", Wrap(a.as_ref(), global_prec(a) < 4)),
            Global::And(a, b) => bin(f, a, "&&", b),
            Global::Or(a, b) => bin(f, a, "||", b),
            Global::Implies(a, b) => bin(f, a, "->", b),
        }
    }
}

fn interval(lo: u64, hi: Option<u64>) -> String {
    match (lo, hi) {
        (0, None) => String::new(),
        (lo, None) => format!("[{lo},inf]"),
        (lo, Some(hi)) => format!("[{lo},{hi}]"),
    }
}

impl fmt::Display for Local {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = local_prec(self);
        let bin = |f: &mut fmt::Formatter<'_>, a: &Local, op: &str, b: &Local| {
            write!(f, "{} {op} {}", Wrap(a, local_prec(a) < p), Wrap(b, local_prec(b) <= p))
        };
        fn unary(b: &Local) -> Wrap<'_, Local> {
            Wrap(b, local_prec(b) < 4)
        }
        match self {
            Local::Atom(a) => write!(f, "{a}"),
            Local::Const(b) => write!(f, "{b}"),
            Local::Not(a) => write!(f, "!{}", unary(a)),
            Local::And(a, b) => bin(f, a, "&&", b),
            Local::Or(a, b) => bin(f, a, "||", b),
            Local::Implies(a, b) => bin(f, a, "->", b),
            Local::Ite(c, a, b) => write!(f, "if {c} then {a} else {b}"),
            Local::Eventually { lo, hi, body } => write!(f, "F{} {}", interval(*lo, *hi), unary(body)),
            Local::Globally { lo, hi, body } => write!(f, "G{} {}", interval(*lo, *hi), unary(body)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Pred { name, args, params } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ";")?;
                for (i, p) in params.iter().enumerate() {
                    write!(f, "{}{p}", if i > 0 { ", " } else { " " })?;
                }
                write!(f, ")")
            }
            Atom::Cmp { op, lhs, rhs } => write!(f, "{lhs} {op} {rhs}"),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Num(x) => write!(f, "{}", Num(*x)),
            Param::Name(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Ref { name, offset, at: None } if *offset == 0 => write!(f, "{name}"),
            Term::Ref { name, offset, at: None } => write!(f, "{name}({offset})"),
            Term::Ref { name, offset, at: Some(t) } => write!(f, "{name}({offset})({t})"),
            Term::Pair { mid, target, offset } => write!(f, "{mid}^{target}({offset})"),
            Term::Num(x) => write!(f, "{}", Num(*x)),
            Term::Arith { op, lhs, rhs } => {
                let p = term_prec(self);
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                write!(f, "{} {sym} {}", Wrap(lhs.as_ref(), term_prec(lhs) < p), Wrap(rhs.as_ref(), term_prec(rhs) <= p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;

    fn round_trip(src: &str) -> String {
        let f = parse(src).unwrap();
        let printed = f.to_string();
        assert_eq!(parse(&printed).unwrap(), f, "{printed}");
        printed
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(round_trip("@l. G (Close(x, xd(0)(0.0); 0.1))"), "@l. G Close(x, xd(0)(0); 0.1)");
        assert_eq!(round_trip("@m. F[1,3] (r(1) - r(0) <= 0.2)"), "@m. F[1,3] r(1) - r <= 0.2");
        assert_eq!(round_trip("(@m. a > 0) && (@l. b > 0)"), "(@m. a > 0) && (@l. b > 0)");
    }

    #[test]
    fn associativity_is_preserved() {
        assert_eq!(round_trip("@c. a - (b - c) > 0"), "@c. a - (b - c) > 0");
        assert_eq!(round_trip("@c. (a - b) - c > 0"), "@c. a - b - c > 0");
        assert_eq!(round_trip("@c. a > 0 -> (b > 0 -> c > 0)"), "@c. a > 0 -> (b > 0 -> c > 0)");
        round_trip("@c. (if a > 0 then b > 0 else c > 0) && d > 0");
        round_trip("@c. if a > 0 then (if b > 0 then true else false) else c > -1.5e-7");
        round_trip("!(@c. !(x > 0) || F[2,inf] G[0,3] !y = 1) -> (@d. true -> @e. false)");
        round_trip("@c. x > 1 && @d. y > 2 || @e. z(-2) * 3 + w^r(1) < 4");
    }
}
