//! Multiclock Logic: syntax, parser, printer and three-valued evaluator.

pub mod ast;
pub mod eval;
pub mod parse;
mod print;

pub use ast::{ArithOp, Atom, CmpOp, Global, Local, Param, Term};
pub use eval::{bind, eval_global, eventually_always_witness, eval_local, Env, EvalError, Params, Truth, Verdict};
pub use parse::{parse, parse_local, parse_term, ParseError};
