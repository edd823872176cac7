use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{const_to_f64, EvalError, Expr, Func, Node, RealExponent, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("parameter `{0}` has no value")]
    UnboundParameter(String),
    #[error("cannot compile jet symbol `{0}`")]
    JetSymbol(Symbol),
    #[error("`{symbol}` is outside the state layout of dimension {n}")]
    IndexOutOfRange { symbol: Symbol, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Load(usize),
    Add,
    Mul,
    Pow(RealExponent),
    Apply(Func),
}

/// A flat stack program evaluating an expression over the state layout
/// `(t, q1..qn, p1..pn)`.
///
/// Operations run in the same order as [`crate::expr::evaluate`], so both
/// produce the same floating-point result.
#[derive(Debug, Clone)]
pub struct CompiledFunction {
    ops: Vec<Op>,
    /// Subexpression rooted at each op, for error reports.
    sources: Vec<Expr>,
    max_stack: usize,
}

/// Compiles `e` for a system of dimension `n`; parameters are replaced by
/// the given values.
pub fn compile(
    e: &Expr,
    n: usize,
    parameters: &BTreeMap<Symbol, f64>,
) -> Result<CompiledFunction, CompileError> {
    let mut f = CompiledFunction { ops: Vec::new(), sources: Vec::new(), max_stack: 0 };
    let mut depth = 0;
    emit(e, n, parameters, &mut f, &mut depth)?;
    Ok(f)
}

fn push(f: &mut CompiledFunction, op: Op, source: &Expr, depth: &mut usize, delta: isize) {
    f.ops.push(op);
    f.sources.push(source.clone());
    *depth = (*depth as isize + delta) as usize;
    f.max_stack = f.max_stack.max(*depth);
}

fn emit(
    e: &Expr,
    n: usize,
    params: &BTreeMap<Symbol, f64>,
    f: &mut CompiledFunction,
    depth: &mut usize,
) -> Result<(), CompileError> {
    match e.node() {
        Node::Const(c) => push(f, Op::Const(const_to_f64(c)), e, depth, 1),
        Node::Var(s) => {
            let slot = match s {
                Symbol::Time => 0,
                Symbol::Coord(i) | Symbol::Momentum(i) if *i == 0 || *i > n => {
                    return Err(CompileError::IndexOutOfRange { symbol: s.clone(), n });
                }
                Symbol::Coord(i) => *i,
                Symbol::Momentum(i) => n + i,
                Symbol::Parameter(name) => {
                    let v = params
                        .get(s)
                        .ok_or_else(|| CompileError::UnboundParameter(name.to_string()))?;
                    push(f, Op::Const(*v), e, depth, 1);
                    return Ok(());
                }
                _ => return Err(CompileError::JetSymbol(s.clone())),
            };
            push(f, Op::Load(slot), e, depth, 1);
        }
        Node::Sum(ops) | Node::Product(ops) => {
            let op = if matches!(e.node(), Node::Sum(_)) { Op::Add } else { Op::Mul };
            emit(&ops[0], n, params, f, depth)?;
            for o in &ops[1..] {
                emit(o, n, params, f, depth)?;
                push(f, op, e, depth, -1);
            }
        }
        Node::Power(base, exponent) => {
            emit(base, n, params, f, depth)?;
            push(f, Op::Pow(RealExponent::new(exponent)), e, depth, 0);
        }
        Node::Apply(func, arg) => {
            emit(arg, n, params, f, depth)?;
            push(f, Op::Apply(*func), e, depth, 0);
        }
    }
    Ok(())
}

impl CompiledFunction {
    /// Evaluates at `state = [t, q1..qn, p1..pn]`.
    pub fn eval(&self, state: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.max_stack);
        for (k, op) in self.ops.iter().enumerate() {
            let singular = |reason| EvalError::Singular { expr: self.sources[k].clone(), reason };
            let v = match *op {
                Op::Const(c) => c,
                Op::Load(i) => state[i],
                Op::Add => {
                    let b = stack.pop().unwrap();
                    stack.pop().unwrap() + b
                }
                Op::Mul => {
                    let b = stack.pop().unwrap();
                    stack.pop().unwrap() * b
                }
                Op::Pow(exp) => exp.apply(stack.pop().unwrap()).map_err(singular)?,
                Op::Apply(func) => crate::expr::apply_func(func, stack.pop().unwrap()).map_err(singular)?,
            };
            if !v.is_finite() {
                return Err(singular("non-finite value"));
            }
            stack.push(v);
        }
        Ok(stack.pop().unwrap_or(0.0))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}
