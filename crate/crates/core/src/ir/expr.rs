//! Receptivity expressions: boolean functions over the controller inputs.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// A total assignment of boolean values to named variables.
pub type Assignment = BTreeMap<String, bool>;

/// Default bound on the number of variables enumerated by
/// [`receptivities_cosatisfiable`].
pub const DEFAULT_VARIABLE_CAP: usize = 20;

/// Boolean expression tree.
///
/// `And` and `Or` built through [`Expr::and`] / [`Expr::or`] always carry at
/// least two children; the text parser produces the same shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(String),
    Const(bool),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    MissingVariable(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::MissingVariable(v) => write!(f, "no value for variable {v}"),
        }
    }
}

impl core::error::Error for EvalError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatError {
    TooManyVariables { count: usize, cap: usize },
}

impl fmt::Display for SatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatError::TooManyVariables { count, cap } => {
                write!(f, "{count} variables exceed the enumeration cap of {cap}")
            }
        }
    }
}

impl core::error::Error for SatError {}

/// Joint satisfiability of two receptivities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// The conjunction is unsatisfiable.
    Disjoint,
    /// Both expressions denote the same function.
    Equivalent,
    /// Both can hold at once, and they are not the same function.
    Overlapping { both: Assignment, differ: Assignment },
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Conjunction; a single operand is returned as is, none gives `1`.
    pub fn and(mut operands: Vec<Expr>) -> Expr {
        match operands.len() {
            0 => Expr::Const(true),
            1 => operands.pop().unwrap(),
            _ => Expr::And(operands),
        }
    }

    /// Disjunction; a single operand is returned as is, none gives `0`.
    pub fn or(mut operands: Vec<Expr>) -> Expr {
        match operands.len() {
            0 => Expr::Const(false),
            1 => operands.pop().unwrap(),
            _ => Expr::Or(operands),
        }
    }

    /// Variables in first-occurrence order, without repetition.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit_vars(&mut |v| {
            if !out.contains(&v) {
                out.push(v);
            }
        });
        out
    }

    pub(crate) fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Const(_) => {}
            Expr::Not(e) => e.visit_vars(f),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit_vars(f)),
        }
    }

    /// Evaluates with a lookup function; the first unbound variable is an error.
    pub fn eval_with(&self, lookup: &impl Fn(&str) -> Option<bool>) -> Result<bool, EvalError> {
        Ok(match self {
            Expr::Var(v) => lookup(v).ok_or_else(|| EvalError::MissingVariable(v.clone()))?,
            Expr::Const(c) => *c,
            Expr::Not(e) => !e.eval_with(lookup)?,
            Expr::And(es) => {
                let mut acc = true;
                for e in es {
                    acc &= e.eval_with(lookup)?;
                }
                acc
            }
            Expr::Or(es) => {
                let mut acc = false;
                for e in es {
                    acc |= e.eval_with(lookup)?;
                }
                acc
            }
        })
    }

    /// Renames every variable through `f`.
    pub fn map_vars(&self, f: &impl Fn(&str) -> String) -> Expr {
        match self {
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Not(e) => Expr::not(e.map_vars(f)),
            Expr::And(es) => Expr::And(es.iter().map(|e| e.map_vars(f)).collect()),
            Expr::Or(es) => Expr::Or(es.iter().map(|e| e.map_vars(f)).collect()),
        }
    }

    /// Renders with the given operator spellings. Parentheses are emitted
    /// wherever dropping them would change the tree a parser rebuilds.
    pub fn render(&self, ops: &Operators) -> String {
        let mut s = String::new();
        self.render_into(&mut s, ops, 0);
        s
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(_) => 1,
            Expr::And(_) => 2,
            _ => 3,
        }
    }

    fn render_into(&self, out: &mut String, ops: &Operators, parent: u8) {
        let own = self.precedence();
        // A same-kind child is parenthesized too, so nested trees survive reparsing.
        let wrap = own < 3 && own <= parent;
        if wrap {
            out.push('(');
        }
        match self {
            Expr::Var(v) => out.push_str(v),
            Expr::Const(c) => out.push(if *c { '1' } else { '0' }),
            Expr::Not(e) => {
                out.push_str(ops.not);
                e.render_into(out, ops, 3);
            }
            Expr::And(es) | Expr::Or(es) => {
                let sep = if own == 2 { ops.and } else { ops.or };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    e.render_into(out, ops, own);
                }
            }
        }
        if wrap {
            out.push(')');
        }
    }
}

/// Operator spellings used by [`Expr::render`].
pub struct Operators {
    pub and: &'static str,
    pub or: &'static str,
    pub not: &'static str,
}

/// Spellings of the rules language: `a * !b + c`.
pub const RULE_OPERATORS: Operators = Operators { and: " * ", or: " + ", not: "!" };

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&RULE_OPERATORS))
    }
}

/// Evaluates `expr` under `assignment`.
pub fn eval_receptivity(expr: &Expr, assignment: &Assignment) -> Result<bool, EvalError> {
    expr.eval_with(&|v| assignment.get(v).copied())
}

/// Iterates all assignments of `vars` in binary counting order, first
/// variable most significant.
pub fn assignments(vars: &[String]) -> impl Iterator<Item = Assignment> + '_ {
    let n = vars.len();
    (0u64..(1u64 << n))
        .map(move |bits| vars.iter().enumerate().map(|(j, v)| (v.clone(), (bits >> (n - 1 - j)) & 1 == 1)).collect())
}

/// Classifies two receptivities by exhaustive enumeration over the union of
/// their variables (sorted, so the witnesses do not depend on argument order).
pub fn receptivities_cosatisfiable(e1: &Expr, e2: &Expr, cap: usize) -> Result<SatResult, SatError> {
    let vars: BTreeSet<&str> = e1.variables().into_iter().chain(e2.variables()).collect();
    if vars.len() > cap {
        return Err(SatError::TooManyVariables { count: vars.len(), cap });
    }
    let vars: Vec<String> = vars.into_iter().map(ToString::to_string).collect();
    let mut both = None;
    let mut differ = None;
    for a in assignments(&vars) {
        // Every variable is bound, so evaluation cannot fail.
        let v1 = eval_receptivity(e1, &a).expect("bound");
        let v2 = eval_receptivity(e2, &a).expect("bound");
        if v1 && v2 && both.is_none() {
            both = Some(a.clone());
        }
        if v1 != v2 && differ.is_none() {
            differ = Some(a);
        }
        if both.is_some() && differ.is_some() {
            break;
        }
    }
    Ok(match (both, differ) {
        (None, _) => SatResult::Disjoint,
        (Some(_), None) => SatResult::Equivalent,
        (Some(both), Some(differ)) => SatResult::Overlapping { both, differ },
    })
}
