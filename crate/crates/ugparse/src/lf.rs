//! Quasi-logical-form terms.
//!
//! A [`LogicalForm`] is a term tree: atoms, variables, applications,
//! quantified terms (`qterm`), illocutionary wrappers, and — after scoping —
//! explicit quantifier prefixes. Quantified terms stand in argument positions
//! with unresolved scope; the `scope` module raises them.

use std::fmt;

use serde_json::{json, Value};

use crate::fs::VarId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicalForm {
    /// A named constant or predicate/operator symbol.
    Atom(String),
    Var(VarId),
    /// Application of an operator to arguments. The operator is usually an
    /// atom but may be a variable in rule patterns.
    Apply(Box<LogicalForm>, Vec<LogicalForm>),
    /// A quantified term in argument position: quantifier, bound variable,
    /// restriction. Scope is unresolved.
    QTerm(Box<LogicalForm>, VarId, Box<LogicalForm>),
    /// Illocutionary wrapper, e.g. `[whq, body]`.
    Wrap(String, Box<LogicalForm>),
    /// A raised quantifier with explicit scope: quantifier name, variable,
    /// restriction, body. Produced by scoping; never written in grammars.
    Quant(String, VarId, Box<LogicalForm>, Box<LogicalForm>),
}

impl LogicalForm {
    pub fn atom(name: impl Into<String>) -> Self {
        LogicalForm::Atom(name.into())
    }

    pub fn apply(op: impl Into<String>, args: Vec<LogicalForm>) -> Self {
        LogicalForm::Apply(Box::new(LogicalForm::Atom(op.into())), args)
    }

    pub fn wrap(marker: impl Into<String>, body: LogicalForm) -> Self {
        LogicalForm::Wrap(marker.into(), Box::new(body))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            LogicalForm::Atom(_) => true,
            LogicalForm::Var(_) => false,
            LogicalForm::Apply(f, args) => f.is_ground() && args.iter().all(|a| a.is_ground()),
            // The qterm binder is a bound occurrence, not a free variable.
            LogicalForm::QTerm(q, _, r) => q.is_ground() && r.is_ground_except(),
            LogicalForm::Wrap(_, b) => b.is_ground(),
            LogicalForm::Quant(_, _, r, b) => r.is_ground_except() && b.is_ground_except(),
        }
    }

    fn is_ground_except(&self) -> bool {
        // Used under binders, where variables are expected.
        match self {
            LogicalForm::Atom(_) | LogicalForm::Var(_) => true,
            LogicalForm::Apply(f, args) => {
                f.is_ground_except() && args.iter().all(|a| a.is_ground_except())
            }
            LogicalForm::QTerm(q, _, r) => q.is_ground_except() && r.is_ground_except(),
            LogicalForm::Wrap(_, b) => b.is_ground_except(),
            LogicalForm::Quant(_, _, r, b) => r.is_ground_except() && b.is_ground_except(),
        }
    }

    /// Structured JSON form, mirroring the canonical text form.
    pub fn to_json(&self) -> Value {
        match self {
            LogicalForm::Atom(a) => json!({ "atom": a }),
            LogicalForm::Var(v) => json!({ "var": v.0 }),
            LogicalForm::Apply(f, args) => json!({
                "apply": f.to_json(),
                "args": args.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
            }),
            LogicalForm::QTerm(q, v, r) => json!({
                "qterm": { "quant": q.to_json(), "var": v.0, "restriction": r.to_json() }
            }),
            LogicalForm::Wrap(m, b) => json!({ "wrap": m, "body": b.to_json() }),
            LogicalForm::Quant(q, v, r, b) => json!({
                "quant": q, "var": v.0, "restriction": r.to_json(), "body": b.to_json()
            }),
        }
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalForm::Atom(a) => write!(f, "{a}"),
            LogicalForm::Var(v) => write!(f, "{v}"),
            LogicalForm::Apply(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            LogicalForm::QTerm(q, v, r) => write!(f, "qterm({q}, {v}, {r})"),
            LogicalForm::Wrap(m, b) => write!(f, "[{m}, {b}]"),
            LogicalForm::Quant(q, v, r, b) => write!(f, "quant({q}, {v}, {r}, {b})"),
        }
    }
}
