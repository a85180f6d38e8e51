//! The validated program: resolved types and lattices, variables numbered per
//! rule, literals lowered to values.

use crate::lattice::{LatticeDescriptor, Ty, Value};

use super::ast::{CmpOp, Direction, Program, Span, TemplatePart};

pub type RelId = usize;
pub type VarId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgKind {
    Key(Ty),
    Lattice(LatticeDescriptor),
}

impl ArgKind {
    pub fn ty(&self) -> Ty {
        match self {
            ArgKind::Key(t) => t.clone(),
            ArgKind::Lattice(l) => l.carrier(),
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, ArgKind::Lattice(_))
    }
}

#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub args: Vec<ArgKind>,
    pub template: Vec<TemplatePart>,
    pub key_cols: Vec<usize>,
    pub lattice_cols: Vec<usize>,
    /// Lattices of the stored value tuple. Relations without lattice
    /// arguments store a single implicit `Bool` set to true.
    pub value_lattices: Vec<LatticeDescriptor>,
}

impl Relation {
    pub fn new(name: String, args: Vec<ArgKind>, template: Vec<TemplatePart>) -> Self {
        let key_cols: Vec<usize> = (0..args.len()).filter(|&i| !args[i].is_lattice()).collect();
        let lattice_cols: Vec<usize> = (0..args.len()).filter(|&i| args[i].is_lattice()).collect();
        let value_lattices = if lattice_cols.is_empty() {
            vec![LatticeDescriptor::bool()]
        } else {
            lattice_cols
                .iter()
                .map(|&i| match &args[i] {
                    ArgKind::Lattice(l) => l.clone(),
                    ArgKind::Key(_) => unreachable!(),
                })
                .collect()
        };
        Relation {
            name,
            args,
            template,
            key_cols,
            lattice_cols,
            value_lattices,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_key_only(&self) -> bool {
        self.lattice_cols.is_empty()
    }

    pub fn key_types(&self) -> Vec<Ty> {
        self.key_cols.iter().map(|&i| self.args[i].ty()).collect()
    }

    /// Splits full arguments into (key tuple, stored value tuple).
    pub fn split(&self, args: &[Value]) -> (Vec<Value>, Vec<Value>) {
        let key = self.key_cols.iter().map(|&i| args[i].clone()).collect();
        let val = if self.is_key_only() {
            vec![Value::Bool(true)]
        } else {
            self.lattice_cols.iter().map(|&i| args[i].clone()).collect()
        };
        (key, val)
    }

    /// Reassembles full arguments in declaration order.
    pub fn assemble(&self, key: &[Value], val: &[Value]) -> Vec<Value> {
        let mut out = vec![Value::Bool(false); self.arity()];
        for (k, &i) in self.key_cols.iter().enumerate() {
            out[i] = key[k].clone();
        }
        for (k, &i) in self.lattice_cols.iter().enumerate() {
            out[i] = val[k].clone();
        }
        out
    }

    pub fn value_bottom(&self) -> Vec<Value> {
        self.value_lattices.iter().map(|l| l.bottom()).collect()
    }

    /// Maps an argument position to its index in the key or value tuple.
    pub fn column(&self, arg: usize) -> Column {
        match self.key_cols.iter().position(|&c| c == arg) {
            Some(k) => Column::Key(k),
            None => Column::Value(self.lattice_cols.iter().position(|&c| c == arg).expect("argument index in range")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Key(usize),
    Value(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TExpr {
    Var(VarId),
    Value(Value),
    Const(usize),
    Add(Box<TExpr>, Box<TExpr>),
    Wildcard,
}

impl TExpr {
    pub fn vars(&self, out: &mut Vec<VarId>) {
        match self {
            TExpr::Var(v) => out.push(*v),
            TExpr::Add(l, r) => {
                l.vars(out);
                r.vars(out);
            }
            _ => {}
        }
    }

    pub fn var_list(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.vars(&mut out);
        out
    }
}

#[derive(Clone, Debug)]
pub struct TAtom {
    pub relation: RelId,
    pub args: Vec<TExpr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum TPremise {
    Atom(TAtom),
    Constraint { op: CmpOp, lhs: TExpr, rhs: TExpr },
    /// Binds `var` to the value of `expr`; produced from `v = e` and from
    /// head-value constraints `e <= v`.
    Assign { var: VarId, expr: TExpr },
    Forall { var: VarId, collection: TExpr, atom: TAtom },
}

impl TPremise {
    pub fn is_relational(&self) -> bool {
        matches!(self, TPremise::Atom(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Key,
    Lattice,
}

#[derive(Clone, Debug)]
pub struct Var {
    pub name: String,
    pub ty: Ty,
    pub kind: Option<VarKind>,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<TPremise>,
    pub heads: Vec<TAtom>,
    pub vars: Vec<Var>,
    /// Premise indices in an order where each premise reads only variables
    /// bound by earlier ones.
    pub binding_order: Vec<usize>,
    pub span: Span,
}

impl Rule {
    pub fn is_axiom(&self) -> bool {
        !self.premises.iter().any(|p| matches!(p, TPremise::Atom(_) | TPremise::Forall { .. }))
    }
}

#[derive(Clone, Debug)]
pub struct Order {
    pub rule: usize,
    pub direction: Direction,
    pub key: TExpr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Query {
    pub name: String,
    pub relation: RelId,
    /// One entry per key column; `None` matches anything.
    pub pattern: Vec<Option<TExpr>>,
}

#[derive(Clone, Debug)]
pub struct Const {
    pub name: String,
    pub ty: Ty,
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: Program,
    pub relations: Vec<Relation>,
    pub consts: Vec<Const>,
    pub rules: Vec<Rule>,
    pub orders: Vec<Order>,
    pub queries: Vec<Query>,
}

impl TypedProgram {
    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn rule_id(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    pub fn const_id(&self, name: &str) -> Option<usize> {
        self.consts.iter().position(|c| c.name == name)
    }
}

/// Replays a rule's binding order and reports the first read of an unbound
/// variable. Independent of the scheduler that produced the order.
pub fn check_binding_order(rule: &Rule) -> Result<(), String> {
    let mut bound = vec![false; rule.vars.len()];
    let mut seen = vec![false; rule.premises.len()];
    let name = |v: VarId| rule.vars[v].name.clone();
    for &i in &rule.binding_order {
        if std::mem::replace(&mut seen[i], true) {
            return Err(format!("premise {i} appears twice in the binding order"));
        }
        match &rule.premises[i] {
            TPremise::Atom(a) => {
                for arg in &a.args {
                    if !matches!(arg, TExpr::Var(_)) {
                        if let Some(v) = arg.var_list().into_iter().find(|&v| !bound[v]) {
                            return Err(format!("premise {i} reads unbound `{}`", name(v)));
                        }
                    }
                }
                for arg in &a.args {
                    if let TExpr::Var(v) = arg {
                        bound[*v] = true;
                    }
                }
            }
            TPremise::Constraint { lhs, rhs, .. } => {
                for v in lhs.var_list().into_iter().chain(rhs.var_list()) {
                    if !bound[v] {
                        return Err(format!("constraint {i} reads unbound `{}`", name(v)));
                    }
                }
            }
            TPremise::Assign { var, expr } => {
                if let Some(v) = expr.var_list().into_iter().find(|&v| !bound[v]) {
                    return Err(format!("assignment {i} reads unbound `{}`", name(v)));
                }
                bound[*var] = true;
            }
            TPremise::Forall { var, collection, atom } => {
                for v in collection.var_list() {
                    if !bound[v] {
                        return Err(format!("forall {i} ranges over unbound `{}`", name(v)));
                    }
                }
                for arg in &atom.args {
                    for v in arg.var_list() {
                        if v != *var && !bound[v] {
                            return Err(format!("forall {i} reads unbound `{}`", name(v)));
                        }
                    }
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err("binding order omits a premise".into());
    }
    for head in &rule.heads {
        for arg in &head.args {
            if matches!(arg, TExpr::Wildcard) {
                return Err("wildcard in head".into());
            }
            if let Some(v) = arg.var_list().into_iter().find(|&v| !bound[v]) {
                return Err(format!("head reads unbound `{}`", name(v)));
            }
        }
    }
    Ok(())
}
