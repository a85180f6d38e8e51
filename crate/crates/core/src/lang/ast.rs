//! Untyped syntax tree. Spans never participate in equality, so two trees
//! compare equal when they have the same structure.

use std::fmt;

#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident { name: name.into(), span }
    }
}

/// `Name` or `Name(arg, ...)`, used for both type and lattice expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeExpr {
    pub name: Ident,
    pub args: Vec<TypeExpr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sep {
    Eq,
    Le,
}

impl Sep {
    pub fn as_str(self) -> &'static str {
        match self {
            Sep::Eq => "=",
            Sep::Le => "<=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TemplatePart {
    Slot,
    Sep(Sep),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: Ident,
    pub def: Option<TypeExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeDecl {
    pub name: Ident,
    pub def: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: Ident,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: Ident,
    /// Explicit mixfix template; `None` means plain juxtaposition.
    pub template: Option<Vec<TemplatePart>>,
    pub args: Vec<TypeExpr>,
    pub span: Span,
}

impl RelationDecl {
    /// The effective template: explicit, or one slot per argument.
    pub fn parts(&self) -> Vec<TemplatePart> {
        match &self.template {
            Some(t) => t.clone(),
            None => vec![TemplatePart::Slot; self.args.len()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(Ident),
    Wildcard(Span),
    Num(u64, Span),
    Inf(Span),
    Bool(bool, Span),
    Str(String, Span),
    Add(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Var(i) => i.span,
            Expr::Wildcard(s) | Expr::Num(_, s) | Expr::Inf(s) | Expr::Bool(_, s) | Expr::Str(_, s) => *s,
            Expr::Add(l, _) => l.span(),
        }
    }

    /// Variable names read by the expression, in order of appearance.
    pub fn vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Var(i) => out.push(&i.name),
            Expr::Add(l, r) => {
                l.vars(out);
                r.vars(out);
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub relation: Ident,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Le => ord != Greater,
            CmpOp::Lt => ord == Less,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub op: CmpOp,
    pub lhs: Expr,
    pub rhs: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forall {
    pub var: Ident,
    pub collection: Expr,
    pub body: Box<Premise>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Premise {
    Atom(Atom),
    Constraint(Constraint),
    Forall(Forall),
}

impl Premise {
    pub fn span(&self) -> Span {
        match self {
            Premise::Atom(a) => a.span,
            Premise::Constraint(c) => c.span,
            Premise::Forall(f) => f.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub name: Option<Ident>,
    /// Empty for axioms.
    pub body: Vec<Premise>,
    pub heads: Vec<Atom>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    Desc,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Asc => "asc",
            Direction::Desc => "desc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderDecl {
    pub rule: Ident,
    pub direction: Direction,
    pub key: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDecl {
    pub name: Ident,
    pub pattern: Atom,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub types: Vec<TypeDecl>,
    pub lattices: Vec<LatticeDecl>,
    pub consts: Vec<ConstDecl>,
    pub relations: Vec<RelationDecl>,
    pub rules: Vec<RuleDecl>,
    pub orders: Vec<OrderDecl>,
    pub queries: Vec<QueryDecl>,
}

impl Program {
    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
            && self.lattices.is_empty()
            && self.consts.is_empty()
            && self.relations.is_empty()
            && self.rules.is_empty()
            && self.orders.is_empty()
            && self.queries.is_empty()
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.relations.iter().find(|r| r.name.name == name)
    }
}
