//! Name resolution, typing and safety checking.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::lattice::{make_builtin, LatticeDescriptor, LatticeParam, Ty, Value};

use super::ast::*;
use super::diag::{self, Diagnostic};
use super::typed::*;

const BUILTIN_TYPES: &[&str] = &["Symbol", "Int", "Nat", "Bool", "Set", "Tuple"];
const BUILTIN_LATTICES: &[&str] = &["MinDist", "MaxNat", "Partition", "Dual", "Product"];

/// Validates a parsed program, returning the typed program or every
/// diagnostic found.
pub fn validate(program: &Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let mut v = Validator::new(program);
    let out = v.run();
    if v.diags.is_empty() {
        Ok(out)
    } else {
        let mut d = v.diags;
        diag::sort(&mut d);
        d.dedup();
        Err(d)
    }
}

struct Validator<'p> {
    program: &'p Program,
    diags: Vec<Diagnostic>,
    types: HashMap<&'p str, &'p TypeDecl>,
    lattices: HashMap<&'p str, &'p LatticeDecl>,
    lattice_cache: HashMap<String, Option<LatticeDescriptor>>,
    relations: Vec<Relation>,
    rel_index: HashMap<String, RelId>,
    consts: Vec<Const>,
}

impl<'p> Validator<'p> {
    fn new(program: &'p Program) -> Self {
        Validator {
            program,
            diags: Vec::new(),
            types: HashMap::new(),
            lattices: HashMap::new(),
            lattice_cache: HashMap::new(),
            relations: Vec::new(),
            rel_index: HashMap::new(),
            consts: Vec::new(),
        }
    }

    fn err(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, msg));
    }

    fn run(&mut self) -> TypedProgram {
        let p = self.program;
        for t in &p.types {
            if BUILTIN_TYPES.contains(&t.name.name.as_str()) {
                self.err(t.name.span, format!("`{}` is a built-in type and cannot be redeclared", t.name.name));
            } else if self.types.insert(&t.name.name, t).is_some() {
                self.err(t.name.span, format!("duplicate type `{}`", t.name.name));
            }
        }
        for l in &p.lattices {
            if BUILTIN_LATTICES.contains(&l.name.name.as_str()) || BUILTIN_TYPES.contains(&l.name.name.as_str()) {
                self.err(l.name.span, format!("`{}` is a built-in name and cannot be redeclared", l.name.name));
            } else if self.lattices.insert(&l.name.name, l).is_some() {
                self.err(l.name.span, format!("duplicate lattice `{}`", l.name.name));
            } else if self.types.contains_key(l.name.name.as_str()) {
                self.err(l.name.span, format!("`{}` is declared as both a type and a lattice", l.name.name));
            }
        }
        for t in &p.types {
            if let Some(def) = &t.def {
                let mut visiting = HashSet::new();
                visiting.insert(t.name.name.clone());
                if let Err(d) = self.resolve_type_in(def, &mut visiting) {
                    self.diags.push(d);
                }
            }
        }
        for l in &p.lattices {
            self.lattice_named(&l.name.name, l.name.span);
        }

        let mut const_names = HashSet::new();
        for c in &p.consts {
            if !const_names.insert(c.name.name.as_str()) {
                self.err(c.name.span, format!("duplicate const `{}`", c.name.name));
                continue;
            }
            match self.resolve_type(&c.ty) {
                Ok(ty) => self.consts.push(Const { name: c.name.name.clone(), ty }),
                Err(d) => self.diags.push(d),
            }
        }

        for r in &p.relations {
            if self.rel_index.contains_key(&r.name.name) {
                self.err(r.name.span, format!("duplicate relation `{}`", r.name.name));
                continue;
            }
            let mut args = Vec::new();
            let mut ok = true;
            for te in &r.args {
                match self.resolve_arg(te) {
                    Ok(a) => args.push(a),
                    Err(d) => {
                        self.diags.push(d);
                        ok = false;
                    }
                }
            }
            let parts = r.parts();
            let slots = parts.iter().filter(|p| **p == TemplatePart::Slot).count();
            if slots != r.args.len() {
                self.err(
                    r.span,
                    format!("template of `{}` has {slots} slot(s) but {} argument type(s)", r.name.name, r.args.len()),
                );
                ok = false;
            }
            if ok {
                self.rel_index.insert(r.name.name.clone(), self.relations.len());
                self.relations.push(Relation::new(r.name.name.clone(), args, parts));
            } else {
                // Keep a placeholder so rules using it report arity, not "unknown".
                self.rel_index.insert(r.name.name.clone(), usize::MAX);
            }
        }

        let mut rule_names = HashSet::new();
        let mut rules = Vec::new();
        for (i, r) in p.rules.iter().enumerate() {
            if let Some(n) = &r.name {
                if !rule_names.insert(n.name.as_str()) {
                    self.err(n.span, format!("duplicate rule `{}`", n.name));
                }
            }
            if let Some(rule) = self.check_rule(r, i) {
                rules.push(rule);
            }
        }

        let mut orders = Vec::new();
        for o in &p.orders {
            let Some(ri) = rules.iter().position(|r: &Rule| r.name == o.rule.name && p.rules.iter().any(|d| d.name.as_ref().map(|n| &n.name) == Some(&o.rule.name))) else {
                if !p.rules.iter().any(|d| d.name.as_ref().map(|n| &n.name) == Some(&o.rule.name)) {
                    self.err(o.rule.span, format!("order directive references unknown rule `{}`", o.rule.name));
                }
                continue;
            };
            let rule = &rules[ri];
            let names: HashMap<&str, VarId> = rule.vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
            let mut refs = Vec::new();
            o.key.vars(&mut refs);
            let mut bad = false;
            for n in refs {
                if !names.contains_key(n) && self.const_id(n).is_none() {
                    self.err(o.key.span(), format!("order directive for `{}` references unbound variable `{n}`", o.rule.name));
                    bad = true;
                }
            }
            if bad {
                continue;
            }
            let vars: Vec<Var> = rule.vars.clone();
            let ty = infer(&o.key, &|n| names.get(n).map(|&i| vars[i].ty.clone()), &self.consts).unwrap_or(Ty::Int);
            match lower(&o.key, &ty, &|n| names.get(n).copied(), &|n| vars[n].ty.clone(), &self.consts) {
                Ok(key) => orders.push(Order {
                    rule: ri,
                    direction: o.direction,
                    key,
                    span: o.span,
                }),
                Err(d) => self.diags.push(d),
            }
        }

        let mut queries = Vec::new();
        let mut query_names = HashSet::new();
        for q in &p.queries {
            if !query_names.insert(q.name.name.as_str()) {
                self.err(q.name.span, format!("duplicate query `{}`", q.name.name));
                continue;
            }
            if let Some(query) = self.check_query(q) {
                queries.push(query);
            }
        }

        TypedProgram {
            program: p.clone(),
            relations: self.relations.clone(),
            consts: self.consts.clone(),
            rules,
            orders,
            queries,
        }
    }

    fn const_id(&self, name: &str) -> Option<usize> {
        self.consts.iter().position(|c| c.name == name)
    }

    fn resolve_type(&mut self, te: &TypeExpr) -> Result<Ty, Diagnostic> {
        self.resolve_type_in(te, &mut HashSet::new())
    }

    fn resolve_type_in(&self, te: &TypeExpr, visiting: &mut HashSet<String>) -> Result<Ty, Diagnostic> {
        let name = te.name.name.as_str();
        let arity = |n: usize| {
            if te.args.len() == n {
                Ok(())
            } else {
                Err(Diagnostic::error(te.name.span, format!("type `{name}` takes {n} parameter(s), got {}", te.args.len())))
            }
        };
        if let Some(decl) = self.types.get(name) {
            arity(0)?;
            return match &decl.def {
                None => Ok(Ty::opaque(name)),
                Some(def) => {
                    if !visiting.insert(name.to_owned()) {
                        return Err(Diagnostic::error(te.name.span, format!("type `{name}` is defined in terms of itself")));
                    }
                    let out = self.resolve_type_in(def, visiting);
                    visiting.remove(name);
                    out
                }
            };
        }
        match name {
            "Symbol" => arity(0).map(|_| Ty::opaque("Symbol")),
            "Int" => arity(0).map(|_| Ty::Int),
            "Nat" => arity(0).map(|_| Ty::Nat),
            "Bool" => arity(0).map(|_| Ty::Bool),
            "Set" => {
                arity(1)?;
                Ok(Ty::Set(Box::new(self.resolve_type_in(&te.args[0], visiting)?)))
            }
            "Tuple" => Ok(Ty::Tuple(
                te.args.iter().map(|a| self.resolve_type_in(a, visiting)).collect::<Result<_, _>>()?,
            )),
            _ if self.lattices.contains_key(name) || BUILTIN_LATTICES.contains(&name) => {
                Err(Diagnostic::error(te.name.span, format!("`{name}` is a lattice, not a type")))
            }
            _ => Err(Diagnostic::error(te.name.span, format!("unknown type `{name}`"))),
        }
    }

    /// Resolves a declared lattice by name, caching the result.
    fn lattice_named(&mut self, name: &str, span: Span) -> Option<LatticeDescriptor> {
        if let Some(cached) = self.lattice_cache.get(name) {
            return cached.clone();
        }
        let decl = *self.lattices.get(name)?;
        self.lattice_cache.insert(name.to_owned(), None);
        let out = match self.resolve_lattice(&decl.def) {
            Ok(l) => Some(l.renamed(name)),
            Err(d) => {
                let _ = span;
                self.diags.push(d);
                None
            }
        };
        self.lattice_cache.insert(name.to_owned(), out.clone());
        out
    }

    fn resolve_lattice(&mut self, te: &TypeExpr) -> Result<LatticeDescriptor, Diagnostic> {
        let name = te.name.name.as_str();
        if self.lattices.contains_key(name) {
            if !te.args.is_empty() {
                return Err(Diagnostic::error(te.name.span, format!("lattice `{name}` takes no parameters")));
            }
            return self
                .lattice_named(name, te.name.span)
                .ok_or_else(|| Diagnostic::error(te.name.span, format!("lattice `{name}` is ill-formed or cyclic")));
        }
        let params: Vec<LatticeParam> = match name {
            "Set" | "Partition" => te
                .args
                .iter()
                .map(|a| self.resolve_type(a).map(LatticeParam::Type))
                .collect::<Result<_, _>>()?,
            "Dual" | "Product" => te
                .args
                .iter()
                .map(|a| self.resolve_lattice(a).map(LatticeParam::Lattice))
                .collect::<Result<_, _>>()?,
            _ => Vec::new(),
        };
        if !matches!(name, "Set" | "Partition" | "Dual" | "Product") && !te.args.is_empty() {
            return Err(Diagnostic::error(te.name.span, format!("lattice `{name}` takes no parameters")));
        }
        make_builtin(name, &params).map_err(|e| Diagnostic::error(te.name.span, e.to_string()))
    }

    fn resolve_arg(&mut self, te: &TypeExpr) -> Result<ArgKind, Diagnostic> {
        let name = te.name.name.as_str();
        if self.lattices.contains_key(name) || BUILTIN_LATTICES.contains(&name) {
            return self.resolve_lattice(te).map(ArgKind::Lattice);
        }
        if self.types.contains_key(name) || BUILTIN_TYPES.contains(&name) {
            return self.resolve_type(te).map(ArgKind::Key);
        }
        Err(Diagnostic::error(te.name.span, format!("unknown type or lattice `{name}`")))
    }

    fn relation_of(&mut self, atom: &Atom) -> Option<RelId> {
        match self.rel_index.get(&atom.relation.name) {
            None => {
                self.err(atom.relation.span, format!("unknown relation `{}`", atom.relation.name));
                None
            }
            Some(&usize::MAX) => None,
            Some(&id) => {
                let arity = self.relations[id].arity();
                if atom.args.len() != arity {
                    self.err(
                        atom.span,
                        format!(
                            "arity mismatch: `{}` takes {arity} argument(s), got {}",
                            atom.relation.name,
                            atom.args.len()
                        ),
                    );
                    None
                } else {
                    Some(id)
                }
            }
        }
    }

    fn check_query(&mut self, q: &QueryDecl) -> Option<Query> {
        let rel = self.relation_of(&q.pattern)?;
        let relation = self.relations[rel].clone();
        let mut pattern = Vec::new();
        let mut ok = true;
        for (i, arg) in q.pattern.args.iter().enumerate() {
            let kind = &relation.args[i];
            match arg {
                Expr::Wildcard(_) => {
                    if !kind.is_lattice() {
                        pattern.push(None);
                    }
                }
                _ if kind.is_lattice() => {
                    self.err(arg.span(), "query patterns may only constrain key positions; use `_` here");
                    ok = false;
                }
                Expr::Var(id) if self.const_id(&id.name).is_none() => {
                    self.err(id.span, format!("query arguments must be `_` or constants, found variable `{}`", id.name));
                    ok = false;
                }
                _ => match lower(arg, &kind.ty(), &|_| None, &|_| Ty::Bool, &self.consts) {
                    Ok(e) => pattern.push(Some(e)),
                    Err(d) => {
                        self.diags.push(d);
                        ok = false;
                    }
                },
            }
        }
        ok.then(|| Query {
            name: q.name.name.clone(),
            relation: rel,
            pattern,
        })
    }

    fn check_rule(&mut self, rule: &RuleDecl, index: usize) -> Option<Rule> {
        let before = self.diags.len();
        let name = rule.name.as_ref().map_or_else(|| format!("rule#{}", index + 1), |n| n.name.clone());

        // Relations and arities.
        let mut body_rels = Vec::new();
        for p in &rule.body {
            let atom = match p {
                Premise::Atom(a) => Some(a),
                Premise::Forall(f) => match &*f.body {
                    Premise::Atom(a) => Some(a),
                    other => {
                        self.err(other.span(), "the body of `forall` must be a relation atom");
                        None
                    }
                },
                Premise::Constraint(_) => None,
            };
            body_rels.push(atom.and_then(|a| self.relation_of(a)));
        }
        let head_rels: Vec<Option<RelId>> = rule.heads.iter().map(|h| self.relation_of(h)).collect();
        if self.diags.len() > before {
            return None;
        }
        let body_rels: Vec<RelId> = body_rels.into_iter().map(|r| r.unwrap_or(usize::MAX)).collect();
        let head_rels: Vec<RelId> = head_rels.into_iter().map(|r| r.expect("checked")).collect();

        // Variables bound by plain-variable arguments of body atoms.
        let const_names: HashSet<String> = self.consts.iter().map(|c| c.name.clone()).collect();
        let is_const = |n: &str| const_names.contains(n);
        let mut atom_bound: HashSet<&str> = HashSet::new();
        for p in &rule.body {
            if let Premise::Atom(a) = p {
                for e in &a.args {
                    if let Expr::Var(id) = e {
                        if !is_const(&id.name) {
                            atom_bound.insert(&id.name);
                        }
                    }
                }
            }
        }

        // Head-value normalization: `e <= v` where v occurs only in head
        // lattice positions becomes an assignment of v.
        let mut assigns: HashMap<usize, (&Ident, &Expr)> = HashMap::new();
        let mut assigned: HashSet<&str> = HashSet::new();
        for (pi, p) in rule.body.iter().enumerate() {
            let Premise::Constraint(c) = p else { continue };
            let target = match (c.op, &c.lhs, &c.rhs) {
                (CmpOp::Le, e, Expr::Var(v)) | (CmpOp::Ge, Expr::Var(v), e) => {
                    let only_head_values = !atom_bound.contains(v.name.as_str())
                        && !is_const(&v.name)
                        && !assigned.contains(v.name.as_str())
                        && !used_elsewhere(rule, pi, &v.name)
                        && head_uses_only_as_value(rule, &head_rels, &self.relations, &v.name);
                    only_head_values.then_some((v, e))
                }
                (CmpOp::Eq, Expr::Var(v), e) | (CmpOp::Eq, e, Expr::Var(v))
                    if !atom_bound.contains(v.name.as_str()) && !is_const(&v.name) && !assigned.contains(v.name.as_str()) =>
                {
                    let mut reads = Vec::new();
                    e.vars(&mut reads);
                    (!reads.contains(&v.name.as_str())).then_some((v, e))
                }
                _ => None,
            };
            if let Some((v, e)) = target {
                assigned.insert(&v.name);
                assigns.insert(pi, (v, e));
            }
        }

        // Number the variables.
        let mut names: Vec<String> = Vec::new();
        let mut ids: HashMap<String, VarId> = HashMap::new();
        let mut intern = |n: &str, names: &mut Vec<String>| -> VarId {
            *ids.entry(n.to_owned()).or_insert_with(|| {
                names.push(n.to_owned());
                names.len() - 1
            })
        };
        let mut all_exprs: Vec<&Expr> = Vec::new();
        let mut binders: Vec<&Ident> = Vec::new();
        for p in &rule.body {
            match p {
                Premise::Atom(a) => all_exprs.extend(&a.args),
                Premise::Constraint(c) => {
                    all_exprs.push(&c.lhs);
                    all_exprs.push(&c.rhs);
                }
                Premise::Forall(f) => {
                    binders.push(&f.var);
                    all_exprs.push(&f.collection);
                    if let Premise::Atom(a) = &*f.body {
                        all_exprs.extend(&a.args);
                    }
                }
            }
        }
        for h in &rule.heads {
            all_exprs.extend(&h.args);
        }
        for e in &all_exprs {
            let mut vs = Vec::new();
            e.vars(&mut vs);
            for n in vs {
                if !is_const(n) {
                    intern(n, &mut names);
                }
            }
        }
        for b in &binders {
            if is_const(&b.name) {
                self.err(b.span, format!("forall variable `{}` shadows a const", b.name));
            }
            intern(&b.name, &mut names);
        }
        // A forall binder must not be used outside its own premise.
        for (pi, p) in rule.body.iter().enumerate() {
            if let Premise::Forall(f) = p {
                if used_elsewhere(rule, pi, &f.var.name) || rule.heads.iter().any(|h| atom_mentions(h, &f.var.name)) {
                    self.err(f.var.span, format!("forall variable `{}` is used outside its scope", f.var.name));
                }
            }
        }
        let var_of = |n: &str| ids.get(n).copied();
        let mut tys: Vec<Option<Ty>> = vec![None; names.len()];
        let mut kinds: Vec<Option<VarKind>> = vec![None; names.len()];

        // Types from plain-variable atom positions.
        let unify = |this: &mut Self, tys: &mut Vec<Option<Ty>>, v: VarId, ty: Ty, span: Span| match &tys[v] {
            None => tys[v] = Some(ty),
            Some(t) if *t == ty => {}
            Some(t) => this.err(span, format!("variable `{}` has conflicting types {t} and {ty}", names[v])),
        };
        let mut atoms_with_rel: Vec<(&Atom, RelId, bool)> = Vec::new();
        for (pi, p) in rule.body.iter().enumerate() {
            match p {
                Premise::Atom(a) => atoms_with_rel.push((a, body_rels[pi], true)),
                Premise::Forall(f) => {
                    if let Premise::Atom(a) = &*f.body {
                        atoms_with_rel.push((a, body_rels[pi], true));
                    }
                }
                Premise::Constraint(_) => {}
            }
        }
        for (h, &r) in rule.heads.iter().zip(&head_rels) {
            atoms_with_rel.push((h, r, false));
        }
        for &(a, r, in_body) in &atoms_with_rel {
            for (i, e) in a.args.iter().enumerate() {
                if let Expr::Var(id) = e {
                    if let Some(v) = var_of(&id.name) {
                        let kind = self.relations[r].args[i].clone();
                        unify(self, &mut tys, v, kind.ty(), id.span);
                        if in_body {
                            let k = if kind.is_lattice() { VarKind::Lattice } else { VarKind::Key };
                            match kinds[v] {
                                None => kinds[v] = Some(k),
                                Some(prev) if prev != k => {
                                    self.err(id.span, format!("lattice value `{}` used as a key", id.name));
                                }
                                _ => {}
                            }
                        }
                    }
                }
            }
        }
        // Forall binders take the element type of their collection.
        for p in &rule.body {
            if let Premise::Forall(f) = p {
                let b = var_of(&f.var.name).expect("interned");
                match &f.collection {
                    Expr::Var(c) if var_of(&c.name).is_some() => match tys[var_of(&c.name).unwrap()].clone() {
                        Some(Ty::Set(elem)) => unify(self, &mut tys, b, *elem, f.var.span),
                        Some(other) => self.err(f.collection.span(), format!("forall ranges over `{}` of type {other}, which is not a finite set", c.name)),
                        None => {}
                    },
                    other => self.err(other.span(), "forall must range over a variable bound to a finite set"),
                }
                kinds[b] = Some(VarKind::Key);
            }
        }
        // Assigned variables take the type of their expression when no atom fixes it.
        let mut assign_order: Vec<usize> = assigns.keys().copied().collect();
        assign_order.sort();
        for &pi in &assign_order {
            let (v, e) = assigns[&pi];
            let vid = var_of(&v.name).expect("interned");
            let snapshot: Vec<Option<Ty>> = tys.clone();
            let inferred = infer(e, &|n| var_of(n).and_then(|i| snapshot[i].clone()), &self.consts);
            if tys[vid].is_none() {
                tys[vid] = inferred;
            }
            let mut reads = Vec::new();
            e.vars(&mut reads);
            let read_kinds: Vec<VarKind> = reads.iter().filter_map(|n| var_of(n).and_then(|i| kinds[i])).collect();
            kinds[vid] = if read_kinds.contains(&VarKind::Lattice) {
                Some(VarKind::Lattice)
            } else {
                read_kinds.first().copied()
            };
        }

        if self.diags.len() > before {
            return None;
        }

        // Binding order, simulated greedily in textual order.
        let mut bound: HashSet<&str> = HashSet::new();
        let mut order = Vec::new();
        let mut pending: Vec<usize> = (0..rule.body.len()).collect();
        loop {
            let next = pending.iter().position(|&pi| {
                let reads_bound = |e: &Expr| {
                    let mut vs = Vec::new();
                    e.vars(&mut vs);
                    vs.iter().all(|n| is_const(n) || bound.contains(n))
                };
                match &rule.body[pi] {
                    Premise::Atom(a) => a.args.iter().all(|e| matches!(e, Expr::Var(_) | Expr::Wildcard(_)) || reads_bound(e)),
                    Premise::Constraint(c) => match assigns.get(&pi) {
                        Some((_, e)) => reads_bound(e),
                        None => reads_bound(&c.lhs) && reads_bound(&c.rhs),
                    },
                    Premise::Forall(f) => {
                        reads_bound(&f.collection)
                            && match &*f.body {
                                Premise::Atom(a) => a.args.iter().all(|e| {
                                    let mut vs = Vec::new();
                                    e.vars(&mut vs);
                                    vs.iter().all(|n| *n == f.var.name || is_const(n) || bound.contains(n))
                                }),
                                _ => false,
                            }
                    }
                }
            });
            let Some(k) = next else { break };
            let pi = pending.remove(k);
            match &rule.body[pi] {
                Premise::Atom(a) => {
                    for e in &a.args {
                        if let Expr::Var(id) = e {
                            bound.insert(&id.name);
                        }
                    }
                }
                Premise::Constraint(_) => {
                    if let Some((v, _)) = assigns.get(&pi) {
                        bound.insert(&v.name);
                    }
                }
                Premise::Forall(_) => {}
            }
            order.push(pi);
        }
        for &pi in &pending {
            let p = &rule.body[pi];
            let mut vs = Vec::new();
            match p {
                Premise::Atom(a) => a.args.iter().for_each(|e| e.vars(&mut vs)),
                Premise::Constraint(c) => {
                    c.lhs.vars(&mut vs);
                    c.rhs.vars(&mut vs);
                }
                Premise::Forall(f) => {
                    f.collection.vars(&mut vs);
                    if let Premise::Atom(a) = &*f.body {
                        a.args.iter().for_each(|e| e.vars(&mut vs));
                    }
                }
            }
            let binder = if let Premise::Forall(f) = p { Some(f.var.name.as_str()) } else { None };
            let unbound: BTreeSet<&str> = vs
                .into_iter()
                .filter(|n| !is_const(n) && !bound.contains(n) && Some(*n) != binder)
                .collect();
            let what = match p {
                Premise::Atom(_) => "atom argument",
                Premise::Constraint(_) => "constraint",
                Premise::Forall(_) => "forall",
            };
            for n in unbound {
                self.err(p.span(), format!("unbound variable `{n}` in {what}"));
            }
        }
        for h in &rule.heads {
            for e in &h.args {
                if let Expr::Wildcard(s) = e {
                    self.err(*s, "wildcard `_` in rule head");
                }
                let mut vs = Vec::new();
                e.vars(&mut vs);
                for n in vs {
                    if !is_const(n) && !bound.contains(n) {
                        self.err(e.span(), format!("unbound head variable `{n}`"));
                    }
                }
            }
        }
        if self.diags.len() > before {
            return None;
        }

        // Kinds: lattice values never flow into key positions and vice versa.
        for &(a, r, _) in &atoms_with_rel {
            for (i, e) in a.args.iter().enumerate() {
                let lattice_slot = self.relations[r].args[i].is_lattice();
                let mut vs = Vec::new();
                e.vars(&mut vs);
                for n in vs {
                    let Some(v) = var_of(n) else { continue };
                    match (lattice_slot, kinds[v]) {
                        (false, Some(VarKind::Lattice)) => self.err(e.span(), format!("lattice value `{n}` used as a key")),
                        (true, Some(VarKind::Key)) => self.err(e.span(), format!("key value `{n}` used as a lattice value")),
                        _ => {}
                    }
                }
            }
        }

        // Every variable must have a type by now.
        let mut vars = Vec::new();
        for (i, n) in names.iter().enumerate() {
            match &tys[i] {
                Some(t) => vars.push(Var { name: n.clone(), ty: t.clone(), kind: kinds[i] }),
                None => {
                    self.err(rule.span, format!("cannot infer the type of variable `{n}`"));
                }
            }
        }
        if self.diags.len() > before {
            return None;
        }

        // Lower expressions.
        let var_ty = |v: VarId| vars[v].ty.clone();
        let lower_atom = |this: &mut Self, a: &Atom, r: RelId| -> Option<TAtom> {
            let mut args = Vec::new();
            for (i, e) in a.args.iter().enumerate() {
                let ty = this.relations[r].args[i].ty();
                match lower(e, &ty, &var_of, &var_ty, &this.consts) {
                    Ok(t) => args.push(t),
                    Err(d) => this.diags.push(d),
                }
            }
            (args.len() == a.args.len()).then(|| TAtom { relation: r, args, span: a.span })
        };
        let mut premises = Vec::new();
        for (pi, p) in rule.body.iter().enumerate() {
            let lowered = match p {
                Premise::Atom(a) => lower_atom(self, a, body_rels[pi]).map(TPremise::Atom),
                Premise::Forall(f) => {
                    let Premise::Atom(a) = &*f.body else { unreachable!() };
                    let var = var_of(&f.var.name).expect("interned");
                    let coll_ty = Ty::Set(Box::new(vars[var].ty.clone()));
                    let collection = lower(&f.collection, &coll_ty, &var_of, &var_ty, &self.consts);
                    let atom = lower_atom(self, a, body_rels[pi]);
                    match (collection, atom) {
                        (Ok(collection), Some(atom)) => Some(TPremise::Forall { var, collection, atom }),
                        (Err(d), _) => {
                            self.diags.push(d);
                            None
                        }
                        _ => None,
                    }
                }
                Premise::Constraint(c) => match assigns.get(&pi) {
                    Some((v, e)) => {
                        let var = var_of(&v.name).expect("interned");
                        match lower(e, &vars[var].ty, &var_of, &var_ty, &self.consts) {
                            Ok(expr) => Some(TPremise::Assign { var, expr }),
                            Err(d) => {
                                self.diags.push(d);
                                None
                            }
                        }
                    }
                    None => {
                        let lookup = |n: &str| var_of(n).map(|i| vars[i].ty.clone());
                        let ty = infer(&c.lhs, &lookup, &self.consts)
                            .or_else(|| infer(&c.rhs, &lookup, &self.consts))
                            .unwrap_or_else(|| literal_default(&c.lhs));
                        let l = lower(&c.lhs, &ty, &var_of, &var_ty, &self.consts);
                        let r = lower(&c.rhs, &ty, &var_of, &var_ty, &self.consts);
                        match (l, r) {
                            (Ok(lhs), Ok(rhs)) => Some(TPremise::Constraint { op: c.op, lhs, rhs }),
                            (Err(d), _) | (_, Err(d)) => {
                                self.diags.push(d);
                                None
                            }
                        }
                    }
                },
            };
            if let Some(l) = lowered {
                premises.push(l);
            }
        }
        let heads: Vec<TAtom> = rule
            .heads
            .iter()
            .zip(&head_rels)
            .filter_map(|(h, &r)| lower_atom(self, h, r))
            .collect();
        if self.diags.len() > before {
            return None;
        }
        let out = Rule {
            name,
            premises,
            heads,
            vars,
            binding_order: order,
            span: rule.span,
        };
        debug_assert!(check_binding_order(&out).is_ok(), "{:?}", check_binding_order(&out));
        Some(out)
    }
}

fn atom_mentions(a: &Atom, name: &str) -> bool {
    a.args.iter().any(|e| {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        vs.contains(&name)
    })
}

/// Whether `name` occurs in any body premise other than `skip`.
fn used_elsewhere(rule: &RuleDecl, skip: usize, name: &str) -> bool {
    rule.body.iter().enumerate().any(|(i, p)| {
        i != skip
            && match p {
                Premise::Atom(a) => atom_mentions(a, name),
                Premise::Constraint(c) => {
                    let mut vs = Vec::new();
                    c.lhs.vars(&mut vs);
                    c.rhs.vars(&mut vs);
                    vs.contains(&name)
                }
                Premise::Forall(f) => {
                    let mut vs = Vec::new();
                    f.collection.vars(&mut vs);
                    if let Premise::Atom(a) = &*f.body {
                        a.args.iter().for_each(|e| e.vars(&mut vs));
                    }
                    f.var.name == name || vs.contains(&name)
                }
            }
    })
}

fn head_uses_only_as_value(rule: &RuleDecl, head_rels: &[RelId], relations: &[Relation], name: &str) -> bool {
    let mut used = false;
    for (h, &r) in rule.heads.iter().zip(head_rels) {
        for (i, e) in h.args.iter().enumerate() {
            let mut vs = Vec::new();
            e.vars(&mut vs);
            if vs.contains(&name) {
                if !relations[r].args[i].is_lattice() {
                    return false;
                }
                used = true;
            }
        }
    }
    used
}

fn literal_default(e: &Expr) -> Ty {
    match e {
        Expr::Str(..) => Ty::opaque("Symbol"),
        Expr::Bool(..) => Ty::Bool,
        Expr::Inf(_) => Ty::Nat,
        _ => Ty::Int,
    }
}

fn infer(e: &Expr, var_ty: &dyn Fn(&str) -> Option<Ty>, consts: &[Const]) -> Option<Ty> {
    match e {
        Expr::Var(id) => match consts.iter().find(|c| c.name == id.name) {
            Some(c) => Some(c.ty.clone()),
            None => var_ty(&id.name),
        },
        Expr::Inf(_) => Some(Ty::Nat),
        Expr::Bool(..) => Some(Ty::Bool),
        Expr::Add(l, r) => infer(l, var_ty, consts).or_else(|| infer(r, var_ty, consts)),
        Expr::Num(..) | Expr::Str(..) | Expr::Wildcard(_) => None,
    }
}

/// Lowers an expression at an expected type.
fn lower(
    e: &Expr,
    expected: &Ty,
    var_of: &dyn Fn(&str) -> Option<VarId>,
    var_ty: &dyn Fn(VarId) -> Ty,
    consts: &[Const],
) -> Result<TExpr, Diagnostic> {
    let mismatch = |what: String| Diagnostic::error(e.span(), format!("type mismatch: expected {expected}, found {what}"));
    match e {
        Expr::Wildcard(_) => Ok(TExpr::Wildcard),
        Expr::Var(id) => {
            if let Some(ci) = consts.iter().position(|c| c.name == id.name) {
                return if consts[ci].ty == *expected {
                    Ok(TExpr::Const(ci))
                } else {
                    Err(mismatch(format!("const `{}` of type {}", id.name, consts[ci].ty)))
                };
            }
            let v = var_of(&id.name).ok_or_else(|| Diagnostic::error(id.span, format!("unbound variable `{}`", id.name)))?;
            let ty = var_ty(v);
            if ty == *expected {
                Ok(TExpr::Var(v))
            } else {
                Err(mismatch(format!("`{}` of type {ty}", id.name)))
            }
        }
        Expr::Num(n, _) => match expected {
            Ty::Nat => Ok(TExpr::Value(Value::nat(*n))),
            Ty::Int => i64::try_from(*n)
                .map(|i| TExpr::Value(Value::Int(i)))
                .map_err(|_| mismatch(format!("out-of-range integer {n}"))),
            _ => Err(mismatch(format!("number {n}"))),
        },
        Expr::Inf(_) => match expected {
            Ty::Nat => Ok(TExpr::Value(Value::inf())),
            _ => Err(mismatch("`inf`".into())),
        },
        Expr::Bool(b, _) => match expected {
            Ty::Bool => Ok(TExpr::Value(Value::Bool(*b))),
            _ => Err(mismatch(format!("`{b}`"))),
        },
        Expr::Str(s, _) => match expected {
            Ty::Opaque(_) => Ok(TExpr::Value(Value::sym(s))),
            _ => Err(mismatch(format!("symbol {s:?}"))),
        },
        Expr::Add(l, r) => {
            if !expected.supports_add() {
                return Err(mismatch("an addition".into()));
            }
            Ok(TExpr::Add(
                Box::new(lower(l, expected, var_of, var_ty, consts)?),
                Box::new(lower(r, expected, var_of, var_ty, consts)?),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    const GRAPH: &str = "type Vertex\nlattice Dist = MinDist\n\
        relation edge _ _ = _: Vertex, Vertex, Dist\n\
        relation distTo _ <= _: Vertex, Dist\n\
        const start: Vertex\n\
        rule init: distTo start <= 0\n\
        rule addDist: distTo v1 <= d1, edge v1 v2 = d2, d1 + d2 <= d --> distTo v2 <= d\n\
        order addDist by asc d1\n";

    fn check(src: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
        validate(&parse_program(src).expect("parses"))
    }

    fn messages(src: &str) -> Vec<String> {
        check(src).unwrap_err().into_iter().map(|d| d.message).collect()
    }

    #[test]
    fn graph_distance_validates() {
        let tp = check(GRAPH).unwrap();
        let add = &tp.rules[tp.rule_id("addDist").unwrap()];
        assert_eq!(add.binding_order, vec![0, 1, 2]);
        assert!(matches!(add.premises[0], TPremise::Atom(_)));
        assert!(matches!(add.premises[1], TPremise::Atom(_)));
        assert!(matches!(add.premises[2], TPremise::Assign { .. }));
        assert!(tp.rules[0].is_axiom());
        let dist = &tp.relations[tp.relation_id("distTo").unwrap()];
        assert_eq!(dist.key_cols, vec![0]);
        assert_eq!(dist.lattice_cols, vec![1]);
        assert_eq!(tp.orders.len(), 1);
        check_binding_order(add).unwrap();
    }

    #[test]
    fn unbound_head_variable() {
        let m = messages("type V\nrelation r: V\nrelation s: V, V\nrule: r x --> s x y");
        assert!(m.iter().any(|m| m.contains("unbound head variable `y`")), "{m:?}");
    }

    #[test]
    fn arity_mismatch() {
        let m = messages("type Vertex\nlattice Dist = MinDist\nrelation edge _ _ = _: Vertex, Vertex, Dist\nrule: edge v1 = d --> edge v1 v1 = d");
        assert!(m.iter().any(|m| m.contains("arity mismatch")), "{m:?}");
    }

    #[test]
    fn unknown_names() {
        let m = messages("relation r: Vertex\nrule: q x --> r x");
        assert!(m.iter().any(|m| m.contains("unknown type or lattice `Vertex`")), "{m:?}");
        let m = messages("type V\nrelation r: V\nrule: q x --> r x");
        assert!(m.iter().any(|m| m.contains("unknown relation `q`")), "{m:?}");
        let m = messages("relation r _ <= _: Symbol, Wat");
        assert!(m.iter().any(|m| m.contains("`Wat`")), "{m:?}");
    }

    #[test]
    fn lattice_value_as_key() {
        let m = messages(
            "type V\nlattice D = MinDist\nrelation dist _ <= _: V, D\nrelation at: Nat\nrule: dist v <= d --> at d",
        );
        assert!(m.iter().any(|m| m.contains("lattice value `d` used as a key")), "{m:?}");
    }

    #[test]
    fn order_directive_errors() {
        let m = messages(&format!("{GRAPH}order nope by asc d1\n"));
        assert!(m.iter().any(|m| m.contains("unknown rule `nope`")), "{m:?}");
        let m = messages(&format!("{GRAPH}order init by asc zz\n"));
        assert!(m.iter().any(|m| m.contains("unbound variable `zz`")), "{m:?}");
    }

    #[test]
    fn duplicates() {
        let m = messages("type V\ntype V\nrelation r: V\nrelation r: V");
        assert!(m.iter().any(|m| m.contains("duplicate type")));
        assert!(m.iter().any(|m| m.contains("duplicate relation")));
    }

    #[test]
    fn forall_typing() {
        let src = "type State\ntype Ctor\nrelation hyperEdge: State, Ctor, Set(State)\nrelation ok: State\n\
                   rule: hyperEdge s1 c ss, forall s in ss. ok s --> ok s1";
        let tp = check(src).unwrap();
        let r = &tp.rules[0];
        assert!(matches!(r.premises[1], TPremise::Forall { .. }));
        let m = messages(
            "type State\ntype Ctor\nrelation e: State, Ctor, State\nrelation ok: State\n\
             rule: e s1 c ss, forall s in ss. ok s --> ok s1",
        );
        assert!(m.iter().any(|m| m.contains("not a finite set")), "{m:?}");
    }

    #[test]
    fn unbound_constraint_variable() {
        let m = messages("type V\nrelation r: V, Int\nrule: r x i, j < i --> r x i");
        assert!(m.iter().any(|m| m.contains("unbound variable `j` in constraint")), "{m:?}");
    }

    #[test]
    fn type_mismatch() {
        let m = messages("type V\ntype W\nrelation r: V\nrelation s: W\nrule: r x --> s x");
        assert!(m.iter().any(|m| m.contains("conflicting types")), "{m:?}");
    }

    #[test]
    fn diagnostics_are_order_independent() {
        let a = "type V\nrelation r: V\nrelation s: V, V\nrule: r x --> s x y\nrule: q z --> r z\n";
        let b = "rule: q z --> r z\nrule: r x --> s x y\nrelation s: V, V\nrelation r: V\ntype V\n";
        let strip = |src: &str| {
            let mut m: Vec<String> = messages(src);
            m.sort();
            m
        };
        assert_eq!(strip(a), strip(b));
    }
}
