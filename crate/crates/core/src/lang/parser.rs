//! Recursive-descent parser.
//!
//! A declaration starts with a keyword in column 1; indented lines continue
//! the previous declaration. Relation atoms are mixfix: the relation name
//! comes first and its arguments are interleaved with the `=`/`<=`
//! separators of its declared template, so relation declarations are
//! collected in a first pass before any rule is parsed.

use std::collections::HashMap;

use super::ast::*;
use super::diag::{self, Diagnostic};
use super::lexer::{lex, Tok, Token};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a whole source file.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(src);
    let groups = split_declarations(&toks);

    // First pass: relation templates.
    let mut templates: HashMap<String, Vec<TemplatePart>> = HashMap::new();
    let empty = HashMap::new();
    for group in &groups {
        if matches!(&group[0].tok, Tok::Ident(k) if k == "relation" || k == "rel") {
            let mut p = Parser::new(group, &empty);
            if let Ok(decl) = p.relation_decl() {
                templates.entry(decl.name.name.clone()).or_insert_with(|| decl.parts());
            }
        }
    }

    let mut program = Program::default();
    for group in &groups {
        let mut p = Parser::new(group, &templates);
        if let Err(d) = p.declaration(&mut program) {
            diags.push(d);
        }
    }
    if diags.is_empty() {
        Ok(program)
    } else {
        diag::sort(&mut diags);
        Err(diags)
    }
}

/// Parses a single atom of `decl`'s relation from source text, matching the
/// arguments against the declared template.
pub fn parse_atom_by_template(decl: &RelationDecl, src: &str) -> Result<Atom, Diagnostic> {
    let (toks, diags) = lex(src);
    if let Some(d) = diags.into_iter().next() {
        return Err(d);
    }
    let mut templates = HashMap::new();
    templates.insert(decl.name.name.clone(), decl.parts());
    let mut p = Parser::new(&toks, &templates);
    let atom = p.atom()?;
    if atom.relation.name != decl.name.name {
        return Err(Diagnostic::error(
            atom.relation.span,
            format!("expected relation `{}`, found `{}`", decl.name.name, atom.relation.name),
        ));
    }
    if atom.args.len() != decl.parts().iter().filter(|p| **p == TemplatePart::Slot).count() {
        return Err(Diagnostic::error(atom.span, template_text(&decl.name.name, &decl.parts())));
    }
    p.finish()?;
    Ok(atom)
}

fn split_declarations(toks: &[Token]) -> Vec<&[Token]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=toks.len() {
        if i == toks.len() || toks[i].span.col == 1 {
            if start < i {
                groups.push(&toks[start..i]);
            }
            start = i;
        }
    }
    groups
}

fn template_text(name: &str, parts: &[TemplatePart]) -> String {
    let mut s = format!("separator mismatch: expected `{name}");
    for p in parts {
        match p {
            TemplatePart::Slot => s.push_str(" _"),
            TemplatePart::Sep(sep) => {
                s.push(' ');
                s.push_str(sep.as_str());
            }
        }
    }
    s.push('`');
    s
}

enum Item {
    Term(Expr),
    Sep(Sep),
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    /// Exclusive end of the current segment.
    limit: usize,
    templates: &'a HashMap<String, Vec<TemplatePart>>,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], templates: &'a HashMap<String, Vec<TemplatePart>>) -> Self {
        Parser {
            toks,
            pos: 0,
            limit: toks.len(),
            templates,
        }
    }

    fn peek(&self) -> Option<&'a Tok> {
        if self.pos < self.limit {
            Some(&self.toks[self.pos].tok)
        } else {
            None
        }
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Tok> {
        let i = self.pos + offset;
        if i < self.limit {
            Some(&self.toks[i].tok)
        } else {
            None
        }
    }

    fn span(&self) -> Span {
        if self.pos < self.toks.len() {
            self.toks[self.pos].span
        } else if let Some(last) = self.toks.last() {
            Span::new(last.span.line, last.span.col + 1)
        } else {
            Span::new(1, 1)
        }
    }

    fn bump(&mut self) -> Option<&'a Token> {
        if self.pos < self.limit {
            self.pos += 1;
            Some(&self.toks[self.pos - 1])
        } else {
            None
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => Diagnostic::error(self.span(), format!("expected {wanted}, found {}", t.describe())),
            None => Diagnostic::error(self.span(), format!("expected {wanted}, found end of declaration")),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let span = self.span();
                self.pos += 1;
                Ok(Ident::new(name.clone(), span))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Ident(name)) if name == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn finish(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(Diagnostic::error(self.span(), format!("unexpected {}", t.describe()))),
        }
    }

    fn declaration(&mut self, program: &mut Program) -> PResult<()> {
        let span = self.span();
        let kw = match self.peek() {
            Some(Tok::Ident(k)) => k.as_str(),
            _ => return Err(self.unexpected("a declaration keyword")),
        };
        match kw {
            "type" => {
                self.pos += 1;
                let name = self.ident()?;
                let def = if self.eat(&Tok::Eq) { Some(self.type_expr()?) } else { None };
                program.types.push(TypeDecl { name, def, span });
            }
            "lattice" => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                let def = self.type_expr()?;
                program.lattices.push(LatticeDecl { name, def, span });
            }
            "const" => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.type_expr()?;
                program.consts.push(ConstDecl { name, ty, span });
            }
            "relation" | "rel" => {
                let decl = self.relation_decl()?;
                program.relations.push(decl);
                return Ok(());
            }
            "rule" => {
                let rule = self.rule_decl()?;
                program.rules.push(rule);
                return Ok(());
            }
            "order" | "ord" => {
                let order = self.order_decl()?;
                program.orders.push(order);
            }
            "query" => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let pattern = self.atom()?;
                program.queries.push(QueryDecl { name, pattern, span });
            }
            other => {
                return Err(Diagnostic::error(span, format!("expected a declaration keyword, found `{other}`")));
            }
        }
        self.finish()
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let name = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.type_expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(TypeExpr { name, args })
    }

    fn relation_decl(&mut self) -> PResult<RelationDecl> {
        let span = self.span();
        self.bump();
        let name = self.ident()?;
        let mut parts = Vec::new();
        let tpl_span = self.span();
        loop {
            match self.peek() {
                Some(Tok::Underscore) => parts.push(TemplatePart::Slot),
                Some(Tok::Eq) => parts.push(TemplatePart::Sep(Sep::Eq)),
                Some(Tok::Le) => parts.push(TemplatePart::Sep(Sep::Le)),
                Some(Tok::Colon) => break,
                _ => return Err(self.unexpected("a template part (`_`, `=`, `<=`) or `:`")),
            }
            self.pos += 1;
        }
        let well_formed = parts.windows(2).all(|w| !(matches!(w[0], TemplatePart::Sep(_)) && matches!(w[1], TemplatePart::Sep(_))))
            && !matches!(parts.first(), Some(TemplatePart::Sep(_)))
            && !matches!(parts.last(), Some(TemplatePart::Sep(_)));
        if !well_formed {
            return Err(Diagnostic::error(
                tpl_span,
                "malformed template: separators must sit between `_` slots",
            ));
        }
        self.expect(Tok::Colon)?;
        let mut args = Vec::new();
        if self.peek().is_some() {
            loop {
                args.push(self.type_expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.finish()?;
        let template = if parts.is_empty() { None } else { Some(parts) };
        Ok(RelationDecl { name, template, args, span })
    }

    fn rule_decl(&mut self) -> PResult<RuleDecl> {
        let span = self.span();
        self.bump();
        let name = if self.peek() == Some(&Tok::Colon) { None } else { Some(self.ident()?) };
        self.expect(Tok::Colon)?;

        let mut depth = 0i32;
        let mut arrows = Vec::new();
        for i in self.pos..self.limit {
            match self.toks[i].tok {
                Tok::LParen | Tok::LBrace => depth += 1,
                Tok::RParen | Tok::RBrace => depth -= 1,
                Tok::Arrow if depth == 0 => arrows.push(i),
                _ => {}
            }
        }
        let end = self.limit;
        let (body, heads) = match arrows.as_slice() {
            [] => (Vec::new(), self.segment(end, |p| p.head_list())?),
            [arrow] => {
                let arrow = *arrow;
                if arrow == self.pos || arrow + 1 == end {
                    return Err(Diagnostic::error(self.toks[arrow].span, "unbalanced rule arrow: `-->` needs premises on the left and heads on the right"));
                }
                let body = self.segment(arrow, |p| p.premise_list())?;
                self.pos = arrow + 1;
                let heads = self.segment(end, |p| p.head_list())?;
                (body, heads)
            }
            [_, second, ..] => {
                return Err(Diagnostic::error(self.toks[*second].span, "unbalanced rule arrow: more than one `-->`"));
            }
        };
        Ok(RuleDecl { name, body, heads, span })
    }

    /// Runs `f` on the tokens up to `end`, requiring it to consume them all.
    fn segment<T>(&mut self, end: usize, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let saved = self.limit;
        self.limit = end;
        let out = f(self).and_then(|v| self.finish().map(|_| v));
        self.limit = saved;
        out
    }

    fn premise_list(&mut self) -> PResult<Vec<Premise>> {
        let mut out = vec![self.premise()?];
        while self.eat(&Tok::Comma) {
            out.push(self.premise()?);
        }
        Ok(out)
    }

    fn head_list(&mut self) -> PResult<Vec<Atom>> {
        let mut out = vec![self.atom()?];
        while self.eat(&Tok::Comma) {
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn premise(&mut self) -> PResult<Premise> {
        let span = self.span();
        if let Some(Tok::Ident(name)) = self.peek() {
            if name == "forall" && matches!(self.peek_at(1), Some(Tok::Ident(_))) && matches!(self.peek_at(2), Some(Tok::Ident(k)) if k == "in") {
                self.pos += 1;
                let var = self.ident()?;
                self.keyword("in")?;
                let collection = self.primary()?;
                self.expect(Tok::Dot)?;
                let body = Box::new(self.premise()?);
                return Ok(Premise::Forall(Forall { var, collection, body, span }));
            }
            let looks_like_atom = self.templates.contains_key(name)
                || matches!(
                    self.peek_at(1),
                    None | Some(Tok::Ident(_) | Tok::Num(_) | Tok::Str(_) | Tok::Underscore | Tok::LParen | Tok::Comma)
                );
            if looks_like_atom {
                return self.atom().map(Premise::Atom);
            }
        }
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ge) => CmpOp::Ge,
            Some(Tok::Gt) => CmpOp::Gt,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(Premise::Constraint(Constraint { op, lhs, rhs, span }))
    }

    fn atom(&mut self) -> PResult<Atom> {
        let span = self.span();
        let relation = self.ident()?;
        let mut items = Vec::new();
        let mut after_sep = false;
        loop {
            match self.peek() {
                None | Some(Tok::Comma) => break,
                Some(Tok::Eq) => {
                    items.push(Item::Sep(Sep::Eq));
                    after_sep = true;
                    self.pos += 1;
                }
                Some(Tok::Le) => {
                    items.push(Item::Sep(Sep::Le));
                    after_sep = true;
                    self.pos += 1;
                }
                Some(Tok::Ident(_) | Tok::Num(_) | Tok::Str(_) | Tok::Underscore | Tok::LParen) => {
                    let term = if after_sep { self.additive()? } else { self.primary()? };
                    items.push(Item::Term(term));
                    after_sep = false;
                }
                Some(t) => {
                    return Err(Diagnostic::error(self.span(), format!("unexpected {} in atom `{}`", t.describe(), relation.name)));
                }
            }
        }
        let args = match self.templates.get(&relation.name) {
            Some(parts) => match_template(&relation.name, parts, items, span)?,
            None => items
                .into_iter()
                .filter_map(|i| match i {
                    Item::Term(e) => Some(e),
                    Item::Sep(_) => None,
                })
                .collect(),
        };
        Ok(Atom { relation, args, span })
    }

    fn order_decl(&mut self) -> PResult<OrderDecl> {
        let span = self.span();
        self.bump();
        if self.eat(&Tok::Colon) {
            return self.pairwise_order(span);
        }
        let rule = self.ident()?;
        self.keyword("by")?;
        let direction = match self.peek() {
            Some(Tok::Ident(d)) if d == "asc" => Direction::Asc,
            Some(Tok::Ident(d)) if d == "desc" => Direction::Desc,
            _ => return Err(self.unexpected("`asc` or `desc`")),
        };
        self.pos += 1;
        let key = self.additive()?;
        Ok(OrderDecl { rule, direction, key, span })
    }

    /// `order: x <= y --> R { v = x } <= R { v = y }`, accepted only when it
    /// compares one variable by a total order.
    fn pairwise_order(&mut self, span: Span) -> PResult<OrderDecl> {
        let unsupported = |at: Span| {
            Diagnostic::error(
                at,
                "unsupported order directive: only `x <= y --> r { v = x } <= r { v = y }` is accepted; use `order r by asc v`",
            )
        };
        let x = self.ident()?;
        let op = match self.peek() {
            Some(Tok::Le) | Some(Tok::Lt) => Direction::Asc,
            Some(Tok::Ge) | Some(Tok::Gt) => Direction::Desc,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.pos += 1;
        let y = self.ident()?;
        self.expect(Tok::Arrow)?;
        let (r1, v1, a1) = self.instance_pattern()?;
        self.expect(Tok::Le)?;
        let (r2, v2, a2) = self.instance_pattern()?;
        if r1.name != r2.name || v1.name != v2.name {
            return Err(unsupported(span));
        }
        let direction = if a1.name == x.name && a2.name == y.name {
            op
        } else if a1.name == y.name && a2.name == x.name {
            match op {
                Direction::Asc => Direction::Desc,
                Direction::Desc => Direction::Asc,
            }
        } else {
            return Err(unsupported(span));
        };
        Ok(OrderDecl {
            rule: r1,
            direction,
            key: Expr::Var(v1),
            span,
        })
    }

    fn instance_pattern(&mut self) -> PResult<(Ident, Ident, Ident)> {
        let rule = self.ident()?;
        self.expect(Tok::LBrace)?;
        let var = self.ident()?;
        self.expect(Tok::Eq)?;
        let value = self.ident()?;
        self.expect(Tok::RBrace)?;
        Ok((rule, var, value))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.primary()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.primary()?;
            lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(match name.as_str() {
                    "inf" => Expr::Inf(span),
                    "true" => Expr::Bool(true, span),
                    "false" => Expr::Bool(false, span),
                    _ => Expr::Var(Ident::new(name.clone(), span)),
                })
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(*n, span))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Expr::Str(s.clone(), span))
            }
            Some(Tok::Underscore) => {
                self.pos += 1;
                Ok(Expr::Wildcard(span))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.additive()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}

/// Extracts arguments from a mixfix item sequence. A sequence with the wrong
/// number of arguments is passed through so validation can report the arity;
/// right arity with the wrong separators is a syntax error.
fn match_template(name: &str, parts: &[TemplatePart], items: Vec<Item>, span: Span) -> PResult<Vec<Expr>> {
    let matches = items.len() == parts.len()
        && items.iter().zip(parts).all(|(i, p)| match (i, p) {
            (Item::Term(_), TemplatePart::Slot) => true,
            (Item::Sep(a), TemplatePart::Sep(b)) => a == b,
            _ => false,
        });
    let slots = parts.iter().filter(|p| **p == TemplatePart::Slot).count();
    let terms: Vec<Expr> = items
        .into_iter()
        .filter_map(|i| match i {
            Item::Term(e) => Some(e),
            Item::Sep(_) => None,
        })
        .collect();
    if matches || terms.len() != slots {
        Ok(terms)
    } else {
        Err(Diagnostic::error(span, template_text(name, parts)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> Expr {
        Expr::Var(Ident::new(n, Span::default()))
    }

    #[test]
    fn relation_with_template() {
        let p = parse_program("relation distTo _ <= _: Vertex, Dist").unwrap();
        let r = &p.relations[0];
        assert_eq!(r.name.name, "distTo");
        assert_eq!(
            r.template,
            Some(vec![TemplatePart::Slot, TemplatePart::Sep(Sep::Le), TemplatePart::Slot])
        );
        assert_eq!(r.args.len(), 2);
        assert_eq!(r.args[0].name.name, "Vertex");
    }

    #[test]
    fn add_dist_rule() {
        let src = "relation edge _ _ = _: Vertex, Vertex, Dist\n\
                   relation distTo _ <= _: Vertex, Dist\n\
                   rule addDist: distTo v1 <= d1, edge v1 v2 = d2, d1 + d2 <= d --> distTo v2 <= d";
        let p = parse_program(src).unwrap();
        let rule = &p.rules[0];
        assert_eq!(rule.name.as_ref().unwrap().name, "addDist");
        assert_eq!(rule.body.len(), 3);
        assert!(matches!(rule.body[0], Premise::Atom(_)));
        assert!(matches!(rule.body[1], Premise::Atom(_)));
        match &rule.body[2] {
            Premise::Constraint(c) => {
                assert_eq!(c.op, CmpOp::Le);
                assert_eq!(c.lhs, Expr::Add(Box::new(var("d1")), Box::new(var("d2"))));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(rule.heads.len(), 1);
        assert_eq!(rule.heads[0].args, vec![var("v2"), var("d")]);
    }

    #[test]
    fn empty_source() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("-- only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn axiom_rule_and_continuation_lines() {
        let src = "relation distTo _ <= _: Vertex, Dist\n\
                   rule init: distTo start <= 0\n\
                   rule: distTo v <= d,\n      distTo w <= e\n      --> distTo v <= e";
        let p = parse_program(src).unwrap();
        assert!(p.rules[0].body.is_empty());
        assert_eq!(p.rules[1].body.len(), 2);
        assert!(p.rules[1].name.is_none());
    }

    #[test]
    fn atoms_by_template() {
        let edge = parse_program("relation edge _ _ = _: Vertex, Vertex, Dist").unwrap().relations.remove(0);
        let a = parse_atom_by_template(&edge, "edge v1 v2 = d2").unwrap();
        assert_eq!(a.args, vec![var("v1"), var("v2"), var("d2")]);
        let dist = parse_program("relation distTo _ <= _: Vertex, Dist").unwrap().relations.remove(0);
        let a = parse_atom_by_template(&dist, "distTo start <= 0").unwrap();
        assert_eq!(a.args, vec![var("start"), Expr::Num(0, Span::default())]);
        let reaches = parse_program("relation reaches: State").unwrap().relations.remove(0);
        let a = parse_atom_by_template(&reaches, "reaches s").unwrap();
        assert_eq!(a.args, vec![var("s")]);
        assert!(parse_atom_by_template(&edge, "edge v1 v2 <= d2").is_err());
    }

    #[test]
    fn separator_mismatch_is_a_syntax_error() {
        let src = "relation distTo _ <= _: Vertex, Dist\nrule: distTo a = 3 --> distTo a <= 3";
        let diags = parse_program(src).unwrap_err();
        assert!(diags[0].message.contains("separator mismatch"), "{diags:?}");
        assert_eq!(diags[0].line, 2);
    }

    #[test]
    fn wrong_arity_parses_for_validation() {
        let src = "relation edge _ _ = _: Vertex, Vertex, Dist\nrule: edge v1 = d --> edge v1 v1 = d";
        let p = parse_program(src).unwrap();
        match &p.rules[0].body[0] {
            Premise::Atom(a) => assert_eq!(a.args.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arrow_errors() {
        let e = parse_program("relation r: V\nrule: r x --> r x --> r x").unwrap_err();
        assert!(e[0].message.contains("unbalanced rule arrow"));
        let e = parse_program("relation r: V\nrule: r x -->").unwrap_err();
        assert!(e[0].message.contains("unbalanced rule arrow"));
    }

    #[test]
    fn malformed_template() {
        let e = parse_program("relation r _ = = _: V, V").unwrap_err();
        assert!(e[0].message.contains("malformed template"));
    }

    #[test]
    fn pairwise_order_desugars() {
        let src = "order: d11 <= d12 --> addDist { d1 = d11 } <= addDist { d1 = d12 }";
        let p = parse_program(src).unwrap();
        assert_eq!(p.orders[0].rule.name, "addDist");
        assert_eq!(p.orders[0].direction, Direction::Asc);
        assert_eq!(p.orders[0].key, var("d1"));
        let q = parse_program("ord addDist by asc d1").unwrap();
        assert_eq!(p.orders, q.orders);
        let bad = "order: a <= b --> r { x = a } <= s { x = b }";
        assert!(parse_program(bad).is_err());
    }

    #[test]
    fn forall_premise() {
        let src = "relation hyperEdge: State, Ctor, Set(State)\nrelation notRejectsAll: State\n\
                   rule: hyperEdge s1 c ss, forall s in ss. notRejectsAll s --> notRejectsAll s1";
        let p = parse_program(src).unwrap();
        match &p.rules[0].body[1] {
            Premise::Forall(f) => {
                assert_eq!(f.var.name, "s");
                assert_eq!(f.collection, var("ss"));
                assert!(matches!(*f.body, Premise::Atom(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn head_arithmetic_in_key_position() {
        let src = "relation parse: Symbol, Pos, Pos\nrelation token: Pos, Terminal\nrelation tp: Symbol, Terminal\n\
                   rule: tp nt c, token i c --> parse nt i (i + 1)";
        let p = parse_program(src).unwrap();
        assert_eq!(
            p.rules[0].heads[0].args[2],
            Expr::Add(Box::new(var("i")), Box::new(Expr::Num(1, Span::default())))
        );
    }

    #[test]
    fn unknown_keyword_and_token() {
        let e = parse_program("relaton r: V").unwrap_err();
        assert!(e[0].message.contains("declaration keyword"));
        let e = parse_program("relation r: V ;").unwrap_err();
        assert!(e.iter().any(|d| d.message.contains("unknown token")));
    }
}
