//! Pretty-printer producing source that parses back to an equal tree.

use std::collections::HashMap;
use std::fmt::Write;

use super::ast::*;

pub fn format_program(p: &Program) -> String {
    let templates: HashMap<&str, Vec<TemplatePart>> =
        p.relations.iter().map(|r| (r.name.name.as_str(), r.parts())).collect();
    let mut out = String::new();
    for t in &p.types {
        match &t.def {
            Some(def) => writeln!(out, "type {} = {}", t.name.name, type_expr(def)),
            None => writeln!(out, "type {}", t.name.name),
        }
        .unwrap();
    }
    for l in &p.lattices {
        writeln!(out, "lattice {} = {}", l.name.name, type_expr(&l.def)).unwrap();
    }
    for c in &p.consts {
        writeln!(out, "const {}: {}", c.name.name, type_expr(&c.ty)).unwrap();
    }
    for r in &p.relations {
        out.push_str("relation ");
        out.push_str(&r.name.name);
        if let Some(parts) = &r.template {
            for part in parts {
                out.push(' ');
                out.push_str(match part {
                    TemplatePart::Slot => "_",
                    TemplatePart::Sep(s) => s.as_str(),
                });
            }
        }
        out.push(':');
        let args: Vec<String> = r.args.iter().map(type_expr).collect();
        if !args.is_empty() {
            out.push(' ');
            out.push_str(&args.join(", "));
        }
        out.push('\n');
    }
    for rule in &p.rules {
        out.push_str("rule");
        if let Some(name) = &rule.name {
            out.push(' ');
            out.push_str(&name.name);
        }
        out.push_str(": ");
        if !rule.body.is_empty() {
            let body: Vec<String> = rule.body.iter().map(|pr| premise(pr, &templates)).collect();
            out.push_str(&body.join(", "));
            out.push_str(" --> ");
        }
        let heads: Vec<String> = rule.heads.iter().map(|a| atom(a, &templates)).collect();
        out.push_str(&heads.join(", "));
        out.push('\n');
    }
    for o in &p.orders {
        writeln!(out, "order {} by {} {}", o.rule.name, o.direction.as_str(), expr(&o.key)).unwrap();
    }
    for q in &p.queries {
        writeln!(out, "query {}: {}", q.name.name, atom(&q.pattern, &templates)).unwrap();
    }
    out
}

fn type_expr(t: &TypeExpr) -> String {
    if t.args.is_empty() {
        t.name.name.clone()
    } else {
        let args: Vec<String> = t.args.iter().map(type_expr).collect();
        format!("{}({})", t.name.name, args.join(", "))
    }
}

fn premise(p: &Premise, templates: &HashMap<&str, Vec<TemplatePart>>) -> String {
    match p {
        Premise::Atom(a) => atom(a, templates),
        Premise::Constraint(c) => format!("{} {} {}", expr(&c.lhs), c.op.as_str(), expr(&c.rhs)),
        Premise::Forall(f) => format!(
            "forall {} in {}. {}",
            f.var.name,
            primary(&f.collection),
            premise(&f.body, templates)
        ),
    }
}

fn atom(a: &Atom, templates: &HashMap<&str, Vec<TemplatePart>>) -> String {
    let mut out = a.relation.name.clone();
    let slots = templates.get(a.relation.name.as_str());
    match slots {
        Some(parts) if parts.iter().filter(|p| **p == TemplatePart::Slot).count() == a.args.len() => {
            let mut args = a.args.iter();
            let mut after_sep = false;
            for part in parts {
                out.push(' ');
                match part {
                    TemplatePart::Slot => {
                        let e = args.next().expect("slot count checked");
                        out.push_str(&if after_sep { expr(e) } else { primary(e) });
                        after_sep = false;
                    }
                    TemplatePart::Sep(s) => {
                        out.push_str(s.as_str());
                        after_sep = true;
                    }
                }
            }
        }
        _ => {
            for e in &a.args {
                out.push(' ');
                out.push_str(&primary(e));
            }
        }
    }
    out
}

fn primary(e: &Expr) -> String {
    match e {
        Expr::Add(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Var(i) => i.name.clone(),
        Expr::Wildcard(_) => "_".into(),
        Expr::Num(n, _) => n.to_string(),
        Expr::Inf(_) => "inf".into(),
        Expr::Bool(b, _) => b.to_string(),
        Expr::Str(s, _) => {
            let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
            format!("\"{escaped}\"")
        }
        Expr::Add(l, r) => format!("{} + {}", expr(l), primary(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    #[test]
    fn empty_program_formats_to_empty_text() {
        assert_eq!(format_program(&Program::default()), "");
    }

    #[test]
    fn round_trip_keeps_structure() {
        let src = "type Vertex\nlattice Dist = MinDist\nrelation edge _ _ = _: Vertex, Vertex, Dist\n\
                   relation distTo _ <= _: Vertex, Dist\nrelation startVertex: Vertex\n\
                   rule init: startVertex v --> distTo v <= 0\n\
                   rule addDist: distTo v1 <= d1, edge v1 v2 = d2, d1 + d2 <= d --> distTo v2 <= d\n\
                   order addDist by asc d1\nquery all: distTo _ <= _\n";
        let p = parse_program(src).unwrap();
        let text = format_program(&p);
        assert_eq!(parse_program(&text).unwrap(), p);
        assert_eq!(text, src);
    }

    #[test]
    fn nested_additions_keep_grouping() {
        let src = "relation r _ <= _: V, D\nrule: r x <= a, r y <= b, r z <= c --> r x <= a + (b + c)\n";
        let p = parse_program(src).unwrap();
        assert_eq!(parse_program(&format_program(&p)).unwrap(), p);
    }
}
