//! Line-oriented domain file format.
//!
//! ```text
//! types: software item
//! objects:
//!   gedit firefox - software
//!   file - item
//! predicates:
//!   sudo-on
//!   installed ?s - software
//! init:
//!   installed firefox
//! action: AptGet
//! params: ?s - software
//! pre: sudo-on, !installed ?s
//! eff: installed ?s
//! doc:
//!   free text, terminated by a blank line
//!
//! footprint_ok: Setting up {?s} ...
//! footprint_err sudo-on: Permission denied
//! footprint_err: generic failure
//! ```
//!
//! `#` starts a comment line. Footprint values use `\n` for line breaks and
//! `{?param}` for parameter substitution.

use std::collections::HashSet;

use super::{ActionSchema, Domain, DomainError, Literal, Predicate, PredicateSchema, Term};

#[derive(Default)]
struct RawAction {
    name: String,
    line: usize,
    params: Vec<(String, String)>,
    pre: Vec<(Literal, usize)>,
    eff: Vec<(Literal, usize)>,
    doc: Vec<String>,
    ok: Option<String>,
    err: Option<String>,
    err_by_literal: Vec<(Literal, String, usize)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Top,
    Types,
    Objects,
    Predicates,
    Init,
    Action,
    Doc,
}

fn syntax(line: usize, message: impl Into<String>) -> DomainError {
    DomainError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_domain(text: &str) -> Result<Domain, DomainError> {
    let mut types: Vec<(String, usize)> = Vec::new();
    let mut objects: Vec<(String, String, usize)> = Vec::new();
    let mut predicates: Vec<(PredicateSchema, usize)> = Vec::new();
    let mut init: Vec<(Predicate, usize)> = Vec::new();
    let mut actions: Vec<RawAction> = Vec::new();
    let mut section = Section::Top;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            if section == Section::Doc {
                section = Section::Action;
            }
            continue;
        }
        if section == Section::Doc {
            actions.last_mut().expect("doc inside action").doc.push(trimmed.to_string());
            continue;
        }

        let (key, rest) = match trimmed.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => ("", trimmed),
        };
        let header = match key {
            "types" => Some(Section::Types),
            "objects" => Some(Section::Objects),
            "predicates" => Some(Section::Predicates),
            "init" => Some(Section::Init),
            _ => None,
        };
        if let Some(next) = header {
            section = next;
            if !rest.is_empty() {
                parse_section_line(section, rest, line_no, &mut types, &mut objects, &mut predicates, &mut init)?;
            }
            continue;
        }
        if key == "action" {
            if rest.is_empty() || rest.contains(char::is_whitespace) {
                return Err(syntax(line_no, "action needs a single name"));
            }
            actions.push(RawAction {
                name: rest.to_string(),
                line: line_no,
                ..RawAction::default()
            });
            section = Section::Action;
            continue;
        }

        if section == Section::Action {
            let action = actions.last_mut().expect("inside action");
            match key {
                "params" => action.params = parse_params(rest, line_no)?,
                "pre" => action.pre = parse_literals(rest, line_no)?.into_iter().map(|l| (l, line_no)).collect(),
                "eff" => action.eff = parse_literals(rest, line_no)?.into_iter().map(|l| (l, line_no)).collect(),
                "doc" => {
                    if !rest.is_empty() {
                        action.doc.push(rest.to_string());
                    }
                    section = Section::Doc;
                }
                "footprint_ok" => action.ok = Some(unescape(rest)),
                "footprint_err" => action.err = Some(unescape(rest)),
                k if k.starts_with("footprint_err ") => {
                    let lit = parse_literal(&k["footprint_err ".len()..], line_no)?;
                    action.err_by_literal.push((lit, unescape(rest), line_no));
                }
                _ => return Err(syntax(line_no, format!("unexpected line in action block: `{trimmed}`"))),
            }
            continue;
        }

        if section == Section::Top {
            return Err(syntax(line_no, format!("expected a section header, found `{trimmed}`")));
        }
        parse_section_line(section, trimmed, line_no, &mut types, &mut objects, &mut predicates, &mut init)?;
    }

    validate(types, objects, predicates, init, actions)
}

fn parse_section_line(
    section: Section,
    text: &str,
    line: usize,
    types: &mut Vec<(String, usize)>,
    objects: &mut Vec<(String, String, usize)>,
    predicates: &mut Vec<(PredicateSchema, usize)>,
    init: &mut Vec<(Predicate, usize)>,
) -> Result<(), DomainError> {
    match section {
        Section::Types => {
            for t in text.split_whitespace() {
                check_ident(t, line)?;
                types.push((t.to_string(), line));
            }
        }
        Section::Objects => {
            let (names, ty) = text
                .split_once(" - ")
                .ok_or_else(|| syntax(line, "objects are written `name ... - type`"))?;
            let ty = ty.trim();
            check_ident(ty, line)?;
            for name in names.split_whitespace() {
                check_ident(name, line)?;
                objects.push((name.to_string(), ty.to_string(), line));
            }
        }
        Section::Predicates => {
            let mut words = text.splitn(2, char::is_whitespace);
            let name = words.next().unwrap_or_default();
            check_ident(name, line)?;
            let params = match words.next() {
                Some(rest) => parse_typed_list(rest, line)?,
                None => Vec::new(),
            };
            predicates.push((
                PredicateSchema {
                    name: name.to_string(),
                    params,
                },
                line,
            ));
        }
        Section::Init => {
            let p = Predicate::parse(text).ok_or_else(|| syntax(line, "empty init entry"))?;
            init.push((p, line));
        }
        _ => unreachable!("not a declaration section"),
    }
    Ok(())
}

fn check_ident(word: &str, line: usize) -> Result<(), DomainError> {
    let ok = !word.is_empty()
        && !word.starts_with('?')
        && !word.starts_with('!')
        && word.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(syntax(line, format!("invalid identifier `{word}`")))
    }
}

/// `?x - t ?y - t` (predicate signatures).
fn parse_typed_list(text: &str, line: usize) -> Result<Vec<(String, String)>, DomainError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    if !words.len().is_multiple_of(3) {
        return Err(syntax(line, "parameters are written `?name - type`"));
    }
    words
        .chunks(3)
        .map(|c| match c {
            [p, "-", t] if p.starts_with('?') => {
                check_ident(&p[1..], line)?;
                check_ident(t, line)?;
                Ok((p[1..].to_string(), t.to_string()))
            }
            _ => Err(syntax(line, "parameters are written `?name - type`")),
        })
        .collect()
}

/// `?x - t, ?y - t` (action parameters).
fn parse_params(text: &str, line: usize) -> Result<Vec<(String, String)>, DomainError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        out.extend(parse_typed_list(part, line)?);
    }
    Ok(out)
}

fn parse_literals(text: &str, line: usize) -> Result<Vec<Literal>, DomainError> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_literal(p, line))
        .collect()
}

fn parse_literal(text: &str, line: usize) -> Result<Literal, DomainError> {
    let text = text.trim();
    let (positive, body) = match text.strip_prefix('!') {
        Some(rest) => (false, rest.trim_start()),
        None => (true, text),
    };
    let mut words = body.split_whitespace();
    let predicate = words.next().ok_or_else(|| syntax(line, "empty literal"))?;
    check_ident(predicate, line)?;
    let args = words
        .map(|w| match w.strip_prefix('?') {
            Some(p) => check_ident(p, line).map(|_| Term::Param(p.to_string())),
            None => check_ident(w, line).map(|_| Term::Object(w.to_string())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Literal {
        positive,
        predicate: predicate.to_string(),
        args,
    })
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('\n', "\\n")
}

fn validate(
    types: Vec<(String, usize)>,
    objects: Vec<(String, String, usize)>,
    predicates: Vec<(PredicateSchema, usize)>,
    init: Vec<(Predicate, usize)>,
    actions: Vec<RawAction>,
) -> Result<Domain, DomainError> {
    let mut seen = HashSet::new();
    for (t, line) in &types {
        if !seen.insert(t.as_str()) {
            return Err(DomainError::Duplicate { line: *line, kind: "type", name: t.clone() });
        }
    }
    let type_declared = |t: &str, line: usize| {
        if types.iter().any(|(x, _)| x == t) {
            Ok(())
        } else {
            Err(DomainError::Undeclared { line, kind: "type", name: t.to_string() })
        }
    };

    let mut seen = HashSet::new();
    for (o, t, line) in &objects {
        type_declared(t, *line)?;
        if !seen.insert(o.as_str()) {
            return Err(DomainError::Duplicate { line: *line, kind: "object", name: o.clone() });
        }
    }
    let object_type = |o: &str| objects.iter().find(|(x, _, _)| x == o).map(|(_, t, _)| t.as_str());

    let mut seen = HashSet::new();
    for (p, line) in &predicates {
        if !seen.insert(p.name.as_str()) {
            return Err(DomainError::Duplicate { line: *line, kind: "predicate", name: p.name.clone() });
        }
        let mut params = HashSet::new();
        for (n, t) in &p.params {
            type_declared(t, *line)?;
            if !params.insert(n.as_str()) {
                return Err(DomainError::Duplicate { line: *line, kind: "parameter", name: n.clone() });
            }
        }
    }
    let signature = |name: &str, line: usize| {
        predicates
            .iter()
            .find(|(p, _)| p.name == name)
            .map(|(p, _)| p)
            .ok_or_else(|| DomainError::Undeclared { line, kind: "predicate", name: name.to_string() })
    };

    for (p, line) in &init {
        let sig = signature(&p.name, *line)?;
        if sig.params.len() != p.args.len() {
            return Err(DomainError::Invalid {
                line: *line,
                message: format!("`{}` takes {} arguments", p.name, sig.params.len()),
            });
        }
        for (arg, (_, ty)) in p.args.iter().zip(&sig.params) {
            match object_type(arg) {
                None => return Err(DomainError::Undeclared { line: *line, kind: "object", name: arg.clone() }),
                Some(t) if t != ty => {
                    return Err(DomainError::Invalid {
                        line: *line,
                        message: format!("object `{arg}` is a {t}, `{}` expects {ty}", p.name),
                    })
                }
                _ => {}
            }
        }
    }

    let mut schemas = Vec::with_capacity(actions.len());
    let mut seen = HashSet::new();
    for a in actions {
        if !seen.insert(a.name.clone()) {
            return Err(DomainError::Duplicate { line: a.line, kind: "action", name: a.name });
        }
        let mut names = HashSet::new();
        for (n, t) in &a.params {
            type_declared(t, a.line)?;
            if !names.insert(n.as_str()) {
                return Err(DomainError::Duplicate { line: a.line, kind: "parameter", name: n.clone() });
            }
        }
        let check_literal = |lit: &Literal, line: usize| -> Result<(), DomainError> {
            let sig = signature(&lit.predicate, line)?;
            if sig.params.len() != lit.args.len() {
                return Err(DomainError::Invalid {
                    line,
                    message: format!("`{}` takes {} arguments", lit.predicate, sig.params.len()),
                });
            }
            for (term, (_, ty)) in lit.args.iter().zip(&sig.params) {
                let actual = match term {
                    Term::Param(p) => a
                        .params
                        .iter()
                        .find(|(n, _)| n == p)
                        .map(|(_, t)| t.as_str())
                        .ok_or_else(|| DomainError::Undeclared { line, kind: "parameter", name: format!("?{p}") })?,
                    Term::Object(o) => {
                        object_type(o).ok_or_else(|| DomainError::Undeclared { line, kind: "object", name: o.clone() })?
                    }
                };
                if actual != ty {
                    return Err(DomainError::Invalid {
                        line,
                        message: format!("`{term}` is a {actual}, `{}` expects {ty}", lit.predicate),
                    });
                }
            }
            Ok(())
        };
        for (which, list) in [("preconditions", &a.pre), ("effects", &a.eff)] {
            for (lit, line) in list.iter() {
                check_literal(lit, *line)?;
                let clash = list
                    .iter()
                    .any(|(o, _)| o.positive != lit.positive && o.predicate == lit.predicate && o.args == lit.args);
                if clash {
                    return Err(DomainError::Invalid {
                        line: *line,
                        message: format!("`{}` appears with both signs in the {which} of {}", lit.predicate, a.name),
                    });
                }
            }
        }
        for (lit, _, line) in &a.err_by_literal {
            if !a.pre.iter().any(|(p, _)| p == lit) {
                return Err(DomainError::Invalid {
                    line: *line,
                    message: format!("footprint_err key `{lit}` is not a precondition of {}", a.name),
                });
            }
        }
        if a.doc.is_empty() {
            return Err(DomainError::Invalid { line: a.line, message: format!("action {} has no doc", a.name) });
        }
        let ok = a.ok.ok_or_else(|| DomainError::Invalid {
            line: a.line,
            message: format!("action {} has no footprint_ok", a.name),
        })?;
        let err = a.err.ok_or_else(|| DomainError::Invalid {
            line: a.line,
            message: format!("action {} has no footprint_err", a.name),
        })?;
        schemas.push(ActionSchema {
            name: a.name,
            params: a.params,
            preconditions: a.pre.into_iter().map(|(l, _)| l).collect(),
            effects: a.eff.into_iter().map(|(l, _)| l).collect(),
            doc: a.doc.join("\n"),
            footprint_success: ok,
            footprint_failure: err,
            failure_footprints: a.err_by_literal.into_iter().map(|(l, t, _)| (l, t)).collect(),
        });
    }

    Ok(Domain {
        types: types.into_iter().map(|(t, _)| t).collect(),
        objects: objects.into_iter().map(|(o, t, _)| (o, t)).collect(),
        predicates: predicates.into_iter().map(|(p, _)| p).collect(),
        init: init.into_iter().map(|(p, _)| p).collect(),
        schemas,
    })
}

/// Writes a domain back in the canonical layout accepted by [`parse_domain`].
pub fn serialize_domain(domain: &Domain) -> String {
    let mut out = String::new();
    out.push_str(&format!("types: {}\n\nobjects:\n", domain.types.join(" ")));
    let mut i = 0;
    while i < domain.objects.len() {
        let ty = &domain.objects[i].1;
        let group: Vec<&str> = domain.objects[i..]
            .iter()
            .take_while(|(_, t)| t == ty)
            .map(|(o, _)| o.as_str())
            .collect();
        out.push_str(&format!("  {} - {ty}\n", group.join(" ")));
        i += group.len();
    }
    out.push_str("\npredicates:\n");
    for p in &domain.predicates {
        out.push_str("  ");
        out.push_str(&p.name);
        for (n, t) in &p.params {
            out.push_str(&format!(" ?{n} - {t}"));
        }
        out.push('\n');
    }
    if !domain.init.is_empty() {
        out.push_str("\ninit:\n");
        for p in &domain.init {
            out.push_str(&format!("  {p}\n"));
        }
    }
    let join = |lits: &[Literal]| lits.iter().map(Literal::to_string).collect::<Vec<_>>().join(", ");
    for s in &domain.schemas {
        out.push_str(&format!("\naction: {}\n", s.name));
        let params: Vec<String> = s.params.iter().map(|(n, t)| format!("?{n} - {t}")).collect();
        out.push_str(&format!("params: {}\n", params.join(", ")).replace(": \n", ":\n"));
        out.push_str(&format!("pre: {}\n", join(&s.preconditions)).replace(": \n", ":\n"));
        out.push_str(&format!("eff: {}\n", join(&s.effects)).replace(": \n", ":\n"));
        out.push_str("doc:\n");
        for l in s.doc.lines() {
            out.push_str(&format!("  {l}\n"));
        }
        out.push('\n');
        out.push_str(&format!("footprint_ok: {}\n", escape(&s.footprint_success)));
        for (lit, text) in &s.failure_footprints {
            out.push_str(&format!("footprint_err {lit}: {}\n", escape(text)));
        }
        out.push_str(&format!("footprint_err: {}\n", escape(&s.footprint_failure)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ground, BUNDLED_DOMAIN};

    const MINIMAL: &str = "types: t\nobjects:\n  a - t\npredicates:\n  p\n";

    #[test]
    fn minimal_domain_without_actions() {
        let d = parse_domain(MINIMAL).unwrap();
        let (atoms, actions) = ground(&d);
        assert_eq!(atoms.len(), 1);
        assert!(actions.is_empty());
    }

    #[test]
    fn bundled_domain_round_trips() {
        let d = parse_domain(BUNDLED_DOMAIN).unwrap();
        assert_eq!(d.schemas.len(), 12);
        let again = parse_domain(&serialize_domain(&d)).unwrap();
        assert_eq!(again, d);
        assert_eq!(serialize_domain(&again), serialize_domain(&d));
    }

    #[test]
    fn effect_on_undeclared_predicate_is_named() {
        let text = format!("{MINIMAL}\naction: A\nparams:\npre:\neff: q\ndoc:\n  x\n\nfootprint_ok: ok\nfootprint_err: no\n");
        match parse_domain(&text) {
            Err(DomainError::Undeclared { kind: "predicate", name, line }) => {
                assert_eq!(name, "q");
                assert_eq!(line, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_syntax_errors_carry_lines() {
        let dup = "types: t t\n";
        assert!(matches!(parse_domain(dup), Err(DomainError::Duplicate { kind: "type", line: 1, .. })));
        let bad = "types: t\nobjects:\n  a t\n";
        assert!(matches!(parse_domain(bad), Err(DomainError::Syntax { line: 3, .. })));
        let stray = "hello\n";
        assert!(matches!(parse_domain(stray), Err(DomainError::Syntax { line: 1, .. })));
        let undeclared_obj = "types: t\nobjects:\n  a - u\n";
        assert!(matches!(parse_domain(undeclared_obj), Err(DomainError::Undeclared { kind: "type", .. })));
    }

    #[test]
    fn conflicting_literals_and_free_params_rejected() {
        let clash = format!("{MINIMAL}\naction: A\nparams:\npre: p, !p\neff:\ndoc:\n  x\n\nfootprint_ok: ok\nfootprint_err: no\n");
        assert!(matches!(parse_domain(&clash), Err(DomainError::Invalid { .. })));
        let text = "types: t\nobjects:\n  a - t\npredicates:\n  p ?x - t\n\naction: A\nparams:\npre:\neff: p ?y\ndoc:\n  x\n\nfootprint_ok: ok\nfootprint_err: no\n";
        assert!(matches!(
            parse_domain(text),
            Err(DomainError::Undeclared { kind: "parameter", .. })
        ));
    }

    #[test]
    fn missing_doc_rejected() {
        let text = format!("{MINIMAL}\naction: A\nparams:\npre:\neff: p\nfootprint_ok: ok\nfootprint_err: no\n");
        assert!(matches!(parse_domain(&text), Err(DomainError::Invalid { .. })));
    }

    #[test]
    fn escapes_survive() {
        assert_eq!(unescape(&escape("a\\nb\nc")), "a\\nb\nc");
    }
}
