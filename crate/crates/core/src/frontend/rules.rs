//! The rule-based textual language.
//!
//! ```text
//! Step        p1, p2 (P=5), p3, p4
//! Transition  t1, t2, t3, t4
//! Input       m, b, p, a
//! Output      R, Z, L
//! Marking     p1
//! Transitions:
//! t1: p1 * m |- @p2
//! Steps:
//! p2: |- R
//! ```
//!
//! A transition rule's left side is a product; factors naming steps form the
//! pre-set and the remaining factors the receptivity. Step rules list the
//! asserted outputs, with `/` separating tasks.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::lex::{lex_line, Tok, Token};
use super::Diagnostic;
use crate::ir::{validate_structure, Expr, GrafcetNet, Step, Transition, Violation};

const SECTIONS: [&str; 6] = ["Step", "Macrostep", "Transition", "Input", "Output", "Marking"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Header,
    TransitionRules,
    StepRules,
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, line_len: usize) -> Self {
        Cursor { toks, pos: 0, line, end_col: line_len + 1 }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or((self.line, self.end_col), |t| (t.line, t.col))
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        let (l, c) = self.here();
        Diagnostic::error(l, c, msg)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), Diagnostic> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), Diagnostic> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s.clone(), *line, *col))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => self.err(format!("expected {wanted}, found {}", t.describe())),
            None => self.err(format!("expected {wanted} before end of line")),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), Diagnostic> {
        if self.done() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }
}

#[derive(Default)]
struct Decls {
    steps: Vec<Step>,
    transitions: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    marking: Option<Vec<String>>,
    macrosteps: BTreeMap<String, String>,
    /// First position each identifier was written at.
    positions: BTreeMap<String, (usize, usize)>,
}

impl Decls {
    fn note(&mut self, name: &str, line: usize, col: usize) {
        self.positions.entry(name.to_string()).or_insert((line, col));
    }

    fn is_step(&self, n: &str) -> bool {
        self.steps.iter().any(|s| s.id == n)
    }
}

/// Parses rules text into a net named `name`. Any syntax or structural
/// problem is reported with its position; a successful result always passes
/// [`validate_structure`].
pub fn parse_rules(name: &str, text: &str) -> Result<GrafcetNet, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut lines: Vec<(usize, usize, Vec<Token>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        match lex_line(raw, i + 1) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => lines.push((i + 1, raw.chars().count(), toks)),
            Err(d) => diags.push(d),
        }
    }

    let mut decls = Decls::default();
    let mut seen_sections: BTreeSet<&str> = BTreeSet::new();
    let mut rule_lines = Vec::new();
    let mut mode = Mode::Header;
    for (line, len, toks) in &lines {
        let mut cur = Cursor::new(toks, *line, *len);
        let first = match cur.peek() {
            Some(Tok::Ident(s)) => s.as_str(),
            _ => {
                diags.push(cur.unexpected("section keyword or rule label"));
                continue;
            }
        };
        let second = toks.get(1).map(|t| &t.tok);
        if (first == "Transitions" || first == "Steps") && second == Some(&Tok::Colon) && toks.len() == 2 {
            let key = if first == "Steps" { "Steps:" } else { "Transitions:" };
            if !seen_sections.insert(key) {
                diags.push(cur.err(format!("duplicate section {key}")));
            }
            mode = if first == "Steps" { Mode::StepRules } else { Mode::TransitionRules };
            continue;
        }
        if let Some(&kw) = SECTIONS.iter().find(|k| **k == first) {
            if second != Some(&Tok::Colon) {
                if kw != "Macrostep" && !seen_sections.insert(kw) {
                    diags.push(cur.err(format!("duplicate section {kw}")));
                    continue;
                }
                cur.bump();
                if let Err(d) = parse_declaration(kw, &mut cur, &mut decls) {
                    diags.push(d);
                }
                continue;
            }
        }
        if mode == Mode::Header {
            diags.push(cur.err("rule outside a Transitions: or Steps: section"));
            continue;
        }
        rule_lines.push((mode, *line, *len, toks));
    }

    for i in &decls.inputs {
        if decls.is_step(i) {
            let (l, c) = decls.positions[i];
            diags.push(Diagnostic::error(l, c, format!("{i} is declared both as step and as input")));
        }
    }

    let mut rules: BTreeMap<String, Transition> = BTreeMap::new();
    let mut step_rules: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for (mode, line, len, toks) in rule_lines {
        let mut cur = Cursor::new(toks, line, len);
        let res = match mode {
            Mode::TransitionRules => parse_transition_rule(&mut cur, &decls).and_then(|t| {
                if rules.contains_key(&t.id) {
                    Err(Diagnostic::error(line, 1, format!("duplicate rule for transition {}", t.id)))
                } else {
                    rules.insert(t.id.clone(), t);
                    Ok(())
                }
            }),
            _ => parse_step_rule(&mut cur, &decls).and_then(|(id, tasks)| match step_rules.entry(id) {
                Entry::Occupied(e) => Err(Diagnostic::error(line, 1, format!("duplicate rule for step {}", e.key()))),
                Entry::Vacant(e) => {
                    e.insert(tasks);
                    Ok(())
                }
            }),
        };
        if let Err(d) = res {
            diags.push(d);
        }
    }

    if decls.marking.is_none() {
        let line = lines.last().map_or(1, |l| l.0);
        diags.push(Diagnostic::error(line, 1, "missing Marking section"));
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| (d.line, d.column));
        return Err(diags);
    }

    let mut net = GrafcetNet::new(name);
    net.transitions = decls
        .transitions
        .iter()
        .map(|t| {
            rules.remove(t).unwrap_or_else(|| Transition {
                id: t.clone(),
                pre: Vec::new(),
                post: Vec::new(),
                receptivity: Expr::Const(true),
            })
        })
        .collect();
    net.steps = decls.steps.clone();
    for s in &mut net.steps {
        if let Some(tasks) = step_rules.remove(&s.id) {
            s.tasks = tasks;
        }
    }
    net.inputs = decls.inputs.clone();
    net.outputs = decls.outputs.clone();
    net.initial = decls.marking.clone().unwrap_or_default();
    net.macrosteps = decls.macrosteps.clone();

    let violations = validate_structure(&net);
    if violations.is_empty() {
        Ok(net)
    } else {
        Err(violations.iter().map(|v| locate(v, &decls)).collect())
    }
}

fn locate(v: &Violation, decls: &Decls) -> Diagnostic {
    let (line, col) = decls
        .positions
        .get(&v.subject)
        .or_else(|| v.context.as_ref().and_then(|c| decls.positions.get(c)))
        .copied()
        .unwrap_or((1, 1));
    Diagnostic::error(line, col, v.to_string())
}

fn parse_declaration(kw: &str, cur: &mut Cursor, decls: &mut Decls) -> Result<(), Diagnostic> {
    if kw == "Macrostep" {
        loop {
            let (m, l, c) = cur.ident()?;
            decls.note(&m, l, c);
            cur.expect(&Tok::Arrow)?;
            let link = match cur.bump() {
                Some(Token { tok: Tok::Str(s), .. }) => s.clone(),
                _ => {
                    cur.pos -= 1;
                    return Err(cur.unexpected("quoted sub-net file name"));
                }
            };
            if decls.macrosteps.insert(m.clone(), link).is_some() {
                return Err(Diagnostic::error(l, c, format!("macrostep {m} linked twice")));
            }
            if !cur.eat(&Tok::Comma) {
                return cur.expect_end();
            }
        }
    }

    let mut names = Vec::new();
    if !cur.done() {
        loop {
            let (n, l, c) = cur.ident()?;
            decls.note(&n, l, c);
            if kw == "Step" {
                let mut step = Step::new(n.clone());
                if cur.eat(&Tok::LParen) {
                    parse_step_attributes(cur, &mut step)?;
                }
                decls.steps.push(step);
            }
            names.push(n);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.expect_end()?;
    }
    match kw {
        "Step" => {}
        "Transition" => decls.transitions = names,
        "Input" => decls.inputs = names,
        "Output" => decls.outputs = names,
        "Marking" => decls.marking = Some(names),
        _ => unreachable!(),
    }
    Ok(())
}

fn parse_step_attributes(cur: &mut Cursor, step: &mut Step) -> Result<(), Diagnostic> {
    loop {
        let (attr, l, c) = cur.ident()?;
        match attr.as_str() {
            "in" => step.entry = true,
            "out" => step.exit = true,
            "P" => {
                cur.expect(&Tok::Eq)?;
                let value = match cur.bump() {
                    Some(Token { tok: Tok::Num(n), .. }) => n.parse::<u32>().ok(),
                    _ => None,
                };
                step.priority = value.ok_or_else(|| {
                    cur.pos -= 1;
                    cur.unexpected("priority value")
                })?;
            }
            other => {
                return Err(Diagnostic::error(l, c, format!("unknown step attribute {other}")));
            }
        }
        if cur.eat(&Tok::RParen) {
            return Ok(());
        }
        cur.expect(&Tok::Comma)?;
    }
}

fn parse_transition_rule(cur: &mut Cursor, decls: &Decls) -> Result<Transition, Diagnostic> {
    let (id, l, c) = cur.ident()?;
    if !decls.transitions.contains(&id) {
        return Err(Diagnostic::error(l, c, format!("undeclared transition {id}")));
    }
    cur.expect(&Tok::Colon)?;
    if cur.peek() == Some(&Tok::Yield) {
        return Err(cur.err("transition needs at least one pre-step"));
    }
    let left_start = cur.here();
    let left = parse_or(cur, decls)?;
    cur.expect(&Tok::Yield)?;

    let factors = match left {
        Expr::And(fs) => fs,
        other => alloc::vec![other],
    };
    let mut pre = Vec::new();
    let mut guard = Vec::new();
    for f in factors {
        match f {
            Expr::Var(v) if decls.is_step(&v) => pre.push(v),
            other => {
                let mut bad = None;
                other.visit_vars(&mut |v| {
                    if bad.is_none() && decls.is_step(v) {
                        bad = Some(v.to_string());
                    }
                });
                if let Some(s) = bad {
                    return Err(Diagnostic::error(
                        left_start.0,
                        left_start.1,
                        format!("step {s} may only appear as a top-level factor"),
                    ));
                }
                guard.push(other);
            }
        }
    }
    if pre.is_empty() {
        return Err(Diagnostic::error(left_start.0, left_start.1, "transition needs at least one pre-step"));
    }

    let mut post = Vec::new();
    while cur.eat(&Tok::At) {
        let (s, l, c) = cur.ident()?;
        if !decls.is_step(&s) {
            return Err(Diagnostic::error(l, c, format!("undeclared identifier {s}")));
        }
        post.push(s);
    }
    if post.is_empty() {
        return Err(cur.err("transition needs at least one post-step"));
    }
    cur.expect_end()?;
    Ok(Transition { id, pre, post, receptivity: Expr::and(guard) })
}

fn parse_or(cur: &mut Cursor, decls: &Decls) -> Result<Expr, Diagnostic> {
    let mut terms = alloc::vec![parse_and(cur, decls)?];
    while cur.eat(&Tok::Plus) {
        terms.push(parse_and(cur, decls)?);
    }
    Ok(Expr::or(terms))
}

fn parse_and(cur: &mut Cursor, decls: &Decls) -> Result<Expr, Diagnostic> {
    let mut factors = alloc::vec![parse_unary(cur, decls)?];
    while cur.eat(&Tok::Star) {
        factors.push(parse_unary(cur, decls)?);
    }
    Ok(Expr::and(factors))
}

fn parse_unary(cur: &mut Cursor, decls: &Decls) -> Result<Expr, Diagnostic> {
    if cur.eat(&Tok::Bang) {
        return Ok(Expr::not(parse_unary(cur, decls)?));
    }
    let (line, col) = cur.here();
    match cur.bump().map(|t| &t.tok) {
        Some(Tok::LParen) => {
            let e = parse_or(cur, decls)?;
            cur.expect(&Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::Num(n)) if n == "0" || n == "1" => Ok(Expr::Const(n == "1")),
        Some(Tok::Num(n)) => Err(Diagnostic::error(line, col, format!("invalid constant {n}"))),
        Some(Tok::Ident(v)) => {
            if decls.is_step(v) || decls.inputs.contains(v) {
                Ok(Expr::var(v.clone()))
            } else {
                Err(Diagnostic::error(line, col, format!("undeclared identifier {v}")))
            }
        }
        _ => {
            cur.pos -= 1;
            Err(cur.unexpected("operand"))
        }
    }
}

fn parse_step_rule(cur: &mut Cursor, decls: &Decls) -> Result<(String, Vec<Vec<String>>), Diagnostic> {
    let (id, l, c) = cur.ident()?;
    if !decls.is_step(&id) {
        return Err(Diagnostic::error(l, c, format!("undeclared step {id}")));
    }
    cur.expect(&Tok::Colon)?;
    cur.expect(&Tok::Yield)?;
    let mut tasks: Vec<Vec<String>> = Vec::new();
    let mut current = Vec::new();
    while !cur.done() {
        if cur.eat(&Tok::Slash) {
            if current.is_empty() {
                return Err(cur.err("empty task"));
            }
            tasks.push(core::mem::take(&mut current));
            continue;
        }
        let (o, l, c) = cur.ident()?;
        if !decls.outputs.contains(&o) {
            return Err(Diagnostic::error(l, c, format!("undeclared output {o}")));
        }
        current.push(o);
    }
    if !current.is_empty() {
        tasks.push(current);
    } else if !tasks.is_empty() {
        return Err(cur.err("empty task"));
    }
    Ok((id, tasks))
}

fn list(out: &mut String, kw: &str, items: impl Iterator<Item = String>) {
    out.push_str(kw);
    for (i, it) in items.enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        out.push_str(&it);
    }
    out.push('\n');
}

/// Canonical text of a net. Same net, same bytes.
pub fn serialize_rules(net: &GrafcetNet) -> Result<String, Vec<Violation>> {
    let violations = validate_structure(net);
    if !violations.is_empty() {
        return Err(violations);
    }
    let mut out = String::new();
    list(
        &mut out,
        "Step",
        net.steps.iter().map(|s| {
            let mut attrs = Vec::new();
            if s.entry {
                attrs.push("in".to_string());
            }
            if s.exit {
                attrs.push("out".to_string());
            }
            if s.priority != 0 {
                attrs.push(format!("P={}", s.priority));
            }
            if attrs.is_empty() {
                s.id.clone()
            } else {
                format!("{} ({})", s.id, attrs.join(", "))
            }
        }),
    );
    for s in &net.steps {
        if let Some(link) = net.macrosteps.get(&s.id) {
            let _ = writeln!(out, "Macrostep {} -> \"{}\"", s.id, link);
        }
    }
    list(&mut out, "Transition", net.transitions.iter().map(|t| t.id.clone()));
    list(&mut out, "Input", net.inputs.iter().cloned());
    list(&mut out, "Output", net.outputs.iter().cloned());
    list(&mut out, "Marking", net.initial.iter().cloned());
    out.push_str("Transitions:\n");
    for t in &net.transitions {
        let _ = write!(out, "{}: {} |-", t.id, transition_left_side(t));
        for p in &t.post {
            out.push_str(" @");
            out.push_str(p);
        }
        out.push('\n');
    }
    out.push_str("Steps:\n");
    for s in net.steps.iter().filter(|s| !s.tasks.is_empty()) {
        let tasks: Vec<String> = s.tasks.iter().map(|t| t.join(" ")).collect();
        let _ = writeln!(out, "{}: |- {}", s.id, tasks.join(" / "));
    }
    Ok(out)
}

/// `p1 * m`: pre-steps followed by the receptivity factors.
pub fn transition_left_side(t: &Transition) -> String {
    let mut factors: Vec<String> = t.pre.clone();
    match &t.receptivity {
        Expr::Const(true) => {}
        Expr::And(fs) => factors.extend(fs.iter().map(factor_text)),
        other => factors.push(factor_text(other)),
    }
    factors.join(" * ")
}

fn factor_text(e: &Expr) -> String {
    match e {
        Expr::Or(_) | Expr::And(_) => format!("({e})"),
        _ => e.to_string(),
    }
}

/// Parses a standalone receptivity over the given inputs.
pub fn parse_receptivity(text: &str, inputs: &[String]) -> Result<Expr, Diagnostic> {
    let toks = lex_line(text, 1)?;
    let decls = Decls { inputs: inputs.to_vec(), ..Decls::default() };
    let mut cur = Cursor::new(&toks, 1, text.chars().count());
    let e = parse_or(&mut cur, &decls)?;
    cur.expect_end()?;
    Ok(e)
}
