//! Recursive-descent parser for types, processes and `.proc` programs.
//!
//! Items of a program:
//!
//! ```text
//! type Name<a,b> = etype;     // parameterized type abbreviation
//! proc NAME = process;        // process equation, may be (mutually) recursive
//! env x : lin etype;          // initial linear/unrestricted environment entry
//! tyvars a, b;                // initial type-variable context
//! main process;
//! ```
//!
//! A file with no items is read as a bare process.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, ParseError, Spanned, Tok};
use crate::algebra::dual;
use crate::syntax::{Branch, EndpointType, Name, Polarity, Process, Qualifier, RecvBranch, Type};
use crate::{Symbol, Tag, TyVar};

const RESERVED: &[&str] = &["end", "rec", "lin", "un", "open", "close", "dual", "type", "proc", "main", "env", "tyvars"];

#[derive(Clone, Debug)]
pub struct TypeDef {
    pub params: Vec<TyVar>,
    pub body: EndpointType,
}

/// A parsed program with definitions expanded and recursive equations folded.
#[derive(Clone, Debug, Default)]
pub struct SourceProgram {
    pub types: BTreeMap<String, TypeDef>,
    /// Process equations as written (references unresolved).
    pub procs: BTreeMap<String, Process>,
    pub env: Vec<(Name, Type)>,
    pub tyvars: Vec<TyVar>,
    pub main: Option<Process>,
}

impl SourceProgram {
    /// The folded term for a named equation.
    pub fn proc_term(&self, name: &str) -> Option<Process> {
        self.procs.contains_key(name).then(|| {
            let mut f = Folder { procs: &self.procs, stack: Vec::new() };
            resolve_vars(&f.expand(name), &BTreeSet::new())
        })
    }
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    types: &'a BTreeMap<String, TypeDef>,
    /// Type variables bound by enclosing binders; they shadow definitions.
    scope: Vec<TyVar>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, types: &'a BTreeMap<String, TypeDef>) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, types, scope: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let s = &self.toks[self.pos];
        Err(ParseError { line: s.line, col: s.col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s, 0) if s == kw)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<Symbol, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s, n) if !(n == 0 && RESERVED.contains(&s.as_str())) => {
                self.bump();
                Ok(Symbol::with_stamp(&s, n))
            }
            t => self.err(format!("expected identifier, found {t}")),
        }
    }

    fn tag(&mut self) -> Result<Tag, ParseError> {
        let s = self.ident()?;
        if s.stamp() != 0 {
            return self.err("tags carry no stamp");
        }
        Ok(Tag::new(s.name()))
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.peek()))
        }
    }

    fn comma_list<T>(&mut self, close: &str, mut f: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(f(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    // ---- types ----

    fn qualifier(&mut self) -> Qualifier {
        if self.is_kw("lin") {
            self.bump();
            Qualifier::Lin
        } else if self.is_kw("un") {
            self.bump();
            Qualifier::Un
        } else {
            Qualifier::Lin
        }
    }

    fn qtype(&mut self) -> Result<Type, ParseError> {
        let qual = self.qualifier();
        Ok(Type { qual, body: self.etype()? })
    }

    fn etype(&mut self) -> Result<EndpointType, ParseError> {
        if self.is_kw("end") {
            self.bump();
            return Ok(EndpointType::End);
        }
        if self.is_kw("rec") {
            self.bump();
            let a = self.ident()?;
            self.expect(".")?;
            self.scope.push(a.clone());
            let body = self.etype();
            self.scope.pop();
            let t = EndpointType::rec(a, body?);
            if let Err(e) = t.check_contractive() {
                return self.err(e.to_string());
            }
            return Ok(t);
        }
        if self.is_kw("dual") {
            self.bump();
            self.expect("(")?;
            let t = self.etype()?;
            self.expect(")")?;
            return match dual(&t) {
                Ok(d) => Ok(d),
                Err(e) => self.err(format!("cannot dualize: {e}")),
            };
        }
        if self.eat("(") {
            let t = self.etype()?;
            self.expect(")")?;
            return Ok(t);
        }
        let pol = if self.eat("!") {
            Polarity::Out
        } else if self.eat("?") {
            Polarity::In
        } else {
            return self.type_name();
        };
        let branches = if self.eat("{") { self.comma_list("}", |p| p.branch())? } else { vec![self.branch()?] };
        match EndpointType::choice(pol, branches) {
            Ok(t) => Ok(t),
            Err(e) => self.err(e.to_string()),
        }
    }

    fn type_name(&mut self) -> Result<EndpointType, ParseError> {
        let a = self.ident()?;
        if self.scope.contains(&a) || a.stamp() != 0 {
            return Ok(EndpointType::Var(a));
        }
        let Some(def) = self.types.get(a.name()) else {
            if self.is_punct("<") {
                return self.err(format!("unknown type definition `{a}`"));
            }
            return Ok(EndpointType::Var(a));
        };
        let args = if self.eat("<") { self.comma_list(">", |p| p.etype())? } else { Vec::new() };
        if args.len() != def.params.len() {
            return self.err(format!("`{a}` expects {} type argument(s), got {}", def.params.len(), args.len()));
        }
        let map: BTreeMap<_, _> = def.params.iter().cloned().zip(args).collect();
        Ok(def.body.subst_many(&map))
    }

    fn branch(&mut self) -> Result<Branch, ParseError> {
        let tag = self.tag()?;
        let params = if self.eat("<") { self.comma_list(">", |p| p.ident())? } else { Vec::new() };
        let depth = self.scope.len();
        self.scope.extend(params.iter().cloned());
        let res = (|| {
            let args = if self.eat("(") { self.comma_list(")", |p| p.qtype())? } else { Vec::new() };
            self.expect(".")?;
            let cont = self.etype()?;
            Ok(Branch { tag, params, args, cont })
        })();
        self.scope.truncate(depth);
        res
    }

    // ---- processes ----

    fn process(&mut self) -> Result<Process, ParseError> {
        let p = self.choice()?;
        if self.eat("|") {
            return Ok(Process::par(p, self.process()?));
        }
        Ok(p)
    }

    fn choice(&mut self) -> Result<Process, ParseError> {
        let p = self.prefix()?;
        if self.eat("(+)") {
            return Ok(Process::choice(p, self.choice()?));
        }
        Ok(p)
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        if self.eat("*") {
            return Ok(Name::Shared(self.ident()?));
        }
        Ok(Name::Ptr(self.ident()?))
    }

    fn prefix(&mut self) -> Result<Process, ParseError> {
        if let Tok::Num(n) = self.peek() {
            if *n == 0 {
                self.bump();
                return Ok(Process::Idle);
            }
            return self.err("only `0` is a process literal");
        }
        if self.eat("(") {
            let p = self.process()?;
            self.expect(")")?;
            return Ok(p);
        }
        if self.is_kw("close") {
            self.bump();
            self.expect("(")?;
            let n = self.name()?;
            self.expect(")")?;
            return Ok(Process::Close(n));
        }
        if self.is_kw("open") {
            self.bump();
            self.expect("(")?;
            let a = self.ident()?;
            self.expect(":")?;
            let ta = self.etype()?;
            if self.eat(",") {
                let b = self.ident()?;
                self.expect(":")?;
                let tb = self.etype()?;
                self.expect(")")?;
                self.expect(".")?;
                let body = self.prefix()?;
                return Ok(Process::OpenLinear { a, ta, b, tb, body: Box::new(body) });
            }
            self.expect(")")?;
            self.expect(".")?;
            let body = self.prefix()?;
            return Ok(Process::OpenShared { a, ty: ta, body: Box::new(body) });
        }
        if self.is_kw("rec") {
            self.bump();
            let x = self.ident()?;
            self.expect(".")?;
            return Ok(Process::rec(x, self.prefix()?));
        }
        let subject_follows = matches!(self.peek(), Tok::Punct("*"))
            || matches!(self.peek_at(1), Tok::Punct("!") | Tok::Punct("?"));
        if !subject_follows {
            return Ok(Process::Var(self.ident()?));
        }
        let subject = self.name()?;
        if self.eat("!") {
            let tag = self.tag()?;
            let tyargs = if self.eat("<") { self.comma_list(">", |p| p.etype())? } else { Vec::new() };
            let args = if self.eat("(") { self.comma_list(")", |p| p.name())? } else { Vec::new() };
            self.expect(".")?;
            let body = self.prefix()?;
            return Ok(Process::Send { subject, tag, tyargs, args, body: Box::new(body) });
        }
        self.expect("?")?;
        let branches = if self.eat("{") {
            self.comma_list("}", |p| p.recv_branch(true))?
        } else {
            vec![self.recv_branch(false)?]
        };
        match Process::receive(subject, branches) {
            Ok(p) => Ok(p),
            Err(e) => self.err(e.to_string()),
        }
    }

    fn recv_branch(&mut self, braced: bool) -> Result<RecvBranch, ParseError> {
        let tag = self.tag()?;
        let params = if self.eat("<") { self.comma_list(">", |p| p.ident())? } else { Vec::new() };
        let depth = self.scope.len();
        self.scope.extend(params.iter().cloned());
        let res = (|| {
            let vars = if self.eat("(") {
                self.comma_list(")", |p| {
                    let x = p.ident()?;
                    p.expect(":")?;
                    Ok((x, p.qtype()?))
                })?
            } else {
                Vec::new()
            };
            self.expect(".")?;
            let body = if braced { self.process()? } else { self.prefix()? };
            Ok(RecvBranch { tag, params, vars, body })
        })();
        self.scope.truncate(depth);
        res
    }

    // ---- programs ----

    fn item_start(&self) -> bool {
        ["type", "proc", "env", "tyvars", "main"].iter().any(|k| self.is_kw(k))
    }
}

/// Marks names bound by an enclosing receive as variables.
fn resolve_vars(p: &Process, bound: &BTreeSet<Symbol>) -> Process {
    let fix = |n: &Name| match n {
        Name::Ptr(x) if bound.contains(x) => Name::Var(x.clone()),
        other => other.clone(),
    };
    match p {
        Process::Idle | Process::Var(_) => p.clone(),
        Process::Close(n) => Process::Close(fix(n)),
        Process::OpenLinear { a, ta, b, tb, body } => {
            let mut inner = bound.clone();
            inner.remove(a);
            inner.remove(b);
            Process::OpenLinear { a: a.clone(), ta: ta.clone(), b: b.clone(), tb: tb.clone(), body: Box::new(resolve_vars(body, &inner)) }
        }
        Process::OpenShared { a, ty, body } => {
            let mut inner = bound.clone();
            inner.remove(a);
            Process::OpenShared { a: a.clone(), ty: ty.clone(), body: Box::new(resolve_vars(body, &inner)) }
        }
        Process::Send { subject, tag, tyargs, args, body } => Process::Send {
            subject: fix(subject),
            tag: tag.clone(),
            tyargs: tyargs.clone(),
            args: args.iter().map(fix).collect(),
            body: Box::new(resolve_vars(body, bound)),
        },
        Process::Receive { subject, branches } => Process::Receive {
            subject: fix(subject),
            branches: branches
                .iter()
                .map(|br| {
                    let mut inner = bound.clone();
                    inner.extend(br.vars.iter().map(|(x, _)| x.clone()));
                    RecvBranch { body: resolve_vars(&br.body, &inner), ..br.clone() }
                })
                .collect(),
        },
        Process::Choice(a, b) => Process::choice(resolve_vars(a, bound), resolve_vars(b, bound)),
        Process::Par(a, b) => Process::par(resolve_vars(a, bound), resolve_vars(b, bound)),
        Process::Rec(x, body) => Process::rec(x.clone(), resolve_vars(body, bound)),
    }
}

/// Inlines process equations textually. An equation that refers back to
/// itself (directly or through others still being expanded) becomes
/// `rec NAME.body`; expansion follows textual reference order.
struct Folder<'a> {
    procs: &'a BTreeMap<String, Process>,
    stack: Vec<String>,
}

impl Folder<'_> {
    fn expand(&mut self, name: &str) -> Process {
        self.stack.push(name.to_string());
        let body = self.inline(&self.procs[name].clone(), &BTreeSet::new());
        self.stack.pop();
        let x = Symbol::new(name);
        if body.fpv().contains(&x) {
            Process::rec(x, body)
        } else {
            body
        }
    }

    fn inline(&mut self, p: &Process, local: &BTreeSet<Symbol>) -> Process {
        match p {
            Process::Var(x) => {
                if local.contains(x) || x.stamp() != 0 || self.stack.iter().any(|s| s == x.name()) || !self.procs.contains_key(x.name()) {
                    p.clone()
                } else {
                    self.expand(x.name())
                }
            }
            Process::Rec(x, body) => {
                let mut inner = local.clone();
                inner.insert(x.clone());
                Process::rec(x.clone(), self.inline(body, &inner))
            }
            Process::Idle | Process::Close(_) => p.clone(),
            Process::OpenLinear { a, ta, b, tb, body } => Process::OpenLinear {
                a: a.clone(),
                ta: ta.clone(),
                b: b.clone(),
                tb: tb.clone(),
                body: Box::new(self.inline(body, local)),
            },
            Process::OpenShared { a, ty, body } => {
                Process::OpenShared { a: a.clone(), ty: ty.clone(), body: Box::new(self.inline(body, local)) }
            }
            Process::Send { subject, tag, tyargs, args, body } => Process::Send {
                subject: subject.clone(),
                tag: tag.clone(),
                tyargs: tyargs.clone(),
                args: args.clone(),
                body: Box::new(self.inline(body, local)),
            },
            Process::Receive { subject, branches } => Process::Receive {
                subject: subject.clone(),
                branches: branches.iter().map(|br| RecvBranch { body: self.inline(&br.body, local), ..br.clone() }).collect(),
            },
            Process::Choice(a, b) => Process::choice(self.inline(a, local), self.inline(b, local)),
            Process::Par(a, b) => Process::par(self.inline(a, local), self.inline(b, local)),
        }
    }
}

static NO_DEFS: std::sync::LazyLock<BTreeMap<String, TypeDef>> = std::sync::LazyLock::new(BTreeMap::new);

/// Parses a bare endpoint type.
pub fn parse_etype(src: &str) -> Result<EndpointType, ParseError> {
    let mut p = Parser::new(src, &NO_DEFS)?;
    let t = p.etype()?;
    p.finish()?;
    Ok(t)
}

/// Parses `lin T`, `un T` or a bare `T` (read as `lin T`).
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src, &NO_DEFS)?;
    let t = p.qtype()?;
    p.finish()?;
    Ok(t)
}

/// Parses an explicitly qualified type or a bare endpoint type.
pub fn parse_type_opt_qual(src: &str) -> Result<(Option<Qualifier>, EndpointType), ParseError> {
    let mut p = Parser::new(src, &NO_DEFS)?;
    let q = if p.is_kw("lin") || p.is_kw("un") { Some(p.qualifier()) } else { None };
    let t = p.etype()?;
    p.finish()?;
    Ok((q, t))
}

/// Parses a single process with no definitions in scope.
pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(src, &NO_DEFS)?;
    let t = p.process()?;
    p.finish()?;
    Ok(resolve_vars(&t, &BTreeSet::new()))
}

/// Parses a whole program.
pub fn parse_program(src: &str) -> Result<SourceProgram, ParseError> {
    let toks = lex(src)?;
    let mut prog = SourceProgram::default();
    let mut pos = 0usize;
    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut main_at = None;
    // Each item is parsed with the type definitions seen so far.
    loop {
        let types = prog.types.clone();
        let mut p = Parser { toks: toks.clone(), pos, types: &types, scope: Vec::new() };
        if p.at_eof() {
            break;
        }
        if pos == 0 && !p.item_start() {
            let main = p.process()?;
            p.eat(";");
            p.finish()?;
            prog.main = Some(main);
            main_at = Some((1, 1));
            break;
        }
        let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
        let mut fresh_name = |p: &Parser, n: &Symbol| {
            if n.stamp() != 0 || !names.insert(n.name().to_string()) {
                return p.err(format!("duplicate definition `{n}`"));
            }
            Ok(())
        };
        if p.is_kw("type") {
            p.bump();
            let n = p.ident()?;
            fresh_name(&p, &n)?;
            let params = if p.eat("<") { p.comma_list(">", |q| q.ident())? } else { Vec::new() };
            p.expect("=")?;
            p.scope = params.clone();
            let body = p.etype()?;
            p.scope.clear();
            p.expect(";")?;
            prog.types.insert(n.name().to_string(), TypeDef { params, body });
        } else if p.is_kw("proc") {
            p.bump();
            let n = p.ident()?;
            fresh_name(&p, &n)?;
            p.expect("=")?;
            let body = p.process()?;
            p.expect(";")?;
            prog.procs.insert(n.name().to_string(), body);
        } else if p.is_kw("env") {
            p.bump();
            let n = p.name()?;
            p.expect(":")?;
            let t = p.qtype()?;
            p.expect(";")?;
            if prog.env.iter().any(|(m, _)| *m == n) {
                return p.err(format!("duplicate environment entry `{n}`"));
            }
            prog.env.push((n, t));
        } else if p.is_kw("tyvars") {
            p.bump();
            let vs = p.comma_list(";", |q| q.ident())?;
            prog.tyvars.extend(vs);
        } else if p.is_kw("main") {
            if main_at.is_some() {
                return p.err("duplicate `main`");
            }
            p.bump();
            p.eat("=");
            p.scope = prog.tyvars.clone();
            let main = p.process()?;
            p.expect(";")?;
            prog.main = Some(main);
            main_at = Some((line, col));
        } else {
            return p.err(format!("expected an item, found {}", p.peek()));
        }
        pos = p.pos;
    }
    if let Some(main) = prog.main.take() {
        let (line, col) = main_at.unwrap_or((1, 1));
        let mut f = Folder { procs: &prog.procs, stack: Vec::new() };
        let folded = f.inline(&main, &BTreeSet::new());
        if let Some(x) = folded.fpv().into_iter().next() {
            return Err(ParseError { line, col, msg: format!("unresolved process variable `{x}`") });
        }
        prog.main = Some(resolve_vars(&folded, &BTreeSet::new()));
    }
    Ok(prog)
}
