//! Scenario language: parsing, well-formedness checks and per-process traces.
//!
//! The accepted syntax is line oriented:
//!
//! ```text
//! scenario NAME
//! process P1, P2          # one or more declaration lines
//! resource r1, r2
//! P1: lock r1; unlock r1  # at most one body line per process
//! P2: P r2; V r2          # P / V are aliases for lock / unlock
//! ```
//!
//! Resources are passive: they have no body lines and accept lock and unlock
//! requests in any order, so a scenario is fully described by the traces of
//! its processes.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Lock,
    Unlock,
}

impl ActionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Lock => "lock",
            ActionKind::Unlock => "unlock",
        }
    }

    /// Dijkstra's letter for the operation.
    pub fn letter(self) -> char {
        match self {
            ActionKind::Lock => 'P',
            ActionKind::Unlock => 'V',
        }
    }
}

/// One message a process sends to a resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub resource: ResourceId,
}

impl Action {
    pub fn lock(resource: ResourceId) -> Self {
        Action { kind: ActionKind::Lock, resource }
    }

    pub fn unlock(resource: ResourceId) -> Self {
        Action { kind: ActionKind::Unlock, resource }
    }
}

/// 1-based source position. `0:0` marks an item with no source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl Location {
    pub fn new(line: u32, column: u32) -> Self {
        Location { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticCode {
    Syntax,
    DuplicateIdentifier,
    UndeclaredIdentifier,
    DuplicateBody,
    UnlockWithoutLock,
    RelockWhileHeld,
    UnreleasedResource,
    UnusedResource,
    EmptyTrace,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "syntax",
            DiagnosticCode::DuplicateIdentifier => "duplicate-identifier",
            DiagnosticCode::UndeclaredIdentifier => "undeclared-identifier",
            DiagnosticCode::DuplicateBody => "duplicate-body",
            DiagnosticCode::UnlockWithoutLock => "unlock-without-lock",
            DiagnosticCode::RelockWhileHeld => "relock-while-held",
            DiagnosticCode::UnreleasedResource => "unreleased-resource",
            DiagnosticCode::UnusedResource => "unused-resource",
            DiagnosticCode::EmptyTrace => "empty-trace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
    pub location: Location,
    /// Process and 1-based event index the diagnostic refers to, if any.
    pub event: Option<(ProcessId, usize)>,
}

impl Diagnostic {
    fn error(code: DiagnosticCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            location,
            event: None,
        }
    }

    fn warning(code: DiagnosticCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location,
            event: None,
        }
    }

    fn at_event(mut self, process: ProcessId, index: usize) -> Self {
        self.event = Some((process, index));
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}[{}] {}: {}", severity, self.code.as_str(), self.location, self.message)
    }
}

/// A non-empty batch of diagnostics returned by a failed parse or validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn iter(&self) -> core::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }

    pub fn has_code(&self, code: DiagnosticCode) -> bool {
        self.0.iter().any(|d| d.code == code)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("unknown resource `{0}`")]
    UnknownResource(String),
}

/// A parsed scenario. Process and resource identifiers index into
/// [`Scenario::processes`] and [`Scenario::resources`].
///
/// Equality is structural: source locations are ignored.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub processes: Vec<String>,
    pub resources: Vec<String>,
    /// `events[p]` is the ordered trace of process `p`.
    pub events: Vec<Vec<Action>>,
    locations: Vec<Vec<Location>>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.processes == other.processes
            && self.resources == other.resources
            && self.events == other.events
    }
}

impl Eq for Scenario {}

impl Scenario {
    /// Builds a scenario from in-memory parts, checking the same identifier
    /// rules the parser enforces.
    pub fn from_parts(
        name: impl Into<String>,
        processes: Vec<String>,
        resources: Vec<String>,
        events: Vec<Vec<Action>>,
    ) -> Result<Scenario, Diagnostics> {
        let mut diags = Vec::new();
        let here = Location::default();
        let mut seen: Vec<&str> = Vec::new();
        for id in processes.iter().chain(resources.iter()) {
            if !is_ident(id) || is_reserved(id) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::Syntax,
                    here,
                    format!("`{id}` is not a valid identifier"),
                ));
            }
            if seen.contains(&id.as_str()) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::DuplicateIdentifier,
                    here,
                    format!("identifier `{id}` declared more than once"),
                ));
            }
            seen.push(id);
        }
        if events.len() != processes.len() {
            diags.push(Diagnostic::error(
                DiagnosticCode::UndeclaredIdentifier,
                here,
                format!("{} traces given for {} processes", events.len(), processes.len()),
            ));
        }
        for (p, trace) in events.iter().enumerate() {
            for (j, action) in trace.iter().enumerate() {
                if action.resource.0 >= resources.len() {
                    diags.push(
                        Diagnostic::error(
                            DiagnosticCode::UndeclaredIdentifier,
                            here,
                            format!("resource #{} is not declared", action.resource.0),
                        )
                        .at_event(ProcessId(p), j + 1),
                    );
                }
            }
        }
        if !diags.is_empty() {
            return Err(Diagnostics(diags));
        }
        let locations = events.iter().map(|t| vec![here; t.len()]).collect();
        Ok(Scenario {
            name: name.into(),
            processes,
            resources,
            events,
            locations,
        })
    }

    pub fn process_count(&self) -> usize {
        self.processes.len()
    }

    pub fn process_id(&self, name: &str) -> Option<ProcessId> {
        self.processes.iter().position(|p| p == name).map(ProcessId)
    }

    pub fn resource_id(&self, name: &str) -> Option<ResourceId> {
        self.resources.iter().position(|r| r == name).map(ResourceId)
    }

    pub fn process_name(&self, p: ProcessId) -> &str {
        &self.processes[p.0]
    }

    pub fn resource_name(&self, r: ResourceId) -> &str {
        &self.resources[r.0]
    }

    pub fn trace(&self, p: ProcessId) -> &[Action] {
        &self.events[p.0]
    }

    /// Source location of the 1-based event `index` of process `p`.
    pub fn event_location(&self, p: ProcessId, index: usize) -> Location {
        self.locations
            .get(p.0)
            .and_then(|l| l.get(index.wrapping_sub(1)))
            .copied()
            .unwrap_or_default()
    }

    /// Renders one event as `P a` / `V a`.
    pub fn event_label(&self, action: &Action) -> String {
        format!("{}{}", action.kind.letter(), self.resource_name(action.resource))
    }
}

/// Canonical source form; parsing it yields a structurally equal scenario.
impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.name)?;
        if !self.processes.is_empty() {
            writeln!(f, "process {}", self.processes.join(", "))?;
        }
        if !self.resources.is_empty() {
            writeln!(f, "resource {}", self.resources.join(", "))?;
        }
        for (p, trace) in self.events.iter().enumerate() {
            if trace.is_empty() {
                continue;
            }
            write!(f, "{}:", self.processes[p])?;
            for (j, a) in trace.iter().enumerate() {
                let sep = if j == 0 { " " } else { "; " };
                write!(f, "{sep}{} {}", a.kind.keyword(), self.resources[a.resource.0])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

const RESERVED: [&str; 5] = ["scenario", "process", "resource", "lock", "unlock"];

fn is_reserved(id: &str) -> bool {
    RESERVED.contains(&id)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Colon,
    Semi,
    Comma,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Colon => "`:`".to_owned(),
            Tok::Semi => "`;`".to_owned(),
            Tok::Comma => "`,`".to_owned(),
        }
    }
}

type Spanned<'a> = (Tok<'a>, Location);

fn syntax(location: Location, message: impl Into<String>) -> Diagnostics {
    Diagnostics(vec![Diagnostic::error(DiagnosticCode::Syntax, location, message)])
}

fn tokenize(line: &str, line_no: u32) -> Result<Vec<Spanned<'_>>, Diagnostics> {
    let mut out = Vec::new();
    let mut iter = line.char_indices().peekable();
    let mut column = 0u32;
    while let Some((start, c)) = iter.next() {
        column += 1;
        let loc = Location::new(line_no, column);
        match c {
            '#' => break,
            ' ' | '\t' | '\r' => {}
            ':' => out.push((Tok::Colon, loc)),
            ';' => out.push((Tok::Semi, loc)),
            ',' => out.push((Tok::Comma, loc)),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start + c.len_utf8();
                while let Some(&(i, d)) = iter.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = i + d.len_utf8();
                        column += 1;
                        iter.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(&line[start..end]), loc));
            }
            other => return Err(syntax(loc, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Cursor<'t, 'a> {
    toks: &'t [Spanned<'a>],
    pos: usize,
    eol: Location,
}

impl<'a> Cursor<'_, 'a> {
    fn peek(&self) -> Option<Spanned<'a>> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Spanned<'a>> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn ident(&mut self, what: &str) -> Result<(&'a str, Location), Diagnostics> {
        match self.next() {
            Some((Tok::Ident(s), loc)) => Ok((s, loc)),
            Some((t, loc)) => Err(syntax(loc, format!("expected {what}, found {}", t.describe()))),
            None => Err(syntax(self.eol, format!("expected {what} before end of line"))),
        }
    }

    fn name(&mut self, what: &str) -> Result<(&'a str, Location), Diagnostics> {
        let (s, loc) = self.ident(what)?;
        if is_reserved(s) {
            return Err(syntax(loc, format!("`{s}` is a reserved keyword")));
        }
        Ok((s, loc))
    }

    fn expect(&mut self, want: Tok<'_>) -> Result<(), Diagnostics> {
        match self.next() {
            Some((t, _)) if t == want => Ok(()),
            Some((t, loc)) => Err(syntax(
                loc,
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(syntax(
                self.eol,
                format!("expected {} before end of line", want.describe()),
            )),
        }
    }

    fn finish(&mut self) -> Result<(), Diagnostics> {
        match self.peek() {
            None => Ok(()),
            Some((t, loc)) => Err(syntax(loc, format!("unexpected {} after end of statement", t.describe()))),
        }
    }
}

#[derive(PartialEq, Eq)]
enum Section {
    Header,
    Decls,
    Bodies,
}

/// Parses scenario source text.
///
/// Syntax errors stop the parse at the first offending token. Identifier
/// errors (duplicates, undeclared names, repeated bodies) are collected and
/// reported together.
pub fn parse_scenario(text: &str) -> Result<Scenario, Diagnostics> {
    let mut section = Section::Header;
    let mut name = String::new();
    let mut processes: Vec<String> = Vec::new();
    let mut resources: Vec<String> = Vec::new();
    let mut bodies: Vec<Option<(Vec<Action>, Vec<Location>)>> = Vec::new();
    let mut semantic = Vec::new();
    let mut last_line = 0u32;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        last_line = line_no;
        let toks = tokenize(raw, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let eol = Location::new(line_no, raw.trim_end().chars().count() as u32 + 1);
        let mut cur = Cursor { toks: &toks, pos: 0, eol };
        let (first, first_loc) = cur.peek().expect("nonempty token list");

        if section == Section::Header {
            match first {
                Tok::Ident("scenario") => {
                    cur.next();
                    name = cur.name("scenario name")?.0.to_owned();
                    cur.finish()?;
                    section = Section::Decls;
                    continue;
                }
                _ => return Err(syntax(first_loc, "expected `scenario NAME` header")),
            }
        }

        let is_decl = matches!(first, Tok::Ident("process") | Tok::Ident("resource"))
            && !matches!(cur.toks.get(1), Some((Tok::Colon, _)));
        if is_decl {
            if section == Section::Bodies {
                return Err(syntax(first_loc, "declarations must precede process bodies"));
            }
            cur.next();
            let is_process = first == Tok::Ident("process");
            let what = if is_process { "process name" } else { "resource name" };
            loop {
                let (id, loc) = cur.name(what)?;
                if processes.iter().chain(resources.iter()).any(|x| x == id) {
                    semantic.push(Diagnostic::error(
                        DiagnosticCode::DuplicateIdentifier,
                        loc,
                        format!("identifier `{id}` declared more than once"),
                    ));
                } else if is_process {
                    processes.push(id.to_owned());
                    bodies.push(None);
                } else {
                    resources.push(id.to_owned());
                }
                match cur.peek() {
                    Some((Tok::Comma, _)) => {
                        cur.next();
                    }
                    _ => break,
                }
            }
            cur.finish()?;
            continue;
        }

        // Body line: IDENT ":" action (";" action)*
        match (first, cur.toks.get(1)) {
            (Tok::Ident(_), Some((Tok::Colon, _))) => {}
            (Tok::Ident(s), _) => {
                return Err(syntax(first_loc, format!("unknown keyword `{s}`")));
            }
            (t, _) => {
                return Err(syntax(first_loc, format!("unexpected {}", t.describe())));
            }
        }
        if section == Section::Decls && processes.is_empty() && resources.is_empty() {
            return Err(syntax(first_loc, "expected a `process` or `resource` declaration"));
        }
        section = Section::Bodies;
        let (pname, ploc) = cur.ident("process name")?;
        cur.expect(Tok::Colon)?;
        let mut actions = Vec::new();
        let mut locs = Vec::new();
        loop {
            let (kw, kw_loc) = cur.ident("`lock` or `unlock`")?;
            let kind = match kw {
                "lock" | "P" => ActionKind::Lock,
                "unlock" | "V" => ActionKind::Unlock,
                other => {
                    return Err(syntax(
                        kw_loc,
                        format!("unknown keyword `{other}`, expected `lock`, `unlock`, `P` or `V`"),
                    ))
                }
            };
            let (rname, rloc) = cur.ident("resource name")?;
            match resources.iter().position(|r| r == rname) {
                Some(r) => {
                    actions.push(Action { kind, resource: ResourceId(r) });
                    locs.push(kw_loc);
                }
                None => semantic.push(Diagnostic::error(
                    DiagnosticCode::UndeclaredIdentifier,
                    rloc,
                    format!("resource `{rname}` is not declared"),
                )),
            }
            match cur.next() {
                None => break,
                Some((Tok::Semi, _)) => {}
                Some((t, loc)) => {
                    return Err(syntax(loc, format!("expected `;` or end of line, found {}", t.describe())))
                }
            }
        }
        match processes.iter().position(|p| p == pname) {
            Some(p) if bodies[p].is_some() => semantic.push(Diagnostic::error(
                DiagnosticCode::DuplicateBody,
                ploc,
                format!("process `{pname}` already has a body"),
            )),
            Some(p) => bodies[p] = Some((actions, locs)),
            None => semantic.push(Diagnostic::error(
                DiagnosticCode::UndeclaredIdentifier,
                ploc,
                format!("process `{pname}` is not declared"),
            )),
        }
    }

    let end = Location::new(last_line + 1, 1);
    match section {
        Section::Header => return Err(syntax(end, "expected `scenario NAME` header")),
        Section::Decls => return Err(syntax(end, "expected at least one process body")),
        Section::Bodies => {}
    }
    if !semantic.is_empty() {
        return Err(Diagnostics(semantic));
    }

    let (events, locations) = bodies
        .into_iter()
        .map(|b| b.unwrap_or_default())
        .unzip();
    Ok(Scenario {
        name,
        processes,
        resources,
        events,
        locations,
    })
}

/// A hold of one resource by one process: held strictly after the lock
/// event and strictly before the unlock event (both 1-based positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lock: u32,
    pub unlock: u32,
}

impl Interval {
    pub fn new(lock: u32, unlock: u32) -> Self {
        Interval { lock, unlock }
    }

    /// Whether the resource is held after `done` events have completed.
    pub fn held_after(&self, done: u32) -> bool {
        self.lock <= done && done < self.unlock
    }
}

/// A scenario whose traces respect binary lock discipline, with hold
/// intervals extracted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedScenario {
    scenario: Scenario,
    /// `holds[p][r]`, sorted and disjoint.
    holds: Vec<Vec<Vec<Interval>>>,
    warnings: Vec<Diagnostic>,
}

/// Checks lock discipline and computes hold intervals.
///
/// Each lock is matched with the next unlock of the same resource by the
/// same process. Unlocking a free resource, relocking a held one and ending
/// a trace while holding anything are errors.
pub fn validate(s: &Scenario) -> Result<ValidatedScenario, Diagnostics> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut holds = vec![vec![Vec::new(); s.resources.len()]; s.processes.len()];
    let mut used = vec![false; s.resources.len()];

    for (p, trace) in s.events.iter().enumerate() {
        let pid = ProcessId(p);
        let pname = &s.processes[p];
        let mut open: Vec<Option<usize>> = vec![None; s.resources.len()];
        for (j, action) in trace.iter().enumerate() {
            let pos = j + 1;
            let r = action.resource.0;
            used[r] = true;
            let rname = &s.resources[r];
            let loc = s.event_location(pid, pos);
            match (action.kind, open[r]) {
                (ActionKind::Lock, None) => open[r] = Some(pos),
                (ActionKind::Lock, Some(since)) => errors.push(
                    Diagnostic::error(
                        DiagnosticCode::RelockWhileHeld,
                        loc,
                        format!("{pname} locks `{rname}` at event {pos} while already holding it since event {since}"),
                    )
                    .at_event(pid, pos),
                ),
                (ActionKind::Unlock, Some(since)) => {
                    holds[p][r].push(Interval::new(since as u32, pos as u32));
                    open[r] = None;
                }
                (ActionKind::Unlock, None) => errors.push(
                    Diagnostic::error(
                        DiagnosticCode::UnlockWithoutLock,
                        loc,
                        format!("{pname} unlocks `{rname}` at event {pos} without holding it"),
                    )
                    .at_event(pid, pos),
                ),
            }
        }
        for (r, since) in open.iter().enumerate() {
            if let Some(since) = *since {
                errors.push(
                    Diagnostic::error(
                        DiagnosticCode::UnreleasedResource,
                        s.event_location(pid, since),
                        format!(
                            "{pname} locks `{}` at event {since} and never unlocks it",
                            s.resources[r]
                        ),
                    )
                    .at_event(pid, since),
                );
            }
        }
        if trace.is_empty() {
            warnings.push(Diagnostic::warning(
                DiagnosticCode::EmptyTrace,
                Location::default(),
                format!("process {pname} has no events"),
            ));
        }
    }
    for (r, used) in used.iter().enumerate() {
        if !used {
            warnings.push(Diagnostic::warning(
                DiagnosticCode::UnusedResource,
                Location::default(),
                format!("resource `{}` is never used", s.resources[r]),
            ));
        }
    }

    if errors.is_empty() {
        Ok(ValidatedScenario {
            scenario: s.clone(),
            holds,
            warnings,
        })
    } else {
        Err(Diagnostics(errors))
    }
}

impl ValidatedScenario {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    pub fn process_count(&self) -> usize {
        self.scenario.processes.len()
    }

    /// Number of events in the trace of `p`.
    pub fn event_count(&self, p: ProcessId) -> usize {
        self.scenario.events[p.0].len()
    }

    pub fn holds(&self, p: ProcessId, r: ResourceId) -> &[Interval] {
        &self.holds[p.0][r.0]
    }

    /// Hold intervals of resource `r` by process `p`, looked up by name.
    pub fn hold_intervals(&self, p: &str, r: &str) -> Result<&[Interval], LookupError> {
        let pid = self
            .scenario
            .process_id(p)
            .ok_or_else(|| LookupError::UnknownProcess(p.to_string()))?;
        let rid = self
            .scenario
            .resource_id(r)
            .ok_or_else(|| LookupError::UnknownResource(r.to_string()))?;
        Ok(self.holds(pid, rid))
    }

    /// Resources held by `p` after it has completed `done` events.
    pub fn held_by(&self, p: ProcessId, done: u32) -> Vec<ResourceId> {
        self.holds[p.0]
            .iter()
            .enumerate()
            .filter(|(_, ivs)| ivs.iter().any(|iv| iv.held_after(done)))
            .map(|(r, _)| ResourceId(r))
            .collect()
    }

    /// Process-algebra expression of the trace of `p`, e.g.
    /// `out(T1,a,lock).out(T1,a,unlock)`; the empty trace is `ε`.
    pub fn process_semantics(&self, p: &str) -> Result<String, LookupError> {
        let pid = self
            .scenario
            .process_id(p)
            .ok_or_else(|| LookupError::UnknownProcess(p.to_string()))?;
        Ok(self.semantics_of(pid))
    }

    pub fn semantics_of(&self, p: ProcessId) -> String {
        let s = &self.scenario;
        let trace = s.trace(p);
        if trace.is_empty() {
            return "ε".to_owned();
        }
        let pname = s.process_name(p);
        let terms: Vec<String> = trace
            .iter()
            .map(|a| format!("out({},{},{})", pname, s.resource_name(a.resource), a.kind.keyword()))
            .collect();
        terms.join(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWISS: &str = "scenario swiss
process T1, T2
resource a, b
T1: lock a; lock b; unlock b; unlock a
T2: lock b; lock a; unlock a; unlock b
";

    fn swiss() -> ValidatedScenario {
        validate(&parse_scenario(SWISS).unwrap()).unwrap()
    }

    #[test]
    fn parses_swiss_flag() {
        let s = parse_scenario(SWISS).unwrap();
        assert_eq!(s.name, "swiss");
        assert_eq!(s.processes, ["T1", "T2"]);
        assert_eq!(s.resources, ["a", "b"]);
        let (a, b) = (ResourceId(0), ResourceId(1));
        assert_eq!(
            s.events[0],
            [Action::lock(a), Action::lock(b), Action::unlock(b), Action::unlock(a)]
        );
        assert_eq!(
            s.events[1],
            [Action::lock(b), Action::lock(a), Action::unlock(a), Action::unlock(b)]
        );
        assert_eq!(s.event_location(ProcessId(0), 2), Location::new(4, 13));
    }

    #[test]
    fn pv_aliases_and_comments() {
        let src = "# leading comment\nscenario s   # trailing\n\nprocess P\nresource r\nP: P r; V r # done\n";
        let s = parse_scenario(src).unwrap();
        assert_eq!(s.events[0].len(), 2);
        assert_eq!(s.events[0][0].kind, ActionKind::Lock);
        assert_eq!(s.events[0][1].kind, ActionKind::Unlock);
    }

    #[test]
    fn minimal_scenario() {
        let s = parse_scenario("scenario s\nprocess P\nresource r\nP: lock r; unlock r\n").unwrap();
        assert_eq!(s.processes.len(), 1);
        assert_eq!(s.events[0].len(), 2);
    }

    #[test]
    fn unknown_action_keyword() {
        let err = parse_scenario("scenario s\nprocess P\nresource r\nP: grab r\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].code, DiagnosticCode::Syntax);
        assert_eq!(err.0[0].location, Location::new(4, 4));
        assert!(err.0[0].message.contains("grab"));
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let cases = [
            ("process P\n", Location::new(1, 1)),
            ("scenario s\nprocess P\nresource r\nP: lock r;\n", Location::new(4, 11)),
            ("scenario s\nprocess P\nresource r\nP lock r\n", Location::new(4, 1)),
            ("scenario s\nprocess P,\nresource r\n", Location::new(2, 11)),
            ("scenario s\nprocess P\nresource r\nP: lock r\nresource q\n", Location::new(5, 1)),
            ("scenario s\nprocess P\nresource r\n", Location::new(4, 1)),
            ("scenario s\nprocess lock\n", Location::new(2, 9)),
            ("scenario s\nprocess P\nresource r\nP: lock r $\n", Location::new(4, 11)),
        ];
        for (src, loc) in cases {
            let err = parse_scenario(src).unwrap_err();
            assert_eq!(err.0[0].code, DiagnosticCode::Syntax, "{src:?}");
            assert_eq!(err.0[0].location, loc, "{src:?}: {}", err);
        }
    }

    #[test]
    fn identifier_errors_are_collected() {
        let src = "scenario s\nprocess P, Q\nresource r, P\nP: lock x; unlock r\nZ: lock r\nQ: lock r; unlock r\nQ: lock r; unlock r\n";
        let err = parse_scenario(src).unwrap_err();
        let codes: Vec<_> = err.iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            [
                DiagnosticCode::DuplicateIdentifier,
                DiagnosticCode::UndeclaredIdentifier,
                DiagnosticCode::UndeclaredIdentifier,
                DiagnosticCode::DuplicateBody,
            ]
        );
        assert_eq!(err.0[0].location, Location::new(3, 13));
        assert_eq!(err.0[1].location, Location::new(4, 9));
        assert_eq!(err.0[2].location, Location::new(5, 1));
    }

    #[test]
    fn process_named_like_keywords_of_actions() {
        // `P` and `V` only act as keywords in action position.
        let s = parse_scenario("scenario s\nprocess P, V\nresource r\nP: P r; V r\nV: lock r; unlock r\n")
            .unwrap();
        assert_eq!(s.events[1].len(), 2);
    }

    #[test]
    fn declared_process_without_body_has_empty_trace() {
        let s = parse_scenario("scenario s\nprocess P, Q\nresource r\nP: lock r; unlock r\n").unwrap();
        assert!(s.events[1].is_empty());
        let v = validate(&s).unwrap();
        assert_eq!(v.semantics_of(ProcessId(1)), "ε");
        assert!(v.warnings().iter().any(|w| w.code == DiagnosticCode::EmptyTrace));
    }

    #[test]
    fn swiss_hold_intervals() {
        let v = swiss();
        assert_eq!(v.hold_intervals("T1", "a").unwrap(), [Interval::new(1, 4)]);
        assert_eq!(v.hold_intervals("T1", "b").unwrap(), [Interval::new(2, 3)]);
        assert_eq!(v.hold_intervals("T2", "b").unwrap(), [Interval::new(1, 4)]);
        assert_eq!(v.hold_intervals("T2", "a").unwrap(), [Interval::new(2, 3)]);
        assert_eq!(
            v.hold_intervals("T1", "nonexistent"),
            Err(LookupError::UnknownResource("nonexistent".into()))
        );
        assert_eq!(
            v.hold_intervals("T9", "a"),
            Err(LookupError::UnknownProcess("T9".into()))
        );
    }

    #[test]
    fn repeated_holds_alternate() {
        let s = parse_scenario("scenario s\nprocess P\nresource r\nP: lock r; unlock r; lock r; unlock r\n")
            .unwrap();
        let v = validate(&s).unwrap();
        assert_eq!(
            v.hold_intervals("P", "r").unwrap(),
            [Interval::new(1, 2), Interval::new(3, 4)]
        );
    }

    #[test]
    fn unlock_without_lock() {
        let s = parse_scenario("scenario s\nprocess P\nresource r\nP: unlock r\n").unwrap();
        let err = validate(&s).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].code, DiagnosticCode::UnlockWithoutLock);
        assert_eq!(err.0[0].event, Some((ProcessId(0), 1)));
        assert_eq!(err.0[0].location, Location::new(4, 4));
    }

    #[test]
    fn relock_while_held() {
        let s = parse_scenario("scenario s\nprocess P\nresource r\nP: lock r; lock r\n").unwrap();
        let err = validate(&s).unwrap_err();
        let codes: Vec<_> = err.iter().map(|d| (d.code, d.event)).collect();
        assert_eq!(
            codes,
            [
                (DiagnosticCode::RelockWhileHeld, Some((ProcessId(0), 2))),
                (DiagnosticCode::UnreleasedResource, Some((ProcessId(0), 1))),
            ]
        );
        assert_eq!(err.0[0].location, Location::new(4, 12));
    }

    #[test]
    fn overlapping_holds_of_different_resources_are_fine() {
        let s = parse_scenario("scenario s\nprocess P\nresource a, b\nP: lock a; lock b; unlock a; unlock b\n")
            .unwrap();
        let v = validate(&s).unwrap();
        assert_eq!(v.hold_intervals("P", "a").unwrap(), [Interval::new(1, 3)]);
        assert_eq!(v.hold_intervals("P", "b").unwrap(), [Interval::new(2, 4)]);
        assert_eq!(v.held_by(ProcessId(0), 2), [ResourceId(0), ResourceId(1)]);
    }

    #[test]
    fn semantics_strings() {
        let v = swiss();
        assert_eq!(
            v.process_semantics("T1").unwrap(),
            "out(T1,a,lock).out(T1,b,lock).out(T1,b,unlock).out(T1,a,unlock)"
        );
        assert_eq!(
            v.process_semantics("T2").unwrap(),
            "out(T2,b,lock).out(T2,a,lock).out(T2,a,unlock).out(T2,b,unlock)"
        );
        assert!(v.process_semantics("T3").is_err());
    }

    #[test]
    fn canonical_render_round_trips() {
        let s = parse_scenario("scenario swiss\nprocess T1,T2\nresource a,b\nT1: P a; P b; V b; V a\nT2: P b; P a; V a; V b\n")
            .unwrap();
        let text = s.to_string();
        assert_eq!(text, SWISS);
        assert_eq!(parse_scenario(&text).unwrap(), s);
    }

    #[test]
    fn from_parts_rejects_bad_identifiers() {
        let err = Scenario::from_parts(
            "s",
            vec!["P".into(), "P".into()],
            vec!["lock".into()],
            vec![Vec::new(), Vec::new()],
        )
        .unwrap_err();
        assert!(err.has_code(DiagnosticCode::DuplicateIdentifier));
        assert!(err.has_code(DiagnosticCode::Syntax));
    }
}
