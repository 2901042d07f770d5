//! Line-based triple files (`.vkg`) with singleton-property reification.
//!
//! A fact is one line. A claim `⟨s, p, o⟩` attributed to viewpoint `v`
//! becomes three lines around a fresh singleton property `p#n`:
//!
//! ```text
//! s p#n o .
//! p#n singleton_property_of p .
//! p#n acc_to_vp v .
//! ```
//!
//! Claims attributed to `ALL` are written as plain lines. Under WTAH only the
//! topmost copy of a claim is written, since descendants inherit it. Output
//! is sorted by `(subject, predicate, object)` and singleton indices are
//! assigned per predicate in claim order, so equal graphs serialize to equal
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::consistency::check_graph;
use crate::hierarchy::ViewpointHierarchy;
use crate::ids::{is_token, EventId, PredicateId, ViewpointId};
use crate::store::{unescape, Graph, Literal, StoreError, Term, Triple};
use crate::taxonomy::{Taxonomy, TaxonomyError, EVENT_TYPE_PREDICATE};

pub const SINGLETON_PROPERTY_OF: &str = "singleton_property_of";
pub const ACC_TO_VP: &str = "acc_to_vp";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdfError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("singleton `{node}` lacks its `{missing}` triple")]
    DanglingSingleton { node: String, missing: &'static str },
    #[error("line {line}: {message}")]
    UnknownVocabulary { line: usize, message: String },
    #[error("line {line}: {source}")]
    Store { line: usize, source: StoreError },
    #[error("graph is not viewpoint-consistent ({0} violation(s))")]
    InconsistentGraph(usize),
}

pub type Result<T, E = RdfError> = std::result::Result<T, E>;

/// One serialized line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl WireTriple {
    fn new(subject: impl ToString, predicate: impl ToString, object: impl ToString) -> Self {
        Self {
            subject: subject.to_string(),
            predicate: predicate.to_string(),
            object: object.to_string(),
        }
    }
}

impl fmt::Display for WireTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Each stored statement with the lines that encode it.
fn encode_units(g: &Graph) -> Vec<(Triple, Vec<WireTriple>)> {
    let mut units: Vec<(Triple, Vec<WireTriple>)> = g
        .facts()
        .iter()
        .map(|f| {
            let line = WireTriple::new(&f.subject, &f.predicate, &f.object);
            (f.clone(), vec![line])
        })
        .collect();
    let mut counters: BTreeMap<&PredicateId, usize> = BTreeMap::new();
    for claim in g.minimal_claims() {
        let v = claim.viewpoint.as_ref().expect("claims carry viewpoints");
        let lines = if v.is_all() {
            vec![WireTriple::new(&claim.subject, &claim.predicate, &claim.object)]
        } else {
            let n = counters.entry(&claim.predicate).or_insert(0);
            *n += 1;
            let node = format!("{}#{}", claim.predicate, n);
            vec![
                WireTriple::new(&claim.subject, &node, &claim.object),
                WireTriple::new(&node, SINGLETON_PROPERTY_OF, &claim.predicate),
                WireTriple::new(&node, ACC_TO_VP, v),
            ]
        };
        units.push((claim.clone(), lines));
    }
    units
}

/// Canonical wire triples of a consistent graph.
pub fn materialize(g: &Graph) -> Result<Vec<WireTriple>> {
    let report = check_graph(g);
    if !report.consistent {
        return Err(RdfError::InconsistentGraph(report.evidence().len()));
    }
    let mut lines: Vec<WireTriple> = encode_units(g).into_iter().flat_map(|(_, l)| l).collect();
    lines.sort();
    Ok(lines)
}

/// File contents for [`materialize`], optionally headed by `BASE <iri>`.
pub fn to_text(g: &Graph, base: Option<&str>) -> Result<String> {
    let mut out = String::new();
    if let Some(base) = base {
        out.push_str(&format!("BASE <{base}>\n"));
    }
    for line in materialize(g)? {
        out.push_str(&line.to_string());
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Object {
    Token(String),
    Literal(Literal),
}

#[derive(Debug, Clone)]
struct Line {
    no: usize,
    subject: String,
    predicate: String,
    object: Object,
}

fn syntax(line: usize, message: impl Into<String>) -> RdfError {
    RdfError::SyntaxError {
        line,
        message: message.into(),
    }
}

struct Lexer<'a> {
    rest: &'a str,
    line: usize,
    base: Option<&'a str>,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn token(&mut self) -> Result<String> {
        self.skip_ws();
        if let Some(after) = self.rest.strip_prefix('<') {
            let end = after
                .find('>')
                .ok_or_else(|| syntax(self.line, "unterminated `<iri>`"))?;
            let iri = &after[..end];
            self.rest = &after[end + 1..];
            let local = match self.base {
                Some(base) => iri.strip_prefix(base).unwrap_or(iri),
                None => iri,
            };
            return Ok(local.to_owned());
        }
        let end = self
            .rest
            .find(char::is_whitespace)
            .unwrap_or(self.rest.len());
        let token = &self.rest[..end];
        self.rest = &self.rest[end..];
        if !is_token(token) {
            return Err(syntax(self.line, format!("malformed token `{token}`")));
        }
        Ok(token.to_owned())
    }

    fn object(&mut self) -> Result<Object> {
        self.skip_ws();
        let Some(after) = self.rest.strip_prefix('"') else {
            return self.token().map(Object::Token);
        };
        let mut end = None;
        let mut escaped = false;
        for (i, c) in after.char_indices() {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => {
                    end = Some(i);
                    break;
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| syntax(self.line, "unterminated literal"))?;
        let lexical = unescape(&after[..end]).map_err(|m| syntax(self.line, m))?;
        self.rest = &after[end + 1..];
        let literal = if let Some(rest) = self.rest.strip_prefix("^^") {
            let dt_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let datatype = &rest[..dt_end];
            self.rest = &rest[dt_end..];
            match datatype {
                "instant" => Literal::instant(lexical),
                "interval" => Literal::parse_interval(&lexical),
                other => Err(format!("unknown datatype `{other}`")),
            }
            .map_err(|m| syntax(self.line, m))?
        } else {
            Literal::Plain(lexical)
        };
        Ok(Object::Literal(literal))
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest == "." {
            Ok(())
        } else {
            Err(syntax(self.line, "expected ` .` at end of line"))
        }
    }
}

fn lex(text: &str) -> Result<Vec<Line>> {
    let mut base: Option<&str> = None;
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(decl) = trimmed.strip_prefix("BASE") {
            let iri = decl
                .trim()
                .strip_prefix('<')
                .and_then(|s| s.strip_suffix('>'))
                .ok_or_else(|| syntax(no, "expected `BASE <iri>`"))?;
            if !lines.is_empty() || base.is_some() {
                return Err(syntax(no, "BASE must come first and only once"));
            }
            base = Some(iri);
            continue;
        }
        let mut lexer = Lexer {
            rest: trimmed,
            line: no,
            base,
        };
        let subject = lexer.token()?;
        let predicate = lexer.token()?;
        let object = lexer.object()?;
        lexer.finish()?;
        lines.push(Line {
            no,
            subject,
            predicate,
            object,
        });
    }
    Ok(lines)
}

/// Reads one `s p o` statement; the trailing ` .` is optional.
pub fn parse_statement(text: &str) -> Result<(String, String, Term)> {
    let mut lexer = Lexer {
        rest: text.trim(),
        line: 1,
        base: None,
    };
    let subject = lexer.token()?;
    let predicate = lexer.token()?;
    let object = object_term(&lexer.object()?);
    lexer.skip_ws();
    if !lexer.rest.is_empty() {
        lexer.finish()?;
    }
    Ok((subject, predicate, object))
}

/// `name#n` with a positive `n`.
fn singleton_parts(token: &str) -> Option<(&str, u64)> {
    let (name, n) = token.rsplit_once('#')?;
    let n: u64 = n.parse().ok().filter(|n| *n > 0)?;
    (!name.is_empty()).then_some((name, n))
}

#[derive(Default)]
struct Singleton<'a> {
    usage: Vec<&'a Line>,
    property_of: Vec<&'a Line>,
    viewpoint: Vec<&'a Line>,
}

fn object_term(obj: &Object) -> Term {
    match obj {
        Object::Token(t) => Term::Iri(t.clone()),
        Object::Literal(l) => Term::Literal(l.clone()),
    }
}

fn store_error(line: usize, e: StoreError) -> RdfError {
    match e {
        StoreError::Taxonomy(TaxonomyError::UnknownPredicate(p)) => RdfError::UnknownVocabulary {
            line,
            message: format!("unknown predicate `{p}`"),
        },
        StoreError::Taxonomy(TaxonomyError::UnknownEventType(t)) => RdfError::UnknownVocabulary {
            line,
            message: format!("unknown event type `{t}`"),
        },
        StoreError::UnknownViewpoint(v) => RdfError::UnknownVocabulary {
            line,
            message: format!("unknown viewpoint `{v}`"),
        },
        source => RdfError::Store { line, source },
    }
}

/// Reads a graph, folding singleton patterns back into claims. No
/// consistency checks run; use [`check_graph`] on the result.
pub fn parse(text: &str, taxonomy: Arc<Taxonomy>, hierarchy: Arc<ViewpointHierarchy>) -> Result<Graph> {
    let lines = lex(text)?;
    let mut singletons: BTreeMap<&str, Singleton<'_>> = BTreeMap::new();
    let mut plain: Vec<&Line> = Vec::new();
    for line in &lines {
        if singleton_parts(&line.subject).is_some() {
            let entry = singletons.entry(&line.subject).or_default();
            match line.predicate.as_str() {
                SINGLETON_PROPERTY_OF => entry.property_of.push(line),
                ACC_TO_VP => entry.viewpoint.push(line),
                other => {
                    return Err(syntax(
                        line.no,
                        format!("singleton `{}` used as subject of `{other}`", line.subject),
                    ))
                }
            }
        } else if singleton_parts(&line.predicate).is_some() {
            singletons.entry(&line.predicate).or_default().usage.push(line);
        } else if matches!(line.predicate.as_str(), SINGLETON_PROPERTY_OF | ACC_TO_VP) {
            return Err(syntax(
                line.no,
                format!("`{}` needs a singleton subject", line.predicate),
            ));
        } else {
            plain.push(line);
        }
    }

    let mut claims: Vec<(usize, Triple)> = Vec::new();
    for (node, parts) in &singletons {
        let one = |found: &[&'_ Line], missing: &'static str| -> Result<Line> {
            match found {
                [only] => Ok((*only).clone()),
                [] => Err(RdfError::DanglingSingleton {
                    node: (*node).to_owned(),
                    missing,
                }),
                [_, second, ..] => Err(syntax(
                    second.no,
                    format!("singleton `{node}` has more than one `{missing}` triple"),
                )),
            }
        };
        let usage = one(&parts.usage, "usage")?;
        let property_of = one(&parts.property_of, SINGLETON_PROPERTY_OF)?;
        let viewpoint = one(&parts.viewpoint, ACC_TO_VP)?;
        let (name, _) = singleton_parts(node).expect("classified as singleton");
        let Object::Token(declared) = &property_of.object else {
            return Err(syntax(property_of.no, "singleton property must be a token"));
        };
        if declared != name {
            return Err(syntax(
                property_of.no,
                format!("`{node}` is declared a singleton of `{declared}`"),
            ));
        }
        let Object::Token(vp) = &viewpoint.object else {
            return Err(syntax(viewpoint.no, "viewpoint must be a token"));
        };
        claims.push((
            usage.no,
            Triple {
                subject: EventId::from(usage.subject.as_str()),
                predicate: PredicateId::from(name),
                object: object_term(&usage.object),
                viewpoint: Some(ViewpointId::from(vp.as_str())),
            },
        ));
    }

    let mut graph = Graph::new(taxonomy.clone(), hierarchy);
    // Event registrations first so later lines can reference the events.
    plain.sort_by_key(|l| (l.predicate != EVENT_TYPE_PREDICATE, l.no));
    for line in plain {
        let predicate = PredicateId::from(line.predicate.as_str());
        let kind = taxonomy
            .kind(&predicate)
            .map_err(|e| store_error(line.no, e.into()))?;
        let triple = Triple {
            subject: EventId::from(line.subject.as_str()),
            predicate,
            object: object_term(&line.object),
            viewpoint: kind.is_attribution().then(ViewpointId::all),
        };
        graph
            .insert_unchecked(triple)
            .map_err(|e| store_error(line.no, e))?;
    }
    claims.sort();
    for (no, claim) in claims {
        graph.insert_unchecked(claim).map_err(|e| store_error(no, e))?;
    }
    Ok(graph)
}

/// Lines present in only one of two files, compared statement by statement
/// after canonical renumbering.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diff {
    pub only_in_first: Vec<WireTriple>,
    pub only_in_second: Vec<WireTriple>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.only_in_first.is_empty() && self.only_in_second.is_empty()
    }

    pub fn len(&self) -> usize {
        self.only_in_first.len() + self.only_in_second.len()
    }
}

impl fmt::Display for Diff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.only_in_first {
            writeln!(f, "- {l}")?;
        }
        for l in &self.only_in_second {
            writeln!(f, "+ {l}")?;
        }
        Ok(())
    }
}

pub fn diff(
    first: &str,
    second: &str,
    taxonomy: Arc<Taxonomy>,
    hierarchy: Arc<ViewpointHierarchy>,
) -> Result<Diff> {
    let a = parse(first, taxonomy.clone(), hierarchy.clone())?;
    let b = parse(second, taxonomy, hierarchy)?;
    Ok(diff_graphs(&a, &b))
}

pub fn diff_graphs(a: &Graph, b: &Graph) -> Diff {
    let units_a = encode_units(a);
    let units_b = encode_units(b);
    let keys_a: BTreeSet<&Triple> = units_a.iter().map(|(t, _)| t).collect();
    let keys_b: BTreeSet<&Triple> = units_b.iter().map(|(t, _)| t).collect();
    let collect = |units: &[(Triple, Vec<WireTriple>)], other: &BTreeSet<&Triple>| {
        let mut lines: Vec<WireTriple> = units
            .iter()
            .filter(|(t, _)| !other.contains(t))
            .flat_map(|(_, l)| l.iter().cloned())
            .collect();
        lines.sort();
        lines
    };
    Diff {
        only_in_first: collect(&units_a, &keys_b),
        only_in_second: collect(&units_b, &keys_a),
    }
}

#[cfg(test)]
mod tests;
