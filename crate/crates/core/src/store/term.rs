use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Serialize, Serializer};

use crate::ids::{EventId, PredicateId, ViewpointId};

/// Parses an ISO-8601 date or date-time; offsets are normalized to UTC.
pub fn parse_time(s: &str) -> Option<NaiveDateTime> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Plain(String),
    /// ISO-8601 date or date-time.
    Instant(String),
    /// `start < end`, both ISO-8601.
    Interval { start: String, end: String },
}

impl Literal {
    pub fn plain(s: impl Into<String>) -> Self {
        Literal::Plain(s.into())
    }

    pub fn instant(s: impl Into<String>) -> Result<Self, String> {
        let s = s.into();
        parse_time(&s)
            .map(|_| Literal::Instant(s.clone()))
            .ok_or_else(|| format!("`{s}` is not an ISO-8601 time"))
    }

    pub fn interval(start: impl Into<String>, end: impl Into<String>) -> Result<Self, String> {
        let (start, end) = (start.into(), end.into());
        let t1 = parse_time(&start).ok_or_else(|| format!("`{start}` is not an ISO-8601 time"))?;
        let t2 = parse_time(&end).ok_or_else(|| format!("`{end}` is not an ISO-8601 time"))?;
        if t1 >= t2 {
            return Err(format!("interval `{start}/{end}` does not satisfy start < end"));
        }
        Ok(Literal::Interval { start, end })
    }

    /// Parses the `t1/t2` interval encoding.
    pub fn parse_interval(s: &str) -> Result<Self, String> {
        let (start, end) = s
            .split_once('/')
            .ok_or_else(|| format!("`{s}` is not a `t1/t2` interval"))?;
        Self::interval(start, end)
    }

    pub fn is_time(&self) -> bool {
        !matches!(self, Literal::Plain(_))
    }

    /// Lexical form without quotes or datatype.
    pub fn lexical(&self) -> String {
        match self {
            Literal::Plain(s) | Literal::Instant(s) => s.clone(),
            Literal::Interval { start, end } => format!("{start}/{end}"),
        }
    }
}

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// An entity, event, event type or other resource token.
    Iri(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            Term::Literal(_) => None,
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of the escaping used by [`Term`]'s `Display`.
pub fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

/// Wire form: bare token, `"text"`, `"t"^^instant` or `"t1/t2"^^interval`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => f.write_str(s),
            Term::Literal(Literal::Plain(s)) => write!(f, "\"{}\"", escape(s)),
            Term::Literal(l @ Literal::Instant(_)) => write!(f, "\"{}\"^^instant", escape(&l.lexical())),
            Term::Literal(l @ Literal::Interval { .. }) => {
                write!(f, "\"{}\"^^interval", escape(&l.lexical()))
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A statement about an event. With a viewpoint it is a claim, otherwise a
/// fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triple {
    pub subject: EventId,
    pub predicate: PredicateId,
    pub object: Term,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub viewpoint: Option<ViewpointId>,
}

impl Triple {
    pub fn fact(
        subject: impl Into<EventId>,
        predicate: impl Into<PredicateId>,
        object: Term,
    ) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
            viewpoint: None,
        }
    }

    pub fn claim(
        subject: impl Into<EventId>,
        predicate: impl Into<PredicateId>,
        object: Term,
        viewpoint: impl Into<ViewpointId>,
    ) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
            viewpoint: Some(viewpoint.into()),
        }
    }

    pub fn is_claim(&self) -> bool {
        self.viewpoint.is_some()
    }

    /// Same statement with the viewpoint dropped.
    pub fn statement(&self) -> (&EventId, &PredicateId, &Term) {
        (&self.subject, &self.predicate, &self.object)
    }
}

/// `s p o` for facts, `s p o @ v` for claims.
impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)?;
        if let Some(v) = &self.viewpoint {
            write!(f, " @ {v}")?;
        }
        Ok(())
    }
}
