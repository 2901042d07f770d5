//! Taxonomy config files.
//!
//! ```text
//! [PREDICATES]
//! participant regular *
//! war_party parameterized war,invasion
//! occupier attribution invasion
//! attrib_has_cause transform
//! not_attacker negate
//! [REFINEMENTS]
//! participant > war_party @ war
//! [CONSTRAINTS]
//! XOR liberator occupier
//! INV underdog topdog @ conflict
//! [RULES]
//! INCOMPAT (?s attacker ?o) (?s victim ?o) @ war
//! [PERMIT]
//! military_operation : RU
//! war : *
//! ```
//!
//! `transform` and `negate` entries must be named `attrib_<regular>` and
//! `not_<attribution>` respectively; they inherit the source's event types.
//! Sections are applied in the order above regardless of file order.

use std::collections::BTreeSet;

use super::{
    AttributionConstraint, ConsistencyRule, ConstraintKind, EventScope, PredicateKind,
    RulePattern, Taxonomy, TaxonomyError, ViewpointScope, NEGATION_PREFIX, TRANSFORM_PREFIX,
};
use crate::configfile::{self, ConfigLine};
use crate::ids::{PredicateId, ViewpointId};

const SECTIONS: [&str; 5] = ["PREDICATES", "REFINEMENTS", "CONSTRAINTS", "RULES", "PERMIT"];

fn err(line: usize, message: impl Into<String>) -> TaxonomyError {
    TaxonomyError::Config {
        line,
        message: message.into(),
    }
}

/// Attaches the line number to errors that do not carry one.
fn at(line: usize) -> impl Fn(TaxonomyError) -> TaxonomyError {
    move |e| match e {
        TaxonomyError::Config { .. } => e,
        other => err(line, other.to_string()),
    }
}

pub(super) fn parse(text: &str) -> Result<Taxonomy, TaxonomyError> {
    let lines = configfile::lines(text);
    for l in &lines {
        if !SECTIONS.contains(&l.section) {
            return Err(err(l.line, format!("unknown section `[{}]`", l.section)));
        }
    }
    let in_section = |name: &'static str| lines.iter().filter(move |l| l.section == name);

    let mut taxonomy = Taxonomy::new();
    let mut derived = Vec::new();
    for l in in_section("PREDICATES") {
        let fields: Vec<&str> = l.text.split_whitespace().collect();
        let (name, kind) = match fields.as_slice() {
            [name, kind] | [name, kind, _] => (*name, *kind),
            _ => return Err(err(l.line, "expected `name kind types`")),
        };
        match kind {
            "transform" | "negate" => derived.push((l, name, kind)),
            _ => {
                let kind = PredicateKind::parse(kind)
                    .ok_or_else(|| err(l.line, format!("unknown predicate kind `{kind}`")))?;
                let scope = match fields.get(2) {
                    None | Some(&"*") => EventScope::Universal,
                    Some(types) => EventScope::types(configfile::list(types)),
                };
                if kind != PredicateKind::Regular && fields.len() < 3 {
                    return Err(err(l.line, "non-regular predicates need an event type list"));
                }
                taxonomy
                    .register_predicate(name, kind, scope)
                    .map_err(at(l.line))?;
            }
        }
    }
    // Transforms before negations: `not_attrib_x` needs `attrib_x`.
    derived.sort_by_key(|(_, _, kind)| *kind == "negate");
    for (l, name, kind) in derived {
        let (prefix, produced) = if kind == "transform" {
            let source = name
                .strip_prefix(TRANSFORM_PREFIX)
                .ok_or_else(|| err(l.line, format!("transform names start with `{TRANSFORM_PREFIX}`")))?;
            (TRANSFORM_PREFIX, taxonomy.transform_regular(&source.into()))
        } else {
            let source = name
                .strip_prefix(NEGATION_PREFIX)
                .ok_or_else(|| err(l.line, format!("negation names start with `{NEGATION_PREFIX}`")))?;
            (NEGATION_PREFIX, taxonomy.negate_predicate(&source.into()))
        };
        let produced = produced.map_err(at(l.line))?;
        debug_assert!(produced.as_str().starts_with(prefix));
    }

    for l in in_section("REFINEMENTS") {
        let (edge, event_type) = l
            .text
            .split_once('@')
            .ok_or_else(|| err(l.line, "expected `parent > child @ type`"))?;
        let (parent, child) = edge
            .split_once('>')
            .ok_or_else(|| err(l.line, "expected `parent > child @ type`"))?;
        taxonomy
            .add_refinement(&parent.trim().into(), &child.trim().into(), event_type.trim())
            .map_err(at(l.line))?;
    }

    for l in in_section("CONSTRAINTS") {
        let constraint = parse_constraint(l)?;
        taxonomy.add_constraint(constraint).map_err(at(l.line))?;
    }

    for (n, l) in in_section("RULES").enumerate() {
        let rule = parse_rule(l, n + 1)?;
        taxonomy.add_rule(rule).map_err(at(l.line))?;
    }

    for l in in_section("PERMIT") {
        let (event_type, viewpoints) = l
            .text
            .split_once(':')
            .ok_or_else(|| err(l.line, "expected `type : vp1,vp2|*`"))?;
        let viewpoints = viewpoints.trim();
        let scope = if viewpoints == "*" {
            ViewpointScope::Any
        } else {
            ViewpointScope::Only(
                configfile::list(viewpoints)
                    .into_iter()
                    .map(ViewpointId::from)
                    .collect::<BTreeSet<_>>(),
            )
        };
        taxonomy.permit(event_type.trim(), scope);
    }

    taxonomy
        .check_invariants()
        .map_err(|m| err(0, m))?;
    Ok(taxonomy)
}

/// Splits off an optional trailing `@ type` scope.
fn split_scope(text: &str) -> (&str, Option<&str>) {
    match text.rsplit_once('@') {
        Some((body, scope)) if !scope.contains(')') => (body.trim(), Some(scope.trim())),
        _ => (text.trim(), None),
    }
}

fn parse_constraint(l: &ConfigLine<'_>) -> Result<AttributionConstraint, TaxonomyError> {
    let (body, scope) = split_scope(l.text);
    let fields: Vec<&str> = body.split_whitespace().collect();
    let [kind, left, right] = fields.as_slice() else {
        return Err(err(l.line, "expected `XOR|INV a b [@ type]`"));
    };
    let kind = match *kind {
        "XOR" => ConstraintKind::MutualExclusion,
        "INV" => ConstraintKind::InverseRole,
        other => return Err(err(l.line, format!("unknown constraint kind `{other}`"))),
    };
    Ok(AttributionConstraint {
        kind,
        left: PredicateId::from(*left),
        right: PredicateId::from(*right),
        event_type: scope.map(Into::into),
    })
}

fn parse_pattern(text: &str, line: usize) -> Result<RulePattern, TaxonomyError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let [subject, predicate, object] = fields.as_slice() else {
        return Err(err(line, format!("malformed pattern `({text})`")));
    };
    let var = |s: &str| {
        s.strip_prefix('?')
            .filter(|v| !v.is_empty())
            .map(str::to_owned)
            .ok_or_else(|| err(line, format!("`{s}` is not a variable")))
    };
    Ok(RulePattern {
        subject: var(subject)?,
        predicate: PredicateId::from(*predicate),
        object: var(object)?,
    })
}

/// `INCOMPAT [id] (?s p1 ?o) (?s p2 ?o) [@ type]`
fn parse_rule(l: &ConfigLine<'_>, ordinal: usize) -> Result<ConsistencyRule, TaxonomyError> {
    let (body, scope) = split_scope(l.text);
    let rest = body
        .strip_prefix("INCOMPAT")
        .ok_or_else(|| err(l.line, "rules start with `INCOMPAT`"))?;
    let open = rest
        .find('(')
        .ok_or_else(|| err(l.line, "expected two `( ... )` patterns"))?;
    let id = rest[..open].trim();
    let id = if id.is_empty() {
        format!("rule_{ordinal}")
    } else {
        id.to_owned()
    };
    let mut patterns = Vec::new();
    let mut remaining = &rest[open..];
    while let Some(start) = remaining.find('(') {
        if !remaining[..start].trim().is_empty() {
            return Err(err(l.line, "unexpected text between patterns"));
        }
        let end = remaining[start..]
            .find(')')
            .ok_or_else(|| err(l.line, "unclosed pattern"))?
            + start;
        patterns.push(parse_pattern(&remaining[start + 1..end], l.line)?);
        remaining = &remaining[end + 1..];
    }
    if !remaining.trim().is_empty() {
        return Err(err(l.line, "unexpected trailing text"));
    }
    let [first, second]: [RulePattern; 2] = patterns
        .try_into()
        .map_err(|_| err(l.line, "expected exactly two patterns"))?;
    Ok(ConsistencyRule {
        id,
        event_type: scope.map(Into::into),
        first,
        second,
    })
}
