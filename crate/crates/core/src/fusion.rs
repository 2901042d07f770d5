//! Per-viewpoint query answering and claim fusion.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::consistency::{contradicts, IncompatibilityEvidence};
use crate::hierarchy::{Variant, ViewpointHierarchy};
use crate::ids::{EventId, PredicateId, ViewpointId};
use crate::store::{Graph, Result, StoreError, Term, Triple};
use crate::taxonomy::{TaxonomyError, EVENT_TYPE_PREDICATE, TRANSFORM_PREFIX};

/// A query position: a constant or a named variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot<T> {
    Var(String),
    Const(T),
}

impl<T> Slot<T> {
    pub fn var(name: impl Into<String>) -> Self {
        Slot::Var(name.into())
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            Slot::Var(v) => Some(v),
            Slot::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPattern {
    pub subject: Slot<EventId>,
    pub predicate: Slot<PredicateId>,
    pub object: Slot<Term>,
    pub viewpoint: ViewpointId,
    /// Let a predicate constant match its refinements.
    pub match_refinements: bool,
}

impl QueryPattern {
    pub fn new(
        subject: Slot<EventId>,
        predicate: Slot<PredicateId>,
        object: Slot<Term>,
        viewpoint: impl Into<ViewpointId>,
    ) -> Self {
        Self {
            subject,
            predicate,
            object,
            viewpoint: viewpoint.into(),
            match_refinements: true,
        }
    }

    pub fn without_refinements(mut self) -> Self {
        self.match_refinements = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    Incompatible(IncompatibilityEvidence),
    NotValidHere { claim: Triple, viewpoint: ViewpointId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "evidence", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Incompatible(Vec<Finding>),
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FusionResult {
    pub matched: Vec<Triple>,
    /// The claims among `matched`.
    pub claims: Vec<Triple>,
    pub verdict: Verdict,
}

impl FusionResult {
    /// Variable bindings per matched triple, in match order.
    pub fn bindings(&self, q: &QueryPattern) -> Vec<BTreeMap<String, String>> {
        self.matched
            .iter()
            .map(|t| {
                let mut row = BTreeMap::new();
                if let Slot::Var(v) = &q.subject {
                    row.insert(v.clone(), t.subject.to_string());
                }
                if let Slot::Var(v) = &q.predicate {
                    row.insert(v.clone(), t.predicate.to_string());
                }
                if let Slot::Var(v) = &q.object {
                    row.insert(v.clone(), t.object.to_string());
                }
                row
            })
            .collect()
    }
}

/// Tuning knobs that must not change results, only cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    /// Skip pairwise checks for path-related viewpoints under WTAH.
    pub skip_path_related: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            skip_path_related: true,
        }
    }
}

/// Under WTAH, claims attributed to distinct viewpoints on one root-to-leaf
/// path are compatible in any consistent graph, so their check can be
/// skipped. Claims at the same viewpoint, or under VPH, always need a check.
pub fn can_skip_check(a: &Triple, b: &Triple, h: &ViewpointHierarchy) -> bool {
    if h.variant() != Variant::Wtah {
        return false;
    }
    match (&a.viewpoint, &b.viewpoint) {
        (Some(va), Some(vb)) => va != vb && h.path_related(va, vb).unwrap_or(false),
        _ => false,
    }
}

fn slot_matches<T: PartialEq>(slot: &Slot<T>, value: &T) -> bool {
    match slot {
        Slot::Var(_) => true,
        Slot::Const(c) => c == value,
    }
}

/// Variables repeated across positions must bind equal tokens.
fn repeated_vars_agree(q: &QueryPattern, t: &Triple) -> bool {
    let values = [
        (q.subject.var_name(), t.subject.to_string()),
        (q.predicate.var_name(), t.predicate.to_string()),
        (q.object.var_name(), t.object.to_string()),
    ];
    let mut seen: BTreeMap<&str, &String> = BTreeMap::new();
    values.iter().all(|(name, value)| match name {
        Some(name) => *seen.entry(name).or_insert(value) == value,
        None => true,
    })
}

fn predicate_matches(g: &Graph, q: &QueryPattern, p: &PredicateId) -> bool {
    match &q.predicate {
        Slot::Var(_) => true,
        Slot::Const(wanted) if !q.match_refinements => wanted == p,
        Slot::Const(wanted) => {
            let taxonomy = g.taxonomy();
            wanted == p
                || taxonomy.subsumes(wanted, p).unwrap_or(false)
                || taxonomy
                    .subsumes(wanted, taxonomy.semantic_base(p))
                    .unwrap_or(false)
        }
    }
}

/// A claim counts at `v` only if its predicate belongs to the vocabulary of
/// the event's type as resolved at `v`.
fn defined_for_type(g: &Graph, t: &Triple, v: &ViewpointId) -> bool {
    if t.viewpoint.is_none()
        || t.predicate.as_str() == format!("{TRANSFORM_PREFIX}{EVENT_TYPE_PREDICATE}")
    {
        return true;
    }
    g.resolved_types(&t.subject, v)
        .iter()
        .any(|ty| g.taxonomy().in_vocabulary(ty, &t.predicate).unwrap_or(false))
}

fn verdict_for(g: &Graph, claims: &[&Triple], v: &ViewpointId, options: QueryOptions) -> Result<Verdict> {
    let mut findings = Vec::new();
    for c in claims {
        if !g.claim_valid_at(c, v)? {
            findings.push(Finding::NotValidHere {
                claim: (*c).clone(),
                viewpoint: v.clone(),
            });
        }
    }
    for (i, a) in claims.iter().enumerate() {
        for b in &claims[i + 1..] {
            if options.skip_path_related && can_skip_check(a, b, g.hierarchy()) {
                continue;
            }
            if !(g.claim_valid_at(a, v)? && g.claim_valid_at(b, v)?) {
                continue;
            }
            if let Some(e) = contradicts(a, b, g) {
                findings.push(Finding::Incompatible(e));
            }
        }
    }
    Ok(if findings.is_empty() {
        Verdict::Consistent
    } else {
        Verdict::Incompatible(findings)
    })
}

pub fn query(g: &Graph, q: &QueryPattern) -> Result<FusionResult> {
    query_with(g, q, QueryOptions::default())
}

pub fn query_with(g: &Graph, q: &QueryPattern, options: QueryOptions) -> Result<FusionResult> {
    if let Slot::Const(p) = &q.predicate {
        if !g.taxonomy().contains(p) {
            return Err(TaxonomyError::UnknownPredicate(p.clone()).into());
        }
    }
    let v = &q.viewpoint;
    let mut matched = Vec::new();
    for t in g.triples_for(v)? {
        if slot_matches(&q.subject, &t.subject)
            && predicate_matches(g, q, &t.predicate)
            && slot_matches(&q.object, &t.object)
            && repeated_vars_agree(q, t)
            && defined_for_type(g, t, v)
        {
            matched.push(t);
        }
    }
    let claims: Vec<&Triple> = matched.iter().copied().filter(|t| t.is_claim()).collect();
    let verdict = verdict_for(g, &claims, v, options)?;
    Ok(FusionResult {
        claims: claims.into_iter().cloned().collect(),
        matched: matched.into_iter().cloned().collect(),
        verdict,
    })
}

/// Fuses the given claims at `v`. The result is consistent iff every claim
/// is valid at `v` and no pair contradicts.
pub fn fuse<'a, I>(g: &Graph, claims: I, v: &ViewpointId) -> Result<FusionResult>
where
    I: IntoIterator<Item = &'a Triple>,
{
    if !g.hierarchy().contains(v) {
        return Err(StoreError::UnknownViewpoint(v.clone()));
    }
    let mut claims: Vec<&Triple> = claims.into_iter().collect();
    claims.sort();
    claims.dedup();
    for c in &claims {
        if !g.contains(c) {
            return Err(StoreError::NotFound(Box::new((*c).clone())));
        }
    }
    let verdict = verdict_for(g, &claims, v, QueryOptions { skip_path_related: false })?;
    let owned: Vec<Triple> = claims.into_iter().cloned().collect();
    Ok(FusionResult {
        matched: owned.clone(),
        claims: owned,
        verdict,
    })
}
