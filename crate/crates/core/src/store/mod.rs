//! The graph itself: an event registry, the fact set and the claim set, plus
//! viewpoint-resolved views over them.
//!
//! Every mutation runs inside a [`Transaction`] on a private copy of the
//! graph. The copy replaces the graph only if the commit checks pass, so a
//! rejected operation never leaves partial state behind.

mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, PoisonError, RwLock};

use thiserror::Error;

use crate::consistency::{self, CascadePolicy, IncompatibilityEvidence};
use crate::hierarchy::{HierarchyError, ViewpointHierarchy};
use crate::ids::{EventId, EventTypeId, PredicateId, ViewpointId};
use crate::taxonomy::{PredicateKind, Taxonomy, TaxonomyError, EVENT_TYPE_PREDICATE, TRANSFORM_PREFIX};

pub use term::{parse_time, unescape, Literal, Term, Triple};

/// Predicate marking the location attribute of an event.
pub const LOCATION_PREDICATE: &str = "location";
/// Root of the participant-role predicates.
pub const PARTICIPANT_PREDICATE: &str = "participant";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("unknown viewpoint `{0}`")]
    UnknownViewpoint(ViewpointId),
    #[error("invalid hierarchy: {0}")]
    Hierarchy(HierarchyError),
    #[error("subject `{0}` is not a registered event")]
    NonEventSubject(EventId),
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("predicate `{predicate}` has kind {kind}: {detail}")]
    KindViolation {
        predicate: PredicateId,
        kind: PredicateKind,
        detail: &'static str,
    },
    #[error("predicate `{predicate}` is not defined for event type `{event_type}`")]
    TypeMismatch {
        predicate: PredicateId,
        event_type: EventTypeId,
    },
    #[error("claim `{claim}` is not permissible for event type `{event_type}`")]
    NotPermissible {
        claim: Box<Triple>,
        event_type: EventTypeId,
    },
    #[error("claim is incompatible: {}", render_evidence(.0))]
    IncompatibleClaim(Vec<IncompatibilityEvidence>),
    #[error("insertion would invalidate {} descendant claim(s); retry with cascade", .0.len())]
    CascadeRequired(Vec<Triple>),
    #[error("triple `{0}` is not in the graph")]
    NotFound(Box<Triple>),
    #[error("claim `{claim}` has no `{counterpart}` counterpart at the same viewpoint")]
    DanglingInverseRole {
        claim: Box<Triple>,
        counterpart: PredicateId,
    },
    #[error("event `{event}` has {} types at `{viewpoint}`: {types:?}", .types.len())]
    AmbiguousType {
        event: EventId,
        viewpoint: ViewpointId,
        types: Vec<EventTypeId>,
    },
    #[error("event `{event}` already has type `{existing}`")]
    ConflictingEventType {
        event: EventId,
        existing: EventTypeId,
    },
    #[error("event `{0}` still has statements")]
    EventInUse(EventId),
    #[error("invalid object: {0}")]
    InvalidObject(String),
}

fn render_evidence(evidence: &[IncompatibilityEvidence]) -> String {
    evidence
        .iter()
        .map(|e| e.explanation.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

impl From<HierarchyError> for StoreError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::UnknownNode(v) => StoreError::UnknownViewpoint(v),
            other => StoreError::Hierarchy(other),
        }
    }
}

/// Presence of the attributes every complete event needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventCompleteness {
    pub has_time: bool,
    pub has_location: bool,
    pub has_participant: bool,
}

impl EventCompleteness {
    pub fn is_complete(&self) -> bool {
        self.has_time && self.has_location && self.has_participant
    }
}

/// What a committed mutation changed beyond the requested operation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommitReport {
    /// Claims removed by WTAH cascades.
    pub cascaded: Vec<Triple>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    taxonomy: Arc<Taxonomy>,
    hierarchy: Arc<ViewpointHierarchy>,
    events: BTreeMap<EventId, EventTypeId>,
    facts: BTreeSet<Triple>,
    claims: BTreeSet<Triple>,
}

impl Graph {
    pub fn new(taxonomy: Arc<Taxonomy>, hierarchy: Arc<ViewpointHierarchy>) -> Self {
        Self {
            taxonomy,
            hierarchy,
            events: BTreeMap::new(),
            facts: BTreeSet::new(),
            claims: BTreeSet::new(),
        }
    }

    pub fn taxonomy(&self) -> &Arc<Taxonomy> {
        &self.taxonomy
    }

    pub fn hierarchy(&self) -> &Arc<ViewpointHierarchy> {
        &self.hierarchy
    }

    pub fn facts(&self) -> &BTreeSet<Triple> {
        &self.facts
    }

    pub fn claims(&self) -> &BTreeSet<Triple> {
        &self.claims
    }

    pub fn events(&self) -> &BTreeMap<EventId, EventTypeId> {
        &self.events
    }

    pub fn is_event(&self, ev: &EventId) -> bool {
        self.events.contains_key(ev)
    }

    pub fn base_type(&self, ev: &EventId) -> Result<&EventTypeId> {
        self.events
            .get(ev)
            .ok_or_else(|| StoreError::UnknownEvent(ev.clone()))
    }

    pub fn contains(&self, t: &Triple) -> bool {
        if t.is_claim() {
            self.claims.contains(t)
        } else {
            self.facts.contains(t)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.claims.is_empty()
    }

    /// Claims attributed exactly to `v`.
    pub fn claims_of<'a>(&'a self, v: &'a ViewpointId) -> impl Iterator<Item = &'a Triple> + 'a {
        self.claims
            .iter()
            .filter(move |c| c.viewpoint.as_ref() == Some(v))
    }

    /// Whether `claim` holds at `v` under the hierarchy variant.
    pub fn claim_valid_at(&self, claim: &Triple, v: &ViewpointId) -> Result<bool> {
        let Some(cv) = &claim.viewpoint else {
            return Ok(true);
        };
        Ok(self.hierarchy.is_valid_at(cv, v)?)
    }

    /// Claims valid at `v`, including those propagated from ancestors.
    pub fn claims_valid_at(&self, v: &ViewpointId) -> Result<Vec<&Triple>> {
        if !self.hierarchy.contains(v) {
            return Err(StoreError::UnknownViewpoint(v.clone()));
        }
        let mut out = Vec::new();
        for c in &self.claims {
            if self.claim_valid_at(c, v)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Facts plus the claims valid at `v`, in canonical order.
    pub fn triples_for(&self, v: &ViewpointId) -> Result<Vec<&Triple>> {
        let mut out: Vec<&Triple> = self.facts.iter().collect();
        out.extend(self.claims_valid_at(v)?);
        out.sort();
        Ok(out)
    }

    /// Event types assigned to `ev` by `attrib_event_type` claims valid at `v`.
    fn type_claims_at(&self, ev: &EventId, v: &ViewpointId) -> Result<BTreeSet<EventTypeId>> {
        let type_attribution = PredicateId::new(format!("{TRANSFORM_PREFIX}{EVENT_TYPE_PREDICATE}"));
        let mut types = BTreeSet::new();
        for c in &self.claims {
            if &c.subject == ev && c.predicate == type_attribution && self.claim_valid_at(c, v)? {
                if let Some(t) = c.object.as_iri() {
                    types.insert(EventTypeId::from(t));
                }
            }
        }
        Ok(types)
    }

    /// The type of `ev` as seen from `v`: an `attrib_event_type` claim valid
    /// at `v` overrides the base type.
    pub fn event_type_in(&self, ev: &EventId, v: &ViewpointId) -> Result<EventTypeId> {
        let base = self.base_type(ev)?;
        if !self.hierarchy.contains(v) {
            return Err(StoreError::UnknownViewpoint(v.clone()));
        }
        let types = self.type_claims_at(ev, v)?;
        match types.len() {
            0 => Ok(base.clone()),
            1 => Ok(types.into_iter().next().expect("one type")),
            _ => Err(StoreError::AmbiguousType {
                event: ev.clone(),
                viewpoint: v.clone(),
                types: types.into_iter().collect(),
            }),
        }
    }

    /// Every type `ev` may have at `v`: the overrides if any, else the base
    /// type. Never fails on ambiguity; empty for unknown events.
    pub fn resolved_types(&self, ev: &EventId, v: &ViewpointId) -> BTreeSet<EventTypeId> {
        let Some(base) = self.events.get(ev) else {
            return BTreeSet::new();
        };
        match self.type_claims_at(ev, v) {
            Ok(types) if !types.is_empty() => types,
            _ => BTreeSet::from([base.clone()]),
        }
    }

    pub fn completeness(&self, ev: &EventId) -> Result<EventCompleteness> {
        self.base_type(ev)?;
        let participant = PredicateId::from(PARTICIPANT_PREDICATE);
        let location = PredicateId::from(LOCATION_PREDICATE);
        let mut out = EventCompleteness::default();
        for t in self.facts.iter().chain(&self.claims).filter(|t| &t.subject == ev) {
            if t.viewpoint.is_none() {
                out.has_time |= matches!(&t.object, Term::Literal(l) if l.is_time());
                out.has_location |= t.predicate == location;
            }
            let base = self.taxonomy.semantic_base(&t.predicate);
            out.has_participant |= self.taxonomy.contains(&participant)
                && self.taxonomy.subsumes(&participant, base).unwrap_or(false);
        }
        Ok(out)
    }

    /// Checks predicate kind, viewpoint, subject and object of `t` against the
    /// vocabulary and event registry, without any consistency reasoning.
    fn validate(&self, t: &Triple) -> Result<()> {
        let kind = self.taxonomy.kind(&t.predicate)?;
        match (&t.viewpoint, kind.is_attribution()) {
            (Some(v), true) => {
                if !self.hierarchy.contains(v) {
                    return Err(StoreError::UnknownViewpoint(v.clone()));
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err(StoreError::KindViolation {
                    predicate: t.predicate.clone(),
                    kind,
                    detail: "facts cannot carry a viewpoint",
                })
            }
            (None, true) => {
                return Err(StoreError::KindViolation {
                    predicate: t.predicate.clone(),
                    kind,
                    detail: "claims need a viewpoint",
                })
            }
        }
        if t.predicate.as_str() == EVENT_TYPE_PREDICATE {
            let ty = t
                .object
                .as_iri()
                .ok_or_else(|| StoreError::InvalidObject("event types are tokens".into()))?;
            let ty = EventTypeId::from(ty);
            if !self.taxonomy.has_event_type(&ty) {
                return Err(TaxonomyError::UnknownEventType(ty).into());
            }
            return match self.events.get(&t.subject) {
                Some(existing) if existing != &ty => Err(StoreError::ConflictingEventType {
                    event: t.subject.clone(),
                    existing: existing.clone(),
                }),
                _ => Ok(()),
            };
        }
        let base = self
            .events
            .get(&t.subject)
            .ok_or_else(|| StoreError::NonEventSubject(t.subject.clone()))?;
        if kind == PredicateKind::Parameterized {
            let entry = self.taxonomy.entry(&t.predicate)?;
            let defined = entry.scope.contains(base)
                || self
                    .taxonomy
                    .refinements()
                    .any(|e| e.child == t.predicate && &e.event_type == base);
            if !defined {
                return Err(StoreError::TypeMismatch {
                    predicate: t.predicate.clone(),
                    event_type: base.clone(),
                });
            }
        }
        if t.predicate.as_str() == format!("{TRANSFORM_PREFIX}{EVENT_TYPE_PREDICATE}") {
            let ty = t
                .object
                .as_iri()
                .ok_or_else(|| StoreError::InvalidObject("event types are tokens".into()))?;
            if !self.taxonomy.has_event_type(&ty.into()) {
                return Err(TaxonomyError::UnknownEventType(ty.into()).into());
            }
        }
        Ok(())
    }

    /// Claims at `ALL` whose predicate came from a transformation are facts
    /// about the underlying regular predicate.
    fn promote(&self, t: Triple) -> Triple {
        match &t.viewpoint {
            Some(v) if v.is_all() => match self.taxonomy.reverse_transform(&t.predicate) {
                Some(regular) => Triple::fact(t.subject, regular.clone(), t.object),
                None => t,
            },
            _ => t,
        }
    }

    /// Adds `t` after shape validation only. Used by the parser and to build
    /// deliberately inconsistent graphs; normal writes go through
    /// [`Graph::transaction`].
    pub fn insert_unchecked(&mut self, t: Triple) -> Result<()> {
        let t = self.promote(t);
        self.validate(&t)?;
        self.put(t);
        Ok(())
    }

    fn put(&mut self, t: Triple) {
        if t.is_claim() {
            self.claims.insert(t);
        } else {
            if t.predicate.as_str() == EVENT_TYPE_PREDICATE {
                let ty = t.object.as_iri().expect("validated").into();
                self.events.insert(t.subject.clone(), ty);
            }
            self.facts.insert(t);
        }
    }

    fn take(&mut self, t: &Triple) -> Result<()> {
        let removed = if t.is_claim() {
            self.claims.remove(t)
        } else {
            self.facts.remove(t)
        };
        if !removed {
            return Err(StoreError::NotFound(Box::new(t.clone())));
        }
        if t.predicate.as_str() == EVENT_TYPE_PREDICATE && t.viewpoint.is_none() {
            let in_use = self
                .facts
                .iter()
                .chain(&self.claims)
                .any(|o| o.subject == t.subject);
            if in_use {
                self.facts.insert(t.clone());
                return Err(StoreError::EventInUse(t.subject.clone()));
            }
            self.events.remove(&t.subject);
        }
        Ok(())
    }

    /// Runs `f` against a private copy and swaps it in if every operation
    /// and the commit checks succeed.
    pub fn transaction<T>(
        &mut self,
        f: impl FnOnce(&mut Transaction) -> Result<T>,
    ) -> Result<(T, CommitReport)> {
        let mut tx = Transaction {
            graph: self.clone(),
            touched: BTreeSet::new(),
            retyped: false,
            report: CommitReport::default(),
        };
        let out = f(&mut tx)?;
        let (graph, report) = tx.commit()?;
        *self = graph;
        Ok((out, report))
    }

    pub fn insert_fact(&mut self, t: Triple) -> Result<()> {
        self.transaction(|tx| tx.insert_fact(t)).map(|_| ())
    }

    pub fn insert_claim(&mut self, t: Triple, cascade: CascadePolicy) -> Result<CommitReport> {
        self.transaction(|tx| tx.insert_claim(t, cascade))
            .map(|(_, r)| r)
    }

    /// Inserts a fact or a claim depending on whether `t` has a viewpoint.
    pub fn insert(&mut self, t: Triple, cascade: CascadePolicy) -> Result<CommitReport> {
        self.transaction(|tx| tx.insert(t, cascade)).map(|(_, r)| r)
    }

    pub fn delete(&mut self, t: &Triple) -> Result<()> {
        self.transaction(|tx| tx.delete(t)).map(|_| ())
    }

    pub fn update(&mut self, old: &Triple, new: Triple, cascade: CascadePolicy) -> Result<CommitReport> {
        self.transaction(|tx| tx.update(old, new, cascade))
            .map(|(_, r)| r)
    }

    /// Registers `ev` with base type `event_type`.
    pub fn register_event(
        &mut self,
        ev: impl Into<EventId>,
        event_type: impl Into<EventTypeId>,
    ) -> Result<()> {
        let ty: EventTypeId = event_type.into();
        self.insert_fact(Triple::fact(
            ev,
            EVENT_TYPE_PREDICATE,
            Term::iri(ty.as_str()),
        ))
    }

    /// Claims with no equal statement at a strict ancestor viewpoint. Under
    /// WTAH these carry all the information; under VPH this is every claim.
    pub fn minimal_claims(&self) -> Vec<&Triple> {
        let h = &self.hierarchy;
        self.claims
            .iter()
            .filter(|c| {
                let v = c.viewpoint.as_ref().expect("claims carry viewpoints");
                let ancestors = h.ancestors(v).expect("validated viewpoint");
                !ancestors.iter().any(|a| {
                    let shadow = Triple {
                        viewpoint: Some(a.clone()),
                        ..(*c).clone()
                    };
                    self.claims.contains(&shadow) && h.is_valid_at(a, v).unwrap_or(false)
                })
            })
            .collect()
    }

    /// Same events, facts and per-viewpoint validity of every claim.
    pub fn same_content(&self, other: &Graph) -> bool {
        self.events == other.events
            && self.facts == other.facts
            && self.minimal_claims() == other.minimal_claims()
    }
}

/// A mutation batch over a private copy of the graph.
pub struct Transaction {
    graph: Graph,
    /// `(subject, viewpoint)` keys whose inverse-role pairing must be
    /// re-checked at commit.
    touched: BTreeSet<(EventId, ViewpointId)>,
    retyped: bool,
    report: CommitReport,
}

impl Transaction {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    fn touch(&mut self, t: &Triple) {
        if let Some(v) = &t.viewpoint {
            self.touched.insert((t.subject.clone(), v.clone()));
            if t.predicate.as_str() == format!("{TRANSFORM_PREFIX}{EVENT_TYPE_PREDICATE}") {
                self.retyped = true;
            }
        }
    }

    pub fn insert_fact(&mut self, t: Triple) -> Result<()> {
        if t.viewpoint.is_some() {
            let kind = self.graph.taxonomy.kind(&t.predicate)?;
            return Err(StoreError::KindViolation {
                predicate: t.predicate,
                kind,
                detail: "facts cannot carry a viewpoint",
            });
        }
        let kind = self.graph.taxonomy.kind(&t.predicate)?;
        if kind.is_attribution() {
            return Err(StoreError::KindViolation {
                predicate: t.predicate,
                kind,
                detail: "facts need a REGULAR or PARAMETERIZED predicate",
            });
        }
        self.graph.validate(&t)?;
        self.graph.put(t);
        Ok(())
    }

    /// Admits a claim if it keeps every viewpoint consistent. Conflicts with
    /// claims strictly below the claim's viewpoint are resolved according to
    /// `cascade`.
    pub fn insert_claim(&mut self, t: Triple, cascade: CascadePolicy) -> Result<()> {
        let Some(v) = t.viewpoint.clone() else {
            let kind = self.graph.taxonomy.kind(&t.predicate)?;
            return Err(StoreError::KindViolation {
                predicate: t.predicate,
                kind,
                detail: "claims need a viewpoint",
            });
        };
        self.graph.validate(&t)?;
        let event_type = self.graph.event_type_in(&t.subject, &v)?;
        if !self
            .graph
            .taxonomy
            .permissible(&event_type, &t.predicate, &v)?
        {
            return Err(StoreError::NotPermissible {
                claim: Box::new(t),
                event_type,
            });
        }
        let t = self.graph.promote(t);
        if !t.is_claim() {
            return self.insert_fact(t);
        }
        if self.graph.claims.contains(&t) {
            return Ok(());
        }
        let victims = consistency::admit_insertion(&self.graph, &t, cascade)?;
        for victim in victims {
            self.graph.take(&victim)?;
            self.touch(&victim);
            self.report.cascaded.push(victim);
        }
        self.touch(&t);
        self.graph.put(t);
        Ok(())
    }

    pub fn insert(&mut self, t: Triple, cascade: CascadePolicy) -> Result<()> {
        if t.is_claim() {
            self.insert_claim(t, cascade)
        } else {
            self.insert_fact(t)
        }
    }

    pub fn delete(&mut self, t: &Triple) -> Result<()> {
        self.graph.take(t)?;
        self.touch(t);
        Ok(())
    }

    /// Delete followed by insert, atomic with the rest of the transaction.
    pub fn update(&mut self, old: &Triple, new: Triple, cascade: CascadePolicy) -> Result<()> {
        self.delete(old)?;
        self.insert(new, cascade)
    }

    fn commit(self) -> Result<(Graph, CommitReport)> {
        let g = &self.graph;
        for (subject, viewpoint) in &self.touched {
            let types = g.resolved_types(subject, viewpoint);
            for claim in g
                .claims_of(viewpoint)
                .filter(|c| &c.subject == subject)
            {
                for constraint in g.taxonomy.inverse_roles_of(&claim.predicate) {
                    if !constraint.applies_to(&types) {
                        continue;
                    }
                    let partner = constraint.partner_of(&claim.predicate).expect("operand");
                    let paired = g.claims_of(viewpoint).any(|d| {
                        &d.subject == subject && &d.predicate == partner && d.object != claim.object
                    });
                    if !paired {
                        return Err(StoreError::DanglingInverseRole {
                            claim: Box::new(claim.clone()),
                            counterpart: partner.clone(),
                        });
                    }
                }
            }
        }
        if self.retyped {
            // Scoped constraints follow the resolved event type, so a type
            // change can create contradictions between untouched claims.
            let report = consistency::check_graph(g);
            if !report.consistent {
                let evidence = report.viewpoints.into_values().flat_map(|v| v.violations).collect();
                return Err(StoreError::IncompatibleClaim(evidence));
            }
        }
        Ok((self.graph, self.report))
    }
}

/// Single-writer, multi-reader handle. Readers get immutable snapshots;
/// writers serialize on the lock and publish a new snapshot on commit.
#[derive(Debug, Clone)]
pub struct SharedGraph {
    inner: Arc<RwLock<Arc<Graph>>>,
}

impl SharedGraph {
    pub fn new(graph: Graph) -> Self {
        Self {
            inner: Arc::new(RwLock::new(Arc::new(graph))),
        }
    }

    pub fn snapshot(&self) -> Arc<Graph> {
        self.inner
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .clone()
    }

    pub fn write<T>(
        &self,
        f: impl FnOnce(&mut Transaction) -> Result<T>,
    ) -> Result<(T, CommitReport)> {
        let mut guard = self.inner.write().unwrap_or_else(PoisonError::into_inner);
        let mut next = Graph::clone(&guard);
        let out = next.transaction(f)?;
        *guard = Arc::new(next);
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
