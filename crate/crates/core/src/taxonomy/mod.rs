//! Predicate vocabulary: kinds, refinements, transformations, negations,
//! attribution constraints, consistency rules and event-type permissibility.
//!
//! A [`Taxonomy`] is built once (usually from a config file, see
//! [`Taxonomy::from_config_str`]) and then shared read-only behind an `Arc`.

mod config;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::ids::{is_local_name, EventTypeId, PredicateId, ViewpointId};

/// Built-in regular predicate assigning the base type of an event.
pub const EVENT_TYPE_PREDICATE: &str = "event_type";
/// Prefix of attributions produced by [`Taxonomy::transform_regular`].
pub const TRANSFORM_PREFIX: &str = "attrib_";
/// Prefix of negated attributions produced by [`Taxonomy::negate_predicate`].
pub const NEGATION_PREFIX: &str = "not_";
/// Names used by the wire format; they can never be vocabulary entries.
pub const RESERVED_NAMES: [&str; 2] = ["singleton_property_of", "acc_to_vp"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaxonomyError {
    #[error("predicate `{0}` is already registered")]
    DuplicateName(PredicateId),
    #[error("`{0}` contains the reserved character `#`")]
    ReservedCharacter(String),
    #[error("`{0}` is a reserved name")]
    ReservedName(String),
    #[error("`{0}` is not a valid predicate name")]
    InvalidName(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(PredicateId),
    #[error("unknown event type `{0}`")]
    UnknownEventType(EventTypeId),
    #[error("refinement {parent} > {child} would create a cycle")]
    CycleDetected { parent: PredicateId, child: PredicateId },
    #[error("predicate `{predicate}` has kind {kind}, expected {expected}")]
    KindViolation {
        predicate: PredicateId,
        kind: PredicateKind,
        expected: &'static str,
    },
    #[error("constraint relates `{0}` to itself")]
    SelfConstraint(PredicateId),
    #[error("predicate `{0}` must be usable with at least one event type")]
    EmptyScope(PredicateId),
    #[error("rule `{rule}`: {reason}")]
    InvalidRule { rule: String, reason: String },
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T, E = TaxonomyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PredicateKind {
    Regular,
    Parameterized,
    Attribution,
    NegatedAttribution,
}

impl PredicateKind {
    /// Kinds that may be passed to [`Taxonomy::register_predicate`].
    pub fn is_base(self) -> bool {
        !matches!(self, PredicateKind::NegatedAttribution)
    }

    /// Kinds whose triples carry a viewpoint, i.e. claims.
    pub fn is_attribution(self) -> bool {
        matches!(self, PredicateKind::Attribution | PredicateKind::NegatedAttribution)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Some(PredicateKind::Regular),
            "parameterized" => Some(PredicateKind::Parameterized),
            "attribution" => Some(PredicateKind::Attribution),
            _ => None,
        }
    }
}

impl std::fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PredicateKind::Regular => "REGULAR",
            PredicateKind::Parameterized => "PARAMETERIZED",
            PredicateKind::Attribution => "ATTRIBUTION",
            PredicateKind::NegatedAttribution => "NEGATED_ATTRIBUTION",
        })
    }
}

/// Event types a predicate may be used with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventScope {
    Universal,
    Types(BTreeSet<EventTypeId>),
}

impl EventScope {
    pub fn types<I, T>(types: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<EventTypeId>,
    {
        EventScope::Types(types.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, event_type: &EventTypeId) -> bool {
        match self {
            EventScope::Universal => true,
            EventScope::Types(types) => types.contains(event_type),
        }
    }
}

/// Viewpoints permitted for an event type (`V^ET`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewpointScope {
    Any,
    Only(BTreeSet<ViewpointId>),
}

/// How a derived predicate was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    /// `attrib_p` built from the regular predicate `p`.
    Transform(PredicateId),
    /// `not_p` built from the attribution `p`.
    Negation(PredicateId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateEntry {
    pub id: PredicateId,
    pub kind: PredicateKind,
    pub scope: EventScope,
    pub derived_from: Option<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RefinementEdge {
    pub parent: PredicateId,
    pub child: PredicateId,
    pub event_type: EventTypeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintKind {
    MutualExclusion,
    InverseRole,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstraintKind::MutualExclusion => "XOR",
            ConstraintKind::InverseRole => "INV",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AttributionConstraint {
    pub kind: ConstraintKind,
    pub left: PredicateId,
    pub right: PredicateId,
    pub event_type: Option<EventTypeId>,
}

impl AttributionConstraint {
    pub fn mutual_exclusion(left: impl Into<PredicateId>, right: impl Into<PredicateId>) -> Self {
        Self {
            kind: ConstraintKind::MutualExclusion,
            left: left.into(),
            right: right.into(),
            event_type: None,
        }
    }

    pub fn inverse_role(left: impl Into<PredicateId>, right: impl Into<PredicateId>) -> Self {
        Self {
            kind: ConstraintKind::InverseRole,
            left: left.into(),
            right: right.into(),
            event_type: None,
        }
    }

    pub fn scoped(mut self, event_type: impl Into<EventTypeId>) -> Self {
        self.event_type = Some(event_type.into());
        self
    }

    /// True if the constraint relates `a` and `b`, in either order.
    pub fn relates(&self, a: &PredicateId, b: &PredicateId) -> bool {
        (&self.left == a && &self.right == b) || (&self.left == b && &self.right == a)
    }

    /// The other operand, if `p` is one of them.
    pub fn partner_of(&self, p: &PredicateId) -> Option<&PredicateId> {
        if &self.left == p {
            Some(&self.right)
        } else if &self.right == p {
            Some(&self.left)
        } else {
            None
        }
    }

    pub fn applies_to(&self, event_types: &BTreeSet<EventTypeId>) -> bool {
        self.event_type
            .as_ref()
            .is_none_or(|scope| event_types.contains(scope))
    }
}

impl std::fmt::Display for AttributionConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.kind, self.left, self.right)?;
        if let Some(et) = &self.event_type {
            write!(f, " @ {et}")?;
        }
        Ok(())
    }
}

/// One side of an `INCOMPAT` rule: `(?subject predicate ?object)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RulePattern {
    pub subject: String,
    pub predicate: PredicateId,
    pub object: String,
}

/// Two claim patterns that must not both hold in one viewpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConsistencyRule {
    pub id: String,
    pub event_type: Option<EventTypeId>,
    pub first: RulePattern,
    pub second: RulePattern,
}

impl ConsistencyRule {
    pub fn shares_variable(&self) -> bool {
        let first = [&self.first.subject, &self.first.object];
        [&self.second.subject, &self.second.object]
            .iter()
            .any(|v| first.contains(v))
    }

    pub fn applies_to(&self, event_types: &BTreeSet<EventTypeId>) -> bool {
        self.event_type
            .as_ref()
            .is_none_or(|scope| event_types.contains(scope))
    }
}

impl std::fmt::Display for ConsistencyRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: INCOMPAT (?{} {} ?{}) (?{} {} ?{})",
            self.id,
            self.first.subject,
            self.first.predicate,
            self.first.object,
            self.second.subject,
            self.second.predicate,
            self.second.object
        )?;
        if let Some(et) = &self.event_type {
            write!(f, " @ {et}")?;
        }
        Ok(())
    }
}

/// The predicate vocabulary of a graph.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    predicates: BTreeMap<PredicateId, PredicateEntry>,
    refinements: BTreeSet<RefinementEdge>,
    children: BTreeMap<PredicateId, BTreeSet<PredicateId>>,
    constraints: Vec<AttributionConstraint>,
    rules: Vec<ConsistencyRule>,
    event_types: BTreeSet<EventTypeId>,
    permits: BTreeMap<EventTypeId, ViewpointScope>,
    transforms: BTreeMap<PredicateId, PredicateId>,
    negations: BTreeMap<PredicateId, PredicateId>,
}

impl Default for Taxonomy {
    fn default() -> Self {
        Self::new()
    }
}

impl Taxonomy {
    /// An empty vocabulary holding only the built-in `event_type` predicate.
    pub fn new() -> Self {
        let mut taxonomy = Self {
            predicates: BTreeMap::new(),
            refinements: BTreeSet::new(),
            children: BTreeMap::new(),
            constraints: Vec::new(),
            rules: Vec::new(),
            event_types: BTreeSet::new(),
            permits: BTreeMap::new(),
            transforms: BTreeMap::new(),
            negations: BTreeMap::new(),
        };
        let id = PredicateId::from(EVENT_TYPE_PREDICATE);
        taxonomy.predicates.insert(
            id.clone(),
            PredicateEntry {
                id,
                kind: PredicateKind::Regular,
                scope: EventScope::Universal,
                derived_from: None,
            },
        );
        taxonomy
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        config::parse(text)
    }

    fn validate_name(name: &str) -> Result<()> {
        if name.contains('#') {
            return Err(TaxonomyError::ReservedCharacter(name.to_owned()));
        }
        if RESERVED_NAMES.contains(&name) {
            return Err(TaxonomyError::ReservedName(name.to_owned()));
        }
        if !is_local_name(name) {
            return Err(TaxonomyError::InvalidName(name.to_owned()));
        }
        Ok(())
    }

    fn insert_entry(&mut self, entry: PredicateEntry) -> Result<PredicateId> {
        if self.predicates.contains_key(&entry.id) {
            return Err(TaxonomyError::DuplicateName(entry.id));
        }
        if let EventScope::Types(types) = &entry.scope {
            self.event_types.extend(types.iter().cloned());
        }
        let id = entry.id.clone();
        self.predicates.insert(id.clone(), entry);
        debug_assert!(self.check_invariants().is_ok());
        Ok(id)
    }

    pub fn register_predicate(
        &mut self,
        name: &str,
        kind: PredicateKind,
        scope: EventScope,
    ) -> Result<PredicateId> {
        Self::validate_name(name)?;
        let id = PredicateId::from(name);
        if !kind.is_base() {
            return Err(TaxonomyError::KindViolation {
                predicate: id,
                kind,
                expected: "a base kind",
            });
        }
        if self.predicates.contains_key(&id) {
            return Err(TaxonomyError::DuplicateName(id));
        }
        let scope = match (kind, scope) {
            (PredicateKind::Regular, _) => EventScope::Universal,
            (_, EventScope::Types(t)) if t.is_empty() => return Err(TaxonomyError::EmptyScope(id)),
            (_, scope) => scope,
        };
        self.insert_entry(PredicateEntry {
            id,
            kind,
            scope,
            derived_from: None,
        })
    }

    pub fn declare_event_type(&mut self, event_type: impl Into<EventTypeId>) -> EventTypeId {
        let et = event_type.into();
        self.event_types.insert(et.clone());
        et
    }

    pub fn add_refinement(
        &mut self,
        parent: &PredicateId,
        child: &PredicateId,
        event_type: impl Into<EventTypeId>,
    ) -> Result<RefinementEdge> {
        let parent_kind = self.kind(parent)?;
        let child_kind = self.kind(child)?;
        if !matches!(
            child_kind,
            PredicateKind::Parameterized | PredicateKind::Attribution
        ) {
            return Err(TaxonomyError::KindViolation {
                predicate: child.clone(),
                kind: child_kind,
                expected: "PARAMETERIZED or ATTRIBUTION",
            });
        }
        if parent_kind == PredicateKind::NegatedAttribution {
            return Err(TaxonomyError::KindViolation {
                predicate: parent.clone(),
                kind: parent_kind,
                expected: "REGULAR, PARAMETERIZED or ATTRIBUTION",
            });
        }
        if self.reaches(child, parent) {
            return Err(TaxonomyError::CycleDetected {
                parent: parent.clone(),
                child: child.clone(),
            });
        }
        let edge = RefinementEdge {
            parent: parent.clone(),
            child: child.clone(),
            event_type: self.declare_event_type(event_type),
        };
        self.children
            .entry(parent.clone())
            .or_default()
            .insert(child.clone());
        self.refinements.insert(edge.clone());
        debug_assert!(self.check_invariants().is_ok());
        Ok(edge)
    }

    /// Maps a regular predicate `p` to the attribution `attrib_p` carrying the
    /// same meaning. Repeated calls return the same id.
    pub fn transform_regular(&mut self, p: &PredicateId) -> Result<PredicateId> {
        let kind = self.kind(p)?;
        if kind != PredicateKind::Regular {
            return Err(TaxonomyError::KindViolation {
                predicate: p.clone(),
                kind,
                expected: "REGULAR",
            });
        }
        if let Some(existing) = self.transforms.get(p) {
            return Ok(existing.clone());
        }
        let id = PredicateId::new(format!("{TRANSFORM_PREFIX}{p}"));
        self.insert_entry(PredicateEntry {
            id: id.clone(),
            kind: PredicateKind::Attribution,
            scope: EventScope::Universal,
            derived_from: Some(Derivation::Transform(p.clone())),
        })?;
        self.transforms.insert(p.clone(), id.clone());
        Ok(id)
    }

    /// Maps an attribution `p` to `not_p`. Repeated calls return the same id;
    /// negating a negation is rejected.
    pub fn negate_predicate(&mut self, p: &PredicateId) -> Result<PredicateId> {
        let kind = self.kind(p)?;
        if kind != PredicateKind::Attribution {
            return Err(TaxonomyError::KindViolation {
                predicate: p.clone(),
                kind,
                expected: "ATTRIBUTION",
            });
        }
        if let Some(existing) = self.negations.get(p) {
            return Ok(existing.clone());
        }
        let scope = self.predicates[p].scope.clone();
        let id = PredicateId::new(format!("{NEGATION_PREFIX}{p}"));
        self.insert_entry(PredicateEntry {
            id: id.clone(),
            kind: PredicateKind::NegatedAttribution,
            scope,
            derived_from: Some(Derivation::Negation(p.clone())),
        })?;
        self.negations.insert(p.clone(), id.clone());
        Ok(id)
    }

    pub fn add_constraint(&mut self, constraint: AttributionConstraint) -> Result<()> {
        if constraint.left == constraint.right {
            return Err(TaxonomyError::SelfConstraint(constraint.left));
        }
        for operand in [&constraint.left, &constraint.right] {
            let kind = self.kind(operand)?;
            if kind != PredicateKind::Attribution {
                return Err(TaxonomyError::KindViolation {
                    predicate: operand.clone(),
                    kind,
                    expected: "ATTRIBUTION",
                });
            }
        }
        if let Some(et) = &constraint.event_type {
            self.event_types.insert(et.clone());
        }
        if !self.constraints.contains(&constraint) {
            self.constraints.push(constraint);
        }
        Ok(())
    }

    pub fn add_rule(&mut self, rule: ConsistencyRule) -> Result<()> {
        for pattern in [&rule.first, &rule.second] {
            let kind = self.kind(&pattern.predicate)?;
            if !kind.is_attribution() {
                return Err(TaxonomyError::InvalidRule {
                    rule: rule.id.clone(),
                    reason: format!("`{}` is not an attribution", pattern.predicate),
                });
            }
        }
        if !rule.shares_variable() {
            return Err(TaxonomyError::InvalidRule {
                rule: rule.id.clone(),
                reason: "patterns share no variable".into(),
            });
        }
        if self.rules.iter().any(|r| r.id == rule.id) {
            return Err(TaxonomyError::InvalidRule {
                rule: rule.id.clone(),
                reason: "duplicate rule id".into(),
            });
        }
        if let Some(et) = &rule.event_type {
            self.event_types.insert(et.clone());
        }
        self.rules.push(rule);
        Ok(())
    }

    /// Restricts the viewpoints that may issue claims on events of `event_type`.
    pub fn permit(&mut self, event_type: impl Into<EventTypeId>, viewpoints: ViewpointScope) {
        let et = self.declare_event_type(event_type);
        self.permits.insert(et, viewpoints);
    }

    pub fn entry(&self, p: &PredicateId) -> Result<&PredicateEntry> {
        self.predicates
            .get(p)
            .ok_or_else(|| TaxonomyError::UnknownPredicate(p.clone()))
    }

    pub fn kind(&self, p: &PredicateId) -> Result<PredicateKind> {
        self.entry(p).map(|e| e.kind)
    }

    pub fn contains(&self, p: &PredicateId) -> bool {
        self.predicates.contains_key(p)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredicateEntry> {
        self.predicates.values()
    }

    pub fn refinements(&self) -> impl Iterator<Item = &RefinementEdge> {
        self.refinements.iter()
    }

    pub fn constraints(&self) -> &[AttributionConstraint] {
        &self.constraints
    }

    pub fn rules(&self) -> &[ConsistencyRule] {
        &self.rules
    }

    pub fn event_types(&self) -> &BTreeSet<EventTypeId> {
        &self.event_types
    }

    pub fn has_event_type(&self, et: &EventTypeId) -> bool {
        self.event_types.contains(et)
    }

    fn reaches(&self, from: &PredicateId, to: &PredicateId) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            for child in self.children.get(p).into_iter().flatten() {
                if child == to {
                    return true;
                }
                if seen.insert(child) {
                    queue.push_back(child);
                }
            }
        }
        false
    }

    /// Refinement reachability, reflexive.
    pub fn subsumes(&self, ancestor: &PredicateId, descendant: &PredicateId) -> Result<bool> {
        self.entry(ancestor)?;
        self.entry(descendant)?;
        Ok(self.reaches(ancestor, descendant))
    }

    /// The predicate whose meaning `p` carries: the regular source of a
    /// transformed attribution, otherwise `p` itself.
    pub fn semantic_base<'a>(&'a self, p: &'a PredicateId) -> &'a PredicateId {
        match self.predicates.get(p).and_then(|e| e.derived_from.as_ref()) {
            Some(Derivation::Transform(source)) => source,
            _ => p,
        }
    }

    /// `attrib_p → p`, if `p` was obtained by transformation.
    pub fn reverse_transform(&self, p: &PredicateId) -> Option<&PredicateId> {
        match self.predicates.get(p)?.derived_from.as_ref()? {
            Derivation::Transform(source) => Some(source),
            Derivation::Negation(_) => None,
        }
    }

    pub fn transformed(&self, regular: &PredicateId) -> Option<&PredicateId> {
        self.transforms.get(regular)
    }

    pub fn negated(&self, attribution: &PredicateId) -> Option<&PredicateId> {
        self.negations.get(attribution)
    }

    /// True if one of the two predicates is the negation of the other.
    pub fn is_negation_pair(&self, a: &PredicateId, b: &PredicateId) -> bool {
        self.negations.get(a) == Some(b) || self.negations.get(b) == Some(a)
    }

    /// The first constraint relating `a` and `b` that applies to any of the
    /// given event types. Symmetric in `a` and `b`.
    pub fn constraint_between(
        &self,
        a: &PredicateId,
        b: &PredicateId,
        event_types: &BTreeSet<EventTypeId>,
    ) -> Option<&AttributionConstraint> {
        self.constraints
            .iter()
            .find(|c| c.relates(a, b) && c.applies_to(event_types))
    }

    /// Inverse-role constraints having `p` as an operand.
    pub fn inverse_roles_of<'a>(
        &'a self,
        p: &'a PredicateId,
    ) -> impl Iterator<Item = &'a AttributionConstraint> + 'a {
        self.constraints
            .iter()
            .filter(move |c| c.kind == ConstraintKind::InverseRole && c.partner_of(p).is_some())
    }

    /// True if `p` belongs to the vocabulary of `event_type`.
    pub fn in_vocabulary(&self, event_type: &EventTypeId, p: &PredicateId) -> Result<bool> {
        Ok(self.entry(p)?.scope.contains(event_type))
    }

    /// True iff the attribution is in the event type's vocabulary and the
    /// viewpoint is permitted for it. `ALL` is permitted only for event types
    /// without a viewpoint restriction.
    pub fn permissible(
        &self,
        event_type: &EventTypeId,
        attribution: &PredicateId,
        viewpoint: &ViewpointId,
    ) -> Result<bool> {
        if !self.event_types.contains(event_type) {
            return Err(TaxonomyError::UnknownEventType(event_type.clone()));
        }
        if !self.in_vocabulary(event_type, attribution)? {
            return Ok(false);
        }
        Ok(match self.permits.get(event_type) {
            None | Some(ViewpointScope::Any) => true,
            Some(ViewpointScope::Only(allowed)) => allowed.contains(viewpoint),
        })
    }

    /// Re-verifies the structural invariants: base kinds partition the
    /// vocabulary, negations mirror attributions, refinements stay acyclic.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for entry in self.predicates.values() {
            match (&entry.kind, &entry.derived_from) {
                (PredicateKind::NegatedAttribution, Some(Derivation::Negation(src))) => {
                    if self.predicates.get(src).map(|e| e.kind) != Some(PredicateKind::Attribution) {
                        return Err(format!("{} negates a non-attribution", entry.id));
                    }
                }
                (PredicateKind::NegatedAttribution, _) => {
                    return Err(format!("{} is a negation without a source", entry.id));
                }
                (PredicateKind::Attribution, Some(Derivation::Transform(src))) => {
                    if self.predicates.get(src).map(|e| e.kind) != Some(PredicateKind::Regular) {
                        return Err(format!("{} transforms a non-regular predicate", entry.id));
                    }
                }
                (_, None) => {}
                (kind, Some(_)) => return Err(format!("{} of kind {kind} is derived", entry.id)),
            }
        }
        // Kahn's algorithm over the refinement graph.
        let mut indegree: BTreeMap<&PredicateId, usize> = BTreeMap::new();
        for edge in &self.refinements {
            indegree.entry(&edge.parent).or_insert(0);
            indegree.entry(&edge.child).or_insert(0);
        }
        for children in self.children.values() {
            for child in children {
                *indegree.get_mut(child).expect("child indexed") += 1;
            }
        }
        let mut ready: Vec<&PredicateId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(p, _)| *p)
            .collect();
        let mut visited = 0;
        while let Some(p) = ready.pop() {
            visited += 1;
            for child in self.children.get(p).into_iter().flatten() {
                let d = indegree.get_mut(child).expect("child indexed");
                *d -= 1;
                if *d == 0 {
                    ready.push(child);
                }
            }
        }
        if visited != indegree.len() {
            return Err("refinement graph has a cycle".into());
        }
        Ok(())
    }
}
