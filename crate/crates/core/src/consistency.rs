//! Claim compatibility and per-viewpoint consistency.
//!
//! Whether two claims contradict depends only on the claims themselves (and
//! the vocabulary); whether the contradiction matters at a viewpoint depends
//! on both claims being valid there. Consistency of the whole graph is the
//! absence of any contradicting pair that shares a viewpoint.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ids::{EventTypeId, ViewpointId};
use crate::store::{Graph, Result, StoreError, Term, Triple};
use crate::taxonomy::{AttributionConstraint, ConstraintKind, RulePattern};

/// What to do with claims below an inserted claim's viewpoint that the
/// insertion would contradict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CascadePolicy {
    /// Reject the insertion.
    #[default]
    Reject,
    /// Remove the contradicted claims in the same transaction.
    DeleteConflicting,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Constraint { constraint: AttributionConstraint },
    Negation,
    Rule { rule: String },
}

/// Why two claims cannot be fused.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct IncompatibilityEvidence {
    pub first: Triple,
    pub second: Triple,
    pub violation: Violation,
    /// Viewpoints at which both claims are valid.
    pub viewpoints: BTreeSet<ViewpointId>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewpointVerdict {
    pub consistent: bool,
    pub violations: Vec<IncompatibilityEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub schema_version: u32,
    pub consistent: bool,
    pub viewpoints: BTreeMap<ViewpointId, ViewpointVerdict>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

impl ConsistencyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Distinct evidence records across all viewpoints.
    pub fn evidence(&self) -> BTreeSet<&IncompatibilityEvidence> {
        self.viewpoints
            .values()
            .flat_map(|v| v.violations.iter())
            .collect()
    }

    pub fn render_text(&self, color: bool) -> String {
        let paint = |ok: bool, s: &str| match (color, ok) {
            (false, _) => s.to_owned(),
            (true, true) => format!("\x1b[32m{s}\x1b[0m"),
            (true, false) => format!("\x1b[31m{s}\x1b[0m"),
        };
        let mut out = String::new();
        for (v, verdict) in &self.viewpoints {
            let tag = if verdict.consistent { "ok" } else { "INCONSISTENT" };
            out.push_str(&format!("{:<12} {}\n", v.as_str(), paint(verdict.consistent, tag)));
            for e in &verdict.violations {
                out.push_str(&format!("  - {}\n", e.explanation));
            }
        }
        let overall = if self.consistent {
            "viewpoint-consistent"
        } else {
            "NOT viewpoint-consistent"
        };
        out.push_str(&paint(self.consistent, overall));
        out.push('\n');
        out
    }
}

/// Event types relevant for scoping a check between `a` and `b`: the types
/// of both subjects as resolved at each claim's viewpoint.
fn scope_types(g: &Graph, a: &Triple, b: &Triple) -> BTreeSet<EventTypeId> {
    let mut types = BTreeSet::new();
    for c in [a, b] {
        if let Some(v) = &c.viewpoint {
            types.extend(g.resolved_types(&c.subject, v));
        }
    }
    types
}

fn unify(pattern: &RulePattern, claim: &Triple, bindings: &mut BTreeMap<String, Term>) -> bool {
    if pattern.predicate != claim.predicate {
        return false;
    }
    let subject = Term::iri(claim.subject.as_str());
    for (var, value) in [(&pattern.subject, &subject), (&pattern.object, &claim.object)] {
        match bindings.get(var) {
            Some(bound) if bound != value => return false,
            Some(_) => {}
            None => {
                bindings.insert(var.clone(), value.clone());
            }
        }
    }
    true
}

fn rule_matches(first: &RulePattern, second: &RulePattern, a: &Triple, b: &Triple) -> bool {
    let mut bindings = BTreeMap::new();
    unify(first, a, &mut bindings) && unify(second, b, &mut bindings)
}

/// The contradiction between two claims, if any. Facts never contradict, and
/// neither does a claim with itself. Symmetric in its arguments.
pub fn contradicts(a: &Triple, b: &Triple, g: &Graph) -> Option<IncompatibilityEvidence> {
    let (Some(va), Some(vb)) = (&a.viewpoint, &b.viewpoint) else {
        return None;
    };
    if a == b {
        return None;
    }
    // Canonical order keeps evidence identical for (a, b) and (b, a).
    let (a, b, va, vb) = if a < b { (a, b, va, vb) } else { (b, a, vb, va) };
    let taxonomy = g.taxonomy();
    let types = scope_types(g, a, b);

    let mut violation = None;
    if a.subject == b.subject && a.object == b.object {
        if taxonomy.is_negation_pair(&a.predicate, &b.predicate) {
            violation = Some((
                Violation::Negation,
                format!("{} and {} negate each other", a.predicate, b.predicate),
            ));
        } else if let Some(c) = taxonomy.constraint_between(&a.predicate, &b.predicate, &types) {
            let what = match c.kind {
                ConstraintKind::MutualExclusion => "mutually exclusive",
                ConstraintKind::InverseRole => "inverse roles",
            };
            violation = Some((
                Violation::Constraint {
                    constraint: c.clone(),
                },
                format!(
                    "{} cannot be both {} and {} ({what})",
                    a.object, a.predicate, b.predicate
                ),
            ));
        }
    }
    if violation.is_none() {
        violation = taxonomy
            .rules()
            .iter()
            .filter(|r| r.applies_to(&types))
            .find(|r| {
                rule_matches(&r.first, &r.second, a, b) || rule_matches(&r.first, &r.second, b, a)
            })
            .map(|r| {
                (
                    Violation::Rule { rule: r.id.clone() },
                    format!("rule {r} matches"),
                )
            });
    }
    let (violation, reason) = violation?;

    let h = g.hierarchy();
    let shared: BTreeSet<ViewpointId> = match (h.validity_set(va), h.validity_set(vb)) {
        (Ok(sa), Ok(sb)) => sa.intersection(&sb).cloned().collect(),
        _ => BTreeSet::new(),
    };
    Some(IncompatibilityEvidence {
        explanation: format!("`{a}` vs `{b}`: {reason}"),
        first: a.clone(),
        second: b.clone(),
        violation,
        viewpoints: shared,
    })
}

/// Whether `a` and `b` can be fused at `v`. Pairs where either claim is not
/// valid at `v` are compatible there.
pub fn compatible(a: &Triple, b: &Triple, v: &ViewpointId, g: &Graph) -> Result<bool> {
    if !g.hierarchy().contains(v) {
        return Err(StoreError::UnknownViewpoint(v.clone()));
    }
    if !(g.claim_valid_at(a, v)? && g.claim_valid_at(b, v)?) {
        return Ok(true);
    }
    Ok(contradicts(a, b, g).is_none())
}

/// Pairwise check over the claims valid at `v`.
pub fn check_viewpoint(g: &Graph, v: &ViewpointId) -> Result<ViewpointVerdict> {
    let claims = g.claims_valid_at(v)?;
    let mut violations = Vec::new();
    for (i, a) in claims.iter().enumerate() {
        for b in &claims[i + 1..] {
            if let Some(e) = contradicts(a, b, g) {
                violations.push(e);
            }
        }
    }
    Ok(ViewpointVerdict {
        consistent: violations.is_empty(),
        violations,
    })
}

/// Checks every viewpoint of the hierarchy, including `ALL`.
pub fn check_graph(g: &Graph) -> ConsistencyReport {
    let mut viewpoints: BTreeMap<ViewpointId, ViewpointVerdict> = g
        .hierarchy()
        .nodes()
        .iter()
        .map(|v| {
            (
                v.clone(),
                ViewpointVerdict {
                    consistent: true,
                    violations: Vec::new(),
                },
            )
        })
        .collect();
    // Each contradicting pair is reported at every viewpoint where both
    // claims hold; this equals running check_viewpoint per node.
    let claims: Vec<&Triple> = g.claims().iter().collect();
    for (i, a) in claims.iter().enumerate() {
        for b in &claims[i + 1..] {
            if let Some(e) = contradicts(a, b, g) {
                for v in &e.viewpoints {
                    let verdict = viewpoints.get_mut(v).expect("hierarchy node");
                    verdict.consistent = false;
                    verdict.violations.push(e.clone());
                }
            }
        }
    }
    let consistent = viewpoints.values().all(|v| v.consistent);
    ConsistencyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        consistent,
        viewpoints,
    }
}

/// Claims that would contradict a fact if the fact were a claim at `ALL`.
///
/// Facts are compatible with every claim, so these pairs never make a graph
/// inconsistent; the lint only reports them. A fact on a regular predicate
/// is also compared in its attribution form.
pub fn fact_claim_lint(g: &Graph) -> Vec<IncompatibilityEvidence> {
    let taxonomy = g.taxonomy();
    let mut out = BTreeSet::new();
    for f in g.facts() {
        let mut forms = vec![f.predicate.clone()];
        forms.extend(taxonomy.transformed(&f.predicate).cloned());
        for p in forms {
            let lifted = Triple {
                predicate: p,
                viewpoint: Some(ViewpointId::all()),
                ..f.clone()
            };
            for c in g.claims().iter().filter(|c| c.subject == f.subject) {
                if let Some(e) = contradicts(&lifted, c, g) {
                    out.insert(e);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Decides whether `claim` may join `g`.
///
/// Every existing claim that contradicts `claim` at some shared viewpoint is
/// either a blocker (it is valid at the claim's own viewpoint, or it sits
/// outside the claim's reach) or a victim (its viewpoint lies strictly inside
/// the claim's validity set, so the new claim is pushed down onto it).
/// Blockers reject the insertion; victims are returned for removal under
/// [`CascadePolicy::DeleteConflicting`] and reject it otherwise.
pub fn admit_insertion(g: &Graph, claim: &Triple, cascade: CascadePolicy) -> Result<Vec<Triple>> {
    let v = claim
        .viewpoint
        .as_ref()
        .ok_or_else(|| StoreError::KindViolation {
            predicate: claim.predicate.clone(),
            kind: g
                .taxonomy()
                .kind(&claim.predicate)
                .unwrap_or(crate::taxonomy::PredicateKind::Regular),
            detail: "claims need a viewpoint",
        })?;
    let reach = g.hierarchy().validity_set(v)?;
    let mut blockers = Vec::new();
    let mut victims = Vec::new();
    for other in g.claims() {
        let Some(evidence) = contradicts(claim, other, g) else {
            continue;
        };
        if evidence.viewpoints.is_empty() {
            continue;
        }
        let ov = other.viewpoint.as_ref().expect("stored claims have viewpoints");
        if ov != v && reach.contains(ov) {
            victims.push(other.clone());
        } else {
            blockers.push(evidence);
        }
    }
    if !blockers.is_empty() {
        return Err(StoreError::IncompatibleClaim(blockers));
    }
    if !victims.is_empty() && cascade == CascadePolicy::Reject {
        return Err(StoreError::CascadeRequired(victims));
    }
    Ok(victims)
}
