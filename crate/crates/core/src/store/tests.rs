use super::*;
use crate::hierarchy::Variant;
use crate::testutil::*;
use proptest::prelude::*;

const CASCADE: CascadePolicy = CascadePolicy::DeleteConflicting;
const REJECT: CascadePolicy = CascadePolicy::Reject;

#[test]
fn insert_examples() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    assert!(matches!(
        g.insert_fact(fact("Ukraine", "location", "Europe")),
        Err(StoreError::NonEventSubject(_))
    ));
    assert!(matches!(
        g.insert_fact(fact("RUvsUKR", "occupier", "Russia")),
        Err(StoreError::KindViolation { .. })
    ));
    assert!(matches!(
        g.insert(claim("RUvsUKR", "location", "Kyiv", "RU"), REJECT),
        Err(StoreError::KindViolation { .. })
    ));
    assert!(matches!(
        g.insert(claim("RUvsUKR", "occupier", "Russia", "Mars"), REJECT),
        Err(StoreError::UnknownViewpoint(_))
    ));
    assert!(matches!(
        g.insert(claim("RUvsUKR", "nonsense", "Russia", "RU"), REJECT),
        Err(StoreError::Taxonomy(TaxonomyError::UnknownPredicate(_)))
    ));

    g.insert(claim("RUvsUKR", "attacker", "Russia", "RU"), REJECT)
        .unwrap();
    let before = g.clone();
    let err = g
        .insert(claim("RUvsUKR", "defender", "Russia", "RU"), REJECT)
        .unwrap_err();
    let StoreError::IncompatibleClaim(evidence) = err else {
        panic!("expected IncompatibleClaim, got {err:?}");
    };
    assert_eq!(evidence.len(), 1);
    assert!(evidence[0].viewpoints.contains(&vp("RU")));
    assert!(g.same_content(&before));

    g.register_event("Final", "football_match").unwrap();
    assert!(matches!(
        g.insert(claim("Final", "aggressor", "TeamA", "RU"), REJECT),
        Err(StoreError::NotPermissible { .. })
    ));
}

#[test]
fn parameterized_predicates_need_their_type() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    g.insert_fact(fact("RUvsUKR", "invader", "Russia")).unwrap();
    g.register_event("Final", "football_match").unwrap();
    assert!(matches!(
        g.insert_fact(fact("Final", "war_party", "TeamA")),
        Err(StoreError::TypeMismatch { .. })
    ));
}

#[test]
fn event_registration() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    assert!(matches!(
        g.register_event("RUvsUKR", "war"),
        Err(StoreError::ConflictingEventType { .. })
    ));
    g.register_event("RUvsUKR", "invasion").unwrap();
    assert!(matches!(
        g.register_event("X", "picnic"),
        Err(StoreError::Taxonomy(TaxonomyError::UnknownEventType(_)))
    ));
    let typing = fact("RUvsUKR", "event_type", "invasion");
    assert!(matches!(g.delete(&typing), Err(StoreError::EventInUse(_))));
    assert!(g.contains(&typing));

    g.register_event("Empty", "war").unwrap();
    g.delete(&fact("Empty", "event_type", "war")).unwrap();
    assert!(!g.is_event(&"Empty".into()));
}

#[test]
fn attribution_at_all_of_transformed_predicate_becomes_fact() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    g.insert(claim("RUvsUKR", "attrib_has_cause", "NATO_expansion", "ALL"), REJECT)
        .unwrap();
    assert!(g.contains(&fact("RUvsUKR", "has_cause", "NATO_expansion")));
    assert!(g.claims().is_empty());
}

#[test]
fn inverse_roles_must_come_in_pairs() {
    let mut g = empty(Variant::Wtah);
    g.register_event("Final", "football_match").unwrap();
    let under = claim("Final", "underdog", "TeamA", "RU");
    let top = claim("Final", "topdog", "TeamB", "RU");

    assert!(matches!(
        g.insert(under.clone(), REJECT),
        Err(StoreError::DanglingInverseRole { .. })
    ));
    assert!(g.claims().is_empty());

    for (first, second) in [(&under, &top), (&top, &under)] {
        let mut h = g.clone();
        h.transaction(|tx| {
            tx.insert(first.clone(), REJECT)?;
            tx.insert(second.clone(), REJECT)
        })
        .unwrap();
        assert_eq!(h.claims().len(), 2);

        assert!(matches!(
            h.delete(first),
            Err(StoreError::DanglingInverseRole { .. })
        ));
        h.transaction(|tx| {
            tx.delete(second)?;
            tx.delete(first)
        })
        .unwrap();
        assert!(h.claims().is_empty());
    }

    // Partners elsewhere do not count.
    let elsewhere = claim("Final", "topdog", "TeamB", "NATO");
    assert!(g
        .transaction(|tx| {
            tx.insert(under.clone(), REJECT)?;
            tx.insert(elsewhere.clone(), REJECT)
        })
        .is_err());
}

#[test]
fn update_is_atomic() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    let old = claim("RUvsUKR", "attacker", "Russia", "RU");
    g.insert(old.clone(), REJECT).unwrap();
    g.insert(claim("RUvsUKR", "liberator", "Russia", "RU"), REJECT)
        .unwrap();
    let new = claim("RUvsUKR", "defender", "Russia", "RU");
    g.update(&old, new.clone(), REJECT).unwrap();
    assert!(g.contains(&new) && !g.contains(&old));

    let before = g.clone();
    let bad = claim("RUvsUKR", "occupier", "Russia", "RU");
    let err = g.update(&new, bad, REJECT).unwrap_err();
    assert!(matches!(err, StoreError::IncompatibleClaim(_)));
    assert!(g.same_content(&before));

    assert!(matches!(
        g.update(&old, new.clone(), REJECT),
        Err(StoreError::NotFound(_))
    ));
}

#[test]
fn triples_for_examples() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    let nato = claim("RUvsUKR", "occupier", "Russia", "NATO");
    let ru = claim("RUvsUKR", "liberator", "Russia", "RU");
    g.insert(nato.clone(), REJECT).unwrap();
    g.insert(ru.clone(), REJECT).unwrap();

    let at = |g: &Graph, v: &str| -> Vec<Triple> {
        g.triples_for(&vp(v)).unwrap().into_iter().cloned().collect()
    };
    let us = at(&g, "US");
    assert!(us.contains(&nato) && !us.contains(&ru));
    assert_eq!(us.len(), g.facts().len() + 1);
    assert_eq!(at(&g, "ALL").len(), g.facts().len());
    assert!(matches!(
        g.triples_for(&vp("Mars")),
        Err(StoreError::UnknownViewpoint(_))
    ));

    let mut v = ru_vs_ukr(Variant::Vph);
    v.insert(nato.clone(), REJECT).unwrap();
    assert!(!at(&v, "US").contains(&nato));
    assert!(at(&v, "NATO").contains(&nato));
    assert!(!at(&v, "ALL").contains(&nato));
}

#[test]
fn event_type_resolution() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    let ev: EventId = "RUvsUKR".into();
    g.insert(claim("RUvsUKR", "attrib_event_type", "military_operation", "RU"), REJECT)
        .unwrap();
    assert_eq!(g.event_type_in(&ev, &vp("RU")).unwrap().as_str(), "military_operation");
    assert_eq!(g.event_type_in(&ev, &vp("NATO")).unwrap().as_str(), "invasion");
    assert_eq!(g.event_type_in(&ev, &vp("ALL")).unwrap().as_str(), "invasion");

    g.insert(claim("RUvsUKR", "attrib_event_type", "war", "NATO"), REJECT)
        .unwrap();
    g.insert(claim("RUvsUKR", "attrib_event_type", "invasion", "US"), REJECT)
        .unwrap();
    assert_eq!(g.event_type_in(&ev, &vp("GB")).unwrap().as_str(), "war");
    assert!(matches!(
        g.event_type_in(&ev, &vp("POTUS")),
        Err(StoreError::AmbiguousType { .. })
    ));
    assert_eq!(g.resolved_types(&ev, &vp("POTUS")).len(), 2);
    assert!(matches!(
        g.event_type_in(&"Nope".into(), &vp("RU")),
        Err(StoreError::UnknownEvent(_))
    ));
    assert!(matches!(
        g.insert(claim("RUvsUKR", "attrib_event_type", "picnic", "RU"), REJECT),
        Err(StoreError::Taxonomy(TaxonomyError::UnknownEventType(_)))
    ));
}

#[test]
fn retyping_can_expose_scoped_conflicts() {
    let mut tax = Taxonomy::from_config_str(TAXONOMY).unwrap();
    tax.add_constraint(
        crate::taxonomy::AttributionConstraint::mutual_exclusion("attacker", "aggressor")
            .scoped("war"),
    )
    .unwrap();
    let mut g = Graph::new(Arc::new(tax), hierarchy(Variant::Wtah));
    g.register_event("E", "invasion").unwrap();
    g.insert(claim("E", "attacker", "Russia", "RU"), REJECT).unwrap();
    g.insert(claim("E", "aggressor", "Russia", "RU"), REJECT).unwrap();
    let before = g.clone();
    let err = g
        .insert(claim("E", "attrib_event_type", "war", "RU"), REJECT)
        .unwrap_err();
    assert!(matches!(err, StoreError::IncompatibleClaim(_)));
    assert!(g.same_content(&before));
}

#[test]
fn completeness_examples() {
    let g = ru_vs_ukr(Variant::Wtah);
    assert!(g.completeness(&"RUvsUKR".into()).unwrap().is_complete());
    let mut h = empty(Variant::Wtah);
    h.register_event("E", "invasion").unwrap();
    h.insert(claim("E", "occupier", "Russia", "NATO"), REJECT).unwrap();
    let c = h.completeness(&"E".into()).unwrap();
    assert!(c.has_participant && !c.has_time && !c.has_location);
}

#[test]
fn minimal_claims_drop_inherited_copies() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    g.insert(claim("RUvsUKR", "occupier", "Russia", "NATO"), REJECT)
        .unwrap();
    g.insert(claim("RUvsUKR", "occupier", "Russia", "US"), REJECT)
        .unwrap();
    assert_eq!(g.claims().len(), 2);
    assert_eq!(g.minimal_claims().len(), 1);

    let mut v = ru_vs_ukr(Variant::Vph);
    v.insert(claim("RUvsUKR", "occupier", "Russia", "NATO"), REJECT)
        .unwrap();
    v.insert(claim("RUvsUKR", "occupier", "Russia", "US"), REJECT)
        .unwrap();
    assert_eq!(v.minimal_claims().len(), 2);
}

#[test]
fn shared_graph_snapshots_are_stable() {
    let shared = SharedGraph::new(ru_vs_ukr(Variant::Wtah));
    let before = shared.snapshot();
    shared
        .write(|tx| tx.insert(claim("RUvsUKR", "occupier", "Russia", "NATO"), REJECT))
        .unwrap();
    assert!(before.claims().is_empty());
    assert_eq!(shared.snapshot().claims().len(), 1);
    let failed = shared.write(|tx| tx.insert(claim("RUvsUKR", "liberator", "Russia", "GB"), REJECT));
    assert!(failed.is_err());
    assert_eq!(shared.snapshot().claims().len(), 1);
}

const VIEWPOINTS: [&str; 8] = ["ALL", "NATO", "RU", "GB", "GER", "US", "Congress", "POTUS"];
const ROLES: [&str; 5] = ["attacker", "defender", "occupier", "liberator", "aggressor"];
const ACTORS: [&str; 3] = ["Russia", "Ukraine", "Belarus"];

fn arb_ops() -> impl Strategy<Value = Vec<(usize, usize, usize)>> {
    prop::collection::vec((0..ROLES.len(), 0..ACTORS.len(), 0..VIEWPOINTS.len()), 0..25)
}

fn build(variant: Variant, ops: &[(usize, usize, usize)]) -> Graph {
    let mut g = ru_vs_ukr(variant);
    for &(r, a, v) in ops {
        let _ = g.insert(claim("RUvsUKR", ROLES[r], ACTORS[a], VIEWPOINTS[v]), CASCADE);
    }
    g
}

proptest! {
    #[test]
    fn facts_hold_everywhere(ops in arb_ops()) {
        let g = build(Variant::Wtah, &ops);
        for v in VIEWPOINTS {
            let here: BTreeSet<&Triple> = g.triples_for(&vp(v)).unwrap().into_iter().collect();
            prop_assert!(g.facts().iter().all(|f| here.contains(f)));
        }
    }

    #[test]
    fn visibility_follows_variant(ops in arb_ops()) {
        for variant in [Variant::Wtah, Variant::Vph] {
            let g = build(variant, &ops);
            let h = g.hierarchy();
            for c in g.claims() {
                let cv = c.viewpoint.as_ref().unwrap();
                for v in VIEWPOINTS {
                    let v = vp(v);
                    let expected = cv.is_all()
                        || &v == cv
                        || (variant == Variant::Wtah && h.descendants(cv).unwrap().contains(&v));
                    prop_assert_eq!(g.claim_valid_at(c, &v).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn admitted_graphs_stay_consistent(ops in arb_ops()) {
        for variant in [Variant::Wtah, Variant::Vph] {
            let g = build(variant, &ops);
            prop_assert!(consistency::check_graph(&g).consistent);
        }
    }
}
