use std::sync::Arc;

use crate::hierarchy::{Variant, ViewpointHierarchy};
use crate::ids::ViewpointId;
use crate::store::{Graph, Literal, Term, Triple};
use crate::taxonomy::Taxonomy;

pub const TAXONOMY: &str = include_str!("../tests/fixtures/case_study/taxonomy.cfg");
pub const HIERARCHY_WTAH: &str = include_str!("../tests/fixtures/case_study/hierarchy.cfg");
pub const HIERARCHY_VPH: &str = include_str!("../tests/fixtures/case_study/hierarchy_vph.cfg");
pub const GRAPH: &str = include_str!("../tests/fixtures/case_study/graph.vkg");

pub fn vp(s: &str) -> ViewpointId {
    ViewpointId::from(s)
}

pub fn iri(s: &str) -> Term {
    Term::iri(s)
}

pub fn taxonomy() -> Arc<Taxonomy> {
    Arc::new(Taxonomy::from_config_str(TAXONOMY).unwrap())
}

pub fn hierarchy(variant: Variant) -> Arc<ViewpointHierarchy> {
    let text = match variant {
        Variant::Wtah => HIERARCHY_WTAH,
        Variant::Vph => HIERARCHY_VPH,
    };
    Arc::new(ViewpointHierarchy::from_config_str(text).unwrap())
}

pub fn empty(variant: Variant) -> Graph {
    Graph::new(taxonomy(), hierarchy(variant))
}

pub fn claim(s: &str, p: &str, o: &str, v: &str) -> Triple {
    Triple::claim(s, p, iri(o), v)
}

pub fn fact(s: &str, p: &str, o: &str) -> Triple {
    Triple::fact(s, p, iri(o))
}

/// RUvsUKR with its facts and no claims.
pub fn ru_vs_ukr(variant: Variant) -> Graph {
    let mut g = empty(variant);
    g.register_event("RUvsUKR", "invasion").unwrap();
    g.insert_fact(fact("RUvsUKR", "participant", "Ukraine")).unwrap();
    g.insert_fact(fact("RUvsUKR", "location", "Ukraine")).unwrap();
    let span = Literal::interval("2022-02-24", "2024-11-25").unwrap();
    g.insert_fact(Triple::fact("RUvsUKR", "time_span", Term::Literal(span)))
        .unwrap();
    g
}
