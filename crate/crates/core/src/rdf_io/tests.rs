use super::*;
use crate::consistency::CascadePolicy;
use crate::hierarchy::Variant;
use crate::testutil::*;
use proptest::prelude::*;

fn case_study(variant: Variant) -> Graph {
    let mut g = ru_vs_ukr(variant);
    for c in [
        claim("RUvsUKR", "occupier", "Russia", "NATO"),
        claim("RUvsUKR", "defender", "Russia", "RU"),
        claim("RUvsUKR", "attrib_has_cause", "NATO_expansion", "RU"),
    ] {
        g.insert(c, CascadePolicy::Reject).unwrap();
    }
    g
}

fn read(text: &str, variant: Variant) -> Result<Graph> {
    parse(text, taxonomy(), hierarchy(variant))
}

#[test]
fn case_study_golden() {
    let g = case_study(Variant::Wtah);
    assert_eq!(to_text(&g, None).unwrap(), GRAPH);
    let back = read(GRAPH, Variant::Wtah).unwrap();
    assert!(back.same_content(&g));
}

#[test]
fn single_claim_listing() {
    let tax = include_str!("../../tests/fixtures/listing/taxonomy.cfg");
    let golden = include_str!("../../tests/fixtures/listing/has_occupier.vkg");
    let tax = Arc::new(Taxonomy::from_config_str(tax).unwrap());
    let mut before = Graph::new(tax, hierarchy(Variant::Wtah));
    before.register_event("RUvsUKR", "invasion").unwrap();
    let mut after = before.clone();
    after
        .insert(claim("RUvsUKR", "has_occupier", "Russia", "NATO"), CascadePolicy::Reject)
        .unwrap();
    let added: String = diff_graphs(&before, &after)
        .only_in_second
        .iter()
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(added, golden);
    let full = to_text(&after, None).unwrap();
    assert_eq!(full, format!("RUvsUKR event_type invasion .\n{golden}"));
}

#[test]
fn wtah_writes_only_the_topmost_copy() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    g.insert(claim("RUvsUKR", "occupier", "Russia", "NATO"), CascadePolicy::Reject)
        .unwrap();
    g.insert(claim("RUvsUKR", "occupier", "Russia", "US"), CascadePolicy::Reject)
        .unwrap();
    let text = to_text(&g, None).unwrap();
    assert!(!text.contains("acc_to_vp US"));
    assert!(read(&text, Variant::Wtah).unwrap().same_content(&g));

    let mut v = ru_vs_ukr(Variant::Vph);
    v.insert(claim("RUvsUKR", "occupier", "Russia", "NATO"), CascadePolicy::Reject)
        .unwrap();
    v.insert(claim("RUvsUKR", "occupier", "Russia", "US"), CascadePolicy::Reject)
        .unwrap();
    let text = to_text(&v, None).unwrap();
    assert!(text.contains("occupier#2 acc_to_vp"));
}

#[test]
fn claims_at_all_are_unreified() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    g.insert(claim("RUvsUKR", "occupier", "Russia", "ALL"), CascadePolicy::Reject)
        .unwrap();
    let text = to_text(&g, None).unwrap();
    assert!(text.contains("RUvsUKR occupier Russia .\n"));
    assert!(!text.contains('#'));
    let back = read(&text, Variant::Wtah).unwrap();
    assert!(back.contains(&claim("RUvsUKR", "occupier", "Russia", "ALL")));
}

#[test]
fn base_and_literals() {
    let text = "BASE <http://example.org/>\n\
                <http://example.org/E> event_type war .\n\
                E location \"Kyiv \\\"centre\\\"\" .\n\
                E time_span \"2022-02-24T04:00:00Z\"^^instant .\n";
    let g = read(text, Variant::Wtah).unwrap();
    assert!(g.is_event(&"E".into()));
    assert!(g.facts().iter().any(|f| f.object == Term::Literal(Literal::plain("Kyiv \"centre\""))));
    assert!(g.completeness(&"E".into()).unwrap().has_time);
    let out = to_text(&g, Some("http://example.org/")).unwrap();
    assert!(out.starts_with("BASE <http://example.org/>\n"));
    assert!(read(&out, Variant::Wtah).unwrap().same_content(&g));
}

#[test]
fn parse_errors() {
    let typed = "E event_type war .\n";
    let err = |body: &str| read(&format!("{typed}{body}"), Variant::Wtah).unwrap_err();

    assert!(matches!(err("E location Kyiv\n"), RdfError::SyntaxError { line: 2, .. }));
    assert!(matches!(err("E location \"Kyiv .\n"), RdfError::SyntaxError { line: 2, .. }));
    assert!(matches!(
        err("E time_span \"2022\"^^weekday .\n"),
        RdfError::SyntaxError { line: 2, .. }
    ));
    assert!(matches!(
        err("E attacker#1 Russia .\nattacker#1 singleton_property_of attacker .\n"),
        RdfError::DanglingSingleton { missing: ACC_TO_VP, .. }
    ));
    assert!(matches!(
        err("attacker#1 singleton_property_of attacker .\nattacker#1 acc_to_vp RU .\n"),
        RdfError::DanglingSingleton { missing: "usage", .. }
    ));
    assert!(matches!(
        err("E attacker#1 Russia .\nattacker#1 singleton_property_of defender .\nattacker#1 acc_to_vp RU .\n"),
        RdfError::SyntaxError { line: 3, .. }
    ));
    assert!(matches!(
        err("E attacker#1 Russia .\nattacker#1 singleton_property_of attacker .\nattacker#1 acc_to_vp Mars .\n"),
        RdfError::UnknownVocabulary { line: 2, .. }
    ));
    assert!(matches!(err("E colour red .\n"), RdfError::UnknownVocabulary { line: 2, .. }));
    assert!(matches!(
        read("F location Kyiv .\n", Variant::Wtah).unwrap_err(),
        RdfError::Store { line: 1, .. }
    ));
}

#[test]
fn inconsistent_graphs_are_not_written() {
    let mut g = ru_vs_ukr(Variant::Wtah);
    g.insert_unchecked(claim("RUvsUKR", "occupier", "Russia", "NATO"))
        .unwrap();
    g.insert_unchecked(claim("RUvsUKR", "liberator", "Russia", "GB"))
        .unwrap();
    assert_eq!(materialize(&g), Err(RdfError::InconsistentGraph(1)));
}

#[test]
fn diff_examples() {
    let g = case_study(Variant::Wtah);
    let full = to_text(&g, None).unwrap();
    let mut smaller = g.clone();
    smaller
        .delete(&claim("RUvsUKR", "occupier", "Russia", "NATO"))
        .unwrap();
    let d = diff(&full, &to_text(&smaller, None).unwrap(), taxonomy(), hierarchy(Variant::Wtah)).unwrap();
    assert_eq!(d.only_in_first.len(), 3);
    assert!(d.only_in_second.is_empty());
    assert!(diff(&full, &full, taxonomy(), hierarchy(Variant::Wtah)).unwrap().is_empty());

    let mut as_fact = ru_vs_ukr(Variant::Wtah);
    as_fact
        .insert(claim("RUvsUKR", "attrib_has_cause", "NATO_expansion", "ALL"), CascadePolicy::Reject)
        .unwrap();
    let mut as_claim = ru_vs_ukr(Variant::Wtah);
    as_claim
        .insert(claim("RUvsUKR", "attrib_has_cause", "NATO_expansion", "RU"), CascadePolicy::Reject)
        .unwrap();
    let d = diff_graphs(&as_fact, &as_claim);
    assert_eq!((d.only_in_first.len(), d.only_in_second.len()), (1, 3));
}

const VIEWPOINTS: [&str; 8] = ["ALL", "NATO", "RU", "GB", "GER", "US", "Congress", "POTUS"];
const ROLES: [&str; 7] = [
    "attacker",
    "defender",
    "occupier",
    "liberator",
    "not_attacker",
    "aggressor",
    "attrib_has_cause",
];

proptest! {
    #[test]
    fn round_trip(
        variant in prop_oneof![Just(Variant::Wtah), Just(Variant::Vph)],
        ops in prop::collection::vec((0..ROLES.len(), 0..3usize, 0..VIEWPOINTS.len()), 0..25),
    ) {
        let mut g = ru_vs_ukr(variant);
        for (r, o, v) in ops {
            let c = claim("RUvsUKR", ROLES[r], ["Russia", "Ukraine", "NATO_expansion"][o], VIEWPOINTS[v]);
            let _ = g.insert(c, CascadePolicy::DeleteConflicting);
        }
        let text = to_text(&g, None).unwrap();
        let back = read(&text, variant).unwrap();
        prop_assert!(back.same_content(&g));
        prop_assert_eq!(to_text(&back, None).unwrap(), text);
    }
}
