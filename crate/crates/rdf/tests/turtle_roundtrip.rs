use ontoforge_rdf::term::{Iri, Literal, Term, Triple};
use ontoforge_rdf::vocab::xsd;
use ontoforge_rdf::{graphs_equal, parse_turtle, serialize_turtle, Graph, PrefixMap, RdfError};
use proptest::prelude::*;

fn term_strategy() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..8usize).prop_map(|i| Term::Iri(Iri::new(format!("http://ex.org/ns#n{i}")).unwrap())),
        (0..4usize).prop_map(|i| Term::Iri(Iri::new(format!("http://other.org/x/{i}")).unwrap())),
        (-50i64..50).prop_map(|n| Term::Literal(Literal::integer(n))),
        "[a-z \"\\\\\n\t]{0,8}".prop_map(|s| Term::Literal(Literal::simple(s))),
        ("[a-z]{1,5}", "(en|fr|de-ch)").prop_map(|(s, l)| Term::Literal(Literal::lang(s, l).unwrap())),
        (0..1000u32).prop_map(|n| Term::Literal(
            Literal::typed(format!("{}.{}", n / 10, n % 10), Iri::new(xsd::DECIMAL).unwrap()).unwrap()
        )),
        Just(Term::Literal(Literal::typed("true", Iri::new(xsd::BOOLEAN).unwrap()).unwrap())),
        Just(Term::Literal(Literal::typed("2024-01-01", Iri::new(format!("{}date", xsd::NS)).unwrap()).unwrap())),
    ]
}

fn subject_strategy(blanks: bool) -> BoxedStrategy<Term> {
    let iri = (0..8usize).prop_map(|i| Term::Iri(Iri::new(format!("http://ex.org/ns#n{i}")).unwrap()));
    if blanks {
        prop_oneof![iri, (0..3usize).prop_map(|i| Term::blank(format!("b{i}")))].boxed()
    } else {
        iri.boxed()
    }
}

fn graph_strategy(blanks: bool) -> impl Strategy<Value = Graph> {
    let pred = (0..5usize).prop_map(|i| Iri::new(format!("http://ex.org/ns#p{i}")).unwrap());
    let object: BoxedStrategy<Term> = if blanks {
        prop_oneof![term_strategy(), (0..3usize).prop_map(|i| Term::blank(format!("b{i}")))].boxed()
    } else {
        term_strategy().boxed()
    };
    prop::collection::vec((subject_strategy(blanks), pred, object), 0..40)
        .prop_map(|v| v.into_iter().map(|(s, p, o)| Triple::new(s, p, o).unwrap()).collect())
}

fn prefixes() -> PrefixMap {
    let mut p = PrefixMap::standard();
    p.insert("ex", "http://ex.org/ns#");
    p
}

proptest! {
    #[test]
    fn blank_free_graphs_round_trip_to_equal_sets(g in graph_strategy(false)) {
        let text = serialize_turtle(&g, &prefixes());
        let (back, _) = parse_turtle(&text, None).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_turtle(&back, &prefixes()), text);
    }

    #[test]
    fn graphs_with_blank_nodes_round_trip_isomorphically(g in graph_strategy(true)) {
        let text = serialize_turtle(&g, &prefixes());
        let (back, _) = parse_turtle(&text, None).unwrap();
        prop_assert!(graphs_equal(&back, &g));
    }

    #[test]
    fn merge_is_commutative_and_associative(
        a in graph_strategy(true), b in graph_strategy(true), c in graph_strategy(false)
    ) {
        prop_assert!(graphs_equal(&a.merge(&b), &b.merge(&a)));
        prop_assert!(graphs_equal(&a.merge(&b).merge(&c), &a.merge(&b.merge(&c))));
    }

    #[test]
    fn merge_size_is_inclusion_exclusion(a in graph_strategy(false), b in graph_strategy(false)) {
        let shared = a.iter().filter(|t| b.contains(t)).count();
        prop_assert_eq!(a.merge(&b).len(), a.len() + b.len() - shared);
    }
}

const DOC: &str = "@prefix ex: <http://ex.org/ns#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
ex:car1 a ex:Vehicle ;
    ex:efficiency 35 ;
    ex:label \"Zoe\"@en .
ex:car2 a ex:Vehicle ;
    ex:efficiency \"28.5\"^^xsd:decimal .
ex:Vehicle ex:note \"a vehicle\" .
";

#[test]
fn every_deleted_terminal_dot_is_a_positioned_syntax_error() {
    let dots: Vec<usize> =
        DOC.char_indices().filter(|&(i, c)| c == '.' && DOC[i + 1..].starts_with('\n')).map(|(i, _)| i).collect();
    assert_eq!(dots.len(), 5);
    for i in dots {
        let mutant = format!("{}{}", &DOC[..i], &DOC[i + 1..]);
        match parse_turtle(&mutant, None) {
            Err(RdfError::Syntax { line, column, .. }) => assert!(line >= 1 && column >= 1),
            other => panic!("mutant at {i} gave {other:?}"),
        }
    }
}

#[test]
fn mismatched_angle_brackets_are_syntax_errors() {
    for (i, _) in DOC.match_indices('>') {
        let mutant = format!("{}{}", &DOC[..i], &DOC[i + 1..]);
        assert!(matches!(parse_turtle(&mutant, None), Err(RdfError::Syntax { .. })), "{mutant}");
    }
}

#[test]
fn dropped_prefix_declaration_names_the_prefix() {
    let mutant = DOC.replacen("@prefix ex: <http://ex.org/ns#> .\n", "", 1);
    match parse_turtle(&mutant, None) {
        Err(RdfError::UnknownPrefix { prefix, line, column }) => {
            assert_eq!(prefix, "ex");
            assert_eq!((line, column), (2, 1));
        }
        other => panic!("{other:?}"),
    }
}
