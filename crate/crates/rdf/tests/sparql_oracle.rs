mod support;

use ontoforge_rdf::sparql::{apply_filter, FilterOutcome};
use ontoforge_rdf::{evaluate, parse_query};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{check_against_oracle, random_graph, random_query_text};

#[test]
fn random_queries_agree_with_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut non_empty = 0;
    let mut filtered = 0;
    for case in 0..100 {
        let graph = random_graph(&mut rng, 60);
        let text = random_query_text(&mut rng);
        let query = parse_query(&text).unwrap_or_else(|e| panic!("case {case}: {text}: {e}"));
        if let Err(why) = check_against_oracle(&graph, &query) {
            panic!("case {case}: {why}\nquery: {text}");
        }
        non_empty += usize::from(!evaluate(&graph, &query).is_empty());
        filtered += usize::from(!query.filters.is_empty());
    }
    // the generator must exercise joins that actually produce rows
    assert!(non_empty >= 30, "only {non_empty} non-empty cases");
    assert!(filtered >= 30, "only {filtered} filtered cases");
}

#[test]
fn pattern_order_does_not_change_the_solution_multiset() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let graph = random_graph(&mut rng, 40);
        let mut query = parse_query(&random_query_text(&mut rng)).unwrap();
        query.order_by = None;
        query.limit = None;
        let mut base: Vec<_> = evaluate(&graph, &query).solutions;
        query.patterns.shuffle(&mut rng);
        let mut shuffled: Vec<_> = evaluate(&graph, &query).solutions;
        let key = |s: &ontoforge_rdf::sparql::Solution| format!("{:?}", s.bindings);
        base.sort_by_key(key);
        shuffled.sort_by_key(key);
        assert_eq!(base, shuffled);
    }
}

#[test]
fn limit_k_is_a_prefix_of_limit_k_plus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let graph = random_graph(&mut rng, 40);
        let mut query = parse_query(&random_query_text(&mut rng)).unwrap();
        for k in 1..6 {
            query.limit = Some(k);
            let short = evaluate(&graph, &query).solutions;
            query.limit = Some(k + 1);
            let long = evaluate(&graph, &query).solutions;
            assert_eq!(short[..], long[..short.len()]);
        }
    }
}

#[test]
fn every_returned_row_satisfies_every_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let graph = random_graph(&mut rng, 50);
        let mut query = parse_query(&random_query_text(&mut rng)).unwrap();
        let all: Vec<String> = support::vars_of(&query);
        query.select = all;
        for row in evaluate(&graph, &query).solutions {
            for f in &query.filters {
                assert_eq!(apply_filter(f, row.get(&f.variable).unwrap()), FilterOutcome::Pass);
            }
        }
    }
}

#[test]
fn any_query_over_the_empty_graph_is_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let query = parse_query(&random_query_text(&mut rng)).unwrap();
        assert!(evaluate(&ontoforge_rdf::Graph::new(), &query).is_empty());
    }
}
