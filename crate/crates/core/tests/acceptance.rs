//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;
#[path = "../../rdf/tests/support/mod.rs"]
mod support;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ontoforge_core::fixtures::{self, henri, DEFECTS, HENRI_STEPS};
use ontoforge_core::llm::proposal::render_completion;
use ontoforge_core::llm::vote::vote_on;
use ontoforge_core::llm::{ChatRequest, ChatResponse, Message, ProposalDraft, ProposalKind, ResponseMeta};
use ontoforge_core::metrics::{compute_base_metrics, compute_schema_metrics, detect_dl_expressivity};
use ontoforge_core::onto::extract_snapshot;
use ontoforge_core::pipeline::{load_project, replay_model, save_project, write_interrupted, PROJECT_FILE};
use ontoforge_core::testkit::{error_count, run_data_tests, run_model_tests};
use ontoforge_rdf::vocab::{owl, rdf, rdfs};
use ontoforge_rdf::{evaluate, graphs_equal, parse_query, parse_turtle, serialize_turtle, Graph, RdfError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

fn graph(docs: &[&str]) -> Graph {
    let mut g = Graph::new();
    for d in docs {
        g.absorb(&parse_turtle(d, None).expect("bundled fixture parses").0);
    }
    g
}

fn row_count(g: &Graph, query: &str) -> Result<usize, String> {
    Ok(evaluate(g, &parse_query(query).map_err(|e| e.to_string())?).len())
}

fn within(started: Instant, limit: Duration) -> Result<Duration, String> {
    let took = started.elapsed();
    if took > limit {
        Err(format!("took {took:?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

/// Counts straight from the triples, independent of snapshot extraction.
fn direct_counts(g: &Graph) -> (usize, usize, usize, usize) {
    let typed = |class: &str| {
        g.with_predicate(rdf::TYPE).iter().filter(|t| t.object().as_iri().is_some_and(|o| o.as_str() == class)).count()
    };
    let classes = typed(owl::CLASS);
    let object = typed(owl::OBJECT_PROPERTY);
    let data = typed(owl::DATATYPE_PROPERTY);
    let subclass = g.with_predicate(rdfs::SUB_CLASS_OF).len();
    (classes, object, data, subclass)
}

fn c1() -> Outcome {
    let started = Instant::now();
    let g = graph(&[fixtures::TABLE4_SYNTH]);
    let snapshot = extract_snapshot(&g).map_err(|e| e.to_string())?;
    let base = compute_base_metrics(&snapshot);
    let m = compute_schema_metrics(&base);
    let took = within(started, Duration::from_secs(1))?;

    let (c, p, a, h) = direct_counts(&g);
    let (c, p, a, h) = (c as f64, p as f64, a as f64, h as f64);
    let oracle = [a / c, h / c, p / (h + p), c / (h + p)];
    let got = [m.attribute_richness, m.inheritance_richness, m.relationship_richness, m.class_relation_ratio];
    let target = [0.380952, 0.261905, 0.738095, 1.000000];
    for (i, name) in ["AR", "IR", "RR", "class/relation"].iter().enumerate() {
        ensure!((got[i] - target[i]).abs() < 1e-6, "{name} = {:.6}, want {:.6}", got[i], target[i]);
        ensure!((got[i] - oracle[i]).abs() < 1e-12, "{name} = {} disagrees with direct count {}", got[i], oracle[i]);
    }
    ensure!(base.properties_count == 47, "properties = {}", base.properties_count);
    Ok(format!(
        "AR {:.6} IR {:.6} RR {:.6} P {} C/R {:.6} in {took:?}",
        got[0], got[1], got[2], base.properties_count, got[3]
    ))
}

fn c2() -> Outcome {
    let started = Instant::now();
    let mut g = graph(&[fixtures::UCPO_MINI]);
    let data_properties = extract_snapshot(&g).map_err(|e| e.to_string())?.data_properties.len();
    let with = detect_dl_expressivity(&g, &extract_snapshot(&g).map_err(|e| e.to_string())?).render();
    let removed = g.remove_where(|t| t.predicate().as_str() == rdfs::SUB_PROPERTY_OF);
    let without = detect_dl_expressivity(&g, &extract_snapshot(&g).map_err(|e| e.to_string())?).render();
    let took = within(started, Duration::from_secs(1))?;
    ensure!(data_properties > 0, "ucpo-mini declares no data property");
    ensure!(with == "ALH(D)", "ucpo-mini gives {with}");
    ensure!(removed > 0, "ucpo-mini has no subPropertyOf axiom");
    ensure!(without == "AL(D)", "without subPropertyOf gives {without}");
    Ok(format!("ucpo-mini {with}, {without} without its {removed} subPropertyOf axiom(s), in {took:?}"))
}

fn c3() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut non_empty = 0;
    for case in 0..100 {
        let g = support::random_graph(&mut rng, 60);
        let text = support::random_query_text(&mut rng);
        let query = parse_query(&text).map_err(|e| format!("case {case}: {e}: {text}"))?;
        support::check_against_oracle(&g, &query).map_err(|e| format!("case {case}: {e}\n{text}"))?;
        non_empty += usize::from(!evaluate(&g, &query).is_empty());
    }
    // guards the generator: too few non-empty cases would make agreement vacuous
    ensure!(non_empty >= 20, "only {non_empty} of 100 cases returned rows");

    let qb1 = row_count(&graph(&[fixtures::QB1_CARS]), fixtures::QB1)?;
    let users = graph(&[fixtures::UCPO_MINI, fixtures::USERS12]);
    let qb2 = row_count(&users, fixtures::QB2)?;
    let henri_graph = graph(&[fixtures::UCPO_MINI, fixtures::HENRI_ABOX]);
    let qb3 = row_count(&henri_graph, fixtures::QB3)?;
    let dual = row_count(&henri_graph, fixtures::DUAL_CONTEXT)?;
    let took = within(started, Duration::from_secs(10))?;
    ensure!(qb1 == 2, "QB1 gives {qb1} rows");
    ensure!(qb2 == 10, "QB2 gives {qb2} rows, LIMIT 10 over 12 users");
    ensure!(qb3 == 5, "Henri professional query gives {qb3} rows");
    ensure!(dual == 1, "Henri dual-context query gives {dual} rows");
    Ok(format!(
        "100 oracle cases ({non_empty} non-empty); QB1 {qb1}, QB2 {qb2}, QB3 {qb3}, dual {dual} rows in {took:?}"
    ))
}

/// Terminal dots outside comments, by byte offset.
fn terminal_dots(text: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.trim_end();
        if !body.trim_start().starts_with('#') && body.ends_with('.') {
            out.push(offset + body.len() - 1);
        }
        offset += line.len();
    }
    out
}

/// A declared prefix that the rest of the document uses, with its line.
fn used_prefix(text: &str) -> Option<(String, String)> {
    text.lines().filter(|l| l.starts_with("@prefix")).find_map(|line| {
        let label = line.split_whitespace().nth(1)?.trim_end_matches(':').to_string();
        let rest = text.replacen(&format!("{line}\n"), "", 1);
        rest.lines()
            .any(|l| !l.starts_with('#') && l.contains(&format!("{label}:")))
            .then(|| (label, format!("{line}\n")))
    })
}

fn c4() -> Outcome {
    let started = Instant::now();
    let docs = fixtures::turtle_documents();
    for (name, text) in &docs {
        let (g, prefixes) = parse_turtle(text, None).map_err(|e| format!("{name}: {e}"))?;
        let written = serialize_turtle(&g, &prefixes);
        let (back, _) = parse_turtle(&written, None).map_err(|e| format!("{name} re-parse: {e}"))?;
        ensure!(graphs_equal(&g, &back), "{name} does not round-trip");
    }

    let mut mutants = 0;
    for (name, text) in docs.iter().take(10) {
        let dots = terminal_dots(text);
        let at = dots[dots.len() / 2];
        let dot_line = text[..at].matches('\n').count() + 1;
        let mutant = format!("{}{}", &text[..at], &text[at + 1..]);
        match parse_turtle(&mutant, None) {
            Err(RdfError::Syntax { line, column, .. }) => {
                ensure!(
                    line >= dot_line && column >= 1,
                    "{name}: deleted '.' on line {dot_line} reported at {line}:{column}"
                )
            }
            other => return Err(format!("{name}: deleted '.' on line {dot_line} gave {other:?}")),
        }
        mutants += 1;
    }
    for (name, text) in docs.iter().rev().take(10) {
        let (label, line_text) = used_prefix(text).ok_or_else(|| format!("{name}: no used prefix"))?;
        let mutant = text.replacen(&line_text, "", 1);
        match parse_turtle(&mutant, None) {
            Err(RdfError::UnknownPrefix { prefix, line, column }) => {
                ensure!(prefix == label, "{name}: dropped {label} but error names {prefix}");
                let reported = mutant.lines().nth(line - 1).unwrap_or_default();
                ensure!(
                    reported.chars().skip(column - 1).collect::<String>().starts_with(&format!("{label}:")),
                    "{name}: {label}: position {line}:{column} does not point at a use"
                );
            }
            other => return Err(format!("{name}: dropped prefix {label} gave {other:?}")),
        }
        mutants += 1;
    }
    let took = within(started, Duration::from_secs(5))?;
    ensure!(mutants == 20, "{mutants} mutants");
    Ok(format!("{} documents round-trip; {mutants} mutants give positioned errors in {took:?}", docs.len()))
}

fn c5() -> Outcome {
    let started = Instant::now();
    let first = common::replay_henri(HENRI_STEPS).map_err(|e| e.to_string())?;
    let second = common::replay_henri(HENRI_STEPS).map_err(|e| e.to_string())?;
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    save_project(&first, a.path()).map_err(|e| e.to_string())?;
    save_project(&second, b.path()).map_err(|e| e.to_string())?;
    let bytes_a = fs::read(a.path().join(PROJECT_FILE)).map_err(|e| e.to_string())?;
    let bytes_b = fs::read(b.path().join(PROJECT_FILE)).map_err(|e| e.to_string())?;
    let took = within(started, Duration::from_secs(30))?;

    let g = &first.model.graph;
    let snapshot = first.snapshot().map_err(|e| e.to_string())?;
    let model_errors = error_count(&run_model_tests(g, &snapshot));
    let data_errors = error_count(&run_data_tests(g, &snapshot));
    let report = first.last_report.as_ref().ok_or("no test report")?;
    ensure!(model_errors == 0, "{model_errors} model errors");
    ensure!(data_errors == 0, "{data_errors} data errors");
    ensure!(!first.tests.is_empty(), "no competency question tests");
    ensure!(
        report.query.passes == first.tests.len() && report.query.failures == 0 && report.query.errors == 0,
        "query tier: {} of {} pass",
        report.query.passes,
        first.tests.len()
    );
    ensure!(bytes_a == bytes_b, "replays differ");

    // every graph rebuilt from the revision log alone serializes to the same bytes
    let rebuilt = replay_model(&first).map_err(|e| e.to_string())?;
    let prefixes = &first.model.prefixes;
    let main_ttl = serialize_turtle(g, prefixes);
    ensure!(serialize_turtle(&rebuilt.main, prefixes) == main_ttl, "main model differs from its log replay");
    for m in &first.modelets {
        let replayed = rebuilt.modelets.get(&m.id).cloned().unwrap_or_default();
        ensure!(
            serialize_turtle(&replayed, prefixes) == serialize_turtle(&m.graph, prefixes),
            "{} differs from its log replay",
            m.id
        );
    }
    Ok(format!(
        "7 stages, {} CQ tests pass, 0 model/data errors, reruns byte-identical ({} bytes), \
         log replay byte-identical ({} bytes of Turtle) in {took:?}",
        report.query.passes,
        bytes_a.len(),
        main_ttl.len()
    ))
}

fn c6() -> Outcome {
    let started = Instant::now();
    for (check, name, text) in DEFECTS {
        let g = graph(&[text]);
        let snapshot = extract_snapshot(&g).map_err(|e| format!("{name}: {e}"))?;
        let findings = run_model_tests(&g, &snapshot);
        let intended = findings.iter().filter(|f| f.check == check).count();
        ensure!(intended == 1, "{name}: {intended} {check:?} findings");
        let spurious = findings
            .iter()
            .filter(|f| f.check != check && f.severity == ontoforge_core::testkit::Severity::Error)
            .count();
        ensure!(spurious == 0, "{name}: {spurious} spurious errors: {findings:?}");
        let data = run_data_tests(&g, &snapshot);
        ensure!(error_count(&data) == 0, "{name}: data errors {data:?}");
    }
    let clean = graph(&[fixtures::DEFECT_BASE]);
    let clean_findings = run_model_tests(&clean, &extract_snapshot(&clean).map_err(|e| e.to_string())?);
    ensure!(clean_findings.is_empty(), "defect-free base has findings: {clean_findings:?}");
    let took = within(started, Duration::from_secs(5))?;
    Ok(format!("{} defects each give exactly one finding in {took:?}", DEFECTS.len()))
}

fn class(name: &str) -> ProposalDraft {
    ProposalDraft { kind: ProposalKind::ClassDef, payload: serde_json::json!({ "name": name }) }
}

/// Class name and vote count.
type Tally = Vec<(String, usize)>;

fn vote(samples: &[String], k: usize) -> (Tally, Tally) {
    let request = ChatRequest::new(vec![Message::user("propose classes")], 0.7, k, "vote").expect("valid request");
    let response = ChatResponse { completions: samples.to_vec(), meta: ResponseMeta::default() };
    let outcome = vote_on(request, response, &[ProposalKind::ClassDef], k);
    let names = |items: &[ontoforge_core::llm::vote::VoteItem]| {
        items.iter().map(|i| (i.draft.text("name").unwrap_or_default().to_string(), i.count)).collect()
    };
    (names(&outcome.tally.winners), names(&outcome.tally.minority))
}

fn c7() -> Outcome {
    let started = Instant::now();
    let s = |names: &[&str]| render_completion(&names.iter().map(|n| class(n)).collect::<Vec<_>>());
    let pair = |v: &[(&str, usize)]| v.iter().map(|(n, c)| (n.to_string(), *c)).collect::<Vec<_>>();

    let (winners, minority) = vote(&[s(&["Car", "Brand"]), s(&["car", "Fuel"]), s(&["Brand", "Car", "Brand"])], 3);
    ensure!(winners == pair(&[("Car", 3), ("Brand", 2)]), "k=3 winners {winners:?}");
    ensure!(minority == pair(&[("Fuel", 1)]), "k=3 minority {minority:?}");

    let four = [s(&["Car", "Brand"]), s(&["Car", "Brand"]), s(&["Car", "Fuel"]), "no block here".to_string()];
    let (winners, minority) = vote(&four, 4);
    ensure!(winners == pair(&[("Car", 3)]), "k=4 winners {winners:?}");
    ensure!(minority == pair(&[("Brand", 2), ("Fuel", 1)]), "k=4 minority {minority:?}: a 2-2 split is not a majority");
    let took = within(started, Duration::from_secs(1))?;
    Ok(format!("k=3 keeps 2 of 3, k=4 needs 3 of 4, in {took:?}"))
}

fn c8() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc8);
    let mut project = henri::new_project().map_err(|e| e.to_string())?;
    for _ in 0..500 {
        common::random_op(&mut project, &mut rng);
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    save_project(&project, dir.path()).map_err(|e| e.to_string())?;
    let loaded = load_project(dir.path()).map_err(|e| e.to_string())?;
    ensure!(loaded == project, "reloaded state differs");

    let canonical = fs::read(dir.path().join(PROJECT_FILE)).map_err(|e| e.to_string())?;
    let mut changed = project.clone();
    for step in 0..20 {
        common::random_op(&mut changed, &mut rng);
        write_interrupted(&changed, dir.path(), f64::from(step) / 20.0).map_err(|e| e.to_string())?;
        let now = fs::read(dir.path().join(PROJECT_FILE)).map_err(|e| e.to_string())?;
        ensure!(now == canonical, "interrupted write at {}% changed the canonical file", step * 5);
        ensure!(load_project(dir.path()).map_err(|e| e.to_string())? == project, "canonical file no longer loads");
    }
    let took = started.elapsed();
    let count = |action: &str| project.log.iter().filter(|e| format!("{:?}", e.action) == action).count();
    ensure!(count("StageRun") > 0 && count("Decided") > 0, "no stage run or decision took effect");
    Ok(format!(
        "{} log entries ({} stage runs, {} decisions, {} reopens), {} triples reload identically; \
         20 interrupted writes harmless, in {took:?}",
        project.log.len(),
        count("StageRun"),
        count("Decided"),
        count("StageReopened"),
        project.model.graph.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("C1 table4 metrics", c1),
        ("C2 DL expressivity", c2),
        ("C3 SPARQL oracle and reference queries", c3),
        ("C4 Turtle round-trip and mutants", c4),
        ("C5 end-to-end mock pipeline", c5),
        ("C6 seeded defects", c6),
        ("C7 self-consistency voting", c7),
        ("C8 persistence", c8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
