mod common;

use common::{oracle_is_complete_for, InstanceGen, WORKSHEET_CONCLUSION, WORKSHEET_PREMISES};
use folharness::fol::{parse_formula, Formula, Term};
use folharness::prover::{
    classify_entailment, ground_oracle, refute, Clausifier, OracleVerdict, ProofStatus,
    ResourceLimits,
};
use folharness::Label;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn parse_all(texts: &[&str]) -> Vec<Formula> {
    texts.iter().map(|t| parse_formula(t).unwrap()).collect()
}

#[test]
fn worksheet_is_uncertain_for_both_deciders() {
    let premises = parse_all(&WORKSHEET_PREMISES);
    let conclusion = parse_formula(WORKSHEET_CONCLUSION).unwrap();
    let e = classify_entailment(&premises, &conclusion, &ResourceLimits::default()).unwrap();
    assert_eq!(e.label, Label::Uncertain);
    assert!(!e.trace.resource_exhausted);

    let report = ground_oracle(&premises, &conclusion, 1).unwrap();
    assert_eq!(report.verdict, OracleVerdict::Label(Label::Uncertain));
    // six unary predicates over one element
    assert_eq!(report.interpretations_checked, 64);
    let with = report.model_with_conclusion.unwrap();
    let without = report.model_without_conclusion.unwrap();
    assert_eq!(with.holds_for("Dispensable", &["Worksheet"]), Some(false));
    assert_eq!(without.holds_for("Dispensable", &["Worksheet"]), Some(true));
}

#[test]
fn syllogism_confirmed_by_oracle() {
    let premises = parse_all(&[
        "all x. (Reptile(x) -> Animal(x))",
        "all x. (Turtle(x) -> Reptile(x))",
    ]);
    let conclusion = parse_formula("all x. (Turtle(x) -> Animal(x))").unwrap();
    let e = classify_entailment(&premises, &conclusion, &ResourceLimits::default()).unwrap();
    assert_eq!(e.label, Label::True);
    let report = ground_oracle(&premises, &conclusion, 1).unwrap();
    assert_eq!(report.verdict, OracleVerdict::Label(Label::True));
}

#[test]
fn two_step_refutation_confirmed_by_oracle() {
    // {P(x), Q(x)}, {-P(a)}, {-Q(a)} as sentences
    let premises = parse_all(&["all x. (P(x) | Q(x))", "-P(a)"]);
    let conclusion = parse_formula("Q(a)").unwrap();
    let report = ground_oracle(&premises, &conclusion, 1).unwrap();
    assert_eq!(report.verdict, OracleVerdict::Label(Label::True));

    let mut c = Clausifier::new(100);
    let mut clauses = c.clausify(&premises[0]).unwrap();
    clauses.extend(c.clausify(&premises[1]).unwrap());
    clauses.extend(c.clausify_negated(&conclusion).unwrap());
    assert_eq!(
        refute(&clauses, &ResourceLimits::default()).status,
        ProofStatus::Proved
    );
}

#[test]
fn differential_on_small_model_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    let mut by_label = [0usize; 3];
    let mut inconsistent = 0;
    while compared < 300 {
        let generator = InstanceGen::random(&mut rng, 2);
        let inst = generator.instance(&mut rng);
        if !oracle_is_complete_for(&inst, 2) {
            continue;
        }
        let oracle = ground_oracle(&inst.premises, &inst.conclusion, 2).unwrap();
        let e = classify_entailment(&inst.premises, &inst.conclusion, &ResourceLimits::default())
            .unwrap();
        match oracle.verdict {
            OracleVerdict::Label(label) => {
                assert_eq!(e.label, label, "{:?}", inst);
                assert!(!e.trace.inconsistent_premises);
                by_label[label.index()] += 1;
                compared += 1;
            }
            OracleVerdict::Undecided { .. } => {
                // the bound covers the premises alone, so they really are
                // unsatisfiable
                assert!(e.trace.inconsistent_premises, "{:?}", inst);
                assert_eq!(e.label, Label::True);
                inconsistent += 1;
            }
        }
    }
    assert!(by_label.iter().all(|&n| n > 20), "{by_label:?}");
    assert!(inconsistent > 0);
}

fn ground_formula() -> impl Strategy<Value = Formula> {
    let atom = (0..3usize, prop::collection::vec(0..2usize, 1..=2)).prop_map(|(p, args)| {
        let names = ["P", "Q", "R"];
        let consts = ["a", "b"];
        // fixed arity per predicate keeps signatures consistent
        let arity = if p == 2 { 2 } else { 1 };
        let args = (0..arity)
            .map(|i| Term::constant(consts[args[i % args.len()]]))
            .collect();
        Formula::pred(names[p], args)
    });
    atom.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ground_instances_agree_with_oracle(
        premises in prop::collection::vec(ground_formula(), 0..3),
        conclusion in ground_formula(),
    ) {
        let oracle = ground_oracle(&premises, &conclusion, 2).unwrap();
        let e = classify_entailment(&premises, &conclusion, &ResourceLimits::default()).unwrap();
        if let OracleVerdict::Label(label) = oracle.verdict {
            prop_assert_eq!(e.label, label);
        } else {
            prop_assert!(e.trace.inconsistent_premises);
        }
    }

    #[test]
    fn classification_is_deterministic(
        premises in prop::collection::vec(ground_formula(), 0..3),
        conclusion in ground_formula(),
    ) {
        let limits = ResourceLimits::default();
        let a = classify_entailment(&premises, &conclusion, &limits).unwrap();
        let b = classify_entailment(&premises, &conclusion, &limits).unwrap();
        prop_assert_eq!(a.label, b.label);
        prop_assert_eq!(a.trace.prove_conclusion.clauses_generated, b.trace.prove_conclusion.clauses_generated);
        prop_assert_eq!(
            a.trace.prove_negation.map(|t| t.clauses_generated),
            b.trace.prove_negation.map(|t| t.clauses_generated)
        );
    }

    #[test]
    fn larger_limits_never_lose_a_proof(
        premises in prop::collection::vec(ground_formula(), 0..3),
        conclusion in ground_formula(),
        cap in 1usize..40,
    ) {
        let small = ResourceLimits { max_clauses: cap, ..ResourceLimits::default() };
        let tight = classify_entailment(&premises, &conclusion, &small).unwrap();
        let roomy = classify_entailment(&premises, &conclusion, &ResourceLimits::default()).unwrap();
        if tight.trace.prove_conclusion.status == ProofStatus::Proved {
            prop_assert_eq!(roomy.trace.prove_conclusion.status, ProofStatus::Proved);
        }
        if let (Some(t), Some(r)) = (tight.trace.prove_negation, roomy.trace.prove_negation) {
            if t.status == ProofStatus::Proved {
                prop_assert_ne!(r.status, ProofStatus::Saturated);
            }
        }
    }
}

#[test]
fn skolem_symbols_unique_within_instance() {
    let premises = parse_all(&[
        "exists x. P(x)",
        "all x. exists y. R(x, y)",
        "exists x. exists y. R(x, y)",
    ]);
    let mut c = Clausifier::new(100);
    for p in &premises {
        c.clausify(p).unwrap();
    }
    c.clausify_negated(&parse_formula("all x. P(x)").unwrap()).unwrap();
    let names: Vec<String> = c.symbols.skolem_symbols().map(|s| s.to_string()).collect();
    let mut unique = names.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(names.len(), 5);
    assert_eq!(unique.len(), names.len());
}
