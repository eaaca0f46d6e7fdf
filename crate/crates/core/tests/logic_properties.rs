use entail_core::data::{generate_dataset, label_pair, SplitSpec};
use entail_core::fol::{compile_axioms, filter_axioms, translate, AxiomSet, Formula};
use entail_core::lang::{generate_sentence, parse_str, Sentence};
use entail_core::prover::oracle::ModelTable;
use entail_core::prover::{
    analyze_pair, brute_force_label, classify_pair, model_of_size, ClauseSet, Limits, SatVerdict,
};
use entail_core::{Language, Relation, SlotPolicy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sentence(seed: u64, lang: &Language, policy: SlotPolicy) -> Sentence {
    generate_sentence(&mut ChaCha8Rng::seed_from_u64(seed), &lang.vocabulary, policy)
}

fn count_nots(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) => 0,
        Formula::Not(g) => 1 + count_nots(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => count_nots(a) + count_nots(b),
        Formula::Forall(_, g) | Formula::Exists(_, g) => count_nots(g),
    }
}

fn pair_problem(phi: &Formula, psi: &Formula, axioms: &AxiomSet) -> Formula {
    let mut f = Formula::and(phi.clone(), Formula::not(psi.clone()));
    for a in axioms.formulas() {
        f = Formula::and(f, a.clone());
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn determiner_negation_wraps_the_whole_sentence(seed in any::<u64>()) {
        let lang = Language::default_language();
        let mut s = sentence(seed, &lang, SlotPolicy::five_slots());
        s.subject.det_neg = false;
        let mut negated = s.clone();
        negated.subject.det_neg = true;
        prop_assert_eq!(translate(&negated), Formula::not(translate(&s)));
    }

    #[test]
    fn each_negation_slot_contributes_one_negation(seed in any::<u64>()) {
        let lang = Language::default_language();
        let s = sentence(seed, &lang, SlotPolicy::five_slots());
        let f = translate(&s);
        prop_assert_eq!(count_nots(&f), s.negation_count());
        prop_assert!(f.is_closed());
        prop_assert!(f.bound_vars().iter().all(|v| *v <= 1));
    }

    #[test]
    fn swapping_a_pair_gives_the_converse(a in any::<u64>(), b in any::<u64>()) {
        let lang = Language::default_language();
        let axioms = compile_axioms(&lang);
        let l = sentence(a, &lang, SlotPolicy::four_slots());
        let r = sentence(b, &lang, SlotPolicy::four_slots());
        let forward = label_pair(&l, &r, &axioms, &Limits::default()).unwrap();
        let backward = label_pair(&r, &l, &axioms, &Limits::default()).unwrap();
        prop_assert_eq!(backward, forward.converse());
    }

    #[test]
    fn negating_the_right_sentence_swaps_bits(a in any::<u64>(), b in any::<u64>()) {
        let lang = Language::default_language();
        let axioms = compile_axioms(&lang);
        let l = sentence(a, &lang, SlotPolicy::four_slots());
        let mut r = sentence(b, &lang, SlotPolicy::four_slots());
        let phi = translate(&l);
        let psi = translate(&r);
        r.subject.det_neg = !r.subject.det_neg;
        let psi_neg = translate(&r);
        let filtered = filter_axioms(&axioms, &phi, &psi);
        prop_assert_eq!(&filtered, &filter_axioms(&axioms, &phi, &psi_neg));
        let x = analyze_pair(&phi, &psi, &filtered, &Limits::default()).unwrap().bits;
        let y = analyze_pair(&phi, &psi_neg, &filtered, &Limits::default()).unwrap().bits;
        prop_assert_eq!(y, [x[1], x[0], x[3], x[2]]);
        let flip = |r: Relation| match r {
            Relation::Equivalence => Some(Relation::Negation),
            Relation::Negation => Some(Relation::Equivalence),
            Relation::Forward => Some(Relation::Alternation),
            Relation::Alternation => Some(Relation::Forward),
            _ => None,
        };
        let rel_x = Relation::from_bits(x[0], x[1], x[2], x[3]);
        let rel_y = Relation::from_bits(y[0], y[1], y[2], y[3]);
        if let Some(expected) = flip(rel_x) {
            prop_assert_eq!(rel_y, expected);
        }
    }
}

/// Three nouns and one verb keep exhaustive enumeration up to three elements
/// cheap.
fn small_language() -> Language {
    Language::default_language().restrict(&["Romans", "Italians", "Germans"], &["hate"]).unwrap()
}

#[test]
fn clausification_preserves_models_per_domain_size() {
    let lang = small_language();
    let axioms = compile_axioms(&lang);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut unsat = 0;
    for _ in 0..500 {
        let l = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
        let r = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
        let (phi, psi) = (translate(&l), translate(&r));
        let f = pair_problem(&phi, &psi, &filter_axioms(&axioms, &phi, &psi));
        let clauses = ClauseSet::from_formulas([&f]);
        let mut found = false;
        for d in 1..=3 {
            found |= model_of_size(&clauses, d).unwrap().is_some();
            let table = ModelTable::new(&f.predicates(), d, 1 << 22).unwrap();
            let brute = !table.models(&f).unwrap().is_empty();
            assert_eq!(found, brute, "{l} / {r}, domain {d}");
        }
        unsat += !found as usize;
    }
    // the sample must exercise both outcomes
    assert!(unsat > 0, "{unsat}");
    eprintln!("{unsat} of 500 unsatisfiable");
}

#[test]
fn prover_agrees_with_enumeration_on_random_pairs() {
    // Model search tries sizes in increasing order, so a satisfiable bit is
    // visible to enumeration up to three elements exactly when the prover's
    // model has at most three.
    let lang = small_language();
    let axioms = compile_axioms(&lang);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut beyond_three = 0;
    for _ in 0..500 {
        let l = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
        let r = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
        let (phi, psi) = (translate(&l), translate(&r));
        let filtered = filter_axioms(&axioms, &phi, &psi);
        let analysis = analyze_pair(&phi, &psi, &filtered, &Limits::default()).unwrap();
        let mut preds = phi.predicates();
        preds.extend(psi.predicates());
        let table = ModelTable::new(&preds, 3, 1 << 22).unwrap();
        let a = table.models_of_all(filtered.formulas()).unwrap();
        let p = table.models(&phi).unwrap();
        let q = table.models(&psi).unwrap();
        let (np, nq) = (p.not(table.len()), q.not(table.len()));
        let brute = [(&p, &q), (&p, &nq), (&np, &q), (&np, &nq)].map(|(x, y)| !a.and(x).and(y).is_empty());
        for (i, verdict) in analysis.verdicts.iter().enumerate() {
            let small = match verdict {
                SatVerdict::Sat(m) => m.size() <= 3,
                SatVerdict::Unsat(_) => false,
                SatVerdict::Undecided(e) => panic!("{l} / {r}: {e:?}"),
            };
            beyond_three += (analysis.bits[i] && !small) as usize;
            assert_eq!(small, brute[i], "{l} / {r}, combination {i}");
        }
        if analysis.bits.iter().zip(&analysis.verdicts).all(|(b, v)| !b || matches!(v, SatVerdict::Sat(m) if m.size() <= 3)) {
            assert_eq!(analysis.relation, brute_force_label(&phi, &psi, &filtered, 3, 1 << 22).unwrap());
        }
    }
    assert!(beyond_three > 0, "sample never needed four elements");
}

/// The full axiom set minus the non-exhaustiveness axioms `¬∀x(A(x) ∨ B(x))`.
fn without_non_exhaustiveness(axioms: &AxiomSet) -> AxiomSet {
    let mut out = AxiomSet::new();
    for a in axioms.axioms() {
        if !matches!(a.formula, Formula::Not(_)) {
            out.insert(a.clone());
        }
    }
    out
}

#[test]
fn filtering_is_sound_for_the_universal_axioms() {
    let lang = Language::default_language();
    let all = compile_axioms(&lang);
    let universal = without_non_exhaustiveness(&all);
    assert_eq!(universal.len(), all.len() - 6);
    let wide = Limits { max_domain: 6, ..Limits::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let l = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
        let r = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
        let (phi, psi) = (translate(&l), translate(&r));
        let filtered = classify_pair(&phi, &psi, &filter_axioms(&universal, &phi, &psi), &Limits::default()).unwrap();
        let full = classify_pair(&phi, &psi, &universal, &wide).unwrap();
        assert_eq!(filtered, full, "{l} / {r}");
    }
}

#[test]
fn dropped_non_exhaustiveness_axioms_can_change_a_label() {
    // ¬∀x(G(x) ∨ I(x)) is dropped for a pair without Germans, but it still
    // guarantees a non-Italian, which makes these two sentences incompatible.
    let lang = Language::default_language();
    let v = &lang.vocabulary;
    let phi = translate(&parse_str("all not Romans love all Europeans", v).unwrap());
    let psi = translate(&parse_str("all not Italians not like all Romans", v).unwrap());
    let all = compile_axioms(&lang);
    let filtered = classify_pair(&phi, &psi, &filter_axioms(&all, &phi, &psi), &Limits::default()).unwrap();
    let full = classify_pair(&phi, &psi, &all, &Limits::default()).unwrap();
    assert_eq!(filtered, Relation::Independence);
    assert_eq!(full, Relation::Alternation);
}

#[test]
fn filtering_children_and_fear_leaves_nothing() {
    let lang = Language::default_language();
    let phi = translate(&parse_str("all children fear some children", &lang.vocabulary).unwrap());
    assert!(filter_axioms(&compile_axioms(&lang), &phi, &phi).is_empty());
}

#[test]
fn stored_labels_are_reproduced() {
    let lang = Language::default_language();
    let spec = SplitSpec { train_size: 200, test_size: 50, seed: 9, ..SplitSpec::default() };
    let d = generate_dataset(&lang, &spec, &Limits::default()).unwrap();
    let axioms = compile_axioms(&lang);
    for p in d.train.iter().chain(&d.test) {
        assert_eq!(label_pair(&p.left, &p.right, &axioms, &Limits::default()).unwrap(), p.relation);
    }
}

#[test]
fn no_undecided_pairs_in_a_large_uniform_sample() {
    let lang = Language::default_language();
    let axioms = compile_axioms(&lang);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let undecided = (0..20_000)
        .filter(|_| {
            let l = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
            let r = generate_sentence(&mut rng, &lang.vocabulary, SlotPolicy::four_slots());
            label_pair(&l, &r, &axioms, &Limits::default()).is_err()
        })
        .count();
    assert_eq!(undecided, 0);
}
