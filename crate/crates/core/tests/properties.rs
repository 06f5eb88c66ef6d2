use addlam_core::parse::{parse_term, parse_type};
use addlam_core::sadd::TypeTree;
use addlam_core::suite::{rename_binders, scramble};
use addlam_core::syntax::Term;
use addlam_core::systemf::ftree_label;
use addlam_core::translate::trans_type;
use addlam_core::types::Type;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn raw_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        4 => prop::sample::select(vec!["x", "y", "a", "b"]).prop_map(Term::var),
        1 => Just(Term::Zero),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["x", "y"]), inner.clone()).prop_map(|(x, b)| Term::lam(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            prop::collection::vec(inner, 2..4).prop_map(Term::Sum),
        ]
    })
}

fn unit_type() -> impl Strategy<Value = Type> {
    let leaf = prop::sample::select(vec!["A", "B", "C"]).prop_map(Type::var);
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(d, c)| Type::arrow(d, c)),
            inner.prop_map(|b| Type::forall("X", Type::arrow(Type::var("X"), b))),
        ]
    })
}

fn tree() -> impl Strategy<Value = TypeTree> {
    prop_oneof![3 => Just(TypeTree::Leaf), 1 => Just(TypeTree::ZeroLeaf)]
        .prop_recursive(4, 16, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| TypeTree::node(a, b)))
}

proptest! {
    #[test]
    fn canonical_form_is_idempotent(t in raw_term()) {
        let c = t.canonicalize();
        prop_assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn reordering_sums_preserves_canonical_form(t in raw_term(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(scramble(&t, &mut rng).canonicalize(), t.canonicalize());
    }

    #[test]
    fn binder_names_do_not_matter(t in raw_term()) {
        let r = rename_binders(&t, "0");
        prop_assert_eq!(&r, &t);
        prop_assert_eq!(r.canonicalize(), t.canonicalize());
    }

    #[test]
    fn printing_then_parsing_is_identity(t in raw_term()) {
        let c = t.canonicalize();
        prop_assert_eq!(parse_term(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn type_printing_round_trips(u in unit_type(), v in unit_type()) {
        let t = Type::plus(u, Type::plus(Type::Zero, v));
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn padding_with_void_is_equivalent(u in unit_type(), v in unit_type()) {
        let t = Type::plus(u.clone(), v.clone());
        prop_assert!(Type::plus(t.clone(), Type::Zero).equiv(&t));
        prop_assert!(Type::plus(v, u).equiv(&t));
    }

    #[test]
    fn translation_commutes_with_labelling(a in tree(), units in prop::collection::vec(unit_type(), 16)) {
        let leaves = a.leaves();
        let lab = |w: &str| leaves.iter().position(|l| l == w).map(|k| units[k % units.len()].clone());
        let labelled = a.label(&lab);
        prop_assume!(labelled.is_some());
        let via = ftree_label(&a, &|w| lab(w).map(|u| trans_type(&u)));
        prop_assert_eq!(via, Some(trans_type(&labelled.unwrap())));
    }

    #[test]
    fn composition_counts_leaves(a in tree(), b in tree()) {
        let c = a.compose(&b);
        prop_assert_eq!(c.leaves().len(), a.leaves().len() * b.leaves().len());
        prop_assert_eq!(
            c.zero_leaves().len(),
            a.zero_leaves().len() + a.leaves().len() * b.zero_leaves().len()
        );
    }

    #[test]
    fn reading_a_type_as_a_tree_round_trips(a in tree(), units in prop::collection::vec(unit_type(), 16)) {
        let leaves = a.leaves();
        let lab = |w: &str| leaves.iter().position(|l| l == w).map(|k| units[k % units.len()].clone());
        let t = a.label(&lab).unwrap();
        let (back, labels) = TypeTree::of_type(&t);
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.label(&|w| labels.get(w).cloned()), Some(t));
    }
}

mod corpus_properties {
    use addlam_core::corpus::generate_corpus;
    use addlam_core::derivation::check_add;
    use addlam_core::reduction::enumerate_redexes;
    use addlam_core::systemf::f_check;
    use addlam_core::transform::step_derivation;
    use addlam_core::translate::{round_trip, trans_term};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn steps_preserve_typing(seed in any::<u64>()) {
            let corpus = generate_corpus(seed, 8, 12);
            prop_assert_eq!(corpus.rejected, 0);
            for e in &corpus.entries {
                for r in enumerate_redexes(&e.add.term) {
                    let d = step_derivation(&e.add, &r).unwrap();
                    prop_assert!(check_add(&d).is_ok(), "{} {}", e.add.term, r);
                    prop_assert!(d.ty.equiv(&e.add.ty));
                }
            }
        }

        #[test]
        fn translations_check_and_reverse(seed in any::<u64>()) {
            let corpus = generate_corpus(seed, 8, 12);
            for s in corpus.entries.iter().filter_map(|e| e.sadd.as_ref()) {
                prop_assert!(f_check(&trans_term(s).fderivation).is_ok());
                prop_assert!(round_trip(s).is_ok(), "{}", s.term);
            }
        }
    }
}
