mod common;

use common::*;
use pmplab::action::{tensor_trivial, Word};
use pmplab::algebra::{EventTuple, MeasuredAlgebra};
use pmplab::audit::{axiom_residual, check_c1, ec_discrepancy, ec_in_extension_check, search_c2_witness};
use pmplab::constructions::{quotient_action, Embedding, MarkedGroup};
use pmplab::modeltheory::Metric;
use pmplab::{Error, FkAction, Perm, Rational};
use proptest::prelude::*;
use rand::Rng;

const GROUPS: [&str; 5] = ["cyclic:2:1,1", "cyclic:3:1,2", "cyclic:4:1,2", "cyclic:5:1,3", "sym:3:1,0,2;1,2,0"];

fn params(seed: u64, act: &FkAction) -> (EventTuple, Vec<EventTuple>) {
    let mut rng = rng(seed);
    let alg = act.algebra();
    let a = random_tuple_between(&mut rng, alg, 0, 2);
    let n = rng.gen_range(1..=2);
    let bs = (0..=act.k()).map(|_| random_tuple(&mut rng, alg, n)).collect();
    (a, bs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn c1_is_invariant_under_commuting_relabelling(seed in any::<u64>(), which in 0usize..5, h in 0usize..6) {
        let g = MarkedGroup::parse_builtin(GROUPS[which]).unwrap();
        let act = quotient_action(&g).unwrap();
        let h = h % g.order();
        // Right multiplication commutes with the left regular action.
        let rho = Perm::from_images((0..g.order()).map(|x| g.mul(x, h)).collect()).unwrap();
        prop_assert!(act.gens().iter().all(|s| s.compose(&rho) == rho.compose(s)));
        let (a, bs) = params(seed, &act);
        let moved: Vec<EventTuple> = bs.iter().map(|b| b.image(&rho)).collect();
        for metric in [Metric::Tv, Metric::Max] {
            let r1 = check_c1(&act, &a, &bs, &Rational::new(1, 2), metric).unwrap();
            let r2 = check_c1(&act, &a.image(&rho), &moved, &Rational::new(1, 2), metric).unwrap();
            prop_assert_eq!(r1, r2);
        }
    }

    #[test]
    fn residual_is_consistent(seed in any::<u64>(), which in 0usize..3) {
        let act = quotient_action(&MarkedGroup::parse_builtin(GROUPS[which]).unwrap()).unwrap();
        let (a, bs) = params(seed, &act);
        let r = axiom_residual(&act, &a, &bs, 1, Metric::Tv).unwrap();
        let c1 = check_c1(&act, &a, &bs, &Rational::one(), Metric::Tv).unwrap();
        prop_assert_eq!(&r.bound, &c1.max_value().scale(2));
        prop_assert!(r.residual <= r.best_distance);
        let gap = &r.best_distance - &r.bound;
        prop_assert_eq!(r.residual.is_positive(), gap.is_positive());
        if r.bound >= Rational::one() {
            prop_assert!(r.residual.is_zero());
        }
    }

    #[test]
    fn c2_search_reports_its_best(seed in any::<u64>(), num in 1i64..6) {
        let act = quotient_action(&MarkedGroup::parse_builtin("cyclic:3:1,2").unwrap()).unwrap();
        let (a, bs) = params(seed, &act);
        let eps = Rational::new(num, 10);
        let out = search_c2_witness(&act, &a, &bs, &eps, 2, Metric::Tv).unwrap();
        prop_assert_eq!(out.found, out.best.distance < eps.scale(2));
        prop_assert!(out.best.refinement_depth >= 1 && out.best.refinement_depth <= 2);
        prop_assert_eq!(out.best.action.algebra().len(), 3 * out.best.refinement_depth);
    }
}

#[test]
fn whole_space_parameters_give_zero() {
    let act = quotient_action(&MarkedGroup::parse_builtin("cyclic:3:1,1").unwrap()).unwrap();
    let alg = act.algebra();
    let whole = alg.tuple(vec![alg.whole()]).unwrap();
    let bs = vec![whole.clone(); act.k() + 1];
    let r = check_c1(&act, &alg.empty_tuple(), &bs, &Rational::new(1, 1000), Metric::Tv).unwrap();
    assert!(r.satisfied);
    assert!(r.max_value().is_zero());
}

#[test]
fn input_errors() {
    let act = quotient_action(&MarkedGroup::parse_builtin("cyclic:2:1,1").unwrap()).unwrap();
    let alg = act.algebra();
    let a = alg.tuple_of(&[&[0]]).unwrap();
    let b = alg.tuple_of(&[&[1]]).unwrap();
    assert_eq!(
        check_c1(&act, &a, std::slice::from_ref(&b), &Rational::one(), Metric::Tv).unwrap_err(),
        Error::WrongTupleCount { expected: 3, got: 1 }
    );
    assert_eq!(
        check_c1(&act, &a, &[b.clone(), b.clone(), b.clone()], &Rational::zero(), Metric::Tv).unwrap_err(),
        Error::NonpositiveEps(Rational::zero())
    );
    let wide = alg.tuple_of(&[&[0], &[1]]).unwrap();
    assert!(matches!(
        check_c1(&act, &a, &[b.clone(), wide, b], &Rational::one(), Metric::Tv),
        Err(Error::ArityMismatch { .. })
    ));
}

#[test]
fn extension_check_recomputes() {
    let small = quotient_action(&MarkedGroup::parse_builtin("cyclic:2:1,1").unwrap()).unwrap();
    let big = tensor_trivial(&small, &MeasuredAlgebra::uniform(2).unwrap());
    let embed = Embedding {
        source: small.algebra().id(),
        target: big.algebra().id(),
        images: vec![vec![0, 1], vec![2, 3]],
    };
    let as_ = small.algebra().tuple_of(&[&[0]]).unwrap();
    let words = vec![Word::empty(), Word::new(vec![1]), Word::new(vec![-2, 1])];
    for members in [&[0usize, 2][..], &[0], &[1, 2], &[0, 1, 3]] {
        let bs = big.algebra().tuple_of(&[members]).unwrap();
        let out = ec_in_extension_check(&small, &big, &embed, &as_, &bs, &words, &Rational::new(1, 4), 2).unwrap();
        let again = ec_discrepancy(&big, &embed, &as_, &bs, &words, &out.action, &out.projection, &out.cs).unwrap();
        assert_eq!(again, out.discrepancy, "bs = {members:?}");
        assert_eq!(out.found, out.discrepancy < Rational::new(1, 4));
    }
    let scrambled = Embedding { images: vec![vec![0, 2], vec![1, 3]], ..embed };
    let bs = big.algebra().tuple_of(&[&[0]]).unwrap();
    assert_eq!(
        ec_in_extension_check(&small, &big, &scrambled, &as_, &bs, &words, &Rational::new(1, 4), 2).unwrap_err(),
        Error::EmbeddingNotEquivariant
    );
}
