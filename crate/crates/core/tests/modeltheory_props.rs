mod common;

use common::*;
use pmplab::algebra::{dist_partition, joint_distribution, EventTuple, MeasuredAlgebra};
use pmplab::constructions::realize_tv_coupling;
use pmplab::modeltheory::{
    coupling_distance_max, eps_independent, independence_deficiency, independence_deficiency_max,
    oracle_type_distance, type_distance_max, type_distance_tv, Metric,
};
use pmplab::{Error, Rational};
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64, max_fiber: usize) -> (MeasuredAlgebra, EventTuple, EventTuple, EventTuple) {
    let mut rng = rng(seed);
    let alg = algebra_with_denom(&mut rng, 6, 12);
    let base = random_tuple_between(&mut rng, &alg, 0, 2);
    let k = rng.gen_range(1..=max_fiber);
    let b = random_tuple(&mut rng, &alg, k);
    let c = random_tuple(&mut rng, &alg, k);
    (alg, base, b, c)
}

fn grid(alg: &MeasuredAlgebra) -> usize {
    pmplab::rational::lcm_of_denominators(alg.atoms().iter()).to_string().parse().unwrap()
}

fn live_cells(alg: &MeasuredAlgebra, base: &EventTuple) -> usize {
    pmplab::algebra::generated_partition(alg, base).unwrap().cells.iter().filter(|c| !c.atoms.is_empty()).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn type_metrics_are_sandwiched(seed in any::<u64>()) {
        let (alg, base, b, c) = instance(seed, 2);
        let tv = type_distance_tv(&alg, &base, &b, &c).unwrap();
        let max = type_distance_max(&alg, &base, &b, &c).unwrap();
        let n = b.arity();
        prop_assert!(max <= tv);
        prop_assert!(tv <= max.scale(n << (n - 1)));
        prop_assert!(tv <= dist_partition(&alg, &b, &c).unwrap());
    }

    #[test]
    fn type_distance_is_a_pseudometric(seed in any::<u64>()) {
        let (alg, base, b, c) = instance(seed, 2);
        let mut rng = rng(seed ^ 7);
        let e = random_tuple(&mut rng, &alg, b.arity());
        for metric in [Metric::Tv, Metric::Max] {
            let d = |x: &EventTuple, y: &EventTuple| pmplab::modeltheory::type_distance(&alg, &base, x, y, metric).unwrap();
            prop_assert!(d(&b, &b).is_zero());
            prop_assert_eq!(d(&b, &c), d(&c, &b));
            prop_assert!(d(&b, &c) <= d(&b, &e) + d(&e, &c));
        }
    }

    #[test]
    fn max_lp_never_beats_grid_couplings(seed in any::<u64>()) {
        let (alg, base, b, c) = instance(seed, 2);
        prop_assume!(live_cells(&alg, &base) <= 3);
        let exact = type_distance_max(&alg, &base, &b, &c).unwrap();
        let brute = oracle_type_distance(&alg, &base, &b, &c, grid(&alg), Metric::Max).unwrap();
        prop_assert!(exact <= brute);
        let finer = oracle_type_distance(&alg, &base, &b, &c, 2 * grid(&alg), Metric::Max);
        if let Ok(finer) = finer {
            prop_assert!(exact <= finer && finer <= brute);
        }
    }

    #[test]
    fn realized_coupling_attains_the_distance(seed in any::<u64>()) {
        let (alg, base, b, c) = instance(seed, 3);
        let r = realize_tv_coupling(&alg, &base, &b, &c).unwrap();
        let want = type_distance_tv(&alg, &base, &b, &c).unwrap();
        prop_assert_eq!(&r.distance, &want);
        prop_assert_eq!(dist_partition(&r.algebra, &r.b, &r.c).unwrap(), want);
        let lifted = joint_distribution(&r.algebra, &r.base, &r.projection.lift_tuple(&b).unwrap()).unwrap();
        prop_assert_eq!(joint_distribution(&r.algebra, &r.base, &r.b).unwrap(), lifted);
        prop_assert_eq!(&r.c, &r.projection.lift_tuple(&c).unwrap());
    }

    #[test]
    fn deficiency_bounds(seed in any::<u64>()) {
        let (alg, base, b, c) = instance(seed, 2);
        let tv = independence_deficiency(&alg, &base, &b, &c).unwrap();
        let max = independence_deficiency_max(&alg, &base, &b, &c).unwrap();
        prop_assert!(max <= tv && tv <= Rational::one());
        prop_assert_eq!(tv.is_zero(), max.is_zero());
        let eps = &tv + Rational::new(1, 1000);
        prop_assert!(eps_independent(&alg, &base, &b, &c, &eps, Metric::Tv).unwrap());
        if tv.is_positive() {
            prop_assert!(!eps_independent(&alg, &base, &b, &c, &tv, Metric::Tv).unwrap());
        }
    }

    #[test]
    fn independent_of_the_base_itself(seed in any::<u64>()) {
        let (alg, base, b, _) = instance(seed, 2);
        prop_assert!(independence_deficiency(&alg, &base, &b, &base).unwrap().is_zero());
    }
}

#[test]
fn coupling_rejects_different_bases() {
    let alg = MeasuredAlgebra::uniform(4).unwrap();
    let b1 = alg.tuple_of(&[&[0]]).unwrap();
    let b2 = alg.tuple_of(&[&[0, 1]]).unwrap();
    let f = alg.tuple_of(&[&[1]]).unwrap();
    let p = joint_distribution(&alg, &b1, &f).unwrap();
    let q = joint_distribution(&alg, &b2, &f).unwrap();
    assert_eq!(coupling_distance_max(&p, &q).unwrap_err(), Error::TypeMismatch);
    let wide = joint_distribution(&alg, &b1, &alg.tuple_of(&[&[1], &[2]]).unwrap()).unwrap();
    assert!(matches!(coupling_distance_max(&p, &wide), Err(Error::ArityMismatch { .. })));
}

#[test]
fn oracle_rejects_off_grid_masses() {
    let alg = MeasuredAlgebra::new(vec![Rational::new(1, 3), Rational::new(2, 3)]).unwrap();
    let e = alg.tuple_of(&[&[0]]).unwrap();
    let base = alg.empty_tuple();
    assert_eq!(oracle_type_distance(&alg, &base, &e, &e, 2, Metric::Tv).unwrap_err(), Error::InvalidGrid);
    assert_eq!(oracle_type_distance(&alg, &base, &e, &e, 0, Metric::Tv).unwrap_err(), Error::InvalidGrid);
    assert!(oracle_type_distance(&alg, &base, &e, &e, 3, Metric::Tv).unwrap().is_zero());
}
