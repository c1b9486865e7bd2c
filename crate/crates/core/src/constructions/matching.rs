use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::algebra::{
    generated_partition, refine_with_parts, signatures, Event, EventTuple, MeasuredAlgebra, Projection,
};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::{lcm_of_denominators, Rational};

use super::partial::PartialIsomorphism;

/// An automorphism of a refinement carrying one labelled partition onto another.
#[derive(Clone, Debug)]
pub struct Matching {
    pub algebra: MeasuredAlgebra,
    pub projection: Projection,
    pub g: Perm,
}

/// Largest `u` with every mass an integer multiple of `u`, and those multiples.
fn common_unit(masses: &[&Rational]) -> Result<(Rational, Vec<usize>)> {
    let l = lcm_of_denominators(masses.iter().copied());
    let ints: Vec<BigInt> = masses
        .iter()
        .map(|m| m.numer() * (&l / m.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, n| acc.gcd(n));
    let counts = ints
        .iter()
        .map(|n| {
            (n / &g)
                .to_usize()
                .ok_or_else(|| Error::InstanceTooLarge("refinement too fine".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Rational::from_big(g, l), counts))
}

/// An automorphism `g` of a refinement mapping the atoms labelled `s` by `la`
/// onto those labelled `s` by `lb`.
///
/// Atoms where the labels agree stay fixed. The others are cut into units of
/// their common gcd mass; within each label `s` the units of `la⁻¹(s) ∖ lb⁻¹(s)`
/// go in order to the units of `lb⁻¹(s) ∖ la⁻¹(s)`. Requires equal label masses.
pub fn match_labelings(alg: &MeasuredAlgebra, la: &[usize], lb: &[usize]) -> Result<Matching> {
    let n = alg.len();
    if la.len() != n || lb.len() != n {
        return Err(Error::AlgebraMismatch);
    }
    let labels = la.iter().chain(lb).copied().max().map_or(0, |m| m + 1);
    let mut ma = vec![Rational::zero(); labels];
    let mut mb = vec![Rational::zero(); labels];
    for x in 0..n {
        ma[la[x]] += alg.atom_mass(x);
        mb[lb[x]] += alg.atom_mass(x);
    }
    if ma != mb {
        return Err(Error::TypeMismatch);
    }
    let moved: Vec<usize> = (0..n).filter(|&x| la[x] != lb[x]).collect();
    let mut parts: Vec<Vec<Rational>> = alg.atoms().iter().map(|m| vec![m.clone()]).collect();
    if !moved.is_empty() {
        let masses: Vec<&Rational> = moved.iter().map(|&x| alg.atom_mass(x)).collect();
        let (unit, counts) = common_unit(&masses)?;
        for (&x, &c) in moved.iter().zip(&counts) {
            parts[x] = vec![unit.clone(); c];
        }
    }
    let (fine, projection) = refine_with_parts(alg, parts)?;
    let coarse_fibers = projection.fibers(n);
    let mut sources: Vec<Vec<usize>> = vec![Vec::new(); labels];
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); labels];
    for &x in &moved {
        sources[la[x]].extend(&coarse_fibers[x]);
        targets[lb[x]].extend(&coarse_fibers[x]);
    }
    let mut images: Vec<usize> = (0..fine.len()).collect();
    for (src, tgt) in sources.iter().zip(&targets) {
        debug_assert_eq!(src.len(), tgt.len());
        for (&u, &v) in src.iter().zip(tgt) {
            images[u] = v;
        }
    }
    let g = Perm::from_images(images).expect("unit matching is a bijection");
    Ok(Matching {
        algebra: fine,
        projection,
        g,
    })
}

/// An automorphism `g` of a refinement with `g(a) = b` coordinatewise, fixing
/// every atom on which `a` and `b` agree.
pub fn match_partitions(alg: &MeasuredAlgebra, a: &EventTuple, b: &EventTuple) -> Result<Matching> {
    if a.arity() != b.arity() {
        return Err(Error::ArityMismatch {
            left: a.arity(),
            right: b.arity(),
        });
    }
    let pa = generated_partition(alg, a)?;
    let pb = generated_partition(alg, b)?;
    if pa.cells.iter().zip(&pb.cells).any(|(x, y)| x.mass != y.mass) {
        return Err(Error::TypeMismatch);
    }
    match_labelings(alg, &signatures(alg, a)?, &signatures(alg, b)?)
}

/// One back-and-forth step, the output of [`extend_partial_step`].
#[derive(Clone, Debug)]
pub struct Extension {
    pub algebra: MeasuredAlgebra,
    pub projection: Projection,
    /// The ambient automorphism lifted to the refinement.
    pub g: Perm,
    pub partial: PartialIsomorphism,
    /// `½ Σ_j μ(g B_j △ C_j)`, equal before and after the step.
    pub defect: Rational,
}

fn defect_of(alg: &MeasuredAlgebra, g: &Perm, pairs: &[(Vec<usize>, Vec<usize>)]) -> Rational {
    let mut total = Rational::zero();
    for (s, t) in pairs {
        let mut gs: Vec<usize> = s.iter().map(|&x| g.apply(x)).collect();
        gs.sort_unstable();
        let sym: Vec<usize> = gs
            .iter()
            .filter(|x| t.binary_search(x).is_err())
            .chain(t.iter().filter(|x| gs.binary_search(x).is_err()))
            .copied()
            .collect();
        total += alg.mass_unchecked(&sym);
    }
    total.div_int(2)
}

/// Extends the partial self-map `p` of `alg` by a target for `newsource`.
///
/// The defect of `p` against the automorphism `g` must be below `bound`. The
/// new target `c'` is `h(g(E))`, where `h` matches `(g B_j)` onto `(C_j)`; this
/// keeps every pair's mass and the defect unchanged. Each pair `(B, C)` splits
/// into `(B ∩ E, C ∩ c')` and `(B ∖ E, C ∖ c')`, the latter staying implicit for
/// the complement pair.
pub fn extend_partial_step(
    alg: &MeasuredAlgebra,
    g: &Perm,
    p: &PartialIsomorphism,
    newsource: &Event,
    bound: &Rational,
) -> Result<Extension> {
    let n = alg.len();
    if p.source != alg.id() || p.target != alg.id() || newsource.algebra() != alg.id() {
        return Err(Error::AlgebraMismatch);
    }
    if g.len() != n || !alg.preserves_mass(g) {
        return Err(Error::NotMeasurePreserving {
            generator: 0,
            atom: (0..n.min(g.len()))
                .find(|&x| alg.atom_mass(x) != alg.atom_mass(g.apply(x)))
                .unwrap_or(0),
        });
    }
    let full = p.full_pairs(n, n);
    let explicit = p.pairs.len();
    let defect = defect_of(alg, g, &full);
    if defect >= *bound {
        return Err(Error::BoundViolated {
            defect,
            bound: bound.clone(),
        });
    }
    // Refine into equal units so that g lifts.
    let masses: Vec<&Rational> = alg.atoms().iter().collect();
    let (unit, counts) = common_unit(&masses)?;
    let parts = counts.iter().map(|&c| vec![unit.clone(); c]).collect();
    let (units, to_coarse) = refine_with_parts(alg, parts)?;
    let fibers = to_coarse.fibers(n);
    let mut lifted = vec![0; units.len()];
    for x in 0..n {
        for (&u, &v) in fibers[x].iter().zip(&fibers[g.apply(x)]) {
            lifted[u] = v;
        }
    }
    let g_units = Perm::from_images(lifted).expect("lift of a mass-preserving map");
    let mut label_src = vec![0; n];
    let mut label_tgt = vec![0; n];
    for (j, (s, t)) in full.iter().enumerate() {
        for &x in s {
            label_src[x] = j;
        }
        for &x in t {
            label_tgt[x] = j;
        }
    }
    // la(u) = index of the pair whose g(B_j) contains u.
    let inv = g_units.inverse();
    let la: Vec<usize> = (0..units.len())
        .map(|u| label_src[to_coarse.parent[inv.apply(u)]])
        .collect();
    let lb: Vec<usize> = (0..units.len()).map(|u| label_tgt[to_coarse.parent[u]]).collect();
    let m = match_labelings(&units, &la, &lb)?;
    let projection = m.projection.then(&to_coarse)?;
    let fine = m.algebra;
    // The matching leaves units whole, so fine atoms correspond to units.
    debug_assert_eq!(fine.len(), units.len());
    let g_fine = g_units;
    let e_fine: Vec<bool> = projection.parent.iter().map(|&x| newsource.contains(x)).collect();
    let mut c_new = vec![false; fine.len()];
    for u in 0..fine.len() {
        if e_fine[u] {
            c_new[m.g.apply(g_fine.apply(u))] = true;
        }
    }
    let mut pairs = Vec::new();
    for (j, (s, t)) in full.iter().enumerate() {
        let lift = |block: &[usize]| -> Vec<usize> {
            let mut v: Vec<usize> = block.iter().flat_map(|&x| fibers[x].iter().copied()).collect();
            v.sort_unstable();
            v
        };
        let (fs, ft) = (lift(s), lift(t));
        let inside: (Vec<usize>, Vec<usize>) = (
            fs.iter().copied().filter(|&u| e_fine[u]).collect(),
            ft.iter().copied().filter(|&u| c_new[u]).collect(),
        );
        let outside: (Vec<usize>, Vec<usize>) = (
            fs.iter().copied().filter(|&u| !e_fine[u]).collect(),
            ft.iter().copied().filter(|&u| !c_new[u]).collect(),
        );
        if !inside.0.is_empty() {
            pairs.push(inside);
        }
        if j < explicit && !outside.0.is_empty() {
            pairs.push(outside);
        }
    }
    let partial = PartialIsomorphism::new(&fine, &fine, pairs)?;
    let new_defect = defect_of(&fine, &g_fine, &partial.full_pairs(fine.len(), fine.len()));
    debug_assert_eq!(new_defect, defect);
    Ok(Extension {
        algebra: fine,
        projection,
        g: g_fine,
        partial,
        defect: new_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::uniform_distance;
    use crate::algebra::dist_partition;
    use crate::rational::q;

    #[test]
    fn swap_example() {
        let alg = MeasuredAlgebra::uniform(4).unwrap();
        let a = alg.tuple_of(&[&[0, 1]]).unwrap();
        let b = alg.tuple_of(&[&[0, 2]]).unwrap();
        let m = match_partitions(&alg, &a, &b).unwrap();
        assert_eq!(m.g.images(), &[0, 2, 1, 3]);
        let d = uniform_distance(&m.algebra, &m.g, &Perm::identity(4)).unwrap();
        assert_eq!(d, q(1, 2));
        assert_eq!(dist_partition(&alg, &a, &b).unwrap(), q(1, 2));
    }

    #[test]
    fn identity_and_mismatch() {
        let alg = MeasuredAlgebra::uniform(6).unwrap();
        let a = alg.tuple_of(&[&[0, 1, 2]]).unwrap();
        assert!(match_partitions(&alg, &a, &a).unwrap().g.is_identity());
        let b = alg.tuple_of(&[&[0, 1]]).unwrap();
        assert_eq!(match_partitions(&alg, &b, &a).unwrap_err(), Error::TypeMismatch);
    }

    #[test]
    fn splits_unequal_atoms() {
        let alg = crate::algebra::validate_algebra(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
        let a = alg.tuple_of(&[&[0]]).unwrap();
        let b = alg.tuple_of(&[&[1, 2]]).unwrap();
        let m = match_partitions(&alg, &a, &b).unwrap();
        assert_eq!(m.algebra.len(), 4);
        let la = m.projection.lift_tuple(&a).unwrap();
        let lb = m.projection.lift_tuple(&b).unwrap();
        assert_eq!(la.image(&m.g), lb);
    }

    #[test]
    fn whole_space_extension() {
        let alg = MeasuredAlgebra::uniform(3).unwrap();
        let p = PartialIsomorphism::empty(&alg, &alg);
        let g = Perm::from_images(vec![1, 2, 0]).unwrap();
        let ext = extend_partial_step(&alg, &g, &p, &alg.whole(), &q(1, 10)).unwrap();
        assert_eq!(ext.partial.pairs, vec![(vec![0, 1, 2], vec![0, 1, 2])]);
        assert!(ext.defect.is_zero());
    }

    #[test]
    fn extension_keeps_slack() {
        // {0,1} ↦ {0,2} with complement {2,3} ↦ {1,3}; against g = id both
        // symmetric differences are {1,2}, so the defect is 1/2.
        let alg = MeasuredAlgebra::uniform(4).unwrap();
        let p = PartialIsomorphism::new(&alg, &alg, vec![(vec![0, 1], vec![0, 2])]).unwrap();
        let g = Perm::identity(4);
        let e = alg.event([1, 3]).unwrap();
        let ext = extend_partial_step(&alg, &g, &p, &e, &q(3, 4)).unwrap();
        assert_eq!(ext.defect, q(1, 2));
        for (s, t) in &ext.partial.pairs {
            assert_eq!(ext.algebra.mass_unchecked(s), ext.algebra.mass_unchecked(t));
        }
        assert!(matches!(
            extend_partial_step(&alg, &g, &p, &e, &q(1, 2)),
            Err(Error::BoundViolated { .. })
        ));
    }
}
