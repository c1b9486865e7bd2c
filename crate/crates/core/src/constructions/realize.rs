use crate::algebra::{
    joint_distribution, refine_with_parts, signatures, EventTuple, MeasuredAlgebra, Projection,
};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A realization `b'` of the type of `b` over `base`, placed as close to `c` as
/// total variation allows.
#[derive(Clone, Debug)]
pub struct Realization {
    pub algebra: MeasuredAlgebra,
    pub projection: Projection,
    pub base: EventTuple,
    pub b: EventTuple,
    pub c: EventTuple,
    /// `d_P(b', c)` on the refinement.
    pub distance: Rational,
}

/// Builds `b'` on a refinement with `joint(base, b') = joint(base, b)` and
/// `d_P(b', c) = type_distance_tv(base, b, c)`.
///
/// In each base cell the coupling keeps `min(p_s, q_s)` on the diagonal and
/// ships the excess of `b`'s cells to the deficits in index order. The atoms of
/// each region `base = r, c = t` are then cut, in index order, into pieces
/// labelled by the `b`-cells the coupling sends there.
pub fn realize_tv_coupling(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<Realization> {
    if b.arity() != c.arity() {
        return Err(Error::ArityMismatch {
            left: b.arity(),
            right: c.arity(),
        });
    }
    let n = b.arity();
    let m = base.arity();
    let cells = 1usize << n;
    let jb = joint_distribution(alg, base, b)?;
    let jc = joint_distribution(alg, base, c)?;
    let sig_base = signatures(alg, base)?;
    let sig_c = signatures(alg, c)?;
    // coupling[r][s][t]
    let mut coupling = vec![vec![vec![Rational::zero(); cells]; cells]; 1 << m];
    for (r, plan) in coupling.iter_mut().enumerate() {
        let mut excess: Vec<Rational> = Vec::with_capacity(cells);
        let mut deficit: Vec<Rational> = Vec::with_capacity(cells);
        for s in 0..cells {
            let (p, q) = (jb.get(r, s), jc.get(r, s));
            let keep = Rational::min_of(p, q).clone();
            excess.push(p - &keep);
            deficit.push(q - &keep);
            plan[s][s] = keep;
        }
        let mut t = 0;
        for s in 0..cells {
            while excess[s].is_positive() {
                while !deficit[t].is_positive() {
                    t += 1;
                }
                let amount = Rational::min_of(&excess[s], &deficit[t]).clone();
                excess[s] -= &amount;
                deficit[t] -= &amount;
                plan[s][t] += &amount;
            }
        }
    }
    let mut parts: Vec<Vec<Rational>> = vec![Vec::new(); alg.len()];
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); alg.len()];
    for (r, plan) in coupling.iter().enumerate() {
        for t in 0..cells {
            let mut pieces: Vec<(usize, Rational)> = (0..cells)
                .filter(|&s| plan[s][t].is_positive())
                .map(|s| (s, plan[s][t].clone()))
                .collect();
            pieces.reverse();
            for x in (0..alg.len()).filter(|&x| sig_base[x] == r && sig_c[x] == t) {
                let mut left = alg.atom_mass(x).clone();
                while left.is_positive() {
                    let (s, avail) = pieces.last_mut().expect("region mass matches coupling");
                    let take = Rational::min_of(&left, avail).clone();
                    left -= &take;
                    *avail -= &take;
                    parts[x].push(take);
                    labels[x].push(*s);
                    if avail.is_zero() {
                        pieces.pop();
                    }
                }
            }
        }
    }
    let (fine, projection) = refine_with_parts(alg, parts)?;
    let fine_labels: Vec<usize> = labels.into_iter().flatten().collect();
    let events = (0..n)
        .map(|i| fine.event((0..fine.len()).filter(|&u| (fine_labels[u] >> i) & 1 == 1)))
        .collect::<Result<Vec<_>>>()?;
    let b_new = fine.tuple(events)?;
    let base_new = projection.lift_tuple(base)?;
    let c_new = projection.lift_tuple(c)?;
    let distance = crate::algebra::dist_partition(&fine, &b_new, &c_new)?;
    Ok(Realization {
        algebra: fine,
        projection,
        base: base_new,
        b: b_new,
        c: c_new,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modeltheory::type_distance_tv;
    use crate::rational::q;

    #[test]
    fn realizes_closed_form() {
        let alg = crate::algebra::validate_algebra(vec![q(1, 3), q(1, 6), q(1, 2)]).unwrap();
        let e = alg.empty_tuple();
        let b = alg.tuple_of(&[&[0]]).unwrap();
        let c = alg.tuple_of(&[&[2]]).unwrap();
        let r = realize_tv_coupling(&alg, &e, &b, &c).unwrap();
        assert_eq!(r.distance, q(1, 6));
        assert_eq!(type_distance_tv(&alg, &e, &b, &c).unwrap(), r.distance);
        assert_eq!(
            joint_distribution(&r.algebra, &r.base, &r.b).unwrap(),
            joint_distribution(&alg, &e, &b).unwrap()
        );
    }
}
