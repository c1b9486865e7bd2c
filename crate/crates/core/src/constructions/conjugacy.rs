use rayon::prelude::*;

use crate::action::{uniform_distance, uniform_refine_action, FkAction};
use crate::algebra::Projection;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::{lcm_of_denominators, Rational};

/// An explicit isomorphism `h` between equal-atom refinements of two actions,
/// with its exact intertwining defect.
#[derive(Clone, Debug)]
pub struct ConjugacyCertificate {
    pub left: FkAction,
    pub left_projection: Projection,
    pub right: FkAction,
    pub right_projection: Projection,
    /// Left atom `x` goes to right atom `h(x)`.
    pub h: Perm,
    /// `max_i ∂(h g_i h⁻¹, g'_i)`.
    pub eps: Rational,
    /// Set when no exact conjugacy was found within the budget.
    pub budget_exhausted: bool,
}

/// Recomputes `max_i ∂(h g_i h⁻¹, g'_i)` from scratch.
pub fn verify_certificate(cert: &ConjugacyCertificate) -> Result<Rational> {
    conjugation_defect(&cert.left, &cert.right, &cert.h)
}

fn conjugation_defect(left: &FkAction, right: &FkAction, h: &Perm) -> Result<Rational> {
    if left.k() != right.k() {
        return Err(Error::GeneratorCountMismatch {
            expected: left.k(),
            got: right.k(),
        });
    }
    let alg = right.algebra();
    if h.len() != left.algebra().len() || h.len() != alg.len() {
        return Err(Error::AlgebraMismatch);
    }
    if (0..h.len()).any(|x| left.algebra().atom_mass(x) != alg.atom_mass(h.apply(x))) {
        return Err(Error::NotMeasurePreserving {
            generator: 0,
            atom: (0..h.len())
                .find(|&x| left.algebra().atom_mass(x) != alg.atom_mass(h.apply(x)))
                .unwrap_or(0),
        });
    }
    let h_inv = h.inverse();
    let mut eps = Rational::zero();
    for i in 0..left.k() {
        let conj = h.compose(left.gen(i)).compose(&h_inv);
        let d = uniform_distance(alg, &conj, right.gen(i))?;
        if d > eps {
            eps = d;
        }
    }
    Ok(eps)
}

#[derive(Clone)]
struct State {
    assign: Vec<usize>,
    used: Vec<bool>,
    cost: usize,
}

const UNSET: usize = usize::MAX;

/// Broken generator edges created by adding `x ↦ y` to `s`.
fn added_cost(left: &FkAction, right: &FkAction, s: &State, x: usize, y: usize) -> usize {
    let mut broken = 0;
    for i in 0..left.k() {
        let g = left.gen(i);
        let g2 = right.gen(i);
        let fx = g.apply(x);
        if fx == x {
            broken += usize::from(g2.apply(y) != y);
            continue;
        }
        if s.assign[fx] != UNSET && s.assign[fx] != g2.apply(y) {
            broken += 1;
        }
        let bx = left.inv_gen(i).apply(x);
        if bx != fx && s.assign[bx] != UNSET && g2.apply(s.assign[bx]) != y {
            broken += 1;
        }
    }
    broken
}

/// Left atoms in breadth-first order along generator edges, roots ascending.
fn visit_order(act: &FkAction) -> Vec<usize> {
    let n = act.algebra().len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for i in 0..act.k() {
                for y in [act.gen(i).apply(x), act.inv_gen(i).apply(x)] {
                    if !seen[y] {
                        seen[y] = true;
                        order.push(y);
                    }
                }
            }
        }
    }
    order
}

/// Beam search for an isomorphism nearly conjugating `act1` to `act2`.
///
/// Both actions are refined to `L · depth` equal atoms, `L` the lcm of all
/// atom-mass denominators. Left atoms are assigned in breadth-first order; a
/// step is scored by the generator edges it breaks, and the `beam` best
/// partial maps survive, ties going to the earlier state and then the lower
/// target atom. The defect of the final map is computed exactly.
pub fn approx_conjugacy_search(
    act1: &FkAction,
    act2: &FkAction,
    depth: usize,
    beam: usize,
) -> Result<ConjugacyCertificate> {
    if act1.k() != act2.k() {
        return Err(Error::GeneratorCountMismatch {
            expected: act1.k(),
            got: act2.k(),
        });
    }
    if depth == 0 {
        return Err(Error::ZeroRefinement);
    }
    if beam == 0 {
        return Err(Error::InvalidArgument("beam width must be positive".into()));
    }
    let l = lcm_of_denominators(act1.algebra().atoms().iter().chain(act2.algebra().atoms()));
    let total = num_traits::ToPrimitive::to_usize(&l)
        .and_then(|l| l.checked_mul(depth))
        .ok_or_else(|| Error::InstanceTooLarge("common refinement too fine".into()))?;
    let (left, left_projection) = uniform_refine_action(act1, total)?;
    let (right, right_projection) = uniform_refine_action(act2, total)?;
    let n = total;
    let mut states = vec![State {
        assign: vec![UNSET; n],
        used: vec![false; n],
        cost: 0,
    }];
    for x in visit_order(&left) {
        let mut candidates: Vec<(usize, usize, usize)> = states
            .par_iter()
            .enumerate()
            .flat_map_iter(|(rank, s)| {
                let mut local: Vec<(usize, usize, usize)> = (0..n)
                    .filter(|&y| !s.used[y])
                    .map(|y| (s.cost + added_cost(&left, &right, s, x, y), rank, y))
                    .collect();
                local.sort_unstable();
                local.truncate(beam);
                local
            })
            .collect();
        candidates.sort_unstable();
        candidates.truncate(beam);
        states = candidates
            .into_iter()
            .map(|(cost, rank, y)| {
                let mut s = states[rank].clone();
                s.assign[x] = y;
                s.used[y] = true;
                s.cost = cost;
                s
            })
            .collect();
    }
    let best = states.into_iter().next().expect("beam is nonempty");
    let h = Perm::from_images(best.assign).expect("complete assignment is a bijection");
    let eps = conjugation_defect(&left, &right, &h)?;
    let budget_exhausted = eps.is_positive();
    Ok(ConjugacyCertificate {
        left,
        left_projection,
        right,
        right_projection,
        h,
        eps,
        budget_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{tensor_trivial, validate_action};
    use crate::algebra::MeasuredAlgebra;
    use crate::constructions::group::{quotient_action, MarkedGroup};

    #[test]
    fn relabeled_copy_is_exact() {
        let act = validate_action(
            MeasuredAlgebra::uniform(5).unwrap(),
            vec![vec![1, 2, 0, 4, 3], vec![0, 2, 1, 3, 4]],
        )
        .unwrap();
        let sigma = Perm::from_images(vec![3, 0, 4, 1, 2]).unwrap();
        let inv = sigma.inverse();
        let gens = act
            .gens()
            .iter()
            .map(|g| sigma.compose(g).compose(&inv))
            .collect();
        let copy = FkAction::from_perms(MeasuredAlgebra::uniform(5).unwrap(), gens).unwrap();
        let cert = approx_conjugacy_search(&act, &copy, 1, 5).unwrap();
        assert!(cert.eps.is_zero());
        assert!(!cert.budget_exhausted);
        assert_eq!(verify_certificate(&cert).unwrap(), cert.eps);
    }

    #[test]
    fn quotient_against_tensor() {
        let z2 = quotient_action(&MarkedGroup::cyclic(2, &[1, 1]).unwrap()).unwrap();
        let t = tensor_trivial(&z2, &MeasuredAlgebra::uniform(2).unwrap());
        let cert = approx_conjugacy_search(&z2, &t, 1, 4).unwrap();
        assert_eq!(verify_certificate(&cert).unwrap(), cert.eps);
        assert!(cert.eps <= Rational::one());
    }

    #[test]
    fn trivial_single_atoms() {
        let a = FkAction::trivial(MeasuredAlgebra::uniform(1).unwrap(), 2);
        let b = FkAction::trivial(MeasuredAlgebra::uniform(1).unwrap(), 2);
        assert!(approx_conjugacy_search(&a, &b, 1, 1).unwrap().eps.is_zero());
    }
}
