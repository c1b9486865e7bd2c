//! The existential-closedness conditions evaluated on finite actions.
//!
//! All searches run over refinements `equal_refine_action(act, m)` for
//! `m = 1..=max_refine`. A negative outcome only reports the best value seen
//! within the budget; it says nothing about the atomless limit.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::action::{equal_refine_action, FkAction, Word};
use crate::algebra::{
    joint_distribution, signatures, EventTuple, JointDistribution, MeasuredAlgebra, Projection,
};
use crate::constructions::Embedding;
use crate::error::{Error, Result};
use crate::modeltheory::{independence_deficiency_with, type_distance, Metric};
use crate::perm::Perm;
use crate::rational::{lcm_of_denominators, Rational};

/// Digits in the advisory decimal rendering of reported values.
pub const DECIMAL_DIGITS: usize = 20;

/// Candidate tuples are enumerated exhaustively up to this many membership bits.
pub const EXHAUSTIVE_BITS: usize = 16;

const LOCAL_SEARCH_STEPS: usize = 10_000;

/// Serializes a value as `{"exact": "p/q", "decimal": "…"}`.
pub fn exact_value<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Out {
        exact: String,
        decimal: String,
    }
    Out {
        exact: r.to_string(),
        decimal: r.to_decimal(DECIMAL_DIGITS),
    }
    .serialize(s)
}

fn exact_values<S: Serializer>(rs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Wrap<'a>(#[serde(serialize_with = "exact_value")] &'a Rational);
    s.collect_seq(rs.iter().map(Wrap))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C1Report {
    #[serde(serialize_with = "exact_values")]
    pub xi: Vec<Rational>,
    #[serde(serialize_with = "exact_values")]
    pub psi: Vec<Rational>,
    #[serde(serialize_with = "exact_value")]
    pub eps: Rational,
    pub metric: Metric,
    pub satisfied: bool,
}

impl C1Report {
    pub fn max_value(&self) -> Rational {
        self.xi
            .iter()
            .chain(&self.psi)
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

fn check_inputs(act: &FkAction, a: &EventTuple, bs: &[EventTuple]) -> Result<()> {
    if bs.len() != act.k() + 1 {
        return Err(Error::WrongTupleCount {
            expected: act.k() + 1,
            got: bs.len(),
        });
    }
    let alg = act.algebra();
    alg.check_tuple(a)?;
    for b in bs {
        alg.check_tuple(b)?;
        if b.arity() != bs[0].arity() {
            return Err(Error::ArityMismatch {
                left: bs[0].arity(),
                right: b.arity(),
            });
        }
    }
    Ok(())
}

fn check_eps(eps: &Rational) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::NonpositiveEps(eps.clone()));
    }
    Ok(())
}

/// The quantities of condition (C1) and whether all lie strictly below `eps`.
///
/// - `Ξ_i = D(τ_i a; b_i, τ_i b_0)` for `i = 1..k`;
/// - `Ψ_0 = I(a; b_0, τ_1 a ⌢ … ⌢ τ_k a)`;
/// - `Ψ_i = I(τ_i a; b_i, a ⌢ (τ_j a)_{j ≠ i})`.
pub fn check_c1(
    act: &FkAction,
    a: &EventTuple,
    bs: &[EventTuple],
    eps: &Rational,
    metric: Metric,
) -> Result<C1Report> {
    check_eps(eps)?;
    check_inputs(act, a, bs)?;
    let alg = act.algebra();
    let k = act.k();
    let ta: Vec<EventTuple> = (0..k).map(|i| act.apply_gen_tuple(i, a)).collect::<Result<_>>()?;
    let mut xi = Vec::with_capacity(k);
    for i in 0..k {
        let tb0 = act.apply_gen_tuple(i, &bs[0])?;
        xi.push(type_distance(alg, &ta[i], &bs[i + 1], &tb0, metric)?);
    }
    let mut psi = Vec::with_capacity(k + 1);
    let all_ta = EventTuple::concat_all(alg, ta.iter())?;
    psi.push(independence_deficiency_with(alg, a, &bs[0], &all_ta, metric)?);
    for i in 0..k {
        let others = EventTuple::concat_all(
            alg,
            std::iter::once(a).chain(ta.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t)),
        )?;
        psi.push(independence_deficiency_with(alg, &ta[i], &bs[i + 1], &others, metric)?);
    }
    let mut report = C1Report {
        xi,
        psi,
        eps: eps.clone(),
        metric,
        satisfied: false,
    };
    report.satisfied = report.max_value() < *eps;
    Ok(report)
}

/// Integer masses over a common denominator, for fast candidate scoring.
struct Units {
    denom: BigInt,
    atoms: Vec<i128>,
}

impl Units {
    /// The unit also divides every value in `extra`.
    fn new(alg: &MeasuredAlgebra, extra: &[Rational]) -> Result<Self> {
        let denom = lcm_of_denominators(alg.atoms().iter().chain(extra));
        let atoms = alg
            .atoms()
            .iter()
            .map(|m| to_units(m, &denom))
            .collect::<Result<_>>()?;
        Ok(Units { denom, atoms })
    }

    fn rational(&self, units: i128) -> Rational {
        Rational::from_big(BigInt::from(units), self.denom.clone())
    }
}

fn to_units(m: &Rational, denom: &BigInt) -> Result<i128> {
    (m.numer() * (denom / m.denom()))
        .to_i128()
        .ok_or_else(|| Error::InstanceTooLarge("masses exceed 128-bit units".into()))
}

/// Membership matrix `member[j][x]` of a candidate tuple.
type Members = Vec<Vec<bool>>;

fn members_of(t: &EventTuple, n: usize) -> Members {
    t.events().iter().map(|e| e.indicator(n)).collect()
}

fn tuple_from(alg: &MeasuredAlgebra, m: &Members) -> Result<EventTuple> {
    let events = m
        .iter()
        .map(|row| alg.event((0..row.len()).filter(|&x| row[x])))
        .collect::<Result<Vec<_>>>()?;
    alg.tuple(events)
}

/// Lowest-scoring membership matrix: exhaustive when small, otherwise steepest
/// descent from `seed` flipping one membership at a time.
fn minimize<F>(arity: usize, atoms: usize, seed: &Members, score: F) -> (i128, Members)
where
    F: Fn(&Members) -> i128 + Sync,
{
    let bits = arity * atoms;
    if bits <= EXHAUSTIVE_BITS {
        let decode = |code: u64| -> Members {
            (0..arity)
                .map(|j| (0..atoms).map(|x| (code >> (j * atoms + x)) & 1 == 1).collect())
                .collect()
        };
        let (best, code) = (0..1u64 << bits)
            .into_par_iter()
            .map(|code| (score(&decode(code)), code))
            .min()
            .expect("at least one candidate");
        return (best, decode(code));
    }
    let mut current = seed.clone();
    let mut value = score(&current);
    for _ in 0..LOCAL_SEARCH_STEPS {
        let best = (0..bits)
            .into_par_iter()
            .map(|b| {
                let mut next = current.clone();
                let (j, x) = (b / atoms, b % atoms);
                next[j][x] = !next[j][x];
                (score(&next), b)
            })
            .min()
            .expect("at least one move");
        if best.0 >= value {
            break;
        }
        value = best.0;
        let (j, x) = (best.1 / atoms, best.1 % atoms);
        current[j][x] = !current[j][x];
    }
    (value, current)
}

/// A tuple `c` on a refinement together with its exact score.
#[derive(Clone, Debug, Serialize)]
pub struct C2Witness {
    #[serde(skip)]
    pub action: FkAction,
    #[serde(skip)]
    pub projection: Projection,
    #[serde(serialize_with = "serialize_tuple")]
    pub c: EventTuple,
    #[serde(serialize_with = "exact_value")]
    pub distance: Rational,
    pub refinement_depth: usize,
}

fn serialize_tuple<S: Serializer>(t: &EventTuple, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Members<'a> {
        members: &'a [usize],
    }
    s.collect_seq(t.events().iter().map(|e| Members { members: e.members() }))
}

#[derive(Clone, Debug, Serialize)]
pub struct C2Outcome {
    pub found: bool,
    /// The best tuple seen; when `found` is false its distance is only an upper
    /// bound on the infimum.
    pub best: C2Witness,
}

/// `d(type of b_0⌢…⌢b_k over a, type of c⌢τ_1 c⌢…⌢τ_k c over a)`.
pub fn c2_distance(
    act: &FkAction,
    a: &EventTuple,
    target: &JointDistribution,
    c: &EventTuple,
    metric: Metric,
) -> Result<Rational> {
    let alg = act.algebra();
    let images = (0..act.k())
        .map(|i| act.apply_gen_tuple(i, c))
        .collect::<Result<Vec<_>>>()?;
    let full = EventTuple::concat_all(alg, std::iter::once(c).chain(images.iter()))?;
    let joint = joint_distribution(alg, a, &full)?;
    match metric {
        Metric::Tv => joint.total_variation(target),
        Metric::Max => crate::modeltheory::coupling_distance_max(target, &joint),
    }
}

fn c2_search<P>(
    act: &FkAction,
    a: &EventTuple,
    bs: &[EventTuple],
    max_refine: usize,
    metric: Metric,
    stop: P,
) -> Result<(bool, C2Witness)>
where
    P: Fn(&Rational) -> bool,
{
    check_inputs(act, a, bs)?;
    if max_refine == 0 {
        return Err(Error::ZeroRefinement);
    }
    let alg = act.algebra();
    let n = bs[0].arity();
    let k = act.k();
    let all_b = EventTuple::concat_all(alg, bs.iter())?;
    let target = joint_distribution(alg, a, &all_b)?;
    let mut best: Option<C2Witness> = None;
    for m in 1..=max_refine {
        let (fine, proj) = equal_refine_action(act, m)?;
        let falg = fine.algebra();
        let atoms = falg.len();
        let a_fine = proj.lift_tuple(a)?;
        let seed = members_of(&proj.lift_tuple(&bs[0])?, atoms);
        let units = Units::new(falg, &target.mass)?;
        let target_units: Vec<i128> = target
            .mass
            .iter()
            .map(|r| to_units(r, &units.denom))
            .collect::<Result<_>>()?;
        let base_sig = signatures(falg, &a_fine)?;
        let base_arity = a.arity();
        let inv: Vec<Perm> = (0..k).map(|i| fine.inv_gen(i).clone()).collect();
        let cells = target.mass.len();
        let score_tv = |c: &Members| -> i128 {
            let mut mass = vec![0i128; cells];
            for x in 0..atoms {
                let mut sig = base_sig[x];
                for t in 0..=k {
                    let y = if t == 0 { x } else { inv[t - 1].apply(x) };
                    for (j, row) in c.iter().enumerate() {
                        if row[y] {
                            sig |= 1 << (base_arity + t * n + j);
                        }
                    }
                }
                mass[sig] += units.atoms[x];
            }
            mass.iter().zip(&target_units).map(|(p, q)| (p - q).abs()).sum()
        };
        // Candidates are ranked by total variation under either metric; the
        // LP is too slow for the inner loop. The reported value uses `metric`.
        let (_, members) = minimize(n, atoms, &seed, score_tv);
        let c = tuple_from(falg, &members)?;
        let distance = c2_distance(&fine, &a_fine, &target, &c, metric)?;
        let better = best.as_ref().is_none_or(|b| distance < b.distance);
        if better {
            best = Some(C2Witness {
                action: fine.clone(),
                projection: proj,
                c,
                distance,
                refinement_depth: m,
            });
        }
        let current = best.as_ref().expect("set above");
        if stop(&current.distance) {
            return Ok((true, current.clone()));
        }
    }
    Ok((false, best.expect("max_refine ≥ 1")))
}

/// Searches for `c` with `b_0⌢…⌢b_k ≡^{2ε}_a c⌢τ_1 c⌢…⌢τ_k c`.
pub fn search_c2_witness(
    act: &FkAction,
    a: &EventTuple,
    bs: &[EventTuple],
    eps: &Rational,
    max_refine: usize,
    metric: Metric,
) -> Result<C2Outcome> {
    check_eps(eps)?;
    let bound = eps.scale(2);
    let (found, best) = c2_search(act, a, bs, max_refine, metric, |d| *d < bound)?;
    Ok(C2Outcome { found, best })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// `max(0, best − 2 max(Ξ, Ψ))`, an upper bound on the true residual.
    #[serde(serialize_with = "exact_value")]
    pub residual: Rational,
    #[serde(serialize_with = "exact_value")]
    pub best_distance: Rational,
    #[serde(serialize_with = "exact_value")]
    pub bound: Rational,
    pub witness: C2Witness,
}

/// Upper bound for the residual of the axiom `inf_c Ξ_0 ≤ 2 max(Ξ_i, Ψ_j)`.
pub fn axiom_residual(
    act: &FkAction,
    a: &EventTuple,
    bs: &[EventTuple],
    max_refine: usize,
    metric: Metric,
) -> Result<ResidualReport> {
    // Any positive eps: only the raw quantities are used.
    let c1 = check_c1(act, a, bs, &Rational::one(), metric)?;
    let bound = c1.max_value().scale(2);
    let (_, witness) = c2_search(act, a, bs, max_refine, metric, |d| *d <= bound)?;
    let gap = &witness.distance - &bound;
    let residual = if gap.is_positive() { gap } else { Rational::zero() };
    Ok(ResidualReport {
        residual,
        best_distance: witness.distance.clone(),
        bound,
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EcOutcome {
    pub found: bool,
    #[serde(serialize_with = "serialize_tuple")]
    pub cs: EventTuple,
    #[serde(serialize_with = "exact_value")]
    pub discrepancy: Rational,
    pub refinement_depth: usize,
    #[serde(skip)]
    pub action: FkAction,
    #[serde(skip)]
    pub projection: Projection,
}

/// Triple intersections `μ(a_i ∩ c_j ∩ w_l c_k)` indexed `[i][j][l][k]`,
/// flattened.
pub fn triple_masses(
    act: &FkAction,
    a: &EventTuple,
    c: &EventTuple,
    words: &[Word],
) -> Result<Vec<Rational>> {
    let alg = act.algebra();
    alg.check_tuple(a)?;
    alg.check_tuple(c)?;
    let moved: Vec<EventTuple> = words
        .iter()
        .map(|w| Ok(c.image(&act.word_perm(w)?)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for ai in a.events() {
        for cj in c.events() {
            let acj = ai.intersection(cj)?;
            for wl in &moved {
                for ck in wl.events() {
                    out.push(alg.mass(&acj.intersection(ck)?)?);
                }
            }
        }
    }
    Ok(out)
}

fn image_tuple(target: &MeasuredAlgebra, embed: &Embedding, t: &EventTuple) -> Result<EventTuple> {
    target.tuple(
        t.events()
            .iter()
            .map(|e| embed.image_event(target, e))
            .collect::<Result<_>>()?,
    )
}

/// Searches `cs` in refinements of `small` matching every triple intersection
/// measure of `bs` in `big` within strict `eps`.
#[allow(clippy::too_many_arguments)]
pub fn ec_in_extension_check(
    small: &FkAction,
    big: &FkAction,
    embed: &Embedding,
    as_: &EventTuple,
    bs: &EventTuple,
    words: &[Word],
    eps: &Rational,
    max_refine: usize,
) -> Result<EcOutcome> {
    check_eps(eps)?;
    if max_refine == 0 {
        return Err(Error::ZeroRefinement);
    }
    if !embed.is_mass_preserving_onto(small.algebra(), big.algebra()) || !embed.intertwines(small, big) {
        return Err(Error::EmbeddingNotEquivariant);
    }
    small.algebra().check_tuple(as_)?;
    big.algebra().check_tuple(bs)?;
    let a_big = image_tuple(big.algebra(), embed, as_)?;
    let target = triple_masses(big, &a_big, bs, words)?;
    let pulled = small.algebra().tuple(
        bs.events()
            .iter()
            .map(|e| embed.preimage(small.algebra(), e))
            .collect::<Result<_>>()?,
    )?;
    let n = bs.arity();
    let mut best: Option<EcOutcome> = None;
    for m in 1..=max_refine {
        let (fine, proj) = equal_refine_action(small, m)?;
        let falg = fine.algebra();
        let atoms = falg.len();
        let a_fine = proj.lift_tuple(as_)?;
        let a_rows = members_of(&a_fine, atoms);
        let seed = members_of(&proj.lift_tuple(&pulled)?, atoms);
        let units = Units::new(falg, &target)?;
        let target_units: Vec<i128> = target
            .iter()
            .map(|r| to_units(r, &units.denom))
            .collect::<Result<_>>()?;
        let word_inv: Vec<Perm> = words
            .iter()
            .map(|w| fine.word_perm(w).map(|p| p.inverse()))
            .collect::<Result<_>>()?;
        let score = |c: &Members| -> i128 {
            let mut worst = 0i128;
            let mut idx = 0;
            for arow in &a_rows {
                for cj in c {
                    for winv in &word_inv {
                        for ck in c {
                            let m: i128 = (0..atoms)
                                .filter(|&x| arow[x] && cj[x] && ck[winv.apply(x)])
                                .map(|x| units.atoms[x])
                                .sum();
                            worst = worst.max((m - target_units[idx]).abs());
                            idx += 1;
                        }
                    }
                }
            }
            worst
        };
        let (value, members) = minimize(n, atoms, &seed, score);
        let cs = tuple_from(falg, &members)?;
        let discrepancy = units.rational(value);
        if best.as_ref().is_none_or(|b| discrepancy < b.discrepancy) {
            best = Some(EcOutcome {
                found: false,
                cs,
                discrepancy,
                refinement_depth: m,
                action: fine.clone(),
                projection: proj,
            });
        }
        let current = best.as_mut().expect("set above");
        if current.discrepancy < *eps {
            current.found = true;
            return Ok(current.clone());
        }
    }
    Ok(best.expect("max_refine ≥ 1"))
}

/// Exact max discrepancy of `cs` against the targets, recomputed from events.
#[allow(clippy::too_many_arguments)]
pub fn ec_discrepancy(
    big: &FkAction,
    embed: &Embedding,
    as_: &EventTuple,
    bs: &EventTuple,
    words: &[Word],
    refined: &FkAction,
    projection: &Projection,
    cs: &EventTuple,
) -> Result<Rational> {
    let a_big = image_tuple(big.algebra(), embed, as_)?;
    let target = triple_masses(big, &a_big, bs, words)?;
    let got = triple_masses(refined, &projection.lift_tuple(as_)?, cs, words)?;
    Ok(target
        .iter()
        .zip(&got)
        .map(|(t, g)| (t - g).abs())
        .max()
        .unwrap_or_else(Rational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::tensor_trivial;
    use crate::constructions::{quotient_action, MarkedGroup};
    use crate::rational::q;

    fn z2() -> FkAction {
        quotient_action(&MarkedGroup::cyclic(2, &[1, 1]).unwrap()).unwrap()
    }

    #[test]
    fn whole_space_instance() {
        let act = z2();
        let alg = act.algebra();
        let w = alg.tuple(vec![alg.whole()]).unwrap();
        let bs = vec![w.clone(), w.clone(), w.clone()];
        let r = check_c1(&act, &alg.empty_tuple(), &bs, &q(1, 100), Metric::Tv).unwrap();
        assert!(r.satisfied);
        assert!(r.max_value().is_zero());
        let res = axiom_residual(&act, &alg.empty_tuple(), &bs, 1, Metric::Tv).unwrap();
        assert!(res.residual.is_zero());
    }

    #[test]
    fn z2_instance() {
        let act = z2();
        let alg = act.algebra();
        let a = alg.tuple_of(&[&[0]]).unwrap();
        let b0 = alg.tuple_of(&[&[0]]).unwrap();
        let b1 = alg.tuple_of(&[&[1]]).unwrap();
        let bs = vec![b0, b1.clone(), b1];
        let r = check_c1(&act, &a, &bs, &q(1, 10), Metric::Tv).unwrap();
        assert_eq!(r.xi.len(), 2);
        assert_eq!(r.psi.len(), 3);
        assert!(r.max_value().is_zero());
        let w = search_c2_witness(&act, &a, &bs, &q(1, 10), 1, Metric::Tv).unwrap();
        assert!(w.found);
        assert!(w.best.distance.is_zero());
        assert_eq!(w.best.c.get(0).members(), &[0]);
        assert!(axiom_residual(&act, &a, &bs, 1, Metric::Tv).unwrap().residual.is_zero());
        assert!(matches!(
            check_c1(&act, &a, &bs[..2], &q(1, 10), Metric::Tv),
            Err(Error::WrongTupleCount { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn self_extension() {
        let act = z2();
        let alg = act.algebra();
        let a = alg.tuple_of(&[&[0]]).unwrap();
        let b = alg.tuple_of(&[&[1]]).unwrap();
        let words = vec![Word::empty(), Word::new(vec![1])];
        let id = Embedding::identity(alg);
        let out = ec_in_extension_check(&act, &act, &id, &a, &b, &words, &q(1, 4), 1).unwrap();
        assert!(out.found);
        assert!(out.discrepancy.is_zero());
        assert!(matches!(
            ec_in_extension_check(&act, &act, &id, &a, &b, &words, &Rational::zero(), 1),
            Err(Error::NonpositiveEps(_))
        ));
    }

    #[test]
    fn fiber_event_in_tensor() {
        let small = z2();
        let big = tensor_trivial(&small, &MeasuredAlgebra::uniform(2).unwrap());
        let embed = Embedding {
            source: small.algebra().id(),
            target: big.algebra().id(),
            images: vec![vec![0, 1], vec![2, 3]],
        };
        let a = small.algebra().tuple_of(&[&[0]]).unwrap();
        let b = big.algebra().tuple_of(&[&[0, 2]]).unwrap();
        let words = vec![Word::empty(), Word::new(vec![1])];
        let out = ec_in_extension_check(&small, &big, &embed, &a, &b, &words, &q(1, 4), 2).unwrap();
        assert!(out.found);
        assert!(out.refinement_depth <= 2);
        let again = ec_discrepancy(
            &big, &embed, &a, &b, &words, &out.action, &out.projection, &out.cs,
        )
        .unwrap();
        assert_eq!(again, out.discrepancy);
    }
}
