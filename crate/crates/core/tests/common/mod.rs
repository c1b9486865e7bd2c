//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use pmplab::action::FkAction;
use pmplab::algebra::{EventTuple, MeasuredAlgebra};
use pmplab::constructions::generated_perm_group;
use pmplab::{Perm, Rational};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` positive integers summing to `total`.
pub fn composition<R: Rng>(rng: &mut R, total: usize, n: usize) -> Vec<usize> {
    assert!(n >= 1 && n <= total);
    let mut cuts: Vec<usize> = (1..total).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(n - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Atoms `k_i / d` with a common denominator `d ≤ max_denom`.
pub fn algebra_with_denom<R: Rng>(rng: &mut R, max_atoms: usize, max_denom: usize) -> MeasuredAlgebra {
    let d = rng.gen_range(1..=max_denom);
    let n = rng.gen_range(1..=max_atoms.min(d));
    let parts = composition(rng, d, n);
    MeasuredAlgebra::new(parts.into_iter().map(|k| Rational::new(k as i64, d as i64)).collect()).unwrap()
}

pub fn random_event_members<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

pub fn random_tuple<R: Rng>(rng: &mut R, alg: &MeasuredAlgebra, arity: usize) -> EventTuple {
    let events = (0..arity)
        .map(|_| alg.event(random_event_members(rng, alg.len())).unwrap())
        .collect();
    alg.tuple(events).unwrap()
}

pub fn random_tuple_between<R: Rng>(rng: &mut R, alg: &MeasuredAlgebra, lo: usize, hi: usize) -> EventTuple {
    let arity = rng.gen_range(lo..=hi);
    random_tuple(rng, alg, arity)
}

/// The tuple whose `i`-th event holds the atoms whose label has bit `i`.
pub fn tuple_from_labels(alg: &MeasuredAlgebra, labels: &[usize], arity: usize) -> EventTuple {
    let events = (0..arity)
        .map(|i| alg.event((0..alg.len()).filter(|&x| labels[x] >> i & 1 == 1)).unwrap())
        .collect();
    alg.tuple(events).unwrap()
}

pub fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Perm {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Perm::from_images(v).unwrap()
}

/// A uniformly random permutation of each class of equal-mass atoms.
pub fn random_mass_perm<R: Rng>(rng: &mut R, alg: &MeasuredAlgebra) -> Perm {
    let n = alg.len();
    let mut images = vec![0; n];
    let mut done = vec![false; n];
    for x in 0..n {
        if done[x] {
            continue;
        }
        let class: Vec<usize> = (x..n).filter(|&y| alg.atom_mass(y) == alg.atom_mass(x)).collect();
        let mut shuffled = class.clone();
        shuffled.shuffle(rng);
        for (&a, &b) in class.iter().zip(&shuffled) {
            images[a] = b;
            done[a] = true;
        }
    }
    Perm::from_images(images).unwrap()
}

pub fn random_action<R: Rng>(rng: &mut R, alg: MeasuredAlgebra, k: usize) -> FkAction {
    let gens = (0..k).map(|_| random_mass_perm(rng, &alg)).collect();
    FkAction::from_perms(alg, gens).unwrap()
}

fn conjugate(p: &Perm, sigma: &Perm) -> Perm {
    sigma.compose(p).compose(&sigma.inverse())
}

fn cycle(n: usize, shift: usize) -> Perm {
    Perm::from_images((0..n).map(|x| (x + shift) % n).collect()).unwrap()
}

fn reflection(n: usize) -> Perm {
    Perm::from_images((0..n).map(|x| (n - x) % n).collect()).unwrap()
}

/// Regular action of `Z/a × Z/b` on `a·b` points.
fn product_cyclic(a: usize, b: usize, ga: (usize, usize)) -> Perm {
    Perm::from_images(
        (0..a * b)
            .map(|x| ((x / b + ga.0) % a) * b + (x % b + ga.1) % b)
            .collect(),
    )
    .unwrap()
}

/// Generators of a transitive action on `n ≤ 12` points whose group stays
/// within the embedding cap.
///
/// Random generators on many points generate `A_n` or `S_n`, so the family
/// mixes unrestricted generators on at most six points with cyclic, dihedral
/// and `Z/a × Z/b` actions, relabelled by a random permutation. Draws that
/// are not transitive are rejected.
pub fn transitive_gens<R: Rng>(rng: &mut R, max_atoms: usize, k: usize) -> Vec<Perm> {
    loop {
        let kind = rng.gen_range(0..4);
        let (n, mut gens): (usize, Vec<Perm>) = match kind {
            0 => {
                let n = rng.gen_range(1..=max_atoms.min(6));
                (n, (0..k).map(|_| random_perm(rng, n)).collect())
            }
            1 => {
                let n = rng.gen_range(1..=max_atoms);
                (n, (0..k).map(|_| cycle(n, rng.gen_range(0..n))).collect())
            }
            2 => {
                let n = rng.gen_range(1..=max_atoms);
                let pool = [cycle(n, 1), reflection(n), Perm::identity(n)];
                (n, (0..k).map(|_| pool.choose(rng).unwrap().clone()).collect())
            }
            _ => {
                let a = rng.gen_range(1..=3);
                let b = rng.gen_range(1..=(max_atoms / a).max(1));
                let n = a * b;
                (
                    n,
                    (0..k)
                        .map(|_| product_cyclic(a, b, (rng.gen_range(0..a), rng.gen_range(0..b))))
                        .collect(),
                )
            }
        };
        let sigma = random_perm(rng, n);
        gens = gens.iter().map(|g| conjugate(g, &sigma)).collect();
        let act = FkAction::from_perms(MeasuredAlgebra::uniform(n).unwrap(), gens.clone()).unwrap();
        if act.is_ergodic() {
            return gens;
        }
    }
}

pub fn transitive_action<R: Rng>(rng: &mut R, max_atoms: usize) -> FkAction {
    let k = rng.gen_range(1..=3);
    let gens = transitive_gens(rng, max_atoms, k);
    let n = gens[0].len();
    FkAction::from_perms(MeasuredAlgebra::uniform(n).unwrap(), gens).unwrap()
}

/// Disjoint union of transitive pieces on `a` points in total, `a ≤ max_atoms`.
pub fn disjoint_union_gens<R: Rng>(rng: &mut R, max_atoms: usize, k: usize) -> Vec<Perm> {
    let mut pieces: Vec<Vec<Perm>> = Vec::new();
    let mut used = 0;
    while used < max_atoms {
        let room = max_atoms - used;
        let piece = transitive_gens(rng, room, k);
        used += piece[0].len();
        pieces.push(piece);
        if rng.gen_bool(0.4) {
            break;
        }
    }
    let mut images: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut offset = 0;
    for piece in &pieces {
        for (i, g) in piece.iter().enumerate() {
            images[i].extend(g.images().iter().map(|&y| y + offset));
        }
        offset += piece[0].len();
    }
    let sigma = random_perm(rng, offset);
    images
        .into_iter()
        .map(|v| conjugate(&Perm::from_images(v).unwrap(), &sigma))
        .collect()
}

/// A possibly non-ergodic equal-atom action whose group stays within
/// [`MAX_GROUP_ORDER`]; larger draws are rejected.
pub fn bounded_action<R: Rng>(rng: &mut R, max_atoms: usize) -> FkAction {
    loop {
        let k = rng.gen_range(1..=3);
        let gens = disjoint_union_gens(rng, max_atoms, k);
        let n = gens[0].len();
        if generated_perm_group(&gens, n).is_ok() {
            return FkAction::from_perms(MeasuredAlgebra::uniform(n).unwrap(), gens).unwrap();
        }
    }
}

/// Up to three pairs of disjoint equal-mass blocks.
pub fn random_partial<R: Rng>(rng: &mut R, alg: &MeasuredAlgebra) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = alg.len();
    let (m, _) = scaled_masses(alg);
    let mut free_s: Vec<usize> = (0..n).collect();
    let mut free_t: Vec<usize> = (0..n).collect();
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        if free_s.is_empty() {
            break;
        }
        free_s.shuffle(rng);
        let size = rng.gen_range(1..=free_s.len().min(3));
        let s: Vec<usize> = free_s[..size].to_vec();
        let target: i128 = s.iter().map(|&x| m[x]).sum();
        let options: Vec<Vec<usize>> = (1u32..1 << free_t.len())
            .map(|code| (0..free_t.len()).filter(|&i| code >> i & 1 == 1).map(|i| free_t[i]).collect::<Vec<_>>())
            .filter(|t| t.iter().map(|&x| m[x]).sum::<i128>() == target)
            .collect();
        if let Some(t) = options.choose(rng) {
            free_s.retain(|x| !s.contains(x));
            free_t.retain(|x| !t.contains(x));
            pairs.push((s, t.clone()));
        }
    }
    pairs
}

/// Integer numerators over a common denominator.
pub fn scaled_masses(alg: &MeasuredAlgebra) -> (Vec<i128>, i128) {
    let l = pmplab::rational::lcm_of_denominators(alg.atoms().iter());
    let l = num_traits_cast(&l);
    let nums = alg
        .atoms()
        .iter()
        .map(|m| num_traits_cast(m.numer()) * (l / num_traits_cast(m.denom())))
        .collect();
    (nums, l)
}

fn num_traits_cast(b: &num_bigint::BigInt) -> i128 {
    b.to_string().parse().unwrap()
}
