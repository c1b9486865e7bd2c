//! Measure-preserving actions of the free group `F_k` on finite algebras.
//!
//! An [`FkAction`] assigns to each free generator a mass-preserving
//! permutation of the atoms. Automorphisms that would split atoms are only
//! reachable after an explicit refinement.

use std::collections::HashMap;

use crate::algebra::{
    product_algebra, refine_equal, CellPartition, Event, EventTuple, MeasuredAlgebra, Projection,
};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::Rational;

/// A finite pmp `F_k`-system.
#[derive(Clone, Debug)]
pub struct FkAction {
    algebra: MeasuredAlgebra,
    gens: Vec<Perm>,
    inv_gens: Vec<Perm>,
}

impl PartialEq for FkAction {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.gens == other.gens
    }
}

impl Eq for FkAction {}

/// Checks each generator is a mass-preserving bijection of the atoms.
pub fn validate_action(alg: MeasuredAlgebra, gens: Vec<Vec<usize>>) -> Result<FkAction> {
    let perms = gens
        .into_iter()
        .enumerate()
        .map(|(i, images)| {
            if images.len() != alg.len() {
                return Err(Error::NotBijective { generator: i });
            }
            Perm::from_images(images).ok_or(Error::NotBijective { generator: i })
        })
        .collect::<Result<Vec<_>>>()?;
    FkAction::from_perms(alg, perms)
}

impl FkAction {
    pub fn from_perms(alg: MeasuredAlgebra, gens: Vec<Perm>) -> Result<Self> {
        for (i, g) in gens.iter().enumerate() {
            if g.len() != alg.len() {
                return Err(Error::NotBijective { generator: i });
            }
            if let Some(atom) = (0..alg.len()).find(|&x| alg.atom_mass(x) != alg.atom_mass(g.apply(x)))
            {
                return Err(Error::NotMeasurePreserving { generator: i, atom });
            }
        }
        let inv_gens = gens.iter().map(Perm::inverse).collect();
        Ok(FkAction {
            algebra: alg,
            gens,
            inv_gens,
        })
    }

    /// Every generator acts as the identity.
    pub fn trivial(alg: MeasuredAlgebra, k: usize) -> Self {
        let id = Perm::identity(alg.len());
        FkAction {
            gens: vec![id.clone(); k],
            inv_gens: vec![id; k],
            algebra: alg,
        }
    }

    pub fn algebra(&self) -> &MeasuredAlgebra {
        &self.algebra
    }

    pub fn k(&self) -> usize {
        self.gens.len()
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn gen(&self, i: usize) -> &Perm {
        &self.gens[i]
    }

    pub fn inv_gen(&self, i: usize) -> &Perm {
        &self.inv_gens[i]
    }

    /// Same generators on a fresh copy of the algebra.
    pub fn fresh_copy(&self) -> Self {
        FkAction {
            algebra: self.algebra.fresh_copy(),
            gens: self.gens.clone(),
            inv_gens: self.inv_gens.clone(),
        }
    }

    /// Replaces generator `i`, keeping everything else.
    pub fn with_gen(&self, i: usize, g: Perm) -> Result<Self> {
        let mut gens = self.gens.clone();
        gens[i] = g;
        let out = FkAction::from_perms(self.algebra.clone(), gens)?;
        Ok(out)
    }

    /// The permutation realizing a word; letters act right to left.
    pub fn word_perm(&self, w: &Word) -> Result<Perm> {
        let n = self.algebra.len();
        let mut p = Perm::identity(n);
        for &letter in w.letters.iter().rev() {
            let g = self.letter_perm(letter)?;
            p = g.compose(&p);
        }
        Ok(p)
    }

    fn letter_perm(&self, letter: i64) -> Result<&Perm> {
        let k = self.k();
        let idx = letter.unsigned_abs() as usize;
        if letter == 0 || idx > k {
            return Err(Error::LetterOutOfRange { letter, k });
        }
        Ok(if letter > 0 {
            &self.gens[idx - 1]
        } else {
            &self.inv_gens[idx - 1]
        })
    }

    /// Image of a tuple under generator `i` (0-based).
    pub fn apply_gen_tuple(&self, i: usize, t: &EventTuple) -> Result<EventTuple> {
        self.algebra.check_tuple(t)?;
        Ok(t.image(&self.gens[i]))
    }

    pub fn is_ergodic(&self) -> bool {
        invariant_components(self).components.len() == 1
    }
}

/// An element of `F_k` as a list of nonzero letters `±1..±k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    pub letters: Vec<i64>,
}

impl Word {
    pub fn new(letters: Vec<i64>) -> Self {
        Word { letters }
    }

    pub fn empty() -> Self {
        Word::default()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }
}

/// Applies a word to an event.
pub fn apply_word(act: &FkAction, w: &Word, e: &Event) -> Result<Event> {
    act.algebra.check_event(e)?;
    let p = act.word_perm(w)?;
    Ok(e.image(&p))
}

/// Minimal invariant sets of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantDecomposition {
    pub components: Vec<Vec<usize>>,
}

impl InvariantDecomposition {
    /// Component index of every atom.
    pub fn owner(&self, n: usize) -> Vec<usize> {
        let mut o = vec![0; n];
        for (c, comp) in self.components.iter().enumerate() {
            for &x in comp {
                o[x] = c;
            }
        }
        o
    }
}

/// Connected components of the Schreier graph with edges `{x, g_i(x)}`,
/// ordered by least atom.
pub fn invariant_components(act: &FkAction) -> InvariantDecomposition {
    let n = act.algebra.len();
    let mut comp = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for i in 0..act.k() {
                for y in [act.gens[i].apply(x), act.inv_gens[i].apply(x)] {
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        members.push(y);
                        stack.push(y);
                    }
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    InvariantDecomposition { components }
}

/// Coarsest generator-invariant partition refining the one generated by
/// `events`.
///
/// Moore-style refinement: atoms stay together only while they share a block
/// and every generator sends them to a common block. A stable partition is
/// carried onto itself by each generator, since a bijection of atoms that maps
/// blocks into blocks permutes them.
pub fn generated_subalgebra(act: &FkAction, events: &EventTuple) -> Result<CellPartition> {
    let alg = &act.algebra;
    let n = alg.len();
    let sig = crate::algebra::signatures(alg, events)?;
    let mut block = canonical_labels(&sig);
    loop {
        let keys: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                let mut key = Vec::with_capacity(act.k() + 1);
                key.push(block[x]);
                key.extend(act.gens.iter().map(|g| block[g.apply(x)]));
                key
            })
            .collect();
        let next = canonical_labels(&keys);
        let before = block.iter().max().map_or(0, |m| m + 1);
        let after = next.iter().max().map_or(0, |m| m + 1);
        block = next;
        if after == before {
            break;
        }
    }
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); block.iter().max().map_or(0, |m| m + 1)];
    for (x, &b) in block.iter().enumerate() {
        blocks[b].push(x);
    }
    CellPartition::from_blocks(alg, blocks)
}

/// Relabels keys by order of first appearance.
fn canonical_labels<K: std::hash::Hash + Eq + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// Splits each atom into `m` equal parts; part `j` of `x` goes to part `j` of
/// `g(x)`.
pub fn equal_refine_action(act: &FkAction, m: usize) -> Result<(FkAction, Projection)> {
    let (alg, proj) = refine_equal(&act.algebra, m)?;
    let gens = act
        .gens
        .iter()
        .map(|g| {
            let images = (0..alg.len())
                .map(|x| g.apply(x / m) * m + x % m)
                .collect();
            Perm::from_images(images).expect("lifted permutation")
        })
        .collect();
    Ok((FkAction::from_perms(alg, gens)?, proj))
}

/// Refines every atom into pieces of mass `1/total`, giving an action on
/// `total` equal atoms. Requires `total * μ(x)` to be an integer for each atom.
pub fn uniform_refine_action(act: &FkAction, total: usize) -> Result<(FkAction, Projection)> {
    let alg = &act.algebra;
    let counts = alg
        .atoms()
        .iter()
        .map(|m| {
            m.scale(total).to_usize().ok_or_else(|| {
                Error::InvalidArgument(format!("mass {m} is not a multiple of 1/{total}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut offset = Vec::with_capacity(counts.len());
    let mut acc = 0;
    for &c in &counts {
        offset.push(acc);
        acc += c;
    }
    let unit = Rational::one().div_int(total);
    let parts = counts.iter().map(|&c| vec![unit.clone(); c]).collect();
    let (fine, proj) = crate::algebra::refine_with_parts(alg, parts)?;
    let gens = act
        .gens
        .iter()
        .map(|g| {
            let mut images = vec![0; fine.len()];
            for x in 0..alg.len() {
                let y = g.apply(x);
                for j in 0..counts[x] {
                    images[offset[x] + j] = offset[y] + j;
                }
            }
            Perm::from_images(images).expect("lifted permutation")
        })
        .collect();
    Ok((FkAction::from_perms(fine, gens)?, proj))
}

/// `act ⊗ trivial(alg2)`: generators move the first coordinate only. Atom
/// `(i, j)` has index `i * alg2.len() + j`.
pub fn tensor_trivial(act: &FkAction, alg2: &MeasuredAlgebra) -> FkAction {
    let m = alg2.len();
    let alg = product_algebra(&act.algebra, alg2);
    let gens = act
        .gens
        .iter()
        .map(|g| {
            let images = (0..alg.len()).map(|x| g.apply(x / m) * m + x % m).collect();
            Perm::from_images(images).expect("lifted permutation")
        })
        .collect();
    FkAction::from_perms(alg, gens).expect("product of mass-preserving maps")
}

fn check_automorphism(alg: &MeasuredAlgebra, p: &Perm) -> Result<()> {
    if p.len() != alg.len() {
        return Err(Error::AlgebraMismatch);
    }
    if let Some(atom) = (0..alg.len()).find(|&x| alg.atom_mass(x) != alg.atom_mass(p.apply(x))) {
        return Err(Error::NotMeasurePreserving { generator: 0, atom });
    }
    Ok(())
}

/// `∂(g, h) = sup_a μ(ga △ ha)` in closed form.
///
/// With `p = h⁻¹g`, `μ(ga △ ha) = μ(pa △ a)`. A cycle of `p` consists of atoms
/// of one mass; alternating membership moves every atom of an even cycle and
/// all but one atom of an odd cycle, and no event does better.
pub fn uniform_distance(alg: &MeasuredAlgebra, g: &Perm, h: &Perm) -> Result<Rational> {
    check_automorphism(alg, g)?;
    check_automorphism(alg, h)?;
    let p = h.inverse().compose(g);
    let mut total = Rational::zero();
    for cycle in p.cycles() {
        let len = cycle.len();
        if len < 2 {
            continue;
        }
        let atom = alg.atom_mass(cycle[0]);
        let moved = if len % 2 == 0 { len } else { len - 1 };
        total += atom.scale(moved);
    }
    Ok(total)
}

/// `∂(ḡ, h̄) = max_i ∂(g_i, h_i)` for two actions on the same algebra.
pub fn uniform_distance_actions(a: &FkAction, b: &FkAction) -> Result<Rational> {
    if a.algebra.id() != b.algebra.id() {
        return Err(Error::AlgebraMismatch);
    }
    if a.k() != b.k() {
        return Err(Error::GeneratorCountMismatch {
            expected: a.k(),
            got: b.k(),
        });
    }
    let mut best = Rational::zero();
    for (g, h) in a.gens.iter().zip(&b.gens) {
        let d = uniform_distance(&a.algebra, g, h)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// A small automorphism of an equivariant refinement, fixing a given partition
/// blockwise.
#[derive(Clone, Debug)]
pub struct Perturbation {
    /// `equal_refine_action(act, 2^depth)`.
    pub action: FkAction,
    pub projection: Projection,
    pub depth: u32,
    /// The involution; it swaps two parts of the lowest atom of each block.
    pub s: Perm,
    /// Per nonempty block of `fixed`: mass of atoms moved by `s`.
    pub moved: Vec<Rational>,
}

/// Builds `s` with `0 < μ(s(c) △ c) < delta` available inside every block.
///
/// The action is refined by `m = 2^depth` with the least depth for which the
/// moved mass `2 μ(x_B) / m` is below `delta` for every block `B`, where `x_B`
/// is the block's lowest-index atom. `s` swaps parts 0 and 1 of each `x_B`.
pub fn perturb_small(act: &FkAction, fixed: &CellPartition, delta: &Rational) -> Result<Perturbation> {
    if !delta.is_positive() {
        return Err(Error::NonpositiveDelta(delta.clone()));
    }
    if fixed.algebra != act.algebra.id() {
        return Err(Error::AlgebraMismatch);
    }
    let reps: Vec<usize> = fixed.blocks().iter().map(|b| b[0]).collect();
    let heaviest = reps
        .iter()
        .map(|&x| act.algebra.atom_mass(x).clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let mut depth = 1u32;
    loop {
        let m = 1usize
            .checked_shl(depth)
            .filter(|&m| m > 0)
            .ok_or_else(|| Error::InstanceTooLarge("perturbation depth".into()))?;
        if heaviest.scale(2).div_int(m) < *delta {
            break;
        }
        depth += 1;
    }
    let m = 1usize << depth;
    let (refined, projection) = equal_refine_action(act, m)?;
    let mut images: Vec<usize> = (0..refined.algebra.len()).collect();
    let mut moved = Vec::with_capacity(reps.len());
    for &x in &reps {
        images.swap(x * m, x * m + 1);
        moved.push(act.algebra.atom_mass(x).scale(2).div_int(m));
    }
    let s = Perm::from_images(images).expect("disjoint swaps");
    Ok(Perturbation {
        action: refined,
        projection,
        depth,
        s,
        moved,
    })
}
