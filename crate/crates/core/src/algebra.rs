//! Finite probability measure algebras.
//!
//! A [`MeasuredAlgebra`] is a list of atoms with exact positive masses summing
//! to one. Events are sets of atoms; a tuple of `n` events generates a
//! partition of the atoms into `2^n` cells indexed by sign vectors, where bit
//! `i` of the index records membership in event `i`. Empty cells are kept with
//! mass zero so that sign-vector indexing is total.
//!
//! Every constructed algebra receives a fresh [`AlgebraId`]. Events and tuples
//! remember the id of the algebra they were built on, and every operation that
//! combines them checks it: moving between refinement levels always goes
//! through an explicit [`Projection`].

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::Rational;

/// Tuples longer than this cannot be expanded into explicit `2^n` cell tables.
pub const MAX_CELL_ARITY: usize = 24;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Nominal identity of a constructed algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraId(u64);

impl AlgebraId {
    fn fresh() -> Self {
        AlgebraId(NEXT_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// A finite probability measure algebra given by its atoms.
///
/// Equality compares the atom masses only, not the nominal id.
#[derive(Clone, Debug)]
pub struct MeasuredAlgebra {
    id: AlgebraId,
    atoms: Vec<Rational>,
}

impl PartialEq for MeasuredAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for MeasuredAlgebra {}

/// Checks the atom list and builds an algebra with a fresh id.
pub fn validate_algebra(atoms: Vec<Rational>) -> Result<MeasuredAlgebra> {
    if atoms.is_empty() {
        return Err(Error::EmptyAlgebra);
    }
    if let Some((index, mass)) = atoms.iter().enumerate().find(|(_, m)| !m.is_positive()) {
        return Err(Error::ZeroAtom {
            index,
            mass: mass.clone(),
        });
    }
    let sum: Rational = atoms.iter().sum();
    if sum != Rational::one() {
        return Err(Error::MassNotOne { sum });
    }
    Ok(MeasuredAlgebra {
        id: AlgebraId::fresh(),
        atoms,
    })
}

impl MeasuredAlgebra {
    pub fn new(atoms: Vec<Rational>) -> Result<Self> {
        validate_algebra(atoms)
    }

    /// `n` atoms of mass `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlgebra);
        }
        validate_algebra(vec![Rational::one().div_int(n); n])
    }

    /// Isomorphic copy carrying a fresh id.
    pub fn fresh_copy(&self) -> Self {
        MeasuredAlgebra {
            id: AlgebraId::fresh(),
            atoms: self.atoms.clone(),
        }
    }

    pub fn id(&self) -> AlgebraId {
        self.id
    }

    pub fn atoms(&self) -> &[Rational] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom_mass(&self, atom: usize) -> &Rational {
        &self.atoms[atom]
    }

    pub fn has_equal_atoms(&self) -> bool {
        self.atoms.windows(2).all(|w| w[0] == w[1])
    }

    /// Builds an event from atom indices; order and duplicates are normalized.
    pub fn event<I: IntoIterator<Item = usize>>(&self, members: I) -> Result<Event> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&index) = members.iter().find(|&&x| x >= self.atoms.len()) {
            return Err(Error::AtomOutOfRange {
                index,
                atoms: self.atoms.len(),
            });
        }
        Ok(Event {
            algebra: self.id,
            members,
        })
    }

    pub fn whole(&self) -> Event {
        Event {
            algebra: self.id,
            members: (0..self.atoms.len()).collect(),
        }
    }

    pub fn empty_event(&self) -> Event {
        Event {
            algebra: self.id,
            members: Vec::new(),
        }
    }

    /// Builds a tuple, checking every event belongs to this algebra.
    pub fn tuple(&self, events: Vec<Event>) -> Result<EventTuple> {
        if events.iter().any(|e| e.algebra != self.id) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(EventTuple {
            algebra: self.id,
            events,
        })
    }

    /// Convenience: a tuple from lists of atom indices.
    pub fn tuple_of(&self, members: &[&[usize]]) -> Result<EventTuple> {
        let events = members
            .iter()
            .map(|m| self.event(m.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        self.tuple(events)
    }

    pub fn empty_tuple(&self) -> EventTuple {
        EventTuple {
            algebra: self.id,
            events: Vec::new(),
        }
    }

    pub fn mass(&self, e: &Event) -> Result<Rational> {
        self.check_event(e)?;
        Ok(self.mass_unchecked(&e.members))
    }

    pub(crate) fn mass_unchecked(&self, members: &[usize]) -> Rational {
        members.iter().map(|&x| &self.atoms[x]).sum()
    }

    pub(crate) fn check_event(&self, e: &Event) -> Result<()> {
        if e.algebra != self.id {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    pub(crate) fn check_tuple(&self, t: &EventTuple) -> Result<()> {
        if t.algebra != self.id || t.events.iter().any(|e| e.algebra != self.id) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    /// Whether `p` maps every atom to an atom of the same mass.
    pub fn preserves_mass(&self, p: &Perm) -> bool {
        p.len() == self.len() && (0..self.len()).all(|x| self.atoms[x] == self.atoms[p.apply(x)])
    }

    /// Re-binds an event given by members to this algebra.
    pub(crate) fn event_unchecked(&self, members: Vec<usize>) -> Event {
        Event {
            algebra: self.id,
            members,
        }
    }
}

/// A set of atoms of a specific algebra, stored as sorted indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    algebra: AlgebraId,
    members: Vec<usize>,
}

impl Event {
    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members.binary_search(&atom).is_ok()
    }

    /// Membership vector over `n` atoms.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut v = vec![false; n];
        for &x in &self.members {
            v[x] = true;
        }
        v
    }

    fn same(&self, other: &Event) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    fn merge(&self, other: &Event, keep: impl Fn(bool, bool) -> bool) -> Result<Event> {
        self.same(other)?;
        let (a, b) = (&self.members, &other.members);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() || j < b.len() {
            let (x, in_a, in_b) = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    (x, true, true)
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    (x, true, false)
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    (y, false, true)
                }
                (Some(&x), None) => {
                    i += 1;
                    (x, true, false)
                }
                (None, Some(&y)) => {
                    j += 1;
                    (y, false, true)
                }
                (None, None) => unreachable!(),
            };
            if keep(in_a, in_b) {
                out.push(x);
            }
        }
        Ok(Event {
            algebra: self.algebra,
            members: out,
        })
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.merge(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.merge(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Event) -> Result<Event> {
        self.merge(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Event) -> Result<Event> {
        self.merge(other, |a, b| a != b)
    }

    pub fn complement(&self, alg: &MeasuredAlgebra) -> Result<Event> {
        alg.whole().difference(self)
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.algebra == other.algebra && self.members.iter().all(|&x| other.contains(x))
    }

    /// Image under an atom permutation of the same algebra.
    pub fn image(&self, p: &Perm) -> Event {
        let mut members: Vec<usize> = self.members.iter().map(|&x| p.apply(x)).collect();
        members.sort_unstable();
        Event {
            algebra: self.algebra,
            members,
        }
    }
}

/// An ordered tuple of events on one algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventTuple {
    algebra: AlgebraId,
    events: Vec<Event>,
}

impl EventTuple {
    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn arity(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn get(&self, i: usize) -> &Event {
        &self.events[i]
    }

    /// `self ⌢ other`.
    pub fn concat(&self, other: &EventTuple) -> Result<EventTuple> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let mut events = self.events.clone();
        events.extend(other.events.iter().cloned());
        Ok(EventTuple {
            algebra: self.algebra,
            events,
        })
    }

    /// Concatenation of several tuples on the same algebra.
    pub fn concat_all<'a, I>(alg: &MeasuredAlgebra, parts: I) -> Result<EventTuple>
    where
        I: IntoIterator<Item = &'a EventTuple>,
    {
        let mut out = alg.empty_tuple();
        for p in parts {
            out = out.concat(p)?;
        }
        Ok(out)
    }

    /// Image of every event under an atom permutation.
    pub fn image(&self, p: &Perm) -> EventTuple {
        EventTuple {
            algebra: self.algebra,
            events: self.events.iter().map(|e| e.image(p)).collect(),
        }
    }
}

/// Sign vector of every atom with respect to a tuple.
pub fn signatures(alg: &MeasuredAlgebra, t: &EventTuple) -> Result<Vec<usize>> {
    alg.check_tuple(t)?;
    if t.arity() > MAX_CELL_ARITY {
        return Err(Error::ArityTooLarge(t.arity()));
    }
    let mut sig = vec![0usize; alg.len()];
    for (i, e) in t.events.iter().enumerate() {
        for &x in &e.members {
            sig[x] |= 1 << i;
        }
    }
    Ok(sig)
}

/// One cell of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub atoms: Vec<usize>,
    pub mass: Rational,
}

/// A partition of the atoms of an algebra.
///
/// When generated by a tuple of arity `n`, `arity` is `Some(n)` and `cells` has
/// `2^n` entries indexed by sign vector (possibly empty). Arbitrary partitions
/// carry `arity: None` and list only their nonempty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellPartition {
    pub algebra: AlgebraId,
    pub arity: Option<usize>,
    pub cells: Vec<Cell>,
}

impl CellPartition {
    /// A block partition from explicit atom sets; they must be disjoint and cover.
    pub fn from_blocks(alg: &MeasuredAlgebra, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; alg.len()];
        let mut cells = Vec::with_capacity(blocks.len());
        for (b, mut atoms) in blocks.into_iter().enumerate() {
            atoms.sort_unstable();
            for &x in &atoms {
                if x >= alg.len() {
                    return Err(Error::AtomOutOfRange {
                        index: x,
                        atoms: alg.len(),
                    });
                }
                if owner[x] != usize::MAX {
                    return Err(Error::NotAPartition);
                }
                owner[x] = b;
            }
            if atoms.is_empty() {
                continue;
            }
            let mass = alg.mass_unchecked(&atoms);
            cells.push(Cell { atoms, mass });
        }
        if owner.contains(&usize::MAX) {
            return Err(Error::NotAPartition);
        }
        Ok(CellPartition {
            algebra: alg.id(),
            arity: None,
            cells,
        })
    }

    /// The one-block partition.
    pub fn trivial(alg: &MeasuredAlgebra) -> Self {
        CellPartition {
            algebra: alg.id(),
            arity: None,
            cells: vec![Cell {
                atoms: (0..alg.len()).collect(),
                mass: Rational::one(),
            }],
        }
    }

    pub fn cell(&self, s: usize) -> &Cell {
        &self.cells[s]
    }

    /// Nonempty cells as atom lists, in index order.
    pub fn blocks(&self) -> Vec<&[usize]> {
        self.cells
            .iter()
            .filter(|c| !c.atoms.is_empty())
            .map(|c| c.atoms.as_slice())
            .collect()
    }

    /// Index of the nonempty block containing each atom.
    pub fn block_of_atoms(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![0; n];
        for (b, atoms) in self.blocks().into_iter().enumerate() {
            for &x in atoms {
                owner[x] = b;
            }
        }
        owner
    }

    /// Nonempty blocks as events of `alg`.
    pub fn block_events(&self, alg: &MeasuredAlgebra) -> Result<Vec<Event>> {
        if self.algebra != alg.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self
            .blocks()
            .into_iter()
            .map(|b| alg.event_unchecked(b.to_vec()))
            .collect())
    }

    /// Blocks as a canonical sorted list of sorted atom sets.
    pub fn canonical_blocks(&self) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = self.blocks().into_iter().map(|b| b.to_vec()).collect();
        v.sort();
        v
    }
}

/// Cells `⋂_i a_i^{s(i)}` of the partition generated by a tuple.
pub fn generated_partition(alg: &MeasuredAlgebra, t: &EventTuple) -> Result<CellPartition> {
    let sig = signatures(alg, t)?;
    let n = t.arity();
    let mut cells = vec![
        Cell {
            atoms: Vec::new(),
            mass: Rational::zero(),
        };
        1 << n
    ];
    for (x, &s) in sig.iter().enumerate() {
        cells[s].atoms.push(x);
        cells[s].mass += alg.atom_mass(x);
    }
    Ok(CellPartition {
        algebra: alg.id(),
        arity: Some(n),
        cells,
    })
}

/// Exact joint law of two tuples' sign vectors.
///
/// Masses are indexed by `r | (s << base_arity)`, which is the sign vector of
/// the concatenated tuple `base ⌢ fiber`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDistribution {
    pub base_arity: usize,
    pub fiber_arity: usize,
    pub mass: Vec<Rational>,
}

impl JointDistribution {
    pub fn get(&self, r: usize, s: usize) -> &Rational {
        &self.mass[r | (s << self.base_arity)]
    }

    pub fn base_cells(&self) -> usize {
        1 << self.base_arity
    }

    pub fn fiber_cells(&self) -> usize {
        1 << self.fiber_arity
    }

    pub fn total(&self) -> Rational {
        self.mass.iter().sum()
    }

    pub fn base_marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.base_cells()];
        for (idx, m) in self.mass.iter().enumerate() {
            out[idx & (self.base_cells() - 1)] += m;
        }
        out
    }

    pub fn fiber_marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.fiber_cells()];
        for (idx, m) in self.mass.iter().enumerate() {
            out[idx >> self.base_arity] += m;
        }
        out
    }

    fn same_shape(&self, other: &JointDistribution) -> Result<()> {
        if self.base_arity != other.base_arity {
            return Err(Error::ArityMismatch {
                left: self.base_arity,
                right: other.base_arity,
            });
        }
        if self.fiber_arity != other.fiber_arity {
            return Err(Error::ArityMismatch {
                left: self.fiber_arity,
                right: other.fiber_arity,
            });
        }
        Ok(())
    }

    /// `½ Σ |p − q|` over all cells.
    pub fn total_variation(&self, other: &JointDistribution) -> Result<Rational> {
        self.same_shape(other)?;
        let sum: Rational = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(sum.div_int(2))
    }
}

/// `mass(r, s) = μ(cell_r(base) ∩ cell_s(fiber))`.
pub fn joint_distribution(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    fiber: &EventTuple,
) -> Result<JointDistribution> {
    let both = base.concat(fiber)?;
    let part = generated_partition(alg, &both)?;
    Ok(JointDistribution {
        base_arity: base.arity(),
        fiber_arity: fiber.arity(),
        mass: part.cells.into_iter().map(|c| c.mass).collect(),
    })
}

fn same_arity(a: &EventTuple, b: &EventTuple) -> Result<()> {
    if a.arity() != b.arity() {
        return Err(Error::ArityMismatch {
            left: a.arity(),
            right: b.arity(),
        });
    }
    Ok(())
}

/// `d(a, b) = max_i μ(a_i △ b_i)`.
pub fn dist_max(alg: &MeasuredAlgebra, a: &EventTuple, b: &EventTuple) -> Result<Rational> {
    alg.check_tuple(a)?;
    alg.check_tuple(b)?;
    same_arity(a, b)?;
    let mut best = Rational::zero();
    for (x, y) in a.events.iter().zip(&b.events) {
        let m = alg.mass_unchecked(x.symmetric_difference(y)?.members());
        if m > best {
            best = m;
        }
    }
    Ok(best)
}

/// `d_P(a, b) = ½ Σ_s μ(p_s △ q_s)` for the generated partitions `p`, `q`.
///
/// An atom whose sign vectors under `a` and `b` differ lies in exactly two of
/// the symmetric differences, so the sum halves to the mass of those atoms.
pub fn dist_partition(alg: &MeasuredAlgebra, a: &EventTuple, b: &EventTuple) -> Result<Rational> {
    same_arity(a, b)?;
    let sa = signatures(alg, a)?;
    let sb = signatures(alg, b)?;
    Ok(sa
        .iter()
        .zip(&sb)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| alg.atom_mass(i))
        .sum())
}

/// Map from the atoms of a refinement to the atoms they came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub fine: AlgebraId,
    pub coarse: AlgebraId,
    pub parent: Vec<usize>,
}

impl Projection {
    pub fn identity_onto(fine: &MeasuredAlgebra, coarse: &MeasuredAlgebra) -> Self {
        Projection {
            fine: fine.id(),
            coarse: coarse.id(),
            parent: (0..fine.len()).collect(),
        }
    }

    /// Preimage of a coarse event.
    pub fn lift_event(&self, e: &Event) -> Result<Event> {
        if e.algebra != self.coarse {
            return Err(Error::AlgebraMismatch);
        }
        let members = self
            .parent
            .iter()
            .enumerate()
            .filter(|(_, &p)| e.contains(p))
            .map(|(x, _)| x)
            .collect();
        Ok(Event {
            algebra: self.fine,
            members,
        })
    }

    pub fn lift_tuple(&self, t: &EventTuple) -> Result<EventTuple> {
        if t.algebra != self.coarse {
            return Err(Error::AlgebraMismatch);
        }
        let events = t
            .events
            .iter()
            .map(|e| self.lift_event(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(EventTuple {
            algebra: self.fine,
            events,
        })
    }

    /// `self` maps fine → mid and `next` maps mid → coarse.
    pub fn then(&self, next: &Projection) -> Result<Projection> {
        if self.coarse != next.fine {
            return Err(Error::AlgebraMismatch);
        }
        Ok(Projection {
            fine: self.fine,
            coarse: next.coarse,
            parent: self.parent.iter().map(|&p| next.parent[p]).collect(),
        })
    }

    /// Fine atoms lying over each coarse atom.
    pub fn fibers(&self, coarse_len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); coarse_len];
        for (x, &p) in self.parent.iter().enumerate() {
            out[p].push(x);
        }
        out
    }
}

/// Replaces each atom by the listed parts (in place, in order).
pub(crate) fn refine_with_parts(
    alg: &MeasuredAlgebra,
    parts: Vec<Vec<Rational>>,
) -> Result<(MeasuredAlgebra, Projection)> {
    debug_assert_eq!(parts.len(), alg.len());
    let mut atoms = Vec::new();
    let mut parent = Vec::new();
    for (x, ps) in parts.into_iter().enumerate() {
        let sum: Rational = ps.iter().sum();
        if &sum != alg.atom_mass(x) {
            return Err(Error::PartMassMismatch {
                expected: alg.atom_mass(x).clone(),
                got: sum,
            });
        }
        for p in ps {
            if !p.is_positive() {
                return Err(Error::ZeroAtom {
                    index: atoms.len(),
                    mass: p,
                });
            }
            atoms.push(p);
            parent.push(x);
        }
    }
    let fine = validate_algebra(atoms)?;
    let proj = Projection {
        fine: fine.id(),
        coarse: alg.id(),
        parent,
    };
    Ok((fine, proj))
}

/// Splits every atom into `m` equal parts; part `j` of atom `x` is `x*m + j`.
pub fn refine_equal(alg: &MeasuredAlgebra, m: usize) -> Result<(MeasuredAlgebra, Projection)> {
    if m == 0 {
        return Err(Error::ZeroRefinement);
    }
    let parts = alg
        .atoms
        .iter()
        .map(|a| vec![a.div_int(m); m])
        .collect();
    refine_with_parts(alg, parts)
}

/// Replaces one atom by the given parts, keeping the others.
pub fn refine_atom(
    alg: &MeasuredAlgebra,
    atom: usize,
    parts: Vec<Rational>,
) -> Result<(MeasuredAlgebra, Projection)> {
    if atom >= alg.len() {
        return Err(Error::AtomOutOfRange {
            index: atom,
            atoms: alg.len(),
        });
    }
    let mut all: Vec<Vec<Rational>> = alg.atoms.iter().map(|a| vec![a.clone()]).collect();
    all[atom] = parts;
    refine_with_parts(alg, all)
}

/// Product measure; atom `(i, j)` has index `i * b.len() + j`.
pub fn product_algebra(a: &MeasuredAlgebra, b: &MeasuredAlgebra) -> MeasuredAlgebra {
    let atoms = a
        .atoms
        .iter()
        .flat_map(|x| b.atoms.iter().map(move |y| x * y))
        .collect();
    MeasuredAlgebra {
        id: AlgebraId::fresh(),
        atoms,
    }
}
