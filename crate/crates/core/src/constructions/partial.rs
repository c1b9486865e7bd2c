use crate::action::FkAction;
use crate::algebra::{AlgebraId, Event, MeasuredAlgebra};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Block correspondences `source_j ↦ target_j` between two algebras.
///
/// The complement of the listed source blocks is implicitly paired with the
/// complement of the listed target blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialIsomorphism {
    pub source: AlgebraId,
    pub target: AlgebraId,
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
}

fn check_blocks(alg: &MeasuredAlgebra, blocks: &[&Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; alg.len()];
    for block in blocks {
        for &x in block.iter() {
            if x >= alg.len() {
                return Err(Error::AtomOutOfRange {
                    index: x,
                    atoms: alg.len(),
                });
            }
            if seen[x] {
                return Err(Error::InvalidPartial(format!("atom {x} lies in two blocks")));
            }
            seen[x] = true;
        }
    }
    Ok(())
}

impl PartialIsomorphism {
    pub fn empty(source: &MeasuredAlgebra, target: &MeasuredAlgebra) -> Self {
        PartialIsomorphism {
            source: source.id(),
            target: target.id(),
            pairs: Vec::new(),
        }
    }

    /// Checks disjointness and equal block masses; blocks are sorted.
    pub fn new(
        source: &MeasuredAlgebra,
        target: &MeasuredAlgebra,
        mut pairs: Vec<(Vec<usize>, Vec<usize>)>,
    ) -> Result<Self> {
        for (s, t) in pairs.iter_mut() {
            s.sort_unstable();
            t.sort_unstable();
        }
        check_blocks(source, &pairs.iter().map(|p| &p.0).collect::<Vec<_>>())?;
        check_blocks(target, &pairs.iter().map(|p| &p.1).collect::<Vec<_>>())?;
        for (j, (s, t)) in pairs.iter().enumerate() {
            if source.mass_unchecked(s) != target.mass_unchecked(t) {
                return Err(Error::NotMassPreserving { partial: j });
            }
        }
        Ok(PartialIsomorphism {
            source: source.id(),
            target: target.id(),
            pairs,
        })
    }

    pub fn domain(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.pairs.iter().flat_map(|p| p.0.iter().copied()).collect();
        d.sort_unstable();
        d
    }

    pub fn range(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.pairs.iter().flat_map(|p| p.1.iter().copied()).collect();
        r.sort_unstable();
        r
    }

    /// All pairs including the implicit complement pair when it is nonempty.
    pub fn full_pairs(&self, source_len: usize, target_len: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = self.pairs.clone();
        let dom = self.domain();
        let ran = self.range();
        let cs: Vec<usize> = (0..source_len).filter(|x| dom.binary_search(x).is_err()).collect();
        let ct: Vec<usize> = (0..target_len).filter(|x| ran.binary_search(x).is_err()).collect();
        if !cs.is_empty() || !ct.is_empty() {
            out.push((cs, ct));
        }
        out
    }
}

/// An injective Boolean homomorphism given on atoms: source atom `x` goes to
/// the target atom set `images[x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub source: AlgebraId,
    pub target: AlgebraId,
    pub images: Vec<Vec<usize>>,
}

impl Embedding {
    pub fn identity(alg: &MeasuredAlgebra) -> Self {
        Embedding {
            source: alg.id(),
            target: alg.id(),
            images: (0..alg.len()).map(|x| vec![x]).collect(),
        }
    }

    /// Image of an event of the source.
    pub fn image_event(&self, target: &MeasuredAlgebra, e: &Event) -> Result<Event> {
        if e.algebra() != self.source || target.id() != self.target {
            return Err(Error::AlgebraMismatch);
        }
        target.event(e.members().iter().flat_map(|&x| self.images[x].iter().copied()))
    }

    /// Images are nonempty, disjoint, cover the target, and carry the mass of
    /// their atom.
    pub fn is_mass_preserving_onto(&self, source: &MeasuredAlgebra, target: &MeasuredAlgebra) -> bool {
        if source.id() != self.source || target.id() != self.target || self.images.len() != source.len() {
            return false;
        }
        let mut seen = vec![false; target.len()];
        for (x, img) in self.images.iter().enumerate() {
            let mut m = Rational::zero();
            for &y in img {
                if y >= target.len() || seen[y] {
                    return false;
                }
                seen[y] = true;
                m += target.atom_mass(y);
            }
            if img.is_empty() || &m != source.atom_mass(x) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `σ(f_i(c)) = p_i(σ(c))` for every atom `c` and generator `i`.
    pub fn intertwines(&self, small: &FkAction, big: &FkAction) -> bool {
        if small.algebra().id() != self.source || big.algebra().id() != self.target || small.k() != big.k() {
            return false;
        }
        for i in 0..small.k() {
            for c in 0..small.algebra().len() {
                let mut lhs = self.images[small.gen(i).apply(c)].clone();
                let mut rhs: Vec<usize> = self.images[c].iter().map(|&y| big.gen(i).apply(y)).collect();
                lhs.sort_unstable();
                rhs.sort_unstable();
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// Pullback of a target event that is a union of image blocks.
    pub fn preimage(&self, source: &MeasuredAlgebra, e: &Event) -> Result<Event> {
        if e.algebra() != self.target || source.id() != self.source {
            return Err(Error::AlgebraMismatch);
        }
        source.event((0..self.images.len()).filter(|&x| self.images[x].iter().all(|&y| e.contains(y))))
    }
}
