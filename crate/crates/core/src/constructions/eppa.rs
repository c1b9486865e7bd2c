use num_traits::ToPrimitive;

use crate::action::FkAction;
use crate::algebra::MeasuredAlgebra;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::lcm_of_denominators;

use super::partial::{Embedding, PartialIsomorphism};

#[derive(Clone, Debug)]
pub struct EppaExtension {
    pub algebra: MeasuredAlgebra,
    pub action: FkAction,
    /// Atom `x` of the input goes to a block of consecutive unit atoms.
    pub embedding: Embedding,
}

/// Completes a tuple of partial automorphisms of `alg` to automorphisms of a
/// finite algebra with equal atoms.
///
/// With `N` the lcm of the atom-mass denominators, atom `x` becomes a run of
/// `N μ(x)` units. Each pair `(S, T)` sends the units of `S` in order onto those
/// of `T`; the units outside the domain go in order onto the units outside the
/// range.
pub fn eppa_extend(alg: &MeasuredAlgebra, partials: &[PartialIsomorphism]) -> Result<EppaExtension> {
    let l = lcm_of_denominators(alg.atoms().iter());
    let units: Vec<usize> = alg
        .atoms()
        .iter()
        .map(|m| {
            (m.numer() * (&l / m.denom()))
                .to_usize()
                .ok_or_else(|| Error::InstanceTooLarge("too many units".into()))
        })
        .collect::<Result<_>>()?;
    let total: usize = units.iter().sum();
    let mut runs = Vec::with_capacity(alg.len());
    let mut start = 0;
    for &u in &units {
        runs.push((start..start + u).collect::<Vec<usize>>());
        start += u;
    }
    let big = MeasuredAlgebra::uniform(total)?;
    let mut gens = Vec::with_capacity(partials.len());
    for (i, p) in partials.iter().enumerate() {
        if p.source != alg.id() || p.target != alg.id() {
            return Err(Error::AlgebraMismatch);
        }
        // Revalidates disjointness and masses.
        PartialIsomorphism::new(alg, alg, p.pairs.clone()).map_err(|e| match e {
            Error::NotMassPreserving { .. } => Error::NotMassPreserving { partial: i },
            other => other,
        })?;
        let mut images: Vec<Option<usize>> = vec![None; total];
        let mut hit = vec![false; total];
        for (s, t) in &p.pairs {
            let su = s.iter().flat_map(|&x| runs[x].iter().copied());
            let tu: Vec<usize> = t.iter().flat_map(|&x| runs[x].iter().copied()).collect();
            for (u, v) in su.zip(tu) {
                images[u] = Some(v);
                hit[v] = true;
            }
        }
        let free_src = (0..total).filter(|&u| images[u].is_none()).collect::<Vec<_>>();
        let free_tgt = (0..total).filter(|&v| !hit[v]);
        for (u, v) in free_src.into_iter().zip(free_tgt) {
            images[u] = Some(v);
        }
        let images = images.into_iter().map(|v| v.expect("completed")).collect();
        gens.push(Perm::from_images(images).expect("completion is a bijection"));
    }
    let action = FkAction::from_perms(big.clone(), gens)?;
    let embedding = Embedding {
        source: alg.id(),
        target: big.id(),
        images: runs,
    };
    Ok(EppaExtension {
        algebra: big,
        action,
        embedding,
    })
}
