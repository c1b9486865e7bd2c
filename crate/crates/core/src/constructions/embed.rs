use std::collections::HashMap;

use crate::action::{invariant_components, tensor_trivial, FkAction};
use crate::algebra::{validate_algebra, MeasuredAlgebra};
use crate::error::{Error, Result};
use crate::perm::Perm;

use super::group::{quotient_action, MarkedGroup};
use super::partial::Embedding;

/// Largest permutation group the embeddings will enumerate.
pub const MAX_GROUP_ORDER: usize = 2520;

/// The group generated by `gens` on `n` points, enumerated breadth first:
/// element `σ` is followed by `gen_i ∘ σ` for each `i`. Element 0 is the
/// identity and `mul[a][b]` is the index of `a ∘ b`.
pub fn generated_perm_group(gens: &[Perm], n: usize) -> Result<(MarkedGroup, Vec<Perm>)> {
    let mut elements = vec![Perm::identity(n)];
    let mut index: HashMap<Perm, usize> = HashMap::from([(Perm::identity(n), 0)]);
    let mut head = 0;
    while head < elements.len() {
        let sigma = elements[head].clone();
        head += 1;
        for g in gens {
            let next = g.compose(&sigma);
            if !index.contains_key(&next) {
                if elements.len() == MAX_GROUP_ORDER {
                    return Err(Error::InstanceTooLarge(format!(
                        "generated group exceeds {MAX_GROUP_ORDER} elements"
                    )));
                }
                index.insert(next.clone(), elements.len());
                elements.push(next);
            }
        }
    }
    let mul = elements
        .iter()
        .map(|a| elements.iter().map(|b| index[&a.compose(b)]).collect())
        .collect();
    let marks = gens.iter().map(|g| index[g]).collect();
    Ok((MarkedGroup::from_parts(mul, 0, marks)?, elements))
}

#[derive(Clone, Debug)]
pub struct QuotientEmbedding {
    pub group: MarkedGroup,
    /// Element `γ` as a permutation of the source atoms.
    pub elements: Vec<Perm>,
    pub quotient: FkAction,
    pub embedding: Embedding,
}

#[derive(Clone, Debug)]
pub struct TensorEmbedding {
    pub group: MarkedGroup,
    pub elements: Vec<Perm>,
    /// Invariant components, ordered by least atom.
    pub orbits: Vec<Vec<usize>>,
    /// One atom of mass `μ(o)` per orbit.
    pub blocks: MeasuredAlgebra,
    /// `quotient_action(Γ′) ⊗ trivial(blocks)`; atom `(γ, o)` is `γ · |O| + o`.
    pub target: FkAction,
    pub embedding: Embedding,
}

fn verify(emb: &Embedding, src: &FkAction, dst: &FkAction) -> Result<()> {
    if !emb.is_mass_preserving_onto(src.algebra(), dst.algebra()) || !emb.intertwines(src, dst) {
        return Err(Error::EmbeddingNotEquivariant);
    }
    Ok(())
}

/// `σ(c) = {γ ∈ Γ′ : γ(0) = c}` for a transitive action with equal atoms.
pub fn embed_transitive_into_quotient(act: &FkAction) -> Result<QuotientEmbedding> {
    let alg = act.algebra();
    if !alg.has_equal_atoms() {
        return Err(Error::UnequalAtoms);
    }
    if !act.is_ergodic() {
        return Err(Error::NotTransitive);
    }
    let (group, elements) = generated_perm_group(act.gens(), alg.len())?;
    let quotient = quotient_action(&group)?;
    let mut images = vec![Vec::new(); alg.len()];
    for (g, sigma) in elements.iter().enumerate() {
        images[sigma.apply(0)].push(g);
    }
    let embedding = Embedding {
        source: alg.id(),
        target: quotient.algebra().id(),
        images,
    };
    verify(&embedding, act, &quotient)?;
    Ok(QuotientEmbedding {
        group,
        elements,
        quotient,
        embedding,
    })
}

/// `σ(c) = {γ : γ(c_o) = c} × {o}` where `o` is the orbit of `c` and `c_o` its
/// least atom.
pub fn embed_into_profinite_tensor(act: &FkAction) -> Result<TensorEmbedding> {
    let alg = act.algebra();
    if !alg.has_equal_atoms() {
        return Err(Error::UnequalAtoms);
    }
    let decomposition = invariant_components(act);
    let owner = decomposition.owner(alg.len());
    let orbits = decomposition.components;
    let blocks = validate_algebra(orbits.iter().map(|o| alg.mass_unchecked(o)).collect())?;
    let (group, elements) = generated_perm_group(act.gens(), alg.len())?;
    let quotient = quotient_action(&group)?;
    let target = tensor_trivial(&quotient, &blocks);
    let width = orbits.len();
    let mut images = vec![Vec::new(); alg.len()];
    for (g, sigma) in elements.iter().enumerate() {
        for (o, orbit) in orbits.iter().enumerate() {
            images[sigma.apply(orbit[0])].push(g * width + o);
        }
    }
    debug_assert!(images.iter().enumerate().all(|(c, img)| img.iter().all(|&y| y % width == owner[c])));
    let embedding = Embedding {
        source: alg.id(),
        target: target.algebra().id(),
        images,
    };
    verify(&embedding, act, &target)?;
    Ok(TensorEmbedding {
        group,
        elements,
        orbits,
        blocks,
        target,
        embedding,
    })
}
