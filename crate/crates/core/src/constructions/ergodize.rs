use crate::action::{invariant_components, FkAction};
use crate::algebra::CellPartition;
use crate::error::{Error, Result};
use crate::perm::Perm;

/// One involution applied after a generator: `f_i ← (u v) ∘ f_i`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Modification {
    pub generator: usize,
    pub swap: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct Ergodized {
    pub action: FkAction,
    pub modifications: Vec<Modification>,
}

/// Classes of the join of the invariant components with the blocks of `a`.
fn join_classes(act: &FkAction, a: &CellPartition) -> Vec<Vec<usize>> {
    let n = act.algebra().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let union = |p: &mut Vec<usize>, x: usize, y: usize| {
        let (rx, ry) = (find(p, x), find(p, y));
        if rx != ry {
            p[rx.max(ry)] = rx.min(ry);
        }
    };
    for comp in invariant_components(act).components {
        for w in comp.windows(2) {
            union(&mut parent, w[0], w[1]);
        }
    }
    for block in a.blocks() {
        for w in block.windows(2) {
            union(&mut parent, w[0], w[1]);
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for x in 0..n {
        let r = find(&mut parent, x);
        if index[r] == usize::MAX {
            index[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[index[r]].push(x);
    }
    classes
}

/// Makes `act` ergodic by involutions that leave `f_i(B)` unchanged for every
/// block `B` of `a`.
///
/// While the component `b¹` of atom 0 is not everything, take the first
/// generator `i`, atom `x ∈ b¹` and atom `y ∈ f_i(B_x) ∖ b¹` in index order,
/// where `B_x` is the block of `x`, and replace `f_i` by `(f_i(x) y) ∘ f_i`.
/// Each step merges `b¹` with the component of `y`.
pub fn ergodize(act: &FkAction, a: &CellPartition) -> Result<Ergodized> {
    let alg = act.algebra();
    if !alg.has_equal_atoms() {
        return Err(Error::UnequalAtoms);
    }
    if a.algebra != alg.id() {
        return Err(Error::AlgebraMismatch);
    }
    let classes = join_classes(act, a);
    if classes.len() > 1 {
        return Err(Error::PreconditionInvariantElement {
            element: classes[0].clone(),
        });
    }
    let n = alg.len();
    let blocks: Vec<Vec<usize>> = a.blocks().into_iter().map(|b| b.to_vec()).collect();
    let block_index = a.block_of_atoms(n);
    let mut current = act.clone();
    let mut modifications = Vec::new();
    loop {
        let comps = invariant_components(&current).components;
        if comps.len() <= 1 {
            break;
        }
        let b1 = &comps[0];
        let mut in_b1 = vec![false; n];
        for &x in b1 {
            in_b1[x] = true;
        }
        let mut found = None;
        'scan: for i in 0..current.k() {
            let f = current.gen(i);
            for &x in b1 {
                let mut targets: Vec<usize> = blocks[block_index[x]].iter().map(|&z| f.apply(z)).collect();
                targets.sort_unstable();
                if let Some(&y) = targets.iter().find(|&&y| !in_b1[y]) {
                    found = Some((i, f.apply(x), y));
                    break 'scan;
                }
            }
        }
        let (i, u, v) = found.expect("precondition guarantees an admissible swap");
        let s = Perm::transposition(n, u, v);
        let g = s.compose(current.gen(i));
        current = current.with_gen(i, g)?;
        modifications.push(Modification {
            generator: i,
            swap: (u, v),
        });
    }
    Ok(Ergodized {
        action: current,
        modifications,
    })
}
