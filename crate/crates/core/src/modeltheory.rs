//! Distances between types over a base tuple, and independence deficiencies.
//!
//! In a probability algebra the type of a tuple `b` over a base `a` is the
//! joint law of the partitions they generate, a [`JointDistribution`]. The
//! distance between two types is the least distance between realizations,
//! which reduces to an optimal coupling of the two conditional fiber laws
//! inside every base cell:
//!
//! - for `d_P` the cost of a coupling is its off-diagonal mass, and the optimum
//!   is the total variation of the two joints;
//! - for the max metric `d` the cost is the largest per-coordinate
//!   disagreement, which is solved as an exact linear program.
//!
//! Base cells of mass zero contribute nothing.

use std::collections::HashSet;

use crate::algebra::{joint_distribution, EventTuple, JointDistribution, MeasuredAlgebra};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::Rational;

/// Which metric on tuples the distances are taken for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// The partition metric `d_P`; closed forms via total variation.
    #[default]
    Tv,
    /// The max metric `d`; exact LP.
    Max,
}

fn same_arity(b: &EventTuple, c: &EventTuple) -> Result<()> {
    if b.arity() != c.arity() {
        return Err(Error::ArityMismatch {
            left: b.arity(),
            right: c.arity(),
        });
    }
    Ok(())
}

/// `d_P`-distance between the types of `b` and `c` over `base`.
pub fn type_distance_tv(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<Rational> {
    same_arity(b, c)?;
    let jb = joint_distribution(alg, base, b)?;
    let jc = joint_distribution(alg, base, c)?;
    jb.total_variation(&jc)
}

/// `d`-distance between the types of `b` and `c` over `base`.
pub fn type_distance_max(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<Rational> {
    same_arity(b, c)?;
    let jb = joint_distribution(alg, base, b)?;
    let jc = joint_distribution(alg, base, c)?;
    coupling_distance_max(&jb, &jc)
}

pub fn type_distance(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
    metric: Metric,
) -> Result<Rational> {
    match metric {
        Metric::Tv => type_distance_tv(alg, base, b, c),
        Metric::Max => type_distance_max(alg, base, b, c),
    }
}

/// Least max-coordinate disagreement over couplings of two joints that share a
/// base marginal.
///
/// Variables `γ_r(s, t) ≥ 0` for each base cell `r` and fiber cells `s`, `t`
/// with positive mass on both sides, plus `z`; minimize `z` subject to the
/// marginal constraints and, for every coordinate `i`,
/// `Σ_r Σ_{s(i) ≠ t(i)} γ_r(s, t) ≤ z`.
pub fn coupling_distance_max(p: &JointDistribution, q: &JointDistribution) -> Result<Rational> {
    if p.base_arity != q.base_arity || p.fiber_arity != q.fiber_arity {
        return Err(Error::ArityMismatch {
            left: p.fiber_arity,
            right: q.fiber_arity,
        });
    }
    if p.base_marginal() != q.base_marginal() {
        return Err(Error::TypeMismatch);
    }
    let n = p.fiber_arity;
    if n == 0 {
        return Ok(Rational::zero());
    }
    let cells = p.fiber_cells();
    // (r, s, t) for every variable; z is the last variable.
    let mut vars: Vec<(usize, usize, usize)> = Vec::new();
    for r in 0..p.base_cells() {
        for s in 0..cells {
            if p.get(r, s).is_zero() {
                continue;
            }
            for t in 0..cells {
                if !q.get(r, t).is_zero() {
                    vars.push((r, s, t));
                }
            }
        }
    }
    let z = vars.len();
    let mut lp = LinearProgram::new(z + 1);
    lp.set_objective(z, Rational::one());
    for r in 0..p.base_cells() {
        for s in 0..cells {
            let m = p.get(r, s);
            if m.is_zero() {
                continue;
            }
            let coefs = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| v.0 == r && v.1 == s)
                .map(|(j, _)| (j, Rational::one()))
                .collect();
            lp.add_row(coefs, Relation::Eq, m.clone());
        }
        for t in 0..cells {
            let m = q.get(r, t);
            if m.is_zero() {
                continue;
            }
            let coefs = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| v.0 == r && v.2 == t)
                .map(|(j, _)| (j, Rational::one()))
                .collect();
            lp.add_row(coefs, Relation::Eq, m.clone());
        }
    }
    for i in 0..n {
        let mut coefs: Vec<(usize, Rational)> = vars
            .iter()
            .enumerate()
            .filter(|(_, v)| ((v.1 ^ v.2) >> i) & 1 == 1)
            .map(|(j, _)| (j, Rational::one()))
            .collect();
        coefs.push((z, -Rational::one()));
        lp.add_row(coefs, Relation::Le, Rational::zero());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible => Err(Error::LpInternal("coupling LP reported infeasible".into())),
        LpOutcome::Unbounded => Err(Error::LpInternal("coupling LP reported unbounded".into())),
    }
}

/// The joining making `b` and `c` conditionally independent over `base`.
///
/// The result has base `base ⌢ c` and fiber `b`:
/// `mass(r, t, s) = μ(r, t) · μ(r, s) / μ(r)`, zero on null base cells. The
/// actual law in the same layout is `joint_distribution(base ⌢ c, b)`.
pub fn relatively_independent_joining(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<JointDistribution> {
    let jb = joint_distribution(alg, base, b)?;
    let jc = joint_distribution(alg, base, c)?;
    let m = base.arity();
    let l = c.arity();
    let n = b.arity();
    let marginal = jb.base_marginal();
    let mut mass = vec![Rational::zero(); 1 << (m + l + n)];
    for (r, mr) in marginal.iter().enumerate() {
        if mr.is_zero() {
            continue;
        }
        for t in 0..(1 << l) {
            let ct = jc.get(r, t);
            if ct.is_zero() {
                continue;
            }
            for s in 0..(1 << n) {
                let bs = jb.get(r, s);
                if bs.is_zero() {
                    continue;
                }
                mass[r | (t << m) | (s << (m + l))] = &(ct * bs) / mr;
            }
        }
    }
    Ok(JointDistribution {
        base_arity: m + l,
        fiber_arity: n,
        mass,
    })
}

fn deficiency_pair(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<(JointDistribution, JointDistribution)> {
    let bc = base.concat(c)?;
    let actual = joint_distribution(alg, &bc, b)?;
    let joined = relatively_independent_joining(alg, base, b, c)?;
    Ok((actual, joined))
}

/// Total-variation distance from the law of `(base, c, b)` to the relatively
/// independent joining: the least `d_P`-move of `b` making it independent of
/// `c` over `base`.
pub fn independence_deficiency(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<Rational> {
    let (actual, joined) = deficiency_pair(alg, base, b, c)?;
    actual.total_variation(&joined)
}

/// The max-metric variant: coupling distance over `base ⌢ c`.
pub fn independence_deficiency_max(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<Rational> {
    let (actual, joined) = deficiency_pair(alg, base, b, c)?;
    coupling_distance_max(&actual, &joined)
}

pub fn independence_deficiency_with(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
    metric: Metric,
) -> Result<Rational> {
    match metric {
        Metric::Tv => independence_deficiency(alg, base, b, c),
        Metric::Max => independence_deficiency_max(alg, base, b, c),
    }
}

/// `b^ε ⫫_base c`: the deficiency lies strictly below `eps`.
pub fn eps_independent(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
    eps: &Rational,
    metric: Metric,
) -> Result<bool> {
    if !eps.is_positive() {
        return Err(Error::NonpositiveEps(eps.clone()));
    }
    Ok(independence_deficiency_with(alg, base, b, c, metric)? < *eps)
}

/// Exact conditional-independence identity
/// `μ(r, t, s) · μ(r) = μ(r, t) · μ(r, s)` for every cell.
pub fn conditionally_independent(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
) -> Result<bool> {
    let bc = base.concat(c)?;
    let actual = joint_distribution(alg, &bc, b)?;
    let jb = joint_distribution(alg, base, b)?;
    let jc = joint_distribution(alg, base, c)?;
    let m = base.arity();
    let marginal = jb.base_marginal();
    for (r, mr) in marginal.iter().enumerate() {
        for t in 0..(1 << c.arity()) {
            for s in 0..(1 << b.arity()) {
                let lhs = actual.get(r | (t << m), s) * mr;
                let rhs = jc.get(r, t) * jb.get(r, s);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Largest instance the brute-force oracle accepts.
pub const ORACLE_MAX_BASE_CELLS: usize = 3;
pub const ORACLE_MAX_FIBER_ARITY: usize = 2;
pub const ORACLE_MAX_GRID: usize = 64;
const ORACLE_MAX_TABLES: usize = 2_000_000;

/// Brute-force type distance: exhaustive search over couplings whose entries
/// are multiples of `1/grid`.
///
/// Shares nothing with the closed form or the LP. Every cell mass of both
/// joints must lie on the grid. The value upper-bounds the true distance; for
/// [`Metric::Tv`] it is exact whenever the masses lie on the grid, since
/// transportation polytopes with integral margins have integral vertices.
pub fn oracle_type_distance(
    alg: &MeasuredAlgebra,
    base: &EventTuple,
    b: &EventTuple,
    c: &EventTuple,
    grid: usize,
    metric: Metric,
) -> Result<Rational> {
    if grid == 0 {
        return Err(Error::InvalidGrid);
    }
    if grid > ORACLE_MAX_GRID {
        return Err(Error::InstanceTooLarge(format!("grid {grid} > {ORACLE_MAX_GRID}")));
    }
    same_arity(b, c)?;
    if b.arity() > ORACLE_MAX_FIBER_ARITY {
        return Err(Error::InstanceTooLarge(format!(
            "fiber arity {} > {ORACLE_MAX_FIBER_ARITY}",
            b.arity()
        )));
    }
    let jb = joint_distribution(alg, base, b)?;
    let jc = joint_distribution(alg, base, c)?;
    let to_units = |m: &Rational| -> Result<usize> {
        m.scale(grid).to_usize().ok_or(Error::InvalidGrid)
    };
    let marginal = jb.base_marginal();
    let live: Vec<usize> = (0..marginal.len()).filter(|&r| !marginal[r].is_zero()).collect();
    if live.len() > ORACLE_MAX_BASE_CELLS {
        return Err(Error::InstanceTooLarge(format!(
            "{} nonempty base cells > {ORACLE_MAX_BASE_CELLS}",
            live.len()
        )));
    }
    let n = b.arity();
    let cells = 1usize << n;
    let mut budget = ORACLE_MAX_TABLES;
    // Per base cell, the set of achievable cost vectors
    // (off-diagonal units, per-coordinate disagreement units).
    let mut per_cell: Vec<Vec<Vec<usize>>> = Vec::new();
    for &r in &live {
        let rows = (0..cells).map(|s| to_units(jb.get(r, s))).collect::<Result<Vec<_>>>()?;
        let cols = (0..cells).map(|t| to_units(jc.get(r, t))).collect::<Result<Vec<_>>>()?;
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut table = vec![0usize; cells * cells];
        enumerate_tables(&rows, cols.clone(), 0, 0, &mut table, cells, &mut budget, &mut |t| {
            let mut cost = vec![0usize; n + 1];
            for s in 0..cells {
                for u in 0..cells {
                    let v = t[s * cells + u];
                    if v == 0 || s == u {
                        continue;
                    }
                    cost[0] += v;
                    for (i, ci) in cost.iter_mut().skip(1).enumerate() {
                        if ((s ^ u) >> i) & 1 == 1 {
                            *ci += v;
                        }
                    }
                }
            }
            seen.insert(cost);
        })?;
        let mut costs: Vec<Vec<usize>> = seen.into_iter().collect();
        costs.sort();
        per_cell.push(costs);
    }
    let units = match metric {
        Metric::Tv => per_cell
            .iter()
            .map(|costs| costs.iter().map(|c| c[0]).min().unwrap_or(0))
            .sum::<usize>(),
        Metric::Max => {
            let mut acc: HashSet<Vec<usize>> = HashSet::from([vec![0; n]]);
            for costs in &per_cell {
                let mut next = HashSet::new();
                for a in &acc {
                    for c in costs {
                        next.insert(a.iter().zip(&c[1..]).map(|(x, y)| x + y).collect::<Vec<_>>());
                    }
                }
                acc = pareto_front(next);
            }
            acc.iter()
                .map(|v| v.iter().copied().max().unwrap_or(0))
                .min()
                .unwrap_or(0)
        }
    };
    Ok(Rational::from_integer(units as i64).div_int(grid))
}

fn pareto_front(points: HashSet<Vec<usize>>) -> HashSet<Vec<usize>> {
    let pts: Vec<Vec<usize>> = points.into_iter().collect();
    pts.iter()
        .filter(|p| {
            !pts.iter()
                .any(|o| o != *p && o.iter().zip(p.iter()).all(|(a, b)| a <= b))
        })
        .cloned()
        .collect()
}

/// Enumerates nonnegative integer `cells × cells` tables with the given row
/// and column sums.
#[allow(clippy::too_many_arguments)]
fn enumerate_tables(
    rows: &[usize],
    mut cols: Vec<usize>,
    s: usize,
    u: usize,
    table: &mut Vec<usize>,
    cells: usize,
    budget: &mut usize,
    visit: &mut dyn FnMut(&[usize]),
) -> Result<()> {
    if s == cells {
        if cols.iter().all(|&c| c == 0) {
            if *budget == 0 {
                return Err(Error::InstanceTooLarge("too many couplings to enumerate".into()));
            }
            *budget -= 1;
            visit(table);
        }
        return Ok(());
    }
    let used: usize = (0..u).map(|j| table[s * cells + j]).sum();
    let left = rows[s] - used;
    if u == cells - 1 {
        if left > cols[u] {
            return Ok(());
        }
        table[s * cells + u] = left;
        cols[u] -= left;
        enumerate_tables(rows, cols.clone(), s + 1, 0, table, cells, budget, visit)?;
        table[s * cells + u] = 0;
        return Ok(());
    }
    for v in 0..=left.min(cols[u]) {
        table[s * cells + u] = v;
        let mut next = cols.clone();
        next[u] -= v;
        enumerate_tables(rows, next, s, u + 1, table, cells, budget, visit)?;
    }
    table[s * cells + u] = 0;
    Ok(())
}
