use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::action::FkAction;
use crate::algebra::MeasuredAlgebra;
use crate::error::{Error, Result};
use crate::perm::Perm;

/// A finite group given by its multiplication table, marked by `k` generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGroup {
    order: usize,
    mul: Vec<Vec<usize>>,
    identity: usize,
    gens: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    order: usize,
    mul: Vec<Vec<usize>>,
    gens: Vec<usize>,
}

impl Serialize for MarkedGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupJson {
            order: self.order,
            mul: self.mul.clone(),
            gens: self.gens.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarkedGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = GroupJson::deserialize(d)?;
        MarkedGroup::from_table(g.order, g.mul, g.gens).map_err(serde::de::Error::custom)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidGroup(msg.into())
}

impl MarkedGroup {
    /// Validates the group axioms on the table and that `gens` generate.
    pub fn from_table(order: usize, mul: Vec<Vec<usize>>, gens: Vec<usize>) -> Result<Self> {
        if order == 0 {
            return Err(invalid("empty group"));
        }
        if mul.len() != order || mul.iter().any(|row| row.len() != order) {
            return Err(invalid("table is not order × order"));
        }
        if mul.iter().flatten().any(|&x| x >= order) {
            return Err(invalid("table entry out of range"));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or_else(|| invalid("no identity element"))?;
        for a in 0..order {
            for b in 0..order {
                let ab = mul[a][b];
                for c in 0..order {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return Err(invalid(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        for a in 0..order {
            if !(0..order).any(|b| mul[a][b] == identity) {
                return Err(invalid(format!("element {a} has no inverse")));
            }
        }
        if let Some(&g) = gens.iter().find(|&&g| g >= order) {
            return Err(invalid(format!("generator {g} out of range")));
        }
        let group = MarkedGroup {
            order,
            mul,
            identity,
            gens,
        };
        group.check_generates()?;
        Ok(group)
    }

    /// Trusted constructor for tables built by composition.
    pub(crate) fn from_parts(mul: Vec<Vec<usize>>, identity: usize, gens: Vec<usize>) -> Result<Self> {
        let group = MarkedGroup {
            order: mul.len(),
            mul,
            identity,
            gens,
        };
        group.check_generates()?;
        Ok(group)
    }

    fn check_generates(&self) -> Result<()> {
        if self.closure_size() != self.order {
            return Err(Error::NotGenerating);
        }
        Ok(())
    }

    fn closure_size(&self) -> usize {
        let mut seen = vec![false; self.order];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &g in &self.gens {
                let y = self.mul[g][x];
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count
    }

    /// `Z/n` marked by the residues `gens`.
    pub fn cyclic(n: usize, gens: &[i64]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("empty group"));
        }
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let gens = gens.iter().map(|&a| a.rem_euclid(n as i64) as usize).collect();
        Self::from_parts(mul, 0, gens)
    }

    /// `S_n` in lexicographic order of one-line images, marked by `gens`.
    pub fn symmetric(n: usize, gens: &[Perm]) -> Result<Self> {
        if n > 6 {
            return Err(Error::InstanceTooLarge(format!("S_{n} is too large")));
        }
        let mut elements = Vec::new();
        permutations(&mut (0..n).collect::<Vec<_>>(), 0, &mut elements);
        elements.sort();
        let elements: Vec<Perm> = elements
            .into_iter()
            .map(|v| Perm::from_images(v).expect("permutation"))
            .collect();
        let index: HashMap<&Perm, usize> = elements.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mul = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&a.compose(b)]).collect())
            .collect();
        let gens = gens
            .iter()
            .map(|g| {
                index
                    .get(g)
                    .copied()
                    .ok_or_else(|| invalid(format!("generator is not a permutation of {n} points")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(mul, 0, gens)
    }

    /// Parses `cyclic:n:a1,…,ak` or `sym:n:p1;…;pk`.
    ///
    /// A permutation is written in one-line notation, comma separated or as a
    /// digit string, either 0-based or 1-based.
    pub fn parse_builtin(spec: &str) -> Result<Self> {
        let mut it = spec.splitn(3, ':');
        let kind = it.next().unwrap_or_default();
        let n: usize = it
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("missing group size in {spec:?}")))?;
        let rest = it.next().unwrap_or("").trim();
        match kind {
            "cyclic" => {
                let gens = if rest.is_empty() {
                    Vec::new()
                } else {
                    rest.split(',')
                        .map(|a| a.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{a:?}: {e}"))))
                        .collect::<Result<Vec<_>>>()?
                };
                Self::cyclic(n, &gens)
            }
            "sym" => {
                let gens = if rest.is_empty() {
                    Vec::new()
                } else {
                    rest.split(';').map(|p| parse_one_line(p, n)).collect::<Result<Vec<_>>>()?
                };
                Self::symmetric(n, &gens)
            }
            other => Err(Error::Parse(format!("unknown group family {other:?}"))),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn k(&self) -> usize {
        self.gens.len()
    }

    pub fn gens(&self) -> &[usize] {
        &self.gens
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order)
            .find(|&b| self.mul[a][b] == self.identity)
            .expect("validated group")
    }
}

fn permutations(v: &mut Vec<usize>, at: usize, out: &mut Vec<Vec<usize>>) {
    if at == v.len() {
        out.push(v.clone());
        return;
    }
    for i in at..v.len() {
        v.swap(at, i);
        permutations(v, at + 1, out);
        v.swap(at, i);
    }
}

fn parse_one_line(text: &str, n: usize) -> Result<Perm> {
    let text = text.trim();
    let entries: Vec<usize> = if text.contains(',') || text.contains(' ') {
        text.split([',', ' '])
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?
    } else {
        text.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::Parse(format!("bad permutation {text:?}")))
            })
            .collect::<Result<_>>()?
    };
    if entries.len() != n {
        return Err(Error::Parse(format!("{text:?} is not a permutation of {n} points")));
    }
    let zero_based = entries.iter().all(|&x| x < n);
    let images = if zero_based {
        entries
    } else {
        entries.into_iter().map(|x| x.wrapping_sub(1)).collect()
    };
    Perm::from_images(images).ok_or_else(|| Error::Parse(format!("{text:?} is not a permutation of {n} points")))
}

/// The action of `F_k` on `Γ` with Haar measure, generator `i` multiplying on
/// the left by `γ_i`.
pub fn quotient_action(g: &MarkedGroup) -> Result<FkAction> {
    g.check_generates()?;
    let alg = MeasuredAlgebra::uniform(g.order)?;
    let gens = g
        .gens
        .iter()
        .map(|&s| Perm::from_images(g.mul[s].clone()).expect("rows of a group table are bijective"))
        .collect();
    FkAction::from_perms(alg, gens)
}

/// The subgroup of `Γ1 × Γ2` generated by the paired generators.
#[derive(Clone, Debug)]
pub struct JointQuotient {
    pub group: MarkedGroup,
    /// Element index → factor element index.
    pub proj1: Vec<usize>,
    pub proj2: Vec<usize>,
}

pub fn joint_quotient(g1: &MarkedGroup, g2: &MarkedGroup) -> Result<JointQuotient> {
    if g1.k() != g2.k() {
        return Err(Error::GeneratorCountMismatch {
            expected: g1.k(),
            got: g2.k(),
        });
    }
    let start = (g1.identity, g2.identity);
    let mut elements = vec![start];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut head = 0;
    while head < elements.len() {
        let (a, b) = elements[head];
        head += 1;
        for (&s, &t) in g1.gens.iter().zip(&g2.gens) {
            let next = (g1.mul[s][a], g2.mul[t][b]);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(next) {
                e.insert(elements.len());
                elements.push(next);
            }
        }
    }
    let mul = elements
        .iter()
        .map(|&(a1, a2)| {
            elements
                .iter()
                .map(|&(b1, b2)| index[&(g1.mul[a1][b1], g2.mul[a2][b2])])
                .collect()
        })
        .collect();
    let gens = g1
        .gens
        .iter()
        .zip(&g2.gens)
        .map(|(&s, &t)| index[&(s, t)])
        .collect();
    let group = MarkedGroup::from_parts(mul, 0, gens)?;
    Ok(JointQuotient {
        group,
        proj1: elements.iter().map(|e| e.0).collect(),
        proj2: elements.iter().map(|e| e.1).collect(),
    })
}

/// Extends `gen_images` along words in `src`'s generators `from`; returns the
/// map if it is a bijective homomorphism.
fn extend_hom(src: &MarkedGroup, dst: &MarkedGroup, from: &[usize], to: &[usize]) -> Option<Vec<usize>> {
    let mut phi = vec![usize::MAX; src.order];
    phi[src.identity] = dst.identity;
    let mut queue = VecDeque::from([src.identity]);
    while let Some(x) = queue.pop_front() {
        for (&s, &t) in from.iter().zip(to) {
            let y = src.mul[s][x];
            let img = dst.mul[t][phi[x]];
            if phi[y] == usize::MAX {
                phi[y] = img;
                queue.push_back(y);
            } else if phi[y] != img {
                return None;
            }
        }
    }
    if phi.contains(&usize::MAX) {
        return None;
    }
    let mut hit = vec![false; dst.order];
    for &y in &phi {
        if hit[y] {
            return None;
        }
        hit[y] = true;
    }
    for a in 0..src.order {
        for b in 0..src.order {
            if phi[src.mul[a][b]] != dst.mul[phi[a]][phi[b]] {
                return None;
            }
        }
    }
    Some(phi)
}

/// An isomorphism sending generator `i` of `g` to generator `i` of `h`.
pub fn marked_isomorphism(g: &MarkedGroup, h: &MarkedGroup) -> Option<Vec<usize>> {
    if g.order != h.order || g.k() != h.k() {
        return None;
    }
    extend_hom(g, h, &g.gens, &h.gens)
}

/// Some abstract group isomorphism `g → h`, found by trying every image of the
/// generators of `g`.
pub fn find_isomorphism(g: &MarkedGroup, h: &MarkedGroup) -> Option<Vec<usize>> {
    if g.order != h.order {
        return None;
    }
    let mut from: Vec<usize> = g.gens.clone();
    from.sort_unstable();
    from.dedup();
    from.retain(|&x| x != g.identity);
    let mut to = vec![0; from.len()];
    loop {
        if let Some(phi) = extend_hom(g, h, &from, &to) {
            return Some(phi);
        }
        // Next tuple in lexicographic order.
        let mut i = to.len();
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            to[i] += 1;
            if to[i] < h.order {
                break;
            }
            to[i] = 0;
        }
    }
}
