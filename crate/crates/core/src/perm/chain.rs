use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Perm;
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Seed for the sampling used when a chain is rebuilt over a new base. The
/// target order is known in that case, so the result is exact and the seed
/// only affects which strong generators get picked.
const REBASE_SEED: u64 = 0x6261_7365_6368_6e67;

#[derive(Clone, Debug)]
struct Strong {
    perm: Perm,
    inv: Perm,
    /// Rank (position in the base order) of the first point moved.
    rank: u32,
}

#[derive(Clone, Debug)]
struct Level {
    point: u32,
    rank: u32,
    /// Strong generators fixing every point ranked before `rank`.
    gens: Vec<usize>,
    orbit: Vec<u32>,
    slot: Vec<u32>,
    reps: Vec<Perm>,
    inv_reps: Vec<Perm>,
    /// Schreier generators `(orbit[i], gens[j])` with `i < .0 && j < .1`
    /// are known to sift.
    checked: (usize, usize),
}

impl Level {
    fn new(point: u32, rank: u32, degree: usize) -> Self {
        let mut slot = vec![NONE; degree];
        slot[point as usize] = 0;
        Level {
            point,
            rank,
            gens: Vec::new(),
            orbit: vec![point],
            slot,
            reps: vec![Perm::identity(degree)],
            inv_reps: vec![Perm::identity(degree)],
            checked: (0, 0),
        }
    }

    /// Closes the orbit under `gens`, given that the first `old` points were
    /// already closed under every generator except the last `fresh` ones.
    fn close_orbit(&mut self, strong: &[Strong], fresh: usize) {
        let first_fresh = self.gens.len() - fresh;
        let old = self.orbit.len();
        for i in 0..old {
            for j in first_fresh..self.gens.len() {
                self.visit(i, self.gens[j], strong);
            }
        }
        let mut i = old;
        while i < self.orbit.len() {
            for j in 0..self.gens.len() {
                self.visit(i, self.gens[j], strong);
            }
            i += 1;
        }
    }

    #[inline]
    fn visit(&mut self, i: usize, gen: usize, strong: &[Strong]) {
        let s = &strong[gen];
        let image = s.perm.apply(self.orbit[i]);
        if self.slot[image as usize] == NONE {
            let rep = self.reps[i].compose(&s.perm);
            let inv = s.inv.compose(&self.inv_reps[i]);
            self.slot[image as usize] = self.orbit.len() as u32;
            self.orbit.push(image);
            self.reps.push(rep);
            self.inv_reps.push(inv);
        }
    }
}

/// A base and strong generating set for a permutation group.
///
/// The base is taken from a fixed priority order on the points: every point
/// has a rank and the chain only stores levels whose basic orbit is
/// nontrivial. Consequently, the pointwise stabilizer of the first `k` points
/// of the priority order is always a suffix of the chain.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    base_order: Vec<u32>,
    rank: Vec<u32>,
    generators: Vec<Perm>,
    strong: Vec<Strong>,
    levels: Vec<Level>,
}

impl StabChain {
    /// Deterministic Schreier–Sims over the natural point order.
    pub fn build(degree: usize, generators: &[Perm]) -> Result<Self> {
        Self::build_with_base_order(degree, generators, (0..degree as u32).collect())
    }

    /// Deterministic Schreier–Sims with base points taken from `base_order`
    /// (a permutation of all points, highest priority first).
    pub fn build_with_base_order(
        degree: usize,
        generators: &[Perm],
        base_order: Vec<u32>,
    ) -> Result<Self> {
        let mut chain = Self::empty(degree, base_order)?;
        for g in generators {
            if g.degree() != degree {
                return Err(Error::ShapeMismatch(format!(
                    "generator of degree {} in a group of degree {degree}",
                    g.degree()
                )));
            }
            chain.generators.push(g.clone());
            let (residue, rank) = chain.sift_from(g.clone(), 0);
            if let Some(rank) = rank {
                chain.add_strong(residue, rank);
            }
        }
        chain.schreier_sims();
        Ok(chain)
    }

    fn empty(degree: usize, base_order: Vec<u32>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::ShapeMismatch("empty point domain".into()));
        }
        if base_order.len() != degree {
            return Err(Error::ShapeMismatch("base order must list every point".into()));
        }
        let mut rank = vec![NONE; degree];
        for (i, &p) in base_order.iter().enumerate() {
            if p as usize >= degree || rank[p as usize] != NONE {
                return Err(Error::ShapeMismatch("base order is not a permutation".into()));
            }
            rank[p as usize] = i as u32;
        }
        Ok(StabChain {
            degree,
            base_order,
            rank,
            generators: Vec::new(),
            strong: Vec::new(),
            levels: Vec::new(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn strong_generators(&self) -> impl Iterator<Item = &Perm> {
        self.strong.iter().map(|s| &s.perm)
    }

    /// Base points of the nontrivial levels, in chain order.
    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.point).collect()
    }

    pub fn base_order(&self) -> &[u32] {
        &self.base_order
    }

    /// Basic orbit lengths along the chain.
    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> BigUint {
        let mut order = BigUint::one();
        for l in &self.levels {
            order *= l.orbit.len();
        }
        order
    }

    /// Prime factorization of the order, read off the orbit lengths.
    pub fn order_factorization(&self) -> BTreeMap<u64, u64> {
        let mut acc = BTreeMap::new();
        for l in &self.levels {
            for (p, e) in crate::invariants::factor_u64(l.orbit.len() as u64) {
                *acc.entry(p).or_insert(0) += e;
            }
        }
        acc
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, g: &Perm) -> Result<bool> {
        if g.degree() != self.degree {
            return Err(Error::ShapeMismatch(format!(
                "permutation of degree {} tested against a group of degree {}",
                g.degree(),
                self.degree
            )));
        }
        Ok(self.sift_from(g.clone(), 0).1.is_none())
    }

    /// The orbit of a single point under the whole group.
    pub fn orbit(&self, point: u32) -> Vec<u32> {
        let gens: Vec<&Perm> = self.strong.iter().map(|s| &s.perm).collect();
        let mut seen = vec![false; self.degree];
        let mut orbit = vec![point];
        seen[point as usize] = true;
        let mut i = 0;
        while i < orbit.len() {
            for g in &gens {
                let y = g.apply(orbit[i]);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit
    }

    /// Uniform element: one transversal element per level, multiplied from
    /// the bottom of the chain up.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Perm {
        let mut g = Perm::identity(self.degree);
        for level in self.levels.iter().rev() {
            let i = rng.gen_range(0..level.orbit.len());
            g.compose_assign(&level.reps[i]);
        }
        g
    }

    /// Uniform element drawn from a seeded generator.
    pub fn sample_seeded(&self, seed: u64) -> Perm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_uniform(&mut rng)
    }

    /// Every element exactly once, in a fixed order; fails when the order
    /// exceeds `cap`.
    pub fn enumerate(&self, cap: u64) -> Result<EnumerateIter<'_>> {
        self.check_cap(cap)?;
        Ok(EnumerateIter::new(self, self.levels.len()))
    }

    fn check_cap(&self, cap: u64) -> Result<()> {
        let order = self.order();
        if order > BigUint::from(cap) {
            return Err(Error::EnumerationTooLarge {
                size: order.to_string(),
                cap,
            });
        }
        Ok(())
    }

    /// Pointwise stabilizer of `points`, computed by rebuilding the chain
    /// with those points at the front of the base.
    pub fn pointwise_stabilizer(&self, points: &[u32]) -> Result<StabChain> {
        let rebased = self.rebase(points)?;
        let prefix = dedup_len(points);
        Ok(rebased.stabilizer_suffix(prefix))
    }

    /// The stabilizer of the first `prefix` points of the base order, which
    /// is a suffix of the chain.
    pub fn stabilizer_suffix(&self, prefix: usize) -> StabChain {
        let keep: Vec<usize> = (0..self.strong.len())
            .filter(|&i| self.strong[i].rank as usize >= prefix)
            .collect();
        let mut remap = vec![NONE as usize; self.strong.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let strong: Vec<Strong> = keep.iter().map(|&i| self.strong[i].clone()).collect();
        let levels: Vec<Level> = self
            .levels
            .iter()
            .filter(|l| l.rank as usize >= prefix)
            .map(|l| {
                let mut l = l.clone();
                l.gens = l.gens.iter().map(|&g| remap[g]).collect();
                l
            })
            .collect();
        StabChain {
            degree: self.degree,
            base_order: self.base_order.clone(),
            rank: self.rank.clone(),
            generators: strong.iter().map(|s| s.perm.clone()).collect(),
            strong,
            levels,
        }
    }

    /// The same group with a base order starting with `prefix` (remaining
    /// points keep their current relative order). Exact: the rebuild stops
    /// once the new chain reaches the known group order.
    pub fn rebase(&self, prefix: &[u32]) -> Result<StabChain> {
        let mut taken = vec![false; self.degree];
        let mut order = Vec::with_capacity(self.degree);
        for &p in prefix {
            if p as usize >= self.degree {
                return Err(Error::ShapeMismatch(format!(
                    "point {} outside domain of size {}",
                    p + 1,
                    self.degree
                )));
            }
            if !taken[p as usize] {
                taken[p as usize] = true;
                order.push(p);
            }
        }
        if order.iter().zip(&self.base_order).all(|(a, b)| a == b) {
            return Ok(self.clone());
        }
        for &p in &self.base_order {
            if !taken[p as usize] {
                order.push(p);
            }
        }
        let target = self.order();
        let mut chain = Self::empty(self.degree, order)?;
        chain.generators = self.generators.clone();
        for s in &self.strong {
            let (residue, rank) = chain.sift_from(s.perm.clone(), 0);
            if let Some(rank) = rank {
                chain.add_strong(residue, rank);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(REBASE_SEED);
        while chain.order() < target {
            let g = self.sample_uniform(&mut rng);
            let (residue, rank) = chain.sift_from(g, 0);
            if let Some(rank) = rank {
                chain.add_strong(residue, rank);
            }
        }
        Ok(chain)
    }

    /// Orbit of the tuple `points` under the group. Each element of the
    /// returned orbit is the image tuple of exactly `|G| / |orbit|` group
    /// elements.
    pub fn tuple_orbit(&self, points: &[u32], cap: u64) -> Result<TupleOrbit> {
        let rebased = self.rebase(points)?;
        let prefix = dedup_len(points);
        let top = rebased
            .levels
            .iter()
            .take_while(|l| (l.rank as usize) < prefix)
            .count();
        let mut size = BigUint::one();
        for l in &rebased.levels[..top] {
            size *= l.orbit.len();
        }
        if size > BigUint::from(cap) {
            return Err(Error::EnumerationTooLarge {
                size: size.to_string(),
                cap,
            });
        }
        let stabilizer_order = rebased.stabilizer_suffix(prefix).order();
        let mut tuples = Vec::new();
        let mut iter = EnumerateIter::new(&rebased, top);
        while let Some(g) = iter.next_ref() {
            tuples.push(points.iter().map(|&p| g.apply(p)).collect());
        }
        Ok(TupleOrbit {
            tuples,
            stabilizer_order,
        })
    }

    /// Size of the orbit of the tuple `points`, without enumerating it.
    pub fn tuple_orbit_size(&self, points: &[u32]) -> Result<BigUint> {
        let stab = self.pointwise_stabilizer(points)?;
        Ok(self.order() / stab.order())
    }

    // ---------------------------------------------------------------------
    // Schreier–Sims internals

    fn first_moved(&self, g: &Perm, from: usize) -> Option<usize> {
        (from..self.degree).find(|&r| {
            let p = self.base_order[r];
            g.apply(p) != p
        })
    }

    fn level_at_rank(&self, rank: u32) -> std::result::Result<usize, usize> {
        self.levels.binary_search_by_key(&rank, |l| l.rank)
    }

    /// Sifts `g` starting at base-order position `from`. Returns the residue
    /// and, when nontrivial, the rank of its first moved point.
    fn sift_from(&self, mut g: Perm, from: usize) -> (Perm, Option<u32>) {
        let mut pos = from;
        loop {
            let Some(r) = self.first_moved(&g, pos) else {
                return (g, None);
            };
            let p = self.base_order[r];
            match self.level_at_rank(r as u32) {
                Ok(li) => {
                    let level = &self.levels[li];
                    let slot = level.slot[g.apply(p) as usize];
                    if slot == NONE {
                        return (g, Some(r as u32));
                    }
                    g.compose_assign(&level.inv_reps[slot as usize]);
                    pos = r + 1;
                }
                Err(_) => return (g, Some(r as u32)),
            }
        }
    }

    /// Adds a strong generator whose first moved point has rank `rank`;
    /// returns the index of its level.
    fn add_strong(&mut self, g: Perm, rank: u32) -> usize {
        let id = self.strong.len();
        let inv = g.inverse();
        self.strong.push(Strong { perm: g, inv, rank });
        let li = match self.level_at_rank(rank) {
            Ok(li) => li,
            Err(li) => {
                let point = self.base_order[rank as usize];
                let mut level = Level::new(point, rank, self.degree);
                level.gens = (0..id).filter(|&s| self.strong[s].rank >= rank).collect();
                let k = level.gens.len();
                level.close_orbit(&self.strong, k);
                self.levels.insert(li, level);
                li
            }
        };
        let strong = &self.strong;
        for level in &mut self.levels[..=li] {
            level.gens.push(id);
            level.close_orbit(strong, 1);
        }
        li
    }

    fn schreier_sims(&mut self) {
        let mut i = self.levels.len();
        while i > 0 {
            let li = i - 1;
            match self.check_level(li) {
                None => i -= 1,
                Some((residue, rank)) => {
                    i = self.add_strong(residue, rank) + 1;
                }
            }
        }
    }

    /// Sifts the unchecked Schreier generators of level `li`; returns the
    /// first nontrivial residue.
    fn check_level(&mut self, li: usize) -> Option<(Perm, u32)> {
        let (done_orbit, done_gens) = self.levels[li].checked;
        let orbit_len = self.levels[li].orbit.len();
        let gens_len = self.levels[li].gens.len();
        let from = self.levels[li].rank as usize + 1;
        for a in 0..orbit_len {
            for b in 0..gens_len {
                if a < done_orbit && b < done_gens {
                    continue;
                }
                let level = &self.levels[li];
                let s = &self.strong[level.gens[b]];
                let delta = level.orbit[a];
                let image = s.perm.apply(delta);
                let target = level.slot[image as usize] as usize;
                let mut g = level.reps[a].compose(&s.perm);
                if g == level.reps[target] {
                    continue;
                }
                g.compose_assign(&level.inv_reps[target]);
                let (residue, rank) = self.sift_from(g, from);
                if let Some(rank) = rank {
                    return Some((residue, rank));
                }
            }
        }
        self.levels[li].checked = (orbit_len, gens_len);
        None
    }
}

fn dedup_len(points: &[u32]) -> usize {
    let mut v = points.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Image tuples of a point tuple, one per orbit element.
#[derive(Clone, Debug)]
pub struct TupleOrbit {
    pub tuples: Vec<Vec<u32>>,
    /// Order of the pointwise stabilizer of the tuple, i.e. the number of
    /// group elements producing each image tuple.
    pub stabilizer_order: BigUint,
}

/// Odometer over transversal indices of the top `depth` levels.
pub struct EnumerateIter<'a> {
    chain: &'a StabChain,
    depth: usize,
    idx: Vec<usize>,
    /// partial[j] = t_j * ... * t_1 (left to right), partial[0] = identity
    partial: Vec<Perm>,
    started: bool,
    done: bool,
}

impl<'a> EnumerateIter<'a> {
    fn new(chain: &'a StabChain, depth: usize) -> Self {
        let id = Perm::identity(chain.degree);
        let mut partial = vec![id; depth + 1];
        for j in 1..=depth {
            partial[j] = chain.levels[j - 1].reps[0].compose(&partial[j - 1]);
        }
        EnumerateIter {
            chain,
            depth,
            idx: vec![0; depth],
            partial,
            started: false,
            done: false,
        }
    }

    fn advance(&mut self) -> bool {
        let mut j = self.depth;
        loop {
            if j == 0 {
                return false;
            }
            let level = &self.chain.levels[j - 1];
            if self.idx[j - 1] + 1 < level.orbit.len() {
                self.idx[j - 1] += 1;
                break;
            }
            self.idx[j - 1] = 0;
            j -= 1;
        }
        for k in j..=self.depth {
            let rep = &self.chain.levels[k - 1].reps[self.idx[k - 1]];
            self.partial[k] = rep.compose(&self.partial[k - 1]);
        }
        true
    }

    /// Borrowing variant of `next` that avoids cloning.
    pub fn next_ref(&mut self) -> Option<&Perm> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        Some(&self.partial[self.depth])
    }
}

impl Iterator for EnumerateIter<'_> {
    type Item = Perm;

    fn next(&mut self) -> Option<Perm> {
        self.next_ref().cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn sym(n: usize) -> Vec<Perm> {
        let cycle: Vec<u32> = (1..=n as u32).collect();
        vec![
            Perm::from_cycles(n, &[&[1, 2]]).unwrap(),
            Perm::from_cycles(n, &[&cycle]).unwrap(),
        ]
    }

    #[test]
    fn trivial_and_cyclic_groups() {
        let chain = StabChain::build(4, &[]).unwrap();
        assert_eq!(chain.order(), BigUint::one());
        let c = Perm::from_cycles(5, &[&[1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(StabChain::build(5, &[c]).unwrap().order(), BigUint::from(5u32));
        assert!(StabChain::build(0, &[]).is_err());
    }

    #[test]
    fn symmetric_group_orders() {
        for n in 2..=7 {
            let chain = StabChain::build(n, &sym(n)).unwrap();
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(chain.order(), BigUint::from(fact));
        }
    }

    #[test]
    fn membership_by_parity() {
        let c = Perm::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        let chain = StabChain::build(3, &[c]).unwrap();
        assert!(chain.contains(&Perm::identity(3)).unwrap());
        assert!(!chain.contains(&Perm::from_cycles(3, &[&[1, 2]]).unwrap()).unwrap());
        assert!(chain.contains(&Perm::identity(4)).is_err());
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        let chain = StabChain::build(5, &sym(5)).unwrap();
        let all: HashSet<Perm> = chain.enumerate(1000).unwrap().collect();
        assert_eq!(all.len(), 120);
        assert!(chain.enumerate(100).is_err());
        let t = StabChain::build(2, &[Perm::from_cycles(2, &[&[1, 2]]).unwrap()]).unwrap();
        let elems: Vec<Perm> = t.enumerate(10).unwrap().collect();
        assert_eq!(elems.len(), 2);
    }

    #[test]
    fn stabilizers_and_base_change() {
        let chain = StabChain::build(3, &sym(3)).unwrap();
        assert_eq!(chain.pointwise_stabilizer(&[0]).unwrap().order(), BigUint::from(2u32));
        assert_eq!(chain.pointwise_stabilizer(&[]).unwrap().order(), BigUint::from(6u32));
        let s6 = StabChain::build(6, &sym(6)).unwrap();
        let st = s6.pointwise_stabilizer(&[4, 1]).unwrap();
        assert_eq!(st.order(), BigUint::from(24u32));
        for g in st.enumerate(100).unwrap() {
            assert_eq!(g.apply(4), 4);
            assert_eq!(g.apply(1), 1);
        }
    }

    #[test]
    fn tuple_orbit_counts() {
        let s4 = StabChain::build(4, &sym(4)).unwrap();
        let orbit = s4.tuple_orbit(&[2, 0], 1000).unwrap();
        assert_eq!(orbit.tuples.len(), 12);
        assert_eq!(orbit.stabilizer_order, BigUint::from(2u32));
        let distinct: HashSet<_> = orbit.tuples.iter().collect();
        assert_eq!(distinct.len(), 12);
        assert_eq!(s4.tuple_orbit_size(&[2, 0]).unwrap(), BigUint::from(12u32));
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let chain = StabChain::build(6, &sym(6)).unwrap();
        assert_eq!(chain.sample_seeded(7), chain.sample_seeded(7));
        assert!(chain.contains(&chain.sample_seeded(11)).unwrap());
    }
}
