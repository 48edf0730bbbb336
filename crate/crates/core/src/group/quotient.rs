use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::One;

use super::patterns::PatternSet;
use super::spec::{greedy_generators, GroupSpec, SpecKind};
use crate::error::{Error, Result};
use crate::invariants::LogQuantity;
use crate::perm::{EnumerateIter, Perm, StabChain};
use crate::tree::{level_offset, Portrait, Vertex};

/// Default cap on enumerated group elements.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

/// Number of points of the vertex domain of depth `n` (all non-root
/// vertices of levels `1..=n`).
pub fn vertex_domain_size(arity: usize, n: usize) -> usize {
    level_offset(arity, n + 1) - 1
}

/// The congruence quotient `G_n`, acting on the vertices of levels `1..=n`.
///
/// Base points follow breadth-first vertex order, so the level stabilizer
/// `St(k)` is a suffix of the chain.
#[derive(Clone, Debug)]
pub struct Quotient {
    arity: usize,
    level: usize,
    chain: StabChain,
}

impl Quotient {
    pub fn from_generators(arity: usize, level: usize, generators: &[Portrait]) -> Result<Self> {
        if level == 0 {
            return Err(Error::Precondition("quotient level must be at least 1".into()));
        }
        let perms: Vec<Perm> = generators
            .iter()
            .map(|g| {
                if g.arity() != arity || g.depth() != level {
                    Err(Error::ShapeMismatch(format!(
                        "generator of shape (arity {}, depth {}) for G_{level} over arity {arity}",
                        g.arity(),
                        g.depth()
                    )))
                } else {
                    Ok(g.to_vertex_permutation())
                }
            })
            .collect::<Result<_>>()?;
        let chain = StabChain::build(vertex_domain_size(arity, level), &perms)?;
        Ok(Quotient {
            arity,
            level,
            chain,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Chain on the vertex domain.
    pub fn chain(&self) -> &StabChain {
        &self.chain
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn log_order(&self) -> LogQuantity {
        LogQuantity::from_factorization(&self.chain.order_factorization())
    }

    pub fn contains(&self, g: &Portrait) -> Result<bool> {
        if g.arity() != self.arity || g.depth() != self.level {
            return Err(Error::ShapeMismatch(format!(
                "portrait of depth {} tested against G_{}",
                g.depth(),
                self.level
            )));
        }
        self.chain.contains(&g.to_vertex_permutation())
    }

    /// The portrait of a vertex permutation belonging to this quotient.
    pub fn portrait(&self, perm: &Perm) -> Portrait {
        Portrait::from_vertex_permutation(self.arity, self.level, perm)
            .expect("group elements are tree automorphisms")
    }

    /// Number of base points in levels `1..=k`.
    pub fn points_through(&self, k: usize) -> usize {
        vertex_domain_size(self.arity, k.min(self.level))
    }

    /// `St(k)` inside this quotient, as a chain suffix.
    pub fn level_stabilizer(&self, k: usize) -> StabChain {
        self.chain.stabilizer_suffix(self.points_through(k))
    }

    /// The same group acting on the `m^n` leaves.
    pub fn leaf_chain(&self) -> Result<StabChain> {
        let gens: Vec<Perm> = self
            .chain
            .generators()
            .iter()
            .map(|p| self.portrait(p).to_leaf_permutation())
            .collect::<Result<_>>()?;
        StabChain::build(self.arity.pow(self.level as u32), &gens)
    }

    pub fn sample(&self, seed: u64) -> Portrait {
        self.portrait(&self.chain.sample_seeded(seed))
    }

    /// Every element exactly once, as portraits.
    pub fn portraits(&self, cap: u64) -> Result<PortraitIter<'_>> {
        Ok(PortraitIter {
            quotient: self,
            inner: self.chain.enumerate(cap)?,
        })
    }

    pub fn is_level_transitive(&self) -> bool {
        let leaf = self.points_through(self.level - 1) as u32;
        self.chain.orbit(leaf).len() == self.arity.pow(self.level as u32)
    }
}

pub struct PortraitIter<'a> {
    quotient: &'a Quotient,
    inner: EnumerateIter<'a>,
}

impl Iterator for PortraitIter<'_> {
    type Item = Portrait;

    fn next(&mut self) -> Option<Portrait> {
        self.inner.next_ref().map(|p| self.quotient.portrait(p))
    }
}

/// Generators of `G_n` as depth-`n` portraits.
pub fn quotient_generators(spec: &GroupSpec, n: usize) -> Result<Vec<Portrait>> {
    match spec.kind() {
        SpecKind::Recursive(_) => spec.generator_portraits(n),
        SpecKind::Patterns(p) if p.depth() == 1 => {
            let m = spec.arity();
            let elements: Vec<Perm> = p.iter().map(|q| q.labels()[0].clone()).collect();
            let local = greedy_generators(m, &elements);
            let transitive = StabChain::build(m, &local)?.orbit(0).len() == m;
            let mut gens = Vec::new();
            let id = Portrait::identity(m, n);
            for level in 0..n {
                let vertices: Vec<Vertex> = if transitive {
                    vec![Vertex::from_rank(m, level, 0)]
                } else {
                    Vertex::all_at_level(m, level).collect()
                };
                for v in &vertices {
                    for h in &local {
                        gens.push(id.with_label(v, h)?);
                    }
                }
            }
            Ok(gens)
        }
        SpecKind::Patterns(p) => pattern_generators(p, n),
    }
}

/// Generators of the depth-`n` portraits whose depth-`D` windows all lie in
/// `p`. Below depth `D` these are the truncations of `p`.
fn pattern_generators(p: &PatternSet, n: usize) -> Result<Vec<Portrait>> {
    let m = p.arity();
    let d = p.depth();
    let degree = vertex_domain_size(m, d);
    let elements: Vec<Perm> = p.iter().map(|h| h.to_vertex_permutation()).collect();
    let local = greedy_generators(degree, &elements);
    if StabChain::build(degree, &local)?.order() != BigUint::from(p.len()) {
        return Err(Error::Precondition("pattern set is not a group".into()));
    }
    let mut gens = local
        .iter()
        .map(|g| Portrait::from_vertex_permutation(m, d, g))
        .collect::<Result<Vec<_>>>()?;
    if n <= d {
        return gens.iter().map(|g| g.truncate(n)).collect();
    }
    let mut extend: BTreeMap<Portrait, &Portrait> = BTreeMap::new();
    for h in p.iter() {
        extend.entry(h.truncate(d - 1)?).or_insert(h);
    }
    for h in p.iter() {
        for i in 0..m {
            if !extend.contains_key(&h.section_rank(1, i, d - 1)) {
                return Err(Error::Precondition(
                    "pattern set is not closed under first-level sections".into(),
                ));
            }
        }
    }
    let split = level_offset(m, d - 1) * m;
    let kernel: Vec<Perm> = p
        .iter()
        .filter(|h| h.flat_labels()[..split] == Portrait::identity(m, d - 1).flat_labels()[..])
        .map(|h| h.to_vertex_permutation())
        .collect();
    let kernel: Vec<Vec<u32>> = greedy_generators(degree, &kernel)
        .iter()
        .map(|g| Ok(Portrait::from_vertex_permutation(m, d, g)?.flat_labels()[split..].to_vec()))
        .collect::<Result<_>>()?;
    let block = m.pow(d as u32 - 1) * m;
    for k in d + 1..=n {
        let roots = m.pow((k - d) as u32);
        let mut next = Vec::with_capacity(gens.len() + roots * kernel.len());
        for g in &gens {
            let mut labels = g.flat_labels().to_vec();
            for r in 0..roots {
                let h = extend[&g.section_rank(k - d, r, d - 1)];
                labels.extend_from_slice(&h.flat_labels()[split..]);
            }
            next.push(Portrait::from_flat_unchecked(m, k, labels));
        }
        let base = Portrait::identity(m, k).flat_labels().to_vec();
        let bottom = level_offset(m, k - 1) * m;
        for r in 0..roots {
            for bits in &kernel {
                let mut labels = base.clone();
                labels[bottom + r * block..bottom + (r + 1) * block].copy_from_slice(bits);
                next.push(Portrait::from_flat_unchecked(m, k, labels));
            }
        }
        gens = next;
    }
    Ok(gens)
}

/// The congruence quotient `G_n` of `spec`.
pub fn level_quotient(spec: &GroupSpec, n: usize) -> Result<Quotient> {
    Quotient::from_generators(spec.arity(), n, &quotient_generators(spec, n)?)
}

/// A spec together with its lazily built quotients.
#[derive(Debug)]
pub struct Tower {
    spec: GroupSpec,
    quotients: Mutex<Vec<Option<Arc<Quotient>>>>,
}

impl Tower {
    pub fn new(spec: GroupSpec) -> Self {
        Tower {
            spec,
            quotients: Mutex::new(Vec::new()),
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.spec.arity()
    }

    pub fn quotient(&self, n: usize) -> Result<Arc<Quotient>> {
        {
            let cache = self.quotients.lock().expect("quotient cache poisoned");
            if let Some(Some(q)) = cache.get(n) {
                return Ok(q.clone());
            }
        }
        let q = Arc::new(level_quotient(&self.spec, n)?);
        let mut cache = self.quotients.lock().expect("quotient cache poisoned");
        if cache.len() <= n {
            cache.resize(n + 1, None);
        }
        cache[n] = Some(q.clone());
        Ok(q)
    }

    /// `|G_n|`, with `|G_0| = 1`.
    pub fn order(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Ok(BigUint::one());
        }
        Ok(self.quotient(n)?.order())
    }

    /// `log|G_n|`, with `log|G_0| = 0`.
    pub fn log_order(&self, n: usize) -> Result<LogQuantity> {
        if n == 0 {
            return Ok(LogQuantity::zero());
        }
        Ok(self.quotient(n)?.log_order())
    }
}
