use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::quotient::Tower;
use crate::error::{Error, Result};
use crate::tree::Portrait;

/// Default cap on the number of distinct DP states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// A set of depth-`D` portraits defining a group of finite type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    arity: usize,
    depth: usize,
    patterns: BTreeSet<Portrait>,
}

impl PatternSet {
    pub fn new(arity: usize, depth: usize, patterns: Vec<Portrait>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidSpec("pattern depth must be at least 1".into()));
        }
        if let Some(p) = patterns
            .iter()
            .find(|p| p.arity() != arity || p.depth() != depth)
        {
            return Err(Error::ShapeMismatch(format!(
                "pattern of shape (arity {}, depth {}) in a set of shape (arity {arity}, depth {depth})",
                p.arity(),
                p.depth()
            )));
        }
        Ok(PatternSet {
            arity,
            depth,
            patterns: patterns.into_iter().collect(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, p: &Portrait) -> bool {
        self.patterns.contains(p)
    }

    /// Patterns in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Portrait> {
        self.patterns.iter()
    }

    /// Whether every depth-`D` window of `g` lies in the set.
    pub fn admits(&self, g: &Portrait) -> bool {
        let m = self.arity;
        if g.depth() < self.depth {
            return false;
        }
        (0..=g.depth() - self.depth).all(|level| {
            (0..m.pow(level as u32)).all(|r| {
                self.patterns
                    .contains(&g.section_rank(level, r, self.depth))
            })
        })
    }
}

/// Every depth-`D` window `g|_v^D` over the elements `g` of `G_L` and the
/// vertices `v` of levels `0..=L-D`.
pub fn extract_pattern_set(tower: &Tower, d: usize, sample_level: usize, cap: u64) -> Result<PatternSet> {
    if d == 0 || sample_level < d {
        return Err(Error::Precondition(format!(
            "need 1 <= D <= L, got D = {d}, L = {sample_level}"
        )));
    }
    let m = tower.arity();
    let q = tower.quotient(sample_level)?;
    let mut windows = BTreeSet::new();
    for g in q.portraits(cap)? {
        for level in 0..=sample_level - d {
            for r in 0..m.pow(level as u32) {
                windows.insert(g.section_rank(level, r, d));
            }
        }
    }
    Ok(PatternSet {
        arity: m,
        depth: d,
        patterns: windows,
    })
}

/// Number of depth-`n` portraits all of whose depth-`D` windows lie in
/// `patterns`, by dynamic programming over top windows of depth `D - 1`.
pub fn count_pattern_closed(patterns: &PatternSet, n: usize, state_cap: usize) -> Result<BigUint> {
    let d = patterns.depth;
    if patterns.is_empty() {
        return Err(Error::Precondition("pattern set is empty".into()));
    }
    if n < d {
        return Err(Error::Precondition(format!(
            "count needs n >= D, got n = {n}, D = {d}"
        )));
    }
    let m = patterns.arity;
    // index the depth-(D-1) states that occur as tops or children of patterns
    let mut index: BTreeMap<Portrait, usize> = BTreeMap::new();
    let intern = |p: Portrait, index: &mut BTreeMap<Portrait, usize>| -> Result<usize> {
        let next = index.len();
        let id = *index.entry(p).or_insert(next);
        if index.len() > state_cap {
            return Err(Error::StateSpaceTooLarge {
                states: index.len(),
                cap: state_cap,
            });
        }
        Ok(id)
    };
    let mut moves: Vec<(usize, Vec<usize>)> = Vec::with_capacity(patterns.len());
    for w in &patterns.patterns {
        let top = intern(w.truncate(d - 1)?, &mut index)?;
        let kids = (0..m)
            .map(|i| intern(w.section_rank(1, i, d - 1), &mut index))
            .collect::<Result<Vec<_>>>()?;
        moves.push((top, kids));
    }
    let states = index.len();
    // counts[t] = number of valid trees of the current height with top t
    let mut counts = vec![BigUint::one(); states];
    for _ in d - 1..n {
        let mut next = vec![BigUint::zero(); states];
        for (top, kids) in &moves {
            let mut prod = BigUint::one();
            for &k in kids {
                if counts[k].is_zero() {
                    prod = BigUint::zero();
                    break;
                }
                prod *= &counts[k];
            }
            next[*top] += prod;
        }
        counts = next;
    }
    Ok(counts.into_iter().sum())
}
