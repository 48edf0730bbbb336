//! Finite permutations and stabilizer chains.
//!
//! Points are 0-based internally; permutations print in 1-based one-line
//! notation. Composition is left to right: `x^(gh) = (x^g)^h`.

mod chain;

pub use chain::{EnumerateIter, StabChain, TupleOrbit};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A permutation of `{0, .., n-1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Box<[u32]>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree as u32).collect())
    }

    /// Builds a permutation from 0-based images, rejecting non-bijections.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "image list {:?} is not a bijection",
                    images.iter().map(|v| v + 1).collect::<Vec<_>>()
                )));
            }
            seen[x] = true;
        }
        Ok(Perm(images.into_boxed_slice()))
    }

    /// Builds a permutation from 1-based one-line notation.
    pub fn from_one_line(images: &[u32]) -> Result<Self> {
        if images.iter().any(|&x| x == 0) {
            return Err(Error::InvalidPermutation(
                "one-line notation is 1-based; found 0".into(),
            ));
        }
        Self::from_images(images.iter().map(|x| x - 1).collect())
    }

    /// Builds a permutation of `degree` points from 1-based cycles.
    pub fn from_cycles(degree: usize, cycles: &[&[u32]]) -> Result<Self> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                let y = cycle[(i + 1) % cycle.len()];
                if x == 0 || y == 0 || x as usize > degree || y as usize > degree {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle point out of range 1..={degree}"
                    )));
                }
                if touched[x as usize - 1] {
                    return Err(Error::InvalidPermutation("cycles are not disjoint".into()));
                }
                touched[x as usize - 1] = true;
                images[x as usize - 1] = y - 1;
            }
        }
        Self::from_images(images)
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_ok());
        Perm(images.into_boxed_slice())
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    #[inline]
    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// Left-to-right product: the result maps `x` to `other(self(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    /// In-place `self <- self * other`.
    pub(crate) fn compose_assign(&mut self, other: &Perm) {
        for x in self.0.iter_mut() {
            *x = other.0[*x as usize];
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.degree()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv.into_boxed_slice())
    }

    pub fn pow(&self, exp: i64) -> Perm {
        let base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut result = Perm::identity(self.degree());
        for _ in 0..exp.unsigned_abs() {
            result.compose_assign(&base);
        }
        result
    }

    /// Order of the permutation as an element (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.degree()];
        let mut acc = 1u64;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x] as usize;
                len += 1;
            }
            acc = num_integer::lcm(acc, len);
        }
        acc
    }

    pub fn one_line(&self) -> Vec<u32> {
        self.0.iter().map(|x| x + 1).collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", x + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm[{self}]")
    }
}

impl FromStr for Perm {
    type Err = Error;

    /// Parses whitespace-separated 1-based one-line notation, e.g. `"2 3 1"`.
    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>()
                    .map_err(|_| Error::InvalidPermutation(format!("bad point `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if images.is_empty() {
            return Err(Error::InvalidPermutation("empty permutation".into()));
        }
        Self::from_one_line(&images)
    }
}
