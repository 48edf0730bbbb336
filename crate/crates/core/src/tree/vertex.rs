use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A vertex of the m-adic tree: a word over `{1, .., m}` (1-based letters).
/// The empty word is the root.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    letters: Vec<u32>,
}

impl Vertex {
    pub fn root() -> Self {
        Vertex::default()
    }

    /// Builds a vertex from 1-based letters, checking them against `arity`.
    pub fn new(letters: Vec<u32>, arity: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&x| x == 0 || x as usize > arity) {
            return Err(Error::InvalidVertex(format!(
                "letter {bad} outside 1..={arity}"
            )));
        }
        Ok(Vertex { letters })
    }

    pub(crate) fn from_letters_unchecked(letters: Vec<u32>) -> Self {
        Vertex { letters }
    }

    /// The vertex of `level` with 0-based lexicographic rank `rank`.
    pub fn from_rank(arity: usize, level: usize, mut rank: usize) -> Self {
        let mut letters = vec![0u32; level];
        for slot in letters.iter_mut().rev() {
            *slot = (rank % arity) as u32 + 1;
            rank /= arity;
        }
        Vertex { letters }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn level(&self) -> usize {
        self.letters.len()
    }

    pub fn is_root(&self) -> bool {
        self.letters.is_empty()
    }

    /// 0-based lexicographic rank among the vertices of the same level.
    pub fn rank(&self, arity: usize) -> usize {
        self.letters
            .iter()
            .fold(0usize, |acc, &x| acc * arity + (x as usize - 1))
    }

    pub fn child(&self, letter: u32) -> Vertex {
        let mut letters = self.letters.clone();
        letters.push(letter);
        Vertex { letters }
    }

    pub fn concat(&self, other: &Vertex) -> Vertex {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Vertex { letters }
    }

    pub fn prefix(&self, len: usize) -> Vertex {
        Vertex {
            letters: self.letters[..len].to_vec(),
        }
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.is_root() {
            None
        } else {
            Some(self.prefix(self.level() - 1))
        }
    }

    /// Whether `self` is a prefix of `other` (every vertex descends from
    /// itself).
    pub fn is_prefix_of(&self, other: &Vertex) -> bool {
        other.letters.starts_with(&self.letters)
    }

    /// Every vertex of `level`, in lexicographic order.
    pub fn all_at_level(arity: usize, level: usize) -> impl Iterator<Item = Vertex> {
        let count = arity.pow(level as u32);
        (0..count).map(move |r| Vertex::from_rank(arity, level, r))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("∅");
        }
        for (i, x) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex[{self}]")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses space- or comma-separated 1-based letters. `""`, `"∅"` and
    /// `"root"` denote the root. Arity is not checked here.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" || s == "root" {
            return Ok(Vertex::root());
        }
        let letters = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<u32>() {
                Ok(0) | Err(_) => Err(Error::InvalidVertex(format!("bad letter `{t}`"))),
                Ok(x) => Ok(x),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Vertex { letters })
    }
}
