use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite word over generator names and their inverses, e.g. `a^2 b^-1`.
/// The empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<(String, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn power(name: &str, exp: i64) -> Self {
        let mut w = Word::default();
        w.push(name, exp);
        w
    }

    /// Appends `name^exp`, merging with the last letter when possible.
    pub fn push(&mut self, name: &str, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.0 == name {
                last.1 += exp;
                if last.1 == 0 {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push((name.to_string(), exp));
    }

    pub fn letters(&self) -> &[(String, i64)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.letters.iter().map(|(n, _)| n.as_str())
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts tokens `name` and `name^k` (k a nonzero integer, possibly
    /// negative) separated by whitespace or `*`. `""`, `"1"` and `"ε"`
    /// denote the identity.
    fn from_str(s: &str) -> Result<Self> {
        let mut word = Word::default();
        for tok in s.split(|c: char| c.is_whitespace() || c == '*') {
            if tok.is_empty() || tok == "1" || tok == "ε" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let exp = e
                        .parse::<i64>()
                        .ok()
                        .filter(|x| x.unsigned_abs() <= 1 << 20)
                        .ok_or_else(|| Error::Parse(format!("bad exponent in `{tok}`")))?;
                    (n, exp)
                }
                None => (tok, 1),
            };
            if !valid_name(name) {
                return Err(Error::Parse(format!("bad generator name in `{tok}`")));
            }
            word.push(name, exp);
        }
        Ok(word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, exp)) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if *exp == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{exp}")?;
            }
        }
        Ok(())
    }
}
