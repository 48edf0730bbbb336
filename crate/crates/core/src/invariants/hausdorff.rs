use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::{f_invariant, log_full_automorphisms, rational_to_string, LogQuantity};
use crate::error::{Error, Result};
use crate::group::Tower;

/// The ambient group used to normalize dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    /// `Aut T`, with `|Aut T_n| = (m!)^{(m^n-1)/(m-1)}`.
    Full,
    /// `W_m`, all labels powers of `(1 2 … m)`.
    Wq,
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ambient::Full => "full",
            Ambient::Wq => "wq",
        })
    }
}

impl FromStr for Ambient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Ambient::Full),
            "wq" => Ok(Ambient::Wq),
            other => Err(Error::Parse(format!("unknown ambient `{other}` (full|wq)"))),
        }
    }
}

/// A quotient of two logarithms; exact when they are rationally dependent.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionValue {
    pub numerator: LogQuantity,
    pub denominator: LogQuantity,
    pub exact: Option<BigRational>,
    pub approx: f64,
}

impl DimensionValue {
    pub fn new(numerator: LogQuantity, denominator: LogQuantity) -> Self {
        let exact = numerator.ratio(&denominator);
        let approx = match &exact {
            Some(q) => q.to_f64().unwrap_or(f64::NAN),
            None => numerator.approx() / denominator.approx(),
        };
        DimensionValue {
            numerator,
            denominator,
            exact,
            approx,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "exact": self.exact.as_ref().map(rational_to_string),
            "approx": self.approx,
            "numerator": self.numerator.to_string(),
            "denominator": self.denominator.to_string(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct HausdorffReport {
    pub ambient: Ambient,
    /// `(n, log|G_n| / log|A_n|)` for `n = 1..=n_max`.
    pub sequence: Vec<(usize, DimensionValue)>,
    /// Closed-form limit, when a depth was detected.
    pub limit: Option<DimensionValue>,
    pub depth: Option<usize>,
}

impl HausdorffReport {
    /// `|dim_n - limit|` at the last computed level.
    pub fn tail_gap(&self) -> Option<f64> {
        let limit = self.limit.as_ref()?;
        let (_, last) = self.sequence.last()?;
        match (&last.exact, &limit.exact) {
            (Some(a), Some(b)) => (a - b).abs().to_f64(),
            _ => Some((last.approx - limit.approx).abs()),
        }
    }
}

fn log_ambient(m: usize, n: usize, ambient: Ambient) -> LogQuantity {
    match ambient {
        Ambient::Full => log_full_automorphisms(m, n),
        Ambient::Wq => {
            let e = (BigUint::from(m).pow(n as u32) - 1u32) / BigUint::from(m - 1);
            LogQuantity::log_of_integer(m as u64).scale_big(&BigInt::from(e))
        }
    }
}

/// The finite-level dimensions `log|G_n| / log|A_n|` and, when a depth
/// `D` is detected, the limit `((m-1) log|G_D| + f) / (m^D log|A_1|)`.
pub fn hausdorff_dimension(tower: &Tower, n_max: usize, ambient: Ambient) -> Result<HausdorffReport> {
    let m = tower.arity();
    if ambient == Ambient::Wq && !tower.spec().lies_in_cyclic_wreath() {
        return Err(Error::Precondition(format!(
            "{} has labels outside the cyclic group generated by (1 2 … {m})",
            tower.spec().label()
        )));
    }
    let sequence = (1..=n_max)
        .map(|n| {
            Ok((
                n,
                DimensionValue::new(tower.log_order(n)?, log_ambient(m, n, ambient)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (limit, depth) = if n_max >= 2 {
        let f = f_invariant(tower, n_max)?;
        match (f.depth.depth, f.value) {
            (Some(d), Some(value)) => {
                let num = tower.log_order(d)?.scale_int(m as i64 - 1) + value;
                let den = log_ambient(m, 1, ambient).scale_big(&BigInt::from(m).pow(d as u32));
                (Some(DimensionValue::new(num, den)), Some(d))
            }
            _ => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(HausdorffReport {
        ambient,
        sequence,
        limit,
        depth,
    })
}
