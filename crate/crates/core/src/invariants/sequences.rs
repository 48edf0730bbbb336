use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::LogQuantity;
use crate::error::{Error, Result};
use crate::group::{detect_depth, DepthEvidence, Tower};

/// `r_n = m log|G_n| - log|G_{n+1}| + log|G_1|` for `n = 1..n_max-1`.
pub fn r_sequence(tower: &Tower, n_max: usize) -> Result<Vec<LogQuantity>> {
    let m = tower.arity() as i64;
    let logs = (0..=n_max)
        .map(|n| tower.log_order(n))
        .collect::<Result<Vec<_>>>()?;
    Ok((1..n_max)
        .map(|n| logs[n].scale_int(m) - logs[n + 1].clone() + logs[1].clone())
        .collect())
}

/// `s_n = r_{n+1} - r_n` for `n = 1..n_max-2`.
pub fn s_sequence(tower: &Tower, n_max: usize) -> Result<Vec<LogQuantity>> {
    let r = r_sequence(tower, n_max)?;
    Ok(r.windows(2).map(|w| &w[1] - &w[0]).collect())
}

/// `H = -sum q log q` over the given probabilities.
pub fn shannon_entropy(measures: &[BigRational]) -> Result<LogQuantity> {
    if measures.iter().any(|q| q.is_negative()) {
        return Err(Error::MeasuresNotNormalized("a negative measure".into()));
    }
    let total: BigRational = measures.iter().sum();
    if !total.is_one() {
        return Err(Error::MeasuresNotNormalized(super::rational_to_string(&total)));
    }
    let mut h = LogQuantity::zero();
    for q in measures.iter().filter(|q| !q.is_zero()) {
        h -= &LogQuantity::log_of_rational(q)?.scale(q);
    }
    Ok(h)
}

/// `log|G_1| - r_{n+1}` for `n >= D`.
pub fn big_f_formula(tower: &Tower, n: usize, d: usize) -> Result<LogQuantity> {
    if n < d {
        return Err(Error::Precondition(format!(
            "the F formula for cone partitions holds for n >= D only (n = {n}, D = {d})"
        )));
    }
    let r = r_sequence(tower, n + 2)?;
    Ok(tower.log_order(1)? - r[n].clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FStatus {
    /// Depth detected from quotients up to the recorded level.
    Evidence,
    /// No depth detected within the computed range.
    Inconclusive,
}

/// The f-invariant `log|G_1| - r_D` together with its supporting data.
#[derive(Clone, Debug)]
pub struct FInvariant {
    pub status: FStatus,
    pub value: Option<LogQuantity>,
    pub depth: DepthEvidence,
    /// `F(T, α_s^n) = log|G_1| - r_{n+1}` for the computed `n >= D`.
    pub f_by_level: Vec<(usize, LogQuantity)>,
    /// Whether every entry of `f_by_level` equals `value`.
    pub constant: bool,
}

impl FInvariant {
    pub fn status_label(&self) -> String {
        self.depth.status()
    }
}

pub fn f_invariant(tower: &Tower, n_max: usize) -> Result<FInvariant> {
    let depth = detect_depth(tower, n_max)?;
    let Some(d) = depth.depth else {
        return Ok(FInvariant {
            status: FStatus::Inconclusive,
            value: None,
            depth,
            f_by_level: Vec::new(),
            constant: false,
        });
    };
    let log1 = tower.log_order(1)?;
    let value = &log1 - &depth.r[d - 1];
    // r has entries r_1..r_{n_max-1}; F at n uses r_{n+1}
    let f_by_level: Vec<(usize, LogQuantity)> = (d..n_max.saturating_sub(1))
        .map(|n| (n, &log1 - &depth.r[n]))
        .collect();
    let constant = f_by_level.iter().all(|(_, f)| *f == value);
    Ok(FInvariant {
        status: FStatus::Evidence,
        value: Some(value),
        depth,
        f_by_level,
        constant,
    })
}

/// One level of the branch order identity.
#[derive(Clone, Debug, Serialize)]
pub struct OrderConditionLevel {
    pub n: usize,
    pub holds: bool,
    /// `|G_{n+1}|` and `|G_n| (|G_n| / |G_{n-1}|)^m` as decimal strings.
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderConditionReport {
    pub depth: usize,
    pub n_max: usize,
    pub holds: bool,
    pub levels: Vec<OrderConditionLevel>,
}

/// Checks `|G_{n+1}| = |G_n| (|G_n| / |G_{n-1}|)^m` for `D <= n < n_max`.
pub fn verify_branch_order_condition(tower: &Tower, d: usize, n_max: usize) -> Result<OrderConditionReport> {
    if d == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let m = tower.arity() as u32;
    let mut levels = Vec::new();
    for n in d..n_max {
        let prev = tower.order(n - 1)?;
        let cur = tower.order(n)?;
        let next = tower.order(n + 1)?;
        // compare |G_{n+1}| |G_{n-1}|^m with |G_n|^{m+1} to stay integral
        let holds = &next * prev.pow(m) == cur.pow(m + 1);
        let rhs = if (&cur % &prev).is_zero() {
            (&cur * (&cur / &prev).pow(m)).to_string()
        } else {
            format!("{cur}^{} / {prev}^{m}", m + 1)
        };
        levels.push(OrderConditionLevel {
            n,
            holds,
            lhs: next.to_string(),
            rhs,
        });
    }
    Ok(OrderConditionReport {
        depth: d,
        n_max,
        holds: levels.iter().all(|l| l.holds),
        levels,
    })
}

/// `log|G_{D+k}| - (m^k log|G_D| + (m^k - 1)/(m - 1) f)` for every
/// `k >= 0` with `D + k <= n_max`; all entries vanish when the recursive
/// order law holds.
pub fn order_law_defects(tower: &Tower, d: usize, f: &LogQuantity, n_max: usize) -> Result<Vec<(usize, LogQuantity)>> {
    let m = BigInt::from(tower.arity());
    let log_d = tower.log_order(d)?;
    let mut out = Vec::new();
    for k in 0..=n_max.saturating_sub(d) {
        let mk = m.pow(k as u32);
        let coeff = BigRational::new(&mk - BigInt::one(), &m - BigInt::one());
        let predicted = log_d.scale_big(&mk) + f.scale(&coeff);
        out.push((k, tower.log_order(d + k)? - predicted));
    }
    Ok(out)
}

/// `log|Aut T_n| = (m^n - 1)/(m - 1) log(m!)`.
pub fn log_full_automorphisms(m: usize, n: usize) -> LogQuantity {
    let e = (BigUint::from(m).pow(n as u32) - 1u32) / BigUint::from(m - 1);
    let fact: u64 = (1..=m as u64).product();
    LogQuantity::log_of_integer(fact).scale_big(&BigInt::from(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic_group, ggs_spec, symmetric_group, wreath_spec};
    use crate::invariants::DisplayBase;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn entropy_basics() {
        assert!(shannon_entropy(&[q(1, 1)]).unwrap().is_zero());
        assert_eq!(
            shannon_entropy(&vec![q(1, 6); 6]).unwrap(),
            LogQuantity::log_of_integer(6)
        );
        assert_eq!(
            shannon_entropy(&[q(1, 2), q(1, 2), q(0, 1)]).unwrap(),
            LogQuantity::log_of_integer(2)
        );
        assert!(matches!(
            shannon_entropy(&[q(1, 2)]),
            Err(Error::MeasuresNotNormalized(_))
        ));
    }

    #[test]
    fn r_sequences() {
        let w = Tower::new(wreath_spec(3, &cyclic_group(3)).unwrap());
        assert!(r_sequence(&w, 4).unwrap().iter().all(|r| r.is_zero()));
        assert!(s_sequence(&w, 4).unwrap().iter().all(|s| s.is_zero()));
        let base3 = DisplayBase::Base(3);
        let fg = Tower::new(ggs_spec(3, &[1, 0]).unwrap());
        assert!(r_sequence(&fg, 2).unwrap()[0].is_zero());
        let gs = Tower::new(ggs_spec(3, &[1, 2]).unwrap());
        assert_eq!(r_sequence(&gs, 2).unwrap()[0].in_base(base3), Some(q(1, 1)));
    }

    #[test]
    fn branch_order_condition() {
        let w = Tower::new(wreath_spec(2, &symmetric_group(2)).unwrap());
        assert!(verify_branch_order_condition(&w, 1, 4).unwrap().holds);
    }

    #[test]
    fn full_automorphism_orders() {
        assert_eq!(log_full_automorphisms(2, 2), LogQuantity::log_of_integer(8));
    }
}
