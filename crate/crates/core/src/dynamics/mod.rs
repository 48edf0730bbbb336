//! The section dynamical system on a self-similar group with its Haar
//! measure: cone partitions, joint laws of sections, entropies, the Markov
//! property and coherent level bijections.

mod iso;
mod joint;
mod markov;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

pub use iso::{build_process_isomorphism, LevelBijections, LevelMap, TranscriptEntry};
pub use joint::{check_measure_preserving, joint_section_distribution, JointDistribution, MeasureReport};
pub use markov::{check_markov, markov_violation, MarkovReport, MarkovWitness};

use crate::error::Result;
use crate::group::Tower;
use crate::invariants::LogQuantity;
use crate::tree::{Portrait, Vertex};

/// All prefixes of `v`, root first, ending with `v`.
pub fn past(v: &Vertex) -> Vec<Vertex> {
    (0..=v.level()).map(|l| v.prefix(l)).collect()
}

/// The partition of `G` into the cosets of `St_G(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConePartition {
    pub level: usize,
    pub cells: BigUint,
}

impl ConePartition {
    pub fn new(tower: &Tower, level: usize) -> Result<Self> {
        Ok(ConePartition {
            level,
            cells: tower.order(level)?,
        })
    }

    pub fn cell_measure(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.cells.clone()))
    }

    /// The cell containing `g` (given to depth at least `level`).
    pub fn cell_of(&self, g: &Portrait) -> Result<Portrait> {
        g.truncate(self.level)
    }

    pub fn entropy(&self) -> Result<LogQuantity> {
        LogQuantity::log_of_biguint(&self.cells)
    }
}

/// The terms of `F(T, α_s^n) = (1 - 2m) H(α) + sum_i H(α ∨ T_i^{-1} α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BigFTerms {
    pub h: LogQuantity,
    pub joins: Vec<LogQuantity>,
    pub value: LogQuantity,
}

fn assemble_f(m: usize, h: LogQuantity, joins: Vec<LogQuantity>) -> BigFTerms {
    let mut value = h.scale_int(1 - 2 * m as i64);
    for j in &joins {
        value += j;
    }
    BigFTerms { h, joins, value }
}

/// `F(T, α_s^n)` from the exact joint laws of `(g|^n, g|_i^n)`.
pub fn big_f_direct(tower: &Tower, n: usize, cap: u64) -> Result<BigFTerms> {
    let m = tower.arity();
    let root = Vertex::root();
    let h = joint_section_distribution(tower, std::slice::from_ref(&root), n, cap)?.entropy()?;
    let joins = (1..=m as u32)
        .map(|i| joint_section_distribution(tower, &[root.clone(), root.child(i)], n, cap)?.entropy())
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_f(m, h, joins))
}

/// `F(T, α_s^n)` with each entropy taken as the log of a tuple-orbit size;
/// no enumeration. The joint laws involved are uniform on those orbits
/// because the window unions are ancestor closed.
pub fn big_f_structural(tower: &Tower, n: usize) -> Result<BigFTerms> {
    let m = tower.arity();
    let root = Vertex::root();
    let h = joint::log_window_orbit(tower, std::slice::from_ref(&root), n)?;
    let joins = (1..=m as u32)
        .map(|i| joint::log_window_orbit(tower, &[root.clone(), root.child(i)], n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_f(m, h, joins))
}

/// A Haar-random element of `G_n`, deterministic in `seed`.
pub fn haar_sample(tower: &Tower, n: usize, seed: u64) -> Result<Portrait> {
    if n == 0 {
        return Ok(Portrait::identity(tower.arity(), 0));
    }
    Ok(tower.quotient(n)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ggs_spec, grigorchuk_spec, symmetric_group, wreath_spec, Generator, GroupSpec};
    use crate::perm::Perm;

    const CAP: u64 = 1_000_000;

    #[test]
    fn past_lists_prefixes() {
        assert_eq!(past(&Vertex::root()), vec![Vertex::root()]);
        let v: Vertex = "2 1".parse().unwrap();
        let p: Vec<String> = past(&v).iter().map(|x| x.to_string()).collect();
        assert_eq!(p, ["∅", "2", "2 1"]);
    }

    #[test]
    fn full_wreath_sections_are_independent() {
        let t = Tower::new(wreath_spec(2, &symmetric_group(2)).unwrap());
        let j = joint_section_distribution(&t, &[Vertex::root(), "1".parse().unwrap()], 1, CAP).unwrap();
        assert_eq!(j.support_size(), 4);
        let quarter = BigRational::new(1.into(), 4.into());
        assert!(j.masses.values().all(|q| *q == quarter));
    }

    #[test]
    fn measure_preservation() {
        let t = Tower::new(wreath_spec(2, &symmetric_group(2)).unwrap());
        let rep = check_measure_preserving(&t, &"1".parse().unwrap(), 1, CAP).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.fiber_sizes.keys().next().unwrap(), &BigUint::from(4u32));
        let g = Tower::new(grigorchuk_spec());
        assert!(check_measure_preserving(&g, &"2".parse().unwrap(), 3, CAP).unwrap().passed);
        let sigma: Perm = "2 3 1".parse().unwrap();
        let rooted = GroupSpec::recursive(
            3,
            "rooted",
            vec![Generator { name: "a".into(), root: sigma, sections: vec![Default::default(); 3] }],
        )
        .unwrap();
        let r = Tower::new(rooted);
        assert!(!check_measure_preserving(&r, &"1".parse().unwrap(), 1, CAP).unwrap().passed);
    }

    #[test]
    fn markov_on_full_wreath() {
        let t = Tower::new(wreath_spec(2, &symmetric_group(2)).unwrap());
        let v: Vertex = "1".parse().unwrap();
        assert!(check_markov(&t, 1, &v, 2, CAP).unwrap().passed);
        assert!(check_markov(&t, 0, &v, 1, CAP).unwrap().passed);
        assert_eq!(markov_violation(&t, 1, &v, 2, CAP).unwrap(), None);
    }

    #[test]
    fn structural_and_enumerated_f_agree() {
        let t = Tower::new(ggs_spec(3, &[1, 0]).unwrap());
        for n in 1..=2 {
            assert_eq!(big_f_direct(&t, n, CAP).unwrap(), big_f_structural(&t, n).unwrap());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let t = Tower::new(ggs_spec(3, &[1, 0]).unwrap());
        assert_eq!(haar_sample(&t, 3, 7).unwrap(), haar_sample(&t, 3, 7).unwrap());
        let trivial = Tower::new(GroupSpec::recursive(2, "trivial", Vec::new()).unwrap());
        assert!(haar_sample(&trivial, 3, 1).unwrap().is_identity());
    }
}
