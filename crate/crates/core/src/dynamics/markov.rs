use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use super::joint::{
    check_vertices, joint_section_distribution, stabilizer_order, window_union, WindowTuple,
};
use super::past;
use crate::error::{Error, Result};
use crate::group::Tower;
use crate::invariants::rational_to_string;
use crate::tree::{Portrait, Vertex};

/// A conditioning cell and window value where the two conditional laws
/// differ.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovWitness {
    /// Sections at the past vertices, root first.
    pub cell: Vec<Portrait>,
    pub value: Portrait,
    /// `μ(T_{vx}^{-1} A | past cell)` and `μ(T_x^{-1} A | α)`.
    pub conditional_past: BigRational,
    pub conditional_step: BigRational,
}

#[derive(Clone, Debug)]
pub struct MarkovReport {
    pub k: usize,
    pub vertex: Vertex,
    pub letter: u32,
    pub passed: bool,
    /// Size of the conditional support given a past cell, and given the
    /// window at `v` alone.
    pub past_support: BigUint,
    pub step_support: BigUint,
    pub witness: Option<MarkovWitness>,
}

impl MarkovReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k,
            "vertex": self.vertex.to_string(),
            "letter": self.letter,
            "passed": self.passed,
            "past_support": self.past_support.to_string(),
            "step_support": self.step_support.to_string(),
            "witness": self.witness.as_ref().map(|w| serde_json::json!({
                "cell": w.cell.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "value": w.value.to_string(),
                "conditional_past": rational_to_string(&w.conditional_past),
                "conditional_step": rational_to_string(&w.conditional_step),
            })),
        })
    }
}

fn check_letter(m: usize, x: u32) -> Result<()> {
    if x == 0 || x as usize > m {
        return Err(Error::InvalidVertex(format!("letter {x} outside 1..={m}")));
    }
    Ok(())
}

/// Tests the Markov property of the depth-`k` cone partition at `(v, x)`.
///
/// Given a past cell, the window at `vx` is uniform on a set contained in
/// the support of the one-step law given the window at `v` (sections of
/// group elements are group elements). The two laws are therefore equal
/// exactly when the two support sizes agree; both are ratios of pointwise
/// stabilizer orders. On failure a witness is extracted by enumeration when
/// the orbits fit under `cap`.
pub fn check_markov(tower: &Tower, k: usize, v: &Vertex, x: u32, cap: u64) -> Result<MarkovReport> {
    let m = tower.arity();
    check_vertices(m, std::slice::from_ref(v))?;
    check_letter(m, x)?;
    if k == 0 {
        return Ok(MarkovReport {
            k,
            vertex: v.clone(),
            letter: x,
            passed: true,
            past_support: BigUint::from(1u32),
            step_support: BigUint::from(1u32),
            witness: None,
        });
    }
    let vx = v.child(x);
    let n = v.level() + 1 + k;
    let q = tower.quotient(n)?;
    let past_set = window_union(m, &past(v), k);
    let mut full_set = past_set.clone();
    full_set.extend(window_union(m, std::slice::from_ref(&vx), k));
    let past_support = support_ratio(q.chain(), m, &past_set, &full_set)?;

    let step = tower.quotient(k + 1)?;
    let top = window_union(m, &[Vertex::root()], k);
    let mut both = top.clone();
    both.extend(window_union(m, &[Vertex::root().child(x)], k));
    let step_support = support_ratio(step.chain(), m, &top, &both)?;

    let passed = past_support == step_support;
    let witness = if passed {
        None
    } else {
        match markov_violation(tower, k, v, x, cap) {
            Ok(w) => w,
            Err(e) if e.is_resource_limit() => None,
            Err(e) => return Err(e),
        }
    };
    Ok(MarkovReport {
        k,
        vertex: v.clone(),
        letter: x,
        passed,
        past_support,
        step_support,
        witness,
    })
}

fn support_ratio(
    chain: &crate::perm::StabChain,
    m: usize,
    small: &BTreeSet<Vertex>,
    large: &BTreeSet<Vertex>,
) -> Result<BigUint> {
    let a = stabilizer_order(chain, &WindowTuple::new(m, small).points)?;
    let b = stabilizer_order(chain, &WindowTuple::new(m, large).points)?;
    Ok(a / b)
}

/// Brute-force comparison of the two conditional laws over every
/// positive-mass past cell; returns the first violation.
pub fn markov_violation(
    tower: &Tower,
    k: usize,
    v: &Vertex,
    x: u32,
    cap: u64,
) -> Result<Option<MarkovWitness>> {
    let m = tower.arity();
    check_vertices(m, std::slice::from_ref(v))?;
    check_letter(m, x)?;
    let mut vertices = past(v);
    let np = vertices.len();
    vertices.push(v.child(x));
    let joint = joint_section_distribution(tower, &vertices, k, cap)?;
    let step = joint_section_distribution(tower, &[Vertex::root(), Vertex::root().child(x)], k, cap)?;

    let cells = joint.project(&(0..np).collect::<Vec<_>>());
    let step_marginal = step.marginal(0);
    let mut by_cell: BTreeMap<&[Portrait], BTreeMap<&Portrait, &BigRational>> = BTreeMap::new();
    for (tuple, q) in &joint.masses {
        by_cell.entry(&tuple[..np]).or_default().insert(&tuple[np], q);
    }
    let mut step_rows: BTreeMap<&Portrait, BTreeMap<&Portrait, &BigRational>> = BTreeMap::new();
    for (tuple, q) in &step.masses {
        step_rows.entry(&tuple[0]).or_default().insert(&tuple[1], q);
    }
    let empty = BTreeMap::new();
    for (cell, row) in &by_cell {
        let cell_mass = &cells[&cell.to_vec()];
        let b = &cell[np - 1];
        let step_row = step_rows.get(b).unwrap_or(&empty);
        let step_mass = step_marginal.get(b);
        let values: BTreeSet<&Portrait> = row.keys().chain(step_row.keys()).copied().collect();
        for a in values {
            let lhs = row.get(a).map_or_else(BigRational::zero, |q| *q / cell_mass);
            let rhs = match (step_row.get(a), step_mass) {
                (Some(q), Some(mass)) => *q / mass,
                _ => BigRational::zero(),
            };
            if lhs != rhs {
                return Ok(Some(MarkovWitness {
                    cell: cell.to_vec(),
                    value: a.clone(),
                    conditional_past: lhs,
                    conditional_step: rhs,
                }));
            }
        }
    }
    Ok(None)
}
