use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use super::quotient::{Quotient, Tower};
use crate::error::{Error, Result};
use crate::invariants::{r_sequence, LogQuantity};
use crate::tree::{level_offset, Portrait, Vertex};

/// Outcome of the finite-level regular-branch test.
#[derive(Clone, Debug, Serialize)]
pub struct BranchReport {
    pub depth: usize,
    pub level: usize,
    pub passed: bool,
    pub level_transitive: bool,
    /// Embedded generators tested.
    pub checked: usize,
    /// First embedded portrait outside `St_{G_n}(D-1)`, in text form.
    pub witness: Option<String>,
}

/// Tests, inside `G_n`, that `G_n` is level transitive and that every
/// generator of `St_{G_{n-1}}(D-1)`, placed below any first-level vertex,
/// lies in `St_{G_n}(D-1)`.
pub fn verify_regular_branch(tower: &Tower, d: usize, n: usize) -> Result<BranchReport> {
    if d == 0 || n < d + 1 {
        return Err(Error::Precondition(format!(
            "regular-branch test needs 1 <= D and n >= D + 1, got D = {d}, n = {n}"
        )));
    }
    let m = tower.arity();
    let big = tower.quotient(n)?;
    let small = tower.quotient(n - 1)?;
    let target = big.level_stabilizer(d - 1);
    let kernel = small.level_stabilizer(d - 1);
    let level_transitive = big.is_level_transitive();
    let mut checked = 0;
    let mut witness = None;
    'outer: for k in kernel.strong_generators() {
        let k = small.portrait(k);
        for i in 0..m {
            let e = Portrait::embed_below(&k, i);
            checked += 1;
            if !target.contains(&e.to_vertex_permutation())? {
                witness = Some(e.to_string());
                break 'outer;
            }
        }
    }
    Ok(BranchReport {
        depth: d,
        level: n,
        passed: level_transitive && witness.is_none(),
        level_transitive,
        checked,
        witness,
    })
}

/// Finite-level fractality checks at level `n`.
#[derive(Clone, Debug, Serialize)]
pub struct FractalityReport {
    pub level: usize,
    pub level_transitive: bool,
    /// `|st(1)|_1|` inside `G_{n-1}`, as a decimal string.
    pub section_image_order: String,
    pub expected_order: String,
    pub passed: bool,
}

pub fn fractality_evidence(tower: &Tower, n: usize) -> Result<FractalityReport> {
    if n < 2 {
        return Err(Error::Precondition("fractality evidence needs n >= 2".into()));
    }
    let m = tower.arity();
    let q = tower.quotient(n)?;
    let level_transitive = q.is_level_transitive();
    // vertex "1" is the first base point, so its stabilizer is a suffix
    let st = q.chain().stabilizer_suffix(1);
    let sections: Vec<Portrait> = st
        .strong_generators()
        .map(|g| q.portrait(g).section_rank(1, 0, n - 1))
        .collect();
    let image = Quotient::from_generators(m, n - 1, &sections)?.order();
    let expected = tower.order(n - 1)?;
    Ok(FractalityReport {
        level: n,
        level_transitive,
        passed: level_transitive && image == expected,
        section_image_order: image.to_string(),
        expected_order: expected.to_string(),
    })
}

/// Index of the rigid level stabilizer `Rist(k)` in `G_n`.
///
/// The rigid vertex stabilizers of distinct level-`k` vertices commute and
/// intersect trivially, so `|Rist(k)|` is the product of their orders.
pub fn rigid_stabilizer_index(tower: &Tower, k: usize, n: usize) -> Result<BigUint> {
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!(
            "rigid stabilizer index needs 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    let m = tower.arity();
    let q = tower.quotient(n)?;
    let mut rist = BigUint::one();
    for u in Vertex::all_at_level(m, k) {
        let outside = points_outside(m, n, &u);
        rist *= q.chain().pointwise_stabilizer(&outside)?.order();
    }
    Ok(q.order() / rist)
}

/// Vertex-domain points of depth `n` that are not strictly below `u`.
fn points_outside(m: usize, n: usize, u: &Vertex) -> Vec<u32> {
    let mut out = Vec::new();
    let r = u.rank(m);
    for level in 1..=n {
        let off = level_offset(m, level) - 1;
        let width = m.pow(level as u32);
        let (lo, hi) = if level > u.level() {
            let span = m.pow((level - u.level()) as u32);
            (r * span, (r + 1) * span)
        } else {
            (0, 0)
        };
        out.extend((0..width).filter(|x| *x < lo || *x >= hi).map(|x| (off + x) as u32));
    }
    out
}

/// Depth detected from finite data, together with the evidence used.
#[derive(Clone, Debug)]
pub struct DepthEvidence {
    pub depth: Option<usize>,
    pub n_max: usize,
    /// `r_1, …, r_{n_max-1}`.
    pub r: Vec<LogQuantity>,
    pub branch_checks: Vec<BranchReport>,
}

impl DepthEvidence {
    pub fn status(&self) -> String {
        match self.depth {
            Some(_) => format!("evidence@{}", self.n_max),
            None => format!("inconclusive@{}", self.n_max),
        }
    }
}

/// The least `D <= n_max - 1` such that `r_D = … = r_{n_max-1}` and the
/// regular-branch test passes at `(D, D + 1)`.
pub fn detect_depth(tower: &Tower, n_max: usize) -> Result<DepthEvidence> {
    if n_max < 2 {
        return Err(Error::Precondition("depth detection needs n_max >= 2".into()));
    }
    let r = r_sequence(tower, n_max)?;
    let mut branch_checks = Vec::new();
    let mut depth = None;
    for d in 1..n_max {
        let tail = &r[d - 1..];
        if tail.iter().any(|x| x != &tail[0]) {
            continue;
        }
        let report = verify_regular_branch(tower, d, d + 1)?;
        let passed = report.passed;
        branch_checks.push(report);
        if passed {
            depth = Some(d);
            break;
        }
    }
    Ok(DepthEvidence {
        depth,
        n_max,
        r,
        branch_checks,
    })
}
