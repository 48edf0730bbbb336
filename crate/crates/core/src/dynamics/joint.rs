use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::Tower;
use crate::invariants::{rational_to_string, shannon_entropy, LogQuantity};
use crate::perm::StabChain;
use crate::tree::{level_offset, vertex_point, Portrait, Vertex};

/// The vertices of `v T_d` (all `v w` with `|w| < d`), breadth-first.
pub(crate) fn window_vertices(m: usize, v: &Vertex, d: usize) -> Vec<Vertex> {
    let mut out = Vec::with_capacity(level_offset(m, d));
    for l in 0..d {
        for w in Vertex::all_at_level(m, l) {
            out.push(v.concat(&w));
        }
    }
    out
}

/// Tuple of vertex-domain points whose images under `g` determine the
/// labels of `g` at every vertex of `vertices`: their children.
#[derive(Clone, Debug)]
pub(crate) struct WindowTuple {
    pub points: Vec<u32>,
    slot: BTreeMap<u32, usize>,
    arity: usize,
}

impl WindowTuple {
    pub fn new(m: usize, vertices: &BTreeSet<Vertex>) -> Self {
        let mut points = Vec::new();
        let mut slot = BTreeMap::new();
        for u in vertices {
            for y in 1..=m as u32 {
                let p = vertex_point(m, &u.child(y));
                if let std::collections::btree_map::Entry::Vacant(e) = slot.entry(p) {
                    e.insert(points.len());
                    points.push(p);
                }
            }
        }
        WindowTuple {
            points,
            slot,
            arity: m,
        }
    }

    /// Section at `v` of depth `d`, read off the image tuple.
    pub fn section(&self, images: &[u32], v: &Vertex, d: usize) -> Portrait {
        let m = self.arity;
        let mut flat = Vec::with_capacity(level_offset(m, d) * m);
        for u in window_vertices(m, v, d) {
            for y in 1..=m as u32 {
                let p = vertex_point(m, &u.child(y));
                // the last letter of a vertex point is its residue mod m
                flat.push(images[self.slot[&p]] % m as u32);
            }
        }
        Portrait::from_flat_unchecked(m, d, flat)
    }
}

/// Union of the windows `v_j T_d`.
pub(crate) fn window_union(m: usize, vertices: &[Vertex], d: usize) -> BTreeSet<Vertex> {
    vertices
        .iter()
        .flat_map(|v| window_vertices(m, v, d))
        .collect()
}

/// Quotient level needed to see depth-`d` windows at `vertices`.
pub(crate) fn needed_level(vertices: &[Vertex], d: usize) -> usize {
    vertices.iter().map(Vertex::level).max().unwrap_or(0) + d
}

/// Order of the pointwise stabilizer of `points` in `chain`, using the
/// chain's own prefix when possible.
pub(crate) fn stabilizer_order(chain: &StabChain, points: &[u32]) -> Result<BigUint> {
    if points.is_empty() {
        return Ok(chain.order());
    }
    let set: BTreeSet<u32> = points.iter().copied().collect();
    if chain.base_order()[..set.len()].iter().all(|p| set.contains(p)) {
        return Ok(chain.stabilizer_suffix(set.len()).order());
    }
    Ok(chain.pointwise_stabilizer(points)?.order())
}

/// Exact joint law of the sections `(g|_{v_1}^d, …, g|_{v_k}^d)` for `g`
/// Haar-distributed.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    pub vertices: Vec<Vertex>,
    pub depth: usize,
    pub masses: BTreeMap<Vec<Portrait>, BigRational>,
}

impl JointDistribution {
    pub fn total(&self) -> BigRational {
        self.masses.values().sum()
    }

    pub fn support_size(&self) -> usize {
        self.masses.len()
    }

    pub fn marginal(&self, j: usize) -> BTreeMap<Portrait, BigRational> {
        let mut out: BTreeMap<Portrait, BigRational> = BTreeMap::new();
        for (tuple, q) in &self.masses {
            *out.entry(tuple[j].clone()).or_insert_with(BigRational::zero) += q;
        }
        out
    }

    /// Marginal on the coordinates `coords`.
    pub fn project(&self, coords: &[usize]) -> BTreeMap<Vec<Portrait>, BigRational> {
        let mut out: BTreeMap<Vec<Portrait>, BigRational> = BTreeMap::new();
        for (tuple, q) in &self.masses {
            let key = coords.iter().map(|&j| tuple[j].clone()).collect();
            *out.entry(key).or_insert_with(BigRational::zero) += q;
        }
        out
    }

    pub fn entropy(&self) -> Result<LogQuantity> {
        let masses: Vec<BigRational> = self.masses.values().cloned().collect();
        shannon_entropy(&masses)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .masses
            .iter()
            .map(|(tuple, q)| {
                serde_json::json!({
                    "sections": tuple.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "probability": rational_to_string(q),
                })
            })
            .collect();
        serde_json::json!({
            "vertices": self.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "depth": self.depth,
            "entries": entries,
        })
    }
}

/// The joint law of depth-`d` sections at `vertices`.
///
/// Labels on the union `U` of the windows are determined by the images of
/// the children of `U`, and the Haar measure pushes forward to the uniform
/// measure on the orbit of that tuple; the orbit is enumerated (guarded by
/// `cap`) instead of the whole quotient.
pub fn joint_section_distribution(
    tower: &Tower,
    vertices: &[Vertex],
    d: usize,
    cap: u64,
) -> Result<JointDistribution> {
    let m = tower.arity();
    check_vertices(m, vertices)?;
    let n = needed_level(vertices, d);
    let mut masses: BTreeMap<Vec<Portrait>, BigRational> = BTreeMap::new();
    if n == 0 || d == 0 {
        let tuple = vertices.iter().map(|_| Portrait::identity(m, d)).collect();
        masses.insert(tuple, BigRational::one());
        return Ok(JointDistribution {
            vertices: vertices.to_vec(),
            depth: d,
            masses,
        });
    }
    let q = tower.quotient(n)?;
    let union = window_union(m, vertices, d);
    let wt = WindowTuple::new(m, &union);
    let orbit = q.chain().tuple_orbit(&wt.points, cap)?;
    let each = BigRational::new(BigInt::one(), BigInt::from(orbit.tuples.len()));
    for images in &orbit.tuples {
        let tuple: Vec<Portrait> = vertices.iter().map(|v| wt.section(images, v, d)).collect();
        *masses.entry(tuple).or_insert_with(BigRational::zero) += &each;
    }
    Ok(JointDistribution {
        vertices: vertices.to_vec(),
        depth: d,
        masses,
    })
}

/// `log` of the number of joint values of the windows at `vertices`; the
/// entropy of their joint law when the window union is ancestor closed.
pub(crate) fn log_window_orbit(tower: &Tower, vertices: &[Vertex], d: usize) -> Result<LogQuantity> {
    let m = tower.arity();
    let n = needed_level(vertices, d);
    if n == 0 || d == 0 {
        return Ok(LogQuantity::zero());
    }
    let q = tower.quotient(n)?;
    let wt = WindowTuple::new(m, &window_union(m, vertices, d));
    let stab = stabilizer_order(q.chain(), &wt.points)?;
    Ok(q.log_order() - LogQuantity::log_of_biguint(&stab)?)
}

pub(crate) fn check_vertices(m: usize, vertices: &[Vertex]) -> Result<()> {
    for v in vertices {
        Vertex::new(v.letters().to_vec(), m)?;
    }
    Ok(())
}

/// Exact fiber sizes of `g ↦ g|_v^d` from `G_{|v|+d}` onto `G_d`.
#[derive(Clone, Debug)]
pub struct MeasureReport {
    pub vertex: Vertex,
    pub depth: usize,
    pub passed: bool,
    /// `|G_d|` and the number of distinct sections.
    pub target_order: BigUint,
    pub image_size: usize,
    /// Fiber size → number of sections with that fiber size.
    pub fiber_sizes: BTreeMap<BigUint, usize>,
}

impl MeasureReport {
    pub fn to_json(&self) -> serde_json::Value {
        let fibers: serde_json::Map<String, serde_json::Value> = self
            .fiber_sizes
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
            .collect();
        serde_json::json!({
            "vertex": self.vertex.to_string(),
            "depth": self.depth,
            "passed": self.passed,
            "target_order": self.target_order.to_string(),
            "image_size": self.image_size,
            "fiber_sizes": fibers,
        })
    }
}

/// Checks that every element of `G_d` has the same number of preimages
/// under `g ↦ g|_v^d`.
pub fn check_measure_preserving(tower: &Tower, v: &Vertex, d: usize, cap: u64) -> Result<MeasureReport> {
    let m = tower.arity();
    check_vertices(m, std::slice::from_ref(v))?;
    if d == 0 {
        return Err(Error::Precondition("window depth must be at least 1".into()));
    }
    let n = v.level() + d;
    let q = tower.quotient(n)?;
    let target = tower.quotient(d)?;
    let union: BTreeSet<Vertex> = window_vertices(m, v, d).into_iter().collect();
    let wt = WindowTuple::new(m, &union);
    let orbit = q.chain().tuple_orbit(&wt.points, cap)?;
    let mut counts: BTreeMap<Portrait, BigUint> = BTreeMap::new();
    for images in &orbit.tuples {
        let s = wt.section(images, v, d);
        *counts.entry(s).or_insert_with(BigUint::zero) += &orbit.stabilizer_order;
    }
    for s in counts.keys() {
        if !target.contains(s)? {
            return Err(Error::HypothesisViolation(format!(
                "section {} is not in G_{d}; the spec is not self-similar",
                s.to_string().replace('\n', " | ")
            )));
        }
    }
    let mut fiber_sizes: BTreeMap<BigUint, usize> = BTreeMap::new();
    for c in counts.values() {
        *fiber_sizes.entry(c.clone()).or_insert(0) += 1;
    }
    let target_order = target.order();
    let missing = &target_order - BigUint::from(counts.len());
    if !missing.is_zero() {
        *fiber_sizes.entry(BigUint::zero()).or_insert(0) +=
            usize::try_from(&missing).unwrap_or(usize::MAX);
    }
    Ok(MeasureReport {
        vertex: v.clone(),
        depth: d,
        passed: fiber_sizes.len() == 1,
        target_order,
        image_size: counts.len(),
        fiber_sizes,
    })
}
