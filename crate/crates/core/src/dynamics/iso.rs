use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::group::{Quotient, Tower};
use crate::tree::Portrait;

/// The bijection `f_n : G_n → H_n` at one level.
#[derive(Clone, Debug)]
pub enum LevelMap {
    /// Elements of both quotients in canonical order; `image[i]` is the
    /// index in `h` of the image of `g[i]`.
    Explicit {
        g: Vec<Portrait>,
        h: Vec<Portrait>,
        image: Vec<u32>,
    },
    /// `G_n = H_n` as sets of portraits and `f_n` is the identity; checked
    /// by mutual generator membership instead of enumeration.
    Identity { order: BigUint },
}

impl LevelMap {
    pub fn apply(&self, g: &Portrait) -> Option<Portrait> {
        match self {
            LevelMap::Explicit { g: gs, h, image } => gs
                .binary_search(g)
                .ok()
                .map(|i| h[image[i] as usize].clone()),
            LevelMap::Identity { .. } => Some(g.clone()),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            LevelMap::Explicit { g, h, image } => {
                g == h && image.iter().enumerate().all(|(i, &j)| i as u32 == j)
            }
            LevelMap::Identity { .. } => true,
        }
    }
}

/// One verification step of the construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub level: usize,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

/// Coherent bijections `f_n : G_n → H_n` for `D <= n <= N`.
#[derive(Clone, Debug)]
pub struct LevelBijections {
    pub depth: usize,
    pub n_max: usize,
    pub levels: Vec<(usize, LevelMap)>,
    pub transcript: Vec<TranscriptEntry>,
}

impl LevelBijections {
    pub fn level(&self, n: usize) -> Option<&LevelMap> {
        self.levels.iter().find(|(l, _)| *l == n).map(|(_, m)| m)
    }

    pub fn verified(&self) -> bool {
        self.transcript.iter().all(|e| e.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .map(|(n, map)| match map {
                LevelMap::Explicit { image, .. } => serde_json::json!({
                    "level": n,
                    "kind": "explicit",
                    "size": image.len(),
                    "pairs": image.iter().enumerate().map(|(i, &j)| [i as u64, j as u64]).collect::<Vec<_>>(),
                }),
                LevelMap::Identity { order } => serde_json::json!({
                    "level": n,
                    "kind": "identity",
                    "size": order.to_string(),
                }),
            })
            .collect();
        let transcript: Vec<serde_json::Value> = self
            .transcript
            .iter()
            .map(|e| {
                serde_json::json!({
                    "level": e.level,
                    "check": e.check,
                    "passed": e.passed,
                    "detail": e.detail,
                })
            })
            .collect();
        serde_json::json!({
            "depth": self.depth,
            "n_max": self.n_max,
            "verified": self.verified(),
            "levels": levels,
            "transcript": transcript,
        })
    }
}

fn sorted_elements(q: &Quotient, cap: u64) -> Result<Vec<Portrait>> {
    let mut v: Vec<Portrait> = q.portraits(cap)?.collect();
    v.sort_unstable();
    Ok(v)
}

/// Whether two quotients of equal order are the same group.
fn same_group(a: &Quotient, b: &Quotient) -> Result<bool> {
    if a.order() != b.order() {
        return Ok(false);
    }
    for g in a.chain().generators() {
        if !b.chain().contains(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

type Key = (Portrait, Vec<Portrait>);

fn constraint_key(g: &Portrait, prev: &LevelMap, m: usize) -> Option<Key> {
    let n = g.depth();
    let top = prev.apply(&g.truncate(n - 1).ok()?)?;
    let sections = (0..m)
        .map(|i| prev.apply(&g.section_rank(1, i, n - 1)))
        .collect::<Option<Vec<_>>>()?;
    Some((top, sections))
}

fn own_key(h: &Portrait, m: usize) -> Key {
    let n = h.depth();
    let top = h.truncate(n - 1).expect("depth at least 1");
    let sections = (0..m).map(|i| h.section_rank(1, i, n - 1)).collect();
    (top, sections)
}

fn portrait_line(p: &Portrait) -> String {
    p.to_string().replace('\n', " | ")
}

/// Extends `prev` to level `n` by matching constraint classes.
fn extend(g_elems: Vec<Portrait>, h_elems: Vec<Portrait>, prev: &LevelMap, m: usize, n: usize) -> Result<LevelMap> {
    let mut h_classes: BTreeMap<Key, Vec<u32>> = BTreeMap::new();
    for (j, h) in h_elems.iter().enumerate() {
        h_classes.entry(own_key(h, m)).or_default().push(j as u32);
    }
    let mut g_classes: BTreeMap<Key, Vec<u32>> = BTreeMap::new();
    for (i, g) in g_elems.iter().enumerate() {
        let key = constraint_key(g, prev, m).ok_or_else(|| {
            Error::ExtensionFailure(format!(
                "level {n}: a truncation or section of {} is outside the domain of f_{}",
                portrait_line(g),
                n - 1
            ))
        })?;
        g_classes.entry(key).or_default().push(i as u32);
    }
    let mut image = vec![u32::MAX; g_elems.len()];
    for (key, gs) in &g_classes {
        let hs = h_classes.get(key).map_or(&[][..], Vec::as_slice);
        if hs.len() != gs.len() {
            return Err(Error::ExtensionFailure(format!(
                "level {n}: constraint class with truncation {} has {} elements in G_{n} and {} in H_{n}",
                portrait_line(&key.0),
                gs.len(),
                hs.len()
            )));
        }
        for (&i, &j) in gs.iter().zip(hs) {
            image[i as usize] = j;
        }
    }
    if let Some((key, hs)) = h_classes.iter().find(|(k, _)| !g_classes.contains_key(*k)) {
        return Err(Error::ExtensionFailure(format!(
            "level {n}: constraint class with truncation {} has 0 elements in G_{n} and {} in H_{n}",
            portrait_line(&key.0),
            hs.len()
        )));
    }
    Ok(LevelMap::Explicit {
        g: g_elems,
        h: h_elems,
        image,
    })
}

/// Builds coherent bijections `G_n → H_n` for `D <= n <= N`: `f_D` matches
/// canonical enumerations, and each `f_n` sends `g` into the class of
/// elements `h` with `h|^{n-1} = f_{n-1}(g|^{n-1})` and
/// `h|_i^{n-1} = f_{n-1}(g|_i^{n-1})`.
///
/// Levels where the two quotients coincide and `f_{n-1}` is the identity
/// are certified by generator membership; all other levels are enumerated
/// under `cap`.
pub fn build_process_isomorphism(
    g: &Tower,
    h: &Tower,
    d: usize,
    n_max: usize,
    cap: u64,
) -> Result<LevelBijections> {
    let m = g.arity();
    if h.arity() != m {
        return Err(Error::HypothesisViolation(format!(
            "arities differ ({m} and {})",
            h.arity()
        )));
    }
    if d == 0 || n_max < d {
        return Err(Error::Precondition(format!(
            "need 1 <= D <= N, got D = {d}, N = {n_max}"
        )));
    }
    let mut transcript = Vec::new();
    for n in d..=n_max {
        let (a, b) = (g.order(n)?, h.order(n)?);
        if a != b {
            return Err(Error::HypothesisViolation(format!(
                "log|G_{n}| != log|H_{n}| ({} vs {}): the quotient orders must agree at every level >= D",
                g.log_order(n)?,
                h.log_order(n)?
            )));
        }
        transcript.push(TranscriptEntry {
            level: n,
            check: "orders".into(),
            passed: true,
            detail: format!("|G_{n}| = |H_{n}| = {a}"),
        });
    }
    let mut levels: Vec<(usize, LevelMap)> = Vec::new();
    for n in d..=n_max {
        let (gq, hq) = (g.quotient(n)?, h.quotient(n)?);
        let order = gq.order();
        let small = order <= BigUint::from(cap);
        let prev_identity = levels.last().is_none_or(|(_, p)| p.is_identity());
        let map = if !small && prev_identity && same_group(&gq, &hq)? && same_group(&hq, &gq)? {
            transcript.push(TranscriptEntry {
                level: n,
                check: "identity certificate".into(),
                passed: true,
                detail: format!(
                    "generators of G_{n} lie in H_{n} and conversely; f_{n} is the identity"
                ),
            });
            LevelMap::Identity { order }
        } else if n == d {
            let gs = sorted_elements(&gq, cap)?;
            let hs = sorted_elements(&hq, cap)?;
            let image = (0..gs.len() as u32).collect();
            LevelMap::Explicit { g: gs, h: hs, image }
        } else {
            let gs = sorted_elements(&gq, cap)?;
            let hs = sorted_elements(&hq, cap)?;
            extend(gs, hs, &levels.last().expect("previous level").1, m, n)?
        };
        levels.push((n, map));
    }
    let mut out = LevelBijections {
        depth: d,
        n_max,
        levels,
        transcript,
    };
    verify(&mut out, m);
    if let Some(bad) = out.transcript.iter().find(|e| !e.passed) {
        return Err(Error::ExtensionFailure(format!(
            "level {}: {} check failed: {}",
            bad.level, bad.check, bad.detail
        )));
    }
    Ok(out)
}

/// Re-checks bijectivity, truncation coherence and section compatibility
/// on every explicit level, appending the outcomes to the transcript.
fn verify(b: &mut LevelBijections, m: usize) {
    let mut entries = Vec::new();
    for (idx, (n, map)) in b.levels.iter().enumerate() {
        let LevelMap::Explicit { g, h, image } = map else {
            continue;
        };
        let mut seen = vec![false; h.len()];
        let bijective = g.len() == h.len()
            && image.iter().all(|&j| {
                (j as usize) < seen.len() && !std::mem::replace(&mut seen[j as usize], true)
            });
        entries.push(TranscriptEntry {
            level: *n,
            check: "bijectivity".into(),
            passed: bijective,
            detail: format!("{} elements", g.len()),
        });
        if *n == b.depth {
            entries.push(TranscriptEntry {
                level: *n,
                check: "partition correspondence".into(),
                passed: bijective,
                detail: format!("cone cells of measure 1/{} matched one to one", g.len()),
            });
            continue;
        }
        let prev = &b.levels[idx - 1].1;
        let mut coherent = true;
        let mut compatible = true;
        for (i, x) in g.iter().enumerate() {
            if !bijective {
                break;
            }
            let y = &h[image[i] as usize];
            let trunc = x.truncate(n - 1).expect("depth >= 1");
            if prev.apply(&trunc).as_ref() != Some(&y.truncate(n - 1).expect("depth >= 1")) {
                coherent = false;
            }
            for c in 0..m {
                if prev.apply(&x.section_rank(1, c, n - 1)).as_ref() != Some(&y.section_rank(1, c, n - 1)) {
                    compatible = false;
                }
            }
        }
        entries.push(TranscriptEntry {
            level: *n,
            check: "truncation coherence".into(),
            passed: bijective && coherent,
            detail: format!("f_{}(g|^{}) = f_{n}(g)|^{} for all g", n - 1, n - 1, n - 1),
        });
        entries.push(TranscriptEntry {
            level: *n,
            check: "section compatibility".into(),
            passed: bijective && compatible,
            detail: format!("f_{}(g|_i) = f_{n}(g)|_i for all g and i", n - 1),
        });
    }
    b.transcript.extend(entries);
}
