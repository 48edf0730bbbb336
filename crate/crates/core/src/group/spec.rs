use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::Value;

use super::patterns::PatternSet;
use super::word::Word;
use crate::error::{Error, Result};
use crate::perm::{Perm, StabChain};
use crate::tree::Portrait;

/// A generator given by its root permutation and one section word per
/// first-level vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub root: Perm,
    pub sections: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecKind {
    /// Finitely many generators defined by the wreath recursion.
    Recursive(Vec<Generator>),
    /// The closed group of all automorphisms whose depth-`D` windows lie in
    /// a pattern set.
    Patterns(PatternSet),
}

/// Parameters of a GGS preset, kept for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GgsParams {
    pub p: u64,
    pub alpha: Vec<u64>,
}

/// A self-similar group acting on the `arity`-adic tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    arity: usize,
    label: String,
    kind: SpecKind,
    ggs: Option<GgsParams>,
    warnings: Vec<String>,
    /// `resolved[j][i]` = section word of generator `j` at child `i` as
    /// `(generator index, exponent)` pairs.
    resolved: Vec<Vec<Vec<(usize, i64)>>>,
}

impl GroupSpec {
    /// Validates a generator table: known names, bijective roots, one
    /// section per child.
    pub fn recursive(arity: usize, label: &str, generators: Vec<Generator>) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidSpec("arity must be at least 2".into()));
        }
        let mut index = BTreeMap::new();
        for (j, g) in generators.iter().enumerate() {
            if index.insert(g.name.clone(), j).is_some() {
                return Err(Error::InvalidSpec(format!("generator `{}` defined twice", g.name)));
            }
        }
        let mut resolved = Vec::with_capacity(generators.len());
        for g in &generators {
            if g.root.degree() != arity {
                return Err(Error::InvalidSpec(format!(
                    "root of `{}` has degree {} but arity is {arity}",
                    g.name,
                    g.root.degree()
                )));
            }
            if g.sections.len() != arity {
                return Err(Error::InvalidSpec(format!(
                    "`{}` has {} section words, expected {arity}",
                    g.name,
                    g.sections.len()
                )));
            }
            let mut rows = Vec::with_capacity(arity);
            for w in &g.sections {
                let mut row = Vec::new();
                for (name, exp) in w.letters() {
                    let j = *index.get(name).ok_or_else(|| {
                        Error::InvalidSpec(format!(
                            "section word `{w}` of `{}` uses undefined generator `{name}`",
                            g.name
                        ))
                    })?;
                    row.push((j, *exp));
                }
                rows.push(row);
            }
            resolved.push(rows);
        }
        Ok(GroupSpec {
            arity,
            label: label.to_string(),
            kind: SpecKind::Recursive(generators),
            ggs: None,
            warnings: Vec::new(),
            resolved,
        })
    }

    /// The finite-type group defined by explicit patterns.
    pub fn from_patterns(label: &str, patterns: PatternSet) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::InvalidSpec("empty pattern set".into()));
        }
        Ok(GroupSpec {
            arity: patterns.arity(),
            label: label.to_string(),
            kind: SpecKind::Patterns(patterns),
            ggs: None,
            warnings: Vec::new(),
            resolved: Vec::new(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &SpecKind {
        &self.kind
    }

    pub fn ggs(&self) -> Option<&GgsParams> {
        self.ggs.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn generators(&self) -> &[Generator] {
        match &self.kind {
            SpecKind::Recursive(g) => g,
            SpecKind::Patterns(_) => &[],
        }
    }

    /// Depth-`n` portraits of all generators, in table order.
    pub fn generator_portraits(&self, n: usize) -> Result<Vec<Portrait>> {
        let gens = match &self.kind {
            SpecKind::Recursive(g) => g,
            SpecKind::Patterns(_) => {
                return Err(Error::Unsupported(
                    "pattern-defined specs have no generator table".into(),
                ))
            }
        };
        let m = self.arity;
        let mut current = vec![Portrait::identity(m, 0); gens.len()];
        for d in 1..=n {
            let mut next = Vec::with_capacity(gens.len());
            for (g, rows) in gens.iter().zip(&self.resolved) {
                let children: Vec<Portrait> = rows
                    .iter()
                    .map(|row| evaluate(row, &current, m, d - 1))
                    .collect();
                next.push(Portrait::assemble(&g.root, &children)?);
            }
            current = next;
        }
        Ok(current)
    }

    /// The depth-`n` unrolling of the named generator.
    pub fn truncate_generator(&self, name: &str, n: usize) -> Result<Portrait> {
        let j = self
            .generators()
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::InvalidSpec(format!("undefined generator `{name}`")))?;
        Ok(self.generator_portraits(n)?.swap_remove(j))
    }

    /// Whether every label of every element is a power of the standard
    /// cycle `(1 2 … m)`, i.e. the group lies in `W_m`.
    pub fn lies_in_cyclic_wreath(&self) -> bool {
        let m = self.arity as u32;
        let is_rotation = |images: &[u32]| {
            let s = images[0];
            images.iter().enumerate().all(|(i, &x)| x == (s + i as u32) % m)
        };
        match &self.kind {
            SpecKind::Recursive(g) => g.iter().all(|g| is_rotation(g.root.images())),
            SpecKind::Patterns(p) => p
                .iter()
                .all(|q| q.flat_labels().chunks(self.arity).all(is_rotation)),
        }
    }

    pub fn to_json(&self) -> Value {
        if let Some(g) = &self.ggs {
            return serde_json::json!({ "preset": "ggs", "p": g.p, "alpha": g.alpha });
        }
        match &self.kind {
            SpecKind::Recursive(gens) => {
                let mut table = serde_json::Map::new();
                for g in gens {
                    table.insert(
                        g.name.clone(),
                        serde_json::json!({
                            "root": g.root.one_line(),
                            "sections": g.sections.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                        }),
                    );
                }
                serde_json::json!({ "arity": self.arity, "generators": table })
            }
            SpecKind::Patterns(p) if p.depth() == 1 => serde_json::json!({
                "preset": "wreath",
                "m": self.arity,
                "pattern_group": p.iter().map(|q| q.labels()[0].one_line()).collect::<Vec<_>>(),
            }),
            SpecKind::Patterns(p) => serde_json::json!({
                "preset": "patterns",
                "arity": self.arity,
                "depth": p.depth(),
                "patterns": p.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            }),
        }
    }

    /// Parses the JSON spec format (generator table or preset).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("spec JSON: {e}")))?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("spec must be a JSON object".into()))?;
        match obj.get("preset").map(|p| p.as_str()) {
            None => {
                let raw: RawTable = from_value(value)?;
                let mut gens = Vec::with_capacity(raw.generators.len());
                for (name, g) in raw.generators {
                    let root = Perm::from_one_line(&g.root)
                        .map_err(|e| Error::Parse(format!("generators.{name}.root: {e}")))?;
                    let sections = g
                        .sections
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            s.parse::<Word>().map_err(|e| {
                                Error::Parse(format!("generators.{name}.sections[{i}]: {e}"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    gens.push(Generator { name, root, sections });
                }
                let label = raw.name.unwrap_or_else(|| "custom".to_string());
                GroupSpec::recursive(raw.arity, &label, gens)
            }
            Some(Some("ggs")) => {
                let raw: RawGgs = from_value(value)?;
                ggs_spec(raw.p, &raw.alpha)
            }
            Some(Some("grigorchuk")) => {
                let _: RawPresetOnly = from_value(value)?;
                Ok(grigorchuk_spec())
            }
            Some(Some("wreath")) => {
                let raw: RawWreath = from_value(value)?;
                let group = match raw.pattern_group {
                    Some(list) => list
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            Perm::from_one_line(p)
                                .map_err(|e| Error::Parse(format!("pattern_group[{i}]: {e}")))
                        })
                        .collect::<Result<Vec<_>>>()?,
                    None => symmetric_group(raw.m),
                };
                wreath_spec(raw.m, &group)
            }
            Some(Some("patterns")) => {
                let raw: RawPatterns = from_value(value)?;
                let portraits = raw
                    .patterns
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.parse::<Portrait>()
                            .map_err(|e| Error::Parse(format!("patterns[{i}]: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let set = PatternSet::new(raw.arity, raw.depth, portraits)?;
                GroupSpec::from_patterns(raw.name.as_deref().unwrap_or("patterns"), set)
            }
            Some(Some(other)) => Err(Error::Parse(format!("unknown preset `{other}`"))),
            Some(None) => Err(Error::Parse("`preset` must be a string".into())),
        }
    }
}

fn evaluate(row: &[(usize, i64)], gens: &[Portrait], m: usize, depth: usize) -> Portrait {
    let mut acc = Portrait::identity(m, depth);
    for &(j, e) in row {
        acc = acc.compose_unchecked(&gens[j].pow(e));
    }
    acc
}

fn from_value<T: for<'de> Deserialize<'de>>(value: &Value) -> Result<T> {
    T::deserialize(value).map_err(|e| Error::Parse(format!("spec JSON: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    root: Vec<u32>,
    sections: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    arity: usize,
    generators: BTreeMap<String, RawGenerator>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGgs {
    #[allow(dead_code)]
    preset: String,
    p: u64,
    alpha: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPresetOnly {
    #[allow(dead_code)]
    preset: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWreath {
    #[allow(dead_code)]
    preset: String,
    m: usize,
    #[serde(default)]
    pattern_group: Option<Vec<Vec<u32>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPatterns {
    #[allow(dead_code)]
    preset: String,
    arity: usize,
    depth: usize,
    patterns: Vec<String>,
    #[serde(default)]
    name: Option<String>,
}

pub(crate) fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// The GGS group with defining vector `alpha` over `F_p`: `a` is the rooted
/// cycle `(1 2 … p)` and `b` has sections `(a^α_1, …, a^α_{p-1}, b)`.
pub fn ggs_spec(p: u64, alpha: &[u64]) -> Result<GroupSpec> {
    if p < 3 || !is_prime(p) || p > 251 {
        return Err(Error::InvalidVector(format!("p = {p} is not an odd prime below 256")));
    }
    if alpha.len() as u64 != p - 1 {
        return Err(Error::InvalidVector(format!(
            "alpha has length {}, expected {}",
            alpha.len(),
            p - 1
        )));
    }
    if let Some(&x) = alpha.iter().find(|&&x| x >= p) {
        return Err(Error::InvalidVector(format!("entry {x} is not in F_{p}")));
    }
    if alpha.iter().all(|&x| x == 0) {
        return Err(Error::InvalidVector("alpha must be nonzero".into()));
    }
    let m = p as usize;
    let sigma = Perm::from_images_unchecked((0..m as u32).map(|i| (i + 1) % m as u32).collect());
    let a = Generator {
        name: "a".into(),
        root: sigma,
        sections: vec![Word::identity(); m],
    };
    let mut sections: Vec<Word> = alpha.iter().map(|&e| Word::power("a", e as i64)).collect();
    sections.push(Word::power("b", 1));
    let b = Generator {
        name: "b".into(),
        root: Perm::identity(m),
        sections,
    };
    let label = format!(
        "ggs(p={p}, alpha=({}))",
        alpha.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    );
    let mut spec = GroupSpec::recursive(m, &label, vec![a, b])?;
    spec.ggs = Some(GgsParams {
        p,
        alpha: alpha.to_vec(),
    });
    if alpha.iter().all(|&x| x == alpha[0]) {
        spec.warnings
            .push("constant defining vector: the branch results do not apply".into());
    }
    Ok(spec)
}

/// The first Grigorchuk group: `a` swaps, `b = (a, c)`, `c = (a, d)`,
/// `d = (1, b)`.
pub fn grigorchuk_spec() -> GroupSpec {
    let swap = Perm::from_images_unchecked(vec![1, 0]);
    let id = Perm::identity(2);
    let w = |s: &str| s.parse::<Word>().expect("static word");
    let gens = vec![
        Generator {
            name: "a".into(),
            root: swap,
            sections: vec![w(""), w("")],
        },
        Generator {
            name: "b".into(),
            root: id.clone(),
            sections: vec![w("a"), w("c")],
        },
        Generator {
            name: "c".into(),
            root: id.clone(),
            sections: vec![w("a"), w("d")],
        },
        Generator {
            name: "d".into(),
            root: id,
            sections: vec![w(""), w("b")],
        },
    ];
    GroupSpec::recursive(2, "grigorchuk", gens).expect("static spec is valid")
}

/// All permutations of `{1, …, m}` in lexicographic one-line order.
pub fn symmetric_group(m: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..m as u32).collect();
    loop {
        out.push(Perm::from_images_unchecked(cur.clone()));
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).expect("exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// The cyclic group generated by `(1 2 … m)`.
pub fn cyclic_group(m: usize) -> Vec<Perm> {
    let sigma = Perm::from_images_unchecked((0..m as u32).map(|i| (i + 1) % m as u32).collect());
    (0..m as i64).map(|k| sigma.pow(k)).collect()
}

/// The iterated wreath product `W_H`: all automorphisms whose labels lie in
/// the subgroup `H` of `Sym(m)` (given by all of its elements).
pub fn wreath_spec(m: usize, group: &[Perm]) -> Result<GroupSpec> {
    if m < 2 {
        return Err(Error::InvalidSpec("arity must be at least 2".into()));
    }
    let set: BTreeSet<Perm> = group.iter().cloned().collect();
    if set.iter().any(|p| p.degree() != m) {
        return Err(Error::InvalidSpec(format!("pattern group must act on {m} points")));
    }
    if !set.contains(&Perm::identity(m)) {
        return Err(Error::InvalidSpec("pattern group must contain the identity".into()));
    }
    for x in &set {
        for y in &set {
            if !set.contains(&x.compose(y)) {
                return Err(Error::InvalidSpec(format!(
                    "pattern group not closed: {x} * {y} is missing"
                )));
            }
        }
    }
    let cyclic: BTreeSet<Perm> = cyclic_group(m).into_iter().collect();
    let name = if set.len() == 1 {
        "trivial".to_string()
    } else if set == cyclic {
        "cyclic".to_string()
    } else if set.len() == symmetric_group(m).len() {
        "sym".to_string()
    } else {
        format!("order {}", set.len())
    };
    let patterns = PatternSet::new(
        m,
        1,
        set.iter().map(|p| Portrait::rooted(p, 1)).collect(),
    )?;
    GroupSpec::from_patterns(&format!("wreath(m={m}, {name})"), patterns)
}

/// A small generating set of the permutation group whose elements are
/// `elements`, chosen greedily in the given order.
pub(crate) fn greedy_generators(degree: usize, elements: &[Perm]) -> Vec<Perm> {
    let mut gens: Vec<Perm> = Vec::new();
    let mut chain = StabChain::build(degree, &gens).expect("degree positive");
    for e in elements {
        if !chain.contains(e).unwrap_or(true) {
            gens.push(e.clone());
            chain = StabChain::build(degree, &gens).expect("degree positive");
        }
    }
    gens
}
