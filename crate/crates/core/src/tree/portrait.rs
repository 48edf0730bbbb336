use std::fmt;
use std::str::FromStr;

use super::{internal_count, level_offset, Vertex};
use crate::error::{Error, Result};
use crate::perm::Perm;

/// An automorphism of the depth-`n` truncated m-adic tree, stored as one
/// permutation label per internal vertex (levels `0..n`) in breadth-first
/// order.
///
/// The derived ordering compares `(arity, depth, labels)` and serves as the
/// canonical order on portraits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Portrait {
    arity: usize,
    depth: usize,
    /// `labels[v * arity + x]` is the image of letter `x` (0-based) at the
    /// internal vertex with breadth-first index `v`.
    labels: Vec<u32>,
}

impl Portrait {
    pub fn identity(arity: usize, depth: usize) -> Self {
        assert!(arity >= 2, "arity must be at least 2");
        let count = internal_count(arity, depth);
        let mut labels = Vec::with_capacity(count * arity);
        for _ in 0..count {
            labels.extend(0..arity as u32);
        }
        Portrait {
            arity,
            depth,
            labels,
        }
    }

    /// The rooted automorphism with root label `root` and trivial labels
    /// below.
    pub fn rooted(root: &Perm, depth: usize) -> Self {
        let mut p = Self::identity(root.degree(), depth);
        if depth > 0 {
            p.labels[..root.degree()].copy_from_slice(root.images());
        }
        p
    }

    /// Builds a portrait from labels listed in breadth-first vertex order.
    pub fn from_labels(arity: usize, depth: usize, labels: &[Perm]) -> Result<Self> {
        if arity < 2 {
            return Err(Error::ShapeMismatch("arity must be at least 2".into()));
        }
        let count = internal_count(arity, depth);
        if labels.len() != count {
            return Err(Error::ShapeMismatch(format!(
                "depth-{depth} portrait over arity {arity} needs {count} labels, got {}",
                labels.len()
            )));
        }
        let mut flat = Vec::with_capacity(count * arity);
        for l in labels {
            if l.degree() != arity {
                return Err(Error::ShapeMismatch(format!(
                    "label of degree {} in arity-{arity} portrait",
                    l.degree()
                )));
            }
            flat.extend_from_slice(l.images());
        }
        Ok(Portrait {
            arity,
            depth,
            labels: flat,
        })
    }

    pub(crate) fn from_flat_unchecked(arity: usize, depth: usize, labels: Vec<u32>) -> Self {
        debug_assert_eq!(labels.len(), internal_count(arity, depth) * arity);
        Portrait {
            arity,
            depth,
            labels,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Flat label storage (0-based images, breadth-first).
    pub fn flat_labels(&self) -> &[u32] {
        &self.labels
    }

    /// Label at the internal vertex with breadth-first index `index`.
    #[inline]
    pub fn label_at_index(&self, index: usize) -> &[u32] {
        &self.labels[index * self.arity..(index + 1) * self.arity]
    }

    pub fn label(&self, v: &Vertex) -> Result<Perm> {
        if v.level() >= self.depth {
            return Err(Error::DepthExceeded {
                level: v.level() + 1,
                depth: self.depth,
            });
        }
        self.check_vertex(v)?;
        let idx = level_offset(self.arity, v.level()) + v.rank(self.arity);
        Ok(Perm::from_images_unchecked(self.label_at_index(idx).to_vec()))
    }

    pub fn labels(&self) -> Vec<Perm> {
        self.labels
            .chunks(self.arity)
            .map(|c| Perm::from_images_unchecked(c.to_vec()))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.labels
            .chunks(self.arity)
            .all(|c| c.iter().enumerate().all(|(i, &x)| i as u32 == x))
    }

    fn check_vertex(&self, v: &Vertex) -> Result<()> {
        if v.letters().iter().any(|&x| x == 0 || x as usize > self.arity) {
            return Err(Error::InvalidVertex(format!(
                "{v} is not a vertex of the {}-adic tree",
                self.arity
            )));
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Portrait) -> Result<()> {
        if self.arity != other.arity || self.depth != other.depth {
            return Err(Error::ShapeMismatch(format!(
                "portraits of shape (arity {}, depth {}) and (arity {}, depth {})",
                self.arity, self.depth, other.arity, other.depth
            )));
        }
        Ok(())
    }

    /// Image rank of the vertex at `level` with rank `rank`.
    #[inline]
    pub fn apply_rank(&self, level: usize, rank: usize) -> usize {
        let m = self.arity;
        let mut image = 0usize;
        let mut offset = 0usize;
        let mut width = 1usize;
        let mut scale = m.pow(level as u32);
        for _ in 0..level {
            scale /= m;
            let prefix = rank / (scale * m);
            let letter = (rank / scale) % m;
            let y = self.labels[(offset + prefix) * m + letter] as usize;
            offset += width;
            width *= m;
            image = image * m + y;
        }
        image
    }

    /// The image `v^g`, computed letter by letter.
    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        if v.level() > self.depth {
            return Err(Error::DepthExceeded {
                level: v.level(),
                depth: self.depth,
            });
        }
        self.check_vertex(v)?;
        let m = self.arity;
        let mut out = Vec::with_capacity(v.level());
        let mut prefix = 0usize;
        for (l, &x) in v.letters().iter().enumerate() {
            let idx = level_offset(m, l) + prefix;
            let y = self.labels[idx * m + (x as usize - 1)];
            out.push(y + 1);
            prefix = prefix * m + (x as usize - 1);
        }
        Ok(Vertex::from_letters_unchecked(out))
    }

    /// Image ranks of every vertex, indexed by breadth-first index over
    /// levels `0..=depth`.
    pub fn vertex_images(&self) -> Vec<u32> {
        let m = self.arity;
        let total = internal_count(m, self.depth + 1);
        let mut img = vec![0u32; total];
        for l in 0..self.depth {
            let off = level_offset(m, l);
            let next = level_offset(m, l + 1);
            for r in 0..m.pow(l as u32) {
                let base = img[off + r] as usize * m;
                let lab = self.label_at_index(off + r);
                for x in 0..m {
                    img[next + r * m + x] = (base + lab[x] as usize) as u32;
                }
            }
        }
        img
    }

    /// `gh`, acting as `v^(gh) = (v^g)^h`.
    pub fn compose(&self, other: &Portrait) -> Result<Portrait> {
        self.check_same_shape(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Portrait) -> Portrait {
        let m = self.arity;
        let img = self.vertex_images();
        let mut labels = vec![0u32; self.labels.len()];
        for l in 0..self.depth {
            let off = level_offset(m, l);
            for r in 0..m.pow(l as u32) {
                let v = off + r;
                let w = off + img[v] as usize;
                for x in 0..m {
                    let y = self.labels[v * m + x] as usize;
                    labels[v * m + x] = other.labels[w * m + y];
                }
            }
        }
        Portrait {
            arity: m,
            depth: self.depth,
            labels,
        }
    }

    pub fn invert(&self) -> Portrait {
        let m = self.arity;
        let img = self.vertex_images();
        let mut labels = vec![0u32; self.labels.len()];
        for l in 0..self.depth {
            let off = level_offset(m, l);
            for r in 0..m.pow(l as u32) {
                let v = off + r;
                let w = off + img[v] as usize;
                for x in 0..m {
                    let y = self.labels[v * m + x] as usize;
                    labels[w * m + y] = x as u32;
                }
            }
        }
        Portrait {
            arity: m,
            depth: self.depth,
            labels,
        }
    }

    pub fn pow(&self, exp: i64) -> Portrait {
        let base = if exp < 0 { self.invert() } else { self.clone() };
        let mut acc = Portrait::identity(self.arity, self.depth);
        for _ in 0..exp.unsigned_abs() {
            acc = acc.compose_unchecked(&base);
        }
        acc
    }

    /// The depth-`d` section at `v`: labels of `g` at the vertices `v w`.
    pub fn section(&self, v: &Vertex, d: usize) -> Result<Portrait> {
        self.check_vertex(v)?;
        if v.level() + d > self.depth {
            return Err(Error::DepthExceeded {
                level: v.level() + d,
                depth: self.depth,
            });
        }
        Ok(self.section_rank(v.level(), v.rank(self.arity), d))
    }

    /// Section at the vertex of `level` with rank `rank`; the caller checks
    /// `level + d <= depth`.
    pub(crate) fn section_rank(&self, level: usize, rank: usize, d: usize) -> Portrait {
        let m = self.arity;
        let mut labels = Vec::with_capacity(internal_count(m, d) * m);
        for j in 0..d {
            let off = level_offset(m, level + j);
            let width = m.pow(j as u32);
            let start = off + rank * width;
            labels.extend_from_slice(&self.labels[start * m..(start + width) * m]);
        }
        Portrait {
            arity: m,
            depth: d,
            labels,
        }
    }

    pub fn truncate(&self, d: usize) -> Result<Portrait> {
        if d > self.depth {
            return Err(Error::DepthExceeded {
                level: d,
                depth: self.depth,
            });
        }
        let len = internal_count(self.arity, d) * self.arity;
        Ok(Portrait {
            arity: self.arity,
            depth: d,
            labels: self.labels[..len].to_vec(),
        })
    }

    /// The portrait with root label `root` and first-level sections
    /// `children` (all of the same depth).
    pub fn assemble(root: &Perm, children: &[Portrait]) -> Result<Portrait> {
        let m = root.degree();
        if children.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{} children for arity {m}",
                children.len()
            )));
        }
        let d = children[0].depth;
        if children.iter().any(|c| c.depth != d || c.arity != m) {
            return Err(Error::ShapeMismatch("children differ in shape".into()));
        }
        let mut labels = Vec::with_capacity(internal_count(m, d + 1) * m);
        labels.extend_from_slice(root.images());
        for j in 0..d {
            let off = level_offset(m, j);
            let width = m.pow(j as u32);
            for c in children {
                labels.extend_from_slice(&c.labels[off * m..(off + width) * m]);
            }
        }
        Ok(Portrait {
            arity: m,
            depth: d + 1,
            labels,
        })
    }

    /// The portrait equal to `inner` below the first-level vertex `child`
    /// (0-based) and trivial everywhere else.
    pub fn embed_below(inner: &Portrait, child: usize) -> Portrait {
        let m = inner.arity;
        let id = Portrait::identity(m, inner.depth);
        let children: Vec<Portrait> = (0..m)
            .map(|i| if i == child { inner.clone() } else { id.clone() })
            .collect();
        Portrait::assemble(&Perm::identity(m), &children).expect("shapes agree")
    }

    /// A copy with the label at `v` replaced by `label`.
    pub fn with_label(&self, v: &Vertex, label: &Perm) -> Result<Portrait> {
        if v.level() >= self.depth {
            return Err(Error::DepthExceeded {
                level: v.level() + 1,
                depth: self.depth,
            });
        }
        self.check_vertex(v)?;
        if label.degree() != self.arity {
            return Err(Error::ShapeMismatch(format!(
                "label of degree {} in arity-{} portrait",
                label.degree(),
                self.arity
            )));
        }
        let idx = level_offset(self.arity, v.level()) + v.rank(self.arity);
        let mut out = self.clone();
        out.labels[idx * self.arity..(idx + 1) * self.arity].copy_from_slice(label.images());
        Ok(out)
    }

    /// Action on the `m^depth` leaves, in lexicographic leaf order.
    pub fn to_leaf_permutation(&self) -> Result<Perm> {
        if self.depth == 0 {
            return Err(Error::Precondition(
                "leaf permutation needs depth at least 1".into(),
            ));
        }
        let img = self.vertex_images();
        let off = level_offset(self.arity, self.depth);
        Ok(Perm::from_images_unchecked(img[off..].to_vec()))
    }

    /// Action on all non-root vertices (levels `1..=depth`, breadth-first).
    pub fn to_vertex_permutation(&self) -> Perm {
        let img = self.vertex_images();
        let m = self.arity;
        let mut out = Vec::with_capacity(img.len() - 1);
        for l in 1..=self.depth {
            let off = level_offset(m, l);
            for r in 0..m.pow(l as u32) {
                out.push((off + img[off + r] as usize - 1) as u32);
            }
        }
        Perm::from_images_unchecked(out)
    }

    /// Reconstructs the portrait from a leaf permutation; fails if the
    /// permutation does not preserve the prefix structure.
    pub fn from_leaf_permutation(arity: usize, perm: &Perm) -> Result<Portrait> {
        let n = leaf_depth(arity, perm.degree())?;
        let m = arity;
        // images of all vertices, level by level from the leaves up
        let mut level_img: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        level_img[n] = perm.images().to_vec();
        for l in (0..n).rev() {
            let width = m.pow(l as u32);
            let mut imgs = Vec::with_capacity(width);
            for r in 0..width {
                let kids = &level_img[l + 1][r * m..(r + 1) * m];
                let parent = kids[0] as usize / m;
                if kids.iter().any(|&k| k as usize / m != parent) {
                    return Err(Error::NotAnAutomorphism(format!(
                        "children of vertex {} are sent to different parents",
                        Vertex::from_rank(m, l, r)
                    )));
                }
                imgs.push(parent as u32);
            }
            level_img[l] = imgs;
        }
        let mut labels = Vec::with_capacity(internal_count(m, n) * m);
        for l in 0..n {
            for r in 0..m.pow(l as u32) {
                let kids = &level_img[l + 1][r * m..(r + 1) * m];
                labels.extend(kids.iter().map(|&k| k % m as u32));
            }
        }
        Ok(Portrait {
            arity: m,
            depth: n,
            labels,
        })
    }

    /// Inverse of [`to_vertex_permutation`](Self::to_vertex_permutation).
    pub fn from_vertex_permutation(arity: usize, depth: usize, perm: &Perm) -> Result<Portrait> {
        let m = arity;
        if perm.degree() != internal_count(m, depth + 1) - 1 {
            return Err(Error::ShapeMismatch(format!(
                "vertex permutation of degree {} for arity {m} depth {depth}",
                perm.degree()
            )));
        }
        let mut labels = Vec::with_capacity(internal_count(m, depth) * m);
        let mut parent_img = vec![0usize];
        for l in 0..depth {
            let off_child = level_offset(m, l + 1);
            let mut next = Vec::with_capacity(m.pow(l as u32 + 1));
            for r in 0..m.pow(l as u32) {
                for x in 0..m {
                    let point = off_child + r * m + x - 1;
                    let image = perm.apply(point as u32) as usize + 1;
                    if image < off_child || image >= off_child + m.pow(l as u32 + 1) {
                        return Err(Error::NotAnAutomorphism("level not preserved".into()));
                    }
                    let image_rank = image - off_child;
                    if image_rank / m != parent_img[r] {
                        return Err(Error::NotAnAutomorphism(format!(
                            "vertex {} leaves its parent's image",
                            Vertex::from_rank(m, l + 1, r * m + x)
                        )));
                    }
                    labels.push((image_rank % m) as u32);
                    next.push(image_rank);
                }
            }
            parent_img = next;
        }
        Ok(Portrait {
            arity: m,
            depth,
            labels,
        })
    }
}

fn leaf_depth(arity: usize, degree: usize) -> Result<usize> {
    let mut n = 0;
    let mut size = 1usize;
    while size < degree {
        size *= arity;
        n += 1;
    }
    if size != degree || n == 0 {
        return Err(Error::ShapeMismatch(format!(
            "{degree} is not a positive power of {arity}"
        )));
    }
    Ok(n)
}

impl fmt::Display for Portrait {
    /// Canonical text form: `depth arity` on the first line, then one label
    /// per internal vertex in breadth-first order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.depth, self.arity)?;
        for chunk in self.labels.chunks(self.arity) {
            f.write_str("\n")?;
            for (i, x) in chunk.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", x + 1)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Portrait(depth {}, arity {}", self.depth, self.arity)?;
        for chunk in self.labels.chunks(self.arity) {
            write!(f, " |")?;
            for x in chunk {
                write!(f, " {}", x + 1)?;
            }
        }
        f.write_str(")")
    }
}

/// Largest internal-vertex count accepted by the text parser.
const MAX_PARSED_VERTICES: usize = 1 << 20;

impl FromStr for Portrait {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty portrait text".into()))?;
        let mut head = header.split_whitespace();
        let parse_field = |tok: Option<&str>, name: &str| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse(format!("missing {name}")))?
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad {name} in header `{header}`")))
        };
        let depth = parse_field(head.next(), "depth")?;
        let arity = parse_field(head.next(), "arity")?;
        if head.next().is_some() {
            return Err(Error::Parse(format!("trailing tokens in header `{header}`")));
        }
        if !(2..=1 << 16).contains(&arity) {
            return Err(Error::Parse(format!("arity {arity} out of range")));
        }
        let count = checked_internal_count(arity, depth)
            .filter(|&c| c <= MAX_PARSED_VERTICES)
            .ok_or_else(|| Error::Parse(format!("depth {depth} too large for arity {arity}")))?;
        let mut labels = Vec::with_capacity(count);
        for line in lines {
            let p: Perm = line
                .parse()
                .map_err(|e| Error::Parse(format!("label `{line}`: {e}")))?;
            labels.push(p);
        }
        Portrait::from_labels(arity, depth, &labels).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn checked_internal_count(m: usize, depth: usize) -> Option<usize> {
    let mut total = 0usize;
    let mut width = 1usize;
    for _ in 0..depth {
        total = total.checked_add(width)?;
        width = width.checked_mul(m)?;
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma3() -> Perm {
        "2 3 1".parse().unwrap()
    }

    #[test]
    fn rooted_action_changes_first_letter() {
        let a = Portrait::rooted(&sigma3(), 2);
        let v: Vertex = "1 1".parse().unwrap();
        assert_eq!(a.apply(&v).unwrap().letters(), &[2, 1]);
        let id = Portrait::identity(3, 2);
        let w: Vertex = "2 1".parse().unwrap();
        assert_eq!(id.apply(&w).unwrap(), w);
        assert!(a.apply(&"1 1 1".parse().unwrap()).is_err());
    }

    #[test]
    fn rooted_cycle_has_order_three() {
        let a = Portrait::rooted(&sigma3(), 3);
        let a3 = a.compose(&a.compose(&a).unwrap()).unwrap();
        assert!(a3.is_identity());
        let inv = a.invert();
        assert_eq!(inv.label(&Vertex::root()).unwrap(), sigma3().inverse());
    }

    #[test]
    fn root_swap_leaf_permutation() {
        let swap: Perm = "2 1".parse().unwrap();
        let g = Portrait::rooted(&swap, 2);
        let leaf = g.to_leaf_permutation().unwrap();
        assert_eq!(leaf, Perm::from_cycles(4, &[&[1, 3], &[2, 4]]).unwrap());
        assert!(Portrait::identity(2, 2).to_leaf_permutation().unwrap().is_identity());
        assert_eq!(Portrait::from_leaf_permutation(2, &leaf).unwrap(), g);
    }

    #[test]
    fn non_tree_permutation_rejected() {
        let p = Perm::from_cycles(4, &[&[1, 2, 3]]).unwrap();
        assert!(matches!(
            Portrait::from_leaf_permutation(2, &p),
            Err(Error::NotAnAutomorphism(_))
        ));
        assert!(Portrait::from_leaf_permutation(2, &Perm::identity(6)).is_err());
    }

    #[test]
    fn sections_and_truncations() {
        let a = Portrait::rooted(&sigma3(), 3);
        let s = a.section(&"2".parse().unwrap(), 2).unwrap();
        assert!(s.is_identity());
        assert_eq!(a.truncate(3).unwrap(), a);
        assert!(a.truncate(0).unwrap().is_identity());
        assert!(a.section(&"2".parse().unwrap(), 3).is_err());
    }

    #[test]
    fn text_form_round_trip() {
        let a = Portrait::rooted(&sigma3(), 2);
        let text = a.to_string();
        assert_eq!(text, "2 3\n2 3 1\n1 2 3\n1 2 3\n1 2 3");
        assert_eq!(text.parse::<Portrait>().unwrap(), a);
        assert!("2 3\n2 3 1".parse::<Portrait>().is_err());
        assert!("x".parse::<Portrait>().is_err());
        assert!("99 99".parse::<Portrait>().is_err());
    }

    #[test]
    fn vertex_permutation_round_trip() {
        let a = Portrait::rooted(&sigma3(), 2);
        let b = Portrait::embed_below(&Portrait::rooted(&sigma3(), 1), 0);
        let g = a.compose(&b).unwrap();
        let p = g.to_vertex_permutation();
        assert_eq!(p.degree(), 12);
        assert_eq!(Portrait::from_vertex_permutation(3, 2, &p).unwrap(), g);
    }
}
