//! Vertices of the m-adic tree and truncated automorphisms (portraits).

mod portrait;
mod vertex;

pub use portrait::Portrait;
pub use vertex::Vertex;

/// Number of vertices on levels `0..levels`, i.e. `(m^levels - 1)/(m - 1)`.
pub fn internal_count(arity: usize, levels: usize) -> usize {
    level_offset(arity, levels)
}

/// Breadth-first index of the first vertex of `level`.
#[inline]
pub fn level_offset(arity: usize, level: usize) -> usize {
    let mut total = 0usize;
    let mut width = 1usize;
    for _ in 0..level {
        total += width;
        width *= arity;
    }
    total
}

/// Breadth-first index of `v` (the root has index 0).
pub fn bfs_index(arity: usize, v: &Vertex) -> usize {
    level_offset(arity, v.level()) + v.rank(arity)
}

/// Point of the vertex domain used by quotient permutation groups: the
/// non-root vertices of levels `1..=depth`, breadth-first, 0-based.
pub fn vertex_point(arity: usize, v: &Vertex) -> u32 {
    debug_assert!(!v.is_root());
    (bfs_index(arity, v) - 1) as u32
}

/// Inverse of [`vertex_point`].
pub fn point_vertex(arity: usize, point: u32) -> Vertex {
    let idx = point as usize + 1;
    let mut level = 0;
    while level_offset(arity, level + 1) <= idx {
        level += 1;
    }
    Vertex::from_rank(arity, level, idx - level_offset(arity, level))
}
