//! Complete rooted binary tree of depth `n`.
//!
//! Vertex `(k, i)` sits at level `k` with index `i < 2^k`; its children are
//! `(k + 1, 2i)` and `(k + 1, 2i + 1)`. Ancestor lookup is a right shift, so
//! samplers can stream the tree depth-first without storing pointers.
//!
//! Dense per-vertex storage uses heap order: `id = 2^k - 1 + i`.

use crate::error::{domain, Result};

/// Largest supported depth. Keeps every vertex id inside a `u64` and heap
/// offsets representable as `usize` on 64-bit targets.
pub const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeParams {
    depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub vertices: u64,
    pub edges: u64,
    pub leaves: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub level: u32,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl TreeParams {
    pub fn new(depth: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return domain(format!(
                "depth {depth} exceeds the supported maximum {MAX_DEPTH}"
            ));
        }
        Ok(Self { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn counts(&self) -> Counts {
        let vertices = (1u64 << (self.depth + 1)) - 1;
        Counts {
            vertices,
            edges: vertices - 1,
            leaves: 1u64 << self.depth,
        }
    }

    pub fn vertex_count(&self) -> u64 {
        self.counts().vertices
    }

    pub fn edge_count(&self) -> u64 {
        self.counts().edges
    }

    pub fn leaf_count(&self) -> u64 {
        self.counts().leaves
    }

    pub fn contains(&self, v: VertexRef) -> bool {
        v.level <= self.depth && v.index < (1u64 << v.level)
    }

    pub fn check(&self, v: VertexRef) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            domain(format!(
                "vertex ({}, {}) is not in the tree of depth {}",
                v.level, v.index, self.depth
            ))
        }
    }

    pub fn is_leaf(&self, v: VertexRef) -> bool {
        v.level == self.depth
    }

    /// Number of neighbors: 2 at the root, 1 at a leaf, 3 elsewhere.
    /// The single-vertex tree (depth 0) has an isolated root of degree 0.
    pub fn degree(&self, v: VertexRef) -> Result<u32> {
        self.check(v)?;
        Ok(self.degree_unchecked(v.level))
    }

    #[inline]
    pub(crate) fn degree_unchecked(&self, level: u32) -> u32 {
        match (level == 0, level == self.depth) {
            (true, true) => 0,
            (true, false) => 2,
            (false, true) => 1,
            (false, false) => 3,
        }
    }

    pub fn ancestor_at_level(&self, v: VertexRef, k: u32) -> Result<VertexRef> {
        self.check(v)?;
        if k > v.level {
            return domain(format!(
                "ancestor level {k} is below the vertex level {}",
                v.level
            ));
        }
        Ok(VertexRef {
            level: k,
            index: v.index >> (v.level - k),
        })
    }

    pub fn parent(&self, v: VertexRef) -> Result<Option<VertexRef>> {
        self.check(v)?;
        Ok(v.parent())
    }

    pub fn child(&self, v: VertexRef, side: Side) -> Result<Option<VertexRef>> {
        self.check(v)?;
        if self.is_leaf(v) {
            return Ok(None);
        }
        Ok(Some(v.child(side)))
    }

    /// Vertices on the root-to-`v` path, root first.
    pub fn path_to(&self, v: VertexRef) -> Result<Vec<VertexRef>> {
        (0..=v.level)
            .map(|k| self.ancestor_at_level(v, k))
            .collect()
    }

    pub fn heap_id(&self, v: VertexRef) -> Result<usize> {
        self.check(v)?;
        Ok(v.heap_id())
    }
}

impl VertexRef {
    pub const ROOT: VertexRef = VertexRef { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Self {
        Self { level, index }
    }

    #[inline]
    pub fn heap_id(&self) -> usize {
        ((1u64 << self.level) - 1 + self.index) as usize
    }

    #[inline]
    pub fn from_heap_id(id: usize) -> Self {
        let level = (id as u64 + 1).ilog2();
        Self {
            level,
            index: id as u64 + 1 - (1u64 << level),
        }
    }

    pub fn parent(&self) -> Option<VertexRef> {
        (self.level > 0).then(|| VertexRef {
            level: self.level - 1,
            index: self.index >> 1,
        })
    }

    #[inline]
    pub fn child(&self, side: Side) -> VertexRef {
        let bit = match side {
            Side::Left => 0,
            Side::Right => 1,
        };
        VertexRef {
            level: self.level + 1,
            index: (self.index << 1) | bit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(n: u32) -> TreeParams {
        TreeParams::new(n).unwrap()
    }

    #[test]
    fn degrees() {
        let p = tree(3);
        assert_eq!(p.degree(VertexRef::ROOT).unwrap(), 2);
        assert_eq!(p.degree(VertexRef::new(3, 5)).unwrap(), 1);
        assert_eq!(p.degree(VertexRef::new(1, 1)).unwrap(), 3);
        assert!(p.degree(VertexRef::new(4, 0)).is_err());
        assert!(p.degree(VertexRef::new(2, 4)).is_err());
    }

    #[test]
    fn counts_examples() {
        let c = tree(1).counts();
        assert_eq!((c.vertices, c.edges, c.leaves), (3, 2, 2));
        let c = tree(5).counts();
        assert_eq!((c.vertices, c.edges, c.leaves), (63, 62, 32));
        let c = tree(0).counts();
        assert_eq!((c.vertices, c.edges, c.leaves), (1, 0, 1));
    }

    #[test]
    fn ancestor_examples() {
        let p = tree(3);
        let leaf = VertexRef::new(3, 5);
        assert_eq!(p.ancestor_at_level(leaf, 3).unwrap(), leaf);
        assert_eq!(p.ancestor_at_level(leaf, 0).unwrap(), VertexRef::ROOT);
        // 5 = 0b101: root -> right (1, 1) -> left (2, 2) -> right (3, 5)
        assert_eq!(p.ancestor_at_level(leaf, 2).unwrap(), VertexRef::new(2, 2));
        assert_eq!(p.ancestor_at_level(leaf, 1).unwrap(), VertexRef::new(1, 1));
        assert!(p.ancestor_at_level(VertexRef::new(2, 1), 3).is_err());
    }

    #[test]
    fn ancestor_paths_are_paths() {
        for n in 0..=10 {
            let p = tree(n);
            for i in 0..p.leaf_count() {
                let path = p.path_to(VertexRef::new(n, i)).unwrap();
                assert_eq!(path[0], VertexRef::ROOT);
                for w in path.windows(2) {
                    assert_eq!(w[1].parent(), Some(w[0]));
                    let side = if w[1].index & 1 == 0 {
                        Side::Left
                    } else {
                        Side::Right
                    };
                    assert_eq!(w[0].child(side), w[1]);
                }
            }
        }
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        for n in 0..=20 {
            let p = tree(n);
            // level-by-level sum avoids enumerating 2^21 vertices
            let sum: u64 = (0..=n)
                .map(|k| (1u64 << k) * p.degree_unchecked(k) as u64)
                .sum();
            assert_eq!(sum, 2 * p.edge_count(), "n = {n}");
        }
    }

    #[test]
    fn heap_ids_round_trip() {
        let p = tree(6);
        for id in 0..p.vertex_count() as usize {
            let v = VertexRef::from_heap_id(id);
            assert!(p.contains(v));
            assert_eq!(v.heap_id(), id);
        }
    }

    #[test]
    fn child_of_leaf_is_none() {
        let p = tree(2);
        assert_eq!(p.child(VertexRef::new(2, 3), Side::Left).unwrap(), None);
        assert_eq!(
            p.child(VertexRef::new(1, 1), Side::Right).unwrap(),
            Some(VertexRef::new(2, 3))
        );
        assert!(TreeParams::new(MAX_DEPTH + 1).is_err());
    }
}
