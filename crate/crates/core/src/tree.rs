//! Lazily materialized rooted d-ary tree.
//!
//! Only vertices that some frog has reached (or whose state had to be read)
//! exist. Nodes live in an arena; each node's child table is allocated the
//! first time one of its children is created.

use crate::model::Vertex;
use crate::rng::{child_hash, ROOT_HASH};

pub type NodeId = u32;

pub const ROOT: NodeId = 0;

const NO_CHILDREN: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    parent: NodeId,
    depth: u32,
    index: u8,
    hash: u64,
    /// Offset of this node's d child slots in `slots`.
    children: u32,
}

#[derive(Debug, Clone)]
pub struct LazyTree<S> {
    d: u32,
    nodes: Vec<Node>,
    sites: Vec<S>,
    /// Child slots; `ROOT` marks an absent child (the root is nobody's child).
    slots: Vec<NodeId>,
}

impl<S> LazyTree<S> {
    pub fn new(d: u32, root_site: S) -> Self {
        assert!((2..=255).contains(&d), "degree out of range");
        Self {
            d,
            nodes: vec![Node {
                parent: ROOT,
                depth: 0,
                index: 0,
                hash: ROOT_HASH,
                children: NO_CHILDREN,
            }],
            sites: vec![root_site],
            slots: Vec::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    /// Number of materialized vertices.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        (id != ROOT).then(|| self.nodes[id as usize].parent)
    }

    #[inline]
    pub fn depth(&self, id: NodeId) -> u32 {
        self.nodes[id as usize].depth
    }

    /// 1-based index of `id` among its siblings; 0 for the root.
    #[inline]
    pub fn child_index(&self, id: NodeId) -> u8 {
        self.nodes[id as usize].index
    }

    #[inline]
    pub fn path_hash(&self, id: NodeId) -> u64 {
        self.nodes[id as usize].hash
    }

    #[inline]
    pub fn get_child(&self, id: NodeId, k: u8) -> Option<NodeId> {
        let node = &self.nodes[id as usize];
        if node.children == NO_CHILDREN {
            return None;
        }
        let c = self.slots[node.children as usize + usize::from(k) - 1];
        (c != ROOT).then_some(c)
    }

    /// Returns the `k`-th child, creating it with `init(depth)` if absent.
    #[inline]
    pub fn child_or_insert_with(&mut self, id: NodeId, k: u8, init: impl FnOnce(u32) -> S) -> NodeId {
        debug_assert!(k >= 1 && u32::from(k) <= self.d);
        let d = self.d as usize;
        let offset = {
            let node = &mut self.nodes[id as usize];
            if node.children == NO_CHILDREN {
                node.children = self.slots.len() as u32;
                self.slots.resize(self.slots.len() + d, ROOT);
            }
            node.children as usize
        };
        let slot = offset + usize::from(k) - 1;
        let existing = self.slots[slot];
        if existing != ROOT {
            return existing;
        }
        let parent = &self.nodes[id as usize];
        let depth = parent.depth + 1;
        let child = Node {
            parent: id,
            depth,
            index: k,
            hash: child_hash(parent.hash, k),
            children: NO_CHILDREN,
        };
        let new_id = NodeId::try_from(self.nodes.len()).expect("tree arena overflow");
        self.nodes.push(child);
        self.sites.push(init(depth));
        self.slots[slot] = new_id;
        new_id
    }

    #[inline]
    pub fn site(&self, id: NodeId) -> &S {
        &self.sites[id as usize]
    }

    #[inline]
    pub fn site_mut(&mut self, id: NodeId) -> &mut S {
        &mut self.sites[id as usize]
    }

    pub fn vertex(&self, mut id: NodeId) -> Vertex {
        let mut path = Vec::with_capacity(self.depth(id) as usize);
        while id != ROOT {
            let node = &self.nodes[id as usize];
            path.push(node.index);
            id = node.parent;
        }
        path.reverse();
        Vertex::from_path(path)
    }

    /// Looks up a vertex without materializing anything.
    pub fn find(&self, v: &Vertex) -> Option<NodeId> {
        v.path().iter().try_fold(ROOT, |id, &k| self.get_child(id, k))
    }

    /// Materializes the path to `v`.
    pub fn find_or_insert_with(&mut self, v: &Vertex, mut init: impl FnMut(u32) -> S) -> NodeId {
        let mut id = ROOT;
        for &k in v.path() {
            id = self.child_or_insert_with(id, k, &mut init);
        }
        id
    }

    pub fn sites(&self) -> impl Iterator<Item = (NodeId, &S)> + '_ {
        self.sites.iter().enumerate().map(|(i, s)| (i as NodeId, s))
    }

    /// Materialized children of `id` in coordinate order.
    pub fn children(&self, id: NodeId) -> impl Iterator<Item = (u8, NodeId)> + '_ {
        (1..=self.d as u8).filter_map(move |k| self.get_child(id, k).map(|c| (k, c)))
    }
}
