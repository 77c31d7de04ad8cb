//! Rooted plane binary trees stored in an index arena.
//!
//! Every node has either two children or none. Internal nodes cache the
//! number of internal nodes in their subtree (themselves included), so a
//! cherry can be grown in time proportional to the depth of the leaf.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Default cap for [`enumerate_all`]; `Cat(12) = 208012`.
pub const ENUMERATION_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("tree exceeds u32 node ids"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug)]
struct Node {
    children: Option<(NodeId, NodeId)>,
    parent: Option<NodeId>,
    size: u32,
}

impl Node {
    fn leaf(parent: Option<NodeId>) -> Self {
        Node { children: None, parent, size: 0 }
    }
}

/// Sizes of the left and right subtrees of the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug)]
pub struct PlaneBinaryTree {
    nodes: Vec<Node>,
    root: NodeId,
}

impl Default for PlaneBinaryTree {
    fn default() -> Self {
        Self::leaf()
    }
}

impl PlaneBinaryTree {
    /// The size-0 tree: a single leaf.
    pub fn leaf() -> Self {
        PlaneBinaryTree { nodes: vec![Node::leaf(None)], root: NodeId(0) }
    }

    /// The tree whose root has `left` and `right` as subtrees.
    pub fn join(left: &PlaneBinaryTree, right: &PlaneBinaryTree) -> Self {
        let mut nodes = Vec::with_capacity(1 + left.nodes.len() + right.nodes.len());
        nodes.push(Node {
            children: None,
            parent: None,
            size: (left.n_internal() + right.n_internal() + 1) as u32,
        });
        let l = copy_subtree(&mut nodes, left, left.root, NodeId(0));
        let r = copy_subtree(&mut nodes, right, right.root, NodeId(0));
        nodes[0].children = Some((l, r));
        PlaneBinaryTree { nodes, root: NodeId(0) }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of internal nodes.
    pub fn n_internal(&self) -> usize {
        self.nodes[self.root.index()].size as usize
    }

    pub fn n_leaves(&self) -> usize {
        self.n_internal() + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.nodes.len()
    }

    pub fn children(&self, v: NodeId) -> Option<(NodeId, NodeId)> {
        self.nodes[v.index()].children
    }

    pub fn left(&self, v: NodeId) -> Option<NodeId> {
        self.children(v).map(|(l, _)| l)
    }

    pub fn right(&self, v: NodeId) -> Option<NodeId> {
        self.children(v).map(|(_, r)| r)
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v.index()].parent
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes[v.index()].children.is_none()
    }

    /// Internal nodes below and including `v`; zero for a leaf.
    pub fn subtree_size(&self, v: NodeId) -> usize {
        self.nodes[v.index()].size as usize
    }

    /// Distance from the root.
    pub fn depth(&self, mut v: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(v) {
            d += 1;
            v = p;
        }
        d
    }

    pub fn profile(&self) -> Result<Profile> {
        let (l, r) = self.children(self.root).ok_or(Error::NoProfile)?;
        Ok(Profile { a: self.subtree_size(l), b: self.subtree_size(r) })
    }

    /// Nodes in preorder (node, then left subtree, then right subtree).
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { tree: self, stack: vec![self.root] }
    }

    /// Leaves from left to right.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder().filter(|&v| self.is_leaf(v)).collect()
    }

    /// Turns leaf `l` into an internal node with two leaf children.
    pub fn grow(&mut self, l: NodeId) -> Result<()> {
        if !self.contains(l) {
            return Err(Error::UnknownNode(l));
        }
        if !self.is_leaf(l) {
            return Err(Error::NotALeaf(l));
        }
        let left = NodeId::from_index(self.nodes.len());
        let right = NodeId::from_index(self.nodes.len() + 1);
        self.nodes.push(Node::leaf(Some(l)));
        self.nodes.push(Node::leaf(Some(l)));
        self.nodes[l.index()].children = Some((left, right));
        let mut v = Some(l);
        while let Some(u) = v {
            self.nodes[u.index()].size += 1;
            v = self.nodes[u.index()].parent;
        }
        Ok(())
    }

    /// Non-mutating form of [`grow`](Self::grow).
    pub fn grown(&self, l: NodeId) -> Result<Self> {
        let mut t = self.clone();
        t.grow(l)?;
        Ok(t)
    }

    /// Sum of depths of internal nodes.
    pub fn internal_path_length(&self) -> u64 {
        let mut total = 0u64;
        let mut stack = vec![(self.root, 0u64)];
        while let Some((v, d)) = stack.pop() {
            if let Some((l, r)) = self.children(v) {
                total += d;
                stack.push((r, d + 1));
                stack.push((l, d + 1));
            }
        }
        total
    }

    /// Largest leaf depth.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((v, d)) = stack.pop() {
            match self.children(v) {
                Some((l, r)) => {
                    stack.push((r, d + 1));
                    stack.push((l, d + 1));
                }
                None => best = best.max(d),
            }
        }
        best
    }

    /// Balanced-parenthesis word: a leaf is `()`, an internal node is
    /// `(` + word(left) + word(right) + `)`.
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity(2 * self.nodes.len());
        // `true` marks a pending close paren for an internal node.
        let mut stack = vec![(self.root, false)];
        while let Some((v, close)) = stack.pop() {
            if close {
                out.push(')');
                continue;
            }
            match self.children(v) {
                None => out.push_str("()"),
                Some((l, r)) => {
                    out.push('(');
                    stack.push((v, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
            }
        }
        out
    }

    pub fn decode(text: &str) -> Result<Self> {
        let text = text.trim_end();
        let bytes = text.as_bytes();
        let mut nodes: Vec<Node> = Vec::with_capacity(bytes.len() / 2);
        // Open nodes with the children attached so far.
        let mut stack: Vec<(NodeId, Vec<NodeId>)> = Vec::new();
        let mut root = None;
        for (pos, &ch) in bytes.iter().enumerate() {
            match ch {
                b'(' => {
                    if root.is_some() {
                        return Err(parse_err(pos, "trailing input after a complete tree"));
                    }
                    let parent = match stack.last() {
                        Some((p, kids)) => {
                            if kids.len() == 2 {
                                return Err(parse_err(pos, "node has more than two children"));
                            }
                            Some(*p)
                        }
                        None => None,
                    };
                    let id = NodeId::from_index(nodes.len());
                    nodes.push(Node::leaf(parent));
                    stack.push((id, Vec::new()));
                }
                b')' => {
                    let (id, kids) = stack.pop().ok_or_else(|| parse_err(pos, "unmatched ')'"))?;
                    match kids.as_slice() {
                        [] => {}
                        [l, r] => nodes[id.index()].children = Some((*l, *r)),
                        _ => return Err(parse_err(pos, "node has exactly one child")),
                    }
                    match stack.last_mut() {
                        Some((_, siblings)) => siblings.push(id),
                        None => root = Some(id),
                    }
                }
                _ => return Err(parse_err(pos, "unexpected character")),
            }
        }
        if !stack.is_empty() {
            return Err(parse_err(bytes.len(), "unbalanced input: missing ')'"));
        }
        let root = root.ok_or_else(|| parse_err(0, "empty input"))?;
        let mut t = PlaneBinaryTree { nodes, root };
        t.recompute_sizes();
        Ok(t)
    }

    /// Graphviz rendering. `leaf_mass` annotates leaves with a `mass` attribute.
    pub fn to_dot<F>(&self, leaf_mass: Option<F>) -> String
    where
        F: Fn(NodeId) -> f64,
    {
        let mut out = String::from("digraph tree {\n  node [shape=point];\n");
        for v in self.preorder() {
            match (self.children(v), &leaf_mass) {
                (Some(_), _) => out.push_str(&format!("  n{} [size={}];\n", v.0, self.subtree_size(v))),
                (None, Some(mass)) => {
                    out.push_str(&format!("  n{} [leaf=true, mass=\"{:e}\"];\n", v.0, mass(v)))
                }
                (None, None) => out.push_str(&format!("  n{} [leaf=true];\n", v.0)),
            }
        }
        for v in self.preorder() {
            if let Some((l, r)) = self.children(v) {
                out.push_str(&format!("  n{} -> n{};\n  n{} -> n{};\n", v.0, l.0, v.0, r.0));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Checks arity, link consistency, reachability and cached sizes.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTree(m));
        if !self.contains(self.root) {
            return bad("root out of range".into());
        }
        if self.parent(self.root).is_some() {
            return bad("root has a parent".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v.index()], true) {
                return bad(format!("node {v} reached twice"));
            }
            order.push(v);
            if let Some((l, r)) = self.children(v) {
                for c in [l, r] {
                    if !self.contains(c) {
                        return bad(format!("child {c} of {v} out of range"));
                    }
                    if self.parent(c) != Some(v) {
                        return bad(format!("child {c} does not point back to {v}"));
                    }
                }
                stack.push(r);
                stack.push(l);
            }
        }
        if order.len() != self.nodes.len() {
            return bad(format!("{} nodes unreachable from the root", self.nodes.len() - order.len()));
        }
        let mut leaves = 0usize;
        for &v in order.iter().rev() {
            let expect = match self.children(v) {
                Some((l, r)) => 1 + self.subtree_size(l) + self.subtree_size(r),
                None => {
                    leaves += 1;
                    0
                }
            };
            if self.subtree_size(v) != expect {
                return bad(format!("node {v} caches size {} but has {expect}", self.subtree_size(v)));
            }
        }
        if leaves != self.n_internal() + 1 {
            return bad(format!("{leaves} leaves for {} internal nodes", self.n_internal()));
        }
        Ok(())
    }

    /// Recomputes all cached subtree sizes from the links.
    fn recompute_sizes(&mut self) {
        let order: Vec<NodeId> = self.preorder().collect();
        for &v in order.iter().rev() {
            let s = match self.nodes[v.index()].children {
                Some((l, r)) => 1 + self.nodes[l.index()].size + self.nodes[r.index()].size,
                None => 0,
            };
            self.nodes[v.index()].size = s;
        }
    }

    /// Subtree sizes as cached, indexed by node id (test support for
    /// checking which entries `grow` touched).
    pub fn cached_sizes(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.size as usize).collect()
    }
}

fn parse_err(position: usize, message: &str) -> Error {
    Error::Parse { position, message: message.to_string() }
}

fn copy_subtree(
    nodes: &mut Vec<Node>,
    src: &PlaneBinaryTree,
    src_root: NodeId,
    parent: NodeId,
) -> NodeId {
    let top = NodeId::from_index(nodes.len());
    nodes.push(Node { children: None, parent: Some(parent), size: src.nodes[src_root.index()].size });
    let mut stack = vec![(src_root, top)];
    while let Some((v, dst)) = stack.pop() {
        if let Some((l, r)) = src.children(v) {
            let dl = NodeId::from_index(nodes.len());
            let dr = NodeId::from_index(nodes.len() + 1);
            nodes.push(Node { children: None, parent: Some(dst), size: src.nodes[l.index()].size });
            nodes.push(Node { children: None, parent: Some(dst), size: src.nodes[r.index()].size });
            nodes[dst.index()].children = Some((dl, dr));
            stack.push((r, dr));
            stack.push((l, dl));
        }
    }
    top
}

pub struct Preorder<'a> {
    tree: &'a PlaneBinaryTree,
    stack: Vec<NodeId>,
}

impl Iterator for Preorder<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let v = self.stack.pop()?;
        if let Some((l, r)) = self.tree.children(v) {
            self.stack.push(r);
            self.stack.push(l);
        }
        Some(v)
    }
}

impl PartialEq for PlaneBinaryTree {
    fn eq(&self, other: &Self) -> bool {
        if self.n_internal() != other.n_internal() {
            return false;
        }
        self.preorder()
            .zip(other.preorder())
            .all(|(u, v)| self.is_leaf(u) == other.is_leaf(v))
    }
}

impl Eq for PlaneBinaryTree {}

impl Hash for PlaneBinaryTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n_internal().hash(state);
        for v in self.preorder() {
            self.is_leaf(v).hash(state);
        }
    }
}

impl fmt::Display for PlaneBinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl FromStr for PlaneBinaryTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::decode(s)
    }
}

/// Every tree of size `n`, for `n` up to [`ENUMERATION_CAP`].
pub fn enumerate_all(n: usize) -> Result<Vec<PlaneBinaryTree>> {
    enumerate_all_with_cap(n, ENUMERATION_CAP)
}

pub fn enumerate_all_with_cap(n: usize, cap: usize) -> Result<Vec<PlaneBinaryTree>> {
    if n > cap {
        return Err(Error::AboveCap { what: "brute-force enumeration", n, cap });
    }
    let mut by_size: Vec<Vec<PlaneBinaryTree>> = vec![vec![PlaneBinaryTree::leaf()]];
    for m in 1..=n {
        let mut level = Vec::new();
        for a in 0..m {
            let b = m - 1 - a;
            for l in &by_size[a] {
                for r in &by_size[b] {
                    level.push(PlaneBinaryTree::join(l, r));
                }
            }
        }
        by_size.push(level);
    }
    Ok(by_size.swap_remove(n))
}

/// Uniform tree of size `n` by Rémy's insertion algorithm: each step picks
/// one of the `2k + 1` nodes uniformly, splices a new internal node above
/// it and hangs a fresh leaf on a uniformly chosen side.
pub fn remy_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PlaneBinaryTree {
    let mut t = PlaneBinaryTree {
        nodes: Vec::with_capacity(2 * n + 1),
        root: NodeId(0),
    };
    t.nodes.push(Node::leaf(None));
    for _ in 0..n {
        let u = NodeId::from_index(rng.random_range(0..t.nodes.len()));
        let w = NodeId::from_index(t.nodes.len());
        let fresh = NodeId::from_index(t.nodes.len() + 1);
        let up = t.nodes[u.index()].parent;
        let children = if rng.random::<bool>() { (u, fresh) } else { (fresh, u) };
        t.nodes.push(Node { children: Some(children), parent: up, size: 0 });
        t.nodes.push(Node::leaf(Some(w)));
        t.nodes[u.index()].parent = Some(w);
        match up {
            None => t.root = w,
            Some(p) => {
                let slot = t.nodes[p.index()].children.as_mut().expect("parent is internal");
                if slot.0 == u {
                    slot.0 = w;
                } else {
                    slot.1 = w;
                }
            }
        }
    }
    t.recompute_sizes();
    t
}
