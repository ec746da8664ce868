//! Simon factorization forests.
//!
//! Nodes live in an arena in preorder, so node ids grow with the position of
//! the opening bracket and the descendants of `t` are exactly the ids
//! `t..=last_descendant(t)`. Positions are 1-based.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Elem, Letter, Morphism, Word};
use crate::machines::Multicontext;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("invalid forest at node {path:?}: {reason}")]
    Violation { path: Vec<usize>, reason: String },
    #[error("forest syntax error at character {at}: {reason}")]
    Syntax { at: usize, reason: String },
    #[error("unknown letter {0:?} in forest")]
    UnknownLetter(String),
    #[error("node path {0:?} does not exist")]
    BadPath(Vec<usize>),
    #[error("frontiers do not partition the positions: {0}")]
    PartitionViolation(String),
    #[error("node set is not independent")]
    NotIndependent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeData {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    /// Span `[start, end)` in 0-based letter offsets.
    start: usize,
    end: usize,
    image: Elem,
    depth: usize,
    height: usize,
    last_descendant: NodeId,
    frontier: Vec<usize>,
}

/// A μ-forest of a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    morphism: Arc<Morphism>,
    word: Word,
    nodes: Vec<NodeData>,
}

/// Tree shape used while building.
enum Shape {
    Leaf(usize),
    Inner(Vec<Shape>),
}

impl Forest {
    fn from_shape(morphism: Arc<Morphism>, word: Word, shape: Option<Shape>) -> Forest {
        let mut forest = Forest { morphism, word, nodes: Vec::new() };
        if let Some(shape) = shape {
            forest.push(&shape, None, 0);
        }
        forest
    }

    fn push(&mut self, shape: &Shape, parent: Option<NodeId>, depth: usize) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(NodeData {
            parent,
            children: Vec::new(),
            start: 0,
            end: 0,
            image: 0,
            depth,
            height: 1,
            last_descendant: id,
            frontier: Vec::new(),
        });
        match shape {
            Shape::Leaf(p) => {
                let node = &mut self.nodes[id];
                node.start = *p;
                node.end = p + 1;
                node.image = self.morphism.letter_image(self.word[*p]);
                node.frontier = vec![p + 1];
            }
            Shape::Inner(children) => {
                let ids: Vec<NodeId> = children.iter().map(|c| self.push(c, Some(id), depth + 1)).collect();
                let monoid = self.morphism.monoid();
                let image = monoid.product_of(ids.iter().map(|&c| self.nodes[c].image));
                let first = &self.nodes[ids[0]];
                let last = &self.nodes[*ids.last().unwrap()];
                let mut frontier = first.frontier.clone();
                if ids.len() > 1 {
                    frontier.extend_from_slice(&last.frontier);
                }
                let node = NodeData {
                    parent,
                    start: first.start,
                    end: last.end,
                    image,
                    depth,
                    height: 1 + ids.iter().map(|&c| self.nodes[c].height).max().unwrap(),
                    last_descendant: self.nodes.len() - 1,
                    frontier,
                    children: ids,
                };
                self.nodes[id] = node;
            }
        }
        id
    }

    pub fn morphism(&self) -> &Arc<Morphism> {
        &self.morphism
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    /// `None` for the empty forest of the empty word.
    pub fn root(&self) -> Option<NodeId> {
        (!self.nodes.is_empty()).then_some(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    /// Height, with leaves of height 1 and the empty forest of height 0.
    pub fn height(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.height)
    }

    pub fn node_height(&self, t: NodeId) -> usize {
        self.nodes[t].height
    }

    pub fn children(&self, t: NodeId) -> &[NodeId] {
        &self.nodes[t].children
    }

    pub fn parent(&self, t: NodeId) -> Option<NodeId> {
        self.nodes[t].parent
    }

    pub fn is_leaf(&self, t: NodeId) -> bool {
        self.nodes[t].children.is_empty()
    }

    /// Depth of `t`, the root having depth 0.
    pub fn depth(&self, t: NodeId) -> usize {
        self.nodes[t].depth
    }

    pub fn image(&self, t: NodeId) -> Elem {
        self.nodes[t].image
    }

    /// Span of `t` as 0-based offsets `[start, end)`.
    pub fn span(&self, t: NodeId) -> (usize, usize) {
        (self.nodes[t].start, self.nodes[t].end)
    }

    pub fn node_word(&self, t: NodeId) -> &[Letter] {
        &self.word[self.nodes[t].start..self.nodes[t].end]
    }

    pub fn last_descendant(&self, t: NodeId) -> NodeId {
        self.nodes[t].last_descendant
    }

    /// Non-strict ancestor test.
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        a <= b && b <= self.nodes[a].last_descendant
    }

    /// Index of `t` among its siblings.
    pub fn child_index(&self, t: NodeId) -> Option<usize> {
        let p = self.nodes[t].parent?;
        self.nodes[p].children.iter().position(|&c| c == t)
    }

    pub fn left_sibling(&self, t: NodeId) -> Option<NodeId> {
        let p = self.nodes[t].parent?;
        let i = self.child_index(t)?;
        i.checked_sub(1).map(|j| self.nodes[p].children[j])
    }

    pub fn right_sibling(&self, t: NodeId) -> Option<NodeId> {
        let p = self.nodes[t].parent?;
        let i = self.child_index(t)?;
        self.nodes[p].children.get(i + 1).copied()
    }

    /// Child-index path from the root.
    pub fn path(&self, t: NodeId) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = t;
        while let Some(i) = self.child_index(cur) {
            path.push(i);
            cur = self.nodes[cur].parent.unwrap();
        }
        path.reverse();
        path
    }

    pub fn node_at(&self, path: &[usize]) -> Result<NodeId, ForestError> {
        let mut cur = self.root().ok_or_else(|| ForestError::BadPath(path.to_vec()))?;
        for &i in path {
            cur = *self.nodes[cur].children.get(i).ok_or_else(|| ForestError::BadPath(path.to_vec()))?;
        }
        Ok(cur)
    }

    /// Nodes with both a left and a right sibling, in preorder.
    pub fn iterable_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&t| self.is_iterable(t)).collect()
    }

    pub fn is_iterable(&self, t: NodeId) -> bool {
        self.left_sibling(t).is_some() && self.right_sibling(t).is_some()
    }

    /// The skeleton `Ske(t) = {t} ∪ Ske(first child) ∪ Ske(last child)`.
    pub fn skeleton(&self, t: NodeId) -> Vec<NodeId> {
        let mut out = vec![t];
        let children = &self.nodes[t].children;
        if let (Some(&first), Some(&last)) = (children.first(), children.last()) {
            out.extend(self.skeleton(first));
            if last != first {
                out.extend(self.skeleton(last));
            }
        }
        out.sort_unstable();
        out
    }

    /// 1-based positions of the leaves of `Ske(t)`, increasing.
    pub fn frontier(&self, t: NodeId) -> &[usize] {
        &self.nodes[t].frontier
    }

    pub fn frontier_word(&self, t: NodeId) -> Word {
        self.nodes[t].frontier.iter().map(|&p| self.word[p - 1]).collect()
    }

    /// Checks that the frontiers of `It(F) ∪ {F}` partition the positions
    /// and returns the owner `frm(i)` of each position `i` (index `i − 1`).
    pub fn partition_check(&self) -> Result<Vec<NodeId>, ForestError> {
        let mut owner: Vec<Option<NodeId>> = vec![None; self.word.len()];
        let owners = self.root().into_iter().chain(self.iterable_nodes());
        for t in owners {
            for &p in self.frontier(t) {
                if let Some(other) = owner[p - 1] {
                    return Err(ForestError::PartitionViolation(format!(
                        "position {p} lies in the frontiers of {:?} and {:?}",
                        self.path(other),
                        self.path(t)
                    )));
                }
                owner[p - 1] = Some(t);
            }
        }
        owner
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                o.ok_or_else(|| ForestError::PartitionViolation(format!("position {} is not covered", i + 1)))
            })
            .collect()
    }

    /// Checks the forest laws: spans, cached images and the idempotent rule
    /// for nodes with at least three children.
    pub fn validate(&self) -> Result<(), ForestError> {
        let violation = |t: NodeId, reason: String| ForestError::Violation { path: self.path(t), reason };
        let Some(root) = self.root() else {
            return if self.word.is_empty() {
                Ok(())
            } else {
                Err(ForestError::Violation { path: vec![], reason: "empty forest of a nonempty word".into() })
            };
        };
        let monoid = self.morphism.monoid();
        if self.nodes[root].start != 0 || self.nodes[root].end != self.word.len() {
            return Err(violation(root, "the root does not span the word".into()));
        }
        for t in self.nodes() {
            let node = &self.nodes[t];
            if node.children.is_empty() {
                if node.end != node.start + 1 {
                    return Err(violation(t, "a leaf must span one letter".into()));
                }
                if node.image != self.morphism.letter_image(self.word[node.start]) {
                    return Err(violation(t, "leaf image differs from its letter image".into()));
                }
                continue;
            }
            let mut at = node.start;
            for &c in &node.children {
                if self.nodes[c].start != at || self.nodes[c].parent != Some(t) {
                    return Err(violation(t, "children do not tile the node".into()));
                }
                at = self.nodes[c].end;
            }
            if at != node.end {
                return Err(violation(t, "children do not tile the node".into()));
            }
            let image = monoid.product_of(node.children.iter().map(|&c| self.nodes[c].image));
            if image != node.image {
                return Err(violation(t, "cached image is inconsistent".into()));
            }
            if node.children.len() >= 3 {
                let e = self.nodes[node.children[0]].image;
                if node.children.iter().any(|&c| self.nodes[c].image != e) {
                    return Err(violation(
                        t,
                        "children of a node with at least 3 children have different images".into(),
                    ));
                }
                if !monoid.is_idempotent(e) {
                    return Err(violation(t, format!("children image {} is not idempotent", monoid.name(e))));
                }
            }
        }
        Ok(())
    }

    /// Checks that this is a forest of `w`.
    pub fn validate_for(&self, w: &[Letter]) -> Result<(), ForestError> {
        if self.word != w {
            return Err(ForestError::Violation { path: vec![], reason: "the forest factors another word".into() });
        }
        self.validate()
    }

    /// `lin(F, t) = μ(left of t)⟦w[fr(t)]⟧μ(right of t)`.
    pub fn linearize(&self, t: NodeId) -> Multicontext {
        let root = self.root().expect("nonempty forest");
        self.linearize_within(self.span(root), &[t])
    }

    /// `lin(F, T)` for a set of pairwise non-nested nodes: each node becomes
    /// a hole over its frontier word and everything else is multiplied out.
    /// The empty set gives `μ(F)`.
    pub fn linearize_set(&self, nodes: &[NodeId]) -> Result<Multicontext, ForestError> {
        let Some(root) = self.root() else {
            return Ok(Multicontext::constant(self.morphism.monoid().identity()));
        };
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if self.is_ancestor(pair[0], pair[1]) {
                return Err(ForestError::NotIndependent);
            }
        }
        Ok(self.linearize_within(self.span(root), &sorted))
    }

    /// Linearization of non-nested nodes (sorted by id) inside a span.
    pub fn linearize_within(&self, span: (usize, usize), nodes: &[NodeId]) -> Multicontext {
        let monoid = self.morphism.monoid();
        let mut at = span.0;
        let mut mc = Multicontext::constant(monoid.identity());
        for &t in nodes {
            let (s, e) = self.span(t);
            mc =
                mc.then_elem(monoid, self.morphism.eval(&self.word[at..s])).then_hole(monoid, self.frontier_word(t), 1);
            at = e;
        }
        mc.then_elem(monoid, self.morphism.eval(&self.word[at..span.1]))
    }

    /// Whether a linearization has the iterator form `m₀Π(eᵢ⟦uᵢ⟧eᵢmᵢ)` with
    /// words of length at most `bound`.
    pub fn is_iterator_form(&self, mc: &Multicontext, bound: usize) -> bool {
        let monoid = self.morphism.monoid();
        let elems = mc.elems();
        mc.holes().iter().enumerate().all(|(i, h)| {
            let e = self.morphism.eval(&h.word);
            monoid.is_idempotent(e)
                && h.word.len() <= bound
                && monoid.mul(elems[i], e) == elems[i]
                && monoid.mul(e, elems[i + 1]) == elems[i + 1]
        })
    }

    /// The bracketed-word form, e.g. `⟨aa⟩⟨c⟨a⟨cbbcb⟩⟩bbc⟩`.
    pub fn to_brackets(&self) -> String {
        let mut out = String::new();
        if let Some(root) = self.root() {
            if self.is_leaf(root) {
                self.write_item(root, &mut out);
            } else {
                for &c in self.children(root) {
                    self.write_item(c, &mut out);
                }
            }
        }
        out
    }

    fn write_item(&self, t: NodeId, out: &mut String) {
        if self.is_leaf(t) {
            out.push_str(&self.morphism.alphabet()[self.word[self.nodes[t].start]]);
        } else {
            out.push('⟨');
            for &c in self.children(t) {
                self.write_item(c, out);
            }
            out.push('⟩');
        }
    }

    /// Parses a bracketed word (`⟨⟩` or `<>`), letters having single-character
    /// names, and validates the result.
    pub fn parse(morphism: Arc<Morphism>, text: &str) -> Result<Forest, ForestError> {
        let forest = Self::parse_unchecked(morphism, text)?;
        forest.validate()?;
        Ok(forest)
    }

    /// Parses without checking the forest laws.
    pub fn parse_unchecked(morphism: Arc<Morphism>, text: &str) -> Result<Forest, ForestError> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut word = Vec::new();
        let mut stack: Vec<Vec<Shape>> = vec![Vec::new()];
        for (at, &c) in chars.iter().enumerate() {
            match c {
                '⟨' | '<' => stack.push(Vec::new()),
                '⟩' | '>' => {
                    let items = stack.pop().unwrap();
                    if stack.is_empty() {
                        return Err(ForestError::Syntax { at, reason: "unbalanced closing bracket".into() });
                    }
                    if items.is_empty() {
                        return Err(ForestError::Syntax { at, reason: "empty brackets".into() });
                    }
                    stack.last_mut().unwrap().push(Shape::Inner(items));
                }
                _ => {
                    let name = c.to_string();
                    let a = morphism.letter_by_name(&name).ok_or(ForestError::UnknownLetter(name))?;
                    stack.last_mut().unwrap().push(Shape::Leaf(word.len()));
                    word.push(a);
                }
            }
        }
        if stack.len() != 1 {
            return Err(ForestError::Syntax { at: chars.len(), reason: "unclosed bracket".into() });
        }
        let mut items = stack.pop().unwrap();
        let shape = match items.len() {
            0 => None,
            1 if matches!(items[0], Shape::Leaf(_)) => items.pop(),
            _ => Some(Shape::Inner(items)),
        };
        Ok(Forest::from_shape(morphism, word, shape))
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let monoid = self.morphism.monoid();
        let mut out = String::from("digraph forest {\n  node [shape=box, fontname=\"monospace\"];\n");
        for t in self.nodes() {
            let label = if self.is_leaf(t) {
                format!("{} @{}", self.morphism.alphabet()[self.word[self.nodes[t].start]], self.nodes[t].start + 1)
            } else {
                format!("{} [{}..{}]", monoid.name(self.image(t)), self.nodes[t].start + 1, self.nodes[t].end)
            };
            let style = if self.is_iterable(t) { ", style=filled, fillcolor=lightblue" } else { "" };
            let _ = writeln!(out, "  n{t} [label=\"{label}\"{style}];");
            for &c in self.children(t) {
                let _ = writeln!(out, "  n{t} -> n{c};");
            }
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_brackets())
    }
}

/// A forest of `w` of minimal height (at most `3|M|`).
///
/// `best[i][j]` is the least height of a forest of `w[i..j)`. A node over
/// `[i, j)` has either two children, or at least two children all with the
/// idempotent image `μ(w[i..j))`; `chain2[i][j]` is the least height of the
/// tallest block in a split of `[i, j)` into at least two such blocks and
/// `chain1` allows a single block. Ties prefer long chains, then the
/// leftmost split.
pub fn build_forest(morphism: Arc<Morphism>, w: &[Letter]) -> Forest {
    let n = w.len();
    if n == 0 {
        return Forest::from_shape(morphism, Vec::new(), None);
    }
    let monoid = morphism.monoid();
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut image = vec![0; (n + 1) * (n + 1)];
    for i in 0..n {
        let mut acc = monoid.identity();
        image[idx(i, i)] = acc;
        for j in i..n {
            acc = monoid.mul(acc, morphism.letter_image(w[j]));
            image[idx(i, j + 1)] = acc;
        }
    }
    const INF: usize = usize::MAX / 2;
    #[derive(Clone, Copy)]
    enum Choice {
        Leaf,
        Binary(usize),
        Chain,
    }
    let mut best = vec![INF; (n + 1) * (n + 1)];
    let mut choice = vec![Choice::Leaf; (n + 1) * (n + 1)];
    let mut chain2 = vec![INF; (n + 1) * (n + 1)];
    let mut chain2_split = vec![0; (n + 1) * (n + 1)];
    let mut chain1 = vec![INF; (n + 1) * (n + 1)];
    let mut chain1_single = vec![true; (n + 1) * (n + 1)];
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            if len == 1 {
                best[idx(i, j)] = 1;
                chain1[idx(i, j)] = 1;
                continue;
            }
            let e = image[idx(i, j)];
            if monoid.is_idempotent(e) {
                for q in i + 1..j {
                    if image[idx(i, q)] == e && image[idx(q, j)] == e {
                        let h = best[idx(i, q)].max(chain1[idx(q, j)]);
                        if h < chain2[idx(i, j)] {
                            chain2[idx(i, j)] = h;
                            chain2_split[idx(i, j)] = q;
                        }
                    }
                }
            }
            let mut h = chain2[idx(i, j)];
            let mut c = Choice::Chain;
            for q in i + 1..j {
                let b = best[idx(i, q)].max(best[idx(q, j)]);
                if b < h {
                    h = b;
                    c = Choice::Binary(q);
                }
            }
            best[idx(i, j)] = h + 1;
            choice[idx(i, j)] = c;
            if best[idx(i, j)] <= chain2[idx(i, j)] {
                chain1[idx(i, j)] = best[idx(i, j)];
            } else {
                chain1[idx(i, j)] = chain2[idx(i, j)];
                chain1_single[idx(i, j)] = false;
            }
        }
    }

    struct Tables<'a> {
        n: usize,
        choice: &'a [Choice],
        chain2_split: &'a [usize],
        chain1_single: &'a [bool],
    }
    impl Tables<'_> {
        fn idx(&self, i: usize, j: usize) -> usize {
            i * (self.n + 1) + j
        }
        fn node(&self, i: usize, j: usize) -> Shape {
            match self.choice[self.idx(i, j)] {
                Choice::Leaf => Shape::Leaf(i),
                Choice::Binary(q) => Shape::Inner(vec![self.node(i, q), self.node(q, j)]),
                Choice::Chain => {
                    let mut blocks = Vec::new();
                    self.chain(i, j, &mut blocks);
                    Shape::Inner(blocks)
                }
            }
        }
        fn chain(&self, i: usize, j: usize, out: &mut Vec<Shape>) {
            let q = self.chain2_split[self.idx(i, j)];
            out.push(self.node(i, q));
            if self.chain1_single[self.idx(q, j)] {
                out.push(self.node(q, j));
            } else {
                self.chain(q, j, out);
            }
        }
    }
    let tables = Tables { n, choice: &choice, chain2_split: &chain2_split, chain1_single: &chain1_single };
    let shape = tables.node(0, n);
    Forest::from_shape(morphism, w.to_vec(), Some(shape))
}
