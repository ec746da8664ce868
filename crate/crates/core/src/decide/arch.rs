//! Architectures of independent node sets and their counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{for_each_independent, is_independent, prod_nodes, within_simon_bound, DecideError};
use crate::algebra::{Elem, Letter, Word};
use crate::combin::{no_close_pair_count, words_up_to};
use crate::forest::{build_forest, Forest, NodeId};
use crate::machines::NestedMachine;
use crate::Natural;

/// The type of a node inside a flat view: its depth (the view root has
/// depth 1) and its linearization `left⟦frontier word⟧right`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LeafEntry {
    pub depth: usize,
    pub left: Elem,
    pub word: Word,
    pub right: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchItem {
    /// A forest reduced to one leaf.
    Letter(Letter),
    /// A run of children without selected nodes, by its image.
    Image(Elem),
    /// A child holding selected nodes, by its own architecture.
    Boxed(Vec<ArchItem>),
    /// Selected nodes strictly between the first and last child, by type
    /// (sorted).
    Leaf(Vec<LeafEntry>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Architecture(pub Vec<ArchItem>);

fn items_rank(items: &[ArchItem]) -> usize {
    items
        .iter()
        .map(|i| match i {
            ArchItem::Letter(_) | ArchItem::Image(_) => 0,
            ArchItem::Boxed(b) => items_rank(b),
            ArchItem::Leaf(e) => e.len(),
        })
        .sum()
}

impl Architecture {
    /// Number of selected nodes.
    pub fn rank(&self) -> usize {
        items_rank(&self.0)
    }
}

/// Children `lo..=hi` of `node`, seen as a forest of their own.
#[derive(Debug, Clone, Copy)]
struct View {
    node: NodeId,
    lo: usize,
    hi: usize,
}

impl View {
    fn whole(forest: &Forest, node: NodeId) -> View {
        View { node, lo: 0, hi: forest.children(node).len() - 1 }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    fn child(&self, forest: &Forest, i: usize) -> NodeId {
        forest.children(self.node)[i]
    }

    fn span(&self, forest: &Forest) -> (usize, usize) {
        (forest.span(self.child(forest, self.lo)).0, forest.span(self.child(forest, self.hi)).1)
    }

    /// Iterable nodes under children `from..=to`, in preorder.
    fn nodes_under(&self, forest: &Forest, from: usize, to: usize) -> Vec<NodeId> {
        if from > to {
            return Vec::new();
        }
        let first = self.child(forest, from);
        let last = forest.last_descendant(self.child(forest, to));
        (first..=last).filter(|&t| forest.is_iterable(t)).collect()
    }

    fn middle(&self, forest: &Forest) -> Vec<NodeId> {
        if self.hi < self.lo + 2 {
            return Vec::new();
        }
        self.nodes_under(forest, self.lo + 1, self.hi - 1)
    }

    fn entry(&self, forest: &Forest, t: NodeId) -> LeafEntry {
        let mu = forest.morphism();
        let (vs, ve) = self.span(forest);
        let (s, e) = forest.span(t);
        let w = forest.word();
        LeafEntry {
            depth: forest.depth(t) + 1 - forest.depth(self.node),
            left: mu.eval(&w[vs..s]),
            word: forest.frontier_word(t),
            right: mu.eval(&w[e..ve]),
        }
    }

    fn under(&self, forest: &Forest, i: usize, t: NodeId) -> bool {
        forest.is_ancestor(self.child(forest, i), t)
    }
}

fn arch_view(forest: &Forest, view: View, nodes: &[NodeId]) -> Vec<ArchItem> {
    if view.is_empty() {
        return Vec::new();
    }
    if nodes.is_empty() {
        let (s, e) = view.span(forest);
        return vec![ArchItem::Image(forest.morphism().eval(&forest.word()[s..e]))];
    }
    let (first, rest): (Vec<_>, Vec<_>) = nodes.iter().partition(|&&t| view.under(forest, view.lo, t));
    if !first.is_empty() {
        let mut out = vec![ArchItem::Boxed(arch_node(forest, view.child(forest, view.lo), &first))];
        out.extend(arch_view(forest, View { lo: view.lo + 1, ..view }, &rest));
        return out;
    }
    let (last, rest): (Vec<_>, Vec<_>) = nodes.iter().partition(|&&t| view.under(forest, view.hi, t));
    if !last.is_empty() {
        let mut out = arch_view(forest, View { hi: view.hi - 1, ..view }, &rest);
        out.push(ArchItem::Boxed(arch_node(forest, view.child(forest, view.hi), &last)));
        return out;
    }
    let mut entries: Vec<LeafEntry> = nodes.iter().map(|&t| view.entry(forest, t)).collect();
    entries.sort();
    vec![ArchItem::Leaf(entries)]
}

fn arch_node(forest: &Forest, node: NodeId, nodes: &[NodeId]) -> Vec<ArchItem> {
    if forest.is_leaf(node) {
        return vec![ArchItem::Letter(forest.word()[forest.span(node).0])];
    }
    arch_view(forest, View::whole(forest, node), nodes)
}

/// `arch(F, T)` for an independent set `T`.
pub fn architecture_of(forest: &Forest, nodes: &[NodeId]) -> Result<Architecture, DecideError> {
    if !is_independent(forest, nodes) {
        return Err(DecideError::NotIndependent);
    }
    let Some(root) = forest.root() else {
        return Ok(Architecture(Vec::new()));
    };
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    Ok(Architecture(arch_node(forest, root, &sorted)))
}

/// `count_A(F)`: the number of independent sets of `F` with architecture
/// `A`, by enumeration.
pub fn count_architecture(forest: &Forest, arch: &Architecture) -> Natural {
    let Some(root) = forest.root() else {
        return Natural::from(arch.0.is_empty());
    };
    let mut count = 0;
    for_each_independent(forest, &forest.iterable_nodes(), arch.rank(), &mut |t| {
        if arch_node(forest, root, t) == arch.0 {
            count += 1;
        }
    });
    count
}

fn count_leaf(forest: &Forest, view: View, entries: &[LeafEntry]) -> Natural {
    let mut count = 0;
    for_each_typed(forest, view, &view.middle(forest), entries, &mut |_| count += 1);
    count
}

/// Visits the independent subsets of `candidates` whose sorted types in
/// `view` are `entries`.
fn for_each_typed(
    forest: &Forest,
    view: View,
    candidates: &[NodeId],
    entries: &[LeafEntry],
    visit: &mut dyn FnMut(&[NodeId]),
) {
    let typed: Vec<NodeId> = candidates.iter().copied().filter(|&t| entries.contains(&view.entry(forest, t))).collect();
    for_each_independent(forest, &typed, entries.len(), &mut |t| {
        let mut types: Vec<LeafEntry> = t.iter().map(|&x| view.entry(forest, x)).collect();
        types.sort();
        if types == entries {
            visit(t);
        }
    });
}

fn count_items(
    forest: &Forest,
    view: View,
    items: &[ArchItem],
    leaf: &dyn Fn(View, &[LeafEntry]) -> Natural,
) -> Natural {
    match items {
        [] => Natural::from(view.is_empty()),
        _ if view.is_empty() => 0,
        _ if items_rank(items) == 0 => Natural::from(arch_view(forest, view, &[]) == items),
        [ArchItem::Boxed(b), rest @ ..] if items_rank(b) > 0 => {
            let c = view.child(forest, view.lo);
            let inner = count_node(forest, c, b, leaf);
            if inner == 0 {
                return 0;
            }
            inner * count_items(forest, View { lo: view.lo + 1, ..view }, rest, leaf)
        }
        [rest @ .., ArchItem::Boxed(b)] if items_rank(b) > 0 => {
            let c = view.child(forest, view.hi);
            let inner = count_node(forest, c, b, leaf);
            if inner == 0 {
                return 0;
            }
            inner * count_items(forest, View { hi: view.hi - 1, ..view }, rest, leaf)
        }
        [ArchItem::Leaf(entries)] => leaf(view, entries),
        _ => 0,
    }
}

fn count_node(
    forest: &Forest,
    node: NodeId,
    items: &[ArchItem],
    leaf: &dyn Fn(View, &[LeafEntry]) -> Natural,
) -> Natural {
    if forest.is_leaf(node) {
        return Natural::from(arch_node(forest, node, &[]) == items);
    }
    count_items(forest, View::whole(forest, node), items, leaf)
}

/// `count_A(F)` by peeling boxed children off both ends, enumerating only
/// inside flat views.
pub fn count_architecture_recursive(forest: &Forest, arch: &Architecture) -> Natural {
    let Some(root) = forest.root() else {
        return Natural::from(arch.0.is_empty());
    };
    count_node(forest, root, &arch.0, &|view, entries| count_leaf(forest, view, entries))
}

/// `count_A(F) = count′_A(F) + count″_A(F)`, where `count′` is a product of
/// polynomials in the sizes of node classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountSplit {
    /// `count_A(F)` by enumeration.
    pub count: Natural,
    pub prime: Natural,
    pub second: Natural,
    /// Whether every counting claim checked along the way held: the
    /// excluded nodes fit in the prefix, and close-pair-free subsets of the
    /// remaining nodes are independent and counted by `P_r`.
    pub claims_hold: bool,
}

impl CountSplit {
    pub fn holds(&self) -> bool {
        self.claims_hold && self.count == self.prime + self.second
    }
}

#[derive(Clone, Copy)]
struct Part {
    prime: Natural,
    second: Natural,
    ok: bool,
}

impl Part {
    fn constant(c: Natural) -> Part {
        Part { prime: c, second: 0, ok: true }
    }

    fn times(self, other: Part) -> Part {
        Part {
            prime: self.prime * other.prime,
            second: self.prime * other.second + self.second * other.prime + self.second * other.second,
            ok: self.ok && other.ok,
        }
    }
}

fn split_leaf(forest: &Forest, view: View, entries: &[LeafEntry]) -> Part {
    let Some(tau) = entries.first() else {
        return Part::constant(1);
    };
    let r = entries.iter().take_while(|e| *e == tau).count();
    let rest = &entries[r..];
    let k1 = rest.len();
    let middle = view.middle(forest);
    let a: Vec<NodeId> = middle.iter().copied().filter(|&t| view.entry(forest, t) == *tau).collect();
    let inner = split_leaf(forest, view, rest);
    if a.len() < 3 * k1 + 2 * r {
        return Part { prime: 0, second: count_leaf(forest, view, entries), ok: inner.ok };
    }
    let g1 = no_close_pair_count(a.len() - 3 * k1, r);
    let mut g2 = 0;
    let mut ok = inner.ok;
    for_each_typed(forest, view, &middle, rest, &mut |t1| {
        let a_t1: Vec<NodeId> =
            a.iter().copied().filter(|&t| t1.iter().all(|&s| !super::dependent_pair(forest, s, t))).collect();
        let excluded = a.len() - a_t1.len();
        if excluded > 3 * k1 {
            ok = false;
        }
        let b = (3 * k1).saturating_sub(excluded).min(a_t1.len());
        let (mut free, mut close, mut meets_b) = (0, 0, 0);
        for_each_independent(forest, &a_t1, r, &mut |t2| {
            // a_t1 is sorted, so positions in it follow the node order.
            let idx: Vec<usize> = t2.iter().map(|t| a_t1.binary_search(t).unwrap()).collect();
            if idx[0] < b {
                meets_b += 1;
            } else if idx.windows(2).any(|p| p[1] == p[0] + 1) {
                close += 1;
            } else {
                free += 1;
            }
        });
        if free != no_close_pair_count(a_t1.len() - b, r) || free != g1 {
            ok = false;
        }
        g2 += close + meets_b;
    });
    Part { prime: g1 * inner.prime, second: g1 * inner.second + g2, ok }
}

fn split_items(forest: &Forest, view: View, items: &[ArchItem]) -> Part {
    let recursive =
        |items: &[ArchItem]| Part::constant(count_items(forest, view, items, &|v, e| count_leaf(forest, v, e)));
    match items {
        _ if view.is_empty() || items_rank(items) == 0 => recursive(items),
        [ArchItem::Boxed(b), rest @ ..] if items_rank(b) > 0 => {
            let inner = split_node(forest, view.child(forest, view.lo), b);
            inner.times(split_items(forest, View { lo: view.lo + 1, ..view }, rest))
        }
        [rest @ .., ArchItem::Boxed(b)] if items_rank(b) > 0 => {
            let inner = split_node(forest, view.child(forest, view.hi), b);
            inner.times(split_items(forest, View { hi: view.hi - 1, ..view }, rest))
        }
        [ArchItem::Leaf(entries)] if view.hi >= view.lo + 2 => split_leaf(forest, view, entries),
        _ => Part::constant(0),
    }
}

fn split_node(forest: &Forest, node: NodeId, items: &[ArchItem]) -> Part {
    if forest.is_leaf(node) {
        return Part::constant(Natural::from(arch_node(forest, node, &[]) == items));
    }
    split_items(forest, View::whole(forest, node), items)
}

/// Splits `count_A(F)` into `count′_A(F) + count″_A(F)`.
pub fn count_split(forest: &Forest, arch: &Architecture) -> CountSplit {
    let count = count_architecture(forest, arch);
    let part = match forest.root() {
        None => Part::constant(Natural::from(arch.0.is_empty())),
        Some(root) => split_node(forest, root, &arch.0),
    };
    CountSplit { count, prime: part.prime, second: part.second, claims_hold: part.ok }
}

/// Known productions of architectures, each taken from the first
/// representative `(F, T)` seen.
#[derive(Debug, Clone, Default)]
pub struct RepresentativeIndex {
    prods: BTreeMap<Architecture, Natural>,
    conflicts: Vec<(Architecture, Natural, Natural)>,
}

impl RepresentativeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Indexes the forests built from every word of length at most
    /// `max_len`.
    pub fn build(machine: &NestedMachine, max_len: usize) -> Self {
        let mut index = Self::new();
        let mu = machine.morphism();
        for w in words_up_to(mu.alphabet_len(), max_len) {
            index.insert_forest(machine, &build_forest(mu.clone(), &w));
        }
        index
    }

    /// Adds every independent set of `forest` of the machine's level.
    /// A second representative with another production is recorded as a
    /// conflict.
    pub fn insert_forest(&mut self, machine: &NestedMachine, forest: &Forest) {
        if forest.validate().is_err() || !within_simon_bound(forest) {
            return;
        }
        let Some(root) = forest.root() else { return };
        for_each_independent(forest, &forest.iterable_nodes(), machine.level(), &mut |t| {
            let arch = Architecture(arch_node(forest, root, t));
            let p = prod_nodes(machine, forest, t);
            match self.prods.get(&arch) {
                Some(&q) if q != p => self.conflicts.push((arch, q, p)),
                Some(_) => {}
                None => {
                    self.prods.insert(arch, p);
                }
            }
        });
    }

    pub fn get(&self, arch: &Architecture) -> Option<Natural> {
        self.prods.get(arch).copied()
    }

    pub fn len(&self) -> usize {
        self.prods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prods.is_empty()
    }

    pub fn architectures(&self) -> impl Iterator<Item = (&Architecture, Natural)> {
        self.prods.iter().map(|(a, &p)| (a, p))
    }

    /// Architectures seen with two different productions.
    pub fn conflicts(&self) -> &[(Architecture, Natural, Natural)] {
        &self.conflicts
    }
}

/// `prod(A)`, read from a representative.
pub fn prod_architecture(
    _machine: &NestedMachine,
    arch: &Architecture,
    index: &RepresentativeIndex,
) -> Result<Natural, DecideError> {
    index.get(arch).ok_or(DecideError::NoRepresentative)
}
