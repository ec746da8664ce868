//! Brute-force reference implementations used by tests. Everything here
//! follows the definitions literally and recomputes from scratch; nothing is
//! shared with the optimized code paths beyond the data types.

use crate::algebra::{Letter, Morphism};
use crate::forest::{Forest, NodeId};
use crate::machines::{MachineKind, NestedMachine};
use crate::series::SeriesExpr;
use crate::Natural;

fn contexts(mu: &Morphism, w: &[Letter], i: usize) -> (usize, Letter, usize) {
    let base = mu.alphabet_len();
    let unmark = |v: &[Letter]| -> Vec<Letter> { v.iter().map(|&a| a % base).collect() };
    (mu.eval(&unmark(&w[..i])), w[i], mu.eval(&unmark(&w[i + 1..])))
}

/// `f(w)` by the recursive definition: at every position, call the
/// selected external on the prefix (marble), the whole word (blind) or the
/// word with that position marked (pebble).
pub fn oracle_eval(machine: &NestedMachine, w: &[Letter]) -> Natural {
    let mu = machine.morphism();
    let base = mu.alphabet_len();
    (0..w.len())
        .map(|i| {
            let (m, a, n) = contexts(mu, w, i);
            if machine.level() == 1 {
                return machine.output(m, a, n).unwrap();
            }
            let h = machine.selected(m, a, n).unwrap();
            match machine.kind() {
                MachineKind::Marble => oracle_eval(h, &w[..=i]),
                MachineKind::Blind => oracle_eval(h, w),
                MachineKind::Pebble => {
                    let mut v = w.to_vec();
                    if v[i] < base {
                        v[i] += base;
                    }
                    oracle_eval(h, &v)
                }
            }
        })
        .sum()
}

/// `prod(w)⟅i₁ ≤ ⋯ ≤ i_k⟆` (1-based) by its recursive definition.
pub fn oracle_prod(machine: &NestedMachine, w: &[Letter], positions: &[usize]) -> Natural {
    let (&last, rest) = positions.split_last().expect("k ≥ 1 positions");
    let (m, a, n) = contexts(machine.morphism(), w, last - 1);
    match machine.selected(m, a, n) {
        None => machine.output(m, a, n).unwrap(),
        Some(h) => oracle_prod(h, &w[..last], rest),
    }
}

/// `Σ prod(w)⟅P⟆` over every nondecreasing `k`-tuple of positions.
pub fn oracle_prod_sum(machine: &NestedMachine, w: &[Letter]) -> Natural {
    fn go(m: &NestedMachine, w: &[Letter], from: usize, chosen: &mut Vec<usize>, total: &mut Natural) {
        if chosen.len() == m.level() {
            *total += oracle_prod(m, w, chosen);
            return;
        }
        for p in from..=w.len() {
            chosen.push(p);
            go(m, w, p, chosen, total);
            chosen.pop();
        }
    }
    let mut total = 0;
    go(machine, w, 1, &mut Vec::new(), &mut total);
    total
}

/// A series expression evaluated from the definitions; the star is the
/// literal sum of Cauchy powers `Σ_{n ≤ |w|} fⁿ(w)`.
pub fn oracle_series(e: &SeriesExpr, w: &[Letter]) -> Natural {
    match e {
        SeriesExpr::Reg(m) => oracle_eval(m, w),
        SeriesExpr::Sum(l, r) => oracle_series(l, w) + oracle_series(r, w),
        SeriesExpr::Hadamard(l, r) => oracle_series(l, w) * oracle_series(r, w),
        SeriesExpr::Cauchy(l, r) => (0..=w.len()).map(|i| oracle_series(l, &w[..i]) * oracle_series(r, &w[i..])).sum(),
        SeriesExpr::Star(f) => (0..=w.len()).map(|n| cauchy_power(f, n, w)).sum(),
    }
}

fn cauchy_power(f: &SeriesExpr, n: usize, w: &[Letter]) -> Natural {
    if n == 0 {
        return Natural::from(w.is_empty());
    }
    (0..=w.len()).map(|i| oracle_series(f, &w[..i]) * cauchy_power(f, n - 1, &w[i..])).sum()
}

fn is_prefix(a: &[usize], b: &[usize]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

/// Whether two node paths are independent, straight from the clauses:
/// neither is an ancestor of the other and neither is the immediate
/// sibling of an ancestor of the other.
fn paths_independent(p: &[usize], q: &[usize]) -> bool {
    let clash = |x: &[usize], y: &[usize]| {
        if is_prefix(x, y) {
            return true;
        }
        let Some((&last, parent)) = x.split_last() else { return false };
        [last.wrapping_sub(1), last + 1].iter().any(|&s| {
            let mut sib = parent.to_vec();
            sib.push(s);
            is_prefix(&sib, y)
        })
    };
    !clash(p, q) && !clash(q, p)
}

fn iterable_by_path(forest: &Forest, t: NodeId) -> bool {
    let path = forest.path(t);
    let Some((&last, parent)) = path.split_last() else { return false };
    let siblings = forest.children(forest.node_at(parent).unwrap()).len();
    last > 0 && last + 1 < siblings
}

/// Whether a multiset of nodes (over `It(F) ∪ {F}`) is independent.
pub fn oracle_is_independent(forest: &Forest, nodes: &[NodeId]) -> bool {
    let paths: Vec<Vec<usize>> = nodes.iter().map(|&t| forest.path(t)).collect();
    nodes.iter().all(|&t| iterable_by_path(forest, t))
        && (0..nodes.len())
            .all(|i| (i + 1..nodes.len()).all(|j| nodes[i] != nodes[j] && paths_independent(&paths[i], &paths[j])))
}

/// `Ind^k(F)` by filtering every `k`-subset of nodes.
pub fn oracle_independent_sets(forest: &Forest, k: usize) -> Vec<Vec<NodeId>> {
    let nodes: Vec<NodeId> = forest.nodes().collect();
    let mut out = Vec::new();
    crate::combin::for_each_subset(&nodes, k, &mut |s| {
        if oracle_is_independent(forest, s) {
            out.push(s.to_vec());
        }
    });
    out
}

/// `(Σ_{Dep} prod, Σ_{Ind} prod)` over multisets of owner nodes, each
/// production drawn from the frontiers.
pub fn oracle_dep_ind_sums(machine: &NestedMachine, forest: &Forest) -> (Natural, Natural) {
    let owners: Vec<NodeId> =
        forest.nodes().filter(|&t| Some(t) == forest.root() || iterable_by_path(forest, t)).collect();
    let (mut dep, mut ind) = (0, 0);
    crate::combin::for_each_multiset(&owners, machine.level(), &mut |ts| {
        let mut sets: Vec<(Vec<usize>, usize)> = Vec::new();
        for &t in ts {
            match sets.last_mut() {
                Some((fr, r)) if fr.as_slice() == forest.frontier(t) => *r += 1,
                _ => sets.push((forest.frontier(t).to_vec(), 1)),
            }
        }
        let mut total = 0;
        let mut positions = Vec::new();
        draw(machine, forest.word(), &sets, &mut positions, &mut total);
        if oracle_is_independent(forest, ts) {
            ind += total;
        } else {
            dep += total;
        }
    });
    (dep, ind)
}

fn draw(m: &NestedMachine, w: &[Letter], sets: &[(Vec<usize>, usize)], chosen: &mut Vec<usize>, total: &mut Natural) {
    let Some(((set, r), rest)) = sets.split_first() else {
        let mut sorted = chosen.clone();
        sorted.sort_unstable();
        *total += oracle_prod(m, w, &sorted);
        return;
    };
    crate::combin::for_each_multiset(set, *r, &mut |pick| {
        let mark = chosen.len();
        chosen.extend_from_slice(pick);
        draw(m, w, rest, chosen, total);
        chosen.truncate(mark);
    });
}

/// Binary strings of length `x` with `r` ones and no two adjacent ones.
pub fn oracle_no_close_pairs(x: usize, r: usize) -> Natural {
    (0u32..1 << x).filter(|s| s.count_ones() as usize == r && s & (s >> 1) == 0).count() as Natural
}
