//! Deciding whether a marble bimachine computes a polyblind function:
//! independent node sets, architectures and their counts, the
//! dependent/independent split of productions, K-permutability and
//! repetitiveness falsification.

mod arch;
mod permutable;
mod repetitive;

use thiserror::Error;

use crate::algebra::Letter;
use crate::forest::{build_forest, Forest, ForestError, NodeId};
use crate::machines::{MachineError, MachineKind, NestedMachine};
use crate::Natural;

pub use arch::{
    architecture_of, count_architecture, count_architecture_recursive, count_split, prod_architecture, ArchItem,
    Architecture, CountSplit, LeafEntry, RepresentativeIndex,
};
pub use permutable::{
    check_permutable, instance_count, PermutabilityInstance, PermutabilityOptions, PermutabilityVerdict,
    PermutableMachine,
};
pub use repetitive::{
    falsify_repetitive, falsify_repetitive_random, ProbeDoc, PumpSample, PumpWitness, RepetitivenessProbe,
    DEFAULT_MIN_EXPONENT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecideError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("node set is not independent")]
    NotIndependent,
    #[error("no representative forest is known for this architecture")]
    NoRepresentative,
    #[error("enumeration needs {needed} instances, over the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("the machine is not permutable: {0}")]
    NotPermutable(String),
    #[error("the decision procedures need a marble machine")]
    NotMarble,
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
}

/// Whether `a` and `b` (distinct nodes) violate independence in either
/// direction: ancestry, or one being the immediate sibling of an ancestor
/// of the other.
pub fn dependent_pair(forest: &Forest, a: NodeId, b: NodeId) -> bool {
    let one_way = |x: NodeId, y: NodeId| {
        forest.is_ancestor(x, y)
            || forest.right_sibling(x).is_some_and(|s| forest.is_ancestor(s, y))
            || forest.left_sibling(x).is_some_and(|s| forest.is_ancestor(s, y))
    };
    one_way(a, b) || one_way(b, a)
}

/// Whether a multiset of nodes is independent: iterable, pairwise distinct
/// and pairwise far apart.
pub fn is_independent(forest: &Forest, nodes: &[NodeId]) -> bool {
    nodes.iter().all(|&t| forest.is_iterable(t))
        && nodes
            .iter()
            .enumerate()
            .all(|(i, &a)| nodes[i + 1..].iter().all(|&b| a != b && !dependent_pair(forest, a, b)))
}

/// Visits every independent set of `k` nodes drawn from `candidates`
/// (sorted, iterable), as increasing id tuples in lexicographic order.
pub fn for_each_independent(forest: &Forest, candidates: &[NodeId], k: usize, visit: &mut dyn FnMut(&[NodeId])) {
    fn go(
        forest: &Forest,
        candidates: &[NodeId],
        k: usize,
        from: usize,
        chosen: &mut Vec<NodeId>,
        visit: &mut dyn FnMut(&[NodeId]),
    ) {
        if chosen.len() == k {
            visit(chosen);
            return;
        }
        for i in from..candidates.len() {
            if candidates.len() - i < k - chosen.len() {
                break;
            }
            let t = candidates[i];
            if chosen.iter().all(|&s| !dependent_pair(forest, s, t)) {
                chosen.push(t);
                go(forest, candidates, k, i + 1, chosen, visit);
                chosen.pop();
            }
        }
    }
    go(forest, candidates, k, 0, &mut Vec::with_capacity(k), visit);
}

/// `Ind^k(F)`, in lexicographic order of node paths.
pub fn enumerate_independent(forest: &Forest, k: usize) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    for_each_independent(forest, &forest.iterable_nodes(), k, &mut |t| out.push(t.to_vec()));
    out
}

/// Number of dependent multisets of size `k` over `It(F) ∪ {F}`.
pub fn dependent_count(forest: &Forest, k: usize) -> Natural {
    if forest.is_empty() {
        return 0;
    }
    let owners = forest.iterable_nodes().len() as i128 + 1;
    let multisets = crate::combin::binomial(owners + k as i128 - 1, k as i128);
    multisets - enumerate_independent(forest, k).len() as Natural
}

/// Whether `forest` has height at most `3|M|`.
pub fn within_simon_bound(forest: &Forest) -> bool {
    forest.height() <= 3 * forest.morphism().monoid().len()
}

fn check_marble(machine: &NestedMachine) -> Result<(), DecideError> {
    if machine.kind() != MachineKind::Marble {
        return Err(DecideError::NotMarble);
    }
    Ok(())
}

/// `prod(F)(T)` for a multiset of nodes: a multiset of `r` positions is
/// drawn from the frontier of each node occurring `r` times.
pub fn prod_nodes(machine: &NestedMachine, forest: &Forest, nodes: &[NodeId]) -> Natural {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    let mut sets: Vec<(Vec<usize>, usize)> = Vec::new();
    for t in sorted {
        match sets.last_mut() {
            Some((fr, r)) if fr.as_slice() == forest.frontier(t) => *r += 1,
            _ => sets.push((forest.frontier(t).to_vec(), 1)),
        }
    }
    machine.prod_sets_unchecked(forest.word(), &sets)
}

/// `Σ_{T ∈ Dep(F)} prod(F)(T)`, following the position loop: every
/// nondecreasing tuple of positions is attributed to the multiset of the
/// nodes owning them. Zero unless `F` is valid of height at most `3|M|`.
pub fn sum_dependent(machine: &NestedMachine, forest: &Forest) -> Result<Natural, DecideError> {
    check_marble(machine)?;
    if forest.validate().is_err() || !within_simon_bound(forest) || forest.is_empty() {
        return Ok(0);
    }
    let owner = forest.partition_check()?;
    let n = forest.word().len();
    let k = machine.level();
    let positions: Vec<usize> = (1..=n).collect();
    let mut total = 0;
    crate::combin::for_each_multiset(&positions, k, &mut |ps| {
        let nodes: Vec<NodeId> = ps.iter().map(|&p| owner[p - 1]).collect();
        if !is_independent(forest, &nodes) {
            total += machine.prod_sorted(forest.word(), ps);
        }
    });
    Ok(total)
}

/// `Σ_{T ∈ Ind^k(F)} prod(F)(T)`.
pub fn sum_independent(machine: &NestedMachine, forest: &Forest) -> Result<Natural, DecideError> {
    check_marble(machine)?;
    if forest.validate().is_err() || !within_simon_bound(forest) {
        return Ok(0);
    }
    let mut total = 0;
    for_each_independent(forest, &forest.iterable_nodes(), machine.level(), &mut |t| {
        total += prod_nodes(machine, forest, t);
    });
    Ok(total)
}

/// The architecture-grouped split of [`sum_independent`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependentSplit {
    pub sum: Natural,
    pub prime: Natural,
    pub second: Natural,
    /// Each architecture with its production and `(count, count′, count″)`.
    pub groups: Vec<(Architecture, Natural, CountSplit)>,
}

/// `sumi′ = Σ_A prod(A)·count′_A(F)` and `sumi″ = Σ_A prod(A)·count″_A(F)`,
/// with `prod(A)` taken from `index`, which is first fed the pairs of `F`.
pub fn sum_independent_split(
    machine: &PermutableMachine,
    forest: &Forest,
    index: &mut RepresentativeIndex,
) -> Result<IndependentSplit, DecideError> {
    let m = machine.machine();
    let sum = sum_independent(m, forest)?;
    if forest.validate().is_err() || !within_simon_bound(forest) {
        return Ok(IndependentSplit { sum, prime: 0, second: 0, groups: Vec::new() });
    }
    index.insert_forest(m, forest);
    let mut archs = std::collections::BTreeSet::new();
    for_each_independent(forest, &forest.iterable_nodes(), m.level(), &mut |t| {
        archs.insert(architecture_of(forest, t).expect("enumerated sets are independent"));
    });
    let (mut prime, mut second) = (0, 0);
    let mut groups = Vec::with_capacity(archs.len());
    for a in archs {
        let p = prod_architecture(m, &a, index)?;
        let split = count_split(forest, &a);
        prime += p * split.prime;
        second += p * split.second;
        groups.push((a, p, split));
    }
    Ok(IndependentSplit { sum, prime, second, groups })
}

/// Values of `f = f′ + f″` at one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub value: Natural,
    pub prime: Natural,
    pub second: Natural,
    pub sum_dependent: Natural,
    pub split: IndependentSplit,
    pub forest: Forest,
}

impl Decomposition {
    pub fn holds(&self) -> bool {
        self.value == self.prime + self.second
    }
}

/// `f′(w) = sumi′(F)` and `f″(w) = sum^dep(F) + sumi″(F)` for the forest
/// `F` built from `w`.
pub fn decompose(machine: &PermutableMachine, w: &[Letter]) -> Result<Decomposition, DecideError> {
    let m = machine.machine();
    let value = m.eval(w)?;
    let forest = build_forest(m.morphism().clone(), w);
    decompose_with(machine, forest, value, &mut RepresentativeIndex::new())
}

/// [`decompose`] on a given forest, sharing a representative index.
pub fn decompose_with(
    machine: &PermutableMachine,
    forest: Forest,
    value: Natural,
    index: &mut RepresentativeIndex,
) -> Result<Decomposition, DecideError> {
    let m = machine.machine();
    let sum_dep = sum_dependent(m, &forest)?;
    let split = sum_independent_split(machine, &forest, index)?;
    Ok(Decomposition {
        value,
        prime: split.prime,
        second: sum_dep + split.second,
        sum_dependent: sum_dep,
        split,
        forest,
    })
}
