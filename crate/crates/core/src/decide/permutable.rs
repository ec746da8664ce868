//! Exhaustive K-permutability check over bounded iterators.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_marble, DecideError};
use crate::algebra::{Elem, Morphism, Word};
use crate::combin::{for_each_permutation, words_up_to};
use crate::machines::{prod_multicontext, IteratorCtx, Multicontext, NestedMachine};
use crate::Natural;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutabilityOptions {
    /// Maximal length `K` of the iterated words.
    pub bound: usize,
    /// Maximal number of (instance, permutation) pairs to evaluate.
    pub budget: u128,
}

impl Default for PermutabilityOptions {
    fn default() -> Self {
        PermutabilityOptions { bound: 2, budget: 5_000_000 }
    }
}

/// A machine that passed [`check_permutable`] at some bound.
#[derive(Debug, Clone)]
pub struct PermutableMachine {
    machine: NestedMachine,
    bound: usize,
}

impl PermutableMachine {
    pub fn machine(&self) -> &NestedMachine {
        &self.machine
    }

    /// The `K` at which the check passed.
    pub fn bound(&self) -> usize {
        self.bound
    }
}

/// One instance of the permutability equation, with both productions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutabilityInstance {
    pub split: (usize, usize, usize),
    pub left: IteratorCtx,
    pub right: IteratorCtx,
    /// `m₀, …, m_x` of the inner iterator.
    pub elems: Vec<Elem>,
    /// `u₁, …, u_x` of the inner iterator.
    pub words: Vec<Word>,
    pub e: Elem,
    /// 0-based permutation of the inner factors.
    pub sigma: Vec<usize>,
    pub lhs_context: Multicontext,
    pub rhs_context: Multicontext,
    pub lhs: Natural,
    pub rhs: Natural,
}

#[derive(Serialize)]
struct IteratorJson {
    elems: Vec<String>,
    words: Vec<String>,
}

#[derive(Serialize)]
struct InstanceJson {
    split: [usize; 3],
    left: IteratorJson,
    right: IteratorJson,
    inner: IteratorJson,
    e: String,
    sigma: Vec<usize>,
    lhs_context: String,
    rhs_context: String,
    lhs: String,
    rhs: String,
}

impl PermutabilityInstance {
    /// JSON report with element names and words in letters; `sigma` is
    /// 1-based.
    pub fn to_json(&self, mu: &Morphism) -> serde_json::Value {
        let names = |es: &[Elem]| es.iter().map(|&m| mu.monoid().name(m).to_string()).collect();
        let words = |ws: &[Word]| ws.iter().map(|w| mu.format_word(w)).collect();
        let it = |c: &IteratorCtx| IteratorJson { elems: names(&c.elems), words: words(&c.words) };
        serde_json::to_value(InstanceJson {
            split: [self.split.0, self.split.1, self.split.2],
            left: it(&self.left),
            right: it(&self.right),
            inner: IteratorJson { elems: names(&self.elems), words: words(&self.words) },
            e: mu.monoid().name(self.e).to_string(),
            sigma: self.sigma.iter().map(|s| s + 1).collect(),
            lhs_context: self.lhs_context.display(mu).to_string(),
            rhs_context: self.rhs_context.display(mu).to_string(),
            lhs: self.lhs.to_string(),
            rhs: self.rhs.to_string(),
        })
        .expect("instance reports serialize")
    }
}

#[derive(Debug, Clone)]
pub enum PermutabilityVerdict {
    Permutable(PermutableMachine),
    Counterexample(Box<PermutabilityInstance>),
}

/// Choices ranging over the image of the morphism and over nonempty
/// idempotent-image words of length at most `K`.
struct Space {
    elems: Vec<Elem>,
    words: Vec<Word>,
}

impl Space {
    fn new(mu: &Morphism, bound: usize) -> Space {
        let monoid = mu.monoid();
        let words = words_up_to(mu.alphabet_len(), bound)
            .filter(|u| !u.is_empty() && monoid.is_idempotent(mu.eval(u)))
            .collect();
        Space { elems: mu.image(), words }
    }

    /// Number of `(n, K)`-iterators.
    fn iterators(&self, n: usize) -> u128 {
        (self.elems.len() as u128).pow(n as u32 + 1) * (self.words.len() as u128).pow(n as u32)
    }

    /// The `index`-th `(n, K)`-iterator, as elements and words.
    fn iterator(&self, n: usize, mut index: u128) -> (Vec<Elem>, Vec<Word>) {
        let (ne, nw) = (self.elems.len() as u128, self.words.len() as u128);
        let mut elems = Vec::with_capacity(n + 1);
        let mut words = Vec::with_capacity(n);
        for i in 0..=n {
            elems.push(self.elems[(index % ne) as usize]);
            index /= ne;
            if i < n {
                words.push(self.words[(index % nw) as usize].clone());
                index /= nw;
            }
        }
        (elems, words)
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Splits `ℓ + x + r = k` with `x ≥ 2`; for `x ≤ 1` both sides coincide.
fn splits(k: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for x in 2..=k {
        for l in 0..=k - x {
            out.push((l, x, k - x - l));
        }
    }
    out
}

fn split_size(space: &Space, (l, x, r): (usize, usize, usize)) -> u128 {
    space.iterators(l) * space.iterators(r) * space.iterators(x)
}

/// Number of (instance, permutation) pairs the check evaluates.
pub fn instance_count(machine: &NestedMachine, bound: usize) -> u128 {
    let space = Space::new(machine.morphism(), bound);
    splits(machine.level()).into_iter().map(|s| split_size(&space, s) * factorial(s.1)).sum()
}

fn check_one(
    machine: &NestedMachine,
    space: &Space,
    bound: usize,
    split: (usize, usize, usize),
    index: u128,
) -> Option<PermutabilityInstance> {
    let mu = machine.morphism();
    let monoid = mu.monoid();
    let (l, x, r) = split;
    let (nl, nx) = (space.iterators(l), space.iterators(x));
    let (elems, words) = space.iterator(x, index % nx);
    let rest = index / nx;
    let es: Vec<Elem> = words.iter().map(|u| mu.eval(u)).collect();
    let e = monoid.product_of(std::iter::once(elems[0]).chain(es.iter().zip(&elems[1..]).flat_map(|(&a, &b)| [a, b])));
    if !monoid.is_idempotent(e) {
        return None;
    }
    let (le, lw) = space.iterator(l, rest % nl);
    let (re, rw) = space.iterator(r, rest / nl);
    let left = IteratorCtx::new(mu, le, lw, bound).expect("enumerated words are idempotent");
    let right = IteratorCtx::new(mu, re, rw, bound).expect("enumerated words are idempotent");
    let (lc, rc) = (left.to_multicontext(mu), right.to_multicontext(mu));

    let mut mid = Multicontext::constant(monoid.mul(e, elems[0]));
    for i in 0..x {
        mid = mid
            .then_elem(monoid, es[i])
            .then_hole(monoid, words[i].clone(), 1)
            .then_elem(monoid, es[i])
            .then_elem(monoid, elems[i + 1]);
    }
    mid = mid.then_elem(monoid, e);
    let lhs_context = lc.concat(monoid, &mid).concat(monoid, &rc);
    let lhs = prod_multicontext(machine, &lhs_context).expect("arity matches the split");

    // left_j = e·Π_{i≤j} m_{i−1}e_i and right_j = (Π_{i≥j} e_i m_i)·e.
    let left_ctx: Vec<Elem> =
        (0..x).map(|j| monoid.product_of(std::iter::once(e).chain((0..=j).flat_map(|i| [elems[i], es[i]])))).collect();
    let right_ctx: Vec<Elem> = (0..x)
        .map(|j| monoid.product_of((j..x).flat_map(|i| [es[i], elems[i + 1]]).chain(std::iter::once(e))))
        .collect();

    let mut found = None;
    for_each_permutation(x, &mut |sigma| {
        if found.is_some() {
            return;
        }
        let mut perm = Multicontext::constant(monoid.identity());
        for &s in sigma {
            perm = perm
                .then_elem(monoid, left_ctx[s])
                .then_hole(monoid, words[s].clone(), 1)
                .then_elem(monoid, right_ctx[s]);
        }
        let rhs_context = lc.concat(monoid, &perm).concat(monoid, &rc);
        let rhs = prod_multicontext(machine, &rhs_context).expect("arity matches the split");
        if rhs != lhs {
            found = Some(PermutabilityInstance {
                split,
                left: left.clone(),
                right: right.clone(),
                elems: elems.clone(),
                words: words.clone(),
                e,
                sigma: sigma.to_vec(),
                lhs_context: lhs_context.clone(),
                rhs_context,
                lhs,
                rhs,
            });
        }
    });
    found
}

/// Checks K-permutability exhaustively. The first counterexample in
/// enumeration order is returned, independently of scheduling.
pub fn check_permutable(
    machine: &NestedMachine,
    options: PermutabilityOptions,
) -> Result<PermutabilityVerdict, DecideError> {
    check_marble(machine)?;
    let needed = instance_count(machine, options.bound);
    if needed > options.budget {
        return Err(DecideError::BudgetExceeded { needed, budget: options.budget });
    }
    let space = Space::new(machine.morphism(), options.bound);
    for split in splits(machine.level()) {
        let size = split_size(&space, split);
        let hit = (0..size as u64)
            .into_par_iter()
            .find_map_first(|i| check_one(machine, &space, options.bound, split, i as u128));
        if let Some(instance) = hit {
            return Ok(PermutabilityVerdict::Counterexample(Box::new(instance)));
        }
    }
    Ok(PermutabilityVerdict::Permutable(PermutableMachine { machine: machine.clone(), bound: options.bound }))
}
