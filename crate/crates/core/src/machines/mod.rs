//! Bimachines and nested (marble, blind, pebble) bimachines.

mod doc;
mod production;
mod shapes;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Elem, Letter, Morphism};
use crate::Natural;

pub use doc::{LambdaTable, MachineDoc, MorphismRef, Table};
pub use production::{
    prod_multicontext, prod_positions, prod_sets, split_factors, Hole, IteratorCtx, KSum, Multicontext,
    PositionMultiset, PositionSets, SplitReport,
};
pub use shapes::{
    prod_power_poly, shape_count_brute, shape_count_poly, shape_of, shape_sum_identity, shapes_enum, PowerPolynomial,
    Shape,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("letter index {0} is outside the machine alphabet")]
    UnknownLetter(Letter),
    #[error("expected {expected} positions, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("position {position} is outside [1:{len}]")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("position sets overlap at {0}")]
    OverlappingSets(usize),
    #[error("externals must share the machine morphism")]
    MorphismMismatch,
    #[error("externals must all have kind {0:?} and level {1}")]
    LevelMismatch(MachineKind, usize),
    #[error("selector entry {index} is out of range ({count} externals)")]
    SelectorOutOfRange { index: usize, count: usize },
    #[error("table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("productions are only defined for marble machines")]
    NotMarble,
    #[error("{0} is not idempotent")]
    NotIdempotent(String),
    #[error("polynomial has degree {found}, expected at most {bound}")]
    DegreeExceeded { bound: usize, found: usize },
    #[error("need at least {points} sample points, all at least {min}")]
    SampleRange { points: usize, min: usize },
    #[error("invalid machine description: {0}")]
    InvalidDoc(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Marble,
    Blind,
    Pebble,
}

/// A plain bimachine `(A, M, μ, λ)` with natural outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bimachine {
    morphism: Arc<Morphism>,
    output: Vec<Natural>,
}

impl Bimachine {
    pub fn new(morphism: Arc<Morphism>, lambda: impl Fn(Elem, Letter, Elem) -> Natural) -> Self {
        let output = dense_table(&morphism, morphism.alphabet_len(), lambda);
        Bimachine { morphism, output }
    }

    pub fn morphism(&self) -> &Arc<Morphism> {
        &self.morphism
    }

    pub fn output(&self, m: Elem, a: Letter, n: Elem) -> Natural {
        let size = self.morphism.monoid().len();
        self.output[(m * self.morphism.alphabet_len() + a) * size + n]
    }

    pub fn eval(&self, w: &[Letter]) -> Result<Natural, MachineError> {
        self.clone().into_nested(MachineKind::Marble).eval(w)
    }

    /// The same bimachine viewed as a level-1 nested machine of any kind.
    pub fn into_nested(self, kind: MachineKind) -> NestedMachine {
        let nletters = letters_for(kind, &self.morphism);
        let output = if nletters == self.morphism.alphabet_len() {
            self.output
        } else {
            let base = self.morphism.alphabet_len();
            dense_table(&self.morphism, nletters, |m, a, n| self.output(m, a % base, n))
        };
        NestedMachine { kind, level: 1, nletters, morphism: self.morphism, node: Node::Base(output) }
    }
}

/// A k-marble, k-blind or k-pebble bimachine. Every level uses the same
/// morphism. Pebble machines read words over `A ⊎ Â`, where the marked copy
/// of letter `a` has index `a + |A|` and the same image as `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedMachine {
    kind: MachineKind,
    level: usize,
    nletters: usize,
    morphism: Arc<Morphism>,
    node: Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Base(Vec<Natural>),
    Nested { selector: Vec<usize>, externals: Vec<NestedMachine> },
}

fn letters_for(kind: MachineKind, mu: &Morphism) -> usize {
    match kind {
        MachineKind::Pebble => 2 * mu.alphabet_len(),
        _ => mu.alphabet_len(),
    }
}

fn dense_table<T>(mu: &Morphism, nletters: usize, f: impl Fn(Elem, Letter, Elem) -> T) -> Vec<T> {
    let size = mu.monoid().len();
    let mut out = Vec::with_capacity(size * nletters * size);
    for m in 0..size {
        for a in 0..nletters {
            for n in 0..size {
                out.push(f(m, a, n));
            }
        }
    }
    out
}

impl NestedMachine {
    /// A level-1 machine with output `lambda(m, a, n)`. For pebble machines
    /// `a` ranges over marked letters too.
    pub fn base(kind: MachineKind, morphism: Arc<Morphism>, lambda: impl Fn(Elem, Letter, Elem) -> Natural) -> Self {
        let nletters = letters_for(kind, &morphism);
        let output = dense_table(&morphism, nletters, lambda);
        NestedMachine { kind, level: 1, nletters, morphism, node: Node::Base(output) }
    }

    /// A machine of level `1 + externals level` whose output at a position
    /// with context `(m, a, n)` is the external `select(m, a, n)`.
    pub fn nested(
        kind: MachineKind,
        morphism: Arc<Morphism>,
        externals: Vec<NestedMachine>,
        select: impl Fn(Elem, Letter, Elem) -> usize,
    ) -> Result<Self, MachineError> {
        let sub_level =
            externals.first().map(|h| h.level).ok_or(MachineError::SelectorOutOfRange { index: 0, count: 0 })?;
        for h in &externals {
            if h.kind != kind || h.level != sub_level {
                return Err(MachineError::LevelMismatch(kind, sub_level));
            }
            if !Arc::ptr_eq(&h.morphism, &morphism) && *h.morphism != *morphism {
                return Err(MachineError::MorphismMismatch);
            }
        }
        let nletters = letters_for(kind, &morphism);
        let selector = dense_table(&morphism, nletters, select);
        if let Some(&index) = selector.iter().find(|&&i| i >= externals.len()) {
            return Err(MachineError::SelectorOutOfRange { index, count: externals.len() });
        }
        Ok(NestedMachine { kind, level: sub_level + 1, nletters, morphism, node: Node::Nested { selector, externals } })
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn morphism(&self) -> &Arc<Morphism> {
        &self.morphism
    }

    /// Letters accepted by this machine (`2|A|` for pebble machines).
    pub fn input_letters(&self) -> usize {
        self.nletters
    }

    pub fn externals(&self) -> &[NestedMachine] {
        match &self.node {
            Node::Base(_) => &[],
            Node::Nested { externals, .. } => externals,
        }
    }

    #[inline]
    fn index(&self, m: Elem, a: Letter, n: Elem) -> usize {
        (m * self.nletters + a) * self.morphism.monoid().len() + n
    }

    /// Output of a level-1 machine, `None` for higher levels.
    pub fn output(&self, m: Elem, a: Letter, n: Elem) -> Option<Natural> {
        match &self.node {
            Node::Base(t) => Some(t[self.index(m, a, n)]),
            Node::Nested { .. } => None,
        }
    }

    /// Index of the external selected at context `(m, a, n)`.
    pub fn selector(&self, m: Elem, a: Letter, n: Elem) -> Option<usize> {
        match &self.node {
            Node::Base(_) => None,
            Node::Nested { selector, .. } => Some(selector[self.index(m, a, n)]),
        }
    }

    pub fn selected(&self, m: Elem, a: Letter, n: Elem) -> Option<&NestedMachine> {
        match &self.node {
            Node::Base(_) => None,
            Node::Nested { selector, externals } => Some(&externals[selector[self.index(m, a, n)]]),
        }
    }

    #[inline]
    pub(crate) fn letter_elem(&self, a: Letter) -> Elem {
        self.morphism.letter_image(a % self.morphism.alphabet_len())
    }

    pub(crate) fn image_of(&self, w: &[Letter]) -> Elem {
        let monoid = self.morphism.monoid();
        w.iter().fold(monoid.identity(), |acc, &a| monoid.mul(acc, self.letter_elem(a)))
    }

    fn check_letters(&self, w: &[Letter], limit: usize) -> Result<(), MachineError> {
        match w.iter().find(|&&a| a >= limit) {
            Some(&a) => Err(MachineError::UnknownLetter(a)),
            None => Ok(()),
        }
    }

    /// `f(w)`. A top-level pebble machine takes unmarked words only.
    pub fn eval(&self, w: &[Letter]) -> Result<Natural, MachineError> {
        self.check_letters(w, self.morphism.alphabet_len())?;
        Ok(self.eval_unchecked(w))
    }

    /// Like [`NestedMachine::eval`] but also accepts marked letters.
    pub fn eval_marked(&self, w: &[Letter]) -> Result<Natural, MachineError> {
        self.check_letters(w, self.nletters)?;
        Ok(self.eval_unchecked(w))
    }

    pub(crate) fn eval_unchecked(&self, w: &[Letter]) -> Natural {
        if w.is_empty() {
            return 0;
        }
        let monoid = self.morphism.monoid();
        let mut suffix = vec![monoid.identity(); w.len() + 1];
        for i in (0..w.len()).rev() {
            suffix[i] = monoid.mul(self.letter_elem(w[i]), suffix[i + 1]);
        }
        let mut prefix = monoid.identity();
        let mut total: Natural = 0;
        match &self.node {
            Node::Base(t) => {
                for (i, &a) in w.iter().enumerate() {
                    total += t[self.index(prefix, a, suffix[i + 1])];
                    prefix = monoid.mul(prefix, self.letter_elem(a));
                }
            }
            Node::Nested { selector, externals } => {
                let mut blind_cache: Vec<Option<Natural>> = vec![None; externals.len()];
                let mut marked = Vec::new();
                for (i, &a) in w.iter().enumerate() {
                    let h = selector[self.index(prefix, a, suffix[i + 1])];
                    total += match self.kind {
                        MachineKind::Marble => externals[h].eval_unchecked(&w[..=i]),
                        MachineKind::Blind => *blind_cache[h].get_or_insert_with(|| externals[h].eval_unchecked(w)),
                        MachineKind::Pebble => {
                            marked.clear();
                            marked.extend_from_slice(w);
                            marked[i] = self.mark(a);
                            externals[h].eval_unchecked(&marked)
                        }
                    };
                    prefix = monoid.mul(prefix, self.letter_elem(a));
                }
            }
        }
        total
    }

    fn mark(&self, a: Letter) -> Letter {
        let base = self.morphism.alphabet_len();
        if a >= base {
            a
        } else {
            a + base
        }
    }

    /// Applies `f` to every level-1 output table.
    pub fn map_outputs(&self, f: &impl Fn(Natural) -> Natural) -> NestedMachine {
        let node = match &self.node {
            Node::Base(t) => Node::Base(t.iter().map(|&x| f(x)).collect()),
            Node::Nested { selector, externals } => Node::Nested {
                selector: selector.clone(),
                externals: externals.iter().map(|h| h.map_outputs(f)).collect(),
            },
        };
        NestedMachine { node, ..self.clone() }
    }

    /// Total number of machine nodes in the external tree.
    pub fn size(&self) -> usize {
        1 + self.externals().iter().map(NestedMachine::size).sum::<usize>()
    }
}
