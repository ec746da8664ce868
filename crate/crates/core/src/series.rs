//! Rational-series expressions over regular functions, and conversions
//! between blind machines and sum/Hadamard expressions.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Elem, FiniteMonoid, Letter, Morphism, Word};
use crate::machines::{MachineError, MachineKind, NestedMachine};
use crate::{Evaluable, Natural};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("the star of a function is defined only when it maps ε to 0 (got {0})")]
    StarOnNonProper(Natural),
    #[error("series_to_blind does not handle {0} nodes")]
    UnsupportedNode(&'static str),
    #[error("machines of a series use different alphabets")]
    AlphabetMismatch,
    #[error("{0}-bimachines of level {1} cannot be turned into blind machines")]
    NotBlind(&'static str, usize),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("invalid series description: {0}")]
    InvalidDoc(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesExpr {
    Reg(Arc<NestedMachine>),
    Sum(Box<SeriesExpr>, Box<SeriesExpr>),
    Cauchy(Box<SeriesExpr>, Box<SeriesExpr>),
    Hadamard(Box<SeriesExpr>, Box<SeriesExpr>),
    Star(Box<SeriesExpr>),
}

impl SeriesExpr {
    pub fn reg(m: NestedMachine) -> Self {
        SeriesExpr::Reg(Arc::new(m))
    }

    pub fn sum(l: SeriesExpr, r: SeriesExpr) -> Self {
        SeriesExpr::Sum(Box::new(l), Box::new(r))
    }

    pub fn cauchy(l: SeriesExpr, r: SeriesExpr) -> Self {
        SeriesExpr::Cauchy(Box::new(l), Box::new(r))
    }

    pub fn hadamard(l: SeriesExpr, r: SeriesExpr) -> Self {
        SeriesExpr::Hadamard(Box::new(l), Box::new(r))
    }

    pub fn star(e: SeriesExpr) -> Self {
        SeriesExpr::Star(Box::new(e))
    }

    pub fn leaves(&self) -> Vec<&Arc<NestedMachine>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Arc<NestedMachine>>) {
        match self {
            SeriesExpr::Reg(m) => out.push(m),
            SeriesExpr::Sum(l, r) | SeriesExpr::Cauchy(l, r) | SeriesExpr::Hadamard(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
            SeriesExpr::Star(e) => e.collect_leaves(out),
        }
    }

    /// Checks that every leaf reads the same alphabet and every starred
    /// subexpression maps ε to 0.
    pub fn validate(&self) -> Result<(), SeriesError> {
        let leaves = self.leaves();
        let alphabet = leaves[0].morphism().alphabet();
        if leaves.iter().any(|m| m.morphism().alphabet() != alphabet) {
            return Err(SeriesError::AlphabetMismatch);
        }
        self.check_stars()
    }

    fn check_stars(&self) -> Result<(), SeriesError> {
        match self {
            SeriesExpr::Reg(_) => Ok(()),
            SeriesExpr::Sum(l, r) | SeriesExpr::Cauchy(l, r) | SeriesExpr::Hadamard(l, r) => {
                l.check_stars()?;
                r.check_stars()
            }
            SeriesExpr::Star(e) => {
                e.check_stars()?;
                match e.eval_unchecked(&[]) {
                    0 => Ok(()),
                    v => Err(SeriesError::StarOnNonProper(v)),
                }
            }
        }
    }

    pub fn alphabet(&self) -> &[String] {
        self.leaves()[0].morphism().alphabet()
    }

    fn eval_unchecked(&self, w: &[Letter]) -> Natural {
        match self {
            SeriesExpr::Reg(m) => m.eval_unchecked(w),
            SeriesExpr::Sum(l, r) => l.eval_unchecked(w) + r.eval_unchecked(w),
            SeriesExpr::Hadamard(l, r) => match l.eval_unchecked(w) {
                0 => 0,
                x => x * r.eval_unchecked(w),
            },
            SeriesExpr::Cauchy(l, r) => (0..=w.len())
                .map(|i| match l.eval_unchecked(&w[..i]) {
                    0 => 0,
                    x => x * r.eval_unchecked(&w[i..]),
                })
                .sum(),
            SeriesExpr::Star(e) => {
                // Factorizations of w[j..] into nonempty factors, right to left.
                let n = w.len();
                let mut tail = vec![0; n + 1];
                tail[n] = 1;
                for j in (0..n).rev() {
                    tail[j] = (j + 1..=n)
                        .map(|i| match tail[i] {
                            0 => 0,
                            t => e.eval_unchecked(&w[j..i]) * t,
                        })
                        .sum();
                }
                tail[0]
            }
        }
    }
}

/// Evaluates a series expression. Stars are checked before evaluation.
pub fn eval_series(e: &SeriesExpr, w: &[Letter]) -> Result<Natural, SeriesError> {
    e.validate()?;
    let n = e.alphabet().len();
    if let Some(&a) = w.iter().find(|&&a| a >= n) {
        return Err(MachineError::UnknownLetter(a).into());
    }
    Ok(e.eval_unchecked(w))
}

impl Evaluable for SeriesExpr {
    fn alphabet_len(&self) -> usize {
        self.alphabet().len()
    }

    fn evaluate(&self, word: &[Letter]) -> crate::Result<Natural> {
        Ok(eval_series(self, word)?)
    }
}

impl Evaluable for NestedMachine {
    fn alphabet_len(&self) -> usize {
        self.morphism().alphabet_len()
    }

    fn evaluate(&self, word: &[Letter]) -> crate::Result<Natural> {
        Ok(self.eval(word)?)
    }
}

/// `f = Σ_h f'_h ⊙H h`, where `f'_h` counts the positions at which the
/// machine calls `h`. Level-1 machines are returned as a single leaf.
pub fn blind_to_series(machine: &NestedMachine) -> Result<SeriesExpr, SeriesError> {
    if machine.level() == 1 {
        return Ok(SeriesExpr::reg(machine.clone()));
    }
    if machine.kind() != MachineKind::Blind {
        return Err(SeriesError::NotBlind(kind_name(machine.kind()), machine.level()));
    }
    let mu = machine.morphism();
    let size = mu.monoid().len();
    let mut used = vec![false; machine.externals().len()];
    for m in 0..size {
        for a in 0..mu.alphabet_len() {
            for n in 0..size {
                used[machine.selector(m, a, n).unwrap()] = true;
            }
        }
    }
    let mut terms = Vec::new();
    for (h, ext) in machine.externals().iter().enumerate().filter(|&(h, _)| used[h]) {
        let count = NestedMachine::base(MachineKind::Blind, mu.clone(), |m, a, n| {
            Natural::from(machine.selector(m, a, n) == Some(h))
        });
        terms.push(SeriesExpr::hadamard(SeriesExpr::reg(count), blind_to_series(ext)?));
    }
    Ok(terms.into_iter().reduce(SeriesExpr::sum).expect("a selector uses some external"))
}

fn kind_name(kind: MachineKind) -> &'static str {
    match kind {
        MachineKind::Marble => "marble",
        MachineKind::Blind => "blind",
        MachineKind::Pebble => "pebble",
    }
}

/// A common morphism for several machines: the product of their morphisms
/// and of the monoid `{1, ne}` that tells whether a word is empty,
/// restricted to its image.
struct Common {
    mu: Arc<Morphism>,
    /// `proj[j][x]`: component `j` of element `x`; component 0 is the
    /// emptiness flag.
    proj: Vec<Vec<Elem>>,
}

fn common_morphism(mus: &[&Arc<Morphism>]) -> Result<Common, SeriesError> {
    let alphabet = mus[0].alphabet().to_vec();
    let emptiness = FiniteMonoid::with_names(vec!["1".into(), "ne".into()], vec![vec![0, 1], vec![1, 1]], 0)
        .expect("emptiness monoid");
    let mut acc = Morphism::new(alphabet.clone(), emptiness, vec![1; alphabet.len()]).map_err(MachineError::from)?;
    let mut proj: Vec<Vec<Elem>> = vec![acc.monoid().elements().collect()];
    for mu in mus {
        if mu.alphabet() != alphabet.as_slice() {
            return Err(SeriesError::AlphabetMismatch);
        }
        let (next, parts) = acc.product(mu).map_err(MachineError::from)?;
        proj = proj
            .iter()
            .map(|p| parts.iter().map(|&(x, _)| p[x]).collect())
            .chain(std::iter::once(parts.iter().map(|&(_, y)| y).collect()))
            .collect();
        acc = next;
    }
    Ok(Common { mu: Arc::new(acc), proj })
}

/// The same machine read through `proj: new element → old element`.
fn pullback(machine: &NestedMachine, mu: &Arc<Morphism>, proj: &[Elem], kind: MachineKind) -> NestedMachine {
    if machine.level() == 1 {
        return NestedMachine::base(kind, mu.clone(), |m, a, n| machine.output(proj[m], a, proj[n]).unwrap());
    }
    let externals = machine.externals().iter().map(|h| pullback(h, mu, proj, kind)).collect();
    NestedMachine::nested(kind, mu.clone(), externals, |m, a, n| machine.selector(proj[m], a, proj[n]).unwrap())
        .expect("pullback keeps selectors in range")
}

struct Builder<'a> {
    mu: Arc<Morphism>,
    /// Whether an element is the image of the empty word.
    empty: &'a [Elem],
}

impl Builder<'_> {
    fn zero(&self, level: usize) -> NestedMachine {
        crate::catalog::zero(MachineKind::Blind, self.mu.clone(), level)
    }

    /// Same function one level up: the machine is called once, at the first
    /// position.
    fn lift(&self, m: NestedMachine, level: usize) -> NestedMachine {
        let mut m = m;
        while m.level() < level {
            let z = self.zero(m.level());
            m = NestedMachine::nested(MachineKind::Blind, self.mu.clone(), vec![m, z], |l, _, _| {
                usize::from(self.empty[l] != 0)
            })
            .expect("lift");
        }
        m
    }

    fn sum(&self, f: NestedMachine, g: NestedMachine) -> NestedMachine {
        let level = f.level().max(g.level());
        let (f, g) = (self.lift(f, level), self.lift(g, level));
        if level == 1 {
            return NestedMachine::base(MachineKind::Blind, self.mu.clone(), |m, a, n| {
                f.output(m, a, n).unwrap() + g.output(m, a, n).unwrap()
            });
        }
        let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let size = self.mu.monoid().len();
        for m in 0..size {
            for a in 0..self.mu.alphabet_len() {
                for n in 0..size {
                    let key = (f.selector(m, a, n).unwrap(), g.selector(m, a, n).unwrap());
                    let next = pairs.len();
                    pairs.entry(key).or_insert(next);
                }
            }
        }
        let mut ordered: Vec<_> = pairs.iter().map(|(&k, &v)| (v, k)).collect();
        ordered.sort();
        let externals =
            ordered.iter().map(|&(_, (i, j))| self.sum(f.externals()[i].clone(), g.externals()[j].clone())).collect();
        NestedMachine::nested(MachineKind::Blind, self.mu.clone(), externals, |m, a, n| {
            pairs[&(f.selector(m, a, n).unwrap(), g.selector(m, a, n).unwrap())]
        })
        .expect("sum")
    }

    fn hadamard(&self, f: NestedMachine, g: NestedMachine) -> NestedMachine {
        if f.level() == 1 {
            let mut values: Vec<Natural> = Vec::new();
            let size = self.mu.monoid().len();
            for m in 0..size {
                for a in 0..self.mu.alphabet_len() {
                    for n in 0..size {
                        let v = f.output(m, a, n).unwrap();
                        if !values.contains(&v) {
                            values.push(v);
                        }
                    }
                }
            }
            let externals =
                values.iter().map(|&c| if c == 0 { self.zero(g.level()) } else { g.map_outputs(&|x| x * c) }).collect();
            return NestedMachine::nested(MachineKind::Blind, self.mu.clone(), externals, |m, a, n| {
                let v = f.output(m, a, n).unwrap();
                values.iter().position(|&c| c == v).unwrap()
            })
            .expect("hadamard");
        }
        let externals = f.externals().iter().map(|h| self.hadamard(h.clone(), g.clone())).collect();
        NestedMachine::nested(MachineKind::Blind, self.mu.clone(), externals, |m, a, n| f.selector(m, a, n).unwrap())
            .expect("hadamard")
    }

    fn build(
        &self,
        e: &SeriesExpr,
        leaves: &mut std::slice::Iter<'_, NestedMachine>,
    ) -> Result<NestedMachine, SeriesError> {
        Ok(match e {
            SeriesExpr::Reg(_) => leaves.next().expect("one machine per leaf").clone(),
            SeriesExpr::Sum(l, r) => {
                let (l, r) = (self.build(l, leaves)?, self.build(r, leaves)?);
                self.sum(l, r)
            }
            SeriesExpr::Hadamard(l, r) => {
                let (l, r) = (self.build(l, leaves)?, self.build(r, leaves)?);
                self.hadamard(l, r)
            }
            SeriesExpr::Cauchy(..) => return Err(SeriesError::UnsupportedNode("Cauchy")),
            SeriesExpr::Star(_) => return Err(SeriesError::UnsupportedNode("Star")),
        })
    }
}

fn check_supported(e: &SeriesExpr) -> Result<(), SeriesError> {
    match e {
        SeriesExpr::Reg(m) => {
            if m.level() > 1 && m.kind() != MachineKind::Blind {
                return Err(SeriesError::NotBlind(kind_name(m.kind()), m.level()));
            }
            Ok(())
        }
        SeriesExpr::Sum(l, r) | SeriesExpr::Hadamard(l, r) => {
            check_supported(l)?;
            check_supported(r)
        }
        SeriesExpr::Cauchy(..) => Err(SeriesError::UnsupportedNode("Cauchy")),
        SeriesExpr::Star(_) => Err(SeriesError::UnsupportedNode("Star")),
    }
}

/// A blind machine computing a sum/Hadamard expression. All leaves are
/// moved onto one common morphism; a single leaf is returned as is.
pub fn series_to_blind(e: &SeriesExpr) -> Result<NestedMachine, SeriesError> {
    check_supported(e)?;
    e.validate()?;
    if let SeriesExpr::Reg(m) = e {
        return Ok(pullback(
            m,
            m.morphism(),
            &m.morphism().monoid().elements().collect::<Vec<_>>(),
            MachineKind::Blind,
        ));
    }
    let leaves = e.leaves();
    let mus: Vec<&Arc<Morphism>> = leaves.iter().map(|m| m.morphism()).collect();
    let common = common_morphism(&mus)?;
    let moved: Vec<NestedMachine> = leaves
        .iter()
        .enumerate()
        .map(|(j, m)| pullback(m, &common.mu, &common.proj[j + 1], MachineKind::Blind))
        .collect();
    let builder = Builder { mu: common.mu.clone(), empty: &common.proj[0] };
    builder.build(e, &mut moved.iter())
}

/// Result of [`growth_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEstimate {
    pub degree: usize,
    /// `(n, max f(w) over sampled words of length n)`.
    pub maxima: Vec<(usize, Natural)>,
}

/// Estimates the least `d` such that `max_{|w| = n} f(w) / n^d` stays
/// bounded over the sampled lengths: the ratio at the longest length may
/// exceed the one at the previous length by at most 25%. Advisory only.
pub fn growth_probe(
    f: &dyn Evaluable,
    sampler: &dyn Fn(usize) -> Vec<Word>,
    lengths: &[usize],
    max_degree: usize,
) -> crate::Result<GrowthEstimate> {
    let mut maxima = Vec::with_capacity(lengths.len());
    for &n in lengths {
        let mut best = 0;
        for w in sampler(n) {
            best = best.max(f.evaluate(&w)?);
        }
        maxima.push((n, best));
    }
    let ratio = |(n, v): (usize, Natural), d: usize| v as f64 / (n as f64).powi(d as i32);
    let degree = (0..=max_degree)
        .find(|&d| maxima.windows(2).last().is_none_or(|pair| ratio(pair[1], d) <= 1.25 * ratio(pair[0], d)))
        .unwrap_or(max_degree);
    Ok(GrowthEstimate { degree, maxima })
}

/// JSON form of a series expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesDoc {
    Op { op: SeriesOp, args: Vec<SeriesDoc> },
    Machine { machine: String },
    File { file: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesOp {
    Sum,
    Cauchy,
    Hadamard,
    Star,
}

impl SeriesDoc {
    /// Builds the expression; `resolve` loads the machine leaves. Binary
    /// operators with more than two arguments associate to the left.
    pub fn build(
        &self,
        resolve: &mut dyn FnMut(&SeriesDoc) -> crate::Result<NestedMachine>,
    ) -> crate::Result<SeriesExpr> {
        match self {
            SeriesDoc::Machine { .. } | SeriesDoc::File { .. } => Ok(SeriesExpr::reg(resolve(self)?)),
            SeriesDoc::Op { op, args } => {
                let built = args.iter().map(|a| a.build(resolve)).collect::<crate::Result<Vec<_>>>()?;
                let bad = |msg: &str| SeriesError::InvalidDoc(msg.into());
                match op {
                    SeriesOp::Star => {
                        let [e]: [SeriesExpr; 1] = built.try_into().map_err(|_| bad("star takes one argument"))?;
                        Ok(SeriesExpr::star(e))
                    }
                    _ => {
                        if built.len() < 2 {
                            return Err(bad("binary operators take at least two arguments").into());
                        }
                        let combine = match op {
                            SeriesOp::Sum => SeriesExpr::sum,
                            SeriesOp::Cauchy => SeriesExpr::cauchy,
                            _ => SeriesExpr::hadamard,
                        };
                        Ok(built.into_iter().reduce(combine).unwrap())
                    }
                }
            }
        }
    }
}
