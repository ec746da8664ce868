//! Productions of marble machines on positions, position sets and
//! multicontexts.

use std::fmt;

use crate::algebra::{Elem, FiniteMonoid, Letter, Morphism, Word};
use crate::combin::{for_each_composition, for_each_multiset};
use crate::Natural;

use super::{MachineError, MachineKind, NestedMachine, Node};

/// A multiset of 1-based positions, stored as strictly increasing
/// `(position, multiplicity)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionMultiset {
    entries: Vec<(usize, usize)>,
}

impl PositionMultiset {
    pub fn from_positions(positions: &[usize]) -> Self {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let mut entries: Vec<(usize, usize)> = Vec::new();
        for p in sorted {
            match entries.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => entries.push((p, 1)),
            }
        }
        PositionMultiset { entries }
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|&(_, c)| c).sum()
    }

    /// Positions in nondecreasing order, repeated by multiplicity.
    pub fn expanded(&self) -> Vec<usize> {
        self.entries.iter().flat_map(|&(p, c)| std::iter::repeat_n(p, c)).collect()
    }
}

impl fmt::Display for PositionMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.expanded().iter().map(usize::to_string).collect();
        write!(f, "⟅{}⟆", parts.join(","))
    }
}

/// A tuple of naturals with a fixed sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSum(pub Vec<usize>);

impl KSum {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Every `k`-sum of length `len`.
    pub fn all(k: usize, len: usize) -> Vec<KSum> {
        let mut out = Vec::new();
        for_each_composition(k, len, &mut |c| out.push(KSum(c.to_vec())));
        out
    }
}

/// Position sets `I_j` with their multiplicities `r_j`.
pub type PositionSets = Vec<(Vec<usize>, usize)>;

/// `prod(w)⟅P⟆` for a marble machine.
pub fn prod_positions(
    machine: &NestedMachine,
    w: &[Letter],
    positions: &PositionMultiset,
) -> Result<Natural, MachineError> {
    check_marble(machine, w)?;
    if positions.total() != machine.level() {
        return Err(MachineError::ArityMismatch { expected: machine.level(), got: positions.total() });
    }
    for &(p, _) in positions.entries() {
        check_position(p, w.len())?;
    }
    Ok(machine.prod_sorted(w, &positions.expanded()))
}

fn check_marble(machine: &NestedMachine, w: &[Letter]) -> Result<(), MachineError> {
    if machine.kind() != MachineKind::Marble {
        return Err(MachineError::NotMarble);
    }
    machine.check_letters(w, machine.morphism().alphabet_len())
}

fn check_position(p: usize, len: usize) -> Result<(), MachineError> {
    if p == 0 || p > len {
        return Err(MachineError::PositionOutOfRange { position: p, len });
    }
    Ok(())
}

impl NestedMachine {
    /// Production on nondecreasing 1-based positions; arity and range are
    /// the caller's responsibility.
    pub(crate) fn prod_sorted(&self, w: &[Letter], positions: &[usize]) -> Natural {
        let ik = *positions.last().expect("nonempty positions");
        let left = self.image_of(&w[..ik - 1]);
        let right = self.image_of(&w[ik..]);
        let idx = self.index(left, w[ik - 1], right);
        match &self.node {
            Node::Base(t) => t[idx],
            Node::Nested { selector, externals } => {
                externals[selector[idx]].prod_sorted(&w[..ik], &positions[..positions.len() - 1])
            }
        }
    }

    /// Sum of productions over all ways to draw a multiset of size `r_j`
    /// from each (disjoint, validated) position set `I_j`.
    pub(crate) fn prod_sets_unchecked(&self, w: &[Letter], sets: &[(Vec<usize>, usize)]) -> Natural {
        fn go(
            machine: &NestedMachine,
            w: &[Letter],
            sets: &[(Vec<usize>, usize)],
            chosen: &mut Vec<usize>,
            total: &mut Natural,
        ) {
            let Some(((set, r), rest)) = sets.split_first() else {
                let mut sorted = chosen.clone();
                sorted.sort_unstable();
                *total += machine.prod_sorted(w, &sorted);
                return;
            };
            for_each_multiset(set, *r, &mut |pick| {
                let mark = chosen.len();
                chosen.extend_from_slice(pick);
                go(machine, w, rest, chosen, total);
                chosen.truncate(mark);
            });
        }
        let mut total = 0;
        go(self, w, sets, &mut Vec::with_capacity(self.level()), &mut total);
        total
    }
}

/// `prod(w)⟅I₁‡r₁, …, I_n‡r_n⟆` for pairwise disjoint sets `I_j`.
pub fn prod_sets(machine: &NestedMachine, w: &[Letter], sets: &[(Vec<usize>, usize)]) -> Result<Natural, MachineError> {
    check_marble(machine, w)?;
    let total: usize = sets.iter().map(|(_, r)| r).sum();
    if total != machine.level() {
        return Err(MachineError::ArityMismatch { expected: machine.level(), got: total });
    }
    let mut seen = vec![false; w.len() + 1];
    for (set, _) in sets {
        for &p in set {
            check_position(p, w.len())?;
            if seen[p] {
                return Err(MachineError::OverlappingSets(p));
            }
            seen[p] = true;
        }
    }
    Ok(machine.prod_sets_unchecked(w, sets))
}

/// A hole `⟦u⟧_r` of a multicontext.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hole {
    pub word: Word,
    pub mult: usize,
}

/// `m₀⟦u₁⟧_{r₁}m₁⋯⟦u_n⟧_{r_n}m_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multicontext {
    elems: Vec<Elem>,
    holes: Vec<Hole>,
}

impl Multicontext {
    pub fn constant(m: Elem) -> Self {
        Multicontext { elems: vec![m], holes: Vec::new() }
    }

    /// `1⟦u⟧_r1`.
    pub fn hole(monoid: &FiniteMonoid, word: Word, mult: usize) -> Self {
        let one = monoid.identity();
        Multicontext { elems: vec![one, one], holes: vec![Hole { word, mult }] }
    }

    pub fn from_parts(elems: Vec<Elem>, holes: Vec<Hole>) -> Self {
        assert_eq!(elems.len(), holes.len() + 1, "a multicontext alternates elements and holes");
        Multicontext { elems, holes }
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    /// Multiplies `m` onto the right end.
    pub fn then_elem(mut self, monoid: &FiniteMonoid, m: Elem) -> Self {
        let last = self.elems.last_mut().unwrap();
        *last = monoid.mul(*last, m);
        self
    }

    pub fn then_hole(mut self, monoid: &FiniteMonoid, word: Word, mult: usize) -> Self {
        self.holes.push(Hole { word, mult });
        self.elems.push(monoid.identity());
        self
    }

    pub fn concat(&self, monoid: &FiniteMonoid, other: &Multicontext) -> Multicontext {
        let mut elems = self.elems.clone();
        let last = elems.pop().unwrap();
        elems.push(monoid.mul(last, other.elems[0]));
        elems.extend_from_slice(&other.elems[1..]);
        let mut holes = self.holes.clone();
        holes.extend_from_slice(&other.holes);
        Multicontext { elems, holes }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.holes.iter().map(|h| h.mult).sum()
    }

    pub fn ksum(&self) -> KSum {
        KSum(self.holes.iter().map(|h| h.mult).collect())
    }

    /// The image of the multicontext with every hole filled by its word.
    pub fn image(&self, mu: &Morphism) -> Elem {
        let monoid = mu.monoid();
        let mut acc = self.elems[0];
        for (h, &m) in self.holes.iter().zip(&self.elems[1..]) {
            acc = monoid.mul(monoid.mul(acc, mu.eval(&h.word)), m);
        }
        acc
    }

    /// Absorbs holes of multiplicity zero into their neighbours.
    pub fn normalize(&self, mu: &Morphism) -> Multicontext {
        let monoid = mu.monoid();
        let mut out = Multicontext::constant(self.elems[0]);
        for (h, &m) in self.holes.iter().zip(&self.elems[1..]) {
            out = if h.mult == 0 {
                out.then_elem(monoid, mu.eval(&h.word))
            } else {
                out.then_hole(monoid, h.word.clone(), h.mult)
            };
            out = out.then_elem(monoid, m);
        }
        out
    }

    /// The word obtained by replacing every element with its canonical
    /// preimage, and the 1-based positions of each hole.
    pub fn instantiate(&self, mu: &Morphism) -> Result<(Word, PositionSets), MachineError> {
        self.instantiate_with(|m| Ok(mu.preimage_word(m)?.to_vec()))
    }

    /// Same as [`Multicontext::instantiate`] with a custom witness for each
    /// element.
    pub fn instantiate_with(
        &self,
        mut witness: impl FnMut(Elem) -> Result<Word, MachineError>,
    ) -> Result<(Word, PositionSets), MachineError> {
        let mut word = witness(self.elems[0])?;
        let mut sets = Vec::with_capacity(self.holes.len());
        for (h, &m) in self.holes.iter().zip(&self.elems[1..]) {
            let start = word.len() + 1;
            word.extend_from_slice(&h.word);
            sets.push(((start..start + h.word.len()).collect(), h.mult));
            word.extend(witness(m)?);
        }
        Ok((word, sets))
    }

    pub fn display<'a>(&'a self, mu: &'a Morphism) -> impl fmt::Display + 'a {
        DisplayMc(self, mu)
    }
}

struct DisplayMc<'a>(&'a Multicontext, &'a Morphism);

impl fmt::Display for DisplayMc<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (mc, mu) = (self.0, self.1);
        let names = mu.monoid();
        write!(f, "{}", names.name(mc.elems[0]))?;
        for (h, &m) in mc.holes.iter().zip(&mc.elems[1..]) {
            write!(f, "⟦{}⟧_{}{}", mu.format_word(&h.word), h.mult, names.name(m))?;
        }
        Ok(())
    }
}

/// `prod(m₀⟦u₁⟧_{r₁}m₁⋯)`, evaluated on canonical preimages. A multicontext
/// whose multiplicities are all zero has production 0.
pub fn prod_multicontext(machine: &NestedMachine, c: &Multicontext) -> Result<Natural, MachineError> {
    let total = c.total_multiplicity();
    if total == 0 {
        return Ok(0);
    }
    if total != machine.level() {
        return Err(MachineError::ArityMismatch { expected: machine.level(), got: total });
    }
    let (w, sets) = c.instantiate(machine.morphism())?;
    let sets: Vec<_> = sets.into_iter().filter(|(_, r)| *r > 0).collect();
    prod_sets(machine, &w, &sets)
}

/// Both sides of the splitting identity
/// `prod(L⟦u₁⋯u_X⟧_r R) = Σ_{(r₁..r_X)} prod(L⟦u₁⟧_{r₁}⋯⟦u_X⟧_{r_X} R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitReport {
    pub lhs: Natural,
    pub rhs: Natural,
    pub terms: Vec<(KSum, Natural)>,
    pub equal: bool,
}

pub fn split_factors(
    machine: &NestedMachine,
    left: &Multicontext,
    parts: &[Word],
    r: usize,
    right: &Multicontext,
) -> Result<SplitReport, MachineError> {
    let monoid = machine.morphism().monoid();
    let whole: Word = parts.concat();
    let lhs_ctx = left.concat(monoid, &Multicontext::hole(monoid, whole, r)).concat(monoid, right);
    let lhs = prod_multicontext(machine, &lhs_ctx)?;
    let mut terms = Vec::new();
    let mut failure = None;
    for_each_composition(r, parts.len(), &mut |rs| {
        if failure.is_some() {
            return;
        }
        let mut mid = Multicontext::constant(monoid.identity());
        for (u, &ri) in parts.iter().zip(rs) {
            mid = mid.then_hole(monoid, u.clone(), ri);
        }
        let ctx = left.concat(monoid, &mid).concat(monoid, right);
        match prod_multicontext(machine, &ctx) {
            Ok(v) => terms.push((KSum(rs.to_vec()), v)),
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let rhs = terms.iter().map(|(_, v)| v).sum();
    Ok(SplitReport { lhs, rhs, terms, equal: lhs == rhs })
}

/// An `(x, K)`-iterator `m₀ Π(eᵢ⟦uᵢ⟧eᵢmᵢ)` with `eᵢ = μ(uᵢ)` idempotent and
/// `|uᵢ| ≤ K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IteratorCtx {
    pub elems: Vec<Elem>,
    pub words: Vec<Word>,
    pub bound: usize,
}

impl IteratorCtx {
    pub fn new(mu: &Morphism, elems: Vec<Elem>, words: Vec<Word>, bound: usize) -> Result<Self, MachineError> {
        if elems.len() != words.len() + 1 {
            return Err(MachineError::InvalidDoc("an iterator alternates elements and words".into()));
        }
        for u in &words {
            let e = mu.eval(u);
            if !mu.monoid().is_idempotent(e) {
                return Err(MachineError::NotIdempotent(mu.format_word(u)));
            }
            if u.len() > bound {
                return Err(MachineError::InvalidDoc(format!("word {} is longer than {bound}", mu.format_word(u))));
            }
        }
        Ok(IteratorCtx { elems, words, bound })
    }

    pub fn arity(&self) -> usize {
        self.words.len()
    }

    /// The multicontext `m₀ Π(eᵢ⟦uᵢ⟧₁eᵢmᵢ)`.
    pub fn to_multicontext(&self, mu: &Morphism) -> Multicontext {
        let monoid = mu.monoid();
        let mut mc = Multicontext::constant(self.elems[0]);
        for (u, &m) in self.words.iter().zip(&self.elems[1..]) {
            let e = mu.eval(u);
            mc = mc.then_elem(monoid, e).then_hole(monoid, u.clone(), 1).then_elem(monoid, e).then_elem(monoid, m);
        }
        mc
    }
}
