//! Finite monoids and morphisms from free monoids.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a monoid element.
pub type Elem = usize;
/// Index of a letter in an alphabet.
pub type Letter = usize;
pub type Word = Vec<Letter>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("multiplication table is empty")]
    Empty,
    #[error("multiplication table row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("table entry ({row}, {col}) = {value} is not an element")]
    OutOfRange { row: usize, col: usize, value: usize },
    #[error("not associative: ({x}·{y})·{z} differs from {x}·({y}·{z})")]
    NotAssociative { x: String, y: String, z: String },
    #[error("{0} is not a two-sided identity")]
    BadIdentity(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("element {0} is not in the image of the morphism")]
    NotInImage(String),
    #[error("morphisms are defined over different alphabets")]
    AlphabetMismatch,
}

/// A finite monoid given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMonoid {
    names: Vec<String>,
    table: Vec<Elem>,
    identity: Elem,
}

/// The idempotence index together with the per-element index and period data
/// it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdempotenceIndex {
    pub omega: usize,
    /// `m^index` is the first power of `m` lying on its cycle.
    pub index: Vec<usize>,
    pub period: Vec<usize>,
}

impl FiniteMonoid {
    /// Builds a monoid, checking closure, associativity and the identity.
    pub fn new(table: Vec<Vec<Elem>>, identity: Elem) -> Result<Self, AlgebraError> {
        let names = (0..table.len()).map(|i| i.to_string()).collect();
        Self::with_names(names, table, identity)
    }

    pub fn with_names(names: Vec<String>, table: Vec<Vec<Elem>>, identity: Elem) -> Result<Self, AlgebraError> {
        let n = table.len();
        if n == 0 {
            return Err(AlgebraError::Empty);
        }
        let mut flat = Vec::with_capacity(n * n);
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != n {
                return Err(AlgebraError::NotSquare { row, len: entries.len(), expected: n });
            }
            for (col, &value) in entries.iter().enumerate() {
                if value >= n {
                    return Err(AlgebraError::OutOfRange { row, col, value });
                }
                flat.push(value);
            }
        }
        if identity >= n {
            return Err(AlgebraError::UnknownElement(identity.to_string()));
        }
        let monoid = FiniteMonoid { names, table: flat, identity };
        monoid.validate()?;
        Ok(monoid)
    }

    fn validate(&self) -> Result<(), AlgebraError> {
        let mut seen = std::collections::HashSet::new();
        for name in &self.names {
            if !seen.insert(name) {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        for x in self.elements() {
            if self.mul(self.identity, x) != x || self.mul(x, self.identity) != x {
                return Err(AlgebraError::BadIdentity(self.name(self.identity).to_string()));
            }
        }
        for x in self.elements() {
            for y in self.elements() {
                let xy = self.mul(x, y);
                for z in self.elements() {
                    if self.mul(xy, z) != self.mul(x, self.mul(y, z)) {
                        return Err(AlgebraError::NotAssociative {
                            x: self.name(x).into(),
                            y: self.name(y).into(),
                            z: self.name(z).into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn trivial() -> Self {
        FiniteMonoid { names: vec!["1".into()], table: vec![0], identity: 0 }
    }

    /// The cyclic group `Z/n` written additively, identity `0`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0);
        let table = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        Self::new(table, 0).expect("cyclic group is a monoid")
    }

    /// Direct product; the pair `(x, y)` has index `x * other.len() + y`.
    pub fn product(&self, other: &FiniteMonoid) -> FiniteMonoid {
        let (n, m) = (self.len(), other.len());
        let mut table = Vec::with_capacity(n * m * n * m);
        let mut names = Vec::with_capacity(n * m);
        for x in 0..n * m {
            names.push(format!("({},{})", self.name(x / m), other.name(x % m)));
            for y in 0..n * m {
                table.push(self.mul(x / m, y / m) * m + other.mul(x % m, y % m));
            }
        }
        FiniteMonoid { names, table, identity: self.identity * m + other.identity }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        self.table[x * self.names.len() + y]
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.len()
    }

    pub fn name(&self, x: Elem) -> &str {
        &self.names[x]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn element_by_name(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name)
    }

    pub fn product_of(&self, elems: impl IntoIterator<Item = Elem>) -> Elem {
        elems.into_iter().fold(self.identity, |acc, x| self.mul(acc, x))
    }

    pub fn is_idempotent(&self, x: Elem) -> bool {
        self.mul(x, x) == x
    }

    pub fn idempotents(&self) -> Vec<Elem> {
        self.elements().filter(|&x| self.is_idempotent(x)).collect()
    }

    pub fn power(&self, x: Elem, n: usize) -> Elem {
        let (mut acc, mut base, mut n) = (self.identity, x, n);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Least `ω > 0` such that `m^ω` is idempotent for every element `m`.
    ///
    /// `m^i` is idempotent exactly when `i` is at least the index of `m` and a
    /// multiple of its period, so `ω` is the least multiple of the lcm of all
    /// periods that reaches the largest index.
    pub fn idempotence_index(&self) -> IdempotenceIndex {
        let n = self.len();
        let mut index = vec![0; n];
        let mut period = vec![0; n];
        for x in self.elements() {
            let mut first_seen = vec![usize::MAX; n];
            let mut p = x;
            let mut i = 1;
            loop {
                if first_seen[p] != usize::MAX {
                    index[x] = first_seen[p];
                    period[x] = i - first_seen[p];
                    break;
                }
                first_seen[p] = i;
                p = self.mul(p, x);
                i += 1;
            }
        }
        let lcm = period.iter().fold(1usize, |acc, &p| crate::combin::lcm(acc, p));
        let max_index = index.iter().copied().max().unwrap_or(1);
        let omega = max_index.div_ceil(lcm).max(1) * lcm;
        IdempotenceIndex { omega, index, period }
    }

    /// The idempotent power `x^ω` of `x`.
    pub fn idempotent_power(&self, x: Elem) -> Elem {
        let mut p = x;
        while !self.is_idempotent(p) {
            p = self.mul(p, x);
        }
        p
    }

    /// The submonoid on `keep` (which must be closed and contain the
    /// identity), with elements renumbered in the order given.
    fn restrict(&self, keep: &[Elem]) -> FiniteMonoid {
        let mut renumber = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            renumber[old] = new;
        }
        let mut table = Vec::with_capacity(keep.len() * keep.len());
        for &x in keep {
            for &y in keep {
                table.push(renumber[self.mul(x, y)]);
            }
        }
        FiniteMonoid {
            names: keep.iter().map(|&x| self.names[x].clone()).collect(),
            table,
            identity: renumber[self.identity],
        }
    }
}

/// A morphism `μ: A* → M`, given by the images of the letters.
///
/// Canonical preimages (shortest, then lexicographically least in alphabet
/// order) are computed eagerly for every element of the image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    alphabet: Vec<String>,
    monoid: FiniteMonoid,
    images: Vec<Elem>,
    preimages: Vec<Option<Word>>,
}

impl Morphism {
    pub fn new(alphabet: Vec<String>, monoid: FiniteMonoid, images: Vec<Elem>) -> Result<Self, AlgebraError> {
        if alphabet.len() != images.len() {
            return Err(AlgebraError::AlphabetMismatch);
        }
        let mut seen = std::collections::HashSet::new();
        for a in &alphabet {
            if !seen.insert(a) {
                return Err(AlgebraError::DuplicateName(a.clone()));
            }
        }
        if let Some(&bad) = images.iter().find(|&&x| x >= monoid.len()) {
            return Err(AlgebraError::UnknownElement(bad.to_string()));
        }
        let preimages = canonical_preimages(&monoid, &images);
        Ok(Morphism { alphabet, monoid, images, preimages })
    }

    /// Single-character letter names `a`, `b`, ... for quick construction.
    pub fn with_letters(letters: &str, monoid: FiniteMonoid, images: Vec<Elem>) -> Result<Self, AlgebraError> {
        Self::new(letters.chars().map(String::from).collect(), monoid, images)
    }

    pub fn monoid(&self) -> &FiniteMonoid {
        &self.monoid
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet.len()
    }

    #[inline]
    pub fn letter_image(&self, a: Letter) -> Elem {
        self.images[a]
    }

    pub fn letter_images(&self) -> &[Elem] {
        &self.images
    }

    /// `μ(w)`. Letters must be in range.
    pub fn eval(&self, w: &[Letter]) -> Elem {
        w.iter().fold(self.monoid.identity(), |acc, &a| self.monoid.mul(acc, self.images[a]))
    }

    pub fn try_eval(&self, w: &[Letter]) -> Result<Elem, AlgebraError> {
        if let Some(&a) = w.iter().find(|&&a| a >= self.alphabet.len()) {
            return Err(AlgebraError::UnknownLetter(a.to_string()));
        }
        Ok(self.eval(w))
    }

    /// `prefix[i] = μ(w[..i])` for `i` in `0..=|w|`.
    pub fn prefix_images(&self, w: &[Letter]) -> Vec<Elem> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut acc = self.monoid.identity();
        out.push(acc);
        for &a in w {
            acc = self.monoid.mul(acc, self.images[a]);
            out.push(acc);
        }
        out
    }

    /// `suffix[i] = μ(w[i..])` for `i` in `0..=|w|`.
    pub fn suffix_images(&self, w: &[Letter]) -> Vec<Elem> {
        let mut out = vec![self.monoid.identity(); w.len() + 1];
        for i in (0..w.len()).rev() {
            out[i] = self.monoid.mul(self.images[w[i]], out[i + 1]);
        }
        out
    }

    pub fn letter_by_name(&self, name: &str) -> Option<Letter> {
        self.alphabet.iter().position(|a| a == name)
    }

    /// Parses a word whose letters all have single-character names.
    pub fn parse_word(&self, s: &str) -> Result<Word, AlgebraError> {
        s.chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                let name: &str = c.encode_utf8(&mut buf);
                self.letter_by_name(name).ok_or_else(|| AlgebraError::UnknownLetter(name.into()))
            })
            .collect()
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        w.iter().map(|&a| self.alphabet[a].as_str()).collect()
    }

    /// Canonical preimage of `x`: shortest word, then least in
    /// lexicographic order, mapping to `x`.
    pub fn preimage_word(&self, x: Elem) -> Result<&[Letter], AlgebraError> {
        match self.preimages.get(x) {
            Some(Some(w)) => Ok(w),
            Some(None) => Err(AlgebraError::NotInImage(self.monoid.name(x).into())),
            None => Err(AlgebraError::UnknownElement(x.to_string())),
        }
    }

    pub fn is_surjective(&self) -> bool {
        self.preimages.iter().all(Option::is_some)
    }

    /// Elements reachable from the letters, in increasing index order.
    pub fn image(&self) -> Vec<Elem> {
        self.monoid.elements().filter(|&x| self.preimages[x].is_some()).collect()
    }

    /// The same morphism with its codomain cut down to the generated
    /// submonoid. The second component maps old element indices to new ones.
    pub fn restrict_to_image(&self) -> (Morphism, Vec<Option<Elem>>) {
        let keep = self.image();
        let mut renumber = vec![None; self.monoid.len()];
        for (new, &old) in keep.iter().enumerate() {
            renumber[old] = Some(new);
        }
        let monoid = self.monoid.restrict(&keep);
        let images = self.images.iter().map(|&x| renumber[x].expect("letter in image")).collect();
        let preimages = keep.iter().map(|&x| self.preimages[x].clone()).collect();
        (Morphism { alphabet: self.alphabet.clone(), monoid, images, preimages }, renumber)
    }

    /// The product morphism `w ↦ (μ(w), ν(w))`, restricted to its image.
    /// Also returns, for each element of the result, its two components.
    pub fn product(&self, other: &Morphism) -> Result<(Morphism, Vec<(Elem, Elem)>), AlgebraError> {
        if self.alphabet != other.alphabet {
            return Err(AlgebraError::AlphabetMismatch);
        }
        let m = other.monoid.len();
        let monoid = self.monoid.product(&other.monoid);
        let images = self.images.iter().zip(&other.images).map(|(&x, &y)| x * m + y).collect();
        let full = Morphism::new(self.alphabet.clone(), monoid, images)?;
        let keep = full.image();
        let (restricted, _) = full.restrict_to_image();
        Ok((restricted, keep.into_iter().map(|p| (p / m, p % m)).collect()))
    }
}

fn canonical_preimages(monoid: &FiniteMonoid, images: &[Elem]) -> Vec<Option<Word>> {
    let mut pre: Vec<Option<Word>> = vec![None; monoid.len()];
    pre[monoid.identity()] = Some(Vec::new());
    let mut queue = VecDeque::from([(monoid.identity(), Vec::new())]);
    // Words leave the queue in length-lexicographic order, so the first word
    // reaching an element is its canonical preimage.
    while let Some((x, w)) = queue.pop_front() {
        for (a, &img) in images.iter().enumerate() {
            let y = monoid.mul(x, img);
            if pre[y].is_none() {
                let mut v: Word = w.clone();
                v.push(a);
                pre[y] = Some(v.clone());
                queue.push_back((y, v));
            }
        }
    }
    pre
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "μ over |M| = {}:", self.monoid.len())?;
        for (a, &x) in self.alphabet.iter().zip(&self.images) {
            write!(f, " {a}↦{}", self.monoid.name(x))?;
        }
        Ok(())
    }
}

/// JSON form of a morphism: named elements, a table of element names,
/// the identity name and the letter images.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub elements: Vec<String>,
    pub identity: String,
    pub table: Vec<Vec<String>>,
    pub letters: BTreeMap<String, String>,
    /// Alphabet order; defaults to the sorted letter names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
}

impl MorphismDoc {
    /// Builds the morphism as written, without restricting it to its image.
    pub fn build(&self) -> Result<Morphism, AlgebraError> {
        let lookup = |name: &str| {
            self.elements.iter().position(|e| e == name).ok_or_else(|| AlgebraError::UnknownElement(name.into()))
        };
        let table = self
            .table
            .iter()
            .map(|row| row.iter().map(|e| lookup(e)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let monoid = FiniteMonoid::with_names(self.elements.clone(), table, lookup(&self.identity)?)?;
        let alphabet = match &self.alphabet {
            Some(order) => {
                if order.len() != self.letters.len() {
                    return Err(AlgebraError::AlphabetMismatch);
                }
                order.clone()
            }
            None => self.letters.keys().cloned().collect(),
        };
        let images = alphabet
            .iter()
            .map(|a| {
                let e = self.letters.get(a).ok_or_else(|| AlgebraError::UnknownLetter(a.clone()))?;
                lookup(e)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Morphism::new(alphabet, monoid, images)
    }

    pub fn from_morphism(mu: &Morphism) -> Self {
        let monoid = mu.monoid();
        MorphismDoc {
            elements: monoid.names().to_vec(),
            identity: monoid.name(monoid.identity()).into(),
            table: monoid
                .elements()
                .map(|x| monoid.elements().map(|y| monoid.name(monoid.mul(x, y)).into()).collect())
                .collect(),
            letters: mu
                .alphabet()
                .iter()
                .zip(mu.letter_images())
                .map(|(a, &x)| (a.clone(), monoid.name(x).into()))
                .collect(),
            alphabet: Some(mu.alphabet().to_vec()),
        }
    }
}
