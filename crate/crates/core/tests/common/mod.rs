//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use polyblind::{Elem, FiniteMonoid, Letter, MachineKind, Morphism, Natural, NestedMachine, Word};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The transformation monoid generated by `letters` random maps on
/// `points` points (maps compose left to right), or `None` when it has
/// more than `max_size` elements.
pub fn transformation_morphism(rng: &mut TestRng, points: usize, letters: usize, max_size: usize) -> Option<Morphism> {
    let gens: Vec<Vec<u8>> =
        (0..letters).map(|_| (0..points).map(|_| rng.gen_range(0..points) as u8).collect()).collect();
    let compose = |x: &[u8], y: &[u8]| -> Vec<u8> { x.iter().map(|&p| y[p as usize]).collect() };
    let identity: Vec<u8> = (0..points as u8).collect();
    let mut elems = vec![identity];
    let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(elems[0].clone(), 0)]);
    let mut at = 0;
    while at < elems.len() {
        for g in &gens {
            let next = compose(&elems[at], g);
            if !index.contains_key(&next) {
                index.insert(next.clone(), elems.len());
                elems.push(next);
                if elems.len() > max_size {
                    return None;
                }
            }
        }
        at += 1;
    }
    let table = elems.iter().map(|x| elems.iter().map(|y| index[&compose(x, y)]).collect()).collect();
    let monoid = FiniteMonoid::new(table, 0).expect("transformation monoids are monoids");
    let images = gens.iter().map(|g| index[g]).collect();
    let names: String = (b'a'..).take(letters).map(char::from).collect();
    Some(Morphism::with_letters(&names, monoid, images).unwrap())
}

/// A random morphism with at most `max_size` elements over `letters`
/// letters.
pub fn random_morphism(rng: &mut TestRng, letters: usize, max_size: usize) -> Arc<Morphism> {
    loop {
        let points = rng.gen_range(1..=3);
        if let Some(mu) = transformation_morphism(rng, points, letters, max_size) {
            return Arc::new(mu);
        }
    }
}

fn random_table(rng: &mut TestRng, mu: &Morphism, nletters: usize, max: u64) -> Vec<u64> {
    let m = mu.monoid().len();
    (0..m * nletters * m).map(|_| rng.gen_range(0..=max)).collect()
}

fn lookup(mu: &Morphism, nletters: usize) -> impl Fn(Elem, Letter, Elem) -> usize {
    let m = mu.monoid().len();
    move |x, a, y| (x * nletters + a) * m + y
}

/// A random machine of the given kind and level whose tables have random
/// outputs in `0..=2` and one or two externals per level.
pub fn random_machine(rng: &mut TestRng, kind: MachineKind, mu: &Arc<Morphism>, level: usize) -> NestedMachine {
    let nletters = if kind == MachineKind::Pebble { 2 * mu.alphabet_len() } else { mu.alphabet_len() };
    let at = lookup(mu, nletters);
    if level == 1 {
        let t = random_table(rng, mu, nletters, 2);
        return NestedMachine::base(kind, mu.clone(), |x, a, y| Natural::from(t[at(x, a, y)]));
    }
    let count = rng.gen_range(1..=2);
    let externals: Vec<_> = (0..count).map(|_| random_machine(rng, kind, mu, level - 1)).collect();
    let t = random_table(rng, mu, nletters, count as u64 - 1);
    NestedMachine::nested(kind, mu.clone(), externals, |x, a, y| t[at(x, a, y)] as usize).unwrap()
}

/// A 2-marble machine whose external, at a position holding `a` in a word
/// of image `g`, outputs `c_g(a, b)` at each position holding `b`, for a
/// random symmetric `c_g`. Its productions only see the letters at the
/// chosen positions and the image of the whole word.
pub fn random_symmetric_machine(rng: &mut TestRng, mu: &Arc<Morphism>) -> NestedMachine {
    let n = mu.alphabet_len();
    let monoid = mu.monoid();
    let mut externals = Vec::new();
    for _g in monoid.elements() {
        let upper: Vec<Vec<u64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..=3)).collect()).collect();
        let c: Vec<Vec<u64>> = (0..n).map(|a| (0..n).map(|b| upper[a.min(b)][a.max(b)]).collect()).collect();
        for row in &c {
            let row = row.clone();
            externals.push(NestedMachine::base(MachineKind::Marble, mu.clone(), move |_, b, _| Natural::from(row[b])));
        }
    }
    let mu2 = mu.clone();
    NestedMachine::nested(MachineKind::Marble, mu.clone(), externals, move |x, a, y| {
        let g = mu2.monoid().product_of([x, mu2.letter_image(a), y]);
        g * n + a
    })
    .unwrap()
}

pub fn random_word(rng: &mut TestRng, letters: usize, min: usize, max: usize) -> Word {
    let len = rng.gen_range(min..=max);
    (0..len).map(|_| rng.gen_range(0..letters)).collect()
}

/// A short word with idempotent image, if one turns up quickly.
pub fn random_idempotent_word(rng: &mut TestRng, mu: &Morphism, max_len: usize) -> Option<Word> {
    (0..64).find_map(|_| {
        let w = random_word(rng, mu.alphabet_len(), 1, max_len);
        mu.monoid().is_idempotent(mu.eval(&w)).then_some(w)
    })
}
