//! Small named machines and morphisms used by tests, examples and the CLI.

use std::sync::Arc;

use crate::algebra::{FiniteMonoid, Letter, Morphism};
use crate::machines::{MachineKind, NestedMachine};

/// `{a, b, …}` (first `n` letters) into the trivial monoid.
pub fn trivial_morphism(n: usize) -> Arc<Morphism> {
    let letters: String = (b'a'..).take(n).map(char::from).collect();
    Arc::new(Morphism::with_letters(&letters, FiniteMonoid::trivial(), vec![0; n]).unwrap())
}

/// `({1, -1, 0}, ×)` with `a ↦ -1` and `b, c ↦ 0`.
pub fn signs_morphism() -> Arc<Morphism> {
    let m = FiniteMonoid::with_names(
        vec!["1".into(), "-1".into(), "0".into()],
        vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 2, 2]],
        0,
    )
    .unwrap();
    Arc::new(Morphism::with_letters("abc", m, vec![1, 2, 2]).unwrap())
}

/// `{a, b}` into `{1, A, B}` where `A = μ(a⁺)` and `B` absorbs: the image
/// of a word tells whether it is empty, a block of `a`, or contains `b`.
pub fn block_morphism() -> Arc<Morphism> {
    let m = FiniteMonoid::with_names(
        vec!["1".into(), "A".into(), "B".into()],
        vec![vec![0, 1, 2], vec![1, 1, 2], vec![2, 2, 2]],
        0,
    )
    .unwrap();
    Arc::new(Morphism::with_letters("ab", m, vec![1, 2]).unwrap())
}

/// The constant-zero machine of a given level.
pub fn zero(kind: MachineKind, mu: Arc<Morphism>, level: usize) -> NestedMachine {
    let mut m = NestedMachine::base(kind, mu.clone(), |_, _, _| 0);
    for _ in 1..level {
        m = NestedMachine::nested(kind, mu.clone(), vec![m], |_, _, _| 0).unwrap();
    }
    m
}

/// `nb_a`: the number of occurrences of `letter`, over the first `n`
/// letters.
pub fn nb_letter(n: usize, letter: Letter) -> NestedMachine {
    let mu = trivial_morphism(n);
    NestedMachine::base(MachineKind::Marble, mu, move |_, a, _| u128::from(a % n == letter))
}

/// `nb_{a,b}: w ↦ |w|_a·|w|_b` as a 2-level machine of the given kind.
/// The marble version counts, at each position, the letters of the other
/// kind to its left; the blind and pebble versions count `b` at each `a`.
pub fn nb_product(kind: MachineKind) -> NestedMachine {
    let mu = trivial_morphism(2);
    let count = |target: Letter| NestedMachine::base(kind, mu.clone(), move |_, a, _| u128::from(a % 2 == target));
    match kind {
        MachineKind::Marble => {
            NestedMachine::nested(kind, mu.clone(), vec![count(1), count(0)], |_, a, _| a % 2).unwrap()
        }
        _ => {
            let zero = zero(kind, mu.clone(), 1);
            NestedMachine::nested(kind, mu.clone(), vec![count(1), zero], |_, a, _| a % 2).unwrap()
        }
    }
}

/// `itpow₂: a^{n₀}b a^{n₁}b ⋯ ↦ Σ nᵢ²` as a 2-marble machine over
/// [`block_morphism`]. At the `t`-th letter of a block of `a` the external
/// outputs `2t − 1`.
pub fn itpow2() -> NestedMachine {
    let mu = block_morphism();
    let inner = NestedMachine::base(MachineKind::Marble, mu.clone(), |_, a, n| match (a, n) {
        (0, 0) => 1,
        (0, 1) => 2,
        _ => 0,
    });
    let z = zero(MachineKind::Marble, mu.clone(), 1);
    NestedMachine::nested(MachineKind::Marble, mu, vec![inner, z], |_, a, _| a).unwrap()
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["nb_a", "nb_ab", "nb_ab_blind", "nb_ab_pebble", "itpow2"];

pub fn by_name(name: &str) -> Option<NestedMachine> {
    Some(match name {
        "nb_a" => nb_letter(2, 0),
        "nb_ab" => nb_product(MachineKind::Marble),
        "nb_ab_blind" => nb_product(MachineKind::Blind),
        "nb_ab_pebble" => nb_product(MachineKind::Pebble),
        "itpow2" => itpow2(),
        _ => return None,
    })
}
