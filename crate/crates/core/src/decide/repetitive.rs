//! Searching for violations of k-repetitiveness on doubly pumped words.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DecideError;
use crate::algebra::{Letter, Morphism, Word};
use crate::{Evaluable, Natural};

/// Words `α, α₀..α_k, u₁..u_k, β`, an exponent `ω` and the sample values
/// of every `Xᵢ` and `Yᵢ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepetitivenessProbe {
    pub alpha: Word,
    pub alphas: Vec<Word>,
    pub us: Vec<Word>,
    pub beta: Word,
    pub omega: usize,
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    /// Smallest allowed sample value.
    pub min_exponent: usize,
}

pub const DEFAULT_MIN_EXPONENT: usize = 3;

impl RepetitivenessProbe {
    pub fn k(&self) -> usize {
        self.us.len()
    }

    pub fn validate(&self) -> Result<(), DecideError> {
        let bad = |m: String| Err(DecideError::InvalidProbe(m));
        if self.alphas.len() != self.us.len() + 1 {
            return bad(format!("{} words uᵢ need {} words αᵢ", self.us.len(), self.us.len() + 1));
        }
        if self.omega == 0 {
            return bad("ω must be positive".into());
        }
        if self.xs.is_empty() || self.ys.is_empty() {
            return bad("empty sample grid".into());
        }
        if let Some(v) = self.xs.iter().chain(&self.ys).find(|&&v| v < self.min_exponent) {
            return bad(format!("sample value {v} is below {}", self.min_exponent));
        }
        Ok(())
    }

    /// Checks that `ω` is a multiple of the idempotence index of `mu`.
    pub fn check_omega(&self, mu: &Morphism) -> Result<(), DecideError> {
        let omega = mu.monoid().idempotence_index().omega;
        if !self.omega.is_multiple_of(omega) {
            return Err(DecideError::InvalidProbe(format!(
                "ω = {} is not a multiple of the idempotence index {omega}",
                self.omega
            )));
        }
        Ok(())
    }

    /// `W(X̄) = α₀ Π uᵢ^{ωXᵢ} αᵢ`.
    pub fn block(&self, xs: &[usize]) -> Word {
        let mut out = self.alphas[0].clone();
        for (i, u) in self.us.iter().enumerate() {
            for _ in 0..self.omega * xs[i] {
                out.extend_from_slice(u);
            }
            out.extend_from_slice(&self.alphas[i + 1]);
        }
        out
    }

    /// `α w^{2ω−1} W(X̄) w^{ω−1} W(Ȳ) w^ω β` with `w = W(1, …, 1)`.
    pub fn pumped(&self, xs: &[usize], ys: &[usize]) -> Word {
        let w = self.block(&vec![1; self.k()]);
        let o = self.omega;
        let mut out = self.alpha.clone();
        let mut push = |part: &[Letter], times: usize| (0..times).for_each(|_| out.extend_from_slice(part));
        push(&w, 2 * o - 1);
        push(&self.block(xs), 1);
        push(&w, o - 1);
        push(&self.block(ys), 1);
        push(&w, o);
        out.extend_from_slice(&self.beta);
        out
    }

    /// Every `(X̄, Ȳ)` of the grid, `X̄` outermost, lexicographic.
    fn grid(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let k = self.k();
        let vectors = |vals: &[usize]| {
            let mut out = vec![Vec::new()];
            for _ in 0..k {
                out = out
                    .into_iter()
                    .flat_map(|v: Vec<usize>| vals.iter().map(move |&x| [v.clone(), vec![x]].concat()))
                    .collect();
            }
            out
        };
        let (xv, yv) = (vectors(&self.xs), vectors(&self.ys));
        xv.iter().flat_map(|x| yv.iter().map(move |y| (x.clone(), y.clone()))).collect()
    }
}

/// Probe description with words spelled in letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeDoc {
    #[serde(default)]
    pub alpha: String,
    pub alphas: Vec<String>,
    pub us: Vec<String>,
    #[serde(default)]
    pub beta: String,
    pub omega: usize,
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    #[serde(default)]
    pub min_exponent: Option<usize>,
}

impl ProbeDoc {
    pub fn build(&self, mu: &Morphism) -> Result<RepetitivenessProbe, DecideError> {
        let parse = |s: &str| mu.parse_word(s).map_err(|e| DecideError::InvalidProbe(e.to_string()));
        let probe = RepetitivenessProbe {
            alpha: parse(&self.alpha)?,
            alphas: self.alphas.iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
            us: self.us.iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
            beta: parse(&self.beta)?,
            omega: self.omega,
            xs: self.xs.clone(),
            ys: self.ys.clone(),
            min_exponent: self.min_exponent.unwrap_or(DEFAULT_MIN_EXPONENT),
        };
        probe.validate()?;
        Ok(probe)
    }
}

/// One pumped sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpSample {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    pub word: Word,
    pub value: Natural,
}

/// Two samples with equal `X̄ + Ȳ` and different values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpWitness {
    pub probe: RepetitivenessProbe,
    pub first: PumpSample,
    pub second: PumpSample,
}

/// Evaluates `f` on the whole grid of `probe` and returns the first pair of
/// samples (in grid order) with equal sums and different values, if any.
/// The absence of a witness proves nothing beyond the grid.
pub fn falsify_repetitive(f: &dyn Evaluable, probe: &RepetitivenessProbe) -> crate::Result<Option<PumpWitness>> {
    probe.validate()?;
    let samples: Vec<PumpSample> = probe
        .grid()
        .into_par_iter()
        .map(|(xs, ys)| {
            let word = probe.pumped(&xs, &ys);
            let value = f.evaluate(&word)?;
            Ok(PumpSample { xs, ys, word, value })
        })
        .collect::<crate::Result<_>>()?;
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        let sum: Vec<usize> = s.xs.iter().zip(&s.ys).map(|(x, y)| x + y).collect();
        match seen.get(&sum) {
            Some(&j) if samples[j].value != s.value => {
                return Ok(Some(PumpWitness { probe: probe.clone(), first: samples[j].clone(), second: s.clone() }));
            }
            Some(_) => {}
            None => {
                seen.insert(sum, i);
            }
        }
    }
    Ok(None)
}

/// Tries `attempts` random probes (words of length at most `max_len`)
/// drawn from a seeded generator; the first witness found is returned.
#[allow(clippy::too_many_arguments)]
pub fn falsify_repetitive_random(
    f: &dyn Evaluable,
    k: usize,
    omega: usize,
    xs: &[usize],
    ys: &[usize],
    max_len: usize,
    attempts: usize,
    seed: u64,
) -> crate::Result<Option<PumpWitness>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.alphabet_len();
    let word = |rng: &mut ChaCha8Rng, min: usize| -> Word {
        let len = rng.gen_range(min..=max_len.max(min));
        (0..len).map(|_| rng.gen_range(0..n)).collect()
    };
    for _ in 0..attempts {
        let probe = RepetitivenessProbe {
            alpha: word(&mut rng, 0),
            alphas: (0..=k).map(|_| word(&mut rng, 0)).collect(),
            us: (0..k).map(|_| word(&mut rng, 1)).collect(),
            beta: word(&mut rng, 0),
            omega,
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            min_exponent: xs.iter().chain(ys).copied().min().unwrap_or(DEFAULT_MIN_EXPONENT),
        };
        if let Some(w) = falsify_repetitive(f, &probe)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
