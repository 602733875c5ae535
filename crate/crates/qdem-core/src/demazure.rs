//! The q-deformed Demazure product driven by a random staircase word.
//!
//! A letter `k` acts on the current permutation `sigma` on the right.
//! When the letter would increase length (`sigma(k) < sigma(k+1)`) the move
//! is always taken; otherwise it is taken with probability `q`. Each letter
//! of the deterministic staircase word is retained independently with
//! probability `p` before acting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::coins::{CoinStream, Purpose};
use crate::perm::Permutation;

/// A word in the simple reflections `s_1, …, s_{n-1}` (letters are indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub n: usize,
    pub letters: Vec<usize>,
}

/// The staircase reduced word for the longest element of `S_n`:
/// `(s_{n-1}) (s_{n-2} s_{n-1}) … (s_1 s_2 … s_{n-1})`,
/// of length `n(n-1)/2`. Requires `n >= 2`.
pub fn staircase_word(n: usize) -> Word {
    assert!(n >= 2, "staircase word needs n >= 2");
    let mut letters = Vec::with_capacity(n * (n - 1) / 2);
    for start in (1..n).rev() {
        for k in start..n {
            letters.push(k);
        }
    }
    Word { n, letters }
}

/// One q-Demazure step: act by `s_k` on the right.
///
/// * length-increasing (`sigma(k) < sigma(k+1)`): always move;
/// * length-decreasing: move only when `qflip < q`.
///
/// `qflip` is the uniform coin for this letter; it is ignored in the
/// increasing case so coupled runs consume coins identically either way.
pub fn q_demazure_step(sigma: &Permutation, k: usize, q: f64, qflip: f64) -> Permutation {
    if sigma.image(k) < sigma.image(k + 1) || qflip < q {
        sigma.right_multiply_simple(k)
    } else {
        sigma.clone()
    }
}

/// Runs the word sampler: thin the staircase word by `p`, then fold the
/// surviving letters through the q-Demazure product starting from the
/// identity. Coins are addressed by letter position `t`, so the draw is a
/// pure function of `(n, p, q, seed)`.
///
/// When `retain_word` is set, also returns the indicator of which letters
/// survived thinning (used by coupling tests and diagnostics).
pub fn sample_sigma_word(
    n: usize,
    p: f64,
    q: f64,
    coins: &CoinStream,
    retain_word: Option<&mut Vec<bool>>,
) -> Permutation {
    check_params(n, p, q);
    let word = staircase_word(n);
    let mut kept = retain_word;
    if let Some(buf) = kept.as_deref_mut() {
        buf.clear();
    }
    let mut sigma = Permutation::identity(n);
    for (t, &k) in word.letters.iter().enumerate() {
        let keep = coins.letter(t as u64, Purpose::Keep) < p;
        if let Some(buf) = kept.as_deref_mut() {
            buf.push(keep);
        }
        if keep {
            let qflip = coins.letter(t as u64, Purpose::QFlip);
            sigma = q_demazure_step(&sigma, k, q, qflip);
        }
    }
    sigma
}

pub(crate) fn check_params(n: usize, p: f64, q: f64) {
    assert!(n >= 2, "need n >= 2");
    assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q), "p and q must lie in [0, 1]");
}

/// Largest `n` for which the exact law is tabulated (`8! = 40320` states
/// would already be fine, but the transport below is `O(n! · n^2 / 2)` per
/// letter and the CLI keeps output sizes sane).
pub const EXACT_LAW_MAX_N: usize = 7;

/// Exact distribution over `S_n` as a sorted map, masses summing to 1.
pub type Law = BTreeMap<Permutation, f64>;

/// Exact law of the word sampler, by transporting mass letter by letter.
///
/// Per retained letter `k` the one-step kernel from `sigma` is:
/// * increasing case: mass `p` to `sigma s_k`, `1 - p` stays;
/// * decreasing case: mass `p q` to `sigma s_k`, `1 - p q` stays.
///
/// Returns `None` when `n > EXACT_LAW_MAX_N`.
pub fn exact_law(n: usize, p: f64, q: f64) -> Option<Law> {
    check_params(n, p, q);
    if n > EXACT_LAW_MAX_N {
        return None;
    }
    let word = staircase_word(n);
    let mut law: Law = BTreeMap::new();
    law.insert(Permutation::identity(n), 1.0);
    for &k in &word.letters {
        let mut next: Law = BTreeMap::new();
        for (sigma, mass) in &law {
            let moved = sigma.right_multiply_simple(k);
            let move_mass = if sigma.image(k) < sigma.image(k + 1) {
                p
            } else {
                p * q
            };
            if move_mass > 0.0 {
                *next.entry(moved).or_insert(0.0) += mass * move_mass;
            }
            if move_mass < 1.0 {
                *next.entry(sigma.clone()).or_insert(0.0) += mass * (1.0 - move_mass);
            }
        }
        let total: f64 = next.values().sum();
        debug_assert!((total - 1.0).abs() < 1e-12, "mass leaked: {total}");
        law = next;
    }
    Some(law)
}

/// Mean number of inversions under the exact law.
pub fn expected_inversions(law: &Law) -> f64 {
    law.iter()
        .map(|(sigma, mass)| sigma.length() as f64 * mass)
        .sum()
}

/// Total variation distance between two laws on the same `S_n`:
/// half the L1 distance of the mass functions.
pub fn total_variation(a: &Law, b: &Law) -> f64 {
    let mut l1 = 0.0;
    for (sigma, mass) in a {
        l1 += (mass - b.get(sigma).copied().unwrap_or(0.0)).abs();
    }
    for (sigma, mass) in b {
        if !a.contains_key(sigma) {
            l1 += mass;
        }
    }
    l1 / 2.0
}

/// Turns a histogram of sampled permutations into a probability law.
pub fn empirical_law(counts: &BTreeMap<Permutation, u64>) -> Law {
    let total: u64 = counts.values().sum();
    assert!(total > 0);
    counts
        .iter()
        .map(|(sigma, &c)| (sigma.clone(), c as f64 / total as f64))
        .collect()
}
